//! Deterministic quadrature over polydiscs, monomial tori, the two-branch residue cycle and the
//! Fubini averaging kernel.

mod cycle;
mod fubini;
mod polydisc;

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock, RwLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use cycle::{integrate_pt_cycle, integrate_torus_monomial, pt_cycle_value, track_branch, CycleGrid, Orientation, PtCycle};
pub use fubini::{fubini_average, CachedSampler, FubiniGrid, FubiniSampler};
pub use polydisc::integrate_polydisc;

/// Gauss–Legendre nodes and weights on [−1, 1], memoized per order.
pub fn gl(order: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.read().unwrap().get(&order) {
        return r.clone();
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
    let mut pts: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts = Arc::new(pts);
    cache.write().unwrap().insert(order, pts.clone());
    pts
}

/// Nodes and weights of `order`-point Gauss–Legendre on each panel between consecutive breakpoints.
pub fn panel_rule(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let g = gl(order);
    let mut out = Vec::with_capacity(breaks.len().saturating_sub(1) * order);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(g.iter().map(|&(x, wt)| (mid + half * x, half * wt)));
    }
    out
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Default, Debug)]
pub struct Accumulator {
    sum: C64,
    comp: C64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, x: C64) {
        let t = self.sum + x;
        let c = |s: f64, x: f64, t: f64| if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        self.comp.re += c(self.sum.re, x.re, t.re);
        self.comp.im += c(self.sum.im, x.im, t.im);
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

/// Fixed-order pairwise reduction.
pub fn pairwise_sum(xs: &[C64]) -> C64 {
    match xs.len() {
        0 => C64::default(),
        1 => xs[0],
        k => pairwise_sum(&xs[..k / 2]) + pairwise_sum(&xs[k / 2..]),
    }
}

/// How radial panels are placed on [0, a] (a = inner radius of the flat region).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    /// Breakpoints a·(k/P)^p, k = 0..P.
    Power { exponent: f64, panels: usize },
    /// Breakpoints floor, floor·ratio, … up to a, plus [0, floor].
    Geometric { ratio: f64, floor: f64 },
}

/// Radial and angular rule for one polar axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRule {
    /// Gauss–Legendre points per radial panel.
    pub order: usize,
    pub grading: Grading,
    /// Uniform panels across the bump transition [a, b].
    pub outer_panels: usize,
    /// Uniform angular nodes.
    pub angular: usize,
}

impl Default for AxisRule {
    fn default() -> Self {
        AxisRule { order: 6, grading: Grading::Geometric { ratio: 3.0, floor: 1e-5 }, outer_panels: 6, angular: 16 }
    }
}

impl AxisRule {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::LabError::Invalid(m.into()));
        if self.order < 4 || self.angular < 4 || self.outer_panels < 1 {
            return bad("grid counts must be at least 4 (outer panels at least 1)");
        }
        match self.grading {
            Grading::Power { exponent, panels } if exponent < 1.0 || panels < 1 => bad("power grading needs exponent ≥ 1"),
            Grading::Geometric { ratio, floor } if ratio <= 1.0 || floor <= 0.0 => bad("geometric grading needs ratio > 1, floor > 0"),
            _ => Ok(()),
        }
    }

    /// The coarser companion rule used for the error estimate.
    pub fn coarsened(&self) -> AxisRule {
        AxisRule { order: (self.order * 3 / 4).max(3), angular: (self.angular * 3 / 4).max(4), ..*self }
    }

    /// Radial breakpoints for an axis with flat radius `a`, support radius `b` and extra cuts.
    pub fn breaks(&self, a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
        let mut br = vec![0.0];
        match self.grading {
            Grading::Power { exponent, panels } => {
                br.extend((1..=panels).map(|k| a * (k as f64 / panels as f64).powf(exponent)));
            }
            Grading::Geometric { ratio, floor } => {
                let mut x = floor.min(a);
                let mut inner = vec![];
                while x < a / ratio.sqrt() {
                    inner.push(x);
                    x *= ratio;
                }
                br.extend(inner);
                br.push(a);
            }
        }
        br.extend((1..=self.outer_panels).map(|k| a + (b - a) * k as f64 / self.outer_panels as f64));
        for &e in extra {
            if e > 0.0 && e < b {
                br.push(e);
            }
        }
        br.sort_by(f64::total_cmp);
        br.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1e-300));
        br
    }
}

/// Polar tensor grid, one rule per axis, plus the rule used around singular-locus hints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<AxisRule>,
    /// Rule for polar patches centred at hint points on the last axis.
    #[serde(default)]
    pub hint: Option<AxisRule>,
    /// 2 = also run the coarsened grid and report the difference; 1 = no error estimate.
    #[serde(default = "two")]
    pub levels: usize,
}

fn two() -> usize {
    2
}

impl GridSpec {
    pub fn uniform(n: usize, rule: AxisRule) -> Self {
        GridSpec { axes: vec![rule; n], hint: None, levels: 2 }
    }

    pub fn with_hint(mut self, rule: AxisRule) -> Self {
        self.hint = Some(rule);
        self
    }

    pub fn single_level(mut self) -> Self {
        self.levels = 1;
        self
    }

    pub fn validate(&self, n: usize) -> crate::Result<()> {
        if self.axes.len() != n {
            return Err(crate::LabError::Dimension { expected: n, got: self.axes.len() });
        }
        self.axes.iter().chain(self.hint.iter()).try_for_each(AxisRule::validate)
    }

    pub fn coarsened(&self) -> GridSpec {
        GridSpec { axes: self.axes.iter().map(AxisRule::coarsened).collect(), hint: self.hint.map(|h| h.coarsened()), levels: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: C64,
    pub error_estimate: f64,
    pub nodes: u64,
    pub wall_ms: f64,
}

impl QuadratureResult {
    /// Fails when the error estimate exceeds `tol`.
    pub fn require(self, tol: f64) -> crate::Result<Self> {
        if self.error_estimate > tol {
            return Err(crate::LabError::NotConverged { value: self.value, error: self.error_estimate, tol });
        }
        Ok(self)
    }
}
