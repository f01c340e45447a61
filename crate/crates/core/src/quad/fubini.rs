use std::collections::HashMap;
use std::sync::RwLock;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pairwise_sum, panel_rule, Accumulator, QuadratureResult};
use crate::error::{LabError, Result};

/// Values I(t₁, t₂) of a cycle integral.
pub trait FubiniSampler: Sync {
    fn sample(&self, t1: f64, t2: f64) -> Result<C64>;

    /// A box (0, T₁] × (0, T₂] outside of which the sampler vanishes identically, if known.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    /// Values of t₂ near which I(t₁, ·) varies rapidly, for panel placement.
    fn breaks_t2(&self, _t1: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64, f64) -> C64 + Sync> FubiniSampler for F {
    fn sample(&self, t1: f64, t2: f64) -> Result<C64> {
        Ok(self(t1, t2))
    }
}

/// Memoizing wrapper; lookups take a shared lock, inserts an exclusive one.
pub struct CachedSampler<S> {
    inner: S,
    cache: RwLock<HashMap<(u64, u64), C64>>,
}

impl<S: FubiniSampler> CachedSampler<S> {
    pub fn new(inner: S) -> Self {
        CachedSampler { inner, cache: RwLock::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<S: FubiniSampler> FubiniSampler for CachedSampler<S> {
    fn sample(&self, t1: f64, t2: f64) -> Result<C64> {
        let key = (t1.to_bits(), t2.to_bits());
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = self.inner.sample(t1, t2)?;
        self.cache.write().unwrap().insert(key, v);
        Ok(v)
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.inner.support()
    }

    fn breaks_t2(&self, t1: f64) -> Vec<f64> {
        self.inner.breaks_t2(t1)
    }
}

/// Panel rule in u = τ/(1+τ), τ = t/ε, where the kernel ε dt/(t+ε)² becomes du.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FubiniGrid {
    pub order: usize,
    /// Uniform panels on [0, u_max].
    pub panels: usize,
    /// Extra geometric panels toward u = 0 and toward u = 1 (ratio 2).
    pub graded: usize,
    /// Sampling range T when the sampler declares no support.
    pub range: f64,
    /// Largest admissible kernel mass outside the sampled range.
    pub tol: f64,
}

impl Default for FubiniGrid {
    fn default() -> Self {
        FubiniGrid { order: 6, panels: 4, graded: 16, range: 1e6, tol: 1e-6 }
    }
}

impl FubiniGrid {
    fn rule(&self, eps: f64, top: f64, order: usize, extra: &[f64]) -> Vec<(f64, f64)> {
        let umax = top / (top + eps);
        let mut br: Vec<f64> = (0..=self.panels).map(|k| umax * k as f64 / self.panels as f64).collect();
        let first = umax / self.panels as f64;
        for k in 1..=self.graded {
            let d = first * 0.5f64.powi(k as i32);
            br.push(d);
            br.push(umax - d);
        }
        br.extend(extra.iter().filter(|&&t| t > 0.0 && t < top).map(|t| t / (t + eps)));
        br.sort_by(f64::total_cmp);
        br.dedup();
        panel_rule(&br, order).into_iter().map(|(u, w)| (eps * u / (1.0 - u), w)).collect()
    }
}

/// ∫∫ ε₁ε₂ I(t₁,t₂) dt₁dt₂ / ((t₁+ε₁)²(t₂+ε₂)²), with a coarser companion rule for the error.
pub fn fubini_average(eps1: f64, eps2: f64, sampler: &dyn FubiniSampler, grid: &FubiniGrid) -> Result<QuadratureResult> {
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(LabError::Invalid("ε must be positive".into()));
    }
    let (top1, top2) = match sampler.support() {
        Some(t) => t,
        None => {
            let outside = 1.0 - (1.0 - eps1 / (grid.range + eps1)) * (1.0 - eps2 / (grid.range + eps2));
            if outside > grid.tol {
                return Err(LabError::Invalid(format!("kernel mass {outside:.3e} lies outside the sampled range {}", grid.range)));
            }
            (grid.range, grid.range)
        }
    };
    let t0 = Instant::now();
    let run = |order: usize| -> Result<(C64, u64)> {
        let r1 = grid.rule(eps1, top1, order, &[]);
        let rows: Vec<Result<(C64, u64)>> = r1
            .par_iter()
            .map(|&(t1, w1)| {
                let r2 = grid.rule(eps2, top2, order, &sampler.breaks_t2(t1));
                let mut acc = Accumulator::default();
                for &(t2, w2) in &r2 {
                    acc.add(sampler.sample(t1, t2)? * (w1 * w2));
                }
                Ok((acc.value(), r2.len() as u64))
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let nodes = rows.iter().map(|r| r.1).sum();
        let values: Vec<C64> = rows.into_iter().map(|r| r.0).collect();
        Ok((pairwise_sum(&values), nodes))
    };
    let (value, n1) = run(grid.order)?;
    let (coarse, n2) = run((grid.order * 3 / 4).max(3))?;
    Ok(QuadratureResult { value, error_estimate: (value - coarse).norm(), nodes: n1 + n2, wall_ms: t0.elapsed().as_secs_f64() * 1e3 })
}
