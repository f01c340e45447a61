//! ε-path sweeps, limit extrapolation, Hölder fits and the result cache.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::integrand::{build, ExprSpec};
use crate::quad::{integrate_polydisc, GridSpec, QuadratureResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathKind {
    /// (aε, bε)
    Ray { a: f64, b: f64 },
    /// (ε^{s₁}, ε^{s₂})
    Parabolic { s1: f64, s2: f64 },
    /// (ε, fixed)
    Axis1 { fixed: f64 },
    /// (fixed, ε)
    Axis2 { fixed: f64 },
    /// (ε⁴, cε²)
    DiagPt { c: f64 },
}

/// Geometric parameter ladder start·ratio^k, k < rungs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub start: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder { start: 0.1, ratio: 0.25, rungs: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsPath {
    #[serde(flatten)]
    pub kind: PathKind,
    #[serde(default)]
    pub ladder: Ladder,
}

impl EpsPath {
    pub fn ray(a: f64, b: f64) -> Self {
        EpsPath { kind: PathKind::Ray { a, b }, ladder: Ladder::default() }
    }

    pub fn parabolic(s1: f64, s2: f64) -> Self {
        EpsPath { kind: PathKind::Parabolic { s1, s2 }, ladder: Ladder::default() }
    }

    pub fn axis1(fixed: f64) -> Self {
        EpsPath { kind: PathKind::Axis1 { fixed }, ladder: Ladder::default() }
    }

    pub fn axis2(fixed: f64) -> Self {
        EpsPath { kind: PathKind::Axis2 { fixed }, ladder: Ladder::default() }
    }

    pub fn diag_pt(c: f64) -> Self {
        EpsPath { kind: PathKind::DiagPt { c }, ladder: Ladder::default() }
    }

    pub fn with_ladder(mut self, start: f64, ratio: f64, rungs: usize) -> Self {
        self.ladder = Ladder { start, ratio, rungs };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.ladder;
        if !(l.start > 0.0 && l.ratio > 0.0 && l.ratio < 1.0 && l.rungs >= 1) {
            return Err(LabError::Invalid(format!("ladder needs start > 0, 0 < ratio < 1, rungs ≥ 1; got {l:?}")));
        }
        let ok = match self.kind {
            PathKind::Ray { a, b } => a > 0.0 && b > 0.0,
            PathKind::Parabolic { s1, s2 } => s1 > 0.0 && s2 > 0.0,
            PathKind::Axis1 { fixed } | PathKind::Axis2 { fixed } => fixed > 0.0,
            PathKind::DiagPt { c } => c > 0.0,
        };
        if !ok {
            return Err(LabError::Invalid(format!("path parameters must be positive: {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn at(&self, e: f64) -> (f64, f64) {
        match self.kind {
            PathKind::Ray { a, b } => (a * e, b * e),
            PathKind::Parabolic { s1, s2 } => (e.powf(s1), e.powf(s2)),
            PathKind::Axis1 { fixed } => (e, fixed),
            PathKind::Axis2 { fixed } => (fixed, e),
            PathKind::DiagPt { c } => (e.powi(4), c * e * e),
        }
    }

    /// (parameter, ε₁, ε₂) per rung.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        (0..self.ladder.rungs)
            .map(|k| {
                let e = self.ladder.start * self.ladder.ratio.powi(k as i32);
                let (a, b) = self.at(e);
                (e, a, b)
            })
            .collect()
    }

    pub fn name(&self) -> String {
        match self.kind {
            PathKind::Ray { a, b } => format!("ray({a},{b})"),
            PathKind::Parabolic { s1, s2 } => format!("parabolic({s1},{s2})"),
            PathKind::Axis1 { fixed } => format!("axis1({fixed})"),
            PathKind::Axis2 { fixed } => format!("axis2({fixed})"),
            PathKind::DiagPt { c } => format!("diag_pt({c})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub param: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub value: C64,
    pub error: f64,
    pub nodes: u64,
    pub wall_ms: f64,
    /// Set when the evaluation failed; value and error are then NaN.
    pub failure: Option<String>,
}

impl Rung {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// |(ε₁, ε₂)|
    pub fn scale(&self) -> f64 {
        self.eps1.hypot(self.eps2)
    }
}

/// Evaluates `eval(ε₁, ε₂)` at every rung of the path, rungs in parallel and in ladder order.
pub fn sweep(path: &EpsPath, eval: impl Fn(f64, f64) -> Result<QuadratureResult> + Sync) -> Result<Vec<Rung>> {
    path.validate()?;
    Ok(path
        .points()
        .par_iter()
        .map(|&(param, eps1, eps2)| match eval(eps1, eps2) {
            Ok(r) => Rung { param, eps1, eps2, value: r.value, error: r.error_estimate, nodes: r.nodes, wall_ms: r.wall_ms, failure: None },
            Err(e) => {
                log::warn!("rung ({eps1:.3e}, {eps2:.3e}) failed: {e}");
                let nan = f64::NAN;
                Rung { param, eps1, eps2, value: C64::new(nan, nan), error: nan, nodes: 0, wall_ms: 0.0, failure: Some(e.to_string()) }
            }
        })
        .collect())
}

/// Sweeps an expression template with polydisc quadrature, through the cache when given.
pub fn sweep_expr(template: &ExprSpec, grid: &GridSpec, path: &EpsPath, cache: Option<&ResultCache>) -> Result<Vec<Rung>> {
    build(template)?;
    sweep(path, |e1, e2| {
        let spec = template.with_eps(e1, e2);
        let compute = || integrate_polydisc(&build(&spec)?, grid);
        match cache {
            Some(c) => c.get_or_compute("polydisc", &(&spec, grid), compute),
            None => compute(),
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: C64,
    pub error: f64,
    /// Whether the raw differences shrink over the tail.
    pub cauchy: bool,
}

fn aitken(s: &[C64]) -> Vec<C64> {
    s.windows(3)
        .map(|w| {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            let den = d2 - d1;
            if den.norm() <= 1e-14 * (d1.norm() + d2.norm()) || den.norm() == 0.0 {
                w[2]
            } else {
                w[2] - d2 * d2 / den
            }
        })
        .collect()
}

/// Iterated Aitken Δ² limit of a sequence (needs ≥ 4 terms). The error is the larger of the
/// last difference in the deepest column and the distance to the previous column's estimate.
pub fn extrapolate(values: &[C64]) -> Result<Extrapolation> {
    if values.len() < 4 {
        return Err(LabError::Invalid(format!("extrapolation needs ≥ 4 rungs, got {}", values.len())));
    }
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(LabError::Invalid("series contains failed rungs".into()));
    }
    let k = values.len();
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let (d1, d2) = ((values[k - 2] - values[k - 3]).norm(), (values[k - 1] - values[k - 2]).norm());
    let cauchy = d2 <= d1 || d2 <= 1e-10 * scale;
    let mut cols = vec![values.to_vec()];
    while cols.last().unwrap().len() >= 3 {
        let next = aitken(cols.last().unwrap());
        if next.len() < 2 {
            break;
        }
        cols.push(next);
    }
    let deep = cols.last().unwrap();
    let prev = &cols[cols.len().saturating_sub(2)];
    let limit = *deep.last().unwrap();
    let delta = (deep[deep.len() - 1] - deep[deep.len() - 2]).norm();
    let spread = (limit - *prev.last().unwrap()).norm();
    Ok(Extrapolation { limit, error: delta.max(spread), cauchy })
}

/// Extrapolates the successful rungs of a sweep.
pub fn extrapolate_rungs(rungs: &[Rung]) -> Result<Extrapolation> {
    if let Some(bad) = rungs.iter().find(|r| !r.is_ok()) {
        return Err(LabError::Invalid(format!("rung at ε = ({:.3e}, {:.3e}) failed: {}", bad.eps1, bad.eps2, bad.failure.as_deref().unwrap_or(""))));
    }
    extrapolate(&rungs.iter().map(|r| r.value).collect::<Vec<_>>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root mean square residual of the log-log fit.
    pub residual: f64,
    /// Index range [start, end) of the points used.
    pub window: (usize, usize),
}

/// Least-squares slope of log|F − limit| against log|ε| over the longest tail on which the
/// deviation decreases monotonically. `points` are (|ε|, F) ordered toward ε → 0.
pub fn fit_holder(points: &[(f64, C64)], limit: C64) -> Result<HolderFit> {
    let dev: Vec<f64> = points.iter().map(|(_, v)| (v - limit).norm()).collect();
    if points.iter().any(|(e, _)| !(*e > 0.0)) || dev.iter().any(|d| !d.is_finite()) {
        return Err(LabError::Invalid("Hölder fit needs positive ε and finite values".into()));
    }
    let end = points.len();
    let mut start = end.saturating_sub(1);
    while start > 0 && dev[start - 1] > dev[start] && points[start - 1].0 > points[start].0 {
        start -= 1;
    }
    if end - start < 3 || dev[end - 1] == 0.0 {
        return Err(LabError::Invalid(format!("no monotone tail of ≥ 3 points to fit; deviations {dev:?}")));
    }
    let xs: Vec<f64> = points[start..end].iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = dev[start..end].iter().map(|d| d.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>() / k).sqrt();
    Ok(HolderFit { exponent: slope, constant: icpt.exp(), residual, window: (start, end) })
}

/// One CSV line of experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment_id: String,
    pub variant: String,
    pub path: String,
    pub eps1: f64,
    pub eps2: f64,
    pub value_re: f64,
    pub value_im: f64,
    pub error: f64,
    pub nodes: u64,
    pub wall_ms: f64,
}

pub fn rows(experiment_id: &str, variant: &str, path: &str, rungs: &[Rung]) -> Vec<Row> {
    rungs
        .iter()
        .map(|r| Row {
            experiment_id: experiment_id.into(),
            variant: variant.into(),
            path: path.into(),
            eps1: r.eps1,
            eps2: r.eps2,
            value_re: r.value.re,
            value_im: r.value.im,
            error: r.error,
            nodes: r.nodes,
            wall_ms: r.wall_ms,
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| LabError::Io(std::io::Error::other(e)))?;
    for r in rows {
        w.serialize(r).map_err(|e| LabError::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// Bumped whenever the cached representation or the numerics behind it change.
pub const CACHE_FORMAT: u32 = 1;

/// Content-addressed store of quadrature results, one JSON file per key.
#[derive(Debug)]
pub struct ResultCache {
    dir: PathBuf,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ResultCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(ResultCache { dir, hits: AtomicU64::new(0), misses: AtomicU64::new(0) })
    }

    pub fn key(kind: &str, payload: &impl Serialize) -> Result<String> {
        let body = serde_json::to_string(&(CACHE_FORMAT, kind, payload)).map_err(|e| LabError::Invalid(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(body.as_bytes())))
    }

    pub fn get_or_compute(
        &self,
        kind: &str,
        payload: &impl Serialize,
        compute: impl FnOnce() -> Result<QuadratureResult>,
    ) -> Result<QuadratureResult> {
        let key = Self::key(kind, payload)?;
        let file = self.dir.join(format!("{key}.json"));
        if let Ok(text) = std::fs::read_to_string(&file) {
            match serde_json::from_str::<QuadratureResult>(&text) {
                Ok(r) => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(r);
                }
                Err(e) => log::warn!("corrupt cache entry {}: {e}; recomputing", file.display()),
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let r = compute()?;
        let tmp = file.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string(&r).map_err(|e| LabError::Invalid(e.to_string()))?)?;
        std::fs::rename(&tmp, &file)?;
        Ok(r)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    /// Number of quadratures actually performed.
    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}
