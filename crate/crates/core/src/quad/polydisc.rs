use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{pairwise_sum, panel_rule, Accumulator, AxisRule, GridSpec, QuadratureResult};
use crate::error::{LabError, Result};
use crate::integrand::Integrand;

/// Polar nodes (z, weight including the Jacobian r) for one axis.
fn axis_nodes(rule: &AxisRule, a: f64, b: f64, extra: &[f64]) -> Vec<(C64, f64)> {
    let radial = panel_rule(&rule.breaks(a, b, extra), rule.order);
    let n = rule.angular;
    let dirs: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, TAU * (k as f64 + 0.5) / n as f64)).collect();
    let mut out = Vec::with_capacity(radial.len() * n);
    for &(r, w) in &radial {
        for d in &dirs {
            out.push((d * r, w * r * TAU / n as f64));
        }
    }
    out
}

/// Nodes for the last axis: the standard polar grid plus polar patches centred at the hint
/// points, blended by the partition of unity w_k ∝ |z − c_k|⁻⁴.
fn hinted_nodes(base: &[(C64, f64)], hints: &[C64], rule: &AxisRule, b: f64) -> Vec<(C64, f64)> {
    let mut centers: Vec<C64> = vec![C64::default()];
    for &h in hints {
        if h.norm() > 1e-12 && h.norm() < b + 0.5 && centers.iter().all(|c| (c - h).norm() > 1e-9) {
            centers.push(h);
        }
    }
    if centers.len() == 1 {
        return base.to_vec();
    }
    let pou = |z: C64, k: usize| {
        let inv = |c: &C64| (z - c).norm_sqr().powi(-2);
        let own = inv(&centers[k]);
        if !own.is_finite() {
            return 1.0;
        }
        let total: f64 = centers.iter().map(inv).sum();
        if total.is_finite() { own / total } else { 0.0 }
    };
    let mut out: Vec<(C64, f64)> = base.iter().map(|&(z, w)| (z, w * pou(z, 0))).filter(|p| p.1 != 0.0).collect();
    let n = rule.angular;
    let dirs: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, TAU * (k as f64 + 0.5) / n as f64)).collect();
    for k in 1..centers.len() {
        let c = centers[k];
        let reach = c.norm() + b;
        let mut br = vec![0.0];
        if let super::Grading::Geometric { ratio, floor } = rule.grading {
            let mut x = floor;
            while x < 0.1 * reach {
                br.push(x);
                x *= ratio;
            }
        } else {
            br.push(1e-6 * reach);
        }
        br.push(0.1 * reach);
        br.extend((1..=rule.outer_panels).map(|p| 0.1 * reach + 0.9 * reach * p as f64 / rule.outer_panels as f64));
        for (rho, w) in panel_rule(&br, rule.order) {
            for d in &dirs {
                let z = c + d * rho;
                if z.norm() >= b {
                    continue;
                }
                let wt = w * rho * TAU / n as f64 * pou(z, k);
                if wt != 0.0 {
                    out.push((z, wt));
                }
            }
        }
    }
    out
}

struct Plan {
    axes: Vec<Vec<(C64, f64)>>,
}

fn plan(f: &Integrand, grid: &GridSpec) -> Plan {
    let axes = (0..f.dim()).map(|j| axis_nodes(&grid.axes[j], f.flat()[j], f.support()[j], &f.breaks()[j])).collect();
    Plan { axes }
}

fn bad_value(z: &[C64], v: C64) -> LabError {
    LabError::Singular(format!("non-finite density {v} at {z:?}"))
}

/// Sum over the last axis for fixed leading coordinates `z[..n-1]`.
fn inner(f: &Integrand, p: &Plan, grid: &GridSpec, z: &mut [C64], weight: f64, acc: &mut Accumulator, nodes: &mut u64) -> Result<()> {
    let last = z.len() - 1;
    let hinted;
    let list: &[(C64, f64)] = match (f.hints(), grid.hint.as_ref()) {
        (Some(h), Some(rule)) => {
            let pts = h(&z[..last]);
            hinted = hinted_nodes(&p.axes[last], &pts, rule, f.support()[last]);
            &hinted
        }
        _ => &p.axes[last],
    };
    for &(zl, w) in list {
        z[last] = zl;
        let v = f.eval_unchecked(z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(bad_value(z, v));
        }
        acc.add(v * (w * weight));
    }
    *nodes += list.len() as u64;
    Ok(())
}

fn run(f: &Integrand, grid: &GridSpec) -> Result<(C64, u64)> {
    let n = f.dim();
    let p = plan(f, grid);
    if n == 1 {
        let mut acc = Accumulator::default();
        let mut nodes = 0;
        let mut z = [C64::default()];
        inner(f, &p, grid, &mut z, 1.0, &mut acc, &mut nodes)?;
        return Ok((acc.value(), nodes));
    }
    let parts: Vec<Result<(C64, u64)>> = p.axes[0]
        .par_iter()
        .map(|&(z0, w0)| {
            let mut acc = Accumulator::default();
            let mut nodes = 0;
            let mut z = vec![C64::default(); n];
            z[0] = z0;
            if n == 2 {
                inner(f, &p, grid, &mut z, w0, &mut acc, &mut nodes)?;
            } else {
                for &(z1, w1) in &p.axes[1] {
                    z[1] = z1;
                    inner(f, &p, grid, &mut z, w0 * w1, &mut acc, &mut nodes)?;
                }
            }
            Ok((acc.value(), nodes))
        })
        .collect();
    let mut vals = Vec::with_capacity(parts.len());
    let mut nodes = 0;
    for r in parts {
        let (v, k) = r?;
        vals.push(v);
        nodes += k;
    }
    Ok((pairwise_sum(&vals), nodes))
}

/// Tensor-product polar quadrature of the density over ℂⁿ, with the error estimated by the
/// coarsened companion grid when `grid.levels ≥ 2`.
pub fn integrate_polydisc(f: &Integrand, grid: &GridSpec) -> Result<QuadratureResult> {
    let n = f.dim();
    if n == 0 || n > 3 {
        return Err(LabError::Size(format!("polydisc quadrature needs n ≤ 3, got {n}")));
    }
    grid.validate(n)?;
    let t0 = Instant::now();
    let (value, mut nodes) = run(f, grid)?;
    let mut error_estimate = 0.0;
    if grid.levels >= 2 {
        let (coarse, k) = run(f, &grid.coarsened())?;
        nodes += k;
        error_estimate = (value - coarse).norm();
    }
    Ok(QuadratureResult { value, error_estimate, nodes, wall_ms: t0.elapsed().as_secs_f64() * 1e3 })
}
