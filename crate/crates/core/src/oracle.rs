//! Ground truth for monomial data: principal values by Taylor subtraction, residues by Stokes
//! transfer, tensor values for disjoint monomials, and the elementary estimate integrals.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::MultiIndex;
use crate::error::{LabError, Result};
use crate::integrand::Integrand;
use crate::quad::{integrate_polydisc, panel_rule, GridSpec, QuadratureResult};
use crate::testform::{taylor_truncate, TestForm};

fn check_alpha(alpha: &MultiIndex, phi: &TestForm) -> Result<()> {
    if alpha.dim() != phi.dim() {
        return Err(LabError::Dimension { expected: phi.dim(), got: alpha.dim() });
    }
    Ok(())
}

/// The subtracted density (φ − M^r_K φ)/ζ^α on the support polydisc, K = {j: α_j ≥ 2},
/// r_j = α_j − 2.
pub fn pv_density(alpha: &MultiIndex, phi: &TestForm) -> Result<Integrand> {
    check_alpha(alpha, phi)?;
    let n = phi.dim();
    if phi.q() != n {
        return Err(LabError::Bidegree(format!("principal values pair with (n,n)-forms, got q = {}", phi.q())));
    }
    let full = ((1u16 << n) - 1) as u8;
    let Some(coef) = phi.component(full) else {
        return Ok(Integrand::from_fn(n, phi.support(), phi.flat(), |_| C64::default()));
    };
    let k: Vec<usize> = (0..n).filter(|&j| alpha.get(j) >= 2).collect();
    let r = MultiIndex::new(&(0..n).map(|j| alpha.get(j).saturating_sub(2)).collect::<Vec<_>>());
    let (_, remainder) = taylor_truncate(coef, &k, &r)?;
    let bumps = phi.bumps().to_vec();
    let a = *alpha;
    Ok(Integrand::from_fn(n, phi.support(), phi.flat(), move |z| {
        let mono: C64 = (0..n).map(|j| z[j].powu(a.get(j))).product();
        remainder.eval(&bumps, z) / mono
    }))
}

/// [1/ζ^α].φ for an (n,n) test form.
pub fn pv_monomial(alpha: &MultiIndex, phi: &TestForm, grid: &GridSpec) -> Result<QuadratureResult> {
    integrate_polydisc(&pv_density(alpha, phi)?, grid)
}

/// ∂̄[1/ζ^α].φ = −[1/ζ^α].∂̄φ for an (n, n−1) test form.
pub fn residue_monomial(alpha: &MultiIndex, phi: &TestForm, grid: &GridSpec) -> Result<QuadratureResult> {
    check_alpha(alpha, phi)?;
    if phi.q() + 1 != phi.dim() {
        return Err(LabError::Bidegree(format!("residues pair with (n,n−1)-forms, got q = {}", phi.q())));
    }
    let r = pv_monomial(alpha, &phi.dbar()?, grid)?;
    Ok(QuadratureResult { value: -r.value, ..r })
}

/// [1/(ζ^{kα′+kα″} ζ^{ℓβ″})] ⊗ ∂̄[1/ζ^{ℓβ′}] . φ for monomials in pairwise disjoint variable
/// groups; ∂̄ acts only in the β′ variables. ℓ = 0 gives 0.
#[allow(clippy::too_many_arguments)]
pub fn palle_rhs(
    k: u32,
    l: u32,
    alpha1: &MultiIndex,
    alpha2: &MultiIndex,
    beta1: &MultiIndex,
    beta2: &MultiIndex,
    phi: &TestForm,
    grid: &GridSpec,
) -> Result<QuadratureResult> {
    let n = phi.dim();
    for x in [alpha1, alpha2, beta1, beta2] {
        check_alpha(x, phi)?;
    }
    if phi.q() + 1 != n {
        return Err(LabError::Bidegree(format!("expected an (n,n−1)-form, got q = {}", phi.q())));
    }
    let (sa1, sa2, sb1) = (alpha1.support(), alpha2.support(), beta1.support());
    let disjoint = |a: &[usize], b: &[usize]| a.iter().all(|j| !b.contains(j));
    if !disjoint(&sa1, &sa2) || !disjoint(&sa1, &sb1) || !disjoint(&sa2, &sb1) {
        return Err(LabError::Invalid("supports of α′, α″, β′ must be pairwise disjoint".into()));
    }
    if (0..n).any(|j| (alpha2.get(j) == 0) != (beta2.get(j) == 0)) {
        return Err(LabError::Invalid("α″ and β″ must have the same support".into()));
    }
    if !disjoint(&beta2.support(), &sb1) {
        return Err(LabError::Invalid("β″ and β′ must have disjoint supports".into()));
    }
    if l == 0 {
        return Ok(QuadratureResult { value: C64::default(), error_estimate: 0.0, nodes: 0, wall_ms: 0.0 });
    }
    let exponent = (*alpha1 + *alpha2).scale(k) + (*beta1 + *beta2).scale(l);
    let r = pv_monomial(&exponent, &phi.dbar_partial(&sb1)?, grid)?;
    Ok(QuadratureResult { value: -r.value, ..r })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// ∫ over {|ζ^α|² < ε} of 1/Π|ζ_j|
    InsideSingle,
    /// ∫ over {|ζ^α|² < ε₁ or |ζ^β|² < ε₂} of 1/Π|ζ_j|
    InsideUnion,
    /// ∫ over {|ζ^α|² ≥ ε} of ε/|ζ^α|² · 1/Π|ζ_j|
    OutsideSingle,
    /// ∫ over {|ζ^α|² ≥ ε₁, |ζ^β|² ≥ ε₂} of (ε₁/|ζ^α|² + ε₂/|ζ^β|²) · 1/Π|ζ_j|
    OutsideSum,
    /// ∫ over {|ζ^α|² ≥ ε₁, |ζ^β|² ≥ ε₂} of ε₁ε₂/(|ζ^α|²|ζ^β|²) · 1/Π|ζ_j|
    OutsideCross,
}

/// Radius below which |ζ^a|² < ε holds on the last axis, given the first radius.
fn threshold(a: &MultiIndex, eps: f64, r1: Option<f64>) -> f64 {
    let n = a.dim();
    let last = a.get(n - 1) as f64;
    let lead = match r1 {
        Some(r) => r.powi(2 * a.get(0) as i32),
        None => 1.0,
    };
    if last == 0.0 {
        return if lead < eps { f64::INFINITY } else { 0.0 };
    }
    if lead == 0.0 {
        return f64::INFINITY;
    }
    (eps / lead).powf(0.5 / last)
}

/// ∫_lo^hi r^{−p} dr
fn power_integral(p: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if (p - 1.0).abs() < 1e-14 {
        (hi / lo).ln()
    } else {
        (hi.powf(1.0 - p) - lo.powf(1.0 - p)) / (1.0 - p)
    }
}

/// Left-hand side of the elementary power-law estimates on the unit polydisc (n ≤ 2), computed
/// exactly in the last radius and by graded Gauss–Legendre in the first, with the region
/// boundary placed on panel breaks.
pub fn estimate_lhs(kind: EstimateKind, alpha: &MultiIndex, beta: &MultiIndex, eps1: f64, eps2: f64) -> Result<f64> {
    let n = alpha.dim();
    if n == 0 || n > 2 {
        return Err(LabError::Size(format!("estimate integrals need n ≤ 2, got {n}")));
    }
    let pair = !matches!(kind, EstimateKind::InsideSingle | EstimateKind::OutsideSingle);
    if pair && beta.dim() != n {
        return Err(LabError::Dimension { expected: n, got: beta.dim() });
    }
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(LabError::Invalid("ε must be positive".into()));
    }
    let last = n - 1;
    let (pa, pb) = (2.0 * alpha.get(last) as f64, if pair { 2.0 * beta.get(last) as f64 } else { 0.0 });
    // inner integral over r_n ∈ [0, 1] for fixed r₁ (ignored when n = 1)
    let inner = |r1: Option<f64>| -> f64 {
        let lead = |x: &MultiIndex| r1.map(|r| r.powi(2 * x.get(0) as i32)).unwrap_or(1.0);
        let ca = threshold(alpha, eps1, r1).min(1.0);
        match kind {
            EstimateKind::InsideSingle => ca,
            EstimateKind::OutsideSingle => eps1 / lead(alpha) * power_integral(pa, ca, 1.0),
            _ => {
                let cb = threshold(beta, eps2, r1).min(1.0);
                let lo = ca.max(cb);
                match kind {
                    EstimateKind::InsideUnion => lo,
                    EstimateKind::OutsideSum => {
                        eps1 / lead(alpha) * power_integral(pa, lo, 1.0) + eps2 / lead(beta) * power_integral(pb, lo, 1.0)
                    }
                    _ => eps1 * eps2 / (lead(alpha) * lead(beta)) * power_integral(pa + pb, lo, 1.0),
                }
            }
        }
    };
    let tau = std::f64::consts::TAU;
    if n == 1 {
        return Ok(tau * inner(None));
    }
    // breaks: geometric toward 0, where each threshold reaches 1, and where they cross
    let mut br = vec![0.0, 1.0];
    let mut x = 1e-16;
    while x < 1.0 {
        br.push(x);
        x *= 1.5;
    }
    let mut cut = |a: &MultiIndex, e: f64| {
        if a.get(0) > 0 {
            br.push(e.powf(0.5 / a.get(0) as f64));
        }
    };
    cut(alpha, eps1);
    if pair {
        cut(beta, eps2);
        let (a1, a2, b1, b2) = (alpha.get(0) as f64, alpha.get(1) as f64, beta.get(0) as f64, beta.get(1) as f64);
        if a2 > 0.0 && b2 > 0.0 {
            let den = 2.0 * (a1 / a2 - b1 / b2);
            if den != 0.0 {
                br.push(((eps1.ln() / a2 - eps2.ln() / b2) / den).exp());
            }
        }
    }
    br.retain(|b| (0.0..=1.0).contains(b));
    br.sort_by(f64::total_cmp);
    br.dedup();
    let total: f64 = panel_rule(&br, 12).into_iter().map(|(r1, w)| w * inner(Some(r1))).sum();
    Ok(tau * tau * total)
}
