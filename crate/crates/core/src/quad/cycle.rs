use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fubini::FubiniSampler, pairwise_sum, panel_rule, Accumulator};
use crate::algebra::MultiIndex;
use crate::error::{LabError, Result};
use crate::testform::TestForm;

/// Orientation of a residue cycle {|f|² = t₁, |g|² = t₂}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// d arg f ∧ d arg g positive.
    #[default]
    ArgFArgG,
    /// The opposite orientation. With the orientation constant of the integrand module this is
    /// the one for which averaging cycle integrals against the Fubini kernel reproduces the
    /// Bochner–Martinelli integral.
    CoArea,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::ArgFArgG => 1.0,
            Orientation::CoArea => -1.0,
        }
    }
}

fn check_two_form(phi: &TestForm) -> Result<()> {
    if phi.dim() != 2 || phi.q() != 0 {
        return Err(LabError::Bidegree(format!("cycle integrals need a (2,0)-form, got n = {}, q = {}", phi.dim(), phi.q())));
    }
    Ok(())
}

/// ∫ φ/(ζ^α ζ^β) over the torus {|ζ^α|² = ε₁, |ζ^β|² = ε₂}, oriented by d arg ζ^α ∧ d arg ζ^β,
/// with `angular` uniform nodes per angle.
pub fn integrate_torus_monomial(alpha: &MultiIndex, beta: &MultiIndex, eps1: f64, eps2: f64, phi: &TestForm, angular: usize) -> Result<C64> {
    check_two_form(phi)?;
    if alpha.dim() != 2 || beta.dim() != 2 {
        return Err(LabError::Dimension { expected: 2, got: alpha.dim().max(beta.dim()) });
    }
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(LabError::Invalid("ε must be positive".into()));
    }
    let (a1, a2, b1, b2) = (alpha.get(0) as f64, alpha.get(1) as f64, beta.get(0) as f64, beta.get(1) as f64);
    let det = a1 * b2 - a2 * b1;
    if det == 0.0 {
        return Err(LabError::Singular(format!("exponent rows {alpha:?}, {beta:?} are dependent")));
    }
    let (l1, l2) = (0.5 * eps1.ln(), 0.5 * eps2.ln());
    let x = [(b2 * l1 - a2 * l2) / det, (a1 * l2 - b1 * l1) / det];
    let r = [x[0].exp(), x[1].exp()];
    let support = phi.support();
    if r[0] >= support[0] || r[1] >= support[1] {
        log::warn!("torus radii {r:?} leave the support {support:?}; returning 0");
        return Ok(C64::default());
    }
    let h = TAU / angular as f64;
    let gamma = *alpha + *beta;
    let rows: Vec<C64> = (0..angular)
        .into_par_iter()
        .map(|i| {
            let z1 = C64::from_polar(r[0], h * (i as f64 + 0.5));
            let mut acc = Accumulator::default();
            for k in 0..angular {
                let z2 = C64::from_polar(r[1], h * (k as f64 + 0.5));
                let z = [z1, z2];
                let mono = z1.powu(gamma.get(0)) * z2.powu(gamma.get(1));
                // dz₁∧dz₂ = (iz₁)(iz₂) dθ₁∧dθ₂
                acc.add(phi.eval_mask(&z, 0) / mono * (-z1 * z2));
            }
            acc.value()
        })
        .collect();
    Ok(pairwise_sum(&rows) * h * h * det.signum())
}

/// Quadrature rule on the (θ, ψ′) torus, ψ the argument of g and ψ′ = ψ − arg(z₁² + z₁³), so
/// that the branch point z₂ = 0 sits at ψ′ = 0. The ψ′ panels are graded geometrically toward
/// ψ′ = 0 from both sides, where the cycle integrand concentrates; `floor` is the innermost
/// break relative to the cycle radius |z₁|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleGrid {
    pub theta: usize,
    pub order: usize,
    pub ratio: f64,
    pub floor: f64,
}

impl Default for CycleGrid {
    fn default() -> Self {
        CycleGrid { theta: 32, order: 6, ratio: 3.0, floor: 1e-2 }
    }
}

impl CycleGrid {
    fn psi_rule(&self, radius: f64) -> Vec<(f64, f64)> {
        let mut half = vec![0.0];
        let mut x = (self.floor * radius).min(0.5);
        while x < PI / self.ratio.sqrt() {
            half.push(x);
            x *= self.ratio;
        }
        half.push(PI);
        let mut rule = panel_rule(&half, self.order);
        let neg: Vec<(f64, f64)> = rule.iter().map(|&(p, w)| (-p, w)).collect();
        rule.extend(neg);
        rule
    }

    pub fn coarsened(&self) -> CycleGrid {
        CycleGrid { theta: self.theta * 3 / 4, order: (self.order * 3 / 4).max(3), ..*self }
    }
}

/// The two-branch pair f = z₁⁴, g = z₁² + z₂² + z₁³ with a (2,0) test form.
#[derive(Clone, Debug)]
pub struct PtCycle {
    pub phi: TestForm,
    pub grid: CycleGrid,
    pub orientation: Orientation,
}

/// Residue integral of φ/(fg) over {|f|² = t₁, |g|² = t₂} for the two-branch pair, with no
/// restriction on where the cycle sits relative to the bump.
pub fn pt_cycle_value(t1: f64, t2: f64, phi: &TestForm, grid: &CycleGrid, orientation: Orientation) -> Result<C64> {
    check_two_form(phi)?;
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(LabError::Invalid("cycle parameters must be positive".into()));
    }
    let s = t1.powf(0.125);
    let sq = t2.sqrt();
    let supp = phi.support();
    if s >= supp[0] || sq - s * s * (1.0 + s) >= supp[1] * supp[1] {
        return Ok(C64::default());
    }
    let psi = grid.psi_rule(s);
    let h = TAU / grid.theta as f64;
    let rows: Vec<Result<C64>> = (0..grid.theta)
        .into_par_iter()
        .map(|i| {
            let theta = h * (i as f64 + 0.5);
            let z1 = C64::from_polar(s, theta);
            let z1sq = z1 * z1;
            let head = z1sq + z1sq * z1;
            let shift = head.arg();
            let mut acc = Accumulator::default();
            for &(p, w) in &psi {
                let g = C64::from_polar(sq, p + shift);
                let w2 = g - head;
                if w2.norm() <= 1e-12 * sq {
                    return Err(LabError::Singular(format!("branch point z₂ = 0 on the cycle at θ = {theta}, ψ′ = {p}")));
                }
                let root = w2.sqrt();
                let mut branch_sum = C64::default();
                for z2 in [root, -root] {
                    let c = phi.eval_mask(&[z1, z2], 0);
                    if c == C64::default() {
                        continue;
                    }
                    let dz2 = C64::new(0.0, 1.0) * g / (2.0 * z2);
                    branch_sum += c / (z1sq * z1sq * g) * (C64::new(0.0, 1.0) * z1) * dz2;
                }
                acc.add(branch_sum * w);
            }
            Ok(acc.value())
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&rows) * h * orientation.sign())
}

/// The raw residue integral I(ε₁, ε₂) for the two-branch pair; the cycle must lie in the flat
/// region of the bump.
pub fn integrate_pt_cycle(eps1: f64, eps2: f64, phi: &TestForm, grid: &CycleGrid) -> Result<C64> {
    check_two_form(phi)?;
    let s = eps1.powf(0.125);
    let reach = (eps2.sqrt() + s * s * (1.0 + s)).sqrt();
    let flat = phi.flat();
    if s >= flat[0] || reach >= flat[1] {
        return Err(LabError::Invalid(format!("cycle (|z₁| = {s:.3}, |z₂| ≤ {reach:.3}) leaves the flat region {flat:?}")));
    }
    pt_cycle_value(eps1, eps2, phi, grid, Orientation::ArgFArgG)
}

/// Whether continuing z₂ = √(√t₂e^{iψ} − z₁² − z₁³) along ψ ∈ [0, 2π] by nearest continuation
/// returns to the starting branch (`true`) or to the other one.
pub fn track_branch(t1: f64, t2: f64, theta: f64, steps: usize) -> Result<bool> {
    let z1 = C64::from_polar(t1.powf(0.125), theta);
    let head = z1 * z1 + z1 * z1 * z1;
    let at = |psi: f64| C64::from_polar(t2.sqrt(), psi) - head;
    let start = at(0.0).sqrt();
    let mut cur = start;
    for k in 1..=steps {
        let w = at(TAU * k as f64 / steps as f64);
        if w.norm() < 1e-14 {
            return Err(LabError::Singular(format!("branch point on the loop at θ = {theta}")));
        }
        let r = w.sqrt();
        cur = if (r - cur).norm() <= (r + cur).norm() { r } else { -r };
    }
    if (cur - start).norm() > 1e-6 * start.norm() && (cur + start).norm() > 1e-6 * start.norm() {
        return Err(LabError::Invalid("branch tracking did not close; increase steps".into()));
    }
    Ok((cur - start).norm() < (cur + start).norm())
}

impl FubiniSampler for PtCycle {
    fn sample(&self, t1: f64, t2: f64) -> Result<C64> {
        pt_cycle_value(t1, t2, &self.phi, &self.grid, self.orientation)
    }

    /// The cycle meets the branch locus z₂ = 0 when t₂ lies in [s⁴(1−s)², s⁴(1+s)²], s = t₁^{1/8}.
    fn breaks_t2(&self, t1: f64) -> Vec<f64> {
        let s = t1.powf(0.125);
        let c = s.powi(4);
        vec![c * (1.0 - s).powi(2), c, c * (1.0 + s).powi(2)]
    }

    fn support(&self) -> Option<(f64, f64)> {
        let b = self.phi.support();
        let reach = b[1] * b[1] + b[0] * b[0] * (1.0 + b[0]);
        Some((b[0].powi(8), reach * reach))
    }
}
