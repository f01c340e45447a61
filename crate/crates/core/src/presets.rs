//! Ready-made data: the two-branch pair f = z₁⁴, g = z₁² + z₂² + z₁³, monomial-times-unit
//! sections and the grids tuned for them.

use num_complex::Complex64 as C64;

use crate::algebra::{MixedPoly, MultiIndex};
use crate::cutoff::CutoffSpec;
use crate::integrand::{ExprSpec, Variant};
use crate::quad::{AxisRule, CycleGrid, GridSpec, Grading};
use crate::superform::SectionTuple;
use crate::testform::{FlatBump, TestForm};
use crate::Result;

/// Parses polynomial text where `;` may stand for a line break.
pub fn poly(n: usize, text: &str) -> Result<MixedPoly> {
    MixedPoly::parse(n, &text.replace(';', "\n"))
}

pub fn monomial(e: &[u32]) -> MixedPoly {
    MixedPoly::holo_monomial(MultiIndex::new(e))
}

/// 1 + z₁/2 in n variables.
pub fn half_unit(n: usize) -> MixedPoly {
    MixedPoly::constant(n, C64::new(1.0, 0.0)).add(&MixedPoly::coord(n, 0).scale(C64::new(0.5, 0.0)))
}

/// f = z₁⁴
pub fn pt_f() -> SectionTuple {
    SectionTuple::single(monomial(&[4, 0])).expect("holomorphic")
}

/// g = z₁² + z₂² + z₁³
pub fn pt_g() -> SectionTuple {
    SectionTuple::single(monomial(&[2, 0]).add(&monomial(&[0, 2])).add(&monomial(&[3, 0]))).expect("holomorphic")
}

/// φ = ρ z̄₂ g dz₁∧dz₂ with the default flat bump.
pub fn pt_phi() -> TestForm {
    let zb2 = MixedPoly::monomial(2, C64::new(1.0, 0.0), MultiIndex::zero(2), MultiIndex::new(&[0, 1]));
    let g = pt_g().components()[0].clone();
    TestForm::simple(zb2.mul(&g), &[], FlatBump::default()).expect("valid form")
}

pub fn pt_bm_spec(eps1: f64, eps2: f64) -> ExprSpec {
    ExprSpec {
        variant: Variant::BmPair,
        f: pt_f(),
        g: Some(pt_g()),
        chi1: CutoffSpec::canonical(1),
        chi2: Some(CutoffSpec::canonical(1)),
        eps: [eps1, eps2],
        phi: pt_phi(),
    }
}

/// Polydisc grid for the two-branch pair densities: polar patches around the two branches of
/// {g = 0} on the z₂ axis. `fine` is used where 10⁻⁴ relative accuracy is needed.
pub fn pt_grid(fine: bool) -> GridSpec {
    let rule = AxisRule::default();
    let (a1, a2, h) = if fine { (32, 16, 24) } else { (16, 8, 16) };
    let mut grid = GridSpec::uniform(2, rule);
    grid.axes[0].angular = a1;
    grid.axes[1].angular = a2;
    grid.with_hint(AxisRule { angular: h, ..rule })
}

pub fn pt_cycle_grid() -> CycleGrid {
    CycleGrid::default()
}

/// A 1-D grid accurate to ~10⁻⁸ on flat-bump integrands.
pub fn fine_grid_1d() -> GridSpec {
    GridSpec::uniform(1, AxisRule { order: 8, grading: Grading::Geometric { ratio: 2.0, floor: 1e-5 }, outer_panels: 12, angular: 32 })
}

/// Monomial section ζ^e times an optional unit.
pub fn monomial_section(e: &[u32], unit: Option<MixedPoly>) -> SectionTuple {
    SectionTuple::new(vec![monomial(e)], unit).expect("holomorphic")
}

/// Test polynomial ζ^γ(1 + |z₁|²/2) + 1 + z₁ + z̄₂ (n = 2): the first term carries the
/// principal value, the others are annihilated by angular symmetry for every γ with γ₁ ≥ 2 or
/// γ₂ ≥ 2, and by Taylor subtraction otherwise.
pub fn pair_phi0(gamma: &MultiIndex) -> MixedPoly {
    let one = C64::new(1.0, 0.0);
    let r1 = MixedPoly::monomial(2, C64::new(0.5, 0.0), MultiIndex::new(&[1, 0]), MultiIndex::new(&[1, 0]));
    let extra = MixedPoly::constant(2, one)
        .add(&MixedPoly::coord(2, 0))
        .add(&MixedPoly::monomial(2, one, MultiIndex::zero(2), MultiIndex::new(&[0, 1])));
    MixedPoly::holo_monomial(*gamma).mul(&MixedPoly::constant(2, one).add(&r1)).add(&extra)
}

/// (n,n) form with coefficient `p` × bumps.
pub fn top_form(p: MixedPoly) -> TestForm {
    let n = p.dim();
    TestForm::simple(p, &(0..n).collect::<Vec<_>>(), FlatBump::default()).expect("valid form")
}

/// PV_PAIR on f = u_f ζ^α, g = u_g ζ^β against φ = u_f u_g φ₀, whose limit is [1/ζ^{α+β}].φ₀.
pub fn monomial_pair(alpha: &[u32], beta: &[u32], uf: Option<MixedPoly>, ug: Option<MixedPoly>, chi1: CutoffSpec, chi2: CutoffSpec, phi0: &MixedPoly) -> ExprSpec {
    let mut coef = phi0.clone();
    for u in uf.iter().chain(ug.iter()) {
        coef = coef.mul(u);
    }
    ExprSpec {
        variant: Variant::PvPair,
        f: monomial_section(alpha, uf),
        g: Some(monomial_section(beta, ug)),
        chi1,
        chi2: Some(chi2),
        eps: [1.0, 1.0],
        phi: top_form(coef),
    }
}
