//! An ε-sweep of a regularized integral with extrapolation and a Hölder fit.

use num_complex::Complex64 as C64;
use residue_lab::algebra::MultiIndex;
use residue_lab::cutoff::CutoffSpec;
use residue_lab::integrand::{ExprSpec, Variant};
use residue_lab::lab::{extrapolate_rungs, fit_holder, sweep_expr, EpsPath};
use residue_lab::oracle::pv_monomial;
use residue_lab::presets::{half_unit, monomial_pair, pair_phi0, top_form};
use residue_lab::quad::{AxisRule, GridSpec};

fn main() -> residue_lab::Result<()> {
    // PV_PAIR on f = z₁², g = (1 + z₁/2) z₁z₂ tends to [1/z₁³z₂].φ₀
    let (alpha, beta) = ([2, 0], [1, 1]);
    let gamma = MultiIndex::new(&[3, 1]);
    let phi0 = pair_phi0(&gamma);
    let spec: ExprSpec = monomial_pair(&alpha, &beta, None, Some(half_unit(2)), CutoffSpec::canonical(1), CutoffSpec::canonical(2), &phi0);
    assert_eq!(spec.variant, Variant::PvPair);
    let grid = GridSpec::uniform(2, AxisRule::default());
    let oracle = pv_monomial(&gamma, &top_form(phi0.clone()), &grid)?.value;
    let path = EpsPath::ray(1.0, 1.0).with_ladder(0.1, 0.25, 6);
    let rungs = sweep_expr(&spec, &grid, &path, None)?;
    for r in &rungs {
        println!("ε = ({:.2e}, {:.2e}): {:.8} ± {:.1e}", r.eps1, r.eps2, r.value, r.error);
    }
    let x = extrapolate_rungs(&rungs)?;
    println!("limit {:.8} ± {:.1e}, oracle {:.8}", x.limit, x.error, oracle);
    let pts: Vec<(f64, C64)> = rungs.iter().map(|r| (r.param, r.value)).collect();
    let fit = fit_holder(&pts, x.limit)?;
    println!("Hölder exponent ω ≈ {:.3} over rungs {:?}", fit.exponent, fit.window);
    Ok(())
}
