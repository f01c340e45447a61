//! Ground-truth values for monomial data: residues, principal values and torus integrals.

use num_complex::Complex64 as C64;
use residue_lab::algebra::MultiIndex;
use residue_lab::oracle::{palle_rhs, pv_monomial, residue_monomial};
use residue_lab::presets::{fine_grid_1d, pair_phi0, poly, top_form};
use residue_lab::quad::{integrate_torus_monomial, AxisRule, GridSpec};
use residue_lab::testform::{FlatBump, TestForm};

fn main() -> residue_lab::Result<()> {
    let one = TestForm::simple(poly(1, "1 0 0 0")?, &[], FlatBump::default())?;
    let r = residue_monomial(&MultiIndex::new(&[1]), &one, &fine_grid_1d())?;
    println!("∂̄[1/z].(ρ dz) = {:.10} ± {:.1e} (2πi = {:.10})", r.value, r.error_estimate, C64::new(0.0, std::f64::consts::TAU));
    let grid = GridSpec::uniform(2, AxisRule::default());
    let gamma = MultiIndex::new(&[3, 1]);
    let pv = pv_monomial(&gamma, &top_form(pair_phi0(&gamma)), &grid)?;
    println!("[1/z₁³z₂].φ₀ = {:.8} ± {:.1e}", pv.value, pv.error_estimate);
    let phi = TestForm::simple(poly(2, "1 0 1 0 0 0")?, &[0], FlatBump::default())?;
    let z = MultiIndex::zero(2);
    let p = palle_rhs(1, 1, &MultiIndex::new(&[1, 0]), &z, &MultiIndex::new(&[0, 1]), &z, &phi, &grid)?;
    println!("[1/z₁] ⊗ ∂̄[1/z₂] . z₁ρ dz∧dz̄₁ = {:.8}", p.value);
    let form = TestForm::simple(poly(2, "1 0 0 0 0 0")?, &[], FlatBump::default())?;
    let t = integrate_torus_monomial(&MultiIndex::new(&[1, 0]), &MultiIndex::new(&[0, 1]), 1e-4, 1e-4, &form, 16)?;
    println!("torus integral of dz₁∧dz₂/(z₁z₂) = {t:.12} ((2πi)² = {:.12})", -std::f64::consts::TAU.powi(2));
    Ok(())
}
