//! Test forms with flat bumps: exact ∂̄ and the Taylor truncation behind the oracles.

use num_complex::Complex64 as C64;
use residue_lab::algebra::MultiIndex;
use residue_lab::presets::{poly, pt_phi};
use residue_lab::testform::{taylor_truncate, Coefficient, FlatBump};

fn main() -> residue_lab::Result<()> {
    let b = FlatBump::default();
    for r in [0.4, 0.6, 0.7, 0.8, 0.9] {
        let d = b.derivatives(r * r);
        println!("ρ(|z|={r}) = {:.6}, ρ′ = {:+.6}", d[0], d[1]);
    }
    let phi = pt_phi();
    let z = [C64::new(0.3, 0.1), C64::new(0.2, -0.6)];
    println!("φ = z̄₂g ρ dz₁∧dz₂ at z: {}", phi.eval(&z, &[])?);
    let d = phi.dbar()?;
    println!("∂̄φ is a ({},{}) form: dz̄₁ coefficient {}, dz̄₂ coefficient {}", 2, d.q(), d.eval(&z, &[0])?, d.eval(&z, &[1])?);
    println!("∂̄∂̄φ vanishes: {}", d.dbar()?.eval(&z, &[0, 1])?.norm() < 1e-12);
    let coef = Coefficient::bumped(poly(2, "1 0 2 0 0 1;1 0 0 2 0 1;1 0 3 0 0 1")?);
    let (m, rem) = taylor_truncate(&coef, &[0, 1], &MultiIndex::new(&[1, 0]))?;
    let bumps = [b; 2];
    let w = [C64::new(0.1, 0.0), C64::new(0.05, 0.02)];
    println!("M φ = {}, φ − M φ = {}", m.eval(&bumps, &w), rem.eval(&bumps, &w));
    Ok(())
}
