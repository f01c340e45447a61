//! Pointwise super-forms: the minimal section s_f, δ_f, and the Koszul–CFL terms u^f_k.

use num_complex::Complex64 as C64;
use residue_lab::presets::{half_unit, monomial};
use residue_lab::superform::{cfl_term, dbar_minimal_section, minimal_section, SectionTuple};

fn main() -> residue_lab::Result<()> {
    // f = (z₁, z₂) in ℂ²: m = n = 2
    let f = SectionTuple::new(vec![monomial(&[1, 0]), monomial(&[0, 1])], None)?;
    let z = [C64::new(0.3, 0.2), C64::new(-0.1, 0.5)];
    let s = minimal_section(&f, &z);
    let fv: Vec<C64> = f.components().iter().map(|p| p.eval(&z)).collect();
    println!("s_f = {:?}", s.terms());
    println!("δ_f s_f = {:?} (|f|² = {:.6})", s.interior_delta(&fv)?.terms(), fv.iter().map(|v| v.norm_sqr()).sum::<f64>());
    println!("δ_f δ_f s_f = {:?}", s.interior_delta(&fv)?.interior_delta(&fv)?.terms());
    let ds = dbar_minimal_section(&f, &z);
    println!("(∂̄s)² nonzero: {}, (∂̄s)³ zero: {}", !ds.wedge_pow(2).is_zero(), ds.wedge_pow(3).is_zero());
    for k in 1..=2 {
        println!("u_{k} = {:?}", cfl_term(&f, k, &z)?.terms());
    }
    // unit factors must stay away from 0 on the working polydisc
    let g = SectionTuple::new(vec![monomial(&[2, 0])], Some(half_unit(2)))?;
    println!("1 + z₁/2 on |z| ≤ 0.9: {:?}", g.check_unit(0.9, 1e-3).is_ok());
    let bad = SectionTuple::new(vec![monomial(&[2, 0])], Some(half_unit(2).scale(C64::new(-1.0, 0.0)).add(&monomial(&[1, 0]).scale(C64::new(2.5, 0.0)))))?;
    println!("2z₁ − 1 on |z| ≤ 0.9: {}", bad.check_unit(0.9, 1e-3).unwrap_err());
    Ok(())
}
