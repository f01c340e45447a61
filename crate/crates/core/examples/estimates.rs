//! The elementary estimate integrals and their ε-exponents.

use residue_lab::acceptance::estimate_exponents;
use residue_lab::algebra::MultiIndex;
use residue_lab::oracle::{estimate_lhs, EstimateKind};

fn main() -> residue_lab::Result<()> {
    let kinds = [EstimateKind::InsideSingle, EstimateKind::OutsideSingle, EstimateKind::InsideUnion, EstimateKind::OutsideSum, EstimateKind::OutsideCross];
    let beta = MultiIndex::new(&[0, 1]);
    for a in [[1u32, 0], [2, 1]] {
        let alpha = MultiIndex::new(&a);
        for kind in kinds {
            let vals: Vec<String> = [1e-2, 1e-4, 1e-6].iter().map(|&e| estimate_lhs(kind, &alpha, &beta, e, e).map(|v| format!("{v:.3e}"))).collect::<residue_lab::Result<_>>()?;
            println!("α = {a:?} {kind:?}: {}", vals.join(" "));
        }
        for kind in [EstimateKind::InsideSingle, EstimateKind::OutsideSingle] {
            let (raw, norm) = estimate_exponents(kind, &alpha)?;
            println!("  {kind:?}: slope {raw:.3}, after dividing by |log ε| {norm:.3}, bound 1/(2|α|) = {:.3}", 1.0 / (2 * alpha.degree()) as f64);
        }
    }
    Ok(())
}
