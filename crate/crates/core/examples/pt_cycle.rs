//! The raw residue integral of the two-branch pair f = z₁⁴, g = z₁² + z₂² + z₁³ along (ε⁴, cε²): the limit depends on c.

use residue_lab::lab::{extrapolate, EpsPath};
use residue_lab::presets::{pt_cycle_grid, pt_phi};
use residue_lab::quad::integrate_pt_cycle;

fn main() -> residue_lab::Result<()> {
    let phi = pt_phi();
    for c in [1.0, 4.0, 0.25] {
        let path = EpsPath::diag_pt(c).with_ladder(0.05, 0.25, 8);
        let values = path.points().iter().map(|&(_, e1, e2)| integrate_pt_cycle(e1, e2, &phi, &pt_cycle_grid())).collect::<residue_lab::Result<Vec<_>>>()?;
        let x = extrapolate(&values)?;
        println!("c = {c}: last rungs {:.6} {:.6}, limit {:.6} ± {:.1e}", values[6], values[7], x.limit, x.error);
    }
    Ok(())
}
