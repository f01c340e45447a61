//! Averaging raw cycle integrals against the kernel ε₁ε₂/((t₁+ε₁)²(t₂+ε₂)²) reproduces the
//! Bochner–Martinelli integral.

use residue_lab::integrand::build;
use residue_lab::presets::{pt_bm_spec, pt_grid, pt_phi};
use residue_lab::quad::{fubini_average, integrate_polydisc, CachedSampler, CycleGrid, FubiniGrid, Orientation, PtCycle};

fn main() -> residue_lab::Result<()> {
    let (e1, e2) = (1e-2, 1e-4);
    let bm = integrate_polydisc(&build(&pt_bm_spec(e1, e2))?, &pt_grid(true))?;
    let sampler = CachedSampler::new(PtCycle { phi: pt_phi(), grid: CycleGrid::default(), orientation: Orientation::CoArea });
    let fub = fubini_average(e1, e2, &sampler, &FubiniGrid::default())?;
    println!("BM_PAIR    {:.8} ± {:.1e} ({} nodes)", bm.value, bm.error_estimate, bm.nodes);
    println!("Fubini     {:.8} ± {:.1e} ({} cycle integrals)", fub.value, fub.error_estimate, sampler.len());
    println!("relative difference {:.1e}", (bm.value - fub.value).norm() / bm.value.norm());
    Ok(())
}
