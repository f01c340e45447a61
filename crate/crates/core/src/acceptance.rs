//! The acceptance suite: one check per criterion, each returning a report and the sweep rows it
//! produced.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::algebra::{MixedPoly, MultiIndex};
use crate::cutoff::CutoffSpec;
use crate::error::{LabError, Result};
use crate::integrand::{ExprSpec, Integrand, Variant};
use crate::lab::{extrapolate, extrapolate_rungs, fit_holder, rows, sweep, sweep_expr, EpsPath, Extrapolation, Row, Rung};
use crate::oracle::{estimate_lhs, pv_monomial, residue_monomial, EstimateKind};
use crate::presets::{self, half_unit, monomial_pair, monomial_section, pair_phi0, top_form};
use crate::quad::{
    fubini_average, integrate_polydisc, integrate_pt_cycle, CachedSampler, FubiniGrid, GridSpec, Orientation, PtCycle,
    QuadratureResult,
};
use crate::superform::{cfl_term, dbar_minimal_section, minimal_section, SectionTuple, SuperElement};
use crate::testform::{FlatBump, TestForm};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "1-D calibration"),
    (2, "monomial PV pairs"),
    (3, "resonance cancellation"),
    (4, "PT discontinuity"),
    (5, "PT continuity and Hölder exponent"),
    (6, "Fubini identity"),
    (7, "estimate exponents"),
    (8, "algebra suite"),
    (9, "U∧∇U instance"),
    (10, "SEP indicator"),
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!("criterion {:>2} {} {}: {}", self.id, if self.passed { "PASS" } else { "FAIL" }, self.title, self.detail)
    }
}

fn title(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

/// Runs one criterion; evaluation errors become failed reports.
pub fn run(id: u8) -> CriterionReport {
    let out = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => Err(LabError::Invalid(format!("no criterion {id}"))),
    };
    let (passed, detail, rows) = match out {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}"), Vec::new()),
    };
    CriterionReport { id, title: title(id), passed, detail, rows }
}

type Outcome = Result<(bool, String, Vec<Row>)>;

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn limit_of(spec: &ExprSpec, grid: &GridSpec, path: &EpsPath, id: &str, out: &mut Vec<Row>) -> Result<(Vec<Rung>, Extrapolation)> {
    let rungs = sweep_expr(spec, grid, path, None)?;
    out.extend(rows(id, spec.variant.name(), &path.name(), &rungs));
    let x = extrapolate_rungs(&rungs)?;
    Ok((rungs, x))
}

/// The five rays of the pair criteria, ladder 0.1·4^{−k}.
fn five_paths(rungs: usize) -> Vec<EpsPath> {
    [EpsPath::ray(1.0, 1.0), EpsPath::ray(1.0, 4.0), EpsPath::ray(4.0, 1.0), EpsPath::parabolic(1.0, 3.0), EpsPath::parabolic(3.0, 1.0)]
        .into_iter()
        .map(|p| p.with_ladder(0.1, 0.25, rungs))
        .collect()
}

pub fn criterion_1() -> Outcome {
    let target = C64::new(0.0, TAU);
    let phi = TestForm::simple(MixedPoly::constant(1, C64::new(1.0, 0.0)), &[], FlatBump::default())?;
    let r = residue_monomial(&MultiIndex::new(&[1]), &phi, &presets::fine_grid_1d())?;
    let e1 = rel(r.value, target);
    let spec = ExprSpec {
        variant: Variant::SingleRes,
        f: monomial_section(&[1], None),
        g: None,
        chi1: CutoffSpec::canonical(2),
        chi2: None,
        eps: [1.0, 1.0],
        phi,
    };
    let mut out = Vec::new();
    let (_, x) = limit_of(&spec, &GridSpec::uniform(1, Default::default()), &EpsPath::axis1(1.0), "c1_single_res", &mut out)?;
    let e2 = rel(x.limit, target);
    Ok((e1 < 1e-6 && e2 < 1e-4, format!("oracle rel {e1:.1e} (< 1e-6), SINGLE_RES limit rel {e2:.1e} (< 1e-4)"), out))
}

pub fn criterion_2() -> Outcome {
    let grid = GridSpec::uniform(2, Default::default());
    let cases: [([u32; 2], [u32; 2]); 3] = [([1, 0], [0, 1]), ([2, 0], [1, 1]), ([2, 1], [2, 1])];
    let mut out = Vec::new();
    let (mut ok, mut worst, mut worst_zero) = (true, 0.0f64, 0.0f64);
    for (c, (a, b)) in cases.iter().enumerate() {
        let gamma = MultiIndex::new(&[a[0] + b[0], a[1] + b[1]]);
        let phi0 = pair_phi0(&gamma);
        let oracle = pv_monomial(&gamma, &top_form(phi0.clone()), &grid)?.value;
        let pv = monomial_pair(a, b, None, Some(half_unit(2)), CutoffSpec::canonical(1), CutoffSpec::canonical(1), &phi0);
        let zero = monomial_pair(a, b, None, Some(half_unit(2)), CutoffSpec::canonical(1), CutoffSpec::complement(1), &phi0);
        // convergence is ~ε^{1/2} on the resonant case, hence the deeper ladder
        for path in five_paths(12) {
            let (_, x) = limit_of(&pv, &grid, &path, &format!("c2_case{}_pv", c + 1), &mut out)?;
            let e = rel(x.limit, oracle);
            worst = worst.max(e);
            ok &= e < 1e-3;
        }
        for path in five_paths(6) {
            let (_, x) = limit_of(&zero, &grid, &path, &format!("c2_case{}_complement", c + 1), &mut out)?;
            let e = x.limit.norm() / oracle.norm();
            worst_zero = worst_zero.max(e);
            ok &= e < 1e-3;
        }
    }
    Ok((ok, format!("max rel deviation from oracle {worst:.1e} (< 1e-3); complement limits ≤ {worst_zero:.1e}·scale (< 1e-3)"), out))
}

pub fn criterion_3() -> Outcome {
    let grid = GridSpec::uniform(2, Default::default());
    let gamma = MultiIndex::new(&[2, 2]);
    let phi0 = pair_phi0(&gamma);
    let scale = pv_monomial(&gamma, &top_form(phi0.clone()), &grid)?.value.norm();
    let spec = monomial_pair(&[1, 1], &[1, 1], None, Some(half_unit(2)), CutoffSpec::canonical(1), CutoffSpec::tprime(1), &phi0);
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for path in [EpsPath::ray(1.0, 1.0), EpsPath::ray(1.0, 4.0), EpsPath::ray(4.0, 1.0)] {
        // the weighted pairing decays like ε^{0.8}: deep ladder
        let (_, x) = limit_of(&spec, &grid, &path.with_ladder(0.1, 0.25, 12), "c3_tprime", &mut out)?;
        worst = worst.max(x.limit.norm() / scale);
    }
    Ok((worst < 1e-3, format!("max |limit| {worst:.1e}·scale (< 1e-3), scale {scale:.4}"), out))
}

/// Raw PT sweep along diag_pt(c), the error being the change against a coarser cycle grid.
fn pt_raw_sweep(c: f64) -> Result<Vec<Rung>> {
    let phi = presets::pt_phi();
    let grid = presets::pt_cycle_grid();
    sweep(&EpsPath::diag_pt(c).with_ladder(0.05, 0.25, 8), |e1, e2| {
        let t = std::time::Instant::now();
        let v = integrate_pt_cycle(e1, e2, &phi, &grid)?;
        let coarse = integrate_pt_cycle(e1, e2, &phi, &grid.coarsened())?;
        Ok(QuadratureResult { value: v, error_estimate: (v - coarse).norm(), nodes: 0, wall_ms: t.elapsed().as_secs_f64() * 1e3 })
    })
}

/// Extrapolated raw PT limit along (ε⁴, ε²).
pub fn pt_raw_limit() -> Result<C64> {
    Ok(extrapolate_rungs(&pt_raw_sweep(1.0)?)?.limit)
}

pub fn criterion_4() -> Outcome {
    let mut out = Vec::new();
    let mut lim = Vec::new();
    for c in [1.0, 4.0] {
        let rungs = pt_raw_sweep(c)?;
        out.extend(rows("c4_raw_cycle", "RAW_CYCLE", &EpsPath::diag_pt(c).name(), &rungs));
        lim.push((rungs.clone(), extrapolate_rungs(&rungs)?));
    }
    let (l1, l4) = (lim[0].1.limit, lim[1].1.limit);
    let tail: Vec<C64> = lim[0].0.iter().rev().take(3).map(|r| r.value).collect();
    let spread = tail.iter().flat_map(|a| tail.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
    let ok = l4.norm() < 1e-2 * l1.norm() && spread <= 0.1 * l1.norm();
    Ok((ok, format!("limit c=1 {:.6}, |limit c=4| {:.1e} (< 1e-2·{:.3}), last-three spread {:.1e}", l1, l4.norm(), l1.norm(), spread), out))
}

pub fn criterion_5() -> Outcome {
    let scale = pt_raw_limit()?.norm();
    let spec = presets::pt_bm_spec(1.0, 1.0);
    let grid = presets::pt_grid(false);
    let mut out = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut omega = f64::NAN;
    // along the ray the approach is pre-asymptotic until ε ≈ 10⁻⁴
    for path in [EpsPath::diag_pt(1.0).with_ladder(0.05, 0.25, 6), EpsPath::diag_pt(4.0).with_ladder(0.05, 0.25, 6), EpsPath::ray(1.0, 1.0).with_ladder(1e-4, 0.25, 6)] {
        let (rungs, x) = limit_of(&spec, &grid, &path, "c5_bm_pair", &mut out)?;
        ok &= x.limit.norm() < 1e-3 * scale;
        parts.push(format!("{} {:.1e}", path.name(), x.limit.norm()));
        if path == EpsPath::diag_pt(1.0).with_ladder(0.05, 0.25, 6) {
            let pts: Vec<(f64, C64)> = rungs.iter().map(|r| (r.scale(), r.value)).collect();
            omega = fit_holder(&pts, C64::default())?.exponent;
        }
    }
    ok &= omega >= 0.10;
    Ok((ok, format!("|limits| {} (< 1e-3·{scale:.3}); Hölder ω {omega:.3} (≥ 0.10)", parts.join(", ")), out))
}

pub fn criterion_6() -> Outcome {
    let grid = presets::pt_grid(true);
    let sampler = CachedSampler::new(PtCycle { phi: presets::pt_phi(), grid: presets::pt_cycle_grid(), orientation: Orientation::CoArea });
    let mut ok = true;
    let mut parts = Vec::new();
    for (e1, e2) in [(1e-3, 1e-3), (1e-2, 1e-4)] {
        let bm = integrate_polydisc(&crate::integrand::build(&presets::pt_bm_spec(e1, e2))?, &grid)?;
        let fub = fubini_average(e1, e2, &sampler, &FubiniGrid::default())?;
        let e = rel(fub.value, bm.value);
        ok &= e < 1e-3;
        parts.push(format!("({e1:.0e},{e2:.0e}) BM {:.6} Fubini {:.6} rel {e:.1e}", bm.value.re, fub.value.re));
    }
    Ok((ok, format!("{} (< 1e-3)", parts.join("; ")), Vec::new()))
}

/// Slope of log y against log x.
fn slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Fitted exponents (raw, |log ε|-normalized) for the single-α estimate integrals on
/// ε ∈ [10⁻⁶, 10⁻²].
pub fn estimate_exponents(kind: EstimateKind, alpha: &MultiIndex) -> Result<(f64, f64)> {
    let n = alpha.dim() as i32;
    let mut raw = Vec::new();
    let mut norm = Vec::new();
    for k in 0..=8 {
        let e = 10f64.powf(-6.0 + 0.5 * k as f64);
        let v = estimate_lhs(kind, alpha, alpha, e, e)?;
        raw.push((e.ln(), v.ln()));
        norm.push((e.ln(), (v / e.ln().abs().powi(n - 1)).ln()));
    }
    Ok((slope(&raw), slope(&norm)))
}

pub fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for a in [[1u32, 0], [2, 1]] {
        let alpha = MultiIndex::new(&a);
        let target = 1.0 / (2.0 * alpha.degree() as f64);
        for kind in [EstimateKind::InsideSingle, EstimateKind::OutsideSingle] {
            let (raw, norm) = estimate_exponents(kind, &alpha)?;
            ok &= (norm - target).abs() <= 0.15 * target;
            parts.push(format!("α={a:?} {kind:?} normalized {norm:.3} raw {raw:.3} target {target:.3}"));
        }
    }
    Ok((ok, parts.join("; "), Vec::new()))
}

/// Central-difference ∂̄ of a pointwise super-element field.
fn dbar_fd(u: &dyn Fn(&[C64]) -> Result<SuperElement>, z: &[C64], m: usize, h: f64) -> Result<SuperElement> {
    let n = z.len();
    let mut out = SuperElement::zero(m, n);
    for i in 0..n {
        let shifted = |d: C64| -> Result<SuperElement> {
            let mut w = z.to_vec();
            w[i] += d;
            u(&w)
        };
        let dx = shifted(C64::new(h, 0.0))?.add(&shifted(C64::new(-h, 0.0))?.scale(C64::new(-1.0, 0.0)))?;
        let dy = shifted(C64::new(0.0, h))?.add(&shifted(C64::new(0.0, -h))?.scale(C64::new(-1.0, 0.0)))?;
        // ∂/∂z̄ = (∂x + i∂y)/2
        let d = dx.add(&dy.scale(C64::new(0.0, 1.0)))?.scale(C64::new(0.25 / h, 0.0));
        out = out.add(&SuperElement::dzbar(m, n, i).wedge(&d)?)?;
    }
    Ok(out)
}

fn max_coeff(x: &SuperElement) -> f64 {
    x.terms().iter().map(|t| t.1.norm()).fold(0.0, f64::max)
}

fn random_section(rng: &mut StdRng, m: usize, n: usize) -> Result<SectionTuple> {
    let comps = (0..m)
        .map(|_| {
            let terms: Vec<_> = (0..3)
                .map(|_| {
                    let e: Vec<u32> = (0..n).map(|_| rng.random_range(0..3)).collect();
                    (MultiIndex::new(&e), MultiIndex::zero(n), C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                })
                .collect();
            MixedPoly::from_terms(n, terms)
        })
        .collect();
    SectionTuple::new(comps, None)
}

fn random_point(rng: &mut StdRng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8))).collect()
}

/// Worst residuals (δ², δs − |f|², ∇u − 1, (∂̄s)^k) over random sections, relative to the
/// size of the terms involved.
pub fn algebra_residuals(cases: usize, seed: u64) -> Result<[f64; 4]> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    let mut done = 0;
    while done < cases {
        let (m, n) = (rng.random_range(1..=2usize), rng.random_range(1..=3usize));
        let f = random_section(&mut rng, m, n)?;
        let z = random_point(&mut rng, n);
        let v = f.values(&z);
        if v.norm2 < 1e-2 || f.components().iter().any(|c| c.is_zero()) {
            continue;
        }
        let s = minimal_section(&f, &z);
        let ds = dbar_minimal_section(&f, &z);
        let x = s.add(&ds)?.add(&ds.wedge(&s)?)?;
        let d2 = x.interior_delta(&v.f[..m])?.interior_delta(&v.f[..m])?;
        worst[0] = worst[0].max(max_coeff(&d2) / (1.0 + max_coeff(&x) * v.norm2));
        let ds_f = s.interior_delta(&v.f[..m])?;
        worst[1] = worst[1].max(max_coeff(&ds_f.add(&SuperElement::scalar(m, n, C64::new(-v.norm2, 0.0)))?) / v.norm2);
        let u = |w: &[C64]| -> Result<SuperElement> {
            let mut acc = SuperElement::zero(m, n);
            for k in 1..=m.min(n + 1) {
                acc = acc.add(&cfl_term(&f, k, w)?)?;
            }
            Ok(acc)
        };
        let uz = u(&z)?;
        let nabla = uz.interior_delta(&v.f[..m])?.add(&dbar_fd(&u, &z, m, 1e-5)?.scale(C64::new(-1.0, 0.0)))?;
        let resid = nabla.add(&SuperElement::scalar(m, n, C64::new(-1.0, 0.0)))?;
        worst[2] = worst[2].max(max_coeff(&resid) / (1.0 + max_coeff(&uz) * v.norm2.sqrt()));
        let kmax = m.min(n);
        worst[3] = worst[3].max(max_coeff(&ds.wedge_pow(kmax + 1)));
        done += 1;
    }
    Ok(worst)
}

/// Worst ratio |∫ z^a z̄^b ρ| / (error estimate + 10⁻¹³ ∫|z|^{a+b} ρ) over random a ≠ b.
pub fn antisymmetry_residual(cases: usize, seed: u64) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let grid_rule = Default::default();
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..=2usize);
        let (a, b): (Vec<u32>, Vec<u32>) = loop {
            let a: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
            let b: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
            if a != b {
                break (a, b);
            }
        };
        let bump = FlatBump::new(rng.random_range(0.2..0.5), rng.random_range(0.6..0.95))?;
        let p = MixedPoly::monomial(n, C64::new(1.0, 0.0), MultiIndex::new(&a), MultiIndex::new(&b));
        let radial = move |z: &[C64]| z.iter().map(|w| bump.value(w.norm_sqr())).product::<f64>();
        let grid = GridSpec::uniform(n, grid_rule);
        let f = Integrand::from_fn(n, vec![bump.b; n], vec![bump.a; n], move |z| p.eval(z) * radial(z));
        let r = integrate_polydisc(&f, &grid)?;
        let (a2, b2) = (a.clone(), b.clone());
        let mass = Integrand::from_fn(n, vec![bump.b; n], vec![bump.a; n], move |z| {
            let m: f64 = z.iter().enumerate().map(|(j, w)| w.norm().powi((a2[j] + b2[j]) as i32)).product();
            C64::new(m * radial(z), 0.0)
        });
        let mass = integrate_polydisc(&mass, &grid)?.value.norm();
        worst = worst.max(r.value.norm() / (r.error_estimate + 1e-13 * mass));
    }
    Ok(worst)
}

pub fn criterion_8() -> Outcome {
    let [d2, ds, nabla, pow] = algebra_residuals(20, 8)?;
    let anti = antisymmetry_residual(20, 9)?;
    let ok = d2 < 1e-12 && ds < 1e-12 && nabla < 1e-6 && pow == 0.0 && anti <= 1.0;
    Ok((
        ok,
        format!("δ² {d2:.1e}, δs−|f|² {ds:.1e}, ∇u−1 {nabla:.1e} (< 1e-6), (∂̄s)^(min+1) {pow:.1e}, anti-symmetry/error {anti:.2} (≤ 1)"),
        Vec::new(),
    ))
}

pub fn criterion_9() -> Outcome {
    let grid = GridSpec::uniform(2, Default::default());
    let alpha = MultiIndex::new(&[2, 0]);
    // φ = |z₂|² φ₀ lies in the ideal of g = z₂(1 + z₁/2)
    let zz = MixedPoly::monomial(2, C64::new(1.0, 0.0), MultiIndex::new(&[0, 1]), MultiIndex::new(&[0, 1]));
    let phi = top_form(zz.mul(&pair_phi0(&alpha)));
    let oracle = pv_monomial(&alpha, &phi, &grid)?.value;
    let spec = ExprSpec {
        variant: Variant::UNablaU,
        f: monomial_section(&[2, 0], None),
        g: Some(monomial_section(&[0, 1], Some(half_unit(2)))),
        chi1: CutoffSpec::canonical(1),
        chi2: Some(CutoffSpec::canonical(1)),
        eps: [1.0, 1.0],
        phi,
    };
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for path in [EpsPath::ray(1.0, 1.0), EpsPath::parabolic(1.0, 3.0), EpsPath::parabolic(3.0, 1.0)] {
        let (_, x) = limit_of(&spec, &grid, &path, "c9_u_nabla_u", &mut out)?;
        worst = worst.max(rel(x.limit, oracle));
    }
    Ok((worst < 1e-3, format!("oracle {:.6}, max rel deviation {worst:.1e} (< 1e-3)", oracle.re), out))
}

pub fn criterion_10() -> Outcome {
    let grid = GridSpec::uniform(2, Default::default());
    let coef = presets::poly(2, "1 0 0 0 0 0;1 0 0 0 0 1;1 0 0 1 0 1")?;
    let phi = TestForm::simple(coef, &[1], FlatBump::default())?;
    let oracle = residue_monomial(&MultiIndex::new(&[1, 0]), &phi, &grid)?.value;
    let spec = ExprSpec {
        variant: Variant::SepIndicator,
        f: monomial_section(&[1, 0], None),
        g: Some(monomial_section(&[0, 1], None)),
        chi1: CutoffSpec::canonical(2),
        chi2: Some(CutoffSpec::indicator()),
        eps: [1.0, 1.0],
        phi,
    };
    let mut out = Vec::new();
    let mut inner = Vec::new();
    for k in 0..6 {
        let e2 = 0.1 * 0.25f64.powi(k);
        let (_, x) = limit_of(&spec, &grid, &EpsPath::axis1(e2), "c10_sep_indicator", &mut out)?;
        inner.push(x.limit);
    }
    let x = extrapolate(&inner)?;
    let e = rel(x.limit, oracle);
    Ok((e < 1e-3, format!("iterated limit {:.6} vs oracle {:.6}, rel {e:.1e} (< 1e-3)", x.limit.re, oracle.re), out))
}
