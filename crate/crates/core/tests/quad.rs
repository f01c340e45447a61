use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use num_complex::Complex64 as C64;
use residue_lab::algebra::{MixedPoly, MultiIndex};
use residue_lab::integrand::{build, Integrand};
use residue_lab::presets::{poly, pt_bm_spec, pt_phi};
use residue_lab::quad::{
    fubini_average, integrate_polydisc, integrate_pt_cycle, integrate_torus_monomial, pt_cycle_value, track_branch, AxisRule,
    CachedSampler, CycleGrid, FubiniGrid, FubiniSampler, GridSpec, Grading, Orientation, PtCycle,
};
use residue_lab::testform::{FlatBump, TestForm};

fn mi(e: &[u32]) -> MultiIndex {
    MultiIndex::new(e)
}

fn two_form(text: &str) -> TestForm {
    TestForm::simple(poly(2, text).unwrap(), &[], FlatBump::default()).unwrap()
}

#[test]
fn unit_disc_area() {
    let one = Integrand::from_fn(1, vec![1.0], vec![0.5], |_| C64::new(1.0, 0.0));
    let r = integrate_polydisc(&one, &GridSpec::uniform(1, AxisRule::default())).unwrap();
    assert!((r.value.re - PI).abs() < 1e-8, "{r:?}");
    let two = Integrand::from_fn(2, vec![1.0, 1.0], vec![0.5, 0.5], |_| C64::new(1.0, 0.0));
    let r = integrate_polydisc(&two, &GridSpec::uniform(2, AxisRule::default())).unwrap();
    assert!((r.value.re - PI * PI).abs() < 1e-8);
    assert!(r.nodes > 0 && r.error_estimate < 1e-8);
}

#[test]
fn anti_symmetric_integrands_vanish() {
    let bump = FlatBump::default();
    let f = Integrand::from_fn(1, vec![bump.b], vec![bump.a], move |z| z[0] * bump.value(z[0].norm_sqr()));
    let r = integrate_polydisc(&f, &GridSpec::uniform(1, AxisRule::default())).unwrap();
    assert!(r.value.norm() <= r.error_estimate.max(1e-13), "{r:?}");
}

#[test]
fn radial_power_integral() {
    // ∫_{|z|<1} |z|^{-1} = 2π
    let f = Integrand::from_fn(1, vec![1.0], vec![0.5], |z| C64::new(1.0 / z[0].norm(), 0.0));
    let rule = AxisRule { grading: Grading::Power { exponent: 2.0, panels: 8 }, ..AxisRule::default() };
    let r = integrate_polydisc(&f, &GridSpec::uniform(1, rule)).unwrap();
    assert_relative_eq!(r.value.re, TAU, max_relative = 1e-10);
}

#[test]
fn grid_validation() {
    let f = Integrand::from_fn(1, vec![1.0], vec![0.5], |_| C64::new(1.0, 0.0));
    let bad = AxisRule { angular: 2, ..AxisRule::default() };
    assert!(integrate_polydisc(&f, &GridSpec::uniform(1, bad)).is_err());
    assert!(integrate_polydisc(&f, &GridSpec::uniform(2, AxisRule::default())).is_err());
    let four = Integrand::from_fn(4, vec![1.0; 4], vec![0.5; 4], |_| C64::new(1.0, 0.0));
    assert!(integrate_polydisc(&four, &GridSpec::uniform(4, AxisRule::default())).is_err());
    let geo = AxisRule { grading: Grading::Geometric { ratio: 1.0, floor: 1e-3 }, ..AxisRule::default() };
    assert!(geo.validate().is_err());
    assert!(integrate_polydisc(&f, &GridSpec::uniform(1, AxisRule::default())).unwrap().require(1e-6).is_ok());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dens = build(&pt_bm_spec(1e-3, 1e-3)).unwrap();
    let grid = residue_lab::presets::pt_grid(false);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| integrate_polydisc(&dens, &grid).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
    assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
}

#[test]
fn torus_examples() {
    let tpi = C64::new(0.0, TAU);
    let one = two_form("1 0 0 0 0 0");
    let v = integrate_torus_monomial(&mi(&[1, 0]), &mi(&[0, 1]), 1e-4, 1e-4, &one, 16).unwrap();
    assert!((v - tpi * tpi).norm() < 1e-12, "{v}");
    let z1 = two_form("1 0 1 0 0 0");
    let v = integrate_torus_monomial(&mi(&[1, 0]), &mi(&[0, 1]), 1e-4, 1e-4, &z1, 16).unwrap();
    assert!(v.norm() < 1e-12);
    let v = integrate_torus_monomial(&mi(&[2, 0]), &mi(&[0, 1]), 1e-4, 1e-4, &z1, 16).unwrap();
    assert!((v - tpi * tpi).norm() < 1e-12);
    // swapping the rows reverses the orientation
    let v = integrate_torus_monomial(&mi(&[0, 1]), &mi(&[1, 0]), 1e-4, 1e-4, &one, 16).unwrap();
    assert!((v + tpi * tpi).norm() < 1e-12);
    assert!(integrate_torus_monomial(&mi(&[1, 1]), &mi(&[2, 2]), 1e-4, 1e-4, &one, 16).is_err());
    assert_eq!(integrate_torus_monomial(&mi(&[1, 0]), &mi(&[0, 1]), 0.99, 1e-4, &one, 16).unwrap(), C64::default());
}

#[test]
fn torus_quadrature_converges_spectrally() {
    let phi = two_form("1 0 0 0 0 0;0.3 0 2 1 1 0;1 1 0 0 1 1");
    let at = |k: usize| integrate_torus_monomial(&mi(&[2, 1]), &mi(&[1, 3]), 1e-3, 1e-4, &phi, k).unwrap();
    assert!((at(32) - at(64)).norm() < 1e-10);
}

#[test]
fn fubini_kernel_has_unit_mass() {
    let konst = |_: f64, _: f64| C64::new(2.5, -1.0);
    let r = fubini_average(1e-3, 1e-2, &konst, &FubiniGrid::default()).unwrap();
    assert!((r.value - C64::new(2.5, -1.0)).norm() < 1e-6 * 2.7, "{r:?}");
}

#[test]
fn fubini_average_closed_form() {
    // ∫ ε dt /((t+ε)²(1+t)) = ε ln ε/(ε−1)² + 1/(1−ε)
    let e: f64 = 1e-3;
    let want = e * e.ln() / (e - 1.0).powi(2) + 1.0 / (1.0 - e);
    let s = |t1: f64, _: f64| C64::new(1.0 / (1.0 + t1), 0.0);
    let r = fubini_average(e, 0.5, &s, &FubiniGrid::default()).unwrap();
    assert_relative_eq!(r.value.re, want, max_relative = 1e-6);
}

#[test]
fn fubini_range_must_cover_the_kernel() {
    let konst = |_: f64, _: f64| C64::new(1.0, 0.0);
    let short = FubiniGrid { range: 1.0, ..FubiniGrid::default() };
    assert!(fubini_average(1e-3, 1e-3, &konst, &short).is_err());
    assert!(fubini_average(0.0, 1e-3, &konst, &FubiniGrid::default()).is_err());
}

#[test]
fn cached_sampler_memoizes() {
    let s = CachedSampler::new(|t1: f64, t2: f64| C64::new(t1 + t2, 0.0));
    assert!(s.is_empty());
    assert_eq!(s.sample(1.0, 2.0).unwrap(), C64::new(3.0, 0.0));
    s.sample(1.0, 2.0).unwrap();
    s.sample(2.0, 2.0).unwrap();
    assert_eq!(s.len(), 2);
}

#[test]
fn pt_cycle_limits_along_the_two_curves() {
    let phi = pt_phi();
    let grid = CycleGrid::default();
    let at = |e: f64, c: f64| integrate_pt_cycle(e.powi(4), c * e * e, &phi, &grid).unwrap();
    let small = 0.05 * 0.25f64.powi(6);
    assert!(at(small, 4.0).norm() < 1e-6);
    assert!(at(small, 1.0).norm() > 1.0);
    assert!(integrate_pt_cycle(0.5, 0.5, &phi, &grid).is_err());
}

#[test]
fn pt_cycle_orientations_are_opposite() {
    let phi = pt_phi();
    let grid = CycleGrid::default();
    let a = pt_cycle_value(1e-6, 2e-3, &phi, &grid, Orientation::ArgFArgG).unwrap();
    let b = pt_cycle_value(1e-6, 2e-3, &phi, &grid, Orientation::CoArea).unwrap();
    assert_eq!(a, -b);
    let sampler = PtCycle { phi: phi.clone(), grid, orientation: Orientation::CoArea };
    assert_eq!(sampler.sample(1e-6, 2e-3).unwrap(), b);
    assert!(pt_cycle_value(1e-6, 2e-3, &TestForm::simple(MixedPoly::constant(2, C64::new(1.0, 0.0)), &[0], FlatBump::default()).unwrap(), &grid, Orientation::ArgFArgG).is_err());
}

#[test]
fn branch_tracking_swaps_when_the_loop_encloses_one_root() {
    // |g| = √t₂ encloses z₁² + z₁³ exactly when √t₂ > |z₁|²|1 + z₁|
    let t1: f64 = 1e-8;
    let s = t1.powf(0.125);
    let c = s.powi(4) * (1.0 + s).powi(2);
    assert!(!track_branch(t1, 4.0 * c, 0.0, 4096).unwrap());
    assert!(track_branch(t1, 0.25 * c * (1.0 - s).powi(2), 0.0, 4096).unwrap());
}
