use approx::assert_relative_eq;
use proptest::prelude::*;
use residue_lab::cutoff::{delta_family_pairing, CutoffSpec};
use residue_lab::testform::FlatBump;

#[test]
fn values() {
    assert_eq!(CutoffSpec::canonical(1).eval(1.0).unwrap(), 0.5);
    assert_eq!(CutoffSpec::canonical(2).eval(1.0).unwrap(), 0.25);
    assert_eq!(CutoffSpec::canonical(1).eval(f64::INFINITY).unwrap(), 1.0);
    assert_eq!(CutoffSpec::complement(1).eval(0.0).unwrap(), 1.0);
    assert_eq!(CutoffSpec::complement(1).eval(f64::INFINITY).unwrap(), 0.0);
    assert_eq!(CutoffSpec::indicator().eval(0.999).unwrap(), 0.0);
    assert_eq!(CutoffSpec::indicator().eval(1.0).unwrap(), 1.0);
    assert!(CutoffSpec::canonical(1).eval(-1.0).is_err());
}

#[test]
fn derivatives() {
    assert_eq!(CutoffSpec::canonical(1).prime(0.0).unwrap(), 1.0);
    assert_eq!(CutoffSpec::canonical(1).prime(1.0).unwrap(), 0.25);
    for t in [100.0, 1e3, 1e5] {
        assert_relative_eq!(CutoffSpec::canonical(2).prime(t).unwrap(), 2.0 / (t * t), max_relative = 0.04);
    }
    assert!(CutoffSpec::indicator().prime(1.0).is_err());
    assert!(CutoffSpec::canonical(1).prime(-0.5).is_err());
}

#[test]
fn derivative_matches_finite_differences() {
    for spec in [CutoffSpec::canonical(1), CutoffSpec::canonical(3), CutoffSpec::complement(2), CutoffSpec::tprime(2)] {
        for t in [0.1, 0.7, 2.0, 13.0] {
            let h = 1e-6 * t;
            let fd = (spec.eval(t + h).unwrap() - spec.eval(t - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(spec.prime(t).unwrap(), fd, max_relative = 1e-6, epsilon = 1e-9);
        }
    }
}

#[test]
fn tprime_is_t_times_chi_prime() {
    for l in 1..4 {
        for t in [0.01, 0.5, 3.0, 40.0] {
            assert_relative_eq!(CutoffSpec::tprime(l).eval(t).unwrap(), t * CutoffSpec::canonical(l).prime(t).unwrap(), max_relative = 1e-13);
        }
    }
}

#[test]
fn vanishing_orders() {
    assert_eq!(CutoffSpec::canonical(3).vanishing_order(), 3);
    assert_eq!(CutoffSpec::complement(2).vanishing_order(), 0);
    for l in 1..5u32 {
        // χ(t)/t^ℓ → 1 exactly at order ℓ
        let t = 1e-6;
        assert_relative_eq!(CutoffSpec::canonical(l).eval(t).unwrap() / t.powi(l as i32), 1.0, max_relative = 1e-5);
    }
    assert!(CutoffSpec::canonical(0).validate().is_err());
}

#[test]
fn pairing_total_mass() {
    // φ ≡ 1 on a long support: the pairing is χ(S/ε) = 1 − O(ε/S)
    let (v, err) = delta_family_pairing(&CutoffSpec::canonical(1), |_| 1.0, 1e4, 1e-3).unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
    assert!(err < 1e-8);
}

#[test]
fn pairing_vanishes_for_phi_zero_at_origin() {
    let bump = FlatBump::new(1.0, 1.5).unwrap();
    let phi = |t: f64| t * bump.value(t * t);
    // −∫(χ(t/ε) − 1)φ′ = O(ε log 1/ε)
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let v = delta_family_pairing(&CutoffSpec::canonical(1), phi, 1.5, eps).unwrap().0;
        assert!(v.abs() <= 2.0 * eps * eps.ln().abs(), "ε = {eps}: {v}");
    }
}

#[test]
fn pairing_recovers_point_value() {
    // independent oracle: integrate by parts, −∫χ(t/ε)φ′(t)dt by the trapezoid rule on a fine grid
    let bump = FlatBump::new(0.3, 0.8).unwrap();
    let phi = |t: f64| 0.7 * bump.value(t);
    let dphi = |t: f64| 0.7 * bump.derivatives(t)[1];
    let spec = CutoffSpec::canonical(2);
    for eps in [1e-2, 1e-3, 1e-4] {
        let (v, _) = delta_family_pairing(&spec, phi, 0.8, eps).unwrap();
        let n = 200_000;
        let h = 0.8 / n as f64;
        let oracle: f64 = (0..n).map(|k| {
            let t = (k as f64 + 0.5) * h;
            -spec.eval(t / eps).unwrap() * dphi(t) * h
        }).sum();
        assert_relative_eq!(v, oracle, max_relative = 1e-6);
    }
    let (v, _) = delta_family_pairing(&spec, phi, 0.8, 1e-4).unwrap();
    assert!((v - 0.7).abs() < 1e-3);
}

#[test]
fn pairing_error_decreases_with_eps() {
    let bump = FlatBump::new(0.3, 0.8).unwrap();
    let phi = |t: f64| 0.7 * bump.value(t);
    let errs: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| (delta_family_pairing(&CutoffSpec::canonical(1), phi, 0.8, e).unwrap().0 - 0.7).abs())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn pairing_rejects_indicator() {
    assert!(delta_family_pairing(&CutoffSpec::indicator(), |_| 1.0, 1.0, 1e-2).is_err());
}

proptest! {
    #[test]
    fn canonical_bounded_by_min_power_one(l in 1u32..5, lt in -8.0f64..8.0) {
        let t = 10f64.powf(lt);
        let v = CutoffSpec::canonical(l).eval(t).unwrap();
        prop_assert!(v >= 0.0 && v <= t.powi(l as i32).min(1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn t_chi_prime_bounded(l in 1u32..6, lt in -8.0f64..12.0) {
        let t = 10f64.powf(lt);
        for spec in [CutoffSpec::canonical(l), CutoffSpec::complement(l), CutoffSpec::tprime(l)] {
            prop_assert!((t * spec.prime(t).unwrap()).abs() <= l as f64 * (l as f64 + 2.0));
        }
    }

    #[test]
    fn values_in_unit_interval(l in 1u32..6, t in 0.0f64..1e6) {
        for spec in [CutoffSpec::canonical(l), CutoffSpec::complement(l), CutoffSpec::indicator()] {
            let v = spec.eval(t).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
