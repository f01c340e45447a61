use num_complex::Complex64 as C64;
use proptest::prelude::*;
use residue_lab::algebra::{MixedPoly, MultiIndex};
use residue_lab::cutoff::CutoffSpec;
use residue_lab::integrand::{build, build_generic, ExprSpec, Variant};
use residue_lab::presets::{half_unit, monomial, poly, pt_bm_spec};
use residue_lab::superform::SectionTuple;
use residue_lab::testform::{FlatBump, TestForm};
use residue_lab::LabError;

const ALL: [Variant; 8] = [
    Variant::SinglePv,
    Variant::SingleRes,
    Variant::PvPair,
    Variant::PotRes,
    Variant::ResRes,
    Variant::BmPair,
    Variant::UNablaU,
    Variant::SepIndicator,
];

/// Antiholomorphic degree of the regularizer for m₁ = m₂ = 1.
fn degree(v: Variant) -> usize {
    match v {
        Variant::SinglePv | Variant::PvPair => 0,
        Variant::SingleRes | Variant::PotRes | Variant::UNablaU | Variant::SepIndicator => 1,
        Variant::ResRes | Variant::BmPair => 2,
    }
}

fn form(_n: usize, p: MixedPoly, q: usize) -> TestForm {
    TestForm::simple(p, &(0..q).collect::<Vec<_>>(), FlatBump::default()).unwrap()
}

fn spec(v: Variant, f: SectionTuple, g: SectionTuple, phi: TestForm, eps: [f64; 2]) -> ExprSpec {
    let single = matches!(v, Variant::SinglePv | Variant::SingleRes | Variant::SepIndicator);
    ExprSpec {
        variant: v,
        f,
        g: if v.is_pair() { Some(g) } else { None },
        chi1: CutoffSpec::canonical(if single { 2 } else { 1 }),
        chi2: if v.is_pair() { Some(CutoffSpec::canonical(1)) } else { None },
        eps,
        phi,
    }
}

fn holo(terms: &[(f64, f64, [u32; 2])]) -> MixedPoly {
    terms.iter().fold(MixedPoly::zero(2), |acc, (re, im, e)| {
        acc.add(&MixedPoly::monomial(2, C64::new(*re, *im), MultiIndex::new(e), MultiIndex::zero(2)))
    })
}

fn holo_terms() -> impl Strategy<Value = Vec<(f64, f64, [u32; 2])>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, [0u32..3, 0..3]), 1..4)
}

fn points() -> Vec<[C64; 2]> {
    (0..25).map(|k| [C64::from_polar(0.88 * ((k * 7) % 11 + 1) as f64 / 12.0, 0.37 * k as f64), C64::from_polar(0.88 * ((k * 5) % 13 + 1) as f64 / 14.0, 1.3 * k as f64)]).collect()
}

#[test]
fn single_pv_closed_form() {
    let eps = 1e-2;
    let s = ExprSpec {
        variant: Variant::SinglePv,
        f: SectionTuple::single(monomial(&[1])).unwrap(),
        g: None,
        chi1: CutoffSpec::canonical(2),
        chi2: None,
        eps: [eps, 1.0],
        phi: form(1, MixedPoly::constant(1, C64::new(1.0, 0.0)), 1),
    };
    let dens = build(&s).unwrap();
    let chi = s.chi1;
    for r in [0.01, 0.05, 0.1, 0.3, 0.6, 0.8, 0.95] {
        let t = r * r / eps;
        let want = chi.eval(t).unwrap() / r * FlatBump::default().value(r * r);
        let got = dens.eval(&[C64::new(r, 0.0)]).unwrap();
        assert!((got - want).norm() < 1e-13 * (1.0 + want.abs()), "r = {r}: {got} vs {want}");
    }
}

#[test]
fn res_res_equals_bm_pair_for_the_pt_data() {
    let bm = pt_bm_spec(1e-3, 2e-3);
    let rr = ExprSpec { variant: Variant::ResRes, ..bm.clone() };
    let (a, b) = (build(&bm).unwrap(), build(&rr).unwrap());
    for z in points() {
        let (x, y) = (a.eval(&z).unwrap(), b.eval(&z).unwrap());
        assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300), "{z:?}: {x} vs {y}");
    }
}

#[test]
fn bm_pair_density_is_finite_and_linear_in_eps1_off_the_axis() {
    let z = [C64::new(0.3, 0.02), C64::new(0.3, -0.1)];
    let at = |e1: f64| build(&pt_bm_spec(e1, 1e-3)).unwrap().eval(&z).unwrap();
    let ratios: Vec<C64> = [1e-8, 1e-10, 1e-12].iter().map(|&e| at(e) / e).collect();
    assert!((ratios[1] - ratios[2]).norm() < 1e-3 * ratios[2].norm());
    for k in 0..200 {
        let w = [C64::from_polar(1e-4 * (k + 1) as f64, k as f64), C64::from_polar(0.004 * k as f64, 0.3 * k as f64)];
        assert!(build(&pt_bm_spec(1e-6, 1e-6)).unwrap().eval(&w).unwrap().is_finite());
    }
}

#[test]
fn densities_vanish_outside_the_support() {
    let f = SectionTuple::single(monomial(&[1, 0])).unwrap();
    let g = SectionTuple::single(monomial(&[0, 1])).unwrap();
    for v in ALL {
        let q = 2 - degree(v);
        let p = if q == 2 { monomial(&[1, 1]) } else { MixedPoly::constant(2, C64::new(1.0, 0.0)) };
        let mut s = spec(v, f.clone(), g.clone(), form(2, p, q), [1e-2, 1e-2]);
        if v == Variant::SepIndicator {
            s.chi2 = Some(CutoffSpec::indicator());
        }
        let d = build(&s).unwrap_or_else(|e| panic!("{}: {e}", v.name()));
        for z in [[C64::new(0.95, 0.0), C64::new(0.1, 0.0)], [C64::new(0.2, 0.1), C64::new(0.0, -0.91)]] {
            assert_eq!(d.eval(&z).unwrap(), C64::default(), "{}", v.name());
        }
    }
}

#[test]
fn build_rejects_bidegree_mismatches() {
    let f = SectionTuple::single(monomial(&[1, 0])).unwrap();
    let g = SectionTuple::single(monomial(&[0, 1])).unwrap();
    for v in ALL {
        for q in 0..=2 {
            let mut s = spec(v, f.clone(), g.clone(), form(2, monomial(&[1, 1]), q), [1e-2, 1e-2]);
            if v == Variant::SepIndicator {
                s.chi2 = Some(CutoffSpec::indicator());
            }
            let r = build(&s);
            // ∇u^g has a frame-free part of degree 0 and a top-frame part of degree 1
            let ok = q + degree(v) == 2 || (v == Variant::UNablaU && q == 2);
            if ok {
                assert!(r.is_ok(), "{} q = {q}", v.name());
            } else {
                assert!(matches!(r, Err(LabError::Bidegree(_))), "{} q = {q}", v.name());
            }
        }
    }
}

#[test]
fn cutoff_slot_rules() {
    let f = SectionTuple::single(monomial(&[1, 0])).unwrap();
    let g = SectionTuple::single(monomial(&[0, 1])).unwrap();
    let base = spec(Variant::SepIndicator, f.clone(), g.clone(), form(2, monomial(&[1, 1]), 1), [1e-2, 1e-2]);
    assert!(build(&ExprSpec { chi2: Some(CutoffSpec::indicator()), ..base.clone() }).is_ok());
    assert!(matches!(build(&ExprSpec { chi1: CutoffSpec::indicator(), ..base.clone() }), Err(LabError::Cutoff(_))));
    let pv = spec(Variant::PvPair, f.clone(), g.clone(), form(2, monomial(&[1, 1]), 2), [1e-2, 1e-2]);
    assert!(matches!(build(&ExprSpec { chi2: Some(CutoffSpec::indicator()), ..pv.clone() }), Err(LabError::Cutoff(_))));
    let single = spec(Variant::SinglePv, f.clone(), g, form(2, monomial(&[1, 1]), 2), [1e-2, 1e-2]);
    // χ for a single section must vanish to order min(m, n) + 1 = 2
    assert!(matches!(build(&ExprSpec { chi1: CutoffSpec::canonical(1), ..single.clone() }), Err(LabError::Cutoff(_))));
    assert!(build(&single).is_ok());
    assert!(matches!(build(&single.with_eps(0.0, 1.0)), Err(LabError::Invalid(_))));
    assert!(matches!(build(&single.with_eps(-1.0, 1.0)), Err(LabError::Invalid(_))));
    let bm = ExprSpec { g: Some(SectionTuple::new(vec![monomial(&[1, 0]), monomial(&[0, 1])], None).unwrap()), ..pt_bm_spec(1e-2, 1e-2) };
    assert!(build(&bm).is_err());
}

#[test]
fn u_nabla_u_with_one_term() {
    // m₂ = 1: ∇u^g_ε = ε/(|g|²+ε) in the frame-free part, and u^f_ε = f̄/(|f|²+ε) for m₁ = 1
    let (e1, e2) = (1e-2, 3e-2);
    let s = ExprSpec {
        variant: Variant::UNablaU,
        f: SectionTuple::single(monomial(&[1, 0])).unwrap(),
        g: Some(SectionTuple::single(monomial(&[0, 1])).unwrap()),
        chi1: CutoffSpec::canonical(1),
        chi2: None,
        eps: [e1, e2],
        phi: form(2, MixedPoly::constant(2, C64::new(1.0, 0.0)), 2),
    };
    let d = build(&s).unwrap();
    for z in points() {
        let bump = FlatBump::default();
        let rho = bump.value(z[0].norm_sqr()) * bump.value(z[1].norm_sqr());
        let want = z[0].conj() / (z[0].norm_sqr() + e1) * (1.0 - e2 / (z[1].norm_sqr() + e2)) * rho;
        let got = d.eval(&z).unwrap();
        assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()), "{got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_blocks_agree_with_the_generic_algebra(tf in holo_terms(), tg in holo_terms(), unit in any::<bool>(), e1 in 1e-4..1.0f64, e2 in 1e-4..1.0f64) {
        let f = SectionTuple::new(vec![holo(&tf)], unit.then(|| half_unit(2))).unwrap();
        let g = SectionTuple::single(holo(&tg)).unwrap();
        let g2 = SectionTuple::new(vec![holo(&tg), holo(&tf)], None).unwrap();
        let phi0 = poly(2, "1 0 1 0 0 0;0.5 0.5 0 0 0 1").unwrap();
        let mut specs: Vec<ExprSpec> = ALL.iter().map(|&v| spec(v, f.clone(), g.clone(), form(2, phi0.clone(), 2 - degree(v)), [e1, e2])).collect();
        // two-component g: u^g has degree 1 in the frame-free part, the full-frame part degree 1
        specs.push(ExprSpec { chi2: Some(CutoffSpec::canonical(2)), ..spec(Variant::PotRes, f.clone(), g2.clone(), form(2, phi0.clone(), 0), [e1, e2]) });
        specs.push(spec(Variant::UNablaU, f.clone(), g2, form(2, phi0.clone(), 0), [e1, e2]));
        for s in &specs {
            let (a, b) = match (build(s), build_generic(s)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) => panic!("{}: {e}", s.variant.name()),
                (_, Err(e)) => panic!("{}: {e}", s.variant.name()),
            };
            for z in points() {
                let (x, y) = (a.eval(&z).unwrap(), b.eval(&z).unwrap());
                prop_assert!((x - y).norm() <= 1e-10 * (1.0 + x.norm()), "{}: {} vs {}", s.variant.name(), x, y);
            }
        }
    }

    #[test]
    fn res_res_equals_bm_pair(tf in holo_terms(), tg in holo_terms(), e1 in 1e-4..1.0f64, e2 in 1e-4..1.0f64) {
        let f = SectionTuple::single(holo(&tf)).unwrap();
        let g = SectionTuple::single(holo(&tg)).unwrap();
        let phi = form(2, poly(2, "1 0 0 0 0 0;1 0 1 0 0 1").unwrap(), 0);
        let bm = spec(Variant::BmPair, f, g, phi, [e1, e2]);
        let rr = ExprSpec { variant: Variant::ResRes, ..bm.clone() };
        let (a, b) = (build(&bm).unwrap(), build(&rr).unwrap());
        let vals: Vec<(C64, C64)> = points().iter().map(|z| (a.eval(z).unwrap(), b.eval(z).unwrap())).collect();
        // proportional f and g give a density that vanishes up to rounding
        let scale = vals.iter().map(|v| v.0.norm()).fold(0.0, f64::max);
        prop_assume!(scale > 1e-6);
        for (x, y) in vals {
            prop_assert!((x - y).norm() <= 1e-12 * scale.max(x.norm()), "{} vs {}", x, y);
        }
    }
}
