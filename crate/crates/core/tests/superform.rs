use num_complex::Complex64 as C64;
use proptest::prelude::*;
use residue_lab::algebra::{MixedPoly, MultiIndex};
use residue_lab::superform::{cfl_term, dbar_minimal_section, minimal_section, SectionTuple, SuperElement};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: &SuperElement, b: &SuperElement, tol: f64) -> bool {
    let d = a.add(&b.scale(c(-1.0, 0.0))).unwrap();
    d.terms().iter().all(|t| t.1.norm() <= tol)
}

fn poly(n: usize, s: &str) -> MixedPoly {
    MixedPoly::parse(n, &s.replace(';', "\n")).unwrap()
}

fn tuple(n: usize, comps: &[&str]) -> SectionTuple {
    SectionTuple::new(comps.iter().map(|s| poly(n, s)).collect(), None).unwrap()
}

#[test]
fn wedge_examples() {
    let (d1, d2) = (SuperElement::dzbar(0, 2, 0), SuperElement::dzbar(0, 2, 1));
    assert_eq!(d1.wedge(&d2).unwrap(), d2.wedge(&d1).unwrap().scale(c(-1.0, 0.0)));
    let e1 = SuperElement::frame(2, 1, 0);
    assert!(e1.wedge(&e1).unwrap().is_zero());
    // (e₁ + dz̄₁) ∧ e₂ = e₁∧e₂ + dz̄₁∧e₂ = e₁∧e₂ − e₂∧dz̄₁
    let e2 = SuperElement::frame(2, 1, 1);
    let x = e1.add(&SuperElement::dzbar(2, 1, 0)).unwrap().wedge(&e2).unwrap();
    assert_eq!(x.coeff(0b11, 0), c(1.0, 0.0));
    assert_eq!(x.coeff(0b10, 0b1), c(-1.0, 0.0));
    assert_eq!(x.terms().len(), 2);
    assert!(e1.wedge(&SuperElement::frame(1, 1, 0)).is_err());
}

#[test]
fn interior_delta_examples() {
    let f = [c(2.0, 1.0), c(-1.0, 3.0)];
    let (e1, e2) = (SuperElement::frame(2, 2, 0), SuperElement::frame(2, 2, 1));
    let lhs = e1.wedge(&e2).unwrap().interior_delta(&f).unwrap();
    let rhs = e2.scale(f[0]).add(&e1.scale(-f[1])).unwrap();
    assert_eq!(lhs, rhs);
    assert!(SuperElement::dzbar(2, 2, 1).interior_delta(&f).unwrap().is_zero());
    assert!(e1.interior_delta(&f[..1]).is_err());
}

#[test]
fn minimal_section_examples() {
    let s = minimal_section(&tuple(1, &["1 0 1 0"]), &[c(0.0, 1.0)]);
    assert_eq!(s, SuperElement::frame(1, 1, 0).scale(c(0.0, -1.0)));
    let s = minimal_section(&tuple(2, &["1 0 1 0 0 0", "1 0 0 1 0 0"]), &[c(1.0, 0.0), c(0.0, 1.0)]);
    assert_eq!(s.coeff(0b01, 0), c(1.0, 0.0));
    assert_eq!(s.coeff(0b10, 0), c(0.0, -1.0));
}

#[test]
fn dbar_minimal_section_examples() {
    // dz̄_i ∧ e_j is stored as −e_j ∧ dz̄_i
    let d = dbar_minimal_section(&tuple(1, &["1 0 4 0"]), &[c(1.0, 0.0)]);
    assert_eq!(d, SuperElement::dzbar(1, 1, 0).wedge(&SuperElement::frame(1, 1, 0)).unwrap().scale(c(4.0, 0.0)));
    assert_eq!(d.coeff(1, 1), c(-4.0, 0.0));
    let m = 2;
    let dz = |i| SuperElement::dzbar(m, 2, i);
    let e = |j| SuperElement::frame(m, 2, j);
    let d = dbar_minimal_section(&tuple(2, &["1 0 1 0 0 0", "1 0 0 1 0 0"]), &[c(0.3, 0.2), c(-0.5, 0.1)]);
    let want = dz(0).wedge(&e(0)).unwrap().add(&dz(1).wedge(&e(1)).unwrap()).unwrap();
    assert_eq!(d, want);
    let d = dbar_minimal_section(&tuple(2, &["1 0 2 0 0 0", "1 0 1 1 0 0"]), &[c(1.0, 0.0), c(1.0, 0.0)]);
    let want = dz(0).wedge(&e(0)).unwrap().scale(c(2.0, 0.0)).add(&dz(0).add(&dz(1)).unwrap().wedge(&e(1)).unwrap()).unwrap();
    assert_eq!(d, want);
}

#[test]
fn cfl_examples() {
    let f = tuple(1, &["1 0 1 0"]);
    assert_eq!(cfl_term(&f, 1, &[c(2.0, 0.0)]).unwrap(), SuperElement::frame(1, 1, 0).scale(c(0.5, 0.0)));
    for z in [c(0.3, -0.7), c(-2.0, 0.1), c(1e-3, 1e-3)] {
        let u = cfl_term(&f, 1, &[z]).unwrap();
        assert!((u.coeff(1, 0) - 1.0 / z).norm() <= 1e-14 * (1.0 / z).norm());
    }
    assert!(cfl_term(&f, 1, &[c(0.0, 0.0)]).is_err());
    assert!(cfl_term(&f, 2, &[c(1.0, 0.0)]).is_err());
}

#[test]
fn cfl_top_term_is_the_bochner_martinelli_kernel() {
    // f = (z₁, z₂): BM numerator f̄₁ dz̄₂ − f̄₂ dz̄₁ over |z|⁴; the frames e₁∧e₂ precede it with sign −1
    let f = tuple(2, &["1 0 1 0 0 0", "1 0 0 1 0 0"]);
    for z in [[c(1.0, 0.0), c(0.0, 1.0)], [c(0.2, -0.3), c(1.1, 0.4)]] {
        let u = cfl_term(&f, 2, &z).unwrap();
        let r4 = (z[0].norm_sqr() + z[1].norm_sqr()).powi(2);
        assert!((u.coeff(0b11, 0b10) - (-z[0].conj() / r4)).norm() < 1e-14);
        assert!((u.coeff(0b11, 0b01) - (z[1].conj() / r4)).norm() < 1e-14);
        assert_eq!(u.terms().len(), 2);
    }
}

/// ∂̄ by central differences in the real coordinates.
fn dbar_fd(u: impl Fn(&[C64]) -> SuperElement, z: &[C64], m: usize, h: f64) -> SuperElement {
    let n = z.len();
    let mut out = SuperElement::zero(m, n);
    for i in 0..n {
        let at = |d: C64| {
            let mut w = z.to_vec();
            w[i] += d;
            u(&w)
        };
        let dx = at(c(h, 0.0)).add(&at(c(-h, 0.0)).scale(c(-1.0, 0.0))).unwrap();
        let dy = at(c(0.0, h)).add(&at(c(0.0, -h)).scale(c(-1.0, 0.0))).unwrap();
        let d = dx.add(&dy.scale(c(0.0, 1.0))).unwrap().scale(c(0.25 / h, 0.0));
        out = out.add(&SuperElement::dzbar(m, n, i).wedge(&d).unwrap()).unwrap();
    }
    out
}

#[test]
fn nabla_identity_componentwise() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let sections = [tuple(2, &["1 0 1 0 0 0", "1 0 0 1 0 0"]), tuple(2, &["1 0 2 0 0 0", "1 0 1 1 0 0;0.5 0 0 2 0 0"]), tuple(3, &["1 0 1 0 1 0 0 0", "1 0 0 0 2 0 0 0"]), tuple(2, &["1 0 4 0 0 0"])];
    let mut checked = 0;
    while checked < 200 {
        let f = &sections[checked % sections.len()];
        let z: Vec<C64> = (0..f.dim()).map(|_| c(rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9))).collect();
        let v = f.values(&z);
        if v.norm2 < 1e-2 {
            continue;
        }
        let fv = &v.f[..f.m()];
        let one = cfl_term(f, 1, &z).unwrap().interior_delta(fv).unwrap();
        assert!(close(&one, &SuperElement::scalar(f.m(), f.dim(), c(1.0, 0.0)), 1e-12));
        for k in 1..f.m().min(f.dim()) {
            let lhs = cfl_term(f, k + 1, &z).unwrap().interior_delta(fv).unwrap();
            let rhs = dbar_fd(|w| cfl_term(f, k, w).unwrap(), &z, f.m(), 1e-5);
            let scale = lhs.terms().iter().map(|t| t.1.norm()).fold(1e-300, f64::max);
            assert!(close(&lhs, &rhs, 1e-6 * scale), "k = {k} at {z:?}: {lhs:?} vs {rhs:?}");
        }
        checked += 1;
    }
}

#[test]
fn dbar_s_powers_vanish_beyond_min_m_n() {
    let cases = [(tuple(1, &["1 0 3 0"]), 1), (tuple(2, &["1 0 1 1 0 0", "1 0 0 2 0 0"]), 2), (tuple(3, &["1 0 1 0 1 0 0 0", "1 0 0 2 0 0 0 0"]), 2), (tuple(2, &["1 0 2 1 0 0"]), 1)];
    for (f, q) in cases {
        let z: Vec<C64> = (0..f.dim()).map(|j| c(0.3 + 0.1 * j as f64, -0.2)).collect();
        let d = dbar_minimal_section(&f, &z);
        assert!(!d.wedge_pow(q).is_zero());
        assert!(d.wedge_pow(q + 1).is_zero());
    }
}

#[test]
fn units_are_checked_on_the_polydisc() {
    let f = SectionTuple::new(vec![poly(2, "1 0 1 0 0 0")], Some(poly(2, "1 0 0 0 0 0;0.5 0 1 0 0 0"))).unwrap();
    assert!(f.check_unit(1.0, 0.1).is_ok());
    let bad = SectionTuple::new(vec![poly(2, "1 0 1 0 0 0")], Some(poly(2, "1 0 0 0 0 0;2 0 1 0 0 0"))).unwrap();
    assert!(bad.check_unit(1.0, 0.1).is_err());
    assert!(SectionTuple::new(vec![poly(2, "1 0 0 0 1 0")], None).is_err());
    assert!(SectionTuple::new(vec![], None).is_err());
}

fn arb_element(m: usize, n: usize) -> impl Strategy<Value = SuperElement> {
    let gens = m + n;
    prop::collection::vec((0u8..(1 << gens), -3i32..4, -3i32..4), 0..6).prop_map(move |ts| {
        let mut x = SuperElement::zero(m, n);
        for (mask, re, im) in ts {
            let mut term = SuperElement::scalar(m, n, c(re as f64, im as f64));
            for g in 0..gens {
                if mask & (1 << g) != 0 {
                    let gen = if g < m { SuperElement::frame(m, n, g) } else { SuperElement::dzbar(m, n, g - m) };
                    term = term.wedge(&gen).unwrap();
                }
            }
            x = x.add(&term).unwrap();
        }
        x
    })
}

fn homogeneous_parts(x: &SuperElement) -> Vec<(u32, SuperElement)> {
    let (m, n) = (x.frames(), x.dim());
    (0..=(m + n) as u32)
        .map(|d| {
            let mut part = SuperElement::zero(m, n);
            for &(mask, coef) in x.terms().iter().filter(|t| t.0.count_ones() == d) {
                let (s, t) = x.split_mask(mask);
                let mut b = SuperElement::scalar(m, n, coef);
                for g in 0..m + n {
                    let bit = if g < m { s >> g & 1 } else { t >> (g - m) & 1 };
                    if bit == 1 {
                        b = b.wedge(&if g < m { SuperElement::frame(m, n, g) } else { SuperElement::dzbar(m, n, g - m) }).unwrap();
                    }
                }
                part = part.add(&b).unwrap();
            }
            (d, part)
        })
        .collect()
}

proptest! {
    #[test]
    fn wedge_is_associative(a in arb_element(2, 2), b in arb_element(2, 2), x in arb_element(2, 2)) {
        let l = a.wedge(&b).unwrap().wedge(&x).unwrap();
        let r = a.wedge(&b.wedge(&x).unwrap()).unwrap();
        prop_assert!(close(&l, &r, 1e-9));
    }

    #[test]
    fn wedge_is_graded_commutative(a in arb_element(2, 2), b in arb_element(2, 2)) {
        for (da, pa) in homogeneous_parts(&a) {
            for (db, pb) in homogeneous_parts(&b) {
                let sign = if (da * db) % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!(close(&pa.wedge(&pb).unwrap(), &pb.wedge(&pa).unwrap().scale(c(sign, 0.0)), 1e-9));
            }
        }
    }

    #[test]
    fn delta_is_nilpotent(x in arb_element(2, 2), f1 in -2.0f64..2.0, f2 in -2.0f64..2.0) {
        let f = [c(f1, 0.5), c(f2, -1.0)];
        prop_assert!(close(&x.interior_delta(&f).unwrap().interior_delta(&f).unwrap(), &SuperElement::zero(2, 2), 1e-9));
    }

    #[test]
    fn delta_is_an_antiderivation(a in arb_element(2, 1), b in arb_element(2, 1)) {
        let f = [c(0.7, 0.2), c(-1.3, 0.4)];
        for (da, pa) in homogeneous_parts(&a) {
            let sign = if da % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = pa.wedge(&b).unwrap().interior_delta(&f).unwrap();
            let rhs = pa.interior_delta(&f).unwrap().wedge(&b).unwrap().add(&pa.wedge(&b.interior_delta(&f).unwrap()).unwrap().scale(c(sign, 0.0))).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-9));
        }
    }

    #[test]
    fn delta_of_minimal_section_is_norm(x in -1.0f64..1.0, y in -1.0f64..1.0, u in -1.0f64..1.0) {
        let f = tuple(2, &["1 0 2 0 0 0;1 0 0 1 0 0", "1 0 1 1 0 0;-1 0.5 0 0 0 0"]);
        let z = [c(x, y), c(u, x)];
        let v = f.values(&z);
        let d = minimal_section(&f, &z).interior_delta(&v.f[..2]).unwrap();
        prop_assert!(close(&d, &SuperElement::scalar(2, 2, c(v.norm2, 0.0)), 1e-12 * (1.0 + v.norm2)));
        prop_assert!(d.coeff(0, 0).im.abs() <= 1e-15 * (1.0 + v.norm2));
        let _ = MultiIndex::zero(2);
    }
}
