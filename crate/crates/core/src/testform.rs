//! Test forms with polynomial × flat radial bump coefficients.
//!
//! A form of bidegree (n, q) is stored as a list of components c_T·dz∧dz̄_T, |T| = q, where
//! dz = dz₁∧…∧dzₙ. Top-degree forms (q = n) store their coefficient against the Euclidean
//! volume form instead, which is how currents are paired with them.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{DiffKind, MixedPoly, MultiIndex, MAX_N};
use crate::error::{LabError, Result};

/// Highest bump derivative the jet arithmetic carries.
const MAX_DERIV: usize = 4;

/// Truncated Taylor series a₀ + a₁h + … used for exact bump derivatives.
#[derive(Clone, Copy, Debug)]
struct Jet([f64; MAX_DERIV + 1]);

impl Jet {
    fn var(x: f64) -> Jet {
        let mut a = [0.0; MAX_DERIV + 1];
        a[0] = x;
        a[1] = 1.0;
        Jet(a)
    }
    fn cst(x: f64) -> Jet {
        let mut a = [0.0; MAX_DERIV + 1];
        a[0] = x;
        Jet(a)
    }
    fn add(self, o: Jet) -> Jet {
        let mut a = self.0;
        a.iter_mut().zip(o.0).for_each(|(x, y)| *x += y);
        Jet(a)
    }
    fn neg(self) -> Jet {
        Jet(self.0.map(|x| -x))
    }
    fn recip(self) -> Jet {
        let a = self.0;
        let mut r = [0.0; MAX_DERIV + 1];
        r[0] = 1.0 / a[0];
        for k in 1..=MAX_DERIV {
            r[k] = -(1..=k).map(|i| a[i] * r[k - i]).sum::<f64>() / a[0];
        }
        Jet(r)
    }
    fn exp(self) -> Jet {
        let a = self.0;
        let mut e = [0.0; MAX_DERIV + 1];
        e[0] = a[0].exp();
        for k in 1..=MAX_DERIV {
            e[k] = (1..=k).map(|i| i as f64 * a[i] * e[k - i]).sum::<f64>() / k as f64;
        }
        Jet(e)
    }
}

/// Radial profile of s = |ζ|²: 1 on [0, a²], 0 on [b², ∞), smoothstep in between.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatBump {
    pub a: f64,
    pub b: f64,
}

impl Default for FlatBump {
    fn default() -> Self {
        FlatBump { a: 0.5, b: 0.9 }
    }
}

impl FlatBump {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > a) {
            return Err(LabError::Invalid(format!("bump radii need 0 < a < b, got ({a}, {b})")));
        }
        Ok(FlatBump { a, b })
    }

    /// Derivatives d^k/ds^k of the profile for k = 0..=MAX_DERIV.
    pub fn derivatives(&self, s: f64) -> [f64; MAX_DERIV + 1] {
        let mut out = [0.0; MAX_DERIV + 1];
        let (a2, b2) = (self.a * self.a, self.b * self.b);
        if s <= a2 {
            out[0] = 1.0;
            return out;
        }
        if s >= b2 {
            return out;
        }
        let w = b2 - a2;
        let u = (s - a2) / w;
        // profile = 1 − 1/(1 + e^h) with h = 1/u − 1/(1−u)
        let h0 = 1.0 / u - 1.0 / (1.0 - u);
        if h0 > 600.0 {
            out[0] = 1.0;
            return out;
        }
        if h0 < -600.0 {
            return out;
        }
        let x = Jet::var(u);
        let h = x.recip().add(Jet::cst(1.0).add(x.neg()).recip().neg());
        let step = Jet::cst(1.0).add(h.exp()).recip();
        let mut fact = 1.0;
        for k in 0..=MAX_DERIV {
            if k > 0 {
                fact *= k as f64;
            }
            let v = if k == 0 { 1.0 - step.0[0] } else { -step.0[k] };
            out[k] = v * fact / w.powi(k as i32);
        }
        out
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivatives(s)[0]
    }
}

/// Per-axis factor multiplying the polynomial part of a coefficient term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxisFactor {
    One,
    /// d-th derivative of the bump profile, evaluated at |z_j|².
    Deriv(u8),
    /// Bump minus one, which vanishes on the flat disc.
    MinusOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefTerm {
    pub poly: MixedPoly,
    pub factors: [AxisFactor; MAX_N],
}

/// A sum of polynomial × per-axis bump factor terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    n: usize,
    terms: Vec<CoefTerm>,
}

impl Coefficient {
    pub fn zero(n: usize) -> Self {
        Coefficient { n, terms: Vec::new() }
    }

    /// poly × Π_j bump_j.
    pub fn bumped(poly: MixedPoly) -> Self {
        let n = poly.dim();
        Self::from_terms(n, vec![CoefTerm { poly, factors: [AxisFactor::Deriv(0); MAX_N] }])
    }

    pub fn from_terms(n: usize, terms: Vec<CoefTerm>) -> Self {
        let mut map: BTreeMap<[AxisFactor; MAX_N], MixedPoly> = BTreeMap::new();
        for mut t in terms {
            for f in &mut t.factors[n..] {
                *f = AxisFactor::One;
            }
            let e = map.entry(t.factors).or_insert_with(|| MixedPoly::zero(n));
            *e = e.add(&t.poly);
        }
        let terms = map.into_iter().filter(|(_, p)| !p.is_zero()).map(|(factors, poly)| CoefTerm { poly, factors }).collect();
        Coefficient { n, terms }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[CoefTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_terms(self.n, self.terms.iter().chain(&o.terms).cloned().collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|t| CoefTerm { poly: t.poly.scale(s), factors: t.factors }).collect())
    }

    pub fn map_poly(&self, f: impl Fn(&MixedPoly) -> MixedPoly) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|t| CoefTerm { poly: f(&t.poly), factors: t.factors }).collect())
    }

    pub fn eval(&self, bumps: &[FlatBump], z: &[C64]) -> C64 {
        let mut table = [[0.0; MAX_DERIV + 1]; MAX_N];
        let mut ready = [false; MAX_N];
        let mut acc = C64::default();
        for t in &self.terms {
            let mut w = 1.0;
            for j in 0..self.n {
                if t.factors[j] == AxisFactor::One {
                    continue;
                }
                if !ready[j] {
                    table[j] = bumps[j].derivatives(z[j].norm_sqr());
                    ready[j] = true;
                }
                w *= match t.factors[j] {
                    AxisFactor::Deriv(d) => table[j][d as usize],
                    AxisFactor::MinusOne => table[j][0] - 1.0,
                    AxisFactor::One => 1.0,
                };
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                acc += t.poly.eval(z) * w;
            }
        }
        acc
    }

    /// ∂/∂z̄_j.
    pub fn dbar_axis(&self, j: usize) -> Self {
        let zj = MixedPoly::coord(self.n, j);
        let mut out = Vec::new();
        for t in &self.terms {
            let dp = t.poly.diff(j, DiffKind::Antiholo);
            if !dp.is_zero() {
                out.push(CoefTerm { poly: dp, factors: t.factors });
            }
            let bumped = match t.factors[j] {
                AxisFactor::One => None,
                AxisFactor::Deriv(d) => Some(AxisFactor::Deriv(d + 1)),
                AxisFactor::MinusOne => Some(AxisFactor::Deriv(1)),
            };
            if let Some(f) = bumped {
                assert!(matches!(f, AxisFactor::Deriv(d) if (d as usize) <= MAX_DERIV), "bump derivative order exceeds {MAX_DERIV}");
                let mut factors = t.factors;
                factors[j] = f;
                out.push(CoefTerm { poly: t.poly.mul(&zj), factors });
            }
        }
        Self::from_terms(self.n, out)
    }

    /// One axis of the Taylor operator: M_j^{r} keeps the part of degree ≤ r in (z_j, z̄_j)
    /// of terms that are flat along axis j, and drops the factor there.
    fn taylor_axis(&self, j: usize, r: u32) -> Self {
        let terms = self.terms.iter().filter_map(|t| match t.factors[j] {
            AxisFactor::One | AxisFactor::Deriv(0) => {
                let mut factors = t.factors;
                factors[j] = AxisFactor::One;
                Some(CoefTerm { poly: t.poly.filter(|i, jj| i.get(j) + jj.get(j) <= r), factors })
            }
            _ => None,
        });
        Self::from_terms(self.n, terms.collect())
    }

    /// (I − M_j^{r}) without cancellation: high-degree part keeps its factor, low-degree part
    /// of flat terms gets the factor (bump − 1).
    fn taylor_complement_axis(&self, j: usize, r: u32) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            match t.factors[j] {
                AxisFactor::One | AxisFactor::Deriv(0) => {
                    let hi = t.poly.filter(|i, jj| i.get(j) + jj.get(j) > r);
                    out.push(CoefTerm { poly: hi, factors: t.factors });
                    if t.factors[j] == AxisFactor::Deriv(0) {
                        let mut factors = t.factors;
                        factors[j] = AxisFactor::MinusOne;
                        out.push(CoefTerm { poly: t.poly.filter(|i, jj| i.get(j) + jj.get(j) <= r), factors });
                    }
                }
                _ => out.push(t.clone()),
            }
        }
        Self::from_terms(self.n, out)
    }
}

/// Exact Taylor decomposition φ = M^r_K φ + remainder, with M^r_K = I − Π_{j∈K}(I − M_j^{r_j}).
pub fn taylor_truncate(coef: &Coefficient, k: &[usize], r: &MultiIndex) -> Result<(Coefficient, Coefficient)> {
    if k.iter().any(|&j| j >= coef.dim()) {
        return Err(LabError::Invalid(format!("axis set {k:?} outside dimension {}", coef.dim())));
    }
    let mut remainder = coef.clone();
    for &j in k {
        remainder = remainder.taylor_complement_axis(j, r.get(j));
    }
    let mut m = Coefficient::zero(coef.dim());
    for sub in 1u32..(1 << k.len()) {
        let mut piece = coef.clone();
        for (p, &j) in k.iter().enumerate() {
            if sub & (1 << p) != 0 {
                piece = piece.taylor_axis(j, r.get(j));
            }
        }
        let sign = if sub.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        m = m.add(&piece.scale(C64::new(sign, 0.0)));
    }
    Ok((m, remainder))
}

/// Orientation constant λ_n with dz∧dz̄ = λ_n·dV, where dz∧dz̄ = dz₁∧…∧dzₙ∧dz̄₁∧…∧dz̄ₙ.
pub fn lambda(n: usize) -> C64 {
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    C64::new(0.0, -2.0).powu(n as u32) * sign
}

/// Sign of dz̄_j ∧ dz̄_T relative to dz̄_{T∪{j}}.
pub fn insert_sign(j: usize, t: u8) -> f64 {
    if (t & ((1u8 << j) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestForm {
    n: usize,
    q: usize,
    bumps: Vec<FlatBump>,
    /// (antiholomorphic subset as bitmask, coefficient), sorted by mask.
    components: Vec<(u8, Coefficient)>,
}

impl TestForm {
    pub fn new(n: usize, q: usize, bumps: Vec<FlatBump>, components: Vec<(u8, Coefficient)>) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(LabError::Size(format!("dimension {n} outside 1..={MAX_N}")));
        }
        if q > n || bumps.len() != n {
            return Err(LabError::Bidegree(format!("q = {q}, {} bumps for n = {n}", bumps.len())));
        }
        let mut map: BTreeMap<u8, Coefficient> = BTreeMap::new();
        for (t, c) in components {
            if t.count_ones() as usize != q || t >> n != 0 {
                return Err(LabError::Bidegree(format!("subset {t:#b} does not have size {q} in dimension {n}")));
            }
            if c.dim() != n {
                return Err(LabError::Dimension { expected: n, got: c.dim() });
            }
            let e = map.entry(t).or_insert_with(|| Coefficient::zero(n));
            *e = e.add(&c);
        }
        let components = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(TestForm { n, q, bumps, components })
    }

    /// A single component poly × bumps on dz∧dz̄_T (or on dV when |T| = n).
    pub fn simple(poly: MixedPoly, t: &[usize], bump: FlatBump) -> Result<Self> {
        let n = poly.dim();
        let mask = t.iter().fold(0u8, |m, &j| m | (1 << j));
        Self::new(n, t.len(), vec![bump; n], vec![(mask, Coefficient::bumped(poly))])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn bumps(&self) -> &[FlatBump] {
        &self.bumps
    }

    pub fn components(&self) -> &[(u8, Coefficient)] {
        &self.components
    }

    /// Per-axis support radius.
    pub fn support(&self) -> Vec<f64> {
        self.bumps.iter().map(|b| b.b).collect()
    }

    /// Per-axis radius of the flat region.
    pub fn flat(&self) -> Vec<f64> {
        self.bumps.iter().map(|b| b.a).collect()
    }

    pub fn component(&self, t: u8) -> Option<&Coefficient> {
        self.components.iter().find(|(m, _)| *m == t).map(|(_, c)| c)
    }

    /// Coefficient of dz∧dz̄_T at z.
    pub fn eval(&self, z: &[C64], t: &[usize]) -> Result<C64> {
        if z.len() != self.n {
            return Err(LabError::Dimension { expected: self.n, got: z.len() });
        }
        if t.len() != self.q || t.iter().any(|&j| j >= self.n) {
            return Err(LabError::Bidegree(format!("subset {t:?} is not a {}-subset", self.q)));
        }
        let mask = t.iter().fold(0u8, |m, &j| m | (1 << j));
        if t.len() != mask.count_ones() as usize {
            return Err(LabError::Bidegree(format!("repeated index in {t:?}")));
        }
        Ok(self.eval_mask(z, mask))
    }

    #[inline]
    pub fn eval_mask(&self, z: &[C64], mask: u8) -> C64 {
        match self.component(mask) {
            Some(c) => c.eval(&self.bumps, z),
            None => C64::default(),
        }
    }

    /// Exact ∂̄, restricted to the axes in `axes` (all axes for the full ∂̄).
    pub fn dbar_partial(&self, axes: &[usize]) -> Result<TestForm> {
        if self.q >= self.n {
            return Err(LabError::Bidegree("∂̄ of a top-degree form".into()));
        }
        let n = self.n;
        let top = self.q + 1 == n;
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = Vec::new();
        for (t, c) in &self.components {
            for &j in axes {
                if t & (1 << j) != 0 {
                    continue;
                }
                // ∂̄(c dz∧dz̄_T) = (−1)ⁿ Σ_j ∂c/∂z̄_j dz∧dz̄_j∧dz̄_T
                let mut s = C64::new(parity * insert_sign(j, *t), 0.0);
                if top {
                    s *= lambda(n);
                }
                out.push((t | (1 << j), c.dbar_axis(j).scale(s)));
            }
        }
        TestForm::new(n, self.q + 1, self.bumps.clone(), out)
    }

    pub fn dbar(&self) -> Result<TestForm> {
        self.dbar_partial(&(0..self.n).collect::<Vec<_>>())
    }

    /// Applies `f` to the polynomial part of every coefficient term.
    pub fn map_poly(&self, f: impl Fn(&MixedPoly) -> MixedPoly + Copy) -> TestForm {
        let components = self.components.iter().map(|(t, c)| (*t, c.map_poly(f))).collect();
        TestForm::new(self.n, self.q, self.bumps.clone(), components).expect("same shape")
    }
}
