//! Pointwise exterior algebra over frame generators e₁..e_m and dz̄₁..dz̄ₙ.
//!
//! Generators are ordered e₁ < … < e_m < dz̄₁ < … < dz̄ₙ and all of them are odd.
//! A basis monomial is a bitmask: bit k stands for generator k in that order.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{DiffKind, MixedPoly, MAX_N};
use crate::error::{LabError, Result};

/// Total frames across all section tuples in one expression.
pub const MAX_FRAMES: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SuperElement {
    m: u8,
    n: u8,
    terms: SmallVec<[(u8, C64); 8]>,
}

/// Sign of e_a ∧ e_b relative to e_{a∪b}, or `None` when they share a generator.
#[inline]
pub fn merge_sign(a: u8, b: u8) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
}

impl SuperElement {
    pub fn zero(m: usize, n: usize) -> Self {
        assert!(m <= MAX_FRAMES && n <= MAX_N);
        SuperElement { m: m as u8, n: n as u8, terms: SmallVec::new() }
    }

    pub fn scalar(m: usize, n: usize, c: C64) -> Self {
        let mut s = Self::zero(m, n);
        s.push(0, c);
        s
    }

    /// The frame generator e_j (0-based).
    pub fn frame(m: usize, n: usize, j: usize) -> Self {
        assert!(j < m);
        let mut s = Self::zero(m, n);
        s.push(1 << j, C64::new(1.0, 0.0));
        s
    }

    /// The generator dz̄_i (0-based).
    pub fn dzbar(m: usize, n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut s = Self::zero(m, n);
        s.push(1 << (m + i), C64::new(1.0, 0.0));
        s
    }

    pub fn frames(&self) -> usize {
        self.m as usize
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn terms(&self) -> &[(u8, C64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Frame part and dz̄ part of a basis mask.
    pub fn split_mask(&self, mask: u8) -> (u8, u8) {
        let fm = (1u8 << self.m) - 1;
        (mask & fm, mask >> self.m)
    }

    pub fn join_mask(&self, frames: u8, antiholo: u8) -> u8 {
        frames | (antiholo << self.m)
    }

    /// Coefficient of the basis monomial with the given frame subset S and antiholomorphic subset T.
    pub fn coeff(&self, frames: u8, antiholo: u8) -> C64 {
        let mask = self.join_mask(frames, antiholo);
        self.terms.iter().find(|(k, _)| *k == mask).map(|t| t.1).unwrap_or_default()
    }

    fn push(&mut self, mask: u8, c: C64) {
        if c == C64::default() {
            return;
        }
        match self.terms.binary_search_by_key(&mask, |t| t.0) {
            Ok(p) => {
                self.terms[p].1 += c;
                if self.terms[p].1 == C64::default() {
                    self.terms.remove(p);
                }
            }
            Err(p) => self.terms.insert(p, (mask, c)),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.n != other.n {
            return Err(LabError::Dimension { expected: self.m as usize * 10 + self.n as usize, got: other.m as usize * 10 + other.n as usize });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for &(k, c) in &other.terms {
            out.push(k, c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.m as usize, self.n as usize);
        for &(k, c) in &self.terms {
            out.push(k, c * s);
        }
        out
    }

    /// Graded product with Koszul signs.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wedge_unchecked(other))
    }

    pub(crate) fn wedge_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.m as usize, self.n as usize);
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                if let Some(s) = merge_sign(a, b) {
                    out.push(a | b, ca * cb * s);
                }
            }
        }
        out
    }

    /// k-fold wedge power (k = 0 gives 1).
    pub fn wedge_pow(&self, k: usize) -> Self {
        let mut acc = Self::scalar(self.m as usize, self.n as usize, C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = acc.wedge_unchecked(self);
        }
        acc
    }

    /// The antiderivation δ_f with δ_f(e_j) = f_j and δ_f(dz̄_i) = 0.
    /// `f_values` gives one value per frame generator.
    pub fn interior_delta(&self, f_values: &[C64]) -> Result<Self> {
        if f_values.len() != self.m as usize {
            return Err(LabError::Dimension { expected: self.m as usize, got: f_values.len() });
        }
        let mut out = Self::zero(self.m as usize, self.n as usize);
        for &(mask, c) in &self.terms {
            let mut rest = mask & ((1u8 << self.m) - 1);
            while rest != 0 {
                let j = rest.trailing_zeros();
                rest &= rest - 1;
                // generators in front of e_j
                let before = (mask & ((1u8 << j) - 1)).count_ones();
                let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
                out.push(mask & !(1 << j), c * f_values[j as usize] * sign);
            }
        }
        Ok(out)
    }

    /// Bidegree (frames, dz̄) if homogeneous.
    pub fn degree(&self) -> Option<(u32, u32)> {
        let mut it = self.terms.iter().map(|&(k, _)| {
            let (s, t) = self.split_mask(k);
            (s.count_ones(), t.count_ones())
        });
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }
}

/// A tuple of holomorphic polynomials, optionally multiplied by a common non-vanishing unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SectionSpec", into = "SectionSpec")]
pub struct SectionTuple {
    n: usize,
    components: Vec<MixedPoly>,
    unit: Option<MixedPoly>,
    d_components: Vec<Vec<MixedPoly>>,
    d_unit: Vec<MixedPoly>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectionSpec {
    pub components: Vec<MixedPoly>,
    #[serde(default)]
    pub unit: Option<MixedPoly>,
}

impl TryFrom<SectionSpec> for SectionTuple {
    type Error = LabError;

    fn try_from(s: SectionSpec) -> Result<Self> {
        SectionTuple::new(s.components, s.unit)
    }
}

impl From<SectionTuple> for SectionSpec {
    fn from(s: SectionTuple) -> Self {
        SectionSpec { components: s.components, unit: s.unit }
    }
}

/// Values of a section tuple and its first derivatives at a point.
#[derive(Clone, Copy, Debug, Default)]
pub struct SectionValues {
    pub m: usize,
    pub f: [C64; 2],
    /// df[j][i] = ∂f_j/∂z_i
    pub df: [[C64; MAX_N]; 2],
    pub norm2: f64,
}

impl SectionTuple {
    pub fn new(components: Vec<MixedPoly>, unit: Option<MixedPoly>) -> Result<Self> {
        let m = components.len();
        if m == 0 || m > 2 {
            return Err(LabError::Size(format!("section tuples need 1 ≤ m ≤ 2, got {m}")));
        }
        let n = components[0].dim();
        for p in components.iter().chain(unit.iter()) {
            if p.dim() != n {
                return Err(LabError::Dimension { expected: n, got: p.dim() });
            }
            if !p.is_holomorphic() {
                return Err(LabError::Invalid("section components must be holomorphic".into()));
            }
        }
        let d_components = components.iter().map(|p| (0..n).map(|i| p.diff(i, DiffKind::Holo)).collect()).collect();
        let d_unit = unit.iter().flat_map(|u| (0..n).map(|i| u.diff(i, DiffKind::Holo))).collect();
        Ok(SectionTuple { n, components, unit, d_components, d_unit })
    }

    pub fn single(p: MixedPoly) -> Result<Self> {
        Self::new(vec![p], None)
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[MixedPoly] {
        &self.components
    }

    pub fn unit(&self) -> Option<&MixedPoly> {
        self.unit.as_ref()
    }

    /// Checks that the unit stays away from zero on the polydisc of radius `radius`, by sampling
    /// a polar grid per axis (radii k/K·radius, 2K angles including π).
    pub fn check_unit(&self, radius: f64, floor: f64) -> Result<()> {
        let Some(u) = &self.unit else { return Ok(()) };
        let k = match self.n {
            1 => 64,
            2 => 16,
            _ => 6,
        };
        // every point of the polydisc lies within R(1+π)/2k of a sample on each axis, and
        // |∂u/∂z_j| ≤ Σ|c|R^{deg} there, so min over samples > floor + Σ_j L_j h rules out zeros
        let h = radius * (1.0 + std::f64::consts::PI) / (2 * k) as f64;
        let slack: f64 = self.d_unit.iter().map(|d| d.terms().iter().map(|(i, _, c)| c.norm() * radius.powi(i.degree() as i32)).sum::<f64>() * h).sum();
        let pts: Vec<C64> = (0..=k)
            .flat_map(|r| (0..2 * k).map(move |a| C64::from_polar(radius * r as f64 / k as f64, std::f64::consts::PI * a as f64 / k as f64)))
            .collect();
        let mut z = vec![C64::default(); self.n];
        let total = pts.len().pow(self.n as u32);
        for idx in 0..total {
            let mut r = idx;
            for zj in z.iter_mut() {
                *zj = pts[r % pts.len()];
                r /= pts.len();
            }
            let v = u.eval(&z).norm();
            if v <= floor + slack {
                return Err(LabError::Invalid(format!(
                    "unit factor may vanish on the polydisc of radius {radius}: modulus {v:.3e} at {z:?} (needs > {:.3e})",
                    floor + slack
                )));
            }
        }
        Ok(())
    }

    pub fn values(&self, z: &[C64]) -> SectionValues {
        self.values_with(z, true)
    }

    /// Values, with the derivative table filled only when `derivatives` is set.
    pub fn values_with(&self, z: &[C64], derivatives: bool) -> SectionValues {
        let m = self.m();
        let mut out = SectionValues { m, ..Default::default() };
        let (u, du) = match &self.unit {
            Some(p) => {
                let mut du = [C64::default(); MAX_N];
                for i in (0..self.n).filter(|_| derivatives) {
                    du[i] = self.d_unit[i].eval(z);
                }
                (p.eval(z), du)
            }
            None => (C64::new(1.0, 0.0), [C64::default(); MAX_N]),
        };
        for j in 0..m {
            let c = self.components[j].eval(z);
            out.f[j] = c * u;
            for i in (0..self.n).filter(|_| derivatives) {
                out.df[j][i] = self.d_components[j][i].eval(z) * u + c * du[i];
            }
            out.norm2 += c.norm_sqr() * u.norm_sqr();
        }
        out
    }
}

/// s_f = Σ f̄_j e_{offset+j} inside an algebra with `m_total` frames.
pub fn section_element(v: &SectionValues, offset: usize, m_total: usize, n: usize) -> SuperElement {
    let mut s = SuperElement::zero(m_total, n);
    for j in 0..v.m {
        s.push(1 << (offset + j), v.f[j].conj());
    }
    s
}

/// ∂̄s_f = Σ_j Σ_i conj(∂f_j/∂z_i) dz̄_i ∧ e_{offset+j}.
pub fn dbar_section_element(v: &SectionValues, offset: usize, m_total: usize, n: usize) -> SuperElement {
    let mut s = SuperElement::zero(m_total, n);
    for j in 0..v.m {
        for i in 0..n {
            // dz̄_i ∧ e_j = −e_j ∧ dz̄_i
            s.push((1 << (offset + j)) | (1 << (m_total + i)), -v.df[j][i].conj());
        }
    }
    s
}

pub fn minimal_section(f: &SectionTuple, z: &[C64]) -> SuperElement {
    section_element(&f.values(z), 0, f.m(), f.dim())
}

pub fn dbar_minimal_section(f: &SectionTuple, z: &[C64]) -> SuperElement {
    dbar_section_element(&f.values(z), 0, f.m(), f.dim())
}

/// u^f_{k,k−1} = s_f ∧ (∂̄s_f)^{k−1} / |f|^{2k}.
pub fn cfl_term(f: &SectionTuple, k: usize, z: &[C64]) -> Result<SuperElement> {
    if k == 0 || k > f.m() {
        return Err(LabError::Invalid(format!("cfl term index {k} outside 1..={}", f.m())));
    }
    let v = f.values(z);
    if v.norm2 == 0.0 {
        return Err(LabError::Singular(format!("f vanishes at {z:?}")));
    }
    let s = section_element(&v, 0, f.m(), f.dim());
    let ds = dbar_section_element(&v, 0, f.m(), f.dim());
    Ok(s.wedge_unchecked(&ds.wedge_pow(k - 1)).scale(C64::new(v.norm2.powi(-(k as i32)), 0.0)))
}
