//! Multiindices and sparse polynomials in z and z̄.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest supported ambient dimension.
pub const MAX_N: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[derive(Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex {
    n: u8,
    e: [u32; MAX_N],
}

impl MultiIndex {
    pub fn new(entries: &[u32]) -> Self {
        assert!(entries.len() <= MAX_N, "dimension {} exceeds {MAX_N}", entries.len());
        let mut e = [0; MAX_N];
        e[..entries.len()].copy_from_slice(entries);
        MultiIndex { n: entries.len() as u8, e }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(&vec![0; n])
    }

    /// The unit vector along `axis`.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut a = Self::zero(n);
        a.e[axis] = 1;
        a
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn entries(&self) -> &[u32] {
        &self.e[..self.n as usize]
    }

    pub fn get(&self, j: usize) -> u32 {
        self.e[j]
    }

    pub fn with(mut self, j: usize, v: u32) -> Self {
        self.e[j] = v;
        self
    }

    /// Sum of entries.
    pub fn degree(&self) -> u32 {
        self.entries().iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|&a| a == 0)
    }

    /// Euclidean length and support cardinality.
    pub fn norms(&self) -> (f64, usize) {
        let len = self.entries().iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
        (len, self.support().len())
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.e[j] > 0).collect()
    }

    pub fn scale(&self, k: u32) -> Self {
        let mut a = *self;
        a.e.iter_mut().for_each(|x| *x *= k);
        a
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut a = *self;
        for j in 0..self.dim() {
            a.e[j] = self.e[j].checked_sub(other.e[j])?;
        }
        Some(a)
    }
}

impl std::ops::Add for MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.n, rhs.n);
        let mut a = self;
        for j in 0..MAX_N {
            a.e[j] += rhs.e[j];
        }
        a
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.entries())
    }
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = String;
    fn try_from(v: Vec<u32>) -> std::result::Result<Self, String> {
        if v.len() > MAX_N {
            return Err(format!("multiindex of length {} exceeds {MAX_N}", v.len()));
        }
        Ok(MultiIndex::new(&v))
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(a: MultiIndex) -> Vec<u32> {
        a.entries().to_vec()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiffKind {
    Holo,
    Antiholo,
}

/// Sparse polynomial Σ c_{IJ} z^I z̄^J, terms sorted by (I, J) with no zero coefficients.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MixedPoly {
    n: usize,
    terms: Vec<(MultiIndex, MultiIndex, C64)>,
}

impl MixedPoly {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_N, "dimension {n} unsupported");
        MixedPoly { n, terms: Vec::new() }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        Self::monomial(n, c, MultiIndex::zero(n), MultiIndex::zero(n))
    }

    pub fn monomial(n: usize, c: C64, i: MultiIndex, j: MultiIndex) -> Self {
        Self::from_terms(n, [(i, j, c)])
    }

    /// z^I as a holomorphic polynomial.
    pub fn holo_monomial(i: MultiIndex) -> Self {
        let n = i.dim();
        Self::monomial(n, C64::new(1.0, 0.0), i, MultiIndex::zero(n))
    }

    /// The coordinate function z_j.
    pub fn coord(n: usize, j: usize) -> Self {
        Self::holo_monomial(MultiIndex::unit(n, j))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, MultiIndex, C64)>) -> Self {
        let mut map: BTreeMap<(MultiIndex, MultiIndex), C64> = BTreeMap::new();
        for (i, j, c) in terms {
            assert!(i.dim() == n && j.dim() == n, "multiindex dimension differs from {n}");
            *map.entry((i, j)).or_default() += c;
        }
        Self::from_map(n, map)
    }

    fn from_map(n: usize, map: BTreeMap<(MultiIndex, MultiIndex), C64>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| *c != C64::default()).map(|((i, j), c)| (i, j, c)).collect();
        MixedPoly { n, terms }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(MultiIndex, MultiIndex, C64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.iter().all(|(_, j, _)| j.is_zero())
    }

    /// The polynomial whose values are the conjugates of ours.
    pub fn conj(&self) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|&(i, j, c)| (j, i, c.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|&(i, j, c)| (i, j, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_terms(self.n, self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(i1, j1, c1) in &self.terms {
            for &(i2, j2, c2) in &other.terms {
                out.push((i1 + i2, j1 + j2, c1 * c2));
            }
        }
        Self::from_terms(self.n, out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n, C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&MultiIndex, &MultiIndex) -> bool) -> Self {
        MixedPoly { n: self.n, terms: self.terms.iter().filter(|(i, j, _)| keep(i, j)).copied().collect() }
    }

    /// Exact formal partial derivative along axis `j`.
    pub fn diff(&self, j: usize, kind: DiffKind) -> Self {
        assert!(j < self.n);
        let terms = self.terms.iter().filter_map(|&(i, jj, c)| {
            let (e, i, jj) = match kind {
                DiffKind::Holo => (i.get(j), i.with(j, i.get(j).saturating_sub(1)), jj),
                DiffKind::Antiholo => (jj.get(j), i, jj.with(j, jj.get(j).saturating_sub(1))),
            };
            (e > 0).then(|| (i, jj, c * e as f64))
        });
        Self::from_terms(self.n, terms.collect::<Vec<_>>())
    }

    /// Largest exponent of z_j or z̄_j appearing.
    pub fn max_exponent(&self) -> u32 {
        self.terms.iter().flat_map(|(i, j, _)| i.entries().iter().chain(j.entries()).copied()).max().unwrap_or(0)
    }

    pub fn try_eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.n {
            return Err(LabError::Dimension { expected: self.n, got: z.len() });
        }
        Ok(self.eval(z))
    }

    /// Evaluate at `z`; panics on a dimension mismatch (see [`MixedPoly::try_eval`]).
    pub fn eval(&self, z: &[C64]) -> C64 {
        assert_eq!(z.len(), self.n, "point dimension");
        match self.terms.len() {
            0 => return C64::default(),
            1 if self.terms[0].0.is_zero() && self.terms[0].1.is_zero() => return self.terms[0].2,
            _ => {}
        }
        let mut acc = C64::default();
        for (i, j, c) in &self.terms {
            let mut t = *c;
            for k in 0..self.n {
                match (i.e[k], j.e[k]) {
                    (0, 0) => {}
                    (a, 0) => t *= z[k].powu(a),
                    (0, b) => t *= z[k].conj().powu(b),
                    (a, b) => {
                        // z^a z̄^b = |z|^{2 min} · z^{a−min} or z̄^{b−min}
                        let m = a.min(b);
                        t *= z[k].norm_sqr().powi(m as i32);
                        if a > m {
                            t *= z[k].powu(a - m);
                        } else if b > m {
                            t *= z[k].conj().powu(b - m);
                        }
                    }
                }
            }
            acc += t;
        }
        acc
    }

    /// Parse the plain-text monomial list: `coeff_re coeff_im I1..In J1..Jn` per line.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| LabError::Parse { line: k + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 + 2 * n {
                return Err(bad(format!("expected {} fields, found {}", 2 + 2 * n, fields.len())));
            }
            let re: f64 = fields[0].parse().map_err(|e| bad(format!("{e}")))?;
            let im: f64 = fields[1].parse().map_err(|e| bad(format!("{e}")))?;
            let ints = fields[2..]
                .iter()
                .map(|s| s.parse::<u32>().map_err(|e| bad(format!("exponent `{s}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            terms.push((MultiIndex::new(&ints[..n]), MultiIndex::new(&ints[n..]), C64::new(re, im)));
        }
        Ok(Self::from_terms(n, terms))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, j, c) in &self.terms {
            let ex: Vec<String> = i.entries().iter().chain(j.entries()).map(|e| e.to_string()).collect();
            s.push_str(&format!("{:e} {:e} {}\n", c.re, c.im, ex.join(" ")));
        }
        s
    }
}
