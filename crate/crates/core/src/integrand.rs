//! Pointwise densities of the regularized expressions.
//!
//! Each expression is a wedge of one or two blocks (one per section tuple) with the test
//! form. A block is a super-element in its own frame algebra; its coefficient on the full frame
//! e₁∧…∧e_m is read with the frames written last, which turns it into a scalar (0,·)-form. The
//! blocks are then wedged in order with the antiholomorphic part of φ and the resulting top
//! form is converted to Lebesgue density.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{MixedPoly, MAX_N};
use crate::cutoff::{CutoffSpec, Family};
use crate::error::{LabError, Result};
use crate::superform::{dbar_section_element, section_element, SectionTuple, SectionValues, SuperElement};
use crate::testform::{lambda, TestForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    /// χ(|f|²/ε) u^f
    SinglePv,
    /// ∂̄χ(|f|²/ε) ∧ u^f
    SingleRes,
    /// χ₁u^f ∧ χ₂u^g
    PvPair,
    /// χ₁u^f ∧ ∂̄χ₂ ∧ u^g
    PotRes,
    /// ∂̄χ₁ ∧ u^f ∧ ∂̄χ₂ ∧ u^g
    ResRes,
    /// ∂̄(f̄/(|f|²+ε₁)) ∧ ∂̄(ḡ/(|g|²+ε₂))
    BmPair,
    /// u^f_{ε₁} ∧ ∇u^g_{ε₂}
    UNablaU,
    /// ∂̄χ₁ ∧ u^f · χ₂(|g|²/ε₂), χ₂ possibly the indicator
    SepIndicator,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::SinglePv => "SINGLE_PV",
            Variant::SingleRes => "SINGLE_RES",
            Variant::PvPair => "PV_PAIR",
            Variant::PotRes => "POT_RES",
            Variant::ResRes => "RES_RES",
            Variant::BmPair => "BM_PAIR",
            Variant::UNablaU => "U_NABLA_U",
            Variant::SepIndicator => "SEP_INDICATOR",
        }
    }

    pub fn is_pair(&self) -> bool {
        !matches!(self, Variant::SinglePv | Variant::SingleRes)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExprSpec {
    pub variant: Variant,
    pub f: SectionTuple,
    #[serde(default)]
    pub g: Option<SectionTuple>,
    pub chi1: CutoffSpec,
    #[serde(default)]
    pub chi2: Option<CutoffSpec>,
    pub eps: [f64; 2],
    pub phi: TestForm,
}

impl ExprSpec {
    pub fn with_eps(&self, eps1: f64, eps2: f64) -> ExprSpec {
        ExprSpec { eps: [eps1, eps2], ..self.clone() }
    }
}

/// A scalar (0,·)-form: (dz̄ subset mask, coefficient) pairs.
type Form = SmallVec<[(u8, C64); 4]>;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Block {
    /// χ(|f|²/ε)·u^f, top frame.
    Pv(CutoffSpec),
    /// ∂̄χ(|f|²/ε) ∧ u^f, top frame.
    Res(CutoffSpec),
    /// χ(|f|²/ε) alone.
    Scalar(CutoffSpec),
    /// Σ_k s∧(∂̄s)^{k−1}/(|f|²+ε)^k, top frame.
    UEps,
    /// 1 − Σ_{ℓ≥0} ε(∂̄s)^ℓ/(|f|²+ε)^{ℓ+1}; `top` selects the full-frame part, otherwise the
    /// frame-free part.
    NablaUEps { top: bool },
    /// ∂̄(f̄/(|f|²+ε)) for m = 1.
    Bm,
}

impl Block {
    /// Whether the m = 1 closed form uses ∂f.
    fn needs_derivatives(&self) -> bool {
        matches!(self, Block::Res(_) | Block::Bm | Block::NablaUEps { top: true })
    }

    /// Antiholomorphic degree of the block after frame extraction.
    fn degree(&self, m: usize) -> usize {
        match self {
            Block::Pv(_) | Block::UEps => m - 1,
            Block::Res(_) => m,
            Block::Scalar(_) => 0,
            Block::NablaUEps { top } => if *top { m } else { 0 },
            Block::Bm => 1,
        }
    }
}

fn scalar_form(c: C64) -> Form {
    let mut f = Form::new();
    if c != C64::default() {
        f.push((0, c));
    }
    f
}

/// ∂̄|f|² = Σ_j f_j ∂̄f̄_j as a (0,1)-form.
fn dbar_norm2(v: &SectionValues, n: usize) -> Form {
    let mut f = Form::new();
    for i in 0..n {
        let c: C64 = (0..v.m).map(|j| v.f[j] * v.df[j][i].conj()).sum();
        f.push((1 << i, c));
    }
    f
}

fn wedge_forms(a: &Form, b: &Form) -> Form {
    let mut out = Form::new();
    for &(ma, ca) in a {
        for &(mb, cb) in b {
            if let Some(s) = crate::superform::merge_sign(ma, mb) {
                let c = ca * cb * s;
                match out.iter_mut().find(|t| t.0 == ma | mb) {
                    Some(t) => t.1 += c,
                    None => out.push((ma | mb, c)),
                }
            }
        }
    }
    out
}

/// Full-frame coefficient of a block super-element, frames written last.
fn extract_top(el: &SuperElement) -> Form {
    let m = el.frames();
    let full = ((1u16 << m) - 1) as u8;
    let mut out = Form::new();
    for &(mask, c) in el.terms() {
        let (s, t) = el.split_mask(mask);
        if s == full {
            let sign = if (m as u32 * t.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            out.push((t, c * sign));
        }
    }
    out
}

fn frame_free(el: &SuperElement) -> Form {
    let mut out = Form::new();
    for &(mask, c) in el.terms() {
        let (s, t) = el.split_mask(mask);
        if s == 0 {
            out.push((t, c));
        }
    }
    out
}

/// Block form through the general super-element algebra.
fn block_generic(block: Block, v: &SectionValues, eps: f64, n: usize) -> Form {
    let m = v.m;
    let r = v.norm2;
    let s = section_element(v, 0, m, n);
    let ds = dbar_section_element(v, 0, m, n);
    let one = C64::new(1.0, 0.0);
    let cfl = |k: usize, denom: f64| s.wedge_unchecked(&ds.wedge_pow(k - 1)).scale(one * denom.powi(-(k as i32)));
    match block {
        Block::Pv(chi) => {
            let x = chi.eval_unchecked(r / eps);
            if x == 0.0 || r == 0.0 {
                return Form::new();
            }
            extract_top(&cfl(m, r).scale(one * x))
        }
        Block::Res(chi) => {
            if r == 0.0 {
                return Form::new();
            }
            let w = chi.prime_unchecked(r / eps) / eps;
            let mut d = SuperElement::zero(m, n);
            for (mask, c) in dbar_norm2(v, n) {
                d = d.add(&SuperElement::dzbar(m, n, mask.trailing_zeros() as usize).scale(c * w)).unwrap();
            }
            extract_top(&d.wedge_unchecked(&cfl(m, r)))
        }
        Block::Scalar(chi) => scalar_form(one * chi.eval_unchecked(r / eps)),
        Block::UEps => extract_top(&cfl(m, r + eps)),
        Block::NablaUEps { top } => {
            let mut acc = SuperElement::scalar(m, n, one);
            for l in 0..=m {
                acc = acc.add(&ds.wedge_pow(l).scale(one * (-eps / (r + eps).powi(l as i32 + 1)))).unwrap();
            }
            if top { extract_top(&acc) } else { frame_free(&acc) }
        }
        Block::Bm => {
            // ∂̄(f̄/(|f|²+ε)) = ε ∂̄f̄/(|f|²+ε)²
            let w = eps / (r + eps).powi(2);
            (0..n).map(|i| (1u8 << i, v.df[0][i].conj() * w)).filter(|t| t.1 != C64::default()).collect()
        }
    }
}

/// Closed forms of the m = 1 blocks; must agree with [`block_generic`].
fn block_fast(block: Block, v: &SectionValues, eps: f64, n: usize) -> Form {
    let r = v.norm2;
    let f = v.f[0];
    let one = C64::new(1.0, 0.0);
    let grad = |w: C64| -> Form { (0..n).map(|i| (1u8 << i, v.df[0][i].conj() * w)).collect() };
    match block {
        Block::Pv(chi) => {
            let x = chi.eval_unchecked(r / eps);
            if x == 0.0 || r == 0.0 { Form::new() } else { scalar_form(one * x / f) }
        }
        // ∂̄χ ∧ f̄e/|f|² = χ′(|f|²/ε)/ε · ∂̄f̄ ∧ e
        Block::Res(chi) => grad(one * (chi.prime_unchecked(r / eps) / eps)),
        Block::Scalar(chi) => scalar_form(one * chi.eval_unchecked(r / eps)),
        Block::UEps => scalar_form(f.conj() / (r + eps)),
        Block::NablaUEps { top: false } => scalar_form(one * (r / (r + eps))),
        Block::NablaUEps { top: true } => grad(one * (-eps / (r + eps).powi(2))),
        Block::Bm => grad(one * (eps / (r + eps).powi(2))),
    }
}

type EvalFn = dyn Fn(&[C64]) -> C64 + Send + Sync;
type HintFn = dyn Fn(&[C64]) -> Vec<C64> + Send + Sync;

/// A density with respect to Lebesgue measure on ℂⁿ, plus grid hints.
#[derive(Clone)]
pub struct Integrand {
    n: usize,
    eval: Arc<EvalFn>,
    support: Vec<f64>,
    flat: Vec<f64>,
    breaks: Vec<Vec<f64>>,
    hints: Option<Arc<HintFn>>,
}

impl std::fmt::Debug for Integrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Integrand").field("n", &self.n).field("support", &self.support).finish_non_exhaustive()
    }
}

impl Integrand {
    /// A density from a closure; `support` and `flat` are per-axis radii for panel placement.
    pub fn from_fn(n: usize, support: Vec<f64>, flat: Vec<f64>, eval: impl Fn(&[C64]) -> C64 + Send + Sync + 'static) -> Self {
        let support_c = support.clone();
        let eval = move |z: &[C64]| {
            if z.iter().zip(&support_c).any(|(zj, b)| zj.norm() >= *b) { C64::default() } else { eval(z) }
        };
        Integrand { n, eval: Arc::new(eval), support, flat, breaks: vec![vec![]; n], hints: None }
    }

    pub fn with_breaks(mut self, axis: usize, radii: Vec<f64>) -> Self {
        self.breaks[axis].extend(radii);
        self
    }

    pub fn with_hints(mut self, hints: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static) -> Self {
        self.hints = Some(Arc::new(hints));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn breaks(&self) -> &[Vec<f64>] {
        &self.breaks
    }

    pub fn hints(&self) -> Option<&HintFn> {
        self.hints.as_deref()
    }

    #[inline]
    pub fn eval_unchecked(&self, z: &[C64]) -> C64 {
        (self.eval)(z)
    }

    /// Density at z; non-finite values are reported with the offending point.
    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.n {
            return Err(LabError::Dimension { expected: self.n, got: z.len() });
        }
        let v = (self.eval)(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::Singular(format!("non-finite density {v} at {z:?}")));
        }
        Ok(v)
    }
}

/// Roots in the last variable of a holomorphic polynomial, given the other coordinates.
fn last_axis_roots(p: &[(u32, MixedPoly)], outer: &[C64]) -> Vec<C64> {
    let deg = p.iter().map(|t| t.0).max().unwrap_or(0) as usize;
    if deg == 0 {
        return vec![];
    }
    let mut c = vec![C64::default(); deg + 1];
    let mut z = outer.to_vec();
    z.push(C64::new(1.0, 0.0));
    for (k, q) in p {
        c[*k as usize] += q.eval(&z);
    }
    while c.len() > 1 && c.last().unwrap().norm() < 1e-300 {
        c.pop();
    }
    match c.len() - 1 {
        0 => vec![],
        1 => vec![-c[0] / c[1]],
        2 => {
            let disc = (c[1] * c[1] - 4.0 * c[2] * c[0]).sqrt();
            vec![(-c[1] + disc) / (2.0 * c[2]), (-c[1] - disc) / (2.0 * c[2])]
        }
        d => {
            // Durand–Kerner
            let lead = c[d];
            let mut roots: Vec<C64> = (0..d).map(|k| C64::new(0.4, 0.9).powu(k as u32)).collect();
            for _ in 0..200 {
                for i in 0..d {
                    let x = roots[i];
                    let val = c.iter().rev().fold(C64::default(), |acc, ck| acc * x + ck) / lead;
                    let den: C64 = (0..d).filter(|&j| j != i).map(|j| x - roots[j]).product();
                    if den.norm() > 0.0 {
                        roots[i] = x - val / den;
                    }
                }
            }
            roots
        }
    }
}

/// Splits a polynomial by the power of its last variable (the remaining factor keeps that
/// variable at power 0).
fn split_last(p: &MixedPoly) -> Vec<(u32, MixedPoly)> {
    let n = p.dim();
    let mut out: Vec<(u32, MixedPoly)> = Vec::new();
    for &(i, j, c) in p.terms() {
        let k = i.get(n - 1);
        let term = MixedPoly::monomial(n, c, i.with(n - 1, 0), j);
        match out.iter_mut().find(|t| t.0 == k) {
            Some(t) => t.1 = t.1.add(&term),
            None => out.push((k, term)),
        }
    }
    out
}

fn section_hints(sections: &[&SectionTuple]) -> Vec<Vec<(u32, MixedPoly)>> {
    sections
        .iter()
        .flat_map(|s| s.components().iter().chain(s.unit()))
        .map(split_last)
        .filter(|p| p.iter().any(|t| t.0 > 0) && p.len() > 1)
        .collect()
}

/// (j, (ε/|c|²)^{1/2k}) when the section is the single power c·z_j^k.
fn power_radius(sec: &SectionTuple, eps: f64) -> Option<(usize, f64)> {
    let [p] = sec.components() else { return None };
    let [(i, jj, c)] = p.terms() else { return None };
    if sec.unit().is_some() || !jj.is_zero() || i.support().len() != 1 {
        return None;
    }
    let j = i.support()[0];
    Some((j, (eps / c.norm_sqr()).powf(0.5 / i.get(j) as f64)))
}

struct Compiled {
    n: usize,
    q: usize,
    blocks: Vec<(Block, SectionTuple, f64)>,
    phi: TestForm,
    generic: bool,
}

impl Compiled {
    fn density(&self, z: &[C64]) -> C64 {
        let mut omega = scalar_form(C64::new(1.0, 0.0));
        for (block, sec, eps) in &self.blocks {
            let fast = !self.generic && sec.m() == 1;
            let v = sec.values_with(z, !fast || block.needs_derivatives());
            let form = if fast { block_fast(*block, &v, *eps, self.n) } else { block_generic(*block, &v, *eps, self.n) };
            if form.is_empty() {
                return C64::default();
            }
            omega = wedge_forms(&omega, &form);
        }
        pair_with(&omega, &self.phi, self.n, self.q, z)
    }
}

/// Density of ω ∧ φ against Lebesgue measure, ω a scalar (0, n−q)-form.
fn pair_with(omega: &Form, phi: &TestForm, n: usize, q: usize, z: &[C64]) -> C64 {
    let full = ((1u16 << n) - 1) as u8;
    if q == n {
        return omega.iter().filter(|t| t.0 == 0).map(|t| t.1).sum::<C64>() * phi.eval_mask(z, full);
    }
    let qp = n - q;
    // dz̄_{T′} ∧ dz ∧ dz̄_T = (−1)^{q′n} dz ∧ dz̄_{T′} ∧ dz̄_T
    let outer = if (qp * n) % 2 == 0 { 1.0 } else { -1.0 };
    let mut acc = C64::default();
    for &(t, w) in omega {
        let rest = full & !t;
        let c = phi.eval_mask(z, rest);
        if c == C64::default() {
            continue;
        }
        let s = crate::superform::merge_sign(t, rest).unwrap_or(0.0);
        acc += w * c * s;
    }
    acc * lambda(n) * outer
}

fn need_order(chi: &CutoffSpec, min: u32, slot: &str) -> Result<()> {
    chi.validate()?;
    if chi.family == Family::Indicator {
        return Err(LabError::Cutoff(format!("the indicator is not allowed as {slot}")));
    }
    if chi.vanishing_order() < min {
        return Err(LabError::Cutoff(format!("{slot} must vanish to order ≥ {min}, got {}", chi.vanishing_order())));
    }
    Ok(())
}

fn build_inner(spec: &ExprSpec, generic: bool) -> Result<Integrand> {
    let n = spec.phi.dim();
    if n > MAX_N {
        return Err(LabError::Size(format!("n = {n}")));
    }
    if !(spec.eps[0] > 0.0 && spec.eps[1] > 0.0) {
        return Err(LabError::Invalid(format!("ε must be positive, got {:?}", spec.eps)));
    }
    let f = &spec.f;
    if f.dim() != n {
        return Err(LabError::Dimension { expected: n, got: f.dim() });
    }
    let m1 = f.m();
    let g = if spec.variant.is_pair() {
        let g = spec.g.as_ref().ok_or_else(|| LabError::Invalid(format!("{} needs g", spec.variant.name())))?;
        if g.dim() != n {
            return Err(LabError::Dimension { expected: n, got: g.dim() });
        }
        Some(g)
    } else {
        None
    };
    let m2 = g.map(|g| g.m()).unwrap_or(0);
    let chi2 = || spec.chi2.ok_or_else(|| LabError::Invalid(format!("{} needs χ₂", spec.variant.name())));
    let single_order = (m1.min(n) + 1) as u32;
    let q = spec.phi.q();
    let blocks: Vec<Block> = match spec.variant {
        Variant::SinglePv => {
            need_order(&spec.chi1, single_order, "χ")?;
            vec![Block::Pv(spec.chi1)]
        }
        Variant::SingleRes => {
            need_order(&spec.chi1, single_order, "χ")?;
            vec![Block::Res(spec.chi1)]
        }
        Variant::PvPair => {
            need_order(&spec.chi1, m1 as u32, "χ₁")?;
            let c2 = chi2()?;
            if c2.vanishing_order() == 0 {
                // a cutoff with χ(0) ≠ 0 carries no power of g
                need_order(&c2, 0, "χ₂")?;
                vec![Block::Pv(spec.chi1), Block::Scalar(c2)]
            } else {
                need_order(&c2, m2 as u32, "χ₂")?;
                vec![Block::Pv(spec.chi1), Block::Pv(c2)]
            }
        }
        Variant::PotRes => {
            need_order(&spec.chi1, m1 as u32, "χ₁")?;
            need_order(&chi2()?, m2 as u32, "χ₂")?;
            vec![Block::Pv(spec.chi1), Block::Res(chi2()?)]
        }
        Variant::ResRes => {
            need_order(&spec.chi1, m1 as u32, "χ₁")?;
            need_order(&chi2()?, m2 as u32, "χ₂")?;
            vec![Block::Res(spec.chi1), Block::Res(chi2()?)]
        }
        Variant::BmPair => {
            if m1 != 1 || m2 != 1 {
                return Err(LabError::Invalid("BM_PAIR needs m₁ = m₂ = 1".into()));
            }
            vec![Block::Bm, Block::Bm]
        }
        Variant::UNablaU => {
            let top = q + (m1 - 1) != n;
            vec![Block::UEps, Block::NablaUEps { top }]
        }
        Variant::SepIndicator => {
            need_order(&spec.chi1, single_order, "χ₁")?;
            let c2 = chi2()?;
            c2.validate()?;
            vec![Block::Res(spec.chi1), Block::Scalar(c2)]
        }
    };
    let sections: Vec<&SectionTuple> = std::iter::once(f).chain(g).collect();
    let total: usize = blocks.iter().zip(&sections).map(|(b, s)| b.degree(s.m())).sum();
    if total + q != n {
        return Err(LabError::Bidegree(format!(
            "{}: regularizer has antiholomorphic degree {total}, test form q = {q}, n = {n}",
            spec.variant.name()
        )));
    }
    let eps = [spec.eps[0], spec.eps[1]];
    let compiled = Compiled {
        n,
        q,
        blocks: blocks.into_iter().zip(sections.iter()).enumerate().map(|(k, (b, s))| (b, (*s).clone(), eps[k])).collect(),
        phi: spec.phi.clone(),
        generic,
    };
    let mut integrand = Integrand::from_fn(n, spec.phi.support(), spec.phi.flat(), move |z| compiled.density(z));
    // a section c·z_j^k switches on across the circle |z_j| = (ε/|c|²)^{1/2k}; the indicator
    // jumps there
    for (slot, sec) in sections.iter().enumerate() {
        if let Some((j, radius)) = power_radius(sec, spec.eps[slot]) {
            let sharp = spec.variant == Variant::SepIndicator && slot == 1 && spec.chi2.is_some_and(|c| !c.is_smooth());
            let radii = if sharp { vec![radius] } else { (-4..=4).map(|k| radius * 2f64.powf(k as f64 / 2.0)).collect() };
            integrand = integrand.with_breaks(j, radii);
        }
    }
    let hint_polys = section_hints(&sections);
    if n >= 2 && !hint_polys.is_empty() {
        integrand = integrand.with_hints(move |outer| hint_polys.iter().flat_map(|p| last_axis_roots(p, outer)).collect());
    }
    Ok(integrand)
}

/// Builds the density of an expression.
pub fn build(spec: &ExprSpec) -> Result<Integrand> {
    build_inner(spec, false)
}

/// Same density, with every block evaluated through the general super-element algebra.
pub fn build_generic(spec: &ExprSpec) -> Result<Integrand> {
    build_inner(spec, true)
}
