//! Cutoff functions χ on [0, ∞].

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quad::gl;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// t^ℓ/(t+1)^ℓ
    CanonicalPow,
    /// 1/(t+1)^ℓ, equal to 1 at 0 and 0 at ∞.
    ComplementPow,
    /// Characteristic function of [1, ∞].
    Indicator,
    /// t·χ′_ℓ(t) = ℓ t^ℓ/(t+1)^{ℓ+1}, the weight that appears when a cutoff is differentiated
    /// along its own scaling.
    TprimePow,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub family: Family,
    #[serde(default = "one")]
    pub order: u32,
}

fn one() -> u32 {
    1
}

impl CutoffSpec {
    pub fn canonical(order: u32) -> Self {
        CutoffSpec { family: Family::CanonicalPow, order }
    }

    pub fn complement(order: u32) -> Self {
        CutoffSpec { family: Family::ComplementPow, order }
    }

    pub fn indicator() -> Self {
        CutoffSpec { family: Family::Indicator, order: 1 }
    }

    pub fn tprime(order: u32) -> Self {
        CutoffSpec { family: Family::TprimePow, order }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 && self.family != Family::Indicator {
            return Err(LabError::Cutoff("order must be positive".into()));
        }
        Ok(())
    }

    pub fn is_smooth(&self) -> bool {
        self.family != Family::Indicator
    }

    /// Order of vanishing at 0 (`u32::MAX` for the indicator, which vanishes near 0).
    pub fn vanishing_order(&self) -> u32 {
        match self.family {
            Family::CanonicalPow | Family::TprimePow => self.order,
            Family::ComplementPow => 0,
            Family::Indicator => u32::MAX,
        }
    }

    pub fn value_at_infinity(&self) -> f64 {
        match self.family {
            Family::CanonicalPow | Family::Indicator => 1.0,
            Family::ComplementPow | Family::TprimePow => 0.0,
        }
    }

    /// χ(t); `t` may be `f64::INFINITY`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(LabError::Cutoff(format!("negative argument {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    #[inline]
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let l = self.order as i32;
        if t == f64::INFINITY {
            return self.value_at_infinity();
        }
        match self.family {
            Family::CanonicalPow => (t / (t + 1.0)).powi(l),
            Family::ComplementPow => (t + 1.0).recip().powi(l),
            Family::Indicator => (t >= 1.0) as u8 as f64,
            Family::TprimePow => l as f64 * (t / (t + 1.0)).powi(l) / (t + 1.0),
        }
    }

    /// χ′(t), exact.
    pub fn prime(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(LabError::Cutoff(format!("negative argument {t}")));
        }
        if !self.is_smooth() {
            return Err(LabError::Cutoff("the indicator has no pointwise derivative".into()));
        }
        Ok(self.prime_unchecked(t))
    }

    #[inline]
    pub fn prime_unchecked(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 0.0;
        }
        let l = self.order as i32;
        let s = 1.0 / (t + 1.0);
        match self.family {
            Family::CanonicalPow => l as f64 * t.powi(l - 1) * s.powi(l + 1),
            Family::ComplementPow => -(l as f64) * s.powi(l + 1),
            Family::Indicator => 0.0,
            Family::TprimePow => l as f64 * t.powi(l - 1) * (l as f64 - t) * s.powi(l + 2),
        }
    }
}

/// ∫₀^∞ (d/dt)χ(t/ε) φ(t) dt for φ supported in [0, support], computed in τ = t/ε.
/// Returns (value, error estimate).
pub fn delta_family_pairing(spec: &CutoffSpec, phi: impl Fn(f64) -> f64, support: f64, eps: f64) -> Result<(f64, f64)> {
    if !spec.is_smooth() {
        return Err(LabError::Cutoff("pairing needs a smooth family".into()));
    }
    if !(eps > 0.0) {
        return Err(LabError::Invalid(format!("ε must be positive, got {eps}")));
    }
    let top = support / eps;
    // [0,1] then doubling panels up to the support edge
    let mut breaks = vec![0.0, 1.0f64.min(top)];
    while *breaks.last().unwrap() < top {
        let next = (breaks.last().unwrap() * 2.0).min(top);
        breaks.push(next);
    }
    let rule = |order: usize| {
        let g = gl(order);
        breaks
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                g.iter().map(|&(x, wt)| {
                    let tau = 0.5 * (a + b) + 0.5 * (b - a) * x;
                    0.5 * (b - a) * wt * spec.prime_unchecked(tau) * phi(eps * tau)
                }).sum::<f64>()
            })
            .sum::<f64>()
    };
    let fine = rule(20);
    let coarse = rule(14);
    Ok((fine, (fine - coarse).abs()))
}
