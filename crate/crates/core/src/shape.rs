//! Gaussian shape parameters `σ_j` and the Mehler triple `(c, β, τ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::SequenceRule;
use crate::series::{Envelope, Series, Verdict};

/// Mehler parameters attached to a shape parameter `σ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerParams {
    pub sigma: f64,
    pub c: f64,
    pub beta: f64,
    pub tau: f64,
}

impl MehlerParams {
    /// `c = (1 + 8σ²)^{1/4}`, `β = 1 − 2/(1 + c²)`, `τ = (c² − 1)/4`.
    ///
    /// `c² − 1` is formed as `8σ²/(√(1+8σ²) + 1)` so that tiny `σ` keeps full
    /// relative accuracy in `β` and `τ`.
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InputDomain(format!(
                "shape parameter must be positive and finite, got {sigma}"
            )));
        }
        let s2 = sigma * sigma;
        let root = (1.0 + 8.0 * s2).sqrt();
        let c2m1 = 8.0 * s2 / (root + 1.0);
        let c = root.sqrt();
        let beta = c2m1 / (2.0 + c2m1);
        let tau = c2m1 / 4.0;
        Ok(MehlerParams {
            sigma,
            c,
            beta,
            tau,
        })
    }

    /// `c² − 1`, accurate for small `σ`.
    pub fn c2_minus_1(&self) -> f64 {
        4.0 * self.tau
    }

    /// `α_ν = 1/((1−β)β^ν)`.
    pub fn alpha(&self, nu: usize) -> f64 {
        1.0 / ((1.0 - self.beta) * self.beta.powi(nu as i32))
    }

    /// `α_ν^{−1} = (1−β)β^ν`.
    pub fn alpha_inv(&self, nu: usize) -> f64 {
        (1.0 - self.beta) * self.beta.powi(nu as i32)
    }

    /// Relative residual of `c²β/(2(1−β²)) = σ²`.
    pub fn variance_residual(&self) -> f64 {
        let lhs = self.c * self.c * self.beta / (2.0 * (1.0 - self.beta * self.beta));
        let s2 = self.sigma * self.sigma;
        (lhs - s2).abs() / s2
    }

    /// Relative residual of `τ = (c² − 1)/4`, with `c²` squared from `c`.
    pub fn isometry_residual(&self) -> f64 {
        let rhs = (self.c * self.c - 1.0) / 4.0;
        (self.tau - rhs).abs() / self.tau
    }
}

/// Upper bound `β(σ) ≤ 2σ²`.
pub fn beta_upper(sigma: f64) -> f64 {
    2.0 * sigma * sigma
}

/// Shape parameters `σ_j = prefix[j−1]` for `j ≤ prefix.len()`, else `tail(j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    #[serde(default)]
    pub prefix: Vec<f64>,
    pub tail: SequenceRule,
}

impl ShapeParams {
    pub fn new(prefix: Vec<f64>, tail: SequenceRule) -> Self {
        ShapeParams { prefix, tail }
    }

    /// `σ_j = a · q^j`.
    pub fn geometric(a: f64, q: f64) -> Self {
        ShapeParams {
            prefix: Vec::new(),
            tail: SequenceRule::Geometric { a, q },
        }
    }

    pub fn sigma(&self, j: usize) -> f64 {
        if j >= 1 && j <= self.prefix.len() {
            self.prefix[j - 1]
        } else {
            self.tail.eval(j)
        }
    }

    pub fn params(&self, j: usize) -> Result<MehlerParams> {
        MehlerParams::from_sigma(self.sigma(j))
    }

    /// First index governed by the parametric tail.
    pub fn tail_start(&self) -> usize {
        (self.prefix.len() + 1).max(self.tail.tail_start())
    }

    /// `sup_{j ≥ from} σ_j`.
    pub fn sup_from(&self, from: usize) -> f64 {
        let head = self
            .prefix
            .iter()
            .skip(from.max(1) - 1)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        head.max(self.tail.sup_from(from.max(self.prefix.len() + 1)))
    }

    /// Whether every `σ_j` is positive.
    pub fn positivity(&self) -> Verdict {
        if self.prefix.iter().any(|&s| !(s > 0.0)) {
            return Verdict::Fails;
        }
        positive_from(&self.tail, self.prefix.len() + 1)
    }

    pub fn validate(&self) -> Result<()> {
        self.tail.validate()?;
        match self.positivity() {
            Verdict::Holds => Ok(()),
            Verdict::Fails => Err(Error::Validation(
                "shape parameters must be positive".into(),
            )),
            Verdict::Unknown => Err(Error::Validation(
                "positivity of the shape parameters cannot be certified".into(),
            )),
        }
    }

    /// Envelope of `σ_j²`.
    pub fn sq_envelope(&self) -> Envelope {
        self.tail.power_envelope(2.0).starting_at(self.tail_start())
    }

    /// `Σ_j σ_j²`.
    pub fn sum_sq(&self) -> Series<'_> {
        Series::new(move |j| self.sigma(j).powi(2), self.sq_envelope())
    }

    /// Upper bound on `Σ_{j>big_j} σ_j²`.
    pub fn sum_sq_tail(&self, big_j: usize) -> f64 {
        self.sum_sq().tail_bound(big_j)
    }
}

/// Whether `s_j > 0` for every `j ≥ from`.
pub fn positive_from(rule: &SequenceRule, from: usize) -> Verdict {
    greater_from(rule, from, 0.0)
}

/// Whether `s_j > t` for every `j ≥ from`.
pub fn greater_from(rule: &SequenceRule, from: usize, t: f64) -> Verdict {
    let inf = rule.inf_from(from);
    if inf > t {
        return Verdict::Holds;
    }
    if inf < t {
        return Verdict::Fails;
    }
    // The infimum equals the threshold; it is not attained when it is the
    // limit of a strictly decreasing positive tail.
    if let SequenceRule::Explicit { prefix, tail } = rule {
        if prefix.iter().skip(from.max(1) - 1).any(|&v| v <= t) {
            return Verdict::Fails;
        }
        return greater_from(tail, from.max(prefix.len() + 1), t);
    }
    if rule.eval(from.max(1)) <= t {
        return Verdict::Fails;
    }
    match rule {
        SequenceRule::PowerLaw { a, p } if t == 0.0 && *a > 0.0 && *p < 0.0 => Verdict::Holds,
        SequenceRule::Geometric { a, q } if t == 0.0 && *a > 0.0 && *q > 0.0 && *q < 1.0 => {
            Verdict::Holds
        }
        _ => Verdict::Unknown,
    }
}

/// Factor `κ` with `β(σ) ≥ κ σ²` whenever `σ ≤ s_max`.
pub fn beta_lower_factor(s_max: f64) -> f64 {
    2.0 / (1.0 + 2.0 * s_max * s_max).powi(2)
}

/// Envelope of `β_j` derived from the envelope of `σ_j²`, valid where
/// `σ_j ≤ s_max`.
pub fn beta_envelope(shape: &ShapeParams) -> Envelope {
    let sq = shape.sq_envelope();
    let s_max = shape.sup_from(shape.tail_start());
    Envelope {
        upper: sq.upper.map(|m| m.scale(2.0)),
        lower: if s_max.is_finite() {
            sq.lower.map(|m| m.scale(beta_lower_factor(s_max)))
        } else {
            None
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigma_one() {
        let p = MehlerParams::from_sigma(1.0).unwrap();
        assert_relative_eq!(p.c, 3f64.sqrt(), epsilon = 1e-15);
        assert!((p.beta - 0.5).abs() <= 1e-14);
        assert!((p.tau - 0.5).abs() <= 1e-14);
    }

    #[test]
    fn sigma_half() {
        let p = MehlerParams::from_sigma(0.5).unwrap();
        assert_relative_eq!(p.beta, 2.0 - 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.c * p.c, 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn tiny_sigma() {
        let p = MehlerParams::from_sigma(1e-8).unwrap();
        assert!(p.beta < 1e-15);
        assert_relative_eq!(p.beta, 2e-16, max_relative = 1e-6);
        assert!(p.variance_residual() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(MehlerParams::from_sigma(0.0).is_err());
        assert!(MehlerParams::from_sigma(-1.0).is_err());
        assert!(MehlerParams::from_sigma(f64::NAN).is_err());
    }

    #[test]
    fn beta_bounds() {
        for s in [1e-3, 0.1, 0.5, 1.0] {
            let b = MehlerParams::from_sigma(s).unwrap().beta;
            assert!(b <= beta_upper(s));
            assert!(b >= beta_lower_factor(s) * s * s);
        }
    }

    #[test]
    fn shape_sum() {
        let sh = ShapeParams::geometric(1.0, 0.5);
        assert_eq!(sh.positivity(), Verdict::Holds);
        let (v, tail, _) = sh.sum_sq().certified_sum(1e-14, 1 << 20).unwrap();
        assert!((v - 1.0 / 3.0).abs() <= tail + 1e-15);
    }
}
