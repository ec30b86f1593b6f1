//! Closed-form real sequences `j ↦ s_j`, `j ≥ 1`, used for exponents `r_j`,
//! `b_j`, shape parameters `σ_j` and weight offsets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Envelope, Monomial};

/// A sequence given by a rule. `Explicit` overrides the first terms and
/// delegates the rest to another rule evaluated at the same absolute index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceRule {
    /// `c`
    Constant { c: f64 },
    /// `a · j^p`
    PowerLaw { a: f64, p: f64 },
    /// `a + b · log₂(j + shift)`
    LogLinear {
        a: f64,
        b: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `a · q^j`
    Geometric { a: f64, q: f64 },
    /// `prefix[j−1]` for `j ≤ prefix.len()`, otherwise `tail(j)`.
    Explicit {
        prefix: Vec<f64>,
        tail: Box<SequenceRule>,
    },
}

impl SequenceRule {
    pub fn constant(c: f64) -> Self {
        SequenceRule::Constant { c }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{what} must be finite, got {v}")))
            }
        };
        match self {
            SequenceRule::Constant { c } => finite(*c, "c"),
            SequenceRule::PowerLaw { a, p } => finite(*a, "a").and(finite(*p, "p")),
            SequenceRule::LogLinear { a, b, shift } => {
                finite(*a, "a")?;
                finite(*b, "b")?;
                finite(*shift, "shift")?;
                if *shift <= -1.0 {
                    return Err(Error::Validation(format!(
                        "shift must exceed -1, got {shift}"
                    )));
                }
                Ok(())
            }
            SequenceRule::Geometric { a, q } => finite(*a, "a").and(finite(*q, "q")),
            SequenceRule::Explicit { prefix, tail } => {
                for v in prefix {
                    finite(*v, "prefix entry")?;
                }
                tail.validate()
            }
        }
    }

    pub fn eval(&self, j: usize) -> f64 {
        let jf = j as f64;
        match self {
            SequenceRule::Constant { c } => *c,
            SequenceRule::PowerLaw { a, p } => a * jf.powf(*p),
            SequenceRule::LogLinear { a, b, shift } => a + b * (jf + shift).log2(),
            SequenceRule::Geometric { a, q } => a * q.powi(j as i32),
            SequenceRule::Explicit { prefix, tail } => {
                if j >= 1 && j <= prefix.len() {
                    prefix[j - 1]
                } else {
                    tail.eval(j)
                }
            }
        }
    }

    /// First index from which the parametric part applies.
    pub fn tail_start(&self) -> usize {
        match self {
            SequenceRule::Explicit { prefix, tail } => (prefix.len() + 1).max(tail.tail_start()),
            _ => 1,
        }
    }

    /// `inf_{j ≥ from} s_j`.
    pub fn inf_from(&self, from: usize) -> f64 {
        let from = from.max(1);
        match self {
            SequenceRule::Explicit { prefix, tail } => {
                let head = prefix
                    .iter()
                    .skip(from - 1)
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                head.min(tail.inf_from(from.max(prefix.len() + 1)))
            }
            _ => self.monotone_extreme(from, false),
        }
    }

    /// `sup_{j ≥ from} s_j`.
    pub fn sup_from(&self, from: usize) -> f64 {
        let from = from.max(1);
        match self {
            SequenceRule::Explicit { prefix, tail } => {
                let head = prefix
                    .iter()
                    .skip(from - 1)
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                head.max(tail.sup_from(from.max(prefix.len() + 1)))
            }
            _ => self.monotone_extreme(from, true),
        }
    }

    /// Extremes of the parametric kinds, which are monotone in `j` except for
    /// geometric rules with negative ratio.
    fn monotone_extreme(&self, from: usize, sup: bool) -> f64 {
        let first = self.eval(from);
        let limit = match self {
            SequenceRule::Constant { c } => *c,
            SequenceRule::PowerLaw { a, p } => {
                if *a == 0.0 || *p == 0.0 {
                    *a
                } else if *p < 0.0 {
                    0.0
                } else {
                    a.signum() * f64::INFINITY
                }
            }
            SequenceRule::LogLinear { a, b, .. } => {
                if *b == 0.0 {
                    *a
                } else {
                    b.signum() * f64::INFINITY
                }
            }
            SequenceRule::Geometric { a, q } => {
                if *a == 0.0 || *q == 1.0 {
                    *a
                } else if q.abs() < 1.0 {
                    if *q < 0.0 {
                        let second = self.eval(from + 1);
                        return if sup {
                            first.max(second)
                        } else {
                            first.min(second)
                        };
                    }
                    0.0
                } else if *q < 0.0 {
                    return if sup {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    };
                } else {
                    a.signum() * f64::INFINITY
                }
            }
            SequenceRule::Explicit { .. } => unreachable!(),
        };
        if sup {
            first.max(limit)
        } else {
            first.min(limit)
        }
    }

    /// Envelope of `|s_j|^k` over the parametric part.
    pub fn power_envelope(&self, k: f64) -> Envelope {
        match self {
            SequenceRule::Constant { c } => Envelope::exact(Monomial::constant(c.abs().powf(k))),
            SequenceRule::PowerLaw { a, p } => {
                Envelope::exact(Monomial::power(a.abs().powf(k), 0.0, p * k))
            }
            SequenceRule::Geometric { a, q } => {
                Envelope::exact(Monomial::geometric(a.abs().powf(k), q.abs().powf(k)))
            }
            SequenceRule::LogLinear { a, b, .. } => {
                if *b == 0.0 {
                    return Envelope::exact(Monomial::constant(a.abs().powf(k)));
                }
                // |s_j| grows without bound; find where it exceeds 1.
                let mut j = 1usize;
                while self.eval(j).abs() < 1.0 && j < 1 << 40 {
                    j *= 2;
                }
                Envelope {
                    upper: None,
                    lower: Some(Monomial::constant(1.0).starting_at(j)),
                }
            }
            SequenceRule::Explicit { tail, .. } => {
                tail.power_envelope(k).starting_at(self.tail_start())
            }
        }
    }

    /// Envelope of `base^{−s_j}` over the parametric part, for `base > 1`.
    pub fn exp_neg_envelope(&self, base: f64) -> Envelope {
        let l = base.ln();
        match self {
            SequenceRule::Constant { c } => Envelope::exact(Monomial::constant((-l * c).exp())),
            SequenceRule::LogLinear { a, b, shift } => Envelope::exact(Monomial::power(
                (-l * a).exp(),
                *shift,
                -b * l / std::f64::consts::LN_2,
            )),
            SequenceRule::PowerLaw { a, p } => {
                if *p == 0.0 {
                    Envelope::exact(Monomial::constant((-l * a).exp()))
                } else if *a <= 0.0 {
                    Envelope {
                        upper: None,
                        lower: Some(Monomial::constant(1.0)),
                    }
                } else if *p < 0.0 {
                    Envelope {
                        upper: Some(Monomial::constant(1.0)),
                        lower: Some(Monomial::constant((-l * a).exp())),
                    }
                } else if *p == 1.0 {
                    Envelope::exact(Monomial::geometric(1.0, (-l * a).exp()))
                } else if *p > 1.0 {
                    Envelope {
                        upper: Some(Monomial::geometric(1.0, (-l * a).exp())),
                        lower: None,
                    }
                } else {
                    // sup_j j² e^{−l a j^p} attained near t* = (2/(l a p))^{1/p}
                    let t_star = (2.0 / (l * a * p)).powf(1.0 / p);
                    let c = if t_star <= 1.0 {
                        (-l * a).exp()
                    } else {
                        (2.0 * t_star.ln() - 2.0 / p).exp()
                    };
                    Envelope {
                        upper: Some(Monomial::power(c, 0.0, -2.0)),
                        lower: None,
                    }
                }
            }
            SequenceRule::Geometric { a, q } => {
                if *q == 1.0 {
                    Envelope::exact(Monomial::constant((-l * a).exp()))
                } else if q.abs() <= 1.0 {
                    let m = a.abs() * q.abs();
                    Envelope {
                        upper: Some(Monomial::constant((l * m).exp())),
                        lower: Some(Monomial::constant((-l * m).exp())),
                    }
                } else if *q > 1.0 && *a > 0.0 {
                    // q^j ≥ q(1 + (q−1)(j−1))
                    let coef = (-l * a * q * (2.0 - q)).exp();
                    let ratio = (-l * a * q * (q - 1.0)).exp();
                    Envelope {
                        upper: Some(Monomial::geometric(coef, ratio)),
                        lower: None,
                    }
                } else if *q > 1.0 {
                    Envelope {
                        upper: None,
                        lower: Some(Monomial::constant(1.0)),
                    }
                } else {
                    Envelope::unknown()
                }
            }
            SequenceRule::Explicit { tail, .. } => {
                tail.exp_neg_envelope(base).starting_at(self.tail_start())
            }
        }
    }

    /// `liminf_j s_j / ln j`, when it has a closed form.
    pub fn log_growth(&self) -> Option<f64> {
        match self {
            SequenceRule::Constant { .. } => Some(0.0),
            SequenceRule::PowerLaw { a, p } => Some(if *p > 0.0 && *a != 0.0 {
                a.signum() * f64::INFINITY
            } else {
                0.0
            }),
            SequenceRule::LogLinear { b, .. } => Some(b / std::f64::consts::LN_2),
            SequenceRule::Geometric { a, q } => Some(if q.abs() <= 1.0 || *a == 0.0 {
                0.0
            } else if *q < 0.0 {
                f64::NEG_INFINITY
            } else {
                a.signum() * f64::INFINITY
            }),
            SequenceRule::Explicit { tail, .. } => tail.log_growth(),
        }
    }

    /// Parametric part with any explicit prefix removed.
    pub fn parametric(&self) -> &SequenceRule {
        match self {
            SequenceRule::Explicit { tail, .. } => tail.parametric(),
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let r = SequenceRule::LogLinear {
            a: 0.0,
            b: 2.0,
            shift: 1.0,
        };
        assert_eq!(r.eval(1), 2.0);
        assert_eq!(r.eval(3), 4.0);
        let e = SequenceRule::Explicit {
            prefix: vec![7.0],
            tail: Box::new(SequenceRule::constant(1.0)),
        };
        assert_eq!(e.eval(1), 7.0);
        assert_eq!(e.eval(2), 1.0);
        assert_eq!(e.tail_start(), 2);
        assert_eq!(SequenceRule::Geometric { a: 1.0, q: 0.5 }.eval(3), 0.125);
    }

    #[test]
    fn extremes() {
        let r = SequenceRule::PowerLaw { a: 1.0, p: -1.0 };
        assert_eq!(r.inf_from(1), 0.0);
        assert_eq!(r.sup_from(2), 0.5);
        let e = SequenceRule::Explicit {
            prefix: vec![3.0, -1.0],
            tail: Box::new(SequenceRule::constant(1.0)),
        };
        assert_eq!(e.inf_from(1), -1.0);
        assert_eq!(e.inf_from(3), 1.0);
        assert_eq!(e.sup_from(1), 3.0);
    }

    #[test]
    fn exponential_envelopes() {
        // 2^{−2 log₂(j+1)} = (j+1)^{−2}
        let r = SequenceRule::LogLinear {
            a: 0.0,
            b: 2.0,
            shift: 1.0,
        };
        let env = r.exp_neg_envelope(2.0);
        let up = env.upper.unwrap();
        for j in 1..50 {
            let v = 2f64.powf(-r.eval(j));
            assert!((up.eval(j) - v).abs() <= 1e-14 * v);
        }
        assert!(SequenceRule::constant(1.0)
            .exp_neg_envelope(2.0)
            .lower
            .unwrap()
            .divergent());
        let sub = SequenceRule::PowerLaw { a: 1.0, p: 0.5 }
            .exp_neg_envelope(2.0)
            .upper
            .unwrap();
        for j in 1..2000 {
            assert!(2f64.powf(-(j as f64).sqrt()) <= sub.eval(j) * (1.0 + 1e-12));
        }
        let g = SequenceRule::Geometric { a: 1.0, q: 1.5 }
            .exp_neg_envelope(2.0)
            .upper
            .unwrap();
        for j in 1..60 {
            assert!(2f64.powf(-1.5f64.powi(j as i32)) <= g.eval(j) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn growth_rates() {
        assert_eq!(
            SequenceRule::PowerLaw { a: 1.0, p: 1.0 }.log_growth(),
            Some(f64::INFINITY)
        );
        let r = SequenceRule::LogLinear {
            a: 0.0,
            b: 1.0,
            shift: 0.0,
        };
        assert!((r.log_growth().unwrap() - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);
    }
}
