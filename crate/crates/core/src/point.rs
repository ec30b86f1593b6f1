//! Points of `ℝ^ℕ` given by finitely many explicit coordinates followed by a
//! closed-form tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Envelope, Monomial};

/// Tail rule for coordinates `j > d`, where `d` is the prefix length.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointTail {
    #[default]
    Zero,
    /// `a · j^{−p}`
    Power {
        a: f64,
        p: f64,
    },
    /// `a · q^{j−d}` with `|q| < 1`
    Geometric {
        a: f64,
        q: f64,
    },
    Constant {
        a: f64,
    },
}

/// A point `x = (x_1, x_2, …)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeqPoint {
    #[serde(default)]
    pub prefix: Vec<f64>,
    #[serde(default)]
    pub tail: PointTail,
}

/// `x_j = c · ρ^j · j^{−p}` on the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TailTerm {
    c: f64,
    rho: f64,
    p: f64,
}

impl TailTerm {
    fn abs_at(&self, j: f64) -> f64 {
        self.c.abs() * (j * self.rho.abs().ln() - self.p * j.ln()).exp()
    }

    /// Dominance order by `|ρ|`, then by the power.
    fn dominates(&self, other: &TailTerm) -> bool {
        if other.c == 0.0 {
            return true;
        }
        if self.c == 0.0 {
            return false;
        }
        let (a, b) = (self.rho.abs(), other.rho.abs());
        a > b || (a == b && self.p < other.p)
    }
}

impl SeqPoint {
    pub fn new(prefix: Vec<f64>, tail: PointTail) -> Self {
        SeqPoint { prefix, tail }
    }

    /// Finitely supported point.
    pub fn finite(prefix: Vec<f64>) -> Self {
        SeqPoint {
            prefix,
            tail: PointTail::Zero,
        }
    }

    pub fn zero() -> Self {
        SeqPoint::default()
    }

    pub fn dim(&self) -> usize {
        self.prefix.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.prefix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InputDomain(
                "point coordinates must be finite".into(),
            ));
        }
        let ok = match self.tail {
            PointTail::Zero => true,
            PointTail::Power { a, p } => a.is_finite() && p.is_finite(),
            PointTail::Geometric { a, q } => a.is_finite() && q.abs() < 1.0,
            PointTail::Constant { a } => a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InputDomain(format!(
                "invalid point tail {:?}",
                self.tail
            )))
        }
    }

    /// `x_j` for `j ≥ 1`.
    pub fn coord(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        if j <= self.prefix.len() {
            return self.prefix[j - 1];
        }
        let d = self.prefix.len();
        match self.tail {
            PointTail::Zero => 0.0,
            PointTail::Power { a, p } => a * (j as f64).powf(-p),
            PointTail::Geometric { a, q } => a * q.powi((j - d) as i32),
            PointTail::Constant { a } => a,
        }
    }

    /// Copy of the point with coordinate `j` replaced.
    pub fn with_coord(&self, j: usize, v: f64) -> SeqPoint {
        let mut out = self.clone();
        if j > out.prefix.len() {
            let extra: Vec<f64> = (out.prefix.len() + 1..=j).map(|i| self.coord(i)).collect();
            if let PointTail::Geometric { a, q } = out.tail {
                out.tail = PointTail::Geometric {
                    a: a * q.powi(extra.len() as i32),
                    q,
                };
            }
            out.prefix.extend(extra);
        }
        out.prefix[j - 1] = v;
        out
    }

    fn tail_term(&self) -> TailTerm {
        let d = self.prefix.len() as i32;
        match self.tail {
            PointTail::Zero => TailTerm {
                c: 0.0,
                rho: 1.0,
                p: 0.0,
            },
            PointTail::Power { a, p } => TailTerm { c: a, rho: 1.0, p },
            PointTail::Geometric { a, q } => {
                if q == 0.0 {
                    TailTerm {
                        c: 0.0,
                        rho: 1.0,
                        p: 0.0,
                    }
                } else {
                    TailTerm {
                        c: a * q.powi(-d),
                        rho: q,
                        p: 0.0,
                    }
                }
            }
            PointTail::Constant { a } => TailTerm {
                c: a,
                rho: 1.0,
                p: 0.0,
            },
        }
    }

    /// `sup_{j ≥ from} |x_j|`, possibly `+∞`.
    pub fn sup_abs_from(&self, from: usize) -> f64 {
        let from = from.max(1);
        let d = self.prefix.len();
        let head = self
            .prefix
            .iter()
            .skip(from - 1)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let start = from.max(d + 1);
        let tail = match self.tail {
            PointTail::Zero => 0.0,
            PointTail::Constant { a } => a.abs(),
            PointTail::Power { a, p } => {
                if a == 0.0 {
                    0.0
                } else if p >= 0.0 {
                    a.abs() * (start as f64).powf(-p)
                } else {
                    f64::INFINITY
                }
            }
            PointTail::Geometric { a, q } => a.abs() * q.abs().powi((start - d) as i32),
        };
        head.max(tail)
    }

    pub fn is_bounded(&self) -> bool {
        self.sup_abs_from(1).is_finite()
    }

    /// Whether the tail is eventually zero.
    pub fn tail_is_zero(&self) -> bool {
        self.tail_term().c == 0.0
    }

    /// Envelope of `|x_j|^k` on the tail.
    pub fn abs_pow_envelope(&self, k: f64) -> Envelope {
        self.diff_abs_pow_envelope(&SeqPoint::zero(), k)
    }

    /// Envelope of `|x_j − y_j|^k`, valid beyond both prefixes and, when the
    /// two tails are of different order, beyond the index where the smaller
    /// one drops below half the larger.
    pub fn diff_abs_pow_envelope(&self, other: &SeqPoint, k: f64) -> Envelope {
        let from = self.dim().max(other.dim()) + 1;
        let (s, o) = (self.tail_term(), other.tail_term());
        let mono = |t: &TailTerm, scale: f64| Monomial {
            coef: (t.c.abs() * scale).powf(k),
            ratio: t.rho.abs().powf(k),
            factors: vec![(0.0, -t.p * k)],
            from: 1,
        };
        if s.c == 0.0 && o.c == 0.0 {
            return Envelope::exact(Monomial::constant(0.0)).starting_at(from);
        }
        if s.rho == o.rho && s.p == o.p {
            let t = TailTerm { c: s.c - o.c, ..s };
            return Envelope::exact(mono(&t, 1.0)).starting_at(from);
        }
        if s.rho.abs() == o.rho.abs() && s.p == o.p {
            // Opposite signs of ρ: the coefficient alternates between c₁ ∓ c₂.
            let upper = mono(
                &TailTerm {
                    c: s.c.abs() + o.c.abs(),
                    ..s
                },
                1.0,
            );
            let lo = (s.c.abs() - o.c.abs()).abs();
            let lower = (lo > 0.0).then(|| mono(&TailTerm { c: lo, ..s }, 1.0));
            return Envelope {
                upper: Some(upper),
                lower,
            }
            .starting_at(from);
        }
        let (dom, sub) = if s.dominates(&o) { (s, o) } else { (o, s) };
        if sub.c == 0.0 {
            return Envelope::exact(mono(&dom, 1.0)).starting_at(from);
        }
        // ratio |sub/dom| = C · (|ρ_s|/|ρ_d|)^j · j^{p_d − p_s} is decreasing
        // for j ≥ j_mono and eventually below 1/2.
        let ln_q = (sub.rho.abs() / dom.rho.abs()).ln();
        let dp = dom.p - sub.p;
        let j_mono = if dp > 0.0 && ln_q < 0.0 {
            (dp / -ln_q).ceil() as usize
        } else {
            1
        };
        let ratio = |j: usize| sub.abs_at(j as f64) / dom.abs_at(j as f64);
        let mut j = j_mono.max(from);
        while ratio(j) > 0.5 {
            if j > 1 << 50 {
                return Envelope::unknown();
            }
            j *= 2;
        }
        Envelope {
            upper: Some(mono(&dom, 1.5)),
            lower: Some(mono(&dom, 0.5)),
        }
        .starting_at(j)
    }

    /// `x − y` with prefixes aligned; `None` when the tails do not combine
    /// into one of the supported kinds.
    pub fn difference(&self, other: &SeqPoint) -> Option<SeqPoint> {
        let d = self.dim().max(other.dim());
        let prefix: Vec<f64> = (1..=d).map(|j| self.coord(j) - other.coord(j)).collect();
        let rebase = |p: &SeqPoint| -> PointTail {
            match p.tail {
                PointTail::Geometric { a, q } => PointTail::Geometric {
                    a: a * q.powi((d - p.dim()) as i32),
                    q,
                },
                t => t,
            }
        };
        let tail = match (rebase(self), rebase(other)) {
            (t, PointTail::Zero) => t,
            (PointTail::Zero, t) => negate(t),
            (PointTail::Constant { a }, PointTail::Constant { a: b }) => {
                PointTail::Constant { a: a - b }
            }
            (PointTail::Power { a, p }, PointTail::Power { a: b, p: q }) if p == q => {
                PointTail::Power { a: a - b, p }
            }
            (PointTail::Power { a, p: 0.0 }, PointTail::Constant { a: b }) => {
                PointTail::Constant { a: a - b }
            }
            (PointTail::Constant { a }, PointTail::Power { a: b, p: 0.0 }) => {
                PointTail::Constant { a: a - b }
            }
            (PointTail::Geometric { a, q }, PointTail::Geometric { a: b, q: r }) if q == r => {
                PointTail::Geometric { a: a - b, q }
            }
            _ => return None,
        };
        Some(SeqPoint { prefix, tail })
    }
}

fn negate(t: PointTail) -> PointTail {
    match t {
        PointTail::Zero => PointTail::Zero,
        PointTail::Power { a, p } => PointTail::Power { a: -a, p },
        PointTail::Geometric { a, q } => PointTail::Geometric { a: -a, q },
        PointTail::Constant { a } => PointTail::Constant { a: -a },
    }
}
