//! Certified sums of nonnegative sequences indexed by `j ≥ 1`.
//!
//! A sequence is described by its exact terms together with monomial
//! envelopes `c · q^j · Π (j + s_i)^{p_i}` that bound it from above or below
//! for all `j` past some index. Upper envelopes give tail bounds for
//! convergent series; lower envelopes certify divergence.

use serde::{Deserialize, Serialize};

/// Largest index ever summed explicitly while searching for a tail bound.
pub const MAX_EXPLICIT_TERMS: usize = 10_000_000;

/// `coef · ratio^j · Π (j + shift)^{power}`, meaningful for `j ≥ from`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub ratio: f64,
    pub factors: Vec<(f64, f64)>,
    pub from: usize,
}

impl Monomial {
    pub fn constant(coef: f64) -> Self {
        Monomial {
            coef,
            ratio: 1.0,
            factors: Vec::new(),
            from: 1,
        }
    }

    pub fn power(coef: f64, shift: f64, power: f64) -> Self {
        Monomial {
            coef,
            ratio: 1.0,
            factors: vec![(shift, power)],
            from: 1,
        }
    }

    pub fn geometric(coef: f64, ratio: f64) -> Self {
        Monomial {
            coef,
            ratio,
            factors: Vec::new(),
            from: 1,
        }
    }

    pub fn starting_at(mut self, from: usize) -> Self {
        self.from = self.from.max(from);
        self
    }

    pub fn eval(&self, j: usize) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let jf = j as f64;
        let ln = jf * self.ratio.ln()
            + self
                .factors
                .iter()
                .map(|&(s, p)| p * (jf + s).ln())
                .sum::<f64>();
        self.coef * ln.exp()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Monomial {
            coef: self.coef * other.coef,
            ratio: self.ratio * other.ratio,
            factors,
            from: self.from.max(other.from),
        }
    }

    pub fn scale(&self, c: f64) -> Monomial {
        Monomial {
            coef: self.coef * c,
            ..self.clone()
        }
    }

    pub fn powf(&self, k: f64) -> Monomial {
        Monomial {
            coef: self.coef.powf(k),
            ratio: self.ratio.powf(k),
            factors: self.factors.iter().map(|&(s, p)| (s, p * k)).collect(),
            from: self.from,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.factors.iter().map(|f| f.1).sum()
    }

    /// The series of this monomial converges.
    pub fn summable(&self) -> bool {
        self.coef == 0.0 || self.ratio < 1.0 || (self.ratio == 1.0 && self.total_power() < -1.0)
    }

    /// The series of this monomial diverges.
    pub fn divergent(&self) -> bool {
        self.coef > 0.0 && (self.ratio > 1.0 || (self.ratio == 1.0 && self.total_power() >= -1.0))
    }

    /// Ratio bound `t_{j+1}/t_j ≤ ρ` valid for all `j > big_j`.
    fn ratio_bound(&self, big_j: usize) -> f64 {
        let jf = big_j as f64;
        self.ratio
            * self
                .factors
                .iter()
                .filter(|f| f.1 > 0.0)
                .map(|&(s, p)| ((jf + 2.0 + s) / (jf + 1.0 + s)).powf(p))
                .product::<f64>()
    }

    /// Upper bound on `Σ_{j > big_j} eval(j)`; requires `big_j + 1 ≥ from`.
    /// Returns `+∞` when no finite bound is available.
    pub fn tail_sum(&self, big_j: usize) -> f64 {
        debug_assert!(big_j + 1 >= self.from);
        if self.coef == 0.0 {
            return 0.0;
        }
        if self.ratio < 1.0 {
            let mut start = big_j;
            let mut explicit = 0.0;
            while self.ratio_bound(start) >= 1.0 {
                if start > MAX_EXPLICIT_TERMS {
                    return f64::INFINITY;
                }
                let next = (2 * start).max(start + 16);
                explicit += (start + 1..=next).map(|j| self.eval(j)).sum::<f64>();
                start = next;
            }
            let rho = self.ratio_bound(start);
            return explicit + self.eval(start + 1) / (1.0 - rho);
        }
        if self.ratio == 1.0 {
            let total = self.total_power();
            if total >= -1.0 {
                return f64::INFINITY;
            }
            let jf = big_j as f64;
            if self.factors.iter().all(|f| f.1 <= 0.0) {
                let smin = self
                    .factors
                    .iter()
                    .map(|f| f.0)
                    .fold(f64::INFINITY, f64::min);
                if jf + smin > 0.0 {
                    return self.coef * (jf + smin).powf(total + 1.0) / (-total - 1.0);
                }
            }
            // Σ_{j>J} C j^P with each (j+s)^p bounded by a multiple of j^p.
            let k: f64 = self
                .factors
                .iter()
                .map(|&(s, p)| {
                    if p > 0.0 {
                        (1.0 + s.max(0.0)).powf(p)
                    } else if s < 0.0 {
                        (1.0 + s).powf(p)
                    } else {
                        1.0
                    }
                })
                .product();
            let c = self.coef * k;
            return if big_j == 0 {
                c * (1.0 + 1.0 / (-total - 1.0))
            } else {
                c * jf.powf(total + 1.0) / (-total - 1.0)
            };
        }
        f64::INFINITY
    }

    /// `sup_{j > big_j} eval(j)`; `+∞` when unbounded.
    pub fn tail_sup(&self, big_j: usize) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let total_pos: f64 = self.factors.iter().filter(|f| f.1 > 0.0).map(|f| f.1).sum();
        if self.ratio > 1.0 || (self.ratio == 1.0 && self.total_power() > 0.0) {
            return f64::INFINITY;
        }
        if self.ratio == 1.0 && total_pos > 0.0 {
            // Mixed powers with a nonpositive total: each (j+s)^p is within a
            // constant multiple of j^p, and j^P is nonincreasing.
            let k: f64 = self
                .factors
                .iter()
                .map(|&(s, p)| {
                    if p > 0.0 {
                        (1.0 + s.max(0.0)).powf(p)
                    } else if s < 0.0 {
                        (1.0 + s).powf(p)
                    } else {
                        1.0
                    }
                })
                .product();
            return self.coef * k * ((big_j + 1) as f64).powf(self.total_power());
        }
        let mut j = big_j + 1;
        let mut best = self.eval(j);
        while self.ratio_bound(j - 1) > 1.0 && j < MAX_EXPLICIT_TERMS {
            j += 1;
            best = best.max(self.eval(j));
        }
        best
    }
}

/// Three-valued convergence classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Unknown,
        }
    }
}

/// Upper and lower monomial envelopes of a nonnegative sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Envelope {
    pub upper: Option<Monomial>,
    pub lower: Option<Monomial>,
}

impl Envelope {
    pub fn exact(m: Monomial) -> Self {
        Envelope {
            upper: Some(m.clone()),
            lower: Some(m),
        }
    }

    pub fn unknown() -> Self {
        Envelope::default()
    }

    pub fn starting_at(self, from: usize) -> Self {
        Envelope {
            upper: self.upper.map(|m| m.starting_at(from)),
            lower: self.lower.map(|m| m.starting_at(from)),
        }
    }

    pub fn mul(&self, other: &Envelope) -> Envelope {
        Envelope {
            upper: match (&self.upper, &other.upper) {
                (Some(a), Some(b)) => Some(a.mul(b)),
                _ => None,
            },
            lower: match (&self.lower, &other.lower) {
                (Some(a), Some(b)) => Some(a.mul(b)),
                _ => None,
            },
        }
    }

    pub fn scale(&self, c: f64) -> Envelope {
        Envelope {
            upper: self.upper.as_ref().map(|m| m.scale(c)),
            lower: self.lower.as_ref().map(|m| m.scale(c)),
        }
    }

    pub fn powf(&self, k: f64) -> Envelope {
        Envelope {
            upper: self.upper.as_ref().map(|m| m.powf(k)),
            lower: self.lower.as_ref().map(|m| m.powf(k)),
        }
    }

    pub fn convergence(&self) -> Verdict {
        if self.upper.as_ref().is_some_and(Monomial::summable) {
            Verdict::Holds
        } else if self.lower.as_ref().is_some_and(Monomial::divergent) {
            Verdict::Fails
        } else {
            Verdict::Unknown
        }
    }

    /// First index from which the upper envelope applies.
    pub fn upper_from(&self) -> Option<usize> {
        self.upper.as_ref().map(|m| m.from)
    }
}

/// A nonnegative series `Σ_{j ≥ 1} t_j` with exact terms and an envelope.
pub struct Series<'a> {
    term: Box<dyn Fn(usize) -> f64 + 'a>,
    pub envelope: Envelope,
}

impl<'a> Series<'a> {
    pub fn new<F: Fn(usize) -> f64 + 'a>(term: F, envelope: Envelope) -> Self {
        Series {
            term: Box::new(term),
            envelope,
        }
    }

    pub fn term(&self, j: usize) -> f64 {
        (self.term)(j)
    }

    pub fn verdict(&self) -> Verdict {
        self.envelope.convergence()
    }

    pub fn partial_sum(&self, big_j: usize) -> f64 {
        (1..=big_j).map(|j| self.term(j)).sum()
    }

    /// Upper bound on `Σ_{j > big_j} t_j`, summing exact terms up to the
    /// point where the upper envelope takes over.
    pub fn tail_bound(&self, big_j: usize) -> f64 {
        match &self.envelope.upper {
            None => f64::INFINITY,
            Some(m) if !m.summable() => f64::INFINITY,
            Some(m) => {
                let start = big_j.max(m.from.saturating_sub(1));
                if start - big_j > MAX_EXPLICIT_TERMS {
                    return f64::INFINITY;
                }
                let explicit: f64 = (big_j + 1..=start).map(|j| self.term(j)).sum();
                explicit + m.tail_sum(start)
            }
        }
    }

    /// Upper bound on `sup_{j > big_j} t_j`.
    pub fn tail_sup(&self, big_j: usize) -> f64 {
        match &self.envelope.upper {
            None => f64::INFINITY,
            Some(m) => {
                let start = big_j.max(m.from.saturating_sub(1));
                if start - big_j > MAX_EXPLICIT_TERMS {
                    return f64::INFINITY;
                }
                let explicit = (big_j + 1..=start)
                    .map(|j| self.term(j))
                    .fold(0.0, f64::max);
                explicit.max(m.tail_sup(start))
            }
        }
    }

    /// Sum with certified remainder: returns `(partial, tail_bound, J)` with
    /// the tail below `tol`, doubling `J` up to `max_j`.
    pub fn certified_sum(&self, tol: f64, max_j: usize) -> Option<(f64, f64, usize)> {
        if self.verdict() != Verdict::Holds {
            return None;
        }
        let mut big_j = self.envelope.upper_from().unwrap_or(1).max(1);
        loop {
            let tail = self.tail_bound(big_j);
            if tail <= tol {
                return Some((self.partial_sum(big_j), tail, big_j));
            }
            if big_j >= max_j {
                return None;
            }
            big_j = (2 * big_j).min(max_j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p_series_tail() {
        let m = Monomial::power(1.0, 0.0, -2.0);
        // Σ_{j>10} j^{-2} = ψ'(11) ≈ 0.09516633568
        let t = m.tail_sum(10);
        assert!(t >= 0.095_166_335_68 && t <= 0.1);
        assert!(m.summable());
        assert!(!Monomial::power(1.0, 0.0, -1.0).summable());
        assert!(Monomial::power(1.0, 0.0, -1.0).divergent());
    }

    #[test]
    fn geometric_tail() {
        let m = Monomial::geometric(1.0, 0.5);
        assert_relative_eq!(m.tail_sum(3), 0.125, epsilon = 1e-15);
        let m = Monomial {
            coef: 1.0,
            ratio: 0.5,
            factors: vec![(0.0, 3.0)],
            from: 1,
        };
        let exact: f64 = (6..400).map(|j| m.eval(j)).sum();
        assert!(m.tail_sum(5) >= exact);
        assert!(m.tail_sum(5) < 3.0 * exact);
    }

    #[test]
    fn sup_of_humped_monomial() {
        let m = Monomial {
            coef: 1.0,
            ratio: 0.5,
            factors: vec![(0.0, 3.0)],
            from: 1,
        };
        let brute = (1..200).map(|j| m.eval(j)).fold(0.0, f64::max);
        assert_relative_eq!(m.tail_sup(0), brute, max_relative = 1e-14);
    }

    #[test]
    fn certified_sum_of_basel() {
        let s = Series::new(
            |j| (j as f64).powi(-2),
            Envelope::exact(Monomial::power(1.0, 0.0, -2.0)),
        );
        let (v, tail, _) = s.certified_sum(1e-6, 10_000_000).unwrap();
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(v <= pi2_6 && pi2_6 <= v + tail);
    }
}
