//! Fourier weights `α_{ν,j}`: polynomial growth `(ν+1)^{r_j}`,
//! (sub-)exponential growth `2^{r_j ν^{b_j}}`, Mehler weights
//! `1/((1−β_j)β_j^ν)`, and explicit tables over any of these.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ui};

use crate::error::{Error, Result};
use crate::sequence::SequenceRule;
use crate::series::{Envelope, Series, Verdict};
use crate::shape::{beta_envelope, greater_from, MehlerParams, ShapeParams};

/// Search cap for the index `j₀` in the third summability condition.
pub const J0_CAP: usize = 1_000_000;

/// Rule for `α_{0,j}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Alpha0Rule {
    #[default]
    Ones,
    /// `α_{0,j} = 1 + d_j`
    OnePlus { deviation: SequenceRule },
}

impl Alpha0Rule {
    pub fn eval(&self, j: usize) -> f64 {
        match self {
            Alpha0Rule::Ones => 1.0,
            Alpha0Rule::OnePlus { deviation } => 1.0 + deviation.eval(j),
        }
    }

    fn is_ones(&self) -> bool {
        matches!(self, Alpha0Rule::Ones)
    }
}

/// The rule producing `α_{ν,j}` for `ν ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WeightRule {
    /// `(ν+1)^{r_j}`
    Pg { r: SequenceRule },
    /// `2^{r_j ν^{b_j}}`
    Eg { r: SequenceRule, b: SequenceRule },
    /// `1/((1−β_j)β_j^ν)` with `β_j` from `σ_j`; here `α_{0,j} = 1/(1−β_j)`.
    Mehler { shape: ShapeParams },
    /// `rows[j−1][ν]` overrides `α_{ν,j}` where present; everything else
    /// comes from `tail`.
    Table {
        rows: Vec<Vec<f64>>,
        tail: Box<WeightFamily>,
    },
}

/// A full weight family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFamily {
    #[serde(flatten)]
    pub rule: WeightRule,
    #[serde(default)]
    pub alpha0: Alpha0Rule,
}

/// The weights `ν ↦ α_ν` of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniWeights {
    pub alpha0: f64,
    pub kind: UniKind,
}

/// Weights for `ν ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UniKind {
    Pg {
        r: f64,
    },
    Eg {
        r: f64,
        b: f64,
    },
    Mehler {
        beta: f64,
    },
    /// `head[ν−1] = α_ν` for `1 ≤ ν ≤ head.len()`.
    Table {
        head: Vec<f64>,
        tail: Box<UniKind>,
    },
}

/// A weight value that may exceed the floating-point range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaValue {
    pub value: f64,
    pub overflow: bool,
}

impl UniKind {
    fn ln_alpha(&self, nu: usize) -> f64 {
        match self {
            UniKind::Pg { r } => r * ((nu + 1) as f64).ln(),
            UniKind::Eg { r, b } => r * (nu as f64).powf(*b) * std::f64::consts::LN_2,
            UniKind::Mehler { beta } => -(1.0 - beta).ln() - nu as f64 * beta.ln(),
            UniKind::Table { head, tail } => {
                if nu <= head.len() {
                    head[nu - 1].ln()
                } else {
                    tail.ln_alpha(nu)
                }
            }
        }
    }

    fn inv(&self, nu: usize) -> f64 {
        match self {
            UniKind::Pg { r } => {
                if r.fract() == 0.0 && *r > 0.0 && *r <= 32.0 {
                    ((nu + 1) as f64).powi(*r as i32).recip()
                } else {
                    (-r * ((nu + 1) as f64).ln()).exp()
                }
            }
            UniKind::Mehler { beta } => (1.0 - beta) * beta.powi(nu as i32),
            UniKind::Table { head, tail } => {
                if nu <= head.len() {
                    1.0 / head[nu - 1]
                } else {
                    tail.inv(nu)
                }
            }
            UniKind::Eg { .. } => (-self.ln_alpha(nu)).exp(),
        }
    }

    /// Upper bound on `Σ_{ν > n} α_ν^{−1}` for `n ≥ 0`; `+∞` if none is known.
    fn tail_inv_sum(&self, n: usize) -> f64 {
        match self {
            UniKind::Pg { r } => {
                if *r > 1.0 {
                    // Σ_{m ≥ n+2} m^{−r} ≤ ∫_{n+1}^∞ m^{−r} dm
                    ((n + 1) as f64).powf(1.0 - r) / (r - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            UniKind::Eg { r, b } => {
                if *r <= 0.0 || *b <= 0.0 {
                    return f64::INFINITY;
                }
                if *b >= 1.0 {
                    // consecutive ratios are at most 2^{−r}
                    self.inv(n + 1) / (1.0 - 2f64.powf(-r))
                } else {
                    // Σ_{ν>n} 2^{−rν^b} ≤ ∫_n^∞ 2^{−r t^b} dt
                    let rl = r * std::f64::consts::LN_2;
                    let a = 1.0 / b;
                    let g = if n == 0 {
                        gamma(a)
                    } else {
                        gamma_ui(a, rl * (n as f64).powf(*b))
                    };
                    (a * rl.powf(-a) * g * (1.0 + 1e-10)).max(0.0)
                }
            }
            UniKind::Mehler { beta } => beta.powi(n as i32 + 1),
            UniKind::Table { head, tail } => {
                let explicit: f64 = (n + 1..=head.len()).map(|nu| 1.0 / head[nu - 1]).sum();
                explicit + tail.tail_inv_sum(n.max(head.len()))
            }
        }
    }

    fn is_nondecreasing(&self) -> bool {
        match self {
            UniKind::Pg { r } => *r >= 0.0,
            UniKind::Eg { r, b } => *r >= 0.0 && *b >= 0.0,
            UniKind::Mehler { beta } => *beta > 0.0 && *beta < 1.0,
            UniKind::Table { head, tail } => {
                head.windows(2).all(|w| w[0] <= w[1])
                    && head
                        .last()
                        .is_none_or(|&last| last.ln() <= tail.ln_alpha(head.len() + 1))
                    && tail.is_nondecreasing()
            }
        }
    }
}

impl UniWeights {
    pub fn pg(r: f64) -> Self {
        UniWeights {
            alpha0: 1.0,
            kind: UniKind::Pg { r },
        }
    }

    pub fn eg(r: f64, b: f64) -> Self {
        UniWeights {
            alpha0: 1.0,
            kind: UniKind::Eg { r, b },
        }
    }

    /// Mehler weights with their own `α₀ = 1/(1−β)`.
    pub fn mehler(beta: f64) -> Self {
        UniWeights {
            alpha0: 1.0 / (1.0 - beta),
            kind: UniKind::Mehler { beta },
        }
    }

    pub fn with_alpha0(mut self, alpha0: f64) -> Self {
        self.alpha0 = alpha0;
        self
    }

    pub fn ln_alpha(&self, nu: usize) -> f64 {
        if nu == 0 {
            self.alpha0.ln()
        } else {
            self.kind.ln_alpha(nu)
        }
    }

    pub fn alpha(&self, nu: usize) -> AlphaValue {
        let ln = self.ln_alpha(nu);
        let value = ln.exp();
        AlphaValue {
            value,
            overflow: value.is_infinite(),
        }
    }

    /// `α_ν^{−1}`; underflows gracefully to zero.
    pub fn inv(&self, nu: usize) -> f64 {
        if nu == 0 {
            1.0 / self.alpha0
        } else {
            self.kind.inv(nu)
        }
    }

    /// Upper bound on `Σ_{ν > n} α_ν^{−1}`.
    pub fn tail_inv_sum(&self, n: usize) -> f64 {
        self.kind.tail_inv_sum(n)
    }

    /// Whether `α_ν ≤ α_{ν+1}` for all `ν ≥ 1`.
    pub fn is_nondecreasing(&self) -> bool {
        self.kind.is_nondecreasing()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::Validation(format!(
                "alpha0 must be positive and finite, got {}",
                self.alpha0
            )));
        }
        fn check(kind: &UniKind) -> Result<()> {
            match kind {
                UniKind::Pg { r } if !r.is_finite() => {
                    Err(Error::Validation("r must be finite".into()))
                }
                UniKind::Eg { r, b }
                    if !(r.is_finite() && b.is_finite() && *r > 0.0 && *b > 0.0) =>
                {
                    Err(Error::Validation(
                        "r and b must be positive and finite".into(),
                    ))
                }
                UniKind::Mehler { beta } if !(*beta > 0.0 && *beta < 1.0) => Err(
                    Error::Validation(format!("beta must lie in (0,1), got {beta}")),
                ),
                UniKind::Table { head, tail } => {
                    if head.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                        return Err(Error::Validation(
                            "table weights must be positive and finite".into(),
                        ));
                    }
                    check(tail)
                }
                _ => Ok(()),
            }
        }
        check(&self.kind)
    }
}

impl WeightFamily {
    pub fn pg(r: SequenceRule) -> Self {
        WeightFamily {
            rule: WeightRule::Pg { r },
            alpha0: Alpha0Rule::Ones,
        }
    }

    pub fn eg(r: SequenceRule, b: SequenceRule) -> Self {
        WeightFamily {
            rule: WeightRule::Eg { r, b },
            alpha0: Alpha0Rule::Ones,
        }
    }

    pub fn mehler(shape: ShapeParams) -> Self {
        WeightFamily {
            rule: WeightRule::Mehler { shape },
            alpha0: Alpha0Rule::Ones,
        }
    }

    pub fn with_alpha0(mut self, alpha0: Alpha0Rule) -> Self {
        self.alpha0 = alpha0;
        self
    }

    /// Structural checks that do not involve infinite series.
    pub fn check_well_formed(&self) -> Result<()> {
        if let Alpha0Rule::OnePlus { deviation } = &self.alpha0 {
            deviation.validate()?;
        }
        match &self.rule {
            WeightRule::Pg { r } => r.validate(),
            WeightRule::Eg { r, b } => r.validate().and(b.validate()),
            WeightRule::Mehler { shape } => {
                if !self.alpha0.is_ones() {
                    return Err(Error::Validation(
                        "Mehler weights fix alpha0 = 1/(1-beta); omit alpha0".into(),
                    ));
                }
                shape.validate()
            }
            WeightRule::Table { rows, tail } => {
                if !self.alpha0.is_ones() {
                    return Err(Error::Validation(
                        "tables carry alpha0 in column 0; omit alpha0".into(),
                    ));
                }
                if rows.iter().flatten().any(|&a| !(a > 0.0 && a.is_finite())) {
                    return Err(Error::Validation(
                        "table weights must be positive and finite".into(),
                    ));
                }
                tail.check_well_formed()
            }
        }
    }

    /// `α_{0,j}`.
    pub fn alpha0(&self, j: usize) -> Result<f64> {
        Ok(self.column(j)?.alpha0)
    }

    /// The weights of coordinate `j ≥ 1`.
    pub fn column(&self, j: usize) -> Result<UniWeights> {
        if j == 0 {
            return Err(Error::InputDomain("coordinates are numbered from 1".into()));
        }
        match &self.rule {
            WeightRule::Pg { r } => Ok(UniWeights {
                alpha0: self.alpha0.eval(j),
                kind: UniKind::Pg { r: r.eval(j) },
            }),
            WeightRule::Eg { r, b } => Ok(UniWeights {
                alpha0: self.alpha0.eval(j),
                kind: UniKind::Eg {
                    r: r.eval(j),
                    b: b.eval(j),
                },
            }),
            WeightRule::Mehler { shape } => Ok(UniWeights::mehler(
                MehlerParams::from_sigma(shape.sigma(j))?.beta,
            )),
            WeightRule::Table { rows, tail } => {
                let base = tail.column(j)?;
                match rows.get(j - 1) {
                    None => Ok(base),
                    Some(row) => {
                        let alpha0 = row.first().copied().unwrap_or(base.alpha0);
                        let head = if row.len() > 1 {
                            row[1..].to_vec()
                        } else {
                            Vec::new()
                        };
                        Ok(UniWeights {
                            alpha0,
                            kind: UniKind::Table {
                                head,
                                tail: Box::new(base.kind),
                            },
                        })
                    }
                }
            }
        }
    }

    /// `α_{ν,j}`, reported as `+∞` with a flag when it overflows.
    pub fn alpha(&self, nu: usize, j: usize) -> Result<AlphaValue> {
        Ok(self.column(j)?.alpha(nu))
    }

    /// Number of leading coordinates that are stated explicitly.
    pub fn explicit_len(&self) -> usize {
        match &self.rule {
            WeightRule::Pg { r } => r.tail_start() - 1,
            WeightRule::Eg { r, b } => (r.tail_start().max(b.tail_start())) - 1,
            WeightRule::Mehler { shape } => shape.tail_start() - 1,
            WeightRule::Table { rows, tail } => rows.len().max(tail.explicit_len()),
        }
        .max(match &self.alpha0 {
            Alpha0Rule::Ones => 0,
            Alpha0Rule::OnePlus { deviation } => deviation.tail_start() - 1,
        })
    }

    /// Envelope of `α_{ν,j}^{−1}` in `j`, for fixed `ν ≥ 1`.
    pub fn alpha_inv_envelope(&self, nu: usize) -> Envelope {
        debug_assert!(nu >= 1);
        let nf = nu as f64;
        match &self.rule {
            WeightRule::Pg { r } => r.exp_neg_envelope(nf + 1.0).starting_at(r.tail_start()),
            WeightRule::Eg { r, b } => {
                let from = r.tail_start().max(b.tail_start());
                let b_min = b.inf_from(from);
                let b_max = b.sup_from(from);
                // for r_j ≥ 0, ν ≥ 1 the weight is monotone in b_j
                let r_nonneg = greater_from(r, from, 0.0) == Verdict::Holds;
                let upper = if r_nonneg && b_min > 0.0 {
                    r.exp_neg_envelope(2f64.powf(nf.powf(b_min))).upper
                } else {
                    None
                };
                let lower = if r_nonneg && b_max.is_finite() {
                    r.exp_neg_envelope(2f64.powf(nf.powf(b_max))).lower
                } else {
                    None
                };
                Envelope { upper, lower }.starting_at(from)
            }
            WeightRule::Mehler { shape } => {
                // (1−β)β^ν ≤ β^ν ≤ (2σ²)^ν and ≥ (1−β_max)(κσ²)^ν
                let from = shape.tail_start();
                let beta = beta_envelope(shape);
                let s_max = shape.sup_from(from);
                let one_minus = if s_max.is_finite() {
                    1.0 - MehlerParams::from_sigma(s_max)
                        .map(|p| p.beta)
                        .unwrap_or(1.0)
                } else {
                    0.0
                };
                Envelope {
                    upper: beta.upper.map(|m| m.powf(nf)),
                    lower: beta.lower.map(|m| m.powf(nf).scale(one_minus)),
                }
                .starting_at(from)
            }
            WeightRule::Table { rows, tail } => {
                tail.alpha_inv_envelope(nu).starting_at(rows.len() + 1)
            }
        }
    }

    /// Upper bound on `Σ_{j > big_j} |α_{0,j} − 1|`.
    pub fn alpha0_deviation_tail(&self, big_j: usize) -> f64 {
        match &self.rule {
            WeightRule::Mehler { shape } => {
                // α₀ − 1 = β/(1−β) ≤ 2σ²/(1−β_max)
                let s_max = shape.sup_from(big_j + 1);
                let beta_max = match MehlerParams::from_sigma(s_max) {
                    Ok(p) => p.beta,
                    Err(_) => return f64::INFINITY,
                };
                2.0 / (1.0 - beta_max) * shape.sum_sq_tail(big_j)
            }
            WeightRule::Table { rows, tail } => {
                let explicit: f64 = (big_j + 1..=rows.len())
                    .map(|j| {
                        self.alpha0(j)
                            .map(|a| (a - 1.0).abs())
                            .unwrap_or(f64::INFINITY)
                    })
                    .sum();
                explicit + tail.alpha0_deviation_tail(big_j.max(rows.len()))
            }
            _ => match &self.alpha0 {
                Alpha0Rule::Ones => 0.0,
                Alpha0Rule::OnePlus { deviation } => {
                    let env = deviation
                        .power_envelope(1.0)
                        .starting_at(deviation.tail_start());
                    Series::new(|j| deviation.eval(j).abs(), env).tail_bound(big_j)
                }
            },
        }
    }

    /// Shape parameters behind Mehler weights.
    pub fn shape(&self) -> Option<&ShapeParams> {
        match &self.rule {
            WeightRule::Mehler { shape } => Some(shape),
            WeightRule::Table { tail, .. } => tail.shape(),
            _ => None,
        }
    }

    /// Smallest `b_j` over `j ≥ from` for exponential weights, `None` otherwise.
    pub fn eg_b_inf(&self, from: usize) -> Option<f64> {
        match &self.rule {
            WeightRule::Eg { b, .. } => Some(b.inf_from(from)),
            WeightRule::Table { rows, tail } => tail.eg_b_inf(from.max(rows.len() + 1)),
            _ => None,
        }
    }
}

/// Outcome of [`validate_weights`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    /// The defining constraints of the rule (e.g. `r_j > 1/2` and
    /// `Σ 2^{−r_j} < ∞` for polynomial growth).
    pub family: Verdict,
    pub h1: Verdict,
    pub h2: Verdict,
    pub h3: Verdict,
    pub j0: Option<usize>,
    pub certificates: Vec<String>,
}

impl ValidationResult {
    pub fn all_hold(&self) -> bool {
        self.family.holds() && self.h1.holds() && self.h2.holds() && self.h3.holds()
    }
}

fn alpha0_verdict(rule: &Alpha0Rule, certs: &mut Vec<String>) -> Verdict {
    match rule {
        Alpha0Rule::Ones => {
            certs.push("alpha0 = 1 for every coordinate".into());
            Verdict::Holds
        }
        Alpha0Rule::OnePlus { deviation } => {
            let pos = greater_from(deviation, 1, -1.0);
            let summable = deviation
                .power_envelope(1.0)
                .starting_at(deviation.tail_start())
                .convergence();
            certs.push(format!(
                "alpha0 positivity: {pos:?}; sum |alpha0 - 1| by monomial comparison: {summable:?}"
            ));
            pos.and(summable)
        }
    }
}

fn sum_two_pow_neg(r: &SequenceRule, certs: &mut Vec<String>) -> Verdict {
    let v = r
        .exp_neg_envelope(2.0)
        .starting_at(r.tail_start())
        .convergence();
    certs.push(format!("sum 2^(-r_j) by monomial comparison: {v:?}"));
    v
}

/// Smallest `j₀ ≤ J0_CAP` with `inf_{j ≥ j₀} s_j ≥ t`.
fn first_index_with_inf_at_least(rule: &SequenceRule, t: f64) -> Option<usize> {
    let mut hi = 1usize;
    while rule.inf_from(hi) < t {
        if hi >= J0_CAP {
            return None;
        }
        hi = (hi * 2).min(J0_CAP);
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Some(1);
    }
    // inf_from(lo) < t ≤ inf_from(hi)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if rule.inf_from(mid) >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `(c, j₀)` with `r_j ≥ c log₂ j` for all `j ≥ j₀ ≥ 2`.
pub fn log_lower_certificate(rule: &SequenceRule) -> Option<(f64, usize)> {
    let start = rule.tail_start().max(2);
    let e_ln2 = std::f64::consts::E * std::f64::consts::LN_2;
    match rule.parametric() {
        SequenceRule::LogLinear { a, b, shift } if *b > 0.0 => {
            let shift_loss = if *shift < 0.0 {
                b * (1.0 + shift).log2()
            } else {
                0.0
            };
            let need = -2.0 * (a + shift_loss) / b;
            let j0 = if need <= 1.0 {
                2.0
            } else {
                2f64.powf(need).ceil()
            };
            (j0 <= J0_CAP as f64).then(|| (b / 2.0, (j0 as usize).max(start)))
        }
        SequenceRule::PowerLaw { a, p } if *a > 0.0 && *p > 0.0 => {
            Some(((a * p * e_ln2).min(1.0), start))
        }
        SequenceRule::Geometric { a, q } if *a > 0.0 && *q > 1.0 => {
            Some(((a * (q - 1.0) * e_ln2).min(1.0), start))
        }
        _ => None,
    }
}

/// Checks the three summability and monotonicity conditions on a weight
/// family, returning a three-valued verdict for each.
pub fn validate_weights(w: &WeightFamily) -> Result<ValidationResult> {
    w.check_well_formed()?;
    let mut certs = Vec::new();
    let result = match &w.rule {
        WeightRule::Pg { r } => {
            let r_ok = greater_from(r, 1, 0.5);
            certs.push(format!("r_j > 1/2 for all j: {r_ok:?}"));
            let s = sum_two_pow_neg(r, &mut certs);
            let h2 = alpha0_verdict(&w.alpha0, &mut certs);
            let (h3, j0) = match s {
                Verdict::Fails => (Verdict::Fails, None),
                Verdict::Unknown => (Verdict::Unknown, None),
                Verdict::Holds => match first_index_with_inf_at_least(r, 2.0) {
                    Some(j0) => {
                        certs.push(format!(
                            "r_j >= 2 for j >= {j0}, so sum_nu (nu+1)^(-r_j) <= 3 * 2^(-r_j) there"
                        ));
                        (Verdict::Holds, Some(j0))
                    }
                    None => (Verdict::Unknown, None),
                },
            };
            ValidationResult {
                family: r_ok.and(s).and(h2),
                h1: r_ok,
                h2,
                h3,
                j0,
                certificates: Vec::new(),
            }
        }
        WeightRule::Eg { r, b } => {
            let r_ok = greater_from(r, 1, 0.0);
            let b_inf = b.inf_from(1);
            let b_ok = Verdict::from_bool(b_inf > 0.0);
            certs.push(format!(
                "r_j > 0: {r_ok:?}; inf b_j = {b_inf} > 0: {b_ok:?}"
            ));
            let s = sum_two_pow_neg(r, &mut certs);
            let h2 = alpha0_verdict(&w.alpha0, &mut certs);
            let (h3, j0) = match s.and(b_ok) {
                Verdict::Fails => (Verdict::Fails, None),
                Verdict::Unknown => (Verdict::Unknown, None),
                Verdict::Holds => match log_lower_certificate(r) {
                    Some((c, j0)) => {
                        certs.push(format!("r_j >= {c} log2 j for j >= {j0}"));
                        (Verdict::Holds, Some(j0))
                    }
                    None => (Verdict::Unknown, None),
                },
            };
            let h1 = r_ok.and(b_ok);
            ValidationResult {
                family: h1.and(s).and(h2),
                h1,
                h2,
                h3,
                j0,
                certificates: Vec::new(),
            }
        }
        WeightRule::Mehler { shape } => {
            let pos = shape.positivity();
            let s = shape.sum_sq().verdict();
            certs.push(format!(
                "sigma_j > 0: {pos:?}; sum sigma_j^2 by monomial comparison: {s:?}"
            ));
            certs.push("alpha_(0,j) - 1 = beta_j/(1-beta_j) and sum_nu alpha_(nu,j)^(-1) = beta_j, both comparable to sigma_j^2".into());
            ValidationResult {
                family: pos.and(s),
                h1: pos,
                h2: s,
                h3: s,
                j0: s.holds().then_some(1),
                certificates: Vec::new(),
            }
        }
        WeightRule::Table { rows, tail } => {
            let inner = validate_weights(tail)?;
            certs.extend(inner.certificates.iter().cloned());
            let mut monotone = true;
            for j in 1..=rows.len() {
                monotone &= w.column(j)?.is_nondecreasing();
            }
            certs.push(format!(
                "explicit rows nondecreasing in nu >= 1: {monotone}"
            ));
            ValidationResult {
                family: inner.family,
                h1: inner.h1.and(Verdict::from_bool(monotone)),
                h2: inner.h2,
                h3: inner.h3,
                j0: inner.j0,
                certificates: Vec::new(),
            }
        }
    };
    Ok(ValidationResult {
        certificates: certs,
        ..result
    })
}

/// Certified products `c_min = Π min(α_{0,j}, 1)` and `c_max = Π max(α_{0,j}, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductConstants {
    pub c_min: f64,
    pub c_max: f64,
    pub c_min_interval: (f64, f64),
    pub c_max_interval: (f64, f64),
    pub factors_used: usize,
}

/// Computes `c_min` and `c_max` with multiplicative error at most `tol`.
pub fn cmin_cmax(w: &WeightFamily, tol: f64) -> Result<ProductConstants> {
    let v = validate_weights(w)?;
    if !v.h2.holds() {
        return Err(Error::Unsupported(
            "summability of |alpha0 - 1| is not certified".into(),
        ));
    }
    let mut big_j = w.explicit_len().max(16);
    loop {
        let d = w.alpha0_deviation_tail(big_j);
        let up = d.exp_m1();
        let down = if d < 1.0 {
            -(-d / (1.0 - d)).exp_m1()
        } else {
            f64::INFINITY
        };
        if up <= tol && down <= tol {
            let mut pmin = 1.0;
            let mut pmax = 1.0;
            for j in 1..=big_j {
                let a = w.alpha0(j)?;
                pmin *= a.min(1.0);
                pmax *= a.max(1.0);
            }
            return Ok(ProductConstants {
                c_min: pmin,
                c_max: pmax,
                c_min_interval: (pmin * (1.0 - down), pmin),
                c_max_interval: (pmax, pmax * (1.0 + up)),
                factors_used: big_j,
            });
        }
        if big_j >= 1 << 24 {
            return Err(Error::Truncation {
                achieved: up.max(down),
                target: tol,
                terms: big_j,
            });
        }
        big_j *= 2;
    }
}

/// Norms `(c_min^{−1/2}, c_max^{1/2})` of the identity maps `H(K) → H(K′)` and
/// `H(K′) → H(K)`, where `K′` uses `α_{0,j} = 1`.
pub fn embedding_norms(w: &WeightFamily, tol: f64) -> Result<(f64, f64)> {
    let v = validate_weights(w)?;
    if !(v.h1.holds() && v.h2.holds() && v.h3.holds()) {
        return Err(Error::Unsupported(
            "weight conditions are not all certified".into(),
        ));
    }
    let c = cmin_cmax(w, tol)?;
    Ok((c.c_min.powf(-0.5), c.c_max.sqrt()))
}

/// Single-coordinate norms `(min(α₀,1)^{−1/2}, max(α₀,1)^{1/2})`.
pub fn univariate_embedding_norms(alpha0: f64) -> (f64, f64) {
    (alpha0.min(1.0).powf(-0.5), alpha0.max(1.0).sqrt())
}

/// `r̂ = liminf r_j / ln j` and the comparison with `1/ln 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhatVerdict {
    pub rhat: f64,
    /// `r̂ > 1/ln 2`, which implies `Σ 2^{−r_j} < ∞`.
    pub sufficient: Verdict,
    /// `r̂ ≥ 1/ln 2`, which `Σ 2^{−r_j} < ∞` requires.
    pub necessary: Verdict,
}

pub fn rhat_condition(r: &SequenceRule) -> RhatVerdict {
    match r.parametric() {
        SequenceRule::LogLinear { b, .. } => RhatVerdict {
            rhat: b / std::f64::consts::LN_2,
            sufficient: Verdict::from_bool(*b > 1.0),
            necessary: Verdict::from_bool(*b >= 1.0),
        },
        _ => match r.log_growth() {
            Some(g) => {
                let t = 1.0 / std::f64::consts::LN_2;
                RhatVerdict {
                    rhat: g,
                    sufficient: Verdict::from_bool(g > t),
                    necessary: Verdict::from_bool(g >= t),
                }
            }
            None => RhatVerdict {
                rhat: f64::NAN,
                sufficient: Verdict::Unknown,
                necessary: Verdict::Unknown,
            },
        },
    }
}
