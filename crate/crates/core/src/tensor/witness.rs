//! A point in `∩_{ν≤ν₀} ℓ^{2ν}(a_ν^{−1})` outside the domain, for polynomial
//! or sub-exponential weight growth.
//!
//! With `2^{r_j} ≥ j^{1+ε}` for `j ≥ j₀` and `1 < a < 1+ε`, put
//! `x_j^{2ν₀} = 2^{r_j} j^{−a}`. Then `|x_j| ≥ 1`, and for `ν ≤ ν₀` each term
//! `α_{ν,j}^{−1} x_j^{2ν}` is at most `2^{−r_j} x_j^{2ν₀} = j^{−a}`. With
//! `δ = 1 − a/(1+ε)` the terms at `ν = kν₀` are at least 1 once
//! `2^{kδ} ≥ 1 + kν₀` (polynomial growth) or `kδ ≥ (kν₀)^{1−ε}`
//! (sub-exponential growth with `b_j ≤ 1−ε`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{PointTail, SeqPoint};
use crate::sequence::SequenceRule;
use crate::series::Verdict;
use crate::weights::{rhat_condition, WeightFamily, WeightRule};

const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSum {
    pub nu: usize,
    pub partial: f64,
    pub bound: f64,
    /// Every term obeys the comparison with `j^{−a}`.
    pub termwise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub nu0: usize,
    pub epsilon: f64,
    pub a: f64,
    pub delta: f64,
    pub k: usize,
    pub j0: usize,
    pub checked_up_to: usize,
    /// Closed form of the point when the exponent rule allows one.
    pub point: Option<SeqPoint>,
    pub comparisons: Vec<ComparisonSum>,
    /// Smallest `α_{kν₀,j}^{−1} x_j^{2kν₀}` over `j₀ ≤ j ≤ J`.
    pub min_divergent_term: f64,
    pub min_abs_coord: f64,
    pub valid: bool,
    pub certificates: Vec<String>,
    #[serde(skip)]
    r: Option<SequenceRule>,
}

impl Witness {
    /// `x_j`, zero before `j₀`.
    pub fn coord(&self, j: usize) -> f64 {
        if j < self.j0 {
            return 0.0;
        }
        let r = self.r.as_ref().expect("exponent rule");
        ((r.eval(j) * std::f64::consts::LN_2 - self.a * (j as f64).ln()) / (2.0 * self.nu0 as f64))
            .exp()
    }
}

enum Growth {
    Polynomial,
    SubExponential { b: SequenceRule },
}

/// Largest `ε` allowed by the growth of `r_j`, and the index past which
/// `r_j − (1+ε) log₂ j` is nondecreasing.
fn growth_margin(r: &SequenceRule) -> Option<(f64, Box<dyn Fn(f64) -> f64>)> {
    match r.parametric().clone() {
        SequenceRule::LogLinear { a: _, b, shift } if b > 1.0 => Some((
            b - 1.0,
            Box::new(move |eps: f64| {
                if b > 1.0 + eps && shift > 0.0 {
                    (1.0 + eps) * shift / (b - 1.0 - eps)
                } else {
                    1.0
                }
            }),
        )),
        SequenceRule::PowerLaw { a, p } if a > 0.0 && p > 0.0 => Some((
            f64::INFINITY,
            Box::new(move |eps: f64| {
                ((1.0 + eps) / (a * p * std::f64::consts::LN_2)).powf(1.0 / p)
            }),
        )),
        SequenceRule::Geometric { a, q } if a > 0.0 && q > 1.0 => Some((
            f64::INFINITY,
            Box::new(move |eps: f64| {
                let mut j = 1.0f64;
                while a * q.powf(j) * q.ln() * j * std::f64::consts::LN_2 < 1.0 + eps {
                    j *= 2.0;
                }
                j
            }),
        )),
        _ => None,
    }
}

/// First `j ≥ j_mono` with `r_j ≥ (1+ε) log₂ j`; the difference is
/// nondecreasing from `j_mono` on, so the inequality persists.
fn find_j0(r: &SequenceRule, eps: f64, j_mono: f64, start: usize) -> Option<usize> {
    let g = |j: usize| r.eval(j) - (1.0 + eps) * (j as f64).log2();
    let lo = (j_mono.ceil().max(1.0) as usize).max(start);
    if g(lo) >= 0.0 {
        // Below the monotone range the inequality may still hold; scan down.
        let mut j = lo;
        while j > start && g(j - 1) >= 0.0 && (j - 1) as f64 >= j_mono {
            j -= 1;
        }
        return Some(j);
    }
    let mut hi = lo;
    while g(hi) < 0.0 {
        if hi > 1 << 40 {
            return None;
        }
        hi *= 2;
    }
    let mut l = hi / 2;
    while hi - l > 1 {
        let mid = (l + hi) / 2;
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            l = mid;
        }
    }
    Some(hi)
}

pub fn pg_strict_inclusion_witness(
    weights: &WeightFamily,
    nu0: usize,
    a: Option<f64>,
    check_up_to: usize,
) -> Result<Witness> {
    if nu0 == 0 {
        return Err(Error::InputDomain("nu0 must be at least 1".into()));
    }
    let (r, growth) = match &weights.rule {
        WeightRule::Pg { r } => (r.clone(), Growth::Polynomial),
        WeightRule::Eg { r, b } => (r.clone(), Growth::SubExponential { b: b.clone() }),
        _ => {
            return Err(Error::Unsupported(
                "witness needs polynomial or exponential growth weights".into(),
            ))
        }
    };
    if rhat_condition(&r).sufficient != Verdict::Holds {
        return Err(Error::Unsupported(
            "liminf r_j / ln j must exceed 1/ln 2".into(),
        ));
    }
    let (eps_growth, mono) = growth_margin(&r)
        .ok_or_else(|| Error::Unsupported("no closed-form growth margin for r_j".into()))?;
    let start = r.tail_start();
    let mut eps = match &growth {
        Growth::Polynomial => eps_growth.min(1.0),
        Growth::SubExponential { b } => {
            let b_sup = b.sup_from(b.tail_start().max(start));
            if !(b_sup < 1.0) {
                return Err(Error::Unsupported(
                    "sub-exponential growth needs limsup b_j < 1".into(),
                ));
            }
            eps_growth.min(1.0 - b_sup)
        }
    };
    // At the boundary value of ε the inequality may fail for every j; halve
    // until an index is found.
    let mut j0 = None;
    for _ in 0..8 {
        j0 = find_j0(&r, eps, mono(eps), start);
        if j0.is_some() {
            break;
        }
        eps /= 2.0;
    }
    let j0 = j0.ok_or_else(|| Error::Unsupported("could not locate j0".into()))?;
    let a = a.unwrap_or(1.0 + eps / 2.0);
    if !(a > 1.0 && a < 1.0 + eps) {
        return Err(Error::InputDomain(format!(
            "a must lie in (1, {}), got {a}",
            1.0 + eps
        )));
    }
    let delta = 1.0 - a / (1.0 + eps);
    let n0 = nu0 as f64;
    let k = (1..=1_000_000usize)
        .find(|&k| {
            let kf = k as f64;
            match growth {
                Growth::Polynomial => kf * delta >= (1.0 + kf * n0).log2(),
                Growth::SubExponential { .. } => kf * delta >= (kf * n0).powf(1.0 - eps),
            }
        })
        .ok_or_else(|| Error::Unsupported("no admissible k below 10^6".into()))?;

    let point = match r.parametric() {
        SequenceRule::LogLinear { a: ar, b, shift } if *shift == 0.0 && start <= j0 => {
            Some(SeqPoint::new(
                vec![0.0; j0 - 1],
                PointTail::Power {
                    a: (ar * std::f64::consts::LN_2 / (2.0 * n0)).exp(),
                    p: (a - b) / (2.0 * n0),
                },
            ))
        }
        _ => None,
    };
    let mut w = Witness {
        nu0,
        epsilon: eps,
        a,
        delta,
        k,
        j0,
        checked_up_to: check_up_to,
        point,
        comparisons: Vec::new(),
        min_divergent_term: f64::INFINITY,
        min_abs_coord: f64::INFINITY,
        valid: false,
        certificates: Vec::new(),
        r: Some(r.clone()),
    };

    let mut growth_ok = true;
    let mut sums = vec![0.0; nu0];
    let mut termwise = vec![true; nu0];
    let big_nu = k * nu0;
    for j in j0..=check_up_to {
        let col = weights.column(j)?;
        let ln_x = w.coord(j).ln();
        growth_ok &= r.eval(j) >= (1.0 + eps) * (j as f64).log2() - SLACK;
        if let Growth::SubExponential { b } = &growth {
            growth_ok &= b.eval(j) <= 1.0 - eps + SLACK;
        }
        w.min_abs_coord = w.min_abs_coord.min(w.coord(j));
        let cmp = -a * (j as f64).ln();
        for nu in 1..=nu0 {
            let ln_term = -col.ln_alpha(nu) + 2.0 * nu as f64 * ln_x;
            termwise[nu - 1] &= ln_term <= cmp + SLACK * cmp.abs().max(1.0);
            sums[nu - 1] += ln_term.exp();
        }
        let ln_div = -col.ln_alpha(big_nu) + 2.0 * big_nu as f64 * ln_x;
        w.min_divergent_term = w.min_divergent_term.min(ln_div.exp());
    }
    let jf = j0 as f64;
    let zeta_tail = jf.powf(-a) + jf.powf(1.0 - a) / (a - 1.0);
    for nu in 1..=nu0 {
        w.comparisons.push(ComparisonSum {
            nu,
            partial: sums[nu - 1],
            bound: zeta_tail,
            termwise: termwise[nu - 1],
        });
    }
    let coords_ok = w.min_abs_coord >= 1.0 - SLACK;
    let div_ok = w.min_divergent_term >= 1.0 - SLACK;
    let cmp_ok = w
        .comparisons
        .iter()
        .all(|c| c.termwise && c.partial <= c.bound * (1.0 + SLACK));
    w.certificates.push(format!(
        "2^(r_j) >= j^(1+eps) with eps = {eps} for {j0} <= j <= {check_up_to}: {growth_ok}"
    ));
    w.certificates
        .push(format!("|x_j| >= 1 on the same range: {coords_ok}"));
    w.certificates.push(format!(
        "terms with nu <= {nu0} are at most j^(-{a}); sums bounded by {zeta_tail:.6e}: {cmp_ok}"
    ));
    w.certificates.push(format!(
        "terms at nu = {big_nu} (k = {k}, delta = {delta:.6}) are at least {:.6e}: {div_ok}",
        w.min_divergent_term
    ));
    w.valid = growth_ok && coords_ok && div_ok && cmp_ok;
    Ok(w)
}
