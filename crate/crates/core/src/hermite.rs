//! L²(μ₀)-normalized (probabilists') Hermite polynomials.
//!
//! Values come from the normalized three-term recurrence
//! `h_{ν+1}(x) = (x·h_ν(x) − √ν·h_{ν−1}(x)) / √(ν+1)`, which is stable for
//! every degree used in this crate. The explicit alternating sum is kept as an
//! oracle only.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Largest degree accepted by [`hermite_closed_form`].
pub const CLOSED_FORM_MAX_DEGREE: usize = 40;

/// Relative slack allowed when checking the proven inequalities.
pub const BOUND_SLACK: f64 = 1e-12;

/// `h_0(x), …, h_N(x)` at a single abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteEval {
    pub x: f64,
    pub max_degree: usize,
    pub values: Vec<f64>,
}

impl HermiteEval {
    pub fn get(&self, nu: usize) -> f64 {
        self.values[nu]
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InputDomain(format!(
            "abscissa must be finite, got {x}"
        )))
    }
}

/// Streams `h_0(x), h_1(x), …` without storing them.
#[derive(Debug, Clone)]
pub struct HermiteIter {
    x: f64,
    prev: f64,
    curr: f64,
    nu: usize,
}

impl HermiteIter {
    pub fn new(x: f64) -> Self {
        HermiteIter {
            x,
            prev: 0.0,
            curr: 1.0,
            nu: 0,
        }
    }
}

impl Iterator for HermiteIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.curr;
        let nu = self.nu as f64;
        let next = (self.x * self.curr - nu.sqrt() * self.prev) / (nu + 1.0).sqrt();
        self.prev = self.curr;
        self.curr = next;
        self.nu += 1;
        Some(out)
    }
}

/// Streams `(h_ν(x), h_ν(y))`, sharing the square roots of the recurrence.
///
/// Values may differ from [`HermiteIter`] in the last bits, since the
/// division is replaced by a multiplication with `1/√(ν+1)`.
#[derive(Debug, Clone)]
pub struct HermitePairIter {
    x: f64,
    y: f64,
    prev: (f64, f64),
    curr: (f64, f64),
    root: f64,
    nu: usize,
}

impl HermitePairIter {
    pub fn new(x: f64, y: f64) -> Self {
        HermitePairIter {
            x,
            y,
            prev: (0.0, 0.0),
            curr: (1.0, 1.0),
            root: 0.0,
            nu: 0,
        }
    }
}

impl Iterator for HermitePairIter {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let out = self.curr;
        let next_root = ((self.nu + 1) as f64).sqrt();
        let inv = 1.0 / next_root;
        let (px, py) = self.prev;
        let (cx, cy) = self.curr;
        self.prev = self.curr;
        self.curr = (
            (self.x * cx - self.root * px) * inv,
            (self.y * cy - self.root * py) * inv,
        );
        self.root = next_root;
        self.nu += 1;
        Some(out)
    }
}

/// Evaluates `h_0(x), …, h_N(x)` by the normalized recurrence.
///
/// The recurrence is odd-symmetric in `x`, so `h_ν(−x) = (−1)^ν h_ν(x)` holds
/// bit for bit.
pub fn hermite_all(x: f64, max_degree: usize) -> Result<HermiteEval> {
    check_finite(x)?;
    let values: Vec<f64> = HermiteIter::new(x).take(max_degree + 1).collect();
    Ok(HermiteEval {
        x,
        max_degree,
        values,
    })
}

/// Single value `h_ν(x)` by the recurrence.
pub fn hermite(x: f64, degree: usize) -> Result<f64> {
    check_finite(x)?;
    Ok(HermiteIter::new(x).nth(degree).unwrap_or(0.0))
}

/// Explicit alternating sum
/// `h_ν(x) = √(ν!) Σ_{k ≤ ν/2} (−1)^k x^{ν−2k} / (2^k k! (ν−2k)!)`.
///
/// Coefficients are formed in log-space for degrees above 20. Used as an
/// oracle against [`hermite_all`]; it loses relative accuracy through
/// cancellation as the degree grows.
pub fn hermite_closed_form(x: f64, degree: usize) -> Result<f64> {
    check_finite(x)?;
    if degree > CLOSED_FORM_MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree,
            max: CLOSED_FORM_MAX_DEGREE,
        });
    }
    let nu = degree;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 0..=nu / 2 {
        let p = nu - 2 * k;
        if x == 0.0 && p > 0 {
            continue;
        }
        let sign = if (k % 2 == 1) ^ (x < 0.0 && p % 2 == 1) {
            -1.0
        } else {
            1.0
        };
        let magnitude = if nu <= 20 {
            let denom = 2f64.powi(k as i32) * factorial(k) * factorial(p);
            factorial(nu).sqrt() * x.abs().powi(p as i32) / denom
        } else {
            let ln_x = if p == 0 { 0.0 } else { p as f64 * x.abs().ln() };
            (0.5 * ln_factorial(nu as u64) + ln_x
                - k as f64 * std::f64::consts::LN_2
                - ln_factorial(k as u64)
                - ln_factorial(p as u64))
            .exp()
        };
        // Neumaier summation
        let term = sign * magnitude;
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    Ok(sum + comp)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Cramér's inequality `|h_ν(x)| ≤ exp(x²/4)` for every `ν ≤ max_degree`.
pub fn check_cramer(x: f64, max_degree: usize) -> Result<bool> {
    check_finite(x)?;
    let bound = (x * x / 4.0).exp() * (1.0 + BOUND_SLACK);
    Ok(HermiteIter::new(x)
        .take(max_degree + 1)
        .all(|h| h.abs() <= bound))
}

/// The crude growth bound `|h_ν(x)| ≤ 2^ν max(1, |x|^ν)`, compared in log-space.
pub fn check_growth_bound(x: f64, max_degree: usize) -> Result<bool> {
    check_finite(x)?;
    let ln_z = x.abs().max(1.0).ln();
    Ok(HermiteIter::new(x)
        .take(max_degree + 1)
        .enumerate()
        .all(|(nu, h)| {
            if h == 0.0 {
                return true;
            }
            let bound = nu as f64 * (std::f64::consts::LN_2 + ln_z);
            h.abs().ln() <= bound + BOUND_SLACK
        }))
}

/// `max_{ν ≤ N} ν^{1/4} |h_ν(x)|`, a finite-range look at the bounded decay
/// of Hermite polynomials. Reported, never asserted against a limit.
pub fn decay_proxy(x: f64, max_degree: usize) -> Result<f64> {
    check_finite(x)?;
    Ok(HermiteIter::new(x)
        .take(max_degree + 1)
        .enumerate()
        .map(|(nu, h)| (nu as f64).powf(0.25) * h.abs())
        .fold(0.0, f64::max))
}
