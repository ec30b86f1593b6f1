//! Product and superposition evaluation of Hermite and Gaussian products.
//!
//! Write `k_j = α_{0,j}^{−1}(1 + a_j)` with `a_j = α_{0,j} k*_j(x_j,y_j)`.
//! Cauchy–Schwarz for `k*_j` gives `|a_j| ≤ α_{0,j}(k*_j(x_j,x_j) + k*_j(y_j,y_j))/2`,
//! so the factors past `J` multiply to within `exp(±δ)` of 1, where `δ`
//! collects the deviation of `α_{0,j}` from 1 and the diagonal tails.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::HermiteIter;
use crate::kernels1d::UniHermiteKernel;
use crate::point::SeqPoint;
use crate::quadrature::mu_sample;
use crate::series::Verdict;

use super::domain::{gauss_domain_check, gauss_exponent, hermite_domain_check};
use super::tails::diag_tail_bound;
use super::{split_weight, Membership, TensorGaussKernel, TensorHermiteKernel, TensorValue};

const MAX_COORDS: usize = 1 << 22;
const GAUSS_TOL: f64 = 1e-13;

/// Truncation index `J` with the tail factor certified to `exp(±δ)`, `δ ≤ target`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailPlan {
    pub big_j: usize,
    /// Bound on `|ln Π_{j>J} α_{0,j}^{−1}|`.
    pub ld: f64,
    /// Bound on `Σ_{j>J} |a_j|`.
    pub ab: f64,
}

impl TailPlan {
    pub fn delta(&self) -> f64 {
        self.ld
            + if self.ab < 1.0 {
                self.ab / (1.0 - self.ab)
            } else {
                f64::INFINITY
            }
    }
}

pub(crate) fn tail_plan(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
    y: &SeqPoint,
    target: f64,
    min_j: usize,
) -> Result<TailPlan> {
    let mut big_j = k.explicit_len().max(x.dim()).max(y.dim()).max(min_j).max(1);
    loop {
        let dev = k.alpha0_deviation_tail(big_j);
        let ld = k.alpha0_log_tail(big_j);
        let dx = diag_tail_bound(k, x, big_j);
        let dy = if x == y {
            dx
        } else {
            diag_tail_bound(k, y, big_j)
        };
        let plan = TailPlan {
            big_j,
            ld,
            ab: (1.0 + dev) * (dx + dy) / 2.0,
        };
        if plan.delta() <= target {
            return Ok(plan);
        }
        if big_j >= MAX_COORDS {
            return Err(Error::Truncation {
                achieved: plan.delta(),
                target,
                terms: big_j,
            });
        }
        big_j *= 2;
    }
}

/// Univariate centered values for `j ≤ J` with individual error bounds.
pub(crate) struct Factors {
    pub plan: TailPlan,
    pub alpha0: Vec<f64>,
    pub kstar: Vec<f64>,
    pub tau: Vec<f64>,
    pub terms: usize,
}

impl Factors {
    pub fn big_j(&self) -> usize {
        self.plan.big_j
    }
}

fn centered(
    k: &TensorHermiteKernel,
    j: usize,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<(f64, f64, usize)> {
    let uk = UniHermiteKernel {
        weights: k.column(j)?,
        trunc: k.trunc,
    };
    let n = uk.degree_for(x, y, tol, k.trunc.max_terms)?;
    Ok((uk.partial_sum_from1(x, y, n), uk.tail_bound(x, y, n), n))
}

/// Evaluates every factor so that the propagated product error stays near
/// `0.4 · tol`: a coarse pass sizes the factors, then each gets tolerance
/// `0.4 · tol · w_j / Π_{i≠j} U_i` with `U_i` the coarse magnitude bound.
pub(crate) fn compute_factors(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
    y: &SeqPoint,
    tol: f64,
    min_j: usize,
) -> Result<Factors> {
    let plan = tail_plan(k, x, y, tol / 4.0, min_j)?;
    let big_j = plan.big_j;
    let mut alpha0 = Vec::with_capacity(big_j);
    let mut coarse = Vec::with_capacity(big_j);
    let mut terms = 0;
    for j in 1..=big_j {
        let a0 = k.column(j)?.alpha0;
        let (v, t, n) = centered(k, j, x.coord(j), y.coord(j), 1e-3 * split_weight(j))?;
        alpha0.push(a0);
        coarse.push((v, t));
        terms += n + 1;
    }
    let ln_u: Vec<f64> = coarse
        .iter()
        .zip(&alpha0)
        .map(|(&(v, t), a0)| ((1.0 / a0 + v).abs() + t).ln())
        .collect();
    let ln_total: f64 = ln_u.iter().sum();
    let mut kstar = Vec::with_capacity(big_j);
    let mut tau = Vec::with_capacity(big_j);
    for j in 1..=big_j {
        let target = 0.4 * tol * split_weight(j) * (ln_u[j - 1] - ln_total).exp();
        let (v, t) = coarse[j - 1];
        if t <= target {
            kstar.push(v);
            tau.push(t);
        } else {
            let (v, t, n) = centered(k, j, x.coord(j), y.coord(j), target)?;
            kstar.push(v);
            tau.push(t);
            terms += n + 1;
        }
    }
    Ok(Factors {
        plan,
        alpha0,
        kstar,
        tau,
        terms,
    })
}

fn require_in(k: &TensorHermiteKernel, p: &SeqPoint, name: &str) -> Result<()> {
    let v = hermite_domain_check(k, p)?;
    match v.verdict {
        Membership::In => Ok(()),
        m => Err(Error::Domain(format!(
            "point {name} is not certified in the domain ({m:?}): {}",
            v.certificate
        ))),
    }
}

/// `K(x,y)` (or `K′`) as a finite product with certified remainder.
pub fn tensor_hermite_eval(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
    y: &SeqPoint,
) -> Result<TensorValue> {
    require_in(k, x, "x")?;
    require_in(k, y, "y")?;
    let f = compute_factors(k, x, y, k.trunc.abs_tol, 1)?;
    Ok(product_from(&f))
}

pub(crate) fn product_from(f: &Factors) -> TensorValue {
    let mut p = 1.0f64;
    let mut e = 0.0f64;
    for j in 0..f.big_j() {
        let u = 1.0 / f.alpha0[j] + f.kstar[j];
        e = e * (u.abs() + f.tau[j]) + p.abs() * f.tau[j];
        p *= u;
    }
    let delta = f.plan.delta();
    let error_bound = e * delta.exp() + p.abs() * delta.exp_m1();
    TensorValue {
        value: p,
        error_bound,
        coords_used: f.big_j(),
        terms_used: f.terms,
    }
}

/// `Σ_{u ⊆ A, |u| ≤ m} c_u k*_u(x,y)` with `c_u = Π_{j∈u} α_{0,j} · Π_j α_{0,j}^{−1}`.
/// `active = None` takes `A = {1,…,J}` for the truncation index `J`.
pub fn anova_superposition_eval(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
    y: &SeqPoint,
    active: Option<&[usize]>,
    max_order: usize,
) -> Result<TensorValue> {
    require_in(k, x, "x")?;
    require_in(k, y, "y")?;
    if active.is_some_and(|a| a.contains(&0)) {
        return Err(Error::InputDomain("coordinates are numbered from 1".into()));
    }
    let min_j = active.and_then(|a| a.iter().copied().max()).unwrap_or(1);
    let f = compute_factors(k, x, y, k.trunc.abs_tol, min_j)?;
    Ok(anova_from(&f, active, max_order))
}

/// Product value and ANOVA superposition from one shared set of univariate
/// evaluations; equal to calling both evaluators separately.
pub fn product_and_superposition(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
    y: &SeqPoint,
    active: Option<&[usize]>,
    max_order: usize,
) -> Result<(TensorValue, TensorValue)> {
    require_in(k, x, "x")?;
    require_in(k, y, "y")?;
    if active.is_some_and(|a| a.contains(&0)) {
        return Err(Error::InputDomain("coordinates are numbered from 1".into()));
    }
    let min_j = active.and_then(|a| a.iter().copied().max()).unwrap_or(1);
    let f = compute_factors(k, x, y, k.trunc.abs_tol, min_j)?;
    Ok((product_from(&f), anova_from(&f, active, max_order)))
}

/// Elementary symmetric sums `e_0, …, e_m` of the given values.
fn esp(values: impl Iterator<Item = f64>, m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for v in values {
        for s in (1..=m).rev() {
            e[s] += e[s - 1] * v;
        }
    }
    e
}

pub(crate) fn anova_from(f: &Factors, active: Option<&[usize]>, max_order: usize) -> TensorValue {
    let big_j = f.big_j();
    let mut in_active = vec![active.is_none(); big_j];
    if let Some(a) = active {
        for &j in a {
            in_active[j - 1] = true;
        }
    }
    let a: Vec<f64> = (0..big_j).map(|j| f.alpha0[j] * f.kstar[j]).collect();
    let t: Vec<f64> = (0..big_j)
        .map(|j| a[j].abs() + f.alpha0[j] * f.tau[j])
        .collect();
    let m = max_order.min(big_j);
    let pick = |v: &[f64]| {
        (0..big_j)
            .filter(|&j| in_active[j])
            .map(|j| v[j])
            .collect::<Vec<_>>()
    };
    let em = |v: &[f64]| esp(pick(v).into_iter(), m).iter().sum::<f64>();
    let value_sum = em(&a);
    let abs: Vec<f64> = a.iter().map(|v| v.abs()).collect();
    let (et, ea) = (em(&t), em(&abs));
    let c_hat: f64 = f.alpha0.iter().map(|a0| 1.0 / a0).product();
    let full: f64 = t.iter().map(|v| 1.0 + v).product::<f64>() * f.plan.ab.exp();
    let ld = f.plan.ld;
    let omitted = (full - et).max(0.0) + 4.0 * f64::EPSILON * full;
    let error_bound = c_hat.abs() * (ld.exp() * omitted + ld.exp_m1() * et + (et - ea).max(0.0));
    TensorValue {
        value: c_hat * value_sum,
        error_bound,
        coords_used: big_j,
        terms_used: f.terms,
    }
}

/// Both closed forms of the Gaussian product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussValue {
    /// `exp(−Σ σ_j²(x_j−y_j)²)`, or 0 when the exponent diverges.
    pub product_form: Option<f64>,
    pub product_error: f64,
    /// `lim_J Π_{j≤J} ℓ_j(x_j,y_j) Π_{j>J} v_j(x_j) v_j(y_j)`.
    pub series_form: Option<f64>,
    pub series_error: f64,
    pub x_domain: Membership,
    pub y_domain: Membership,
    pub diff_domain: Membership,
}

pub fn tensor_gauss_eval(k: &TensorGaussKernel, x: &SeqPoint, y: &SeqPoint) -> Result<GaussValue> {
    let ex = gauss_exponent(k, x, y, GAUSS_TOL)?;
    let (product_form, product_error, diff_domain) = match ex.verdict {
        Verdict::Holds => {
            let v = (-ex.value).exp();
            (Some(v), -v * (-ex.tail_bound).exp_m1(), Membership::In)
        }
        Verdict::Fails => (Some(0.0), 0.0, Membership::Out),
        Verdict::Unknown => (None, f64::INFINITY, Membership::Unknown),
    };
    let mx = gauss_domain_check(k, x)?;
    let my = gauss_domain_check(k, y)?;
    let (series_form, series_error) = match (mx.verdict, my.verdict) {
        (Membership::Out, _) | (_, Membership::Out) => (Some(0.0), 0.0),
        (Membership::In, Membership::In) => {
            let zero = SeqPoint::zero();
            let sx = gauss_exponent(k, x, &zero, GAUSS_TOL / 2.0)?;
            let sy = gauss_exponent(k, y, &zero, GAUSS_TOL / 2.0)?;
            let big_j = sx.coords_used.max(sy.coords_used);
            let head: f64 = (1..=big_j)
                .map(|j| (k.shape.sigma(j) * (x.coord(j) - y.coord(j))).powi(2))
                .sum();
            let v = (-head).exp();
            (Some(v), -v * (-(sx.tail_bound + sy.tail_bound)).exp_m1())
        }
        _ => (None, f64::INFINITY),
    };
    Ok(GaussValue {
        product_form,
        product_error,
        series_form,
        series_error,
        x_domain: mx.verdict,
        y_domain: my.verdict,
        diff_domain,
    })
}

/// Gram matrix of the Gaussian product.
pub fn tensor_gauss_gram(k: &TensorGaussKernel, points: &[SeqPoint]) -> Result<DMatrix<f64>> {
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = tensor_gauss_eval(k, &points[i], &points[j])?
                .product_form
                .ok_or_else(|| {
                    Error::Domain("membership of a point difference is undecided".into())
                })?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Gram matrix of `K` in which every coordinate shares one truncation
/// degree across all points, so each factor matrix is `α₀^{−1} 11ᵀ + H Hᵀ`
/// and the Hadamard product of them is positive semidefinite.
/// Returns the matrix and the largest entrywise error bound.
pub fn tensor_hermite_gram(
    k: &TensorHermiteKernel,
    points: &[SeqPoint],
) -> Result<(DMatrix<f64>, f64)> {
    let n = points.len();
    let tol = k.trunc.abs_tol;
    let mut big_j = 1;
    let mut delta: f64 = 0.0;
    for p in points {
        require_in(k, p, "in the Gram set")?;
        let plan = tail_plan(k, p, p, tol / 4.0, 1)?;
        big_j = big_j.max(plan.big_j);
    }
    for p in points {
        delta = delta.max(tail_plan(k, p, p, f64::INFINITY, big_j)?.delta());
    }
    let mut g = DMatrix::<f64>::from_element(n, n, 1.0);
    let mut e = DMatrix::<f64>::zeros(n, n);
    for j in 1..=big_j {
        let col = k.column(j)?;
        let uk = UniHermiteKernel {
            weights: col.clone(),
            trunc: k.trunc,
        };
        let xs: Vec<f64> = points.iter().map(|p| p.coord(j)).collect();
        let xmax = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let deg = uk.degree_for(xmax, xmax, 0.4 * tol * split_weight(j), k.trunc.max_terms)?;
        let mut h = DMatrix::<f64>::zeros(n, deg);
        for (i, &x) in xs.iter().enumerate() {
            for (nu, v) in HermiteIter::new(x).enumerate().take(deg + 1).skip(1) {
                h[(i, nu - 1)] = v * col.inv(nu).sqrt();
            }
        }
        let gj = DMatrix::from_element(n, n, 1.0 / col.alpha0) + &h * h.transpose();
        for r in 0..n {
            for c in 0..n {
                let tau = uk.tail_bound(xs[r], xs[c], deg);
                e[(r, c)] = e[(r, c)] * (gj[(r, c)].abs() + tau) + g[(r, c)].abs() * tau;
                g[(r, c)] *= gj[(r, c)];
            }
        }
    }
    let g = crate::kernels1d::symmetrize(g);
    let worst = (0..n * n)
        .map(|i| e[i] * delta.exp() + g[i].abs() * delta.exp_m1())
        .fold(0.0, f64::max);
    Ok((g, worst))
}

/// Monte-Carlo view of `μ(𝔛) = 1`: partial diagonal sums over a random
/// prefix compared with the Markov envelope `S / p`, where
/// `S = Σ_{j≤dim} Σ_{ν≥1} α_{ν,j}^{−1}` is their expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuProxy {
    pub dim: usize,
    pub samples: usize,
    pub expectation_bound: f64,
    pub exceed_probability: f64,
    pub envelope: f64,
    pub max_partial: f64,
    pub mean_partial: f64,
    pub violations: usize,
}

pub fn mu_domain_proxy(
    k: &TensorHermiteKernel,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<MuProxy> {
    let p = 1e-4;
    let mut s = 0.0;
    let mut cols = Vec::with_capacity(dim);
    for j in 1..=dim {
        let c = k.column(j)?;
        s += c.tail_inv_sum(0);
        cols.push(UniHermiteKernel {
            weights: c,
            trunc: k.trunc,
        });
    }
    if !s.is_finite() {
        return Err(Error::Unsupported(
            "sum of inverse weights is not finite".into(),
        ));
    }
    let envelope = s / p;
    let xs = mu_sample(dim, count, seed);
    let mut max_partial: f64 = 0.0;
    let mut total = 0.0;
    let mut violations = 0;
    for r in 0..count {
        let mut sum = 0.0;
        for (j, uk) in cols.iter().enumerate() {
            let x = xs[(r, j)];
            let n = uk.degree_for(x, x, 1e-6 * split_weight(j + 1), k.trunc.max_terms)?;
            sum += uk.partial_sum_from1(x, x, n) + uk.tail_bound(x, x, n);
        }
        max_partial = max_partial.max(sum);
        total += sum;
        if sum > envelope {
            violations += 1;
        }
    }
    Ok(MuProxy {
        dim,
        samples: count,
        expectation_bound: s,
        exceed_probability: p,
        envelope,
        max_partial,
        mean_partial: total / count.max(1) as f64,
        violations,
    })
}
