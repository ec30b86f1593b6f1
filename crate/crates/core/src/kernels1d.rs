//! Kernels of a single variable: the Hermite kernel
//! `k(x,y) = Σ_ν α_ν^{−1} h_ν(x) h_ν(y)`, its centered version
//! `k* = k − α₀^{−1}`, the Gaussian kernel `ℓ_σ(x,y) = exp(−σ²(x−y)²)` and its
//! orthonormal basis `e_{ν,σ}`.
//!
//! Truncated Hermite series carry the remainder bound
//! `exp((x²+y²)/4) · Σ_{ν>N} α_ν^{−1}`, which follows from Cramér's inequality.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::hermite::{HermiteIter, HermitePairIter};
use crate::weights::UniWeights;

/// Accuracy target and work limit for truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationConfig {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            abs_tol: 1e-10,
            max_terms: 50_000_000,
        }
    }
}

/// A Hermite kernel of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniHermiteKernel {
    pub weights: UniWeights,
    #[serde(default)]
    pub trunc: TruncationConfig,
}

/// A truncated kernel value with its certified remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// The Gaussian kernel `exp(−σ²(x−y)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniGaussKernel {
    pub sigma: f64,
}

/// `f = Σ_ν c_ν h_ν` with finitely many coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FiniteExpansion {
    pub coeffs: Vec<f64>,
}

impl FiniteExpansion {
    pub fn new(coeffs: Vec<f64>) -> Self {
        FiniteExpansion { coeffs }
    }

    /// The single basis function `h_ν`.
    pub fn basis(nu: usize) -> Self {
        let mut coeffs = vec![0.0; nu + 1];
        coeffs[nu] = 1.0;
        FiniteExpansion { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        HermiteIter::new(x)
            .zip(&self.coeffs)
            .map(|(h, c)| c * h)
            .sum()
    }

    /// `‖f‖²_{L²(μ₀)} = Σ c_ν²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

impl UniHermiteKernel {
    pub fn new(weights: UniWeights, trunc: TruncationConfig) -> Result<Self> {
        weights.validate()?;
        if !(trunc.abs_tol > 0.0) {
            return Err(Error::InputDomain("abs_tol must be positive".into()));
        }
        Ok(UniHermiteKernel { weights, trunc })
    }

    /// Remainder bound after the terms `ν ≤ n`.
    pub fn tail_bound(&self, x: f64, y: f64, n: usize) -> f64 {
        ((x * x + y * y) / 4.0).exp() * self.weights.tail_inv_sum(n)
    }

    /// Smallest `N ≤ max_terms` whose remainder bound is within `tol`.
    pub fn degree_for(&self, x: f64, y: f64, tol: f64, max_terms: usize) -> Result<usize> {
        let max_n = max_terms.saturating_sub(1);
        let at_max = self.tail_bound(x, y, max_n);
        if !(at_max <= tol) {
            return Err(Error::Truncation {
                achieved: at_max,
                target: tol,
                terms: max_terms,
            });
        }
        let (mut lo, mut hi) = (0usize, max_n);
        if self.tail_bound(x, y, 0) <= tol {
            return Ok(0);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.tail_bound(x, y, mid) <= tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `Σ_{1 ≤ ν ≤ n} α_ν^{−1} h_ν(x) h_ν(y)`.
    pub fn partial_sum_from1(&self, x: f64, y: f64, n: usize) -> f64 {
        partial_sum_from1(&self.weights, x, y, n)
    }

    fn check_args(x: f64, y: f64) -> Result<()> {
        if x.is_finite() && y.is_finite() {
            Ok(())
        } else {
            Err(Error::InputDomain("kernel arguments must be finite".into()))
        }
    }

    /// `k(x,y)` with a certified remainder no larger than `trunc.abs_tol`.
    pub fn eval(&self, x: f64, y: f64) -> Result<KernelValue> {
        let c = self.centered_eval(x, y)?;
        Ok(KernelValue {
            value: c.value + self.weights.inv(0),
            ..c
        })
    }

    /// `k*(x,y) = k(x,y) − α₀^{−1}`, with the same remainder bound.
    pub fn centered_eval(&self, x: f64, y: f64) -> Result<KernelValue> {
        Self::check_args(x, y)?;
        let n = self.degree_for(x, y, self.trunc.abs_tol, self.trunc.max_terms)?;
        Ok(KernelValue {
            value: self.partial_sum_from1(x, y, n),
            tail_bound: self.tail_bound(x, y, n),
            terms_used: n + 1,
        })
    }

    /// Coefficients `α_ν^{−1} h_ν(x)`, `ν ≤ n`, of the truncated section `k(·,x)`.
    pub fn section(&self, x: f64, n: usize) -> FiniteExpansion {
        FiniteExpansion {
            coeffs: HermiteIter::new(x)
                .take(n + 1)
                .enumerate()
                .map(|(nu, h)| self.weights.inv(nu) * h)
                .collect(),
        }
    }
}

/// `Σ_{1 ≤ ν ≤ n} α_ν^{−1} h_ν(x) h_ν(y)` for explicit weights.
pub fn partial_sum_from1(w: &UniWeights, x: f64, y: f64, n: usize) -> f64 {
    let mut sum = 0.0;
    if x == y {
        for (nu, h) in HermiteIter::new(x).enumerate().take(n + 1).skip(1) {
            sum += w.inv(nu) * h * h;
        }
    } else {
        for (nu, (hx, hy)) in HermitePairIter::new(x, y).enumerate().take(n + 1).skip(1) {
            sum += w.inv(nu) * hx * hy;
        }
    }
    sum
}

/// `k(x,y)` for explicit weights and tolerance; convenience wrapper.
pub fn hermite_kernel_eval(k: &UniHermiteKernel, x: f64, y: f64) -> Result<KernelValue> {
    k.eval(x, y)
}

/// `k*(x,y)`; convenience wrapper.
pub fn centered_kernel_eval(k: &UniHermiteKernel, x: f64, y: f64) -> Result<KernelValue> {
    k.centered_eval(x, y)
}

/// `exp(−σ²(x−y)²)`.
pub fn gauss_kernel_eval(g: &UniGaussKernel, x: f64, y: f64) -> f64 {
    let d = x - y;
    (-g.sigma * g.sigma * d * d).exp()
}

/// `e_{ν,σ}(x) = (√2σ)^ν x^ν exp(−σ²x²) / √(ν!)`, formed in log-space.
pub fn gauss_basis_eval(g: &UniGaussKernel, nu: usize, x: f64) -> f64 {
    let s2x2 = g.sigma * g.sigma * x * x;
    if nu == 0 {
        return (-s2x2).exp();
    }
    if x == 0.0 {
        return 0.0;
    }
    let ln = nu as f64 * (std::f64::consts::SQRT_2 * g.sigma * x.abs()).ln()
        - 0.5 * ln_factorial(nu as u64)
        - s2x2;
    let sign = if x < 0.0 && nu % 2 == 1 { -1.0 } else { 1.0 };
    sign * ln.exp()
}

/// `Σ_{ν > n} e_{ν,σ}(x)²`, bounded by the Poisson tail
/// `e^{−λ} λ^{n+1}/(n+1)! · 1/(1 − λ/(n+2))` with `λ = 2σ²x²`.
pub fn gauss_diagonal_tail(g: &UniGaussKernel, x: f64, n: usize) -> f64 {
    let lambda = 2.0 * g.sigma * g.sigma * x * x;
    if lambda == 0.0 {
        return 0.0;
    }
    let m = (n + 1) as f64;
    if lambda >= m + 1.0 {
        return 1.0;
    }
    let ln = m * lambda.ln() - ln_factorial(n as u64 + 1) - lambda;
    (ln.exp() / (1.0 - lambda / (m + 1.0))).min(1.0)
}

/// Outcome of [`gauss_series_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheck {
    pub residual: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Compares `ℓ_σ(x,y)` with `Σ_{ν ≤ N} e_{ν,σ}(x) e_{ν,σ}(y)`, where `N` is
/// the smallest degree whose Cauchy–Schwarz remainder bound is within `tol`.
pub fn gauss_series_check(g: &UniGaussKernel, x: f64, y: f64, tol: f64) -> Result<SeriesCheck> {
    const MAX_DEGREE: usize = 100_000;
    let bound = |n: usize| (gauss_diagonal_tail(g, x, n) * gauss_diagonal_tail(g, y, n)).sqrt();
    let mut n = 0;
    while bound(n) > tol {
        n += 1;
        if n > MAX_DEGREE {
            return Err(Error::Truncation {
                achieved: bound(n),
                target: tol,
                terms: n,
            });
        }
    }
    let partial: f64 = (0..=n)
        .map(|nu| gauss_basis_eval(g, nu, x) * gauss_basis_eval(g, nu, y))
        .sum();
    Ok(SeriesCheck {
        residual: (gauss_kernel_eval(g, x, y) - partial).abs(),
        tail_bound: bound(n),
        terms_used: n + 1,
    })
}

/// `⟨f, g⟩_{H(k)} = Σ α_ν c_ν d_ν`.
pub fn rkhs_inner(k: &UniHermiteKernel, f: &FiniteExpansion, g: &FiniteExpansion) -> f64 {
    f.coeffs
        .iter()
        .zip(&g.coeffs)
        .enumerate()
        .filter(|(_, (c, d))| **c != 0.0 && **d != 0.0)
        .map(|(nu, (c, d))| k.weights.alpha(nu).value * c * d)
        .sum()
}

/// Gram matrix of a truncated Hermite kernel built as `H D Hᵀ`, which is
/// positive semidefinite by construction. The truncation degree is chosen
/// once for the largest point so every entry shares it.
pub fn hermite_gram(
    k: &UniHermiteKernel,
    points: &[f64],
    centered: bool,
) -> Result<(DMatrix<f64>, f64)> {
    let xmax = points.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let n = k.degree_for(xmax, xmax, k.trunc.abs_tol, k.trunc.max_terms)?;
    let start = usize::from(centered);
    let m = points.len();
    let mut h = DMatrix::<f64>::zeros(m, n + 1 - start);
    for (i, &x) in points.iter().enumerate() {
        for (nu, v) in HermiteIter::new(x).enumerate().take(n + 1).skip(start) {
            h[(i, nu - start)] = v * k.weights.inv(nu).sqrt();
        }
    }
    let g = &h * h.transpose();
    Ok((symmetrize(g), k.tail_bound(xmax, xmax, n)))
}

/// `(G + Gᵀ)/2`.
pub fn symmetrize(g: DMatrix<f64>) -> DMatrix<f64> {
    let t = g.transpose();
    (g + t) * 0.5
}

/// Gram matrix of a symmetric kernel, evaluating only the upper triangle.
pub fn gram_matrix<P, F: Fn(&P, &P) -> f64>(points: &[P], kernel: F) -> DMatrix<f64> {
    let n = points.len();
    let mut g = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel(&points[i], &points[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(g.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
