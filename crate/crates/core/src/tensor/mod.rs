//! Kernels of countably many variables: Hermite products
//! `K(x,y) = Π_j k_j(x_j,y_j)` and Gaussian products
//! `L(x,y) = Π_j exp(−σ_j²(x_j−y_j)²)`, evaluated at points with closed-form
//! tails.

mod domain;
mod eval;
mod series;
mod tails;
mod witness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels1d::TruncationConfig;
use crate::shape::ShapeParams;
use crate::weights::{validate_weights, UniWeights, WeightFamily};

pub use domain::{
    diagonal_series_certificate, gauss_domain_check, gauss_exponent, hermite_domain_check,
    l2_a1_criterion, unit_vector_criterion, DiagonalCertificate, ExponentValue,
};
pub use eval::{
    anova_superposition_eval, mu_domain_proxy, product_and_superposition, tensor_gauss_eval,
    tensor_gauss_gram, tensor_hermite_eval, tensor_hermite_gram, GaussValue, MuProxy,
};
pub use series::{multiindex_series_eval, SeriesValue, MAX_SERIES_WORK};
pub use tails::diag_tail_bound;
pub use witness::{pg_strict_inclusion_witness, Witness};

/// Which product is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `K` with the weights as given.
    #[default]
    Full,
    /// `K′`, with every `α_{0,j}` replaced by 1.
    Primed,
}

/// A Hermite product kernel whose weights satisfy the summability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorHermiteKernel {
    pub weights: WeightFamily,
    #[serde(default)]
    pub trunc: TruncationConfig,
    #[serde(default)]
    pub variant: Variant,
}

impl TensorHermiteKernel {
    pub fn new(weights: WeightFamily, trunc: TruncationConfig, variant: Variant) -> Result<Self> {
        let v = validate_weights(&weights)?;
        if !v.all_hold() {
            return Err(Error::Unsupported(format!(
                "weight conditions not certified (family {:?}, h1 {:?}, h2 {:?}, h3 {:?})",
                v.family, v.h1, v.h2, v.h3
            )));
        }
        if !(trunc.abs_tol > 0.0) {
            return Err(Error::InputDomain("abs_tol must be positive".into()));
        }
        Ok(TensorHermiteKernel {
            weights,
            trunc,
            variant,
        })
    }

    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.trunc.abs_tol = abs_tol;
        self
    }

    /// Univariate weights of coordinate `j`.
    pub fn column(&self, j: usize) -> Result<UniWeights> {
        let c = self.weights.column(j)?;
        Ok(match self.variant {
            Variant::Full => c,
            Variant::Primed => c.with_alpha0(1.0),
        })
    }

    /// Bound on `Σ_{j>big_j} |α_{0,j} − 1|`.
    pub fn alpha0_deviation_tail(&self, big_j: usize) -> f64 {
        match self.variant {
            Variant::Full => self.weights.alpha0_deviation_tail(big_j),
            Variant::Primed => 0.0,
        }
    }

    /// Bound on `|ln Π_{j>big_j} α_{0,j}^{−1}|`.
    pub fn alpha0_log_tail(&self, big_j: usize) -> f64 {
        let d = self.alpha0_deviation_tail(big_j);
        if d < 1.0 {
            d / (1.0 - d)
        } else {
            f64::INFINITY
        }
    }

    /// First coordinate index beyond every explicitly tabulated one.
    pub fn explicit_len(&self) -> usize {
        self.weights.explicit_len()
    }
}

/// A Gaussian product kernel with `Σ σ_j² < ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorGaussKernel {
    pub shape: ShapeParams,
}

impl TensorGaussKernel {
    pub fn new(shape: ShapeParams) -> Result<Self> {
        shape.validate()?;
        if !shape.sum_sq().verdict().holds() {
            return Err(Error::Unsupported(
                "summability of sigma_j^2 is not certified".into(),
            ));
        }
        Ok(TensorGaussKernel { shape })
    }
}

/// Membership in the maximal domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    Out,
    Unknown,
}

/// Domain verdict with the argument that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVerdict {
    pub verdict: Membership,
    pub certificate: String,
    /// Certified partial value of the deciding series, when it converges.
    pub value: Option<f64>,
    /// Bound on the remainder of `value`.
    pub residual_bound: f64,
}

/// A truncated product or superposition value with its certified error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    pub value: f64,
    pub error_bound: f64,
    /// Coordinates evaluated explicitly.
    pub coords_used: usize,
    /// Total univariate series terms summed.
    pub terms_used: usize,
}

/// Splitting weights `1/(j(j+1))`, which sum to 1 over `j ≥ 1`.
pub(crate) fn split_weight(j: usize) -> f64 {
    1.0 / (j as f64 * (j as f64 + 1.0))
}

#[cfg(test)]
mod tests;
