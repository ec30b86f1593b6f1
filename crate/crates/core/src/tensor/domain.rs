//! Membership in the maximal domains `𝔛`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels1d::UniHermiteKernel;
use crate::point::SeqPoint;
use crate::series::{Envelope, Series, Verdict};
use crate::weights::WeightRule;

use super::tails::{diag_tail_bound, geometric_route, parametric_family};
use super::{split_weight, DomainVerdict, Membership, TensorGaussKernel, TensorHermiteKernel};

const MAX_TAIL_INDEX: usize = 1 << 20;
const DOMAIN_TOL: f64 = 1e-12;

fn membership(v: Verdict) -> Membership {
    match v {
        Verdict::Holds => Membership::In,
        Verdict::Fails => Membership::Out,
        Verdict::Unknown => Membership::Unknown,
    }
}

fn decide(series: &Series<'_>, what: &str) -> DomainVerdict {
    let v = series.verdict();
    let mut out = DomainVerdict {
        verdict: membership(v),
        certificate: format!("{what}: {}", describe(v)),
        value: None,
        residual_bound: f64::INFINITY,
    };
    if v.holds() {
        if let Some((s, tail, big_j)) = series.certified_sum(DOMAIN_TOL, MAX_TAIL_INDEX) {
            out.value = Some(s);
            out.residual_bound = tail;
            out.certificate.push_str(&format!(
                "; partial sum over j <= {big_j} with tail <= {tail:.3e}"
            ));
        } else {
            let big_j = series.envelope.upper_from().unwrap_or(1);
            out.value = Some(series.partial_sum(big_j));
            out.residual_bound = series.tail_bound(big_j);
        }
    }
    out
}

fn describe(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "converges by comparison with a summable monomial envelope",
        Verdict::Fails => "diverges by comparison with a non-summable lower envelope",
        Verdict::Unknown => "no envelope decides convergence",
    }
}

/// Certified value of `Σ σ_j² (x_j − y_j)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentValue {
    pub verdict: Verdict,
    pub value: f64,
    pub tail_bound: f64,
    pub coords_used: usize,
}

fn gauss_series<'a>(k: &'a TensorGaussKernel, x: &'a SeqPoint, y: &'a SeqPoint) -> Series<'a> {
    let env = k.shape.sq_envelope().mul(&x.diff_abs_pow_envelope(y, 2.0));
    Series::new(
        move |j| k.shape.sigma(j).powi(2) * (x.coord(j) - y.coord(j)).powi(2),
        env,
    )
}

/// `Σ σ_j² (x_j − y_j)²` with a tail below `tol`, or its divergence verdict.
pub fn gauss_exponent(
    k: &TensorGaussKernel,
    x: &SeqPoint,
    y: &SeqPoint,
    tol: f64,
) -> Result<ExponentValue> {
    x.validate()?;
    y.validate()?;
    let s = gauss_series(k, x, y);
    let verdict = s.verdict();
    if !verdict.holds() {
        return Ok(ExponentValue {
            verdict,
            value: f64::INFINITY,
            tail_bound: f64::INFINITY,
            coords_used: 0,
        });
    }
    match s.certified_sum(tol, MAX_TAIL_INDEX) {
        Some((value, tail_bound, big_j)) => Ok(ExponentValue {
            verdict,
            value,
            tail_bound,
            coords_used: big_j,
        }),
        None => {
            let big_j = MAX_TAIL_INDEX;
            Err(Error::Truncation {
                achieved: s.tail_bound(big_j),
                target: tol,
                terms: big_j,
            })
        }
    }
}

/// `x ∈ ℓ²(σ²)`, decided by classifying `Σ σ_j² x_j²`.
pub fn gauss_domain_check(k: &TensorGaussKernel, x: &SeqPoint) -> Result<DomainVerdict> {
    x.validate()?;
    let zero = SeqPoint::zero();
    let v = decide(&gauss_series(k, x, &zero), "sum sigma_j^2 x_j^2");
    Ok(v)
}

/// Classification of `Σ |v_j(x_j) − 1| = Σ (1 − exp(−σ_j² x_j²))` from the
/// bracket `t/(1+T) ≤ 1 − e^{−t} ≤ t`, with `T` the supremum of the tail.
pub fn unit_vector_criterion(k: &TensorGaussKernel, x: &SeqPoint) -> Result<DomainVerdict> {
    x.validate()?;
    let t_env = k.shape.sq_envelope().mul(&x.abs_pow_envelope(2.0));
    let from = t_env
        .upper
        .as_ref()
        .map(|m| m.from)
        .or(t_env.lower.as_ref().map(|m| m.from))
        .unwrap_or(1);
    let t_sup = t_env
        .upper
        .as_ref()
        .map(|m| m.tail_sup(from.saturating_sub(1)))
        .unwrap_or(f64::INFINITY);
    let lower = if t_sup.is_finite() {
        t_env.lower.clone().map(|m| m.scale(1.0 / (1.0 + t_sup)))
    } else {
        // The terms σ_j² x_j² are unbounded, so 1 − e^{−t_j} ≥ 1 − e^{−1}
        // infinitely often.
        t_env
            .lower
            .as_ref()
            .filter(|m| m.divergent())
            .map(|_| crate::series::Monomial::constant(1.0 - (-1f64).exp()))
    };
    let env = Envelope {
        upper: t_env.upper.clone(),
        lower,
    };
    let s = Series::new(
        |j| -(-(k.shape.sigma(j) * x.coord(j)).powi(2)).exp_m1(),
        env,
    );
    Ok(decide(&s, "sum |v_j(x_j) - 1|"))
}

fn eg_b_at_least_one(k: &TensorHermiteKernel) -> bool {
    matches!(&k.weights.rule, WeightRule::Eg { b, .. } if b.inf_from(1) >= 1.0)
}

/// The criterion `Σ α_{1,j}^{−1} x_j² < ∞` with its certified sum.
pub fn l2_a1_criterion(k: &TensorHermiteKernel, x: &SeqPoint) -> Result<DomainVerdict> {
    x.validate()?;
    let from = k.explicit_len() + 1;
    let a1 = parametric_family(&k.weights)
        .alpha_inv_envelope(1)
        .starting_at(from);
    let s = Series::new(
        |j| {
            k.column(j)
                .map(|c| c.inv(1) * x.coord(j).powi(2))
                .unwrap_or(f64::INFINITY)
        },
        a1.mul(&x.abs_pow_envelope(2.0)),
    );
    Ok(decide(&s, "sum alpha_(1,j)^(-1) x_j^2"))
}

/// Membership of `x` in the maximal domain of a Hermite product.
pub fn hermite_domain_check(k: &TensorHermiteKernel, x: &SeqPoint) -> Result<DomainVerdict> {
    x.validate()?;
    if x.is_bounded() {
        let big_j = k.explicit_len().max(x.dim());
        return Ok(DomainVerdict {
            verdict: Membership::In,
            certificate:
                "bounded point; bounded sequences lie in the domain under the weight conditions"
                    .into(),
            value: None,
            residual_bound: diag_tail_bound(k, x, big_j),
        });
    }
    if let WeightRule::Mehler { shape } = &k.weights.rule {
        let g = TensorGaussKernel {
            shape: shape.clone(),
        };
        let mut v = gauss_domain_check(&g, x)?;
        v.certificate = format!("Mehler weights, domain is l2(sigma^2); {}", v.certificate);
        return Ok(v);
    }
    if eg_b_at_least_one(k) {
        let mut v = l2_a1_criterion(k, x)?;
        v.certificate = format!(
            "exponential growth with b_j >= 1, domain is l2(a_1^(-1)); {}",
            v.certificate
        );
        return Ok(v);
    }
    let necessary = l2_a1_criterion(k, x)?;
    if necessary.verdict == Membership::Out {
        return Ok(DomainVerdict {
            certificate: format!("necessary condition fails: {}", necessary.certificate),
            ..necessary
        });
    }
    let mut big_j = k.explicit_len().max(x.dim()).max(1);
    while big_j <= MAX_TAIL_INDEX {
        let b = diag_tail_bound(k, x, big_j);
        if b.is_finite() {
            return Ok(DomainVerdict {
                verdict: Membership::In,
                certificate: format!("sum_j k*_j(x_j,x_j) over j > {big_j} is at most {b:.3e}"),
                value: None,
                residual_bound: b,
            });
        }
        big_j *= 2;
    }
    Ok(DomainVerdict {
        verdict: Membership::Unknown,
        certificate: "the necessary series converges but no diagonal tail bound closes".into(),
        value: None,
        residual_bound: f64::INFINITY,
    })
}

/// Direct certification of `Σ_j k*_j(x_j,x_j)`: explicit univariate sums up
/// to `coords`, then the growth-bound tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCertificate {
    pub verdict: Membership,
    pub partial_sum: Option<f64>,
    pub partial_error: f64,
    pub tail_bound: f64,
    pub coords: usize,
}

const DIRECT_EXPLICIT_MAX: usize = 10_000;

pub fn diagonal_series_certificate(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
) -> Result<DiagonalCertificate> {
    x.validate()?;
    let mut big_j = k.explicit_len().max(x.dim()).max(1);
    while big_j <= MAX_TAIL_INDEX {
        let tail = geometric_route(k, x, big_j);
        if tail.is_finite() {
            let (partial_sum, partial_error) = if big_j <= DIRECT_EXPLICIT_MAX {
                let mut sum = 0.0;
                let mut err = 0.0;
                for j in 1..=big_j {
                    let xj = x.coord(j);
                    let uk = UniHermiteKernel {
                        weights: k.column(j)?,
                        trunc: k.trunc,
                    };
                    let tol = 1e-10 * split_weight(j);
                    let n = uk.degree_for(xj, xj, tol, k.trunc.max_terms)?;
                    sum += uk.partial_sum_from1(xj, xj, n);
                    err += uk.tail_bound(xj, xj, n);
                }
                (Some(sum), err)
            } else {
                (None, f64::INFINITY)
            };
            return Ok(DiagonalCertificate {
                verdict: Membership::In,
                partial_sum,
                partial_error,
                tail_bound: tail,
                coords: big_j,
            });
        }
        big_j *= 2;
    }
    // k*_j(x,x) ≥ α_{1,j}^{−1} h_1(x)² = α_{1,j}^{−1} x², so a divergent
    // lower envelope of the right side settles divergence.
    let from = k.explicit_len() + 1;
    let lower = parametric_family(&k.weights)
        .alpha_inv_envelope(1)
        .starting_at(from)
        .mul(&x.abs_pow_envelope(2.0))
        .lower;
    let verdict = if lower.is_some_and(|m| m.divergent()) {
        Membership::Out
    } else {
        Membership::Unknown
    };
    Ok(DiagonalCertificate {
        verdict,
        partial_sum: None,
        partial_error: f64::INFINITY,
        tail_bound: f64::INFINITY,
        coords: 0,
    })
}
