//! Bounds on `Σ_{j>J} k*_j(x_j,x_j)` for Hermite products.
//!
//! Two routes are combined. For bounded tails, Cramér's inequality gives
//! `k*_j(x,x) ≤ α_{1,j}^{−1} x² + e^{x²/2} Σ_{ν≥2} α_{ν,j}^{−1}`. When
//! `α_{ν,j}^{−1} ≤ γ_j^ν` (exponential growth with `b_j ≥ 1`, or Mehler
//! weights), the growth bound `|h_ν(x)|² ≤ 4^ν max(1,x²)^ν` gives
//! `k*_j(x,x) ≤ ρ_j/(1−ρ_j)` with `ρ_j = 4γ_j(1+x_j²)`.

use crate::point::SeqPoint;
use crate::series::{Envelope, Monomial, Series};
use crate::shape::beta_envelope;
use crate::weights::{UniKind, UniWeights, WeightFamily, WeightRule};

use super::TensorHermiteKernel;

/// The family governing coordinates past any table rows.
pub(crate) fn parametric_family(w: &WeightFamily) -> &WeightFamily {
    match &w.rule {
        WeightRule::Table { tail, .. } => parametric_family(tail),
        _ => w,
    }
}

/// `Σ_{ν≥2} 2^{−r(ν^b − 2^b)}` with a certified remainder folded in.
pub(crate) fn eg_second_order_constant(r: f64, b: f64) -> f64 {
    let w = UniWeights::eg(r, b);
    let shift = r * 2f64.powf(b);
    let mut sum = 0.0;
    let mut nu = 2usize;
    loop {
        let t = (-(r * (nu as f64).powf(b) - shift) * std::f64::consts::LN_2).exp();
        sum += t;
        if t <= 1e-17 * sum || nu >= 1_000_000 {
            break;
        }
        nu += 1;
    }
    let tail = (shift * std::f64::consts::LN_2).exp() * w.tail_inv_sum(nu);
    sum + tail
}

/// Upper envelope of `Σ_{ν≥2} α_{ν,j}^{−1}` valid for `j ≥ from`.
fn second_order_envelope(w: &WeightFamily, from: usize) -> Option<Monomial> {
    let w = parametric_family(w);
    match &w.rule {
        WeightRule::Pg { r } => {
            let r_min = r.inf_from(from);
            if !(r_min > 1.0) {
                return None;
            }
            let m = r.exp_neg_envelope(3.0).upper?;
            Some(m.scale(1.0 + 3.0 / (r_min - 1.0)).starting_at(from))
        }
        WeightRule::Eg { r, b } => {
            let r_min = r.inf_from(from);
            let b_min = b.inf_from(from);
            if !(r_min > 0.0 && b_min > 0.0) {
                return None;
            }
            let m = r.exp_neg_envelope(2f64.powf(2f64.powf(b_min))).upper?;
            Some(
                m.scale(eg_second_order_constant(r_min, b_min))
                    .starting_at(from),
            )
        }
        WeightRule::Mehler { shape } => {
            Some(beta_envelope(shape).upper?.powf(2.0).starting_at(from))
        }
        WeightRule::Table { .. } => None,
    }
}

/// Upper envelope of `γ_j` with `α_{ν,j}^{−1} ≤ γ_j^ν`, where available.
fn gamma_envelope(w: &WeightFamily, from: usize) -> Option<Monomial> {
    let w = parametric_family(w);
    match &w.rule {
        WeightRule::Eg { r, b } if b.inf_from(from) >= 1.0 && r.inf_from(from) >= 0.0 => {
            Some(r.exp_neg_envelope(2.0).upper?.starting_at(from))
        }
        WeightRule::Mehler { shape } => Some(beta_envelope(shape).upper?.starting_at(from)),
        _ => None,
    }
}

fn gamma_exact(col: &UniWeights) -> Option<f64> {
    match col.kind {
        UniKind::Eg { r, b } if b >= 1.0 && r >= 0.0 => Some((-r * std::f64::consts::LN_2).exp()),
        UniKind::Mehler { beta } => Some(beta),
        _ => None,
    }
}

/// First index from which every envelope is meant to apply.
fn tail_from(k: &TensorHermiteKernel, x: &SeqPoint, big_j: usize) -> usize {
    (big_j + 1).max(k.explicit_len() + 1).max(x.dim() + 1)
}

fn route_bounded(k: &TensorHermiteKernel, x: &SeqPoint, big_j: usize) -> f64 {
    let m = x.sup_abs_from(big_j + 1);
    if !m.is_finite() {
        return f64::INFINITY;
    }
    let from = tail_from(k, x, big_j);
    let w = &k.weights;
    let a1 = w.alpha_inv_envelope(1);
    let first = Series::new(
        |j| {
            k.column(j)
                .map(|c| c.inv(1) * x.coord(j).powi(2))
                .unwrap_or(f64::INFINITY)
        },
        Envelope {
            upper: a1.upper.map(|m| m.starting_at(from)),
            lower: None,
        }
        .mul(&x.abs_pow_envelope(2.0)),
    );
    let t1 = first.tail_bound(big_j);
    if !t1.is_finite() {
        return f64::INFINITY;
    }
    let rest = match second_order_envelope(w, from) {
        Some(env) => Series::new(
            |j| {
                k.column(j)
                    .map(|c| c.tail_inv_sum(1))
                    .unwrap_or(f64::INFINITY)
            },
            Envelope {
                upper: Some(env),
                lower: None,
            },
        )
        .tail_bound(big_j),
        None => f64::INFINITY,
    };
    t1 + (m * m / 2.0).exp() * rest
}

fn route_geometric(k: &TensorHermiteKernel, x: &SeqPoint, big_j: usize) -> f64 {
    let from = tail_from(k, x, big_j);
    let Some(g) = gamma_envelope(&k.weights, from) else {
        return f64::INFINITY;
    };
    let gamma = |j: usize| {
        k.column(j)
            .ok()
            .and_then(|c| gamma_exact(&c))
            .unwrap_or(f64::INFINITY)
    };
    let s1 = Series::new(
        |j| 4.0 * gamma(j),
        Envelope {
            upper: Some(g.scale(4.0)),
            lower: None,
        },
    );
    let s2 = Series::new(
        |j| 4.0 * gamma(j) * x.coord(j).powi(2),
        Envelope {
            upper: Some(g.scale(4.0)),
            lower: None,
        }
        .mul(&x.abs_pow_envelope(2.0)),
    );
    let sup = s1.tail_sup(big_j) + s2.tail_sup(big_j);
    if !(sup < 1.0) {
        return f64::INFINITY;
    }
    (s1.tail_bound(big_j) + s2.tail_bound(big_j)) / (1.0 - sup)
}

/// Certified upper bound on `Σ_{j>big_j} k*_j(x_j,x_j)`; `+∞` when neither
/// route applies.
pub fn diag_tail_bound(k: &TensorHermiteKernel, x: &SeqPoint, big_j: usize) -> f64 {
    route_bounded(k, x, big_j).min(route_geometric(k, x, big_j))
}

/// Route through the growth bound only, as used by the direct diagonal
/// certificate.
pub(crate) fn geometric_route(k: &TensorHermiteKernel, x: &SeqPoint, big_j: usize) -> f64 {
    route_geometric(k, x, big_j)
}
