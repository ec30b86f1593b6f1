//! The maps `q` and `Q` between Hermite and Gaussian spaces.
//!
//! `(qf)(x) = c^{1/2} e^{−τx²} f(cx)` and, for countably many variables,
//! `(Qf)(x) = c_*^{1/2} exp(−Σ_j τ_j x_j²) f(c_1x_1, c_2x_2, …)` with
//! `c_* = Π_j c_j`.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::HermiteIter;
use crate::kernels1d::{FiniteExpansion, TruncationConfig};
use crate::point::SeqPoint;
use crate::poly::MultiExpansion;
use crate::quadrature::{gh_rule, tensor_integrate};
use crate::shape::ShapeParams;
use crate::tensor::{
    gauss_domain_check, gauss_exponent, tensor_hermite_eval, Membership, TensorGaussKernel,
    TensorHermiteKernel, Variant,
};
use crate::weights::{Alpha0Rule, WeightFamily, WeightRule};

pub use crate::shape::MehlerParams;

/// Default certification tolerance for `c_*` and the exponent tails.
pub const CERT_TOL: f64 = 1e-12;

pub fn mehler_from_sigma(sigma: f64) -> Result<MehlerParams> {
    MehlerParams::from_sigma(sigma)
}

pub fn q_apply(p: &MehlerParams, f: impl Fn(f64) -> f64, x: f64) -> f64 {
    p.c.sqrt() * (-p.tau * x * x).exp() * f(p.c * x)
}

/// `q^{−1}g(u) = c^{−1/2} e^{τ(u/c)²} g(u/c)`.
pub fn q_inverse_apply(p: &MehlerParams, g: impl Fn(f64) -> f64, x: f64) -> f64 {
    let u = x / p.c;
    (p.tau * u * u).exp() * g(u) / p.c.sqrt()
}

/// `(q h_ν)(x)`.
pub fn q_basis(p: &MehlerParams, nu: usize, x: f64) -> f64 {
    q_apply(p, |u| HermiteIter::new(u).nth(nu).unwrap_or(0.0), x)
}

/// Outcome of [`mehler_identity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerCheck {
    pub residual: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Compares `ℓ_σ(x,y)` with `Σ_{ν≤N} α_ν^{−1}(qh_ν)(x)(qh_ν)(y)`. By
/// Cramér's inequality `|(qh_ν)(x)| ≤ c^{1/2} e^{x²/4}`, so the remainder is
/// at most `c e^{(x²+y²)/4} β^{N+1}`.
pub fn mehler_identity_check(p: &MehlerParams, x: f64, y: f64, tol: f64) -> Result<MehlerCheck> {
    const MAX_TERMS: usize = 100_000;
    let pre = p.c * ((x * x + y * y) / 4.0).exp();
    let bound = |n: usize| pre * p.beta.powi(n as i32 + 1);
    let mut n = 0;
    while bound(n) > tol {
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::Truncation {
                achieved: bound(n),
                target: tol,
                terms: n,
            });
        }
    }
    let (ux, uy) = (p.c * x, p.c * y);
    let damp = p.c * (-p.tau * (x * x + y * y)).exp();
    let sum: f64 = HermiteIter::new(ux)
        .zip(HermiteIter::new(uy))
        .take(n + 1)
        .enumerate()
        .map(|(nu, (a, b))| p.alpha_inv(nu) * a * b)
        .sum();
    let exact = (-p.sigma * p.sigma * (x - y) * (x - y)).exp();
    Ok(MehlerCheck {
        residual: (exact - damp * sum).abs(),
        tail_bound: bound(n),
        terms_used: n + 1,
    })
}

/// `‖qf‖²` and `‖f‖²` in `L²(μ₀)`.
///
/// With `u = cx` the integrand of `‖qf‖²` becomes `f(u)²` times the density
/// ratio `exp(−u²(2τ + 1/2)/c²) / exp(−u²/2)`, which is identically 1, so an
/// `n`-point rule is exact once `n ≥ deg f + 1`.
pub fn check_q_isometry(p: &MehlerParams, f: &FiniteExpansion, quad_nodes: usize) -> Result<f64> {
    let deg = f.degree();
    if quad_nodes < deg + 1 {
        return Err(Error::QuadratureDegree {
            nodes: quad_nodes,
            degree: 2 * deg,
        });
    }
    let rule = gh_rule(quad_nodes)?;
    let k = (2.0 * p.tau + 0.5) / (p.c * p.c);
    let lhs = rule.integrate(|u| {
        let v = f.eval(u);
        v * v * (-(k - 0.5) * u * u).exp()
    });
    Ok((lhs - f.l2_norm_sq()).abs())
}

/// Per-coordinate Mehler data with a certified `c_*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorMehlerParams {
    pub shape: ShapeParams,
    /// `Π_{j≤J} c_j · e^{t/2}`, where `ln Π_{j>J} c_j ∈ [0, t]`.
    pub c_star: f64,
    /// Relative error bound of `c_star`.
    pub c_star_rel_err: f64,
    /// `J` above.
    pub coords: usize,
}

impl TensorMehlerParams {
    /// Certifies `c_*` using `ln c_j = ln(1+8σ_j²)/4 ≤ 2σ_j²`.
    pub fn new(shape: ShapeParams, tol: f64) -> Result<Self> {
        let g = TensorGaussKernel::new(shape.clone())?;
        let mut big_j = shape.tail_start().max(1);
        let t = loop {
            let t = 2.0 * g.shape.sum_sq_tail(big_j);
            if t <= tol {
                break t;
            }
            if big_j > 1 << 24 {
                return Err(Error::Truncation {
                    achieved: t,
                    target: tol,
                    terms: big_j,
                });
            }
            big_j *= 2;
        };
        let mut ln_p = 0.0;
        for j in 1..=big_j {
            ln_p += (shape.params(j)?.c2_minus_1() * 2.0 + shape.params(j)?.c2_minus_1().powi(2))
                .ln_1p()
                / 4.0;
        }
        Ok(TensorMehlerParams {
            shape,
            c_star: (ln_p + t / 2.0).exp(),
            c_star_rel_err: (t / 2.0).exp_m1(),
            coords: big_j,
        })
    }

    pub fn params(&self, j: usize) -> Result<MehlerParams> {
        self.shape.params(j)
    }

    /// `Π_{j>d} c_j = c_* / Π_{j≤d} c_j`.
    pub fn tail_c(&self, d: usize) -> Result<f64> {
        let mut p = self.c_star;
        for j in 1..=d {
            p /= self.params(j)?.c;
        }
        Ok(p)
    }

    /// The Hermite product with the matching Mehler weights.
    pub fn hermite_kernel(&self, trunc: TruncationConfig) -> Result<TensorHermiteKernel> {
        TensorHermiteKernel::new(
            WeightFamily::mehler(self.shape.clone()),
            trunc,
            Variant::Full,
        )
    }

    pub fn gauss_kernel(&self) -> Result<TensorGaussKernel> {
        TensorGaussKernel::new(self.shape.clone())
    }
}

/// A value of `Qf` with its relative error and the number of times `f` was
/// consulted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub value: f64,
    pub rel_error: f64,
    pub evaluations: usize,
}

/// `(Qf)(x)` for `f` depending on the first `d` coordinates.
pub fn tensor_q_apply(
    tp: &TensorMehlerParams,
    f: impl Fn(&[f64]) -> f64,
    d: usize,
    x: &SeqPoint,
) -> Result<QValue> {
    let g = tp.gauss_kernel()?;
    let v = gauss_domain_check(&g, x)?;
    if v.verdict != Membership::In {
        return Err(Error::Domain(format!(
            "point is not certified in l2(sigma^2): {}",
            v.certificate
        )));
    }
    // τ_j ≤ σ_j², so the exponent tail past the certified index is at most
    // the tail of Σ σ_j² x_j².
    let ex = gauss_exponent(&g, x, &SeqPoint::zero(), CERT_TOL)?;
    let big_j = ex.coords_used.max(x.dim());
    let mut expo = 0.0;
    for j in 1..=big_j {
        expo += tp.params(j)?.tau * x.coord(j).powi(2);
    }
    let calls = Cell::new(0usize);
    let mut t = Vec::with_capacity(d);
    for j in 1..=d {
        t.push(tp.params(j)?.c * x.coord(j));
    }
    let counted = |u: &[f64]| {
        calls.set(calls.get() + 1);
        f(u)
    };
    let fv = counted(&t);
    let value = tp.c_star.sqrt() * (-expo - ex.tail_bound / 2.0).exp() * fv;
    let rel_error = (tp.c_star_rel_err + (ex.tail_bound / 2.0).exp_m1()).max(0.0);
    Ok(QValue {
        value,
        rel_error,
        evaluations: calls.get(),
    })
}

/// Outcome of [`check_tensor_q_isometry_l2`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2IsometryCheck {
    pub q_norm_sq: f64,
    pub norm_sq: f64,
    pub residual: f64,
    /// `Π_{j>d} c_j E[exp(−(c_j²−1)X²/2)]`, equal to 1 in exact arithmetic.
    pub tail_factor: f64,
    pub tail_error: f64,
}

/// `∫(Qf)² dμ` against `∫f² dμ` for a polynomial in the first `d ≤ 3`
/// coordinates. Active coordinates use tensor Gauss–Hermite after the
/// substitution `u_j = c_j x_j`; every inactive coordinate contributes
/// `c_j (1 + 4τ_j)^{−1/2}`.
pub fn check_tensor_q_isometry_l2(
    tp: &TensorMehlerParams,
    f: &MultiExpansion,
    quad_nodes: usize,
) -> Result<L2IsometryCheck> {
    let d = f.dim();
    if d > 3 {
        return Err(Error::InputDomain(format!(
            "at most 3 active coordinates are supported, got {d}"
        )));
    }
    let deg = f.max_coord_degree();
    if quad_nodes < deg + 1 {
        return Err(Error::QuadratureDegree {
            nodes: quad_nodes,
            degree: 2 * deg,
        });
    }
    let rule = gh_rule(quad_nodes)?;
    let ps: Vec<MehlerParams> = (1..=d).map(|j| tp.params(j)).collect::<Result<_>>()?;
    let ratio = |u: &[f64]| {
        ps.iter()
            .zip(u)
            .map(|(p, &u)| (-((2.0 * p.tau + 0.5) / (p.c * p.c) - 0.5) * u * u).exp())
            .product::<f64>()
    };
    let active = tensor_integrate(&rule, d, |u| {
        let v = f.eval(u);
        v * v * ratio(u)
    })?;
    let norm_sq = tensor_integrate(&rule, d, |u| f.eval(u).powi(2))?;
    // Inactive factors: ln c_j − ln(1+4τ_j)/2 evaluated up to the certified
    // index; the rest lies within the c_* tail.
    let mut ln_tail = 0.0;
    for j in d + 1..=tp.coords {
        let p = tp.params(j)?;
        ln_tail += p.c.ln() - 0.5 * (4.0 * p.tau).ln_1p();
    }
    let tail_factor = ln_tail.exp();
    let tail_error = 2.0 * tp.c_star_rel_err;
    let q_norm_sq = active * tail_factor;
    Ok(L2IsometryCheck {
        q_norm_sq,
        norm_sq,
        residual: (q_norm_sq - norm_sq).abs(),
        tail_factor,
        tail_error,
    })
}

/// Outcome of [`check_tensor_q_rkhs_isometry`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkhsIsometryCheck {
    /// Largest `|Q(h_n)(x) − Π_j (q_j h_{n_j})(x_j) · Π_{j>d} c_j^{1/2}|`.
    pub intertwining_residual: f64,
    /// `Σ α_n c_n²`, which is also the `H(L)`-norm of `Qf` by construction.
    pub hk_norm_sq: f64,
    /// Largest `|K(x,x) − c_*^{−1} exp(2Σ τ_j x_j²/c_j²)|` over the grid.
    pub diagonal_residual: f64,
    /// Sum of the certified errors entering `diagonal_residual`.
    pub diagonal_bound: f64,
    /// Largest `|Q(K(·,x))(y) − c_*^{−1/2} e^{Στ_j x_j²/c_j²} L(y, x/c)|`.
    pub kernel_residual: f64,
    pub kernel_bound: f64,
}

/// Checks that `Q` carries `H(K)` onto the Gaussian space: pointwise
/// factorization on basis functions, and the kernel sections
/// `Q K(·,x) = c_*^{−1/2} e^{Σ τ_j x_j²/c_j²} L(·, x/c)`, whose norms give
/// `K(x,x) = c_*^{−1} e^{2Σ τ_j x_j²/c_j²}`.
pub fn check_tensor_q_rkhs_isometry(
    tp: &TensorMehlerParams,
    weights: &WeightFamily,
    f: &MultiExpansion,
    grid: &[Vec<f64>],
) -> Result<RkhsIsometryCheck> {
    match &weights.rule {
        WeightRule::Mehler { shape }
            if *shape == tp.shape && weights.alpha0 == Alpha0Rule::Ones => {}
        _ => {
            return Err(Error::Config(
                "weights must be the Mehler weights of the shape parameters".into(),
            ))
        }
    }
    let d = f.dim().max(grid.iter().map(|g| g.len()).max().unwrap_or(0));
    let ps: Vec<MehlerParams> = (1..=d).map(|j| tp.params(j)).collect::<Result<_>>()?;
    let tail_w = tp.tail_c(d)?.sqrt();

    let mut intertwining: f64 = 0.0;
    for n in f.terms.keys() {
        let basis = MultiExpansion::single(n.clone(), 1.0);
        for x in grid {
            let p = SeqPoint::finite(x.clone());
            let q = tensor_q_apply(tp, |u| basis.eval(u), d, &p)?;
            let direct: f64 = (0..d)
                .map(|j| q_basis(&ps[j], n.get(j).copied().unwrap_or(0), p.coord(j + 1)))
                .product::<f64>();
            intertwining = intertwining.max((q.value - direct * tail_w).abs());
        }
    }
    let hk_norm_sq = crate::poly::hk_norm_sq(f, weights)?.0;

    let k = tp.hermite_kernel(TruncationConfig {
        abs_tol: 1e-12,
        ..TruncationConfig::default()
    })?;
    let l = tp.gauss_kernel()?;
    let mut diagonal_residual: f64 = 0.0;
    let mut diagonal_bound: f64 = 0.0;
    let mut kernel_residual: f64 = 0.0;
    let mut kernel_bound: f64 = 0.0;
    for x in grid {
        let px = SeqPoint::finite(x.clone());
        let kxx = tensor_hermite_eval(&k, &px, &px)?;
        let s: f64 = (0..x.len())
            .map(|j| ps[j].tau * (x[j] / ps[j].c).powi(2))
            .sum();
        let rhs = (2.0 * s).exp() / tp.c_star;
        diagonal_residual = diagonal_residual.max((kxx.value - rhs).abs());
        diagonal_bound =
            diagonal_bound.max(kxx.error_bound + rhs * 2.0 * tp.c_star_rel_err + 1e-14 * rhs);

        let xc = SeqPoint::finite((0..x.len()).map(|j| x[j] / ps[j].c).collect());
        for y in grid {
            let py = SeqPoint::finite(y.clone());
            let ty = SeqPoint::finite((0..y.len()).map(|j| ps[j].c * y[j]).collect());
            let kv = tensor_hermite_eval(&k, &ty, &px)?;
            let ty_y: f64 = (0..y.len()).map(|j| ps[j].tau * y[j] * y[j]).sum();
            let lhs = tp.c_star.sqrt() * (-ty_y).exp() * kv.value;
            let lv = crate::tensor::tensor_gauss_eval(&l, &py, &xc)?
                .product_form
                .unwrap_or(f64::NAN);
            let rhs = s.exp() * lv / tp.c_star.sqrt();
            kernel_residual = kernel_residual.max((lhs - rhs).abs());
            kernel_bound = kernel_bound.max(
                tp.c_star.sqrt() * (-ty_y).exp() * kv.error_bound
                    + (lhs.abs() + rhs.abs()) * (tp.c_star_rel_err + 1e-13),
            );
        }
    }
    Ok(RkhsIsometryCheck {
        intertwining_residual: intertwining,
        hk_norm_sq,
        diagonal_residual,
        diagonal_bound,
        kernel_residual,
        kernel_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceRule;
    use approx::assert_relative_eq;

    fn halves() -> TensorMehlerParams {
        TensorMehlerParams::new(ShapeParams::geometric(1.0, 0.5), CERT_TOL).unwrap()
    }

    #[test]
    fn q_examples() {
        let p = mehler_from_sigma(1.0).unwrap();
        assert_relative_eq!(
            q_apply(&p, |_| 1.0, 0.0),
            1.3160740129524924608,
            max_relative = 1e-15
        );
        assert_eq!(q_basis(&p, 1, 0.0), 0.0);
        assert_relative_eq!(
            q_basis(&p, 0, 1.0),
            0.79823923930672811752,
            max_relative = 1e-14
        );
    }

    #[test]
    fn q_round_trip() {
        let p = mehler_from_sigma(1.0).unwrap();
        let h3 = |u: f64| HermiteIter::new(u).nth(3).unwrap();
        let v = q_inverse_apply(&p, |x| q_apply(&p, h3, x), 0.7);
        assert_relative_eq!(v, h3(0.7), epsilon = 1e-12);
        for s in [0.5, 2.0] {
            let p = mehler_from_sigma(s).unwrap();
            let g = |x: f64| (-s * s * x * x).exp();
            for i in 0..=100 {
                let x = -5.0 + 0.1 * i as f64;
                let back = q_apply(&p, |u| q_inverse_apply(&p, g, u), x);
                assert!((back - g(x)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn q_isometry_examples() {
        let p = mehler_from_sigma(1.0).unwrap();
        assert!(check_q_isometry(&p, &FiniteExpansion::basis(0), 1).unwrap() <= 1e-14);
        assert!(check_q_isometry(&p, &FiniteExpansion::basis(5), 6).unwrap() <= 1e-10);
        let f = FiniteExpansion::new(vec![0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(f.l2_norm_sq(), 10.0);
        assert!(check_q_isometry(&p, &f, 8).unwrap() <= 1e-10);
        assert!(matches!(
            check_q_isometry(&p, &f, 7),
            Err(Error::QuadratureDegree { .. })
        ));
    }

    #[test]
    fn c_star_for_halving_sigmas() {
        let tp = halves();
        assert_relative_eq!(tp.c_star, 1.5155131455643834574, max_relative = 1e-12);
        let v = tensor_q_apply(&tp, |_| 1.0, 0, &SeqPoint::zero()).unwrap();
        assert_relative_eq!(v.value, tp.c_star.sqrt(), max_relative = 1e-14);
        assert_eq!(v.evaluations, 1);
    }

    #[test]
    fn tensor_q_factorizes() {
        let tp = halves();
        let p1 = tp.params(1).unwrap();
        let x = SeqPoint::new(
            vec![0.8],
            crate::point::PointTail::Geometric { a: 0.5, q: 0.5 },
        );
        let f = |u: &[f64]| 1.0 + u[0] * u[0];
        let v = tensor_q_apply(&tp, f, 1, &x).unwrap();
        let mut tail_exp = 0.0;
        for j in 2..80 {
            tail_exp += tp.params(j).unwrap().tau * x.coord(j).powi(2);
        }
        let direct =
            q_apply(&p1, |u| 1.0 + u * u, 0.8) * (-tail_exp).exp() * tp.tail_c(1).unwrap().sqrt();
        assert_relative_eq!(v.value, direct, max_relative = 1e-10);
        let z = tensor_q_apply(&tp, |u| u[0], 1, &SeqPoint::zero()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn tensor_q_rejects_points_off_domain() {
        let tp = TensorMehlerParams::new(
            ShapeParams::new(vec![], SequenceRule::PowerLaw { a: 1.0, p: -1.0 }),
            1e-6,
        )
        .unwrap();
        let x = SeqPoint::new(vec![], crate::point::PointTail::Power { a: 1.0, p: -1.0 });
        assert!(matches!(
            tensor_q_apply(&tp, |_| 1.0, 0, &x),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn l2_isometry_examples() {
        let tp = halves();
        let one = check_tensor_q_isometry_l2(&tp, &MultiExpansion::single(vec![], 1.0), 1).unwrap();
        assert!(one.residual <= 1e-12, "{one:?}");
        let h11 =
            check_tensor_q_isometry_l2(&tp, &MultiExpansion::single(vec![1, 1], 1.0), 4).unwrap();
        assert!(h11.residual <= 1e-9);
        let x2 = MultiExpansion::monomial(&[2]);
        let c = check_tensor_q_isometry_l2(&tp, &x2, 4).unwrap();
        assert_relative_eq!(c.norm_sq, 3.0, max_relative = 1e-12);
        assert!(c.residual <= 1e-9);
    }

    #[test]
    fn rkhs_isometry() {
        let tp = halves();
        let w = WeightFamily::mehler(tp.shape.clone());
        let f = MultiExpansion::single(vec![1, 1], 1.0).plus(&MultiExpansion::single(vec![], 0.5));
        let grid: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![0.5, -1.0], vec![1.5, 0.3]];
        let r = check_tensor_q_rkhs_isometry(&tp, &w, &f, &grid).unwrap();
        assert!(r.intertwining_residual <= 1e-10, "{r:?}");
        assert!(r.diagonal_residual <= r.diagonal_bound, "{r:?}");
        assert!(r.kernel_residual <= r.kernel_bound, "{r:?}");
        let wrong = WeightFamily::mehler(ShapeParams::geometric(1.0, 0.25));
        assert!(matches!(
            check_tensor_q_rkhs_isometry(&tp, &wrong, &f, &grid),
            Err(Error::Config(_))
        ));
    }
}
