use approx::assert_relative_eq;

use super::*;
use crate::point::{PointTail, SeqPoint};
use crate::sequence::SequenceRule;

fn eg_sq() -> TensorHermiteKernel {
    // b = 1 and 2^{−r_j} = (j+1)^{−2}
    let w = WeightFamily::eg(
        SequenceRule::LogLinear {
            a: 0.0,
            b: 2.0,
            shift: 1.0,
        },
        SequenceRule::constant(1.0),
    );
    TensorHermiteKernel::new(w, TruncationConfig::default(), Variant::Full).unwrap()
}

fn pg_sq() -> TensorHermiteKernel {
    let w = WeightFamily::pg(SequenceRule::LogLinear {
        a: 0.0,
        b: 2.0,
        shift: 1.0,
    });
    TensorHermiteKernel::new(w, TruncationConfig::default(), Variant::Full).unwrap()
}

fn mehler_halves() -> TensorHermiteKernel {
    let w = WeightFamily::mehler(ShapeParams::geometric(1.0, 0.5));
    TensorHermiteKernel::new(w, TruncationConfig::default(), Variant::Full).unwrap()
}

fn inv_j() -> TensorGaussKernel {
    TensorGaussKernel::new(ShapeParams::new(
        vec![],
        SequenceRule::PowerLaw { a: 1.0, p: -1.0 },
    ))
    .unwrap()
}

fn power(a: f64, p: f64) -> SeqPoint {
    SeqPoint::new(vec![], PointTail::Power { a, p })
}

#[test]
fn gauss_domain_examples() {
    let k = inv_j();
    let v = |x: &SeqPoint| gauss_domain_check(&k, x).unwrap().verdict;
    assert_eq!(v(&SeqPoint::finite(vec![3.0, -2.0])), Membership::In);
    assert_eq!(v(&power(1.0, -0.4)), Membership::In);
    assert_eq!(v(&power(1.0, -1.0)), Membership::Out);
}

#[test]
fn gauss_domain_agrees_with_unit_vector_series() {
    let k = inv_j();
    for p in [-1.5, -1.0, -0.6, -0.4, 0.0, 0.7] {
        let x = power(2.0, p);
        assert_eq!(
            gauss_domain_check(&k, &x).unwrap().verdict,
            unit_vector_criterion(&k, &x).unwrap().verdict,
            "p = {p}"
        );
    }
}

#[test]
fn hermite_domain_examples() {
    let k = eg_sq();
    let v = |x: &SeqPoint| hermite_domain_check(&k, x).unwrap().verdict;
    assert_eq!(
        v(&SeqPoint::new(vec![1.0], PointTail::Constant { a: 7.0 })),
        Membership::In
    );
    assert_eq!(v(&power(1.0, -1.0)), Membership::Out);
    assert_eq!(v(&power(1.0, -0.4)), Membership::In);
}

#[test]
fn pg_domain_has_a_gap() {
    let k = pg_sq();
    assert_eq!(
        hermite_domain_check(&k, &power(1.0, -1.0)).unwrap().verdict,
        Membership::Out
    );
    assert_eq!(
        hermite_domain_check(&k, &power(1.0, 0.5)).unwrap().verdict,
        Membership::In
    );
}

#[test]
fn mehler_at_origin() {
    // Π_j √((1−β_j)/(1+β_j)) for σ_j = 2^{−j}, computed independently.
    let v = tensor_hermite_eval(&mehler_halves(), &SeqPoint::zero(), &SeqPoint::zero()).unwrap();
    assert!((v.value - 0.65984251138091963043).abs() <= v.error_bound.max(1e-14));
    assert!(v.error_bound <= 1e-9);
}

#[test]
fn primed_variant_dominates_one() {
    let k = TensorHermiteKernel {
        variant: Variant::Primed,
        ..mehler_halves()
    };
    let v = tensor_hermite_eval(&k, &SeqPoint::zero(), &SeqPoint::zero()).unwrap();
    assert!(v.value >= 1.0);
}

#[test]
fn cauchy_schwarz() {
    let k = eg_sq();
    let x = SeqPoint::finite(vec![2.5, 0.0, -1.0]);
    let y = SeqPoint::finite(vec![0.0, -2.0, 0.0, 1.5]);
    let xy = tensor_hermite_eval(&k, &x, &y).unwrap();
    let xx = tensor_hermite_eval(&k, &x, &x).unwrap();
    let yy = tensor_hermite_eval(&k, &y, &y).unwrap();
    assert!(
        xy.value.abs()
            <= (xx.value * yy.value).sqrt() + xy.error_bound + xx.error_bound + yy.error_bound
    );
}

#[test]
fn anova_matches_product() {
    let k = eg_sq();
    for &(a, b) in &[(-1.0, 0.5), (0.0, 2.0), (1.5, -0.7)] {
        let x = SeqPoint::finite(vec![a, b]);
        let y = SeqPoint::finite(vec![b, a]);
        let p = tensor_hermite_eval(&k, &x, &y).unwrap();
        let s = anova_superposition_eval(&k, &x, &y, None, 10).unwrap();
        assert!(
            (p.value - s.value).abs() <= p.error_bound + s.error_bound,
            "{p:?} {s:?}"
        );
        assert!(s.error_bound < 1e-8);
    }
}

#[test]
fn anova_empty_active_set() {
    let k = TensorHermiteKernel {
        variant: Variant::Primed,
        ..eg_sq()
    };
    let x = SeqPoint::finite(vec![0.3]);
    let v = anova_superposition_eval(&k, &x, &x, Some(&[]), 4).unwrap();
    assert_eq!(v.value, 1.0);
}

#[test]
fn anova_single_coordinate_two_terms() {
    let k = eg_sq();
    let x = SeqPoint::finite(vec![0.0, 1.2]);
    let y = SeqPoint::finite(vec![0.0, -0.4]);
    let v = anova_superposition_eval(&k, &x, &y, Some(&[2]), 4).unwrap();
    let uk = crate::kernels1d::UniHermiteKernel {
        weights: k.column(2).unwrap(),
        trunc: k.trunc,
    };
    let kstar = uk.centered_eval(1.2, -0.4).unwrap().value;
    // c_∅ = 1 and c_{2} = α_{0,2} = 1 for these weights.
    assert_relative_eq!(v.value, 1.0 + kstar, epsilon = 1e-9);
}

#[test]
fn series_parity_at_origin() {
    let k = eg_sq();
    let z = SeqPoint::zero();
    let a = multiindex_series_eval(&k, &z, &z, 6, 2).unwrap();
    let b = multiindex_series_eval(&k, &z, &z, 7, 2).unwrap();
    assert_relative_eq!(a.value, b.value, max_relative = 1e-15);
}

#[test]
fn series_single_coordinate_is_univariate() {
    let k = eg_sq();
    let x = SeqPoint::finite(vec![0.8]);
    let y = SeqPoint::finite(vec![-1.1]);
    let s = multiindex_series_eval(&k, &x, &y, 60, 1).unwrap();
    let uk = crate::kernels1d::UniHermiteKernel {
        weights: k.column(1).unwrap(),
        trunc: k.trunc,
    };
    let direct = 1.0 + uk.partial_sum_from1(0.8, -1.1, 60);
    let rest = tensor_hermite_eval(&k, &SeqPoint::zero(), &SeqPoint::zero()).unwrap();
    // Other coordinates sit at 0; the one-support terms there are absent
    // with active_cap 1, so compare only through coordinate 1.
    assert!(
        (s.value - direct).abs() <= s.error_bound + 1e-12,
        "{} {direct} {rest:?}",
        s.value
    );
}

#[test]
fn series_caps_ten_two() {
    // r_j = 3j keeps triple-support terms below the target.
    let w = WeightFamily::eg(
        SequenceRule::PowerLaw { a: 3.0, p: 1.0 },
        SequenceRule::constant(1.0),
    );
    let k = TensorHermiteKernel::new(w, TruncationConfig::default(), Variant::Full).unwrap();
    let x = SeqPoint::finite(vec![0.5, -1.0]);
    let y = SeqPoint::finite(vec![1.0, 0.3]);
    let s = multiindex_series_eval(&k, &x, &y, 10, 2).unwrap();
    let p = tensor_hermite_eval(&k, &x, &y).unwrap();
    assert!((s.value - p.value).abs() <= 1e-6, "{} {}", s.value, p.value);
    assert!((s.value - p.value).abs() <= s.error_bound + p.error_bound);
}

#[test]
fn series_refuses_huge_work() {
    let k = pg_sq();
    let x = SeqPoint::finite(vec![1.0; 8]);
    let r = multiindex_series_eval(&k, &x, &x, 1_000_000, 8);
    assert!(matches!(r, Err(Error::Refused(_))), "{r:?}");
}

#[test]
fn gauss_examples() {
    let k = inv_j();
    let x = SeqPoint::finite(vec![0.5, 1.0]);
    let v = tensor_gauss_eval(&k, &x, &x).unwrap();
    assert_eq!((v.product_form, v.series_form), (Some(1.0), Some(1.0)));

    let out = power(1.0, -1.0);
    let v = tensor_gauss_eval(&k, &out, &out).unwrap();
    assert_eq!((v.product_form, v.series_form), (Some(1.0), Some(0.0)));

    let v = tensor_gauss_eval(&k, &x, &out).unwrap();
    assert_eq!((v.product_form, v.series_form), (Some(0.0), Some(0.0)));

    let shifted = out.with_coord(1, out.coord(1) + 1.0);
    let v = tensor_gauss_eval(&k, &out, &shifted).unwrap();
    assert_relative_eq!(
        v.product_form.unwrap(),
        (-1.0f64).exp(),
        max_relative = 1e-12
    );
    assert_eq!(v.series_form, Some(0.0));
}

#[test]
fn gauss_value_matches_direct_sum() {
    let k = TensorGaussKernel::new(ShapeParams::geometric(1.0, 0.5)).unwrap();
    let x = SeqPoint::new(vec![1.0], PointTail::Geometric { a: 1.0, q: 0.5 });
    let y = SeqPoint::zero();
    let v = tensor_gauss_eval(&k, &x, &y).unwrap();
    // Σ 4^{−j} x_j² with x_1 = 1, x_j = 2^{−(j−1)}: 1/4 + Σ_{j≥2} 4^{−j}·4^{1−j}.
    let s = 0.25 + (2..60).map(|j| 4f64.powi(1 - 2 * j)).sum::<f64>();
    assert_relative_eq!(v.product_form.unwrap(), (-s).exp(), max_relative = 1e-12);
    assert_relative_eq!(v.series_form.unwrap(), (-s).exp(), max_relative = 1e-12);
}

#[test]
fn gram_matrices_are_psd() {
    let pts: Vec<SeqPoint> = (0..6)
        .map(|i| SeqPoint::finite(vec![i as f64 * 0.4 - 1.0, 1.0 - i as f64 * 0.3]))
        .collect();
    let (g, err) = tensor_hermite_gram(&eg_sq(), &pts).unwrap();
    assert!(err < 1e-8);
    let tr = g.trace();
    assert!(crate::kernels1d::min_eigenvalue(&g) >= -1e-9 * tr);
    let g = tensor_gauss_gram(&inv_j(), &pts).unwrap();
    assert!(crate::kernels1d::min_eigenvalue(&g) >= -1e-9 * g.trace());
}

#[test]
fn l2_criterion_agrees_with_diagonal_certificate() {
    let k = eg_sq();
    for p in [-2.0, -1.0, -0.7, -0.4, 0.0, 0.5, 1.0] {
        let x = power(1.5, p);
        let a = l2_a1_criterion(&k, &x).unwrap().verdict;
        let b = diagonal_series_certificate(&k, &x).unwrap().verdict;
        assert_eq!(a, b, "p = {p}");
    }
}

#[test]
fn mu_proxy_has_no_violations() {
    let m = mu_domain_proxy(&eg_sq(), 50, 200, 7).unwrap();
    assert_eq!(m.violations, 0);
    assert!(m.mean_partial <= m.expectation_bound * 1.5);
}

fn pg_witness_weights() -> WeightFamily {
    // 2^{−r_j} = j^{−2}
    WeightFamily::pg(SequenceRule::LogLinear {
        a: 0.0,
        b: 2.0,
        shift: 0.0,
    })
}

#[test]
fn witness_nu0_one() {
    let w = pg_strict_inclusion_witness(&pg_witness_weights(), 1, Some(1.5), 10_000).unwrap();
    assert!(w.valid, "{:#?}", w.certificates);
    assert_eq!(w.epsilon, 1.0);
    assert_relative_eq!(w.coord(16), 2.0, max_relative = 1e-12);
    let p = w.point.clone().unwrap();
    assert_relative_eq!(p.coord(81), 81f64.powf(0.25), max_relative = 1e-12);
}

#[test]
fn witness_nu0_two() {
    let w = pg_strict_inclusion_witness(&pg_witness_weights(), 2, None, 10_000).unwrap();
    assert!(w.valid, "{:#?}", w.certificates);
}

#[test]
fn witness_sub_exponential() {
    let w = WeightFamily::eg(
        SequenceRule::LogLinear {
            a: 0.0,
            b: 2.0,
            shift: 0.0,
        },
        SequenceRule::constant(0.5),
    );
    let wit = pg_strict_inclusion_witness(&w, 1, None, 10_000).unwrap();
    assert!(wit.valid, "{:#?}", wit.certificates);
}

#[test]
fn witness_rejects_constant_exponent() {
    let w = WeightFamily::pg(SequenceRule::constant(3.0));
    assert!(matches!(
        pg_strict_inclusion_witness(&w, 1, None, 100),
        Err(Error::Unsupported(_))
    ));
}
