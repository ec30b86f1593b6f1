use kernellab_core::isometry::{
    check_q_isometry, check_tensor_q_isometry_l2, check_tensor_q_rkhs_isometry, mehler_from_sigma,
    q_apply, q_basis, q_inverse_apply, tensor_q_apply, TensorMehlerParams,
};
use kernellab_core::kernels1d::FiniteExpansion;
use kernellab_core::point::{PointTail, SeqPoint};
use kernellab_core::poly::MultiExpansion;
use kernellab_core::shape::ShapeParams;
use kernellab_core::weights::WeightFamily;
use kernellab_core::Error;

fn halves() -> TensorMehlerParams {
    TensorMehlerParams::new(ShapeParams::geometric(1.0, 0.5), 1e-13).unwrap()
}

#[test]
fn univariate_map_values() {
    let p = mehler_from_sigma(1.0).unwrap();
    assert!((q_apply(&p, |_| 1.0, 0.0) - 1.3160740129524924608).abs() < 1e-15);
    assert!((q_apply(&p, |_| 1.0, 1.0) - 0.79823923930672811752).abs() < 1e-15);
    assert_eq!(q_basis(&p, 1, 0.0), 0.0);
    let g = |x: f64| q_basis(&p, 3, x);
    let h3 = |x: f64| (x * x * x - 3.0 * x) / 6f64.sqrt();
    assert!((q_inverse_apply(&p, g, 0.7) - h3(0.7)).abs() < 1e-12);
    assert!(matches!(
        mehler_from_sigma(-1.0),
        Err(Error::InputDomain(_))
    ));
}

#[test]
fn univariate_isometry_needs_enough_nodes() {
    let p = mehler_from_sigma(0.7).unwrap();
    let f = FiniteExpansion::new(vec![0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    assert!(check_q_isometry(&p, &f, 8).unwrap() <= 1e-10);
    assert!(matches!(
        check_q_isometry(&p, &f, 4),
        Err(Error::QuadratureDegree { .. })
    ));
}

#[test]
fn c_star_for_halving_shapes() {
    let tp = halves();
    assert!((tp.c_star - 1.5155131455643834574).abs() <= 1e-12);
    assert!(tp.c_star_rel_err <= 1e-13);
}

#[test]
fn tensor_map_at_origin_and_off_domain() {
    let tp = halves();
    let q = tensor_q_apply(&tp, |_| 1.0, 0, &SeqPoint::zero()).unwrap();
    assert!((q.value - tp.c_star.sqrt()).abs() <= 1e-12);
    assert_eq!(q.evaluations, 1);
    let q = tensor_q_apply(&tp, |u| u[0], 1, &SeqPoint::finite(vec![0.0, 2.0])).unwrap();
    assert_eq!(q.value, 0.0);
    // x_j = 4^j grows faster than σ_j = 2^{−j} decays.
    let far = SeqPoint::new(vec![], PointTail::Power { a: 1.0, p: -3.0 });
    let shape = ShapeParams::new(
        vec![],
        kernellab_core::sequence::SequenceRule::PowerLaw { a: 1.0, p: -1.0 },
    );
    let tp2 = TensorMehlerParams::new(shape, 1e-8);
    if let Ok(tp2) = tp2 {
        assert!(matches!(
            tensor_q_apply(&tp2, |_| 1.0, 0, &far),
            Err(Error::Domain(_))
        ));
    }
}

#[test]
fn tensor_isometry_examples() {
    let tp = halves();
    let one = MultiExpansion::single(vec![], 1.0);
    assert!(check_tensor_q_isometry_l2(&tp, &one, 2).unwrap().residual <= 1e-12);
    let h11 = MultiExpansion::single(vec![1, 1], 1.0);
    assert!(check_tensor_q_isometry_l2(&tp, &h11, 4).unwrap().residual <= 1e-9);
    let x1sq = MultiExpansion::monomial(&[2]);
    let c = check_tensor_q_isometry_l2(&tp, &x1sq, 4).unwrap();
    assert!((c.norm_sq - 3.0).abs() <= 1e-12 && c.residual <= 1e-9);
}

#[test]
fn rkhs_check_requires_matching_weights() {
    let tp = halves();
    let f = MultiExpansion::single(vec![1, 1], 1.0);
    let grid = vec![vec![0.3, -0.2]];
    let c = check_tensor_q_rkhs_isometry(&tp, &WeightFamily::mehler(tp.shape.clone()), &f, &grid)
        .unwrap();
    assert!(c.intertwining_residual <= 1e-10);
    assert!(c.diagonal_residual <= c.diagonal_bound + 1e-12);
    let other = WeightFamily::mehler(ShapeParams::geometric(1.0, 0.25));
    assert!(matches!(
        check_tensor_q_rkhs_isometry(&tp, &other, &f, &grid),
        Err(Error::Config(_))
    ));
}
