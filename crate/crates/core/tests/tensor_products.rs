use kernellab_core::kernels1d::TruncationConfig;
use kernellab_core::point::{PointTail, SeqPoint};
use kernellab_core::sequence::SequenceRule;
use kernellab_core::shape::ShapeParams;
use kernellab_core::spec::{evaluate, point_from_json, KernelKind, KernelSpec};
use kernellab_core::tensor::{
    anova_superposition_eval, hermite_domain_check, tensor_gauss_eval, tensor_hermite_eval,
    Membership, TensorGaussKernel, TensorHermiteKernel, Variant,
};
use kernellab_core::weights::WeightFamily;
use kernellab_core::Error;

fn eg() -> TensorHermiteKernel {
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

#[test]
fn anova_agrees_with_product_on_a_grid() {
    let k = eg();
    let vals = [-2.0, -1.0, 0.0, 1.0, 2.0];
    for &a in &vals {
        for &b in &vals {
            let x = SeqPoint::finite(vec![a, b]);
            let y = SeqPoint::finite(vec![b, -a]);
            let p = tensor_hermite_eval(&k, &x, &y).unwrap();
            let s = anova_superposition_eval(&k, &x, &y, Some(&[1, 2]), 2).unwrap();
            assert!(
                (p.value - s.value).abs() <= p.error_bound + s.error_bound,
                "({a},{b}): {p:?} {s:?}"
            );
        }
    }
}

#[test]
fn bounded_points_are_in_the_domain() {
    let x = SeqPoint::new(vec![], PointTail::Constant { a: 3.0 });
    assert_eq!(
        hermite_domain_check(&eg(), &x).unwrap().verdict,
        Membership::In
    );
}

#[test]
fn mehler_product_is_inverse_c_star_at_origin() {
    let k = TensorHermiteKernel::new(
        WeightFamily::mehler(ShapeParams::geometric(1.0, 0.5)),
        TruncationConfig::default(),
        Variant::Full,
    )
    .unwrap();
    let v = tensor_hermite_eval(&k, &SeqPoint::zero(), &SeqPoint::zero()).unwrap();
    assert!((v.value * 1.5155131455643834574 - 1.0).abs() <= 2.0 * v.error_bound + 1e-12);
}

#[test]
fn gaussian_forms_off_domain() {
    let k = TensorGaussKernel::new(ShapeParams::new(
        vec![],
        SequenceRule::PowerLaw { a: 1.0, p: -1.0 },
    ))
    .unwrap();
    let x = SeqPoint::new(vec![], PointTail::Power { a: 1.0, p: -1.0 });
    let v = tensor_gauss_eval(&k, &x, &x).unwrap();
    assert_eq!(v.product_form, Some(1.0));
    assert_eq!(v.series_form, Some(0.0));
    assert_eq!(v.x_domain, Membership::Out);
}

#[test]
fn json_specs_drive_evaluation() {
    let spec = KernelSpec::new(KernelKind::Gauss {
        shape: ShapeParams::geometric(1.0, 0.5),
    });
    let z = point_from_json(r#"{"schema":"v1"}"#).unwrap();
    assert_eq!(evaluate(&spec, &z, &z).unwrap().value, 1.0);
    let spec = KernelSpec::from_json(&spec.to_json()).unwrap();
    let bad = SeqPoint::new(vec![], PointTail::Power { a: 1.0, p: -1.0 });
    let narrow = KernelSpec::new(KernelKind::Gauss {
        shape: ShapeParams::new(vec![], SequenceRule::PowerLaw { a: 1.0, p: -1.0 }),
    });
    let r = evaluate(&narrow, &bad, &z);
    assert!(matches!(r, Err(Error::Domain(_))), "{r:?}");
    assert!(matches!(KernelSpec::from_json("{"), Err(Error::Config(_))));
}
