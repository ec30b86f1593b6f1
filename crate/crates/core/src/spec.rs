//! Versioned JSON descriptions of kernels and points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels1d::{TruncationConfig, UniHermiteKernel};
use crate::point::SeqPoint;
use crate::shape::ShapeParams;
use crate::tensor::{
    gauss_domain_check, tensor_gauss_eval, tensor_hermite_eval, Membership, TensorGaussKernel,
    TensorHermiteKernel, Variant,
};
use crate::weights::WeightFamily;

pub const SCHEMA: &str = "v1";

fn schema_v1() -> String {
    SCHEMA.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelKind {
    Hermite {
        weights: WeightFamily,
        #[serde(default)]
        variant: Variant,
        #[serde(default)]
        trunc: TruncationConfig,
    },
    Gauss {
        shape: ShapeParams,
    },
}

/// A kernel description. With `dim` set, only the first `dim` coordinates
/// take part and the kernel is the finite product of its univariate factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(default = "schema_v1")]
    pub schema: String,
    #[serde(flatten)]
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

/// A point file: `{"schema": "v1", "prefix": [...], "tail": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    #[serde(default = "schema_v1")]
    pub schema: String,
    #[serde(flatten)]
    pub point: SeqPoint,
}

impl PointSpec {
    pub fn new(point: SeqPoint) -> Self {
        PointSpec {
            schema: schema_v1(),
            point,
        }
    }
}

fn check_schema(s: &str) -> Result<()> {
    if s == SCHEMA {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unsupported schema {s:?}, expected {SCHEMA:?}"
        )))
    }
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        KernelSpec {
            schema: schema_v1(),
            kind,
            dim: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: KernelSpec =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("kernel spec: {e}")))?;
        check_schema(&spec.schema)?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel spec serializes")
    }

    pub fn with_tol(mut self, abs_tol: Option<f64>, max_terms: Option<usize>) -> Self {
        if let KernelKind::Hermite { trunc, .. } = &mut self.kind {
            if let Some(t) = abs_tol {
                trunc.abs_tol = t;
            }
            if let Some(m) = max_terms {
                trunc.max_terms = m;
            }
        }
        self
    }
}

pub fn point_from_json(s: &str) -> Result<SeqPoint> {
    let p: PointSpec = serde_json::from_str(s).map_err(|e| Error::Config(format!("point: {e}")))?;
    check_schema(&p.schema)?;
    p.point.validate()?;
    Ok(p.point)
}

/// A kernel value with its certified error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error_bound: f64,
}

fn finite_hermite(
    w: &WeightFamily,
    variant: Variant,
    trunc: TruncationConfig,
    d: usize,
    x: &SeqPoint,
    y: &SeqPoint,
) -> Result<Evaluation> {
    let mut value = 1.0;
    let mut err = 0.0;
    let tol = trunc.abs_tol / d.max(1) as f64;
    for j in 1..=d {
        let mut col = w.column(j)?;
        if variant == Variant::Primed {
            col = col.with_alpha0(1.0);
        }
        let k = UniHermiteKernel::new(
            col,
            TruncationConfig {
                abs_tol: tol,
                ..trunc
            },
        )?;
        let v = k.eval(x.coord(j), y.coord(j))?;
        err = err * (v.value.abs() + v.tail_bound) + value * v.tail_bound;
        value *= v.value;
    }
    Ok(Evaluation {
        value,
        error_bound: err.abs(),
    })
}

/// Evaluates the kernel described by `spec` at `(x, y)`.
///
/// Gaussian products are evaluated on the domain `ℓ²(σ²)` only; a point
/// outside it is a domain error.
pub fn evaluate(spec: &KernelSpec, x: &SeqPoint, y: &SeqPoint) -> Result<Evaluation> {
    x.validate()?;
    y.validate()?;
    match (&spec.kind, spec.dim) {
        (
            KernelKind::Hermite {
                weights,
                variant,
                trunc,
            },
            Some(d),
        ) => finite_hermite(weights, *variant, *trunc, d, x, y),
        (
            KernelKind::Hermite {
                weights,
                variant,
                trunc,
            },
            None,
        ) => {
            let k = TensorHermiteKernel::new(weights.clone(), *trunc, *variant)?;
            let v = tensor_hermite_eval(&k, x, y)?;
            Ok(Evaluation {
                value: v.value,
                error_bound: v.error_bound,
            })
        }
        (KernelKind::Gauss { shape }, Some(d)) => {
            shape.validate()?;
            let s: f64 = (1..=d)
                .map(|j| (shape.sigma(j) * (x.coord(j) - y.coord(j))).powi(2))
                .sum();
            Ok(Evaluation {
                value: (-s).exp(),
                error_bound: 0.0,
            })
        }
        (KernelKind::Gauss { shape }, None) => {
            let k = TensorGaussKernel::new(shape.clone())?;
            for (p, name) in [(x, "x"), (y, "y")] {
                let v = gauss_domain_check(&k, p)?;
                if v.verdict != Membership::In {
                    return Err(Error::Domain(format!(
                        "point {name} is not certified in l2(sigma^2): {}",
                        v.certificate
                    )));
                }
            }
            let v = tensor_gauss_eval(&k, x, y)?;
            Ok(Evaluation {
                value: v.product_form.unwrap_or(f64::NAN),
                error_bound: v.product_error,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::PointTail;
    use approx::assert_relative_eq;

    #[test]
    fn round_trip() {
        let spec = KernelSpec::new(KernelKind::Gauss {
            shape: ShapeParams::geometric(1.0, 0.5),
        });
        assert_eq!(KernelSpec::from_json(&spec.to_json()).unwrap(), spec);
        let p = PointSpec::new(SeqPoint::new(
            vec![1.0],
            PointTail::Power { a: 2.0, p: 1.0 },
        ));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(point_from_json(&s).unwrap(), p.point);
    }

    #[test]
    fn rejects_other_schema() {
        let s = r#"{"schema":"v2","family":"gauss","shape":{"tail":{"kind":"constant","c":1.0}}}"#;
        assert!(matches!(KernelSpec::from_json(s), Err(Error::Config(_))));
    }

    #[test]
    fn univariate_mehler() {
        let s = r#"{"family":"hermite","weights":{"rule":"mehler","shape":{"prefix":[1.0],"tail":{"kind":"geometric","a":1.0,"q":0.5}}},"dim":1}"#;
        let spec = KernelSpec::from_json(s).unwrap();
        let z = SeqPoint::zero();
        let v = evaluate(&spec, &z, &z).unwrap();
        assert_relative_eq!(v.value, 1.0 / 3f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn gauss_origin_and_domain() {
        let spec = KernelSpec::new(KernelKind::Gauss {
            shape: ShapeParams::geometric(1.0, 0.5),
        });
        let z = SeqPoint::zero();
        assert_eq!(evaluate(&spec, &z, &z).unwrap().value, 1.0);
        let spec = KernelSpec::new(KernelKind::Gauss {
            shape: ShapeParams::new(
                vec![],
                crate::sequence::SequenceRule::PowerLaw { a: 1.0, p: -1.0 },
            ),
        });
        let far = SeqPoint::new(vec![], PointTail::Power { a: 1.0, p: -1.0 });
        assert!(matches!(evaluate(&spec, &far, &z), Err(Error::Domain(_))));
    }
}
