//! Named verification suites. Each case compares a computed quantity with an
//! independently obtained one and reports the residual.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite::HermiteIter;
use crate::isometry::{
    check_q_isometry, check_tensor_q_isometry_l2, check_tensor_q_rkhs_isometry, mehler_from_sigma,
    mehler_identity_check, q_apply, q_inverse_apply, tensor_q_apply, TensorMehlerParams,
};
use crate::kernels1d::{
    gauss_kernel_eval, gram_matrix, hermite_gram, min_eigenvalue, FiniteExpansion,
    TruncationConfig, UniGaussKernel, UniHermiteKernel,
};
use crate::point::{PointTail, SeqPoint};
use crate::poly::{hk_norm_sq, superposition_norm_sq, MultiExpansion};
use crate::quadrature::{anova_decompose, gh_rule, tensor_integrate};
use crate::report::{CaseResult, Provenance, VerificationReport};
use crate::sequence::SequenceRule;
use crate::shape::ShapeParams;
use crate::tensor::{
    diagonal_series_certificate, gauss_domain_check, hermite_domain_check, l2_a1_criterion,
    multiindex_series_eval, pg_strict_inclusion_witness, product_and_superposition,
    tensor_gauss_gram, tensor_hermite_gram, Membership, TensorGaussKernel, TensorHermiteKernel,
    Variant,
};
use crate::weights::{Alpha0Rule, UniWeights, WeightFamily};

pub const SUITES: &[&str] = &[
    "mehler",
    "isometry-q",
    "isometry-Q",
    "psd",
    "anova",
    "domains",
    "series-consistency",
    "bounds",
];

type Run = Box<dyn Fn() -> std::result::Result<f64, String> + Send + Sync>;

struct Case {
    id: String,
    inputs: String,
    tolerance: f64,
    provenance: Provenance,
    run: Run,
}

fn case<F>(
    id: impl Into<String>,
    inputs: impl Into<String>,
    tolerance: f64,
    provenance: Provenance,
    f: F,
) -> Case
where
    F: Fn() -> Result<f64> + Send + Sync + 'static,
{
    Case {
        id: id.into(),
        inputs: inputs.into(),
        tolerance,
        provenance,
        run: Box::new(move || f().map_err(|e| e.to_string())),
    }
}

fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

/// Runs the named suite. Cases run in parallel; the report is sorted by id.
pub fn run_suite(name: &str, seed: u64) -> Result<VerificationReport> {
    let cases = match name {
        "mehler" => mehler_cases(),
        "isometry-q" => isometry_q_cases(seed),
        "isometry-Q" => isometry_big_q_cases(seed),
        "psd" => psd_cases(seed),
        "anova" => anova_cases(),
        "domains" => domain_cases(),
        "series-consistency" => consistency_cases(seed),
        "bounds" => bound_cases(),
        _ => {
            return Err(Error::Config(format!(
                "unknown suite {name:?}; available suites: {}",
                SUITES.join(", ")
            )));
        }
    };
    let results: Vec<CaseResult> = cases
        .par_iter()
        .map(|c| {
            let t = Instant::now();
            let r = (c.run)();
            CaseResult::new(
                &c.id,
                &c.inputs,
                r,
                c.tolerance,
                c.provenance,
                t.elapsed().as_secs_f64() * 1e3,
            )
        })
        .collect();
    Ok(VerificationReport::new(name, seed, results))
}

const SIGMAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

/// `β` from `β/(2(1−β)²) = σ²` by bisection on `(0, 1)`.
pub fn beta_by_bisection(sigma: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid / (2.0 * (1.0 - mid).powi(2)) < sigma * sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn mehler_cases() -> Vec<Case> {
    let mut out = Vec::new();
    for s in SIGMAS {
        let inp = format!("sigma={s}");
        out.push(case(
            format!("mehler/variance/{s}"),
            &inp,
            1e-12,
            Provenance::Reference,
            move || Ok(mehler_from_sigma(s)?.variance_residual()),
        ));
        out.push(case(
            format!("mehler/tau/{s}"),
            &inp,
            1e-12,
            Provenance::Reference,
            move || Ok(mehler_from_sigma(s)?.isometry_residual()),
        ));
        out.push(case(
            format!("mehler/bisection-beta/{s}"),
            &inp,
            1e-12,
            Provenance::Derived,
            move || {
                let p = mehler_from_sigma(s)?;
                let b = beta_by_bisection(s);
                Ok((p.beta - b).abs() / b)
            },
        ));
        out.push(case(
            format!("mehler/bisection-c/{s}"),
            &inp,
            1e-12,
            Provenance::Derived,
            move || {
                let p = mehler_from_sigma(s)?;
                let b = beta_by_bisection(s);
                let c2 = (1.0 + b) / (1.0 - b);
                Ok((p.c * p.c - c2).abs() / c2)
            },
        ));
    }
    out.push(case(
        "mehler/sigma-one",
        "sigma=1",
        1e-14,
        Provenance::Trivial,
        || {
            let p = mehler_from_sigma(1.0)?;
            Ok((p.beta - 0.5)
                .abs()
                .max((p.tau - 0.5).abs())
                .max((p.c - 3f64.sqrt()).abs()))
        },
    ));
    for s in [0.5, 1.0, 2.0] {
        let inp = format!("sigma={s};grid=21x21;range=3");
        out.push(case(
            format!("mehler/identity-grid/{s}"),
            &inp,
            1e-8,
            Provenance::Reference,
            move || {
                let p = mehler_from_sigma(s)?;
                let mut worst: f64 = 0.0;
                for i in 0..21 {
                    for k in 0..21 {
                        let x = -3.0 + 0.3 * i as f64;
                        let y = -3.0 + 0.3 * k as f64;
                        worst = worst.max(mehler_identity_check(&p, x, y, 1e-10)?.residual);
                    }
                }
                Ok(worst)
            },
        ));
        out.push(case(
            format!("mehler/identity-tail/{s}"),
            &inp,
            1e-10,
            Provenance::Reference,
            move || {
                let p = mehler_from_sigma(s)?;
                mehler_identity_check(&p, 3.0, 3.0, 1e-10).map(|c| c.tail_bound)
            },
        ));
    }
    out
}

fn random_coeffs(rng: &mut ChaCha8Rng, deg: usize) -> Vec<f64> {
    (0..=deg)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn isometry_q_cases(seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..50 {
        let deg = rng.random_range(0..=10);
        let s = SIGMAS[i % SIGMAS.len()];
        let f = FiniteExpansion::new(random_coeffs(&mut rng, deg));
        let inp = format!("sigma={s};coeffs={:?}", f.coeffs);
        out.push(case(
            format!("isometry-q/l2/{i:02}"),
            inp,
            1e-10,
            Provenance::Reference,
            move || check_q_isometry(&mehler_from_sigma(s)?, &f, deg + 1),
        ));
    }
    for s in SIGMAS {
        out.push(case(
            format!("isometry-q/inverse/{s}"),
            format!("sigma={s}"),
            1e-12,
            Provenance::Trivial,
            move || {
                let p = mehler_from_sigma(s)?;
                let f = |x: f64| 1.0 + x - 0.5 * x * x;
                let mut worst: f64 = 0.0;
                for i in 0..=20 {
                    let x = -2.0 + 0.2 * i as f64;
                    let back = q_inverse_apply(&p, |u| q_apply(&p, f, u), x);
                    worst = worst.max((back - f(x)).abs() / (1.0 + f(x).abs()));
                }
                Ok(worst)
            },
        ));
    }
    out
}

fn random_multi(rng: &mut ChaCha8Rng, dim: usize, max_deg: usize) -> MultiExpansion {
    let mut f = MultiExpansion::new();
    let terms = rng.random_range(1..=6);
    for _ in 0..terms {
        let n: Vec<usize> = (0..dim).map(|_| rng.random_range(0..=max_deg)).collect();
        f.add(n, rng.sample::<f64, _>(StandardNormal));
    }
    f
}

fn halves() -> ShapeParams {
    // σ_j = 2^{−j}
    ShapeParams::geometric(1.0, 0.5)
}

fn isometry_big_q_cases(seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    let mut out = Vec::new();
    for i in 0..20 {
        let dim = rng.random_range(1..=3);
        let f = random_multi(&mut rng, dim, 4);
        let inp = format!("sigma=2^-j;f={:?}", f.to_spec());
        let g = f.clone();
        out.push(case(
            format!("isometry-Q/l2/{i:02}"),
            &inp,
            1e-9,
            Provenance::Reference,
            move || {
                let tp = TensorMehlerParams::new(halves(), 1e-13)?;
                Ok(check_tensor_q_isometry_l2(&tp, &g, 6)?.residual)
            },
        ));
        out.push(case(
            format!("isometry-Q/tail/{i:02}"),
            &inp,
            1e-12,
            Provenance::Derived,
            move || {
                let tp = TensorMehlerParams::new(halves(), 1e-13)?;
                Ok(check_tensor_q_isometry_l2(&tp, &f, 6)?.tail_error)
            },
        ));
    }
    let grid: Vec<Vec<f64>> = vec![vec![0.0], vec![0.5, -1.0], vec![-1.2, 0.3, 0.8]];
    let f = MultiExpansion::single(vec![1], 1.0).plus(&MultiExpansion::single(vec![0, 2, 1], -0.5));
    let inp = format!("sigma=2^-j;grid={grid:?}");
    let (g2, f2) = (grid.clone(), f.clone());
    out.push(case(
        "isometry-Q/rkhs-intertwining",
        &inp,
        1e-12,
        Provenance::Derived,
        move || {
            let tp = TensorMehlerParams::new(halves(), 1e-13)?;
            Ok(
                check_tensor_q_rkhs_isometry(&tp, &WeightFamily::mehler(halves()), &f2, &g2)?
                    .intertwining_residual,
            )
        },
    ));
    out.push(case(
        "isometry-Q/rkhs-diagonal",
        &inp,
        0.0,
        Provenance::Reference,
        move || {
            let tp = TensorMehlerParams::new(halves(), 1e-13)?;
            let c = check_tensor_q_rkhs_isometry(&tp, &WeightFamily::mehler(halves()), &f, &grid)?;
            Ok((c.diagonal_residual - c.diagonal_bound - 1e-12).max(0.0)
                + (c.kernel_residual - c.kernel_bound - 1e-12).max(0.0))
        },
    ));
    out.push(case(
        "isometry-Q/single-evaluation",
        "x=(1,-1)",
        0.0,
        Provenance::Trivial,
        || {
            let tp = TensorMehlerParams::new(halves(), 1e-13)?;
            let q = tensor_q_apply(&tp, |u| u[0] + u[1], 2, &SeqPoint::finite(vec![1.0, -1.0]))?;
            Ok(flag(q.evaluations == 1))
        },
    ));
    out
}

fn log_sq() -> SequenceRule {
    // 2^{r_j} = (j+1)^2
    SequenceRule::LogLinear {
        a: 0.0,
        b: 2.0,
        shift: 1.0,
    }
}

/// EG weights with `b = 1` and `2^{−r_j} = (j+1)^{−2}`.
pub fn eg_reference() -> WeightFamily {
    WeightFamily::eg(log_sq(), SequenceRule::constant(1.0))
}

/// PG weights with `r_j = 2 log₂(j+1)`.
pub fn pg_reference() -> WeightFamily {
    WeightFamily::pg(log_sq())
}

fn psd_residual(g: &nalgebra::DMatrix<f64>) -> f64 {
    let tr = g.trace();
    (-min_eigenvalue(g)).max(0.0) / tr.max(f64::MIN_POSITIVE)
}

fn psd_cases(seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x75d);
    let kinds = [
        "uni-hermite",
        "uni-centered",
        "uni-gauss",
        "tensor-hermite-eg",
        "tensor-gauss",
        "tensor-mehler",
    ];
    let mut out = Vec::new();
    for i in 0..100 {
        let kind = kinds[i % kinds.len()];
        let n = rng.random_range(2..=15);
        let dim = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let inp = format!("{kind};{pts:?}");
        out.push(case(
            format!("psd/{kind}/{i:03}"),
            inp,
            1e-9,
            Provenance::Reference,
            move || {
                let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
                let seq: Vec<SeqPoint> = pts.iter().map(|p| SeqPoint::finite(p.clone())).collect();
                let trunc = TruncationConfig {
                    abs_tol: 1e-10,
                    ..TruncationConfig::default()
                };
                let g = match kind {
                    "uni-hermite" => {
                        hermite_gram(
                            &UniHermiteKernel::new(UniWeights::pg(4.0), trunc)?,
                            &xs,
                            false,
                        )?
                        .0
                    }
                    "uni-centered" => {
                        hermite_gram(
                            &UniHermiteKernel::new(UniWeights::eg(1.0, 1.0), trunc)?,
                            &xs,
                            true,
                        )?
                        .0
                    }
                    "uni-gauss" => gram_matrix(&xs, |a, b| {
                        gauss_kernel_eval(&UniGaussKernel { sigma: 0.8 }, *a, *b)
                    }),
                    "tensor-hermite-eg" => {
                        tensor_hermite_gram(
                            &TensorHermiteKernel::new(eg_reference(), trunc, Variant::Full)?,
                            &seq,
                        )?
                        .0
                    }
                    "tensor-gauss" => tensor_gauss_gram(&TensorGaussKernel::new(halves())?, &seq)?,
                    _ => {
                        tensor_hermite_gram(
                            &TensorHermiteKernel::new(
                                WeightFamily::mehler(halves()),
                                trunc,
                                Variant::Full,
                            )?,
                            &seq,
                        )?
                        .0
                    }
                };
                Ok(psd_residual(&g))
            },
        ));
    }
    out
}

type Poly = fn(&[f64]) -> f64;

/// Test functions for the ANOVA checks, with their dimension.
pub const ANOVA_SET: [(&str, usize, Poly); 3] = [
    ("x1x2+x1", 2, |x| x[0] * x[1] + x[0]),
    ("1+x1^2x3-2x2x3+x2^3", 3, |x| {
        1.0 + x[0] * x[0] * x[2] - 2.0 * x[1] * x[2] + x[1].powi(3)
    }),
    ("(x1+x2+x3)^2", 3, |x| (x[0] + x[1] + x[2]).powi(2)),
];

fn anova_cases() -> Vec<Case> {
    let mut out = Vec::new();
    for (name, dim, f) in ANOVA_SET {
        let inp = format!("f={name};nodes=6");
        out.push(case(
            format!("anova/reconstruction/{name}"),
            &inp,
            1e-9,
            Provenance::Trivial,
            move || {
                let rule = gh_rule(6)?;
                let a = anova_decompose(f, dim, &rule)?;
                let n = rule.len();
                let mut worst: f64 = 0.0;
                for flat in 0..n.pow(dim as u32) {
                    let idx: Vec<usize> = (0..dim).map(|b| flat / n.pow(b as u32) % n).collect();
                    let x: Vec<f64> = idx.iter().map(|&i| rule.nodes[i]).collect();
                    worst = worst.max((a.reconstruct_at_nodes(&idx) - f(&x)).abs());
                }
                Ok(worst)
            },
        ));
        out.push(case(
            format!("anova/orthogonality/{name}"),
            &inp,
            1e-9,
            Provenance::Reference,
            move || {
                let a = anova_decompose(f, dim, &gh_rule(6)?)?;
                let sets = a.sets();
                let mut worst: f64 = 0.0;
                for (i, u) in sets.iter().enumerate() {
                    for v in &sets[i + 1..] {
                        worst = worst.max(a.inner(u, v)?.abs());
                    }
                }
                Ok(worst)
            },
        ));
        out.push(case(
            format!("anova/variance/{name}"),
            &inp,
            1e-9,
            Provenance::Reference,
            move || {
                let a = anova_decompose(f, dim, &gh_rule(6)?)?;
                let s: f64 = a
                    .variances
                    .iter()
                    .filter(|(u, _)| !u.is_empty())
                    .map(|(_, v)| v)
                    .sum();
                Ok((s - a.total_variance).abs())
            },
        ));
        out.push(case(
            format!("anova/marginals/{name}"),
            &inp,
            1e-9,
            Provenance::Trivial,
            move || {
                let a = anova_decompose(f, dim, &gh_rule(6)?)?;
                let mut worst: f64 = 0.0;
                for u in a.sets().iter().filter(|u| !u.is_empty()) {
                    worst = worst.max(a.max_marginal_mean(u)?);
                }
                Ok(worst)
            },
        ));
    }
    for x in [-2.0, 0.0, 1.3] {
        out.push(case(
            format!("anova/centered-mean/{x}"),
            format!("x={x};mehler sigma=1"),
            1e-9,
            Provenance::Reference,
            move || {
                let k = UniHermiteKernel::new(
                    UniWeights::mehler(0.5),
                    TruncationConfig {
                        abs_tol: 1e-13,
                        ..TruncationConfig::default()
                    },
                )?;
                let rule = gh_rule(60)?;
                let mut s = 0.0;
                for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
                    s += w * k.centered_eval(x, y)?.value;
                }
                Ok(s.abs())
            },
        ));
    }
    for (label, w) in superposition_weights() {
        for (pname, f) in superposition_polys() {
            let inp = format!("{label};{pname}");
            let (w, f) = (w.clone(), f.clone());
            out.push(case(
                format!("anova/superposition-norm/{label}/{pname}"),
                inp,
                1e-10,
                Provenance::Derived,
                move || {
                    let brute = brute_force_hk_norm_sq(&f, &w)?;
                    let s = superposition_norm_sq(&f, &w)?;
                    let h = hk_norm_sq(&f, &w)?.0;
                    Ok(((s - brute).abs().max((h - brute).abs())) / brute.max(1.0))
                },
            ));
        }
    }
    out
}

/// Weights with nontrivial `α_{0,j} = 1 + 2^{−(j+1)}`.
pub fn superposition_weights() -> Vec<(&'static str, WeightFamily)> {
    let a0 = Alpha0Rule::OnePlus {
        deviation: SequenceRule::Geometric { a: 0.5, q: 0.5 },
    };
    vec![
        ("eg", eg_reference().with_alpha0(a0.clone())),
        ("pg", pg_reference().with_alpha0(a0)),
    ]
}

/// Monomial-basis polynomials in at most 2 variables of degree at most 2.
pub fn superposition_polys() -> Vec<(&'static str, MultiExpansion)> {
    let m = |n: &[usize], c: f64| MultiExpansion::monomial(n).scaled(c);
    vec![
        ("1", m(&[], 1.0)),
        ("x1", m(&[1], 1.0)),
        ("x2^2-1", m(&[0, 2], 1.0).plus(&m(&[], -1.0))),
        ("x1x2+3", m(&[1, 1], 1.0).plus(&m(&[], 3.0))),
        (
            "x1^2+2x2-x1",
            m(&[2], 1.0).plus(&m(&[0, 1], 2.0)).plus(&m(&[1], -1.0)),
        ),
    ]
}

/// `Σ_n α_n c_n²` with `c_n` projected by quadrature and `α_n` multiplied
/// out over 200 coordinates.
fn brute_force_hk_norm_sq(f: &MultiExpansion, w: &WeightFamily) -> Result<f64> {
    let rule = gh_rule(4)?;
    let d = 2;
    let mut total = 0.0;
    for n1 in 0..=2usize {
        for n2 in 0..=2usize {
            let c = tensor_integrate(&rule, d, |u| {
                let h1 = HermiteIter::new(u[0]).nth(n1).unwrap_or(0.0);
                let h2 = HermiteIter::new(u[1]).nth(n2).unwrap_or(0.0);
                f.eval(u) * h1 * h2
            })?;
            let mut a = 1.0;
            for j in 1..=200 {
                let nu = match j {
                    1 => n1,
                    2 => n2,
                    _ => 0,
                };
                a *= if nu == 0 {
                    w.alpha0(j)?
                } else {
                    w.alpha(nu, j)?.value
                };
            }
            total += a * c * c;
        }
    }
    Ok(total)
}

fn power(a: f64, p: f64) -> SeqPoint {
    SeqPoint::new(vec![], PointTail::Power { a, p })
}

fn membership_residual(got: Membership, want: Membership) -> f64 {
    flag(got == want)
}

fn domain_cases() -> Vec<Case> {
    use Membership::{In, Out};
    let mut out = Vec::new();
    let inv_j = || {
        TensorGaussKernel::new(ShapeParams::new(
            vec![],
            SequenceRule::PowerLaw { a: 1.0, p: -1.0 },
        ))
    };
    let gauss: [(&str, SeqPoint, Membership); 3] = [
        ("finite", SeqPoint::finite(vec![3.0, -2.0]), In),
        ("j^0.4", power(1.0, -0.4), In),
        ("j", power(1.0, -1.0), Out),
    ];
    for (name, x, want) in gauss {
        out.push(case(
            format!("domains/gauss/{name}"),
            format!("sigma=1/j;x={x:?}"),
            0.0,
            Provenance::Reference,
            move || {
                Ok(membership_residual(
                    gauss_domain_check(&inv_j()?, &x)?.verdict,
                    want,
                ))
            },
        ));
    }
    let eg =
        || TensorHermiteKernel::new(eg_reference(), TruncationConfig::default(), Variant::Full);
    let hermite: [(&str, SeqPoint, Membership); 3] = [
        (
            "constant",
            SeqPoint::new(vec![1.0], PointTail::Constant { a: 7.0 }),
            In,
        ),
        ("j", power(1.0, -1.0), Out),
        ("j^0.4", power(1.0, -0.4), In),
    ];
    for (name, x, want) in hermite {
        out.push(case(
            format!("domains/hermite/{name}"),
            format!("eg;x={x:?}"),
            0.0,
            Provenance::Reference,
            move || {
                Ok(membership_residual(
                    hermite_domain_check(&eg()?, &x)?.verdict,
                    want,
                ))
            },
        ));
    }
    for p in [-2.0, -1.5, -1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.5, 1.0] {
        out.push(case(
            format!("domains/l2-vs-diagonal/{p}"),
            format!("eg;x=1.5j^{{{}}}", -p),
            0.0,
            Provenance::Reference,
            move || {
                let k = eg()?;
                let x = power(1.5, p);
                let a = l2_a1_criterion(&k, &x)?.verdict;
                let b = diagonal_series_certificate(&k, &x)?.verdict;
                Ok(flag(a == b && a != Membership::Unknown))
            },
        ));
    }
    for nu0 in [1usize, 2] {
        out.push(case(
            format!("domains/witness/{nu0}"),
            format!("pg r_j=2log2 j;nu0={nu0};J=1e4"),
            0.0,
            Provenance::Reference,
            move || {
                let w = WeightFamily::pg(SequenceRule::LogLinear {
                    a: 0.0,
                    b: 2.0,
                    shift: 0.0,
                });
                Ok(flag(
                    pg_strict_inclusion_witness(&w, nu0, None, 10_000)?.valid,
                ))
            },
        ));
    }
    out
}

/// Settings for comparing the product, ANOVA and multi-index series values.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencySettings {
    pub abs_tol: f64,
    pub degree_cap: usize,
    pub active_cap: usize,
}

pub const EG_CONSISTENCY: ConsistencySettings = ConsistencySettings {
    abs_tol: 1e-9,
    degree_cap: 10_000_000,
    active_cap: 8,
};
pub const PG_CONSISTENCY: ConsistencySettings = ConsistencySettings {
    abs_tol: 4e-7,
    degree_cap: 10_000_000,
    active_cap: 6,
};

/// Largest pairwise disagreement of the three evaluators and how far it
/// exceeds the sum of their certified bounds.
pub fn consistency(
    w: &WeightFamily,
    s: ConsistencySettings,
    x: &SeqPoint,
    y: &SeqPoint,
) -> Result<(f64, f64)> {
    let k = TensorHermiteKernel::new(w.clone(), TruncationConfig::default(), Variant::Full)?
        .with_tol(s.abs_tol);
    let (p, a) = product_and_superposition(&k, x, y, None, usize::MAX)?;
    let m = multiindex_series_eval(&k, x, y, s.degree_cap, s.active_cap)?;
    let vals = [
        (p.value, p.error_bound),
        (a.value, a.error_bound),
        (m.value, m.error_bound),
    ];
    let mut gap: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let d = (vals[i].0 - vals[j].0).abs();
            gap = gap.max(d);
            excess = excess.max(d - vals[i].1 - vals[j].1);
        }
    }
    Ok((gap, excess.max(0.0)))
}

fn random_point(rng: &mut ChaCha8Rng) -> SeqPoint {
    let d = rng.random_range(1..=3);
    SeqPoint::finite((0..d).map(|_| rng.random_range(-1.5..1.5)).collect())
}

fn consistency_cases(seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0);
    let mut out = Vec::new();
    for (label, w, s, count) in [
        ("eg", eg_reference(), EG_CONSISTENCY, 6),
        ("pg", pg_reference(), PG_CONSISTENCY, 2),
    ] {
        for i in 0..count {
            let x = random_point(&mut rng);
            let y = random_point(&mut rng);
            let inp = format!("{label};x={x:?};y={y:?}");
            let (w2, x2, y2) = (w.clone(), x.clone(), y.clone());
            out.push(case(
                format!("series-consistency/{label}/{i}/absolute"),
                &inp,
                1e-6,
                Provenance::Derived,
                move || Ok(consistency(&w2, s, &x2, &y2)?.0),
            ));
            let w2 = w.clone();
            out.push(case(
                format!("series-consistency/{label}/{i}/certified"),
                &inp,
                0.0,
                Provenance::Derived,
                move || Ok(consistency(&w2, s, &x, &y)?.1),
            ));
        }
    }
    out
}

/// Largest `|h_ν(x)| / bound_ν(x) − 1` over `ν ≤ max_degree`, clipped at 0.
fn bound_excess(x: f64, max_degree: usize, ln_bound: impl Fn(usize) -> f64) -> f64 {
    HermiteIter::new(x)
        .take(max_degree + 1)
        .enumerate()
        .filter(|(_, h)| *h != 0.0)
        .map(|(nu, h)| (h.abs().ln() - ln_bound(nu)).exp_m1())
        .fold(0.0, f64::max)
}

fn bound_cases() -> Vec<Case> {
    let mut out = Vec::new();
    for i in 0..=40 {
        let x = -20.0 + i as f64;
        let inp = format!("x={x};nu<=500");
        out.push(case(
            format!("bounds/cramer/{x:+06.1}"),
            &inp,
            1e-12,
            Provenance::Reference,
            move || Ok(bound_excess(x, 500, |_| x * x / 4.0)),
        ));
        out.push(case(
            format!("bounds/growth/{x:+06.1}"),
            &inp,
            1e-12,
            Provenance::Reference,
            move || {
                let lz = x.abs().max(1.0).ln();
                Ok(bound_excess(x, 500, |nu| {
                    nu as f64 * (std::f64::consts::LN_2 + lz)
                }))
            },
        ));
    }
    out.push(case(
        "bounds/orthonormality",
        "nu<=12;nodes=13",
        1e-10,
        Provenance::Trivial,
        || {
            let rule = gh_rule(13)?;
            let mut worst: f64 = 0.0;
            for a in 0..=12 {
                for b in 0..=12 {
                    let g = rule.integrate(|x| {
                        let h: Vec<f64> = HermiteIter::new(x).take(13).collect();
                        h[a] * h[b]
                    });
                    worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
                }
            }
            Ok(worst)
        },
    ));
    out
}
