//! Acceptance checks, one line per criterion. Expected values come from
//! oracles written here rather than from the library's own routines.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use kernellab_core::hermite::{check_cramer, check_growth_bound, HermiteIter};
use kernellab_core::isometry::{
    check_q_isometry, check_tensor_q_isometry_l2, mehler_from_sigma, mehler_identity_check,
    TensorMehlerParams,
};
use kernellab_core::kernels1d::{
    gauss_kernel_eval, gram_matrix, hermite_gram, FiniteExpansion, TruncationConfig,
    UniGaussKernel, UniHermiteKernel,
};
use kernellab_core::point::{PointTail, SeqPoint};
use kernellab_core::poly::{hk_norm_sq, superposition_norm_sq, MultiExpansion};
use kernellab_core::quadrature::{anova_decompose, gh_rule};
use kernellab_core::sequence::SequenceRule;
use kernellab_core::shape::ShapeParams;
use kernellab_core::tensor::{
    diagonal_series_certificate, gauss_domain_check, hermite_domain_check, l2_a1_criterion,
    multiindex_series_eval, pg_strict_inclusion_witness, product_and_superposition,
    tensor_gauss_gram, tensor_hermite_gram, Membership, TensorGaussKernel, TensorHermiteKernel,
    Variant,
};
use kernellab_core::weights::{Alpha0Rule, UniWeights, WeightFamily};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `h_0, …, h_n` at `x` from the three-term recurrence.
fn hermite_table(x: f64, n: usize) -> Vec<f64> {
    let mut h = vec![1.0, x];
    for k in 1..n {
        let next = (x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h.truncate(n + 1);
    h
}

fn sigmas() -> [f64; 5] {
    [0.1, 0.5, 1.0, 2.0, 10.0]
}

fn mehler_parameters() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in sigmas() {
        let p = mehler_from_sigma(s).map_err(err)?;
        let (c2, b) = (p.c * p.c, p.beta);
        let variance = (c2 * b / (2.0 * (1.0 - b * b)) - s * s).abs() / (s * s);
        let isometry = (p.tau - (c2 - 1.0) / 4.0).abs() / p.tau;
        // β/(2(1−β)²) = σ² is increasing in β on (0,1).
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid / (2.0 * (1.0 - mid) * (1.0 - mid)) < s * s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let beta = 0.5 * (lo + hi);
        let c_oracle = ((1.0 + beta) / (1.0 - beta)).sqrt();
        let r = variance
            .max(isometry)
            .max((b - beta).abs() / beta)
            .max((p.c - c_oracle).abs() / c_oracle);
        ensure(r <= 1e-12, || format!("sigma {s}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    let p = mehler_from_sigma(1.0).map_err(err)?;
    ensure(
        (p.beta - 0.5).abs() <= 1e-14 && (p.tau - 0.5).abs() <= 1e-14,
        || format!("sigma 1 gives {p:?}"),
    )?;
    let p = mehler_from_sigma(0.5).map_err(err)?;
    ensure((p.beta - (2.0 - 3f64.sqrt())).abs() <= 1e-14, || {
        format!("sigma 0.5 gives beta {}", p.beta)
    })?;
    Ok(format!("max relative residual {worst:.1e}"))
}

fn mehler_kernel_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_tail: f64 = 0.0;
    for s in [0.5, 1.0, 2.0] {
        let p = mehler_from_sigma(s).map_err(err)?;
        let scale = (1.0 - p.beta * p.beta).sqrt() / p.c;
        let qh = |x: f64, n: usize| -> Vec<f64> {
            let damp = p.c.sqrt() * (-p.tau * x * x).exp();
            hermite_table(p.c * x, n)
                .into_iter()
                .map(|h| damp * h)
                .collect()
        };
        for i in 0..21 {
            for k in 0..21 {
                let x = -3.0 + 0.3 * i as f64;
                let y = -3.0 + 0.3 * k as f64;
                let exact = (-s * s * (x - y) * (x - y)).exp();
                let lib = mehler_identity_check(&p, x, y, 1e-10).map_err(err)?;
                worst_tail = worst_tail.max(lib.tail_bound);
                // |qh_ν| ≤ c^{1/2} e^{x²/4} bounds the terms dropped here.
                let n = 400;
                let (a, b) = (qh(x, n), qh(y, n));
                let series: f64 = (0..=n)
                    .map(|nu| p.beta.powi(nu as i32) * a[nu] * b[nu])
                    .sum::<f64>()
                    * scale;
                worst = worst.max((exact - series).abs()).max(lib.residual);
            }
        }
    }
    ensure(worst <= 1e-8, || format!("residual {worst:e}"))?;
    ensure(worst_tail <= 1e-10, || format!("tail bound {worst_tail:e}"))?;
    Ok(format!(
        "max residual {worst:.1e}, max certified tail {worst_tail:.1e}"
    ))
}

fn q_isometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let deg = rng.random_range(0..=10);
        let coeffs: Vec<f64> = (0..=deg).map(|_| rng.sample(StandardNormal)).collect();
        let s = sigmas()[i % 5];
        let p = mehler_from_sigma(s).map_err(err)?;
        let f = FiniteExpansion::new(coeffs.clone());
        let norm: f64 = coeffs.iter().map(|c| c * c).sum();
        // Trapezoid rule for ∫ (qf)² dμ₀, spectrally accurate for these integrands.
        let h = 0.004;
        let mut direct = 0.0;
        for k in -4000..=4000 {
            let x = k as f64 * h;
            let v = hermite_table(p.c * x, deg)
                .iter()
                .zip(&coeffs)
                .map(|(a, b)| a * b)
                .sum::<f64>();
            let q = p.c.sqrt() * (-p.tau * x * x).exp() * v;
            direct += q * q * (-x * x / 2.0).exp();
        }
        direct *= h / (2.0 * std::f64::consts::PI).sqrt();
        let lib = check_q_isometry(&p, &f, deg + 1).map_err(err)?;
        let r = lib.max((direct - norm).abs());
        ensure(r <= 1e-10, || format!("polynomial {i}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("50 polynomials, max residual {worst:.1e}"))
}

fn big_q_isometry() -> Outcome {
    let shape = ShapeParams::geometric(1.0, 0.5);
    let tp = TensorMehlerParams::new(shape, 1e-13).map_err(err)?;
    let rule = gh_rule(40).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let d = rng.random_range(1..=3usize);
        let mut f = MultiExpansion::new();
        for _ in 0..rng.random_range(1..=6) {
            let n: Vec<usize> = (0..d).map(|_| rng.random_range(0..=4)).collect();
            f.add(n, rng.sample(StandardNormal));
        }
        let d = f.dim();
        let lib = check_tensor_q_isometry_l2(&tp, &f, 6).map_err(err)?;
        ensure(lib.tail_error <= 1e-12, || {
            format!("tail error {:e}", lib.tail_error)
        })?;
        ensure(
            (lib.tail_factor - 1.0).abs() <= lib.tail_error + 1e-15,
            || format!("tail factor {}", lib.tail_factor),
        )?;
        // Inactive coordinates contribute c_j (1+4τ_j)^{−1/2} = 1, so only the
        // first d coordinates are integrated, without substitution.
        let ps: Vec<_> = (1..=d)
            .map(|j| mehler_from_sigma(0.5f64.powi(j as i32)).unwrap())
            .collect();
        let pre: f64 = ps.iter().map(|p| p.c).product();
        let n = rule.len();
        let mut direct = 0.0;
        for flat in 0..n.pow(d as u32) {
            let mut w = 1.0;
            let mut u = vec![0.0; d];
            let mut damp = 0.0;
            for (j, p) in ps.iter().enumerate() {
                let k = flat / n.pow(j as u32) % n;
                w *= rule.weights[k];
                u[j] = p.c * rule.nodes[k];
                damp += 2.0 * p.tau * rule.nodes[k] * rule.nodes[k];
            }
            direct += w * (-damp).exp() * f.eval(&u).powi(2);
        }
        direct *= pre;
        let norm: f64 = f.terms.values().map(|c| c * c).sum();
        let r = lib
            .residual
            .max((direct - norm).abs())
            .max((direct - lib.q_norm_sq).abs());
        ensure(r <= 1e-9, || format!("polynomial {i}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("20 polynomials, max residual {worst:.1e}"))
}

fn log_sq() -> SequenceRule {
    SequenceRule::LogLinear {
        a: 0.0,
        b: 2.0,
        shift: 1.0,
    }
}

fn eg() -> WeightFamily {
    WeightFamily::eg(log_sq(), SequenceRule::constant(1.0))
}

fn pg() -> WeightFamily {
    WeightFamily::pg(log_sq())
}

fn consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for (label, w, tol, active_cap) in [("EG", eg(), 1e-9, 8), ("PG", pg(), 4e-7, 6)] {
        let k = TensorHermiteKernel::new(w, TruncationConfig::default(), Variant::Full)
            .map_err(err)?
            .with_tol(tol);
        for i in 0..25 {
            let mut pt = || {
                let d = rng.random_range(1..=3);
                SeqPoint::finite((0..d).map(|_| rng.random_range(-1.5..1.5)).collect())
            };
            let (x, y) = (pt(), pt());
            let (p, a) = product_and_superposition(&k, &x, &y, None, usize::MAX).map_err(err)?;
            let s = multiindex_series_eval(&k, &x, &y, 10_000_000, active_cap).map_err(err)?;
            let vals = [
                (p.value, p.error_bound),
                (a.value, a.error_bound),
                (s.value, s.error_bound),
            ];
            for m in 0..3 {
                for n in m + 1..3 {
                    let gap = (vals[m].0 - vals[n].0).abs();
                    ensure(gap <= vals[m].1 + vals[n].1, || {
                        format!("{label} pair {i}: {vals:?}")
                    })?;
                    ensure(gap <= 1e-6, || format!("{label} pair {i}: gap {gap:e}"))?;
                    worst = worst.max(gap);
                }
            }
        }
    }
    Ok(format!("50 pairs, max disagreement {worst:.1e}"))
}

fn min_eig(g: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(g.clone()).eigenvalues.min()
}

fn positive_definiteness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let trunc = TruncationConfig {
        abs_tol: 1e-10,
        ..TruncationConfig::default()
    };
    let halves = ShapeParams::geometric(1.0, 0.5);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.random_range(2..=15);
        let d = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let seq: Vec<SeqPoint> = pts.iter().map(|p| SeqPoint::finite(p.clone())).collect();
        let g = match i % 7 {
            0 => {
                hermite_gram(
                    &UniHermiteKernel::new(UniWeights::pg(4.0), trunc).map_err(err)?,
                    &xs,
                    false,
                )
                .map_err(err)?
                .0
            }
            1 => {
                hermite_gram(
                    &UniHermiteKernel::new(UniWeights::eg(1.0, 1.0), trunc).map_err(err)?,
                    &xs,
                    true,
                )
                .map_err(err)?
                .0
            }
            2 => {
                hermite_gram(
                    &UniHermiteKernel::new(UniWeights::mehler(0.5), trunc).map_err(err)?,
                    &xs,
                    false,
                )
                .map_err(err)?
                .0
            }
            3 => gram_matrix(&xs, |a, b| {
                gauss_kernel_eval(&UniGaussKernel { sigma: 0.7 }, *a, *b)
            }),
            4 => {
                let k = TensorHermiteKernel::new(eg(), trunc, Variant::Full).map_err(err)?;
                tensor_hermite_gram(&k, &seq).map_err(err)?.0
            }
            5 => {
                let k = TensorHermiteKernel::new(
                    WeightFamily::mehler(halves.clone()),
                    trunc,
                    Variant::Full,
                )
                .map_err(err)?;
                tensor_hermite_gram(&k, &seq).map_err(err)?.0
            }
            _ => tensor_gauss_gram(&TensorGaussKernel::new(halves.clone()).map_err(err)?, &seq)
                .map_err(err)?,
        };
        let r = (-min_eig(&g)).max(0.0) / g.trace();
        ensure(r <= 1e-9, || {
            format!(
                "matrix {i}: min eigenvalue {:e}, trace {}",
                min_eig(&g),
                g.trace()
            )
        })?;
        worst = worst.max(r);
    }
    Ok(format!("100 matrices, worst -lambda_min/trace {worst:.1e}"))
}

fn power(a: f64, p: f64) -> SeqPoint {
    SeqPoint::new(vec![], PointTail::Power { a, p })
}

fn domains() -> Outcome {
    use Membership::{In, Out};
    let g = TensorGaussKernel::new(ShapeParams::new(
        vec![],
        SequenceRule::PowerLaw { a: 1.0, p: -1.0 },
    ))
    .map_err(err)?;
    for (x, want) in [
        (SeqPoint::finite(vec![3.0, -2.0]), In),
        (power(1.0, -0.4), In),
        (power(1.0, -1.0), Out),
    ] {
        let got = gauss_domain_check(&g, &x).map_err(err)?.verdict;
        ensure(got == want, || format!("gaussian {x:?}: {got:?}"))?;
    }
    let k =
        TensorHermiteKernel::new(eg(), TruncationConfig::default(), Variant::Full).map_err(err)?;
    for (x, want) in [
        (SeqPoint::new(vec![1.0], PointTail::Constant { a: 7.0 }), In),
        (power(1.0, -1.0), Out),
        (power(1.0, -0.4), In),
    ] {
        let got = hermite_domain_check(&k, &x).map_err(err)?.verdict;
        ensure(got == want, || format!("hermite {x:?}: {got:?}"))?;
    }
    for p in [-2.0, -1.5, -1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.5, 1.0] {
        let x = power(1.5, p);
        let a = l2_a1_criterion(&k, &x).map_err(err)?.verdict;
        let b = diagonal_series_certificate(&k, &x).map_err(err)?.verdict;
        ensure(a == b && a != Membership::Unknown, || {
            format!("x_j = 1.5 j^{p}: {a:?} vs {b:?}")
        })?;
    }
    Ok("6 examples and 10 parametric points agree".into())
}

/// Three-point Gauss–Hermite rule, exact to degree 5.
const GH3: [(f64, f64); 3] = [
    (-1.7320508075688772, 1.0 / 6.0),
    (0.0, 2.0 / 3.0),
    (1.7320508075688772, 1.0 / 6.0),
];

/// `Σ_n α_n c_n²` with the coefficients projected in two coordinates.
fn brute_force_norm(f: &dyn Fn(f64, f64) -> f64, w: &WeightFamily) -> f64 {
    let mut total = 0.0;
    for n1 in 0..=2 {
        for n2 in 0..=2 {
            let mut c = 0.0;
            for &(x1, w1) in &GH3 {
                for &(x2, w2) in &GH3 {
                    c += w1 * w2 * f(x1, x2) * hermite_table(x1, 2)[n1] * hermite_table(x2, 2)[n2];
                }
            }
            let mut a = 1.0;
            for j in 1..=200 {
                let nu = [n1, n2].get(j - 1).copied().unwrap_or(0);
                a *= if nu == 0 {
                    w.alpha0(j).unwrap()
                } else {
                    w.alpha(nu, j).unwrap().value
                };
            }
            total += a * c * c;
        }
    }
    total
}

fn anova() -> Outcome {
    type F = fn(&[f64]) -> f64;
    let set: [(usize, F); 6] = [
        (1, |_| 5.0),
        (1, |x| x[0]),
        (2, |x| x[0] * x[1] + x[0]),
        (3, |x| {
            1.0 + x[0] * x[0] * x[2] - 2.0 * x[1] * x[2] + x[1].powi(3)
        }),
        (3, |x| (x[0] + x[1] + x[2]).powi(2)),
        (2, |x| (x[0] - x[1]).exp() / 10.0),
    ];
    let rule = gh_rule(8).map_err(err)?;
    let n = rule.len();
    let mut worst: f64 = 0.0;
    for (i, (d, f)) in set.iter().enumerate() {
        let a = anova_decompose(f, *d, &rule).map_err(err)?;
        for flat in 0..n.pow(*d as u32) {
            let idx: Vec<usize> = (0..*d).map(|b| flat / n.pow(b as u32) % n).collect();
            let x: Vec<f64> = idx.iter().map(|&k| rule.nodes[k]).collect();
            worst = worst.max((a.reconstruct_at_nodes(&idx) - f(&x)).abs());
        }
        let sets = a.sets();
        for (p, u) in sets.iter().enumerate() {
            for v in &sets[p + 1..] {
                worst = worst.max(a.inner(u, v).map_err(err)?.abs());
            }
            if !u.is_empty() {
                worst = worst.max(a.max_marginal_mean(u).map_err(err)?);
            }
        }
        let sum: f64 = a
            .variances
            .iter()
            .filter(|(u, _)| !u.is_empty())
            .map(|(_, v)| v)
            .sum();
        worst = worst.max((sum - a.total_variance).abs());
        ensure(worst <= 1e-9, || {
            format!("function {i}: residual {worst:e}")
        })?;
    }
    // σ² of x₁ and of x₁x₂ are both 1.
    let a = anova_decompose(set[2].1, 2, &rule).map_err(err)?;
    ensure(
        (a.variances[&vec![1]] - 1.0).abs() <= 1e-12
            && (a.variances[&vec![1, 2]] - 1.0).abs() <= 1e-12,
        || format!("variances {:?}", a.variances),
    )?;
    let wide = gh_rule(60).map_err(err)?;
    for kern in [UniWeights::mehler(0.5), UniWeights::eg(1.0, 1.0)] {
        let k = UniHermiteKernel::new(
            kern,
            TruncationConfig {
                abs_tol: 1e-13,
                ..TruncationConfig::default()
            },
        )
        .map_err(err)?;
        for x in [-2.0, 0.0, 1.3] {
            let mut s = 0.0;
            for (&y, &w) in wide.nodes.iter().zip(&wide.weights) {
                s += w * k.centered_eval(x, y).map_err(err)?.value;
            }
            ensure(s.abs() <= 1e-9, || {
                format!("centered kernel mean {s:e} at x = {x}")
            })?;
            worst = worst.max(s.abs());
        }
    }
    let a0 = Alpha0Rule::OnePlus {
        deviation: SequenceRule::Geometric { a: 0.5, q: 0.5 },
    };
    let polys: [(&[(&[usize], f64)], fn(f64, f64) -> f64); 5] = [
        (&[(&[], 1.0)], |_, _| 1.0),
        (&[(&[1], 1.0)], |x, _| x),
        (&[(&[0, 2], 1.0), (&[], -1.0)], |_, y| y * y - 1.0),
        (&[(&[1, 1], 1.0), (&[], 3.0)], |x, y| x * y + 3.0),
        (&[(&[2], 1.0), (&[0, 1], 2.0), (&[1], -1.0)], |x, y| {
            x * x + 2.0 * y - x
        }),
    ];
    let mut norm_worst: f64 = 0.0;
    for w in [eg().with_alpha0(a0.clone()), pg().with_alpha0(a0)] {
        for (terms, g) in &polys {
            let mut f = MultiExpansion::new();
            for (n, c) in terms.iter() {
                f = f.plus(&MultiExpansion::monomial(n).scaled(*c));
            }
            let brute = brute_force_norm(&|x, y| g(x, y), &w);
            let s = superposition_norm_sq(&f, &w).map_err(err)?;
            let h = hk_norm_sq(&f, &w).map_err(err)?.0;
            let r = (s - brute).abs().max((h - brute).abs()) / brute.max(1.0);
            ensure(r <= 1e-10, || format!("superposition norm {s} vs {brute}"))?;
            norm_worst = norm_worst.max(r);
        }
    }
    Ok(format!(
        "decomposition residual {worst:.1e}, norm residual {norm_worst:.1e}"
    ))
}

fn bounds() -> Outcome {
    let mut checked = 0;
    for i in 0..=80 {
        let x = -20.0 + 0.5 * i as f64;
        let h = hermite_table(x, 500);
        let lib: Vec<f64> = HermiteIter::new(x).take(501).collect();
        let ln_z = x.abs().max(1.0).ln();
        for (nu, &v) in h.iter().enumerate() {
            ensure((v - lib[nu]).abs() <= 1e-12 * v.abs().max(1.0), || {
                format!("h_{nu}({x}) differs")
            })?;
            if v == 0.0 {
                continue;
            }
            let l = v.abs().ln();
            ensure(l <= x * x / 4.0 + 1e-12, || {
                format!("Cramér fails at nu {nu}, x {x}")
            })?;
            ensure(
                l <= nu as f64 * (std::f64::consts::LN_2 + ln_z) + 1e-12,
                || format!("growth bound fails at nu {nu}, x {x}"),
            )?;
            checked += 1;
        }
        ensure(
            check_cramer(x, 500).map_err(err)? && check_growth_bound(x, 500).map_err(err)?,
            || format!("library check at {x}"),
        )?;
    }
    let rule = gh_rule(13).map_err(err)?;
    let mut gram = DMatrix::<f64>::zeros(13, 13);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let h = hermite_table(x, 12);
        for a in 0..13 {
            for b in 0..13 {
                gram[(a, b)] += w * h[a] * h[b];
            }
        }
    }
    let dev = (gram - DMatrix::<f64>::identity(13, 13)).abs().max();
    ensure(dev <= 1e-10, || format!("orthonormality deviation {dev:e}"))?;
    Ok(format!(
        "{checked} values within both bounds, Gram deviation {dev:.1e}"
    ))
}

fn witness() -> Outcome {
    let w = WeightFamily::pg(SequenceRule::LogLinear {
        a: 0.0,
        b: 2.0,
        shift: 0.0,
    });
    let big_j = 10_000;
    let mut report = Vec::new();
    for nu0 in [1usize, 2] {
        let wit = pg_strict_inclusion_witness(&w, nu0, None, big_j).map_err(err)?;
        ensure(wit.valid, || format!("nu0 {nu0}: {:?}", wit.certificates))?;
        // α_{ν,j}^{−1} = (ν+1)^{−r_j} with r_j = 2 log₂ j, that is j^{−2 log₂(ν+1)}.
        let inv = |nu: usize, j: usize| (j as f64).powf(-2.0 * ((nu + 1) as f64).log2());
        for nu in 1..=nu0 {
            let mut partial = 0.0;
            for j in wit.j0..=big_j {
                let t = inv(nu, j) * wit.coord(j).powi(2 * nu as i32);
                ensure(t <= (j as f64).powf(-wit.a) * (1.0 + 1e-12), || {
                    format!("nu {nu}, j {j}: term {t}")
                })?;
                partial += t;
            }
            // Σ_{j≥j₀} j^{−a} ≤ j₀^{−a} + j₀^{1−a}/(a−1)
            let j0 = wit.j0 as f64;
            ensure(
                partial <= j0.powf(-wit.a) + j0.powf(1.0 - wit.a) / (wit.a - 1.0),
                || format!("nu {nu}: partial sum {partial}"),
            )?;
        }
        let kn = wit.k * nu0;
        let mut min_term = f64::INFINITY;
        for j in wit.j0..=big_j {
            min_term = min_term.min(inv(kn, j) * wit.coord(j).powi(2 * kn as i32));
        }
        ensure(min_term >= 1.0 - 1e-12, || {
            format!("nu0 {nu0}: divergent term {min_term}")
        })?;
        report.push(format!(
            "nu0={nu0}: k={}, j0={}, min term {min_term:.3}",
            wit.k, wit.j0
        ));
    }
    Ok(report.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 10] = [
        ("Mehler parameter identities", 1.0, mehler_parameters),
        ("Mehler kernel identity", 5.0, mehler_kernel_identity),
        ("q-isometry", 2.0, q_isometry),
        ("Q-isometry on L2(mu)", 5.0, big_q_isometry),
        ("evaluator consistency", 30.0, consistency),
        ("positive definiteness", 10.0, positive_definiteness),
        ("domain dichotomy", 2.0, domains),
        ("ANOVA", 10.0, anova),
        ("Hermite bounds", 5.0, bounds),
        ("strict-inclusion witness", 5.0, witness),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        let outcome = outcome.and_then(|m| {
            if secs < *budget {
                Ok(m)
            } else {
                Err(format!("{m}; took {secs:.2} s, budget {budget} s"))
            }
        });
        match outcome {
            Ok(m) => println!("criterion {:>2} {name}: PASS ({secs:.2} s) {m}", i + 1),
            Err(m) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.2} s) {m}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
