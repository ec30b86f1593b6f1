use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use kernellab_core::point::SeqPoint;
use kernellab_core::poly::{MultiExpansion, PolySpec};
use kernellab_core::quadrature::{anova_decompose, GhRule};
use kernellab_core::report::VerificationReport;
use kernellab_core::shape::{MehlerParams, ShapeParams};
use kernellab_core::spec::{evaluate, point_from_json, KernelKind, KernelSpec, SCHEMA};
use kernellab_core::tensor::{
    anova_superposition_eval, gauss_domain_check, hermite_domain_check, multiindex_series_eval,
    tensor_hermite_eval, DomainVerdict, TensorGaussKernel, TensorHermiteKernel,
};
use kernellab_core::verify::run_suite;
use kernellab_core::Error;

use crate::error::CliError;
use crate::{
    BenchArgs, ConvertArgs, DecomposeArgs, DomainArgs, EvalArgs, GridArgs, Strategy, VerifyArgs,
};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    write_to(path, &s)
}

fn load_spec(path: &Path) -> Result<KernelSpec, CliError> {
    Ok(KernelSpec::from_json(&read(path)?)?)
}

fn load_point(path: &Path) -> Result<SeqPoint, CliError> {
    Ok(point_from_json(&read(path)?)?)
}

fn hermite_kernel(spec: &KernelSpec) -> Result<TensorHermiteKernel, CliError> {
    match &spec.kind {
        KernelKind::Hermite {
            weights,
            variant,
            trunc,
        } => Ok(TensorHermiteKernel::new(weights.clone(), *trunc, *variant)?),
        KernelKind::Gauss { .. } => Err(CliError::Usage(
            "this command needs a hermite kernel spec".into(),
        )),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalOutput {
    pub schema: String,
    pub value: f64,
    pub error_bound: f64,
}

pub fn eval_kernel(a: &EvalArgs) -> Result<(), CliError> {
    let spec = load_spec(&a.spec)?.with_tol(a.accuracy.tol, a.accuracy.max_terms);
    let x = load_point(&a.x)?;
    let y = match &a.y {
        Some(p) => load_point(p)?,
        None => x.clone(),
    };
    let v = evaluate(&spec, &x, &y)?;
    emit_json(
        None,
        &EvalOutput {
            schema: SCHEMA.into(),
            value: v.value,
            error_bound: v.error_bound,
        },
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConvertOutput {
    pub schema: String,
    /// Coordinate index when converted from a shape rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub sigma: f64,
    pub c: f64,
    pub beta: f64,
    pub tau: f64,
    pub alpha: Vec<f64>,
}

fn convert_one(p: &MehlerParams, j: Option<usize>, count: usize) -> ConvertOutput {
    ConvertOutput {
        schema: SCHEMA.into(),
        j,
        sigma: p.sigma,
        c: p.c,
        beta: p.beta,
        tau: p.tau,
        alpha: (0..count).map(|nu| p.alpha(nu)).collect(),
    }
}

pub fn convert(a: &ConvertArgs) -> Result<(), CliError> {
    match (&a.sigma, &a.spec) {
        (Some(s), _) => emit_json(
            None,
            &convert_one(&MehlerParams::from_sigma(*s)?, None, a.count),
        ),
        (None, Some(path)) => {
            let shape: ShapeParams = serde_json::from_str(&read(path)?)
                .map_err(|e| CliError::Core(Error::Config(format!("shape: {e}"))))?;
            shape.validate()?;
            let out = (1..=a.count)
                .map(|j| Ok(convert_one(&shape.params(j)?, Some(j), a.count)))
                .collect::<Result<Vec<_>, Error>>()?;
            emit_json(None, &out)
        }
        (None, None) => Err(CliError::Usage("give --sigma or --spec".into())),
    }
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    if let Some(path) = &a.check {
        let r: VerificationReport = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Usage(format!("report: {e}")))?;
        if !r.is_consistent() {
            return Err(CliError::Failed(format!(
                "report for {} is inconsistent",
                r.suite
            )));
        }
        eprintln!(
            "{}: {} passed, {} failed, {} unknown",
            r.suite, r.summary.passed, r.summary.failed, r.summary.unknown
        );
        return if r.all_pass() {
            Ok(())
        } else {
            Err(CliError::Failed(r.suite))
        };
    }
    let suite = a
        .suite
        .as_deref()
        .expect("clap requires --suite without --check");
    let r = run_suite(suite, a.seed)?;
    emit_json(a.report.as_deref(), &r)?;
    eprintln!(
        "{}: {} passed, {} failed, {} unknown",
        r.suite, r.summary.passed, r.summary.failed, r.summary.unknown
    );
    for c in r.cases.iter().filter(|c| !c.pass) {
        eprintln!(
            "  FAIL {} residual={:?} tol={:e} {}",
            c.id,
            c.residual,
            c.tolerance,
            c.error.as_deref().unwrap_or("")
        );
    }
    if r.all_pass() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} of {} cases in {}",
            r.summary.failed + r.summary.unknown,
            r.cases.len(),
            suite
        )))
    }
}

#[derive(Debug, Serialize)]
struct BenchRow {
    strategy: &'static str,
    points: usize,
    repetitions: usize,
    total_ms: f64,
    mean_us: f64,
    /// Largest disagreement with the other evaluators; empty for single runs.
    max_residual: Option<f64>,
    /// Largest sum of the error bounds being compared.
    max_allowed: Option<f64>,
}

fn random_points(n: usize, dim: usize, seed: u64) -> Vec<(SeqPoint, SeqPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        SeqPoint::finite((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
    };
    (0..n).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

struct Run {
    values: Vec<(f64, f64)>,
    total_ms: f64,
}

fn time_strategy<F>(pairs: &[(SeqPoint, SeqPoint)], reps: usize, f: F) -> Result<Run, CliError>
where
    F: Fn(&SeqPoint, &SeqPoint) -> Result<(f64, f64), Error>,
{
    let mut values = Vec::with_capacity(pairs.len());
    let start = Instant::now();
    for r in 0..reps {
        for (x, y) in pairs {
            let v = f(x, y)?;
            if r == 0 {
                values.push(v);
            }
        }
    }
    Ok(Run {
        values,
        total_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    if a.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    if a.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let spec = load_spec(&a.spec)?.with_tol(a.accuracy.tol, a.accuracy.max_terms);
    if spec.dim.is_some() {
        return Err(CliError::Usage(
            "bench evaluates the full product kernel; drop \"dim\" from the kernel file".into(),
        ));
    }
    let k = hermite_kernel(&spec)?;
    let pairs = random_points(a.points, a.dim, a.seed);
    let wanted = |s: Strategy| a.strategy == Strategy::All || a.strategy == s;

    let mut runs: Vec<(&'static str, Run)> = Vec::new();
    if wanted(Strategy::Product) {
        let r = time_strategy(&pairs, a.repetitions, |x, y| {
            tensor_hermite_eval(&k, x, y).map(|v| (v.value, v.error_bound))
        })?;
        runs.push(("product", r));
    }
    if wanted(Strategy::Superposition) {
        let r = time_strategy(&pairs, a.repetitions, |x, y| {
            anova_superposition_eval(&k, x, y, None, usize::MAX).map(|v| (v.value, v.error_bound))
        })?;
        runs.push(("superposition", r));
    }
    if wanted(Strategy::Series) {
        let r = time_strategy(&pairs, a.repetitions, |x, y| {
            multiindex_series_eval(&k, x, y, a.degree_cap, a.active_cap)
                .map(|v| (v.value, v.error_bound))
        })?;
        runs.push(("series", r));
    }

    let compare = runs.len() > 1;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for (i, (name, run)) in runs.iter().enumerate() {
        let (mut res, mut allowed) = (0.0f64, 0.0f64);
        if compare {
            for (j, (_, other)) in runs.iter().enumerate() {
                if i == j {
                    continue;
                }
                for (&(v, e), &(w, f)) in run.values.iter().zip(&other.values) {
                    res = res.max((v - w).abs());
                    allowed = allowed.max(e + f);
                }
            }
        }
        let evals = (a.points * a.repetitions) as f64;
        wtr.serialize(BenchRow {
            strategy: name,
            points: a.points,
            repetitions: a.repetitions,
            total_ms: run.total_ms,
            mean_us: run.total_ms * 1e3 / evals,
            max_residual: compare.then_some(res),
            max_allowed: compare.then_some(allowed),
        })?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    write_to(
        a.out.as_deref(),
        &String::from_utf8(bytes).expect("csv is utf-8"),
    )
}

/// Parses `start:end:count`.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("range must look like start:end:count, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() || (n == 1 && a != b) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiagonalRow {
    pub x: f64,
    pub value: f64,
    pub error_bound: f64,
    /// `k(x,x)` is at least every value at smaller `|x|`, up to the error bounds.
    pub monotone: bool,
}

pub fn grid(a: &GridArgs) -> Result<(), CliError> {
    let Some(out) = a.out.as_deref() else {
        return Err(CliError::Usage("grid needs --out <file.csv>".into()));
    };
    let spec = load_spec(&a.spec)?.with_tol(a.accuracy.tol, a.accuracy.max_terms);
    let xs = parse_range(&a.x_range)?;
    let at = |x: f64, y: f64| {
        evaluate(
            &spec,
            &SeqPoint::finite(vec![x]),
            &SeqPoint::finite(vec![y]),
        )
    };
    let mut wtr = csv::Writer::from_writer(Vec::new());
    if a.diagonal {
        let vals = xs
            .iter()
            .map(|&x| at(x, x))
            .collect::<Result<Vec<_>, Error>>()?;
        for (i, (&x, v)) in xs.iter().zip(&vals).enumerate() {
            let monotone = xs.iter().zip(&vals).enumerate().all(|(j, (&x2, w))| {
                j == i || x2.abs() >= x.abs() || v.value + v.error_bound + w.error_bound >= w.value
            });
            wtr.serialize(DiagonalRow {
                x,
                value: v.value,
                error_bound: v.error_bound,
                monotone,
            })?;
        }
    } else {
        let ys = parse_range(&a.y_range)?;
        for &x in &xs {
            for &y in &ys {
                let v = at(x, y)?;
                wtr.serialize(GridRow {
                    x,
                    y,
                    value: v.value,
                    error_bound: v.error_bound,
                })?;
            }
        }
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    write_to(Some(out), &String::from_utf8(bytes).expect("csv is utf-8"))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnovaComponent {
    /// Coordinates the component depends on, numbered from 1.
    pub set: Vec<usize>,
    pub variance: f64,
    /// Variance read off the Hermite coefficients.
    pub coefficient_variance: f64,
    pub expansion: PolySpec,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnovaOutput {
    pub schema: String,
    pub dim: usize,
    pub nodes: usize,
    pub mean: f64,
    pub total_variance: f64,
    pub components: Vec<AnovaComponent>,
}

#[derive(Deserialize)]
struct PolyFile {
    #[serde(default = "schema")]
    schema: String,
    #[serde(flatten)]
    poly: PolySpec,
}

fn schema() -> String {
    SCHEMA.into()
}

pub fn anova(a: &DecomposeArgs) -> Result<(), CliError> {
    let file: PolyFile = serde_json::from_str(&read(&a.spec)?)
        .map_err(|e| CliError::Core(Error::Config(format!("polynomial: {e}"))))?;
    if file.schema != SCHEMA {
        return Err(CliError::Core(Error::Config(format!(
            "unsupported schema {:?}, expected {SCHEMA:?}",
            file.schema
        ))));
    }
    let f = MultiExpansion::from_spec(&file.poly)?;
    let dim = a.dim.unwrap_or_else(|| f.dim()).max(1);
    if dim < f.dim() {
        return Err(CliError::Usage(format!(
            "--dim {dim} is below the {} coordinates the polynomial uses",
            f.dim()
        )));
    }
    let rule = GhRule::for_degree(2 * f.max_coord_degree())?;
    let dec = anova_decompose(|x| f.eval(x), dim, &rule)?;
    let components = dec
        .variances
        .iter()
        .filter(|(set, _)| !set.is_empty())
        .map(|(set, &variance)| {
            let c = f.component(set);
            AnovaComponent {
                set: set.clone(),
                variance,
                coefficient_variance: c.l2_norm_sq(),
                expansion: c.to_spec(),
            }
        })
        .collect();
    emit_json(
        a.out.as_deref(),
        &AnovaOutput {
            schema: SCHEMA.into(),
            dim,
            nodes: rule.len(),
            mean: dec.mean,
            total_variance: dec.total_variance,
            components,
        },
    )
}

pub fn domain_check(a: &DomainArgs) -> Result<(), CliError> {
    let spec = load_spec(&a.spec)?;
    let x = load_point(&a.x)?;
    let v: DomainVerdict = match &spec.kind {
        KernelKind::Hermite { .. } => hermite_domain_check(&hermite_kernel(&spec)?, &x)?,
        KernelKind::Gauss { shape } => {
            gauss_domain_check(&TensorGaussKernel::new(shape.clone())?, &x)?
        }
    };
    emit_json(None, &v)
}
