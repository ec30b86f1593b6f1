//! Fixed workloads shared by the criterion benches and their tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kernellab_core::kernels1d::TruncationConfig;
use kernellab_core::point::SeqPoint;
use kernellab_core::shape::ShapeParams;
use kernellab_core::tensor::{
    anova_superposition_eval, multiindex_series_eval, tensor_hermite_eval, TensorHermiteKernel,
    Variant,
};
use kernellab_core::verify::{eg_reference, EG_CONSISTENCY};
use kernellab_core::weights::WeightFamily;
use kernellab_core::Result;

/// A kernel and a reproducible set of point pairs.
pub struct Workload {
    pub name: &'static str,
    pub kernel: TensorHermiteKernel,
    pub pairs: Vec<(SeqPoint, SeqPoint)>,
}

/// `count` pairs of points with `dim` coordinates drawn uniformly from `[-1, 1]`.
pub fn point_pairs(count: usize, dim: usize, seed: u64) -> Vec<(SeqPoint, SeqPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        SeqPoint::finite((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
    };
    (0..count)
        .map(|_| (draw(&mut rng), draw(&mut rng)))
        .collect()
}

/// EG weights with `2^{r_j} = (j+1)²`, `b = 1`, at the consistency tolerance.
pub fn eg_workload(count: usize, dim: usize) -> Result<Workload> {
    let trunc = TruncationConfig {
        abs_tol: EG_CONSISTENCY.abs_tol,
        ..TruncationConfig::default()
    };
    Ok(Workload {
        name: "eg",
        kernel: TensorHermiteKernel::new(eg_reference(), trunc, Variant::Full)?,
        pairs: point_pairs(count, dim, 0),
    })
}

/// Mehler weights for `σ_j = 2^{−j}`.
pub fn mehler_workload(count: usize, dim: usize) -> Result<Workload> {
    let w = WeightFamily::mehler(ShapeParams::geometric(1.0, 0.5));
    Ok(Workload {
        name: "mehler",
        kernel: TensorHermiteKernel::new(w, TruncationConfig::default(), Variant::Full)?,
        pairs: point_pairs(count, dim, 1),
    })
}

impl Workload {
    pub fn product(&self) -> Result<Vec<f64>> {
        self.pairs
            .iter()
            .map(|(x, y)| tensor_hermite_eval(&self.kernel, x, y).map(|v| v.value))
            .collect()
    }

    /// Full superposition over all truncated coordinates.
    pub fn superposition(&self) -> Result<Vec<f64>> {
        self.pairs
            .iter()
            .map(|(x, y)| {
                anova_superposition_eval(&self.kernel, x, y, None, usize::MAX).map(|v| v.value)
            })
            .collect()
    }

    pub fn series(&self) -> Result<Vec<f64>> {
        let s = EG_CONSISTENCY;
        self.pairs
            .iter()
            .map(|(x, y)| {
                multiindex_series_eval(&self.kernel, x, y, s.degree_cap, s.active_cap)
                    .map(|v| v.value)
            })
            .collect()
    }
}
