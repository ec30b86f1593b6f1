//! Gauss–Hermite quadrature for the standard normal measure μ₀, tensor rules,
//! Monte-Carlo sampling of finite prefixes of μ, and numerical ANOVA
//! decomposition.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::HermiteIter;

/// Largest supported number of nodes.
pub const MAX_NODES: usize = 200;

/// Largest dimension accepted by [`anova_decompose`].
pub const MAX_ANOVA_DIM: usize = 6;

/// An `n`-point Gauss–Hermite rule for μ₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomials up to this degree are integrated exactly.
    pub degree_exact: usize,
}

impl GhRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Smallest rule that integrates polynomials of `degree` exactly.
    pub fn for_degree(degree: usize) -> Result<GhRule> {
        gh_rule(degree / 2 + 1)
    }
}

/// Builds the `n`-point rule.
///
/// Nodes are the eigenvalues of the Jacobi matrix with off-diagonal `√k`,
/// refined by Newton steps on `h_n`. Weights use the Christoffel form
/// `1 / Σ_{k<n} h_k(x_i)²`, which keeps full relative accuracy at the outer
/// nodes where squared eigenvector components underflow to noise.
pub fn gh_rule(n: usize) -> Result<GhRule> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::InputDomain(format!(
            "number of nodes must lie in 1..={MAX_NODES}, got {n}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (hn, hn1) = top_two(*x, n);
            let deriv = (n as f64).sqrt() * hn1;
            if deriv == 0.0 {
                break;
            }
            let step = hn / deriv;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }

    // Exact symmetry about the origin.
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / HermiteIter::new(x).take(n).map(|h| h * h).sum::<f64>())
        .collect();
    for i in 0..n / 2 {
        let m = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = m;
        weights[n - 1 - i] = m;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    Ok(GhRule {
        nodes,
        weights,
        degree_exact: 2 * n - 1,
    })
}

/// `(h_n(x), h_{n−1}(x))`.
fn top_two(x: f64, n: usize) -> (f64, f64) {
    let mut it = HermiteIter::new(x);
    let mut prev = 0.0;
    let mut curr = it.next().unwrap_or(1.0);
    for _ in 0..n {
        prev = curr;
        curr = it.next().unwrap_or(0.0);
    }
    (curr, prev)
}

/// `⟨f, g⟩_{L²(μ₀)}` by the rule.
pub fn l2_inner<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, rule: &GhRule) -> f64 {
    rule.integrate(|x| f(x) * g(x))
}

/// Integrates `f` over `μ₀^d` with the tensor rule, visiting all `n^d` nodes.
pub fn tensor_integrate<F: Fn(&[f64]) -> f64>(rule: &GhRule, dim: usize, f: F) -> Result<f64> {
    let n = rule.len();
    let count = checked_grid_size(n, dim)?;
    let mut point = vec![0.0; dim];
    let mut sum = 0.0;
    for flat in 0..count {
        let mut rem = flat;
        let mut w = 1.0;
        for coord in point.iter_mut() {
            let i = rem % n;
            rem /= n;
            *coord = rule.nodes[i];
            w *= rule.weights[i];
        }
        sum += w * f(&point);
    }
    Ok(sum)
}

fn checked_grid_size(n: usize, dim: usize) -> Result<usize> {
    let count = (n as f64).powi(dim as i32);
    if count > 5e7 {
        return Err(Error::Refused(format!(
            "tensor grid with {n}^{dim} nodes is too large"
        )));
    }
    Ok(n.pow(dim as u32))
}

/// `count` i.i.d. rows drawn from `μ₀^dim`, reproducible per seed.
pub fn mu_sample(dim: usize, count: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..count * dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    DMatrix::from_row_slice(count, dim, &data)
}

/// Sorted 1-based coordinate labels of an ANOVA term.
pub type CoordSet = Vec<usize>;

fn mask_to_set(mask: u32) -> CoordSet {
    (0..32)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| b as usize + 1)
        .collect()
}

/// Components of `f = Σ_u f_u` sampled on the tensor grid of `rule`.
#[derive(Debug, Clone)]
pub struct AnovaDecomposition {
    pub dim: usize,
    pub rule: GhRule,
    /// Component tables indexed by bitmask; `tables[u]` has `n^|u|` entries,
    /// first coordinate of `u` varying fastest.
    tables: Vec<Vec<f64>>,
    /// `σ²(f_u)` by coordinate set.
    pub variances: BTreeMap<CoordSet, f64>,
    /// `∫ f dμ`.
    pub mean: f64,
    /// `σ²(f)` computed directly on the grid.
    pub total_variance: f64,
}

/// Decomposes `f: ℝ^d → ℝ` into ANOVA components with respect to `μ₀^d`.
///
/// For every `u`, the projection `P_u f` integrates out the complement of `u`
/// and `f_u = P_u f − Σ_{v ⊊ u} f_v`.
pub fn anova_decompose<F: Fn(&[f64]) -> f64>(
    f: F,
    dim: usize,
    rule: &GhRule,
) -> Result<AnovaDecomposition> {
    if dim > MAX_ANOVA_DIM {
        return Err(Error::Refused(format!(
            "ANOVA decomposition is limited to {MAX_ANOVA_DIM} coordinates, got {dim}"
        )));
    }
    let n = rule.len();
    let total = checked_grid_size(n, dim)?;
    let mut grid = vec![0.0; total];
    let mut point = vec![0.0; dim];
    for (flat, slot) in grid.iter_mut().enumerate() {
        let mut rem = flat;
        for coord in point.iter_mut() {
            *coord = rule.nodes[rem % n];
            rem /= n;
        }
        *slot = f(&point);
    }

    let full = (1u32 << dim) - 1;
    let mut projections: Vec<Vec<f64>> = vec![Vec::new(); 1 << dim];
    projections[full as usize] = grid.clone();
    // Integrate out one coordinate at a time, from larger sets to smaller.
    for mask in (0..full).rev() {
        let missing = (0..dim as u32)
            .find(|b| mask & (1 << b) == 0 && (mask | (1 << b)) <= full)
            .unwrap();
        let parent = mask | (1 << missing);
        projections[mask as usize] = integrate_axis(
            &projections[parent as usize],
            parent,
            missing,
            n,
            &rule.weights,
        );
    }

    let mut tables: Vec<Vec<f64>> = vec![Vec::new(); 1 << dim];
    for mask in 0..=full {
        let mut table = projections[mask as usize].clone();
        let mut sub = mask;
        loop {
            sub = sub.wrapping_sub(1) & mask;
            if sub == mask {
                break;
            }
            let comp = &tables[sub as usize];
            for (idx, v) in table.iter_mut().enumerate() {
                *v -= comp[restrict_index(idx, mask, sub, n)];
            }
            if sub == 0 {
                break;
            }
        }
        tables[mask as usize] = table;
    }

    let mut variances = BTreeMap::new();
    for mask in 1..=full {
        let var = weighted_sum_sq(
            &tables[mask as usize],
            mask.count_ones() as usize,
            n,
            &rule.weights,
        );
        variances.insert(mask_to_set(mask), var);
    }
    let mean = tables[0][0];
    let total_variance = weighted_sum_sq(&grid, dim, n, &rule.weights) - mean * mean;

    Ok(AnovaDecomposition {
        dim,
        rule: rule.clone(),
        tables,
        variances,
        mean,
        total_variance,
    })
}

/// Integrates coordinate `axis` out of a table over the coordinates in `mask`.
fn integrate_axis(table: &[f64], mask: u32, axis: u32, n: usize, weights: &[f64]) -> Vec<f64> {
    let pos = (mask & ((1 << axis) - 1)).count_ones();
    let stride = n.pow(pos);
    let out_len = table.len() / n;
    let mut out = vec![0.0; out_len];
    for (o, slot) in out.iter_mut().enumerate() {
        let low = o % stride;
        let high = o / stride;
        let base = low + high * stride * n;
        *slot = (0..n).map(|i| weights[i] * table[base + i * stride]).sum();
    }
    out
}

/// Maps a flat index over the coordinates in `mask` to one over `sub ⊆ mask`.
fn restrict_index(idx: usize, mask: u32, sub: u32, n: usize) -> usize {
    let mut rem = idx;
    let mut out = 0;
    let mut mult = 1;
    for b in 0..32 {
        if mask & (1 << b) == 0 {
            continue;
        }
        let digit = rem % n;
        rem /= n;
        if sub & (1 << b) != 0 {
            out += digit * mult;
            mult *= n;
        }
    }
    out
}

fn weighted_sum_sq(table: &[f64], k: usize, n: usize, weights: &[f64]) -> f64 {
    table
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let mut rem = idx;
            let mut w = 1.0;
            for _ in 0..k {
                w *= weights[rem % n];
                rem /= n;
            }
            w * v * v
        })
        .sum()
}

fn set_to_mask(set: &[usize], dim: usize) -> Result<u32> {
    let mut mask = 0u32;
    for &j in set {
        if j == 0 || j > dim {
            return Err(Error::InputDomain(format!(
                "coordinate {j} outside 1..={dim}"
            )));
        }
        mask |= 1 << (j - 1);
    }
    Ok(mask)
}

impl AnovaDecomposition {
    /// Grid table of `f_u`, first coordinate of `u` varying fastest.
    pub fn component_table(&self, set: &[usize]) -> Result<&[f64]> {
        Ok(&self.tables[set_to_mask(set, self.dim)? as usize])
    }

    /// `f_u` at the grid node whose per-coordinate node indices are `idx`.
    pub fn component_at_nodes(&self, set: &[usize], idx: &[usize]) -> Result<f64> {
        let mask = set_to_mask(set, self.dim)?;
        let n = self.rule.len();
        let mut flat = 0;
        let mut mult = 1;
        for b in 0..self.dim {
            if mask & (1 << b) != 0 {
                flat += idx[b] * mult;
                mult *= n;
            }
        }
        Ok(self.tables[mask as usize][flat])
    }

    /// `Σ_u f_u` at the grid node with per-coordinate indices `idx`.
    pub fn reconstruct_at_nodes(&self, idx: &[usize]) -> f64 {
        let full = (1u32 << self.dim) - 1;
        (0..=full)
            .map(|mask| {
                self.component_at_nodes(&mask_to_set(mask), idx)
                    .unwrap_or(0.0)
            })
            .sum()
    }

    /// `∫ f_u f_v dμ`, evaluated on the grid over `u ∪ v`.
    pub fn inner(&self, u: &[usize], v: &[usize]) -> Result<f64> {
        let mu = set_to_mask(u, self.dim)?;
        let mv = set_to_mask(v, self.dim)?;
        let union = mu | mv;
        let n = self.rule.len();
        let k = union.count_ones() as usize;
        let tu = &self.tables[mu as usize];
        let tv = &self.tables[mv as usize];
        let mut sum = 0.0;
        for idx in 0..n.pow(k as u32) {
            let mut rem = idx;
            let mut w = 1.0;
            for _ in 0..k {
                w *= self.rule.weights[rem % n];
                rem /= n;
            }
            sum +=
                w * tu[restrict_index(idx, union, mu, n)] * tv[restrict_index(idx, union, mv, n)];
        }
        Ok(sum)
    }

    /// Largest `|∫ f_u dμ₀(x_j)|` over `j ∈ u`, as a function on the remaining
    /// coordinates of `u`.
    pub fn max_marginal_mean(&self, set: &[usize]) -> Result<f64> {
        let mask = set_to_mask(set, self.dim)?;
        let n = self.rule.len();
        let table = &self.tables[mask as usize];
        let mut worst: f64 = 0.0;
        for b in 0..self.dim as u32 {
            if mask & (1 << b) == 0 {
                continue;
            }
            let reduced = integrate_axis(table, mask, b, n, &self.rule.weights);
            worst = reduced.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        Ok(worst)
    }

    /// All coordinate sets, including the empty one, in bitmask order.
    pub fn sets(&self) -> Vec<CoordSet> {
        (0..(1u32 << self.dim)).map(mask_to_set).collect()
    }
}
