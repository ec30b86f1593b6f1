//! Finite expansions `f = Σ_n c_n h_n` over multi-indices, with `h_n(x) =
//! Π_j h_{n_j}(x_j)`, and their norms in `L²(μ)` and `H(K)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::HermiteIter;
use crate::weights::{validate_weights, WeightFamily};

/// A multi-index `(n_1, …, n_d)`; trailing zeros are dropped.
pub type MultiIndex = Vec<usize>;

fn trim(mut n: MultiIndex) -> MultiIndex {
    while n.last() == Some(&0) {
        n.pop();
    }
    n
}

/// Which basis the coefficients of a [`PolySpec`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[default]
    Hermite,
    Monomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub index: MultiIndex,
    pub coef: f64,
}

/// Serialized polynomial: a basis tag and multi-index/coefficient pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySpec {
    #[serde(default)]
    pub basis: Basis,
    pub terms: Vec<PolyTerm>,
}

/// Sparse Hermite expansion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MultiExpansion {
    pub terms: BTreeMap<MultiIndex, f64>,
}

/// `x^n = Σ_k n! / (k! 2^k √((n−2k)!)) h_{n−2k}(x)`.
pub fn monomial_to_hermite(n: usize) -> Vec<f64> {
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let mut c = vec![0.0; n + 1];
    for k in 0..=n / 2 {
        let m = n - 2 * k;
        c[m] =
            (ln_fact(n) - ln_fact(k) - k as f64 * std::f64::consts::LN_2 - 0.5 * ln_fact(m)).exp();
    }
    c
}

impl MultiExpansion {
    pub fn new() -> Self {
        MultiExpansion::default()
    }

    pub fn single(index: MultiIndex, coef: f64) -> Self {
        let mut f = MultiExpansion::new();
        f.add(index, coef);
        f
    }

    pub fn add(&mut self, index: MultiIndex, coef: f64) {
        let e = self.terms.entry(trim(index)).or_insert(0.0);
        *e += coef;
    }

    pub fn from_spec(spec: &PolySpec) -> Result<Self> {
        for t in &spec.terms {
            if !t.coef.is_finite() {
                return Err(Error::InputDomain("coefficients must be finite".into()));
            }
        }
        Ok(match spec.basis {
            Basis::Hermite => {
                let mut f = MultiExpansion::new();
                for t in &spec.terms {
                    f.add(t.index.clone(), t.coef);
                }
                f
            }
            Basis::Monomial => {
                let mut f = MultiExpansion::new();
                for t in &spec.terms {
                    f = f.plus(&Self::monomial(&t.index).scaled(t.coef));
                }
                f
            }
        })
    }

    pub fn to_spec(&self) -> PolySpec {
        PolySpec {
            basis: Basis::Hermite,
            terms: self
                .terms
                .iter()
                .map(|(n, &c)| PolyTerm {
                    index: n.clone(),
                    coef: c,
                })
                .collect(),
        }
    }

    /// `Π_j x_j^{n_j}` in the Hermite basis.
    pub fn monomial(index: &[usize]) -> Self {
        let mut out = MultiExpansion::single(Vec::new(), 1.0);
        for (j, &n) in index.iter().enumerate() {
            let c = monomial_to_hermite(n);
            let mut next = MultiExpansion::new();
            for (idx, &a) in &out.terms {
                for (m, &b) in c.iter().enumerate() {
                    if b == 0.0 {
                        continue;
                    }
                    let mut k = idx.clone();
                    k.resize(k.len().max(j + 1), 0);
                    k[j] = m;
                    next.add(k, a * b);
                }
            }
            out = next;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        MultiExpansion {
            terms: self.terms.iter().map(|(n, c)| (n.clone(), c * s)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut f = self.clone();
        for (n, &c) in &other.terms {
            f.add(n.clone(), c);
        }
        f
    }

    /// Number of leading coordinates the expansion depends on.
    pub fn dim(&self) -> usize {
        self.terms.keys().map(|n| n.len()).max().unwrap_or(0)
    }

    /// Largest degree in any single coordinate.
    pub fn max_coord_degree(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|n| n.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|n| n.iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    /// Evaluates at `x`; coordinates past `x.len()` are read as 0.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let deg = self.max_coord_degree();
        let d = self.dim();
        let h: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                HermiteIter::new(x.get(j).copied().unwrap_or(0.0))
                    .take(deg + 1)
                    .collect()
            })
            .collect();
        self.terms
            .iter()
            .map(|(n, c)| c * n.iter().enumerate().map(|(j, &v)| h[j][v]).product::<f64>())
            .sum()
    }

    /// `‖f‖²_{L²(μ)} = Σ c_n²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Terms whose support is exactly `set` (coordinates numbered from 1).
    pub fn component(&self, set: &[usize]) -> MultiExpansion {
        let mut f = MultiExpansion::new();
        for (n, &c) in &self.terms {
            if support(n) == set {
                f.add(n.clone(), c);
            }
        }
        f
    }

    /// All supports that occur, sorted.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        let mut s: Vec<Vec<usize>> = self.terms.keys().map(|n| support(n)).collect();
        s.sort();
        s.dedup();
        s
    }
}

/// Coordinates (from 1) where `n` is nonzero.
pub fn support(n: &[usize]) -> Vec<usize> {
    n.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .map(|(j, _)| j + 1)
        .collect()
}

/// `Π_j α_{0,j}` with its relative error bound.
pub fn alpha0_product(w: &WeightFamily, tol: f64) -> Result<(f64, f64)> {
    let mut big_j = w.explicit_len().max(1);
    loop {
        let dev = w.alpha0_deviation_tail(big_j);
        if dev < 0.5 {
            let ld = dev / (1.0 - dev);
            if ld <= tol {
                let p: f64 = (1..=big_j).map(|j| w.alpha0(j)).product::<Result<f64>>()?;
                return Ok((p, ld.exp_m1()));
            }
        }
        if big_j > 1 << 24 {
            return Err(Error::Truncation {
                achieved: dev,
                target: tol,
                terms: big_j,
            });
        }
        big_j *= 2;
    }
}

/// `α_n = Π_j α_{n_j,j}`, with the infinitely many `α_{0,j}` outside the
/// support entering through `a0_all = Π_j α_{0,j}`.
fn alpha_multi(w: &WeightFamily, n: &[usize], a0_all: f64) -> Result<f64> {
    let mut a = a0_all;
    for (j, &v) in n.iter().enumerate() {
        if v > 0 {
            a *= w.alpha(v, j + 1)?.value / w.alpha0(j + 1)?;
        }
    }
    Ok(a)
}

fn require_weights(w: &WeightFamily) -> Result<()> {
    let v = validate_weights(w)?;
    if !v.h2.holds() {
        return Err(Error::Unsupported(
            "inf_n alpha_n > 0 is not certified for these weights".into(),
        ));
    }
    Ok(())
}

/// `‖f‖²_{H(K)} = Σ_n α_n c_n²`, with the relative error of `Π α_{0,j}`.
pub fn hk_norm_sq(f: &MultiExpansion, w: &WeightFamily) -> Result<(f64, f64)> {
    require_weights(w)?;
    let (a0, rel) = alpha0_product(w, 1e-14)?;
    let mut s = 0.0;
    for (n, &c) in &f.terms {
        s += alpha_multi(w, n, a0)? * c * c;
    }
    Ok((s, rel))
}

/// `‖f‖_{H(K)}`.
pub fn hk_norm_of_expansion(f: &MultiExpansion, w: &WeightFamily) -> Result<f64> {
    Ok(hk_norm_sq(f, w)?.0.sqrt())
}

/// `Σ_u c_u^{−1} ‖f_u‖²_{H(k*_u)}` with `c_u = Π_{j∉u} α_{0,j}^{−1}` and
/// `‖g‖²_{H(k*_u)} = Σ_n Π_{j∈u} α_{n_j,j} c_n²` for `g` supported on `u`.
pub fn superposition_norm_sq(f: &MultiExpansion, w: &WeightFamily) -> Result<f64> {
    require_weights(w)?;
    let (a0, _) = alpha0_product(w, 1e-14)?;
    let mut total = 0.0;
    for u in f.supports() {
        let mut c_u_inv = a0;
        for &j in &u {
            c_u_inv /= w.alpha0(j)?;
        }
        let mut norm = 0.0;
        for (n, &c) in &f.component(&u).terms {
            let mut a = 1.0;
            for &j in &u {
                a *= w.alpha(n[j - 1], j)?.value;
            }
            norm += a * c * c;
        }
        total += c_u_inv * norm;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceRule;
    use approx::assert_relative_eq;

    #[test]
    fn monomials_in_hermite_basis() {
        // x² = h_0 + √2 h_2, x³ = 3h_1 + √6 h_3
        assert_relative_eq!(monomial_to_hermite(2)[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(monomial_to_hermite(2)[2], 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(monomial_to_hermite(3)[1], 3.0, epsilon = 1e-15);
        assert_relative_eq!(monomial_to_hermite(3)[3], 6f64.sqrt(), epsilon = 1e-14);
        let f = MultiExpansion::monomial(&[2, 1]);
        for x in [[0.3, -1.2], [2.0, 0.5]] {
            assert_relative_eq!(f.eval(&x), x[0] * x[0] * x[1], epsilon = 1e-13);
        }
    }

    #[test]
    fn norm_examples() {
        let pg = WeightFamily::pg(SequenceRule::Explicit {
            prefix: vec![2.0],
            tail: Box::new(SequenceRule::LogLinear {
                a: 0.0,
                b: 2.0,
                shift: 1.0,
            }),
        });
        assert_relative_eq!(
            hk_norm_of_expansion(&MultiExpansion::single(vec![], 1.0), &pg).unwrap(),
            1.0
        );
        assert_relative_eq!(
            hk_norm_of_expansion(&MultiExpansion::single(vec![1], -1.5), &pg).unwrap(),
            3.0,
            max_relative = 1e-14
        );
        let f = MultiExpansion::single(vec![1], 1.0).plus(&MultiExpansion::single(vec![0, 2], 2.0));
        let a = hk_norm_sq(&MultiExpansion::single(vec![1], 1.0), &pg)
            .unwrap()
            .0;
        let b = hk_norm_sq(&MultiExpansion::single(vec![0, 2], 2.0), &pg)
            .unwrap()
            .0;
        assert_relative_eq!(hk_norm_sq(&f, &pg).unwrap().0, a + b, max_relative = 1e-14);
    }
}
