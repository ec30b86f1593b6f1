//! The multi-index expansion `K(x,y) = Σ_n α_n^{−1} h_n(x) h_n(y)` summed over
//! `|n| ≤ degree_cap` and `|supp n| ≤ active_cap`.
//!
//! Multi-indices are not listed one by one. A dynamic program over
//! (support size, total degree) adds the coordinates in turn, and the
//! coordinate with the longest univariate expansion is folded in last
//! through prefix sums. Alongside the signed sum the program carries the
//! Cramér majorant `Π_j α_{0,j}^{−1}|…| ≤ Π_j e^{(x_j²+y_j²)/4} α_{ν_j,j}^{−1}`,
//! whose complete sum is known in closed form; the difference bounds every
//! omitted multi-index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::HermitePairIter;
use crate::kernels1d::UniHermiteKernel;
use crate::point::SeqPoint;
use crate::weights::UniWeights;

use super::eval::tail_plan;
use super::{hermite_domain_check, split_weight, Membership, TensorHermiteKernel};

/// Refusal threshold for the arithmetic work of the dynamic program.
pub const MAX_SERIES_WORK: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Number of multi-indices in the summation set.
    pub terms_used: f64,
    /// Bound on everything left out, from the Cramér majorant.
    pub error_bound: f64,
    pub coords_used: usize,
    /// Multiply-adds spent by the dynamic program.
    pub work: f64,
}

struct Coord {
    a0_inv: f64,
    coef: Vec<f64>,
    major: Vec<f64>,
    /// `α_0^{−1} + e^{(x²+y²)/4} Σ_{ν≥1} α_ν^{−1}`.
    full: f64,
}

/// A coordinate with its summation degree, before tabulation.
struct CoordPlan {
    x: f64,
    y: f64,
    w: UniWeights,
    n: usize,
}

impl CoordPlan {
    /// `e^{(x²+y²)/4}`, the Cramér factor of the majorant.
    fn cramer(&self) -> f64 {
        ((self.x * self.x + self.y * self.y) / 4.0).exp()
    }

    /// `α_0^{−1} + e^{(x²+y²)/4}(head + Σ_{ν>n} α_ν^{−1})`.
    fn full(&self, head: f64) -> f64 {
        self.w.inv(0) + self.cramer() * (head + self.w.tail_inv_sum(self.n))
    }

    fn tabulate(&self) -> Coord {
        let e = self.cramer();
        let mut coef = Vec::with_capacity(self.n);
        let mut major = Vec::with_capacity(self.n);
        let mut head = 0.0;
        for (nu, (hx, hy)) in HermitePairIter::new(self.x, self.y)
            .enumerate()
            .take(self.n + 1)
            .skip(1)
        {
            let inv = self.w.inv(nu);
            coef.push(inv * hx * hy);
            major.push(inv * e);
            head += inv;
        }
        Coord {
            a0_inv: self.w.inv(0),
            coef,
            major,
            full: self.full(head),
        }
    }
}

/// Three channels of the dynamic program: signed sum, majorant, count.
#[derive(Clone)]
struct Table {
    width: usize,
    v: Vec<f64>,
    m: Vec<f64>,
    c: Vec<f64>,
}

impl Table {
    fn new(supports: usize, width: usize) -> Self {
        let n = supports * width;
        Table {
            width,
            v: vec![0.0; n],
            m: vec![0.0; n],
            c: vec![0.0; n],
        }
    }
}

pub fn multiindex_series_eval(
    k: &TensorHermiteKernel,
    x: &SeqPoint,
    y: &SeqPoint,
    degree_cap: usize,
    active_cap: usize,
) -> Result<SeriesValue> {
    for (p, name) in [(x, "x"), (y, "y")] {
        let v = hermite_domain_check(k, p)?;
        if v.verdict != Membership::In {
            return Err(Error::Domain(format!(
                "point {name} is not certified in the domain: {}",
                v.certificate
            )));
        }
    }
    let tol = k.trunc.abs_tol;
    let plan = tail_plan(k, x, y, tol / 4.0, 1)?;
    let big_j = plan.big_j;
    let mut plans = Vec::with_capacity(big_j);
    for j in 1..=big_j {
        let (xj, yj) = (x.coord(j), y.coord(j));
        let w = k.column(j)?;
        let uk = UniHermiteKernel {
            weights: w.clone(),
            trunc: k.trunc,
        };
        let n = match uk.degree_for(xj, yj, 0.25 * tol * split_weight(j), k.trunc.max_terms) {
            Ok(n) => n.min(degree_cap),
            Err(_) if degree_cap < k.trunc.max_terms => degree_cap,
            Err(e) => return Err(e),
        };
        plans.push(CoordPlan { x: xj, y: yj, w, n });
    }
    let m = active_cap.min(big_j);
    let mut order: Vec<usize> = (0..big_j).collect();
    order.sort_by_key(|&i| plans[i].n);
    let last = order.pop().expect("at least one coordinate");
    // Coordinates are absorbed in increasing length, so a multi-index on at
    // most `m` of the first `step + 1` of them has degree at most the sum of
    // the last `m` lengths.
    let bounds: Vec<usize> = (0..order.len())
        .map(|step| {
            order[step.saturating_sub(m.max(1) - 1)..=step]
                .iter()
                .map(|&i| plans[i].n)
                .sum::<usize>()
                .min(degree_cap)
        })
        .collect();

    // Work estimate before committing.
    let mut work = plans[last].n as f64;
    let mut width = 0usize;
    for (&i, &b) in order.iter().zip(&bounds) {
        let n = plans[i].n;
        work += 3.0 * (m as f64 + 1.0) * (width as f64 + 1.0) * (n as f64 + 1.0);
        width = b;
    }
    if work > MAX_SERIES_WORK {
        return Err(Error::Refused(format!(
            "multi-index summation needs about {work:.2e} operations"
        )));
    }

    // The longest coordinate is streamed in `fold_last`; the others are tabulated.
    let coords: Vec<Option<Coord>> = plans
        .iter()
        .enumerate()
        .map(|(i, p)| (i != last).then(|| p.tabulate()))
        .collect();
    let coord = |i: usize| coords[i].as_ref().expect("tabulated coordinate");

    let mut t = Table::new(m + 1, 1);
    t.v[0] = 1.0;
    t.m[0] = 1.0;
    t.c[0] = 1.0;
    for (step, &i) in order.iter().enumerate() {
        t = absorb(&t, coord(i), m.min(step + 1), bounds[step]);
    }
    let (v, mj, cnt, last_full) = fold_last(&t, &plans[last], m, degree_cap);

    let full: f64 =
        coords.iter().flatten().map(|c| c.full).product::<f64>() * last_full * plan.ab.exp();
    let ld = plan.ld;
    let omitted = (full - mj).max(0.0) + 8.0 * f64::EPSILON * full;
    let error_bound = ld.exp() * omitted + ld.exp_m1() * v.abs();
    Ok(SeriesValue {
        value: v,
        terms_used: cnt,
        error_bound,
        coords_used: big_j,
        work,
    })
}

/// Adds one coordinate; `cap` bounds the total degree kept, and is at least
/// the degree bound of `t`.
fn absorb(t: &Table, c: &Coord, s_max: usize, cap: usize) -> Table {
    let supports = t.v.len() / t.width;
    let n = c.coef.len();
    let width = (t.width - 1 + n).min(cap) + 1;
    let mut out = Table::new(supports, width);
    for s in 0..supports {
        let (src, dst) = (s * t.width, s * width);
        for d in 0..t.width {
            out.v[dst + d] = c.a0_inv * t.v[src + d];
            out.m[dst + d] = c.a0_inv * t.m[src + d];
            out.c[dst + d] = t.c[src + d];
        }
    }
    for s in 1..=s_max.min(supports - 1) {
        let (src, dst) = ((s - 1) * t.width, s * width);
        for d in 0..t.width {
            let (v0, m0, c0) = (t.v[src + d], t.m[src + d], t.c[src + d]);
            if c0 == 0.0 {
                continue;
            }
            let top = n.min(cap - d);
            for nu in 1..=top {
                let o = dst + d + nu;
                out.v[o] += c.coef[nu - 1] * v0;
                out.m[o] += c.major[nu - 1] * m0;
                out.c[o] += c0;
            }
        }
    }
    out
}

/// Folds in the longest coordinate term by term without storing it.
/// Returns the signed sum, the majorant, the count and the coordinate's `full`.
fn fold_last(t: &Table, c: &CoordPlan, m: usize, cap: usize) -> (f64, f64, f64, f64) {
    let supports = t.v.len() / t.width;
    let w = t.width;
    // cum[s][d]: sums over support ≤ s and degree ≤ d, accumulated over
    // degree first and then over support.
    let mut cum_v = t.v.clone();
    let mut cum_m = t.m.clone();
    let mut cum_c = t.c.clone();
    for cum in [&mut cum_v, &mut cum_m, &mut cum_c] {
        for s in 0..supports {
            for d in 1..w {
                cum[s * w + d] += cum[s * w + d - 1];
            }
        }
        for s in 1..supports {
            for d in 0..w {
                cum[s * w + d] += cum[(s - 1) * w + d];
            }
        }
    }
    let at = |s: usize, d: usize| {
        let i = s.min(supports - 1) * w + d.min(w - 1);
        (cum_v[i], cum_m[i], cum_c[i])
    };
    let a0_inv = c.w.inv(0);
    let e = c.cramer();
    let (v0, m0, c0) = at(m, cap);
    let (mut v, mut mj, mut cnt) = (a0_inv * v0, a0_inv * m0, c0);
    let mut head = 0.0;
    for (nu, (hx, hy)) in HermitePairIter::new(c.x, c.y)
        .enumerate()
        .take(c.n + 1)
        .skip(1)
    {
        let inv = c.w.inv(nu);
        head += inv;
        if m >= 1 && nu <= cap {
            let (pv, pm, pc) = at(m - 1, cap - nu);
            v += inv * hx * hy * pv;
            mj += inv * e * pm;
            cnt += pc;
        }
    }
    (v, mj, cnt, c.full(head))
}
