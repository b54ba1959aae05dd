//! Spectral norm of the discretized `pi(f) = sum_gamma f(gamma) pi(gamma)`.
//!
//! The operator is compressed to the span of the normalized cell indicators
//! `e_i = N^{1/2} 1_[i h, (i+1) h)` on the projective line, `h = pi / N`:
//!
//! ```text
//! <pi(gamma) e_j, e_i> = (N / pi) int_{cell_i  cap  gamma cell_j} c(gamma, b)^{1/2} db.
//! ```
//!
//! Compressions never exceed the operator norm, the cell spaces are nested
//! under doubling, and the identity compresses to the identity matrix.
//! Overlaps are found by merging the cell edges with their images under
//! `gamma`, and each overlap is integrated by three-point Gauss-Legendre.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use std::f64::consts::PI;

use super::{cocycle_from_inverse, BoundaryGrid, BoundaryPoint};
use crate::discrete::GroupFunction;
use crate::error::{Error, Result};
use crate::lie::GroupElement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiNormEstimate {
    pub value: f64,
    /// Same estimate on the grid of half the resolution.
    pub coarse: f64,
    pub delta: f64,
    pub resolution: usize,
    pub iterations: usize,
}

struct Csr {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    n: usize,
}

impl Csr {
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                (self.offsets[i]..self.offsets[i + 1])
                    .map(|k| self.vals[k] * x[self.cols[k] as usize])
                    .sum()
            })
            .collect()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            for k in self.offsets[i]..self.offsets[i + 1] {
                out[self.cols[k] as usize] += self.vals[k].conj() * y[i];
            }
        }
        out
    }
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Triplets `(i, j, <pi(gamma) e_j, e_i>)` for one group element.
fn overlaps(g: &GroupElement, grid: &BoundaryGrid) -> Vec<(u32, u32, f64)> {
    let n = grid.resolution();
    let h = PI / n as f64;
    let g_inv = g.inverse();
    let mut edges: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
    edges.extend((0..n).map(|k| {
        BoundaryPoint::Line(k as f64 * h)
            .act(g)
            .angle()
            .expect("projective line")
    }));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let m = edges.len();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let a = edges[k];
        let b = if k + 1 < m {
            edges[k + 1]
        } else {
            edges[0] + PI
        };
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let i = ((mid.rem_euclid(PI) / h) as usize).min(n - 1);
        let phi = BoundaryPoint::Line(mid.rem_euclid(PI))
            .act(&g_inv)
            .angle()
            .expect("projective line");
        let j = ((phi / h) as usize).min(n - 1);
        let integral: f64 = GAUSS3
            .iter()
            .map(|&(x, w)| {
                let b = BoundaryPoint::Line(mid + half * x);
                w * cocycle_from_inverse(&g_inv, &b).sqrt()
            })
            .sum::<f64>()
            * half;
        out.push((i as u32, j as u32, integral * n as f64 / PI));
    }
    out
}

fn assemble(f: &GroupFunction, grid: &BoundaryGrid) -> Csr {
    let ball = f.ball();
    let n = grid.len();
    let parts: Vec<Vec<(u32, u32, Complex64)>> = f
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(i, z)| {
            overlaps(&ball.element(i), grid)
                .into_iter()
                .map(|(r, c, v)| (r, c, z * v))
                .collect()
        })
        .collect();
    let mut triplets: Vec<(u32, u32, Complex64)> = parts.into_iter().flatten().collect();
    triplets.sort_by_key(|t| (t.0, t.1));
    let mut offsets = vec![0usize; n + 1];
    let mut cols = Vec::with_capacity(triplets.len());
    let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
    let mut last: Option<(u32, u32)> = None;
    for (r, c, v) in triplets {
        if last == Some((r, c)) {
            *vals.last_mut().expect("merged entry") += v;
        } else {
            cols.push(c);
            vals.push(v);
            offsets[r as usize + 1] += 1;
            last = Some((r, c));
        }
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    Csr {
        offsets,
        cols,
        vals,
        n,
    }
}

const MAX_ITERATIONS: usize = 2000;
const REL_TOL: f64 = 1e-12;

/// Largest singular value by power iteration on `A* A`, started from the
/// constant vector plus a small seeded perturbation.
fn top_singular_value(a: &Csr) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..a.n)
        .map(|_| Complex64::new(1.0 + 1e-3 * rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let mut sigma = 0.0;
    for it in 1..=MAX_ITERATIONS {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (0.0, it);
        }
        v.iter_mut().for_each(|z| *z /= norm);
        let av = a.apply(&v);
        let next = av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let done = (next - sigma).abs() <= REL_TOL * next;
        sigma = sigma.max(next);
        if done {
            return (sigma, it);
        }
        v = a.apply_adjoint(&av);
    }
    (sigma, MAX_ITERATIONS)
}

/// `||pi(f)||` on `grid` (n = 2), with the half-resolution value for a
/// convergence check.
pub fn pi_operator_norm(f: &GroupFunction, grid: &Arc<BoundaryGrid>) -> Result<PiNormEstimate> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    if f.ball().dim() != grid.dim() {
        return Err(Error::GridMismatch);
    }
    if f.is_empty() {
        return Ok(PiNormEstimate {
            value: 0.0,
            coarse: 0.0,
            delta: 0.0,
            resolution: grid.resolution(),
            iterations: 0,
        });
    }
    let (value, iterations) = top_singular_value(&assemble(f, grid));
    let coarse_grid = BoundaryGrid::new(2, (grid.resolution() / 2).max(4))?;
    let (coarse, _) = top_singular_value(&assemble(f, &coarse_grid));
    if !value.is_finite() {
        return Err(Error::NonFinite("pi operator norm".into()));
    }
    Ok(PiNormEstimate {
        value,
        coarse,
        delta: (value - coarse).abs(),
        resolution: grid.resolution(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{generate_ball, GroupPresentation};

    #[test]
    fn deltas_have_unit_norm() {
        let ball = Arc::new(generate_ball(&GroupPresentation::sl2z(), 2).unwrap());
        let grid = BoundaryGrid::new(2, 512).unwrap();
        for i in 0..ball.len() {
            let est = pi_operator_norm(&GroupFunction::delta(&ball, i).unwrap(), &grid).unwrap();
            assert!(
                est.value <= 1.0 + 1e-12 && est.value > 1.0 - 1e-5,
                "element {i}: {}",
                est.value
            );
        }
        let est = pi_operator_norm(&GroupFunction::zero(&ball), &grid).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn symmetric_pair_bounded_by_l1() {
        let ball = Arc::new(generate_ball(&GroupPresentation::sl2z(), 4).unwrap());
        let a = ball.lookup(&[2.0, 1.0, 1.0, 1.0]).unwrap().unwrap();
        let b = ball.inverse_index(a).unwrap().unwrap();
        let f = GroupFunction::from_real(&ball, &[(a, 1.0), (b, 1.0)]).unwrap();
        let grid = BoundaryGrid::new(2, 1024).unwrap();
        let est = pi_operator_norm(&f, &grid).unwrap();
        assert!(est.value <= 2.0 + 1e-12 && est.value > 1.0);
        assert!(est.coarse <= est.value + 1e-12);
    }
}
