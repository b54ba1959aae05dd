//! Lower bounds for the reduced C*-norm `||lambda(f)||` from compressions to
//! word balls, and the comparison with `||pi(f)||` for positive `f`.
//!
//! The compression `P_R lambda(f* * f) P_R` is positive semi-definite and
//! bounded by `||lambda(f)||^2`, so every Rayleigh quotient of it is a
//! certified lower bound. Power iteration only improves the quotient.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::{AddAssign, Mul};
use std::sync::Arc;

use crate::boundary::{pi_operator_norm, BoundaryGrid, PiNormEstimate};
use crate::discrete::{convolve, generate_ball, generate_ball_capped, BallIndex, GroupFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(rename = "R")]
    pub truncation_radius: u32,
    pub stalled: bool,
}

impl NormEstimate {
    /// The estimate, or [`Error::PowerIterationStall`] if the residual
    /// target was missed.
    pub fn certified(self) -> Result<Self> {
        if self.stalled {
            Err(Error::PowerIterationStall {
                estimate: self.lower,
                residual: self.residual,
            })
        } else {
            Ok(self)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub ball_cap: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 10_000,
            seed: 7,
            ball_cap: 12_000_000,
        }
    }
}

/// `f*(gamma) = conj(f(gamma^-1))`.
pub fn adjoint(f: &GroupFunction) -> Result<GroupFunction> {
    let ball = f.ball();
    let entries = f
        .iter()
        .map(|(i, z)| {
            let j = ball
                .inverse_index(i)?
                .ok_or(Error::SupportNotSymmetric(i))?;
            Ok((j, z.conj()))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupFunction::new(ball, entries)
}

trait Scalar: Copy + Send + Sync + AddAssign + Mul<Output = Self> + Default {
    fn from_complex(z: Complex64) -> Self;
    fn from_real(x: f64) -> Self;
    fn norm_sqr(self) -> f64;
    /// `Re(conj(self) * other)`.
    fn dot_re(self, other: Self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn dot_re(self, other: Self) -> f64 {
        self * other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn dot_re(self, other: Self) -> f64 {
        (self.conj() * other).re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

const NO_NEIGHBOUR: u32 = u32::MAX;

/// `(A v)(g) = sum_eta h(eta) v(eta^-1 g)` restricted to the domain ball,
/// with the neighbour indices precomputed.
struct Compression<T> {
    coeffs: Vec<T>,
    neighbours: Vec<u32>,
    n: usize,
}

impl<T: Scalar> Compression<T> {
    fn build(h: &GroupFunction, domain: &BallIndex) -> Result<Self> {
        let hb = h.ball();
        let inverses = h
            .iter()
            .map(|(i, _)| hb.inverse_index(i)?.ok_or(Error::SupportNotSymmetric(i)))
            .collect::<Result<Vec<_>>>()?;
        let m = inverses.len();
        let n = domain.len();
        let neighbours: Vec<u32> = (0..n)
            .into_par_iter()
            .map(|g| {
                inverses
                    .iter()
                    .map(|&e| {
                        Ok(domain
                            .product_index(hb, e, domain, g)?
                            .map_or(NO_NEIGHBOUR, |x| x as u32))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        debug_assert_eq!(neighbours.len(), n * m);
        Ok(Self {
            coeffs: h.values().iter().map(|&z| T::from_complex(z)).collect(),
            neighbours,
            n,
        })
    }

    fn apply(&self, v: &[T], out: &mut [T]) {
        let m = self.coeffs.len();
        out.par_iter_mut().enumerate().for_each(|(g, o)| {
            let mut acc = T::default();
            for (k, &c) in self.coeffs.iter().enumerate() {
                let j = self.neighbours[g * m + k];
                if j != NO_NEIGHBOUR {
                    acc += c * v[j as usize];
                }
            }
            *o = acc;
        });
    }
}

fn power_iterate<T: Scalar>(a: &Compression<T>, opts: &PowerOptions) -> (f64, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<T> = (0..a.n)
        .map(|_| T::from_real(rng.random_range(0.0..1.0)))
        .collect();
    let mut w = vec![T::default(); a.n];
    let mut best: f64 = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (0.0, iterations, 0.0);
        }
        v.iter_mut().for_each(|x| *x = x.scale(1.0 / norm));
        a.apply(&v, &mut w);
        let theta: f64 = v.iter().zip(&w).map(|(x, y)| x.dot_re(*y)).sum();
        best = best.max(theta);
        let res2: f64 = v
            .iter()
            .zip(&w)
            .map(|(x, y)| {
                let mut r = *y;
                r += x.scale(-theta);
                r.norm_sqr()
            })
            .sum();
        residual = if theta > 0.0 {
            res2.sqrt() / theta
        } else {
            0.0
        };
        if residual <= opts.tol {
            break;
        }
        std::mem::swap(&mut v, &mut w);
    }
    (best.max(0.0), iterations, residual)
}

/// Lower bound for `||lambda(f)||` from the compression of
/// `lambda(f* * f)` to a prebuilt domain ball.
pub fn lambda_norm_lower_on(
    f: &GroupFunction,
    domain: &BallIndex,
    opts: &PowerOptions,
) -> Result<NormEstimate> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let s = f.support_radius();
    if domain.radius() < s {
        return Err(Error::TargetTooSmall {
            target: domain.radius(),
            needed: s,
        });
    }
    if !f.ball().same_group(domain) {
        return Err(Error::PresentationMismatch(
            f.ball().presentation().name.clone(),
            domain.presentation().name.clone(),
        ));
    }
    if f.is_empty() {
        return Ok(NormEstimate {
            lower: 0.0,
            iterations: 0,
            residual: 0.0,
            truncation_radius: domain.radius(),
            stalled: false,
        });
    }
    let target = Arc::new(generate_ball(f.ball().presentation(), 2 * s)?);
    let h = convolve(&adjoint(f)?, f, &target)?;
    let real = h.values().iter().all(|z| z.im == 0.0);
    let (theta, iterations, residual) = if real {
        power_iterate(&Compression::<f64>::build(&h, domain)?, opts)
    } else {
        power_iterate(&Compression::<Complex64>::build(&h, domain)?, opts)
    };
    Ok(NormEstimate {
        lower: theta.sqrt(),
        iterations,
        residual,
        truncation_radius: domain.radius(),
        stalled: residual > opts.tol,
    })
}

/// Largest ball `B_R`, `support_radius(f) <= R <= max_radius`, whose
/// compression of `lambda(f* * f)` has at most `budget` stored entries
/// (`|B_R| |supp(f* * f)|`). `None` when not even the support ball fits.
pub fn budgeted_domain(
    f: &GroupFunction,
    max_radius: u32,
    budget: usize,
) -> Result<Option<BallIndex>> {
    let s = f.support_radius();
    let target = Arc::new(generate_ball(f.ball().presentation(), 2 * s)?);
    let h_len = convolve(&adjoint(f)?, f, &target)?.len().max(1);
    let cap = (budget / h_len).max(1);
    for r in (s..=max_radius.max(s)).rev() {
        match generate_ball_capped(f.ball().presentation(), r, cap) {
            Ok(b) => return Ok(Some(b)),
            Err(Error::BallOverflow { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// [`lambda_norm_lower_on`] with the domain ball `B_R` generated here.
pub fn lambda_norm_lower(
    f: &GroupFunction,
    radius: u32,
    opts: &PowerOptions,
) -> Result<NormEstimate> {
    let domain = generate_ball_capped(f.ball().presentation(), radius, opts.ball_cap)?;
    lambda_norm_lower_on(f, &domain, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShalomComparison {
    pub lambda: NormEstimate,
    pub pi: PiNormEstimate,
}

impl ShalomComparison {
    /// `lambda_lower - pi_estimate`; non-positive when the ordering holds.
    pub fn excess(&self) -> f64 {
        self.lambda.lower - self.pi.value
    }
}

/// Both sides of `||lambda(f)|| <= ||pi(f)||` for `f >= 0`.
pub fn shalom_compare(
    f: &GroupFunction,
    radius: u32,
    grid: &Arc<BoundaryGrid>,
    opts: &PowerOptions,
) -> Result<ShalomComparison> {
    if let Some((i, _)) = f.iter().find(|(_, z)| z.re < 0.0 || z.im != 0.0) {
        return Err(Error::NegativeMass(i));
    }
    Ok(ShalomComparison {
        lambda: lambda_norm_lower(f, radius, opts)?,
        pi: pi_operator_norm(f, grid)?,
    })
}
