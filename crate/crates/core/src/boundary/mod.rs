//! The Furstenberg boundary `K/M`, the Radon-Nikodym cocycle and the
//! quasi-regular representation on sampled boundary functions.
//!
//! For n = 2 the boundary is the real projective line, sampled at the angles
//! `pi j / N`; functions are moved by periodic cubic interpolation. For n = 3
//! the flag manifold is sampled by an Euler-angle grid on SO(3), and
//! functions must carry a closed form (invariant under the diagonal sign
//! group M) so that translates are evaluated exactly.

pub mod pi_norm;
pub mod xi;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::haar::{build_k_quadrature, KQuadrature};
use crate::lie::GroupElement;

pub use pi_norm::{pi_operator_norm, PiNormEstimate};
pub use xi::{
    harish_chandra_xi, unit_pairing, AdaptiveXi, GridXi, TabulatedXi, XiEvaluator, XiMethod,
};

/// A point of `K/M`: a line in R^2, or a full flag in R^3 represented by an
/// orthonormal frame (defined up to the signs in M).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Line(f64),
    Flag(Matrix3<f64>),
}

fn mat3(g: &GroupElement) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| g.entry(i, j))
}

impl BoundaryPoint {
    /// `g . b` for the matrix `g` (pass `g^-1` to pull back).
    pub fn act(&self, g: &GroupElement) -> BoundaryPoint {
        match *self {
            BoundaryPoint::Line(theta) => {
                let (s, c) = theta.sin_cos();
                let x = g.entry(0, 0) * c + g.entry(0, 1) * s;
                let y = g.entry(1, 0) * c + g.entry(1, 1) * s;
                BoundaryPoint::Line(y.atan2(x).rem_euclid(PI))
            }
            BoundaryPoint::Flag(k) => BoundaryPoint::Flag(gram_schmidt(&(mat3(g) * k))),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            BoundaryPoint::Line(t) => Some(*t),
            BoundaryPoint::Flag(_) => None,
        }
    }

    pub fn frame(&self) -> Option<&Matrix3<f64>> {
        match self {
            BoundaryPoint::Flag(k) => Some(k),
            BoundaryPoint::Line(_) => None,
        }
    }
}

/// Orthogonal factor of `a = q r` with positive diagonal in `r`, for
/// `det a > 0`.
fn gram_schmidt(a: &Matrix3<f64>) -> Matrix3<f64> {
    let q1 = a.column(0).normalize();
    let v = a.column(1) - q1 * q1.dot(&a.column(1));
    let q2 = v.normalize();
    let q3 = q1.cross(&q2);
    Matrix3::from_columns(&[q1, q2, q3])
}

/// Sampling of `K/M` with probability weights.
#[derive(Clone)]
pub struct BoundaryGrid {
    dim: usize,
    resolution: usize,
    points: Vec<BoundaryPoint>,
    weights: Vec<f64>,
    k: KQuadrature,
}

impl fmt::Debug for BoundaryGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryGrid")
            .field("dim", &self.dim)
            .field("resolution", &self.resolution)
            .field("len", &self.points.len())
            .finish()
    }
}

impl BoundaryGrid {
    /// n = 2: `resolution` lines at angles `pi j / resolution`; the matching
    /// K-quadrature has `2 resolution` rotations. n = 3: the Euler grid of
    /// [`build_k_quadrature`] with `resolution^3` nodes.
    pub fn new(n: usize, resolution: usize) -> Result<Arc<Self>> {
        match n {
            2 => {
                let k = build_k_quadrature(2, 2 * resolution)?;
                let h = PI / resolution as f64;
                Ok(Arc::new(Self {
                    dim: 2,
                    resolution,
                    points: (0..resolution)
                        .map(|j| BoundaryPoint::Line(j as f64 * h))
                        .collect(),
                    weights: vec![1.0 / resolution as f64; resolution],
                    k,
                }))
            }
            3 => {
                let k = build_k_quadrature(3, resolution)?;
                Ok(Arc::new(Self {
                    dim: 3,
                    resolution,
                    points: k
                        .nodes
                        .iter()
                        .map(|g| BoundaryPoint::Flag(mat3(g)))
                        .collect(),
                    weights: k.weights.clone(),
                    k,
                }))
            }
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BoundaryPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn k_quadrature(&self) -> &KQuadrature {
        &self.k
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        self.dim == other.dim && self.resolution == other.resolution
    }

    /// Cubic interpolation stencil at angle `phi`: four node indices and
    /// Lagrange weights.
    pub(crate) fn stencil(&self, phi: f64) -> ([usize; 4], [f64; 4]) {
        let n = self.resolution;
        let x = phi.rem_euclid(PI) / (PI / n as f64);
        let j = x.floor();
        let f = x - j;
        let j = j as isize;
        let idx = [-1isize, 0, 1, 2].map(|o| (j + o).rem_euclid(n as isize) as usize);
        let w = [
            -f * (f - 1.0) * (f - 2.0) / 6.0,
            (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
            -(f + 1.0) * f * (f - 2.0) / 2.0,
            (f + 1.0) * f * (f - 1.0) / 6.0,
        ];
        (idx, w)
    }
}

/// `c(g, b) = d(g_* nu)/d nu (b) = exp(-2 rho(H_Iw(g^-1 k)))`, from the
/// precomputed inverse.
pub(crate) fn cocycle_from_inverse(g_inv: &GroupElement, b: &BoundaryPoint) -> f64 {
    match b {
        BoundaryPoint::Line(theta) => {
            let (s, c) = theta.sin_cos();
            let x = g_inv.entry(0, 0) * c + g_inv.entry(0, 1) * s;
            let y = g_inv.entry(1, 0) * c + g_inv.entry(1, 1) * s;
            1.0 / (x * x + y * y)
        }
        BoundaryPoint::Flag(k) => {
            // |g^T k e3| is the norm of the last row of (g^-1 k)^-1.
            let gi = mat3(g_inv);
            let first = (gi * k.column(0)).norm_squared();
            let g = gi
                .try_inverse()
                .unwrap_or_else(|| Matrix3::from_element(f64::NAN));
            let last: Vector3<f64> = g.transpose() * k.column(2);
            1.0 / (first * last.norm_squared())
        }
    }
}

/// Radon-Nikodym cocycle at any boundary point.
pub fn cocycle(g: &GroupElement, b: &BoundaryPoint) -> Result<f64> {
    let c = cocycle_from_inverse(&g.inverse(), b);
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(Error::NonFinite("cocycle".into()))
    }
}

pub type ClosedForm = Arc<dyn Fn(&BoundaryPoint) -> Complex64 + Send + Sync>;

/// Sampled element of `L^2(K/M)`.
#[derive(Clone)]
pub struct BoundaryFunction {
    grid: Arc<BoundaryGrid>,
    samples: Vec<Complex64>,
    closed_form: Option<ClosedForm>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("grid", &self.grid)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl BoundaryFunction {
    pub fn from_samples(grid: &Arc<BoundaryGrid>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        if samples
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("boundary samples".into()));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            samples,
            closed_form: None,
        })
    }

    pub fn from_real(grid: &Arc<BoundaryGrid>, samples: &[f64]) -> Result<Self> {
        Self::from_samples(
            grid,
            samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Samples a closed-form function and keeps the closed form for exact
    /// translation.
    pub fn from_fn<F>(grid: &Arc<BoundaryGrid>, f: F) -> Result<Self>
    where
        F: Fn(&BoundaryPoint) -> Complex64 + Send + Sync + 'static,
    {
        let samples = grid.points.iter().map(&f).collect();
        let mut out = Self::from_samples(grid, samples)?;
        out.closed_form = Some(Arc::new(f));
        Ok(out)
    }

    /// The constant function `1`.
    pub fn ones(grid: &Arc<BoundaryGrid>) -> Self {
        Self::from_fn(grid, |_| Complex64::new(1.0, 0.0)).expect("constant samples are finite")
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Value at an arbitrary point: closed form if present, otherwise the
    /// clamped cubic interpolant (n = 2 only).
    pub fn evaluate(&self, b: &BoundaryPoint) -> Result<Complex64> {
        if let Some(f) = &self.closed_form {
            return Ok(f(b));
        }
        match b {
            BoundaryPoint::Line(phi) => Ok(self.interpolate(*phi)),
            BoundaryPoint::Flag(_) => Err(Error::InterpolationOutOfRange(
                "flag-manifold functions need a closed form".into(),
            )),
        }
    }

    fn interpolate(&self, phi: f64) -> Complex64 {
        let (idx, w) = self.grid.stencil(phi);
        let mut z = Complex64::new(0.0, 0.0);
        let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&i, &wi) in idx.iter().zip(&w) {
            let s = self.samples[i];
            z += s * wi;
            lo_re = lo_re.min(s.re);
            hi_re = hi_re.max(s.re);
            lo_im = lo_im.min(s.im);
            hi_im = hi_im.max(s.im);
        }
        Complex64::new(z.re.clamp(lo_re, hi_re), z.im.clamp(lo_im, hi_im))
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            samples: self.samples.iter().map(|&z| f(z)).collect(),
            closed_form: None,
        }
    }

    /// `|xi|^2` as a function (keeps the closed form).
    pub fn abs_squared(&self) -> Self {
        let mut out = self.map(|z| Complex64::new(z.norm_sqr(), 0.0));
        if let Some(f) = &self.closed_form {
            let f = Arc::clone(f);
            out.closed_form = Some(Arc::new(move |b| Complex64::new(f(b).norm_sqr(), 0.0)));
        }
        out
    }

    pub fn norm2(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.grid.weights)
            .map(|(z, w)| w * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.grid.weights)
            .map(|(z, w)| w * z.norm())
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.samples.iter().all(|z| z.re >= 0.0 && z.im == 0.0)
    }
}

/// `(pi(g) xi)(b) = c(g, b)^{1/2} xi(g^-1 b)`.
pub fn apply_pi(g: &GroupElement, xi: &BoundaryFunction) -> Result<BoundaryFunction> {
    let grid = &xi.grid;
    if g.dim() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            found: g.dim(),
        });
    }
    let g_inv = g.inverse();
    let samples = grid
        .points
        .iter()
        .map(|b| {
            let c = cocycle_from_inverse(&g_inv, b);
            Ok(xi.evaluate(&b.act(&g_inv))? * c.sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = BoundaryFunction::from_samples(grid, samples)?;
    if grid.dim == 3 {
        if let Some(f) = &xi.closed_form {
            let f = Arc::clone(f);
            out.closed_form = Some(Arc::new(move |b: &BoundaryPoint| {
                f(&b.act(&g_inv)) * cocycle_from_inverse(&g_inv, b).sqrt()
            }));
        }
    }
    Ok(out)
}

/// `<xi, eta> = sum_b w_b xi(b) conj(eta(b))`.
pub fn pairing(xi: &BoundaryFunction, eta: &BoundaryFunction) -> Result<Complex64> {
    if !xi.grid.same_as(&eta.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(xi
        .samples
        .iter()
        .zip(&eta.samples)
        .zip(&xi.grid.weights)
        .map(|((a, b), w)| a * b.conj() * w)
        .sum())
}

/// `sum_b w_b c(g, b)`; equals one for the exact measure.
pub fn cocycle_mass(g: &GroupElement, grid: &BoundaryGrid) -> f64 {
    let g_inv = g.inverse();
    grid.points
        .iter()
        .zip(&grid.weights)
        .map(|(b, w)| w * cocycle_from_inverse(&g_inv, b))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::random_element;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_rotations_have_unit_cocycle() {
        let grid = BoundaryGrid::new(2, 64).unwrap();
        let k = GroupElement::rotation(0.3);
        for b in grid.points() {
            assert!((cocycle(&GroupElement::identity(2), b).unwrap() - 1.0).abs() < 1e-15);
            assert!((cocycle(&k, b).unwrap() - 1.0).abs() < 1e-14);
        }
        let grid = BoundaryGrid::new(3, 5).unwrap();
        let k = crate::haar::euler_zyz(0.2, 1.1, -0.7);
        for b in grid.points() {
            assert!((cocycle(&k, b).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_cocycle_closed_form() {
        let t = 1.3f64;
        let g = GroupElement::exp_diagonal(&[t / 2.0, -t / 2.0]);
        for theta in [0.0, 0.4, 1.2, 2.9] {
            let c = cocycle(&g, &BoundaryPoint::Line(theta)).unwrap();
            let expected = 1.0 / ((-t).exp() * theta.cos().powi(2) + t.exp() * theta.sin().powi(2));
            assert!((c - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn chain_rule_and_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3] {
            let grid = BoundaryGrid::new(n, if n == 2 { 512 } else { 10 }).unwrap();
            for _ in 0..10 {
                let g = random_element(n, 0.8, &mut rng);
                let h = random_element(n, 0.8, &mut rng);
                let gh = &g * &h;
                for b in grid.points().iter().step_by(7) {
                    let lhs = cocycle(&gh, b).unwrap();
                    let rhs = cocycle(&g, b).unwrap() * cocycle(&h, &b.act(&g.inverse())).unwrap();
                    assert!((lhs - rhs).abs() < 1e-10 * lhs);
                }
            }
        }
        let grid = BoundaryGrid::new(2, 512).unwrap();
        let g = random_element(2, 1.0, &mut rng);
        assert!((cocycle_mass(&g, &grid) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pi_is_unitary_and_positive() {
        let grid = BoundaryGrid::new(2, 1024).unwrap();
        let xi = BoundaryFunction::from_fn(&grid, |b| {
            let t = b.angle().unwrap();
            Complex64::new(1.0 + (2.0 * t).cos(), (4.0 * t).sin())
        })
        .unwrap();
        let g = GroupElement::parse("2,1;1,1").unwrap();
        let moved = apply_pi(&g, &xi).unwrap();
        assert!((moved.norm2() - xi.norm2()).abs() < 1e-7);
        let pos = xi.map(|z| Complex64::new(z.re, 0.0));
        assert!(apply_pi(&g, &pos).unwrap().is_nonnegative());
        let same = apply_pi(&GroupElement::identity(2), &xi).unwrap();
        for (a, b) in same.samples().iter().zip(xi.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pairing_basics() {
        let grid = BoundaryGrid::new(2, 32).unwrap();
        let ones = BoundaryFunction::ones(&grid);
        assert!((pairing(&ones, &ones).unwrap() - 1.0).norm() < 1e-15);
        let other = BoundaryFunction::ones(&BoundaryGrid::new(2, 16).unwrap());
        assert_eq!(pairing(&ones, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn flag_functions_need_closed_forms() {
        let grid = BoundaryGrid::new(3, 4).unwrap();
        let xi = BoundaryFunction::from_real(&grid, &vec![1.0; grid.len()]).unwrap();
        let g = GroupElement::exp_diagonal(&[0.5, 0.0, -0.5]);
        assert!(matches!(
            apply_pi(&g, &xi),
            Err(Error::InterpolationOutOfRange(_))
        ));
        let ones = BoundaryFunction::ones(&grid);
        let moved = apply_pi(&g, &ones).unwrap();
        assert!(moved.has_closed_form());
    }
}
