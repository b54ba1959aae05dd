//! Matrix-group primitives for SL(n,R): Cartan (KA+K) and Iwasawa (KAN)
//! decompositions, the Cartan projection, the length function and the
//! root-system data of the split real form.
//!
//! Lengths use the Euclidean norm of the log-singular-value vector. The
//! Killing-form norm differs from it by the constant factor `sqrt(2n)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Numerical tolerances used by the validating constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative determinant tolerance, scaled by the Hadamard bound
    /// `prod_i |row_i|` (which is >= 1 for any determinant-one matrix).
    pub determinant: f64,
    pub orthogonality: f64,
    pub reconstruction: f64,
    pub chamber_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            determinant: 1e-10,
            orthogonality: 1e-10,
            reconstruction: 1e-9,
            chamber_sum: 1e-10,
        }
    }
}

/// An element of SL(n,R), stored as a dense `n x n` matrix.
#[derive(Clone, PartialEq)]
pub struct GroupElement {
    m: DMatrix<f64>,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", self.to_literal())
    }
}

impl GroupElement {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() < 2 {
            return Err(Error::InvalidMatrix("dimension must be at least 2".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entries".into()));
        }
        let det = m.determinant();
        let hadamard: f64 = m.row_iter().map(|r| r.norm()).product();
        let allowed = tol.determinant * hadamard.max(1.0);
        if (det - 1.0).abs() > allowed {
            return Err(Error::DeterminantDrift {
                det,
                tolerance: allowed,
            });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix known to lie in SL(n,R) up to rounding (products and
    /// inverses of validated elements).
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows must all have length n".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Parses the literal format `"2,1;1,1"` (rows separated by `;`,
    /// entries by `,`).
    pub fn parse(literal: &str) -> Result<Self> {
        let rows = parse_matrix_literal(literal)?;
        Self::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    /// `diag(values)`; the product of the values must be 1.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            values,
        )))
    }

    /// `exp(diag(h))` for a log-vector `h` with zero sum.
    pub fn exp_diagonal(h: &[f64]) -> Self {
        let n = h.len();
        Self {
            m: DMatrix::from_fn(n, n, |i, j| if i == j { h[i].exp() } else { 0.0 }),
        }
    }

    /// Rotation by `theta` in SO(2).
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            m: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    /// The adjugate for n = 2, 3: exact for determinant one, and free of
    /// the cancellation error a computed determinant would bring in for
    /// ill-conditioned elements.
    pub fn inverse(&self) -> Self {
        let m = &self.m;
        let inv = match self.dim() {
            2 => DMatrix::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]]),
            3 => {
                let c = |i: usize, j: usize| {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    m[(i1, j1)] * m[(i2, j2)] - m[(i1, j2)] * m[(i2, j1)]
                };
                DMatrix::from_fn(3, 3, |i, j| c(j, i))
            }
            _ => m
                .clone()
                .try_inverse()
                .unwrap_or_else(|| DMatrix::from_element(m.nrows(), m.ncols(), f64::NAN)),
        };
        Self { m: inv }
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (self.m.transpose() * &self.m - DMatrix::<f64>::identity(n, n)).norm() <= tol
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.m
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn to_literal(&self) -> String {
        self.m
            .row_iter()
            .map(|r| {
                r.iter()
                    .map(|x| format!("{x}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement {
            m: &self.m * &rhs.m,
        }
    }
}

pub fn parse_matrix_literal(literal: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = literal
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| {
                    e.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad matrix entry '{}'", e.trim())))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse("empty matrix literal".into()));
    }
    Ok(rows)
}

/// A point of the closed positive Weyl chamber: a descending, zero-sum
/// log-singular-value vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberVector {
    values: Vec<f64>,
}

impl ChamberVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidChamber("need at least two entries".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("chamber vector".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidChamber(format!(
                "entries not sorted non-increasing: {values:?}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if sum.abs() > Tolerances::default().chamber_sum {
            return Err(Error::InvalidChamber(format!("entries sum to {sum}")));
        }
        Ok(Self { values })
    }

    /// Sorts into the chamber; the sum must still vanish.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    /// The SL(2) chamber point `(s/sqrt 2, -s/sqrt 2)` at Euclidean radius `s`.
    pub fn rank_one(s: f64) -> Self {
        let h = s / std::f64::consts::SQRT_2;
        Self {
            values: vec![h, -h],
        }
    }

    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_element(&self) -> GroupElement {
        GroupElement::exp_diagonal(&self.values)
    }
}

#[derive(Debug, Clone)]
pub struct CartanTriple {
    pub k1: GroupElement,
    pub h: ChamberVector,
    pub k2: GroupElement,
}

impl CartanTriple {
    pub fn reconstruct(&self) -> GroupElement {
        &(&self.k1 * &self.h.to_element()) * &self.k2
    }
}

/// Root data of the split form sl(n,R): positive roots `e_i - e_j` (i < j)
/// with multiplicity one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSystemData {
    pub n: usize,
    pub dim_a: usize,
    pub positive_roots: Vec<(usize, usize)>,
    pub rho: Vec<f64>,
    /// Number of indivisible positive roots.
    pub r: usize,
}

impl RootSystemData {
    pub fn sl(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        let positive_roots: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let rho = (0..n)
            .map(|i| (n as f64 - 1.0 - 2.0 * i as f64) / 2.0)
            .collect();
        Ok(Self {
            n,
            dim_a: n - 1,
            r: positive_roots.len(),
            positive_roots,
            rho,
        })
    }

    pub fn root_value(&self, h: &[f64], root: (usize, usize)) -> f64 {
        h[root.0] - h[root.1]
    }

    /// `(dim a + 2r) / 2`; exponents strictly above it are admissible.
    pub fn admissibility_threshold(&self) -> f64 {
        (self.dim_a + 2 * self.r) as f64 / 2.0
    }

    pub fn is_admissible(&self, d: f64) -> bool {
        2.0 * d > (self.dim_a + 2 * self.r) as f64
    }
}

fn check_finite(g: &GroupElement) -> Result<()> {
    if g.m.iter().any(|x| !x.is_finite()) {
        Err(Error::NonFinite("group element".into()))
    } else {
        Ok(())
    }
}

fn check_determinant(g: &GroupElement) -> Result<()> {
    let det = g.m.determinant();
    let hadamard: f64 = g.m.row_iter().map(|r| r.norm()).product();
    let allowed = Tolerances::default().determinant * hadamard.max(1.0);
    if (det - 1.0).abs() > allowed {
        return Err(Error::DeterminantDrift {
            det,
            tolerance: allowed,
        });
    }
    Ok(())
}

/// Log-singular values of a 2x2 matrix without cancellation:
/// `sigma1 + sigma2` and `sigma1 - sigma2` have closed forms in the entries.
fn rank_one_log_sv(m: &DMatrix<f64>) -> f64 {
    log_sv_2x2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

pub(crate) fn log_sv_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let p = (a + d).hypot(c - b);
    let q = (a - d).hypot(b + c);
    let det = a * d - b * c;
    let s1 = 0.5 * (p + q);
    (s1.ln() - 0.5 * det.ln()).max(0.0)
}

/// Descending log-singular values. Singular values below one are taken from
/// the inverse, where they are the large ones and carry full relative
/// precision; the mean is then removed so the vector sums to zero.
fn log_singular_values(g: &GroupElement) -> Vec<f64> {
    let n = g.dim();
    if n == 2 {
        let h = rank_one_log_sv(&g.m);
        return vec![h, -h];
    }
    let mut sv = jacobi_svd(&g.m).1;
    sv.sort_by(|a, b| b.total_cmp(a));
    if n > 3 {
        // no adjugate formula; LU inverses lose more than Jacobi does
        let mut h: Vec<f64> = sv.iter().map(|s| s.ln()).collect();
        let mean = h.iter().sum::<f64>() / n as f64;
        h.iter_mut().for_each(|x| *x -= mean);
        return h;
    }
    let mut inv_sv = jacobi_svd(&g.inverse().m).1;
    inv_sv.sort_by(|a, b| b.total_cmp(a));
    let mut h: Vec<f64> = (0..n)
        .map(|i| {
            if sv[i] >= 1.0 {
                sv[i].ln()
            } else {
                -inv_sv[n - 1 - i].ln()
            }
        })
        .collect();
    let mean = h.iter().sum::<f64>() / n as f64;
    h.iter_mut().for_each(|x| *x -= mean);
    h.sort_by(|a, b| b.total_cmp(a));
    h
}

/// One-sided Jacobi SVD `a = u diag(sigma) v^T` of an invertible matrix.
///
/// Used instead of nalgebra's bidiagonal SVD, whose singular values and
/// vectors can be badly wrong for ill-conditioned 3x3 and
/// larger inputs (recomposition errors around 1e-4 relative were observed
/// at condition number ~1e6).
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..a.nrows() {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut u, &mut v] {
                    for i in 0..m.nrows() {
                        let (x, y) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * x - s * y;
                        m[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
    for (j, s) in sigma.iter().enumerate() {
        if *s > 0.0 {
            u.column_mut(j).scale_mut(1.0 / s);
        }
    }
    (u, sigma, v)
}

/// Cartan decomposition `g = k1 exp(diag h) k2` with `k1, k2` in SO(n).
pub fn cartan_decompose(g: &GroupElement) -> Result<CartanTriple> {
    check_finite(g)?;
    check_determinant(g)?;
    let n = g.dim();
    let (u, sigma, v) = jacobi_svd(&g.m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let mut k1 = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    let mut k2 = DMatrix::from_fn(n, n, |i, j| v[(j, order[i])]);
    if k1.determinant() < 0.0 {
        for i in 0..n {
            k1[(i, n - 1)] = -k1[(i, n - 1)];
            k2[(n - 1, i)] = -k2[(n - 1, i)];
        }
    }
    let h = ChamberVector::from_sorted_unchecked(log_singular_values(g));
    Ok(CartanTriple {
        k1: GroupElement::from_matrix_unchecked(k1),
        h,
        k2: GroupElement::from_matrix_unchecked(k2),
    })
}

/// The chamber component `H(g)` alone (no orthogonal factors).
pub fn cartan_projection(g: &GroupElement) -> Result<ChamberVector> {
    check_finite(g)?;
    check_determinant(g)?;
    Ok(ChamberVector::from_sorted_unchecked(log_singular_values(g)))
}

/// `L(g) = |H(g)|`.
pub fn length(g: &GroupElement) -> Result<f64> {
    Ok(cartan_projection(g)?.norm())
}

/// Log-diagonal of the triangular factor in `g = k r` (r upper triangular
/// with positive diagonal).
///
/// For n = 2, 3 the first and last entries come from `|g e_1|` and the last
/// row of `g^-1`, which avoids the loss of relative precision that
/// Householder QR suffers on the small diagonal entries.
pub fn iwasawa_projection(g: &GroupElement) -> Result<Vec<f64>> {
    check_finite(g)?;
    let n = g.dim();
    match n {
        2 => {
            let h1 = g.m.column(0).norm().ln();
            Ok(vec![h1, -h1])
        }
        3 => {
            let h1 = g.m.column(0).norm().ln();
            let h3 = -g.inverse().m.row(2).norm().ln();
            Ok(vec![h1, -h1 - h3, h3])
        }
        _ => {
            let r = g.m.clone().qr().r();
            let mut h: Vec<f64> = (0..n).map(|i| r[(i, i)].abs().ln()).collect();
            let mean = h.iter().sum::<f64>() / n as f64;
            h.iter_mut().for_each(|x| *x -= mean);
            Ok(h)
        }
    }
    .and_then(|h: Vec<f64>| {
        if h.iter().all(|x| x.is_finite()) {
            Ok(h)
        } else {
            Err(Error::NonFinite("Iwasawa projection".into()))
        }
    })
}

/// Orthogonal factor `k` of `g = k r` with `r` having positive diagonal.
pub fn iwasawa_frame(g: &GroupElement) -> Result<GroupElement> {
    check_finite(g)?;
    let n = g.dim();
    let qr = g.m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(GroupElement::from_matrix_unchecked(q))
}

/// `sum_i rho_i h_i`.
pub fn rho_pairing(h: &[f64], roots: &RootSystemData) -> Result<f64> {
    if h.len() != roots.n {
        return Err(Error::DimensionMismatch {
            expected: roots.n,
            found: h.len(),
        });
    }
    Ok(h.iter().zip(&roots.rho).map(|(a, b)| a * b).sum())
}

/// `L(g1) + L(g2) - L(g1 g2)`; non-negative up to rounding.
pub fn subadditivity_check(g1: &GroupElement, g2: &GroupElement) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: g2.dim(),
        });
    }
    Ok(length(g1)? + length(g2)? - length(&(g1 * g2))?)
}

/// Haar-distributed element of SO(n): QR of a Gaussian matrix with the
/// sign of each column fixed by the diagonal of R.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupElement {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    GroupElement::from_matrix_unchecked(q)
}

/// Random chamber point with every entry bounded by `max_log` in absolute
/// value.
pub fn random_chamber<R: Rng + ?Sized>(n: usize, max_log: f64, rng: &mut R) -> ChamberVector {
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let scale = max_log * rng.random_range(0.0..1.0) / peak;
    x.iter_mut().for_each(|v| *v *= scale);
    x.sort_by(|a, b| b.total_cmp(a));
    ChamberVector::from_sorted_unchecked(x)
}

/// `k1 exp(H) k2` with Haar-random `k1, k2` and a random chamber point whose
/// entries are bounded by `max_log`.
pub fn random_element<R: Rng + ?Sized>(n: usize, max_log: f64, rng: &mut R) -> GroupElement {
    let k1 = random_rotation(n, rng);
    let k2 = random_rotation(n, rng);
    let h = random_chamber(n, max_log, rng);
    &(&k1 * &h.to_element()) * &k2
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn golden_log() -> f64 {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        (phi * phi).ln()
    }

    #[test]
    fn ill_conditioned_reconstruction() {
        // condition number ~8e5; a bidiagonal SVD got the middle singular
        // pair wrong here
        let g = GroupElement::from_matrix_unchecked(DMatrix::from_row_slice(
            3,
            3,
            &[
                686.6654037756267,
                319.34688965028823,
                174.6084253751346,
                118.29433954109408,
                55.296349858416086,
                31.04852249981141,
                367.03304814020794,
                170.61366226588854,
                93.0535387742308,
            ],
        ));
        let t = cartan_decompose(&g).unwrap();
        let err = (t.reconstruct().matrix() - g.matrix()).norm() / g.matrix().norm();
        assert!(err < 1e-10, "{err}");
        assert!((t.h.values()[1] + 0.010337478).abs() < 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [3, 4] {
            for _ in 0..2000 {
                let g = random_element(n, 7.0, &mut rng);
                let t = cartan_decompose(&g).unwrap();
                assert!(t.k1.is_orthogonal(1e-12) && t.k2.is_orthogonal(1e-12));
                let err = (t.reconstruct().matrix() - g.matrix()).norm() / g.matrix().norm();
                assert!(err < 1e-9, "n = {n}: {err}");
            }
        }
    }

    #[test]
    fn identity_decomposes_trivially() {
        let t = cartan_decompose(&GroupElement::identity(2)).unwrap();
        assert_eq!(t.h.values(), &[0.0, 0.0]);
        assert!((t.reconstruct().matrix() - DMatrix::identity(2, 2)).norm() < 1e-15);
        assert_eq!(length(&GroupElement::identity(3)).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_element() {
        let e = std::f64::consts::E;
        let g = GroupElement::diagonal(&[e, 1.0 / e]).unwrap();
        let t = cartan_decompose(&g).unwrap();
        assert!((t.h.values()[0] - 1.0).abs() < 1e-14);
        assert!((t.h.values()[1] + 1.0).abs() < 1e-14);
        assert!(t.k1.is_orthogonal(1e-12) && t.k2.is_orthogonal(1e-12));
        assert!((t.reconstruct().matrix() - g.matrix()).norm() < 1e-14);
    }

    #[test]
    fn golden_matrix() {
        // Eigenvalues of A^T A are (7 +- 3 sqrt 5)/2 = phi^{+-4}.
        let g = GroupElement::parse("2,1;1,1").unwrap();
        let h = cartan_projection(&g).unwrap();
        let expected = golden_log();
        assert!((h.values()[0] - expected).abs() < 1e-14);
        assert!((h.values()[0] - 0.9624236501192069).abs() < 1e-12);
        assert!((length(&g).unwrap() - std::f64::consts::SQRT_2 * expected).abs() < 1e-14);
        let t = cartan_decompose(&g).unwrap();
        assert!((t.reconstruct().matrix() - g.matrix()).norm() < 1e-14);
        assert!(t.k1.matrix().determinant() > 0.0 && t.k2.matrix().determinant() > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            GroupElement::new(m),
            Err(Error::DeterminantDrift { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 0.0, 0.0, 1.0]);
        assert!(matches!(GroupElement::new(m), Err(Error::NonFinite(_))));
        assert!(GroupElement::parse("1,2;3").is_err());
        assert!(GroupElement::parse("1,x;0,1").is_err());
    }

    #[test]
    fn iwasawa_examples() {
        let u = GroupElement::parse("1,5;0,1").unwrap();
        assert_eq!(iwasawa_projection(&u).unwrap(), vec![0.0, 0.0]);
        let t = 0.7_f64;
        let a = GroupElement::diagonal(&[t.exp(), (-t).exp()]).unwrap();
        let h = iwasawa_projection(&a).unwrap();
        assert!((h[0] - t).abs() < 1e-15 && (h[1] + t).abs() < 1e-15);
        let k = GroupElement::rotation(1.1);
        let h = iwasawa_projection(&k).unwrap();
        assert!(h[0].abs() < 1e-15 && h[1].abs() < 1e-15);
    }

    #[test]
    fn iwasawa_matches_qr_in_three_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_element(3, 2.0, &mut rng);
            let h = iwasawa_projection(&g).unwrap();
            let r = g.matrix().clone().qr().r();
            for i in 0..3 {
                assert!((h[i] - r[(i, i)].abs().ln()).abs() < 1e-10);
            }
            let k = iwasawa_frame(&g).unwrap();
            assert!(k.is_orthogonal(1e-12));
        }
    }

    #[test]
    fn rho_pairing_examples() {
        let r2 = RootSystemData::sl(2).unwrap();
        let r3 = RootSystemData::sl(3).unwrap();
        assert_eq!(rho_pairing(&[1.0, -1.0], &r2).unwrap(), 1.0);
        assert_eq!(rho_pairing(&[1.0, 0.0, -1.0], &r3).unwrap(), 2.0);
        assert_eq!(rho_pairing(&[0.0, 0.0, 0.0], &r3).unwrap(), 0.0);
        assert!(matches!(
            rho_pairing(&[1.0, -1.0], &r3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(r3.r, 3);
        assert_eq!(r3.rho.iter().sum::<f64>(), 0.0);
        assert_eq!(r2.admissibility_threshold(), 1.5);
    }

    #[test]
    fn subadditivity_examples() {
        let e = GroupElement::identity(2);
        assert_eq!(subadditivity_check(&e, &e).unwrap(), 0.0);
        let g = GroupElement::parse("2,1;1,1").unwrap();
        let slack = subadditivity_check(&g, &g.inverse()).unwrap();
        assert!((slack - 2.0 * length(&g).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn iwasawa_agrees_with_cartan_on_positive_diagonal() {
        let g = GroupElement::diagonal(&[0.5, 4.0, 0.5]).unwrap();
        let iw = iwasawa_projection(&g).unwrap();
        let mut sorted = iw.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let h = cartan_projection(&g).unwrap();
        for (a, b) in sorted.iter().zip(h.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((iw[1] - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn chamber_vector_validation() {
        assert!(ChamberVector::new(vec![-1.0, 1.0]).is_err());
        assert!(ChamberVector::new(vec![1.0, 0.0]).is_err());
        assert!(ChamberVector::from_unsorted(vec![-1.0, 1.0]).is_ok());
    }
}
