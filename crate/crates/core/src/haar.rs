//! Integration on G in Cartan coordinates, `dg = dk J(H) dH dk`, and
//! quadrature on K = SO(n).
//!
//! Chamber nodes are laid out on shells of constant `|H|`. Shell edges are
//! geometric in the radius, so the slowly decaying polynomial tails of
//! Schwartz-type integrands cost few nodes. In rank two every shell is a
//! tensor product of radial and angular Gauss-Legendre rules over the
//! 60-degree chamber sector.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::boundary::xi::XiEvaluator;
use crate::error::{Error, Result};
use crate::lie::{rho_pairing, ChamberVector, GroupElement, RootSystemData};
use crate::quadrature::gauss_legendre;

/// Guard for `exp(alpha(H))`.
pub const ROOT_OVERFLOW_GUARD: f64 = 700.0;

/// Serializable description of the quadratures used in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub cutoff: f64,
    pub shells: usize,
    pub nodes_per_shell: usize,
    pub k_resolution: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            cutoff: 20.0,
            shells: 24,
            nodes_per_shell: 12,
            k_resolution: 1024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChamberQuadrature {
    pub dim: usize,
    pub nodes: Vec<ChamberVector>,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    pub shell_of: Vec<usize>,
    pub cutoff: f64,
    pub spec: QuadratureSpec,
}

/// Orthonormal basis of the rank-two chamber plane: `e1` spans the wall
/// `h2 = h3`, and the wall `h1 = h2` sits at angle `pi/3`.
fn rank_two_frame() -> ([f64; 3], [f64; 3]) {
    let s6 = 6f64.sqrt();
    let s2 = 2f64.sqrt();
    ([2.0 / s6, -1.0 / s6, -1.0 / s6], [0.0, 1.0 / s2, -1.0 / s2])
}

/// Shell edges `0 = e_0 < e_1 < ... < e_shells = cutoff`, geometric after
/// the first shell.
fn shell_edges(cutoff: f64, shells: usize) -> Vec<f64> {
    let first = (cutoff / shells as f64).min(0.25);
    let mut edges = vec![0.0];
    if shells == 1 {
        edges.push(cutoff);
        return edges;
    }
    let ratio = (cutoff / first).powf(1.0 / (shells - 1) as f64);
    for k in 0..shells {
        edges.push(first * ratio.powi(k as i32));
    }
    *edges.last_mut().expect("non-empty") = cutoff;
    edges
}

impl ChamberQuadrature {
    pub fn build(n: usize, spec: &QuadratureSpec) -> Result<Self> {
        if !(spec.cutoff > 0.0) || !spec.cutoff.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cutoff must be positive, got {}",
                spec.cutoff
            )));
        }
        if spec.shells == 0 || spec.nodes_per_shell == 0 {
            return Err(Error::InvalidParameter(
                "shells and nodes_per_shell must be positive".into(),
            ));
        }
        let edges = shell_edges(spec.cutoff, spec.shells);
        let (gx, gw) = gauss_legendre(spec.nodes_per_shell);
        let mut quad = Self {
            dim: n,
            nodes: Vec::new(),
            radii: Vec::new(),
            weights: Vec::new(),
            shell_of: Vec::new(),
            cutoff: spec.cutoff,
            spec: *spec,
        };
        match n {
            2 => {
                for (shell, w) in edges.windows(2).enumerate() {
                    let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                    for (x, wt) in gx.iter().zip(&gw) {
                        let s = mid + half * x;
                        quad.push(ChamberVector::rank_one(s), s, half * wt, shell);
                    }
                }
            }
            3 => {
                let (e1, e2) = rank_two_frame();
                let sector = PI / 3.0;
                for (shell, w) in edges.windows(2).enumerate() {
                    let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                    for (x, wt) in gx.iter().zip(&gw) {
                        let s = mid + half * x;
                        for (y, wa) in gx.iter().zip(&gw) {
                            let psi = 0.5 * sector * (1.0 + y);
                            let (sn, cs) = psi.sin_cos();
                            let mut h: Vec<f64> =
                                (0..3).map(|i| s * (cs * e1[i] + sn * e2[i])).collect();
                            // Keep exact chamber ordering despite rounding.
                            h.sort_by(|a, b| b.total_cmp(a));
                            let weight = half * wt * 0.5 * sector * wa * s;
                            quad.push(ChamberVector::from_sorted_unchecked(h), s, weight, shell);
                        }
                    }
                }
            }
            _ => return Err(Error::UnsupportedDimension(n)),
        }
        Ok(quad)
    }

    fn push(&mut self, h: ChamberVector, s: f64, w: f64, shell: usize) {
        self.nodes.push(h);
        self.radii.push(s);
        self.weights.push(w);
        self.shell_of.push(shell);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Angular measure of the chamber in polar coordinates.
    pub fn angular_measure(&self) -> f64 {
        if self.dim == 2 {
            1.0
        } else {
            PI / 3.0
        }
    }
}

/// `J(H) = prod_{alpha > 0} sinh(alpha(H))`.
pub fn cartan_density(h: &ChamberVector, roots: &RootSystemData) -> Result<f64> {
    if h.dim() != roots.n {
        return Err(Error::DimensionMismatch {
            expected: roots.n,
            found: h.dim(),
        });
    }
    let mut density = 1.0;
    for &root in &roots.positive_roots {
        let a = roots.root_value(h.values(), root);
        if a > ROOT_OVERFLOW_GUARD {
            return Err(Error::Overflow {
                value: a,
                guard: ROOT_OVERFLOW_GUARD,
            });
        }
        density *= a.sinh();
    }
    Ok(density.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamberIntegral {
    pub value: f64,
    /// Contribution of the outermost shell.
    pub last_shell: f64,
}

/// `int_{a+} f(e^H) J(H) dH` over the quadrature's chamber region.
pub fn integrate_bi_k_invariant<F>(
    f: F,
    quad: &ChamberQuadrature,
    roots: &RootSystemData,
) -> Result<ChamberIntegral>
where
    F: Fn(&ChamberVector) -> f64,
{
    let last = quad.spec.shells - 1;
    let mut value = 0.0;
    let mut last_shell = 0.0;
    for ((h, w), &shell) in quad.nodes.iter().zip(&quad.weights).zip(&quad.shell_of) {
        let fx = f(h);
        if !fx.is_finite() {
            return Err(Error::NonFinite(format!(
                "integrand at chamber node {:?}",
                h.values()
            )));
        }
        let term = w * fx * cartan_density(h, roots)?;
        value += term;
        if shell == last {
            last_shell += term;
        }
    }
    Ok(ChamberIntegral { value, last_shell })
}

/// Truncated value of `C_d = int Xi^2 (1+L)^{-2d} J dH` with a bound on the
/// neglected tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdEstimate {
    pub d: f64,
    pub value: f64,
    pub tail_bound: f64,
    /// `sup Xi(e^H) e^{rho(H)} (1+L)^{-r}` over the nodes and the origin.
    pub fitted_c: f64,
    pub cutoff: f64,
}

/// Computes the truncated `C_d` integral.
///
/// Tail bound: `J <= e^{2 rho(H)} / 2^r` and `Xi <= C e^{-rho} (1+L)^r`, so
/// the integrand beyond the cutoff `c` is at most
/// `C^2 2^{-r} (1+s)^{2r-2d}` and, in polar coordinates over a chamber of
/// angular measure `Omega` with `m = dim a`,
///
/// ```text
/// tail <= C^2 2^{-r} Omega (1+c)^{2r-2d+m} / (2d - 2r - m).
/// ```
pub fn cd_constant(
    d: f64,
    quad: &ChamberQuadrature,
    xi: &dyn XiEvaluator,
    roots: &RootSystemData,
) -> Result<CdEstimate> {
    if !roots.is_admissible(d) {
        return Err(Error::DivergentExponent {
            d,
            min_d: roots.admissibility_threshold(),
        });
    }
    if xi.dim() != roots.n || quad.dim != roots.n {
        return Err(Error::DimensionMismatch {
            expected: roots.n,
            found: xi.dim(),
        });
    }
    let xis: Vec<f64> = quad
        .nodes
        .iter()
        .map(|h| xi.at_chamber(h))
        .collect::<Result<_>>()?;
    let mut fitted_c: f64 = 1.0; // Xi(e) = 1 at the origin
    let mut value = 0.0;
    for (((h, w), s), x) in quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .zip(&quad.radii)
        .zip(&xis)
    {
        let rho = rho_pairing(h.values(), roots)?;
        fitted_c = fitted_c.max(x * rho.exp() / (1.0 + s).powi(roots.r as i32));
        value += w * x * x / (1.0 + s).powf(2.0 * d) * cartan_density(h, roots)?;
    }
    let m = roots.dim_a as f64;
    let r = roots.r as f64;
    let excess = 2.0 * d - 2.0 * r - m;
    let tail_bound = fitted_c * fitted_c / 2f64.powi(roots.r as i32)
        * quad.angular_measure()
        * (1.0 + quad.cutoff).powf(-excess)
        / excess;
    Ok(CdEstimate {
        d,
        value,
        tail_bound,
        fitted_c,
        cutoff: quad.cutoff,
    })
}

/// Quadrature on K = SO(n) with weights summing to one.
#[derive(Debug, Clone)]
pub struct KQuadrature {
    pub dim: usize,
    pub resolution: usize,
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
}

/// Euler ZYZ rotation `Rz(a) Ry(b) Rz(c)`.
pub fn euler_zyz(a: f64, b: f64, c: f64) -> GroupElement {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let m = nalgebra::DMatrix::from_row_slice(
        3,
        3,
        &[
            ca * cb * cc - sa * sc,
            -ca * cb * sc - sa * cc,
            ca * sb,
            sa * cb * cc + ca * sc,
            -sa * cb * sc + ca * cc,
            sa * sb,
            -sb * cc,
            sb * sc,
            cb,
        ],
    );
    GroupElement::from_matrix_unchecked(m)
}

/// n = 2: `resolution` equally spaced rotations. n = 3: Euler ZYZ grid with
/// uniform `alpha, gamma` and Gauss-Legendre nodes in `cos(beta)`, which
/// integrates the Haar density `sin(beta) / (8 pi^2)` exactly in `beta`.
pub fn build_k_quadrature(n: usize, resolution: usize) -> Result<KQuadrature> {
    if resolution < 4 {
        return Err(Error::InvalidParameter(format!(
            "K resolution must be at least 4, got {resolution}"
        )));
    }
    match n {
        2 => {
            let w = 1.0 / resolution as f64;
            let nodes = (0..resolution)
                .map(|j| GroupElement::rotation(2.0 * PI * j as f64 / resolution as f64))
                .collect();
            Ok(KQuadrature {
                dim: 2,
                resolution,
                nodes,
                weights: vec![w; resolution],
            })
        }
        3 => {
            let (x, wx) = gauss_legendre(resolution);
            let step = 2.0 * PI / resolution as f64;
            let mut nodes = Vec::with_capacity(resolution.pow(3));
            let mut weights = Vec::with_capacity(resolution.pow(3));
            for ia in 0..resolution {
                for (cb, wb) in x.iter().zip(&wx) {
                    for ic in 0..resolution {
                        nodes.push(euler_zyz(ia as f64 * step, cb.acos(), ic as f64 * step));
                        weights.push(0.5 * wb / (resolution * resolution) as f64);
                    }
                }
            }
            Ok(KQuadrature {
                dim: 3,
                resolution,
                nodes,
                weights,
            })
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

impl KQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&GroupElement) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| w * f(k))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        let r2 = RootSystemData::sl(2).unwrap();
        let r3 = RootSystemData::sl(3).unwrap();
        let h = ChamberVector::new(vec![0.5, -0.5]).unwrap();
        assert!((cartan_density(&h, &r2).unwrap() - 1f64.sinh()).abs() < 1e-15);
        assert_eq!(cartan_density(&ChamberVector::zero(2), &r2).unwrap(), 0.0);
        let h = ChamberVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        let expected = 1f64.sinh() * 1f64.sinh() * 2f64.sinh();
        assert!((cartan_density(&h, &r3).unwrap() - expected).abs() < 1e-13);
        assert!((expected - 5.0091).abs() < 1e-3);
        let h = ChamberVector::new(vec![400.0, -400.0]).unwrap();
        assert!(matches!(
            cartan_density(&h, &r2),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn k_quadrature_normalization() {
        let q = build_k_quadrature(2, 8).unwrap();
        assert_eq!(q.len(), 8);
        assert!(q.weights.iter().all(|&w| w == 0.125));
        for res in [4, 7, 12] {
            let q = build_k_quadrature(3, res).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(q.nodes.iter().all(|k| k.is_orthogonal(1e-12)));
            assert!(q.integrate(|k| k.entry(0, 0)).abs() < 1e-12);
            // E[k33^2] = 1/3 under Haar measure.
            assert!((q.integrate(|k| k.entry(2, 2).powi(2)) - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(matches!(
            build_k_quadrature(4, 8),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(build_k_quadrature(2, 3).is_err());
    }

    #[test]
    fn chamber_nodes_lie_in_the_chamber() {
        let spec = QuadratureSpec {
            cutoff: 5.0,
            shells: 6,
            nodes_per_shell: 5,
            k_resolution: 16,
        };
        for n in [2, 3] {
            let q = ChamberQuadrature::build(n, &spec).unwrap();
            for (h, s) in q.nodes.iter().zip(&q.radii) {
                assert!(ChamberVector::new(h.values().to_vec()).is_ok());
                assert!((h.norm() - s).abs() < 1e-12);
            }
            assert!(q.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn chamber_volume_matches_polar_area() {
        // Area of the 60-degree sector of radius c is pi c^2 / 6.
        let spec = QuadratureSpec {
            cutoff: 3.0,
            shells: 4,
            nodes_per_shell: 6,
            k_resolution: 16,
        };
        let q = ChamberQuadrature::build(3, &spec).unwrap();
        let area: f64 = q.weights.iter().sum();
        assert!((area - PI * 9.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_integrals_are_linear_and_monotone() {
        let roots = RootSystemData::sl(2).unwrap();
        let q = ChamberQuadrature::build(2, &QuadratureSpec::default()).unwrap();
        let zero = integrate_bi_k_invariant(|_| 0.0, &q, &roots).unwrap();
        assert_eq!(zero.value, 0.0);
        let mut last = 0.0;
        for c in [0.5, 1.0, 2.0, 4.0] {
            let v = integrate_bi_k_invariant(|h| (h.norm() <= c) as u8 as f64, &q, &roots)
                .unwrap()
                .value;
            assert!(v >= last);
            last = v;
        }
        let f = |h: &ChamberVector| (-h.norm()).exp();
        let g = |h: &ChamberVector| 1.0 / (1.0 + h.norm()).powi(6);
        let a = integrate_bi_k_invariant(|h| 2.0 * f(h) - 3.0 * g(h), &q, &roots).unwrap();
        let fa = integrate_bi_k_invariant(f, &q, &roots).unwrap();
        let ga = integrate_bi_k_invariant(g, &q, &roots).unwrap();
        assert!((a.value - (2.0 * fa.value - 3.0 * ga.value)).abs() < 1e-10);
        let bad = integrate_bi_k_invariant(|_| f64::NAN, &q, &roots);
        assert!(matches!(bad, Err(Error::NonFinite(_))));
    }
}
