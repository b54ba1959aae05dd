//! The Harish-Chandra function `Xi(g) = <pi(g) 1, 1>`.
//!
//! Three evaluators share the [`XiEvaluator`] interface:
//!
//! * [`GridXi`] sums over a boundary or K grid (any supported n); accurate
//!   while the grid resolves the concentration of `c(g, .)`, whose width is
//!   about `e^{-alpha(H)}`.
//! * [`AdaptiveXi`] (n = 2) integrates a one-dimensional representation with
//!   no peak, uniformly accurate in `H`.
//! * [`TabulatedXi`] (n = 2) interpolates `log Xi + h_1` from a table built
//!   with [`AdaptiveXi`]; used for large balls.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;

use super::{apply_pi, pairing, BoundaryFunction, BoundaryGrid, BoundaryPoint};
use crate::error::{Error, Result};
use crate::lie::{
    cartan_decompose, cartan_projection, iwasawa_projection, rho_pairing, ChamberVector,
    GroupElement, RootSystemData,
};
use crate::quadrature::adaptive_integrate;

pub trait XiEvaluator: Send + Sync {
    fn dim(&self) -> usize;

    fn at_chamber(&self, h: &ChamberVector) -> Result<f64>;

    fn at_element(&self, g: &GroupElement) -> Result<f64> {
        self.at_chamber(&cartan_projection(g)?)
    }

    /// Short description for reports.
    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XiMethod {
    /// `<pi(g) 1, 1>` on the boundary grid with the closed-form cocycle.
    Boundary,
    /// `int_K exp(-rho(H_Iw(g^-1 k))) dk` on the K-quadrature.
    Iwasawa,
}

impl std::str::FromStr for XiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boundary" => Ok(Self::Boundary),
            "iwasawa" => Ok(Self::Iwasawa),
            other => Err(Error::Parse(format!("unknown Xi method '{other}'"))),
        }
    }
}

pub fn harish_chandra_xi(
    g: &GroupElement,
    method: XiMethod,
    grid: &Arc<BoundaryGrid>,
) -> Result<f64> {
    if g.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: g.dim(),
        });
    }
    let value = match method {
        XiMethod::Boundary => {
            let ones = BoundaryFunction::ones(grid);
            pairing(&apply_pi(g, &ones)?, &ones)?.re
        }
        XiMethod::Iwasawa => {
            let roots = RootSystemData::sl(g.dim())?;
            let g_inv = g.inverse();
            let k = grid.k_quadrature();
            let mut sum = 0.0;
            for (node, w) in k.nodes.iter().zip(&k.weights) {
                let h = iwasawa_projection(&(&g_inv * node))?;
                sum += w * (-rho_pairing(&h, &roots)?).exp();
            }
            sum
        }
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonFinite("Harish-Chandra function".into()))
    }
}

#[derive(Debug, Clone)]
pub struct GridXi {
    grid: Arc<BoundaryGrid>,
    method: XiMethod,
}

impl GridXi {
    pub fn new(grid: Arc<BoundaryGrid>, method: XiMethod) -> Self {
        Self { grid, method }
    }

    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }
}

impl XiEvaluator for GridXi {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn at_chamber(&self, h: &ChamberVector) -> Result<f64> {
        harish_chandra_xi(&h.to_element(), self.method, &self.grid)
    }

    fn at_element(&self, g: &GroupElement) -> Result<f64> {
        harish_chandra_xi(g, self.method, &self.grid)
    }

    fn label(&self) -> String {
        format!(
            "grid-{:?}-n{}-res{}",
            self.method,
            self.grid.dim(),
            self.grid.resolution()
        )
        .to_lowercase()
    }
}

/// Largest `alpha(H)` accepted by the one-dimensional evaluators.
pub const MAX_ROOT_VALUE: f64 = 1400.0;

/// SL(2,R) evaluator. With `t = alpha(H) = 2 h_1`, substituting
/// `tan(theta) = e^{-t} sinh(x)` in the boundary integral gives
///
/// ```text
/// Xi = e^{-t/2} (2/pi) int_0^inf (1 + e^{-2t} sinh(x)^2)^{-1/2} dx,
/// ```
///
/// whose integrand is flat up to `x ~ t + ln 2` and decays like `e^{t-x}`
/// afterwards.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveXi {
    pub rel_tol: f64,
}

impl Default for AdaptiveXi {
    fn default() -> Self {
        Self { rel_tol: 1e-14 }
    }
}

impl AdaptiveXi {
    /// `log Xi` as a function of `t = alpha(H) >= 0`.
    pub fn log_xi_root(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if !t.is_finite() || t > MAX_ROOT_VALUE {
            return Err(Error::Overflow {
                value: t,
                guard: MAX_ROOT_VALUE,
            });
        }
        let knee = t + LN_2;
        let end = knee + 40.0;
        let integrand = |x: f64| {
            // e^{-t} sinh(x) without overflow
            let s = 0.5 * ((x - t).exp() - (-x - t).exp());
            1.0 / (1.0 + s * s).sqrt()
        };
        let breaks = [0.0, 0.5 * knee, knee, knee + 4.0, knee + 12.0, end];
        let r = adaptive_integrate(integrand, &breaks, 0.0, self.rel_tol, 4000);
        let tail = 2.0 * (t - end).exp();
        Ok(-0.5 * t + (2.0 / PI * (r.value + tail)).ln())
    }
}

impl XiEvaluator for AdaptiveXi {
    fn dim(&self) -> usize {
        2
    }

    fn at_chamber(&self, h: &ChamberVector) -> Result<f64> {
        if h.dim() != 2 {
            return Err(Error::UnsupportedDimension(h.dim()));
        }
        Ok(self.log_xi_root(2.0 * h.values()[0])?.exp())
    }

    fn label(&self) -> String {
        "adaptive-n2".into()
    }
}

/// `<pi(g) 1, xi>` for n = 2 without a boundary grid.
///
/// With `g = k1 exp(H) k2` and `t = alpha(H)`, the substitution of
/// [`AdaptiveXi`] gives
///
/// ```text
/// <pi(g) 1, xi> = (e^{-t/2} / pi) int_R conj(xi(k1 . atan(e^{-t} sinh x))) / (1 + e^{-2t} sinh(x)^2)^{1/2} dx,
/// ```
///
/// which stays accurate when the peak of `c(g, .)` is far narrower than any
/// grid spacing. `xi` is read through [`BoundaryFunction::evaluate`].
pub fn unit_pairing(g: &GroupElement, xi: &BoundaryFunction, rel_tol: f64) -> Result<Complex64> {
    if g.dim() != 2 || xi.grid().dim() != 2 {
        return Err(Error::UnsupportedDimension(g.dim().max(xi.grid().dim())));
    }
    let triple = cartan_decompose(g)?;
    let t = 2.0 * triple.h.values()[0];
    if !t.is_finite() || t > MAX_ROOT_VALUE {
        return Err(Error::Overflow {
            value: t,
            guard: MAX_ROOT_VALUE,
        });
    }
    let alpha = triple.k1.entry(1, 0).atan2(triple.k1.entry(0, 0));
    let value_at = |x: f64| -> Result<(Complex64, f64)> {
        let s = 0.5 * ((x - t).exp() - (-x - t).exp());
        let z = xi.evaluate(&BoundaryPoint::Line((alpha + s.atan()).rem_euclid(PI)))?;
        Ok((z.conj(), 1.0 / (1.0 + s * s).sqrt()))
    };
    let knee = t + LN_2;
    let end = knee + 40.0;
    let mut breaks = vec![-end, -knee - 12.0, -knee - 4.0, -knee, -0.5 * knee, 0.0];
    breaks.extend([0.5 * knee, knee, knee + 4.0, knee + 12.0, end]);
    let mut failure = None;
    let mut part = |pick: fn(Complex64) -> f64| {
        adaptive_integrate(
            |x| match value_at(x) {
                Ok((z, w)) => pick(z) * w,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &breaks,
            0.0,
            rel_tol,
            4000,
        )
        .value
    };
    let re = part(|z| z.re);
    let im = part(|z| z.im);
    if let Some(e) = failure {
        return Err(e);
    }
    let (far, _) = value_at(f64::INFINITY).unwrap_or((Complex64::new(0.0, 0.0), 0.0));
    let tail = far * (4.0 * (t - end).exp());
    let value = (Complex64::new(re, im) + tail) * ((-0.5 * t).exp() / PI);
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("unit pairing".into()))
    }
}

/// Table of `u(h_1) = log Xi(h_1) + h_1` on a uniform grid, read with
/// six-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct TabulatedXi {
    step: f64,
    max_h1: f64,
    values: Vec<f64>,
}

const PAD: usize = 3;

impl TabulatedXi {
    pub const DEFAULT_STEP: f64 = 1.0 / 64.0;

    pub fn new(max_h1: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(max_h1 > 0.0) {
            return Err(Error::InvalidParameter(
                "table range and step must be positive".into(),
            ));
        }
        let exact = AdaptiveXi::default();
        let count = (max_h1 / step).ceil() as usize + 2 * PAD + 1;
        let values = (0..count)
            .map(|i| {
                let h1 = (i as f64 - PAD as f64) * step;
                Ok(exact.log_xi_root(2.0 * h1)? + h1)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            step,
            max_h1,
            values,
        })
    }

    /// Table covering chamber vectors with `|H| <= max_length`.
    pub fn for_length(max_length: f64) -> Result<Self> {
        Self::new(max_length / 2f64.sqrt() + 1.0, Self::DEFAULT_STEP)
    }

    pub fn max_h1(&self) -> f64 {
        self.max_h1
    }

    pub fn log_xi(&self, h1: f64) -> Result<f64> {
        let h1 = h1.abs();
        if h1 > self.max_h1 {
            return Err(Error::InterpolationOutOfRange(format!(
                "h1 = {h1} beyond table limit {}",
                self.max_h1
            )));
        }
        let x = h1 / self.step + PAD as f64;
        let base = (x.floor() as usize).saturating_sub(2);
        let f = x - base as f64;
        let mut u = 0.0;
        for i in 0..6 {
            let mut w = 1.0;
            for j in 0..6 {
                if j != i {
                    w *= (f - j as f64) / (i as f64 - j as f64);
                }
            }
            u += w * self.values[base + i];
        }
        Ok(u - h1)
    }
}

impl XiEvaluator for TabulatedXi {
    fn dim(&self) -> usize {
        2
    }

    fn at_chamber(&self, h: &ChamberVector) -> Result<f64> {
        if h.dim() != 2 {
            return Err(Error::UnsupportedDimension(h.dim()));
        }
        Ok(self.log_xi(h.values()[0])?.exp())
    }

    fn label(&self) -> String {
        format!("tabulated-n2-step{}", self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(t: f64, nodes: usize) -> f64 {
        let h = 2.0 * PI / nodes as f64;
        (0..nodes)
            .map(|j| {
                let th = j as f64 * h;
                1.0 / (t.exp() * th.cos().powi(2) + (-t).exp() * th.sin().powi(2)).sqrt()
            })
            .sum::<f64>()
            / nodes as f64
    }

    #[test]
    fn adaptive_matches_trapezoid() {
        let xi = AdaptiveXi::default();
        for t in [0.0, 0.5, 2.0, 5.0] {
            let a = xi.log_xi_root(t).unwrap().exp();
            let b = trapezoid(t, 20000);
            assert!((a - b).abs() < 1e-12 * b, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn table_matches_adaptive() {
        let table = TabulatedXi::new(12.0, TabulatedXi::DEFAULT_STEP).unwrap();
        let exact = AdaptiveXi::default();
        for h1 in [0.0, 0.001, 0.0333, 0.7, 3.14159, 11.9] {
            let a = table.log_xi(h1).unwrap();
            let b = exact.log_xi_root(2.0 * h1).unwrap();
            assert!((a - b).abs() < 1e-11, "h1={h1}: {a} vs {b}");
        }
        assert!(table.log_xi(13.0).is_err());
    }

    #[test]
    fn grid_backends_agree() {
        let grid = BoundaryGrid::new(2, 256).unwrap();
        let g = GroupElement::parse("2,1;1,1").unwrap();
        let a = harish_chandra_xi(&g, XiMethod::Boundary, &grid).unwrap();
        let b = harish_chandra_xi(&g, XiMethod::Iwasawa, &grid).unwrap();
        assert!((a - b).abs() < 1e-12);
        let c = AdaptiveXi::default().at_element(&g).unwrap();
        assert!((a - c).abs() < 1e-10);
    }

    #[test]
    fn unit_pairing_matches_grid_and_xi() {
        let grid = BoundaryGrid::new(2, 2048).unwrap();
        let xi = BoundaryFunction::from_fn(&grid, |b| {
            let th = b.angle().unwrap();
            Complex64::new(1.5 + (2.0 * th).cos(), 0.7 * (4.0 * th).sin())
        })
        .unwrap();
        for lit in ["2,1;1,1", "0,-1;1,0", "3,-2;5,-3", "1,4;0,1"] {
            let g = GroupElement::parse(lit).unwrap();
            let a = unit_pairing(&g, &xi, 1e-13).unwrap();
            let b = pairing(&apply_pi(&g, &BoundaryFunction::ones(&grid)).unwrap(), &xi).unwrap();
            assert!((a - b).norm() < 1e-10, "{lit}: {a} vs {b}");
        }
        let ones = BoundaryFunction::ones(&grid);
        let g = GroupElement::parse("400,1;-1,0").unwrap();
        let a = unit_pairing(&g, &ones, 1e-13).unwrap();
        let b = AdaptiveXi::default().at_element(&g).unwrap();
        assert!((a.re - b).abs() < 1e-12 * b && a.im == 0.0);
    }

    #[test]
    fn rank_two_identity_and_symmetry() {
        let grid = BoundaryGrid::new(3, 12).unwrap();
        let e = GroupElement::identity(3);
        for m in [XiMethod::Boundary, XiMethod::Iwasawa] {
            assert!((harish_chandra_xi(&e, m, &grid).unwrap() - 1.0).abs() < 1e-12);
        }
        let g = GroupElement::exp_diagonal(&[0.4, 0.1, -0.5]);
        let a = harish_chandra_xi(&g, XiMethod::Boundary, &grid).unwrap();
        let b = harish_chandra_xi(&g, XiMethod::Iwasawa, &grid).unwrap();
        let c = harish_chandra_xi(&g.inverse(), XiMethod::Boundary, &grid).unwrap();
        assert!(a < 1.0, "{a}");
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        let fine = BoundaryGrid::new(3, 24).unwrap();
        let a2 = harish_chandra_xi(&g, XiMethod::Boundary, &fine).unwrap();
        let c2 = harish_chandra_xi(&g.inverse(), XiMethod::Boundary, &fine).unwrap();
        assert!((a - c).abs() < 1e-3, "{a} vs {c}");
        assert!((a2 - c2).abs() < 0.1 * (a - c).abs(), "{a2} vs {c2}");
    }
}
