use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use super::{generate_ball, BallIndex, GroupPresentation};
use crate::boundary::XiEvaluator;
use crate::error::{Error, Result};

/// Finitely supported function on a ball, stored sparsely with ascending
/// element indices.
#[derive(Debug, Clone)]
pub struct GroupFunction {
    ball: Arc<BallIndex>,
    support: Vec<u32>,
    values: Vec<Complex64>,
}

impl GroupFunction {
    /// Builds a function from `(index, value)` pairs. Zero values are
    /// dropped; repeated indices are rejected.
    pub fn new(ball: &Arc<BallIndex>, mut entries: Vec<(usize, Complex64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("repeated support index".into()));
        }
        if let Some(&(i, _)) = entries.iter().find(|e| e.0 >= ball.len()) {
            return Err(Error::InvalidParameter(format!(
                "index {i} outside a ball of {} elements",
                ball.len()
            )));
        }
        if entries
            .iter()
            .any(|(_, z)| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("group function value".into()));
        }
        entries.retain(|(_, z)| *z != Complex64::new(0.0, 0.0));
        Ok(Self {
            ball: Arc::clone(ball),
            support: entries.iter().map(|e| e.0 as u32).collect(),
            values: entries.iter().map(|e| e.1).collect(),
        })
    }

    pub fn from_real(ball: &Arc<BallIndex>, entries: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            ball,
            entries
                .iter()
                .map(|&(i, x)| (i, Complex64::new(x, 0.0)))
                .collect(),
        )
    }

    pub fn zero(ball: &Arc<BallIndex>) -> Self {
        Self {
            ball: Arc::clone(ball),
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn delta(ball: &Arc<BallIndex>, i: usize) -> Result<Self> {
        Self::from_real(ball, &[(i, 1.0)])
    }

    /// Indicator of the elements of word length exactly `r`.
    pub fn sphere_indicator(ball: &Arc<BallIndex>, r: u32) -> Self {
        let start = if r == 0 { 0 } else { ball.prefix_len(r - 1) };
        let entries: Vec<(usize, f64)> = (start..ball.prefix_len(r)).map(|i| (i, 1.0)).collect();
        Self::from_real(ball, &entries).expect("indices inside the ball")
    }

    pub fn ball(&self) -> &Arc<BallIndex> {
        &self.ball
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.support
            .iter()
            .zip(&self.values)
            .map(|(&i, &z)| (i as usize, z))
    }

    pub fn get(&self, i: usize) -> Complex64 {
        match self.support.binary_search(&(i as u32)) {
            Ok(k) => self.values[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Largest word length in the support.
    pub fn support_radius(&self) -> u32 {
        self.support
            .iter()
            .map(|&i| self.ball.word_length(i as usize))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let entries = self.iter().map(|(i, z)| (i, z * c)).collect();
        Self::new(&self.ball, entries).expect("scaled values stay valid")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let other = other.transfer(&self.ball)?;
        let mut dense: std::collections::BTreeMap<usize, Complex64> = self.iter().collect();
        for (i, z) in other.iter() {
            *dense.entry(i).or_default() += z;
        }
        Self::new(&self.ball, dense.into_iter().collect())
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|z| z.re >= 0.0 && z.im == 0.0)
    }

    /// The same function viewed on another ball of the same presentation.
    /// Balls are nested breadth-first prefixes, so indices carry over.
    pub fn transfer(&self, target: &Arc<BallIndex>) -> Result<Self> {
        if Arc::ptr_eq(&self.ball, target) {
            return Ok(self.clone());
        }
        if !self.ball.same_group(target) {
            return Err(Error::PresentationMismatch(
                self.ball.presentation().name.clone(),
                target.presentation().name.clone(),
            ));
        }
        let needed = self.support_radius();
        if needed > target.radius() {
            return Err(Error::TargetTooSmall {
                target: target.radius(),
                needed,
            });
        }
        Ok(Self {
            ball: Arc::clone(target),
            support: self.support.clone(),
            values: self.values.clone(),
        })
    }
}

/// `(f1 * f2)(g) = sum_gamma f1(gamma) f2(gamma^-1 g)` on `target`.
pub fn convolve(
    f1: &GroupFunction,
    f2: &GroupFunction,
    target: &Arc<BallIndex>,
) -> Result<GroupFunction> {
    for f in [f1, f2] {
        if !f.ball.same_group(target) {
            return Err(Error::PresentationMismatch(
                f.ball.presentation().name.clone(),
                target.presentation().name.clone(),
            ));
        }
    }
    let needed = f1.support_radius() + f2.support_radius();
    if needed > target.radius() {
        return Err(Error::TargetTooSmall {
            target: target.radius(),
            needed,
        });
    }
    let rows: Vec<Vec<(u32, Complex64)>> = f1
        .support
        .par_iter()
        .zip(&f1.values)
        .map(|(&i, &a)| {
            f2.iter()
                .map(|(j, b)| {
                    let k = target
                        .product_index(&f1.ball, i as usize, &f2.ball, j)?
                        .ok_or_else(|| {
                            Error::InvalidParameter("product outside target ball".into())
                        })?;
                    Ok((k as u32, a * b))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut dense = vec![Complex64::new(0.0, 0.0); target.prefix_len(needed)];
    for row in &rows {
        for &(k, z) in row {
            dense[k as usize] += z;
        }
    }
    let entries = dense
        .into_iter()
        .enumerate()
        .filter(|(_, z)| *z != Complex64::new(0.0, 0.0))
        .collect();
    GroupFunction::new(target, entries)
}

/// `(sum |f|^2 (1+L)^{2d})^{1/2}`.
pub fn sobolev_norm(f: &GroupFunction, d: f64) -> Result<f64> {
    let s: f64 = f
        .iter()
        .map(|(i, z)| z.norm_sqr() * (1.0 + f.ball.length(i)).powf(2.0 * d))
        .sum();
    if s.is_finite() {
        Ok(s.sqrt())
    } else {
        Err(Error::NonFinite("Sobolev norm".into()))
    }
}

/// `max |f| (1+L)^d / Xi` over the support.
pub fn schwartz_norm(f: &GroupFunction, d: f64, xi: &dyn XiEvaluator) -> Result<f64> {
    let mut best: f64 = 0.0;
    for (i, z) in f.iter() {
        let x = xi.at_chamber(&f.ball.chamber(i))?;
        if !(x > 0.0) {
            return Err(Error::XiUnderflow(i));
        }
        best = best.max(z.norm() * (1.0 + f.ball.length(i)).powf(d) / x);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NonFinite("Schwartz norm".into()))
    }
}

/// `Xi` at every element of the ball.
pub fn xi_table(ball: &BallIndex, xi: &dyn XiEvaluator) -> Result<Vec<f64>> {
    (0..ball.len())
        .into_par_iter()
        .map(|i| {
            let x = xi.at_chamber(&ball.chamber(i))?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(Error::XiUnderflow(i))
            }
        })
        .collect()
}

/// Partial sums of `sum Xi^2 (1+L)^{-2d}` over the balls of radius
/// `1..=radius`.
pub fn xi_summability_partial(
    p: &GroupPresentation,
    d: f64,
    radius: u32,
    xi: &dyn XiEvaluator,
) -> Result<Vec<f64>> {
    if radius < 1 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    let ball = generate_ball(p, radius)?;
    let xis = xi_table(&ball, xi)?;
    let mut sums = Vec::with_capacity(radius as usize);
    let mut acc = 0.0;
    let mut i = 0;
    for r in 0..=radius {
        let end = ball.prefix_len(r);
        while i < end {
            acc += xis[i] * xis[i] / (1.0 + ball.length(i)).powf(2.0 * d);
            i += 1;
        }
        if r >= 1 {
            sums.push(acc);
        }
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::AdaptiveXi;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn deltas_convolve_to_products() {
        let p = GroupPresentation::sl2z();
        let small = Arc::new(generate_ball(&p, 2).unwrap());
        let big = Arc::new(generate_ball(&p, 4).unwrap());
        for i in 0..small.len() {
            for j in [0, 3, small.len() - 1] {
                let h = convolve(
                    &GroupFunction::delta(&small, i).unwrap(),
                    &GroupFunction::delta(&small, j).unwrap(),
                    &big,
                )
                .unwrap();
                let k = big.product_index(&small, i, &small, j).unwrap().unwrap();
                assert_eq!(h.iter().collect::<Vec<_>>(), vec![(k, c(1.0))]);
            }
        }
        let f = GroupFunction::from_real(&small, &[(1, 2.0), (4, -1.0)]).unwrap();
        let e = GroupFunction::delta(&small, 0).unwrap();
        let g = convolve(&e, &f, &big).unwrap();
        assert_eq!(g.iter().collect::<Vec<_>>(), f.iter().collect::<Vec<_>>());
        let too_small = Arc::new(generate_ball(&p, 3).unwrap());
        assert!(matches!(
            convolve(
                &GroupFunction::sphere_indicator(&small, 2),
                &GroupFunction::sphere_indicator(&small, 2),
                &too_small
            ),
            Err(Error::TargetTooSmall {
                target: 3,
                needed: 4
            })
        ));
    }

    #[test]
    fn norms_of_deltas() {
        let ball = Arc::new(generate_ball(&GroupPresentation::sanov(), 2).unwrap());
        let xi = AdaptiveXi::default();
        let e = GroupFunction::delta(&ball, 0).unwrap();
        assert_eq!(sobolev_norm(&e, 3.0).unwrap(), 1.0);
        assert!((schwartz_norm(&e, 2.0, &xi).unwrap() - 1.0).abs() < 1e-14);
        let i = ball.len() - 1;
        let g = GroupFunction::delta(&ball, i).unwrap();
        let l = ball.length(i);
        assert!((sobolev_norm(&g, 2.0).unwrap() - (1.0 + l).powi(2)).abs() < 1e-12);
        let x = xi.at_chamber(&ball.chamber(i)).unwrap();
        assert!((schwartz_norm(&g, 2.0, &xi).unwrap() - (1.0 + l).powi(2) / x).abs() < 1e-9);
        assert_eq!(sobolev_norm(&GroupFunction::zero(&ball), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn summability_radius_one() {
        let s = xi_summability_partial(&GroupPresentation::sanov(), 2.0, 1, &AdaptiveXi::default())
            .unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0] > 1.0 && s[0] < 5.0);
    }
}
