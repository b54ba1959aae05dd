use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::boundary::{BoundaryFunction, BoundaryGrid, BoundaryPoint};
use crate::discrete::{BallIndex, GroupFunction};
use crate::error::{Error, Result};

/// Compactly supported radial profile in `s = L(g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadialProfile {
    /// Indicator of `inner <= s < outer`.
    Shell { inner: f64, outer: f64 },
    /// `cos^2` bump vanishing outside `(inner, outer)`.
    Bump { inner: f64, outer: f64 },
}

impl RadialProfile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Self::Shell { inner, outer } => {
                if s >= inner && s < outer {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Bump { inner, outer } => {
                if s > inner && s < outer {
                    let x = (s - inner) / (outer - inner) - 0.5;
                    (std::f64::consts::PI * x).cos().powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    /// Shell for even `index`, bump for odd, inside `s < 3.5`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, index: usize) -> Self {
        let inner = rng.random_range(0.0..2.5);
        let outer = inner + rng.random_range(0.2..1.0);
        if index % 2 == 0 {
            Self::Shell { inner, outer }
        } else {
            Self::Bump { inner, outer }
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            Self::Shell { outer, .. } | Self::Bump { outer, .. } => outer,
        }
    }
}

/// Seeded functions on one ball.
///
/// Values are uniform on `[-1, 1]` (uniform on the unit disc when complex);
/// supports alternate between the full ball and a random half. Every odd
/// entry is the absolute value of the entry before it and is flagged
/// positive.
#[derive(Debug, Clone)]
pub struct TestCorpus {
    pub seed: u64,
    pub functions: Vec<GroupFunction>,
    pub positive: Vec<bool>,
    pub radial_functions: Vec<RadialProfile>,
}

impl TestCorpus {
    pub fn generate(ball: &Arc<BallIndex>, count: usize, seed: u64, complex: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut functions = Vec::with_capacity(count);
        let mut positive = Vec::with_capacity(count);
        let n = ball.len();
        while functions.len() < count {
            let sparse = (functions.len() / 2) % 2 == 1;
            let mut entries: Vec<(usize, Complex64)> = Vec::new();
            for i in 0..n {
                if sparse && !rng.random_bool(0.5) {
                    continue;
                }
                let z = if complex {
                    loop {
                        let z = Complex64::new(
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-1.0..1.0),
                        );
                        if z.norm_sqr() <= 1.0 {
                            break z;
                        }
                    }
                } else {
                    Complex64::new(rng.random_range(-1.0..1.0), 0.0)
                };
                entries.push((i, z));
            }
            if entries.is_empty() {
                entries.push((rng.random_range(0..n), Complex64::new(1.0, 0.0)));
            }
            let abs: Vec<(usize, Complex64)> = entries
                .iter()
                .map(|&(i, z)| (i, Complex64::new(z.norm(), 0.0)))
                .collect();
            functions.push(GroupFunction::new(ball, entries)?);
            positive.push(false);
            if functions.len() < count {
                functions.push(GroupFunction::new(ball, abs)?);
                positive.push(true);
            }
        }
        let radial_functions = (0..count.max(1))
            .map(|k| RadialProfile::random(&mut rng, k))
            .collect();
        Ok(Self {
            seed,
            functions,
            positive,
            radial_functions,
        })
    }

    pub fn ball(&self) -> Option<&Arc<BallIndex>> {
        self.functions.first().map(|f| f.ball())
    }

    pub fn positive_functions(&self) -> impl Iterator<Item = &GroupFunction> + '_ {
        self.functions
            .iter()
            .zip(&self.positive)
            .filter(|(_, &p)| p)
            .map(|(f, _)| f)
    }

    /// Consecutive pairs `(f_0, f_1), (f_2, f_3), ...`.
    pub fn pairs(&self) -> impl Iterator<Item = (&GroupFunction, &GroupFunction)> + '_ {
        self.functions.chunks_exact(2).map(|p| (&p[0], &p[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrigKind {
    Complex,
    MeanZero,
    /// Real and bounded below by `0.1`.
    Positive,
}

/// Random trigonometric polynomial `sum_{|k| <= degree} a_k e^{2 i k theta}`
/// on the projective line, kept in closed form.
pub fn random_trigonometric<R: Rng + ?Sized>(
    grid: &Arc<BoundaryGrid>,
    degree: usize,
    kind: TrigKind,
    rng: &mut R,
) -> Result<BoundaryFunction> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let deg = degree as i32;
    let mut coeffs: Vec<(i32, Complex64)> = Vec::new();
    match kind {
        TrigKind::Complex | TrigKind::MeanZero => {
            for k in -deg..=deg {
                if k == 0 && kind == TrigKind::MeanZero {
                    continue;
                }
                let scale = 1.0 / (1.0 + k.abs() as f64);
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                coeffs.push((k, Complex64::new(re, im) * scale));
            }
        }
        TrigKind::Positive => {
            // 1 + sum_k (b_k e^{2ik theta} + conj), total amplitude 0.9.
            let raw: Vec<Complex64> = (1..=deg)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let total: f64 = raw.iter().map(|z| 2.0 * z.norm()).sum();
            let scale = if total > 0.0 { 0.9 / total } else { 0.0 };
            coeffs.push((0, Complex64::new(1.0, 0.0)));
            for (k, z) in (1..=deg).zip(raw) {
                coeffs.push((k, z * scale));
                coeffs.push((-k, z.conj() * scale));
            }
        }
    }
    let real = kind == TrigKind::Positive;
    BoundaryFunction::from_fn(grid, move |b: &BoundaryPoint| {
        let theta = b.angle().unwrap_or(f64::NAN);
        let z: Complex64 = coeffs
            .iter()
            .map(|&(k, a)| a * Complex64::from_polar(1.0, 2.0 * k as f64 * theta))
            .sum();
        if real {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::pairing;
    use crate::discrete::{generate_ball, GroupPresentation};

    #[test]
    fn corpus_is_reproducible_and_flags_positive_entries() {
        let ball = Arc::new(generate_ball(&GroupPresentation::sanov(), 2).unwrap());
        let a = TestCorpus::generate(&ball, 7, 3, false).unwrap();
        let b = TestCorpus::generate(&ball, 7, 3, false).unwrap();
        assert_eq!(a.functions.len(), 7);
        for (f, g) in a.functions.iter().zip(&b.functions) {
            assert_eq!(f.iter().collect::<Vec<_>>(), g.iter().collect::<Vec<_>>());
        }
        assert_eq!(a.positive_functions().count(), 3);
        assert!(a.positive_functions().all(|f| f.is_nonnegative()));
        assert_eq!(a.functions[0].len(), ball.len());
        assert!(a.functions[2].len() < ball.len());
        assert_eq!(a.pairs().count(), 3);
    }

    #[test]
    fn trigonometric_kinds() {
        let grid = BoundaryGrid::new(2, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ones = BoundaryFunction::ones(&grid);
        let z = random_trigonometric(&grid, 4, TrigKind::MeanZero, &mut rng).unwrap();
        assert!(pairing(&z, &ones).unwrap().norm() < 1e-13);
        let p = random_trigonometric(&grid, 4, TrigKind::Positive, &mut rng).unwrap();
        assert!(p.samples().iter().all(|z| z.re >= 0.1 && z.im == 0.0));
        assert!((pairing(&p, &ones).unwrap().re - 1.0).abs() < 1e-13);
    }
}
