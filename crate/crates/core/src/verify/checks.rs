use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::json;
use std::sync::Arc;

use super::corpus::{random_trigonometric, RadialProfile, TestCorpus, TrigKind};
use super::{max_over_median, median, Table, VerificationReport};
use crate::boundary::{
    apply_pi, pairing, pi_operator_norm, unit_pairing, AdaptiveXi, BoundaryFunction, BoundaryGrid,
    BoundaryPoint, TabulatedXi, XiEvaluator,
};
use crate::discrete::{
    convolve, generate_ball, generate_ball_capped, schwartz_norm, xi_table, BallIndex,
    GroupFunction, GroupPresentation,
};
use crate::error::{Error, Result};
use crate::haar::{cartan_density, cd_constant, ChamberQuadrature, KQuadrature};
use crate::lie::{cartan_decompose, length, random_element, GroupElement, RootSystemData};
use crate::operator::{budgeted_domain, lambda_norm_lower_on, PowerOptions};

pub mod tolerances {
    pub const RADIAL: f64 = 1e-5;
    pub const CAUCHY_SCHWARZ: f64 = 1e-8;
    /// Largest accepted `max / median` of a ratio sequence.
    pub const BOUNDEDNESS: f64 = 2.0;
    /// Largest accepted ratio between stability estimates of two sample sizes.
    pub const SAMPLE_STABILITY: f64 = 1.5;
    pub const TRIANGLE: f64 = 1e-9;
    pub const SPLIT: f64 = 1e-12;
    pub const SHALOM: f64 = 1e-4;
    pub const CHAIN: f64 = 1e-9;
}

const PAIRING_TOL: f64 = 1e-12;

fn require_dim2(n: usize) -> Result<()> {
    if n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

fn require_admissible(d: f64, n: usize) -> Result<RootSystemData> {
    let roots = RootSystemData::sl(n)?;
    if roots.is_admissible(d) {
        Ok(roots)
    } else {
        Err(Error::DivergentExponent {
            d,
            min_d: roots.admissibility_threshold(),
        })
    }
}

/// `xi^K = int_K pi(k) xi dk` on the grid of `xi`.
fn k_average(xi: &BoundaryFunction, k: &KQuadrature) -> Result<BoundaryFunction> {
    let mut acc = vec![Complex64::new(0.0, 0.0); xi.grid().len()];
    for (node, w) in k.nodes.iter().zip(&k.weights) {
        for (a, z) in acc.iter_mut().zip(apply_pi(node, xi)?.samples()) {
            *a += z * w;
        }
    }
    BoundaryFunction::from_samples(xi.grid(), acc)
}

/// Both sides of `int_G f <pi(g) xi, eta> dg = <xi, 1><1, eta><f, Xi>` for a
/// radial `f` (n = 2).
///
/// The left side averages over `K x K` first, which turns the integrand
/// into `<pi(e^H) xi^K, eta^K>` on the boundary grid; the right side uses
/// the grid-free [`AdaptiveXi`]. Both run over the same chamber nodes.
pub fn check_radial_identity(
    fr: &RadialProfile,
    xi: &BoundaryFunction,
    eta: &BoundaryFunction,
    quad: &ChamberQuadrature,
    k: &KQuadrature,
) -> Result<VerificationReport> {
    require_dim2(quad.dim)?;
    require_dim2(xi.grid().dim())?;
    require_dim2(k.dim)?;
    if fr.support_radius() > quad.cutoff {
        return Err(Error::CutoffTooSmall {
            support: fr.support_radius(),
            cutoff: quad.cutoff,
        });
    }
    let roots = RootSystemData::sl(2)?;
    let grid = xi.grid();
    let ones = BoundaryFunction::ones(grid);
    let xi_k = k_average(xi, k)?;
    let eta_k = k_average(eta, k)?;
    let exact = AdaptiveXi::default();
    let terms = quad
        .nodes
        .par_iter()
        .zip(&quad.weights)
        .zip(&quad.radii)
        .map(|((h, w), &s)| {
            let f = fr.value(s);
            if f == 0.0 {
                return Ok((Complex64::new(0.0, 0.0), 0.0));
            }
            let wj = w * cartan_density(h, &roots)? * f;
            let lhs = pairing(&apply_pi(&h.to_element(), &xi_k)?, &eta_k)? * wj;
            Ok((lhs, wj * exact.at_chamber(h)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs: Complex64 = terms.iter().map(|t| t.0).sum();
    let f_xi: f64 = terms.iter().map(|t| t.1).sum();
    let rhs = pairing(xi, &ones)? * pairing(&ones, eta)? * f_xi;
    let scale = (xi.norm2() * eta.norm2() * f_xi.abs()).max(1.0);
    let mut report = VerificationReport::new(
        "radial-identity",
        json!({
            "profile": fr,
            "grid": grid.resolution(),
            "k_resolution": k.resolution,
            "cutoff": quad.cutoff,
        }),
    );
    report.residual("residual", (lhs - rhs).norm() / scale, tolerances::RADIAL);
    report.constant("lhs_abs", lhs.norm());
    report.constant("rhs_abs", rhs.norm());
    report.constant("f_xi_pairing", f_xi);
    Ok(report.finish())
}

/// [`check_radial_identity`] over `cases` seeded triples, the first
/// `mean_zero` of which use a mean-zero `xi` (right side zero).
pub fn radial_identity_sweep(
    grid: &Arc<BoundaryGrid>,
    quad: &ChamberQuadrature,
    k: &KQuadrature,
    cases: usize,
    mean_zero: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let rows = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let kind = if i < mean_zero {
                TrigKind::MeanZero
            } else {
                TrigKind::Complex
            };
            let xi = random_trigonometric(grid, 4, kind, &mut rng)?;
            let eta = random_trigonometric(grid, 4, TrigKind::Complex, &mut rng)?;
            let fr = RadialProfile::random(&mut rng, i);
            let r = check_radial_identity(&fr, &xi, &eta, quad, k)?;
            Ok((i, i < mean_zero, fr.support_radius(), r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "case",
        "mean_zero",
        "support",
        "lhs_abs",
        "rhs_abs",
        "residual",
    ]);
    let mut worst: f64 = 0.0;
    let mut mean_zero_lhs: f64 = 0.0;
    for (i, mz, support, r) in &rows {
        let res = r.residuals["residual"];
        worst = if res.is_nan() {
            f64::NAN
        } else {
            worst.max(res)
        };
        if *mz {
            mean_zero_lhs = mean_zero_lhs.max(r.empirical_constants["lhs_abs"]);
        }
        table.push(vec![
            *i as f64,
            f64::from(u8::from(*mz)),
            *support,
            r.empirical_constants["lhs_abs"],
            r.empirical_constants["rhs_abs"],
            res,
        ]);
    }
    let mut report = VerificationReport::new(
        "radial-identity",
        json!({
            "cases": cases,
            "mean_zero_cases": mean_zero,
            "seed": seed,
            "grid": grid.resolution(),
            "k_resolution": k.resolution,
            "cutoff": quad.cutoff,
            "degree": 4,
        }),
    );
    report.residual("residual", worst, tolerances::RADIAL);
    report.constant("max_mean_zero_lhs", mean_zero_lhs);
    report.table("cases", table);
    Ok(report.finish())
}

struct CsSides {
    lhs: f64,
    rhs: f64,
}

fn cs_sides(g: &GroupElement, xi: &BoundaryFunction, eta: &BoundaryFunction) -> Result<CsSides> {
    if !xi.grid().same_as(eta.grid()) {
        return Err(Error::GridMismatch);
    }
    let ones = BoundaryFunction::ones(xi.grid());
    let lhs = pairing(&apply_pi(g, xi)?, eta)?.norm();
    let a = pairing(&apply_pi(g, &ones)?, &eta.abs_squared())?.re;
    let b = pairing(&apply_pi(&g.inverse(), &ones)?, &xi.abs_squared())?.re;
    Ok(CsSides {
        lhs,
        rhs: (a * b).sqrt(),
    })
}

/// `|<pi(g) xi, eta>| <= <pi(g) 1, |eta|^2>^{1/2} <pi(g^-1) 1, |xi|^2>^{1/2}`.
pub fn check_cs_lemma(
    g: &GroupElement,
    xi: &BoundaryFunction,
    eta: &BoundaryFunction,
) -> Result<VerificationReport> {
    let s = cs_sides(g, xi, eta)?;
    let mut report = VerificationReport::new(
        "cauchy-schwarz",
        json!({ "g": g.to_literal(), "grid": xi.grid().resolution() }),
    );
    report.residual(
        "negative_slack",
        (s.lhs - s.rhs).max(0.0),
        tolerances::CAUCHY_SCHWARZ,
    );
    report.constant("lhs", s.lhs);
    report.constant("rhs", s.rhs);
    report.constant("slack", s.rhs - s.lhs);
    Ok(report.finish())
}

/// [`check_cs_lemma`] on `cases` seeded triples (case 0 uses `g = e`),
/// plus the equality case `xi = eta = 1` on ten of the same elements.
pub fn cs_lemma_sweep(
    grid: &Arc<BoundaryGrid>,
    cases: usize,
    max_log: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let rows = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let g = if i == 0 {
                GroupElement::identity(2)
            } else {
                random_element(2, max_log, &mut rng)
            };
            let xi = random_trigonometric(grid, 4, TrigKind::Complex, &mut rng)?;
            let eta = random_trigonometric(grid, 4, TrigKind::Complex, &mut rng)?;
            let s = cs_sides(&g, &xi, &eta)?;
            let equality = if i < 10 {
                let ones = BoundaryFunction::ones(grid);
                let e = cs_sides(&g, &ones, &ones)?;
                (e.rhs - e.lhs).abs()
            } else {
                0.0
            };
            Ok((s, equality))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["case", "lhs", "rhs", "slack"]);
    let mut min_slack = f64::INFINITY;
    let mut gap: f64 = 0.0;
    for (i, (s, eq)) in rows.iter().enumerate() {
        let slack = s.rhs - s.lhs;
        min_slack = if slack.is_nan() {
            f64::NAN
        } else {
            min_slack.min(slack)
        };
        gap = gap.max(*eq);
        table.push(vec![i as f64, s.lhs, s.rhs, slack]);
    }
    let mut report = VerificationReport::new(
        "cauchy-schwarz",
        json!({ "cases": cases, "max_log": max_log, "seed": seed, "grid": grid.resolution() }),
    );
    report.residual(
        "negative_slack",
        (-min_slack).max(0.0),
        tolerances::CAUCHY_SCHWARZ,
    );
    report.residual("equality_gap", gap, tolerances::CAUCHY_SCHWARZ);
    report.constant("min_slack", min_slack);
    report.table("cases", table);
    Ok(report.finish())
}

/// Operator norm of a 2 x 2 matrix.
fn op_norm2(m: &DMatrix<f64>) -> f64 {
    let f2 = m.iter().map(|x| x * x).sum::<f64>();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    (0.5 * (f2 + (f2 * f2 - 4.0 * det * det).max(0.0).sqrt())).sqrt()
}

/// `exp(X)` for a random traceless `X` with `||X||_op <= eps`.
fn random_neighbour<R: Rng + ?Sized>(eps: f64, rng: &mut R) -> Result<GroupElement> {
    if eps == 0.0 {
        return Ok(GroupElement::identity(2));
    }
    let (a, b, c): (f64, f64, f64) = (
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    let x = DMatrix::from_row_slice(2, 2, &[a, b, c, -a]);
    let scale = eps * rng.random_range(0.0f64..1.0).cbrt() / op_norm2(&x).max(f64::MIN_POSITIVE);
    let x = x * scale;
    // exp of a traceless 2x2 matrix: X^2 = mu^2 I.
    let mu2 = x[(0, 0)] * x[(0, 0)] + x[(0, 1)] * x[(1, 0)];
    let (c0, c1) = if mu2 > 1e-300 {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    } else if mu2 < -1e-300 {
        let mu = (-mu2).sqrt();
        (mu.cos(), mu.sin() / mu)
    } else {
        (1.0, 1.0)
    };
    GroupElement::new(DMatrix::identity(2, 2) * c0 + x * c1)
}

/// Stability of `g -> <pi(g) 1, xi> / (1 + L(g))^d` relative to the group
/// generated by `p`, on the neighbourhood `U = exp{X : ||X||_op <= eps}`.
///
/// The translates `gamma U` are disjoint when every `delta != e` of the
/// ball of radius `2 radius` has `||delta - I||_op > e^{2 eps} - 1`; this is
/// audited first. The constant `max value(gamma) / value(gamma u)` is
/// estimated from `sample` and `2 sample` draws.
pub fn check_stability(
    d: f64,
    p: &GroupPresentation,
    xi: &BoundaryFunction,
    eps: f64,
    sample: usize,
    radius: u32,
    seed: u64,
) -> Result<VerificationReport> {
    require_dim2(p.dim())?;
    if !xi.is_nonnegative() {
        return Err(Error::InvalidParameter(
            "stability needs a nonnegative xi".into(),
        ));
    }
    if !(eps >= 0.0) || sample == 0 {
        return Err(Error::InvalidParameter(
            "neighbourhood radius must be >= 0 and the sample non-empty".into(),
        ));
    }
    let audit = generate_ball_capped(p, 2 * radius, 4_000_000)?;
    let separation = (1..audit.len())
        .into_par_iter()
        .map(|i| {
            let m = audit.element(i).matrix() - DMatrix::<f64>::identity(2, 2);
            op_norm2(&m)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let required = (2.0 * eps).exp() - 1.0;
    if !(separation > required) {
        return Err(Error::OverlapDetected {
            separation,
            required,
        });
    }
    let ball = generate_ball(p, radius)?;
    let value = |g: &GroupElement| -> Result<f64> {
        Ok(unit_pairing(g, xi, PAIRING_TOL)?.re / (1.0 + length(g)?).powf(d))
    };
    let estimate = |m: usize, s: u64| -> Result<(f64, f64)> {
        let draws: Vec<(usize, GroupElement)> = {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..m)
                .map(|_| {
                    Ok((
                        rng.random_range(0..ball.len()),
                        random_neighbour(eps, &mut rng)?,
                    ))
                })
                .collect::<Result<_>>()?
        };
        let out = draws
            .par_iter()
            .map(|(i, u)| {
                let gamma = ball.element(*i);
                let gu = &gamma * u;
                let ratio = value(&gamma)? / value(&gu)?;
                let (lg, lgu, lu) = (ball.length(*i), length(&gu)?, length(u)?);
                let triangle = (1.0 + lg) - (1.0 + lgu) * (1.0 + lu);
                Ok((ratio, triangle))
            })
            .collect::<Result<Vec<_>>>()?;
        let c = out.iter().map(|o| o.0).fold(0.0, f64::max);
        let t = out.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
        Ok((c, t))
    };
    let (c1, t1) = estimate(sample, seed)?;
    let (c2, t2) = estimate(2 * sample, seed.wrapping_add(1))?;
    let ratio = if c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0 {
        c1.max(c2) / c1.min(c2)
    } else {
        f64::NAN
    };
    let mut report = VerificationReport::new(
        "stability",
        json!({
            "d": d,
            "group": p.name,
            "neighbourhood_radius": eps,
            "sample": sample,
            "radius": radius,
            "seed": seed,
        }),
    );
    report.residual("estimate_ratio", ratio, tolerances::SAMPLE_STABILITY);
    report.residual("triangle_excess", t1.max(t2), tolerances::TRIANGLE);
    report.constant("c_emp_small", c1);
    report.constant("c_emp_large", c2);
    report.constant("separation", separation);
    report.constant("required_separation", required);
    Ok(report.finish())
}

/// `phi_{2d}(gamma) = Xi(gamma) / (1 + L(gamma))^{2d}` on a ball.
fn phi_table(ball: &BallIndex, d: f64, xi: &dyn XiEvaluator) -> Result<Vec<f64>> {
    Ok(xi_table(ball, xi)?
        .into_iter()
        .enumerate()
        .map(|(i, x)| x / (1.0 + ball.length(i)).powf(2.0 * d))
        .collect())
}

/// `K = sup_b sum_{gamma in ball} phi_{2d}(gamma) c(gamma, b)^{1/2}` (n = 2).
///
/// For `f >= 0` supported in a symmetric ball, Cauchy-Schwarz gives
/// `||pi(f)|| <= K ||f||_{S^{2d}}`. The supremum is taken over the grid
/// angles and the peak of every `c(gamma, .)`.
pub fn chain_constant(
    ball: &BallIndex,
    d: f64,
    xi: &dyn XiEvaluator,
    grid: &BoundaryGrid,
) -> Result<f64> {
    require_dim2(ball.dim())?;
    let phi = phi_table(ball, d, xi)?;
    let inverses: Vec<[f64; 4]> = (0..ball.len())
        .map(|i| {
            let g = ball.element(i).inverse();
            [g.entry(0, 0), g.entry(0, 1), g.entry(1, 0), g.entry(1, 1)]
        })
        .collect();
    let mut angles: Vec<f64> = grid
        .points()
        .iter()
        .filter_map(BoundaryPoint::angle)
        .collect();
    for i in 0..ball.len() {
        let k1 = cartan_decompose(&ball.element(i))?.k1;
        angles.push(k1.entry(1, 0).atan2(k1.entry(0, 0)));
    }
    let k = angles
        .par_iter()
        .map(|th| {
            let (s, c) = th.sin_cos();
            inverses
                .iter()
                .zip(&phi)
                .map(|(m, w)| {
                    let x = m[0] * c + m[1] * s;
                    let y = m[2] * c + m[3] * s;
                    w / (x * x + y * y).sqrt()
                })
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::NonFinite("chain constant".into()))
    }
}

/// Ball-truncated `sum_gamma phi_{2d}(gamma) <pi(gamma) 1, xi>` against
/// `C_d ||xi||_1`, for radii `0..=radius`.
///
/// `C_d` comes from [`cd_constant`] on `quad`. The ratio sequence over radii
/// `>= 1` must satisfy the boundedness policy. Also reports
/// `sup_ratio = K / C_d` with `K` from [`chain_constant`], the worst case
/// over point-mass `xi`.
pub fn check_discretization(
    d: f64,
    p: &GroupPresentation,
    xi: &BoundaryFunction,
    radius: u32,
    quad: &ChamberQuadrature,
) -> Result<VerificationReport> {
    require_dim2(p.dim())?;
    let roots = require_admissible(d, p.dim())?;
    if !xi.is_nonnegative() {
        return Err(Error::InvalidParameter(
            "discretization needs a nonnegative xi".into(),
        ));
    }
    let cd = cd_constant(d, quad, &AdaptiveXi::default(), &roots)?;
    let ball = generate_ball(p, radius)?;
    let table_xi = TabulatedXi::for_length(ball.max_length())?;
    let phi = phi_table(&ball, d, &table_xi)?;
    let pairings = (0..ball.len())
        .into_par_iter()
        .map(|i| Ok(unit_pairing(&ball.element(i), xi, PAIRING_TOL)?.re))
        .collect::<Result<Vec<f64>>>()?;
    let rhs = cd.value * xi.norm1();
    let mut table = Table::new(&["radius", "elements", "lhs", "rhs", "ratio"]);
    let mut lhs = 0.0;
    let mut i = 0;
    let mut ratios = Vec::new();
    for r in 0..=radius {
        let end = ball.prefix_len(r);
        while i < end {
            lhs += phi[i] * pairings[i];
            i += 1;
        }
        let ratio = lhs / rhs;
        if r >= 1 || radius == 0 {
            ratios.push(ratio);
        }
        table.push(vec![r as f64, end as f64, lhs, rhs, ratio]);
    }
    let k = chain_constant(&ball, d, &table_xi, xi.grid())?;
    let mut report = VerificationReport::new(
        "discretization",
        json!({
            "d": d,
            "group": p.name,
            "radius": radius,
            "grid": xi.grid().resolution(),
            "cutoff": quad.cutoff,
            "xi_label": table_xi.label(),
        }),
    );
    report.residual(
        "max_over_median",
        max_over_median(&ratios),
        tolerances::BOUNDEDNESS,
    );
    report.constant("cd", cd.value);
    report.constant("cd_tail_bound", cd.tail_bound);
    report.constant("max_ratio", ratios.iter().copied().fold(0.0, f64::max));
    report.constant("chain_constant", k);
    report.constant("sup_ratio", k / cd.value);
    report.table("ratios", table);
    Ok(report.finish())
}

fn schwartz_from_phi(f: &GroupFunction, phi: &[f64]) -> f64 {
    f.iter().map(|(i, z)| z.norm() / phi[i]).fold(0.0, f64::max)
}

/// Submultiplicativity of `S^{2d}` under convolution, one corpus per radius.
///
/// For every consecutive pair of each corpus, reports
/// `||f1 * f2|| / (||f1|| ||f2||)` and checks the two halves of the
/// pointwise bound separately: with `N = ||f1|| ||f2|| 2^{2d} (1+L(g))^{-2d}`,
///
/// ```text
/// sum_{L(gamma) <= L(g)/2} |f1(gamma) f2(gamma^-1 g)| <= N sum phi_{2d}(gamma) Xi(gamma^-1 g),
/// sum_{L(gamma) >  L(g)/2} |f1(gamma) f2(gamma^-1 g)| <= N sum Xi(gamma) phi_{2d}(gamma^-1 g),
/// ```
///
/// with the right-hand sums over the same pairs. The per-radius maximum
/// ratio must satisfy the boundedness policy.
pub fn check_convolution_bound(d: f64, corpora: &[TestCorpus]) -> Result<VerificationReport> {
    let first = corpora
        .iter()
        .find_map(|c| c.ball())
        .ok_or_else(|| Error::InvalidParameter("empty corpus".into()))?;
    let p = first.presentation().clone();
    require_dim2(p.dim())?;
    require_admissible(d, p.dim())?;
    let mut pairs_table = Table::new(&["radius", "pair", "ratio", "split_excess"]);
    let mut radii_table = Table::new(&["radius", "pairs", "max_ratio", "median_ratio"]);
    let mut maxima = Vec::new();
    let mut worst_split = 0.0f64;
    for corpus in corpora {
        let Some(ball) = corpus.ball() else { continue };
        if !ball.same_group(first) {
            return Err(Error::PresentationMismatch(
                p.name.clone(),
                ball.presentation().name.clone(),
            ));
        }
        let r = ball.radius();
        let target = Arc::new(generate_ball(&p, 2 * r)?);
        let xi = TabulatedXi::for_length(target.max_length())?;
        let xis = xi_table(&target, &xi)?;
        let lengths: Vec<f64> = (0..target.len()).map(|i| target.length(i)).collect();
        let phi: Vec<f64> = xis
            .iter()
            .zip(&lengths)
            .map(|(x, l)| x / (1.0 + l).powf(2.0 * d))
            .collect();
        let mut ratios = Vec::new();
        for (k, (f1, f2)) in corpus.pairs().enumerate() {
            let conv = convolve(f1, f2, &target)?;
            let (n1, n2) = (schwartz_from_phi(f1, &phi), schwartz_from_phi(f2, &phi));
            let ratio = schwartz_from_phi(&conv, &phi) / (n1 * n2);
            let split = split_excess(f1, f2, &target, &lengths, &xis, &phi, d, n1 * n2)?;
            worst_split = if split.is_nan() {
                f64::NAN
            } else {
                worst_split.max(split)
            };
            pairs_table.push(vec![r as f64, k as f64, ratio, split]);
            ratios.push(ratio);
        }
        if ratios.is_empty() {
            continue;
        }
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        radii_table.push(vec![r as f64, ratios.len() as f64, max, median(&ratios)]);
        maxima.push(max);
    }
    let mut report = VerificationReport::new(
        "convolution-bound",
        json!({
            "d": d,
            "norm_exponent": 2.0 * d,
            "group": p.name,
            "radii": corpora.iter().filter_map(|c| c.ball().map(|b| b.radius())).collect::<Vec<_>>(),
            "seeds": corpora.iter().map(|c| c.seed).collect::<Vec<_>>(),
        }),
    );
    report.residual(
        "max_over_median",
        max_over_median(&maxima),
        tolerances::BOUNDEDNESS,
    );
    report.residual("split_excess", worst_split, tolerances::SPLIT);
    report.constant("max_ratio", maxima.iter().copied().fold(0.0, f64::max));
    report.table("pairs", pairs_table);
    report.table("radii", radii_table);
    Ok(report.finish())
}

/// Largest relative excess of the two split sums over their bounds.
#[allow(clippy::too_many_arguments)]
fn split_excess(
    f1: &GroupFunction,
    f2: &GroupFunction,
    target: &BallIndex,
    lengths: &[f64],
    xis: &[f64],
    phi: &[f64],
    d: f64,
    norms: f64,
) -> Result<f64> {
    let rows = f1
        .support()
        .par_iter()
        .zip(f1.values())
        .map(|(&i, a)| {
            let i = i as usize;
            f2.iter()
                .map(|(j, b)| {
                    let k = target
                        .product_index(f1.ball(), i, f2.ball(), j)?
                        .ok_or_else(|| {
                            Error::InvalidParameter("product outside target ball".into())
                        })?;
                    let near = lengths[i] <= 0.5 * lengths[k];
                    let bound = if near {
                        phi[i] * xis[j]
                    } else {
                        xis[i] * phi[j]
                    };
                    Ok((k as u32, near, a.norm() * b.norm(), bound))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sums: std::collections::HashMap<u32, [f64; 4]> = Default::default();
    for &(k, near, mass, bound) in rows.iter().flatten() {
        let e = sums.entry(k).or_default();
        let o = if near { 0 } else { 2 };
        e[o] += mass;
        e[o + 1] += bound;
    }
    let factor = norms * 2f64.powf(2.0 * d);
    let mut worst = f64::NEG_INFINITY;
    for (k, s) in sums {
        let scale = factor / (1.0 + lengths[k as usize]).powf(2.0 * d);
        for o in [0, 2] {
            if s[o] > 0.0 {
                let bound = scale * s[o + 1];
                worst = worst.max((s[o] - bound) / bound);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MainInequalityOptions {
    /// Truncation radius minus support radius.
    pub offset: u32,
    pub power: PowerOptions,
    /// Largest `|B_R| |supp(f* * f)|` allowed; `R` is lowered to fit.
    pub budget: usize,
}

impl Default for MainInequalityOptions {
    fn default() -> Self {
        Self {
            offset: 8,
            power: PowerOptions {
                max_iterations: 300,
                ..PowerOptions::default()
            },
            budget: 50_000_000,
        }
    }
}

/// `||lambda(f)||_lower / ||f||_{S^d}` for the positive corpus functions,
/// one corpus per support radius, with the chain
/// `lambda_lower <= pi_estimate <= K ||f||_{S^{2d}}` checked on every
/// function (`K` from [`chain_constant`] on the support ball).
pub fn check_main_inequality(
    d: f64,
    corpora: &[TestCorpus],
    grid: &Arc<BoundaryGrid>,
    opts: &MainInequalityOptions,
) -> Result<VerificationReport> {
    let first = corpora
        .iter()
        .find_map(|c| c.ball())
        .ok_or_else(|| Error::InvalidParameter("empty corpus".into()))?;
    let p = first.presentation().clone();
    require_dim2(p.dim())?;
    let mut table = Table::new(&[
        "radius",
        "R",
        "function",
        "lambda_lower",
        "residual",
        "pi",
        "pi_coarse",
        "schwartz_d",
        "schwartz_2d",
        "chain_constant",
        "ratio",
    ]);
    let mut maxima = Vec::new();
    let mut shalom: f64 = f64::NEG_INFINITY;
    let mut chain: f64 = f64::NEG_INFINITY;
    let mut skipped = 0usize;
    for corpus in corpora {
        let Some(ball) = corpus.ball() else { continue };
        let r = ball.radius();
        let xi = TabulatedXi::for_length(ball.max_length())?;
        let k = chain_constant(ball, d, &xi, grid)?;
        let mut ratios = Vec::new();
        for (idx, f) in corpus.positive_functions().enumerate() {
            if let Some((i, _)) = f.iter().find(|(_, z)| z.re < 0.0 || z.im != 0.0) {
                return Err(Error::NegativeMass(i));
            }
            let Some(domain) = budgeted_domain(f, r + opts.offset, opts.budget)? else {
                skipped += 1;
                continue;
            };
            let lam = lambda_norm_lower_on(f, &domain, &opts.power)?;
            let pi = pi_operator_norm(f, grid)?;
            let s_d = schwartz_norm(f, d, &xi)?;
            let s_2d = schwartz_norm(f, 2.0 * d, &xi)?;
            let ratio = lam.lower / s_d;
            shalom = shalom.max(lam.lower - pi.value);
            chain = chain.max((pi.value - k * s_2d) / (k * s_2d));
            ratios.push(ratio);
            table.push(vec![
                r as f64,
                domain.radius() as f64,
                idx as f64,
                lam.lower,
                lam.residual,
                pi.value,
                pi.coarse,
                s_d,
                s_2d,
                k,
                ratio,
            ]);
        }
        if let Some(max) = ratios.iter().copied().reduce(f64::max) {
            maxima.push(max);
        }
    }
    let mut report = VerificationReport::new(
        "main-inequality",
        json!({
            "d": d,
            "group": p.name,
            "radii": corpora.iter().filter_map(|c| c.ball().map(|b| b.radius())).collect::<Vec<_>>(),
            "seeds": corpora.iter().map(|c| c.seed).collect::<Vec<_>>(),
            "grid": grid.resolution(),
            "options": opts,
            "skipped_functions": skipped,
        }),
    );
    report.residual(
        "max_over_median",
        max_over_median(&maxima),
        tolerances::BOUNDEDNESS,
    );
    report.residual("shalom_excess", shalom, tolerances::SHALOM);
    report.residual("chain_excess", chain, tolerances::CHAIN);
    report.constant("max_ratio", maxima.iter().copied().fold(0.0, f64::max));
    report.table("functions", table);
    Ok(report.finish())
}
