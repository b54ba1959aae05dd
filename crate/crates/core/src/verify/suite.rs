use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::checks::{
    check_convolution_bound, check_discretization, check_main_inequality, check_stability,
    cs_lemma_sweep, radial_identity_sweep, MainInequalityOptions,
};
use super::config::RunConfig;
use super::corpus::{random_trigonometric, TestCorpus, TrigKind};
use super::VerificationReport;
use crate::boundary::BoundaryGrid;
use crate::discrete::{generate_ball, GroupPresentation};
use crate::error::{Error, Result};
use crate::haar::{build_k_quadrature, ChamberQuadrature, QuadratureSpec};

/// Everything one `verify` run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub config: RunConfig,
    pub config_hash: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    pub reports: Vec<VerificationReport>,
}

impl Bundle {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    /// Writes `report.json` and one CSV per report table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::new();
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json() + "\n").map_err(io)?;
        written.push(path);
        for report in &self.reports {
            for (name, table) in &report.tables {
                let path = dir.join(format!("{}-{name}.csv", report.statement_id));
                table.write_csv(std::fs::File::create(&path).map_err(io)?)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Seed offset per statement, so statements never share a random stream.
fn seed_for(config: &RunConfig, salt: u64) -> u64 {
    config.seed.wrapping_mul(0x9e37_79b9).wrapping_add(salt)
}

fn corpora(
    p: &GroupPresentation,
    radii: &[u32],
    count: usize,
    seed: u64,
) -> Result<Vec<TestCorpus>> {
    radii
        .iter()
        .map(|&r| {
            let ball = Arc::new(generate_ball(p, r)?);
            TestCorpus::generate(&ball, count, seed.wrapping_add(r as u64), false)
        })
        .collect()
}

fn run_statement(
    name: &str,
    config: &RunConfig,
    p: &GroupPresentation,
    d: f64,
) -> Result<VerificationReport> {
    let grid = BoundaryGrid::new(p.dim(), config.grid)?;
    let spec = QuadratureSpec {
        cutoff: config.cutoff,
        ..QuadratureSpec::default()
    };
    let quad = ChamberQuadrature::build(p.dim(), &spec)?;
    match name {
        "radial-identity" => {
            let cases = (config.samples / 10).max(1);
            let k = build_k_quadrature(2, 32)?;
            radial_identity_sweep(&grid, &quad, &k, cases, cases / 10, seed_for(config, 1))
        }
        "cauchy-schwarz" => cs_lemma_sweep(&grid, config.samples, 2.0, seed_for(config, 2)),
        "stability" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_for(config, 3));
            let xi = random_trigonometric(&grid, 4, TrigKind::Positive, &mut rng)?;
            let sample = (config.samples / 5).max(1);
            check_stability(d, p, &xi, 0.1, sample, config.radius, seed_for(config, 4))
        }
        "discretization" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_for(config, 5));
            let xi = random_trigonometric(&grid, 4, TrigKind::Positive, &mut rng)?;
            check_discretization(d, p, &xi, config.radius + 2, &quad)
        }
        "convolution-bound" => {
            let radii: Vec<u32> =
                (config.radius.saturating_sub(2).max(1)..=config.radius).collect();
            let c = corpora(p, &radii, 2 * config.pairs, seed_for(config, 6))?;
            check_convolution_bound(d, &c)
        }
        "main-inequality" => {
            let radii: Vec<u32> = (config.radius.min(2)..=config.radius).collect();
            let c = corpora(p, &radii, 6, seed_for(config, 7))?;
            let opts = MainInequalityOptions {
                offset: config.truncation - config.radius,
                ..MainInequalityOptions::default()
            };
            check_main_inequality(d, &c, &grid, &opts)
        }
        other => Err(Error::Config(format!("unknown statement '{other}'"))),
    }
}

/// Runs the selected statements. A statement that errors yields a failing
/// report carrying the message instead of aborting the run.
pub fn run_suite(config: &RunConfig) -> Result<Bundle> {
    let p = config.validate()?;
    if p.dim() != 2 {
        return Err(Error::Config(format!(
            "the suite needs 2x2 generators; '{}' is {}x{}",
            config.group,
            p.dim(),
            p.dim()
        )));
    }
    let d = config.exponent(p.dim())?;
    let names = config.statements()?;
    let run = |name: &&str| match run_statement(name, config, &p, d) {
        Ok(r) => r,
        Err(e) => {
            let mut r = VerificationReport::new(name, json!({ "error": e.to_string() }));
            r.residual("error", f64::NAN, 0.0);
            r.finish()
        }
    };
    let reports: Vec<VerificationReport> = if config.deterministic {
        names.iter().map(run).collect()
    } else {
        names.par_iter().map(run).collect()
    };
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|t| t.as_secs())
        .unwrap_or(0);
    Ok(Bundle {
        config: config.clone(),
        config_hash: config.hash(),
        timestamp,
        reports,
    })
}
