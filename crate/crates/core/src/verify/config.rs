use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

use crate::discrete::GroupPresentation;
use crate::error::{Error, Result};
use crate::lie::RootSystemData;

/// Statement identifiers accepted by `suite`.
pub const STATEMENTS: [&str; 6] = [
    "radial-identity",
    "cauchy-schwarz",
    "stability",
    "discretization",
    "convolution-bound",
    "main-inequality",
];

/// Flat run configuration. Sources, later ones winning: defaults, a
/// `key = value` file, `HCS_<KEY>` environment variables, command-line
/// flags. All of them go through [`RunConfig::set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Built-in presentation name, or a label for `generators`.
    pub group: String,
    /// Generator literals `"a,b;c,d | ..."`; overrides the built-in.
    pub generators: Option<String>,
    pub n: Option<usize>,
    /// Decay exponent; `None` picks the admissibility threshold plus 1/2.
    pub d: Option<f64>,
    /// Largest support radius of the sweeps.
    pub radius: u32,
    /// Truncation radius for the largest support radius; smaller supports
    /// keep the same margin `R - radius`.
    #[serde(rename = "R")]
    pub truncation: u32,
    pub grid: usize,
    pub cutoff: f64,
    pub seed: u64,
    pub deterministic: bool,
    /// Where results go; not part of a run's identity, so neither
    /// serialized nor hashed.
    #[serde(skip)]
    pub out: PathBuf,
    pub suite: Vec<String>,
    /// Random cases for the boundary statements.
    pub samples: usize,
    /// Function pairs per radius for the convolution statement.
    pub pairs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            group: "sanov".into(),
            generators: None,
            n: None,
            d: None,
            radius: 6,
            truncation: 14,
            grid: 4096,
            cutoff: 20.0,
            seed: 42,
            deterministic: false,
            out: PathBuf::from("hcs-out"),
            suite: vec!["all".into()],
            samples: 1000,
            pairs: 50,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "" | "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "cannot parse '{value}' as a flag for key '{key}'"
        ))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "group" => self.group = v.to_string(),
            "generators" => self.generators = (!v.is_empty()).then(|| v.to_string()),
            "n" => self.n = Some(parse(key, v)?),
            "d" => self.d = Some(parse(key, v)?),
            "radius" => self.radius = parse(key, v)?,
            "R" | "truncation" => self.truncation = parse(key, v)?,
            "grid" => self.grid = parse(key, v)?,
            "cutoff" => self.cutoff = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "deterministic" => self.deterministic = parse_bool(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "suite" => {
                self.suite = v
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "samples" => self.samples = parse(key, v)?,
            "pairs" => self.pairs = parse(key, v)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}'; expected one of group, generators, n, d, radius, R, \
                     grid, cutoff, seed, deterministic, out, suite, samples, pairs"
                )))
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", no + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Applies `HCS_<KEY>` variables (`HCS_R` for the truncation radius).
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let mut vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with("HCS_"))
            .collect();
        vars.sort();
        for (k, v) in vars {
            let rest = &k[4..];
            let key = if rest == "R" {
                "R".to_string()
            } else {
                rest.to_ascii_lowercase()
            };
            self.set(&key, &v)
                .map_err(|e| Error::Config(format!("environment variable {k}: {e}")))?;
        }
        Ok(())
    }

    pub fn presentation(&self) -> Result<GroupPresentation> {
        match &self.generators {
            Some(lits) => GroupPresentation::from_literals(&self.group, lits),
            None => GroupPresentation::builtin(&self.group),
        }
    }

    /// `d`, or the admissibility threshold plus 1/2 for dimension `n`.
    pub fn exponent(&self, n: usize) -> Result<f64> {
        match self.d {
            Some(d) => Ok(d),
            None => Ok(RootSystemData::sl(n)?.admissibility_threshold() + 0.5),
        }
    }

    /// Selected statements in canonical order.
    pub fn statements(&self) -> Result<Vec<&'static str>> {
        let all = self.suite.iter().any(|s| s == "all");
        for s in &self.suite {
            if s != "all" && !STATEMENTS.contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "unknown statement '{s}'; expected 'all' or any of {}",
                    STATEMENTS.join(", ")
                )));
            }
        }
        Ok(STATEMENTS
            .iter()
            .copied()
            .filter(|s| all || self.suite.iter().any(|x| x == s))
            .collect())
    }

    /// Checks everything a suite run needs before any work starts.
    pub fn validate(&self) -> Result<GroupPresentation> {
        let p = self.presentation()?;
        if let Some(n) = self.n {
            if n != p.dim() {
                return Err(Error::Config(format!(
                    "n = {n} but the generators of '{}' are {}x{}",
                    self.group,
                    p.dim(),
                    p.dim()
                )));
            }
        }
        let roots = RootSystemData::sl(p.dim())?;
        let d = self.exponent(p.dim())?;
        if !roots.is_admissible(d) {
            return Err(Error::DivergentExponent {
                d,
                min_d: roots.admissibility_threshold(),
            });
        }
        if self.radius == 0 {
            return Err(Error::Config("radius must be at least 1".into()));
        }
        if self.truncation < self.radius {
            return Err(Error::Config(format!(
                "R = {} must be at least radius = {}",
                self.truncation, self.radius
            )));
        }
        if self.grid < 8 {
            return Err(Error::Config(format!(
                "grid = {} is below the minimum of 8",
                self.grid
            )));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::Config("cutoff must be positive".into()));
        }
        if self.samples == 0 || self.pairs == 0 {
            return Err(Error::Config("samples and pairs must be positive".into()));
        }
        self.statements()?;
        Ok(p)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
