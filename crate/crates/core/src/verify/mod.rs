//! Numerical checks of the decay inequalities.
//!
//! Every check returns a [`VerificationReport`]: named residuals with their
//! tolerances, empirical constants, and the ratio tables needed to re-derive
//! them. The verdict is recomputed from residuals and tolerances alone.

mod checks;
mod config;
mod corpus;
mod suite;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use checks::{
    chain_constant, check_convolution_bound, check_cs_lemma, check_discretization,
    check_main_inequality, check_radial_identity, check_stability, cs_lemma_sweep,
    radial_identity_sweep, tolerances, MainInequalityOptions,
};
pub use config::{RunConfig, STATEMENTS};
pub use corpus::{random_trigonometric, RadialProfile, TestCorpus, TrigKind};
pub use suite::{run_suite, Bundle};

/// Rows of one ratio sequence, written out as CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    #[serde(with = "lossless_rows")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> crate::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| crate::Error::Io(e.to_string());
        out.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|x| format!("{x:e}")))
                .map_err(io)?;
        }
        out.flush().map_err(|e| crate::Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub statement_id: String,
    pub inputs: serde_json::Value,
    #[serde(with = "lossless_map")]
    pub residuals: BTreeMap<String, f64>,
    #[serde(with = "lossless_map")]
    pub empirical_constants: BTreeMap<String, f64>,
    #[serde(with = "lossless_map")]
    pub tolerances: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(statement_id: &str, inputs: serde_json::Value) -> Self {
        Self {
            statement_id: statement_id.to_string(),
            inputs,
            residuals: BTreeMap::new(),
            empirical_constants: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            tables: BTreeMap::new(),
            passed: false,
        }
    }

    /// Records a residual and the tolerance it must not exceed.
    pub fn residual(&mut self, name: &str, value: f64, tolerance: f64) {
        self.residuals.insert(name.to_string(), value);
        self.tolerances.insert(name.to_string(), tolerance);
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.empirical_constants.insert(name.to_string(), value);
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    /// Sets `passed` from the residuals.
    pub fn finish(mut self) -> Self {
        self.passed = verdict(&self.residuals, &self.tolerances);
        self
    }

    /// Whether the stored flag agrees with a fresh verdict.
    pub fn is_consistent(&self) -> bool {
        self.passed == verdict(&self.residuals, &self.tolerances)
    }
}

/// Passed iff every tolerance has a residual of the same name that does not
/// exceed it. NaN residuals fail.
pub fn verdict(residuals: &BTreeMap<String, f64>, tolerances: &BTreeMap<String, f64>) -> bool {
    tolerances
        .iter()
        .all(|(name, tol)| matches!(residuals.get(name), Some(r) if *r <= *tol))
}

/// Median; NaN for an empty sequence.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// `max / median` of a sequence: the boundedness statistic for ratio
/// sequences. NaN for an empty sequence or a non-positive median.
pub fn max_over_median(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let med = median(values);
    if med > 0.0 {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max) / med
    } else {
        f64::NAN
    }
}

/// JSON has no NaN or infinity; those are written as strings and read back.
mod lossless {
    use serde_json::Value;

    pub fn to_value(x: f64) -> Value {
        if x.is_finite() {
            serde_json::json!(x)
        } else if x.is_nan() {
            Value::String("NaN".into())
        } else if x > 0.0 {
            Value::String("inf".into())
        } else {
            Value::String("-inf".into())
        }
    }

    pub fn from_value<E: serde::de::Error>(v: &Value) -> Result<f64, E> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| E::custom("bad number")),
            Value::String(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("bad float '{other}'"))),
            },
            _ => Err(E::custom("expected a number")),
        }
    }
}

mod lossless_map {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, super::lossless::to_value(*v))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, serde_json::Value>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| Ok((k, super::lossless::from_value(&v)?)))
            .collect()
    }
}

mod lossless_rows {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rows.iter().map(|r| {
            r.iter()
                .map(|x| super::lossless::to_value(*x))
                .collect::<Vec<_>>()
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<serde_json::Value>>::deserialize(d)?
            .iter()
            .map(|r| r.iter().map(super::lossless::from_value).collect())
            .collect()
    }
}
