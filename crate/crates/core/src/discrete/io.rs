use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use super::function::{xi_table, GroupFunction};
use super::BallIndex;
use crate::boundary::XiEvaluator;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub index: usize,
    pub word: String,
    pub matrix: Vec<Vec<f64>>,
    pub word_length: u32,
}

/// JSON form of a ball, optionally with function values aligned to the
/// elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub presentation: String,
    pub radius: u32,
    pub elements: Vec<ElementRecord>,
    #[serde(default)]
    pub values: Vec<[f64; 2]>,
}

impl BallIndex {
    pub fn to_record(&self, values: Option<&GroupFunction>) -> BallRecord {
        let elements = (0..self.len())
            .map(|i| ElementRecord {
                index: i,
                word: self.word_string(i),
                matrix: self.element(i).to_rows(),
                word_length: self.word_length(i),
            })
            .collect();
        let values = values
            .map(|f| {
                (0..self.len())
                    .map(|i| {
                        let z = f.get(i);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .unwrap_or_default();
        BallRecord {
            presentation: self.presentation().name.clone(),
            radius: self.radius(),
            elements,
            values,
        }
    }

    pub fn write_json(&self, path: &Path, values: Option<&GroupFunction>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, &self.to_record(values))?;
        Ok(())
    }
}

impl GroupFunction {
    /// Reads the `values` column of a record written for the same ball.
    pub fn from_record(ball: &Arc<BallIndex>, record: &BallRecord) -> Result<Self> {
        let entries = record
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (i, Complex64::new(v[0], v[1])))
            .collect();
        Self::new(ball, entries)
    }

    /// Per-element table `index, word_length, length, xi, re, im` over the
    /// whole ball.
    pub fn write_csv(&self, path: &Path, xi: &dyn XiEvaluator) -> Result<()> {
        let ball = self.ball();
        let xis = xi_table(ball, xi)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["index", "word_length", "length", "xi", "re", "im"])?;
        for (i, x) in xis.iter().enumerate() {
            let z = self.get(i);
            w.serialize((i, ball.word_length(i), ball.length(i), x, z.re, z.im))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{generate_ball, GroupPresentation};

    #[test]
    fn record_round_trip() {
        let ball = Arc::new(generate_ball(&GroupPresentation::sanov(), 1).unwrap());
        let f = GroupFunction::from_real(&ball, &[(0, 1.5), (3, -2.0)]).unwrap();
        let rec = ball.to_record(Some(&f));
        assert_eq!(rec.elements.len(), 5);
        assert_eq!(rec.elements[1].word, "a");
        assert_eq!(rec.elements[1].matrix, vec![vec![1.0, 2.0], vec![0.0, 1.0]]);
        let text = serde_json::to_string(&rec).unwrap();
        let back: BallRecord = serde_json::from_str(&text).unwrap();
        let g = GroupFunction::from_record(&ball, &back).unwrap();
        assert_eq!(g.iter().collect::<Vec<_>>(), f.iter().collect::<Vec<_>>());
    }
}
