use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::json::Num;
use crate::tolerance;

/// One subsystem of a conditional table: its labels and ontic basis size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub labels: Vec<String>,
    pub dim: usize,
}

/// Row w, column (i₁,…,iₙ) flattened with i₁ most significant.
///
/// Values are stored as computed; `value` and the serializers clamp small
/// negative rounding residue to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProbabilityTable {
    parent_probabilities: Option<Vec<f64>>,
    splits: Vec<SplitInfo>,
    values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    pub parent_indices: Vec<usize>,
    pub splits: Vec<SplitInfo>,
    pub values: Vec<Vec<f64>>,
}

impl ConditionalProbabilityTable {
    fn validate(splits: &[SplitInfo], values: &[Vec<f64>]) -> std::result::Result<(), String> {
        if splits.is_empty() || splits.iter().any(|s| s.dim == 0) {
            return Err("a table needs at least one nonempty split".into());
        }
        let cols: usize = splits.iter().map(|s| s.dim).product();
        for (w, row) in values.iter().enumerate() {
            if row.len() != cols {
                return Err(format!("row {w} has {} entries, expected {cols}", row.len()));
            }
            if let Some((k, v)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite() || **v < -tolerance::derived())
            {
                return Err(format!("row {w} entry {k} is {v:e}"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tolerance::row_sum() {
                return Err(format!("row {w} sums to {sum:.12}"));
            }
        }
        Ok(())
    }

    pub(crate) fn from_computed(
        parent_probabilities: Option<Vec<f64>>,
        splits: Vec<SplitInfo>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::validate(&splits, &values).map_err(Error::ToleranceBreach)?;
        Ok(Self {
            parent_probabilities,
            splits,
            values,
        })
    }

    /// Builds a table from explicit rows (e.g. a user-supplied Markov kernel).
    pub fn from_rows(splits: Vec<SplitInfo>, values: Vec<Vec<f64>>) -> Result<Self> {
        Self::validate(&splits, &values).map_err(Error::NotADistribution)?;
        Ok(Self {
            parent_probabilities: None,
            splits,
            values,
        })
    }

    /// Square single-split kernel labelled `label`.
    pub fn kernel(label: &str, values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        Self::from_rows(
            vec![SplitInfo {
                labels: vec![label.to_string()],
                dim,
            }],
            values,
        )
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.splits.iter().map(|s| s.dim).product()
    }

    pub fn splits(&self) -> &[SplitInfo] {
        &self.splits
    }

    pub fn split_dims(&self) -> Vec<usize> {
        self.splits.iter().map(|s| s.dim).collect()
    }

    /// p(w;t) of the parent decomposition, when the table was computed.
    pub fn parent_probabilities(&self) -> Option<&[f64]> {
        self.parent_probabilities.as_deref()
    }

    /// Raw values, unclamped.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, w: usize, tuple: &[usize]) -> f64 {
        self.values[w][self.column_of(tuple)].max(0.0)
    }

    pub fn row(&self, w: usize) -> Vec<f64> {
        self.values[w].iter().map(|v| v.max(0.0)).collect()
    }

    pub fn column_of(&self, tuple: &[usize]) -> usize {
        assert_eq!(tuple.len(), self.splits.len(), "tuple length must match split count");
        tuple.iter().zip(&self.splits).fold(0, |acc, (&i, s)| {
            assert!(i < s.dim, "index {i} out of range for split of size {}", s.dim);
            acc * s.dim + i
        })
    }

    pub fn tuple_of(&self, column: usize) -> Vec<usize> {
        let mut out = vec![0; self.splits.len()];
        let mut rest = column;
        for (slot, s) in out.iter_mut().zip(&self.splits).rev() {
            *slot = rest % s.dim;
            rest /= s.dim;
        }
        out
    }

    pub fn max_row_sum_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("w");
        for k in 1..=self.splits.len() {
            let _ = write!(out, ",i{k}");
        }
        out.push_str(",p\n");
        for (w, row) in self.values.iter().enumerate() {
            for (col, v) in row.iter().enumerate() {
                let _ = write!(out, "{w}");
                for i in self.tuple_of(col) {
                    let _ = write!(out, ",{i}");
                }
                let _ = writeln!(out, ",{}", Num(v.max(0.0)));
            }
        }
        out
    }

    pub fn to_json(&self) -> TableJson {
        TableJson {
            parent_indices: (0..self.values.len()).collect(),
            splits: self.splits.clone(),
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(|v| v.max(0.0)).collect())
                .collect(),
        }
    }

    pub fn from_json(json: TableJson) -> Result<Self> {
        if json.parent_indices.len() != json.values.len() {
            return Err(Error::NotADistribution(
                "parent_indices and values differ in length".into(),
            ));
        }
        Self::from_rows(json.splits, json.values)
    }
}
