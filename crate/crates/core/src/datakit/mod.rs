//! Datasets with grouped explanatory variables, the category hierarchy, CSV
//! ingestion and the synthetic scanner-panel generator.

mod csv_io;
mod hierarchy;
mod synth;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use csv_io::{load_csv, load_grouping, read_csv, write_csv, write_grouping, GroupingSpec};
pub use hierarchy::{load_hierarchy, parse_hierarchy, write_hierarchy, Hierarchy, Mode, Triple};
pub use synth::{generate, CategoryLayout, GroundTruth, Generated, SyntheticConfig};

/// Variable group: demographics (`C`) or large/medium/small product category dummies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    C,
    L,
    M,
    S,
}

impl Group {
    /// Category groups hold 0/1 purchase dummies.
    pub fn is_category(self) -> bool {
        !matches!(self, Group::C)
    }

    pub fn parse(s: &str) -> Option<Group> {
        match s.trim() {
            "C" => Some(Group::C),
            "L" => Some(Group::L),
            "M" => Some(Group::M),
            "S" => Some(Group::S),
            _ => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::C => "C",
            Group::L => "L",
            Group::M => "M",
            Group::S => "S",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub index: usize,
    pub name: String,
    pub group: Group,
}

/// Design matrix, explained variable and per-column metadata.
///
/// Category columns hold only 0/1 and every `y` entry is a nonzero integer
/// (positive when store A was chosen, negative for store B).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    vars: Vec<VariableMeta>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, vars: Vec<VariableMeta>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Dimension(format!(
                "design matrix has {} rows but y has {} entries",
                x.rows(),
                y.len()
            )));
        }
        if x.cols() != vars.len() {
            return Err(Error::Dimension(format!(
                "design matrix has {} columns but {} variables are described",
                x.cols(),
                vars.len()
            )));
        }
        let mut seen = HashMap::new();
        for (j, v) in vars.iter().enumerate() {
            if v.index != j {
                return Err(Error::Validation(format!(
                    "variable '{}' has index {} at position {}",
                    v.name, v.index, j
                )));
            }
            if seen.insert(v.name.as_str(), j).is_some() {
                return Err(Error::Validation(format!("duplicate variable name '{}'", v.name)));
            }
            let col = x.col(j);
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "non-finite value in column '{}' at row {}",
                    v.name, i
                )));
            }
            if v.group.is_category() {
                if let Some(i) = col.iter().position(|&c| c != 0.0 && c != 1.0) {
                    return Err(Error::Validation(format!(
                        "category column '{}' has value {} at row {} (expected 0 or 1)",
                        v.name, col[i], i
                    )));
                }
            }
        }
        for (i, &yi) in y.iter().enumerate() {
            if !yi.is_finite() || yi.fract() != 0.0 {
                return Err(Error::Validation(format!("y at row {i} is not an integer: {yi}")));
            }
            if yi == 0.0 {
                return Err(Error::Validation(format!(
                    "y at row {i} is 0; every visit is to exactly one store"
                )));
            }
        }
        Ok(Self { x, y, vars })
    }

    /// Builds a dataset without the store-choice checks on `y` and the 0/1
    /// check on category columns. For regression utilities and tests that work
    /// on arbitrary real data.
    pub fn from_parts_unchecked(x: Matrix, y: Vec<f64>, vars: Vec<VariableMeta>) -> Self {
        assert_eq!(x.rows(), y.len());
        assert_eq!(x.cols(), vars.len());
        Self { x, y, vars }
    }

    /// Convenience constructor for real-valued data with every column in group `C`.
    pub fn from_columns_unchecked(columns: &[Vec<f64>], y: Vec<f64>) -> Self {
        let vars = (0..columns.len())
            .map(|j| VariableMeta {
                index: j,
                name: format!("x{j}"),
                group: Group::C,
            })
            .collect();
        Self::from_parts_unchecked(Matrix::from_columns(y.len(), columns), y, vars)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.vars.len()
    }

    #[inline]
    pub fn x(&self) -> &Matrix {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        self.x.col(j)
    }

    pub fn vars(&self) -> &[VariableMeta] {
        &self.vars
    }

    pub fn name(&self, j: usize) -> &str {
        &self.vars[j].name
    }

    pub fn group(&self, j: usize) -> Group {
        self.vars[j].group
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Row subset, keeping all columns.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            vars: self.vars.clone(),
        }
    }

    /// Column subset; indices in the result are renumbered from 0.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        let vars = cols
            .iter()
            .enumerate()
            .map(|(new, &old)| VariableMeta {
                index: new,
                ..self.vars[old].clone()
            })
            .collect();
        Dataset {
            x: self.x.select_columns(cols),
            y: self.y.clone(),
            vars,
        }
    }
}

/// Outcome of [`drop_redundant`].
#[derive(Debug, Clone)]
pub struct Reduced {
    pub dataset: Dataset,
    pub dropped: Vec<String>,
    /// Original index of every retained column, in order.
    pub kept: Vec<usize>,
}

/// Removes columns that are zero in every sample.
pub fn drop_redundant(ds: &Dataset) -> Reduced {
    drop_columns_where(ds, |col| col.iter().all(|&v| v == 0.0))
}

/// Removes columns that take a single value across all samples. Used per
/// training fold, where a column can be constant without being all-zero.
pub fn drop_constant(ds: &Dataset) -> Reduced {
    drop_columns_where(ds, |col| col.iter().all(|&v| v == col[0]))
}

fn drop_columns_where(ds: &Dataset, redundant: impl Fn(&[f64]) -> bool) -> Reduced {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..ds.p() {
        if redundant(ds.column(j)) {
            dropped.push(ds.name(j).to_string());
        } else {
            kept.push(j);
        }
    }
    let dataset = if dropped.is_empty() {
        ds.clone()
    } else {
        ds.select_columns(&kept)
    };
    Reduced {
        dataset,
        dropped,
        kept,
    }
}
