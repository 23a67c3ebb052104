use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, Group, VariableMeta};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Column name to group assignment, read from `name,group` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupingSpec {
    groups: HashMap<String, Group>,
}

impl GroupingSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, group: Group) {
        self.groups.insert(name.into(), group);
    }

    pub fn get(&self, name: &str) -> Option<Group> {
        self.groups.get(name).copied()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, group) = line.rsplit_once(',').ok_or_else(|| {
                Error::Validation(format!("grouping line {}: expected 'name,group'", lineno + 1))
            })?;
            let group = Group::parse(group).ok_or_else(|| {
                Error::Validation(format!(
                    "grouping line {}: unknown group '{}' (expected C, L, M or S)",
                    lineno + 1,
                    group.trim()
                ))
            })?;
            let name = name.trim();
            if spec.groups.insert(name.to_string(), group).is_some() {
                return Err(Error::Validation(format!("grouping lists '{name}' twice")));
            }
        }
        Ok(spec)
    }
}

pub fn load_grouping(path: impl AsRef<Path>) -> Result<GroupingSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GroupingSpec::parse(&text)
}

pub fn write_grouping(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::new();
    for v in ds.vars() {
        s.push_str(&format!("{},{}\n", v.name, v.group));
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Loads a data CSV. The header names every column; `y_col` names the
/// explained variable and every other column must appear in `spec`.
pub fn load_csv(path: impl AsRef<Path>, spec: &GroupingSpec, y_col: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, spec, y_col)
}

pub fn read_csv<R: Read>(reader: R, spec: &GroupingSpec, y_col: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Validation(format!("cannot read CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let y_pos = header
        .iter()
        .position(|h| h == y_col)
        .ok_or_else(|| Error::Validation(format!("header has no column named '{y_col}'")))?;

    let mut vars = Vec::new();
    let mut positions = Vec::new();
    for (pos, name) in header.iter().enumerate() {
        if pos == y_pos {
            continue;
        }
        let group = spec
            .get(name)
            .ok_or_else(|| Error::Validation(format!("column '{name}' has no group in the grouping spec")))?;
        vars.push(VariableMeta {
            index: vars.len(),
            name: name.clone(),
            group,
        });
        positions.push(pos);
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); vars.len()];
    let mut y = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let parse = |pos: usize| -> Result<f64> {
            let cell = &record[pos];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: header[pos].clone(),
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: header[pos].clone(),
                    message: format!("'{cell}' is not finite"),
                });
            }
            Ok(v)
        };
        y.push(parse(y_pos)?);
        for (c, &pos) in positions.iter().enumerate() {
            columns[c].push(parse(pos)?);
        }
    }
    let n = y.len();
    Dataset::new(Matrix::from_columns(n, &columns), y, vars)
}

/// Writes `ds` with `y_col` first; floats use shortest round-trip formatting.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>, y_col: &str) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        write!(w, "{y_col}")?;
        for v in ds.vars() {
            write!(w, ",{}", v.name)?;
        }
        writeln!(w)?;
        for i in 0..ds.n() {
            write!(w, "{}", ds.y()[i])?;
            for j in 0..ds.p() {
                write!(w, ",{}", ds.x().get(i, j))?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
