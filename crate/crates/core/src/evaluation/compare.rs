use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{cross_validate, CvConfig, CvReport, Method};
use crate::datakit::{Dataset, Hierarchy, Mode};
use crate::error::{Error, Result};

/// Version tag of the JSON comparison document.
pub const SCHEMA: &str = "cvreport/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Method id, or `strong/weak` for a merged row.
    pub label: String,
    pub s: usize,
    pub report: CvReport,
    pub best_r2: bool,
    pub best_rmse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema: String,
    pub k: usize,
    pub seed: u64,
    pub time_limit_s: Option<f64>,
    /// Strong and weak were reported as one row because no chain has a
    /// small member, which makes the two constraint sets identical.
    pub merged_strong_weak: bool,
    pub s_values: Vec<usize>,
    pub labels: Vec<String>,
    pub rows: Vec<ComparisonRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

/// Cross-validates every method at every `s` and marks the best mean R² and
/// RMSE within each `s`.
pub fn compare(
    ds: &Dataset,
    hierarchy: &Hierarchy,
    methods: &[Method],
    s_values: &[usize],
    cfg: &CvConfig,
) -> Result<Comparison> {
    if methods.is_empty() || s_values.is_empty() {
        return Err(Error::Config("compare needs at least one method and one s".into()));
    }
    let mut unique: Vec<Method> = Vec::new();
    for &m in methods {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    let strong = Method::Exact(Mode::Strong);
    let weak = Method::Exact(Mode::Weak);
    let merged = !hierarchy.has_small_members() && unique.contains(&strong) && unique.contains(&weak);
    let entries: Vec<(String, Method)> = unique
        .iter()
        .filter(|&&m| !(merged && m == weak))
        .map(|&m| {
            let label = if merged && m == strong { "strong/weak".to_string() } else { m.id() };
            (label, m)
        })
        .collect();

    let mut rows = Vec::new();
    for &s in s_values {
        let start = rows.len();
        for (label, m) in &entries {
            rows.push(ComparisonRow {
                label: label.clone(),
                s,
                report: cross_validate(ds, hierarchy, *m, s, cfg)?,
                best_r2: false,
                best_rmse: false,
            });
        }
        mark_best(&mut rows[start..]);
    }
    Ok(Comparison {
        schema: SCHEMA.to_string(),
        k: cfg.k,
        seed: cfg.seed,
        time_limit_s: cfg.time_limit.map(|d| d.as_secs_f64()),
        merged_strong_weak: merged,
        s_values: s_values.to_vec(),
        labels: entries.into_iter().map(|(l, _)| l).collect(),
        rows,
        manifest: None,
    })
}

fn mark_best(group: &mut [ComparisonRow]) {
    let best_r2 = group.iter().filter_map(|r| r.report.mean_r2).reduce(f64::max);
    let best_rmse = group.iter().filter_map(|r| r.report.mean_rmse).reduce(f64::min);
    for r in group {
        r.best_r2 = best_r2.is_some() && r.report.mean_r2 == best_r2;
        r.best_rmse = best_rmse.is_some() && r.report.mean_rmse == best_rmse;
    }
}

impl Comparison {
    pub fn row(&self, label: &str, s: usize) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label && r.s == s)
    }

    /// Aligned text table: one line per method, one column group per `s`.
    /// The best R² and RMSE within each `s` carry a trailing `*`.
    pub fn render_text(&self) -> String {
        let fmt_cell = |v: Option<f64>, digits: usize, best: bool| match v {
            Some(x) => format!("{x:.digits$}{}", if best { "*" } else { " " }),
            None => "n/a ".to_string(),
        };
        let mut header = vec!["Method".to_string()];
        for s in &self.s_values {
            header.push(format!("R² (s={s})"));
            header.push("RMSE".into());
            header.push("Time (s)".into());
        }
        let mut table = vec![header];
        for label in &self.labels {
            let mut line = vec![label.clone()];
            for &s in &self.s_values {
                match self.row(label, s) {
                    Some(r) => {
                        line.push(fmt_cell(r.report.mean_r2, 4, r.best_r2));
                        line.push(fmt_cell(r.report.mean_rmse, 4, r.best_rmse));
                        line.push(fmt_cell(r.report.mean_time, 1, false));
                    }
                    None => line.extend(["-".to_string(), "-".into(), "-".into()]),
                }
            }
            table.push(line);
        }
        let ncol = table[0].len();
        let widths: Vec<usize> = (0..ncol)
            .map(|c| table.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in table.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                let pad = widths[c] - cell.chars().count();
                if c == 0 {
                    out.push_str(cell);
                    out.push_str(&" ".repeat(pad));
                } else {
                    out.push_str("  ");
                    out.push_str(&" ".repeat(pad));
                    out.push_str(cell);
                }
            }
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (ncol - 1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        let _ = writeln!(out, "* best value for the given s; {}-fold CV, seed {}", self.k, self.seed);
        for r in &self.rows {
            if let Some(note) = &r.report.note {
                let _ = writeln!(out, "note ({}, s={}): {note}", r.label, r.s);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
