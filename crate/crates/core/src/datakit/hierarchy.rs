use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dataset, Group};
use crate::error::{Error, Result};

/// Which hierarchical constraints a selection must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Cardinality only.
    Basic,
    /// `z_large >= z_medium >= z_small` for every chain.
    Strong,
    /// `z_large >= z_medium` and `z_large + z_medium >= z_small` for every chain.
    Weak,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Basic, Mode::Strong, Mode::Weak];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Basic => "basic",
            Mode::Strong => "strong",
            Mode::Weak => "weak",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "basic" => Ok(Mode::Basic),
            "strong" => Ok(Mode::Strong),
            "weak" => Ok(Mode::Weak),
            other => Err(Error::Config(format!("unknown hierarchy mode '{other}'"))),
        }
    }
}

/// One containment chain: large category `large` contains medium `medium`,
/// which contains small `small`. A chain without a small member encodes a
/// bare large/medium containment (datasets without small categories).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub large: usize,
    pub medium: usize,
    pub small: Option<usize>,
}

impl Triple {
    pub fn new(large: usize, medium: usize, small: usize) -> Self {
        Self {
            large,
            medium,
            small: Some(small),
        }
    }

    pub fn pair(large: usize, medium: usize) -> Self {
        Self {
            large,
            medium,
            small: None,
        }
    }

    /// Whether `support` satisfies this chain's inequalities under `mode`.
    pub fn admits(&self, support: &[bool], mode: Mode) -> bool {
        let z1 = support[self.large] as u8;
        let z2 = support[self.medium] as u8;
        let z3 = self.small.map_or(0, |j| support[j] as u8);
        match mode {
            Mode::Basic => true,
            Mode::Strong => z1 >= z2 && z2 >= z3,
            Mode::Weak => z1 >= z2 && z1 + z2 >= z3,
        }
    }
}

/// Set of category containment chains.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hierarchy {
    triples: Vec<Triple>,
}

impl Hierarchy {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates groups against `ds` and uniqueness of every small category's
    /// parent chain and every medium category's large parent.
    pub fn new(triples: Vec<Triple>, ds: &Dataset) -> Result<Self> {
        let mut small_parent: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut medium_parent: HashMap<usize, usize> = HashMap::new();
        let mut set = BTreeSet::new();
        for t in &triples {
            check_member(ds, t.large, Group::L, 1)?;
            check_member(ds, t.medium, Group::M, 2)?;
            if let Some(s) = t.small {
                check_member(ds, s, Group::S, 3)?;
                if let Some(&(l, m)) = small_parent.get(&s) {
                    if (l, m) != (t.large, t.medium) || set.contains(t) {
                        return Err(Error::Validation(format!(
                            "small category '{}' appears in more than one chain",
                            ds.name(s)
                        )));
                    }
                }
                small_parent.insert(s, (t.large, t.medium));
            }
            if let Some(&l) = medium_parent.get(&t.medium) {
                if l != t.large {
                    return Err(Error::Validation(format!(
                        "medium category '{}' has two large parents ('{}' and '{}')",
                        ds.name(t.medium),
                        ds.name(l),
                        ds.name(t.large)
                    )));
                }
            }
            medium_parent.insert(t.medium, t.large);
            set.insert(*t);
        }
        Ok(Self {
            triples: set.into_iter().collect(),
        })
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Strong and weak constraints coincide when no chain carries a small member.
    pub fn has_small_members(&self) -> bool {
        self.triples.iter().any(|t| t.small.is_some())
    }

    pub fn admits(&self, support: &[bool], mode: Mode) -> bool {
        mode == Mode::Basic || self.triples.iter().all(|t| t.admits(support, mode))
    }

    /// Re-indexes the hierarchy after columns were removed. `kept[new] = old`.
    ///
    /// A chain whose medium member was removed is dropped; a removed small
    /// member degrades the chain to its large/medium pair. A removed large
    /// member is an error when `strict`, otherwise the chain is dropped.
    pub fn remap(&self, kept: &[usize], strict: bool) -> Result<Hierarchy> {
        let old_to_new: HashMap<usize, usize> =
            kept.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut out = BTreeSet::new();
        for t in &self.triples {
            let Some(&large) = old_to_new.get(&t.large) else {
                if strict && (old_to_new.contains_key(&t.medium) || t.small.is_some_and(|s| old_to_new.contains_key(&s))) {
                    return Err(Error::Validation(format!(
                        "large category (column {}) was removed while its sub-categories remain",
                        t.large
                    )));
                }
                continue;
            };
            let Some(&medium) = old_to_new.get(&t.medium) else {
                continue;
            };
            let small = t.small.and_then(|s| old_to_new.get(&s).copied());
            out.insert(Triple {
                large,
                medium,
                small,
            });
        }
        Ok(Hierarchy {
            triples: out.into_iter().collect(),
        })
    }

    /// Renders in the `large,medium[,small]` file format.
    pub fn to_text(&self, ds: &Dataset) -> String {
        let mut s = String::new();
        for t in &self.triples {
            s.push_str(ds.name(t.large));
            s.push(',');
            s.push_str(ds.name(t.medium));
            if let Some(j) = t.small {
                s.push(',');
                s.push_str(ds.name(j));
            }
            s.push('\n');
        }
        s
    }
}

fn check_member(ds: &Dataset, j: usize, want: Group, position: usize) -> Result<()> {
    if j >= ds.p() {
        return Err(Error::Validation(format!("hierarchy references column {j} but p = {}", ds.p())));
    }
    if ds.group(j) != want {
        return Err(Error::Validation(format!(
            "'{}' in position {position} has group {} (expected {want})",
            ds.name(j),
            ds.group(j)
        )));
    }
    Ok(())
}

/// Parses lines `large_name,medium_name,small_name` (or `large_name,medium_name`).
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_hierarchy(text: &str, ds: &Dataset) -> Result<Hierarchy> {
    let mut triples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Validation(format!(
                "hierarchy line {}: expected 2 or 3 names, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let mut idx = Vec::with_capacity(3);
        for f in &fields {
            let j = ds.index_of(f).ok_or_else(|| {
                Error::Validation(format!("hierarchy line {}: unknown variable '{f}'", lineno + 1))
            })?;
            idx.push(j);
        }
        triples.push(Triple {
            large: idx[0],
            medium: idx[1],
            small: idx.get(2).copied(),
        });
    }
    // Exact duplicate lines naming a small category are rejected like any
    // other repeated small category.
    let mut smalls = BTreeSet::new();
    for t in &triples {
        if let Some(s) = t.small {
            if !smalls.insert(s) {
                return Err(Error::Validation(format!(
                    "small category '{}' appears in more than one chain",
                    ds.name(s)
                )));
            }
        }
    }
    Hierarchy::new(triples, ds)
}

pub fn load_hierarchy(path: impl AsRef<Path>, ds: &Dataset) -> Result<Hierarchy> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hierarchy(&text, ds)
}

pub fn write_hierarchy(h: &Hierarchy, ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, h.to_text(ds)).map_err(|e| Error::io(path, e))
}
