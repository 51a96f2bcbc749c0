// SPDX-License-Identifier: Apache-2.0

//! Corruption tables read from CSV with columns `t, arm, value`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub t: u64,
    pub arm: usize,
    pub value: f64,
}

/// Overrides `R~^t[arm] = value` for listed `(t, arm)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ScriptEntry>", into = "Vec<ScriptEntry>")]
pub struct ScriptTable {
    rows: BTreeMap<u64, Vec<(usize, f64)>>,
}

impl From<Vec<ScriptEntry>> for ScriptTable {
    fn from(entries: Vec<ScriptEntry>) -> Self {
        Self::from_entries(entries.into_iter().map(|e| (e.t, e.arm, e.value)))
    }
}

impl From<ScriptTable> for Vec<ScriptEntry> {
    fn from(table: ScriptTable) -> Self {
        table
            .rows
            .into_iter()
            .flat_map(|(t, row)| row.into_iter().map(move |(arm, value)| ScriptEntry { t, arm, value }))
            .collect()
    }
}

impl ScriptTable {
    pub fn from_entries(entries: impl IntoIterator<Item = (u64, usize, f64)>) -> Self {
        let mut rows: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
        for (t, arm, value) in entries {
            rows.entry(t).or_default().push((arm, value));
        }
        Self { rows }
    }

    pub fn from_reader(reader: impl Read, origin: &Path) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut entries = Vec::new();
        for row in csv.deserialize::<ScriptEntry>() {
            let entry = row.map_err(|e| Error::Format {
                path: origin.to_path_buf(),
                message: e.to_string(),
            })?;
            if entry.t == 0 || !entry.value.is_finite() {
                return Err(Error::Format {
                    path: origin.to_path_buf(),
                    message: format!("bad row t={} arm={} value={}", entry.t, entry.arm, entry.value),
                });
            }
            entries.push((entry.t, entry.arm, entry.value));
        }
        Ok(Self::from_entries(entries))
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    /// Number of distinct rounds touched.
    pub fn rounds(&self) -> usize {
        self.rows.len()
    }

    pub fn max_arm(&self) -> Option<usize> {
        self.rows.values().flatten().map(|&(arm, _)| arm).max()
    }

    pub(crate) fn apply(&self, t: u64, out: &mut [f64]) -> bool {
        match self.rows.get(&t) {
            Some(row) => {
                for &(arm, value) in row {
                    if let Some(slot) = out.get_mut(arm) {
                        *slot = value;
                    }
                }
                true
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let text = "t,arm,value\n3,1,0.0\n3,0,1.0\n5,1,0.25\n";
        let table = ScriptTable::from_reader(text.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(table.rounds(), 2);
        assert_eq!(table.max_arm(), Some(1));
        let mut out = [0.5, 0.5];
        assert!(!table.apply(1, &mut out));
        assert!(table.apply(3, &mut out));
        assert_eq!(out, [1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(ScriptTable::from_reader("t,arm,value\n0,1,0.0\n".as_bytes(), Path::new("m")).is_err());
        assert!(ScriptTable::from_reader("t,arm,value\n1,x,0.0\n".as_bytes(), Path::new("m")).is_err());
    }
}
