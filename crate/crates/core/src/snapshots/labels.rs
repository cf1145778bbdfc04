use std::collections::HashMap;
use std::io::Read;

use super::Episode;
use crate::error::{Error, Result};

/// Externally supplied per-item metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Label {
    pub category: Option<String>,
    pub prehistory_s: Option<i64>,
}

/// Item labels keyed by name, read from CSV `name,category,prehistory_s`.
#[derive(Clone, Debug, Default)]
pub struct LabelTable {
    labels: HashMap<String, Label>,
}

impl LabelTable {
    pub fn insert(&mut self, name: impl Into<String>, label: Label) {
        self.labels.insert(name.into(), label);
    }

    pub fn get(&self, name: &str) -> Option<&Label> {
        self.labels.get(name)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
        let headers = reader.headers()?.clone();
        let col = |key: &str| headers.iter().position(|h| h.trim() == key);
        let name_col = col("name").ok_or_else(|| Error::Parse { line: 1, message: "labels need a `name` column".into() })?;
        let category_col = col("category");
        let prehistory_col = col("prehistory_s");

        let mut table = LabelTable::default();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |c: Option<usize>| c.and_then(|c| record.get(c)).map(str::trim).filter(|s| !s.is_empty());
            let name = field(Some(name_col)).ok_or_else(|| Error::Parse { line, message: "empty name".into() })?;
            let prehistory_s = field(prehistory_col)
                .map(|p| {
                    p.parse::<f64>()
                        .map(|v| v.round() as i64)
                        .map_err(|_| Error::Parse { line, message: format!("bad prehistory_s {p:?}") })
                })
                .transpose()?;
            table.insert(name, Label { category: field(category_col).map(str::to_owned), prehistory_s });
        }
        Ok(table)
    }
}

/// Copies category and prehistory onto every episode of a labeled item.
pub fn attach_labels(episodes: &mut [Episode], labels: &LabelTable) {
    for e in episodes {
        if let Some(l) = labels.get(&e.name) {
            e.category = l.category.clone();
            e.prehistory_s = l.prehistory_s;
        }
    }
}
