//! JSON channel description.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "fig3",
//!   "input_alphabet": ["0", "1"],
//!   "output_alphabet": ["0", "1"],
//!   "star": "0",
//!   "rows": [[0.9, 0.1], [0.1, 0.9]]
//! }
//! ```
//!
//! Probabilities may be JSON numbers or decimal strings.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::Channel;

pub const SCHEMA_VERSION: u32 = 1;

const BUNDLED: [(&str, &str); 3] = [
    ("fig3", include_str!("../channels/fig3.json")),
    ("fig4", include_str!("../channels/fig4.json")),
    ("zchannel", include_str!("../channels/zchannel.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Number(f64),
    Text(String),
}

impl Prob {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Prob::Number(v) => Ok(*v),
            Prob::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("'{s}' is not a decimal number")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub schema_version: u32,
    pub name: String,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: Vec<String>,
    /// Label of the no-input symbol.
    pub star: String,
    pub rows: Vec<Vec<Prob>>,
}

impl ChannelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidChannel(format!("malformed channel file: {e}")))?;
        file.to_channel()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Reads `arg` as a path, falling back to a bundled channel of that name
    /// (with or without a `.json` suffix) when no such file exists.
    pub fn load(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.exists() {
            return Self::read(path);
        }
        let stem = arg.strip_suffix(".json").unwrap_or(arg);
        bundled(stem).ok_or_else(|| Error::Io(format!("no such file or bundled channel: {arg}")))
    }

    pub fn to_channel(&self) -> Result<Channel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidChannel(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        check_labels("input", &self.input_alphabet)?;
        check_labels("output", &self.output_alphabet)?;
        let star = self
            .input_alphabet
            .iter()
            .position(|l| *l == self.star)
            .ok_or_else(|| Error::InvalidChannel(format!("star '{}' is not an input label", self.star)))?;
        if self.rows.len() != self.input_alphabet.len() {
            return Err(Error::InvalidChannel(format!(
                "{} rows for {} input labels",
                self.rows.len(),
                self.input_alphabet.len()
            )));
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.output_alphabet.len() {
                return Err(Error::InvalidChannelRow {
                    row: i,
                    reason: format!("{} entries for {} output labels", row.len(), self.output_alphabet.len()),
                });
            }
            let values = row
                .iter()
                .map(Prob::value)
                .collect::<std::result::Result<Vec<f64>, String>>()
                .map_err(|reason| Error::InvalidChannelRow { row: i, reason })?;
            rows.push(values);
        }
        Channel::new(rows, star)
    }

    pub fn from_channel(name: &str, q: &Channel) -> Self {
        let labels = |k: usize| (0..k).map(|i| i.to_string()).collect::<Vec<_>>();
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            input_alphabet: labels(q.inputs()),
            output_alphabet: labels(q.outputs()),
            star: q.star().to_string(),
            rows: q
                .rows()
                .iter()
                .map(|r| r.probs().iter().map(|&p| Prob::Number(p)).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel files always serialize")
    }
}

fn check_labels(kind: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidChannel(format!("empty {kind} alphabet")));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidChannel(format!("duplicate {kind} label '{l}'")));
        }
    }
    Ok(())
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled(name: &str) -> Option<ChannelFile> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ChannelFile::parse(text).expect("bundled channels are valid"))
}
