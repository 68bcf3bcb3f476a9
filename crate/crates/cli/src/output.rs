//! Fixed-format writers: every float goes out in scientific notation with 12 significant digits.

use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::CliError;

/// `x` with 12 significant digits, e.g. `-4.47495661108e0`.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// A float that serializes rounded to 12 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn rounded(self) -> Option<f64> {
        self.0.is_finite().then(|| sci(self.0).parse().expect("formatted float parses"))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.rounded() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_none(),
        }
    }
}

pub fn nums(values: &[f64]) -> Vec<Num> {
    values.iter().copied().map(Num).collect()
}

pub fn opt_num(value: Option<f64>) -> Option<Num> {
    value.map(Num)
}

/// Writes a CSV file with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
