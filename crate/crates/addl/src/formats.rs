//! Dataset files.
//!
//! CSV: one sample per line, `label,f_1,…,f_n`, no header, `\n` endings.
//! Binary: magic `ADDLDS1\0`, little-endian `u64 n`, `u64 N`, `u64 c`, then
//! `N` labels as `u32`, then the `n × N` features as `f64`, column-major.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use addl_core::{LabeledDataset, Matrix};

use crate::{Error, Result};

pub const DATASET_MAGIC: &[u8; 8] = b"ADDLDS1\0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Bin,
}

impl DatasetFormat {
    /// `.bin` files are binary, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => DatasetFormat::Bin,
            _ => DatasetFormat::Csv,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            DatasetFormat::Csv => "csv",
            DatasetFormat::Bin => "bin",
        }
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<LabeledDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        DatasetFormat::Csv => {
            let text = String::from_utf8(bytes).map_err(|_| Error::Invalid("dataset is not UTF-8 text".into()))?;
            parse_csv(&text)
        }
        DatasetFormat::Bin => decode_bin(&bytes),
    }
}

pub fn save_dataset(ds: &LabeledDataset, path: &Path, format: DatasetFormat) -> Result<()> {
    let bytes = match format {
        DatasetFormat::Csv => to_csv(ds).into_bytes(),
        DatasetFormat::Bin => encode_bin(ds),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<LabeledDataset> {
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut dim = None;
    for (i, raw) in text.split('\n').enumerate() {
        let line = i + 1;
        let row = raw.strip_suffix('\r').unwrap_or(raw);
        if row.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line, message };
        let mut fields = row.split(',');
        let label_field = fields.next().unwrap_or_default().trim();
        let label: usize =
            label_field.parse().map_err(|_| parse_err(format!("invalid label {label_field:?}")))?;
        if label > u32::MAX as usize {
            return Err(parse_err(format!("label {label} out of range")));
        }
        let start = values.len();
        for field in fields {
            let v: f64 = field.trim().parse().map_err(|_| parse_err(format!("invalid value {:?}", field.trim())))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value {:?}", field.trim())));
            }
            values.push(v);
        }
        let n = values.len() - start;
        match dim {
            None if n == 0 => return Err(parse_err("row has no features".into())),
            None => dim = Some(n),
            Some(d) if d != n => return Err(parse_err(format!("expected {d} features, found {n}"))),
            _ => {}
        }
        labels.push(label);
    }
    let n = dim.ok_or_else(|| Error::Invalid("dataset has no samples".into()))?;
    let features = Matrix::from_column_slice(n, labels.len(), &values);
    Ok(LabeledDataset::from_labels(features, labels)?)
}

pub fn to_csv(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    for (col, label) in ds.features().column_iter().zip(ds.labels()) {
        write!(out, "{label}").unwrap();
        for v in col.iter() {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn encode_bin(ds: &LabeledDataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + ds.len() * 4 + ds.features().len() * 8);
    out.extend_from_slice(DATASET_MAGIC);
    for v in [ds.dim(), ds.len(), ds.class_count()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for &l in ds.labels() {
        out.extend_from_slice(&(l as u32).to_le_bytes());
    }
    for v in ds.features().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Little-endian cursor over a byte slice.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, at: 0 }
    }

    pub(crate) fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.at..end];
                self.at = end;
                Ok(out)
            }
            None => Err(Error::Truncated { needed: self.at.saturating_add(len), found: self.bytes.len() }),
        }
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.at
    }

    pub(crate) fn f64_matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let len = rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).ok_or(Error::Invalid("matrix too large".into()))?;
        let raw = self.take(len)?;
        Ok(Matrix::from_iterator(rows, cols, raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()))))
    }
}

pub fn decode_bin(bytes: &[u8]) -> Result<LabeledDataset> {
    let mut r = Reader::new(bytes);
    if r.take(8).map_err(|_| Error::NotADataset)? != DATASET_MAGIC {
        return Err(Error::NotADataset);
    }
    let n = r.u64()? as usize;
    let count = r.u64()? as usize;
    let c = r.u64()? as usize;
    let raw = r.take(count.checked_mul(4).ok_or(Error::Invalid("sample count too large".into()))?)?;
    let labels = raw.chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize).collect();
    let features = r.f64_matrix(n, count)?;
    if r.remaining() != 0 {
        return Err(Error::Invalid(format!("{} trailing bytes after features", r.remaining())));
    }
    Ok(LabeledDataset::new(features, labels, c)?)
}
