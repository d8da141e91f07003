//! Model bundles.
//!
//! Layout: magic `ADDLM1\0\0`, a `u64` little-endian manifest length, the
//! UTF-8 JSON manifest, then the blocks `D_1…D_c`, `P_1…P_c`, `W_1…W_c` as
//! little-endian `f64` in column-major order.

use std::fs;
use std::path::Path;

use addl_core::{AddlModel, Hyperparams, Matrix, StopReason};
use serde::{Deserialize, Serialize};

use crate::formats::Reader;
use crate::pipeline::Preprocess;
use crate::{Error, Result};

pub const BUNDLE_MAGIC: &[u8; 8] = b"ADDLM1\0\0";
pub const BUNDLE_VERSION: u32 = 1;

/// A trained model together with the preprocessing that produced its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub model: AddlModel,
    pub preprocess: Preprocess,
    /// Iterations run before stopping.
    pub iterations: usize,
    pub stop_reason: StopReason,
}

impl Bundle {
    /// Feature dimension of raw input data, before preprocessing.
    pub fn input_dim(&self) -> usize {
        self.preprocess.pca.as_ref().map_or(self.model.dim, |p| p.dim())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    classes: usize,
    dim: usize,
    atoms_per_class: usize,
    hyper: Hyperparams,
    seed: u64,
    iterations: usize,
    stop_reason: StopReason,
    preprocess: Preprocess,
    payload_bytes: usize,
}

fn payload_len(c: usize, n: usize, k: usize) -> usize {
    // D: n×k, P: k×n, W: c×k per class
    c * (2 * n * k + c * k) * 8
}

pub fn encode_bundle(bundle: &Bundle) -> Result<Vec<u8>> {
    let m = &bundle.model;
    m.validate()?;
    let manifest = Manifest {
        version: BUNDLE_VERSION,
        classes: m.class_count,
        dim: m.dim,
        atoms_per_class: m.hyper.k,
        hyper: m.hyper,
        seed: m.hyper.seed,
        iterations: bundle.iterations,
        stop_reason: bundle.stop_reason,
        preprocess: bundle.preprocess.clone(),
        payload_bytes: payload_len(m.class_count, m.dim, m.hyper.k),
    };
    let json = serde_json::to_vec(&manifest).map_err(|e| Error::Manifest(e.to_string()))?;
    let mut out = Vec::with_capacity(16 + json.len() + manifest.payload_bytes);
    out.extend_from_slice(BUNDLE_MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for block in m.d.iter().chain(&m.p).chain(&m.w) {
        for v in block.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_bundle(bytes: &[u8]) -> Result<Bundle> {
    let mut r = Reader::new(bytes);
    if r.take(8).map_err(|_| Error::NotABundle)? != BUNDLE_MAGIC {
        return Err(Error::NotABundle);
    }
    let len = r.u64()? as usize;
    let manifest: Manifest = serde_json::from_slice(r.take(len)?).map_err(|e| Error::Manifest(e.to_string()))?;
    if manifest.version != BUNDLE_VERSION {
        return Err(Error::UnsupportedVersion(manifest.version));
    }
    let (c, n, k) = (manifest.classes, manifest.dim, manifest.atoms_per_class);
    if k != manifest.hyper.k || manifest.seed != manifest.hyper.seed {
        return Err(Error::Manifest("atoms_per_class/seed disagree with hyperparameters".into()));
    }
    let expected = payload_len(c, n, k);
    if manifest.payload_bytes != expected {
        return Err(Error::PayloadLength { declared: manifest.payload_bytes, actual: expected });
    }
    if r.remaining() != manifest.payload_bytes {
        return Err(Error::PayloadLength { declared: manifest.payload_bytes, actual: r.remaining() });
    }
    let blocks = |r: &mut Reader, rows: usize, cols: usize| -> Result<Vec<Matrix>> {
        (0..c).map(|_| r.f64_matrix(rows, cols)).collect()
    };
    let d = blocks(&mut r, n, k)?;
    let p = blocks(&mut r, k, n)?;
    let w = blocks(&mut r, c, k)?;
    let model = AddlModel { class_count: c, dim: n, hyper: manifest.hyper, d, p, w };
    model.validate()?;
    Ok(Bundle { model, preprocess: manifest.preprocess, iterations: manifest.iterations, stop_reason: manifest.stop_reason })
}

pub fn save_model(bundle: &Bundle, path: &Path) -> Result<()> {
    let bytes = encode_bundle(bundle)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Bundle> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_bundle(&bytes)
}
