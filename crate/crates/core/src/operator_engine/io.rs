//! Flat binary grid files with a JSON sidecar.
//!
//! Layout: `dim`, `side` as little-endian `u64`, `period` as little-endian
//! `f64`, then `side^dim` samples as interleaved little-endian `f64` pairs.

use super::grid::GridFunction;
use super::EngineError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub format: String,
    pub dim: usize,
    pub side: usize,
    pub period: f64,
    pub samples: usize,
    pub l2_norm: f64,
}

const HEADER: usize = 24;

pub fn to_bytes(f: &GridFunction) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 16 * f.len());
    out.extend_from_slice(&(f.dim() as u64).to_le_bytes());
    out.extend_from_slice(&(f.side() as u64).to_le_bytes());
    out.extend_from_slice(&f.period().to_le_bytes());
    for v in f.samples() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<GridFunction, EngineError> {
    if bytes.len() < HEADER {
        return Err(EngineError::Format("truncated header".into()));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&bytes[i * 8..i * 8 + 8]).expect("eight bytes");
    let dim = u64::from_le_bytes(word(0)) as usize;
    let side = u64::from_le_bytes(word(1)) as usize;
    let period = f64::from_le_bytes(word(2));
    super::grid::check_shape(dim, side, period)?;
    let len = side.pow(dim as u32);
    if bytes.len() != HEADER + 16 * len {
        return Err(EngineError::Format(format!(
            "expected {} payload bytes, found {}",
            16 * len,
            bytes.len() - HEADER
        )));
    }
    let samples = (0..len)
        .map(|k| Complex64::new(f64::from_le_bytes(word(3 + 2 * k)), f64::from_le_bytes(word(4 + 2 * k))))
        .collect();
    GridFunction::new(dim, side, period, samples)
}

pub fn sidecar(f: &GridFunction) -> GridSidecar {
    GridSidecar {
        format: "fracmax-grid-v1".into(),
        dim: f.dim(),
        side: f.side(),
        period: f.period(),
        samples: f.len(),
        l2_norm: f.l2_norm(),
    }
}
