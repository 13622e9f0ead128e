//! Bilinear multiplier operators on periodic grids.
//!
//! Functions live on the torus `[0, L)^d` sampled at `n` points per axis. A
//! DFT index `k ∈ [−n/2, n/2)^d` stands for the physical frequency `k/L`, so
//! dilating a symbol is exact. Bilinear operators are computed in frequency
//! space by a direct sum over coefficient pairs, with output frequencies
//! wrapped modulo `n` (exact at grid points); symbols that factor into
//! unimodular pieces take a pointwise fast path instead.

mod bilinear;
mod grid;
pub mod io;
mod maximal;
mod measure;
mod slicing;
mod symbols;

pub use bilinear::{apply_bilinear_direct, apply_bilinear_multiplier, PreparedPair};
pub use grid::{GridFunction, MAX_DIM};
pub use maximal::{
    biparameter_maximal, default_resolution, dilation_samples, littlewood_paley_piece, max_band,
    maximal_over_dilations, maximal_prepared, multiscale_maximal, piece_pair, radial_multiplier,
    sobolev_norm, PieceIndex,
};
pub use measure::{
    biparameter_piece_decay, continuity_modulus, estimate_beta, measure_piece_decay, ContinuityReport,
    DecayConfig, DecayReport, Slot,
};
pub use slicing::{
    gauss_legendre, slicing_average, slicing_average_at, slicing_biparameter_at, SlicingQuadrature,
};
pub use symbols::{
    angular_weight, bessel_j, lp_band_weight, lp_cutoff, spherical_profile, spherical_symbol,
    triangle_envelope_symbol, CustomSymbol, MultiplierKind, MultiplierSpec, Structure,
};

use crate::fractal_sets::SetError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("grid shape mismatch")]
    ShapeMismatch,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("dilation {0} outside the supported range")]
    DilationOutOfRange(f64),
    #[error("band exceeds grid: 2^{band} is above the Nyquist frequency {nyquist}")]
    BandExceedsGrid { band: u32, nyquist: f64 },
    #[error("scale range exceeds grid dynamic range: {0}")]
    GridRange(String),
    #[error("shift not grid-aligned: {0}")]
    NotGridAligned(String),
    #[error("invalid symbol: {0}")]
    BadSymbol(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Set(#[from] SetError),
}
