//! Maximal operators over sampled dilation sets, Littlewood–Paley pieces and
//! Sobolev norms.

use super::bilinear::PreparedPair;
use super::grid::{signed_freq, GridFunction};
use super::symbols::{lp_band_weight, MultiplierSpec};
use super::EngineError;
use crate::fractal_sets::DilationSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// Default dilation sampling step: a quarter of a grid cell.
pub fn default_resolution(f: &GridFunction) -> f64 {
    f.period() / (4.0 * f.side() as f64)
}

/// Left endpoints of the minimal `resolution`-cover of `set`.
pub fn dilation_samples(set: &DilationSet, resolution: f64) -> Result<Vec<f64>, EngineError> {
    Ok(set.cover_points(resolution)?)
}

fn sup_into(acc: &mut [f64], out: &GridFunction) {
    for (a, v) in acc.iter_mut().zip(out.samples()) {
        *a = a.max(v.norm());
    }
}

fn to_grid(acc: Vec<f64>, like: &PreparedPair) -> Result<GridFunction, EngineError> {
    GridFunction::new(
        like.dim(),
        like.side(),
        like.period(),
        acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// Pointwise sup of `|T_{m_t}(f, g)|` over the sampled `t ∈ E`.
pub fn maximal_over_dilations(
    f: &GridFunction,
    g: &GridFunction,
    m: &MultiplierSpec,
    set: &DilationSet,
    resolution: f64,
) -> Result<GridFunction, EngineError> {
    let pair = PreparedPair::new(f, g)?;
    maximal_prepared(&pair, m, &dilation_samples(set, resolution)?)
}

/// Pointwise sup over explicit dilations, with spectra already prepared.
pub fn maximal_prepared(pair: &PreparedPair, m: &MultiplierSpec, ts: &[f64]) -> Result<GridFunction, EngineError> {
    biparameter_prepared(pair, m, ts.iter().map(|&t| (t, t)))
}

fn biparameter_prepared(
    pair: &PreparedPair,
    m: &MultiplierSpec,
    ts: impl IntoIterator<Item = (f64, f64)>,
) -> Result<GridFunction, EngineError> {
    let mut acc = vec![0.0; pair.side().pow(pair.dim() as u32)];
    for (t1, t2) in ts {
        sup_into(&mut acc, &pair.apply(m, t1, t2)?);
    }
    to_grid(acc, pair)
}

/// Sup over `t 2^l` for `t` sampled from `E` and `l` in `l_range`.
pub fn multiscale_maximal(
    f: &GridFunction,
    g: &GridFunction,
    m: &MultiplierSpec,
    set: &DilationSet,
    l_range: RangeInclusive<i32>,
    resolution: f64,
) -> Result<GridFunction, EngineError> {
    let [lo, hi] = set.hull();
    let (h, quarter) = (f.spacing(), f.period() / 4.0);
    if l_range.is_empty() {
        return Err(EngineError::GridRange("empty scale range".into()));
    }
    for l in l_range.clone() {
        let s = 2f64.powi(l);
        if s * lo < h * (1.0 - 1e-12) || s * hi > quarter * (1.0 + 1e-12) {
            return Err(EngineError::GridRange(format!(
                "scale 2^{l} maps E outside [{h}, {quarter}]"
            )));
        }
    }
    let ts = dilation_samples(set, resolution)?;
    let pair = PreparedPair::new(f, g)?;
    let all: Vec<f64> = l_range
        .flat_map(|l| ts.iter().map(move |&t| t * 2f64.powi(l)))
        .collect();
    maximal_prepared(&pair, m, &all)
}

/// Sup over `(t1, t2) ∈ E1 × E2` with the symbol evaluated at `(t1 ξ, t2 η)`.
pub fn biparameter_maximal(
    f: &GridFunction,
    g: &GridFunction,
    m: &MultiplierSpec,
    e1: &DilationSet,
    e2: &DilationSet,
    resolution: f64,
) -> Result<GridFunction, EngineError> {
    let t1s = dilation_samples(e1, resolution)?;
    let t2s = dilation_samples(e2, resolution)?;
    let pair = PreparedPair::new(f, g)?;
    biparameter_prepared(
        &pair,
        m,
        t1s.iter().flat_map(|&a| t2s.iter().map(move |&b| (a, b))),
    )
}

/// Pair of dyadic band indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PieceIndex {
    pub i: u32,
    pub j: u32,
}

/// Highest band whose scale `2^i` stays below the Nyquist frequency.
pub fn max_band(f: &GridFunction) -> u32 {
    let nyq = f.side() as f64 / (2.0 * f.period());
    if nyq < 1.0 {
        return 0;
    }
    nyq.log2().floor() as u32
}

/// Multiplies `f̂` by `φ̂(ξ)` (i = 0) or `ψ̂(2^{−i} ξ)` (i ≥ 1).
pub fn littlewood_paley_piece(f: &GridFunction, i: u32) -> Result<GridFunction, EngineError> {
    let nyq = f.side() as f64 / (2.0 * f.period());
    if 2f64.powi(i as i32) > nyq {
        return Err(EngineError::BandExceedsGrid { band: i, nyquist: nyq });
    }
    radial_multiplier(f, |r| lp_band_weight(i, r))
}

/// `(f^i, g^j)` for a piece index.
pub fn piece_pair(f: &GridFunction, g: &GridFunction, idx: PieceIndex) -> Result<(GridFunction, GridFunction), EngineError> {
    Ok((littlewood_paley_piece(f, idx.i)?, littlewood_paley_piece(g, idx.j)?))
}

/// Linear Fourier multiplier depending on the physical `|ξ|` only.
pub fn radial_multiplier(f: &GridFunction, w: impl Fn(f64) -> f64) -> Result<GridFunction, EngineError> {
    let (dim, side, period) = (f.dim(), f.side(), f.period());
    let mut c = f.coefficients();
    let mut k = vec![0i64; dim];
    for (flat, v) in c.iter_mut().enumerate() {
        signed_freq(flat, dim, side, &mut k);
        let r = (k.iter().map(|x| x * x).sum::<i64>() as f64).sqrt() / period;
        *v *= w(r);
    }
    GridFunction::from_coefficients(dim, side, period, c)
}

/// `‖(1 + |ξ|²)^{−s/2} f̂‖_{L²}` with the continuous-frequency weight.
pub fn sobolev_norm(f: &GridFunction, s: f64) -> f64 {
    let (dim, side, period) = (f.dim(), f.side(), f.period());
    let c = f.coefficients();
    let mut k = vec![0i64; dim];
    let mut total = 0.0;
    for (flat, v) in c.iter().enumerate() {
        signed_freq(flat, dim, side, &mut k);
        let r2 = k.iter().map(|x| x * x).sum::<i64>() as f64 / (period * period);
        total += (1.0 + r2).powf(-s) * v.norm_sqr();
    }
    (total * period.powi(dim as i32)).sqrt()
}
