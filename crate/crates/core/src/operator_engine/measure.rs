//! Randomized measurements: decay of diagonal pieces and continuity moduli.

use super::bilinear::PreparedPair;
use super::grid::GridFunction;
use super::maximal::{dilation_samples, littlewood_paley_piece, maximal_prepared};
use super::symbols::MultiplierSpec;
use super::EngineError;
use crate::fit::{ols, ols2};
use crate::fractal_sets::{minkowski_dim_estimate, DilationSet};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Grid and sampling parameters for norm estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub side: usize,
    pub period: f64,
    /// Dilation sampling step; `None` uses a quarter grid cell.
    pub resolution: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Minkowski dimension of the set(s); estimated when absent.
    pub beta: Option<f64>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            side: 512,
            period: 8.0,
            resolution: None,
            trials: 32,
            seed: 0,
            beta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub multiplier: String,
    pub bands: Vec<u32>,
    /// Largest observed `‖A(f^i, g^i)‖₂ / (‖f^i‖₂ ‖g^i‖₂)` per band.
    pub norms: Vec<f64>,
    /// Least-squares slope of `log₂ norm` against the band index.
    pub slope: f64,
    pub fit_residual: f64,
    pub beta: f64,
    pub predicted_slope: f64,
    /// The predicted power law anchored at the first measured band.
    pub predicted_bound: Vec<f64>,
}

impl DecayReport {
    /// CSV with columns `i,norm_estimate,predicted_bound`.
    pub fn to_csv(&self) -> Result<String, EngineError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "norm_estimate", "predicted_bound"])
            .map_err(|e| EngineError::Format(e.to_string()))?;
        for k in 0..self.bands.len() {
            w.write_record([
                self.bands[k].to_string(),
                format!("{:e}", self.norms[k]),
                format!("{:e}", self.predicted_bound[k]),
            ])
            .map_err(|e| EngineError::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| EngineError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| EngineError::Format(e.to_string()))
    }
}

/// Minkowski dimension estimate used when a caller supplies none: 0 for a
/// point, otherwise the covering fit over `2^{-3} .. 2^{-10}` (limited by the
/// set's resolution).
pub fn estimate_beta(set: &DilationSet) -> f64 {
    if set.is_single_point() {
        return 0.0;
    }
    let floor = set.resolution();
    let grid: Vec<f64> = (3..=10)
        .map(|k| 2f64.powi(-k))
        .filter(|&d| d >= floor * (1.0 - 1e-9))
        .collect();
    minkowski_dim_estimate(set, &grid).map(|e| e.value).unwrap_or(0.0)
}

fn trial_rng(seed: u64, band: u32, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((band as u64) << 32) | trial as u64);
    rng
}

/// White Gaussian noise restricted to band `i`.
fn random_piece(dim: usize, cfg: &DecayConfig, i: u32, rng: &mut ChaCha8Rng) -> Result<GridFunction, EngineError> {
    let w = GridFunction::random_band_limited(dim, cfg.side, cfg.period, 0.0, f64::INFINITY, rng)?;
    littlewood_paley_piece(&w, i)
}

fn band_norms(
    m: &MultiplierSpec,
    diag_range: &[u32],
    cfg: &DecayConfig,
    dilations: &[(f64, f64)],
) -> Result<Vec<f64>, EngineError> {
    if diag_range.len() < 2 {
        return Err(EngineError::GridRange("need at least two bands to fit a slope".into()));
    }
    if cfg.trials == 0 {
        return Err(EngineError::GridRange("need at least one trial".into()));
    }
    let mut norms = Vec::with_capacity(diag_range.len());
    for &i in diag_range {
        let ratios: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<f64, EngineError> {
                let mut rng = trial_rng(cfg.seed, i, trial);
                let f = random_piece(m.dim, cfg, i, &mut rng)?;
                let g = random_piece(m.dim, cfg, i, &mut rng)?;
                let pair = PreparedPair::new(&f, &g)?;
                let mut acc = vec![0.0f64; f.len()];
                for &(t1, t2) in dilations {
                    for (a, v) in acc.iter_mut().zip(pair.apply(m, t1, t2)?.samples()) {
                        *a = a.max(v.norm());
                    }
                }
                let out = GridFunction::new(
                    f.dim(),
                    f.side(),
                    f.period(),
                    acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
                )?;
                let denom = f.l2_norm() * g.l2_norm();
                Ok(if denom > 0.0 { out.l2_norm() / denom } else { 0.0 })
            })
            .collect::<Result<_, _>>()?;
        norms.push(ratios.into_iter().fold(0.0, f64::max));
    }
    Ok(norms)
}

fn report(
    m: &MultiplierSpec,
    diag_range: &[u32],
    norms: Vec<f64>,
    beta: f64,
) -> DecayReport {
    let x: Vec<f64> = diag_range.iter().map(|&i| i as f64).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.max(1e-300).log2()).collect();
    let fit = ols(&x, &y);
    let predicted_slope = -(2.0 * m.decay_a_f64() - m.dim as f64 - beta) / 2.0;
    let i0 = x[0];
    let predicted_bound = x
        .iter()
        .map(|&i| norms[0] * 2f64.powf((i - i0) * predicted_slope))
        .collect();
    DecayReport {
        multiplier: m.name(),
        bands: diag_range.to_vec(),
        norms,
        slope: fit.slope,
        fit_residual: fit.residual,
        beta,
        predicted_slope,
        predicted_bound,
    }
}

/// Randomized lower estimates of `‖A^{i,i}_{m,E}‖_{L²×L²→L²}` and their slope in `i`.
pub fn measure_piece_decay(
    m: &MultiplierSpec,
    set: &DilationSet,
    diag_range: &[u32],
    cfg: &DecayConfig,
) -> Result<DecayReport, EngineError> {
    let res = cfg.resolution.unwrap_or(cfg.period / (4.0 * cfg.side as f64));
    let ts: Vec<(f64, f64)> = dilation_samples(set, res)?.into_iter().map(|t| (t, t)).collect();
    let norms = band_norms(m, diag_range, cfg, &ts)?;
    let beta = cfg.beta.unwrap_or_else(|| estimate_beta(set));
    Ok(report(m, diag_range, norms, beta))
}

/// Biparameter analogue over `E1 × E2`; the predicted slope uses `β1 + β2`.
pub fn biparameter_piece_decay(
    m: &MultiplierSpec,
    e1: &DilationSet,
    e2: &DilationSet,
    diag_range: &[u32],
    cfg: &DecayConfig,
) -> Result<DecayReport, EngineError> {
    let res = cfg.resolution.unwrap_or(cfg.period / (4.0 * cfg.side as f64));
    let t1 = dilation_samples(e1, res)?;
    let t2 = dilation_samples(e2, res)?;
    let ts: Vec<(f64, f64)> = t1.iter().flat_map(|&a| t2.iter().map(move |&b| (a, b))).collect();
    let norms = band_norms(m, diag_range, cfg, &ts)?;
    let beta = cfg.beta.unwrap_or_else(|| estimate_beta(e1) + estimate_beta(e2));
    Ok(report(m, diag_range, norms, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    First,
    Second,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub slot: Slot,
    /// `(|h1|, |h2|, ‖A(·,·)‖₂)`; `|h2|` is zero outside the two-slot mode.
    pub samples: Vec<(f64, f64, f64)>,
    pub gamma: f64,
    /// Exponent of the second shift in the two-slot fit.
    pub gamma2: Option<f64>,
}

fn shift_to_roll(f: &GridFunction, h: &[f64]) -> Result<Vec<i64>, EngineError> {
    if h.len() != f.dim() {
        return Err(EngineError::ShapeMismatch);
    }
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm >= 1.0 {
        return Err(EngineError::NotGridAligned(format!("shift of length {norm} is not below 1")));
    }
    let sp = f.spacing();
    h.iter()
        .map(|&v| {
            let k = (v / sp).round();
            if (v - k * sp).abs() > 1e-9 * sp.max(1.0) {
                Err(EngineError::NotGridAligned(format!("shift {v} is not a multiple of {sp}")))
            } else {
                Ok(k as i64)
            }
        })
        .collect()
}

/// Fits `‖A_{m,E}(f − τ_h f, g)‖₂ ≈ C|h|^γ` (or the analogous law in the
/// second slot, or `C|h1|^{γ1}|h2|^{γ2}` when both inputs are differenced
/// over all pairs from `h_list`). Shifts must be multiples of the grid spacing.
pub fn continuity_modulus(
    f: &GridFunction,
    g: &GridFunction,
    m: &MultiplierSpec,
    set: &DilationSet,
    h_list: &[Vec<f64>],
    slot: Slot,
    resolution: Option<f64>,
) -> Result<ContinuityReport, EngineError> {
    if !f.same_shape(g) {
        return Err(EngineError::ShapeMismatch);
    }
    let res = resolution.unwrap_or_else(|| super::maximal::default_resolution(f));
    let ts = dilation_samples(set, res)?;
    let rolls: Vec<Vec<i64>> = h_list.iter().map(|h| shift_to_roll(f, h)).collect::<Result<_, _>>()?;
    let len = |h: &[f64]| h.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diff = |u: &GridFunction, r: &[i64]| u.sub(&u.roll(r));
    let norm_of = |a: &GridFunction, b: &GridFunction| -> Result<f64, EngineError> {
        Ok(maximal_prepared(&PreparedPair::new(a, b)?, m, &ts)?.l2_norm())
    };

    let mut samples = Vec::new();
    match slot {
        Slot::First | Slot::Second => {
            for (h, r) in h_list.iter().zip(&rolls) {
                let v = if slot == Slot::First {
                    norm_of(&diff(f, r)?, g)?
                } else {
                    norm_of(f, &diff(g, r)?)?
                };
                samples.push((len(h), 0.0, v));
            }
            let pts: Vec<&(f64, f64, f64)> = samples.iter().filter(|s| s.0 > 0.0 && s.2 > 0.0).collect();
            if pts.len() < 2 {
                return Err(EngineError::GridRange("need two nonzero shifts to fit".into()));
            }
            let x: Vec<f64> = pts.iter().map(|s| s.0.ln()).collect();
            let y: Vec<f64> = pts.iter().map(|s| s.2.ln()).collect();
            Ok(ContinuityReport {
                slot,
                gamma: ols(&x, &y).slope,
                gamma2: None,
                samples,
            })
        }
        Slot::Both => {
            let fd: Vec<GridFunction> = rolls.iter().map(|r| diff(f, r)).collect::<Result<_, _>>()?;
            let gd: Vec<GridFunction> = rolls.iter().map(|r| diff(g, r)).collect::<Result<_, _>>()?;
            for (a, ha) in h_list.iter().enumerate() {
                for (b, hb) in h_list.iter().enumerate() {
                    samples.push((len(ha), len(hb), norm_of(&fd[a], &gd[b])?));
                }
            }
            let pts: Vec<&(f64, f64, f64)> = samples
                .iter()
                .filter(|s| s.0 > 0.0 && s.1 > 0.0 && s.2 > 0.0)
                .collect();
            if pts.len() < 3 {
                return Err(EngineError::GridRange("need three nonzero shift pairs to fit".into()));
            }
            let x: Vec<[f64; 2]> = pts.iter().map(|s| [s.0.ln(), s.1.ln()]).collect();
            let y: Vec<f64> = pts.iter().map(|s| s.2.ln()).collect();
            let (_, g2) = ols2(&x, &y);
            Ok(ContinuityReport {
                slot,
                gamma: g2[0],
                gamma2: Some(g2[1]),
                samples,
            })
        }
    }
}
