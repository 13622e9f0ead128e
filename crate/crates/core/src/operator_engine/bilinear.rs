//! Frequency-domain application of bilinear multipliers.

use super::grid::{fft_nd, signed_freq, GridFunction};
use super::symbols::{MultiplierKind, MultiplierSpec, Structure};
use super::EngineError;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Coefficients below this fraction of the largest one are treated as zero.
const SPARSITY_CUTOFF: f64 = 1e-15;

/// Fixed chunk count for the parallel pair loop. Partial spectra are summed in
/// chunk order, so results do not depend on the thread count.
const PAIR_CHUNKS: usize = 64;

struct Spectrum {
    /// Nonzero coefficients.
    coeffs: Vec<Complex64>,
    /// Per-axis DFT positions, `dim` entries per coefficient.
    pos: Vec<u32>,
    /// Signed integer frequencies, `dim` entries per coefficient.
    freq: Vec<i64>,
    /// Index into `norms` of each coefficient's `|k|²`.
    norm_idx: Vec<u32>,
    /// Distinct values of `|k|²`.
    norms: Vec<i64>,
    /// Every coefficient, for the separable path.
    dense: Vec<Complex64>,
}

impl Spectrum {
    fn new(f: &GridFunction) -> Self {
        let (dim, side) = (f.dim(), f.side());
        let dense = f.coefficients();
        let peak = dense.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let cut = peak * SPARSITY_CUTOFF;
        let mut coeffs = Vec::new();
        let mut pos = Vec::new();
        let mut freq = Vec::new();
        let mut raw_norms = Vec::new();
        let mut k = vec![0i64; dim];
        for (flat, &c) in dense.iter().enumerate() {
            if c.norm() <= cut || c.norm() == 0.0 {
                continue;
            }
            signed_freq(flat, dim, side, &mut k);
            coeffs.push(c);
            for &kk in &k {
                pos.push(kk.rem_euclid(side as i64) as u32);
                freq.push(kk);
            }
            raw_norms.push(k.iter().map(|v| v * v).sum::<i64>());
        }
        let mut table: BTreeMap<i64, u32> = raw_norms.iter().map(|&v| (v, 0)).collect();
        for (i, v) in table.values_mut().enumerate() {
            *v = i as u32;
        }
        let norm_idx = raw_norms.iter().map(|v| table[v]).collect();
        Self {
            coeffs,
            pos,
            freq,
            norm_idx,
            norms: table.into_keys().collect(),
            dense,
        }
    }
}

/// A pair of inputs with their spectra computed once, for repeated evaluation
/// at many dilation parameters.
pub struct PreparedPair {
    dim: usize,
    side: usize,
    period: f64,
    f: Spectrum,
    g: Spectrum,
}

impl PreparedPair {
    pub fn new(f: &GridFunction, g: &GridFunction) -> Result<Self, EngineError> {
        if !f.same_shape(g) {
            return Err(EngineError::ShapeMismatch);
        }
        Ok(Self {
            dim: f.dim(),
            side: f.side(),
            period: f.period(),
            f: Spectrum::new(f),
            g: Spectrum::new(g),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `T_m` with the symbol evaluated at `(t1 ξ, t2 η)`.
    pub fn apply(&self, m: &MultiplierSpec, t1: f64, t2: f64) -> Result<GridFunction, EngineError> {
        self.check(m, t1, t2)?;
        if m.structure() == Structure::Separable {
            return self.apply_separable(m, t1, t2);
        }
        self.apply_direct(m, t1, t2)
    }

    fn check(&self, m: &MultiplierSpec, t1: f64, t2: f64) -> Result<(), EngineError> {
        if m.dim != self.dim {
            return Err(EngineError::ShapeMismatch);
        }
        if !(t1 > 0.0 && t2 > 0.0 && t1.is_finite() && t2.is_finite()) {
            return Err(EngineError::DilationOutOfRange(t1.min(t2)));
        }
        Ok(())
    }

    /// The O(N²) pair loop, valid for every symbol.
    pub fn apply_direct(&self, m: &MultiplierSpec, t1: f64, t2: f64) -> Result<GridFunction, EngineError> {
        self.check(m, t1, t2)?;
        let (dim, side) = (self.dim, self.side);
        let len = side.pow(dim as u32);
        let mask = side as u32 - 1;
        let inv_l = 1.0 / self.period;
        let (f, g) = (&self.f, &self.g);

        let radial_table: Option<Vec<f64>> = (m.structure() == Structure::Radial).then(|| {
            let (s1, s2) = ((t1 * inv_l).powi(2), (t2 * inv_l).powi(2));
            let cols = g.norms.len();
            let mut table = vec![0.0; f.norms.len() * cols];
            table.par_chunks_mut(cols.max(1)).enumerate().for_each(|(r, row)| {
                let a = f.norms[r] as f64 * s1;
                for (c, v) in row.iter_mut().enumerate() {
                    *v = m.radial_profile(a + g.norms[c] as f64 * s2);
                }
            });
            table
        });

        let nf = f.coeffs.len();
        let chunk = nf.div_ceil(PAIR_CHUNKS).max(1);
        let starts: Vec<usize> = (0..nf).step_by(chunk).collect();
        let partials: Vec<Vec<Complex64>> = starts
            .par_iter()
            .map(|&start| {
                let mut out = vec![Complex64::new(0.0, 0.0); len];
                let mut xi = [0.0f64; super::grid::MAX_DIM];
                let mut eta = [0.0f64; super::grid::MAX_DIM];
                for a in start..(start + chunk).min(nf) {
                    let ca = f.coeffs[a];
                    let pa = &f.pos[a * dim..(a + 1) * dim];
                    for ax in 0..dim {
                        xi[ax] = t1 * f.freq[a * dim + ax] as f64 * inv_l;
                    }
                    let row = radial_table
                        .as_ref()
                        .map(|t| &t[f.norm_idx[a] as usize * g.norms.len()..]);
                    for b in 0..g.coeffs.len() {
                        let pb = &g.pos[b * dim..(b + 1) * dim];
                        let mut idx = 0usize;
                        for ax in 0..dim {
                            idx = idx * side + ((pa[ax] + pb[ax]) & mask) as usize;
                        }
                        let sym = match row {
                            Some(r) => Complex64::new(r[g.norm_idx[b] as usize], 0.0),
                            None => {
                                for ax in 0..dim {
                                    eta[ax] = t2 * g.freq[b * dim + ax] as f64 * inv_l;
                                }
                                m.eval(&xi[..dim], &eta[..dim])
                            }
                        };
                        out[idx] += ca * g.coeffs[b] * sym;
                    }
                }
                out
            })
            .collect();
        let mut total = vec![Complex64::new(0.0, 0.0); len];
        for p in partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
        GridFunction::from_coefficients(dim, side, self.period, total)
    }

    /// Separable symbols: each factor acts as a linear multiplier, then the
    /// results are multiplied pointwise.
    fn apply_separable(&self, m: &MultiplierSpec, t1: f64, t2: f64) -> Result<GridFunction, EngineError> {
        let (dim, side, period) = (self.dim, self.side, self.period);
        let make = |dense: &[Complex64], shift: Option<&[f64]>, t: f64| -> Vec<Complex64> {
            let mut c = dense.to_vec();
            if let Some(y) = shift {
                let mut k = vec![0i64; dim];
                for (flat, v) in c.iter_mut().enumerate() {
                    signed_freq(flat, dim, side, &mut k);
                    let ph: f64 = k.iter().zip(y).map(|(&kk, &yy)| kk as f64 * yy).sum::<f64>() * t / period;
                    *v *= Complex64::from_polar(1.0, -2.0 * PI * ph);
                }
            }
            fft_nd(&mut c, dim, side, true);
            c
        };
        let (fy, gz) = match &m.kind {
            MultiplierKind::PointMass { y0, z0 } => (Some(y0.as_slice()), Some(z0.as_slice())),
            _ => (None, None),
        };
        let a = make(&self.f.dense, fy, t1);
        let b = make(&self.g.dense, gz, t2);
        GridFunction::new(dim, side, period, a.into_iter().zip(b).map(|(x, y)| x * y).collect())
    }
}

/// `T_{m_t}(f, g)` whose Fourier coefficient at `ξ` is
/// `Σ_η f̂(ξ−η) m(t(ξ−η), tη) ĝ(η)`.
pub fn apply_bilinear_multiplier(
    f: &GridFunction,
    g: &GridFunction,
    m: &MultiplierSpec,
    t: f64,
) -> Result<GridFunction, EngineError> {
    if !(0.5..=4.0).contains(&t) {
        return Err(EngineError::DilationOutOfRange(t));
    }
    PreparedPair::new(f, g)?.apply(m, t, t)
}

/// The direct pair loop regardless of structure, with independent dilations
/// of the two frequency variables.
pub fn apply_bilinear_direct(
    f: &GridFunction,
    g: &GridFunction,
    m: &MultiplierSpec,
    t1: f64,
    t2: f64,
) -> Result<GridFunction, EngineError> {
    PreparedPair::new(f, g)?.apply_direct(m, t1, t2)
}
