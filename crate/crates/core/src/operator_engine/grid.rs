//! Periodic sample grids and their Fourier coefficients.

use super::EngineError;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 8;

/// Samples of a function on the torus `[0, L)^d` at `n` points per axis,
/// stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    side: usize,
    period: f64,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(dim: usize, side: usize, period: f64, samples: Vec<Complex64>) -> Result<Self, EngineError> {
        check_shape(dim, side, period)?;
        if samples.len() != side.pow(dim as u32) {
            return Err(EngineError::BadGrid(format!(
                "expected {} samples, got {}",
                side.pow(dim as u32),
                samples.len()
            )));
        }
        Ok(Self {
            dim,
            side,
            period,
            samples,
        })
    }

    pub fn zeros(dim: usize, side: usize, period: f64) -> Result<Self, EngineError> {
        Self::constant(dim, side, period, Complex64::new(0.0, 0.0))
    }

    pub fn constant(dim: usize, side: usize, period: f64, value: Complex64) -> Result<Self, EngineError> {
        check_shape(dim, side, period)?;
        Self::new(dim, side, period, vec![value; side.pow(dim as u32)])
    }

    /// Samples `f` at the grid points `x_j = j·L/n`.
    pub fn from_fn(
        dim: usize,
        side: usize,
        period: f64,
        f: impl Fn(&[f64]) -> Complex64,
    ) -> Result<Self, EngineError> {
        check_shape(dim, side, period)?;
        let len = side.pow(dim as u32);
        let h = period / side as f64;
        let mut x = vec![0.0; dim];
        let samples = (0..len)
            .map(|flat| {
                let mut rem = flat;
                for a in (0..dim).rev() {
                    x[a] = (rem % side) as f64 * h;
                    rem /= side;
                }
                f(&x)
            })
            .collect();
        Self::new(dim, side, period, samples)
    }

    /// Inverse of [`Self::coefficients`].
    pub fn from_coefficients(
        dim: usize,
        side: usize,
        period: f64,
        mut coeffs: Vec<Complex64>,
    ) -> Result<Self, EngineError> {
        check_shape(dim, side, period)?;
        if coeffs.len() != side.pow(dim as u32) {
            return Err(EngineError::BadGrid("coefficient array has the wrong length".into()));
        }
        fft_nd(&mut coeffs, dim, side, true);
        Self::new(dim, side, period, coeffs)
    }

    /// Band-limited Gaussian noise: independent complex normal coefficients on
    /// the modes with physical frequency `lo ≤ |ξ| ≤ hi`.
    pub fn random_band_limited<R: Rng>(
        dim: usize,
        side: usize,
        period: f64,
        lo: f64,
        hi: f64,
        rng: &mut R,
    ) -> Result<Self, EngineError> {
        Self::random_spectrum(dim, side, period, rng, |r| if r >= lo && r <= hi { 1.0 } else { 0.0 })
    }

    /// Gaussian noise with coefficient amplitudes `(1 + |ξ|)^{-exponent}`.
    pub fn random_power_law<R: Rng>(
        dim: usize,
        side: usize,
        period: f64,
        exponent: f64,
        rng: &mut R,
    ) -> Result<Self, EngineError> {
        Self::random_spectrum(dim, side, period, rng, |r| (1.0 + r).powf(-exponent))
    }

    /// Gaussian coefficients shaped by a radial amplitude profile.
    pub fn random_spectrum<R: Rng>(
        dim: usize,
        side: usize,
        period: f64,
        rng: &mut R,
        amplitude: impl Fn(f64) -> f64,
    ) -> Result<Self, EngineError> {
        check_shape(dim, side, period)?;
        let len = side.pow(dim as u32);
        let mut coeffs = Vec::with_capacity(len);
        let mut k = vec![0i64; dim];
        for flat in 0..len {
            signed_freq(flat, dim, side, &mut k);
            let r = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt() / period;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            coeffs.push(Complex64::new(re, im) * amplitude(r));
        }
        Self::from_coefficients(dim, side, period, coeffs)
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

    /// Grid spacing `L/n`.
    pub fn spacing(&self) -> f64 {
        self.period / self.side as f64
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn same_shape(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.side == other.side && self.period == other.period
    }

    /// Coordinates of the sample at a flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            x[a] = (rem % self.side) as f64 * self.spacing();
            rem /= self.side;
        }
        x
    }

    /// `f̂_k = n^{-d} Σ_j f_j e^{-2πi k·j/n}`, so that `f(x) = Σ_k f̂_k e^{2πi k·x/L}`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut c = self.samples.clone();
        fft_nd(&mut c, self.dim, self.side, false);
        let s = 1.0 / self.len() as f64;
        for v in &mut c {
            *v *= s;
        }
        c
    }

    /// `(Σ |f|^p (L/n)^d)^{1/p}`; `p = ∞` gives the max modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let cell = self.spacing().powi(self.dim as i32);
        (self.samples.iter().map(|v| v.norm().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let cell = self.spacing().powi(self.dim as i32);
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// `(L^d Σ |f̂_k|²)^{1/2}`, equal to [`Self::l2_norm`] by Parseval.
    pub fn coefficient_l2_norm(&self) -> f64 {
        let vol = self.period.powi(self.dim as i32);
        (self.coefficients().iter().map(|v| v.norm_sqr()).sum::<f64>() * vol).sqrt()
    }

    /// `τ_h f(x) = f(x − h)` for `h = shift · L/n`.
    pub fn roll(&self, shift: &[i64]) -> GridFunction {
        assert_eq!(shift.len(), self.dim);
        let n = self.side as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        let mut idx = vec![0i64; self.dim];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rem = flat;
            for a in (0..self.dim).rev() {
                idx[a] = (rem % self.side) as i64;
                rem /= self.side;
            }
            let mut src = 0usize;
            for a in 0..self.dim {
                src = src * self.side + (idx[a] - shift[a]).rem_euclid(n) as usize;
            }
            *slot = self.samples[src];
        }
        GridFunction { samples: out, ..self.clone_shape() }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            ..self.clone_shape()
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GridFunction, EngineError> {
        if !self.same_shape(other) {
            return Err(EngineError::ShapeMismatch);
        }
        Ok(GridFunction {
            samples: self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
            ..self.clone_shape()
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction, EngineError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction, EngineError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction, EngineError> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex64) -> GridFunction {
        self.map(|v| v * s)
    }

    /// Pointwise modulus as a real-valued grid function.
    pub fn abs(&self) -> GridFunction {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    /// Trigonometric interpolation onto a grid `factor` times finer.
    pub fn upsample(&self, factor: usize) -> Result<GridFunction, EngineError> {
        if factor == 1 {
            return Ok(self.clone());
        }
        let big = self.side * factor;
        check_shape(self.dim, big, self.period)?;
        let c = self.coefficients();
        let mut out = vec![Complex64::new(0.0, 0.0); big.pow(self.dim as u32)];
        let mut k = vec![0i64; self.dim];
        for (flat, v) in c.iter().enumerate() {
            signed_freq(flat, self.dim, self.side, &mut k);
            let mut dst = 0usize;
            for &kk in &k {
                dst = dst * big + kk.rem_euclid(big as i64) as usize;
            }
            out[dst] = *v;
        }
        GridFunction::from_coefficients(self.dim, big, self.period, out)
    }

    fn clone_shape(&self) -> GridFunction {
        GridFunction {
            dim: self.dim,
            side: self.side,
            period: self.period,
            samples: Vec::new(),
        }
    }
}

pub(crate) fn check_shape(dim: usize, side: usize, period: f64) -> Result<(), EngineError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(EngineError::BadGrid(format!("dimension {dim} outside 1..={MAX_DIM}")));
    }
    if side < 2 || !side.is_power_of_two() {
        return Err(EngineError::BadGrid(format!("side {side} is not a power of two ≥ 2")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(EngineError::BadGrid(format!("period {period} must be positive")));
    }
    if side.checked_pow(dim as u32).is_none_or(|len| len > 1 << 26) {
        return Err(EngineError::BadGrid(format!("grid {side}^{dim} is too large")));
    }
    Ok(())
}

/// Integer frequency vector of a flat DFT index, each entry in `[−n/2, n/2)`.
pub(crate) fn signed_freq(flat: usize, dim: usize, side: usize, out: &mut [i64]) {
    let mut rem = flat;
    let half = side / 2;
    for a in (0..dim).rev() {
        let p = rem % side;
        out[a] = if p < half { p as i64 } else { p as i64 - side as i64 };
        rem /= side;
    }
}

/// In-place unnormalized d-dimensional DFT (`inverse` flips the sign).
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, side: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let len = data.len();
    for a in 0..dim {
        let stride = side.pow((dim - 1 - a) as u32);
        let block = stride * side;
        for base in (0..len).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parseval_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in 1..=3 {
            let f = GridFunction::random_power_law(dim, 16, 3.0, 0.5, &mut rng).unwrap();
            let (a, b) = (f.l2_norm(), f.coefficient_l2_norm());
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn single_mode_coefficient() {
        let f = GridFunction::from_fn(2, 8, 2.0, |x| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (x[0] * 3.0 - x[1]) / 2.0)
        })
        .unwrap();
        let c = f.coefficients();
        // k = (3, -1) sits at row 3, column 7.
        assert!((c[3 * 8 + 7] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let rest: f64 = c.iter().map(|v| v.norm()).sum::<f64>() - 1.0;
        assert!(rest.abs() < 1e-10);
    }

    #[test]
    fn roll_is_translation() {
        let f = GridFunction::from_fn(1, 16, 4.0, |x| Complex64::new(x[0].sin(), 0.0)).unwrap();
        let g = f.roll(&[3]);
        for j in 0..16 {
            assert_eq!(g.samples()[j], f.samples()[(j + 13) % 16]);
        }
    }

    #[test]
    fn upsample_interpolates_trig_polynomials() {
        let w = 2.0 * std::f64::consts::PI / 5.0;
        let f = GridFunction::from_fn(1, 16, 5.0, |x| Complex64::new((w * x[0]).cos(), (2.0 * w * x[0]).sin())).unwrap();
        let up = f.upsample(4).unwrap();
        for (j, v) in up.samples().iter().enumerate() {
            let x = j as f64 * 5.0 / 64.0;
            assert!((v - Complex64::new((w * x).cos(), (2.0 * w * x).sin())).norm() < 1e-12);
        }
    }

    #[test]
    fn shape_validation() {
        assert!(GridFunction::zeros(1, 12, 1.0).is_err());
        assert!(GridFunction::zeros(0, 8, 1.0).is_err());
        assert!(GridFunction::zeros(1, 8, 0.0).is_err());
    }
}
