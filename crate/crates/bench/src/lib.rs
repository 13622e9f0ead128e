//! Seeded fixtures shared by the benchmarks.

use fracmax::operator_engine::GridFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two independent band-limited inputs on `[0, 8)^dim` with `n` points per axis,
/// frequencies up to a quarter of Nyquist.
pub fn band_limited_pair(dim: usize, n: usize, seed: u64) -> (GridFunction, GridFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = 8.0;
    let top = n as f64 / (4.0 * period);
    let f = GridFunction::random_band_limited(dim, n, period, 0.0, top, &mut rng).expect("valid grid");
    let g = GridFunction::random_band_limited(dim, n, period, 0.0, top, &mut rng).expect("valid grid");
    (f, g)
}

/// Nonnegative spiky input for stopping-time constructions.
pub fn spiky(dim: usize, n: usize, seed: u64) -> GridFunction {
    let (f, _) = band_limited_pair(dim, n, seed);
    f.map(|v| num_complex::Complex64::new(v.norm().powi(4), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        let (a, _) = band_limited_pair(1, 64, 3);
        let (b, _) = band_limited_pair(1, 64, 3);
        assert_eq!(a, b);
        assert!(spiky(2, 16, 1).samples().iter().all(|v| v.re >= 0.0));
    }
}
