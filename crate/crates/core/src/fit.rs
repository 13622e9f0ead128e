//! Small least-squares helpers used by every estimator in the crate.

use serde::{Deserialize, Serialize};

/// Result of fitting `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root of the (weighted) sum of squared residuals.
    pub residual: f64,
}

/// Ordinary least squares.
///
/// Panics if the slices differ in length or hold fewer than two points; callers
/// validate their scale grids before fitting.
pub fn ols(x: &[f64], y: &[f64]) -> LinearFit {
    let w = vec![1.0; x.len()];
    wls(x, y, &w)
}

/// Weighted least squares with nonnegative weights.
pub fn wls(x: &[f64], y: &[f64], w: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    assert!(x.len() >= 2, "a line fit needs at least two points");
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, b), c)| {
            let r = b - (slope * a + intercept);
            c * r * r
        })
        .sum::<f64>()
        .sqrt();
    LinearFit {
        slope,
        intercept,
        residual,
    }
}

/// Least squares for `y ≈ c + s1·x1 + s2·x2`; returns `(c, [s1, s2])`.
pub fn ols2(x: &[[f64; 2]], y: &[f64]) -> (f64, [f64; 2]) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 3, "a plane fit needs at least three points");
    // Normal equations for the centered problem.
    let n = x.len() as f64;
    let m0 = x.iter().map(|v| v[0]).sum::<f64>() / n;
    let m1 = x.iter().map(|v| v[1]).sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut a, mut b, mut c, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (v, &t) in x.iter().zip(y) {
        let (d0, d1, dy) = (v[0] - m0, v[1] - m1, t - my);
        a += d0 * d0;
        b += d0 * d1;
        c += d1 * d1;
        r0 += d0 * dy;
        r1 += d1 * dy;
    }
    let det = a * c - b * b;
    let (s0, s1) = if det.abs() > 1e-300 {
        ((c * r0 - b * r1) / det, (a * r1 - b * r0) / det)
    } else {
        (0.0, 0.0)
    };
    (my - s0 * m0 - s1 * m1, [s0, s1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_zero_residual() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let f = ols(&x, &y);
        assert!((f.slope - 2.5).abs() < 1e-12);
        assert!((f.intercept + 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn zero_weight_ignores_outlier() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.0, 2.0, 100.0];
        let f = wls(&x, &y, &[1.0, 1.0, 1.0, 0.0]);
        assert!((f.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_fit_recovers_coefficients() {
        let pts: Vec<[f64; 2]> = (0..12).map(|i| [i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = pts.iter().map(|p| 0.5 + 2.0 * p[0] - 3.0 * p[1]).collect();
        let (c, s) = ols2(&pts, &y);
        assert!((c - 0.5).abs() < 1e-10 && (s[0] - 2.0).abs() < 1e-10 && (s[1] + 3.0).abs() < 1e-10);
    }
}
