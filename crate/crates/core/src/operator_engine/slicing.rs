//! Real-space evaluation of the spherical bilinear average.
//!
//! Points of `S^{2d−1}` are written as `(cos φ · z, sin φ · u)` with
//! `z, u ∈ S^{d−1}` and `φ ∈ [0, π/2]`, where surface measure carries the
//! weight `cos^{d−1}φ sin^{d−1}φ`. Thus
//!
//! `A_t(f,g)(x) = ∫ F_φ(x) G_φ(x) w(φ) dφ / ∫ w`,
//!
//! with `F_φ`, `G_φ` the spherical means of `f`, `g` at radii `t cos φ`,
//! `t sin φ`. For `d = 1` the sphere `S¹` is sampled directly by a uniform
//! rule in the angle; for `d = 2` Gauss–Legendre panels in `φ` are combined
//! with uniform rules on the two circles. Off-grid values come from
//! multilinear interpolation on a trigonometrically refined grid.

use super::grid::GridFunction;
use super::EngineError;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicingQuadrature {
    /// Nodes on each circle (on `S¹` itself when `d = 1`).
    pub circle_nodes: usize,
    /// Gauss–Legendre panels in the polar angle (`d = 2`).
    pub polar_panels: usize,
    /// Nodes per panel.
    pub panel_order: usize,
    /// Refinement factor applied before interpolation.
    pub upsample: usize,
}

impl Default for SlicingQuadrature {
    fn default() -> Self {
        Self {
            circle_nodes: 256,
            polar_panels: 4,
            panel_order: 12,
            upsample: 16,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else if order == 1 { z } else { p1 };
            let pm1 = if order == 1 { 1.0 } else { p0 };
            dp = n * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

struct Interpolant {
    grid: GridFunction,
}

impl Interpolant {
    fn new(f: &GridFunction, upsample: usize) -> Result<Self, EngineError> {
        Ok(Self {
            grid: f.upsample(upsample.max(1))?,
        })
    }

    /// Periodic multilinear interpolation (d ≤ 2).
    fn at(&self, x: &[f64]) -> Complex64 {
        let g = &self.grid;
        let n = g.side();
        let h = g.spacing();
        let s = g.samples();
        match g.dim() {
            1 => {
                let u = (x[0] / h).rem_euclid(n as f64);
                let i0 = u.floor() as usize % n;
                let fr = u - u.floor();
                s[i0] * (1.0 - fr) + s[(i0 + 1) % n] * fr
            }
            _ => {
                let u = (x[0] / h).rem_euclid(n as f64);
                let v = (x[1] / h).rem_euclid(n as f64);
                let (i0, j0) = (u.floor() as usize % n, v.floor() as usize % n);
                let (a, b) = (u - u.floor(), v - v.floor());
                let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
                s[i0 * n + j0] * ((1.0 - a) * (1.0 - b))
                    + s[i1 * n + j0] * (a * (1.0 - b))
                    + s[i0 * n + j1] * ((1.0 - a) * b)
                    + s[i1 * n + j1] * (a * b)
            }
        }
    }

    /// Mean of the function over the circle of radius `r` about `x` (d = 2).
    fn circle_mean(&self, x: &[f64], r: f64, dirs: &[(f64, f64)]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, s) in dirs {
            acc += self.at(&[x[0] - r * c, x[1] - r * s]);
        }
        acc / dirs.len() as f64
    }
}

fn check(f: &GridFunction, g: &GridFunction, t1: f64, t2: f64, q: &SlicingQuadrature) -> Result<(), EngineError> {
    if !f.same_shape(g) {
        return Err(EngineError::ShapeMismatch);
    }
    if f.dim() > 2 {
        return Err(EngineError::Unsupported(format!(
            "slicing evaluation is implemented for d ≤ 2, got d = {}",
            f.dim()
        )));
    }
    let limit = f.period() / 2.0;
    for t in [t1, t2] {
        if !(t > 0.0) || t >= limit {
            return Err(EngineError::DilationOutOfRange(t));
        }
    }
    if q.circle_nodes < 4 || q.polar_panels == 0 || q.panel_order == 0 {
        return Err(EngineError::Unsupported("quadrature too coarse".into()));
    }
    Ok(())
}

/// `A_{t1,t2}(f, g)` at arbitrary points, with `f` dilated by `t1` and `g` by `t2`.
pub fn slicing_biparameter_at(
    f: &GridFunction,
    g: &GridFunction,
    t1: f64,
    t2: f64,
    q: &SlicingQuadrature,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>, EngineError> {
    check(f, g, t1, t2, q)?;
    let fi = Interpolant::new(f, q.upsample)?;
    let gi = Interpolant::new(g, q.upsample)?;
    let dirs: Vec<(f64, f64)> = (0..q.circle_nodes)
        .map(|j| {
            let th = 2.0 * PI * (j as f64 + 0.5) / q.circle_nodes as f64;
            (th.cos(), th.sin())
        })
        .collect();
    if f.dim() == 1 {
        return Ok(points
            .par_iter()
            .map(|x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, s) in &dirs {
                    acc += fi.at(&[x[0] - t1 * c]) * gi.at(&[x[0] - t2 * s]);
                }
                acc / dirs.len() as f64
            })
            .collect());
    }
    let (gx, gw) = gauss_legendre(q.panel_order);
    let panel = (PI / 2.0) / q.polar_panels as f64;
    let mut polar = Vec::new();
    for p in 0..q.polar_panels {
        let mid = (p as f64 + 0.5) * panel;
        for (x, w) in gx.iter().zip(&gw) {
            let phi = mid + 0.5 * panel * x;
            polar.push((phi.cos(), phi.sin(), w * phi.cos() * phi.sin()));
        }
    }
    let wsum: f64 = polar.iter().map(|p| p.2).sum();
    Ok(points
        .par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(c, s, w) in &polar {
                acc += fi.circle_mean(x, t1 * c, &dirs) * gi.circle_mean(x, t2 * s, &dirs) * w;
            }
            acc / wsum
        })
        .collect())
}

/// `A_t(f, g)` at arbitrary points.
pub fn slicing_average_at(
    f: &GridFunction,
    g: &GridFunction,
    t: f64,
    q: &SlicingQuadrature,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>, EngineError> {
    slicing_biparameter_at(f, g, t, t, q, points)
}

/// `A_t(f, g)` on the whole grid.
pub fn slicing_average(
    f: &GridFunction,
    g: &GridFunction,
    t: f64,
    q: &SlicingQuadrature,
) -> Result<GridFunction, EngineError> {
    let points: Vec<Vec<f64>> = (0..f.len()).map(|i| f.point(i)).collect();
    let vals = slicing_average_at(f, g, t, q, &points)?;
    GridFunction::new(f.dim(), f.side(), f.period(), vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in [1usize, 2, 5, 12] {
            let (x, w) = gauss_legendre(order);
            for p in 0..(2 * order) {
                let num: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "order {order} degree {p}");
            }
        }
    }

    #[test]
    fn constants_are_preserved() {
        let q = SlicingQuadrature::default();
        for dim in 1..=2 {
            let one = GridFunction::constant(dim, 16, 8.0, Complex64::new(1.0, 0.0)).unwrap();
            let a = slicing_average(&one, &one, 1.5, &q).unwrap();
            for v in a.samples() {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-3);
            }
        }
    }

    #[test]
    fn rejects_large_dilation_and_dimension() {
        let q = SlicingQuadrature::default();
        let one = GridFunction::constant(1, 16, 2.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(slicing_average(&one, &one, 1.0, &q).is_err());
        let three = GridFunction::constant(3, 4, 8.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(slicing_average(&three, &three, 1.0, &q).is_err());
    }
}
