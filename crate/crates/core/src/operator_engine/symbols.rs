//! Bilinear symbols, the Bessel function behind the spherical symbol, and the
//! Littlewood–Paley cutoff.

use super::EngineError;
use crate::exponent_regions::{q, q_to_f64, qi, Q};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// A user-supplied symbol `(ξ, η) ↦ m(ξ, η)`.
#[derive(Clone)]
pub struct CustomSymbol {
    pub name: String,
    pub eval: Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for CustomSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomSymbol({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum MultiplierKind {
    /// `m ≡ 1`.
    Constant,
    /// `m(ξ, η) = e^{−2πi(ξ·y0 + η·z0)}`.
    PointMass { y0: Vec<f64>, z0: Vec<f64> },
    /// `m(ξ, η) = (1 + |ξ|² + |η|²)^{−a/2}`.
    AdmissibleEnvelope,
    /// Fourier transform of normalized surface measure on `S^{2d−1}`.
    Spherical,
    /// Nonnegative envelope with the triangle measure's decay, optionally cut
    /// to one angular band `|sin θ| ≈ 2^{−k}`.
    TriangleEnvelope { angular_band: Option<u32> },
    Custom(CustomSymbol),
}

/// How the bilinear engine may evaluate a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// `m = m1(ξ) m2(η)` with unimodular factors handled in physical space.
    Separable,
    /// Depends on `|ξ|² + |η|²` only.
    Radial,
    General,
}

#[derive(Debug, Clone)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    pub dim: usize,
    /// Derivative order up to which the decay is claimed.
    pub order: u32,
    pub decay_a: Q,
    /// Whether the decay claim is certified by construction (false for
    /// custom symbols, which can only be sampled).
    pub certified: bool,
}

impl MultiplierSpec {
    pub fn constant(dim: usize) -> Self {
        Self {
            kind: MultiplierKind::Constant,
            dim,
            order: u32::MAX,
            decay_a: qi(0),
            certified: true,
        }
    }

    pub fn point_mass(y0: Vec<f64>, z0: Vec<f64>) -> Result<Self, EngineError> {
        if y0.len() != z0.len() || y0.is_empty() {
            return Err(EngineError::BadSymbol("point mass needs y0, z0 of equal dimension".into()));
        }
        Ok(Self {
            dim: y0.len(),
            kind: MultiplierKind::PointMass { y0, z0 },
            order: u32::MAX,
            decay_a: qi(0),
            certified: true,
        })
    }

    pub fn admissible_envelope(dim: usize, a: Q) -> Self {
        Self {
            kind: MultiplierKind::AdmissibleEnvelope,
            dim,
            order: u32::MAX,
            decay_a: a,
            certified: true,
        }
    }

    pub fn spherical(dim: usize) -> Self {
        Self {
            kind: MultiplierKind::Spherical,
            dim,
            order: u32::MAX,
            decay_a: q(2 * dim as i64 - 1, 2),
            certified: true,
        }
    }

    pub fn triangle_envelope(dim: usize, angular_band: Option<u32>) -> Result<Self, EngineError> {
        if dim < 2 {
            return Err(EngineError::BadSymbol("triangle envelope needs d ≥ 2".into()));
        }
        Ok(Self {
            kind: MultiplierKind::TriangleEnvelope { angular_band },
            dim,
            order: u32::MAX,
            decay_a: q(dim as i64 - 2, 2),
            certified: true,
        })
    }

    pub fn custom(
        dim: usize,
        name: impl Into<String>,
        decay_a: Q,
        order: u32,
        eval: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: MultiplierKind::Custom(CustomSymbol {
                name: name.into(),
                eval: Arc::new(eval),
            }),
            dim,
            order,
            decay_a,
            certified: false,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            MultiplierKind::Constant => "constant".into(),
            MultiplierKind::PointMass { .. } => "point_mass".into(),
            MultiplierKind::AdmissibleEnvelope => format!("admissible_envelope({})", self.decay_a),
            MultiplierKind::Spherical => format!("spherical({})", self.dim),
            MultiplierKind::TriangleEnvelope { angular_band: None } => format!("triangle_envelope({})", self.dim),
            MultiplierKind::TriangleEnvelope { angular_band: Some(k) } => {
                format!("triangle_envelope({}, band {k})", self.dim)
            }
            MultiplierKind::Custom(c) => format!("custom({})", c.name),
        }
    }

    pub fn decay_a_f64(&self) -> f64 {
        q_to_f64(&self.decay_a)
    }

    pub fn structure(&self) -> Structure {
        match self.kind {
            MultiplierKind::Constant | MultiplierKind::PointMass { .. } => Structure::Separable,
            MultiplierKind::AdmissibleEnvelope | MultiplierKind::Spherical => Structure::Radial,
            _ => Structure::General,
        }
    }

    /// Value of a radial symbol at `|ξ|² + |η|² = r2`.
    pub fn radial_profile(&self, r2: f64) -> f64 {
        match self.kind {
            MultiplierKind::AdmissibleEnvelope => (1.0 + r2).powf(-0.5 * self.decay_a_f64()),
            MultiplierKind::Spherical => spherical_profile(self.dim, r2.sqrt()),
            MultiplierKind::Constant => 1.0,
            _ => panic!("radial_profile called on a non-radial symbol"),
        }
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Complex64 {
        match &self.kind {
            MultiplierKind::Constant => Complex64::new(1.0, 0.0),
            MultiplierKind::PointMass { y0, z0 } => {
                let ph: f64 = xi.iter().zip(y0).map(|(a, b)| a * b).sum::<f64>()
                    + eta.iter().zip(z0).map(|(a, b)| a * b).sum::<f64>();
                Complex64::from_polar(1.0, -2.0 * PI * ph)
            }
            MultiplierKind::AdmissibleEnvelope | MultiplierKind::Spherical => {
                let r2 = xi.iter().chain(eta).map(|v| v * v).sum();
                Complex64::new(self.radial_profile(r2), 0.0)
            }
            MultiplierKind::TriangleEnvelope { angular_band } => {
                let v = triangle_envelope_value(self.dim, xi, eta);
                let w = match angular_band {
                    None => 1.0,
                    Some(k) => angular_weight(*k, sin_angle(xi, eta)),
                };
                Complex64::new(v * w, 0.0)
            }
            MultiplierKind::Custom(c) => (c.eval)(xi, eta),
        }
    }

    /// Largest sampled `|m(ζ)| (1 + |ζ|)^a` over random directions at radii
    /// `2^0 .. 2^12`; bounded for symbols honoring their decay claim.
    pub fn sampled_decay_constant<R: Rng>(&self, samples: usize, rng: &mut R) -> f64 {
        let a = self.decay_a_f64();
        let mut worst: f64 = 0.0;
        for s in 0..samples {
            let radius = 2f64.powf(12.0 * s as f64 / samples.max(1) as f64);
            let mut v: Vec<f64> = (0..2 * self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            for x in &mut v {
                *x *= radius / norm;
            }
            let (xi, eta) = v.split_at(self.dim);
            worst = worst.max(self.eval(xi, eta).norm() * (1.0 + radius).powf(a));
        }
        worst
    }
}

fn sin_angle(xi: &[f64], eta: &[f64]) -> f64 {
    let a: f64 = xi.iter().map(|v| v * v).sum();
    let b: f64 = eta.iter().map(|v| v * v).sum();
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let dot: f64 = xi.iter().zip(eta).map(|(x, y)| x * y).sum();
    ((a * b - dot * dot).max(0.0) / (a * b)).sqrt()
}

/// `(1 + min(|ξ|,|η|)|sin θ|)^{−(d−2)/2} (1 + |(ξ,η)|)^{−(d−2)/2}`.
pub fn triangle_envelope_symbol(dim: usize, xi: &[f64], eta: &[f64]) -> Result<f64, EngineError> {
    if dim < 2 {
        return Err(EngineError::BadSymbol("triangle envelope needs d ≥ 2".into()));
    }
    if xi.len() != dim || eta.len() != dim {
        return Err(EngineError::ShapeMismatch);
    }
    Ok(triangle_envelope_value(dim, xi, eta))
}

fn triangle_envelope_value(dim: usize, xi: &[f64], eta: &[f64]) -> f64 {
    let e = -(dim as f64 - 2.0) / 2.0;
    let a = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    (1.0 + a.min(b) * sin_angle(xi, eta)).powf(e) * (1.0 + (a * a + b * b).sqrt()).powf(e)
}

/// Smooth angular partition: band `k` lives on `2^{−k−1} < s < 2^{1−k}` and
/// the bands `0..K` together with `φ̂(2^K s)` sum to one on `[0, 1]`.
pub fn angular_weight(k: u32, s: f64) -> f64 {
    let scale = 2f64.powi(k as i32);
    lp_cutoff(scale * s) - lp_cutoff(2.0 * scale * s)
}

/// Smooth radial cutoff: 1 on `[0, 1]`, `exp(1 − 1/(1 − (r−1)²))` on `(1, 2)`,
/// 0 from 2 on.
pub fn lp_cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Multiplier of the `i`-th Littlewood–Paley piece at `|ξ| = r`.
pub fn lp_band_weight(i: u32, r: f64) -> f64 {
    if i == 0 {
        lp_cutoff(r)
    } else {
        let s = r / 2f64.powi(i as i32);
        lp_cutoff(s) - lp_cutoff(2.0 * s)
    }
}

/// `σ̂(ρ)` for normalized surface measure on `S^{2d−1}`:
/// `Γ(d) J_{d−1}(2πρ) / (πρ)^{d−1}`, equal to 1 at 0.
pub fn spherical_profile(dim: usize, rho: f64) -> f64 {
    let nu = dim as i32 - 1;
    let z = PI * rho;
    if z < 1e-4 {
        let d = dim as f64;
        return 1.0 - z * z / d + z.powi(4) / (2.0 * d * (d + 1.0));
    }
    let gamma_d: f64 = (1..dim).map(|k| k as f64).product();
    gamma_d * bessel_j(nu as u32, 2.0 * z) / z.powi(nu)
}

/// `σ̂` at a point `ζ ∈ R^{2d}`.
pub fn spherical_symbol(dim: usize, zeta: &[f64]) -> Result<f64, EngineError> {
    if dim == 0 || zeta.len() != 2 * dim {
        return Err(EngineError::ShapeMismatch);
    }
    Ok(spherical_profile(dim, zeta.iter().map(|v| v * v).sum::<f64>().sqrt()))
}

/// Bessel function of the first kind of integer order.
///
/// Uses the power series for small arguments (relative accuracy near 0),
/// the periodic trapezoid rule on the Bessel integral for moderate ones, and
/// the Hankel asymptotic expansion beyond.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 4.0 {
        bessel_j_series(n, x)
    } else if x < 25.0 + n as f64 {
        bessel_j_trapezoid(n, x)
    } else {
        bessel_j_hankel(n, x)
    }
}

fn bessel_j_series(n: u32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = 0.0;
    let q = -(x * x) / 4.0;
    for m in 1..40 {
        sum += term;
        term *= q / (m as f64 * (m + n) as f64);
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum + term
}

/// `(1/2π) ∫_0^{2π} cos(nτ − x sin τ) dτ` by the trapezoid rule.
///
/// The aliasing error is of the size of `J_N(x)` for `N` nodes, which is
/// negligible once `N − |x|` exceeds a multiple of `|x|^{1/3}`.
pub fn bessel_j_trapezoid(n: u32, x: f64) -> f64 {
    let margin = 40.0 + 12.0 * x.abs().cbrt();
    let nodes = ((x.abs() + n as f64 + margin).ceil() as usize).max(64);
    let h = 2.0 * PI / nodes as f64;
    let nf = n as f64;
    (0..nodes)
        .map(|j| {
            let tau = j as f64 * h;
            (nf * tau - x * tau.sin()).cos()
        })
        .sum::<f64>()
        / nodes as f64
}

fn bessel_j_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut p = 0.0;
    let mut qq = 0.0;
    let mut term = 1.0;
    let mut k = 0usize;
    let mut last = f64::INFINITY;
    loop {
        // term = a_k(ν) / x^k with a_k = Π_{j=1..k} (μ − (2j−1)²) / (k! 8^k).
        let signed = term * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += signed;
        } else {
            qq += signed;
        }
        k += 1;
        let next = term * (mu - ((2 * k - 1) as f64).powi(2)) / (k as f64 * 8.0 * x);
        if next.abs() < 1e-17 || next.abs() > last || k > 60 {
            break;
        }
        last = next.abs();
        term = next;
    }
    let chi = x - (n as f64) * PI / 2.0 - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - qq * chi.sin())
}
