//! Parsers for the shell grammar of sets, multipliers, inputs and ranges.

use fracmax::exponent_regions::{parse_q, q_to_f64, Q};
use fracmax::fractal_sets::DilationSet;
use fracmax::operator_engine::io::from_bytes;
use fracmax::operator_engine::{GridFunction, MultiplierSpec};
use num_traits::{One, Zero};
use rand::Rng;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{0}")]
pub struct SpecError(pub String);

fn bad(what: &str, s: &str) -> SpecError {
    SpecError(format!("malformed {what} `{s}`"))
}

pub fn rational(s: &str) -> Result<Q, SpecError> {
    parse_q(s).ok_or_else(|| bad("rational", s))
}

fn real(s: &str) -> Result<f64, SpecError> {
    let s = s.trim();
    if s.contains('/') {
        return rational(s).map(|q| q_to_f64(&q));
    }
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|_| bad("number", s)),
    }
}

/// Reciprocal of a Lebesgue exponent; `inf` gives `0`.
pub fn reciprocal(s: &str) -> Result<Q, SpecError> {
    if matches!(s.trim(), "inf" | "infinity") {
        return Ok(Q::zero());
    }
    let v = rational(s)?;
    if v < Q::one() {
        return Err(SpecError(format!("exponent {s} must be at least 1")));
    }
    Ok(v.recip())
}

/// `point:1 | interval:1,2 | cantor:1/3:12 | harmonic:N | file:path`.
///
/// A set file holds JSON: either a list of `[lo, hi]` pairs or an object with
/// an `intervals` field.
pub fn dilation_set(s: &str) -> Result<DilationSet, SpecError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad("set spec", s))?;
    let set = match kind {
        "point" => DilationSet::point(real(rest)?),
        "interval" => {
            let (a, b) = rest.split_once(',').ok_or_else(|| bad("interval", s))?;
            DilationSet::interval(real(a)?, real(b)?)
        }
        "cantor" => {
            let (r, depth) = rest.split_once(':').ok_or_else(|| bad("cantor spec", s))?;
            DilationSet::cantor(real(r)?, depth.parse().map_err(|_| bad("cantor depth", s))?)
        }
        "harmonic" => DilationSet::harmonic_sequence(rest.parse().map_err(|_| bad("term count", s))?),
        "file" => {
            let text = std::fs::read_to_string(rest).map_err(|e| SpecError(format!("cannot read {rest}: {e}")))?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| SpecError(format!("{rest}: {e}")))?;
            let list = v.get("intervals").unwrap_or(&v);
            let ivs: Vec<[f64; 2]> =
                serde_json::from_value(list.clone()).map_err(|e| SpecError(format!("{rest}: {e}")))?;
            DilationSet::new(ivs)
        }
        _ => return Err(bad("set spec", s)),
    };
    set.map_err(|e| SpecError(format!("set `{s}`: {e}")))
}

fn vector(s: &str, dim: usize) -> Result<Vec<f64>, SpecError> {
    let v: Vec<f64> = s.split(';').map(real).collect::<Result<_, _>>()?;
    if v.len() != dim {
        return Err(SpecError(format!("`{s}` needs {dim} components separated by `;`")));
    }
    Ok(v)
}

/// `constant | pointmass:y0,z0 | envelope:a | spherical | triangle-envelope[:band]`.
///
/// Point-mass vectors list their components separated by `;`.
pub fn multiplier(s: &str, dim: usize) -> Result<MultiplierSpec, SpecError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let m = match kind {
        "constant" => Ok(MultiplierSpec::constant(dim)),
        "spherical" => Ok(MultiplierSpec::spherical(dim)),
        "envelope" => return Ok(MultiplierSpec::admissible_envelope(dim, rational(rest)?)),
        "pointmass" => {
            let (y, z) = rest.split_once(',').ok_or_else(|| bad("point mass", s))?;
            MultiplierSpec::point_mass(vector(y, dim)?, vector(z, dim)?)
        }
        "triangle-envelope" => {
            let band = if rest.is_empty() {
                None
            } else {
                Some(rest.parse().map_err(|_| bad("angular band", s))?)
            };
            MultiplierSpec::triangle_envelope(dim, band)
        }
        _ => return Err(bad("multiplier spec", s)),
    };
    m.map_err(|e| SpecError(format!("multiplier `{s}`: {e}")))
}

/// `ones | random:lo,hi | power:exponent | file:path` on the given grid.
pub fn input<R: Rng>(s: &str, dim: usize, side: usize, period: f64, rng: &mut R) -> Result<GridFunction, SpecError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let f = match kind {
        "ones" => GridFunction::constant(dim, side, period, num_complex::Complex64::new(1.0, 0.0)),
        "random" => {
            let (lo, hi) = rest.split_once(',').ok_or_else(|| bad("band", s))?;
            GridFunction::random_band_limited(dim, side, period, real(lo)?, real(hi)?, rng)
        }
        "power" => GridFunction::random_power_law(dim, side, period, real(rest)?, rng),
        "file" => {
            let bytes = std::fs::read(Path::new(rest)).map_err(|e| SpecError(format!("cannot read {rest}: {e}")))?;
            let f = from_bytes(&bytes).map_err(|e| SpecError(format!("{rest}: {e}")))?;
            if f.dim() != dim || f.side() != side || f.period() != period {
                return Err(SpecError(format!("{rest}: grid does not match --d/--n/--period")));
            }
            Ok(f)
        }
        _ => return Err(bad("input spec", s)),
    };
    f.map_err(|e| SpecError(format!("input `{s}`: {e}")))
}

/// `lo..hi` (inclusive).
pub fn int_range(s: &str) -> Result<(i32, i32), SpecError> {
    let (a, b) = s.split_once("..").ok_or_else(|| bad("range", s))?;
    let lo: i32 = a.trim().parse().map_err(|_| bad("range", s))?;
    let hi: i32 = b.trim().parse().map_err(|_| bad("range", s))?;
    if lo > hi {
        return Err(bad("range", s));
    }
    Ok((lo, hi))
}

pub fn real_list(s: &str) -> Result<Vec<f64>, SpecError> {
    s.split(',').map(real).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert!(dilation_set("point:1").unwrap().is_single_point());
        assert_eq!(dilation_set("interval:1,2").unwrap().hull(), [1.0, 2.0]);
        assert!(dilation_set("cantor:1/3:6").unwrap().intervals().len() == 64);
        assert!(dilation_set("disc:1").is_err());
        assert_eq!(reciprocal("inf").unwrap(), Q::zero());
        assert!(reciprocal("1/2").is_err());
        assert_eq!(int_range("2..7").unwrap(), (2, 7));
        assert_eq!(int_range("-5..2").unwrap(), (-5, 2));
        assert!(int_range("7..2").is_err());
        assert_eq!(multiplier("envelope:3/2", 1).unwrap().decay_a, rational("3/2").unwrap());
        assert!(multiplier("pointmass:0.25,0.5", 1).is_ok());
        assert!(multiplier("pointmass:0.25,0.5", 2).is_err());
    }
}
