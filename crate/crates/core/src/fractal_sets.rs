//! Dilation sets as finite unions of closed intervals.
//!
//! A [`DilationSet`] is always a finite union of closed intervals (degenerate
//! points allowed). Genuine fractals are approximated by a generation of their
//! construction, and the set remembers the finest scale at which that
//! generation is faithful. Covering numbers are exact: the greedy sweep is
//! optimal for unions of intervals on the line.

use crate::fit::ols;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for endpoint comparisons.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Extra Assouad window anchors per decade of offset from the hull ends.
pub const ANCHORS_PER_DECADE: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("empty dilation set")]
    Empty,
    #[error("resolution exceeded: scale {delta:e} is below the construction resolution {resolution:e}")]
    ResolutionExceeded { delta: f64, resolution: f64 },
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("dilation set endpoints must lie in [1, 2], got [{0}, {1}]")]
    OutOfRange(f64, f64),
    #[error("non-positive scale {0}")]
    BadScale(f64),
    #[error("a dimension fit needs at least 3 scales, got {0}")]
    TooFewScales(usize),
    #[error("reciprocal of a set touching 0")]
    ReciprocalOfZero,
    #[error("square root of a set with negative points")]
    SqrtOfNegative,
    #[error("theta must lie in [0, 1), got {0}")]
    BadTheta(f64),
    #[error("affine map needs a nonzero slope")]
    DegenerateAffine,
    #[error("invalid construction parameter: {0}")]
    BadConstruction(String),
}

/// Pointwise maps accepted by [`set_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Square,
    Sqrt,
    Reciprocal,
    Affine { a: f64, b: f64 },
}

impl SetOp {
    fn apply(self, x: f64) -> f64 {
        match self {
            SetOp::Square => x * x,
            SetOp::Sqrt => x.sqrt(),
            SetOp::Reciprocal => 1.0 / x,
            SetOp::Affine { a, b } => a * x + b,
        }
    }

    /// Largest |derivative| over `[lo, hi]`, used to carry resolutions along.
    fn lipschitz(self, lo: f64, hi: f64) -> f64 {
        match self {
            SetOp::Square => 2.0 * lo.abs().max(hi.abs()),
            SetOp::Sqrt => 0.5 / lo.max(f64::MIN_POSITIVE).sqrt(),
            SetOp::Reciprocal => 1.0 / (lo * lo),
            SetOp::Affine { a, .. } => a.abs(),
        }
    }
}

/// Where a set came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Explicit,
    Cantor {
        ratio: f64,
        depth: u32,
    },
    HarmonicSequence {
        terms: u32,
    },
    Transformed {
        op: SetOp,
        parent: Box<Provenance>,
    },
    HarmonicCombine {
        left: Box<Provenance>,
        right: Box<Provenance>,
    },
    MinkowskiSum {
        left: Box<Provenance>,
        right: Box<Provenance>,
    },
}

/// Affine frame `natural = scale·normalized + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub scale: f64,
    pub offset: f64,
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn to_natural(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    pub fn to_normalized(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }
}

/// A finite union of disjoint closed intervals, sorted by left endpoint.
///
/// Intervals are stored in natural coordinates. Sets built directly as
/// dilation sets live in `[1, 2]`; images under the set algebra may leave it,
/// and [`DilationSet::normalization`] gives the affine frame bringing them back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationSet {
    intervals: Vec<[f64; 2]>,
    provenance: Provenance,
    /// Finest scale at which this generation represents the intended set;
    /// zero for sets that are exact as stored.
    #[serde(default)]
    resolution: f64,
}

impl DilationSet {
    /// Builds a set from explicit intervals inside `[1, 2]`.
    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self, SetError> {
        for &[l, r] in &intervals {
            if !(1.0 - ENDPOINT_TOL..=2.0 + ENDPOINT_TOL).contains(&l)
                || !(1.0 - ENDPOINT_TOL..=2.0 + ENDPOINT_TOL).contains(&r)
            {
                return Err(SetError::OutOfRange(l, r));
            }
        }
        Self::from_natural(intervals, Provenance::Explicit, 0.0)
    }

    /// Builds a set in arbitrary (finite, real) coordinates.
    pub fn from_natural(
        intervals: Vec<[f64; 2]>,
        provenance: Provenance,
        resolution: f64,
    ) -> Result<Self, SetError> {
        if intervals.is_empty() {
            return Err(SetError::Empty);
        }
        for &[l, r] in &intervals {
            if !l.is_finite() || !r.is_finite() || l > r + ENDPOINT_TOL {
                return Err(SetError::InvalidInterval(l, r));
            }
        }
        Ok(Self {
            intervals: merge(intervals),
            provenance,
            resolution,
        })
    }

    pub fn point(t: f64) -> Result<Self, SetError> {
        Self::new(vec![[t, t]])
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, SetError> {
        Self::new(vec![[lo, hi]])
    }

    /// Generation `depth` of the Cantor construction keeping two end pieces of
    /// relative length `ratio`, mapped onto `[1, 2]`.
    pub fn cantor(ratio: f64, depth: u32) -> Result<Self, SetError> {
        if !(ratio > 0.0 && ratio < 0.5) {
            return Err(SetError::BadConstruction(format!(
                "cantor ratio must lie in (0, 1/2), got {ratio}"
            )));
        }
        if depth > 24 {
            return Err(SetError::BadConstruction(format!(
                "cantor depth {depth} exceeds 24"
            )));
        }
        let mut ivs = vec![[1.0_f64, 2.0_f64]];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(ivs.len() * 2);
            for [a, b] in ivs {
                let len = (b - a) * ratio;
                next.push([a, a + len]);
                next.push([b - len, b]);
            }
            ivs = next;
        }
        Self::from_natural(
            ivs,
            Provenance::Cantor { ratio, depth },
            ratio.powi(depth as i32),
        )
    }

    /// The points `1 + 1/n` for `n = 1..=terms`, a set whose Assouad dimension
    /// (1) exceeds its Minkowski dimension (1/2).
    pub fn harmonic_sequence(terms: u32) -> Result<Self, SetError> {
        if terms == 0 {
            return Err(SetError::Empty);
        }
        let ivs = (1..=terms)
            .map(|n| {
                let t = 1.0 + 1.0 / n as f64;
                [t, t]
            })
            .collect();
        let n = terms as f64;
        Self::from_natural(
            ivs,
            Provenance::HarmonicSequence { terms },
            1.0 / (n * (n + 1.0)),
        )
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Smallest and largest points.
    pub fn hull(&self) -> [f64; 2] {
        [self.intervals[0][0], self.intervals[self.intervals.len() - 1][1]]
    }

    pub fn is_single_point(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0][1] - self.intervals[0][0] <= ENDPOINT_TOL
    }

    /// Affine frame mapping `[1, 2]` onto coordinates that contain the set.
    ///
    /// Sets already inside `[1, 2]` get the identity. Otherwise a translation
    /// is used when the hull is shorter than one, else a rescaling of the hull
    /// onto `[1, 2]`.
    pub fn normalization(&self) -> Frame {
        let [lo, hi] = self.hull();
        if lo >= 1.0 - ENDPOINT_TOL && hi <= 2.0 + ENDPOINT_TOL {
            return Frame::IDENTITY;
        }
        let len = hi - lo;
        if len <= 1.0 {
            Frame {
                scale: 1.0,
                offset: lo - 1.0,
            }
        } else {
            Frame {
                scale: len,
                offset: lo - len,
            }
        }
    }

    /// The image of the set under the inverse of [`Self::normalization`].
    pub fn normalized(&self) -> DilationSet {
        let fr = self.normalization();
        if fr == Frame::IDENTITY {
            return self.clone();
        }
        let a = 1.0 / fr.scale;
        let b = -fr.offset / fr.scale;
        set_transform(self, SetOp::Affine { a, b }).expect("affine image of a valid set")
    }

    /// Restriction to a closed window, or `None` if the window misses the set.
    pub fn restrict(&self, lo: f64, hi: f64) -> Option<Vec<[f64; 2]>> {
        let start = self.intervals.partition_point(|iv| iv[1] < lo - ENDPOINT_TOL);
        let mut out = Vec::new();
        for iv in &self.intervals[start..] {
            if iv[0] > hi + ENDPOINT_TOL {
                break;
            }
            out.push([iv[0].max(lo), iv[1].min(hi)]);
        }
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }

    /// Left endpoints of the greedy minimal `delta`-cover; a finite sample of
    /// the set with one point per covering interval.
    pub fn cover_points(&self, delta: f64) -> Result<Vec<f64>, SetError> {
        if !(delta > 0.0) {
            return Err(SetError::BadScale(delta));
        }
        let mut pts = Vec::new();
        greedy_cover(&self.intervals, delta, |x| pts.push(x));
        Ok(pts)
    }

    /// Minimal `delta`-cover as closed intervals `[x, x + delta]`.
    pub fn cover_intervals(&self, delta: f64) -> Result<Vec<[f64; 2]>, SetError> {
        Ok(self
            .cover_points(delta)?
            .into_iter()
            .map(|x| [x, x + delta])
            .collect())
    }

    fn check_resolution(&self, delta: f64) -> Result<(), SetError> {
        if !(delta > 0.0) {
            return Err(SetError::BadScale(delta));
        }
        if delta < self.resolution * (1.0 - 1e-9) {
            return Err(SetError::ResolutionExceeded {
                delta,
                resolution: self.resolution,
            });
        }
        Ok(())
    }
}

/// Sorts and merges intervals whose gap is within [`ENDPOINT_TOL`].
fn merge(mut ivs: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    for iv in ivs.iter_mut() {
        if iv[1] < iv[0] {
            iv[1] = iv[0];
        }
    }
    ivs.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv[0] <= last[1] + ENDPOINT_TOL => last[1] = last[1].max(iv[1]),
            _ => out.push(iv),
        }
    }
    out
}

/// Greedy left-to-right sweep; calls `emit` with each covering interval's left end.
fn greedy_cover(ivs: &[[f64; 2]], delta: f64, mut emit: impl FnMut(f64)) -> u64 {
    let mut count = 0u64;
    let mut covered_to = f64::NEG_INFINITY;
    for &[lo, hi] in ivs {
        if hi <= covered_to + ENDPOINT_TOL {
            continue;
        }
        let mut x = if lo > covered_to + ENDPOINT_TOL { lo } else { covered_to };
        loop {
            emit(x);
            count += 1;
            covered_to = x + delta;
            if covered_to >= hi - ENDPOINT_TOL {
                break;
            }
            x = covered_to;
        }
    }
    count
}

fn greedy_count(ivs: &[[f64; 2]], delta: f64) -> u64 {
    let mut count = 0u64;
    let mut covered_to = f64::NEG_INFINITY;
    for &[lo, hi] in ivs {
        if hi <= covered_to + ENDPOINT_TOL {
            continue;
        }
        let x = if lo > covered_to + ENDPOINT_TOL { lo } else { covered_to };
        // Number of length-delta steps needed to reach hi from x (at least one).
        let k = (((hi - x) / delta) - 1e-9).ceil().max(1.0);
        count += k as u64;
        covered_to = x + k * delta;
    }
    count
}

/// N(E, δ): the minimal number of closed intervals of length δ covering E.
pub fn covering_number(set: &DilationSet, delta: f64) -> Result<u64, SetError> {
    if set.intervals.is_empty() {
        return Err(SetError::Empty);
    }
    if !(delta > 0.0) {
        return Err(SetError::BadScale(delta));
    }
    Ok(greedy_count(&set.intervals, delta))
}

/// Fitted dimension together with the data it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub scale_range: (f64, f64),
    pub fit_residual: f64,
    /// `(δ, N)` pairs; for Assouad estimates `N` is the windowed maximum.
    pub counts: Vec<(f64, u64)>,
}

fn validate_grid(set: &DilationSet, grid: &[f64]) -> Result<(f64, f64), SetError> {
    if grid.len() < 3 {
        return Err(SetError::TooFewScales(grid.len()));
    }
    for &d in grid {
        set.check_resolution(d)?;
    }
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Least-squares slope of log N(E,δ) against log(1/δ).
pub fn minkowski_dim_estimate(
    set: &DilationSet,
    delta_grid: &[f64],
) -> Result<DimensionEstimate, SetError> {
    let scale_range = validate_grid(set, delta_grid)?;
    let mut counts: Vec<(f64, u64)> = delta_grid
        .iter()
        .map(|&d| Ok((d, covering_number(set, d)?)))
        .collect::<Result<_, SetError>>()?;
    counts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x: Vec<f64> = counts.iter().map(|c| (1.0 / c.0).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let fit = ols(&x, &y);
    Ok(DimensionEstimate {
        value: fit.slope.clamp(0.0, 1.0),
        scale_range,
        fit_residual: fit.residual,
        counts,
    })
}

/// Left ends of candidate windows of length `w`: windows starting or ending
/// at every interval endpoint, plus log-spaced offsets from both hull ends.
fn window_starts(set: &DilationSet, w: f64) -> Vec<f64> {
    let mut starts = Vec::with_capacity(set.intervals.len() * 4 + 2 * ANCHORS_PER_DECADE);
    for &[l, r] in &set.intervals {
        starts.push(l);
        starts.push(r - w);
        if r > l {
            starts.push(r);
            starts.push(l - w);
        }
    }
    let [lo, hi] = set.hull();
    let len = hi - lo;
    if len > w {
        let step = 10f64.powf(1.0 / ANCHORS_PER_DECADE as f64);
        let mut off = w;
        while off < len {
            starts.push(lo + off);
            starts.push(hi - off - w);
            off *= step;
        }
    }
    starts
}

fn max_window_count(set: &DilationSet, w: f64, delta: f64) -> u64 {
    window_starts(set, w)
        .into_iter()
        .filter_map(|a| set.restrict(a, a + w))
        .map(|ivs| greedy_count(&ivs, delta))
        .max()
        .unwrap_or(1)
}

/// Assouad spectrum at `theta` (windows of length δ^θ), or the classical
/// Assouad dimension when `theta` is `None`.
///
/// With `theta`, the windowed maxima N*(δ) are regressed against log(|I|/δ).
/// Without it, for each window-to-scale ratio R = 2^j the maximum over the
/// whole grid and all anchors is regressed against log R.
pub fn assouad_dim_estimate(
    set: &DilationSet,
    theta: Option<f64>,
    delta_grid: &[f64],
) -> Result<DimensionEstimate, SetError> {
    let scale_range = validate_grid(set, delta_grid)?;
    let mut grid: Vec<f64> = delta_grid.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    match theta {
        Some(th) => {
            if !(0.0..1.0).contains(&th) {
                return Err(SetError::BadTheta(th));
            }
            let mut counts = Vec::with_capacity(grid.len());
            let mut x = Vec::with_capacity(grid.len());
            let mut y = Vec::with_capacity(grid.len());
            for &d in &grid {
                let w = d.powf(th);
                let n = max_window_count(set, w, d);
                counts.push((d, n));
                x.push((w / d).ln());
                y.push((n as f64).ln());
            }
            let fit = ols(&x, &y);
            Ok(DimensionEstimate {
                value: fit.slope.clamp(0.0, 1.0),
                scale_range,
                fit_residual: fit.residual,
                counts,
            })
        }
        None => {
            let [lo, hi] = set.hull();
            let span = (hi - lo).max(grid[grid.len() - 1]);
            // Window-to-scale ratios stop at the geometric mean of the grid's
            // extent, so the windows stay small relative to the whole set.
            let max_ratio = (span / grid[0]).sqrt();
            let mut ratios = Vec::new();
            let mut r = 4.0;
            while r <= max_ratio.max(4.0) && ratios.len() < 40 {
                ratios.push(r);
                r *= 2.0;
            }
            if ratios.len() < 2 {
                ratios = vec![2.0, 4.0];
            }
            let mut counts = Vec::with_capacity(ratios.len());
            let mut x = Vec::with_capacity(ratios.len());
            let mut y = Vec::with_capacity(ratios.len());
            for &ratio in &ratios {
                let mut best = 1u64;
                let mut best_delta = grid[0];
                for &d in &grid {
                    let w = ratio * d;
                    if w > 2.0 * span {
                        continue;
                    }
                    let n = max_window_count(set, w, d);
                    if n > best {
                        best = n;
                        best_delta = d;
                    }
                }
                counts.push((best_delta, best));
                x.push(ratio.ln());
                y.push((best as f64).ln());
            }
            let fit = ols(&x, &y);
            Ok(DimensionEstimate {
                value: fit.slope.clamp(0.0, 1.0),
                scale_range,
                fit_residual: fit.residual,
                counts,
            })
        }
    }
}

/// Interval-wise image under a monotone map, re-sorted and merged.
pub fn set_transform(set: &DilationSet, op: SetOp) -> Result<DilationSet, SetError> {
    let [lo, hi] = set.hull();
    match op {
        SetOp::Reciprocal if lo <= 0.0 && hi >= 0.0 => return Err(SetError::ReciprocalOfZero),
        SetOp::Sqrt if lo < 0.0 => return Err(SetError::SqrtOfNegative),
        SetOp::Affine { a, .. } if a == 0.0 => return Err(SetError::DegenerateAffine),
        _ => {}
    }
    let ivs = set
        .intervals
        .iter()
        .map(|&[l, r]| {
            let (a, b) = (op.apply(l), op.apply(r));
            if a <= b {
                [a, b]
            } else {
                [b, a]
            }
        })
        .collect();
    DilationSet::from_natural(
        ivs,
        Provenance::Transformed {
            op,
            parent: Box::new(set.provenance.clone()),
        },
        set.resolution * op.lipschitz(lo, hi),
    )
}

/// The map (t1, t2) ↦ t1·t2/√(t1² + t2²).
pub fn harmonic_map(t1: f64, t2: f64) -> f64 {
    t1 * t2 / (t1 * t1 + t2 * t2).sqrt()
}

/// Image of E1 × E2 under [`harmonic_map`].
///
/// On positive pairs the map increases in each coordinate, so every product
/// of intervals maps onto the interval between the images of its corners.
pub fn harmonic_combine(e1: &DilationSet, e2: &DilationSet) -> Result<DilationSet, SetError> {
    if e1.intervals.is_empty() || e2.intervals.is_empty() {
        return Err(SetError::Empty);
    }
    let mut ivs = Vec::with_capacity(e1.intervals.len() * e2.intervals.len());
    for &[l1, r1] in &e1.intervals {
        for &[l2, r2] in &e2.intervals {
            ivs.push([harmonic_map(l1, l2), harmonic_map(r1, r2)]);
        }
    }
    DilationSet::from_natural(
        ivs,
        Provenance::HarmonicCombine {
            left: Box::new(e1.provenance.clone()),
            right: Box::new(e2.provenance.clone()),
        },
        e1.resolution + e2.resolution,
    )
}

/// E1 + E2 as pairwise interval sums.
pub fn minkowski_sum(e1: &DilationSet, e2: &DilationSet) -> Result<DilationSet, SetError> {
    if e1.intervals.is_empty() || e2.intervals.is_empty() {
        return Err(SetError::Empty);
    }
    let mut ivs = Vec::with_capacity(e1.intervals.len() * e2.intervals.len());
    for &[l1, r1] in &e1.intervals {
        for &[l2, r2] in &e2.intervals {
            ivs.push([l1 + l2, r1 + r2]);
        }
    }
    DilationSet::from_natural(
        ivs,
        Provenance::MinkowskiSum {
            left: Box::new(e1.provenance.clone()),
            right: Box::new(e2.provenance.clone()),
        },
        e1.resolution + e2.resolution,
    )
}

/// Geometric grid `base^{-k}` for `k` in `lo..=hi`.
pub fn geometric_grid(base: f64, lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| base.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Exhaustive search over cover placements: each interval must cover the
    /// leftmost uncovered point `x`, and its left end is tried on a lattice of
    /// positions in `[x - δ, x]`.
    fn brute_force_cover(ivs: &[[f64; 2]], delta: f64) -> u64 {
        fn first_uncovered(ivs: &[[f64; 2]], from: f64) -> Option<f64> {
            for &[l, r] in ivs {
                if r > from + ENDPOINT_TOL {
                    return Some(if l > from + ENDPOINT_TOL { l } else { from });
                }
            }
            None
        }
        fn go(
            ivs: &[[f64; 2]],
            delta: f64,
            from: f64,
            memo: &mut HashMap<u64, u64>,
        ) -> u64 {
            let Some(x) = first_uncovered(ivs, from) else {
                return 0;
            };
            let key = x.to_bits();
            if let Some(&v) = memo.get(&key) {
                return v;
            }
            let mut best = u64::MAX;
            for j in 0..4 {
                let left = x - delta * j as f64 / 4.0;
                let right = left + delta;
                best = best.min(1 + go(ivs, delta, right, memo));
            }
            memo.insert(key, best);
            best
        }
        // The first call must cover the leftmost point itself.
        let start = ivs[0][0] - 1.0;
        go(ivs, delta, start, &mut HashMap::new())
    }

    #[test]
    fn full_interval_quarter_scale() {
        let e = DilationSet::interval(1.0, 2.0).unwrap();
        assert_eq!(covering_number(&e, 0.25).unwrap(), 4);
    }

    #[test]
    fn single_point_is_one() {
        let e = DilationSet::point(1.0).unwrap();
        for d in [1.0, 0.1, 1e-9] {
            assert_eq!(covering_number(&e, d).unwrap(), 1);
        }
    }

    #[test]
    fn cantor_generation_counts_match_exhaustive_search() {
        for k in 1..=5u32 {
            let e = DilationSet::cantor(1.0 / 3.0, k).unwrap();
            let delta = 3f64.powi(-(k as i32));
            let greedy = covering_number(&e, delta).unwrap();
            assert_eq!(greedy, 1 << k);
            assert_eq!(brute_force_cover(e.intervals(), delta), greedy);
        }
    }

    #[test]
    fn greedy_count_matches_emitted_cover() {
        let e = DilationSet::cantor(0.3, 6).unwrap();
        for d in [0.3, 0.05, 0.01, 0.003] {
            let pts = e.cover_points(d).unwrap();
            assert_eq!(pts.len() as u64, covering_number(&e, d).unwrap());
            // Every interval endpoint lies in some cover interval.
            for &[l, r] in e.intervals() {
                for p in [l, r] {
                    assert!(pts.iter().any(|&x| p >= x - 1e-12 && p <= x + d + 1e-12));
                }
            }
        }
    }

    #[test]
    fn resolution_is_enforced() {
        let e = DilationSet::cantor(1.0 / 3.0, 4).unwrap();
        let err = minkowski_dim_estimate(&e, &[0.1, 0.05, 1e-4]).unwrap_err();
        assert!(err.to_string().contains("resolution exceeded"));
    }

    #[test]
    fn full_interval_dimension_one() {
        let e = DilationSet::interval(1.0, 2.0).unwrap();
        let est = minkowski_dim_estimate(&e, &geometric_grid(2.0, 3, 8)).unwrap();
        assert!((est.value - 1.0).abs() < 0.02, "{}", est.value);
    }

    #[test]
    fn point_dimension_zero() {
        let e = DilationSet::point(1.0).unwrap();
        let grid = geometric_grid(2.0, 3, 8);
        assert_eq!(minkowski_dim_estimate(&e, &grid).unwrap().value, 0.0);
        assert_eq!(assouad_dim_estimate(&e, None, &grid).unwrap().value, 0.0);
        assert_eq!(assouad_dim_estimate(&e, Some(0.5), &grid).unwrap().value, 0.0);
    }

    #[test]
    fn cantor_dimension_against_exact_recursion() {
        let e = DilationSet::cantor(1.0 / 3.0, 12).unwrap();
        let grid = geometric_grid(3.0, 4, 10);
        let est = minkowski_dim_estimate(&e, &grid).unwrap();
        // Oracle: N(E, 3^-k) = 2^k exactly.
        for &(d, n) in &est.counts {
            let k = (-(d.ln()) / 3f64.ln()).round() as i32;
            assert_eq!(n, 1u64 << k);
        }
        assert!((est.value - 2f64.ln() / 3f64.ln()).abs() < 0.05);
    }

    #[test]
    fn interval_assouad_is_one() {
        let e = DilationSet::interval(1.0, 2.0).unwrap();
        let grid = geometric_grid(2.0, 4, 9);
        for th in [None, Some(0.0), Some(0.5)] {
            let v = assouad_dim_estimate(&e, th, &grid).unwrap().value;
            assert!((v - 1.0).abs() < 0.02, "{th:?}: {v}");
        }
    }

    #[test]
    fn harmonic_sequence_shows_assouad_gap() {
        let e = DilationSet::harmonic_sequence(200).unwrap();
        let grid = geometric_grid(2.0, 6, 14);
        let m = minkowski_dim_estimate(&e, &grid).unwrap().value;
        let a = assouad_dim_estimate(&e, None, &grid).unwrap().value;
        assert!(a >= 0.45, "assouad {a}");
        assert!(a >= m + 0.1, "assouad {a} minkowski {m}");
    }

    #[test]
    fn harmonic_sequence_window_search_oracle() {
        // Direct oracle: the window [1, 1 + w] at δ holds every point 1 + 1/n
        // with 1/n ≤ w; count its greedy cover by brute listing.
        let e = DilationSet::harmonic_sequence(200).unwrap();
        let delta = 1.0 / (150.0 * 150.0);
        let w = 64.0 * delta;
        let mut pts: Vec<f64> = (1..=200)
            .map(|n| 1.0 + 1.0 / n as f64)
            .filter(|&t| t <= 1.0 + w)
            .collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        let mut n = 0;
        let mut end = f64::NEG_INFINITY;
        for p in pts {
            if p > end + ENDPOINT_TOL {
                n += 1;
                end = p + delta;
            }
        }
        assert!(max_window_count(&e, w, delta) >= n);
    }

    #[test]
    fn transforms() {
        let e = DilationSet::interval(1.0, 2.0).unwrap();
        let sq = set_transform(&e, SetOp::Square).unwrap();
        assert_eq!(sq.intervals(), &[[1.0, 4.0]]);
        let nz = sq.normalized();
        assert_eq!(nz.intervals(), &[[1.0, 2.0]]);
        let p = DilationSet::point(1.0).unwrap();
        assert_eq!(set_transform(&p, SetOp::Reciprocal).unwrap().intervals(), &[[1.0, 1.0]]);
        let z = DilationSet::from_natural(vec![[0.0, 1.0]], Provenance::Explicit, 0.0).unwrap();
        assert_eq!(set_transform(&z, SetOp::Reciprocal), Err(SetError::ReciprocalOfZero));
    }

    #[test]
    fn sqrt_of_cantor_keeps_dimension() {
        let e = DilationSet::cantor(1.0 / 3.0, 10).unwrap();
        let s = set_transform(&e, SetOp::Sqrt).unwrap();
        let grid = geometric_grid(3.0, 3, 8);
        let v = minkowski_dim_estimate(&s, &grid).unwrap().value;
        assert!((v - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{v}");
    }

    #[test]
    fn harmonic_combine_examples() {
        let one = DilationSet::point(1.0).unwrap();
        let c = harmonic_combine(&one, &one).unwrap();
        assert!((c.intervals()[0][0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(c.is_single_point());
        let full = DilationSet::interval(1.0, 2.0).unwrap();
        let c = harmonic_combine(&one, &full).unwrap();
        let [l, r] = c.intervals()[0];
        assert!((l - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        // Dense sampling of the map stays within the computed hull.
        for i in 0..=1000 {
            let t = 1.0 + i as f64 / 1000.0;
            let v = harmonic_map(1.0, t);
            assert!(v >= l - 1e-15 && v <= r + 1e-15);
        }
        let cc = harmonic_combine(&full, &full).unwrap();
        let grid = geometric_grid(2.0, 3, 8);
        assert!((minkowski_dim_estimate(&cc, &grid).unwrap().value - 1.0).abs() < 0.03);
    }

    #[test]
    fn minkowski_sum_examples() {
        let one = DilationSet::point(1.0).unwrap();
        assert_eq!(minkowski_sum(&one, &one).unwrap().intervals(), &[[2.0, 2.0]]);
        let full = DilationSet::interval(1.0, 2.0).unwrap();
        assert_eq!(minkowski_sum(&full, &one).unwrap().intervals(), &[[2.0, 3.0]]);
        let c = DilationSet::cantor(1.0 / 3.0, 8).unwrap();
        let s = minkowski_sum(&c, &c).unwrap();
        let v = minkowski_dim_estimate(&s, &geometric_grid(3.0, 2, 6)).unwrap().value;
        assert!((0.60..=1.0).contains(&v), "{v}");
    }

    #[test]
    fn json_round_trip() {
        let e = DilationSet::cantor(1.0 / 3.0, 3).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: DilationSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
