//! Exact exponent regions in Hölder-exponent coordinates.
//!
//! Every region is a convex polygon in the `(1/p, 1/q)` plane (or `(1/p, 1/r)`
//! for the linear region) with exact rational vertices, per-facet open/closed
//! flags, per-vertex inclusion flags, and a rule for the admissible `1/r`
//! above each point. No floating point enters the geometry.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;
use std::fmt;
use thiserror::Error;

/// Exact rational scalar.
pub type Q = BigRational;

/// `n/d` as an exact rational.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"3/4"`, `"2"` or `"-1/2"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("admissibility insufficient: need 2a > d + beta (a = {a}, d = {d}, beta = {beta})")]
    AdmissibilityInsufficient { d: u32, a: Q, beta: Q },
    #[error("Assouad below Minkowski: gamma = {gamma} < beta = {beta}")]
    AssouadBelowMinkowski { beta: Q, gamma: Q },
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("region is not a single-scale region: {0}")]
    NotSingleScale(RegionLabel),
    #[error("sufficient ceiling {sufficient} exceeds necessary ceiling {necessary}")]
    Inconsistent { sufficient: Q, necessary: Q },
}

/// A 2D point with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct P2 {
    pub x: Q,
    pub y: Q,
}

impl P2 {
    pub fn new(x: Q, y: Q) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for P2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `(1/p, 1/q, 1/r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentTriple {
    pub inv_p: Q,
    pub inv_q: Q,
    pub inv_r: Q,
}

impl ExponentTriple {
    /// Validated constructor: `0 ≤ 1/p, 1/q ≤ 1` and `1/r ≥ 0`.
    pub fn new(inv_p: Q, inv_q: Q, inv_r: Q) -> Result<Self, RegionError> {
        let unit = |v: &Q| !v.is_negative() && *v <= Q::one();
        if !unit(&inv_p) || !unit(&inv_q) || inv_r.is_negative() {
            return Err(RegionError::BadParameter(format!(
                "exponent triple ({inv_p}, {inv_q}, {inv_r}) outside [0,1]²×[0,∞)"
            )));
        }
        Ok(Self { inv_p, inv_q, inv_r })
    }

    /// Unchecked constructor, for membership queries far outside the box.
    pub fn raw(inv_p: Q, inv_q: Q, inv_r: Q) -> Self {
        Self { inv_p, inv_q, inv_r }
    }

    /// From Lebesgue exponents; `f64::INFINITY` maps to 0.
    pub fn from_exponents(p: &Q, qq: &Q, r: &Q) -> Self {
        let inv = |v: &Q| if v.is_zero() { Q::zero() } else { v.recip() };
        Self::raw(inv(p), inv(qq), inv(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    SufficientMultiscale,
    SufficientSinglescaleL2,
    Necessary,
    LinearQ,
    LiftedHolder,
    SparseGate,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::SufficientMultiscale => "sufficient_multiscale",
            RegionLabel::SufficientSinglescaleL2 => "sufficient_singlescale_L2",
            RegionLabel::Necessary => "necessary",
            RegionLabel::LinearQ => "linear_Q",
            RegionLabel::LiftedHolder => "lifted_holder",
            RegionLabel::SparseGate => "sparse_gate",
        };
        f.write_str(s)
    }
}

/// Parameters a region was built from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionParams {
    pub d: u32,
    pub a: Option<Q>,
    pub beta: Option<Q>,
    pub gamma: Option<Q>,
    pub inv_r: Option<Q>,
}

/// Edge from `vertices[from]` to `vertices[to]`; `closed` says whether its
/// relative interior belongs to the region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub from: usize,
    pub to: usize,
    pub closed: bool,
}

/// Which plane the polygon lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    /// `(1/p, 1/q)`, with `1/r` governed by the region's [`RSlice`].
    PQ,
    /// `(1/p, 1/r)` for linear operators; `1/q` is ignored.
    PR,
}

/// Admissible `1/r` above a point `(x, y)` of the polygon.
#[derive(Debug, Clone, PartialEq)]
pub enum RSlice {
    /// `1/r = x + y`.
    Holder,
    /// `1/r` equal to a constant.
    Fixed(Q),
    /// `1/r ∈ [base, x + y]` when `x + y > 1`, else `1/r = base`.
    Lifted { base: Q },
    /// `1/r` between the lower and upper envelopes of the convex hull of
    /// the generators; the region is treated as open.
    Hull { generators: Vec<[Q; 3]> },
    /// No constraint on `1/r` (planar regions in the `(1/p, 1/r)` plane).
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    Interior,
    BoundaryIncluded,
    BoundaryExcluded,
    Outside,
}

impl Membership {
    pub fn is_member(self) -> bool {
        matches!(self, Membership::Interior | Membership::BoundaryIncluded)
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Interior => "interior",
            Membership::BoundaryIncluded => "boundary_included",
            Membership::BoundaryExcluded => "boundary_excluded",
            Membership::Outside => "outside",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRegion {
    pub label: RegionLabel,
    pub params: RegionParams,
    /// Extreme points in counter-clockwise order.
    pub vertices: Vec<P2>,
    pub facets: Vec<Facet>,
    pub vertex_included: Vec<bool>,
    pub slice: RSlice,
    pub axes: Axes,
}

fn cross(o: &P2, a: &P2, b: &P2) -> Q {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// Convex hull with collinear points dropped, counter-clockwise.
pub fn convex_hull(points: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<P2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<P2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Keeps the part of a convex CCW polygon where `a·x + b·y ≤ c`.
fn clip(poly: &[P2], a: &Q, b: &Q, c: &Q) -> Vec<P2> {
    let val = |p: &P2| a * &p.x + b * &p.y - c;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let p = &poly[i];
        let n = &poly[(i + 1) % poly.len()];
        let (vp, vn) = (val(p), val(n));
        if !vp.is_positive() {
            out.push(p.clone());
        }
        if (vp.is_negative() && vn.is_positive()) || (vp.is_positive() && vn.is_negative()) {
            let t = &vp / (&vp - &vn);
            out.push(P2::new(&p.x + &t * (&n.x - &p.x), &p.y + &t * (&n.y - &p.y)));
        }
    }
    convex_hull(&out)
}

fn clip_unit_square(poly: &[P2]) -> Vec<P2> {
    let (z, o) = (Q::zero(), Q::one());
    let mut p = clip(poly, &o, &z, &o);
    p = clip(&p, &z, &o, &o);
    p = clip(&p, &-o.clone(), &z, &z);
    clip(&p, &z, &-o, &z)
}

/// Is `p` on the closed segment `[a, b]`?
fn on_segment(p: &P2, a: &P2, b: &P2) -> bool {
    cross(a, b, p).is_zero()
        && p.x >= a.x.clone().min(b.x.clone())
        && p.x <= a.x.clone().max(b.x.clone())
        && p.y >= a.y.clone().min(b.y.clone())
        && p.y <= a.y.clone().max(b.y.clone())
}

/// Which boundary parts are included: closed segments (whole, endpoints
/// decided separately) and individually included points.
struct BoundaryRule {
    closed_segments: Vec<(P2, P2, bool)>,
    points: Vec<P2>,
}

impl ExponentRegion {
    fn build(
        label: RegionLabel,
        params: RegionParams,
        vertices: Vec<P2>,
        rule: BoundaryRule,
        slice: RSlice,
        axes: Axes,
    ) -> Self {
        let n = vertices.len();
        let facets = (0..n)
            .map(|i| {
                let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
                let closed = rule
                    .closed_segments
                    .iter()
                    .any(|(s, t, _)| on_segment(a, s, t) && on_segment(b, s, t));
                Facet {
                    from: i,
                    to: (i + 1) % n,
                    closed,
                }
            })
            .collect();
        let vertex_included = vertices
            .iter()
            .map(|v| {
                rule.points.contains(v)
                    || rule.closed_segments.iter().any(|(s, t, ends)| {
                        on_segment(v, s, t) && (*ends || (v != s && v != t))
                    })
            })
            .collect();
        Self {
            label,
            params,
            vertices,
            facets,
            vertex_included,
            slice,
            axes,
        }
    }

    /// Classification of a planar point against the polygon and its flags.
    pub fn classify_2d(&self, p: &P2) -> Membership {
        let n = self.vertices.len();
        if n == 0 {
            return Membership::Outside;
        }
        if n == 1 {
            return if *p == self.vertices[0] {
                if self.vertex_included[0] {
                    Membership::BoundaryIncluded
                } else {
                    Membership::BoundaryExcluded
                }
            } else {
                Membership::Outside
            };
        }
        if let Some(i) = self.vertices.iter().position(|v| v == p) {
            return if self.vertex_included[i] {
                Membership::BoundaryIncluded
            } else {
                Membership::BoundaryExcluded
            };
        }
        let mut on_edge = None;
        for i in 0..n {
            let c = cross(&self.vertices[i], &self.vertices[(i + 1) % n], p);
            if c.is_negative() {
                return Membership::Outside;
            }
            if c.is_zero() {
                if n == 2 && !on_segment(p, &self.vertices[0], &self.vertices[1]) {
                    return Membership::Outside;
                }
                on_edge = Some(i);
            }
        }
        match on_edge {
            None if n >= 3 => Membership::Interior,
            None => Membership::Outside,
            Some(i) => {
                if self.facets[i].closed {
                    Membership::BoundaryIncluded
                } else {
                    Membership::BoundaryExcluded
                }
            }
        }
    }

    /// Point-in-region with facet-flag awareness.
    pub fn membership(&self, t: &ExponentTriple) -> Membership {
        let (z, o) = (Q::zero(), Q::one());
        let in_box = |v: &Q| *v >= z && *v <= o;
        match self.axes {
            Axes::PR => {
                if !in_box(&t.inv_p) || !in_box(&t.inv_r) {
                    return Membership::Outside;
                }
                return self.classify_2d(&P2::new(t.inv_p.clone(), t.inv_r.clone()));
            }
            Axes::PQ => {
                if !in_box(&t.inv_p) || !in_box(&t.inv_q) || t.inv_r.is_negative() {
                    return Membership::Outside;
                }
            }
        }
        let p = P2::new(t.inv_p.clone(), t.inv_q.clone());
        let c2 = self.classify_2d(&p);
        if c2 == Membership::Outside {
            return Membership::Outside;
        }
        let sum = &t.inv_p + &t.inv_q;
        match &self.slice {
            RSlice::Free => c2,
            RSlice::Holder => {
                if t.inv_r == sum {
                    c2
                } else {
                    Membership::Outside
                }
            }
            RSlice::Fixed(v) => {
                if t.inv_r == *v {
                    c2
                } else {
                    Membership::Outside
                }
            }
            RSlice::Lifted { base } => {
                let top = if sum > o { sum.clone() } else { base.clone() };
                if t.inv_r < *base {
                    return Membership::Outside;
                }
                if t.inv_r > top {
                    // Limit points of the lifted segments above the line x + y = 1.
                    return if sum == o && t.inv_r <= sum {
                        Membership::BoundaryExcluded
                    } else {
                        Membership::Outside
                    };
                }
                if top == *base || (t.inv_r > *base && t.inv_r < top) {
                    c2
                } else if c2 == Membership::BoundaryExcluded {
                    Membership::BoundaryExcluded
                } else {
                    Membership::BoundaryIncluded
                }
            }
            RSlice::Hull { generators } => {
                let Some((lo, hi)) = hull_envelope(generators, &p) else {
                    return Membership::Outside;
                };
                if t.inv_r < lo || t.inv_r > hi {
                    Membership::Outside
                } else if c2 == Membership::Interior && t.inv_r > lo && t.inv_r < hi {
                    Membership::Interior
                } else {
                    Membership::BoundaryExcluded
                }
            }
        }
    }

    /// Largest `x + y` over the closed polygon.
    pub fn max_sum(&self) -> Q {
        self.vertices
            .iter()
            .map(|v| &v.x + &v.y)
            .max()
            .unwrap_or_else(Q::zero)
    }

    /// JSON export with rationals written as strings.
    pub fn to_json(&self) -> serde_json::Value {
        let s = |v: &Q| v.to_string();
        let opt = |v: &Option<Q>| v.as_ref().map(|x| x.to_string());
        let r_intervals = match &self.slice {
            RSlice::Holder => json!({"rule": "holder"}),
            RSlice::Fixed(v) => json!({"rule": "fixed", "inv_r": s(v)}),
            RSlice::Lifted { base } => json!({"rule": "lifted", "base": s(base)}),
            RSlice::Hull { generators } => json!({
                "rule": "hull",
                "generators": generators.iter().map(|g| [s(&g[0]), s(&g[1]), s(&g[2])]).collect::<Vec<_>>()
            }),
            RSlice::Free => json!({"rule": "free"}),
        };
        json!({
            "label": self.label.to_string(),
            "axes": match self.axes { Axes::PQ => "inv_p,inv_q", Axes::PR => "inv_p,inv_r" },
            "params": {
                "d": self.params.d,
                "a": opt(&self.params.a),
                "beta": opt(&self.params.beta),
                "gamma": opt(&self.params.gamma),
                "inv_r": opt(&self.params.inv_r),
            },
            "vertices": self.vertices.iter().map(|v| [s(&v.x), s(&v.y)]).collect::<Vec<_>>(),
            "vertex_included": self.vertex_included,
            "facets": self.facets.iter().map(|f| json!({"from": f.from, "to": f.to, "closed": f.closed})).collect::<Vec<_>>(),
            "r_intervals": r_intervals,
        })
    }

    /// Vertex dump for plotting: exact and floating coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,x,y,x_float,y_float,included\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!(
                "{i},{},{},{},{},{}\n",
                v.x,
                v.y,
                q_to_f64(&v.x),
                q_to_f64(&v.y),
                self.vertex_included[i]
            ));
        }
        out
    }
}

/// Lower and upper envelope of the convex hull of `gens` above `p`.
///
/// A point of the projected hull is a convex combination of at most three
/// generators, so the envelopes are extremes over all triangles, segments and
/// single generators whose projection contains `p`.
fn hull_envelope(gens: &[[Q; 3]], p: &P2) -> Option<(Q, Q)> {
    let proj: Vec<P2> = gens.iter().map(|g| P2::new(g[0].clone(), g[1].clone())).collect();
    let mut lo: Option<Q> = None;
    let mut hi: Option<Q> = None;
    let mut take = |v: Q| {
        if lo.as_ref().is_none_or(|l| v < *l) {
            lo = Some(v.clone());
        }
        if hi.as_ref().is_none_or(|h| v > *h) {
            hi = Some(v);
        }
    };
    let n = gens.len();
    for i in 0..n {
        if proj[i] == *p {
            take(gens[i][2].clone());
        }
        for j in (i + 1)..n {
            if proj[i] != proj[j] && on_segment(p, &proj[i], &proj[j]) {
                let (dx, dy) = (&proj[j].x - &proj[i].x, &proj[j].y - &proj[i].y);
                let t = if !dx.is_zero() {
                    (&p.x - &proj[i].x) / dx
                } else {
                    (&p.y - &proj[i].y) / dy
                };
                take(&gens[i][2] + &t * (&gens[j][2] - &gens[i][2]));
            }
            for k in (j + 1)..n {
                let det = cross(&proj[i], &proj[j], &proj[k]);
                if det.is_zero() {
                    continue;
                }
                let l1 = cross(p, &proj[j], &proj[k]) / &det;
                let l2 = cross(&proj[i], p, &proj[k]) / &det;
                let l0 = Q::one() - &l1 - &l2;
                if l0.is_negative() || l1.is_negative() || l2.is_negative() {
                    continue;
                }
                // Barycentric weights: l1 on i, l2 on j, l0 on k.
                take(&l1 * &gens[i][2] + &l2 * &gens[j][2] + &l0 * &gens[k][2]);
            }
        }
    }
    Some((lo?, hi?))
}

fn check_unit(name: &str, v: &Q) -> Result<(), RegionError> {
    if v.is_negative() || *v > Q::one() {
        return Err(RegionError::BadParameter(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_admissible(d: u32, a: &Q, beta: &Q, strict: bool) -> Result<Q, RegionError> {
    if d == 0 {
        return Err(RegionError::BadParameter("d must be positive".into()));
    }
    check_unit("beta", beta)?;
    let lhs = qi(2) * a;
    let rhs = qi(d as i64) + beta;
    if lhs < rhs || (strict && lhs == rhs) {
        return Err(RegionError::AdmissibilityInsufficient {
            d,
            a: a.clone(),
            beta: beta.clone(),
        });
    }
    Ok((qi(2) * a - beta) / qi(2 * d as i64))
}

fn pt(x: Q, y: Q) -> P2 {
    P2::new(x, y)
}

fn multiscale_polygon(c: &Q) -> Vec<P2> {
    let (z, o, h) = (Q::zero(), Q::one(), q(1, 2));
    let hull = convex_hull(&[
        pt(o.clone(), z.clone()),
        pt(z.clone(), z.clone()),
        pt(z.clone(), o.clone()),
        pt(h.clone(), c.clone()),
        pt(c.clone(), h),
    ]);
    clip_unit_square(&hull)
}

/// Hölder region of the multi-scale maximal operator: interior of the hull of
/// (1,0), (0,0), (0,1), (1/2, c), (c, 1/2) with c = (2a − β)/2d, together with
/// the open segments from (1,0) to (0,0) and from (0,0) to (0,1), and the origin.
pub fn sufficient_region_multiscale(d: u32, a: &Q, beta: &Q) -> Result<ExponentRegion, RegionError> {
    let c = check_admissible(d, a, beta, true)?;
    let (z, o) = (Q::zero(), Q::one());
    let origin = pt(z.clone(), z.clone());
    Ok(ExponentRegion::build(
        RegionLabel::SufficientMultiscale,
        RegionParams {
            d,
            a: Some(a.clone()),
            beta: Some(beta.clone()),
            ..Default::default()
        },
        multiscale_polygon(&c),
        BoundaryRule {
            closed_segments: vec![
                (pt(o.clone(), z.clone()), origin.clone(), false),
                (origin.clone(), pt(z, o), false),
            ],
            points: vec![origin],
        },
        RSlice::Holder,
        Axes::PQ,
    ))
}

/// `(1/p, 1/q)` region for `L^p × L^q → L^2` bounds of the single-scale operator.
pub fn sufficient_region_singlescale_l2(d: u32, a: &Q, beta: &Q) -> Result<ExponentRegion, RegionError> {
    let c = check_admissible(d, a, beta, true)?;
    let (z, o, h) = (Q::zero(), Q::one(), q(1, 2));
    let params = RegionParams {
        d,
        a: Some(a.clone()),
        beta: Some(beta.clone()),
        ..Default::default()
    };
    let threshold = qi(d as i64) + beta / qi(2);
    if *a <= threshold {
        let verts = convex_hull(&[
            pt(h.clone(), z.clone()),
            pt(z.clone(), h.clone()),
            pt(c.clone(), h.clone()),
            pt(h.clone(), c),
        ]);
        Ok(ExponentRegion::build(
            RegionLabel::SufficientSinglescaleL2,
            params,
            verts,
            BoundaryRule {
                closed_segments: vec![(pt(h.clone(), z.clone()), pt(z, h.clone()), true)],
                points: vec![],
            },
            RSlice::Fixed(h),
            Axes::PQ,
        ))
    } else {
        let verts = convex_hull(&[
            pt(z.clone(), z.clone()),
            pt(o.clone(), z.clone()),
            pt(o.clone(), h.clone()),
            pt(h.clone(), o.clone()),
            pt(z, o),
        ]);
        Ok(ExponentRegion::build(
            RegionLabel::SufficientSinglescaleL2,
            params,
            verts,
            BoundaryRule {
                closed_segments: vec![],
                points: vec![],
            },
            RSlice::Fixed(h),
            Axes::PQ,
        ))
    }
}

/// The three branches of the linear-operator exponent function; the middle
/// branch is absent when β = γ = 0.
pub fn m_linear_branches(d: u32, inv_r: &Q, beta: &Q, gamma: &Q) -> Result<Vec<Q>, RegionError> {
    if d == 0 {
        return Err(RegionError::BadParameter("d must be positive".into()));
    }
    check_unit("beta", beta)?;
    check_unit("gamma", gamma)?;
    if gamma < beta {
        return Err(RegionError::AssouadBelowMinkowski {
            beta: beta.clone(),
            gamma: gamma.clone(),
        });
    }
    if inv_r.is_negative() {
        return Err(RegionError::BadParameter(format!("1/r = {inv_r} is negative")));
    }
    let dq = qi(d as i64);
    let one = Q::one();
    let b1 = (&dq - &one) / &dq + (&one - beta) * inv_r / &dq;
    let b3 = &dq * inv_r;
    let denom = beta * (&dq - &one) + qi(2) * gamma;
    let mut out = vec![b1];
    if !denom.is_zero() {
        let num0 = beta * (&dq - &one);
        let num1 = (&dq - beta) * qi(2) * gamma - (&dq - &one) * beta;
        out.push(num0 / &denom + num1 / &denom * inv_r);
    }
    out.push(b3);
    Ok(out)
}

pub fn m_linear(d: u32, inv_r: &Q, beta: &Q, gamma: &Q) -> Result<Q, RegionError> {
    Ok(m_linear_branches(d, inv_r, beta, gamma)?
        .into_iter()
        .min()
        .expect("at least two branches"))
}

/// Necessary ceiling `1 + m_linear(d, r, β, γ)` for `1/p + 1/q`.
pub fn necessary_bound(d: u32, inv_r: &Q, beta: &Q, gamma: &Q) -> Result<Q, RegionError> {
    Ok(Q::one() + m_linear(d, inv_r, beta, gamma)?)
}

/// Slice at fixed `1/r` of the necessary region `1/r ≤ 1/p + 1/q ≤ 1 + m_linear`.
pub fn necessary_region(d: u32, inv_r: &Q, beta: &Q, gamma: &Q) -> Result<ExponentRegion, RegionError> {
    let ceiling = necessary_bound(d, inv_r, beta, gamma)?;
    let (z, o) = (Q::zero(), Q::one());
    let square = vec![
        pt(z.clone(), z.clone()),
        pt(o.clone(), z.clone()),
        pt(o.clone(), o.clone()),
        pt(z.clone(), o.clone()),
    ];
    let mut poly = clip(&square, &o, &o, &ceiling);
    poly = clip(&poly, &-o.clone(), &-o.clone(), &-inv_r.clone());
    let closed: Vec<(P2, P2, bool)> = (0..poly.len())
        .map(|i| (poly[i].clone(), poly[(i + 1) % poly.len()].clone(), true))
        .collect();
    let points = poly.clone();
    Ok(ExponentRegion::build(
        RegionLabel::Necessary,
        RegionParams {
            d,
            beta: Some(beta.clone()),
            gamma: Some(gamma.clone()),
            inv_r: Some(inv_r.clone()),
            ..Default::default()
        },
        poly,
        BoundaryRule {
            closed_segments: closed,
            points,
        },
        RSlice::Fixed(inv_r.clone()),
        Axes::PQ,
    ))
}

/// Adds, above every member with `1/p + 1/q > 1`, the segment of `1/r` up to
/// the Hölder value `1/p + 1/q`.
pub fn lift_to_holder(region: &ExponentRegion) -> Result<ExponentRegion, RegionError> {
    let RSlice::Fixed(base) = &region.slice else {
        return Err(RegionError::NotSingleScale(region.label));
    };
    if region.label != RegionLabel::SufficientSinglescaleL2 {
        return Err(RegionError::NotSingleScale(region.label));
    }
    let mut out = region.clone();
    out.label = RegionLabel::LiftedHolder;
    out.slice = RSlice::Lifted { base: base.clone() };
    Ok(out)
}

/// Open region used to gate sparse experiments: the interior of the convex
/// hull of the Banach Hölder triangle, the `L^2`-target polygon and its
/// lifted Hölder points.
pub fn sparse_gate_region(d: u32, a: &Q, beta: &Q) -> Result<ExponentRegion, RegionError> {
    let l2 = sufficient_region_singlescale_l2(d, a, beta)?;
    let RSlice::Fixed(base) = &l2.slice else {
        unreachable!("L2 region has a fixed slice")
    };
    let (z, o) = (Q::zero(), Q::one());
    let mut gens: Vec<[Q; 3]> = vec![
        [z.clone(), z.clone(), z.clone()],
        [o.clone(), z.clone(), o.clone()],
        [z.clone(), o.clone(), o.clone()],
    ];
    for v in &l2.vertices {
        gens.push([v.x.clone(), v.y.clone(), base.clone()]);
        let s = &v.x + &v.y;
        if s > o {
            gens.push([v.x.clone(), v.y.clone(), s]);
        }
    }
    let proj: Vec<P2> = gens.iter().map(|g| pt(g[0].clone(), g[1].clone())).collect();
    let verts = convex_hull(&proj);
    Ok(ExponentRegion::build(
        RegionLabel::SparseGate,
        l2.params.clone(),
        verts,
        BoundaryRule {
            closed_segments: vec![],
            points: vec![],
        },
        RSlice::Hull { generators: gens },
        Axes::PQ,
    ))
}

/// Closed convex hull of Q1..Q4 in the `(1/p, 1/r)` plane.
pub fn linear_region_q(d: u32, beta: &Q, gamma: &Q) -> Result<ExponentRegion, RegionError> {
    if d < 2 {
        return Err(RegionError::BadParameter("linear region needs d ≥ 2".into()));
    }
    check_unit("beta", beta)?;
    check_unit("gamma", gamma)?;
    if gamma < beta {
        return Err(RegionError::AssouadBelowMinkowski {
            beta: beta.clone(),
            gamma: gamma.clone(),
        });
    }
    let verts = convex_hull(&linear_q_points(d, beta, gamma));
    let n = verts.len();
    let closed = (0..n)
        .map(|i| (verts[i].clone(), verts[(i + 1) % n].clone(), true))
        .collect();
    Ok(ExponentRegion::build(
        RegionLabel::LinearQ,
        RegionParams {
            d,
            beta: Some(beta.clone()),
            gamma: Some(gamma.clone()),
            ..Default::default()
        },
        verts.clone(),
        BoundaryRule {
            closed_segments: closed,
            points: verts,
        },
        RSlice::Free,
        Axes::PR,
    ))
}

/// The four generating points Q1, Q2(β), Q3(β), Q4(γ).
pub fn linear_q_points(d: u32, beta: &Q, gamma: &Q) -> [P2; 4] {
    let dq = qi(d as i64);
    let one = Q::one();
    let q2 = (&dq - &one) / (&dq - &one + beta);
    let q3x = (&dq - beta) / (&dq - beta + &one);
    let q3y = &one / (&dq - beta + &one);
    let den4 = &dq * &dq + qi(2) * gamma - &one;
    [
        pt(Q::zero(), Q::zero()),
        pt(q2.clone(), q2),
        pt(q3x, q3y),
        pt(&dq * (&dq - &one) / &den4, (&dq - &one) / &den4),
    ]
}

/// Sufficient versus necessary ceilings for `1/p + 1/q` at fixed `1/r`.
///
/// The sufficient side is the largest `1/p + 1/q` reachable in the closed
/// multi-scale Hölder region on the line `1/p + 1/q = 1/r`, capped by the
/// region's own maximum; the necessary side is `1 + m_linear`. The multi-scale
/// polygon is built under the non-strict admissibility `2a ≥ d + β`, where the
/// Banach Hölder bounds still apply.
pub fn region_gap(d: u32, a: &Q, beta: &Q, gamma: &Q, inv_r: &Q) -> Result<(Q, Q), RegionError> {
    let c = check_admissible(d, a, beta, false)?;
    let poly_max = multiscale_polygon(&c)
        .iter()
        .map(|v| &v.x + &v.y)
        .max()
        .unwrap_or_else(Q::zero);
    let sufficient = inv_r.clone().min(poly_max);
    let necessary = necessary_bound(d, inv_r, beta, gamma)?;
    if sufficient > necessary {
        return Err(RegionError::Inconsistent {
            sufficient,
            necessary,
        });
    }
    Ok((sufficient, necessary))
}
