//! Dyadic sparse families, their verification, and empirical sparse bounds.
//!
//! The families here come from a direct Calderón–Zygmund stopping time on the
//! inputs' local `L^p` averages, not from the continuity-estimate argument
//! used in the literature; what is checked is the *form* of the conclusion:
//! the pairing `⟨M(f, g), h⟩` is dominated by a sparse form with a constant
//! that stays put as the inputs move and dilate.
//!
//! Dyadic cubes are anchored at the torus origin and require a power-of-two
//! grid side.

use crate::exponent_regions::{q_to_f64, sparse_gate_region, Membership, Q};
use crate::fractal_sets::DilationSet;
use crate::operator_engine::{default_resolution, multiscale_maximal, EngineError, GridFunction, MultiplierSpec};
use crate::exponent_regions::ExponentTriple;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparseError {
    #[error("dyadic cubes need a power-of-two grid side, got {0}")]
    NotDyadic(usize),
    #[error("cube at level {level} lies outside the grid")]
    CubeOutOfRange { level: u32 },
    #[error("exponent not in region: {0}")]
    NotInRegion(String),
    #[error("averaging exponent must be ≥ 1, got {0}")]
    BadExponent(f64),
    #[error("input shapes differ")]
    ShapeMismatch,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Grid geometry shared by every cube and family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub dim: usize,
    /// log2 of the grid side.
    pub depth: u32,
}

impl DyadicGrid {
    pub fn of(f: &GridFunction) -> Result<Self, SparseError> {
        let n = f.side();
        if !n.is_power_of_two() {
            return Err(SparseError::NotDyadic(n));
        }
        Ok(Self {
            dim: f.dim(),
            depth: n.trailing_zeros(),
        })
    }

    pub fn side(&self) -> usize {
        1 << self.depth
    }

    pub fn cells(&self) -> usize {
        self.side().pow(self.dim as u32)
    }
}

/// Cube of side `period · 2^{−level}` with lattice corner `corner` (in units
/// of its own side).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub corner: Vec<u64>,
}

impl DyadicCube {
    pub fn root(dim: usize) -> Self {
        Self {
            level: 0,
            corner: vec![0; dim],
        }
    }

    pub fn check(&self, grid: &DyadicGrid) -> Result<(), SparseError> {
        if self.level > grid.depth
            || self.corner.len() != grid.dim
            || self.corner.iter().any(|&c| c >= 1u64 << self.level)
        {
            return Err(SparseError::CubeOutOfRange { level: self.level });
        }
        Ok(())
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.corner.len();
        (0..1u64 << d)
            .map(|bits| DyadicCube {
                level: self.level + 1,
                corner: self
                    .corner
                    .iter()
                    .enumerate()
                    .map(|(a, &c)| 2 * c + ((bits >> (d - 1 - a)) & 1))
                    .collect(),
            })
            .collect()
    }

    /// Side length in cells.
    pub fn cell_side(&self, grid: &DyadicGrid) -> usize {
        1 << (grid.depth - self.level)
    }

    pub fn cell_count(&self, grid: &DyadicGrid) -> usize {
        self.cell_side(grid).pow(grid.dim as u32)
    }

    /// Row-major flat indices of the grid cells in the cube, ascending.
    pub fn cells(&self, grid: &DyadicGrid) -> Vec<usize> {
        let s = self.cell_side(grid);
        let n = grid.side();
        let mut out = Vec::with_capacity(self.cell_count(grid));
        let mut idx = vec![0usize; grid.dim];
        loop {
            let flat = idx
                .iter()
                .zip(&self.corner)
                .fold(0, |acc, (&i, &c)| acc * n + c as usize * s + i);
            out.push(flat);
            let mut a = grid.dim;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < s {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Whether `flat` lies in the cube.
    pub fn contains(&self, grid: &DyadicGrid, flat: usize) -> bool {
        let n = grid.side();
        let shift = grid.depth - self.level;
        let mut rem = flat;
        for a in (0..grid.dim).rev() {
            if ((rem % n) >> shift) as u64 != self.corner[a] {
                return false;
            }
            rem /= n;
        }
        true
    }

    fn pyramid_index(&self) -> usize {
        let m = 1usize << self.level;
        self.corner.iter().fold(0, |acc, &c| acc * m + c as usize)
    }
}

/// Sums of `|f|^p` over every dyadic cube, level by level.
#[derive(Debug, Clone)]
pub struct Pyramid {
    grid: DyadicGrid,
    p: f64,
    sums: Vec<Vec<f64>>,
}

impl Pyramid {
    pub fn new(f: &GridFunction, p: f64) -> Result<Self, SparseError> {
        if !(p >= 1.0) {
            return Err(SparseError::BadExponent(p));
        }
        let grid = DyadicGrid::of(f)?;
        let finest: Vec<f64> = f.samples().iter().map(|v| v.norm().powf(p)).collect();
        let mut sums = vec![finest];
        for level in (0..grid.depth).rev() {
            let m = 1usize << level;
            let fine = sums.last().expect("nonempty");
            let mut coarse = vec![0.0; m.pow(grid.dim as u32)];
            for (k, v) in fine.iter().enumerate() {
                // Halve every coordinate of the fine index.
                let (mut rem, mut idx, mut stride) = (k, 0usize, 1usize);
                for _ in 0..grid.dim {
                    idx += ((rem % (2 * m)) / 2) * stride;
                    rem /= 2 * m;
                    stride *= m;
                }
                coarse[idx] += v;
            }
            sums.push(coarse);
        }
        sums.reverse();
        Ok(Self { grid, p, sums })
    }

    /// `⟨f⟩_{Q,p}`.
    pub fn average(&self, q: &DyadicCube) -> f64 {
        let s = self.sums[q.level as usize][q.pyramid_index()];
        (s / q.cell_count(&self.grid) as f64).powf(1.0 / self.p)
    }
}

/// `⟨f⟩_{Q,p} = (|Q|^{-1} ∫_Q |f|^p)^{1/p}` by cell sums.
pub fn local_average(f: &GridFunction, q: &DyadicCube, p: f64) -> Result<f64, SparseError> {
    if !(p >= 1.0) {
        return Err(SparseError::BadExponent(p));
    }
    let grid = DyadicGrid::of(f)?;
    q.check(&grid)?;
    let cells = q.cells(&grid);
    let s: f64 = cells.iter().map(|&c| f.samples()[c].norm().powf(p)).sum();
    Ok((s / cells.len() as f64).powf(1.0 / p))
}

/// Cubes with designated witness cells `E_Q ⊆ Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFamily {
    pub grid: DyadicGrid,
    pub period: f64,
    pub eta: Q,
    pub cubes: Vec<DyadicCube>,
    /// Ascending flat cell indices of each `E_Q`.
    pub witness_cells: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutsideCube { cube: usize, cell: usize },
    Overlap { first: usize, second: usize, cell: usize },
    TooSmall { cube: usize, fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl SparseFamily {
    pub fn empty(grid: DyadicGrid, period: f64, eta: Q) -> Self {
        Self {
            grid,
            period,
            eta,
            cubes: vec![],
            witness_cells: vec![],
        }
    }

    /// Adds `Q` with `E_Q = Q`.
    pub fn push_full(&mut self, q: DyadicCube) {
        self.witness_cells.push(q.cells(&self.grid));
        self.cubes.push(q);
    }

    pub fn cube_volume(&self, q: &DyadicCube) -> f64 {
        (self.period / (1u64 << q.level) as f64).powi(self.grid.dim as i32)
    }

    /// JSON with run-length encoded witness sets: `[[start, length], …]` per cube.
    pub fn to_json(&self) -> serde_json::Value {
        let rle: Vec<Vec<[usize; 2]>> = self.witness_cells.iter().map(|c| run_lengths(c)).collect();
        serde_json::json!({
            "eta": self.eta.to_string(),
            "dim": self.grid.dim,
            "side": self.grid.side(),
            "period": self.period,
            "cubes": self.cubes.iter().map(|q| serde_json::json!({"level": q.level, "corner": q.corner})).collect::<Vec<_>>(),
            "witness_cells": rle,
        })
    }
}

fn run_lengths(cells: &[usize]) -> Vec<[usize; 2]> {
    let mut out: Vec<[usize; 2]> = vec![];
    for &c in cells {
        match out.last_mut() {
            Some(run) if run[0] + run[1] == c => run[1] += 1,
            _ => out.push([c, 1]),
        }
    }
    out
}

/// Checks `E_Q ⊆ Q`, pairwise disjointness and `|E_Q| ≥ η|Q|` cell by cell.
pub fn verify_sparsity(family: &SparseFamily) -> SparsityReport {
    let grid = &family.grid;
    let mut owner: Vec<Option<usize>> = vec![None; grid.cells()];
    let mut violations = vec![];
    for (k, (q, cells)) in family.cubes.iter().zip(&family.witness_cells).enumerate() {
        if q.check(grid).is_err() {
            violations.push(Violation::OutsideCube {
                cube: k,
                cell: cells.first().copied().unwrap_or(0),
            });
            continue;
        }
        for &c in cells {
            if c >= owner.len() || !q.contains(grid, c) {
                violations.push(Violation::OutsideCube { cube: k, cell: c });
                continue;
            }
            match owner[c] {
                Some(first) => violations.push(Violation::Overlap {
                    first,
                    second: k,
                    cell: c,
                }),
                None => owner[c] = Some(k),
            }
        }
        let total = q.cell_count(grid);
        // |E_Q| ≥ η|Q| ⇔ cells · den ≥ num · total, exactly.
        let lhs = Q::from_integer(cells.len().into());
        if lhs < &family.eta * Q::from_integer(total.into()) {
            violations.push(Violation::TooSmall {
                cube: k,
                fraction: cells.len() as f64 / total as f64,
            });
        }
    }
    SparsityReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// Averaging exponents `(p, q, r′)` of the sparse form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormExponents {
    pub p: f64,
    pub q: f64,
    pub r_dual: f64,
}

impl FormExponents {
    fn check(&self) -> Result<(), SparseError> {
        for v in [self.p, self.q, self.r_dual] {
            if !(v >= 1.0) {
                return Err(SparseError::BadExponent(v));
            }
        }
        Ok(())
    }
}

/// `Σ_{Q∈S} ⟨f⟩_{Q,p} ⟨g⟩_{Q,q} ⟨h⟩_{Q,r′} |Q|`.
pub fn sparse_form(
    family: &SparseFamily,
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    ex: FormExponents,
) -> Result<f64, SparseError> {
    ex.check()?;
    if !f.same_shape(g) || !f.same_shape(h) {
        return Err(SparseError::ShapeMismatch);
    }
    if family.cubes.is_empty() {
        return Ok(0.0);
    }
    let pf = Pyramid::new(f, ex.p)?;
    let pg = Pyramid::new(g, ex.q)?;
    let ph = Pyramid::new(h, ex.r_dual)?;
    if pf.grid != family.grid {
        return Err(SparseError::ShapeMismatch);
    }
    Ok(form_from_pyramids(family, [&pf, &pg, &ph]))
}

fn form_from_pyramids(family: &SparseFamily, p: [&Pyramid; 3]) -> f64 {
    family
        .cubes
        .iter()
        .map(|q| p[0].average(q) * p[1].average(q) * p[2].average(q) * family.cube_volume(q))
        .sum()
}

/// Output of one stopping-time construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Domination {
    pub family: SparseFamily,
    /// `Σ |op| |h|` over the torus.
    pub pairing: f64,
    pub form: f64,
    /// `pairing / form` (0 when both vanish).
    pub ratio: f64,
    /// Cubes at `max_depth` that were selected but could not be refined.
    pub truncated: usize,
    /// Stopping thresholds that had to be raised above `2^{d+1}`.
    pub raised_thresholds: usize,
}

/// Calderón–Zygmund stopping construction from the cubes at `top_level`.
///
/// Within each stopping cube `Q`, the maximal descendants `Q′` with
/// `⟨u⟩_{Q′} > λ ⟨u⟩_Q` for some `u ∈ {f, g, h}` are selected, starting from
/// `λ = 2^{d+1}`; if they cover more than half of `Q`, `λ` doubles. Then
/// `E_Q = Q ∖ ∪Q′` and each `Q′` becomes a stopping cube in turn.
#[allow(clippy::too_many_arguments)]
pub fn greedy_sparse_domination(
    op_output: &GridFunction,
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    ex: FormExponents,
    top_level: u32,
    max_depth: u32,
) -> Result<Domination, SparseError> {
    ex.check()?;
    for u in [f, g, h] {
        if !op_output.same_shape(u) {
            return Err(SparseError::ShapeMismatch);
        }
    }
    let grid = DyadicGrid::of(f)?;
    if top_level > grid.depth {
        return Err(SparseError::CubeOutOfRange { level: top_level });
    }
    let bottom = max_depth.min(grid.depth);
    let pyr = [Pyramid::new(f, ex.p)?, Pyramid::new(g, ex.q)?, Pyramid::new(h, ex.r_dual)?];
    let mut family = SparseFamily::empty(grid, f.period(), Q::new(1.into(), 2.into()));
    let mut stack: Vec<DyadicCube> = {
        let mut level = vec![DyadicCube::root(grid.dim)];
        for _ in 0..top_level {
            level = level.iter().flat_map(|c| c.children()).collect();
        }
        level.reverse();
        level
    };
    let (mut truncated, mut raised) = (0, 0);
    let base = 2f64.powi(grid.dim as i32 + 1);
    while let Some(q) = stack.pop() {
        let avg = [pyr[0].average(&q), pyr[1].average(&q), pyr[2].average(&q)];
        let half = q.cell_count(&grid) / 2;
        let mut lambda = base;
        let selected = loop {
            let sel = select_descendants(&q, &pyr, &avg, lambda, bottom);
            let covered: usize = sel.iter().map(|c| c.cell_count(&grid)).sum();
            if covered <= half {
                break sel;
            }
            lambda *= 2.0;
        };
        if lambda > base {
            raised += 1;
        }
        if q.level == bottom && q.level < grid.depth {
            truncated += 1;
        }
        let mut cells = q.cells(&grid);
        if !selected.is_empty() {
            let mut drop = vec![false; grid.cells()];
            for c in &selected {
                for k in c.cells(&grid) {
                    drop[k] = true;
                }
            }
            cells.retain(|&k| !drop[k]);
        }
        family.cubes.push(q);
        family.witness_cells.push(cells);
        for c in selected.into_iter().rev() {
            stack.push(c);
        }
    }
    let pairing: f64 = op_output
        .samples()
        .iter()
        .zip(h.samples())
        .map(|(a, b)| a.norm() * b.norm())
        .sum::<f64>()
        * f.spacing().powi(grid.dim as i32);
    let form = form_from_pyramids(&family, [&pyr[0], &pyr[1], &pyr[2]]);
    let ratio = if pairing == 0.0 { 0.0 } else { pairing / form };
    Ok(Domination {
        family,
        pairing,
        form,
        ratio,
        truncated,
        raised_thresholds: raised,
    })
}

fn select_descendants(
    q: &DyadicCube,
    pyr: &[Pyramid; 3],
    avg: &[f64; 3],
    lambda: f64,
    bottom: u32,
) -> Vec<DyadicCube> {
    let mut out = vec![];
    if q.level >= bottom {
        return out;
    }
    let mut stack = q.children();
    stack.reverse();
    while let Some(c) = stack.pop() {
        let hit = (0..3).any(|k| pyr[k].average(&c) > lambda * avg[k]);
        if hit {
            out.push(c);
        } else if c.level < bottom {
            let mut ch = c.children();
            ch.reverse();
            stack.extend(ch);
        }
    }
    out
}

/// One input triple of a sweep.
#[derive(Debug, Clone)]
pub struct InputTriple {
    pub label: String,
    pub f: GridFunction,
    pub g: GridFunction,
    pub h: GridFunction,
}

/// Gaussian bump `exp(−|x|²/(2 w²))` centered at the origin, then shifted by
/// `shift` cells.
pub fn gaussian_bump(dim: usize, side: usize, period: f64, width: f64, shift: &[i64]) -> Result<GridFunction, SparseError> {
    let f = GridFunction::from_fn(dim, side, period, |x| {
        let r2: f64 = x
            .iter()
            .map(|&v| {
                let c = if v < period / 2.0 { v } else { v - period };
                c * c
            })
            .sum();
        num_complex::Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })?;
    Ok(f.roll(shift))
}

/// `f = g = h` Gaussian bumps at every `(width, shift)` combination.
pub fn bump_family(
    dim: usize,
    side: usize,
    period: f64,
    widths: &[f64],
    shifts: &[Vec<i64>],
) -> Result<Vec<InputTriple>, SparseError> {
    let mut out = vec![];
    for &w in widths {
        for s in shifts {
            let b = gaussian_bump(dim, side, period, w, s)?;
            out.push(InputTriple {
                label: format!("width={w} shift={s:?}"),
                f: b.clone(),
                g: b.clone(),
                h: b,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scales: (i32, i32),
    pub resolution: Option<f64>,
    pub top_level: u32,
    pub max_depth: u32,
    /// Largest allowed max/min ratio across the sweep.
    pub stability_factor: f64,
}

impl SweepConfig {
    fn scale_range(&self) -> RangeInclusive<i32> {
        self.scales.0..=self.scales.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub pairing: f64,
    pub form: f64,
    pub ratio: f64,
    pub cubes: usize,
    pub sparse_at_half: bool,
    pub truncated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub multiplier: String,
    pub exponents: FormExponents,
    pub rows: Vec<SweepRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub spread: f64,
    pub stable: bool,
    pub all_sparse: bool,
}

impl SweepReport {
    pub fn to_csv(&self) -> Result<String, SparseError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| SparseError::NotInRegion(format!("csv: {e}"));
        w.write_record(["label", "pairing", "form", "ratio", "cubes", "sparse_at_half", "truncated"])
            .map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                format!("{:e}", r.pairing),
                format!("{:e}", r.form),
                format!("{:e}", r.ratio),
                r.cubes.to_string(),
                r.sparse_at_half.to_string(),
                r.truncated.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| SparseError::NotInRegion(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Runs the stopping construction on `M(f, g)` for every input, without the
/// exponent gate. `M` is the multiscale maximal operator over `2^l E`.
pub fn sparse_ratio_sweep(
    m: &MultiplierSpec,
    set: &DilationSet,
    ex: FormExponents,
    inputs: &[InputTriple],
    cfg: &SweepConfig,
) -> Result<SweepReport, SparseError> {
    ex.check()?;
    let rows: Vec<SweepRow> = inputs
        .par_iter()
        .map(|inp| {
            let res = cfg.resolution.unwrap_or_else(|| default_resolution(&inp.f));
            let op = multiscale_maximal(&inp.f, &inp.g, m, set, cfg.scale_range(), res)?;
            let dom = greedy_sparse_domination(&op, &inp.f, &inp.g, &inp.h, ex, cfg.top_level, cfg.max_depth)?;
            Ok(SweepRow {
                label: inp.label.clone(),
                pairing: dom.pairing,
                form: dom.form,
                ratio: dom.ratio,
                cubes: dom.family.cubes.len(),
                sparse_at_half: verify_sparsity(&dom.family).valid,
                truncated: dom.truncated,
            })
        })
        .collect::<Result<_, SparseError>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let spread = if rows.is_empty() { 1.0 } else { max_ratio / min_ratio };
    Ok(SweepReport {
        multiplier: m.name(),
        exponents: ex,
        all_sparse: rows.iter().all(|r| r.sparse_at_half),
        stable: spread.is_finite() && spread <= cfg.stability_factor,
        rows,
        max_ratio,
        min_ratio,
        spread,
    })
}

/// Accepts `(1/p, 1/q, 1/r)` only when `r > 1`, `p, q ≤ r` and the triple is
/// interior to the sparse gate region for the multiplier's decay and `β`.
pub fn sparse_gate(d: u32, m: &MultiplierSpec, beta: &Q, t: &ExponentTriple) -> Result<(), SparseError> {
    let refuse = |why: String| Err(SparseError::NotInRegion(why));
    if t.inv_r >= Q::one() {
        return refuse("need r > 1".into());
    }
    if t.inv_p < t.inv_r || t.inv_q < t.inv_r {
        return refuse("need p, q ≤ r".into());
    }
    let region = match sparse_gate_region(d, &m.decay_a, beta) {
        Ok(r) => r,
        Err(e) => return refuse(e.to_string()),
    };
    match region.membership(t) {
        Membership::Interior => Ok(()),
        other => refuse(format!("{other:?} for {}", m.name())),
    }
}

/// [`sparse_ratio_sweep`] behind [`sparse_gate`]; the form uses `(p, q, r′)`.
pub fn sparse_constant_sweep(
    m: &MultiplierSpec,
    set: &DilationSet,
    beta: &Q,
    t: &ExponentTriple,
    inputs: &[InputTriple],
    cfg: &SweepConfig,
) -> Result<SweepReport, SparseError> {
    sparse_gate(m.dim as u32, m, beta, t)?;
    let inv_r = q_to_f64(&t.inv_r);
    let r_dual = if inv_r.is_zero() { 1.0 } else { 1.0 / (1.0 - inv_r) };
    let ex = FormExponents {
        p: 1.0 / q_to_f64(&t.inv_p),
        q: 1.0 / q_to_f64(&t.inv_q),
        r_dual,
    };
    sparse_ratio_sweep(m, set, ex, inputs, cfg)
}
