//! `fracmax` command-line front end.
//!
//! Every subcommand writes its outputs plus `config.json` (the resolved
//! parameters, replayable with `--config`) and `manifest.json` into `--out`.
//! Exit codes: 0 success, 1 input or precondition error, 2 internal failure.

mod output;
mod specs;

use clap::{Args, Parser, Subcommand};
use fracmax::exponent_regions::{
    lift_to_holder, linear_region_q, necessary_bound, necessary_region, q_to_f64, region_gap, sparse_gate_region,
    sufficient_region_multiscale, sufficient_region_singlescale_l2, ExponentRegion, ExponentTriple, Q,
};
use fracmax::fractal_sets::{assouad_dim_estimate, geometric_grid, harmonic_combine, minkowski_dim_estimate};
use fracmax::operator_engine::{
    apply_bilinear_direct, biparameter_piece_decay, continuity_modulus, default_resolution, estimate_beta, io,
    maximal_over_dilations, measure_piece_decay, DecayConfig, GridFunction, Slot,
};
use fracmax::sparse_verifier::{bump_family, sparse_constant_sweep, sparse_ratio_sweep, FormExponents, SweepConfig};
use fracmax::witness_lab::{
    biparameter_witness_experiment, scaling_experiment, Exponents, ScalingConfig, Tolerances, WitnessKind,
};
use num_traits::{One, Zero};
use output::OutputDir;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use specs::SpecError;
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Input(e.0)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

/// Module errors reflect violated preconditions of the request.
fn input<E: std::fmt::Display>(context: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Input(format!("{context}: {e}"))
}

fn internal<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Internal(anyhow::anyhow!("{e}"))
}

#[derive(Parser)]
#[command(name = "fracmax", version, about = "Bilinear maximal operators over fractal dilation sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "fracmax-out", global = true)]
    out: PathBuf,
    /// JSON config whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Minkowski and Assouad dimension estimates of a dilation set.
    Dim(DimArgs),
    /// Exact exponent regions, necessary ceilings and gaps.
    Region(RegionArgs),
    /// Apply a bilinear multiplier (or its maximal function) to two inputs.
    Run(RunArgs),
    /// Decay of diagonal Littlewood–Paley pieces.
    Decay(DecayArgs),
    /// Continuity modulus under translation of one or both inputs.
    Continuity(ContinuityArgs),
    /// Necessary-condition witness scaling.
    Scaling(ScalingArgs),
    /// Empirical sparse domination sweep.
    Sparse(SparseArgs),
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct DimArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Set spec: point:T | interval:A,B | cantor:RATIO:DEPTH | harmonic:N | file:PATH.
    #[arg(long = "E")]
    set: Option<String>,
    /// Shorthand for `--E cantor:RATIO:DEPTH`.
    #[arg(long)]
    cantor: Option<String>,
    /// Shorthand for `--E interval:A,B`.
    #[arg(long)]
    interval: Option<String>,
    /// Shorthand for `--E point:T`.
    #[arg(long)]
    point: Option<String>,
    /// Also estimate the Assouad dimension.
    #[arg(long)]
    assouad: bool,
    /// Assouad spectrum parameter θ ∈ (0, 1).
    #[arg(long)]
    theta: Option<f64>,
    /// Scales 2^-lo..2^-hi as `lo..hi`.
    #[arg(long)]
    scales: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct RegionArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// multiscale | singlescale | lifted | sparse-gate.
    #[arg(long)]
    sufficient: Option<String>,
    #[arg(long)]
    necessary: bool,
    /// Closed hull of the linear-operator vertices (d ≥ 2).
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    gap: bool,
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Decay exponent of the multiplier.
    #[arg(long)]
    a: Option<String>,
    #[arg(long, default_value = "0")]
    beta: String,
    /// Assouad dimension (defaults to β).
    #[arg(long)]
    gamma: Option<String>,
    /// Target exponent r (or `inf`).
    #[arg(long)]
    r: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct RunArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// constant | pointmass:Y,Z | envelope:A | spherical | triangle-envelope[:BAND].
    #[arg(long)]
    m: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Second dilation (defaults to `--t`).
    #[arg(long)]
    t2: Option<f64>,
    /// Take the maximal function over this set instead of a single dilation.
    #[arg(long = "E")]
    set: Option<String>,
    /// ones | random:LO,HI | power:EXP | file:PATH.
    #[arg(long, default_value = "ones")]
    f: String,
    #[arg(long, default_value = "ones")]
    g: String,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 8.0)]
    period: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct DecayArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    m: String,
    #[arg(long = "E")]
    set: String,
    /// Second set for the biparameter operator.
    #[arg(long = "E2")]
    set2: Option<String>,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Diagonal bands as `lo..hi`.
    #[arg(long, default_value = "1..4")]
    bands: String,
    /// Grid side; defaults to the smallest power of two resolving the top band.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 8.0)]
    period: f64,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minkowski dimension used for the prediction (estimated if absent).
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct ContinuityArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    m: String,
    #[arg(long = "E")]
    set: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value = "power:0.5")]
    f: String,
    #[arg(long, default_value = "random:0,inf")]
    g: String,
    /// Shifts 2^-lo..2^-hi along the first axis, as `lo..hi`.
    #[arg(long, default_value = "2..6")]
    h: String,
    /// first | second | both.
    #[arg(long, default_value = "first")]
    slot: String,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 8.0)]
    period: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct ScalingArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// ball | knapp | assouad:ALPHA | biparameter.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long = "E")]
    set: String,
    /// Second set (biparameter only).
    #[arg(long = "E2")]
    set2: Option<String>,
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value = "2")]
    q: String,
    #[arg(long, default_value = "1")]
    r: String,
    /// Dimension used in the prediction (estimated if absent).
    #[arg(long)]
    beta: Option<f64>,
    /// δ = 2^-lo..2^-hi as `lo..hi`.
    #[arg(long, default_value = "3..7")]
    deltas: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    tol_lhs: f64,
    #[arg(long, default_value_t = 0.15)]
    tol_rhs: f64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct SparseArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long, default_value = "spherical")]
    m: String,
    #[arg(long = "E", default_value = "point:1")]
    set: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value = "2")]
    q: String,
    #[arg(long, default_value = "2")]
    r: String,
    /// Exact Minkowski dimension for the gate.
    #[arg(long, default_value = "0")]
    beta: String,
    /// Skip the exponent gate (report ratios outside the proven range).
    #[arg(long)]
    no_gate: bool,
    /// Gaussian bump widths.
    #[arg(long, default_value = "0.05,0.1,0.2,0.4")]
    widths: String,
    /// Number of translations per width.
    #[arg(long, default_value_t = 8)]
    shifts: usize,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 16.0)]
    period: f64,
    /// Dyadic scales 2^l of the maximal operator, as `lo..hi`.
    #[arg(long, default_value = "-5..2", allow_hyphen_values = true)]
    scales: String,
    #[arg(long, default_value_t = 0)]
    top_level: u32,
    #[arg(long, default_value_t = 10)]
    max_depth: u32,
    #[arg(long, default_value_t = 3.0)]
    stability: f64,
}

trait HasCommon {
    fn common(&self) -> &Common;
    fn set_common(&mut self, c: Common);
}

macro_rules! has_common {
    ($($t:ty),*) => {$(
        impl HasCommon for $t {
            fn common(&self) -> &Common { &self.common }
            fn set_common(&mut self, c: Common) { self.common = c; }
        }
    )*};
}
has_common!(DimArgs, RegionArgs, RunArgs, DecayArgs, ContinuityArgs, ScalingArgs, SparseArgs);

/// Overlays a config file on the flag values. The file holds either the
/// parameter object itself or `{"command": …, "params": {…}}`.
fn resolve<T: Serialize + DeserializeOwned + HasCommon>(command: &str, args: T) -> Result<(T, Value), CliError> {
    let common = args.common().clone();
    let mut params = serde_json::to_value(&args).map_err(internal)?;
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        let overlay = match (cfg.get("command"), cfg.get("params")) {
            (Some(c), Some(p)) => {
                if c != command {
                    return Err(CliError::Input(format!("config is for `{c}`, not `{command}`")));
                }
                p.clone()
            }
            _ => cfg,
        };
        let Value::Object(overlay) = overlay else {
            return Err(CliError::Input("config must be a JSON object".into()));
        };
        let target = params.as_object_mut().expect("parameters serialize to an object");
        for (k, v) in overlay {
            if !target.contains_key(&k) {
                return Err(CliError::Input(format!("unknown config key `{k}` for `{command}`")));
            }
            target.insert(k, v);
        }
    }
    let mut resolved: T =
        serde_json::from_value(params.clone()).map_err(|e| CliError::Input(format!("config: {e}")))?;
    resolved.set_common(common);
    Ok((resolved, json!({"command": command, "params": params})))
}

fn open_out(common: &Common, config: &Value) -> Result<OutputDir, CliError> {
    let mut out = OutputDir::create(&common.out)?;
    out.write_json("config.json", config)?;
    Ok(out)
}

fn csv_or(s: Result<String, impl std::fmt::Display>) -> Result<String, CliError> {
    s.map_err(internal)
}

fn cmd_dim(args: DimArgs) -> Result<(), CliError> {
    let (a, config) = resolve("dim", args)?;
    let specs: Vec<String> = [
        a.set.clone(),
        a.cantor.as_ref().map(|c| format!("cantor:{c}")),
        a.interval.as_ref().map(|c| format!("interval:{c}")),
        a.point.as_ref().map(|c| format!("point:{c}")),
    ]
    .into_iter()
    .flatten()
    .collect();
    if specs.len() != 1 {
        return Err(CliError::Input("give exactly one of --E, --cantor, --interval, --point".into()));
    }
    let set = specs::dilation_set(&specs[0])?;
    let (lo, hi) = match &a.scales {
        Some(s) => specs::int_range(s)?,
        None => {
            let res = set.resolution();
            let hi = if res > 0.0 { ((1.0 / res).log2().floor() as i32 - 1).min(20) } else { 12 };
            (2, hi.max(4))
        }
    };
    let grid = geometric_grid(2.0, lo, hi);
    let mink = minkowski_dim_estimate(&set, &grid).map_err(input("dimension"))?;
    let assouad = if a.assouad || a.theta.is_some() {
        Some(assouad_dim_estimate(&set, a.theta, &grid).map_err(input("assouad dimension"))?)
    } else {
        None
    };
    println!("minkowski dimension {:.4}", mink.value);
    if let Some(e) = &assouad {
        println!("assouad dimension {:.4}", e.value);
    }
    let mut out = open_out(&a.common, &config)?;
    out.write_json(
        "dim.json",
        &json!({"set": specs[0], "value": mink.value, "minkowski": mink, "assouad": assouad}),
    )?;
    let mut csv = String::from("delta,covering_number\n");
    for (d, n) in &mink.counts {
        csv.push_str(&format!("{d:e},{n}\n"));
    }
    out.write("dim.csv", csv.as_bytes())?;
    out.finish("dim", &config, None)?;
    Ok(())
}

fn cmd_region(args: RegionArgs) -> Result<(), CliError> {
    let (a, config) = resolve("region", args)?;
    let modes = a.sufficient.is_some() as u8 + a.necessary as u8 + a.linear as u8 + a.gap as u8;
    if modes != 1 {
        return Err(CliError::Input("give exactly one of --sufficient, --necessary, --linear, --gap".into()));
    }
    let beta = specs::rational(&a.beta)?;
    let gamma = match &a.gamma {
        Some(g) => specs::rational(g)?,
        None => beta.clone(),
    };
    let need_a = || -> Result<Q, CliError> {
        specs::rational(a.a.as_deref().ok_or_else(|| CliError::Input("--a is required".into()))?).map_err(Into::into)
    };
    let need_inv_r = || -> Result<Q, CliError> {
        specs::reciprocal(a.r.as_deref().ok_or_else(|| CliError::Input("--r is required".into()))?).map_err(Into::into)
    };
    let mut out = open_out(&a.common, &config)?;
    let write_region = |out: &mut OutputDir, r: &ExponentRegion, extra: Option<(&str, String)>| -> Result<(), CliError> {
        let mut v = r.to_json();
        if let Some((k, val)) = extra {
            v[k] = Value::String(val);
        }
        out.write_json("region.json", &v)?;
        out.write("region.csv", r.to_csv().as_bytes())?;
        Ok(())
    };
    if let Some(kind) = &a.sufficient {
        let aa = need_a()?;
        let r = match kind.as_str() {
            "multiscale" => sufficient_region_multiscale(a.d, &aa, &beta),
            "singlescale" => sufficient_region_singlescale_l2(a.d, &aa, &beta),
            "lifted" => sufficient_region_singlescale_l2(a.d, &aa, &beta).and_then(|r| lift_to_holder(&r)),
            "sparse-gate" => sparse_gate_region(a.d, &aa, &beta),
            other => return Err(CliError::Input(format!("unknown sufficient region `{other}`"))),
        }
        .map_err(input("region"))?;
        let verts: Vec<String> = r.vertices.iter().map(|v| format!("({}, {})", v.x, v.y)).collect();
        println!("vertices {}", verts.join(" "));
        write_region(&mut out, &r, None)?;
    } else if a.necessary {
        let inv_r = need_inv_r()?;
        let ceiling = necessary_bound(a.d, &inv_r, &beta, &gamma).map_err(input("necessary bound"))?;
        let r = necessary_region(a.d, &inv_r, &beta, &gamma).map_err(input("necessary region"))?;
        println!("ceiling 1/p + 1/q <= {ceiling}");
        write_region(&mut out, &r, Some(("ceiling", ceiling.to_string())))?;
    } else if a.linear {
        let r = linear_region_q(a.d, &beta, &gamma).map_err(input("linear region"))?;
        write_region(&mut out, &r, None)?;
    } else {
        let (s, n) = region_gap(a.d, &need_a()?, &beta, &gamma, &need_inv_r()?).map_err(input("gap"))?;
        let gap = &n - &s;
        println!("sufficient {s}  necessary {n}  gap {gap}");
        out.write_json(
            "gap.json",
            &json!({"sufficient_max": s.to_string(), "necessary_max": n.to_string(), "gap": gap.to_string(), "gap_f64": q_to_f64(&gap)}),
        )?;
    }
    out.finish("region", &config, None)?;
    Ok(())
}

fn norms_row(name: &str, f: &GridFunction) -> String {
    format!("{name},{:e},{:e},{:e}\n", f.lp_norm(1.0), f.lp_norm(2.0), f.lp_norm(f64::INFINITY))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let (a, config) = resolve("run", args)?;
    let m = specs::multiplier(&a.m, a.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let f = specs::input(&a.f, a.d, a.n, a.period, &mut rng)?;
    let g = specs::input(&a.g, a.d, a.n, a.period, &mut rng)?;
    let result = match &a.set {
        Some(s) => {
            let set = specs::dilation_set(s)?;
            maximal_over_dilations(&f, &g, &m, &set, default_resolution(&f))
        }
        None => apply_bilinear_direct(&f, &g, &m, a.t, a.t2.unwrap_or(a.t)),
    }
    .map_err(input("operator"))?;
    let mut out = open_out(&a.common, &config)?;
    out.write("output.bin", &io::to_bytes(&result))?;
    out.write_json("output.json", &serde_json::to_value(io::sidecar(&result)).map_err(internal)?)?;
    let table = format!(
        "name,l1,l2,linf\n{}{}{}",
        norms_row("f", &f),
        norms_row("g", &g),
        norms_row("output", &result)
    );
    print!("{table}");
    out.write("norms.csv", table.as_bytes())?;
    out.finish("run", &config, Some(a.seed))?;
    Ok(())
}

fn cmd_decay(args: DecayArgs) -> Result<(), CliError> {
    let (a, config) = resolve("decay", args)?;
    let m = specs::multiplier(&a.m, a.d)?;
    let set = specs::dilation_set(&a.set)?;
    let (lo, hi) = specs::int_range(&a.bands)?;
    if lo < 0 {
        return Err(CliError::Input("bands must be nonnegative".into()));
    }
    let bands: Vec<u32> = (lo as u32..=hi as u32).collect();
    // Band i needs 2^i ≤ n / (2L); keep a factor two of headroom.
    let side = a.n.unwrap_or_else(|| ((4.0 * a.period * 2f64.powi(hi)).ceil() as usize).next_power_of_two().max(64));
    let cfg = DecayConfig {
        side,
        period: a.period,
        resolution: None,
        trials: a.trials,
        seed: a.seed,
        beta: a.beta,
    };
    let report = match &a.set2 {
        Some(s2) => biparameter_piece_decay(&m, &set, &specs::dilation_set(s2)?, &bands, &cfg),
        None => measure_piece_decay(&m, &set, &bands, &cfg),
    }
    .map_err(input("decay"))?;
    println!("slope {:.4} (predicted {:.4})", report.slope, report.predicted_slope);
    let mut out = open_out(&a.common, &config)?;
    out.write_json("decay.json", &serde_json::to_value(&report).map_err(internal)?)?;
    out.write("decay.csv", csv_or(report.to_csv())?.as_bytes())?;
    out.finish("decay", &config, Some(a.seed))?;
    Ok(())
}

fn cmd_continuity(args: ContinuityArgs) -> Result<(), CliError> {
    let (a, config) = resolve("continuity", args)?;
    let m = specs::multiplier(&a.m, a.d)?;
    let set = specs::dilation_set(&a.set)?;
    let slot = match a.slot.as_str() {
        "first" => Slot::First,
        "second" => Slot::Second,
        "both" => Slot::Both,
        other => return Err(CliError::Input(format!("unknown slot `{other}`"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let f = specs::input(&a.f, a.d, a.n, a.period, &mut rng)?;
    let g = specs::input(&a.g, a.d, a.n, a.period, &mut rng)?;
    let (lo, hi) = specs::int_range(&a.h)?;
    let hs: Vec<Vec<f64>> = (lo..=hi)
        .map(|k| {
            let mut h = vec![0.0; a.d];
            h[0] = 2f64.powi(-k);
            h
        })
        .collect();
    let report = continuity_modulus(&f, &g, &m, &set, &hs, slot, None).map_err(input("continuity"))?;
    println!("gamma {:.4}", report.gamma);
    let mut out = open_out(&a.common, &config)?;
    out.write_json("continuity.json", &serde_json::to_value(&report).map_err(internal)?)?;
    let mut csv = String::from("h1,h2,norm\n");
    for (h1, h2, n) in &report.samples {
        csv.push_str(&format!("{h1:e},{h2:e},{n:e}\n"));
    }
    out.write("continuity.csv", csv.as_bytes())?;
    out.finish("continuity", &config, Some(a.seed))?;
    Ok(())
}

fn cmd_scaling(args: ScalingArgs) -> Result<(), CliError> {
    let (a, config) = resolve("scaling", args)?;
    let kind = match a.kind.split_once(':') {
        Some(("assouad", alpha)) => WitnessKind::Assouad {
            alpha: q_to_f64(&specs::rational(alpha)?),
        },
        _ => match a.kind.as_str() {
            "ball" => WitnessKind::BallPair,
            "knapp" => WitnessKind::Knapp,
            "biparameter" => WitnessKind::BiparameterBall,
            other => return Err(CliError::Input(format!("unknown witness kind `{other}`"))),
        },
    };
    let set = specs::dilation_set(&a.set)?;
    let inv = |s: &str| -> Result<f64, CliError> { Ok(q_to_f64(&specs::reciprocal(s)?)) };
    let ex = Exponents {
        inv_p: inv(&a.p)?,
        inv_q: inv(&a.q)?,
        inv_r: inv(&a.r)?,
    };
    let (lo, hi) = specs::int_range(&a.deltas)?;
    let deltas: Vec<f64> = (lo..=hi).map(|j| 2f64.powi(-j)).collect();
    let mut cfg = ScalingConfig::for_dim(a.d);
    if let Some(n) = a.n {
        cfg.grid.side = n;
    }
    cfg.tolerances = Tolerances {
        lhs: a.tol_lhs,
        rhs: a.tol_rhs,
    };
    let report = if kind == WitnessKind::BiparameterBall {
        let s2 = specs::dilation_set(
            a.set2.as_deref().ok_or_else(|| CliError::Input("biparameter scaling needs --E2".into()))?,
        )?;
        let beta = match a.beta {
            Some(b) => b,
            None => estimate_beta(&harmonic_combine(&set, &s2).map_err(input("E*"))?),
        };
        biparameter_witness_experiment(&set, &s2, ex, beta, &deltas, &cfg)
    } else {
        scaling_experiment(kind, &set, ex, a.beta.unwrap_or_else(|| estimate_beta(&set)), &deltas, &cfg)
    }
    .map_err(input("scaling"))?;
    println!(
        "lhs exponent {:.3} (predicted {:.3}), rhs exponent {:.3} (predicted {:.3}): {:?}",
        report.fitted_lhs_exponent,
        report.predicted_lhs_exponent,
        report.fitted_rhs_exponent,
        report.predicted_rhs_exponent,
        report.verdict
    );
    let mut out = open_out(&a.common, &config)?;
    out.write_json("scaling.json", &serde_json::to_value(&report).map_err(internal)?)?;
    out.write("scaling.csv", csv_or(report.to_csv())?.as_bytes())?;
    out.finish("scaling", &config, None)?;
    Ok(())
}

fn cmd_sparse(args: SparseArgs) -> Result<(), CliError> {
    let (a, config) = resolve("sparse", args)?;
    let m = specs::multiplier(&a.m, a.d)?;
    let set = specs::dilation_set(&a.set)?;
    let t = ExponentTriple::raw(specs::reciprocal(&a.p)?, specs::reciprocal(&a.q)?, specs::reciprocal(&a.r)?);
    let widths = specs::real_list(&a.widths)?;
    if !a.n.is_power_of_two() {
        return Err(CliError::Input(format!("--n must be a power of two, got {}", a.n)));
    }
    let stride = (a.n / a.shifts.max(1)) as i64 + 1;
    let shifts: Vec<Vec<i64>> = (0..a.shifts as i64)
        .map(|k| {
            let mut s = vec![0; a.d];
            s[0] = k * stride;
            s
        })
        .collect();
    let inputs = bump_family(a.d, a.n, a.period, &widths, &shifts).map_err(input("inputs"))?;
    let cfg = SweepConfig {
        scales: specs::int_range(&a.scales)?,
        resolution: None,
        top_level: a.top_level,
        max_depth: a.max_depth,
        stability_factor: a.stability,
    };
    let report = if a.no_gate {
        let inv_r = q_to_f64(&t.inv_r);
        if t.inv_r >= Q::one() {
            return Err(CliError::Input("exponent not in region: need r > 1".into()));
        }
        let r_dual = if t.inv_r.is_zero() { 1.0 } else { 1.0 / (1.0 - inv_r) };
        let ex = FormExponents {
            p: 1.0 / q_to_f64(&t.inv_p),
            q: 1.0 / q_to_f64(&t.inv_q),
            r_dual,
        };
        sparse_ratio_sweep(&m, &set, ex, &inputs, &cfg)
    } else {
        sparse_constant_sweep(&m, &set, &specs::rational(&a.beta)?, &t, &inputs, &cfg)
    }
    .map_err(input("sparse"))?;
    println!(
        "max ratio {:.4}, spread {:.3}, stable {}, all families 1/2-sparse {}",
        report.max_ratio, report.spread, report.stable, report.all_sparse
    );
    let mut out = open_out(&a.common, &config)?;
    out.write_json("sparse.json", &serde_json::to_value(&report).map_err(internal)?)?;
    out.write("sparse.csv", csv_or(report.to_csv())?.as_bytes())?;
    out.finish("sparse", &config, None)?;
    Ok(())
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Dim(a) => cmd_dim(a),
        Command::Region(a) => cmd_region(a),
        Command::Run(a) => cmd_run(a),
        Command::Decay(a) => cmd_decay(a),
        Command::Continuity(a) => cmd_continuity(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Sparse(a) => cmd_sparse(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

