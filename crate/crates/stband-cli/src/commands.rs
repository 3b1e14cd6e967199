//! One driver per subcommand. Each returns the resolved config and either an
//! outcome or the library error; argument problems are plain strings.

use std::f64::consts::PI;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use stband::experiments::{self as ex, WidthTheorem};
use stband::geometry::MetricSpec;
use stband::identities::{self as id, IdentityReport};
use stband::potentials::{named, Potential, PotentialKind};
use stband::solver::{self, BandProblem, FixedPointOptions, GridDims, SolveProfile};

use crate::inputs;
use crate::report::{Outcome, Table, Verdict};
use crate::{Common, Which};

pub type Run = Result<(Value, stband::Result<Outcome>), String>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn metric_or(common: &Common, default: Option<&str>) -> Result<MetricSpec, String> {
    match (&common.metric, default) {
        (Some(m), _) => inputs::metric(m),
        (None, Some(d)) => inputs::metric(d),
        (None, None) => Err("--metric is required".into()),
    }
}

fn potential_or(common: &Common, default: impl FnOnce() -> stband::Result<Potential>) -> Result<Potential, String> {
    match &common.potential {
        Some(p) => inputs::potential(p),
        None => default().map_err(|e| e.to_string()),
    }
}

fn interval_or(arg: &Option<String>, metric: &MetricSpec) -> Result<(f64, f64), String> {
    match arg {
        Some(s) => inputs::interval(s),
        None => metric
            .band()
            .ok_or_else(|| format!("{:?} has no default band; pass --interval lo,hi", metric.family)),
    }
}

fn base_config(common: &Common, grid: usize) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("grid".into(), json!(grid));
    m.insert("tol".into(), json!(common.tol));
    m
}

fn profile_table(p: &SolveProfile) -> Table {
    let mut t = Table::new(&["rho", "u", "du", "residual"]);
    for i in 0..p.u.len() {
        t.rows.push(vec![p.grid.node(i), p.u[i], p.du[i], p.residual[i]]);
    }
    t
}

fn identity_verdict(r: &IdentityReport, tol: f64) -> Verdict {
    if r.falsified() {
        Verdict::Falsified
    } else if r.slack.abs() <= tol.max(r.allowance) {
        Verdict::Saturated
    } else {
        Verdict::Holds
    }
}

pub fn catalog(common: &Common) -> Run {
    let metrics: Vec<Value> = inputs::METRIC_PRESETS
        .iter()
        .filter_map(|&n| inputs::metric_preset(n).map(|m| (n, m)))
        .map(|(n, m)| {
            let (lo, hi) = m.domain();
            json!({
                "name": n,
                "spec": to_value(&m),
                "domain": [lo, if hi.is_finite() { json!(hi) } else { json!("inf") }],
                "band": m.band().map(|b| json!([b.0, b.1])),
                "closed": m.is_closed(),
                "fiber_euler_char": m.fiber_euler_char(),
            })
        })
        .collect();
    let problems: Vec<Value> = match ex::problem_catalog() {
        Ok(c) => c.iter().map(|(n, p)| json!({ "name": n, "problem": to_value(p) })).collect(),
        Err(e) => return Err(e.to_string()),
    };
    let config = Value::Object(base_config(common, common.grid.unwrap_or(0)));
    let numbers = json!({
        "metrics": metrics,
        "potentials": inputs::POTENTIAL_PRESETS,
        "potential_kinds": ["Zero", "RicciBand", "TorusBand", "TwoRicciBand", "Waist", "Llarull", "LipschitzFamily", "DiceBand"],
        "problems": problems,
    });
    Ok((config, Ok(Outcome::new(Verdict::Ok, numbers))))
}

#[derive(Args, Debug)]
pub struct CurvatureArgs {
    /// Sampled interval `lo,hi` (defaults to the band, the domain, or r ∈ [0.1, 10])
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
}

pub fn curvature(a: &CurvatureArgs, common: &Common) -> Run {
    let m = metric_or(common, None)?;
    let n = common.grid.unwrap_or(10_000);
    let (lo, hi) = match &a.interval {
        Some(s) => inputs::interval(s)?,
        None => match m.band() {
            Some(b) => b,
            None if m.domain().1.is_finite() => m.domain(),
            None => (0.1, 10.0),
        },
    };
    let mut config = base_config(common, n);
    config.insert("metric".into(), to_value(&m));
    config.insert("interval".into(), json!([lo, hi]));
    let run = || -> stband::Result<Outcome> {
        let mut t = Table::new(&["rho", "scalar", "two_ricci", "ricci_min", "ricci_max", "mean_curv", "ric_normal"]);
        for i in 0..n {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let c = m.curvature_at(x)?;
            t.rows.push(vec![x, c.scalar, c.two_ricci, c.ricci_eigs[0], *c.ricci_eigs.last().unwrap(), c.mean_curv, c.ric_normal]);
        }
        let stat = |col: usize| {
            let (mut lo_v, mut lo_at, mut hi_v) = (f64::INFINITY, f64::NAN, f64::NEG_INFINITY);
            for r in &t.rows {
                if r[col] < lo_v {
                    lo_v = r[col];
                    lo_at = r[0];
                }
                hi_v = hi_v.max(r[col]);
            }
            json!({ "min": lo_v, "argmin": lo_at, "max": hi_v })
        };
        let numbers = json!({
            "samples": n,
            "scalar": stat(1),
            "two_ricci": stat(2),
            "ricci_min": stat(3),
            "ricci_max": stat(4),
            "mean_curv": stat(5),
        });
        let mut o = Outcome::new(Verdict::Ok, numbers);
        o.h = Some((hi - lo) / n as f64);
        o.table = Some(t);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Closed,
    Grid,
}

#[derive(Args, Debug)]
pub struct BandArgs {
    /// Band `lo,hi` in the profile coordinate (defaults to the family's band)
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c_minus: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    c_plus: f64,
    /// Profile coordinate where the potential variable vanishes (defaults to the lower end)
    #[arg(long, allow_hyphen_values = true)]
    origin: Option<f64>,
}

fn band_problem(b: &BandArgs, common: &Common, config: &mut serde_json::Map<String, Value>) -> Result<BandProblem, String> {
    let m = metric_or(common, None)?;
    let f = potential_or(common, || named(PotentialKind::Zero, &[]))?;
    let iv = interval_or(&b.interval, &m)?;
    let mut p = BandProblem::new(m, iv, f, b.c_minus, b.c_plus).map_err(|e| e.to_string())?;
    if let Some(o) = b.origin {
        p = p.with_origin(o);
    }
    config.insert("problem".into(), to_value(&p));
    Ok(p)
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    band: BandArgs,
    #[arg(long, value_enum, default_value_t = SolveMethod::Closed)]
    method: SolveMethod,
}

pub fn solve(a: &SolveArgs, common: &Common) -> Run {
    let n = common.grid.unwrap_or(2000);
    let mut config = base_config(common, n);
    config.insert("method".into(), to_value(&format!("{:?}", a.method).to_lowercase()));
    let p = band_problem(&a.band, common, &mut config)?;
    let run = || -> stband::Result<Outcome> {
        let closed = solver::solve_band_1d(&p, n)?;
        let h = closed.grid.h();
        let mut numbers = json!({
            "residual_sup": closed.residual_sup,
            "du_min": closed.du.iter().cloned().fold(f64::INFINITY, f64::min),
            "du_max": closed.du.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            "u_mid": closed.u[n / 2],
        });
        let mut verdict = Verdict::Ok;
        let prof = match a.method {
            SolveMethod::Closed => closed,
            SolveMethod::Grid => {
                let g = solver::solve_band_grid(&p, GridDims::axial(n), FixedPointOptions::default())?;
                let err = g.u.iter().zip(&closed.u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                numbers["iterations"] = json!(g.iterations);
                numbers["grid_residual_sup"] = json!(g.residual_sup);
                numbers["sup_error_vs_closed_form"] = json!(err);
                numbers["error_bound"] = json!(10.0 * h * h);
                verdict = if err <= 10.0 * h * h { Verdict::Holds } else { Verdict::Falsified };
                g
            }
        };
        solver::check_profile(&p, &prof)?;
        numbers["monotone_and_maximum_principle"] = json!(true);
        let mut o = Outcome::new(verdict, numbers);
        o.h = Some(h);
        o.table = Some(profile_table(&prof));
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct IdentityArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[command(flatten)]
    band: BandArgs,
}

pub fn identity(a: &IdentityArgs, common: &Common) -> Run {
    let n = common.grid.unwrap_or(2000);
    let mut config = base_config(common, n);
    config.insert("which".into(), to_value(&format!("{:?}", a.which).to_lowercase()));
    let p = band_problem(&a.band, common, &mut config)?;
    let run = || -> stband::Result<Outcome> {
        let prof = solver::solve_band_1d(&p, n)?;
        let r = match a.which {
            Which::Lemma23 => id::eval_lemma23(&prof, &p)?,
            Which::Lemma33 => id::eval_lemma33(&prof, &p)?,
            Which::Lemma71 => id::eval_lemma71(&prof, &p)?,
        };
        let mut o = Outcome::new(identity_verdict(&r, common.tol), to_value(&r));
        o.slack = Some(r.slack);
        o.h = Some(r.h);
        o.table = Some(profile_table(&prof));
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremArg {
    Ricci,
    Torus,
    TwoRicci,
}

#[derive(Args, Debug)]
pub struct WidthArgs {
    #[arg(long, value_enum)]
    theorem: TheoremArg,
    /// Band `lo,hi` (defaults to the family's band)
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
}

pub fn width(a: &WidthArgs, common: &Common) -> Run {
    let m = metric_or(common, None)?;
    let iv = interval_or(&a.interval, &m)?;
    let theorem = match a.theorem {
        TheoremArg::Ricci => WidthTheorem::Ricci,
        TheoremArg::Torus => WidthTheorem::Torus,
        TheoremArg::TwoRicci => WidthTheorem::TwoRicci,
    };
    let mut config = base_config(common, common.grid.unwrap_or(ex::GATE_SAMPLES));
    config.insert("theorem".into(), to_value(&theorem));
    config.insert("metric".into(), to_value(&m));
    config.insert("interval".into(), json!([iv.0, iv.1]));
    let run = || -> stband::Result<Outcome> {
        let v = ex::width_bound(&m, iv, theorem)?;
        let verdict = Verdict::compare(v.width, v.bound, common.tol);
        let mut numbers = to_value(&v);
        numbers["saturated"] = json!(verdict == Verdict::Saturated);
        numbers["holds"] = json!(verdict != Verdict::Falsified);
        let mut o = Outcome::new(verdict, numbers);
        o.slack = Some(v.bound - v.width);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct BonnetMyersArgs {
    /// Radius of the geodesic sphere about the first pole
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

pub fn bonnet_myers(a: &BonnetMyersArgs, common: &Common) -> Run {
    let m = metric_or(common, Some("round-s3"))?;
    let mut config = base_config(common, common.grid.unwrap_or(ex::GATE_SAMPLES));
    config.insert("metric".into(), to_value(&m));
    config.insert("eps".into(), json!(a.eps));
    let run = || -> stband::Result<Outcome> {
        let r = ex::bonnet_myers(&m, a.eps)?;
        let mut o = Outcome::new(Verdict::compare(r.sum, r.bound, common.tol), to_value(&r));
        o.slack = Some(r.bound - r.sum);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct WaistArgs {
    /// Lower bound R₀ on the scalar curvature
    #[arg(long, default_value_t = 6.0)]
    r0: f64,
    /// Second Betti number
    #[arg(long, default_value_t = 0)]
    b2: u32,
    /// Radius of the excised polar balls
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
}

pub fn waist(a: &WaistArgs, common: &Common) -> Run {
    let m = metric_or(common, Some("round-s3"))?;
    let n = common.grid.unwrap_or(2000);
    let mut config = base_config(common, n);
    config.insert("metric".into(), to_value(&m));
    config.insert("r0".into(), json!(a.r0));
    config.insert("b2".into(), json!(a.b2));
    config.insert("eps".into(), json!(a.eps));
    let run = || -> stband::Result<Outcome> {
        let r = ex::waist_average(&m, a.r0, a.b2, a.eps, n)?;
        let verdict = if r.holds { Verdict::Holds } else { Verdict::Falsified };
        let mut o = Outcome::new(verdict, to_value(&r));
        o.slack = Some(r.bound - r.avg_area);
        o.h = Some(r.h);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct DiceArgs {
    /// Lower bound R₀ on the scalar curvature
    #[arg(long, default_value_t = 2.0)]
    r0: f64,
    /// Band margin δ (defaults to w₀/100)
    #[arg(long)]
    delta: Option<f64>,
}

pub fn dice(a: &DiceArgs, common: &Common) -> Run {
    let m = metric_or(common, Some("capsule"))?;
    let n = common.grid.unwrap_or(1000);
    let w0 = 4.0 * PI / (3.0 * a.r0).sqrt();
    let delta = a.delta.unwrap_or(0.01 * w0);
    let mut config = base_config(common, n);
    config.insert("metric".into(), to_value(&m));
    config.insert("r0".into(), json!(a.r0));
    config.insert("delta".into(), json!(delta));
    let run = || -> stband::Result<Outcome> {
        let d = ex::dice(&m, a.r0, delta, n)?;
        let verdict = if d.properties.all() { Verdict::Holds } else { Verdict::Falsified };
        let mut t = Table::new(&["region", "lo", "hi"]);
        for (i, r) in d.regions.iter().enumerate() {
            t.rows.push(vec![i as f64 + 1.0, r.0, r.1]);
        }
        let mut o = Outcome::new(verdict, to_value(&d));
        o.table = Some(t);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
}

pub fn counterexample(a: &CounterexampleArgs, common: &Common) -> Run {
    let mut config = base_config(common, common.grid.unwrap_or(ex::GATE_SAMPLES));
    config.insert("delta".into(), json!(a.delta));
    if !(0.0..=1.0).contains(&a.delta) {
        return Err(format!("--delta must lie in [0, 1] (got {})", a.delta));
    }
    let run = || -> stband::Result<Outcome> {
        let r = ex::counterexample_audit(a.delta)?;
        let m = MetricSpec::counterexample(a.delta)?;
        let (lo, hi) = m.domain();
        let n = 1000;
        let mut t = Table::new(&["t", "ricci_min", "two_ricci", "scalar"]);
        for i in 0..n {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let c = m.curvature_at(x)?;
            t.rows.push(vec![x, c.ricci_eigs[0], c.two_ricci, c.scalar]);
        }
        let verdict = if !r.holds {
            Verdict::Falsified
        } else if (r.core_to_core - PI / 2.0).abs() <= common.tol {
            Verdict::Saturated
        } else {
            Verdict::Holds
        };
        let mut o = Outcome::new(verdict, to_value(&r));
        o.table = Some(t);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct AfArgs {
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    #[arg(long, default_value_t = 1e3)]
    r_max: f64,
}

pub fn af(a: &AfArgs, common: &Common) -> Run {
    let m = metric_or(common, Some("schwarzschild"))?;
    let n = common.grid.unwrap_or(4000);
    let mut config = base_config(common, n);
    config.insert("metric".into(), to_value(&m));
    config.insert("r_range".into(), json!([a.r_min, a.r_max]));
    let run = || -> stband::Result<Outcome> {
        let g = solver::solve_green_af(&m, (a.r_min, a.r_max), n)?;
        let r = id::eval_af_identity(&g, &m)?;
        let mut numbers = to_value(&r);
        let ratio = (r.bulk_hessian_term + r.bulk_curvature_term).abs() / r.bulk_hessian_term.abs();
        numbers["cancellation_ratio"] = json!(ratio);
        numbers["asymptote_error"] = json!(g.asymptote_error);
        let mut o = Outcome::new(identity_verdict(&r, common.tol), numbers);
        o.slack = Some(r.slack);
        o.h = Some(r.h);
        let mut t = Table::new(&["r", "u", "du", "v"]);
        for i in 0..g.r.len() {
            t.rows.push(vec![g.r[i], g.u[i], g.du[i], g.v[i]]);
        }
        o.table = Some(t);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct LlarullArgs {
    /// Half-width of the polar caps excluded from the quantitative identity
    #[arg(long, default_value_t = 0.05)]
    eps_band: f64,
}

pub fn llarull(a: &LlarullArgs, common: &Common) -> Run {
    let m = metric_or(common, Some("round-s3"))?;
    let f = potential_or(common, || named(PotentialKind::Llarull, &[]))?;
    let n = common.grid.unwrap_or(2000);
    let mut config = base_config(common, n);
    config.insert("metric".into(), to_value(&m));
    config.insert("potential".into(), to_value(&f));
    config.insert("eps_band".into(), json!(a.eps_band));
    let run = || -> stband::Result<Outcome> {
        let scan = id::llarull_scan(&m, n)?;
        if !scan.hypothesis_holds {
            return Err(stband::Error::Hypothesis("w(θ) < sin θ somewhere: the metric does not dominate the round one".into()));
        }
        let q = id::eval_llarull_quant(&m, &f, a.eps_band, n)?;
        let verdict = if q.falsified() {
            Verdict::Falsified
        } else if !scan.strict_somewhere && q.slack.abs() <= common.tol.max(q.allowance) {
            Verdict::Saturated
        } else {
            Verdict::Holds
        };
        let mut o = Outcome::new(verdict, json!({ "scan": to_value(&scan), "quantitative": to_value(&q) }));
        o.slack = Some(q.slack);
        o.h = Some(q.h);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct BarrierArgs {
    /// Comma-separated radii ε of the excised ball
    #[arg(long, default_value = "0.1,0.05,0.01")]
    eps: String,
    #[arg(long, default_value_t = 0.2)]
    r0: f64,
}

pub fn barrier(a: &BarrierArgs, common: &Common) -> Run {
    let m = metric_or(common, Some("round-s3"))?;
    let (lo, hi) = m.domain();
    let f = potential_or(common, || named(PotentialKind::Waist, &[("w", hi - lo)]))?;
    let eps = inputs::parse_list(&a.eps)?;
    let n = common.grid.unwrap_or(400);
    let mut config = base_config(common, n);
    config.insert("metric".into(), to_value(&m));
    config.insert("potential".into(), to_value(&f));
    config.insert("eps".into(), json!(eps));
    config.insert("r0".into(), json!(a.r0));
    let run = || -> stband::Result<Outcome> {
        let r = solver::barrier_check(&m, &f, &eps, a.r0, n)?;
        let verdict = if r.holds { Verdict::Holds } else { Verdict::Falsified };
        let mut o = Outcome::new(verdict, to_value(&r));
        o.slack = Some(r.b - r.sup_grad);
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}

#[derive(Args, Debug)]
pub struct GradestArgs {
    #[command(flatten)]
    band: BandArgs,
    /// Ball radius about the band midpoint (defaults to half the band width)
    #[arg(long)]
    rho_ball: Option<f64>,
    /// Constant C₀ with `(9/2) f² − 3|∇f| ≥ −C₀`; smallest admissible value by default
    #[arg(long)]
    c0: Option<f64>,
}

pub fn gradest(a: &GradestArgs, common: &Common) -> Run {
    let n = common.grid.unwrap_or(2000);
    let mut config = base_config(common, n);
    let p = band_problem(&a.band, common, &mut config)?;
    let rho = a.rho_ball.unwrap_or(0.5 * (p.interval.1 - p.interval.0));
    config.insert("rho_ball".into(), json!(rho));
    config.insert("c0".into(), a.c0.map_or(Value::Null, |c| json!(c)));
    let run = || -> stband::Result<Outcome> {
        let prof = solver::solve_band_1d(&p, n)?;
        let r = solver::gradient_estimate_check(&prof, &p, rho, a.c0)?;
        let verdict = if r.holds { Verdict::Holds } else { Verdict::Falsified };
        let mut o = Outcome::new(verdict, to_value(&r));
        o.h = Some(prof.grid.h());
        o.table = Some(profile_table(&prof));
        Ok(o)
    };
    Ok((Value::Object(config), run()))
}
