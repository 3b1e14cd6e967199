//! Metric and potential specs from inline JSON, files or preset names.

use std::f64::consts::PI;
use std::path::Path;

use serde::de::DeserializeOwned;
use stband::geometry::MetricSpec;
use stband::potentials::{named, Potential, PotentialKind};

pub const METRIC_PRESETS: [&str; 9] =
    ["flat", "round-band", "torus", "upsilon", "counterexample", "round-s3", "capsule", "schwarzschild", "euclidean"];

pub const POTENTIAL_PRESETS: [&str; 2] = ["zero", "llarull"];

pub fn metric_preset(name: &str) -> Option<MetricSpec> {
    let m = match name {
        "flat" => MetricSpec::flat(1.0),
        "round-band" => MetricSpec::round_band(PI / 4.0, PI / 4.0, 3),
        "torus" => MetricSpec::torus_extremal(PI / 3.0),
        "upsilon" => MetricSpec::g_upsilon(0.5, PI / 8.0),
        "counterexample" => MetricSpec::counterexample(0.0),
        "round-s3" => MetricSpec::sine_warped(1.0, 1.0, 0.0, 3),
        "capsule" => MetricSpec::capsule(1.0, 20.0),
        "schwarzschild" => MetricSpec::schwarzschild(1.0, 3),
        "euclidean" => MetricSpec::schwarzschild(0.0, 3),
        _ => return None,
    };
    m.ok()
}

fn potential_preset(name: &str) -> Option<Potential> {
    match name {
        "zero" => named(PotentialKind::Zero, &[]).ok(),
        "llarull" => named(PotentialKind::Llarull, &[]).ok(),
        _ => None,
    }
}

/// Parses `text` as JSON, reporting line and column on failure.
fn parse_json<T: DeserializeOwned>(what: &str, origin: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        if e.line() == 0 {
            // parsed fine, rejected by the constructor
            format!("invalid {what} spec ({origin}): {msg}")
        } else {
            format!("malformed {what} spec ({origin}) at line {}, column {}: {msg}", e.line(), e.column())
        }
    })
}

fn resolve<T: DeserializeOwned>(what: &str, arg: &str, preset: impl Fn(&str) -> Option<T>, names: &[&str]) -> Result<T, String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return parse_json(what, "inline", arg);
    }
    if let Some(v) = preset(arg) {
        return Ok(v);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        return parse_json(what, &path.display().to_string(), &text);
    }
    Err(format!("unknown {what} '{arg}': expected inline JSON, a file path or one of {}", names.join(", ")))
}

pub fn metric(arg: &str) -> Result<MetricSpec, String> {
    resolve("metric", arg, metric_preset, &METRIC_PRESETS)
}

pub fn potential(arg: &str) -> Result<Potential, String> {
    resolve("potential", arg, potential_preset, &POTENTIAL_PRESETS)
}

/// `"lo,hi"` or `"[lo, hi]"`.
pub fn interval(arg: &str) -> Result<(f64, f64), String> {
    let parts = parse_list(arg)?;
    match parts.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("interval '{arg}' needs exactly two numbers")),
    }
}

pub fn parse_list(arg: &str) -> Result<Vec<f64>, String> {
    arg.trim_matches(|c| c == '[' || c == ']' || c == ' ')
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}' is not a number: {e}")))
        .collect()
}
