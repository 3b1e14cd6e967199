//! Report model and the deterministic JSON writer.
//!
//! Floats are written as `{:.16e}` (17 significant digits) and object keys keep
//! insertion order, so identical runs give identical bytes apart from `runtime_ms`.

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Holds,
    Saturated,
    Falsified,
    HypothesisRejected,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::Holds => "holds",
            Verdict::Saturated => "saturated",
            Verdict::Falsified => "falsified",
            Verdict::HypothesisRejected => "hypothesis_rejected",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Ok | Verdict::Holds | Verdict::Saturated => 0,
            Verdict::HypothesisRejected => 2,
            Verdict::Falsified => 3,
        }
    }

    /// `saturated` when within `tol` of the bound, `holds` below it, `falsified` above.
    pub fn compare(value: f64, bound: f64, tol: f64) -> Self {
        if (value - bound).abs() <= tol {
            Verdict::Saturated
        } else if value <= bound {
            Verdict::Holds
        } else {
            Verdict::Falsified
        }
    }
}

/// Column table written as CSV and plotted as SVG.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.headers.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| float(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Result of one driver before it is wrapped into a report.
pub struct Outcome {
    pub verdict: Verdict,
    pub numbers: Value,
    pub slack: Option<f64>,
    pub h: Option<f64>,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn new(verdict: Verdict, numbers: Value) -> Self {
        Outcome { verdict, numbers, slack: None, h: None, table: None }
    }
}

pub fn build(command: &str, config: Value, out: &Outcome, runtime_ms: f64) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), Value::from(command));
    m.insert("config".into(), config);
    m.insert("verdict".into(), Value::from(out.verdict.as_str()));
    m.insert("numbers".into(), out.numbers.clone());
    m.insert("slack".into(), out.slack.map_or(Value::Null, Value::from));
    m.insert("h".into(), out.h.map_or(Value::Null, Value::from));
    m.insert("runtime_ms".into(), Value::from(runtime_ms));
    m.insert("version".into(), Value::from(concat!("stband ", env!("CARGO_PKG_VERSION"))));
    Value::Object(m)
}

pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn to_json(v: &Value) -> String {
    let mut s = String::new();
    write(v, 0, &mut s);
    s.push('\n');
    s
}

fn write(v: &Value, depth: usize, s: &mut String) {
    let pad = |d: usize, s: &mut String| s.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Null => s.push_str("null"),
        Value::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => s.push_str(&i.to_string()),
            (_, Some(u)) => s.push_str(&u.to_string()),
            _ => s.push_str(&float(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(t) => s.push_str(&Value::String(t.clone()).to_string()),
        Value::Array(a) if a.is_empty() => s.push_str("[]"),
        Value::Array(a) => {
            s.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(depth + 1, s);
                write(x, depth + 1, s);
                s.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(depth, s);
            s.push(']');
        }
        Value::Object(o) if o.is_empty() => s.push_str("{}"),
        Value::Object(o) => {
            s.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                pad(depth + 1, s);
                s.push_str(&Value::String(k.clone()).to_string());
                s.push_str(": ");
                write(x, depth + 1, s);
                s.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            pad(depth, s);
            s.push('}');
        }
    }
}
