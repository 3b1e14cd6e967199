//! Piecewise-analytic potentials `f(τ)` and certificates for the differential
//! inequalities they are built to satisfy.
//!
//! A potential is a function of one variable `τ`. For band problems `τ` is the
//! distance to the lower boundary leaf; for the waist potential it is the distance
//! to the pole `p`; for the dice potential it is the signed distance to the cutting
//! sphere; for the Llarull potential it is the polar angle `θ`, with `f = −cot ψ⁰_ε(θ)`
//! so that solutions increase with `θ`.
//! Outside its pieces a potential extends by its first and last formula.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotentialKind {
    Zero,
    RicciBand,
    TorusBand,
    TwoRicciBand,
    Waist,
    Llarull,
    LipschitzFamily,
    DiceBand,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Form {
    Const(f64),
    Linear { x0: f64, y0: f64, slope: f64 },
    /// `amp · tan(k (τ − x0))`
    Tan { amp: f64, k: f64, x0: f64 },
    /// `amp · cot(k (τ − x0))`
    Cot { amp: f64, k: f64, x0: f64 },
    /// `−cot(τ − ε + ε s((τ − r0)/(r1 − r0)))` on the lower transition, and the
    /// mirrored `−cot(τ + ε s((τ − π + r1)/(r1 − r0)))` on the upper one.
    Blend { eps: f64, r0: f64, r1: f64, upper: bool },
}

impl Form {
    fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Form::Const(c) => (c, 0.0),
            Form::Linear { x0, y0, slope } => (y0 + slope * (t - x0), slope),
            Form::Tan { amp, k, x0 } => {
                let a = k * (t - x0);
                let c = a.cos();
                (amp * a.tan(), amp * k / (c * c))
            }
            Form::Cot { amp, k, x0 } => {
                let a = k * (t - x0);
                let s = a.sin();
                (amp / a.tan(), -amp * k / (s * s))
            }
            Form::Blend { eps, r0, r1, upper } => {
                let width = r1 - r0;
                let (arg, darg) = if upper {
                    let x = (t - PI + r1) / width;
                    (t + eps * cutoff(x).0, 1.0 + eps * cutoff(x).1 / width)
                } else {
                    let x = (t - r0) / width;
                    (t - eps + eps * cutoff(x).0, 1.0 + eps * cutoff(x).1 / width)
                };
                let s = arg.sin();
                (-1.0 / arg.tan(), darg / (s * s))
            }
        }
    }

    /// Supremum of `|f'|` over `[lo, hi]`; infinite when the piece touches a pole.
    fn lipschitz(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            Form::Const(_) => 0.0,
            Form::Linear { slope, .. } => slope.abs(),
            // |f'| is convex along tan/cot pieces, so the supremum sits at an end
            Form::Tan { .. } | Form::Cot { .. } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return f64::INFINITY;
                }
                let a = self.eval(lo).1.abs();
                let b = self.eval(hi).1.abs();
                let m = a.max(b);
                if m.is_finite() { m } else { f64::INFINITY }
            }
            Form::Blend { .. } => {
                let n = 2000;
                (0..=n)
                    .map(|i| self.eval(lo + (hi - lo) * i as f64 / n as f64).1.abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Smooth step `s(x) = 3x² − 2x³` on `[0, 1]`, clamped outside; `0 ≤ s' ≤ 3/2`.
pub fn cutoff(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        (x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x))
    }
}

/// Quadratic pole regulariser: `θ²/(2δ) + δ/2` below `δ`, identity in the middle,
/// mirrored above `π − δ`. Returns value and derivative.
pub fn psi_delta(theta: f64, delta: f64) -> (f64, f64) {
    if theta <= delta {
        (theta * theta / (2.0 * delta) + 0.5 * delta, theta / delta)
    } else if theta >= PI - delta {
        let s = PI - theta;
        (PI - (s * s / (2.0 * delta) + 0.5 * delta), s / delta)
    } else {
        (theta, 1.0)
    }
}

/// The shifted pole map `ψ⁰_ε(θ)`: `θ − ε` near the north pole, `θ + ε` near the
/// south pole, identity in between, blended by [`cutoff`] on `[r0, r1]`.
pub fn psi_zero(theta: f64, eps: f64, r0: f64, r1: f64) -> (f64, f64) {
    let width = r1 - r0;
    if theta <= r0 {
        (theta - eps, 1.0)
    } else if theta <= r1 {
        let (s, ds) = cutoff((theta - r0) / width);
        (theta - eps + eps * s, 1.0 + eps * ds / width)
    } else if theta <= PI - r1 {
        (theta, 1.0)
    } else if theta <= PI - r0 {
        let (s, ds) = cutoff((theta - PI + r1) / width);
        (theta + eps * s, 1.0 + eps * ds / width)
    } else {
        (theta + eps, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(skip)]
    form: Form,
}

impl Piece {
    fn new(lo: f64, hi: f64, form: Form) -> Self {
        Piece { lo, hi, form }
    }
}

/// Piecewise potential; see the module docs for the meaning of its variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct Potential {
    pub kind: PotentialKind,
    pub params: BTreeMap<String, f64>,
    pub pieces: Vec<Piece>,
    /// `None` when `|f'|` is unbounded (a pole at the end of a piece).
    pub lipschitz_const: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawPotential {
    kind: PotentialKind,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

impl TryFrom<RawPotential> for Potential {
    type Error = Error;
    fn try_from(raw: RawPotential) -> Result<Self> {
        make_potential(raw.kind, &raw.params)
    }
}

impl From<Potential> for RawPotential {
    fn from(p: Potential) -> Self {
        RawPotential { kind: p.kind, params: p.params }
    }
}

impl Potential {
    fn assemble(kind: PotentialKind, params: BTreeMap<String, f64>, pieces: Vec<Piece>) -> Result<Self> {
        for w in pieces.windows(2) {
            let t = w[0].hi;
            let (a, b) = (w[0].form.eval(t).0, w[1].form.eval(t).0);
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::Param(format!("potential {kind:?} jumps by {} at τ = {t}", a - b)));
            }
        }
        let sup = pieces.iter().map(|p| p.form.lipschitz(p.lo, p.hi)).fold(0.0, f64::max);
        let lipschitz_const = sup.is_finite().then_some(sup);
        Ok(Potential { kind, params, pieces, lipschitz_const })
    }

    fn piece_index(&self, t: f64) -> usize {
        self.pieces.iter().position(|p| t <= p.hi).unwrap_or(self.pieces.len() - 1)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Value and derivative; at a breakpoint the left piece is used.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        self.pieces[self.piece_index(t)].form.eval(t)
    }

    /// Derivative from the right at `t` (differs from [`Potential::eval`] only at breakpoints).
    pub fn deriv_right(&self, t: f64) -> f64 {
        let i = self.pieces.iter().position(|p| t < p.hi).unwrap_or(self.pieces.len() - 1);
        self.pieces[i].form.eval(t).1
    }

    /// Interior breakpoints between pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[..self.pieces.len() - 1].iter().map(|p| p.hi).collect()
    }

    /// Poles of the potential inside the closed interval `[lo, hi]`.
    pub fn poles_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let last = self.pieces.len() - 1;
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let a = if i == 0 { f64::NEG_INFINITY } else { p.lo }.max(lo);
            let b = if i == last { f64::INFINITY } else { p.hi }.min(hi);
            if a > b {
                continue;
            }
            let (k, x0, phase) = match p.form {
                Form::Tan { k, x0, .. } => (k, x0, FRAC_PI_2),
                Form::Cot { k, x0, .. } => (k, x0, 0.0),
                _ => continue,
            };
            let j0 = ((k * (a - x0) - phase) / PI).ceil() as i64;
            let j1 = ((k * (b - x0) - phase) / PI).floor() as i64;
            out.extend((j0..=j1).map(|j| x0 + (phase + j as f64 * PI) / k));
        }
        out
    }

    /// Whether the potential is finite on the closed interval `[lo, hi]`
    /// (checked on a fine grid and at both ends).
    pub fn finite_on(&self, lo: f64, hi: f64) -> bool {
        let n = 4000;
        (0..=n).all(|i| {
            let (v, d) = self.eval(lo + (hi - lo) * i as f64 / n as f64);
            v.is_finite() && d.is_finite()
        })
    }
}

fn get(params: &BTreeMap<String, f64>, kind: PotentialKind, key: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| Error::Param(format!("{kind:?} requires parameter '{key}'")))
}

fn allowed(kind: PotentialKind) -> &'static [&'static str] {
    match kind {
        PotentialKind::Zero => &[],
        PotentialKind::RicciBand => &["n", "h_minus", "h_plus"],
        PotentialKind::TorusBand => &["w0"],
        PotentialKind::TwoRicciBand => &["h0"],
        PotentialKind::Waist => &["w", "r0", "span"],
        PotentialKind::Llarull => &["eps", "delta", "r0", "r1"],
        PotentialKind::LipschitzFamily => &["a", "b", "eps", "C", "w"],
        PotentialKind::DiceBand => &["w0", "eps"],
    }
}

/// Builds a potential of the given kind. Parameters:
///
/// * `RicciBand`: `n ≥ 3`, `h_minus`, `h_plus` (mean-curvature bounds `H ≥ −H±`),
/// * `TorusBand`: `w0 ∈ (0, 2π/3)`,
/// * `TwoRicciBand`: `h0`,
/// * `Waist`: `w > 0`, `r0 ∈ (0, w)` (default `w/2`), `span ≥ w` (default `w`),
/// * `Llarull`: `0 ≤ delta ≤ eps < r0 < r1 < π/2` (defaults `0, 0, 0.2, 0.4`);
///   `eps = 0` is the unregularised `−cot τ`,
/// * `LipschitzFamily`: `a, b, eps, C`, optional `w` checked against `bπ/(a(1+ε))`,
/// * `DiceBand`: `w0 > 0`, `eps ∈ (0, w0/2)`.
pub fn make_potential(kind: PotentialKind, params: &BTreeMap<String, f64>) -> Result<Potential> {
    if let Some(bad) = params.keys().find(|k| !allowed(kind).contains(&k.as_str())) {
        return Err(Error::Param(format!("unknown parameter '{bad}' for {kind:?}")));
    }
    if let Some((k, _)) = params.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Param(format!("parameter '{k}' is not finite")));
    }
    let g = |key: &str, default: Option<f64>| get(params, kind, key, default);
    let mut p = BTreeMap::new();
    let pieces = match kind {
        PotentialKind::Zero => vec![Piece::new(0.0, f64::INFINITY, Form::Const(0.0))],
        PotentialKind::RicciBand => {
            let n = g("n", Some(3.0))?;
            let (hm, hp) = (g("h_minus", None)?, g("h_plus", None)?);
            if n < 3.0 || n.fract() != 0.0 {
                return Err(Error::Param("RicciBand needs integer n ≥ 3".into()));
            }
            p.insert("n".into(), n);
            p.insert("h_minus".into(), hm);
            p.insert("h_plus".into(), hp);
            let am = (hm / (n - 1.0)).atan();
            let ap = (hp / (n - 1.0)).atan();
            let splice = (ap + am).max(FRAC_PI_4 + 0.5 * am);
            if splice <= 0.0 {
                return Err(Error::Param(format!("splice point {splice} outside τ ≥ 0")));
            }
            let tan = Form::Tan { amp: (n - 1.0) / (n * (n - 2.0)), k: 1.0, x0: am };
            spliced(tan, splice)
        }
        PotentialKind::TorusBand => {
            let w0 = g("w0", None)?;
            if !(w0 > 0.0 && w0 < 2.0 * PI / 3.0) {
                return Err(Error::Param(format!("w0 must lie in (0, 2π/3) (got {w0})")));
            }
            p.insert("w0".into(), w0);
            spliced(Form::Tan { amp: 1.0, k: 1.5, x0: w0 / 2.0 }, w0)
        }
        PotentialKind::TwoRicciBand => {
            let h0 = g("h0", None)?;
            p.insert("h0".into(), h0);
            let a = (h0 / 2.0).atan();
            if a <= 0.0 {
                return Err(Error::Param(format!("h0 must be positive for a splice at arctan(h0/2) (got {h0})")));
            }
            // 4/3 tan(2τ − a) = 4/3 tan(2(τ − a/2))
            spliced(Form::Tan { amp: 4.0 / 3.0, k: 2.0, x0: a / 2.0 }, a)
        }
        PotentialKind::Waist => {
            let w = g("w", None)?;
            let r0 = g("r0", Some(w / 2.0))?;
            let span = g("span", Some(w))?;
            if !(w > 0.0 && r0 > 0.0 && r0 < w && span >= w) {
                return Err(Error::Param(format!("Waist needs w > 0, 0 < r0 < w, span ≥ w (got {w}, {r0}, {span})")));
            }
            p.insert("w".into(), w);
            p.insert("r0".into(), r0);
            p.insert("span".into(), span);
            let (amp, k) = (-2.0 * PI / (3.0 * w), PI / w);
            let mid = span - w + r0;
            let mut v = vec![Piece::new(0.0, r0, Form::Cot { amp, k, x0: 0.0 })];
            if mid > r0 {
                v.push(Piece::new(r0, mid, Form::Const(amp / (k * r0).tan())));
            }
            v.push(Piece::new(mid, span, Form::Cot { amp, k, x0: span - w }));
            v
        }
        PotentialKind::Llarull => {
            let eps = g("eps", Some(0.0))?;
            let delta = g("delta", Some(0.0))?;
            let r0 = g("r0", Some(0.2))?;
            let r1 = g("r1", Some(0.4))?;
            let ok = 0.0 <= delta && delta <= eps && eps < r0 && r0 < r1 && r1 < FRAC_PI_2;
            let strict = eps == 0.0 || (delta > 0.0 && delta < eps);
            if !(ok && strict) {
                return Err(Error::Param(format!(
                    "Llarull needs 0 < delta < eps < r0 < r1 < π/2, or eps = delta = 0 (got {delta}, {eps}, {r0}, {r1})"
                )));
            }
            for (k, v) in [("eps", eps), ("delta", delta), ("r0", r0), ("r1", r1)] {
                p.insert(k.into(), v);
            }
            vec![
                Piece::new(eps, r0, Form::Cot { amp: -1.0, k: 1.0, x0: eps }),
                Piece::new(r0, r1, Form::Blend { eps, r0, r1, upper: false }),
                Piece::new(r1, PI - r1, Form::Cot { amp: -1.0, k: 1.0, x0: 0.0 }),
                Piece::new(PI - r1, PI - r0, Form::Blend { eps, r0, r1, upper: true }),
                Piece::new(PI - r0, PI - eps, Form::Cot { amp: -1.0, k: 1.0, x0: -eps }),
            ]
        }
        PotentialKind::LipschitzFamily => {
            let (a, b, eps, c) = (g("a", None)?, g("b", None)?, g("eps", None)?, g("C", None)?);
            let w = params.get("w").copied();
            return make_lemma24_potential(a, b, eps, c, w.unwrap_or(b * PI / (a * (1.0 + eps))));
        }
        PotentialKind::DiceBand => {
            let w0 = g("w0", None)?;
            let eps = g("eps", Some(w0 * 1e-3))?;
            if !(w0 > 0.0 && eps > 0.0 && eps < w0 / 2.0) {
                return Err(Error::Param(format!("DiceBand needs w0 > 0 and 0 < eps < w0/2 (got {w0}, {eps})")));
            }
            p.insert("w0".into(), w0);
            p.insert("eps".into(), eps);
            let amp = 2.0 * PI / (3.0 * w0);
            let k = PI / w0;
            let edge = w0 / 2.0 - eps;
            let cap = amp / (eps * k).tan();
            vec![
                Piece::new(f64::NEG_INFINITY, -edge, Form::Const(-cap)),
                Piece::new(-edge, edge, Form::Tan { amp, k, x0: 0.0 }),
                Piece::new(edge, f64::INFINITY, Form::Const(cap)),
            ]
        }
    };
    Potential::assemble(kind, p, pieces)
}

/// A tangent piece on `[0, splice]` continued by its tangent line.
fn spliced(tan: Form, splice: f64) -> Vec<Piece> {
    let (y0, slope) = tan.eval(splice);
    vec![
        Piece::new(0.0, splice, tan),
        Piece::new(splice, f64::INFINITY, Form::Linear { x0: splice, y0, slope }),
    ]
}

/// The reparametrised tangent family: `(1/a) tan((a/b) φ_ε(τ − w/2))` for `τ ≤ w`,
/// with `φ_ε` stretching a window of half-width `c` by `1 + 10ε`, continued linearly.
pub fn make_lemma24_potential(a: f64, b: f64, eps: f64, big_c: f64, w: f64) -> Result<Potential> {
    if !(a > 0.0 && b > 0.0 && eps > 0.0) {
        return Err(Error::Param("LipschitzFamily needs a, b, eps > 0".into()));
    }
    let c_min = (PI / (2.0 * (1.0 + eps))).tan() / a;
    if !(big_c > c_min) {
        return Err(Error::Param(format!("C = {big_c} must exceed (1/a)tan(π/(2(1+ε))) = {c_min}")));
    }
    let w_expected = b * PI / (a * (1.0 + eps));
    if (w - w_expected).abs() > 1e-12 * w_expected {
        return Err(Error::Param(format!("w = {w} inconsistent with bπ/(a(1+ε)) = {w_expected}")));
    }
    let c = b / (10.0 * eps * a) * ((a * big_c).atan() - w * a / (2.0 * b));
    let mid = w / 2.0;
    let k = a / b;
    let pieces = vec![
        Piece::new(0.0, mid - c, Form::Tan { amp: 1.0 / a, k, x0: mid + 10.0 * eps * c }),
        Piece::new(mid - c, mid + c, Form::Tan { amp: 1.0 / a, k: k * (1.0 + 10.0 * eps), x0: mid }),
        Piece::new(mid + c, w, Form::Tan { amp: 1.0 / a, k, x0: mid - 10.0 * eps * c }),
    ];
    let (y0, slope) = pieces[2].form.eval(w);
    let mut pieces = pieces;
    pieces.push(Piece::new(w, f64::INFINITY, Form::Linear { x0: w, y0, slope }));
    let params: BTreeMap<String, f64> =
        [("a", a), ("b", b), ("eps", eps), ("C", big_c), ("w", w), ("c", c)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
    let mut pot = Potential::assemble(PotentialKind::LipschitzFamily, params, pieces)?;
    // `c` is derived; keep it out of the round-trippable parameter set
    pot.params.remove("c");
    Ok(pot)
}

/// Half-width of the stretched window in [`make_lemma24_potential`].
pub fn lemma24_window(a: f64, b: f64, eps: f64, big_c: f64) -> f64 {
    let w = b * PI / (a * (1.0 + eps));
    b / (10.0 * eps * a) * ((a * big_c).atan() - w * a / (2.0 * b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ode")]
pub enum OdeKind {
    /// `n²(n−2)²/(n−1) f² − n(n−2) f' + n − 1 ≥ 0`
    RicciBand { n: usize },
    /// `6 + 6f² − 4f' ≥ 0`
    Torus,
    /// `4 + (9/4)f² − (3/2)|f'| ≥ 0`
    TwoRicci,
    /// `6f² − 4|f'| + 8π²/(3w²) ≥ 0`, i.e. `R₀ + 6f² − 4|f'| ≥ R₀ − 8π²/(3w²)`
    Waist { w: f64 },
    /// `3 + 3f² − 2|f'| − (1 − 4ε/(r₁−r₀)) csc²τ ≥ 0`
    Llarull { eps: f64, r0: f64, r1: f64 },
    /// `a²f² − b|f'| + 1`; nonnegative away from the stretched window
    Lemma24 { a: f64, b: f64 },
}

impl OdeKind {
    pub fn lhs(&self, t: f64, f: f64, df: f64) -> f64 {
        match *self {
            OdeKind::RicciBand { n } => {
                let n = n as f64;
                n * n * (n - 2.0).powi(2) / (n - 1.0) * f * f - n * (n - 2.0) * df + n - 1.0
            }
            OdeKind::Torus => 6.0 + 6.0 * f * f - 4.0 * df,
            OdeKind::TwoRicci => 4.0 + 2.25 * f * f - 1.5 * df.abs(),
            OdeKind::Waist { w } => 6.0 * f * f - 4.0 * df.abs() + 8.0 * PI * PI / (3.0 * w * w),
            OdeKind::Llarull { eps, r0, r1 } => {
                3.0 + 3.0 * f * f - 2.0 * df.abs() - (1.0 - 4.0 * eps / (r1 - r0)) / t.sin().powi(2)
            }
            OdeKind::Lemma24 { a, b } => a * a * f * f - b * df.abs() + 1.0,
        }
    }

    fn compatible(&self, kind: PotentialKind) -> bool {
        matches!(
            (self, kind),
            (_, PotentialKind::Zero)
                | (OdeKind::RicciBand { .. }, PotentialKind::RicciBand)
                | (OdeKind::Torus, PotentialKind::TorusBand)
                | (OdeKind::TwoRicci, PotentialKind::TwoRicciBand)
                | (OdeKind::Waist { .. }, PotentialKind::Waist | PotentialKind::DiceBand)
                | (OdeKind::Llarull { .. }, PotentialKind::Llarull)
                | (OdeKind::Lemma24 { .. }, PotentialKind::LipschitzFamily)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieceSlack {
    pub lo: f64,
    pub hi: f64,
    pub min_slack: f64,
    pub argmin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackReport {
    pub min_slack: f64,
    pub argmin: f64,
    pub per_piece: Vec<PieceSlack>,
}

/// Evaluates the inequality's left side on the cell midpoints of a uniform grid
/// over `interval`, skipping any midpoint that lands on a breakpoint.
pub fn check_ode(pot: &Potential, ode: OdeKind, interval: (f64, f64), n_samples: usize) -> Result<SlackReport> {
    if !ode.compatible(pot.kind) {
        return Err(Error::Param(format!("{ode:?} does not apply to a {:?} potential", pot.kind)));
    }
    if n_samples < 100 {
        return Err(Error::Param("check_ode needs at least 100 samples".into()));
    }
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::Param("empty interval".into()));
    }
    let h = (hi - lo) / n_samples as f64;
    let bps = pot.breakpoints();
    let mut per_piece: Vec<PieceSlack> = Vec::new();
    for i in 0..n_samples {
        let t = lo + (i as f64 + 0.5) * h;
        if bps.iter().any(|b| (t - b).abs() <= 1e-12 * b.abs().max(1.0)) {
            continue;
        }
        let k = pot.piece_index(t);
        let (f, df) = pot.pieces[k].form.eval(t);
        let s = ode.lhs(t, f, df);
        let piece = &pot.pieces[k];
        match per_piece.iter_mut().find(|p| p.lo == piece.lo.max(lo) && p.hi == piece.hi.min(hi)) {
            Some(p) => {
                if s < p.min_slack {
                    p.min_slack = s;
                    p.argmin = t;
                }
            }
            None => per_piece.push(PieceSlack { lo: piece.lo.max(lo), hi: piece.hi.min(hi), min_slack: s, argmin: t }),
        }
    }
    let best = per_piece
        .iter()
        .min_by(|a, b| a.min_slack.total_cmp(&b.min_slack))
        .ok_or_else(|| Error::Param("no admissible sample points".into()))?;
    Ok(SlackReport { min_slack: best.min_slack, argmin: best.argmin, per_piece: per_piece.clone() })
}

/// Whether samples on an `n`-point grid over `[lo, hi]` never decrease.
pub fn is_monotone(pot: &Potential, lo: f64, hi: f64, n: usize) -> bool {
    let v: Vec<f64> = (0..=n).map(|i| pot.value(lo + (hi - lo) * i as f64 / n as f64)).collect();
    v.windows(2).all(|w| w[1] >= w[0] - 1e-14 * w[0].abs().max(1.0))
}

pub fn named(kind: PotentialKind, pairs: &[(&str, f64)]) -> Result<Potential> {
    make_potential(kind, &pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ricci_band_lower_value() {
        let p = named(PotentialKind::RicciBand, &[("n", 3.0), ("h_minus", 2.0), ("h_plus", 2.0)]).unwrap();
        assert!((p.value(0.0) + 2.0 / 3.0).abs() < 1e-15);
        assert!((3.0 * p.value(0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn torus_band_lower_value() {
        let p = named(PotentialKind::TorusBand, &[("w0", PI / 3.0)]).unwrap();
        assert!((p.value(0.0) + 1.0).abs() < 1e-15);
        assert!((2.0 * p.value(0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_ricci_lower_value() {
        let p = named(PotentialKind::TwoRicciBand, &[("h0", 2.0)]).unwrap();
        assert!((p.value(0.0) + 4.0 / 3.0).abs() < 1e-14);
        assert!((1.5 * p.value(0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn waist_vanishes_at_half() {
        let p = named(PotentialKind::Waist, &[("w", PI)]).unwrap();
        assert!(p.value(PI / 2.0).abs() < 1e-15);
        assert!(p.lipschitz_const.is_none());
    }

    #[test]
    fn waist_clips_between_balls() {
        let p = named(PotentialKind::Waist, &[("w", 2.0), ("r0", 0.7), ("span", 3.0)]).unwrap();
        let c = p.value(0.7);
        for t in [0.8, 1.2, 1.69] {
            assert_eq!(p.value(t), c);
        }
        assert!(p.value(1.71) > c);
    }

    #[test]
    fn splice_is_c1() {
        let cases = [
            named(PotentialKind::RicciBand, &[("n", 4.0), ("h_minus", 1.0), ("h_plus", 3.0)]).unwrap(),
            named(PotentialKind::TorusBand, &[("w0", 1.7)]).unwrap(),
            named(PotentialKind::TwoRicciBand, &[("h0", 0.8)]).unwrap(),
            make_lemma24_potential(1.0, 1.0, 0.1, 10.0, PI / 1.1).unwrap(),
        ];
        for p in &cases {
            let s = p.pieces[p.pieces.len() - 2].hi;
            assert!((p.eval(s).1 - p.deriv_right(s)).abs() < 1e-9, "{:?}", p.kind);
        }
    }

    #[test]
    fn lemma24_midpoint_and_ends() {
        let w = PI / 1.1;
        let p = make_lemma24_potential(1.0, 1.0, 0.1, 10.0, w).unwrap();
        assert!(p.value(w / 2.0).abs() < 1e-15);
        assert!(p.value(0.0) <= -10.0 + 1e-12);
        assert!(p.value(w) >= 10.0 - 1e-12);
        assert!(make_lemma24_potential(1.0, 1.0, 0.1, 5.0, w).is_err());
        assert!(make_lemma24_potential(1.0, 1.0, 0.1, 10.0, 3.0).is_err());
        assert!(lemma24_window(1.0, 1.0, 0.1, 10.0) < w / 20.0);
    }

    #[test]
    fn tangent_pieces_solve_their_odes() {
        let rb = named(PotentialKind::RicciBand, &[("n", 3.0), ("h_minus", 2.0), ("h_plus", 2.0)]).unwrap();
        let r = check_ode(&rb, OdeKind::RicciBand { n: 3 }, (0.0, PI / 2.0), 1000).unwrap();
        assert!(r.min_slack.abs() < 1e-10, "{r:?}");
        let tb = named(PotentialKind::TorusBand, &[("w0", PI / 3.0)]).unwrap();
        let r = check_ode(&tb, OdeKind::Torus, (0.0, PI / 3.0), 1000).unwrap();
        assert!(r.min_slack.abs() < 1e-10);
        let z = named(PotentialKind::Zero, &[]).unwrap();
        let r = check_ode(&z, OdeKind::Torus, (0.0, 1.0), 100).unwrap();
        assert_eq!(r.min_slack, 6.0);
        assert!(check_ode(&tb, OdeKind::TwoRicci, (0.0, 1.0), 100).is_err());
    }

    #[test]
    fn llarull_regulariser_derivative_bounds() {
        let (eps, r0, r1) = (0.05, 0.2, 0.4);
        for i in 0..=2000 {
            let th = eps + (PI - 2.0 * eps) * i as f64 / 2000.0;
            let d = psi_zero(th, eps, r0, r1).1;
            assert!(d >= 1.0 && d <= 1.0 + 2.0 * eps / (r1 - r0) + 1e-15);
        }
        let (v, d) = psi_delta(0.01, 0.01);
        assert!((v - 0.01).abs() < 1e-15 && (d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn llarull_limit_is_negative_cot() {
        let p = named(PotentialKind::Llarull, &[]).unwrap();
        for t in [0.1, 0.3, 1.0, 2.0, 3.0] {
            assert!((p.value(t) + 1.0 / t.tan()).abs() < 1e-13);
        }
        let q = named(PotentialKind::Llarull, &[("eps", 0.05), ("delta", 0.01)]).unwrap();
        // matches −cot(ψ⁰(τ)) through the blends
        for t in [0.1, 0.25, 0.33, 1.0, 2.8, 2.95, 3.05] {
            let want = -1.0 / psi_zero(t, 0.05, 0.2, 0.4).0.tan();
            assert!((q.value(t) - want).abs() < 1e-12, "τ = {t}");
        }
    }

    #[test]
    fn pole_locations() {
        let w = named(PotentialKind::Waist, &[("w", PI)]).unwrap();
        let poles = w.poles_in(0.0, PI);
        assert_eq!(poles.len(), 2);
        assert!(poles[0].abs() < 1e-15 && (poles[1] - PI).abs() < 1e-15);
        let t = named(PotentialKind::TorusBand, &[("w0", PI / 3.0)]).unwrap();
        assert!(t.poles_in(0.0, PI / 3.0).is_empty());
    }

    #[test]
    fn potential_json_roundtrip() {
        let p = named(PotentialKind::TorusBand, &[("w0", 1.0)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"kind":"TorusBand","params":{"w0":1.0}}"#);
        let q: Potential = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
