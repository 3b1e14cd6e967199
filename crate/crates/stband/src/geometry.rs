//! Warped-product metric families and curvature along the profile coordinate.
//!
//! Doubly warped families are `dρ² + φ(ρ)²dx² + ψ(ρ)²dy²` over a flat torus with
//! periods 2π. Singly warped families are `dρ² + w(ρ)²g_Σ` with `g_Σ` Einstein,
//! `Ric_Σ = κ g_Σ`. The asymptotically flat family uses a non-arclength radius
//! `r` with `ds = α(r) dr`; every derivative reported by [`MetricSpec::warping`]
//! is taken with respect to arclength.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    RoundBand,
    GUpsilon,
    TorusExtremal,
    Counterexample,
    RicciWarped,
    AFSymmetric,
    FlatProduct,
    CustomDoublyWarped,
}

impl Family {
    pub fn all() -> [Family; 8] {
        use Family::*;
        [
            RoundBand,
            GUpsilon,
            TorusExtremal,
            Counterexample,
            RicciWarped,
            AFSymmetric,
            FlatProduct,
            CustomDoublyWarped,
        ]
    }
}

/// Value and first two derivatives of a scalar function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ONE: Jet = Jet { v: 1.0, d1: 0.0, d2: 0.0 };

    fn new(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d1, d2 }
    }

    /// Jet of `v · exp(E)` style products given log-derivatives `L = v'/v` and `L'`.
    fn from_log(v: f64, l: f64, dl: f64) -> Self {
        Jet { v, d1: v * l, d2: v * (dl + l * l) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Warping {
    Doubly { phi: Jet, psi: Jet },
    Single { w: Jet, kappa: f64, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub rho: f64,
    /// Ricci eigenvalues sorted ascending, with multiplicity.
    pub ricci_eigs: Vec<f64>,
    pub scalar: f64,
    pub two_ricci: f64,
    /// Mean curvature of the ρ-level set with respect to `∂ρ`.
    pub mean_curv: f64,
    /// `Ric(∂ρ, ∂ρ)`, the Ricci curvature in the profile direction.
    pub ric_normal: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n_cells: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo || n_cells == 0 {
            return Err(Error::Param(format!(
                "grid needs lo < hi and n_cells > 0 (got [{lo}, {hi}], {n_cells})"
            )));
        }
        Ok(Grid1D { lo, hi, n_cells })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n_cells as f64
    }

    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.hi
        } else {
            self.lo + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

/// Natural cubic spline on uniform knots.
#[derive(Clone, Debug, PartialEq)]
pub struct Spline {
    lo: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    pub fn natural(lo: f64, hi: f64, y: Vec<f64>) -> Result<Self> {
        let k = y.len();
        if k < 3 {
            return Err(Error::Param("spline needs at least 3 knots".into()));
        }
        let h = (hi - lo) / (k - 1) as f64;
        // second derivatives M_i with M_0 = M_{k-1} = 0
        let mut m = vec![0.0; k];
        if k > 2 {
            let n = k - 2;
            let sub = vec![1.0; n];
            let diag = vec![4.0; n];
            let sup = vec![1.0; n];
            let rhs: Vec<f64> = (1..k - 1)
                .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
                .collect();
            let sol = crate::linalg::solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
            m[1..k - 1].copy_from_slice(&sol);
        }
        Ok(Spline { lo, h, y, m })
    }

    pub fn eval(&self, x: f64) -> Jet {
        let k = self.y.len();
        let t = ((x - self.lo) / self.h).floor();
        let i = (t.max(0.0) as usize).min(k - 2);
        let x0 = self.lo + i as f64 * self.h;
        let a = (x0 + self.h - x) / self.h;
        let b = (x - x0) / self.h;
        let (m0, m1, y0, y1, h) = (self.m[i], self.m[i + 1], self.y[i], self.y[i + 1], self.h);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        Jet::new(v, d1, d2)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    RoundBand { t1: f64, t2: f64 },
    GUpsilon { ups: f64, rho0: f64 },
    Torus { w: f64 },
    Counter { delta: f64 },
    Flat { length: f64 },
    Sine { lambda: f64, radius: f64, cubic: f64 },
    Capsule { a: f64, length: f64 },
    Af { mass: f64 },
    Custom { lo: f64, hi: f64, phi: Spline, psi: Spline },
}

/// A named analytic metric family with resolved parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMetric", into = "RawMetric")]
pub struct MetricSpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    pub dimension: usize,
    kappa: f64,
    shape: Shape,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawMetric {
    family: Family,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    dimension: Option<usize>,
}

impl TryFrom<RawMetric> for MetricSpec {
    type Error = Error;
    fn try_from(raw: RawMetric) -> Result<Self> {
        MetricSpec::new(raw.family, &raw.params, raw.dimension)
    }
}

impl From<MetricSpec> for RawMetric {
    fn from(m: MetricSpec) -> Self {
        RawMetric { family: m.family, params: m.params, dimension: Some(m.dimension) }
    }
}

/// Area of the unit sphere `S^k`.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

const TORUS_AREA: f64 = 4.0 * PI * PI;

/// Warping values at or below this are treated as a closed-up fiber.
const VANISH: f64 = 1e-12;

fn known_keys(family: Family) -> &'static [&'static str] {
    match family {
        Family::RoundBand => &["theta1", "theta2"],
        Family::GUpsilon => &["upsilon", "rho0"],
        Family::TorusExtremal => &["w"],
        Family::Counterexample => &["delta"],
        Family::FlatProduct => &["length"],
        Family::RicciWarped => &["lambda", "radius", "cubic", "kappa", "cap_radius", "length"],
        Family::AFSymmetric => &["mass"],
        Family::CustomDoublyWarped => &[],
    }
}

impl MetricSpec {
    /// Builds a metric from a family tag and named parameters; missing optional
    /// parameters receive their documented defaults and are written back into `params`.
    pub fn new(family: Family, params: &BTreeMap<String, f64>, dimension: Option<usize>) -> Result<Self> {
        let keys = known_keys(family);
        if family != Family::CustomDoublyWarped {
            if let Some(bad) = params.keys().find(|k| !keys.contains(&k.as_str())) {
                return Err(Error::Param(format!("unknown parameter '{bad}' for {family:?}")));
            }
        }
        for (k, v) in params {
            if !v.is_finite() {
                return Err(Error::Param(format!("parameter '{k}' is not finite")));
            }
        }
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            params
                .get(k)
                .copied()
                .or(default)
                .ok_or_else(|| Error::Param(format!("{family:?} requires parameter '{k}'")))
        };
        let doubly = matches!(
            family,
            Family::GUpsilon
                | Family::TorusExtremal
                | Family::Counterexample
                | Family::FlatProduct
                | Family::CustomDoublyWarped
        );
        let dimension = dimension.unwrap_or(3);
        if doubly && dimension != 3 {
            return Err(Error::Param(format!("{family:?} is 3-dimensional (got n = {dimension})")));
        }
        if dimension < 2 {
            return Err(Error::Param("dimension must be at least 2".into()));
        }
        let mut resolved = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            resolved.insert(k.to_string(), v);
        };
        let mut kappa = dimension as f64 - 2.0;
        let shape = match family {
            Family::RoundBand => {
                let (t1, t2) = (get("theta1", None)?, get("theta2", None)?);
                if !(t1.abs() < FRAC_PI_2 && t2.abs() < FRAC_PI_2 && -t1 < t2) {
                    return Err(Error::Param(format!(
                        "RoundBand needs -π/2 < -theta1 < theta2 < π/2 (got {t1}, {t2})"
                    )));
                }
                put("theta1", t1);
                put("theta2", t2);
                Shape::RoundBand { t1, t2 }
            }
            Family::GUpsilon => {
                let ups = get("upsilon", None)?;
                let rho0 = get("rho0", Some(PI / 8.0))?;
                if !(0.0..=1.0).contains(&ups) {
                    return Err(Error::Param(format!("upsilon must lie in [0, 1] (got {ups})")));
                }
                if !(rho0 > 0.0 && rho0 < FRAC_PI_4) {
                    return Err(Error::Param(format!("rho0 must lie in (0, π/4) (got {rho0})")));
                }
                put("upsilon", ups);
                put("rho0", rho0);
                Shape::GUpsilon { ups, rho0 }
            }
            Family::TorusExtremal => {
                let w = get("w", None)?;
                if !(w > 0.0 && w < 2.0 * PI / 3.0) {
                    return Err(Error::Param(format!("w must lie in (0, 2π/3) (got {w})")));
                }
                put("w", w);
                Shape::Torus { w }
            }
            Family::Counterexample => {
                let delta = get("delta", None)?;
                if !(0.0..=1.0).contains(&delta) {
                    return Err(Error::Param(format!("delta must lie in [0, 1] (got {delta})")));
                }
                put("delta", delta);
                Shape::Counter { delta }
            }
            Family::FlatProduct => {
                let length = get("length", Some(1.0))?;
                if length <= 0.0 {
                    return Err(Error::Param("length must be positive".into()));
                }
                put("length", length);
                Shape::Flat { length }
            }
            Family::RicciWarped => {
                if dimension < 3 {
                    return Err(Error::Param("RicciWarped needs n ≥ 3".into()));
                }
                if params.contains_key("cap_radius") || params.contains_key("length") {
                    let a = get("cap_radius", Some(1.0))?;
                    let length = get("length", None)?;
                    if a <= 0.0 || length < 0.0 {
                        return Err(Error::Param("capsule needs cap_radius > 0 and length ≥ 0".into()));
                    }
                    put("cap_radius", a);
                    put("length", length);
                    Shape::Capsule { a, length }
                } else {
                    let lambda = get("lambda", Some(1.0))?;
                    let radius = get("radius", Some(1.0))?;
                    let cubic = get("cubic", Some(0.0))?;
                    kappa = get("kappa", Some(kappa))?;
                    if lambda <= 0.0 || radius <= 0.0 || cubic < 0.0 {
                        return Err(Error::Param(
                            "sine profile needs lambda > 0, radius > 0, cubic ≥ 0".into(),
                        ));
                    }
                    put("lambda", lambda);
                    put("radius", radius);
                    put("cubic", cubic);
                    put("kappa", kappa);
                    Shape::Sine { lambda, radius, cubic }
                }
            }
            Family::AFSymmetric => {
                if dimension < 3 {
                    return Err(Error::Param("AFSymmetric needs n ≥ 3".into()));
                }
                let mass = get("mass", Some(0.0))?;
                if mass < 0.0 {
                    return Err(Error::Param("mass must be nonnegative".into()));
                }
                put("mass", mass);
                Shape::Af { mass }
            }
            Family::CustomDoublyWarped => {
                let lo = get("lo", None)?;
                let hi = get("hi", None)?;
                if hi <= lo {
                    return Err(Error::Param("CustomDoublyWarped needs lo < hi".into()));
                }
                let knots = |prefix: &str| -> Vec<f64> {
                    (0..)
                        .map_while(|i| params.get(&format!("{prefix}_{i}")).copied())
                        .collect()
                };
                let (py, sy) = (knots("phi"), knots("psi"));
                if py.len() != sy.len() || py.len() < 3 {
                    return Err(Error::Param(
                        "CustomDoublyWarped needs phi_0.. and psi_0.. with equal count ≥ 3".into(),
                    ));
                }
                if py.iter().chain(&sy).any(|&v| v <= 0.0) {
                    return Err(Error::Param("non-positive warping knot".into()));
                }
                let expected = 2 + 2 * py.len();
                if params.len() != expected {
                    return Err(Error::Param("unexpected parameters for CustomDoublyWarped".into()));
                }
                resolved = params.clone();
                let phi = Spline::natural(lo, hi, py)?;
                let psi = Spline::natural(lo, hi, sy)?;
                Shape::Custom { lo, hi, phi, psi }
            }
        };
        let spec = MetricSpec { family, params: resolved, dimension, kappa, shape };
        spec.check_positive()?;
        Ok(spec)
    }

    pub fn round_band(theta1: f64, theta2: f64, n: usize) -> Result<Self> {
        Self::new(Family::RoundBand, &pmap(&[("theta1", theta1), ("theta2", theta2)]), Some(n))
    }

    pub fn g_upsilon(upsilon: f64, rho0: f64) -> Result<Self> {
        Self::new(Family::GUpsilon, &pmap(&[("upsilon", upsilon), ("rho0", rho0)]), None)
    }

    pub fn torus_extremal(w: f64) -> Result<Self> {
        Self::new(Family::TorusExtremal, &pmap(&[("w", w)]), None)
    }

    pub fn counterexample(delta: f64) -> Result<Self> {
        Self::new(Family::Counterexample, &pmap(&[("delta", delta)]), None)
    }

    pub fn flat(length: f64) -> Result<Self> {
        Self::new(Family::FlatProduct, &pmap(&[("length", length)]), None)
    }

    /// `dθ² + (λ(r sin(θ/r) + c r sin³(θ/r)))² g_{S^{n-1}}` on `[0, πr]`.
    pub fn sine_warped(lambda: f64, radius: f64, cubic: f64, n: usize) -> Result<Self> {
        Self::new(
            Family::RicciWarped,
            &pmap(&[("lambda", lambda), ("radius", radius), ("cubic", cubic)]),
            Some(n),
        )
    }

    /// Round caps of radius `a` joined by a cylinder `[0, length] × S²(a)`.
    pub fn capsule(a: f64, length: f64) -> Result<Self> {
        Self::new(Family::RicciWarped, &pmap(&[("cap_radius", a), ("length", length)]), Some(3))
    }

    /// Spatial Schwarzschild in isotropic coordinates; `mass = 0` is Euclidean space.
    pub fn schwarzschild(mass: f64, n: usize) -> Result<Self> {
        Self::new(Family::AFSymmetric, &pmap(&[("mass", mass)]), Some(n))
    }

    pub fn custom(lo: f64, hi: f64, phi: &[f64], psi: &[f64]) -> Result<Self> {
        let mut p = pmap(&[("lo", lo), ("hi", hi)]);
        for (i, (a, b)) in phi.iter().zip(psi).enumerate() {
            p.insert(format!("phi_{i}"), *a);
            p.insert(format!("psi_{i}"), *b);
        }
        Self::new(Family::CustomDoublyWarped, &p, None)
    }

    pub fn is_doubly_warped(&self) -> bool {
        matches!(
            self.shape,
            Shape::GUpsilon { .. } | Shape::Torus { .. } | Shape::Counter { .. } | Shape::Flat { .. } | Shape::Custom { .. }
        )
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Closed profile interval on which the family is defined.
    pub fn domain(&self) -> (f64, f64) {
        match &self.shape {
            Shape::RoundBand { t1, t2 } => (-t1, *t2),
            Shape::GUpsilon { .. } | Shape::Counter { .. } => (-FRAC_PI_4, FRAC_PI_4),
            Shape::Torus { .. } => (-PI / 3.0, PI / 3.0),
            Shape::Flat { length } => (0.0, *length),
            Shape::Sine { radius, .. } => (0.0, PI * radius),
            Shape::Capsule { a, length } => (0.0, PI * a + length),
            Shape::Af { .. } => (0.0, f64::INFINITY),
            Shape::Custom { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Default band `[ρ₋, ρ₊]` for families that carry two boundary leaves.
    pub fn band(&self) -> Option<(f64, f64)> {
        match &self.shape {
            Shape::RoundBand { t1, t2 } => Some((-t1, *t2)),
            Shape::GUpsilon { rho0, .. } => Some((-rho0, *rho0)),
            Shape::Torus { w } => Some((-w / 2.0, w / 2.0)),
            Shape::Flat { length } => Some((0.0, *length)),
            Shape::Custom { lo, hi, .. } => Some((*lo, *hi)),
            _ => None,
        }
    }

    /// Closed manifolds whose warping vanishes at both ends of the domain.
    pub fn is_closed(&self) -> bool {
        matches!(self.shape, Shape::Counter { .. } | Shape::Sine { .. } | Shape::Capsule { .. })
    }

    /// Euler characteristic of the fiber: 0 for flat tori, 2 for 2-spheres.
    pub fn fiber_euler_char(&self) -> i32 {
        match (self.is_doubly_warped(), self.dimension) {
            (true, _) => 0,
            (false, 3) => 2,
            (false, n) if n % 2 == 1 => 2,
            _ => 0,
        }
    }

    /// `ds/dρ`; equal to 1 except for the AF radius.
    pub fn arclength_factor(&self, rho: f64) -> f64 {
        match self.shape {
            Shape::Af { mass } => af_jets(mass, self.dimension, rho).0.v,
            _ => 1.0,
        }
    }

    /// Warping jets at profile coordinate `rho`, derivatives with respect to arclength.
    pub fn warping(&self, rho: f64) -> Warping {
        let n = self.dimension;
        let single = |w: Jet| Warping::Single { w, kappa: self.kappa, n };
        match &self.shape {
            Shape::RoundBand { .. } => single(Jet::new(rho.cos(), -rho.sin(), -rho.cos())),
            Shape::GUpsilon { ups, .. } => {
                let (a, b) = (1.0 - ups, ups / 2.0);
                let amp = 2f64.powf((1.0 - ups) / 2.0);
                let x = rho + FRAC_PI_4;
                let c2 = (2.0 * rho).cos();
                let t2 = (2.0 * rho).tan();
                let sec2 = 1.0 / (c2 * c2);
                let phi_v = amp * x.cos().powf(a) * c2.powf(b);
                let psi_v = amp * x.sin().powf(a) * c2.powf(b);
                let lphi = -a * x.tan() - 2.0 * b * t2;
                let dlphi = -a / x.cos().powi(2) - 4.0 * b * sec2;
                let lpsi = a / x.tan() - 2.0 * b * t2;
                let dlpsi = -a / x.sin().powi(2) - 4.0 * b * sec2;
                Warping::Doubly {
                    phi: Jet::from_log(phi_v, lphi, dlphi),
                    psi: Jet::from_log(psi_v, lpsi, dlpsi),
                }
            }
            Shape::Torus { .. } => {
                let (p, k) = (2.0 / 3.0, 1.5);
                let c = (k * rho).cos();
                let t = (k * rho).tan();
                let v = c.powf(p);
                let j = Jet::new(v, -p * k * t * v, p * k * k * ((p - 1.0) * t * t - 1.0) * v);
                Warping::Doubly { phi: j, psi: j }
            }
            Shape::Counter { delta } => {
                let d = *delta;
                let (s2, c2) = (2.0 * rho).sin_cos();
                let (e1, e2) = (d * c2, -2.0 * d * s2);
                let x = rho + FRAC_PI_4;
                let (sx, cx) = x.sin_cos();
                let ep = (d / 2.0 * (s2 - 1.0)).exp();
                let phi = Jet::new(
                    ep * cx,
                    ep * (e1 * cx - sx),
                    ep * ((e1 * e1 + e2 - 1.0) * cx - 2.0 * e1 * sx),
                );
                // ψ(t) = φ(-t)
                let em = (-d / 2.0 * (s2 + 1.0)).exp();
                let (f1, f2) = (-d * c2, 2.0 * d * s2);
                let psi = Jet::new(
                    em * sx,
                    em * (f1 * sx + cx),
                    em * ((f1 * f1 + f2 - 1.0) * sx + 2.0 * f1 * cx),
                );
                Warping::Doubly { phi, psi }
            }
            Shape::Flat { .. } => Warping::Doubly { phi: Jet::ONE, psi: Jet::ONE },
            Shape::Sine { lambda, radius, cubic } => {
                let (l, r, c) = (*lambda, *radius, *cubic);
                let (s, co) = (rho / r).sin_cos();
                single(Jet::new(
                    l * r * (s + c * s * s * s),
                    l * (co + 3.0 * c * s * s * co),
                    l / r * (-s + 6.0 * c * s * co * co - 3.0 * c * s * s * s),
                ))
            }
            Shape::Capsule { a, length } => {
                let a = *a;
                let cap = a * FRAC_PI_2;
                let j = if rho <= cap {
                    let (s, c) = (rho / a).sin_cos();
                    Jet::new(a * s, c, -s / a)
                } else if rho <= cap + length {
                    Jet::new(a, 0.0, 0.0)
                } else {
                    let x = (PI * a + length - rho) / a;
                    let (s, c) = x.sin_cos();
                    Jet::new(a * s, -c, -s / a)
                };
                single(j)
            }
            Shape::Af { mass } => {
                let (alpha, beta) = af_jets(*mass, n, rho);
                let bs = beta.d1 / alpha.v;
                let bss = (beta.d2 * alpha.v - beta.d1 * alpha.d1) / alpha.v.powi(3);
                single(Jet::new(beta.v, bs, bss))
            }
            Shape::Custom { phi, psi, .. } => Warping::Doubly { phi: phi.eval(rho), psi: psi.eval(rho) },
        }
    }

    fn check_positive(&self) -> Result<()> {
        let (lo, hi) = self.domain();
        let hi = if hi.is_finite() { hi } else { lo + 1e3 };
        let m = 2000;
        for i in 1..m {
            let rho = lo + (hi - lo) * i as f64 / m as f64;
            let ok = match self.warping(rho) {
                Warping::Doubly { phi, psi } => phi.v > 0.0 && psi.v > 0.0,
                Warping::Single { w, .. } => w.v > 0.0,
            };
            if !ok {
                return Err(Error::Param(format!("non-positive warping at ρ = {rho}")));
            }
        }
        Ok(())
    }

    fn check_interior(&self, rho: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(rho >= lo && rho <= hi) {
            return Err(Error::Domain(format!("ρ = {rho} is outside [{lo}, {hi}]")));
        }
        if self.vanishes_at(rho) {
            return Err(Error::Domain(format!("warping vanishes at ρ = {rho}")));
        }
        Ok(())
    }

    fn vanishes_at(&self, rho: f64) -> bool {
        match self.warping(rho) {
            Warping::Doubly { phi, psi } => phi.v <= VANISH || psi.v <= VANISH,
            Warping::Single { w, .. } => w.v <= VANISH,
        }
    }

    /// Mean curvature `H_ρ` of the level set `{ρ}` with respect to `∂ρ` (unit normalised).
    pub fn mean_curv(&self, rho: f64) -> f64 {
        match self.warping(rho) {
            Warping::Doubly { phi, psi } => phi.d1 / phi.v + psi.d1 / psi.v,
            Warping::Single { w, n, .. } => (n as f64 - 1.0) * w.d1 / w.v,
        }
    }

    /// Area of the level set `{ρ}`.
    pub fn fiber_area(&self, rho: f64) -> f64 {
        match self.warping(rho) {
            Warping::Doubly { phi, psi } => TORUS_AREA * phi.v * psi.v,
            Warping::Single { w, n, .. } => sphere_area(n - 1) * w.v.powi(n as i32 - 1),
        }
    }

    /// Volume per unit profile coordinate: fiber area times `ds/dρ`.
    pub fn volume_density(&self, rho: f64) -> f64 {
        self.fiber_area(rho) * self.arclength_factor(rho)
    }

    pub fn curvature_at(&self, rho: f64) -> Result<CurvatureSample> {
        self.check_interior(rho)?;
        let (mut eigs, ric_normal, mean_curv) = match self.warping(rho) {
            Warping::Doubly { phi, psi } => {
                let (p2, q2) = (phi.d2 / phi.v, psi.d2 / psi.v);
                let cross = phi.d1 * psi.d1 / (phi.v * psi.v);
                let tt = -p2 - q2;
                (vec![tt, -p2 - cross, -q2 - cross], tt, phi.d1 / phi.v + psi.d1 / psi.v)
            }
            Warping::Single { w, kappa, n } => {
                let nf = n as f64;
                let radial = -(nf - 1.0) * w.d2 / w.v;
                let fiber = kappa / (w.v * w.v) - w.d2 / w.v - (nf - 2.0) * (w.d1 / w.v).powi(2);
                let mut e = vec![radial];
                e.extend(std::iter::repeat(fiber).take(n - 1));
                (e, radial, (nf - 1.0) * w.d1 / w.v)
            }
        };
        let scalar = eigs.iter().sum();
        eigs.sort_by(f64::total_cmp);
        let two_ricci = eigs[0] + eigs[1];
        Ok(CurvatureSample { rho, ricci_eigs: eigs, scalar, two_ricci, mean_curv, ric_normal })
    }

    /// Outward mean curvature of a boundary leaf: `+H_ρ` at `ρ₊`, `-H_ρ` at `ρ₋`.
    pub fn mean_curvature_boundary(&self, side: Side) -> Result<f64> {
        let (lo, hi) = self
            .band()
            .ok_or_else(|| Error::Domain(format!("{:?} has no band boundary", self.family)))?;
        Ok(self.mean_curvature_at_boundary(lo, hi, side))
    }

    /// Outward mean curvature of the leaf `ρ = lo` or `ρ = hi` of the band `[lo, hi]`.
    pub fn mean_curvature_at_boundary(&self, lo: f64, hi: f64, side: Side) -> f64 {
        match side {
            Side::Minus => -self.mean_curv(lo),
            Side::Plus => self.mean_curv(hi),
        }
    }
}

/// Conformal factor jets `(α, β)` with respect to `r` for isotropic Schwarzschild:
/// `g = α² dr² + β² g_{S^{n-1}}`, `α = (1 + m r^{2-n}/2)^{2/(n-2)}`, `β = r α`.
fn af_jets(mass: f64, n: usize, r: f64) -> (Jet, Jet) {
    let nf = n as f64;
    let e = 2.0 / (nf - 2.0);
    let u = 1.0 + 0.5 * mass * r.powf(2.0 - nf);
    let u1 = 0.5 * mass * (2.0 - nf) * r.powf(1.0 - nf);
    let u2 = 0.5 * mass * (2.0 - nf) * (1.0 - nf) * r.powf(-nf);
    let a = u.powf(e);
    let a1 = e * u.powf(e - 1.0) * u1;
    let a2 = e * ((e - 1.0) * u.powf(e - 2.0) * u1 * u1 + u.powf(e - 1.0) * u2);
    (Jet::new(a, a1, a2), Jet::new(r * a, a + r * a1, 2.0 * a1 + r * a2))
}

pub fn pmap(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
