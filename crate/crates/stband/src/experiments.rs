//! Theorem-level drivers on symmetric metrics: band widths, Bonnet–Myers sums,
//! waist averages, dice decompositions and the 2-Ricci counterexample audit.
//!
//! Every driver first checks the curvature hypothesis on a 10⁴-point grid with
//! tolerance 1e-9 and returns [`Error::Hypothesis`] with the violating sample.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::{MetricSpec, Side, Warping};
use crate::potentials::{named, PotentialKind};
use crate::quad::{integrate, simpson};
use crate::solver::{solve_band_1d, BandProblem};
use crate::{Error, Result};

pub const GATE_SAMPLES: usize = 10_000;
pub const GATE_TOL: f64 = 1e-9;
pub const SATURATION_TOL: f64 = 1e-8;

/// Floating-point floor of the warped curvature formulas at `ρ`: the fiber terms
/// `(κ − w'²)/w²` lose `O(ε_mach/w²)` to cancellation next to a closing end.
fn roundoff(metric: &MetricSpec, rho: f64) -> f64 {
    let inv = match metric.warping(rho) {
        Warping::Doubly { phi, psi } => 1.0 / (phi.v * phi.v) + 1.0 / (psi.v * psi.v),
        Warping::Single { w, n, .. } => (n as f64) / (w.v * w.v),
    };
    16.0 * f64::EPSILON * inv
}

/// Checks `g ≥ floor` on `GATE_SAMPLES` cell midpoints of `[lo, hi]` and returns the
/// sampled minimum. Violations beyond `GATE_TOL` plus the roundoff floor are errors.
fn gate(
    what: &str,
    metric: &MetricSpec,
    (lo, hi): (f64, f64),
    floor: f64,
    mut g: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let mut min = f64::INFINITY;
    for i in 0..GATE_SAMPLES {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / GATE_SAMPLES as f64;
        let v = g(x)?;
        if v < floor - GATE_TOL - roundoff(metric, x) {
            return Err(Error::Hypothesis(format!("{what} = {v} < {floor} at ρ = {x}")));
        }
        min = min.min(v);
    }
    Ok(min)
}

fn scalar(metric: &MetricSpec) -> impl Fn(f64) -> Result<f64> + '_ {
    |x| Ok(metric.curvature_at(x)?.scalar)
}

fn ricci_min(metric: &MetricSpec) -> impl Fn(f64) -> Result<f64> + '_ {
    |x| Ok(metric.curvature_at(x)?.ricci_eigs[0])
}

/// Profile arclength between two coordinates.
fn distance(metric: &MetricSpec, a: f64, b: f64) -> Result<f64> {
    integrate(|x| metric.arclength_factor(x), a.min(b), a.max(b), 1e-13, 1e-12)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WidthTheorem {
    /// `Ric ≥ (n−1)g`: width ≤ `arctan(H₋/(n−1)) + arctan(H₊/(n−1))`
    Ricci,
    /// `R ≥ 6`, torus fibers: width ≤ `(4/3) arctan(H₀/2)`
    Torus,
    /// 2-Ricci ≥ 4, torus fibers: width ≤ `arctan(H₀/2)`
    TwoRicci,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthVerdict {
    pub theorem: WidthTheorem,
    pub width: f64,
    pub bound: f64,
    pub saturated: bool,
    /// `width ≤ bound + 1e-8`
    pub holds: bool,
    /// sign-reversed outward mean curvatures of `∂₋` and `∂₊`
    pub h_minus: f64,
    pub h_plus: f64,
    pub h0: f64,
    /// smallest sampled value of the gated curvature quantity
    pub curvature_min: f64,
}

/// Width of the band `interval` against the bound of `theorem`.
pub fn width_bound(metric: &MetricSpec, interval: (f64, f64), theorem: WidthTheorem) -> Result<WidthVerdict> {
    let (lo, hi) = interval;
    let (dlo, dhi) = metric.domain();
    if !(lo < hi && lo >= dlo && hi <= dhi && hi.is_finite()) {
        return Err(Error::Param(format!("band [{lo}, {hi}] is not inside the domain [{dlo}, {dhi}]")));
    }
    let n = metric.dimension;
    let nf = n as f64;
    let curvature_min = match theorem {
        WidthTheorem::Ricci => gate("min Ricci eigenvalue", metric, interval, nf - 1.0, ricci_min(metric))?,
        WidthTheorem::Torus | WidthTheorem::TwoRicci => {
            if n != 3 {
                return Err(Error::Param("the torus and 2-Ricci bounds are 3-dimensional".into()));
            }
            if metric.fiber_euler_char() != 0 {
                return Err(Error::Hypothesis("sphere fibers carry a spherical class in H₂".into()));
            }
            if theorem == WidthTheorem::Torus {
                gate("scalar curvature", metric, interval, 6.0, scalar(metric))?
            } else {
                gate("2-Ricci curvature", metric, interval, 4.0, |x| Ok(metric.curvature_at(x)?.two_ricci))?
            }
        }
    };
    let h_minus = -metric.mean_curvature_at_boundary(lo, hi, Side::Minus);
    let h_plus = -metric.mean_curvature_at_boundary(lo, hi, Side::Plus);
    let h0 = h_minus.max(h_plus);
    let bound = match theorem {
        WidthTheorem::Ricci => (h_minus / (nf - 1.0)).atan() + (h_plus / (nf - 1.0)).atan(),
        WidthTheorem::Torus => 4.0 / 3.0 * (h0 / 2.0).atan(),
        WidthTheorem::TwoRicci => (h0 / 2.0).atan(),
    };
    let width = distance(metric, lo, hi)?;
    Ok(WidthVerdict {
        theorem,
        width,
        bound,
        saturated: (width - bound).abs() <= SATURATION_TOL,
        holds: width <= bound + SATURATION_TOL,
        h_minus,
        h_plus,
        h0,
        curvature_min,
    })
}

fn require_closed_single(metric: &MetricSpec, dim3: bool) -> Result<(f64, f64)> {
    if !metric.is_closed() || metric.is_doubly_warped() || (dim3 && metric.dimension != 3) {
        let what = if dim3 { "a closed 3-dimensional" } else { "a closed" };
        return Err(Error::Param(format!("needs {what} rotationally symmetric metric")));
    }
    Ok(metric.domain())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BonnetMyersReport {
    pub eps: f64,
    /// distance from the ε-sphere about `p` to the end at `p`
    pub d_minus: f64,
    /// distance from the ε-sphere about `p` to the end at `q`
    pub d_plus: f64,
    pub sum: f64,
    pub bound: f64,
    pub saturated: bool,
    pub holds: bool,
    pub ricci_min: f64,
}

/// `d(Σ, E₋) + d(Σ, E₊) ≤ π` for the punctured manifold `M \ {p, q}` with `p, q` the
/// poles and `Σ` the geodesic sphere of radius `eps` about `p`.
pub fn bonnet_myers(metric: &MetricSpec, eps: f64) -> Result<BonnetMyersReport> {
    let (lo, hi) = require_closed_single(metric, false)?;
    let total = distance(metric, lo, hi)?;
    if !(eps > 0.0 && eps < total) {
        return Err(Error::Param(format!("eps must lie in (0, {total})")));
    }
    let nf = metric.dimension as f64;
    let ricci_min = gate("min Ricci eigenvalue", metric, (lo, hi), nf - 1.0, ricci_min(metric))?;
    let d_minus = eps;
    let d_plus = total - eps;
    let sum = d_minus + d_plus;
    Ok(BonnetMyersReport {
        eps,
        d_minus,
        d_plus,
        sum,
        bound: PI,
        saturated: (sum - PI).abs() <= SATURATION_TOL,
        holds: sum <= PI + SATURATION_TOL,
        ricci_min,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaistReport {
    pub r0: f64,
    pub b2: u32,
    pub diam: f64,
    /// `4π/√(3R₀)`
    pub diam_threshold: f64,
    pub eps: f64,
    /// `∫|∇u| dV / (c₊ − c₋)`
    pub avg_area: f64,
    /// `16π(b₂ + 1)/R₀`
    pub bound: f64,
    pub holds: bool,
    pub scalar_min: f64,
    pub h: f64,
}

/// Average level-set area of the spacetime harmonic function between the poles,
/// solved on `[ε, L − ε]` with `u = ±1` and the three-piece waist potential.
pub fn waist_average(metric: &MetricSpec, r0: f64, b2: u32, eps: f64, n_cells: usize) -> Result<WaistReport> {
    let (lo, hi) = require_closed_single(metric, true)?;
    if !(r0 > 0.0) {
        return Err(Error::Param("R₀ must be positive".into()));
    }
    let scalar_min = gate("scalar curvature", metric, (lo, hi), r0, scalar(metric))?;
    let diam = distance(metric, lo, hi)?;
    let diam_threshold = 4.0 * PI / (3.0 * r0).sqrt();
    if diam < diam_threshold {
        return Err(Error::Hypothesis(format!("diam = {diam} < 4π/√(3R₀) = {diam_threshold}")));
    }
    if !(eps > 0.0 && eps < 0.25 * diam) {
        return Err(Error::Param("eps must lie in (0, diam/4)".into()));
    }
    let f = named(PotentialKind::Waist, &[("w", diam)])?;
    let problem = BandProblem::new(metric.clone(), (lo + eps, hi - eps), f, -1.0, 1.0)?.with_origin(lo);
    let profile = solve_band_1d(&problem, n_cells)?;
    let y: Vec<f64> = profile.grid.nodes().iter().zip(&profile.du).map(|(&x, d)| d.abs() * metric.fiber_area(x)).collect();
    let avg_area = simpson(&y, profile.grid.h()) / 2.0;
    let bound = 16.0 * PI * (b2 as f64 + 1.0) / r0;
    Ok(WaistReport {
        r0,
        b2,
        diam,
        diam_threshold,
        eps,
        avg_area,
        bound,
        holds: avg_area <= bound,
        scalar_min,
        h: profile.grid.h(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiceBand {
    /// centre `s` of the cutting sphere and the band `[s − w₀/2 − δ, s + w₀/2 + δ]`
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    /// `2f − H < 0` on `∂₋` and `2f + H > 0` on `∂₊`
    pub boundary_signs_ok: bool,
    /// `∫|∇u| dV / 2`, bounded by `16π/R₀` through the scalar-curvature inequality
    pub avg_area: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiceInterface {
    pub level: f64,
    pub rho: f64,
    pub area: f64,
    pub components: u32,
    pub normalized_area: f64,
    /// `|∇u|` on the level set; positive means a regular, hence `C²`, level
    pub grad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiceProperties {
    /// `I − 1 ≤ √(3R₀) diam / (4π)`
    pub count: bool,
    pub c2_boundaries: bool,
    /// consecutive regions meet only along their common interface and cover `M`
    pub neighbours_only: bool,
    /// every interface has normalized area `≤ 16π/R₀ + 1e-6`
    pub areas: bool,
    /// interface spacing `≤ 16π/√(3R₀)` and `d_H(V₁, ∂V₁) + d_H(V_I, ∂V_I) ≤ 32π/√(3R₀)`
    pub distances: bool,
}

impl DiceProperties {
    pub fn all(&self) -> bool {
        self.count && self.c2_boundaries && self.neighbours_only && self.areas && self.distances
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiceDecomposition {
    pub r0: f64,
    pub w0: f64,
    pub diam: f64,
    /// `[ρ_lo, ρ_hi]` of each region `V_i`
    pub regions: Vec<(f64, f64)>,
    pub interfaces: Vec<DiceInterface>,
    pub bands: Vec<DiceBand>,
    pub count: usize,
    pub count_bound: f64,
    pub area_bound: f64,
    pub spacing: Vec<f64>,
    pub end_hausdorff: f64,
    pub properties: DiceProperties,
}

/// Cuts a closed rotationally symmetric 3-manifold into bands along level sets of
/// spacetime harmonic functions. Starting from the pole at the lower end, each step
/// grows a `2w₀` neighbourhood of the previous cut, solves on the `w₀/2 + δ` band about
/// its boundary sphere with the dice potential and cuts at the least-area level.
/// Candidate levels sit at cell midpoints so that no cut lands on a grid node.
pub fn dice(metric: &MetricSpec, r0: f64, delta: f64, n_cells: usize) -> Result<DiceDecomposition> {
    let (lo, hi) = require_closed_single(metric, true)?;
    if !(r0 > 0.0) {
        return Err(Error::Param("R₀ must be positive".into()));
    }
    gate("scalar curvature", metric, (lo, hi), r0, scalar(metric))?;
    let w0 = 4.0 * PI / (3.0 * r0).sqrt();
    if !(delta > 0.0 && delta < 0.25 * w0) {
        return Err(Error::Param("delta must lie in (0, w₀/4)".into()));
    }
    let diam = distance(metric, lo, hi)?;
    let area_bound = 16.0 * PI / r0;
    // the potential spans the δ-widened band so that its poles sit on the band ends
    let f = named(PotentialKind::DiceBand, &[("w0", w0 + 2.0 * delta)])?;

    let mut cuts: Vec<f64> = Vec::new();
    let mut interfaces = Vec::new();
    let mut bands = Vec::new();
    loop {
        let start = cuts.last().copied().unwrap_or(lo);
        let center = start + 2.0 * w0;
        if center >= hi {
            break;
        }
        let (blo, bhi) = (center - 0.5 * w0 - delta, center + 0.5 * w0 + delta);
        if bhi >= hi {
            break;
        }
        let problem = BandProblem::new(metric.clone(), (blo, bhi), f.clone(), -1.0, 1.0)?.with_origin(center);
        let profile = solve_band_1d(&problem, n_cells)?;
        let (fm, fp) = (problem.f(blo).0, problem.f(bhi).0);
        let hm = metric.mean_curvature_at_boundary(blo, bhi, Side::Minus);
        let hp = metric.mean_curvature_at_boundary(blo, bhi, Side::Plus);
        let y: Vec<f64> = profile.grid.nodes().iter().zip(&profile.du).map(|(&x, d)| d.abs() * metric.fiber_area(x)).collect();
        bands.push(DiceBand {
            center,
            lo: blo,
            hi: bhi,
            boundary_signs_ok: 2.0 * fm - hm < 0.0 && 2.0 * fp + hp > 0.0,
            avg_area: simpson(&y, profile.grid.h()) / 2.0,
        });
        let mut best: Option<DiceInterface> = None;
        for j in 0..n_cells {
            let (a, b) = (profile.grid.node(j), profile.grid.node(j + 1));
            let rho = 0.5 * (a + b);
            let area = metric.fiber_area(rho);
            if best.as_ref().is_none_or(|c| area < c.area * (1.0 - 1e-12)) {
                best = Some(DiceInterface {
                    level: 0.5 * (profile.u[j] + profile.u[j + 1]),
                    rho,
                    area,
                    components: 1,
                    normalized_area: area,
                    grad: 0.5 * (profile.du[j] + profile.du[j + 1]),
                });
            }
        }
        let cut = best.ok_or_else(|| Error::Domain("empty dice band".into()))?;
        cuts.push(cut.rho);
        interfaces.push(cut);
    }

    let mut edges = vec![lo];
    edges.extend(&cuts);
    edges.push(hi);
    let regions: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let count = regions.len();
    let count_bound = (3.0 * r0).sqrt() * diam / (4.0 * PI);
    let spacing = cuts.windows(2).map(|w| distance(metric, w[0], w[1])).collect::<Result<Vec<_>>>()?;
    let end_hausdorff = match (cuts.first(), cuts.last()) {
        (Some(&a), Some(&b)) => distance(metric, lo, a)? + distance(metric, b, hi)?,
        _ => 0.0,
    };
    let properties = DiceProperties {
        count: (count - 1) as f64 <= count_bound + 1e-12,
        c2_boundaries: interfaces.iter().all(|c| c.grad > 0.0 && c.grad.is_finite()),
        neighbours_only: regions.iter().all(|r| r.0 < r.1)
            && regions.first().map(|r| r.0) == Some(lo)
            && regions.last().map(|r| r.1) == Some(hi)
            && regions.windows(2).all(|w| w[0].1 == w[1].0),
        areas: interfaces.iter().all(|c| c.normalized_area <= area_bound + 1e-6),
        distances: spacing.iter().all(|&d| d <= 4.0 * w0 + 1e-12) && end_hausdorff <= 8.0 * w0 + 1e-12,
    };
    Ok(DiceDecomposition {
        r0,
        w0,
        diam,
        regions,
        interfaces,
        bands,
        count,
        count_bound,
        area_bound,
        spacing,
        end_hausdorff,
        properties,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleAudit {
    pub delta: f64,
    pub two_ricci_min: f64,
    pub ricci_min: f64,
    pub ricci_min_at: f64,
    /// grid minimum of `Ric(∂t, ∂t) + Ric(∂x, ∂x) − 4`
    pub tx_certificate_min: f64,
    /// `Ric ≥ 2g` on the grid
    pub ricci_two: bool,
    /// distance from the central torus `{t = 0}` to each core circle
    pub torus_to_core: (f64, f64),
    pub core_to_core: f64,
    pub smooth_closure: bool,
    pub holds: bool,
}

/// Curvature and distance audit of the doubly warped 3-sphere family with 2-Ricci ≥ 4.
pub fn counterexample_audit(delta: f64) -> Result<CounterexampleAudit> {
    let m = MetricSpec::counterexample(delta)?;
    let (lo, hi) = m.domain();
    let mut two_ricci_min = f64::INFINITY;
    let (mut ricci_min, mut ricci_min_at) = (f64::INFINITY, f64::NAN);
    let mut tx_certificate_min = f64::INFINITY;
    for i in 0..GATE_SAMPLES {
        let t = lo + (hi - lo) * (i as f64 + 0.5) / GATE_SAMPLES as f64;
        let c = m.curvature_at(t)?;
        two_ricci_min = two_ricci_min.min(c.two_ricci);
        if c.ricci_eigs[0] < ricci_min {
            ricci_min = c.ricci_eigs[0];
            ricci_min_at = t;
        }
        let Warping::Doubly { phi, psi } = m.warping(t) else { unreachable!() };
        let ric_xx = -phi.d2 / phi.v - phi.d1 * psi.d1 / (phi.v * psi.v);
        tx_certificate_min = tx_certificate_min.min(c.ric_normal + ric_xx - 4.0);
    }
    let torus_to_core = (distance(&m, lo, 0.0)?, distance(&m, 0.0, hi)?);
    let core_to_core = distance(&m, lo, hi)?;
    let smooth_closure = {
        let (Warping::Doubly { psi: a, .. }, Warping::Doubly { phi: b, .. }) = (m.warping(lo), m.warping(hi)) else { unreachable!() };
        a.v.abs() < 1e-12 && b.v.abs() < 1e-12 && (a.d1.abs() - 1.0).abs() < 1e-9 && (b.d1.abs() - 1.0).abs() < 1e-9
    };
    Ok(CounterexampleAudit {
        delta,
        two_ricci_min,
        ricci_min,
        ricci_min_at,
        tx_certificate_min,
        ricci_two: ricci_min >= 2.0 - GATE_TOL,
        torus_to_core,
        core_to_core,
        smooth_closure,
        holds: two_ricci_min >= 4.0 - GATE_TOL && tx_certificate_min >= -GATE_TOL && smooth_closure,
    })
}

/// Named band problems covering every family with a closed-form 1D reduction.
pub fn problem_catalog() -> Result<Vec<(&'static str, BandProblem)>> {
    let q = PI / 4.0;
    let zero = || named(PotentialKind::Zero, &[]);
    let rb = MetricSpec::round_band(q, q, 3)?;
    let ricci = named(PotentialKind::RicciBand, &[("n", 3.0), ("h_minus", 2.0), ("h_plus", 2.0)])?;
    let torus = MetricSpec::torus_extremal(PI / 3.0)?;
    let torus_f = named(PotentialKind::TorusBand, &[("w0", PI / 3.0)])?;
    let gu = MetricSpec::g_upsilon(0.5, PI / 8.0)?;
    let two = named(PotentialKind::TwoRicciBand, &[("h0", 2.0)])?;
    let custom = MetricSpec::custom(0.0, 1.0, &[1.0, 1.2, 1.1, 1.3], &[0.8, 0.9, 1.0, 1.05])?;
    let b = (-PI / 6.0, PI / 6.0);
    Ok(vec![
        ("flat", BandProblem::new(MetricSpec::flat(1.0)?, (0.0, 1.0), zero()?, -1.0, 1.0)?),
        ("round-ricci", BandProblem::new(rb.clone(), (-q, q), ricci, -1.0, 1.0)?),
        ("round-zero", BandProblem::new(rb, (-q, q), zero()?, 0.0, 1.0)?),
        ("torus-band", BandProblem::new(torus.clone(), b, torus_f, 0.0, 1.0)?),
        ("torus-zero", BandProblem::new(torus, b, zero()?, 0.0, 1.0)?),
        ("upsilon-two-ricci", BandProblem::new(gu, (-PI / 8.0, PI / 8.0), two, 0.0, 1.0)?),
        ("counterexample", BandProblem::new(MetricSpec::counterexample(0.7)?, (-0.6, 0.6), zero()?, 0.0, 2.0)?),
        ("custom", BandProblem::new(custom, (0.0, 1.0), zero()?, 0.0, 1.0)?),
        ("sine", BandProblem::new(MetricSpec::sine_warped(1.2, 1.0, 0.0, 3)?, (0.3, 2.8), zero()?, 0.0, 1.0)?),
    ])
}
