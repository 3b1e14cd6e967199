//! Both sides of the integral inequalities for spacetime harmonic functions,
//! evaluated on solved symmetric profiles with `dV = (fiber area) dρ`.
//!
//! Band inequalities are reported as `slack = boundary + topological − hessian − curvature`,
//! which is nonnegative up to discretisation. Derivatives of `u'` come from central
//! differences of the profile and integrals from the trapezoid rule, so slack on an
//! equality case shrinks like `h²`.

use serde::{Deserialize, Serialize};

use crate::geometry::{MetricSpec, Side, Warping};
use crate::potentials::Potential;
use crate::quad::trapezoid;
use crate::solver::{solve_band_1d, AFProfile, BandProblem, SolveProfile};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityKind {
    /// scalar-curvature inequality with the Euler-characteristic term (3 dimensions)
    Lemma23,
    /// Ricci inequality with `|∇u|^{−n/(n−1)}` weights (n ≥ 3)
    Lemma33,
    /// 2-Ricci inequality in coarea form (3 dimensions)
    Lemma71,
    /// weighted Hessian/Ricci identity for the Green's-function radius
    AFIdentity,
    /// `∫(6 − R)|∇u| ≥ ∫|∇²u + f|∇u| g|²/|∇u|` on a sphere-like warped metric
    LlarullQuant,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: IdentityKind,
    pub boundary_term: f64,
    pub topological_term: f64,
    pub bulk_hessian_term: f64,
    pub bulk_curvature_term: f64,
    pub slack: f64,
    pub h: f64,
    /// discretisation allowance `K h² (1 + max D²) · scale`, with `D = H_ρ + n f` the drift
    /// and `scale` one plus the term magnitudes; slack below `−allowance` falsifies
    pub allowance: f64,
    /// smallest sample of the Hessian integrand (nonnegative by construction)
    pub min_hessian_integrand: f64,
}

impl IdentityReport {
    fn band(
        identity: IdentityKind,
        boundary: f64,
        topological: f64,
        hessian: f64,
        curvature: f64,
        nodes: &Nodes,
        min_hess: f64,
        gross: f64,
    ) -> Self {
        let h = nodes.h;
        let scale = 1.0 + boundary.abs() + topological.abs() + hessian.abs() + curvature.abs() + gross;
        IdentityReport {
            identity,
            boundary_term: boundary,
            topological_term: topological,
            bulk_hessian_term: hessian,
            bulk_curvature_term: curvature,
            slack: boundary + topological - hessian - curvature,
            h,
            allowance: ALLOWANCE_K * h * h * nodes.stiffness * scale,
            min_hessian_integrand: min_hess,
        }
    }

    /// Slack rebuilt from the four stored terms.
    pub fn reconstructed_slack(&self) -> f64 {
        match self.identity {
            IdentityKind::AFIdentity => self.bulk_hessian_term + self.bulk_curvature_term - self.boundary_term,
            IdentityKind::LlarullQuant => self.boundary_term - self.bulk_hessian_term,
            _ => self.boundary_term + self.topological_term - self.bulk_hessian_term - self.bulk_curvature_term,
        }
    }

    pub fn falsified(&self) -> bool {
        self.slack < -self.allowance
    }
}

/// Allowance constant. Flat bands give zero error; measured `|slack| / (h² (1 + max D²) scale)`
/// stays below 1 on the equality families and the counterexample bands.
pub const ALLOWANCE_K: f64 = 10.0;

/// Re-checks the solved profile against the ODE `u'' + D u' = 0`, `D = H_ρ + n f`.
/// Node `i` passes when `|residual| ≤ 1e-6 + 10 h² (1 + D² + |D'| + |D|³) |u'|`; the
/// bracket bounds the third and fourth derivatives of `u` relative to `u'` through the
/// equation, so the gate admits only the truncation error of the central-difference re-check.
pub fn residual_check(profile: &SolveProfile, problem: &BandProblem) -> Result<()> {
    let h = profile.grid.h();
    let n = profile.u.len();
    for i in 1..n - 1 {
        let x = profile.grid.node(i);
        let d = problem.drift(x);
        let e = 1e-4 * h;
        let dd = (problem.drift(x + e) - problem.drift(x - e)) / (2.0 * e);
        let gate = 1e-6 + 10.0 * h * h * (1.0 + d * d + dd.abs() + d.abs().powi(3)) * profile.du[i].abs();
        if !(profile.residual[i].abs() <= gate) {
            return Err(Error::Domain(format!("profile residual {:.3e} at ρ = {x} exceeds the gate {gate:.3e}", profile.residual[i])));
        }
    }
    Ok(())
}

/// Profile quantities at the nodes shared by all band inequalities.
struct Nodes {
    rho: Vec<f64>,
    du: Vec<f64>,
    d2u: Vec<f64>,
    f: Vec<f64>,
    df: Vec<f64>,
    area: Vec<f64>,
    h: f64,
    /// `1 + max D²` over the nodes
    stiffness: f64,
}

fn nodes(profile: &SolveProfile, problem: &BandProblem) -> Result<Nodes> {
    if profile.grid.lo != problem.interval.0 || profile.grid.hi != problem.interval.1 {
        return Err(Error::Param("profile grid does not match the band".into()));
    }
    if let Some(d) = profile.du.iter().find(|d| !(d.abs() >= 1e-14)) {
        return Err(Error::Domain(format!("|∇u| = {d} too small to divide by")));
    }
    residual_check(profile, problem)?;
    let h = profile.grid.h();
    let rho = profile.grid.nodes();
    let bps: Vec<f64> = problem.potential.breakpoints().iter().map(|b| b + problem.origin()).collect();
    let mut f = Vec::with_capacity(rho.len());
    let mut df = Vec::with_capacity(rho.len());
    for &x in &rho {
        let (v, d) = problem.f(x);
        f.push(v);
        // at a splice node average the one-sided derivatives
        let on_break = bps.iter().any(|b| (x - b).abs() <= 1e-12 * b.abs().max(1.0));
        df.push(if on_break { 0.5 * (d + problem.potential.deriv_right(x - problem.origin())) } else { d });
    }
    Ok(Nodes {
        area: rho.iter().map(|&x| problem.metric.fiber_area(x)).collect(),
        d2u: profile.d2u(),
        du: profile.du.clone(),
        stiffness: 1.0 + rho.iter().map(|&x| problem.drift(x).powi(2)).fold(0.0, f64::max),
        rho,
        f,
        df,
        h,
    })
}

/// Logarithmic derivatives of the warping factors, one per fiber direction.
fn fiber_logs(metric: &MetricSpec, rho: f64) -> Vec<f64> {
    match metric.warping(rho) {
        Warping::Doubly { phi, psi } => vec![phi.d1 / phi.v, psi.d1 / psi.v],
        Warping::Single { w, n, .. } => vec![w.d1 / w.v; n - 1],
    }
}

/// `|∇̄²u|² = (u'' + f u')² + Σ_fibers ((log w)' u' + f u')²`.
fn spacetime_hessian_sq(metric: &MetricSpec, rho: f64, du: f64, d2u: f64, f: f64) -> f64 {
    let radial = d2u + f * du;
    radial * radial + fiber_logs(metric, rho).iter().map(|l| (l * du + f * du).powi(2)).sum::<f64>()
}

fn integrate(n: &Nodes, g: impl Fn(usize) -> f64) -> f64 {
    let y: Vec<f64> = (0..n.rho.len()).map(|i| g(i) * n.area[i]).collect();
    trapezoid(&y, n.h)
}

fn boundary_h(problem: &BandProblem) -> (f64, f64) {
    let (lo, hi) = problem.interval;
    (
        problem.metric.mean_curvature_at_boundary(lo, hi, Side::Minus),
        problem.metric.mean_curvature_at_boundary(lo, hi, Side::Plus),
    )
}

fn require_dim(problem: &BandProblem, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Param(format!("{what} does not apply in dimension {}", problem.n)))
    }
}

/// `∫∂₋ 2|∇u|(2f − H) − ∫∂₊ 2|∇u|(2f + H) + 4πχ(c₊ − c₋)
///  ≥ ∫ |∇̄²u|²/|∇u| + (R + 6f²)|∇u| − 4⟨∇f, ∇u⟩`.
pub fn eval_lemma23(profile: &SolveProfile, problem: &BandProblem) -> Result<IdentityReport> {
    require_dim(problem, problem.n == 3, "the scalar-curvature inequality")?;
    let n = nodes(profile, problem)?;
    let last = n.rho.len() - 1;
    let (hm, hp) = boundary_h(problem);
    let boundary = n.area[0] * 2.0 * n.du[0] * (2.0 * n.f[0] - hm) - n.area[last] * 2.0 * n.du[last] * (2.0 * n.f[last] + hp);
    let topological = 4.0 * std::f64::consts::PI * problem.fiber_euler_char as f64 * (problem.c_plus - problem.c_minus);
    let hess_i: Vec<f64> = (0..=last)
        .map(|i| spacetime_hessian_sq(&problem.metric, n.rho[i], n.du[i], n.d2u[i], n.f[i]) / n.du[i].abs())
        .collect();
    let hessian = integrate(&n, |i| hess_i[i]);
    let curvature = integrate(&n, |i| {
        let r = scalar_at(&problem.metric, n.rho[i]);
        (r + 6.0 * n.f[i] * n.f[i]) * n.du[i].abs() - 4.0 * n.df[i] * n.du[i]
    });
    let min_hess = hess_i.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(IdentityReport::band(IdentityKind::Lemma23, boundary, topological, hessian, curvature, &n, min_hess, 0.0))
}

/// `∫∂₋ |∇u|^{2−n/(n−1)}(n(n−2)f − H) − ∫∂₊ |∇u|^{2−n/(n−1)}(n(n−2)f + H)
///  ≥ ∫ |∇u|^{−n/(n−1)} (|∇̄²u|² − n/(n−1)|∇|∇u| + f∇u|²)
///  + ∫ |∇u|^{−n/(n−1)} (n²(n−2)²/(n−1) f²|∇u|² + Ric(∇u,∇u) − n(n−2)|∇u|⟨∇f,∇u⟩)`.
pub fn eval_lemma33(profile: &SolveProfile, problem: &BandProblem) -> Result<IdentityReport> {
    require_dim(problem, problem.n >= 3, "the Ricci inequality")?;
    let n = nodes(profile, problem)?;
    let last = n.rho.len() - 1;
    let nf = problem.n as f64;
    let e = nf / (nf - 1.0);
    let c = nf * (nf - 2.0);
    let (hm, hp) = boundary_h(problem);
    let boundary =
        n.area[0] * n.du[0].abs().powf(2.0 - e) * (c * n.f[0] - hm) - n.area[last] * n.du[last].abs().powf(2.0 - e) * (c * n.f[last] + hp);
    let (hess_i, gross_i): (Vec<f64>, Vec<f64>) = (0..=last)
        .map(|i| {
            let g = n.du[i].abs();
            let full = spacetime_hessian_sq(&problem.metric, n.rho[i], n.du[i], n.d2u[i], n.f[i]);
            let radial = (n.d2u[i] + n.f[i] * n.du[i]).powi(2);
            (g.powf(-e) * (full - e * radial), g.powf(-e) * (full + e * radial))
        })
        .unzip();
    let hessian = integrate(&n, |i| hess_i[i]);
    // the refined Kato combination cancels two large squares; their size sets the allowance
    let gross = integrate(&n, |i| gross_i[i]);
    let curvature = integrate(&n, |i| {
        let g = n.du[i].abs();
        let ric = ric_normal_at(&problem.metric, n.rho[i]);
        g.powf(-e) * (c * c / (nf - 1.0) * n.f[i] * n.f[i] * g * g + ric * g * g - c * g * n.df[i] * n.du[i])
    });
    let min_hess = hess_i.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(IdentityReport::band(IdentityKind::Lemma33, boundary, 0.0, hessian, curvature, &n, min_hess, gross))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoareaSample {
    pub rho: f64,
    /// `(∇_νν u + (3/2) f |∇u|)² / |∇u|²`; the tangential gradient term vanishes by symmetry
    pub hessian: f64,
    /// `R − Ric(ν, ν)`
    pub transverse_scalar: f64,
    /// `(9/4) f² − (3/2)⟨∇f, ν⟩`
    pub potential: f64,
}

/// Pointwise integrand of the 2-Ricci inequality at the profile nodes.
pub fn lemma71_integrand(profile: &SolveProfile, problem: &BandProblem) -> Result<Vec<CoareaSample>> {
    require_dim(problem, problem.n == 3, "the 2-Ricci inequality")?;
    let n = nodes(profile, problem)?;
    let sign = |x: f64| if x >= 0.0 { 1.0 } else { -1.0 };
    (0..n.rho.len())
        .map(|i| {
            let c = curvature_or_limit(&problem.metric, n.rho[i])?;
            let g = n.du[i].abs();
            Ok(CoareaSample {
                rho: n.rho[i],
                hessian: ((n.d2u[i] * sign(n.du[i]) + 1.5 * n.f[i] * g) / g).powi(2),
                transverse_scalar: c.0 - c.1,
                potential: 2.25 * n.f[i] * n.f[i] - 1.5 * n.df[i] * sign(n.du[i]),
            })
        })
        .collect()
}

/// `∫∂₋ |∇u|((3/2)f − H) − ∫∂₊ |∇u|((3/2)f + H) + 4πχ(c₊ − c₋)
///  ≥ ∫ [(∇_νν u + (3/2)f|∇u|)²/|∇u|² + R − Ric(ν,ν) + (9/4)f² − (3/2)⟨∇f,ν⟩] |∇u| dV`.
pub fn eval_lemma71(profile: &SolveProfile, problem: &BandProblem) -> Result<IdentityReport> {
    let samples = lemma71_integrand(profile, problem)?;
    let n = nodes(profile, problem)?;
    let last = n.rho.len() - 1;
    let (hm, hp) = boundary_h(problem);
    let boundary = n.area[0] * n.du[0].abs() * (1.5 * n.f[0] - hm) - n.area[last] * n.du[last].abs() * (1.5 * n.f[last] + hp);
    let topological = 4.0 * std::f64::consts::PI * problem.fiber_euler_char as f64 * (problem.c_plus - problem.c_minus);
    let hessian = integrate(&n, |i| samples[i].hessian * n.du[i].abs());
    let curvature = integrate(&n, |i| (samples[i].transverse_scalar + samples[i].potential) * n.du[i].abs());
    let min_hess = samples.iter().map(|s| s.hessian).fold(f64::INFINITY, f64::min);
    Ok(IdentityReport::band(IdentityKind::Lemma71, boundary, topological, hessian, curvature, &n, min_hess, 0.0))
}

/// Scalar curvature and `Ric(∂ρ, ∂ρ)`; at a closed-up end the interior limit is used.
fn curvature_or_limit(metric: &MetricSpec, rho: f64) -> Result<(f64, f64)> {
    match metric.curvature_at(rho) {
        Ok(c) => Ok((c.scalar, c.ric_normal)),
        Err(_) => {
            let (lo, hi) = metric.domain();
            let step = 1e-7 * (hi - lo);
            let x = if rho - lo < hi - rho { rho + step } else { rho - step };
            let c = metric.curvature_at(x)?;
            Ok((c.scalar, c.ric_normal))
        }
    }
}

fn scalar_at(metric: &MetricSpec, rho: f64) -> f64 {
    curvature_or_limit(metric, rho).map(|c| c.0).unwrap_or(f64::NAN)
}

fn ric_normal_at(metric: &MetricSpec, rho: f64) -> f64 {
    curvature_or_limit(metric, rho).map(|c| c.1).unwrap_or(f64::NAN)
}

/// `∫ u^{2−n} (|∇²u − |∇u|²u⁻¹g + u⁻¹∇u⊗∇u|² + Ric(∇u,∇u)) dV` split into its two
/// parts over `[r_min, r_max]`. On a complete manifold with one end and a pole the
/// sum vanishes; on a truncated region it equals `boundary_term`, the difference
/// of the fluxes `u^{2−n}|∇u|∂ₙ|∇u| − ((n−2)/2)u^{1−n}(|∇u|² − 1)∂ₙu` through the
/// outer and inner spheres. `slack` is `hessian + ricci − boundary`.
pub fn eval_af_identity(af: &AFProfile, metric: &MetricSpec) -> Result<IdentityReport> {
    let n = af.n;
    let nf = n as f64;
    if metric.dimension != n {
        return Err(Error::Param("profile and metric dimensions differ".into()));
    }
    let m = af.r.len();
    let mut hess = Vec::with_capacity(m);
    let mut ric = Vec::with_capacity(m);
    let mut flux = Vec::with_capacity(m);
    let mut min_h = f64::INFINITY;
    for i in 0..m {
        let r = af.r[i];
        let a = metric.arclength_factor(r);
        let h = 1e-6 * r;
        let da = (metric.arclength_factor(r + h) - metric.arclength_factor(r - h)) / (2.0 * h);
        let Warping::Single { w, .. } = metric.warping(r) else { unreachable!() };
        let u = af.u[i];
        // derivatives along the unit radial direction s
        let us = af.du[i] / a;
        let uss = (af.d2u[i] - af.du[i] * da / a) / (a * a);
        let tangential = us * w.d1 / w.v - us * us / u;
        let t2 = uss * uss + (nf - 1.0) * tangential * tangential;
        let ric_ss = -(nf - 1.0) * w.d2 / w.v;
        let area = metric.fiber_area(r);
        let weight = u.powf(2.0 - nf) * area * a;
        min_h = min_h.min(t2);
        hess.push(weight * t2);
        ric.push(weight * ric_ss * us * us);
        flux.push(area * (u.powf(2.0 - nf) * us * uss - 0.5 * (nf - 2.0) * u.powf(1.0 - nf) * (us * us - 1.0) * us));
    }
    // geometric nodes: integrate in log r with the trapezoid rule
    let hx = (af.r[m - 1] / af.r[0]).ln() / (m - 1) as f64;
    let scaled = |v: &[f64]| -> Vec<f64> { v.iter().zip(&af.r).map(|(y, r)| y * r).collect() };
    let hessian = trapezoid(&scaled(&hess), hx);
    let ricci = trapezoid(&scaled(&ric), hx);
    let boundary = flux[m - 1] - flux[0];
    let scale = 1.0 + hessian.abs() + ricci.abs() + boundary.abs();
    Ok(IdentityReport {
        identity: IdentityKind::AFIdentity,
        boundary_term: boundary,
        topological_term: 0.0,
        bulk_hessian_term: hessian,
        bulk_curvature_term: ricci,
        slack: hessian + ricci - boundary,
        h: hx,
        allowance: ALLOWANCE_K * hx * hx * scale,
        min_hessian_integrand: min_h,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LlarullScan {
    /// `w(θ) ≥ sin θ` on the grid (tolerance 1e-12)
    pub hypothesis_holds: bool,
    pub min_r: f64,
    pub argmin: f64,
    pub max_r: f64,
    pub argmax: f64,
    pub equator_r: f64,
    /// `w > sin θ` somewhere in the interior
    pub strict_somewhere: bool,
}

/// Scalar curvature across a warped metric `dθ² + w(θ)² g_{S²}` on `[0, π]`, sampled
/// on the `n` interior cell midpoints.
pub fn llarull_scan(metric: &MetricSpec, n: usize) -> Result<LlarullScan> {
    require_sine_profile(metric)?;
    let (lo, hi) = metric.domain();
    let mut out = LlarullScan {
        hypothesis_holds: true,
        min_r: f64::INFINITY,
        argmin: f64::NAN,
        max_r: f64::NEG_INFINITY,
        argmax: f64::NAN,
        equator_r: metric.curvature_at(0.5 * (lo + hi))?.scalar,
        strict_somewhere: false,
    };
    for i in 0..n {
        let th = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let Warping::Single { w, .. } = metric.warping(th) else { unreachable!() };
        let s = (th - lo).sin();
        if w.v < s - 1e-12 {
            out.hypothesis_holds = false;
        }
        if w.v > s + 1e-12 {
            out.strict_somewhere = true;
        }
        let r = metric.curvature_at(th)?.scalar;
        if r < out.min_r {
            out.min_r = r;
            out.argmin = th;
        }
        if r > out.max_r {
            out.max_r = r;
            out.argmax = th;
        }
    }
    Ok(out)
}

fn require_sine_profile(metric: &MetricSpec) -> Result<()> {
    let (lo, hi) = metric.domain();
    if metric.dimension != 3 || metric.is_doubly_warped() || !metric.is_closed() || (hi - lo - std::f64::consts::PI).abs() > 1e-12 {
        return Err(Error::Param("needs a closed 3-dimensional warped metric over [0, π]".into()));
    }
    Ok(())
}

/// Both sides of `∫(6 − R)|∇u| dV ≥ ∫|∇²u + f|∇u| g|²/|∇u| dV` on the band
/// `[ε₁, π − ε₁]`, solving with `potential` (the `Llarull` kind, read in `θ`).
/// `boundary_term` holds the left side and `bulk_hessian_term` the right side.
pub fn eval_llarull_quant(metric: &MetricSpec, potential: &Potential, eps_band: f64, n_cells: usize) -> Result<IdentityReport> {
    require_sine_profile(metric)?;
    let scan = llarull_scan(metric, 2000)?;
    if !scan.hypothesis_holds {
        return Err(Error::Hypothesis("w(θ) < sin θ somewhere: the identity map is not distance non-increasing".into()));
    }
    let (lo, hi) = metric.domain();
    let problem = BandProblem::new(metric.clone(), (lo + eps_band, hi - eps_band), potential.clone(), -1.0, 1.0)?.with_origin(lo);
    let profile = solve_band_1d(&problem, n_cells)?;
    let n = nodes(&profile, &problem)?;
    let lhs = integrate(&n, |i| (6.0 - scalar_at(metric, n.rho[i])) * n.du[i].abs());
    let hess_i: Vec<f64> = (0..n.rho.len())
        .map(|i| spacetime_hessian_sq(metric, n.rho[i], n.du[i], n.d2u[i], n.f[i]) / n.du[i].abs())
        .collect();
    let rhs = integrate(&n, |i| hess_i[i]);
    let scale = 1.0 + lhs.abs() + rhs.abs();
    Ok(IdentityReport {
        identity: IdentityKind::LlarullQuant,
        boundary_term: lhs,
        topological_term: 0.0,
        bulk_hessian_term: rhs,
        bulk_curvature_term: 0.0,
        slack: lhs - rhs,
        h: n.h,
        allowance: ALLOWANCE_K * n.h * n.h * n.stiffness * scale,
        min_hessian_integrand: hess_i.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Observed convergence orders `log₂(e_k / e_{k+1})` for successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0].abs() / w[1].abs()).log2()).collect()
}

/// Smallest `K` with `|slack| ≤ K h²` over a refinement sweep.
pub fn measured_k(reports: &[IdentityReport]) -> f64 {
    reports.iter().map(|r| r.slack.abs() / (r.h * r.h)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{named, PotentialKind};

    #[test]
    fn flat_torus_terms_vanish() {
        let p = BandProblem::new(MetricSpec::flat(1.0).unwrap(), (0.0, 1.0), named(PotentialKind::Zero, &[]).unwrap(), 0.0, 1.0).unwrap();
        let s = solve_band_1d(&p, 100).unwrap();
        for r in [eval_lemma23(&s, &p).unwrap(), eval_lemma33(&s, &p).unwrap(), eval_lemma71(&s, &p).unwrap()] {
            assert!(r.boundary_term.abs() < 1e-12 && r.bulk_hessian_term.abs() < 1e-12);
            assert!(r.bulk_curvature_term.abs() < 1e-12 && r.topological_term == 0.0);
            assert!(r.slack.abs() < 1e-12);
            assert_eq!(r.slack, r.reconstructed_slack());
        }
    }

    #[test]
    fn orders_of_exact_halving() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, vec![2.0, 2.0]);
    }
}
