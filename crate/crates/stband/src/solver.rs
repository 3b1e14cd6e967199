//! Dirichlet problems for `Δu + n f |∇u| = 0` on symmetric bands, the radial Green's
//! function on asymptotically flat ends, and the boundary-gradient barrier and
//! interior gradient-estimate checks.

use serde::{Deserialize, Serialize};

use crate::geometry::{Grid1D, MetricSpec, Warping};
use crate::linalg::{conjugate_gradient, solve_tridiagonal, Banded, Csr};
use crate::potentials::Potential;
use crate::quad::{gk15, integrate, integrate_best};
use crate::{Error, Result};

/// A band `[ρ₋, ρ₊]` of a symmetric metric with Dirichlet data `u(ρ∓) = c∓`.
///
/// The potential is evaluated at `ρ − tau_origin`; the origin defaults to `ρ₋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandProblem {
    pub metric: MetricSpec,
    pub interval: (f64, f64),
    pub n: usize,
    pub c_minus: f64,
    pub c_plus: f64,
    pub potential: Potential,
    pub fiber_euler_char: i32,
    #[serde(default)]
    pub tau_origin: Option<f64>,
}

impl BandProblem {
    pub fn new(metric: MetricSpec, interval: (f64, f64), potential: Potential, c_minus: f64, c_plus: f64) -> Result<Self> {
        let p = BandProblem {
            n: metric.dimension,
            fiber_euler_char: metric.fiber_euler_char(),
            metric,
            interval,
            c_minus,
            c_plus,
            potential,
            tau_origin: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.tau_origin = Some(origin);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        let (dlo, dhi) = self.metric.domain();
        if !(lo < hi && lo >= dlo && hi <= dhi) {
            return Err(Error::Param(format!("interval [{lo}, {hi}] is not inside the profile domain [{dlo}, {dhi}]")));
        }
        if !(self.c_minus < self.c_plus) {
            return Err(Error::Param("boundary values need c_minus < c_plus".into()));
        }
        if self.n != self.metric.dimension {
            return Err(Error::Param(format!("dimension {} differs from the metric's {}", self.n, self.metric.dimension)));
        }
        if self.metric.arclength_factor(0.5 * (lo + hi)) != 1.0 {
            return Err(Error::Param("band problems need an arclength profile coordinate".into()));
        }
        Ok(())
    }

    pub fn origin(&self) -> f64 {
        self.tau_origin.unwrap_or(self.interval.0)
    }

    /// Potential value and derivative at profile coordinate `rho`.
    pub fn f(&self, rho: f64) -> (f64, f64) {
        self.potential.eval(rho - self.origin())
    }

    /// `H_ρ + n f`, the logarithmic decay rate of `u'` along the profile.
    pub fn drift(&self, rho: f64) -> f64 {
        self.metric.mean_curv(rho) + self.n as f64 * self.f(rho).0
    }

    fn check_regular(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        let o = self.origin();
        if let Some(p) = self.potential.poles_in(lo - o, hi - o).into_iter().find(|t| *t > lo - o && *t < hi - o) {
            return Err(Error::Domain(format!("potential is singular inside the band at ρ = {}", p + o)));
        }
        let m = 4000;
        for i in 1..m {
            let rho = lo + (hi - lo) * i as f64 / m as f64;
            self.metric.curvature_at(rho)?;
            if !self.drift(rho).is_finite() {
                return Err(Error::Domain(format!("H_ρ + n f is not finite at ρ = {rho}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    FixedPointGrid,
}

/// A solution restricted to the profile axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveProfile {
    pub grid: Grid1D,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `u'' + (H_ρ + n f) u'` at interior nodes from central differences of `du`; zero at the ends.
    pub residual: Vec<f64>,
    pub residual_sup: f64,
    pub method: Method,
    pub iterations: usize,
}

impl SolveProfile {
    /// CSV with columns `rho,u,du,residual`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,u,du,residual\n");
        for i in 0..self.u.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.grid.node(i),
                self.u[i],
                self.du[i],
                self.residual[i]
            ));
        }
        s
    }

    /// Second derivative of `u` at the nodes, second order everywhere. Closed-form
    /// profiles difference the exact `du`; grid profiles use second differences of `u`
    /// with four-point one-sided stencils at the ends.
    pub fn d2u(&self) -> Vec<f64> {
        let h = self.grid.h();
        let u = &self.u;
        let n = u.len();
        if self.method == Method::ClosedForm || n < 4 {
            return fd_derivative(&self.du, h);
        }
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        }
        d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h);
        d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / (h * h);
        d
    }
}

/// Second-order finite-difference derivative of nodal samples.
pub fn fd_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    d
}

/// Pointwise `u'' + (H_ρ + n f) u'` at interior nodes. With `du` the derivative is the
/// supplied one; otherwise both derivatives come from central differences of `u`.
fn residuals(problem: &BandProblem, grid: &Grid1D, u: &[f64], du: Option<&[f64]>) -> (Vec<f64>, f64) {
    let h = grid.h();
    let n = u.len();
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        let drift = problem.drift(grid.node(i));
        r[i] = match du {
            Some(d) => (d[i + 1] - d[i - 1]) / (2.0 * h) + drift * d[i],
            None => (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h) + drift * (u[i + 1] - u[i - 1]) / (2.0 * h),
        };
    }
    let sup = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (r, sup)
}

/// Asserts monotonicity, exact boundary values and the maximum principle.
pub fn check_profile(problem: &BandProblem, p: &SolveProfile) -> Result<()> {
    let n = p.u.len();
    if p.u[0] != problem.c_minus || p.u[n - 1] != problem.c_plus {
        return Err(Error::NoConvergence("boundary values not attained exactly".into()));
    }
    if let Some(i) = (0..n - 1).find(|&i| !(p.u[i + 1] > p.u[i])) {
        return Err(Error::NoConvergence(format!("profile not strictly increasing at node {i}")));
    }
    if p.u.iter().any(|&x| x < problem.c_minus || x > problem.c_plus) {
        return Err(Error::NoConvergence("maximum principle violated".into()));
    }
    Ok(())
}

/// Exact reduction: `u' = C exp(−∫(H_ρ + n f))`, integrated and rescaled to the
/// boundary values. Integrals are adaptive Gauss–Kronrod referenced to cell
/// midpoints, so an integrable singularity on the boundary leaf is tolerated.
pub fn solve_band_1d(problem: &BandProblem, n_cells: usize) -> Result<SolveProfile> {
    problem.validate()?;
    problem.check_regular()?;
    let (lo, hi) = problem.interval;
    let grid = Grid1D::new(lo, hi, n_cells)?;
    let g = |x: f64| problem.drift(x);
    let mids: Vec<f64> = (0..n_cells).map(|i| 0.5 * (grid.node(i) + grid.node(i + 1))).collect();
    // log u' at the cell midpoints, up to a constant
    let mut lmid = vec![0.0; n_cells];
    for i in 1..n_cells {
        lmid[i] = lmid[i - 1] - log_step(&g, mids[i - 1], mids[i])?;
    }
    let node_log = |i: usize| -> Result<f64> {
        let c = i.min(n_cells - 1);
        let v = log_step(&g, mids[c], grid.node(i))
            .map_err(|_| Error::Domain(format!("H_ρ + n f is not integrable up to ρ = {}", grid.node(i))))?;
        Ok(lmid[c] - v)
    };
    let lnode: Vec<f64> = (0..=n_cells).map(node_log).collect::<Result<_>>()?;
    let shift = lmid.iter().chain(&lnode).fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    // ∫ u' over each half cell, with the inner exponent integrated from the midpoint
    let mut cum = vec![0.0; n_cells + 1];
    for c in 0..n_cells {
        let m = mids[c];
        let v = |x: f64| {
            let inner = if (x - m).abs() < 1e-300 { 0.0 } else { gk15_adaptive(&g, m, x) };
            (lmid[c] - shift - inner).exp()
        };
        let left = outer(&v, grid.node(c), m)?;
        let right = outer(&v, m, grid.node(c + 1))?;
        cum[c + 1] = cum[c] + left + right;
    }
    let total = cum[n_cells];
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Domain("∫u' is not positive and finite".into()));
    }
    let span = problem.c_plus - problem.c_minus;
    let mut u: Vec<f64> = cum.iter().map(|c| problem.c_minus + span * c / total).collect();
    u[0] = problem.c_minus;
    u[n_cells] = problem.c_plus;
    let du: Vec<f64> = lnode.iter().map(|l| span / total * (l - shift).exp()).collect();
    for (i, d) in du.iter().enumerate().skip(1).take(n_cells - 1) {
        if !(*d > 0.0 && d.is_finite()) {
            return Err(Error::Domain(format!("u' = {d} is not positive at node {i}")));
        }
    }
    let (residual, residual_sup) = residuals(problem, &grid, &u, Some(&du));
    let p = SolveProfile { grid, u, du, residual, residual_sup, method: Method::ClosedForm, iterations: 0 };
    check_profile(problem, &p)?;
    Ok(p)
}

/// Increment of `log u'`, accepted at an absolute error of 1e-10 when the drift noise
/// keeps the adaptive rule from reaching 1e-15.
fn log_step<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> Result<f64> {
    let (val, err, converged) = integrate_best(g, a, b, 1e-15, 1e-14)?;
    if converged || err <= 1e-10 {
        Ok(val)
    } else {
        Err(Error::NoConvergence(format!("∫(H_ρ + n f) on [{a}, {b}] has error estimate {err:e}")))
    }
}

/// Half-cell integral of `u'`. Next to a closing end the drift is a difference of
/// two large cotangents evaluated at a coordinate far from the pole, so its noise
/// floor sits well above 1e-15; estimates within 1e-8 relative are accepted and the
/// residual gate judges the profile.
fn outer<F: Fn(f64) -> f64>(v: &F, a: f64, b: f64) -> Result<f64> {
    let (val, err, converged) = integrate_best(v, a, b, 1e-15, 1e-14)?;
    if converged || err <= 1e-8 * val.abs() {
        Ok(val)
    } else {
        Err(Error::NoConvergence(format!("∫u' on [{a}, {b}] has error estimate {err:e}")))
    }
}

/// Adaptive integral used inside the outer quadrature. Short of tolerance it keeps
/// the best adaptive estimate: that happens next to a non-integrable end, where the
/// outer weight vanishes, or where cancelling poles leave only roundoff.
fn gk15_adaptive<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> f64 {
    match integrate_best(g, a, b, 1e-15, 1e-14) {
        Ok((v, _, _)) => v,
        Err(_) => gk15(g, a, b).0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub n_rho: usize,
    pub n_x: usize,
    pub n_y: usize,
}

impl GridDims {
    pub fn axial(n_rho: usize) -> Self {
        GridDims { n_rho, n_x: 1, n_y: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Initial {
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub delta_reg: f64,
    pub initial: Initial,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { tol: 1e-12, max_iter: 500, delta_reg: 1e-2, initial: Initial::Linear }
    }
}

/// Regularisation never drops below this when the potential has poles on the band.
const DELTA_FLOOR: f64 = 1e-8;

struct Stencil {
    n: usize,
    nx: usize,
    ny: usize,
    h: f64,
    hx: f64,
    hy: f64,
    /// fiber area density at nodes and at half nodes `i + 1/2`
    j_node: Vec<f64>,
    j_half: Vec<f64>,
    inv_phi2: Vec<f64>,
    inv_psi2: Vec<f64>,
    nf: Vec<f64>,
}

impl Stencil {
    fn new(problem: &BandProblem, dims: GridDims) -> Result<Self> {
        let (lo, hi) = problem.interval;
        let n = dims.n_rho;
        let h = (hi - lo) / n as f64;
        let node = |i: usize| lo + h * i as f64;
        let doubly = problem.metric.is_doubly_warped();
        if !doubly && (dims.n_x > 1 || dims.n_y > 1) {
            return Err(Error::Param("fiber directions are resolved only for torus fibers".into()));
        }
        let mut inv_phi2 = vec![0.0; n + 1];
        let mut inv_psi2 = vec![0.0; n + 1];
        for i in 1..n {
            if let Warping::Doubly { phi, psi } = problem.metric.warping(node(i)) {
                inv_phi2[i] = 1.0 / (phi.v * phi.v);
                inv_psi2[i] = 1.0 / (psi.v * psi.v);
            }
        }
        Ok(Stencil {
            n,
            nx: dims.n_x,
            ny: dims.n_y,
            h,
            hx: 2.0 * std::f64::consts::PI / dims.n_x as f64,
            hy: 2.0 * std::f64::consts::PI / dims.n_y as f64,
            j_node: (0..=n).map(|i| problem.metric.fiber_area(node(i))).collect(),
            j_half: (0..n).map(|i| problem.metric.fiber_area(node(i) + 0.5 * h)).collect(),
            inv_phi2,
            inv_psi2,
            nf: (0..=n).map(|i| problem.n as f64 * problem.f(node(i)).0).collect(),
        })
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + k) * self.nx + j
    }

    fn unknown(&self, i: usize, j: usize, k: usize) -> usize {
        self.idx(i - 1, j, k)
    }

    fn fiber_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Couplings of the volume-weighted operator `−J h² Δ` at an interior node:
    /// `(neighbour, weight)` with the diagonal returned separately.
    fn row(&self, i: usize, j: usize, k: usize) -> (f64, Vec<((usize, usize, usize), f64)>) {
        let mut out = Vec::with_capacity(6);
        let (a, b) = (self.j_half[i - 1], self.j_half[i]);
        let mut diag = a + b;
        out.push(((i - 1, j, k), -a));
        out.push(((i + 1, j, k), -b));
        let jh2 = self.j_node[i] * self.h * self.h;
        if self.nx > 1 {
            let c = jh2 * self.inv_phi2[i] / (self.hx * self.hx);
            diag += 2.0 * c;
            out.push(((i, (j + 1) % self.nx, k), -c));
            out.push(((i, (j + self.nx - 1) % self.nx, k), -c));
        }
        if self.ny > 1 {
            let c = jh2 * self.inv_psi2[i] / (self.hy * self.hy);
            diag += 2.0 * c;
            out.push(((i, j, (k + 1) % self.ny), -c));
            out.push(((i, j, (k + self.ny - 1) % self.ny), -c));
        }
        (diag, out)
    }

    fn grad_norm(&self, u: &[f64], i: usize, j: usize, k: usize) -> f64 {
        let ur = (u[self.idx(i + 1, j, k)] - u[self.idx(i - 1, j, k)]) / (2.0 * self.h);
        let mut g2 = ur * ur;
        if self.nx > 1 {
            let ux = (u[self.idx(i, (j + 1) % self.nx, k)] - u[self.idx(i, (j + self.nx - 1) % self.nx, k)]) / (2.0 * self.hx);
            g2 += ux * ux * self.inv_phi2[i];
        }
        if self.ny > 1 {
            let uy = (u[self.idx(i, j, (k + 1) % self.ny)] - u[self.idx(i, j, (k + self.ny - 1) % self.ny)]) / (2.0 * self.hy);
            g2 += uy * uy * self.inv_psi2[i];
        }
        g2
    }
}

enum LinearSolver {
    Tridiagonal { sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64> },
    Banded(Banded),
    Iterative(Csr),
}

/// Fixed-point iteration `Δu_{k+1} = −n f √(|∇u_k|² + δ²)` with the conservative
/// Laplace–Beltrami operator on a `ρ × x × y` grid (fibers periodic with period 2π).
/// δ halves after each converged level and is finally set to zero, or held at a
/// small floor when the potential has poles on the band.
pub fn solve_band_grid(problem: &BandProblem, dims: GridDims, opts: FixedPointOptions) -> Result<SolveProfile> {
    problem.validate()?;
    problem.check_regular()?;
    if !(opts.tol > 0.0 && opts.delta_reg >= 0.0) || dims.n_rho < 2 || dims.n_x == 0 || dims.n_y == 0 {
        return Err(Error::Param("need tol > 0, delta_reg ≥ 0, n_rho ≥ 2 and positive fiber counts".into()));
    }
    let st = Stencil::new(problem, dims)?;
    let (n, m) = (st.n, st.fiber_len());
    let n_unknown = (n - 1) * m;
    let (c0, c1) = (problem.c_minus, problem.c_plus);

    // boundary contributions enter the right-hand side; assemble the operator once
    let mut bnd = vec![0.0; n_unknown];
    let solver = if m == 1 {
        let (mut sub, mut diag, mut sup) = (vec![0.0; n - 1], vec![0.0; n - 1], vec![0.0; n - 1]);
        for i in 1..n {
            let (d, nb) = st.row(i, 0, 0);
            diag[i - 1] = d;
            for ((ii, _, _), w) in nb {
                match ii {
                    0 => bnd[i - 1] -= w * c0,
                    x if x == n => bnd[i - 1] -= w * c1,
                    x if x < i => sub[i - 1] = w,
                    _ => sup[i - 1] = w,
                }
            }
        }
        LinearSolver::Tridiagonal { sub, diag, sup }
    } else {
        let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_unknown];
        for i in 1..n {
            for k in 0..st.ny {
                for j in 0..st.nx {
                    let r = st.unknown(i, j, k);
                    let (d, nb) = st.row(i, j, k);
                    entries[r].push((r, d));
                    for ((ii, jj, kk), w) in nb {
                        if ii == 0 {
                            bnd[r] -= w * c0;
                        } else if ii == n {
                            bnd[r] -= w * c1;
                        } else {
                            entries[r].push((st.unknown(ii, jj, kk), w));
                        }
                    }
                }
            }
        }
        if st.nx == 1 || st.ny == 1 {
            let mut b = Banded::zeros(n_unknown, m);
            for (r, row) in entries.iter().enumerate() {
                for &(c, w) in row {
                    b.add(r, c, w);
                }
            }
            LinearSolver::Banded(b)
        } else {
            let mut csr = Csr { n: n_unknown, ..Default::default() };
            csr.row_ptr.push(0);
            for mut row in entries {
                row.sort_by_key(|e| e.0);
                // periodic wrap with two cells can list a neighbour twice
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for (c, w) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += w,
                        _ => merged.push((c, w)),
                    }
                }
                for (c, w) in merged {
                    csr.cols.push(c);
                    csr.vals.push(w);
                }
                csr.row_ptr.push(csr.cols.len());
            }
            LinearSolver::Iterative(csr)
        }
    };

    let total = (n + 1) * m;
    let mut u = vec![0.0; total];
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let v = match opts.initial {
            Initial::Linear => c0 + (c1 - c0) * s,
            Initial::Quadratic => c0 + (c1 - c0) * s * s,
        };
        for p in 0..m {
            u[i * m + p] = v;
        }
    }

    let floor = if problem.potential.lipschitz_const.is_none()
        || !problem.potential.poles_in(problem.interval.0 - problem.origin(), problem.interval.1 - problem.origin()).is_empty()
    {
        DELTA_FLOOR
    } else {
        0.0
    };
    let mut delta = opts.delta_reg.max(floor);
    let mut iterations = 0;
    let mut x_prev = vec![0.0; n_unknown];
    loop {
        let mut update = f64::INFINITY;
        while update > opts.tol {
            if iterations >= opts.max_iter {
                return Err(Error::NoConvergence(format!(
                    "fixed point not reached after {iterations} iterations (last update {update:e}, δ = {delta:e})"
                )));
            }
            iterations += 1;
            let mut rhs = bnd.clone();
            for i in 1..n {
                let w = st.j_node[i] * st.h * st.h * st.nf[i];
                for k in 0..st.ny {
                    for j in 0..st.nx {
                        let g = (st.grad_norm(&u, i, j, k) + delta * delta).sqrt();
                        rhs[st.unknown(i, j, k)] += w * g;
                    }
                }
            }
            let x = match &solver {
                LinearSolver::Tridiagonal { sub, diag, sup } => solve_tridiagonal(sub, diag, sup, &rhs)?,
                LinearSolver::Banded(b) => b.solve(&rhs)?,
                LinearSolver::Iterative(a) => conjugate_gradient(a, &rhs, &x_prev, 1e-10, 20 * n_unknown)?,
            };
            update = 0.0;
            for r in 0..n_unknown {
                update = update.max((x[r] - u[m + r]).abs());
                u[m + r] = x[r];
            }
            x_prev = x;
            if !update.is_finite() {
                return Err(Error::NoConvergence("fixed-point iterate is not finite".into()));
            }
        }
        if delta <= floor {
            break;
        }
        delta *= 0.5;
        if delta < DELTA_FLOOR {
            delta = floor;
        }
    }

    let grid = Grid1D::new(problem.interval.0, problem.interval.1, n)?;
    let mut axis: Vec<f64> = (0..=n).map(|i| u[st.idx(i, 0, 0)]).collect();
    axis[0] = c0;
    axis[n] = c1;
    let du = fd_derivative(&axis, st.h);
    let (residual, residual_sup) = residuals(problem, &grid, &axis, None);
    let p = SolveProfile { grid, u: axis, du, residual, residual_sup, method: Method::FixedPointGrid, iterations };
    check_profile(problem, &p)?;
    Ok(p)
}

/// Solves from linear and quadratic initial iterates and returns the sup-norm
/// difference of the two results.
pub fn uniqueness_probe(problem: &BandProblem, dims: GridDims, opts: FixedPointOptions) -> Result<f64> {
    let a = solve_band_grid(problem, dims, FixedPointOptions { initial: Initial::Linear, ..opts })?;
    let b = solve_band_grid(problem, dims, FixedPointOptions { initial: Initial::Quadratic, ..opts })?;
    Ok(a.u.iter().zip(&b.u).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// Radial Green's function of an asymptotically flat symmetric metric on
/// `[r_min, r_max]`, normalised so that `v ~ r^{2−n}` at infinity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AFProfile {
    pub n: usize,
    /// geometric nodes in the isotropic radius
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// `du/dr` and `d²u/dr²`
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
    /// `∫_{r_max}^∞ α β^{1−n} dr`
    pub tail: f64,
    /// `|u(r_max)/r_max − 1|`
    pub asymptote_error: f64,
}

impl AFProfile {
    /// The profile for the Green's function multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        let e = 1.0 / (2.0 - self.n as f64);
        let s = factor.powf(e);
        let mut p = self.clone();
        p.v.iter_mut().for_each(|v| *v *= factor);
        p.u.iter_mut().for_each(|u| *u *= s);
        p.du.iter_mut().for_each(|d| *d *= s);
        p.d2u.iter_mut().for_each(|d| *d *= s);
        p.asymptote_error = (p.u[p.u.len() - 1] / p.r[p.r.len() - 1] - 1.0).abs();
        p
    }

    /// Restores the `v ~ r^{2−n}` normalisation using the stored tail integral.
    pub fn normalized(&self) -> Self {
        let last = self.v.len() - 1;
        let want = (self.n as f64 - 2.0) * self.tail;
        self.rescaled(want / self.v[last])
    }
}

pub fn solve_green_af(metric: &MetricSpec, r_range: (f64, f64), n_cells: usize) -> Result<AFProfile> {
    let n = metric.dimension;
    if metric.family != crate::geometry::Family::AFSymmetric {
        return Err(Error::Param("Green's function solve needs an AFSymmetric metric".into()));
    }
    if n < 3 {
        return Err(Error::Param("Green's function normalisation needs n ≥ 3".into()));
    }
    let (r0, r1) = r_range;
    if !(r0 > 0.0 && r1 > r0 && n_cells >= 2) {
        return Err(Error::Param("need 0 < r_min < r_max and at least two cells".into()));
    }
    let nf = n as f64;
    // α β^{1−n} and its r-derivative from the warping jets (β' is per unit arclength)
    let kernel = |r: f64| -> (f64, f64) {
        let a = metric.arclength_factor(r);
        let Warping::Single { w, .. } = metric.warping(r) else { unreachable!() };
        let (b, db) = (w.v, w.d1 * a);
        let h = 1e-6 * r;
        let da = (metric.arclength_factor(r + h) - metric.arclength_factor(r - h)) / (2.0 * h);
        let k = a * b.powf(1.0 - nf);
        (k, da * b.powf(1.0 - nf) + a * (1.0 - nf) * b.powf(-nf) * db)
    };
    // tail via r = r1/s on (0, 1]
    let tail = integrate(|s: f64| kernel(r1 / s).0 * r1 / (s * s), 0.0, 1.0, 1e-16, 1e-14)?;
    if !(tail.is_finite() && tail > 0.0) {
        return Err(Error::Domain("metric does not decay to Euclidean at the outer end".into()));
    }
    let ratio = (r1 / r0).powf(1.0 / n_cells as f64);
    let r: Vec<f64> = (0..=n_cells).map(|i| if i == n_cells { r1 } else { r0 * ratio.powi(i as i32) }).collect();
    let mut acc = vec![0.0; n_cells + 1];
    acc[n_cells] = tail;
    for i in (0..n_cells).rev() {
        acc[i] = acc[i + 1] + integrate(|x| kernel(x).0, r[i], r[i + 1], 1e-16 * acc[i + 1].max(1.0), 1e-14)?;
    }
    let k = nf - 2.0;
    let e = 1.0 / (2.0 - nf);
    let v: Vec<f64> = acc.iter().map(|a| k * a).collect();
    let mut u = Vec::with_capacity(v.len());
    let mut du = Vec::with_capacity(v.len());
    let mut d2u = Vec::with_capacity(v.len());
    for (i, &vi) in v.iter().enumerate() {
        let (kr, dkr) = kernel(r[i]);
        let (v1, v2) = (-k * kr, -k * dkr);
        let ui = vi.powf(e);
        u.push(ui);
        du.push(e * ui / vi * v1);
        d2u.push(e * (e - 1.0) * ui / (vi * vi) * v1 * v1 + e * ui / vi * v2);
    }
    let asymptote_error = (u[n_cells] / r1 - 1.0).abs();
    Ok(AFProfile { n, r, v, u, du, d2u, tail, asymptote_error })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierSample {
    pub eps: f64,
    /// `ε < r₀/4`, assumed by the barrier argument
    pub precondition_ok: bool,
    pub grad_at_eps: f64,
    pub bound: f64,
    /// min over `[ε, r₀]` of `u_ε − ū_ε` in the orientation `u_ε(ε) = 1`
    pub barrier_gap: f64,
    pub ubar_at_eps: f64,
    pub ubar_at_r0: f64,
    /// min over `[ε, r₀]` of `Δū + n f |∇ū|`
    pub subsolution_min: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierReport {
    pub r0: f64,
    pub b: f64,
    /// `lim_{r→0} r f(r)` for the potential in the orientation `u(p) = 1`
    pub c_estimate: f64,
    pub r0_admissible: bool,
    pub samples: Vec<BarrierSample>,
    pub sup_grad: f64,
    pub holds: bool,
}

/// Boundary-gradient barrier near the pole `p` at `ρ = 0` of a closed symmetric
/// metric with antipodal pole at the end of its domain.
///
/// `potential` is given in this crate's orientation (`u` increasing away from `p`);
/// the barrier is applied to `−u`, which equals 1 on the small sphere about `p`.
pub fn barrier_check(metric: &MetricSpec, potential: &Potential, eps_list: &[f64], r0: f64, n_cells: usize) -> Result<BarrierReport> {
    let n = metric.dimension as f64;
    let (lo, hi) = metric.domain();
    if !metric.is_closed() || lo != 0.0 {
        return Err(Error::Param("barrier check needs a closed symmetric metric with a pole at ρ = 0".into()));
    }
    let probe = 1e-8;
    let c_estimate = -probe * potential.eval(probe).0;
    if c_estimate < (n - 1.0) / n - 1e-6 {
        return Err(Error::Hypothesis(format!("pole coefficient {c_estimate} below (n−1)/n = {}", (n - 1.0) / n)));
    }
    let b = 4.0 / r0;
    let mut samples = Vec::new();
    for &eps in eps_list {
        if !(eps > 0.0 && eps < r0) {
            return Err(Error::Param(format!("ε = {eps} must lie in (0, r0)")));
        }
        let problem = BandProblem::new(metric.clone(), (eps, hi - eps), potential.clone(), -1.0, 1.0)?.with_origin(0.0);
        let prof = solve_band_1d(&problem, n_cells)?;
        let a = 1.0 + b * eps - b * eps * eps;
        let ubar = |r: f64| a - b * r + b * r * r;
        let mut gap = f64::INFINITY;
        let mut sub = f64::INFINITY;
        for i in 0..prof.u.len() {
            let r = prof.grid.node(i);
            if r > r0 + 1e-12 {
                break;
            }
            gap = gap.min(-prof.u[i] - ubar(r));
            let d1 = -b + 2.0 * b * r;
            let f_app = -potential.eval(r).0;
            sub = sub.min(2.0 * b + metric.mean_curv(r) * d1 + n * f_app * d1.abs());
        }
        let grad = prof.du[0];
        samples.push(BarrierSample {
            eps,
            precondition_ok: eps < r0 / 4.0,
            grad_at_eps: grad,
            bound: b,
            barrier_gap: gap,
            ubar_at_eps: ubar(eps),
            ubar_at_r0: ubar(r0),
            subsolution_min: sub,
            holds: grad <= b && gap >= -1e-10,
        });
    }
    let sup_grad = samples.iter().fold(0.0f64, |m, s| m.max(s.grad_at_eps));
    let holds = samples.iter().all(|s| s.holds);
    Ok(BarrierReport { r0, b, c_estimate, r0_admissible: r0 < 0.25, samples, sup_grad, holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shift {
    /// `u + 1 + sup|u|`, used when `f ≥ 0`
    Up,
    /// `2 sup|u| + 2 − u`, used when `f ≤ 0`
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientEstimateReport {
    pub center: f64,
    pub rho_ball: f64,
    pub shift: Shift,
    pub f_sign_constant: bool,
    /// `Λ` with `Ric ≥ −Λ` on the ball
    pub lambda: f64,
    pub c0: f64,
    /// min over the ball of `(9/2) f² − 3|f'|`
    pub c0_hypothesis_min: f64,
    pub c0_hypothesis_holds: bool,
    pub c1: f64,
    pub f_max: f64,
    pub argmax_r: f64,
    /// `½F² − 2rF − 8r² − C₁(ρ²−r²) − (Λ+C₀)(ρ²−r²)²` at the argmax of `F`
    pub poly_at_argmax: f64,
    /// `|∇u| ≤ (4/3) ρ⁻² F_max u` on the half ball
    pub half_ball_bound_holds: bool,
    pub holds: bool,
}

/// Interior gradient estimate on the ball of radius `rho_ball` about the band
/// midpoint. By symmetry `|∇u|/u` depends on the profile coordinate alone, so the
/// maximum of `F = (ρ² − r²)|∇u|/u` over the ball lies on the profile axis.
/// When `c0` is `None` the smallest admissible value is used.
pub fn gradient_estimate_check(profile: &SolveProfile, problem: &BandProblem, rho_ball: f64, c0: Option<f64>) -> Result<GradientEstimateReport> {
    let (lo, hi) = problem.interval;
    let center = 0.5 * (lo + hi);
    if !(rho_ball > 0.0 && rho_ball <= 0.5 * (hi - lo)) {
        return Err(Error::Param(format!("ball radius {rho_ball} must lie in (0, half the band width]")));
    }
    let inside: Vec<usize> = (0..profile.u.len()).filter(|&i| (profile.grid.node(i) - center).abs() < rho_ball).collect();
    let mut fmin = f64::INFINITY;
    let mut fmax = f64::NEG_INFINITY;
    let mut hyp = f64::INFINITY;
    let mut ric = f64::INFINITY;
    let sup_u = inside.iter().fold(0.0f64, |m, &i| m.max(profile.u[i].abs()));
    for &i in &inside {
        let x = profile.grid.node(i);
        let (f, df) = problem.f(x);
        fmin = fmin.min(f);
        fmax = fmax.max(f);
        hyp = hyp.min(4.5 * f * f - 3.0 * df.abs());
        ric = ric.min(problem.metric.curvature_at(x)?.ricci_eigs[0]);
    }
    let f_sign_constant = fmin >= 0.0 || fmax <= 0.0;
    let shift = if fmin >= 0.0 || !f_sign_constant { Shift::Up } else { Shift::Down };
    let lambda = (-ric).max(0.0);
    let c0_used = c0.unwrap_or((-hyp).max(0.0));
    let c1 = 6.0 + 4.0 * rho_ball * (lambda / 2.0).sqrt();
    let rr = rho_ball * rho_ball;
    let shifted = |i: usize| match shift {
        Shift::Up => profile.u[i] + 1.0 + sup_u,
        Shift::Down => 2.0 * sup_u + 2.0 - profile.u[i],
    };
    let mut best = (0.0f64, 0.0f64);
    for &i in &inside {
        let w = shifted(i);
        if !(w > 0.0) {
            return Err(Error::Domain("shifted solution is not positive".into()));
        }
        let r = (profile.grid.node(i) - center).abs();
        let big_f = (rr - r * r) * profile.du[i].abs() / w;
        if big_f > best.0 {
            best = (big_f, r);
        }
    }
    let (fx, r) = best;
    let d = rr - r * r;
    let poly = 0.5 * fx * fx - 2.0 * r * fx - 8.0 * r * r - c1 * d - (lambda + c0_used) * d * d;
    let half_ball_bound_holds = inside.iter().all(|&i| {
        let r = (profile.grid.node(i) - center).abs();
        r > 0.5 * rho_ball || profile.du[i].abs() <= 4.0 / (3.0 * rr) * fx * shifted(i) * (1.0 + 1e-12)
    });
    let scale = 1.0 + c1 * rr + (lambda + c0_used) * rr * rr;
    Ok(GradientEstimateReport {
        center,
        rho_ball,
        shift,
        f_sign_constant,
        lambda,
        c0: c0_used,
        c0_hypothesis_min: hyp,
        c0_hypothesis_holds: hyp >= -c0_used - 1e-12,
        c1,
        f_max: fx,
        argmax_r: r,
        poly_at_argmax: poly,
        half_ball_bound_holds,
        holds: poly <= 1e-8 * scale && half_ball_bound_holds,
    })
}
