//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Only interior nodes are sampled, so integrands with a pole sitting exactly on an
//! endpoint can be integrated as long as the singularity is integrable.

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: returns (estimate, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = panel(f, a, b);
    (v, e)
}

/// Kronrod panel that also returns the Kronrod estimate of `∫|f|`.
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (fl, fr) = (f(c - x), f(c + x));
        resk += WGK[j] * (fl + fr);
        resabs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (fl + fr);
        }
    }
    (resk * h, ((resk - resg) * h).abs(), resabs * h.abs())
}

/// Globally adaptive integration to `max(abs_tol, rel_tol·|I|)`. The target never
/// drops below the roundoff floor `100 ε ∫|f|`, which a cancelling integrand hits first.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let (v, _, converged) = integrate_best(f, a, b, abs_tol, rel_tol)?;
    if converged {
        Ok(v)
    } else {
        Err(Error::NoConvergence(format!("quadrature on [{a}, {b}] did not reach tolerance")))
    }
}

/// As [`integrate`], but returns `(estimate, error estimate, converged)` instead of
/// failing when the panel budget runs out.
pub fn integrate_best<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64, bool)> {
    if a == b {
        return Ok((0.0, 0.0, true));
    }
    let (sign, a, b) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let (v, e, l1) = panel(&f, a, b);
    let mut panels = vec![(a, b, v, e, l1)];
    let mut total = v;
    let mut err = e;
    let mut mass = l1;
    let target = |total: f64, mass: f64| abs_tol.max(rel_tol * total.abs()).max(100.0 * f64::EPSILON * mass);
    for _ in 0..2000 {
        if !total.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        if err <= target(total, mass) {
            return Ok((sign * total, err, true));
        }
        let (k, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, pv, pe, pm) = panels.swap_remove(k);
        let m = 0.5 * (pa + pb);
        let l = panel(&f, pa, m);
        let r = panel(&f, m, pb);
        total += l.0 + r.0 - pv;
        err += l.1 + r.1 - pe;
        mass += l.2 + r.2 - pm;
        panels.push((pa, m, l.0, l.1, l.2));
        panels.push((m, pb, r.0, r.1, r.2));
    }
    // recompute sums to shed accumulated rounding before judging
    total = panels.iter().map(|p| p.2).sum();
    err = panels.iter().map(|p| p.3).sum();
    mass = panels.iter().map(|p| p.4).sum();
    if !total.is_finite() {
        return Err(Error::Domain("integrand is not finite".into()));
    }
    Ok((sign * total, err, err <= 10.0 * target(total, mass)))
}

/// Composite trapezoid rule on samples at uniform spacing `h`.
pub fn trapezoid(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (y[0] + y[n - 1]) + y[1..n - 1].iter().sum::<f64>()),
    }
}

/// Composite Simpson rule on samples at uniform spacing `h`; an odd number of cells
/// closes with a trapezoid on the last cell.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    if n < 3 {
        return trapezoid(y, h);
    }
    let cells = n - 1;
    let even = cells - cells % 2;
    let mut s = y[0] + y[even];
    for (i, v) in y.iter().enumerate().take(even).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if even < cells {
        total += 0.5 * h * (y[cells - 1] + y[cells]);
    }
    total
}
