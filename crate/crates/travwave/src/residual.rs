//! Residual checks of a profile against the profile ODE and its weak form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::profile::{WaveProfile, End};

/// Polynomial bump `(1 - t^2)^4` with `t = (xi - center)/half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::InvalidParam("bump needs a finite center and positive width".into()));
        }
        Ok(Bump { center, half_width })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// `(value, first derivative, second derivative)` at `xi`.
    pub fn eval(&self, xi: f64) -> (f64, f64, f64) {
        let w = self.half_width;
        let t = (xi - self.center) / w;
        if t.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let q = 1.0 - t * t;
        (
            q.powi(4),
            -8.0 * t * q.powi(3) / w,
            8.0 * q * q * (7.0 * t * t - 1.0) / (w * w),
        )
    }
}

/// Outcome of the weak-form check with its refinement-based tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakFormCheck {
    pub residual: f64,
    /// Residual on the grid with every other sample removed.
    pub coarse_residual: f64,
    /// Integral of the absolute integrand, used as a scale.
    pub abs_integral: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn integrand(pr: &Params, u: f64, du: f64, b: (f64, f64, f64)) -> f64 {
    let (t, dt, ddt) = b;
    if t == 0.0 && dt == 0.0 && ddt == 0.0 {
        return 0.0;
    }
    u * dt * (pr.c - du) + (pr.gamma + 1.0) * du * du * t - u * u * (ddt + pr.k * t)
        + pr.delta_f() * pr.p * u * t
}

/// Composite Simpson rule on a nonuniform grid. Pairs of intervals whose
/// length ratio lies outside `[0.2, 5]` fall back to the trapezoid rule;
/// an odd last interval uses the three-point formula on its own span.
pub fn simpson_nonuniform(x: &[f64], f: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    }
    let mut s = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let r = h1 / h0;
        if (0.2..=5.0).contains(&r) {
            s += (h0 + h1) / 6.0
                * ((2.0 - r) * f[i] + (h0 + h1) * (h0 + h1) / (h0 * h1) * f[i + 1] + (2.0 - 1.0 / r) * f[i + 2]);
        } else {
            s += 0.5 * h0 * (f[i] + f[i + 1]) + 0.5 * h1 * (f[i + 1] + f[i + 2]);
        }
        i += 2;
    }
    if i + 1 < n {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let r = h1 / h0;
        if (0.2..=5.0).contains(&r) {
            s += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[i - 1]
                + h1 * (3.0 * h0 + h1) / (6.0 * h0) * f[i]
                + h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1)) * f[i + 1];
        } else {
            s += 0.5 * h1 * (f[i] + f[i + 1]);
        }
    }
    s
}

/// Integral over the gap between a finite end and the nearest sample,
/// assuming the integrand behaves like a power of the distance there.
fn end_gap(d0: f64, d1: f64, f0: f64, f1: f64) -> f64 {
    if d0 <= 0.0 || f0 == 0.0 {
        return 0.0;
    }
    let mut beta = 0.0;
    if f1 != 0.0 && f0.signum() == f1.signum() && d1 > d0 {
        beta = (f1 / f0).abs().ln() / (d1 / d0).ln();
    }
    if beta <= -1.0 + 1e-6 {
        beta = 0.0;
    }
    f0 * d0 / (beta + 1.0)
}

fn check_support(profile: &WaveProfile, bump: &Bump) -> Result<()> {
    let (a, b) = bump.support();
    let n = profile.len();
    let finite = |e: End| profile.end(e).map(|i| i.is_finite()).unwrap_or(false);
    if a < profile.xi[0] && !finite(End::Left) {
        return Err(Error::Domain("test function support extends past the left end of the grid".into()));
    }
    if b > profile.xi[n - 1] && !finite(End::Right) {
        return Err(Error::Domain("test function support extends past the right end of the grid".into()));
    }
    Ok(())
}

/// Samples closer to a finite end than this, relative to `max(1, |xi_end|)`,
/// are not resolved in `xi`; the power-law gap covers them instead.
const END_RESOLUTION: f64 = 1e-12;

fn residual_parts(profile: &WaveProfile, bump: &Bump, pr: &Params, stride: usize) -> (f64, f64) {
    let n = profile.len();
    let (a, b) = bump.support();
    let mut lo = profile.xi.partition_point(|&x| x <= a).saturating_sub(1);
    let mut hi = profile.xi.partition_point(|&x| x < b).min(n - 1);
    let cut = |e: End| profile.end(e).map_or(0.0, |i| END_RESOLUTION * i.xi.abs().max(1.0));
    let dl = profile.distance_to(End::Left).filter(|_| lo == 0);
    let dr = profile.distance_to(End::Right).filter(|_| hi == n - 1);
    if let Some(d) = &dl {
        let c = cut(End::Left);
        while lo + 2 < hi && d[lo] < c {
            lo += 1;
        }
    }
    if let Some(d) = &dr {
        let c = cut(End::Right);
        while hi > lo + 2 && d[hi] < c {
            hi -= 1;
        }
    }
    let mut idx: Vec<usize> = (lo..=hi).step_by(stride).collect();
    if *idx.last().unwrap() != hi {
        idx.push(hi);
    }
    let f = |i: usize| integrand(pr, profile.value[i], profile.deriv[i], bump.eval(profile.xi[i]));
    let fs: Vec<f64> = idx.iter().map(|&i| f(i)).collect();
    let abs: Vec<f64> = fs.iter().map(|f| f.abs()).collect();
    // abscissae measured from the nearer finite end keep their precision there
    let half = idx.len() / 2;
    let left: Vec<f64> = idx[..=half].iter().map(|&i| dl.as_ref().map_or(profile.xi[i], |d| d[i])).collect();
    let right: Vec<f64> = idx[half..].iter().map(|&i| dr.as_ref().map_or(profile.xi[i], |d| -d[i])).collect();
    let mut total = simpson_nonuniform(&left, &fs[..=half]) + simpson_nonuniform(&right, &fs[half..]);
    let mut total_abs = simpson_nonuniform(&left, &abs[..=half]) + simpson_nonuniform(&right, &abs[half..]);
    if idx.len() >= 2 {
        if let Some(d) = &dl {
            let g = end_gap(d[idx[0]], d[idx[1]], fs[0], fs[1]);
            total += g;
            total_abs += g.abs();
        }
        if let Some(d) = &dr {
            let m = idx.len();
            let g = end_gap(d[idx[m - 1]], d[idx[m - 2]], fs[m - 1], fs[m - 2]);
            total += g;
            total_abs += g.abs();
        }
    }
    (total, total_abs)
}

/// Quadrature value of the weak-form functional for `profile` against `bump`.
/// The profile is extended by zero beyond finite ends.
pub fn weak_form_residual(profile: &WaveProfile, bump: &Bump, params: &Params) -> Result<f64> {
    if profile.len() < 3 {
        return Err(Error::InsufficientData("weak form needs at least 3 samples".into()));
    }
    check_support(profile, bump)?;
    Ok(residual_parts(profile, bump, params, 1).0)
}

/// Residual together with the tolerance `10 |R_h - R_2h| + 1e-8 * I_abs`.
pub fn weak_form_check(profile: &WaveProfile, bump: &Bump, params: &Params) -> Result<WeakFormCheck> {
    if profile.len() < 5 {
        return Err(Error::InsufficientData("weak form check needs at least 5 samples".into()));
    }
    check_support(profile, bump)?;
    let (r, abs) = residual_parts(profile, bump, params, 1);
    let (r2, _) = residual_parts(profile, bump, params, 2);
    let tolerance = 10.0 * (r - r2).abs() + 1e-8 * abs;
    Ok(WeakFormCheck {
        residual: r,
        coarse_residual: r2,
        abs_integral: abs,
        tolerance,
        pass: r.abs() <= tolerance,
    })
}

/// Maximum over interior samples of `|u u'' + c u' - gamma u'^2 + k u^2 - delta p u|`
/// with `u'` taken from the stored derivative and `u''` from a three-point
/// difference of it. Two samples next to each end are skipped.
pub fn ode_residual(profile: &WaveProfile, params: &Params) -> Result<f64> {
    let n = profile.len();
    if n < 9 {
        return Err(Error::InsufficientData("ode residual needs at least 5 interior samples".into()));
    }
    let pr = params;
    let (x, u, du) = (&profile.xi, &profile.value, &profile.deriv);
    let mut worst = 0.0f64;
    let mut used = 0;
    for i in 2..n - 2 {
        if u[i] <= 0.0 {
            continue;
        }
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        let ddu = (-h1 / (h0 * (h0 + h1))) * du[i - 1] + ((h1 - h0) / (h0 * h1)) * du[i]
            + (h0 / (h1 * (h0 + h1))) * du[i + 1];
        let r = u[i] * ddu + pr.c * du[i] - pr.gamma * du[i] * du[i] + pr.k * u[i] * u[i]
            - pr.delta_f() * pr.p * u[i];
        worst = worst.max(r.abs());
        used += 1;
    }
    if used < 5 {
        return Err(Error::InsufficientData("fewer than 5 interior samples with u > 0".into()));
    }
    Ok(worst)
}
