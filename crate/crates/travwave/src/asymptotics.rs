//! Closed-form end asymptotics of the five wave types, least-squares fits of
//! their free constants on computed profiles and pass/fail verification.
//!
//! Power laws are tabulated for `u` and carried to `U = u^(1/p)` and
//! `V = s U^(1-p)` with `s = (1-p)^((1-p)/p)`: exponents scale by `1/p` and
//! then `1-p`, pinned coefficients transform the same way. Exponential and
//! logistic approaches are fitted in `u`-coordinates, converting `U` and `V`
//! profiles back first.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::profile::{End, EndKind, Variable, WaveProfile, WaveType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Form {
    /// `value ~ A d^alpha`, `d` the distance to the end (or `xi` itself at an infinite right end).
    Power,
    /// `derivative ~ sign B d^beta`.
    PowerDeriv,
    /// `value ~ limit + amplitude e^(rho xi)`, oscillating when E1 is a focus.
    ExpApproach,
    /// Logistic departure from the origin along its centre manifold.
    Logistic,
}

impl Form {
    pub fn name(&self) -> &'static str {
        match self {
            Form::Power => "POWER",
            Form::PowerDeriv => "POWER_DERIV",
            Form::ExpApproach => "EXP_APPROACH",
            Form::Logistic => "LOGISTIC",
        }
    }
}

/// Measured constants of a fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fitted {
    /// Exponent, rate or log-slope.
    pub exponent: f64,
    /// Amplitude `A`, `B`, the limit slope for `beta = 0`, or `M` for the logistic form.
    pub coefficient: f64,
    /// Angular frequency of the oscillation about the limit.
    pub frequency: Option<f64>,
    /// Translation `xi_bar` of a power law at an infinite end, `u ~ A (xi - xi_bar)^alpha`.
    pub shift: Option<f64>,
    /// Sign changes of `value - limit` inside the window.
    pub sign_changes: usize,
    pub samples: usize,
    /// Window in `xi`.
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticModel {
    pub wave_type: WaveType,
    pub variable: Variable,
    pub end: End,
    pub form: Form,
    /// Predicted exponent (`alpha`, `beta`), rate `rho` or log-slope.
    pub exponent: f64,
    /// Coefficient fixed by the parameters alone, when there is one.
    pub pinned: Option<f64>,
    /// Sign of the derivative for `POWER_DERIV`.
    pub sign: f64,
    /// Limit approached by `EXP_APPROACH`, in `u`-coordinates.
    pub limit: Option<f64>,
    /// Predicted angular frequency of the oscillation (`D < 0`).
    pub frequency: Option<f64>,
    pub fitted: Option<Fitted>,
}

/// Exponent and pinned coefficient of a `u` power law carried to `var`.
fn carry(alpha: f64, a: Option<f64>, var: Variable, p: f64) -> (f64, Option<f64>) {
    match var {
        Variable::Small => (alpha, a),
        Variable::Big => (alpha / p, a.map(|a| a.powf(1.0 / p))),
        Variable::Pme => {
            let s = (1.0 - p).powf((1.0 - p) / p);
            ((1.0 - p) * alpha / p, a.map(|a| s * a.powf((1.0 - p) / p)))
        }
    }
}

/// Models for one end of one wave type; power laws come with their
/// derivative law.
pub fn predict(params: &Params, ty: WaveType, var: Variable, end: End) -> Result<Vec<AsymptoticModel>> {
    if !params.is_subcritical() {
        return Err(Error::Domain("asymptotics are tabulated for 0 < p < 1".into()));
    }
    let p = params.p;
    let (c, k, mu) = (params.c, params.k, params.mu);
    let base = AsymptoticModel {
        wave_type: ty,
        variable: var,
        end,
        form: Form::Power,
        exponent: 0.0,
        pinned: None,
        sign: 1.0,
        limit: None,
        frequency: None,
        fitted: None,
    };
    let power = |alpha_u: f64, a_u: Option<f64>| {
        let (alpha, a) = carry(alpha_u, a_u, var, p);
        let sign = match end {
            End::Left => 1.0,
            // finite right ends are approached with d = xi_+ - xi; the infinite one has alpha < 0
            End::Right => -1.0,
        };
        vec![
            AsymptoticModel { form: Form::Power, exponent: alpha, pinned: a, ..base },
            AsymptoticModel {
                form: Form::PowerDeriv,
                exponent: alpha - 1.0,
                pinned: a.map(|a| alpha.abs() * a),
                sign,
                ..base
            },
        ]
    };
    let exp_approach = || -> Result<Vec<AsymptoticModel>> {
        if params.delta != 1 || mu <= 0.0 {
            return Err(Error::Domain("the approach to E1 needs delta = 1 and mu > 0".into()));
        }
        let d = params.disc;
        let (rho, freq) = if d > 0.0 {
            (0.5 * (-mu * c + d.sqrt()), None)
        } else if d == 0.0 {
            (-0.5 * mu * c, None)
        } else {
            (-0.5 * mu * c, Some(0.5 * (-d).sqrt()))
        };
        Ok(vec![AsymptoticModel { form: Form::ExpApproach, exponent: rho, limit: Some(1.0 / mu), frequency: freq, ..base }])
    };
    let wrong = || Error::InvalidParam(format!("no asymptotic law for type {:?} at the {} end", ty, end.name()));
    let quench = || power(p, None);
    let out = match (ty, end) {
        (_, End::Left) if ty != WaveType::V => quench(),
        (WaveType::V, End::Left) => {
            if params.delta != 1 {
                return Err(wrong());
            }
            vec![AsymptoticModel { form: Form::Logistic, exponent: p / c, ..base }]
        }
        (WaveType::I, End::Right) => {
            if k == 0.0 {
                return Err(Error::Domain("the algebraic decay law needs k > 0".into()));
            }
            power(-1.0, Some(c / k))
        }
        (WaveType::II, End::Right) => power(p, None),
        (WaveType::III, End::Right) => power(1.0, Some(-c / params.gamma)),
        (WaveType::IV, End::Right) | (WaveType::V, End::Right) => exp_approach()?,
        _ => return Err(wrong()),
    };
    Ok(out)
}

/// Window selection for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Window {
    /// Default windows described on [`fit`].
    Auto,
    /// Explicit `xi` interval.
    Xi(f64, f64),
}

/// Samples needed inside a fit window.
pub const MIN_WINDOW: usize = 20;
/// Closest samples to a finite end left out of the window.
pub const SKIP_CLOSEST: usize = 5;

struct Reg {
    slope: f64,
    intercept: f64,
}

fn regress(pts: &[(f64, f64)]) -> Reg {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    Reg { slope, intercept: my - slope * mx }
}

/// Value in `u`-coordinates.
fn to_small(v: f64, var: Variable, p: f64) -> f64 {
    match var {
        Variable::Small => v,
        Variable::Big => v.powf(p),
        Variable::Pme => {
            let s = (1.0 - p).powf((1.0 - p) / p);
            (v / s).powf(p / (1.0 - p))
        }
    }
}

/// Interior feature scale: distance from the left end, or from the
/// half-height crossing, to the origin of the normalized abscissa.
pub fn feature_scale(profile: &WaveProfile) -> f64 {
    let left = profile.left_end.filter(|e| e.is_finite()).map(|e| -e.xi);
    left.unwrap_or(1.0).abs().max(1.0)
}

/// Indices and distances of the samples in the window at a finite end:
/// the decade of distances adjacent to the end, after dropping the closest
/// samples.
fn finite_window(profile: &WaveProfile, end: End) -> Result<Vec<(usize, f64)>> {
    let d = profile
        .distance_to(end)
        .ok_or_else(|| Error::Domain(format!("{} end is not finite", end.name())))?;
    let mut idx: Vec<(usize, f64)> = d.iter().copied().enumerate().filter(|(_, x)| *x > 0.0).collect();
    idx.sort_by(|a, b| a.1.total_cmp(&b.1));
    if idx.len() <= SKIP_CLOSEST {
        return Err(Error::Numerical("too few samples near the end".into()));
    }
    let d0 = idx[SKIP_CLOSEST].1;
    Ok(idx.into_iter().skip(SKIP_CLOSEST).take_while(|(_, x)| *x <= 10.0 * d0).collect())
}

fn xi_window(profile: &WaveProfile, a: f64, b: f64) -> Vec<usize> {
    (0..profile.len()).filter(|&i| profile.xi[i] >= a && profile.xi[i] <= b).collect()
}

fn enough(n: usize) -> Result<()> {
    if n < MIN_WINDOW {
        return Err(Error::Numerical(format!("fit window holds {n} samples, need {MIN_WINDOW}")));
    }
    Ok(())
}

fn span(profile: &WaveProfile, idx: impl Iterator<Item = usize>) -> (f64, f64) {
    idx.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| (lo.min(profile.xi[i]), hi.max(profile.xi[i])))
}

/// Fits the free constants of `model` on `profile` and records the
/// measured exponent.
///
/// Automatic windows: at a finite end the decade of distances next to the
/// endpoint after dropping the [`SKIP_CLOSEST`] closest samples; at an
/// infinite power-law end `xi` in `[10 L, 100 L]` with `L` the larger of
/// [`feature_scale`] and `2.5 c/k`; for the approach to `1/mu` the samples
/// with `|u - 1/mu|` in `[1e-9, 1e-4]` (`[1e-10, 1e-3]` for the oscillation
/// envelope); for the logistic tail the samples with `u` below `1e-3 / mu`.
pub fn fit(profile: &WaveProfile, model: &AsymptoticModel, window: Window, params: &Params) -> Result<AsymptoticModel> {
    let p = params.p;
    let info = profile.end(model.end).ok_or_else(|| Error::InvalidParam("endpoints not detected".into()))?;
    let mut out = *model;
    let fitted = match model.form {
        Form::Power | Form::PowerDeriv => {
            let mut shift_used = None;
            // (xi index, distance) pairs
            let pts: Vec<(usize, f64)> = match (window, info.is_finite()) {
                (Window::Xi(a, b), true) => {
                    let d = profile.distance_to(model.end).unwrap();
                    xi_window(profile, a, b).into_iter().map(|i| (i, d[i])).collect()
                }
                (Window::Auto, true) => finite_window(profile, model.end)?,
                (w, false) => {
                    if info.kind != EndKind::InfiniteDecay || model.end != End::Right {
                        return Err(Error::Domain("power laws at infinite ends need a decaying right end".into()));
                    }
                    let (a, b) = match w {
                        Window::Xi(a, b) => (a, b),
                        Window::Auto => {
                            let l = feature_scale(profile).max(2.5 * params.c / params.k);
                            (10.0 * l, 100.0 * l)
                        }
                    };
                    let data = if model.form == Form::Power { &profile.value } else { &profile.deriv };
                    let first = xi_window(profile, a.max(f64::MIN_POSITIVE), b);
                    enough(first.len())?;
                    // the law holds in xi - shift; the shift is read off the
                    // predicted power, which makes |data|^(1/alpha) linear in xi
                    let lin: Vec<(f64, f64)> =
                        first.iter().map(|&i| (profile.xi[i], data[i].abs().powf(1.0 / model.exponent))).collect();
                    let r = regress(&lin);
                    let shift = -r.intercept / r.slope;
                    if !shift.is_finite() {
                        return Err(Error::Numerical("translation of the power law is undetermined".into()));
                    }
                    shift_used = Some(shift);
                    // the window stays far from the core in xi itself
                    first
                        .into_iter()
                        .map(|i| (i, profile.xi[i] - shift))
                        .filter(|&(_, d)| d > 0.0)
                        .collect()
                }
            };
            enough(pts.len())?;
            let data = if model.form == Form::Power { &profile.value } else { &profile.deriv };
            let (exponent, coefficient) = if model.form == Form::PowerDeriv && model.exponent == 0.0 {
                // finite limit slope: extrapolate the derivative linearly to the end
                let r = regress(&pts.iter().map(|&(i, d)| (d, data[i])).collect::<Vec<_>>());
                let lg: Vec<(f64, f64)> =
                    pts.iter().filter(|&&(i, _)| data[i] != 0.0).map(|&(i, d)| (d.ln(), data[i].abs().ln())).collect();
                enough(lg.len())?;
                (regress(&lg).slope, r.intercept)
            } else {
                let mut lg = Vec::with_capacity(pts.len());
                for &(i, d) in &pts {
                    let v = data[i].abs();
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::Numerical("fit window contains zero or non-finite values".into()));
                    }
                    lg.push((d.ln(), v.ln()));
                }
                let r = regress(&lg);
                (r.slope, r.intercept.exp())
            };
            Fitted {
                exponent,
                coefficient,
                frequency: None,
                shift: shift_used,
                sign_changes: 0,
                samples: pts.len(),
                window: span(profile, pts.iter().map(|x| x.0)),
            }
        }
        Form::ExpApproach => {
            let limit = model.limit.ok_or_else(|| Error::InvalidParam("exponential model without limit".into()))?;
            let res: Vec<f64> = profile.value.iter().map(|&v| to_small(v, profile.variable, p) - limit).collect();
            let idx: Vec<usize> = match window {
                Window::Xi(a, b) => xi_window(profile, a, b),
                Window::Auto => {
                    let (lo, hi) = if model.frequency.is_some() { (1e-10, 1e-3) } else { (1e-9, 1e-4) };
                    // only the settled tail: after the last sample above the window
                    let start = res.iter().rposition(|r| r.abs() > hi * limit.max(1.0)).map(|i| i + 1).unwrap_or(0);
                    (start..profile.len()).filter(|&i| res[i].abs() >= lo * limit.max(1.0)).collect()
                }
            };
            enough(idx.len())?;
            let sign_changes = idx.windows(2).filter(|w| res[w[0]] * res[w[1]] < 0.0).count();
            let (exponent, coefficient, frequency) = if model.frequency.is_some() || sign_changes >= 2 {
                envelope_fit(profile, &res, &idx)?
            } else {
                let mut lg = Vec::with_capacity(idx.len());
                for &i in &idx {
                    if res[i] == 0.0 {
                        return Err(Error::Numerical("fit window touches the limit".into()));
                    }
                    lg.push((profile.xi[i], res[i].abs().ln()));
                }
                let r = regress(&lg);
                (r.slope, r.intercept.exp(), None)
            };
            Fitted {
                exponent,
                coefficient,
                frequency,
                shift: None,
                sign_changes,
                samples: idx.len(),
                window: span(profile, idx.iter().copied()),
            }
        }
        Form::Logistic => {
            let (mu, c) = (params.mu, params.c);
            let small: Vec<f64> = profile.value.iter().map(|&v| to_small(v, profile.variable, p)).collect();
            let idx: Vec<usize> = match window {
                Window::Xi(a, b) => xi_window(profile, a, b),
                Window::Auto => {
                    let cap = 1e-3 / mu.max(1e-300);
                    let end = small.iter().position(|&u| u >= cap).unwrap_or(small.len());
                    (0..end).collect()
                }
            };
            enough(idx.len())?;
            let mut lg = Vec::with_capacity(idx.len());
            for &i in &idx {
                if !(small[i] > 0.0) {
                    return Err(Error::Numerical("fit window contains zero values".into()));
                }
                lg.push((profile.xi[i], small[i].ln()));
            }
            let slope = regress(&lg).slope;
            // one amplitude point in the middle of the tail fixes M
            let mid = idx[idx.len() / 2];
            let (u, x) = (small[mid], profile.xi[mid]);
            let e = (p * x / c).exp();
            let m = u / (e * (u * (mu * c * c + 1.0) - c * c));
            Fitted {
                exponent: slope,
                coefficient: m,
                frequency: None,
                shift: None,
                sign_changes: 0,
                samples: idx.len(),
                window: span(profile, idx.iter().copied()),
            }
        }
    };
    out.fitted = Some(fitted);
    Ok(out)
}

/// Envelope rate from the peaks of `|res|` between sign changes and the
/// angular frequency from the mean spacing of the zero crossings.
fn envelope_fit(profile: &WaveProfile, res: &[f64], idx: &[usize]) -> Result<(f64, f64, Option<f64>)> {
    let x = &profile.xi;
    let mut crossings = Vec::new();
    let mut peaks = Vec::new();
    let mut best: Option<usize> = None;
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        if best.map_or(true, |b| res[i].abs() > res[b].abs()) {
            best = Some(i);
        }
        if res[i] * res[j] < 0.0 {
            crossings.push(x[i] + (x[j] - x[i]) * res[i] / (res[i] - res[j]));
            if let Some(b) = best.take() {
                peaks.push(b);
            }
        }
    }
    // the lobes before the first and after the last crossing are cut by the window
    if peaks.len() > 1 {
        peaks.remove(0);
    }
    if peaks.len() < 3 || crossings.len() < 3 {
        return Err(Error::Numerical(format!(
            "oscillation window holds {} crossings and {} complete lobes",
            crossings.len(),
            peaks.len()
        )));
    }
    // refine each peak by a parabola through its neighbours in log|res|
    let pts: Vec<(f64, f64)> = peaks
        .iter()
        .map(|&i| {
            if i == 0 || i + 1 >= res.len() {
                return (x[i], res[i].abs().ln());
            }
            let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
            let (y0, y1, y2) = (res[i - 1].abs().ln(), res[i].abs().ln(), res[i + 1].abs().ln());
            let d01 = (y1 - y0) / (x1 - x0);
            let d12 = (y2 - y1) / (x2 - x1);
            let a = (d12 - d01) / (x2 - x0);
            if a < 0.0 {
                let xm = (0.5 * (x0 + x1) - d01 / (2.0 * a)).clamp(x0, x2);
                let ym = y0 + d01 * (xm - x0) + a * (xm - x0) * (xm - x1);
                (xm, ym)
            } else {
                (x1, y1)
            }
        })
        .collect();
    let r = regress(&pts);
    let n = crossings.len();
    let spacing = (crossings[n - 1] - crossings[0]) / (n - 1) as f64;
    Ok((r.slope, r.intercept.exp(), Some(std::f64::consts::PI / spacing)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative on nonzero predicted exponents, absolute on zero ones.
    pub exponent: f64,
    /// Relative on pinned coefficients.
    pub coefficient: f64,
    /// Relative on the oscillation frequency.
    pub frequency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exponent: 0.02, coefficient: 0.05, frequency: 0.10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub model: AsymptoticModel,
    pub exponent_error: f64,
    pub coefficient_error: Option<f64>,
    pub frequency_error: Option<f64>,
    pub tolerances: Tolerances,
    pub pass: bool,
}

fn rel(measured: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        (measured - predicted).abs()
    } else {
        ((measured - predicted) / predicted).abs()
    }
}

/// Compares a fitted model with its prediction.
pub fn verify_model(model: &AsymptoticModel, tol: Tolerances) -> Result<VerifyReport> {
    let f = model.fitted.ok_or_else(|| Error::InvalidParam("model has not been fitted".into()))?;
    let exponent_error = rel(f.exponent, model.exponent);
    let coefficient_error = model.pinned.map(|a| rel(f.coefficient.abs(), a.abs()));
    let frequency_error = model.frequency.map(|w| f.frequency.map_or(f64::INFINITY, |m| rel(m, w)));
    let mut pass = exponent_error <= tol.exponent;
    if let Some(e) = coefficient_error {
        pass &= e <= tol.coefficient;
    }
    if let Some(e) = frequency_error {
        pass &= e <= tol.frequency && f.sign_changes >= 2;
    }
    if model.form == Form::Logistic {
        // the constant of the logistic family is negative on this branch
        pass &= f.coefficient < 0.0;
    }
    Ok(VerifyReport { model: *model, exponent_error, coefficient_error, frequency_error, tolerances: tol, pass })
}

/// Predicts, fits and verifies every model at one end of a classified profile.
pub fn verify(profile: &WaveProfile, end: End, params: &Params, tol: Tolerances) -> Result<Vec<VerifyReport>> {
    let ty = profile.wave_type.ok_or_else(|| Error::InvalidParam("profile is not classified".into()))?;
    let models = predict(params, ty, profile.variable, end)?;
    models
        .iter()
        .map(|m| fit(profile, m, Window::Auto, params).and_then(|f| verify_model(&f, tol)))
        .collect()
}

fn opt(v: Option<f64>) -> Value {
    v.map(|x| json!(x)).unwrap_or(Value::Null)
}

impl VerifyReport {
    /// `{wave_type, end, form, predicted, measured, tolerances, pass}`.
    pub fn to_json(&self) -> Value {
        let m = &self.model;
        let f = m.fitted;
        json!({
            "wave_type": m.wave_type.label(m.variable),
            "end": m.end.name(),
            "form": m.form.name(),
            "predicted": {
                "exponent": m.exponent,
                "coefficient": opt(m.pinned),
                "limit": opt(m.limit),
                "frequency": opt(m.frequency),
            },
            "measured": {
                "exponent": opt(f.map(|f| f.exponent)),
                "coefficient": opt(f.map(|f| f.coefficient)),
                "frequency": opt(f.and_then(|f| f.frequency)),
                "sign_changes": f.map(|f| f.sign_changes),
                "samples": f.map(|f| f.samples),
                "window": f.map(|f| vec![f.window.0, f.window.1]),
            },
            "tolerances": {
                "exponent": self.tolerances.exponent,
                "coefficient": self.tolerances.coefficient,
                "frequency": self.tolerances.frequency,
            },
            "pass": self.pass,
        })
    }
}
