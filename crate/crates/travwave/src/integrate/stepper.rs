//! Dormand-Prince 5(4) steps and a classical fixed-step RK4 reference for
//! planar systems.

use crate::error::{Error, Result};

pub type State = [f64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// Result of one trial step.
#[derive(Debug, Clone, Copy)]
pub struct Trial {
    pub y: State,
    /// Derivative at the new point (first stage of the next step).
    pub f: State,
    pub err: State,
}

/// One Dormand-Prince step of size `h` from `y` with `k1 = f(y)`; the system
/// is autonomous, so the stage times are not needed.
/// `f` may refuse a stage by returning `None`.
pub fn dp45_trial<F>(f: &F, y: &State, k1: &State, h: f64) -> Option<Trial>
where
    F: Fn(&State) -> Option<State>,
{
    let k2 = f(&axpy(y, &[(A21, k1)], h))?;
    let k3 = f(&axpy(y, &[(A31, k1), (A32, &k2)], h))?;
    let k4 = f(&axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h))?;
    let k5 = f(&axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h))?;
    let k6 = f(&axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h))?;
    let yn = axpy(y, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = f(&yn)?;
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Some(Trial { y: yn, f: k7, err })
}

/// RMS of `err / (atol + rtol * max(|y0|, |y1|))`.
pub fn error_norm(err: &State, y0: &State, y1: &State, atol: f64, rtol: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (s / 2.0).sqrt()
}

/// Step-size factor from an error norm, clamped to `[0.2, 5]`.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { atol: 1e-12, rtol: 1e-10, h_init: 1e-4, h_max: f64::INFINITY, h_min: 1e-14, max_steps: 10_000_000 }
    }
}

/// Adaptive solution of a fixed planar system from `t0`, reporting the
/// state at each of the increasing `outputs` (> `t0`). Steps are clipped
/// so that every output time is hit exactly.
pub fn dp45_solve<F>(f: F, y0: State, t0: f64, outputs: &[f64], opts: &AdaptiveOptions) -> Result<Vec<State>>
where
    F: Fn(&State) -> State,
{
    let g = |y: &State| {
        let v = f(y);
        if v[0].is_finite() && v[1].is_finite() {
            Some(v)
        } else {
            None
        }
    };
    let mut out = Vec::with_capacity(outputs.len());
    let (mut t, mut y) = (t0, y0);
    let mut k1 = g(&y).ok_or_else(|| Error::Numerical("non-finite field at start".into()))?;
    let mut h = opts.h_init;
    let mut steps = 0;
    for &target in outputs {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Numerical("step budget exhausted".into()));
            }
            let hh = h.min(opts.h_max).min(target - t);
            let last = hh == target - t;
            match dp45_trial(&g, &y, &k1, hh) {
                Some(tr) => {
                    let e = error_norm(&tr.err, &y, &tr.y, opts.atol, opts.rtol);
                    if e <= 1.0 {
                        t = if last { target } else { t + hh };
                        y = tr.y;
                        k1 = tr.f;
                        if !last || hh >= h {
                            h = hh * step_factor(e);
                        }
                    } else {
                        h = hh * step_factor(e);
                    }
                }
                None => h = hh * 0.25,
            }
            if h < opts.h_min {
                return Err(Error::Numerical("step size underflow".into()));
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Classical RK4 with fixed step `h`, reporting states at `outputs`.
/// Output times are assumed to be close to multiples of `h` from `t0`.
pub fn rk4_solve<F>(f: F, y0: State, t0: f64, h: f64, outputs: &[f64]) -> Vec<State>
where
    F: Fn(&State) -> State,
{
    let mut out = Vec::with_capacity(outputs.len());
    let mut y = y0;
    let mut n: u64 = 0;
    for &target in outputs {
        let n_target = ((target - t0) / h).round() as u64;
        while n < n_target {
            y = rk4_step(&f, &y, h);
            n += 1;
        }
        out.push(y);
    }
    out
}

pub fn rk4_step<F>(f: &F, y: &State, h: f64) -> State
where
    F: Fn(&State) -> State,
{
    let k1 = f(y);
    let k2 = f(&axpy(y, &[(0.5, &k1)], h));
    let k3 = f(&axpy(y, &[(0.5, &k2)], h));
    let k4 = f(&axpy(y, &[(1.0, &k3)], h));
    axpy(y, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)], h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(y: &State) -> State {
        [-y[1], y[0]]
    }

    #[test]
    fn dp45_reproduces_rotation() {
        let ts: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys = dp45_solve(rotation, [1.0, 0.0], 0.0, &ts, &AdaptiveOptions::default()).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-8 && (y[1] - t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| (rk4_solve(rotation, [1.0, 0.0], 0.0, h, &[1.0])[0][0] - 1f64.cos()).abs();
        let ratio = err(0.05) / err(0.025);
        assert!((ratio.log2() - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn embedded_error_scales_with_fifth_power() {
        let y = [1.0, 0.0];
        let k1 = rotation(&y);
        let g = |y: &State| Some(rotation(y));
        let e1 = dp45_trial(&g, &y, &k1, 0.1).unwrap().err[0].abs();
        let e2 = dp45_trial(&g, &y, &k1, 0.05).unwrap().err[0].abs();
        assert!((e1 / e2).log2() > 4.5);
    }
}
