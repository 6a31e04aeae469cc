//! Wave profiles from phase-plane orbits: conversion to the travelling
//! coordinate, endpoint detection and classification into the five types.
//!
//! Along an orbit `dxi = phi ds` in the plane, `dxi = x dtau` in `U2`/`V2`
//! and `dxi = dtau` in `U1`; the original system runs in `xi` directly. Each
//! step is integrated with the cubic Hermite rule using the stored field
//! values, and the extent beyond the last sample of an exponentially
//! decaying end is extrapolated geometrically.

use serde_json::{json, Value};

use crate::compactify::{ChartId, ChartPoint};
use crate::equilibria::{find, list_equilibria, EqId, Frame};
use crate::error::{Error, Result};
use crate::field::SystemKind;
use crate::integrate::{
    angle_to_invariant, connection_census, integrate_from, quadrant_seed, shoot, Start, BranchSelector, CensusOptions, ConnectionCensus, Controls, Direction,
    EventKind, Manifold, Multiplicity, Sample, Termination, Trajectory,
};
use crate::params::Params;
use crate::profile::{End, EndKind, EndTail, EndpointInfo, Variable, WaveProfile, WaveType};

/// Remainders below this count as converged.
pub const TAIL_TOL: f64 = 1e-10;
/// `|psi|` beyond which a finite end counts as quenching.
pub const QUENCH_PSI: f64 = 1e6;

/// `dxi/dt` and its time derivative at a sample.
fn speed(s: &Sample, system: SystemKind) -> (f64, f64) {
    match s.frame {
        Frame::Plane => match system {
            SystemKind::Original => (1.0, 0.0),
            _ => (s.a, s.da),
        },
        Frame::Chart(ChartId::U1) => (1.0, 0.0),
        Frame::Chart(_) => (s.b, s.db),
    }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Tail data from the samples of the end segment, `seg[0]` being the end.
fn end_tail(seg: &[Sample], system: SystemKind, eq: Option<EqId>) -> EndTail {
    let end = seg[0];
    let (f, df) = speed(&end, system);
    let mut tail = EndTail {
        eq,
        frame: end.frame,
        speed: f,
        slopes: None,
        log_drop: 0.0,
        remainder: f64::INFINITY,
        remainder_spread: f64::INFINITY,
        u: end.phi(),
        du: end.psi(),
    };
    if seg.len() < 8 || !(f > 0.0) {
        return tail;
    }
    // at least 64 samples, extended within the end frame until the
    // log-speed has fallen by twice the decay threshold
    let same = seg.iter().take_while(|s| s.frame == end.frame).count();
    let mut w = same.min(64).max(seg.len().min(64));
    while w < same.min(MAX_TAIL_WINDOW) {
        let v = speed(&seg[w - 1], system).0;
        if v > 0.0 && v.ln() - f.ln() >= 2.0 * MIN_LOG_DROP {
            break;
        }
        w += 1;
    }
    // time measured from the end, growing into the profile
    let pts: Vec<(f64, f64)> = seg[..w]
        .iter()
        .filter_map(|s| {
            let v = speed(s, system).0;
            (v > 0.0).then(|| ((s.t - end.t).abs(), v.ln()))
        })
        .collect();
    if pts.len() < 8 {
        return tail;
    }
    let h = pts.len() / 2;
    // slopes of ln(speed) per unit time toward the end
    let s_near = -slope(&pts[..h]);
    let s_far = -slope(&pts[h..]);
    tail.slopes = Some((s_far, s_near));
    tail.log_drop = pts[pts.len() - 1].1 - pts[0].1;
    let toward = if seg.len() > 1 && seg[1].t > end.t { -1.0 } else { 1.0 };
    let local = -toward * df / f;
    if local > 0.0 {
        tail.remainder = f / local;
        if s_near < 0.0 && s_far < 0.0 {
            tail.remainder_spread = (f / -s_near - f / -s_far).abs();
        }
    }
    tail
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Decay {
    Exponential,
    Slow,
    Ambiguous,
}

/// Exponential decay needs the log-speed to fall by at least this across the window.
const MIN_LOG_DROP: f64 = 1.0;

/// Largest number of samples in an end window.
const MAX_TAIL_WINDOW: usize = 4096;

fn decay_of(t: &EndTail) -> Decay {
    let Some((far, near)) = t.slopes else { return Decay::Ambiguous };
    // a speed that barely changes across the window leaves a remainder much
    // longer than the window itself
    if t.log_drop < 0.5 * MIN_LOG_DROP || near >= 0.0 {
        return Decay::Slow;
    }
    let steady = far < 0.0 && (near - far).abs() <= 0.1 * near.abs().max(far.abs());
    if steady && t.log_drop >= MIN_LOG_DROP {
        let local = t.speed / t.remainder;
        if t.remainder.is_finite() && (local + near).abs() <= 0.1 * near.abs() {
            return Decay::Exponential;
        }
    }
    // decay that keeps slowing down toward the end
    if near.abs() < far.abs() && !steady {
        return Decay::Slow;
    }
    Decay::Ambiguous
}

/// Converts an orbit into a `u`-profile ordered by increasing `xi`.
///
/// Frame-switch duplicates and steps without `xi`-motion are dropped. The
/// result carries distances to both ends, the end tails and, after
/// [`detect_endpoints`], the endpoint data.
pub fn to_xi(traj: &Trajectory, params: &Params) -> Result<WaveProfile> {
    let mut ord: Vec<Sample> = traj.samples.clone();
    let (left_eq, right_eq) = match traj.direction {
        Direction::Forward => (traj.origin, traj.terminal.reached()),
        Direction::Backward => {
            ord.reverse();
            (traj.terminal.reached(), traj.origin)
        }
    };
    if ord.iter().any(|s| s.phi() < 0.0) {
        return Err(Error::Domain("trajectory leaves phi >= 0".into()));
    }
    let sys = traj.system;
    // kept[i] = index into ord, inc[i] = xi-step from kept[i-1] to kept[i]
    let mut kept = vec![0usize];
    let mut inc = vec![0.0];
    let mut pending = 0.0;
    let mut x = 0.0f64;
    for i in 1..ord.len() {
        let (s0, s1) = (ord[i - 1], ord[i]);
        if s0.frame != s1.frame {
            continue;
        }
        let h = s1.t - s0.t;
        let (f0, d0) = speed(&s0, sys);
        let (f1, d1) = speed(&s1, sys);
        let step = 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
        if !step.is_finite() {
            return Err(Error::Numerical("xi-quadrature produced a non-finite step".into()));
        }
        if step > 0.0 {
            pending += step;
        }
        // steps below the resolution of the running abscissa are merged
        if pending > 0.0 && x + pending > x {
            x += pending;
            kept.push(i);
            inc.push(pending);
            pending = 0.0;
        }
    }
    if kept.len() < 2 {
        return Err(Error::Domain("orbit has no xi-motion (phi identically 0)".into()));
    }
    // steps after the last kept sample that were too small to move the abscissa
    let leftover = pending;

    // end segments: maximal same-frame runs at each end, end sample first
    let first_frame = ord[0].frame;
    let head: Vec<Sample> = ord.iter().take_while(|s| s.frame == first_frame).copied().collect();
    let last_frame = ord[ord.len() - 1].frame;
    let tail_seg: Vec<Sample> = ord.iter().rev().take_while(|s| s.frame == last_frame).copied().collect();
    let lt = end_tail(&head, sys, left_eq);
    let rt = end_tail(&tail_seg, sys, right_eq);

    let n = kept.len();
    let left_rem = if decay_of(&lt) == Decay::Exponential { lt.remainder } else { 0.0 };
    let right_rem = if decay_of(&rt) == Decay::Exponential { rt.remainder } else { 0.0 };
    let mut from_left = Vec::with_capacity(n);
    let mut acc = left_rem;
    for &d in &inc {
        acc += d;
        from_left.push(acc);
    }
    let mut from_right = vec![0.0; n];
    let mut acc = right_rem + leftover;
    for i in (0..n).rev() {
        from_right[i] = acc;
        acc += inc[i];
    }
    let mut xi = Vec::with_capacity(n);
    x = 0.0;
    for &d in &inc {
        x += d;
        xi.push(x);
    }
    let value: Vec<f64> = kept.iter().map(|&i| ord[i].phi()).collect();
    let deriv: Vec<f64> = kept.iter().map(|&i| ord[i].psi()).collect();
    let mut prof = WaveProfile::new(Variable::Small, xi, value, deriv)?;
    prof.from_left = Some(from_left);
    prof.from_right = Some(from_right);
    prof.tails = Some((lt, rt));
    detect_endpoints(&mut prof, params)?;
    normalize_origin(&mut prof, params);
    Ok(prof)
}

/// Endpoint data; `reach` is the stored distance from the outermost sample
/// at `xi_end` to the end.
fn endpoint(t: &EndTail, end: End, xi_end: f64, reach: f64, params: &Params) -> EndpointInfo {
    let sign = match end {
        End::Left => -1.0,
        End::Right => 1.0,
    };
    let unresolved = EndpointInfo { kind: EndKind::Unresolved, xi: xi_end, limit_value: t.u, limit_derivative: t.du };
    match decay_of(t) {
        Decay::Exponential => {
            if !(t.remainder_spread < TAIL_TOL || t.remainder < TAIL_TOL) {
                return unresolved;
            }
            let xi = xi_end + sign * reach;
            let quench_frame = matches!(t.frame, Frame::Chart(ChartId::U2) | Frame::Chart(ChartId::V2));
            if quench_frame || t.du.abs() > QUENCH_PSI {
                let ld = if t.du > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
                return EndpointInfo { kind: EndKind::FiniteQuench, xi, limit_value: 0.0, limit_derivative: ld };
            }
            let e2 = params.c / params.gamma;
            if t.frame == Frame::Plane && t.u < 1e-3 && (t.du - e2).abs() <= 1e-3 * e2.abs().max(1.0) {
                return EndpointInfo { kind: EndKind::FiniteSingular, xi, limit_value: 0.0, limit_derivative: t.du };
            }
            unresolved
        }
        Decay::Slow => {
            let xi = sign * f64::INFINITY;
            if params.delta == 1 && params.mu > 0.0 {
                let e1 = 1.0 / params.mu;
                if (t.u - e1).abs() <= 1e-5 * e1.max(1.0) {
                    return EndpointInfo { kind: EndKind::AtE1, xi, limit_value: e1, limit_derivative: 0.0 };
                }
            }
            let limit = if t.eq == Some(EqId::E0) && !params.has_equilibrium_line() { 0.0 } else { t.u };
            EndpointInfo { kind: EndKind::InfiniteDecay, xi, limit_value: limit, limit_derivative: 0.0 }
        }
        Decay::Ambiguous => unresolved,
    }
}

/// Fills the endpoint data of a profile produced by [`to_xi`].
///
/// An end is finite when the speed `dxi/dt` decays exponentially toward it
/// and the extrapolated remainders predicted by the two halves of the end
/// window agree to [`TAIL_TOL`]. It is infinite when the speed stays bounded
/// away from zero or decays ever more slowly. Anything else is `UNRESOLVED`.
pub fn detect_endpoints(profile: &mut WaveProfile, params: &Params) -> Result<()> {
    let Some((lt, rt)) = profile.tails else {
        return Err(Error::InvalidParam("profile carries no end data".into()));
    };
    let n = profile.len();
    let reach_left = profile.from_left.as_ref().map_or(lt.remainder, |d| d[0]);
    let reach_right = profile.from_right.as_ref().map_or(rt.remainder, |d| d[n - 1]);
    profile.left_end = Some(endpoint(&lt, End::Left, profile.xi[0], reach_left, params));
    profile.right_end = Some(endpoint(&rt, End::Right, profile.xi[n - 1], reach_right, params));
    Ok(())
}

/// Abscissa of the first interior zero of the derivative, linearly interpolated.
pub fn first_derivative_zero(profile: &WaveProfile) -> Option<f64> {
    let d = &profile.deriv;
    (0..profile.len().saturating_sub(1)).find_map(|i| {
        let (a, b) = (d[i], d[i + 1]);
        if a.is_finite() && b.is_finite() && a != 0.0 && (a > 0.0) != (b > 0.0) {
            Some(profile.xi[i] + (profile.xi[i + 1] - profile.xi[i]) * a / (a - b))
        } else if a == 0.0 && i > 0 {
            Some(profile.xi[i])
        } else {
            None
        }
    })
}

fn level_crossing(profile: &WaveProfile, level: f64) -> Option<f64> {
    let v = &profile.value;
    (0..profile.len().saturating_sub(1)).find_map(|i| {
        let (a, b) = (v[i] - level, v[i + 1] - level);
        (a <= 0.0 && b > 0.0 || a >= 0.0 && b < 0.0)
            .then(|| profile.xi[i] + (profile.xi[i + 1] - profile.xi[i]) * a / (a - b))
    })
}

/// Puts `xi = 0` at the crossing of `1/(2 mu)` for orbits from E0 to E1,
/// which only turn in the oscillating tail of a focus, and otherwise at the
/// first interior derivative zero.
pub fn normalize_origin(profile: &mut WaveProfile, params: &Params) {
    let ends = profile.tails.map(|(l, r)| (l.eq, r.eq));
    let level = (params.delta == 1 && params.mu > 0.0).then_some(0.5 / params.mu);
    let zero = match (ends, level) {
        (Some((Some(EqId::E0), Some(EqId::E1))), Some(h)) => level_crossing(profile, h),
        _ => first_derivative_zero(profile).or_else(|| level.and_then(|h| level_crossing(profile, h))),
    };
    let Some(z) = zero else { return };
    for x in profile.xi.iter_mut() {
        *x -= z;
    }
    for e in [&mut profile.left_end, &mut profile.right_end].into_iter().flatten() {
        e.xi -= z;
    }
    profile.xi0 += z;
    // subtraction can merge neighbouring abscissae far from the origin
    if profile.xi.windows(2).any(|w| !(w[1] > w[0])) {
        let mut keep = vec![true; profile.len()];
        let mut last = f64::NEG_INFINITY;
        for (i, &x) in profile.xi.iter().enumerate() {
            keep[i] = x > last;
            if keep[i] {
                last = x;
            }
        }
        let filt = |v: &Vec<f64>| v.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect::<Vec<f64>>();
        profile.xi = filt(&profile.xi);
        profile.value = filt(&profile.value);
        profile.deriv = filt(&profile.deriv);
        profile.from_left = profile.from_left.as_ref().map(filt);
        profile.from_right = profile.from_right.as_ref().map(filt);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub wave_type: Option<WaveType>,
    pub variable: Variable,
    pub left_end: Option<EndpointInfo>,
    pub right_end: Option<EndpointInfo>,
    pub xi0: f64,
    pub derivative_zeros: usize,
    pub diagnostics: Vec<String>,
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else if v < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

/// Endpoint JSON; infinities are written as the strings `"inf"` and `"-inf"`.
pub fn endpoint_json(e: &Option<EndpointInfo>) -> Value {
    match e {
        None => Value::Null,
        Some(e) => json!({
            "kind": e.kind.name(),
            "xi": num(e.xi),
            "limit_value": num(e.limit_value),
            "limit_derivative": num(e.limit_derivative),
        }),
    }
}

impl Classification {
    pub fn label(&self) -> String {
        self.wave_type.map(|t| t.label(self.variable).to_string()).unwrap_or_else(|| "UNCLASSIFIED".into())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "wave_type": self.label(),
            "left_end": endpoint_json(&self.left_end),
            "right_end": endpoint_json(&self.right_end),
            "xi0": num(self.xi0),
            "derivative_zeros": self.derivative_zeros,
            "diagnostics": self.diagnostics,
        })
    }
}

/// Wave type from the equilibria at the two ends of the orbit.
pub fn type_of_connection(from: EqId, to: EqId) -> Option<WaveType> {
    match (from, to) {
        (EqId::E3, EqId::E0) => Some(WaveType::I),
        (EqId::E3, EqId::E4) => Some(WaveType::II),
        (EqId::E3, EqId::E2) => Some(WaveType::III),
        (EqId::E3, EqId::E1) => Some(WaveType::IV),
        (EqId::E0, EqId::E1) => Some(WaveType::V),
        _ => None,
    }
}

fn sign_changes(d: &[f64]) -> usize {
    let mut n = 0;
    let mut last = 0.0f64;
    for &v in d {
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            n += 1;
        }
        last = v;
    }
    n
}

/// Index of the first sample at or beyond `level`, if the profile reaches it.
fn first_reach(profile: &WaveProfile, level: f64) -> Option<usize> {
    profile.value.iter().position(|&v| v >= level)
}

/// Classifies a profile from the equilibria at its ends and enforces the
/// structural checks: one interior derivative zero for types I to IV and a
/// monotone profile for type V. When E1 is a focus the profiles of types IV
/// and V oscillate about `1/mu` forever; there the check is that the profile
/// rises monotonically up to its first arrival at `1/mu`, and the sign
/// changes of the oscillating tail are reported. On a line of equilibria
/// the orbits land without turning, so the derivative-zero check is skipped.
/// Sets `profile.wave_type`.
pub fn classify_wave(profile: &mut WaveProfile, params: &Params) -> Classification {
    let mut diagnostics = Vec::new();
    let zeros = profile.derivative_sign_changes();
    let mut out = Classification {
        wave_type: None,
        variable: profile.variable,
        left_end: profile.left_end,
        right_end: profile.right_end,
        xi0: profile.xi0,
        derivative_zeros: zeros,
        diagnostics: Vec::new(),
    };
    let Some((lt, rt)) = profile.tails else {
        out.diagnostics.push("profile carries no end data".into());
        return out;
    };
    let (Some(from), Some(to)) = (lt.eq, rt.eq) else {
        out.diagnostics.push("an end of the orbit is not at an equilibrium".into());
        return out;
    };
    let Some(ty) = type_of_connection(from, to) else {
        out.diagnostics.push(format!("{}->{} is not a travelling-wave connection", from.name(), to.name()));
        return out;
    };
    let (le, re) = (profile.left_end.map(|e| e.kind), profile.right_end.map(|e| e.kind));
    let u_profile = profile.variable == Variable::Small;
    // expected end kinds on u-profiles; U and V profiles shift the quench ends
    if u_profile {
        let want: (EndKind, EndKind) = match ty {
            WaveType::I => (EndKind::FiniteQuench, EndKind::InfiniteDecay),
            WaveType::II => (EndKind::FiniteQuench, EndKind::FiniteQuench),
            WaveType::III => (EndKind::FiniteQuench, EndKind::FiniteSingular),
            WaveType::IV => (EndKind::FiniteQuench, EndKind::AtE1),
            WaveType::V => (EndKind::InfiniteDecay, EndKind::AtE1),
        };
        if le != Some(want.0) {
            diagnostics.push(format!("left end {:?}, expected {}", le.map(|k| k.name()), want.0.name()));
        }
        if re != Some(want.1) {
            diagnostics.push(format!("right end {:?}, expected {}", re.map(|k| k.name()), want.1.name()));
        }
    }
    let focus_tail = matches!(ty, WaveType::IV | WaveType::V) && params.disc < 0.0;
    if params.has_equilibrium_line() {
        out.diagnostics.push(format!("line of equilibria: derivative-zero check skipped ({zeros} sign changes)"));
    } else if focus_tail {
        match first_reach(profile, 1.0 / params.mu) {
            Some(i) => {
                let before = sign_changes(&profile.deriv[..=i]);
                if before != 0 {
                    diagnostics.push(format!("{before} derivative sign changes before the first arrival at 1/mu"));
                } else {
                    out.diagnostics.push(format!("E1 is a focus: {zeros} sign changes in the oscillating tail"));
                }
            }
            None => diagnostics.push("profile never reaches 1/mu although E1 is a focus".into()),
        }
    } else {
        let want = if ty == WaveType::V { 0 } else { 1 };
        if zeros != want {
            diagnostics.push(format!("{zeros} derivative sign changes, expected {want}"));
        }
    }
    if profile.value.iter().any(|&v| v < 0.0) {
        diagnostics.push("negative profile values".into());
    }
    if diagnostics.is_empty() {
        out.wave_type = Some(ty);
        profile.wave_type = Some(ty);
    } else {
        out.diagnostics.extend(diagnostics);
    }
    out
}

/// Controls for profile runs: small steps and tiny proximity radii for
/// dense end windows, a small capture radius and a long time budget so
/// infinite tails reach far. Profiles with a tail at the origin run with
/// plane steps of up to 0.5.
pub fn profile_controls() -> Controls {
    Controls {
        h_max: 0.005,
        h_max_chart: 0.005,
        prox: 1e-11,
        prox_chart: Some(1e-40),
        cm_radius: 2e-3,
        max_time: 1e7,
        max_steps: 20_000_000,
        ..Controls::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub census: CensusOptions,
    pub controls: Controls,
    /// Offset of the seed along the centre manifold of the origin (type V).
    pub eps_center: f64,
    /// Largest `u` at seeds next to E3.
    pub u_seed: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { census: CensusOptions::default(), controls: profile_controls(), eps_center: 1e-5, u_seed: 1e-6 }
    }
}

/// Number of intervals of the fine sweep over a family run.
const FAMILY_REFINE: usize = 64;

/// Scan angle of the family run closest to its middle whose orbit crosses
/// `psi = 0` exactly once; the middle itself when no member does.
fn family_member(
    params: &Params,
    census: &ConnectionCensus,
    to: EqId,
    (lo, hi): (f64, f64),
    opts: &ProfileOptions,
) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let eqs = list_equilibria(params)?;
    let e3 = find(&eqs, EqId::E3).unwrap();
    let mut run: Vec<f64> =
        census.scan.iter().filter(|(t, id)| *id == to && *t >= lo && *t <= hi).map(|(t, _)| *t).collect();
    // the scan can miss narrow sub-runs, so a finer sweep of the run follows
    let fine = (0..=FAMILY_REFINE).map(|i| lo + (hi - lo) * i as f64 / FAMILY_REFINE as f64);
    run.sort_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()));
    let mut fine: Vec<f64> = fine.collect();
    fine.sort_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()));
    run.extend(fine);
    for theta in run {
        let cc = angle_to_invariant(params, theta, census.spread);
        let tr = shoot(params, e3, Manifold::Unstable, BranchSelector::Invariant(cc), opts.census.eps, &opts.census.controls)?;
        let crossings = tr.events.iter().filter(|e| e.kind == EventKind::PsiZero).count();
        if tr.terminal == Termination::ReachedEquilibrium(to) && crossings == 1 {
            return Ok(theta);
        }
    }
    Ok(mid)
}

/// A `u`-profile of the requested type with its source orbit.
///
/// Families are represented by a member of their angle run in the census
/// scan, preferring one whose derivative vanishes exactly once; the saddle connection is shot backward from the stable
/// branch of E2; type V leaves the origin along its centre manifold and is
/// integrated in the full plane.
pub fn wave_profile(params: &Params, ty: WaveType, opts: &ProfileOptions) -> Result<(WaveProfile, Trajectory)> {
    let eqs = list_equilibria(params)?;
    let (from, to) = match ty {
        WaveType::I => (EqId::E3, EqId::E0),
        WaveType::II => (EqId::E3, EqId::E4),
        WaveType::III => (EqId::E3, EqId::E2),
        WaveType::IV => (EqId::E3, EqId::E1),
        WaveType::V => (EqId::E0, EqId::E1),
    };
    let mut ctl = opts.controls;
    if matches!(ty, WaveType::I | WaveType::V) {
        // long tails at the origin: coarse plane steps
        ctl.h_max = ctl.h_max.max(0.5);
    }
    let traj = match ty {
        WaveType::V => {
            if params.delta != 1 {
                return Err(Error::Domain("type V needs delta = 1".into()));
            }
            let e0 = find(&eqs, EqId::E0).unwrap();
            let c = Controls { cm_capture: false, ..ctl };
            shoot(params, e0, Manifold::CenterUnstable, BranchSelector::Positive, opts.eps_center, &c)?
        }
        WaveType::III => {
            let e2 = find(&eqs, EqId::E2).ok_or_else(|| Error::Domain("E2 absent".into()))?;
            let eps = opts.census.eps.min(0.5 * ctl.prox);
            let back = shoot(params, e2, Manifold::Stable, BranchSelector::Positive, eps, &ctl)?;
            if back.terminal != Termination::ReachedEquilibrium(EqId::E3) {
                return Err(Error::Numerical(format!("stable branch of E2 ended with {}", back.terminal.name())));
            }
            back.reversed(Termination::ReachedEquilibrium(EqId::E2))
        }
        _ => {
            let census = connection_census(params, &opts.census)?;
            let rec = census
                .find(from, to)
                .filter(|r| r.multiplicity == Multiplicity::Family)
                .ok_or_else(|| Error::Domain(format!("no {}->{} family at these parameters", from.name(), to.name())))?;
            let (lo, hi) = rec.selector.expect("families carry their angle run");
            let e3 = find(&eqs, EqId::E3).unwrap();
            let theta = family_member(params, &census, to, (lo, hi), opts)?;
            let cc = angle_to_invariant(params, theta, census.spread);
            // chart origins have diagonal Jacobians: x-rate over lambda-rate
            let m = e3.jacobian[1][1] / e3.jacobian[0][0];
            let (mut l, mut x) = quadrant_seed(opts.census.eps, cc, m);
            // u = C lambda^(m-1) at the seed; start deep enough for the quench law
            if m > 1.0 && cc > 0.0 && cc * l.powf(m - 1.0) > opts.u_seed {
                l = (opts.u_seed / cc).powf(1.0 / (m - 1.0));
                x = cc * l.powf(m);
            }
            let start = Start::Chart(ChartPoint::new(ChartId::U2, x, l));
            integrate_from(params, SystemKind::Desingularized, start, Direction::Forward, &ctl, Some(EqId::E3))?
        }
    };
    if traj.terminal != Termination::ReachedEquilibrium(to) {
        return Err(Error::Numerical(format!(
            "{}->{} profile run ended with {}",
            from.name(),
            to.name(),
            traj.terminal.name()
        )));
    }
    let prof = to_xi(&traj, params)?;
    Ok((prof, traj))
}
