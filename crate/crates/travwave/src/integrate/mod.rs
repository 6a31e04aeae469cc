//! Trajectories of the phase-plane systems with frame switching between the
//! plane and the charts at infinity, shooting from invariant manifolds and
//! the connecting-orbit census.
//!
//! Samples store the state in the frame they were computed in: `(phi, psi)`
//! in the plane, `(lambda, x)` in a chart, together with the field value in
//! that frame's own time (`s` in the plane, `tau` in a chart, `xi` for the
//! original system). The sample time `t` is continuous across frame changes
//! but its meaning changes with the frame.

mod census;
mod shoot;
pub mod stepper;

pub use census::{
    census_signature, census_stability, connection_census, CensusOptions, CensusStability, Connection,
    ConnectionCensus, Multiplicity, Threshold,
};
pub use shoot::{angle_to_invariant, invariant_scale, quadrant_seed, shoot, BranchSelector, Manifold};

use serde::Serialize;

use crate::compactify::{change_chart, chart_field_raw, chart_map, chart_to_disk, chart_unmap, to_disk, ChartId, ChartPoint, DiskPoint};
use crate::equilibria::{center_manifold, list_equilibria, CenterManifoldModel, EqId, Frame};
use crate::error::{Error, Result};
use crate::field::{desingularized, original, PhasePoint, SystemKind};
use crate::params::Params;
use stepper::{dp45_trial, error_norm, rk4_step, step_factor, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(&self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn flip(&self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeVariable {
    Xi,
    S,
    Tau,
}

impl TimeVariable {
    pub fn name(&self) -> &'static str {
        match self {
            TimeVariable::Xi => "xi",
            TimeVariable::S => "s",
            TimeVariable::Tau => "tau",
        }
    }
}

/// Numerical knobs of the trajectory driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Controls {
    pub atol: f64,
    pub rtol: f64,
    /// Maximum elapsed time per frame segment.
    pub max_time: f64,
    pub max_steps: usize,
    /// Radius of the balls that count as reaching an equilibrium.
    pub prox: f64,
    /// Radius at the chart equilibria E3 and E4 when it differs from `prox`.
    pub prox_chart: Option<f64>,
    pub h_init: f64,
    pub h_max: f64,
    /// Extra step cap inside the charts at infinity.
    pub h_max_chart: f64,
    pub h_min: f64,
    /// Plane to chart when `|(phi, psi)|` exceeds this.
    pub r_switch: f64,
    /// Chart to plane when `lambda` exceeds this.
    pub lambda_back: f64,
    /// Between `U1` and `U2`/`V2` when `|x|` exceeds this.
    pub x_switch: f64,
    /// Radius inside which the centre-manifold reduction at the origin takes over.
    pub cm_radius: f64,
    /// Relative closeness to the centre-manifold graph required for capture.
    pub cm_closeness: f64,
    pub cm_capture: bool,
    /// Step in `xi` of the reduced flow used to leave the origin along its centre manifold.
    pub hop_step: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            atol: 1e-12,
            rtol: 1e-10,
            max_time: 1e4,
            max_steps: 5_000_000,
            prox: 1e-8,
            prox_chart: None,
            h_init: 1e-4,
            h_max: 0.5,
            h_max_chart: f64::INFINITY,
            h_min: 1e-14,
            r_switch: 10.0,
            lambda_back: 0.2,
            x_switch: 2.0,
            cm_radius: 2e-2,
            cm_closeness: 1e-2,
            cm_capture: true,
            hop_step: 0.02,
        }
    }
}

impl Controls {
    /// Same controls with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Controls {
        Controls { atol: self.atol / factor, rtol: self.rtol / factor, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub frame: Frame,
    /// `phi` or `lambda`.
    pub a: f64,
    /// `psi` or `x`.
    pub b: f64,
    pub da: f64,
    pub db: f64,
}

impl Sample {
    pub fn phase_point(&self) -> Option<PhasePoint> {
        match self.frame {
            Frame::Plane => Some(PhasePoint::new(self.a, self.b)),
            Frame::Chart(ch) => chart_unmap(ChartPoint::new(ch, self.b, self.a)).ok(),
        }
    }

    pub fn chart_point(&self) -> Option<ChartPoint> {
        match self.frame {
            Frame::Chart(ch) => Some(ChartPoint::new(ch, self.b, self.a)),
            Frame::Plane => None,
        }
    }

    pub fn disk(&self) -> DiskPoint {
        match self.frame {
            Frame::Plane => to_disk(PhasePoint::new(self.a, self.b)),
            Frame::Chart(ch) => chart_to_disk(ChartPoint::new(ch, self.b, self.a)),
        }
    }

    /// Sign of `psi` at the sample (0 when `psi = 0`).
    pub fn psi_sign(&self) -> f64 {
        let v = match self.frame {
            Frame::Plane => self.b,
            Frame::Chart(ChartId::U2) => 1.0,
            Frame::Chart(ChartId::V2) => -1.0,
            Frame::Chart(ChartId::U1) => self.b,
        };
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// `phi` at the sample, `+inf` on the circle at infinity of `U1`.
    pub fn phi(&self) -> f64 {
        match self.frame {
            Frame::Plane => self.a,
            Frame::Chart(ChartId::U1) => 1.0 / self.a,
            Frame::Chart(_) => {
                if self.a == 0.0 {
                    if self.b == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    self.b / self.a
                }
            }
        }
    }

    /// `psi` at the sample.
    pub fn psi(&self) -> f64 {
        match self.frame {
            Frame::Plane => self.b,
            Frame::Chart(ChartId::U1) => self.b / self.a,
            Frame::Chart(ChartId::U2) => 1.0 / self.a,
            Frame::Chart(ChartId::V2) => -1.0 / self.a,
        }
    }

    pub fn time_variable(&self, system: SystemKind) -> TimeVariable {
        match self.frame {
            Frame::Chart(_) => TimeVariable::Tau,
            Frame::Plane => match system {
                SystemKind::Original => TimeVariable::Xi,
                _ => TimeVariable::S,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    ReachedEquilibrium(EqId),
    CrossedAxis,
    LeftDomain,
    MaxTime,
    StepUnderflow,
}

impl Termination {
    pub fn name(&self) -> String {
        match self {
            Termination::ReachedEquilibrium(id) => format!("REACHED_EQUILIBRIUM({})", id.name()),
            Termination::CrossedAxis => "CROSSED_AXIS".into(),
            Termination::LeftDomain => "LEFT_DOMAIN".into(),
            Termination::MaxTime => "MAX_TIME".into(),
            Termination::StepUnderflow => "STEP_UNDERFLOW".into(),
        }
    }

    pub fn reached(&self) -> Option<EqId> {
        match self {
            Termination::ReachedEquilibrium(id) => Some(*id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EventKind {
    /// `psi` changes sign; `t` is linearly interpolated between samples.
    PsiZero,
    FrameSwitch { from: Frame, to: Frame },
    /// Entered the centre-manifold ball at the origin.
    CenterCapture,
    /// Left the origin along the reduced flow.
    CenterHop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    /// Index of the first sample after the event.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frame: Frame,
    pub time_variable: TimeVariable,
    pub system: SystemKind,
    pub direction: Direction,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub terminal: Termination,
    /// Equilibrium the orbit was launched from, when known.
    pub origin: Option<EqId>,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least one sample")
    }

    pub fn disk_points(&self) -> Vec<DiskPoint> {
        self.samples.iter().map(|s| s.disk()).collect()
    }

    /// Smallest disk distance between the sample sets of two trajectories.
    pub fn min_disk_distance(&self, other: &Trajectory) -> f64 {
        let a = self.disk_points();
        let b = other.disk_points();
        let mut best = f64::INFINITY;
        for p in &a {
            for q in &b {
                best = best.min(p.dist(q));
            }
        }
        best
    }

    /// Smallest disk distance from the samples to a disk point.
    pub fn min_distance_to(&self, q: DiskPoint) -> f64 {
        self.samples.iter().map(|s| s.disk().dist(&q)).fold(f64::INFINITY, f64::min)
    }

    /// Samples in reverse order, i.e. the same orbit traversed in the
    /// opposite direction. The terminal reason is supplied by the caller.
    pub fn reversed(&self, terminal: Termination) -> Trajectory {
        let n = self.samples.len();
        let samples: Vec<Sample> = self.samples.iter().rev().copied().collect();
        let mut events: Vec<Event> = self
            .events
            .iter()
            .map(|e| Event { index: n - e.index.min(n), ..*e })
            .collect();
        events.reverse();
        Trajectory {
            frame: samples[0].frame,
            time_variable: samples[0].time_variable(self.system),
            system: self.system,
            direction: self.direction.flip(),
            samples,
            events,
            terminal,
            origin: self.terminal.reached(),
        }
    }

    /// CSV with header `t,coord1,coord2,frame`; coordinates are `(phi, psi)`
    /// in the plane and `(lambda, x)` in a chart.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.samples.len() * 64);
        s.push_str("t,coord1,coord2,frame\n");
        for smp in &self.samples {
            s.push_str(&format!("{},{},{},{}\n", smp.t, smp.a, smp.b, smp.frame.name()));
        }
        s
    }
}

/// Initial state of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Plane(PhasePoint),
    Chart(ChartPoint),
}

impl Start {
    fn frame_state(&self) -> (Frame, State) {
        match self {
            Start::Plane(p) => (Frame::Plane, [p.phi, p.psi]),
            Start::Chart(cp) => (Frame::Chart(cp.chart), [cp.lambda, cp.x]),
        }
    }
}

struct Driver<'a> {
    pr: &'a Params,
    sys: SystemKind,
    dir: f64,
    ctl: &'a Controls,
    plane_eqs: Vec<(EqId, [f64; 2])>,
    cm: CenterManifoldModel,
    charts: bool,
    /// Equilibrium the start point sits next to; ignored until the orbit leaves its ball.
    leaving: Option<EqId>,
}

impl<'a> Driver<'a> {
    /// Field in the frame's own time, or `None` outside the admissible region.
    fn field(&self, frame: Frame, y: &State) -> Option<State> {
        let v = match frame {
            Frame::Plane => {
                if y[0] < 0.0 {
                    return None;
                }
                match self.sys {
                    SystemKind::Desingularized => {
                        let (a, b) = desingularized(self.pr, y[0], y[1]);
                        [a, b]
                    }
                    SystemKind::Original => {
                        if y[0] == 0.0 {
                            return None;
                        }
                        let (a, b) = original(self.pr, y[0], y[1]);
                        [a, b]
                    }
                    SystemKind::PmeAppB => [y[0] * y[1], -self.pr.c * y[0] * y[1]],
                }
            }
            Frame::Chart(ch) => {
                if y[0] < 0.0 {
                    return None;
                }
                let (a, b) = chart_field_raw(self.pr, ch, y[0], y[1]);
                [a, b]
            }
        };
        if v[0].is_finite() && v[1].is_finite() {
            Some(v)
        } else {
            None
        }
    }

    /// Equilibrium whose proximity ball contains `y`. The origin only counts
    /// when it attracts in the integration direction.
    fn hits(&self, frame: Frame, y: &State) -> Option<EqId> {
        let prox = self.ctl.prox;
        let prox_chart = self.ctl.prox_chart.unwrap_or(prox);
        let line = self.pr.has_equilibrium_line() && self.sys != SystemKind::PmeAppB;
        match frame {
            Frame::Plane => {
                for (id, loc) in &self.plane_eqs {
                    if (y[0] - loc[0]).hypot(y[1] - loc[1]) < prox && (*id != EqId::E0 || self.origin_absorbs(y[0])) {
                        return Some(*id);
                    }
                }
                if line && y[1].abs() < prox {
                    return Some(EqId::E0);
                }
                None
            }
            Frame::Chart(ChartId::U2) if y[0].hypot(y[1]) < prox_chart => Some(EqId::E3),
            Frame::Chart(ChartId::V2) if y[0].hypot(y[1]) < prox_chart => Some(EqId::E4),
            Frame::Chart(ChartId::U1) if line && y[1].abs() < prox => Some(EqId::E0),
            _ => None,
        }
    }

    fn origin_absorbs(&self, phi: f64) -> bool {
        if self.pr.has_equilibrium_line() || self.sys != SystemKind::Desingularized {
            return true;
        }
        if phi == 0.0 {
            // the fast direction along the axis attracts forward in time
            return self.dir > 0.0;
        }
        self.dir * self.cm.flow_at(phi) < 0.0
    }

    fn near_center_graph(&self, y: &State) -> bool {
        let (phi, psi) = (y[0], y[1]);
        if !(phi > 0.0) || phi.hypot(psi) >= self.ctl.cm_radius {
            return false;
        }
        let h = self.cm.graph_at(phi);
        h != 0.0 && (psi - h).abs() <= self.ctl.cm_closeness * h.abs()
    }

    fn switch(&self, frame: Frame, y: &State) -> Option<(Frame, State)> {
        let ctl = self.ctl;
        let to_state = |cp: ChartPoint| (Frame::Chart(cp.chart), [cp.lambda, cp.x]);
        match frame {
            Frame::Plane => {
                if y[0].hypot(y[1]) <= ctl.r_switch {
                    return None;
                }
                let pt = PhasePoint::new(y[0], y[1]);
                let chart = if y[1].abs() >= y[0] {
                    if y[1] > 0.0 {
                        ChartId::U2
                    } else {
                        ChartId::V2
                    }
                } else {
                    ChartId::U1
                };
                chart_map(pt, chart).ok().map(to_state)
            }
            Frame::Chart(ch) => {
                let cp = ChartPoint::new(ch, y[1], y[0]);
                if y[1].abs() > ctl.x_switch {
                    let to = match ch {
                        ChartId::U1 => {
                            if y[1] > 0.0 {
                                ChartId::U2
                            } else {
                                ChartId::V2
                            }
                        }
                        _ => ChartId::U1,
                    };
                    return change_chart(cp, to).ok().map(to_state);
                }
                if y[0] > ctl.lambda_back {
                    return chart_unmap(cp).ok().map(|p| (Frame::Plane, [p.phi, p.psi]));
                }
                None
            }
        }
    }

    fn sample(&self, t: f64, frame: Frame, y: &State, f: &State) -> Sample {
        Sample { t, frame, a: y[0], b: y[1], da: f[0], db: f[1] }
    }

    /// Follows the reduced flow `dphi/dxi = h(phi)` on the centre-manifold
    /// graph until `phi` reaches the capture radius, recording plane samples.
    fn hop(&self, t: &mut f64, y: &mut State, samples: &mut Vec<Sample>) -> bool {
        let target = self.ctl.cm_radius;
        let dxi = self.dir * self.ctl.hop_step;
        let g = |v: &State| [self.cm.graph_at(v[0]), 1.0 / v[0]];
        let mut z = [y[0], *t];
        for _ in 0..1_000_000 {
            if z[0] >= target {
                *y = [z[0], self.cm.graph_at(z[0])];
                *t = z[1];
                return true;
            }
            z = rk4_step(&g, &z, dxi);
            if !(z[0] > 0.0) || !z[0].is_finite() {
                return false;
            }
            let yy = [z[0], self.cm.graph_at(z[0])];
            let (fa, fb) = desingularized(self.pr, yy[0], yy[1]);
            samples.push(self.sample(z[1], Frame::Plane, &yy, &[fa, fb]));
        }
        false
    }

    fn run(&self, start: Start) -> Result<Trajectory> {
        let ctl = self.ctl;
        let (mut frame, mut y) = start.frame_state();
        if !self.charts && frame != Frame::Plane {
            return Err(Error::InvalidParam("chart starts need the desingularized system".into()));
        }
        let first = self
            .field(frame, &y)
            .ok_or_else(|| Error::Domain("start point outside the admissible region".into()))?;
        let mut t = 0.0;
        let mut samples = vec![self.sample(t, frame, &y, &first)];
        let mut events = Vec::new();
        let system = self.sys;
        let tv = samples[0].time_variable(system);
        let direction = if self.dir > 0.0 { Direction::Forward } else { Direction::Backward };
        let finish = |samples: Vec<Sample>, events: Vec<Event>, terminal| Trajectory {
            frame: start.frame_state().0,
            time_variable: tv,
            system,
            direction,
            samples,
            events,
            terminal,
            origin: self.leaving,
        };
        let mut leaving = self.leaving;
        match self.hits(frame, &y) {
            Some(id) if Some(id) == leaving => {}
            Some(id) => return Ok(finish(samples, events, Termination::ReachedEquilibrium(id))),
            None => leaving = None,
        }
        let mut capture = ctl.cm_capture && self.charts;
        let mut k = first;
        let mut h = ctl.h_init;
        let mut seg_t0 = t;
        let mut steps = 0usize;
        loop {
            if steps >= ctl.max_steps || (t - seg_t0).abs() >= ctl.max_time {
                return Ok(finish(samples, events, Termination::MaxTime));
            }
            steps += 1;
            let cap = if frame == Frame::Plane { ctl.h_max } else { ctl.h_max.min(ctl.h_max_chart) };
            let hh = h.min(cap);
            let dir = self.dir;
            let g = |v: &State| self.field(frame, v).map(|f| [dir * f[0], dir * f[1]]);
            let k_dir = [dir * k[0], dir * k[1]];
            let accepted = match dp45_trial(&g, &y, &k_dir, hh) {
                None => {
                    h = hh * 0.25;
                    if h < ctl.h_min {
                        let reason = if frame == Frame::Plane { Termination::CrossedAxis } else { Termination::LeftDomain };
                        return Ok(finish(samples, events, reason));
                    }
                    None
                }
                Some(tr) => {
                    let e = error_norm(&tr.err, &y, &tr.y, ctl.atol, ctl.rtol);
                    h = hh * step_factor(e);
                    if e <= 1.0 {
                        Some(tr)
                    } else {
                        if h < ctl.h_min {
                            return Ok(finish(samples, events, Termination::StepUnderflow));
                        }
                        None
                    }
                }
            };
            let Some(tr) = accepted else { continue };
            t += dir * hh;
            y = tr.y;
            k = [dir * tr.f[0], dir * tr.f[1]];
            let prev = *samples.last().unwrap();
            let cur = self.sample(t, frame, &y, &k);
            samples.push(cur);
            if prev.frame == cur.frame {
                let (s0, s1) = (prev.psi_sign(), cur.psi_sign());
                if s0 != 0.0 && s1 != 0.0 && s0 != s1 {
                    let (b0, b1) = (prev.b, cur.b);
                    let te = prev.t + (cur.t - prev.t) * b0 / (b0 - b1);
                    events.push(Event { kind: EventKind::PsiZero, t: te, index: samples.len() - 1 });
                }
            }
            if !y[0].is_finite() || !y[1].is_finite() {
                return Ok(finish(samples, events, Termination::LeftDomain));
            }
            match self.hits(frame, &y) {
                Some(id) if Some(id) == leaving => {}
                Some(id) => return Ok(finish(samples, events, Termination::ReachedEquilibrium(id))),
                None => leaving = None,
            }
            if capture && frame == Frame::Plane && self.near_center_graph(&y) {
                events.push(Event { kind: EventKind::CenterCapture, t, index: samples.len() - 1 });
                if dir * self.cm.flow_at(y[0]) < 0.0 {
                    return Ok(finish(samples, events, Termination::ReachedEquilibrium(EqId::E0)));
                }
                if !self.hop(&mut t, &mut y, &mut samples) {
                    return Err(Error::Numerical("reduced flow at the origin failed".into()));
                }
                events.push(Event { kind: EventKind::CenterHop, t, index: samples.len() - 1 });
                capture = false;
                seg_t0 = t;
                k = self.field(frame, &y).ok_or_else(|| Error::Numerical("hop left the domain".into()))?;
                continue;
            }
            if self.charts {
                if let Some((nf, ny)) = self.switch(frame, &y) {
                    let Some(nk) = self.field(nf, &ny) else {
                        return Ok(finish(samples, events, Termination::LeftDomain));
                    };
                    events.push(Event { kind: EventKind::FrameSwitch { from: frame, to: nf }, t, index: samples.len() });
                    frame = nf;
                    y = ny;
                    k = nk;
                    samples.push(self.sample(t, frame, &y, &k));
                    seg_t0 = t;
                }
            } else if y[0].hypot(y[1]) > 1e12 {
                return Ok(finish(samples, events, Termination::LeftDomain));
            }
        }
    }
}

/// Integrates `system` from `start`. The desingularized system switches
/// between the plane and the charts; the other systems stay in the plane.
pub fn integrate(params: &Params, system: SystemKind, start: Start, direction: Direction, controls: &Controls) -> Result<Trajectory> {
    integrate_from(params, system, start, direction, controls, None)
}

/// As [`integrate`], ignoring arrival at `leaving` until the orbit has left
/// its proximity ball once.
pub fn integrate_from(
    params: &Params,
    system: SystemKind,
    start: Start,
    direction: Direction,
    controls: &Controls,
    leaving: Option<EqId>,
) -> Result<Trajectory> {
    let eqs = if params.p == 1.0 { Vec::new() } else { list_equilibria(params)? };
    let plane_eqs = eqs
        .iter()
        .filter(|e| e.frame == Frame::Plane)
        .map(|e| (e.id, [e.location.0, e.location.1]))
        .collect();
    let driver = Driver {
        pr: params,
        sys: system,
        dir: direction.sign(),
        ctl: controls,
        plane_eqs,
        cm: center_manifold(params),
        charts: system == SystemKind::Desingularized,
        leaving,
    };
    driver.run(start)
}

/// Equilibrium absorbing the end of `traj`, or `None`.
///
/// A reported arrival is accepted as is. Otherwise the last sample is
/// expressed in every frame where an equilibrium is finite and tested
/// against the proximity radius `prox`.
pub fn endpoint_of(traj: &Trajectory, params: &Params, prox: f64) -> Option<EqId> {
    if let Some(id) = traj.terminal.reached() {
        return Some(id);
    }
    let last = traj.last();
    let pt = last.phase_point();
    if let Some(pt) = pt {
        if params.p != 1.0 {
            if let Ok(eqs) = list_equilibria(params) {
                for e in eqs.iter().filter(|e| e.frame == Frame::Plane) {
                    if (pt.phi - e.location.0).hypot(pt.psi - e.location.1) < prox {
                        return Some(e.id);
                    }
                }
            }
        }
    }
    let chart_pt = match (last.chart_point(), pt) {
        (Some(cp), _) if cp.chart != ChartId::U1 => Some(cp),
        (_, Some(pt)) if pt.psi > 0.0 => chart_map(pt, ChartId::U2).ok(),
        (_, Some(pt)) if pt.psi < 0.0 => chart_map(pt, ChartId::V2).ok(),
        _ => None,
    };
    if let Some(cp) = chart_pt {
        if cp.lambda.hypot(cp.x) < prox {
            return Some(if cp.chart == ChartId::U2 { EqId::E3 } else { EqId::E4 });
        }
    }
    None
}
