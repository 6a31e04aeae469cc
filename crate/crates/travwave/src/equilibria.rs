//! Finite equilibria and equilibria at infinity, their linearizations and
//! the centre-manifold approximation at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compactify::{chart_jacobian, ChartId, ChartPoint};
use crate::error::{Error, Result};
use crate::field::{jacobian, PhasePoint, SystemKind};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EqId {
    E0,
    E1,
    E2,
    E3,
    E4,
}

impl EqId {
    pub fn name(&self) -> &'static str {
        match self {
            EqId::E0 => "E0",
            EqId::E1 => "E1",
            EqId::E2 => "E2",
            EqId::E3 => "E3",
            EqId::E4 => "E4",
        }
    }

    pub fn parse(s: &str) -> Option<EqId> {
        match s {
            "E0" => Some(EqId::E0),
            "E1" => Some(EqId::E1),
            "E2" => Some(EqId::E2),
            "E3" => Some(EqId::E3),
            "E4" => Some(EqId::E4),
            _ => None,
        }
    }
}

/// Coordinate frame of a point or trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    Plane,
    Chart(ChartId),
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Plane => "PLANE",
            Frame::Chart(c) => c.name(),
        }
    }

    pub fn parse(s: &str) -> Option<Frame> {
        match s {
            "PLANE" => Some(Frame::Plane),
            "U1" => Some(Frame::Chart(ChartId::U1)),
            "U2" => Some(Frame::Chart(ChartId::U2)),
            "V2" => Some(Frame::Chart(ChartId::V2)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StabilityClass {
    Source,
    Sink,
    Saddle,
    StableNode,
    StableFocus,
    CenterManifold,
}

impl StabilityClass {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityClass::Source => "SOURCE",
            StabilityClass::Sink => "SINK",
            StabilityClass::Saddle => "SADDLE",
            StabilityClass::StableNode => "STABLE_NODE",
            StabilityClass::StableFocus => "STABLE_FOCUS",
            StabilityClass::CenterManifold => "CENTER_MANIFOLD",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub id: EqId,
    pub frame: Frame,
    /// `(phi, psi)` in the plane, `(lambda, x)` in a chart.
    pub location: (f64, f64),
    /// Field the Jacobian belongs to.
    pub system: &'static str,
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    /// Unit eigenvectors matching `eigenvalues`, present when both are real.
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    pub klass: StabilityClass,
}

impl Equilibrium {
    pub fn phase_point(&self) -> Option<PhasePoint> {
        match self.frame {
            Frame::Plane => Some(PhasePoint::new(self.location.0, self.location.1)),
            Frame::Chart(_) => None,
        }
    }

    pub fn chart_point(&self) -> Option<ChartPoint> {
        match self.frame {
            Frame::Chart(ch) => Some(ChartPoint::new(ch, self.location.1, self.location.0)),
            Frame::Plane => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let loc = match self.frame {
            Frame::Plane => serde_json::json!({"phi": self.location.0, "psi": self.location.1}),
            Frame::Chart(_) => serde_json::json!({"lambda": self.location.0, "x": self.location.1}),
        };
        serde_json::json!({
            "id": self.id.name(),
            "frame": self.frame.name(),
            "location": loc,
            "system": self.system,
            "eigenvalues": self.eigenvalues.iter().map(|z| serde_json::json!({"re": z.re, "im": z.im})).collect::<Vec<_>>(),
            "class": self.klass.name(),
        })
    }
}

/// Eigenvalues of a real 2x2 matrix; real pairs come sorted ascending.
pub fn eigenvalues2(j: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // avoid cancellation in the smaller root
        let q = 0.5 * (tr + tr.signum() * s);
        let (a, b) = if q != 0.0 {
            (q, det / q)
        } else {
            (0.5 * (tr + s), 0.5 * (tr - s))
        };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, -im), Complex64::new(0.5 * tr, im)]
    }
}

fn eigenvector(j: &[[f64; 2]; 2], l: f64) -> [f64; 2] {
    // null vector of J - l I from its larger row
    let r1 = [j[0][0] - l, j[0][1]];
    let r2 = [j[1][0], j[1][1] - l];
    let n1 = r1[0].hypot(r1[1]);
    let n2 = r2[0].hypot(r2[1]);
    let mut v = if n1 == 0.0 && n2 == 0.0 {
        [1.0, 0.0]
    } else if n1 >= n2 {
        [r1[1], -r1[0]]
    } else {
        [r2[1], -r2[0]]
    };
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        v = [-v[0], -v[1]];
    }
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn frob(j: &[[f64; 2]; 2]) -> f64 {
    j.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Class from eigenvalues; eigenvalues with `|Re| < 1e-9 * |J|` count as zero.
pub fn class_from_eigen(ev: &[Complex64; 2], jnorm: f64, at_infinity: bool) -> StabilityClass {
    let tol = 1e-9 * jnorm.max(1e-300);
    if ev.iter().any(|z| z.re.abs() < tol) {
        return StabilityClass::CenterManifold;
    }
    if ev[0].im != 0.0 {
        return if ev[0].re < 0.0 { StabilityClass::StableFocus } else { StabilityClass::Source };
    }
    match (ev[0].re > 0.0, ev[1].re > 0.0) {
        (true, true) => StabilityClass::Source,
        (false, false) => {
            if at_infinity {
                StabilityClass::Sink
            } else {
                StabilityClass::StableNode
            }
        }
        _ => StabilityClass::Saddle,
    }
}

fn build(id: EqId, frame: Frame, location: (f64, f64), system: &'static str, j: [[f64; 2]; 2]) -> Equilibrium {
    let mut e = Equilibrium {
        id,
        frame,
        location,
        system,
        jacobian: j,
        eigenvalues: [Complex64::new(0.0, 0.0); 2],
        eigenvectors: None,
        klass: StabilityClass::CenterManifold,
    };
    classify_in_place(&mut e);
    e
}

fn classify_in_place(e: &mut Equilibrium) {
    let ev = eigenvalues2(&e.jacobian);
    e.eigenvalues = ev;
    e.eigenvectors = if ev[0].im == 0.0 {
        Some([eigenvector(&e.jacobian, ev[0].re), eigenvector(&e.jacobian, ev[1].re)])
    } else {
        None
    };
    e.klass = class_from_eigen(&ev, frob(&e.jacobian), matches!(e.frame, Frame::Chart(_)));
}

/// Recomputes eigen-data and class of `eq` from its Jacobian.
pub fn classify(params: &Params, eq: &Equilibrium) -> Result<Equilibrium> {
    if params.p == 1.0 {
        return Err(Error::CriticalExponent);
    }
    let mut e = eq.clone();
    classify_in_place(&mut e);
    Ok(e)
}

/// All equilibria in closed form, classified. `E1` is only present for
/// `delta = 1` and `mu > 0`.
pub fn list_equilibria(params: &Params) -> Result<Vec<Equilibrium>> {
    if params.p == 1.0 {
        return Err(Error::CriticalExponent);
    }
    let pr = params;
    let mut out = Vec::with_capacity(5);
    let e0 = PhasePoint::new(0.0, 0.0);
    out.push(build(EqId::E0, Frame::Plane, (0.0, 0.0), "DESINGULARIZED", jacobian(pr, SystemKind::Desingularized, e0)?));
    if let Some(level) = pr.e1_level() {
        let pt = PhasePoint::new(level, 0.0);
        out.push(build(EqId::E1, Frame::Plane, (level, 0.0), "ORIGINAL", jacobian(pr, SystemKind::Original, pt)?));
    }
    let e2 = PhasePoint::new(0.0, pr.c / pr.gamma);
    out.push(build(EqId::E2, Frame::Plane, (0.0, e2.psi), "DESINGULARIZED", jacobian(pr, SystemKind::Desingularized, e2)?));
    let o3 = ChartPoint::new(ChartId::U2, 0.0, 0.0);
    out.push(build(EqId::E3, Frame::Chart(ChartId::U2), (0.0, 0.0), "U2", chart_jacobian(pr, o3)));
    let o4 = ChartPoint::new(ChartId::V2, 0.0, 0.0);
    out.push(build(EqId::E4, Frame::Chart(ChartId::V2), (0.0, 0.0), "V2", chart_jacobian(pr, o4)));
    Ok(out)
}

/// Remarks about equilibria that are absent or not isolated.
pub fn equilibrium_notes(params: &Params) -> Vec<String> {
    let mut notes = Vec::new();
    if params.delta == 1 && params.mu == 0.0 {
        notes.push("E1 absent: with mu = 0 the level 1/mu escapes to infinity".to_string());
    }
    if params.has_equilibrium_line() {
        notes.push("mu = 0, delta = 0: the whole line psi = 0 consists of equilibria; E0 is not isolated".to_string());
    }
    notes
}

pub fn find(eqs: &[Equilibrium], id: EqId) -> Option<&Equilibrium> {
    eqs.iter().find(|e| e.id == id)
}

/// Truncated graph `psi = h(phi)` of the centre manifold at the origin and
/// the reduced flow `dphi/ds` on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterManifoldModel {
    /// `(power, coefficient)` pairs of `h`.
    pub graph: Vec<(i32, f64)>,
    /// `(power, coefficient)` pairs of the reduced flow.
    pub flow: Vec<(i32, f64)>,
    /// First neglected power of the graph.
    pub graph_order: i32,
    /// First neglected power of the reduced flow.
    pub flow_order: i32,
}

fn poly(terms: &[(i32, f64)], x: f64) -> f64 {
    terms.iter().map(|&(n, a)| a * x.powi(n)).sum()
}

fn dpoly(terms: &[(i32, f64)], x: f64) -> f64 {
    terms.iter().map(|&(n, a)| a * n as f64 * x.powi(n - 1)).sum()
}

impl CenterManifoldModel {
    pub fn graph_at(&self, phi: f64) -> f64 {
        poly(&self.graph, phi)
    }

    pub fn graph_slope(&self, phi: f64) -> f64 {
        dpoly(&self.graph, phi)
    }

    /// `dphi/ds` on the manifold.
    pub fn flow_at(&self, phi: f64) -> f64 {
        poly(&self.flow, phi)
    }

    /// `dphi/dxi = (dphi/ds) / phi`.
    pub fn flow_xi(&self, phi: f64) -> f64 {
        self.flow.iter().map(|&(n, a)| a * phi.powi(n - 1)).sum()
    }

    /// Whether small `phi > 0` moves away from the origin.
    pub fn repelling(&self) -> bool {
        self.flow.first().map(|&(_, a)| a > 0.0).unwrap_or(false)
    }
}

pub fn center_manifold(params: &Params) -> CenterManifoldModel {
    let (p, c, k, mu) = (params.p, params.c, params.k, params.mu);
    if params.delta == 0 {
        CenterManifoldModel {
            graph: vec![(2, -k / c)],
            flow: vec![(3, -k / c)],
            graph_order: 4,
            flow_order: 5,
        }
    } else {
        let a2 = -(p / (c * c * c)) * (mu * c * c + 1.0);
        CenterManifoldModel {
            graph: vec![(1, p / c), (2, a2)],
            flow: vec![(2, p / c), (3, a2)],
            graph_order: 3,
            flow_order: 4,
        }
    }
}
