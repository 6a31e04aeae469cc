//! Poincare compactification: disk embedding, the charts `U1`, `U2`, `V2`
//! and the chart vector fields.
//!
//! Chart coordinates, all with `lambda = 0` on the circle at infinity:
//!
//! * `U2` (`psi > 0`): `x = phi/psi`, `lambda = 1/psi`.
//! * `V2` (`psi < 0`): `x = -phi/psi`, `lambda = -1/psi`, i.e. the `U2`
//!   formulas composed with the antipodal embedding, so `lambda > 0` again.
//! * `U1` (`phi > 0`): `x = psi/phi`, `lambda = 1/phi`.
//!
//! In every chart the time is rescaled by `dtau/ds = 1/lambda`. Substituting
//! the chart coordinates into the desingularized field gives
//!
//! ```text
//! U2: lambda' =  c l^2 - g l + k l x^2 - d p l^2 x,   x' =  x/p + c l x + k x^3 - d p l x^2
//! V2: lambda' =  c l^2 + g l - k l x^2 + d p l^2 x,   x' = -x/p + c l x - k x^3 + d p l x^2
//! U1: lambda' = -l x,                                  x' = -x^2/p - k - c l x + d p l
//! ```
//!
//! The `V2` origin therefore has eigenvalues `(gamma, -1/p)`: a sink for
//! `0 < p < 1` and a saddle for `p > 1`. On `lambda = 0` the `U1` field reduces
//! to `x' = -x^2/p - k`, which has no zero when `k > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PhasePoint;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum ChartId {
    U1,
    U2,
    V2,
}

impl ChartId {
    pub fn name(&self) -> &'static str {
        match self {
            ChartId::U1 => "U1",
            ChartId::U2 => "U2",
            ChartId::V2 => "V2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: ChartId,
    pub x: f64,
    pub lambda: f64,
}

impl ChartPoint {
    pub fn new(chart: ChartId, x: f64, lambda: f64) -> Self {
        ChartPoint { chart, x, lambda }
    }
}

/// Upper-hemisphere coordinates `(y1, y2)`; `y3` is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub y1: f64,
    pub y2: f64,
}

impl DiskPoint {
    pub fn norm(&self) -> f64 {
        self.y1.hypot(self.y2)
    }

    pub fn dist(&self, o: &DiskPoint) -> f64 {
        (self.y1 - o.y1).hypot(self.y2 - o.y2)
    }
}

pub fn to_disk(pt: PhasePoint) -> DiskPoint {
    let d = (pt.phi * pt.phi + pt.psi * pt.psi + 1.0).sqrt();
    DiskPoint { y1: pt.phi / d, y2: pt.psi / d }
}

/// Disk image of a chart point; also defined on `lambda = 0`.
pub fn chart_to_disk(cp: ChartPoint) -> DiskPoint {
    let r = (1.0 + cp.x * cp.x + cp.lambda * cp.lambda).sqrt();
    match cp.chart {
        ChartId::U2 => DiskPoint { y1: cp.x / r, y2: 1.0 / r },
        ChartId::V2 => DiskPoint { y1: cp.x / r, y2: -1.0 / r },
        ChartId::U1 => DiskPoint { y1: 1.0 / r, y2: cp.x / r },
    }
}

pub fn chart_map(pt: PhasePoint, chart: ChartId) -> Result<ChartPoint> {
    let PhasePoint { phi, psi } = pt;
    match chart {
        ChartId::U2 => {
            if !(psi > 0.0) {
                return Err(Error::Domain("U2 needs psi > 0".into()));
            }
            Ok(ChartPoint::new(chart, phi / psi, 1.0 / psi))
        }
        ChartId::V2 => {
            if !(psi < 0.0) {
                return Err(Error::Domain("V2 needs psi < 0".into()));
            }
            Ok(ChartPoint::new(chart, -phi / psi, -1.0 / psi))
        }
        ChartId::U1 => {
            if !(phi > 0.0) {
                return Err(Error::Domain("U1 needs phi > 0".into()));
            }
            Ok(ChartPoint::new(chart, psi / phi, 1.0 / phi))
        }
    }
}

pub fn chart_unmap(cp: ChartPoint) -> Result<PhasePoint> {
    if cp.lambda == 0.0 {
        return Err(Error::Domain("lambda = 0 is the circle at infinity".into()));
    }
    let inv = 1.0 / cp.lambda;
    Ok(match cp.chart {
        ChartId::U2 => PhasePoint::new(cp.x * inv, inv),
        ChartId::V2 => PhasePoint::new(cp.x * inv, -inv),
        ChartId::U1 => PhasePoint::new(inv, cp.x * inv),
    })
}

/// Direct change of chart, valid on `lambda = 0` as well.
pub fn change_chart(cp: ChartPoint, to: ChartId) -> Result<ChartPoint> {
    use ChartId::*;
    if cp.chart == to {
        return Ok(cp);
    }
    let bad = || Error::Domain(format!("cannot move {:?} point to {:?}", cp.chart, to));
    match (cp.chart, to) {
        (U2, U1) | (V2, U1) => {
            if !(cp.x > 0.0) {
                return Err(bad());
            }
            let sign = if cp.chart == U2 { 1.0 } else { -1.0 };
            Ok(ChartPoint::new(U1, sign / cp.x, cp.lambda / cp.x))
        }
        (U1, U2) => {
            if !(cp.x > 0.0) {
                return Err(bad());
            }
            Ok(ChartPoint::new(U2, 1.0 / cp.x, cp.lambda / cp.x))
        }
        (U1, V2) => {
            if !(cp.x < 0.0) {
                return Err(bad());
            }
            Ok(ChartPoint::new(V2, -1.0 / cp.x, -cp.lambda / cp.x))
        }
        _ => Err(bad()),
    }
}

/// Chart field `(dlambda/dtau, dx/dtau)`.
pub fn chart_vector_field(params: &Params, cp: ChartPoint) -> Result<(f64, f64)> {
    if cp.lambda < 0.0 {
        return Err(Error::Domain("chart fields are used on lambda >= 0".into()));
    }
    Ok(chart_field_raw(params, cp.chart, cp.lambda, cp.x))
}

/// Chart field as a polynomial in `(lambda, x)`, also for `lambda < 0`;
/// finite-difference oracles need both sides of the boundary.
#[inline]
pub fn chart_field_raw(pr: &Params, chart: ChartId, l: f64, x: f64) -> (f64, f64) {
    let (c, g, k, dp) = (pr.c, pr.gamma, pr.k, pr.delta_f() * pr.p);
    match chart {
        ChartId::U2 => (
            c * l * l - g * l + k * l * x * x - dp * l * l * x,
            x / pr.p + c * l * x + k * x * x * x - dp * l * x * x,
        ),
        ChartId::V2 => (
            c * l * l + g * l - k * l * x * x + dp * l * l * x,
            -x / pr.p + c * l * x - k * x * x * x + dp * l * x * x,
        ),
        ChartId::U1 => (-l * x, -x * x / pr.p - k - c * l * x + dp * l),
    }
}

/// Analytic Jacobian of the chart field, variables ordered `(lambda, x)`.
pub fn chart_jacobian(params: &Params, cp: ChartPoint) -> [[f64; 2]; 2] {
    let pr = params;
    let (c, g, k, dp) = (pr.c, pr.gamma, pr.k, pr.delta_f() * pr.p);
    let (l, x) = (cp.lambda, cp.x);
    match cp.chart {
        ChartId::U2 => [
            [2.0 * c * l - g + k * x * x - 2.0 * dp * l * x, 2.0 * k * l * x - dp * l * l],
            [c * x - dp * x * x, 1.0 / pr.p + c * l + 3.0 * k * x * x - 2.0 * dp * l * x],
        ],
        ChartId::V2 => [
            [2.0 * c * l + g - k * x * x + 2.0 * dp * l * x, -2.0 * k * l * x + dp * l * l],
            [c * x + dp * x * x, -1.0 / pr.p + c * l - 3.0 * k * x * x + 2.0 * dp * l * x],
        ],
        ChartId::U1 => [[-x, -l], [-c * x + dp, -2.0 * x / pr.p - c * l]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{vector_field, SystemKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn disk_examples() {
        assert_eq!(to_disk(PhasePoint::new(0.0, 0.0)), DiskPoint { y1: 0.0, y2: 0.0 });
        let d = to_disk(PhasePoint::new(2.0, 4.0));
        let r = 21f64.sqrt();
        assert!(close(d.y1, 2.0 / r, 1e-15) && close(d.y2, 4.0 / r, 1e-15));
        assert!(to_disk(PhasePoint::new(1e150, -1e150)).norm() <= 1.0);
    }

    #[test]
    fn chart_examples() {
        let cp = chart_map(PhasePoint::new(2.0, 4.0), ChartId::U2).unwrap();
        assert_eq!((cp.x, cp.lambda), (0.5, 0.25));
        assert_eq!(chart_unmap(cp).unwrap(), PhasePoint::new(2.0, 4.0));

        let v = chart_map(PhasePoint::new(3.0, -2.0), ChartId::V2).unwrap();
        assert_eq!((v.x, v.lambda), (1.5, 0.5));
        assert_eq!(chart_unmap(v).unwrap(), PhasePoint::new(3.0, -2.0));

        let u = chart_map(PhasePoint::new(2.0, 4.0), ChartId::U1).unwrap();
        assert_eq!((u.x, u.lambda), (2.0, 0.5));
        assert!(chart_map(PhasePoint::new(2.0, -1.0), ChartId::U2).is_err());
        assert!(chart_map(PhasePoint::new(2.0, 1.0), ChartId::V2).is_err());
        assert!(chart_map(PhasePoint::new(0.0, 1.0), ChartId::U1).is_err());
        assert!(chart_unmap(ChartPoint::new(ChartId::U2, 1.0, 0.0)).is_err());
    }

    #[test]
    fn chart_changes_agree_with_plane_round_trip() {
        let pts = [PhasePoint::new(3.0, 5.0), PhasePoint::new(7.0, -2.0), PhasePoint::new(0.5, 0.1)];
        for pt in pts {
            let u1 = chart_map(pt, ChartId::U1).unwrap();
            let other = if pt.psi > 0.0 { ChartId::U2 } else { ChartId::V2 };
            let direct = change_chart(u1, other).unwrap();
            let via = chart_map(pt, other).unwrap();
            assert!(close(direct.x, via.x, 1e-14) && close(direct.lambda, via.lambda, 1e-14));
            let back = change_chart(direct, ChartId::U1).unwrap();
            assert!(close(back.x, u1.x, 1e-14) && close(back.lambda, u1.lambda, 1e-14));
            let d1 = chart_to_disk(u1);
            let d0 = to_disk(pt);
            assert!(close(d1.y1, d0.y1, 1e-14) && close(d1.y2, d0.y2, 1e-14));
        }
    }

    #[test]
    fn u2_field_examples() {
        let pr = Params::new(0.5, 1.0, 0, 1.0).unwrap();
        assert_eq!(chart_vector_field(&pr, ChartPoint::new(ChartId::U2, 0.0, 0.0)).unwrap(), (0.0, 0.0));
        assert_eq!(chart_vector_field(&pr, ChartPoint::new(ChartId::U2, 1.0, 0.0)).unwrap(), (0.0, 2.5));
        let j = chart_jacobian(&pr, ChartPoint::new(ChartId::U2, 0.0, 0.0));
        assert_eq!(j, [[1.0, 0.0], [0.0, 2.0]]);
        assert!(chart_vector_field(&pr, ChartPoint::new(ChartId::U2, 0.0, -1.0)).is_err());
    }

    #[test]
    fn v2_origin_is_a_sink_below_critical_exponent() {
        for &p in &[0.25, 0.5, 0.75] {
            let pr = Params::new(p, 1.0, 1, 1.0).unwrap();
            let j = chart_jacobian(&pr, ChartPoint::new(ChartId::V2, 0.0, 0.0));
            assert!(j[0][0] < 0.0 && j[1][1] < 0.0 && j[0][1] == 0.0 && j[1][0] == 0.0);
        }
        let pr = Params::new(2.0, 1.0, 1, 1.0).unwrap();
        let j = chart_jacobian(&pr, ChartPoint::new(ChartId::V2, 0.0, 0.0));
        assert!(j[0][0] > 0.0 && j[1][1] < 0.0);
    }

    /// Push the desingularized field through the chart map and rescale time.
    fn pushed(pr: &Params, chart: ChartId, pt: PhasePoint) -> (f64, f64) {
        let (f, g) = vector_field(pr, SystemKind::Desingularized, pt).unwrap();
        let (phi, psi) = (pt.phi, pt.psi);
        match chart {
            ChartId::U2 => {
                let l = 1.0 / psi;
                let dl = -g / (psi * psi);
                let dx = f / psi - phi * g / (psi * psi);
                (l * dl, l * dx)
            }
            ChartId::V2 => {
                let l = -1.0 / psi;
                let dl = g / (psi * psi);
                let dx = -f / psi + phi * g / (psi * psi);
                (l * dl, l * dx)
            }
            ChartId::U1 => {
                let l = 1.0 / phi;
                let dl = -f / (phi * phi);
                let dx = g / phi - psi * f / (phi * phi);
                (l * dl, l * dx)
            }
        }
    }

    #[test]
    fn conjugacy_with_plane_field() {
        let pr = Params::new(0.6, 1.3, 1, 0.9).unwrap();
        for &(phi, psi) in &[(0.3, 2.0), (4.0, 0.5), (1.0, -3.0), (0.2, -0.7), (5.0, 5.0)] {
            let pt = PhasePoint::new(phi, psi);
            let chart = if psi > 0.0 { ChartId::U2 } else { ChartId::V2 };
            for ch in [chart, ChartId::U1] {
                let cp = chart_map(pt, ch).unwrap();
                let got = chart_vector_field(&pr, cp).unwrap();
                let want = pushed(&pr, ch, pt);
                assert!(close(got.0, want.0, 1e-12) && close(got.1, want.1, 1e-12), "{ch:?} {pt:?}");
            }
        }
    }
}
