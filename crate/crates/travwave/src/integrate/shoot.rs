//! Seeding trajectories on invariant manifolds of the equilibria.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{integrate_from, Controls, Direction, Start, Trajectory};
use crate::compactify::ChartPoint;
use crate::equilibria::{center_manifold, EqId, Equilibrium, Frame, StabilityClass};
use crate::error::{Error, Result};
use crate::field::{PhasePoint, SystemKind};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Manifold {
    Unstable,
    Stable,
    CenterUnstable,
}

/// Chooses one orbit on the requested manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BranchSelector {
    /// Angle parameter in `[0, pi/2]` for two-dimensional manifolds, mapped
    /// through [`angle_to_invariant`] at chart nodes.
    Angle(f64),
    /// Value of the linear invariant `C = x / lambda^m` at a chart node.
    Invariant(f64),
    /// Along `+v` for a one-dimensional manifold with eigenvector `v`.
    Positive,
    /// Along `-v`.
    Negative,
}

/// Reference value of the invariant `C = phi psi^(m-1)` at the chart nodes,
/// built from the ordinate `|c/gamma|` of the saddle on the axis.
pub fn invariant_scale(params: &Params) -> f64 {
    match params.m {
        Some(m) => (params.c / params.gamma).abs().powf(m - 1.0),
        None => 1.0,
    }
}

/// `C = scale * tan(theta)^spread`; the default spread is `1/p`.
pub fn angle_to_invariant(params: &Params, theta: f64, spread: f64) -> f64 {
    if theta <= 0.0 {
        0.0
    } else if theta >= FRAC_PI_2 {
        f64::INFINITY
    } else {
        invariant_scale(params) * theta.tan().powf(spread)
    }
}

/// Seed at distance `eps` from a node at a chart origin whose `x`-rate is
/// `m` times its `lambda`-rate.
///
/// Linear orbits near the node are the curves `x = C lambda^m`; `C = 0` is
/// the axis `x = 0` and `C = inf` the circle at infinity. Returns `(lambda, x)`.
pub fn quadrant_seed(eps: f64, cc: f64, m: f64) -> (f64, f64) {
    if cc <= 0.0 {
        return (eps, 0.0);
    }
    if !cc.is_finite() {
        return (0.0, eps);
    }
    // bisection on ln(lambda) for lambda^2 + C^2 lambda^(2m) = eps^2
    let g = |u: f64| {
        let l = u.exp();
        l.hypot(cc * l.powf(m)) - eps
    };
    let (mut lo, mut hi) = (-740.0f64, eps.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let l = (0.5 * (lo + hi)).exp();
    (l, cc * l.powf(m))
}

fn start_at(eq: &Equilibrium, d: [f64; 2]) -> Result<Start> {
    match eq.frame {
        Frame::Plane => {
            let (phi, psi) = (eq.location.0 + d[0], eq.location.1 + d[1]);
            if phi < 0.0 {
                return Err(Error::Domain("seed leaves the half-plane phi >= 0".into()));
            }
            Ok(Start::Plane(PhasePoint::new(phi, psi)))
        }
        Frame::Chart(ch) => {
            let (l, x) = (eq.location.0 + d[0], eq.location.1 + d[1]);
            if l < 0.0 {
                return Err(Error::Domain("seed leaves the region lambda >= 0".into()));
            }
            Ok(Start::Chart(ChartPoint::new(ch, x, l)))
        }
    }
}

/// Integrates from `eq` + `eps` along the requested manifold: forward for
/// unstable and centre-unstable manifolds, backward for stable ones.
pub fn shoot(
    params: &Params,
    eq: &Equilibrium,
    manifold: Manifold,
    branch: BranchSelector,
    eps: f64,
    controls: &Controls,
) -> Result<Trajectory> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParam("shooting offset must be positive".into()));
    }
    let inconsistent = || {
        Error::Domain(format!("{:?} manifold is not available at {} ({})", manifold, eq.id.name(), eq.klass.name()))
    };
    let dir = match manifold {
        Manifold::Stable => Direction::Backward,
        _ => Direction::Forward,
    };
    let start = match manifold {
        Manifold::CenterUnstable => {
            if eq.id != EqId::E0 {
                return Err(inconsistent());
            }
            let cm = center_manifold(params);
            if !cm.repelling() {
                return Err(inconsistent());
            }
            Start::Plane(PhasePoint::new(eps, cm.graph_at(eps)))
        }
        Manifold::Unstable | Manifold::Stable => {
            let want_pos = manifold == Manifold::Unstable;
            let two_dim = matches!(
                (eq.klass, want_pos),
                (StabilityClass::Source, true)
                    | (StabilityClass::Sink, false)
                    | (StabilityClass::StableNode, false)
                    | (StabilityClass::StableFocus, false)
            );
            if two_dim {
                match (eq.frame, branch) {
                    (Frame::Chart(_), BranchSelector::Angle(_) | BranchSelector::Invariant(_)) => {
                        let cc = match branch {
                            BranchSelector::Angle(theta) => angle_to_invariant(params, theta, 1.0 / params.p),
                            BranchSelector::Invariant(cc) => cc,
                            _ => unreachable!(),
                        };
                        // chart origins have diagonal Jacobians: x-rate over lambda-rate
                        let m = eq.jacobian[1][1] / eq.jacobian[0][0];
                        let (l, x) = quadrant_seed(eps, cc, m);
                        start_at(eq, [l, x])?
                    }
                    (Frame::Plane, BranchSelector::Angle(theta)) => start_at(eq, [eps * theta.cos(), eps * theta.sin()])?,
                    _ => return Err(Error::InvalidParam("two-dimensional manifolds need an angle selector".into())),
                }
            } else {
                let vecs = eq.eigenvectors.ok_or_else(inconsistent)?;
                let idx = (0..2).find(|&i| {
                    let l = eq.eigenvalues[i].re;
                    if want_pos {
                        l > 0.0
                    } else {
                        l < 0.0
                    }
                });
                let idx = idx.ok_or_else(inconsistent)?;
                let v = vecs[idx];
                let s = match branch {
                    BranchSelector::Positive => 1.0,
                    BranchSelector::Negative => -1.0,
                    _ => return Err(Error::InvalidParam("one-dimensional manifolds need a sign selector".into())),
                };
                start_at(eq, [s * eps * v[0], s * eps * v[1]])?
            }
        }
    };
    integrate_from(params, SystemKind::Desingularized, start, dir, controls, Some(eq.id))
}
