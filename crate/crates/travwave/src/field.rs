//! Phase-plane vector fields.
//!
//! `ORIGINAL` is the first-order form of the profile ODE in the travelling
//! coordinate `xi`. `DESINGULARIZED` multiplies it by `phi` (time `s` with
//! `ds/dxi = 1/phi`), which removes the singular line `phi = 0`. `PmeAppB`
//! is the desingularized system of the plain porous-medium profile equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

/// A point `(phi, psi) = (u, u')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub phi: f64,
    pub psi: f64,
}

impl PhasePoint {
    pub fn new(phi: f64, psi: f64) -> Self {
        PhasePoint { phi, psi }
    }

    pub fn norm(&self) -> f64 {
        self.phi.hypot(self.psi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SystemKind {
    Original,
    Desingularized,
    PmeAppB,
}

impl SystemKind {
    /// Name of the independent variable.
    pub fn time_variable(&self) -> &'static str {
        match self {
            SystemKind::Original => "xi",
            _ => "s",
        }
    }
}

/// Velocity of `kind` at `pt`.
pub fn vector_field(params: &Params, kind: SystemKind, pt: PhasePoint) -> Result<(f64, f64)> {
    let PhasePoint { phi, psi } = pt;
    match kind {
        SystemKind::Original => {
            if phi == 0.0 {
                return Err(Error::Domain("original system is singular at phi = 0".into()));
            }
            Ok(original(params, phi, psi))
        }
        SystemKind::Desingularized => Ok(desingularized(params, phi, psi)),
        SystemKind::PmeAppB => Ok((phi * psi, -params.c * phi * psi)),
    }
}

#[inline]
pub(crate) fn original(pr: &Params, phi: f64, psi: f64) -> (f64, f64) {
    let inv = 1.0 / phi;
    (
        psi,
        -pr.c * inv * psi + pr.gamma * inv * psi * psi - pr.k * phi + pr.delta_f() * pr.p,
    )
}

#[inline]
pub(crate) fn desingularized(pr: &Params, phi: f64, psi: f64) -> (f64, f64) {
    (
        phi * psi,
        -pr.c * psi + pr.gamma * psi * psi - pr.k * phi * phi + pr.delta_f() * pr.p * phi,
    )
}

/// Analytic Jacobian `[[dF/dphi, dF/dpsi], [dG/dphi, dG/dpsi]]`.
pub fn jacobian(params: &Params, kind: SystemKind, pt: PhasePoint) -> Result<[[f64; 2]; 2]> {
    let PhasePoint { phi, psi } = pt;
    let pr = params;
    match kind {
        SystemKind::Original => {
            if phi == 0.0 {
                return Err(Error::Domain("original system is singular at phi = 0".into()));
            }
            let inv2 = 1.0 / (phi * phi);
            Ok([
                [0.0, 1.0],
                [
                    pr.c * psi * inv2 - pr.gamma * psi * psi * inv2 - pr.k,
                    (-pr.c + 2.0 * pr.gamma * psi) / phi,
                ],
            ])
        }
        SystemKind::Desingularized => Ok([
            [psi, phi],
            [-2.0 * pr.k * phi + pr.delta_f() * pr.p, -pr.c + 2.0 * pr.gamma * psi],
        ]),
        SystemKind::PmeAppB => Ok([[psi, phi], [-pr.c * psi, -pr.c * phi]]),
    }
}
