//! Problem parameters and the coefficients derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(p, mu, delta, c)` with the derived coefficients
/// `gamma = (p-1)/p`, `k = p*mu`, `m = 1/(1-p)` and `D = mu^2 c^2 - 4k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub mu: f64,
    pub delta: u8,
    pub c: f64,
    pub gamma: f64,
    pub k: f64,
    /// Only defined for `0 < p < 1`.
    pub m: Option<f64>,
    pub disc: f64,
}

impl Params {
    /// Validates the inputs and fills the derived fields. `p = 1` is refused.
    pub fn new(p: f64, mu: f64, delta: i64, c: f64) -> Result<Self> {
        Self::build(p, mu, delta, c, false)
    }

    /// Same as [`Params::new`] but lets `p = 1` through for bifurcation work.
    pub fn for_bifurcation(p: f64, mu: f64, delta: i64, c: f64) -> Result<Self> {
        Self::build(p, mu, delta, c, true)
    }

    fn build(p: f64, mu: f64, delta: i64, c: f64, allow_critical: bool) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParam(format!("p must be positive, got {p}")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParam(format!("mu must be nonnegative, got {mu}")));
        }
        if delta != 0 && delta != 1 {
            return Err(Error::InvalidParam(format!("delta must be 0 or 1, got {delta}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParam(format!("c must be positive, got {c}")));
        }
        if p == 1.0 && !allow_critical {
            return Err(Error::CriticalExponent);
        }
        let gamma = (p - 1.0) / p;
        let k = p * mu;
        let m = if p < 1.0 { Some(1.0 / (1.0 - p)) } else { None };
        let disc = mu * mu * c * c - 4.0 * k;
        Ok(Params { p, mu, delta: delta as u8, c, gamma, k, m, disc })
    }

    pub fn delta_f(&self) -> f64 {
        self.delta as f64
    }

    /// `0 < p < 1`.
    pub fn is_subcritical(&self) -> bool {
        self.p < 1.0
    }

    /// The E1 ordinate `1/mu`, present only for `delta = 1` and `mu > 0`.
    pub fn e1_level(&self) -> Option<f64> {
        if self.delta == 1 && self.mu > 0.0 {
            Some(1.0 / self.mu)
        } else {
            None
        }
    }

    /// With `mu = 0` and `delta = 0` the whole axis `psi = 0` consists of equilibria.
    pub fn has_equilibrium_line(&self) -> bool {
        self.k == 0.0 && self.delta == 0
    }

    /// JSON object with the inputs at top level and derived values under `"derived"`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "mu": self.mu,
            "delta": self.delta,
            "c": self.c,
            "derived": {
                "gamma": self.gamma,
                "k": self.k,
                "m": self.m,
                "D": self.disc,
            }
        })
    }

    /// Reads the object written by [`Params::to_json`]; derived values are recomputed.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let get = |key: &str| {
            v.get(key)
                .and_then(|x| x.as_f64())
                .ok_or_else(|| Error::InvalidParam(format!("missing field {key}")))
        };
        let delta = v
            .get("delta")
            .and_then(|x| x.as_i64())
            .ok_or_else(|| Error::InvalidParam("missing field delta".into()))?;
        Params::new(get("p")?, get("mu")?, delta, get("c")?)
    }
}
