//! Stability tables across the regimes of `p` and the transcritical
//! bifurcation of the boundary dynamics at `gamma = 0`.
//!
//! On the invariant line `x = 0` of chart U2 the field reduces to the scalar
//! flow `lambda' = (c lambda - gamma) lambda`. Its two equilibrium branches,
//! `lambda = 0` (the chart origin, E3) and `lambda = gamma / c` (E2 seen from
//! infinity, at `psi = c / gamma`), cross at `gamma = 0` and exchange
//! stability there.

use std::fmt::Write as _;

use serde::Serialize;

use crate::compactify::{chart_field_raw, chart_jacobian, ChartId, ChartPoint};
use crate::equilibria::{list_equilibria, EqId, Frame, StabilityClass};
use crate::error::{Error, Result};
use crate::params::Params;

/// One equilibrium at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub p: f64,
    pub mu: f64,
    pub c: f64,
    pub delta: u8,
    pub id: EqId,
    pub frame: Frame,
    pub klass: StabilityClass,
    /// `(phi, psi)` in the plane, `(lambda, x)` in a chart.
    pub location: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `0 < p < 1`, `gamma < 0`.
    Sub,
    /// `p > 1`, `0 < gamma < 1`.
    Super,
}

impl Regime {
    pub fn of(p: f64) -> Regime {
        if p < 1.0 {
            Regime::Sub
        } else {
            Regime::Super
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Sub => "0<p<1",
            Regime::Super => "p>1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityTable {
    pub rows: Vec<StabilityRow>,
    /// Violations of the regime rules; empty when the table is consistent.
    pub violations: Vec<String>,
}

impl StabilityTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,mu,c,delta,equilibrium,frame,class,loc_a,loc_b\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.p,
                r.mu,
                r.c,
                r.delta,
                r.id.name(),
                r.frame.name(),
                r.klass.name(),
                r.location.0,
                r.location.1
            );
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "p": r.p, "mu": r.mu, "c": r.c, "delta": r.delta,
                    "equilibrium": r.id.name(), "frame": r.frame.name(),
                    "class": r.klass.name(), "location": [r.location.0, r.location.1],
                })
            })
            .collect();
        serde_json::json!({"rows": rows, "violations": self.violations})
    }

    /// Classes of `id` seen in `regime`, in first-seen order.
    pub fn classes(&self, regime: Regime, id: EqId) -> Vec<StabilityClass> {
        let mut out = Vec::new();
        for r in self.rows.iter().filter(|r| r.id == id && Regime::of(r.p) == regime) {
            if !out.contains(&r.klass) {
                out.push(r.klass);
            }
        }
        out
    }
}

/// Classifies every equilibrium over the grid and checks the regime rules:
/// E3 SOURCE and E4 SINK for `0 < p < 1`, both SADDLE for `p > 1`, E2 on
/// `psi = pc/(p-1)`, E1 a node iff `D >= 0`, and classes constant within a
/// regime for every equilibrium except E1, whose class follows `D`.
pub fn stability_scan(p_list: &[f64], mu_list: &[f64], c_list: &[f64], delta_list: &[i64]) -> Result<StabilityTable> {
    if p_list.iter().any(|&p| p == 1.0) {
        return Err(Error::CriticalExponent);
    }
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &p in p_list {
        for &mu in mu_list {
            for &c in c_list {
                for &delta in delta_list {
                    let pr = Params::new(p, mu, delta, c)?;
                    for e in list_equilibria(&pr)? {
                        let row = StabilityRow {
                            p,
                            mu,
                            c,
                            delta: pr.delta,
                            id: e.id,
                            frame: e.frame,
                            klass: e.klass,
                            location: e.location,
                        };
                        if let Some(v) = rule_violation(&pr, &row) {
                            violations.push(v);
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    let mut table = StabilityTable { rows, violations };
    for regime in [Regime::Sub, Regime::Super] {
        for id in [EqId::E0, EqId::E2, EqId::E3, EqId::E4] {
            let cls = table.classes(regime, id);
            if cls.len() > 1 {
                table.violations.push(format!("{} takes several classes for {}: {:?}", id.name(), regime.name(), cls));
            }
        }
    }
    Ok(table)
}

fn rule_violation(pr: &Params, r: &StabilityRow) -> Option<String> {
    use StabilityClass::*;
    let sub = pr.p < 1.0;
    let at = format!("p={} mu={} c={} delta={}", pr.p, pr.mu, pr.c, pr.delta);
    let bad = |what: &str| Some(format!("{} {what} at {at}, got {}", r.id.name(), r.klass.name()));
    match r.id {
        EqId::E3 if r.klass != if sub { Source } else { Saddle } => bad("class"),
        EqId::E4 if r.klass != if sub { Sink } else { Saddle } => bad("class"),
        EqId::E2 => {
            let psi = pr.p * pr.c / (pr.p - 1.0);
            let tol = 1e-12 * psi.abs().max(1.0);
            if r.frame != Frame::Plane || r.location.0 != 0.0 || (r.location.1 - psi).abs() > tol {
                return Some(format!("E2 off psi = pc/(p-1) = {psi} at {at}: {:?}", r.location));
            }
            let want = if sub { Saddle } else { Source };
            (r.klass != want).then(|| format!("E2 class at {at}, got {}", r.klass.name()))
        }
        EqId::E1 => {
            let want = if pr.disc >= 0.0 { StableNode } else { StableFocus };
            (r.klass != want).then(|| format!("E1 class at {at}, got {}", r.klass.name()))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchId {
    /// `lambda = 0`.
    Zero,
    /// `lambda = gamma / c`.
    Slant,
}

impl BranchId {
    pub fn name(&self) -> &'static str {
        match self {
            BranchId::Zero => "ZERO",
            BranchId::Slant => "SLANT",
        }
    }

    /// Equilibrium the branch represents away from the crossing.
    pub fn equilibrium(&self) -> EqId {
        match self {
            BranchId::Zero => EqId::E3,
            BranchId::Slant => EqId::E2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub gamma: f64,
    /// `p = 1/(1 - gamma)`; infinite at `gamma = 1`.
    pub p: f64,
    pub lambda: f64,
    pub eigenvalue: f64,
    /// `None` at the crossing `gamma = 0`.
    pub regime: Option<Regime>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationBranch {
    pub id: BranchId,
    pub c: f64,
    pub samples: Vec<BranchSample>,
}

/// Scalar field of the boundary dynamics, `(c lambda - gamma) lambda`.
pub fn restricted_field(c: f64, gamma: f64, lambda: f64) -> f64 {
    (c * lambda - gamma) * lambda
}

/// Exact derivative of [`restricted_field`] in `lambda`.
pub fn restricted_slope(c: f64, gamma: f64, lambda: f64) -> f64 {
    2.0 * c * lambda - gamma
}

/// `p` with `(p-1)/p = gamma`.
pub fn p_of_gamma(gamma: f64) -> f64 {
    if gamma == 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - gamma)
    }
}

/// The two closed-form branches on `n` equally spaced values of `gamma`.
pub fn transcritical_branches(
    c: f64,
    gamma_range: (f64, f64),
    n_samples: usize,
) -> Result<(BifurcationBranch, BifurcationBranch)> {
    let (g0, g1) = gamma_range;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParam(format!("c must be positive, got {c}")));
    }
    if !(g0 < 0.0 && g1 > 0.0) {
        return Err(Error::Domain(format!("gamma range [{g0}, {g1}] does not straddle 0")));
    }
    if g1 > 1.0 {
        return Err(Error::Domain(format!("gamma = {g1} exceeds 1, which no p > 0 reaches")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParam("at least two samples are needed".into()));
    }
    let gammas: Vec<f64> =
        (0..n_samples).map(|i| g0 + (g1 - g0) * i as f64 / (n_samples - 1) as f64).collect();
    let branch = |id: BranchId| {
        let samples = gammas
            .iter()
            .map(|&g| {
                let lambda = match id {
                    BranchId::Zero => 0.0,
                    BranchId::Slant => g / c,
                };
                BranchSample {
                    gamma: g,
                    p: p_of_gamma(g),
                    lambda,
                    // -gamma on ZERO, +gamma on SLANT
                    eigenvalue: match id {
                        BranchId::Zero => 0.0 - g,
                        BranchId::Slant => g,
                    },
                    regime: (g != 0.0).then(|| if g < 0.0 { Regime::Sub } else { Regime::Super }),
                }
            })
            .collect();
        BifurcationBranch { id, c, samples }
    };
    Ok((branch(BranchId::Zero), branch(BranchId::Slant)))
}

/// Branch CSV with header `gamma,p,lambda,eigenvalue,branch`.
pub fn branches_csv(branches: &[&BifurcationBranch]) -> String {
    let mut s = String::from("gamma,p,lambda,eigenvalue,branch\n");
    for b in branches {
        for x in &b.samples {
            let _ = writeln!(s, "{},{},{},{},{}", x.gamma, x.p, x.lambda, x.eigenvalue, b.id.name());
        }
    }
    s
}

/// Central-difference slope of the scalar field, the oracle for the branch
/// eigenvalues. The field is quadratic, so the difference is exact up to
/// rounding.
pub fn fd_slope(c: f64, gamma: f64, lambda: f64, h: f64) -> f64 {
    (restricted_field(c, gamma, lambda + h) - restricted_field(c, gamma, lambda - h)) / (2.0 * h)
}

/// Norm of the full U2 field at the SLANT point `(gamma/c, 0)` and the
/// `lambda`-direction entry of its Jacobian there.
pub fn slant_in_full_field(gamma: f64, mu: f64, delta: i64, c: f64) -> Result<(f64, f64)> {
    let p = p_of_gamma(gamma);
    if !p.is_finite() {
        return Err(Error::Domain("gamma = 1 has no finite p".into()));
    }
    let pr = Params::for_bifurcation(p, mu, delta, c)?;
    let cp = ChartPoint::new(ChartId::U2, 0.0, gamma / c);
    // lambda = gamma/c is negative for gamma < 0, so use the polynomial field
    let (dl, dx) = chart_field_raw(&pr, ChartId::U2, cp.lambda, cp.x);
    let j = chart_jacobian(&pr, cp);
    Ok((dl.hypot(dx), j[0][0]))
}
