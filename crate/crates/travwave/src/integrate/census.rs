//! Connecting-orbit census for `0 < p < 1`.
//!
//! The unstable manifold of the source at the top of the disk is scanned by
//! its angle selector. Runs of neighbouring angles with the same target are
//! families; each change of target is bisected and the separating saddle is
//! recorded as a unique connection, witnessed by the saddle's stable branch
//! integrated backward and then reversed. For `delta = 1` the centre-unstable
//! branch of the origin is added.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use serde_json::json;

use super::{angle_to_invariant, endpoint_of, shoot, BranchSelector, Controls, Manifold, Termination, Trajectory};
use crate::compactify::to_disk;
use crate::equilibria::{find, list_equilibria, EqId, Equilibrium, Frame, StabilityClass};
use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Multiplicity {
    Unique,
    Family,
}

impl Multiplicity {
    pub fn name(&self) -> &'static str {
        match self {
            Multiplicity::Unique => "UNIQUE",
            Multiplicity::Family => "FAMILY",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub from: EqId,
    pub to: EqId,
    pub multiplicity: Multiplicity,
    pub witness: Trajectory,
    /// Angle interval of the selector that produced the record, if any.
    pub selector: Option<(f64, f64)>,
}

/// A bisected change of target along the angle scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub lower: f64,
    pub upper: f64,
    pub below: EqId,
    pub above: EqId,
    /// Saddle the bracketing orbits pass closest to.
    pub saddle: EqId,
    /// Disk distance from the lower bracketing orbit to that saddle.
    pub saddle_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCensus {
    pub params: Params,
    pub records: Vec<Connection>,
    /// Scan angles and their targets.
    pub scan: Vec<(f64, EqId)>,
    pub thresholds: Vec<Threshold>,
    /// Disk distance between the unique saddle connection and the
    /// centre-unstable connection (`delta = 1`).
    pub separation: Option<f64>,
    /// Exponent of the angle-to-invariant map used by the scan.
    pub spread: f64,
    pub notes: Vec<String>,
}

impl ConnectionCensus {
    pub fn find(&self, from: EqId, to: EqId) -> Option<&Connection> {
        self.records.iter().find(|r| r.from == from && r.to == to)
    }

    /// Census JSON array; `witness_file(i)` names the witness of record `i`.
    pub fn to_json(&self, witness_file: impl Fn(usize) -> String) -> serde_json::Value {
        serde_json::Value::Array(
            self.records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    json!({
                        "from": r.from.name(),
                        "to": r.to.name(),
                        "multiplicity": r.multiplicity.name(),
                        "witness_file": witness_file(i),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusOptions {
    pub n_angles: usize,
    pub bisect_width: f64,
    /// Offset of seeds at chart equilibria and saddles.
    pub eps: f64,
    /// Offset along the centre manifold of the origin.
    pub eps_center: f64,
    /// Exponent of the angle-to-invariant map; `None` means `1/p`.
    pub spread: Option<f64>,
    /// How often the spread may be doubled when the scan sees a single target.
    pub max_widen: usize,
    pub controls: Controls,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            n_angles: 32,
            bisect_width: 1e-10,
            eps: 1e-6,
            eps_center: 1e-4,
            spread: None,
            max_widen: 3,
            controls: Controls::default(),
        }
    }
}

fn target_of(
    params: &Params,
    e3: &Equilibrium,
    theta: f64,
    spread: f64,
    opts: &CensusOptions,
) -> Result<(Trajectory, Option<EqId>)> {
    let cc = angle_to_invariant(params, theta, spread);
    let tr = shoot(params, e3, Manifold::Unstable, BranchSelector::Invariant(cc), opts.eps, &opts.controls)?;
    let t = endpoint_of(&tr, params, opts.controls.prox);
    Ok((tr, t))
}

fn incomplete(what: String) -> Error {
    Error::Numerical(format!("census incomplete: {what}"))
}

/// Census of connecting orbits; fails rather than returning a partial result.
pub fn connection_census(params: &Params, opts: &CensusOptions) -> Result<ConnectionCensus> {
    if !params.is_subcritical() {
        return Err(Error::Domain("the census is defined for 0 < p < 1".into()));
    }
    let eqs = list_equilibria(params)?;
    let e3 = find(&eqs, EqId::E3).expect("E3 always listed").clone();
    let mut opts = *opts;
    let widen = if params.has_equilibrium_line() {
        // every orbit lands on the line psi = 0; far landings approach it slowly in U1
        opts.controls.max_time = opts.controls.max_time.max(1e6);
        0
    } else {
        opts.max_widen
    };
    let opts = &opts;
    let n = opts.n_angles.max(4);
    let mut spread = opts.spread.unwrap_or(1.0 / params.p);
    let mut scan = Vec::with_capacity(n);
    let mut shots = Vec::with_capacity(n);
    let mut notes = Vec::new();
    for attempt in 0..=widen {
        scan.clear();
        shots.clear();
        for i in 0..n {
            let theta = (i as f64 + 0.5) / n as f64 * FRAC_PI_2;
            let (tr, t) = target_of(params, &e3, theta, spread, opts)?;
            let t = t.ok_or_else(|| incomplete(format!("angle {theta} ended with {}", tr.terminal.name())))?;
            scan.push((theta, t));
            shots.push(tr);
        }
        if scan[0].1 != scan[n - 1].1 || attempt == widen {
            break;
        }
        spread *= 2.0;
        notes.push(format!("single target over the scan; spread widened to {spread}"));
    }

    let mut records = Vec::new();
    // families: maximal runs of at least two neighbouring angles
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scan[j + 1].1 == scan[i].1 {
            j += 1;
        }
        if j > i && !records.iter().any(|r: &Connection| r.to == scan[i].1 && r.from == EqId::E3) {
            let mid = (i + j) / 2;
            records.push(Connection {
                from: EqId::E3,
                to: scan[i].1,
                multiplicity: Multiplicity::Family,
                witness: shots[mid].clone(),
                selector: Some((scan[i].0, scan[j].0)),
            });
        } else if j == i {
            notes.push(format!("target {} seen at the single angle {}", scan[i].1.name(), scan[i].0));
        }
        i = j + 1;
    }

    let saddles: Vec<&Equilibrium> = eqs
        .iter()
        .filter(|e| e.klass == StabilityClass::Saddle && e.frame == Frame::Plane)
        .collect();
    let mut thresholds = Vec::new();
    for w in 0..n - 1 {
        let (a, b) = (scan[w], scan[w + 1]);
        if a.1 == b.1 {
            continue;
        }
        let (mut lo, mut hi) = (a.0, b.0);
        let mut lo_tr = shots[w].clone();
        while hi - lo > opts.bisect_width {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (tr, t) = target_of(params, &e3, mid, spread, opts)?;
            match t {
                Some(t) if t == a.1 => {
                    lo = mid;
                    lo_tr = tr;
                }
                Some(t) if t == b.1 => hi = mid,
                other => {
                    return Err(incomplete(format!(
                        "bisection between {} and {} met {} at angle {mid}",
                        a.1.name(),
                        b.1.name(),
                        other.map(|e| e.name().to_string()).unwrap_or_else(|| tr.terminal.name())
                    )))
                }
            }
        }
        let (saddle, dist) = saddles
            .iter()
            .map(|s| (s.id, lo_tr.min_distance_to(to_disk(s.phase_point().unwrap()))))
            .fold((EqId::E2, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        if !dist.is_finite() {
            return Err(incomplete("no saddle separates the basins".into()));
        }
        thresholds.push(Threshold { lower: lo, upper: hi, below: a.1, above: b.1, saddle, saddle_distance: dist });
        if records.iter().any(|r| r.from == EqId::E3 && r.to == saddle) {
            continue;
        }
        let sad = find(&eqs, saddle).unwrap();
        let back = shoot(
            params,
            sad,
            Manifold::Stable,
            BranchSelector::Positive,
            opts.eps.min(0.5 * opts.controls.prox),
            &opts.controls,
        )?;
        if back.terminal != Termination::ReachedEquilibrium(EqId::E3) {
            return Err(incomplete(format!(
                "stable branch of {} ended with {} instead of E3",
                saddle.name(),
                back.terminal.name()
            )));
        }
        records.push(Connection {
            from: EqId::E3,
            to: saddle,
            multiplicity: Multiplicity::Unique,
            witness: back.reversed(Termination::ReachedEquilibrium(saddle)),
            selector: Some((lo, hi)),
        });
    }

    let mut separation = None;
    if params.delta == 1 {
        let e0 = find(&eqs, EqId::E0).unwrap();
        let cu = shoot(params, e0, Manifold::CenterUnstable, BranchSelector::Positive, opts.eps_center, &opts.controls)?;
        let to = endpoint_of(&cu, params, opts.controls.prox)
            .ok_or_else(|| incomplete(format!("centre-unstable branch ended with {}", cu.terminal.name())))?;
        if let Some(sc) = records.iter().find(|r| r.multiplicity == Multiplicity::Unique) {
            separation = Some(sc.witness.min_disk_distance(&cu));
        }
        records.push(Connection { from: EqId::E0, to, multiplicity: Multiplicity::Unique, witness: cu, selector: None });
        notes.push("uniqueness of the saddle connection for delta = 1 is an empirical finding".into());
    }
    if params.has_equilibrium_line() {
        notes.push("psi = 0 is a line of equilibria; landing on it counts as reaching E0".into());
    }
    records.sort_by_key(|r| (r.from, r.to));
    Ok(ConnectionCensus { params: *params, records, scan, thresholds, separation, spread, notes })
}

/// Sorted `(from, to, multiplicity)` triples.
pub fn census_signature(census: &ConnectionCensus) -> Vec<(EqId, EqId, Multiplicity)> {
    let mut v: Vec<_> = census.records.iter().map(|r| (r.from, r.to, r.multiplicity)).collect();
    v.sort();
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusStability {
    pub base: ConnectionCensus,
    pub half_eps: ConnectionCensus,
    pub tight: ConnectionCensus,
    pub stable: bool,
}

/// Reruns the census with halved offsets and with tolerances tightened 10x.
pub fn census_stability(params: &Params, opts: &CensusOptions) -> Result<CensusStability> {
    let base = connection_census(params, opts)?;
    let half = CensusOptions { eps: opts.eps / 2.0, eps_center: opts.eps_center / 2.0, ..*opts };
    let half_eps = connection_census(params, &half)?;
    let tight_opts = CensusOptions { controls: opts.controls.tightened(10.0), ..*opts };
    let tight = connection_census(params, &tight_opts)?;
    let sig = census_signature(&base);
    let stable = sig == census_signature(&half_eps) && sig == census_signature(&tight);
    Ok(CensusStability { base, half_eps, tight, stable })
}
