//! Travelling-wave profiles sampled in `xi`, the `u -> U -> V` transforms
//! and CSV input/output.

use serde::{Deserialize, Serialize};

use crate::equilibria::{EqId, Frame};
use crate::error::{Error, Result};
use crate::params::Params;

/// Which unknown a profile describes: `u`, `U = u^(1/p)` or the porous-medium variable `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "u")]
    Small,
    #[serde(rename = "U")]
    Big,
    #[serde(rename = "V")]
    Pme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EndKind {
    /// Value tends to 0 and the derivative blows up at a finite abscissa.
    FiniteQuench,
    /// Value tends to 0 with a finite nonzero one-sided derivative.
    FiniteSingular,
    /// Infinite abscissa; the value tends to `limit_value`.
    InfiniteDecay,
    /// Infinite abscissa with the value tending to `1/mu`.
    AtE1,
    /// Neither convergence nor divergence of the `xi`-extent could be established.
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointInfo {
    pub kind: EndKind,
    /// Endpoint abscissa; `+-inf` for infinite ends.
    pub xi: f64,
    pub limit_value: f64,
    pub limit_derivative: f64,
}

impl EndKind {
    pub fn name(&self) -> &'static str {
        match self {
            EndKind::FiniteQuench => "FINITE_QUENCH",
            EndKind::FiniteSingular => "FINITE_SINGULAR",
            EndKind::InfiniteDecay => "INFINITE_DECAY",
            EndKind::AtE1 => "AT_E1",
            EndKind::Unresolved => "UNRESOLVED",
        }
    }
}

impl EndpointInfo {
    pub fn is_finite(&self) -> bool {
        matches!(self.kind, EndKind::FiniteQuench | EndKind::FiniteSingular)
    }
}

/// Raw data about one end of a profile gathered while converting a
/// trajectory: the equilibrium it belongs to and how fast the `xi`-speed
/// decays there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndTail {
    pub eq: Option<EqId>,
    pub frame: Frame,
    /// `dxi/dt` at the end sample.
    pub speed: f64,
    /// Log-speed slopes (per unit time, toward the end) on the two halves of the end window.
    pub slopes: Option<(f64, f64)>,
    /// Drop of the log-speed across the end window, far edge minus end.
    pub log_drop: f64,
    /// Geometric extrapolation of the remaining `xi`-extent beyond the end sample.
    pub remainder: f64,
    /// Difference of the remainders predicted by the two half-window slopes.
    pub remainder_spread: f64,
    /// Value and derivative at the end sample, in `u`-coordinates.
    pub u: f64,
    pub du: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum WaveType {
    I,
    II,
    III,
    IV,
    V,
}

impl WaveType {
    /// Label in the given variable: `I..V` for `u`, `i..v` for `U`, `A..E` for `V`.
    pub fn label(&self, var: Variable) -> &'static str {
        let idx = *self as usize;
        match var {
            Variable::Small => ["I", "II", "III", "IV", "V"][idx],
            Variable::Big => ["i", "ii", "iii", "iv", "v"][idx],
            Variable::Pme => ["A", "B", "C", "D", "E"][idx],
        }
    }

    pub fn parse(s: &str) -> Option<(WaveType, Variable)> {
        use WaveType::*;
        let all = [I, II, III, IV, V];
        for var in [Variable::Small, Variable::Big, Variable::Pme] {
            for t in all {
                if t.label(var) == s {
                    return Some((t, var));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Left,
    Right,
}

impl End {
    pub fn name(&self) -> &'static str {
        match self {
            End::Left => "LEFT",
            End::Right => "RIGHT",
        }
    }
}

/// Samples `(xi, value, derivative)` with optional endpoint metadata.
///
/// `from_left` / `from_right`, when present, hold the distance of each sample
/// to the finite left / right end accumulated from that end, which keeps full
/// relative precision very close to the endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub variable: Variable,
    pub xi: Vec<f64>,
    pub value: Vec<f64>,
    pub deriv: Vec<f64>,
    pub from_left: Option<Vec<f64>>,
    pub from_right: Option<Vec<f64>>,
    pub left_end: Option<EndpointInfo>,
    pub right_end: Option<EndpointInfo>,
    pub wave_type: Option<WaveType>,
    /// Abscissa shift applied when the origin was normalized.
    pub xi0: f64,
    /// End data from the source trajectory, `(left, right)`.
    pub tails: Option<(EndTail, EndTail)>,
}

impl WaveProfile {
    pub fn new(variable: Variable, xi: Vec<f64>, value: Vec<f64>, deriv: Vec<f64>) -> Result<Self> {
        if xi.len() != value.len() || xi.len() != deriv.len() {
            return Err(Error::InvalidParam("profile columns differ in length".into()));
        }
        if xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParam("xi must be strictly increasing".into()));
        }
        Ok(WaveProfile {
            variable,
            xi,
            value,
            deriv,
            from_left: None,
            from_right: None,
            left_end: None,
            right_end: None,
            wave_type: None,
            xi0: 0.0,
            tails: None,
        })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn end(&self, end: End) -> Option<EndpointInfo> {
        match end {
            End::Left => self.left_end,
            End::Right => self.right_end,
        }
    }

    /// Every `stride`-th sample, always keeping the last one; end data is kept.
    pub fn subsample(&self, stride: usize) -> WaveProfile {
        let n = self.len();
        let mut idx: Vec<usize> = (0..n).step_by(stride.max(1)).collect();
        if n > 0 && *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        self.select(&idx, true)
    }

    /// Samples at distance at least `margin` from each finite end. The window
    /// no longer reaches the ends, so end data is dropped.
    pub fn interior(&self, margin: f64) -> WaveProfile {
        let keep = |d: &Option<Vec<f64>>, i: usize| d.as_ref().map_or(true, |d| d[i] >= margin);
        let (dl, dr) = (self.distance_to(End::Left), self.distance_to(End::Right));
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(&dl, i) && keep(&dr, i)).collect();
        self.select(&idx, false)
    }

    fn select(&self, idx: &[usize], keep_ends: bool) -> WaveProfile {
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        WaveProfile {
            variable: self.variable,
            xi: pick(&self.xi),
            value: pick(&self.value),
            deriv: pick(&self.deriv),
            from_left: self.from_left.as_deref().filter(|_| keep_ends).map(pick),
            from_right: self.from_right.as_deref().filter(|_| keep_ends).map(pick),
            left_end: self.left_end.filter(|_| keep_ends),
            right_end: self.right_end.filter(|_| keep_ends),
            wave_type: self.wave_type,
            xi0: self.xi0,
            tails: if keep_ends { self.tails.clone() } else { None },
        }
    }

    /// Distance of every sample to the given finite end.
    pub fn distance_to(&self, end: End) -> Option<Vec<f64>> {
        let info = self.end(end)?;
        if !info.is_finite() {
            return None;
        }
        let stored = match end {
            End::Left => self.from_left.clone(),
            End::Right => self.from_right.clone(),
        };
        Some(stored.unwrap_or_else(|| match end {
            End::Left => self.xi.iter().map(|x| x - info.xi).collect(),
            End::Right => self.xi.iter().map(|x| info.xi - x).collect(),
        }))
    }

    /// Number of sign changes of the derivative between consecutive samples.
    pub fn derivative_sign_changes(&self) -> usize {
        let mut last = 0.0f64;
        let mut n = 0;
        for &d in &self.deriv {
            if d == 0.0 || !d.is_finite() {
                continue;
            }
            if last != 0.0 && (d > 0.0) != (last > 0.0) {
                n += 1;
            }
            last = d;
        }
        n
    }

    /// Profile CSV with header `xi,u,du`; floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.len() * 48);
        s.push_str("xi,u,du\n");
        for i in 0..self.len() {
            s.push_str(&format!("{},{},{}\n", self.xi[i], self.value[i], self.deriv[i]));
        }
        s
    }

    pub fn from_csv(text: &str, variable: Variable) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "xi,u,du" => {}
            _ => return Err(Error::InvalidParam("profile CSV must start with xi,u,du".into())),
        }
        let (mut xi, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::InvalidParam(format!("row {} has {} columns", n + 2, cols.len())));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidParam(format!("row {}: {e}", n + 2)))
            };
            xi.push(parse(cols[0])?);
            u.push(parse(cols[1])?);
            du.push(parse(cols[2])?);
        }
        WaveProfile::new(variable, xi, u, du)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapTarget {
    /// `U = u^(1/p)`.
    UFromU,
    /// `V = ((1-p)^(1/p) U)^(1-p)`.
    VFromU,
}

/// Pointwise transform of a profile; derivatives use the chain rule on the
/// stored pairs. The `xi` grid and endpoint abscissae are kept.
pub fn map_profile(profile: &WaveProfile, target: MapTarget, params: &Params) -> Result<WaveProfile> {
    let p = params.p;
    if profile.value.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("profile values must be nonnegative".into()));
    }
    let (expected, var) = match target {
        MapTarget::UFromU => (Variable::Small, Variable::Big),
        MapTarget::VFromU => (Variable::Big, Variable::Pme),
    };
    if profile.variable != expected {
        return Err(Error::InvalidParam(format!("{target:?} expects a {expected:?} profile")));
    }
    if target == MapTarget::VFromU && p >= 1.0 {
        return Err(Error::Domain("the V transform needs 0 < p < 1".into()));
    }
    let n = profile.len();
    let mut value = Vec::with_capacity(n);
    let mut deriv = Vec::with_capacity(n);
    for i in 0..n {
        let (v, d) = match target {
            MapTarget::UFromU => big_from_small(profile.value[i], profile.deriv[i], p),
            MapTarget::VFromU => pme_from_big(profile.value[i], profile.deriv[i], p),
        };
        value.push(v);
        deriv.push(d);
    }
    let map_end = |e: Option<EndpointInfo>, last: usize| {
        e.map(|info| EndpointInfo {
            limit_value: match target {
                MapTarget::UFromU => big_from_small(info.limit_value, 0.0, p).0,
                MapTarget::VFromU => pme_from_big(info.limit_value, 0.0, p).0,
            },
            limit_derivative: deriv[last],
            ..info
        })
    };
    let left_end = map_end(profile.left_end, 0);
    let right_end = map_end(profile.right_end, n.saturating_sub(1));
    Ok(WaveProfile {
        variable: var,
        xi: profile.xi.clone(),
        value,
        deriv,
        from_left: profile.from_left.clone(),
        from_right: profile.from_right.clone(),
        left_end,
        right_end,
        wave_type: profile.wave_type,
        xi0: profile.xi0,
        tails: profile.tails,
    })
}

/// `(U, U')` from `(u, u')`.
pub fn big_from_small(u: f64, du: f64, p: f64) -> (f64, f64) {
    if u == 0.0 {
        return (0.0, 0.0);
    }
    let big = u.powf(1.0 / p);
    (big, big / u * du / p)
}

/// `(V, V')` from `(U, U')`.
pub fn pme_from_big(big: f64, dbig: f64, p: f64) -> (f64, f64) {
    if big == 0.0 {
        return (0.0, 0.0);
    }
    let a = ((1.0 - p).powf(1.0 / p) * big).powf(1.0 - p);
    (a, a * (1.0 - p) * dbig / big)
}

/// Forward porous-medium substitution `U = (1-p)^(-1/p) V^(1/(1-p))`.
pub fn big_from_pme(v: f64, p: f64) -> f64 {
    (1.0 - p).powf(-1.0 / p) * v.powf(1.0 / (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f64, var: Variable) -> WaveProfile {
        let xi: Vec<f64> = (0..10).map(|i| i as f64).collect();
        WaveProfile::new(var, xi, vec![v; 10], vec![0.0; 10]).unwrap()
    }

    #[test]
    fn transform_examples() {
        let pr = Params::new(0.5, 1.0, 0, 1.0).unwrap();
        let u = constant(0.25, Variable::Small);
        let big = map_profile(&u, MapTarget::UFromU, &pr).unwrap();
        assert!(big.value.iter().all(|&v| (v - 0.0625).abs() < 1e-16));
        let v = map_profile(&big, MapTarget::VFromU, &pr).unwrap();
        assert!(v.value.iter().all(|&x| (x - 0.125).abs() < 1e-15));
        assert!((big_from_pme(0.125, 0.5) - 0.0625).abs() < 1e-16);

        let zero = constant(0.0, Variable::Small);
        let z1 = map_profile(&zero, MapTarget::UFromU, &pr).unwrap();
        let z2 = map_profile(&z1, MapTarget::VFromU, &pr).unwrap();
        assert!(z2.value.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn transform_errors() {
        let pr = Params::new(2.0, 1.0, 0, 1.0).unwrap();
        let big = constant(0.3, Variable::Big);
        assert!(map_profile(&big, MapTarget::VFromU, &pr).is_err());
        let mut neg = constant(0.3, Variable::Small);
        neg.value[3] = -0.1;
        assert!(map_profile(&neg, MapTarget::UFromU, &pr).is_err());
        let pr2 = Params::new(0.5, 1.0, 0, 1.0).unwrap();
        assert!(map_profile(&constant(0.3, Variable::Small), MapTarget::VFromU, &pr2).is_err());
    }

    #[test]
    fn chain_rule_matches_difference_quotient() {
        let p = 0.4;
        let f = |x: f64| (x * 1.3).sin() + 1.5;
        let df = |x: f64| 1.3 * (x * 1.3).cos();
        let x = 0.7;
        let h = 1e-6;
        let (_, d) = big_from_small(f(x), df(x), p);
        let fd = (big_from_small(f(x + h), 0.0, p).0 - big_from_small(f(x - h), 0.0, p).0) / (2.0 * h);
        assert!((d - fd).abs() < 1e-7);
        let g = |x: f64| big_from_small(f(x), df(x), p);
        let (b, db) = g(x);
        let (_, dv) = pme_from_big(b, db, p);
        let fdv = (pme_from_big(g(x + h).0, 0.0, p).0 - pme_from_big(g(x - h).0, 0.0, p).0) / (2.0 * h);
        assert!((dv - fdv).abs() < 1e-7);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let xi = vec![-1.5, 0.1, 1.0 / 3.0, 2.0e-17];
        let xi_sorted = {
            let mut v = xi.clone();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let prof = WaveProfile::new(
            Variable::Small,
            xi_sorted,
            vec![0.0, std::f64::consts::PI, 1e-300, 7.25],
            vec![1.0 / 7.0, -2.5e10, 0.0, -0.1],
        )
        .unwrap();
        let text = prof.to_csv();
        assert!(text.starts_with("xi,u,du\n"));
        let back = WaveProfile::from_csv(&text, Variable::Small).unwrap();
        assert_eq!(back.xi, prof.xi);
        assert_eq!(back.value, prof.value);
        assert_eq!(back.deriv, prof.deriv);
    }

    #[test]
    fn labels() {
        assert_eq!(WaveType::III.label(Variable::Small), "III");
        assert_eq!(WaveType::III.label(Variable::Big), "iii");
        assert_eq!(WaveType::III.label(Variable::Pme), "C");
        assert_eq!(WaveType::parse("iv"), Some((WaveType::IV, Variable::Big)));
        assert_eq!(WaveType::parse("E"), Some((WaveType::V, Variable::Pme)));
    }
}
