//! Shared fixtures for the integration tests: cached census profiles and
//! the standard placement of bump test functions.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use travwave::profile::{End, WaveProfile, WaveType};
use travwave::profiles::{classify_wave, wave_profile, Classification, ProfileOptions};
use travwave::residual::Bump;
use travwave::Params;

/// Exponents of the connection census.
pub const CENSUS_P: [f64; 3] = [0.25, 0.5, 0.75];

pub struct Computed {
    pub params: Params,
    pub profile: WaveProfile,
    pub classification: Classification,
}

type Key = (u64, u64, i64, u64, WaveType);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Computed>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Computed>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Classified `u`-profile of type `ty`, computed once per process.
pub fn profile(p: f64, mu: f64, delta: i64, c: f64, ty: WaveType) -> Arc<Computed> {
    let key = (p.to_bits(), mu.to_bits(), delta, c.to_bits(), ty);
    if let Some(hit) = cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let params = Params::new(p, mu, delta, c).unwrap();
    let (mut profile, _) = wave_profile(&params, ty, &ProfileOptions::default())
        .unwrap_or_else(|e| panic!("type {ty:?} at p={p} mu={mu} delta={delta} c={c}: {e}"));
    let classification = classify_wave(&mut profile, &params);
    let done = Arc::new(Computed { params, profile, classification });
    cache().lock().unwrap().entry(key).or_insert(done).clone()
}

/// Census profile of each type at `mu = c = 1`: types I-III with
/// `delta = 0`, types IV and V with `delta = 1`.
pub fn census_profile(p: f64, ty: WaveType) -> Arc<Computed> {
    let delta = if matches!(ty, WaveType::IV | WaveType::V) { 1 } else { 0 };
    profile(p, 1.0, delta, 1.0, ty)
}

pub const ALL_TYPES: [WaveType; 5] = [WaveType::I, WaveType::II, WaveType::III, WaveType::IV, WaveType::V];

/// Five bumps of equal half width spread over the profile: at both ends of
/// a finite support (or 20 units into an infinite tail) and at the three
/// quarter points in between. Bumps that would leave an infinite end are
/// shifted inward by one half width.
pub fn standard_bumps(profile: &WaveProfile) -> Vec<Bump> {
    let n = profile.len();
    let le = profile.end(End::Left).unwrap();
    let re = profile.end(End::Right).unwrap();
    let a = if le.is_finite() { le.xi } else { profile.xi[0].max(-20.0) };
    let b = if re.is_finite() { re.xi } else { profile.xi[n - 1].min(a + 20.0) };
    let w = (b - a) / 4.0;
    (0..5)
        .map(|i| {
            let mut c = a + w * i as f64;
            if !le.is_finite() && c - w < profile.xi[0] {
                c += w;
            } else if !re.is_finite() && c + w > profile.xi[n - 1] {
                c -= w;
            }
            Bump::new(c, w).unwrap()
        })
        .collect()
}

/// `profile` with `value + bump` on the samples inside `[lo, hi]`.
pub fn perturbed(profile: &WaveProfile, lo: f64, hi: f64, bump: f64) -> WaveProfile {
    let mut q = profile.clone();
    for (v, &x) in q.value.iter_mut().zip(&profile.xi) {
        if (lo..=hi).contains(&x) {
            *v += bump;
        }
    }
    q
}
