//! Stability tables across the two exponent regimes and the transcritical
//! exchange of stability on the boundary at `p = 1`.

use proptest::prelude::*;

use travwave::bifurcation::{
    branches_csv, fd_slope, p_of_gamma, restricted_field, restricted_slope, slant_in_full_field, stability_scan,
    transcritical_branches, BranchId, Regime,
};
use travwave::equilibria::{EqId, StabilityClass};
use travwave::Error;

#[test]
fn scan_examples() {
    let t = stability_scan(&[0.5, 2.0], &[0.5, 1.0, 2.0], &[0.5, 1.0, 2.0], &[0, 1]).unwrap();
    assert!(t.violations.is_empty(), "{:?}", t.violations);
    assert_eq!(t.classes(Regime::Super, EqId::E3), vec![StabilityClass::Saddle]);
    assert_eq!(t.classes(Regime::Sub, EqId::E3), vec![StabilityClass::Source]);
    assert_eq!(t.classes(Regime::Sub, EqId::E4), vec![StabilityClass::Sink]);
    assert_eq!(t.classes(Regime::Super, EqId::E4), vec![StabilityClass::Saddle]);
}

#[test]
fn e2_position_diverges_at_one() {
    let t = stability_scan(&[0.9, 1.1], &[1.0], &[1.0], &[0]).unwrap();
    let psi: Vec<f64> = t.rows.iter().filter(|r| r.id == EqId::E2).map(|r| r.location.1).collect();
    assert!((psi[0] + 9.0).abs() < 1e-12 && (psi[1] - 11.0).abs() < 1e-12, "{psi:?}");
}

#[test]
fn scan_refuses_critical_exponent() {
    assert!(matches!(stability_scan(&[0.5, 1.0], &[1.0], &[1.0], &[0]), Err(Error::CriticalExponent)));
}

#[test]
fn scan_csv_has_one_row_per_equilibrium() {
    let t = stability_scan(&[0.5], &[1.0], &[1.0], &[0, 1]).unwrap();
    let csv = t.to_csv();
    assert_eq!(csv.lines().count(), 1 + t.rows.len());
    assert_eq!(t.rows.len(), 4 + 5);
}

#[test]
fn branch_examples() {
    let (zero, slant) = transcritical_branches(1.0, (-1.0, 1.0), 201).unwrap();
    let at = |b: &travwave::bifurcation::BifurcationBranch, g: f64| {
        *b.samples.iter().find(|s| (s.gamma - g).abs() < 1e-12).unwrap()
    };
    let (z, s) = (at(&zero, -1.0), at(&slant, -1.0));
    assert_eq!((z.lambda, z.eigenvalue, z.p), (0.0, 1.0, 0.5));
    assert_eq!((s.lambda, s.eigenvalue), (-1.0, -1.0));
    assert_eq!(z.regime, Some(Regime::Sub));
    let (z, s) = (at(&zero, 0.0), at(&slant, 0.0));
    assert_eq!((z.lambda, s.lambda), (0.0, 0.0));
    assert_eq!((z.eigenvalue, s.eigenvalue), (0.0, 0.0));
    assert_eq!(z.regime, None);
    assert_eq!(at(&zero, 1.0).p, f64::INFINITY);
    assert_eq!(zero.id.equilibrium(), EqId::E3);
    assert_eq!(slant.id.equilibrium(), EqId::E2);

    let (_, slant) = transcritical_branches(2.0, (-0.5, 0.5), 3).unwrap();
    let s = slant.samples[2];
    assert_eq!((s.gamma, s.p, s.lambda, s.eigenvalue), (0.5, 2.0, 0.25, 0.5));
}

#[test]
fn branch_preconditions() {
    assert!(transcritical_branches(1.0, (0.1, 0.5), 11).is_err());
    assert!(transcritical_branches(1.0, (-0.5, 1.5), 11).is_err());
    assert!(transcritical_branches(0.0, (-0.5, 0.5), 11).is_err());
    assert!(transcritical_branches(1.0, (-0.5, 0.5), 1).is_err());
}

#[test]
fn branch_csv_crosses_at_zero() {
    let (zero, slant) = transcritical_branches(1.0, (-1.0, 1.0), 201).unwrap();
    let csv = branches_csv(&[&zero, &slant]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gamma,p,lambda,eigenvalue,branch"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 402);
    let crossing: Vec<&Vec<&str>> = rows.iter().filter(|r| r[0] == "0").collect();
    assert_eq!(crossing.len(), 2);
    assert!(crossing.iter().all(|r| r[2] == "0" && r[3] == "0"));
    assert_eq!(crossing[0][4], BranchId::Zero.name());
    assert_eq!(crossing[1][4], BranchId::Slant.name());
}

#[test]
fn exchange_of_stability() {
    for c in [0.5, 1.0, 2.0] {
        let (zero, slant) = transcritical_branches(c, (-0.5, 0.5), 101).unwrap();
        for (z, s) in zero.samples.iter().zip(&slant.samples) {
            if z.gamma != 0.0 {
                assert_eq!(z.eigenvalue.signum(), -z.gamma.signum());
                assert_eq!(s.eigenvalue.signum(), z.gamma.signum());
            }
            for b in [z, s] {
                assert_eq!(restricted_field(c, b.gamma, b.lambda), 0.0);
                assert!((fd_slope(c, b.gamma, b.lambda, 1e-3) - b.eigenvalue).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn slant_point_is_a_zero_of_the_full_chart_field() {
    for gamma in [-1.0, -0.3, -0.05, 0.05, 0.3, 0.5] {
        for mu in [0.5, 1.0, 2.0] {
            for delta in [0, 1] {
                let c = 1.5;
                let (norm, j) = slant_in_full_field(gamma, mu, delta, c).unwrap();
                assert!(norm < 1e-10, "gamma={gamma} mu={mu} delta={delta}: {norm}");
                assert!((j - gamma).abs() < 1e-10);
            }
        }
    }
    assert!(slant_in_full_field(1.0, 1.0, 0, 1.0).is_err());
}

#[test]
fn gamma_is_linear_near_one() {
    for i in 1..=100 {
        for sign in [-1.0, 1.0] {
            let p = 1.0 + sign * 0.1 * i as f64 / 100.0;
            let gamma = (p - 1.0) / p;
            assert!((gamma - (p - 1.0)).abs() <= 2.0 * (p - 1.0) * (p - 1.0));
            assert!((p_of_gamma(gamma) - p).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn slope_matches_difference_quotient(c in 0.1f64..5.0, gamma in -2.0f64..1.0, lambda in -3.0f64..3.0) {
        let fd = fd_slope(c, gamma, lambda, 1e-4);
        prop_assert!((fd - restricted_slope(c, gamma, lambda)).abs() < 1e-9);
    }
}
