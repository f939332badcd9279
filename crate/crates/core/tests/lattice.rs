use lattice_fronts::lattice::{init_from_front, verify_front, LatticeError, VerifyConfig};
use lattice_fronts::macroscopic::{denormalize_profile, normalize_potential, solve_front_data};
use lattice_fronts::potential::AffineMap;
use lattice_fronts::solver::minimize;
use lattice_fronts::{FrontData, GridProfile, Outcome, Potential, SolverConfig};

fn quartic_front(beta: f64) -> (Potential, GridProfile) {
    let pot = Potential::quartic(beta);
    let res = minimize(&SolverConfig::default(), &pot).unwrap();
    assert_eq!(res.outcome, Outcome::FrontConverged);
    (pot, res.profile)
}

#[test]
fn converged_fronts_travel_at_sigma() {
    for beta in [0.05, 0.1] {
        let (pot, w) = quartic_front(beta);
        let fd = FrontData::normalized();
        let rep = verify_front(
            &denormalize_profile(&w, &fd),
            &fd,
            &pot,
            &VerifyConfig::default(),
        )
        .unwrap();
        assert!(rep.passed, "beta={beta}: {rep:?}");
        assert_eq!(rep.error_curve.len(), 20);
    }
}

/// Φ″(±1) = 1 − 8β < 0: the asymptotic states themselves are linearly unstable.
#[test]
fn elliptic_states_blow_up() {
    let (pot, w) = quartic_front(0.3);
    assert!(pot.ddphi(1.0) < 0.0);
    let fd = FrontData::normalized();
    let err = verify_front(
        &denormalize_profile(&w, &fd),
        &fd,
        &pot,
        &VerifyConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, LatticeError::BlowUp { .. }));
}

#[test]
fn leftward_front_in_physical_variables() {
    let physical = Potential::affine(
        Potential::quartic(0.1),
        AffineMap {
            arg_scale: 0.5,
            arg_shift: 0.0,
            value_scale: 1.5,
            slope: 0.4,
            offset: 0.0,
        },
    );
    let fd = solve_front_data(-2.0, 2.0, 0.0, -1, &physical, 1e-9).unwrap();
    assert!(fd.sigma < 0.0);
    let normalized = normalize_potential(&physical, &fd).unwrap();
    let res = minimize(&SolverConfig::default(), &normalized).unwrap();
    let rep = verify_front(
        &denormalize_profile(&res.profile, &fd),
        &fd,
        &physical,
        &VerifyConfig::default(),
    )
    .unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.measured_speed < 0.0);
}

#[test]
fn corrupted_profile_fails_verification() {
    let (pot, w) = quartic_front(0.05);
    let bump = GridProfile::from_fn(
        w.grid,
        0.0,
        0.0,
        |phi| if phi.abs() < 1.0 { 0.3 } else { 0.0 },
    );
    let bad = w.add(&bump).unwrap();
    let fd = FrontData::normalized();
    let rep = verify_front(
        &denormalize_profile(&bad, &fd),
        &fd,
        &pot,
        &VerifyConfig::default(),
    )
    .unwrap();
    assert!(!rep.passed);
    assert!(!rep.profile_ok);
}

#[test]
fn non_fronts_are_rejected() {
    let pot = Potential::quartic(0.05);
    let cfg = SolverConfig {
        max_iters: 3,
        ..SolverConfig::default()
    };
    let res = minimize(&cfg, &pot).unwrap();
    let err = init_from_front(&res, &FrontData::normalized(), 400, 200.0, 0.01).unwrap_err();
    assert!(matches!(err, LatticeError::NotAFront(_)));
}

#[test]
fn setup_errors() {
    let (pot, w) = quartic_front(0.05);
    let fd = FrontData::normalized();
    let phys = denormalize_profile(&w, &fd);
    let long = VerifyConfig {
        t_final: 400.0,
        ..VerifyConfig::default()
    };
    assert!(matches!(
        verify_front(&phys, &fd, &pot, &long),
        Err(LatticeError::FrontNearBoundary { .. })
    ));
    let coarse = VerifyConfig {
        dt: 0.2,
        ..VerifyConfig::default()
    };
    assert!(matches!(
        verify_front(&phys, &fd, &pot, &coarse),
        Err(LatticeError::InvalidStep(_))
    ));
    let tight = VerifyConfig {
        blowup_limit: Some(0.5),
        ..VerifyConfig::default()
    };
    assert!(matches!(
        verify_front(&phys, &fd, &pot, &tight),
        Err(LatticeError::BlowUp { .. })
    ));
}
