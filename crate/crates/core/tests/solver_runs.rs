use lattice_fronts::action::relative_action;
use lattice_fronts::macroscopic::{normalize_potential, solve_front_data};
use lattice_fronts::phases::{find_plateau, is_monotone, PlateauRule};
use lattice_fronts::potential::AffineMap;
use lattice_fronts::solver::{minimize, minimize_from, Outcome, SolverError};
use lattice_fronts::{GridProfile, Potential, SolverConfig};

fn small() -> SolverConfig {
    SolverConfig {
        half_width: 10.0,
        cells: 1600,
        ..SolverConfig::default()
    }
}

#[test]
fn quartic_family_converges_on_a_smaller_window() {
    let mut last_l = 0.0;
    for beta in [0.05, 0.1, 0.2, 0.3] {
        let res = minimize(&small(), &Potential::quartic(beta)).unwrap();
        assert_eq!(res.outcome, Outcome::FrontConverged, "beta={beta}");
        let l = res.final_report().l;
        assert!(l > last_l, "action grows with beta");
        last_l = l;
    }
}

#[test]
fn front_is_odd_for_symmetric_wells() {
    let res = minimize(&small(), &Potential::quartic(0.05)).unwrap();
    let w = &res.profile;
    let n = w.values.len();
    for i in 0..n {
        assert!((w.values[i] + w.values[n - 1 - i]).abs() <= 1e-9);
    }
    assert!(is_monotone(w));
}

#[test]
fn converged_front_has_lower_action_than_shock() {
    let pot = Potential::quartic(0.1);
    let res = minimize(&small(), &pot).unwrap();
    let rel = relative_action(&res.profile, &pot).unwrap();
    assert!(rel < 0.0, "relative action {rel}");
    let shock = GridProfile::shock(res.profile.grid);
    let expect = res.final_report().l - lattice_fronts::action::functional_l(&shock, &pot).unwrap();
    assert!((rel - expect).abs() <= 1e-10);
}

#[test]
fn restart_from_front_stops_immediately() {
    let pot = Potential::quartic(0.05);
    let cfg = small();
    let res = minimize(&cfg, &pot).unwrap();
    let again = minimize_from(&cfg, &pot, res.profile.clone(), &mut |_| {}).unwrap();
    assert_eq!(again.outcome, Outcome::FrontConverged);
    assert!(again.attempts <= 1);
    assert_eq!(again.profile, res.profile);
}

#[test]
fn history_is_monotone_in_action() {
    let res = minimize(&small(), &Potential::quartic(0.3)).unwrap();
    for pair in res.history.windows(2) {
        let slack = 1e-12 * (1.0 + pair[0].report.n.abs() + pair[0].report.p.abs());
        assert!(pair[1].report.l <= pair[0].report.l + slack);
    }
}

#[test]
fn graph_violation_gives_growing_plateau() {
    let pot = Potential::graph_violating(0.1, -0.5);
    let res = minimize(&SolverConfig::default(), &pot).unwrap();
    assert_eq!(res.outcome, Outcome::PlateauDiverging);
    let w_star = res.plateau_value.unwrap();
    assert!(w_star.abs() < 1e-2);
    let plateau = find_plateau(&res.profile, &PlateauRule::default()).unwrap();
    assert!(plateau.width > 2.0);
    let trend = res.trend.unwrap();
    assert!(trend.action_slope < 0.0 && trend.half_width_rate > 0.0);
}

#[test]
fn tilted_wells_collapse() {
    let res = minimize(&SolverConfig::default(), &Potential::tilted(0.1, 0.1)).unwrap();
    assert_eq!(res.outcome, Outcome::CollapsedToConstant);
    assert!((res.plateau_value.unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn iteration_cap_is_reported() {
    let cfg = SolverConfig {
        max_iters: 5,
        ..small()
    };
    let res = minimize(&cfg, &Potential::quartic(0.05)).unwrap();
    assert_eq!(res.outcome, Outcome::MaxItersReached);
    assert_eq!(res.attempts, 5);
}

#[test]
fn invalid_configs_are_rejected() {
    let pot = Potential::quartic(0.05);
    let bad_lambda = SolverConfig {
        lambda0: 1.5,
        ..small()
    };
    assert!(matches!(
        minimize(&bad_lambda, &pot),
        Err(SolverError::ConfigInvalid(_))
    ));
    let misaligned = SolverConfig {
        cells: 1601,
        ..small()
    };
    assert!(matches!(
        minimize(&misaligned, &pot),
        Err(SolverError::Grid(_))
    ));
}

#[test]
fn physical_problem_reduces_to_the_normalized_one() {
    let quartic = Potential::quartic(0.2);
    let physical = Potential::affine(
        quartic.clone(),
        AffineMap {
            arg_scale: 0.25,
            arg_shift: 0.5,
            value_scale: 2.0,
            slope: -0.3,
            offset: 1.0,
        },
    );
    let fd = solve_front_data(-6.0, 2.0, 0.0, -1, &physical, 1e-9).unwrap();
    assert!(fd.sigma < 0.0);
    let normalized = normalize_potential(&physical, &fd).unwrap();
    let a = minimize(&small(), &quartic).unwrap();
    let b = minimize(&small(), &normalized).unwrap();
    assert_eq!(b.outcome, Outcome::FrontConverged);
    let diff = a
        .profile
        .values
        .iter()
        .zip(&b.profile.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-7, "diff {diff}");
}
