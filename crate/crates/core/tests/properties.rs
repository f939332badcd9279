use lattice_fronts::action::{
    action_report, functional_l, functional_p, n_identity_check, quadratic_m,
};
use lattice_fronts::cli::artifacts::{read_profile, write_profile};
use lattice_fronts::grid::{apply_averaging, inner_product};
use lattice_fronts::lattice::{evolve, ChainState};
use lattice_fronts::macroscopic::{
    denormalize_profile, jump_residuals, normalize_potential, solve_front_data,
};
use lattice_fronts::phases::separate_profile;
use lattice_fronts::potential::{compute_invariant_bound, AffineMap};
use lattice_fronts::solver::euler_step;
use lattice_fronts::{FrontData, GridProfile, GridSpec, Potential};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(4.0, 320).unwrap()
}

/// Arbitrary values inside |φ| < 1.5, `outside` elsewhere.
fn interior(values: &[f64], left: f64, right: f64) -> GridProfile {
    let g = grid();
    GridProfile::from_fn(g, left, right, |phi| {
        let i = g.nearest_index(phi) as usize;
        if phi.abs() < 1.5 {
            values[i]
        } else if phi < 0.0 {
            left
        } else {
            right
        }
    })
}

fn values(range: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-range..range, grid().len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn averaging_is_symmetric(a in values(1.0), b in values(1.0)) {
        let (v1, v2) = (interior(&a, 0.0, 0.0), interior(&b, 0.0, 0.0));
        let lhs = inner_product(&apply_averaging(&v1), &v2).unwrap();
        let rhs = inner_product(&v1, &apply_averaging(&v2)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn averaging_does_not_increase_sup_norm(a in values(2.0)) {
        let w = interior(&a, -1.0, 1.0);
        // allowance for the rounding of a 2K-term sum
        prop_assert!(apply_averaging(&w).max_abs() <= w.max_abs() * (1.0 + 1e-14));
    }

    #[test]
    fn averaging_preserves_constants(c in -3.0f64..3.0) {
        let u = apply_averaging(&GridProfile::constant(grid(), c));
        prop_assert!(u.values.iter().all(|&x| (x - c).abs() <= 64.0 * f64::EPSILON * c.abs()));
    }

    #[test]
    fn quadratic_part_is_nonnegative(a in values(1.0)) {
        prop_assert!(quadratic_m(&interior(&a, 0.0, 0.0)).unwrap() >= -1e-12);
    }

    #[test]
    fn n_identity_holds(a in values(1.0), b in values(1.0)) {
        let w1 = interior(&a, -1.0, 1.0);
        let w2 = interior(&b, -1.0, 1.0);
        prop_assert!(n_identity_check(&w1, &w2).unwrap() <= 1e-10);
    }

    #[test]
    fn action_is_shift_invariant(a in values(1.0), s in -40isize..=40, beta in 0.01f64..0.5) {
        let w = interior(&a, -1.0, 1.0);
        let pot = Potential::quartic(beta);
        let l0 = functional_l(&w, &pot).unwrap();
        let l1 = functional_l(&w.shifted(s), &pot).unwrap();
        prop_assert!((l0 - l1).abs() <= 1e-10);
    }

    #[test]
    fn report_adds_up(a in values(1.5), beta in 0.01f64..0.5) {
        let w = interior(&a, -1.0, 1.0);
        let pot = Potential::quartic(beta);
        let r = action_report(&w, &pot).unwrap();
        prop_assert_eq!(r.l, r.n + r.p);
        prop_assert!(r.p >= 0.0);
        prop_assert!(r.m >= -1e-12);
        prop_assert!(r.grad_norm >= 0.0);
        prop_assert!(functional_p(&w, &pot).unwrap() >= 0.0);
    }

    #[test]
    fn euler_step_keeps_sup_bound(a in values(1.0), beta in 0.01f64..0.5, lambda in 0.01f64..0.99) {
        let pot = Potential::quartic(beta);
        let gamma = compute_invariant_bound(&pot, 10.0).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| x * gamma).collect();
        let w = interior(&scaled, -1.0, 1.0);
        let next = euler_step(&w, &pot, lambda).unwrap();
        prop_assert!(next.max_abs() <= gamma + 1e-12);
    }

    #[test]
    fn normalization_recovers_the_quartic(
        beta in 0.01f64..0.5,
        arg_scale in 0.2f64..3.0,
        arg_shift in -2.0f64..2.0,
        value_scale in 0.2f64..5.0,
        slope in -2.0f64..2.0,
        offset in -2.0f64..2.0,
    ) {
        let quartic = Potential::quartic(beta);
        let map = AffineMap { arg_scale, arg_shift, value_scale, slope, offset };
        let physical = Potential::affine(quartic.clone(), map);
        let r_minus = (-1.0 - arg_shift) / arg_scale;
        let r_plus = (1.0 - arg_shift) / arg_scale;
        let fd = solve_front_data(r_minus, r_plus, 0.3, 1, &physical, 1e-9).unwrap();
        let res = jump_residuals(&fd, &physical);
        let scale = 1.0 + physical.phi(r_minus).abs() + physical.phi(r_plus).abs();
        prop_assert!(res.iter().all(|r| r.abs() <= 1e-9 * scale));
        let normalized = normalize_potential(&physical, &fd).unwrap();
        for i in 0..=40 {
            let u = -2.0 + 0.1 * i as f64;
            prop_assert!((normalized.phi(u) - quartic.phi(u)).abs() <= 1e-9 * (1.0 + quartic.phi(u).abs()));
        }
    }

    #[test]
    fn smooth_fronts_have_one_transition(width in 0.6f64..2.5) {
        let w = GridProfile::from_fn(grid(), -1.0, 1.0, |phi| {
            (0.5 * std::f64::consts::PI * (phi / width).clamp(-1.0, 1.0)).sin()
        });
        let sep = separate_profile(&w, 1.0).unwrap();
        prop_assert_eq!(sep.m, 1);
        prop_assert_eq!(sep.signs, vec![-1, 1]);
    }

    #[test]
    fn denormalized_limits_match_states(a in values(1.0)) {
        let w = interior(&a, -1.0, 1.0);
        let fd = FrontData::normalized();
        let p = denormalize_profile(&w, &fd);
        prop_assert_eq!(p.r[0], fd.r_minus);
        prop_assert_eq!(*p.r.last().unwrap(), fd.r_plus);
        prop_assert_eq!(p.v[0], fd.v_minus);
        prop_assert_eq!(*p.v.last().unwrap(), fd.v_plus);
    }

    #[test]
    fn profile_csv_round_trip(a in values(2.0)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let w = interior(&a, -1.0, 1.0);
        write_profile(&path, &w).unwrap();
        prop_assert_eq!(read_profile(&path, grid()).unwrap(), w);
    }

    #[test]
    fn constant_chain_stays_constant(r in -1.5f64..1.5, v in -1.0f64..1.0) {
        let pot = Potential::quartic(0.1);
        let s = ChainState::constant(50, r, v, 0.01);
        let out = evolve(&s, &pot, 1.0, 100.0).unwrap();
        prop_assert!(out.r.iter().all(|&x| (x - r).abs() <= 1e-12));
        prop_assert!(out.v.iter().all(|&x| (x - v).abs() <= 1e-12));
    }
}
