use congested_crowd_core::analysis::*;
use congested_crowd_core::dynamics::run;
use congested_crowd_core::preset::Bump;
use congested_crowd_core::{DensityPreset, Error, Grid, Order, PressureField, Scenario, Tolerances, VelocityPreset};
use proptest::prelude::*;

fn well() -> VelocityPreset {
    VelocityPreset::PotentialWell { center: [1.0, 0.0], strength: 1.0 }
}

fn bump(center: f64) -> DensityPreset {
    DensityPreset::Bump(Bump { center: [center, 0.0], radius: 0.4, weight: 1.0 })
}

fn scenario(initial: DensityPreset, velocity: VelocityPreset, cells: usize, horizon: f64, tau: f64, order: Order) -> Scenario {
    let mut s = Scenario::new(Grid::line(2.0, cells).unwrap(), initial, velocity, order, horizon, tau);
    s.pressure = false;
    s.frame_every = 10;
    s
}

#[test]
fn lambda_of_closed_form_drifts() {
    let g = Grid::rect([2.0, 2.0], [8, 8]).unwrap();
    let k = 1.7;
    let w = VelocityPreset::PotentialWell { center: [1.0, 1.0], strength: k };
    assert!((exhaustive_lambda(&w, &g, 0.0).unwrap() + k).abs() < 1e-12);
    assert!((estimate_lambda(&w, &g, 0.0, 100, 3).unwrap() + k).abs() < 1e-12);
    let r = VelocityPreset::Rotation { center: [1.0, 1.0], omega: 2.0 };
    assert!(exhaustive_lambda(&r, &g, 0.0).unwrap().abs() < 1e-12);
    assert_eq!(lambda_for(&r, &g, 10, 0).unwrap(), (0.0, LambdaSource::Analytic));
}

#[test]
fn expanding_jump_has_a_large_constant() {
    let g = Grid::line(2.0, 32).unwrap();
    let u = VelocityPreset::PiecewiseX { breaks: vec![1.0], values: vec![-1.0, 1.0] };
    let h = g.spacing(0);
    // Adjacent cells across the jump give 2/h.
    assert!((exhaustive_lambda(&u, &g, 0.0).unwrap() - 2.0 / h).abs() < 1e-9);
    let (l, src) = lambda_for(&u, &g, 50_000, 1).unwrap();
    assert_eq!(src, LambdaSource::Estimated);
    assert!(l <= 2.0 / h + 1e-9);
}

#[test]
fn contraction_report_for_the_potential_well() {
    let a = run(&scenario(bump(0.6), well(), 128, 1.0, 2e-3, Order::First)).unwrap();
    let b = run(&scenario(bump(1.3), well(), 128, 1.0, 2e-3, Order::First)).unwrap();
    let tol = Tolerances::default();
    let r = w2_contraction_report(&a, &b, -1.0, W2_SLACK, &tol).unwrap();
    assert!(r.verdict, "{r:?}");
    assert_eq!(r.times.len(), a.frames.len());
    assert!((r.bounds[0] - r.distances[0]).abs() < 1e-15);
    assert!(r.distances.last().unwrap() < &r.distances[0]);
    // A weaker rate is still a valid bound.
    let loose = w2_contraction_report(&a, &b, 0.0, W2_SLACK, &tol).unwrap();
    assert!(loose.verdict && loose.max_slack <= r.max_slack);
    // A rate the dynamics cannot achieve fails.
    let strict = w2_contraction_report(&a, &b, -5.0, W2_SLACK, &tol).unwrap();
    assert!(!strict.verdict);
}

#[test]
fn l1_contraction_with_diffusion() {
    let u = VelocityPreset::PiecewiseX { breaks: vec![0.7, 1.3], values: vec![1.0, -0.5, -1.0] };
    let a = run(&scenario(bump(0.5), u.clone(), 64, 0.3, 5e-3, Order::Second)).unwrap();
    let b = run(&scenario(DensityPreset::Noise, u, 64, 0.3, 5e-3, Order::Second)).unwrap();
    let r = l1_contraction_report(&a, &b, L1_SLACK).unwrap();
    assert!(r.verdict, "{r:?}");
    assert!(matches!(r.mode, ContractionMode::L1));
}

#[test]
fn misaligned_trajectories_are_rejected() {
    let a = run(&scenario(bump(0.6), well(), 32, 0.1, 1e-2, Order::First)).unwrap();
    let b = run(&scenario(bump(0.6), well(), 32, 0.2, 1e-2, Order::First)).unwrap();
    assert!(matches!(l1_contraction_report(&a, &b, L1_SLACK), Err(Error::Misaligned(_))));
    let c = run(&scenario(bump(0.6), well(), 64, 0.1, 1e-2, Order::First)).unwrap();
    assert!(matches!(w2_contraction_report(&a, &c, 0.0, W2_SLACK, &Tolerances::default()), Err(Error::Misaligned(_))));
}

/// With `ρ₁ = ρ₀` the potential is only pinned down to `|φ_i − φ_k| ≤ ½|x_i − x_k|²`
/// on the support, so its central-difference gradient there is at most `h`;
/// with `ρ ≤ 1` and unit mass the integral is below `h ‖∇p‖`.
#[test]
fn identical_densities_give_an_order_h_potential() {
    let g = Grid::line(2.0, 48).unwrap();
    let tol = Tolerances::default();
    let rho = random_smooth_density(&g, 4).unwrap();
    let p = random_smooth_pressure(&g, 4).unwrap();
    let r = verify_positivity(&rho, &rho, &p, &tol).unwrap();
    let h = g.spacing(0);
    assert!(r.integral.abs() <= h * r.grad_p_norm, "{r:?}");
}

/// The worst negative part, relative to `‖∇p‖‖∇φ‖`, is `C_h · h`. A constant
/// calibrated on the two coarsest grids must still bound the next two.
#[test]
fn positivity_band_is_order_h() {
    let study = positivity_study(&Grid::line(2.0, 32).unwrap(), 4, 40, 0, &Tolerances::default()).unwrap();
    assert!(study.verdict, "{study:?}");
    assert!(study.calibrated > 0.0);
    assert!(study.levels.iter().all(|l| l.instances == 40));
    assert_eq!(study.levels[3].grid.nx(), 256);
}

#[test]
fn geodesic_derivative_matches_within_the_stated_band() {
    let tol = Tolerances::default();
    for g in [Grid::line(2.0, 128).unwrap(), Grid::rect([2.0, 2.0], [16, 16]).unwrap()] {
        let d = derivative_study(&g, 6, 0, &tol).unwrap();
        assert!(d.verdict, "{d:?}");
        assert_eq!(d.band, 10.0 * g.spacing(0));
        assert!(d.reports.iter().all(|r| r.gap <= d.band));
    }
}

#[test]
fn geodesic_derivative_gap_shrinks_under_refinement() {
    let tol = Tolerances::default();
    let gap = |cells: usize| {
        let g = Grid::line(2.0, cells).unwrap();
        (0..6)
            .map(|seed| {
                let r0 = random_smooth_density(&g, 2 * seed).unwrap();
                let r1 = random_smooth_density(&g, 2 * seed + 1).unwrap();
                let p = random_smooth_pressure(&g, seed).unwrap();
                verify_geodesic_derivative(&r0, &r1, &p, &tol).unwrap().gap
            })
            .fold(0.0, f64::max)
    };
    assert!(gap(256) < gap(64));
}

#[test]
fn studies_need_feasible_inputs() {
    let g = Grid::line(2.0, 16).unwrap();
    let spiky = random_density(&g, 1, 8.0).unwrap();
    assert!(spiky.max() > 1.0);
    let ok = random_feasible_density(&g, 2, 8.0).unwrap();
    let p = PressureField::zeros(g);
    assert!(verify_positivity(&spiky, &ok, &p, &Tolerances::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn more_samples_never_lower_the_estimate(seed in any::<u64>(), n in 2usize..200) {
        let g = Grid::rect([2.0, 2.0], [6, 6]).unwrap();
        let u = VelocityPreset::Table((0..36).map(|i| [((i * 7) % 5) as f64 - 2.0, ((i * 3) % 4) as f64 - 1.5]).collect());
        let a = estimate_lambda(&u, &g, 0.0, n, seed).unwrap();
        let b = estimate_lambda(&u, &g, 0.0, 2 * n, seed).unwrap();
        prop_assert!(b >= a);
        prop_assert!(b <= exhaustive_lambda(&u, &g, 0.0).unwrap() + 1e-12);
    }

    #[test]
    fn smooth_instances_are_feasible_unit_mass(seed in any::<u64>()) {
        let g = Grid::rect([2.0, 2.0], [10, 10]).unwrap();
        let rho = random_smooth_density(&g, seed).unwrap();
        prop_assert!(rho.max() <= 1.0 + 1e-12);
        prop_assert!((rho.mass() - 1.0).abs() < 1e-12);
        prop_assert!(random_smooth_pressure(&g, seed).unwrap().values().iter().all(|p| *p > 0.0));
    }
}
