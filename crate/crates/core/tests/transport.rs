use approx::assert_relative_eq;
use congested_crowd_core::analysis::random_density;
use congested_crowd_core::rng::Rng;
use congested_crowd_core::transport::*;
use congested_crowd_core::{DensityField, Error, Grid, Tolerances};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Brute force over the one free parameter of a 2×2 plan.
fn brute_force_2x2(grid: &Grid, src: [(usize, f64); 2], dst: [(usize, f64); 2]) -> f64 {
    let cv = grid.cell_volume();
    let (a1, a2) = (src[0].1 * cv, src[1].1 * cv);
    let (b1, _) = (dst[0].1 * cv, dst[1].1 * cv);
    let lo = (a1 - (a1 + a2 - b1)).max(0.0);
    let hi = a1.min(b1);
    let c = |i: usize, j: usize| grid.distance2(src[i].0, dst[j].0);
    let mut best = f64::INFINITY;
    let n = 20_000;
    for k in 0..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        let plan = [[x, a1 - x], [b1 - x, a2 - b1 + x]];
        let cost: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| plan[i][j] * c(i, j)).sum();
        best = best.min(cost);
    }
    best
}

#[test]
fn two_by_two_matches_brute_force() {
    let g = Grid::rect([2.0, 2.0], [4, 4]).unwrap();
    let mut rng = Rng::seeded(11);
    for _ in 0..20 {
        let cells: Vec<usize> = (0..4).map(|_| rng.below(16)).collect();
        if cells[0] == cells[1] || cells[2] == cells[3] {
            continue;
        }
        let w = rng.range(0.1, 0.9);
        let v = rng.range(0.1, 0.9);
        let mut a = vec![0.0; 16];
        let mut b = vec![0.0; 16];
        a[cells[0]] = w;
        a[cells[1]] = 1.0 - w;
        b[cells[2]] = v;
        b[cells[3]] = 1.0 - v;
        let a = DensityField::normalized(g, a).unwrap();
        let b = DensityField::normalized(g, b).unwrap();
        let expected = brute_force_2x2(
            &g,
            [(cells[0], a.values()[cells[0]]), (cells[1], a.values()[cells[1]])],
            [(cells[2], b.values()[cells[2]]), (cells[3], b.values()[cells[3]])],
        );
        let got = lp_transport(&a, &b, &tol()).unwrap().cost;
        assert_relative_eq!(got, expected, max_relative = 1e-9);
    }
}

#[test]
fn translation_distance_is_the_shift() {
    let g = Grid::rect([2.0, 2.0], [12, 12]).unwrap();
    let h = g.spacing(0);
    let block = |x0: usize, y0: usize| {
        let mut v = vec![0.0; g.len()];
        for y in y0..y0 + 3 {
            for x in x0..x0 + 4 {
                v[g.index(x, y)] = 1.0;
            }
        }
        DensityField::normalized(g, v).unwrap()
    };
    let a = block(1, 2);
    let b = block(4, 6);
    // Shift (3, 4) cells.
    assert_relative_eq!(w2_lp(&a, &b, &tol()).unwrap(), 5.0 * h, max_relative = 1e-12);
}

#[test]
fn lp_agrees_with_quantile_formula_in_1d() {
    let g = Grid::line(2.0, 32).unwrap();
    for seed in 0..20 {
        let a = random_density(&g, 2 * seed, 3.0).unwrap();
        let b = random_density(&g, 2 * seed + 1, 3.0).unwrap();
        let lp = w2_lp(&a, &b, &tol()).unwrap();
        let q = w2_exact_1d(&a, &b).unwrap();
        assert!((lp - q).abs() <= 1e-9, "seed {seed}: {lp} vs {q}");
    }
}

#[test]
fn potentials_certify_the_plan() {
    let g = Grid::rect([2.0, 2.0], [7, 7]).unwrap();
    for seed in 0..10 {
        let a = random_density(&g, 100 + seed, 2.0).unwrap();
        let b = random_density(&g, 200 + seed, 2.0).unwrap();
        let t = lp_transport(&a, &b, &tol()).unwrap();
        assert!(t.potentials.max_violation(&g) <= 1e-12);
        let gap = t.duality_gap(&a, &b);
        assert!(gap.abs() <= 1e-9 * (1.0 + t.cost), "gap {gap}");
        assert!(t.plan.marginal_error(&a, &b) <= 1e-12);
    }
}

#[test]
fn triangle_inequality_and_symmetry() {
    let g = Grid::rect([2.0, 2.0], [6, 6]).unwrap();
    for seed in 0..10 {
        let a = random_density(&g, 3 * seed, 2.0).unwrap();
        let b = random_density(&g, 3 * seed + 1, 2.0).unwrap();
        let c = random_density(&g, 3 * seed + 2, 2.0).unwrap();
        let ab = w2_lp(&a, &b, &tol()).unwrap();
        let ba = w2_lp(&b, &a, &tol()).unwrap();
        let bc = w2_lp(&b, &c, &tol()).unwrap();
        let ac = w2_lp(&a, &c, &tol()).unwrap();
        assert!((ab - ba).abs() <= 1e-12);
        assert!(ac <= ab + bc + 1e-12);
    }
}

#[test]
fn sinkhorn_tracks_exact_cost() {
    let g = Grid::line(2.0, 32).unwrap();
    let a = random_density(&g, 5, 2.0).unwrap();
    let b = random_density(&g, 6, 2.0).unwrap();
    let exact = w2_lp(&a, &b, &tol()).unwrap();
    let s = sinkhorn_w2(&a, &b, default_epsilon(&g), &tol()).unwrap();
    assert!(s >= exact * (1.0 - 1e-9));
    assert!((s - exact).abs() <= 0.01 * exact, "{s} vs {exact}");
}

#[test]
fn anisotropic_grid_needs_sinkhorn() {
    let g = Grid::rect([2.0, 1.0], [8, 8]).unwrap();
    let a = random_density(&g, 1, 2.0).unwrap();
    let b = random_density(&g, 2, 2.0).unwrap();
    assert!(lp_transport(&a, &b, &tol()).is_err());
    assert!(sinkhorn_w2(&a, &b, default_epsilon(&g), &tol()).is_ok());
}

#[test]
fn interpolation_moves_mass_halfway() {
    let g = Grid::line(2.0, 40).unwrap();
    let cell = |k: usize| {
        let mut v = vec![0.0; 40];
        v[k] = 1.0;
        DensityField::normalized(g, v).unwrap()
    };
    let t = lp_transport(&cell(4), &cell(14), &tol()).unwrap();
    let mid = displacement_interpolate(&cell(4), &t.plan, 0.5).unwrap();
    assert_relative_eq!(mid.values()[9], cell(9).values()[9], max_relative = 1e-12);
    let map = optimal_map(&cell(4), &cell(14), &tol()).unwrap();
    assert_relative_eq!(map[4].unwrap()[0], g.center(14)[0], max_relative = 1e-12);
    assert!(map[0].is_none());
}

/// `2·𝟙` on a block of 2m cells spreads to `1` on 4m cells around the same
/// center; cell `k` of the source splits evenly into target cells `2k`, `2k+1`.
#[test]
fn symmetric_spreading_matches_explicit_plan() {
    let n = 64;
    let g = Grid::line(2.0, n).unwrap();
    let h = g.spacing(0);
    let (start, width) = (24, 16);
    let mut v = vec![0.0; n];
    for x in v.iter_mut().skip(start).take(width) {
        *x = 2.0;
    }
    let rho = DensityField::from_values(g, v).unwrap();
    let r = wasserstein_project_with_report(&rho).unwrap();
    let out_start = start - width / 2;
    for (i, &x) in r.density.values().iter().enumerate() {
        let expected = if (out_start..out_start + 2 * width).contains(&i) { 1.0 } else { 0.0 };
        assert!((x - expected).abs() < 1e-12, "cell {i}: {x}");
    }
    let mut cost = 0.0;
    for k in 0..width {
        let src = g.center(start + k)[0];
        for j in [out_start + 2 * k, out_start + 2 * k + 1] {
            let d = src - g.center(j)[0];
            cost += h * d * d;
        }
    }
    assert_relative_eq!(r.cost, cost, max_relative = 1e-12);
}

#[test]
fn projection_in_2d_is_feasible_and_optimal() {
    let g = Grid::rect([2.0, 2.0], [10, 10]).unwrap();
    let tol = tol();
    for seed in 0..5 {
        let rho = random_density(&g, 40 + seed, 6.0).unwrap();
        assert!(rho.max() > 1.0);
        let r = wasserstein_project_with_report(&rho).unwrap();
        assert!(r.density.max() <= 1.0 + 1e-12);
        assert_relative_eq!(r.density.mass(), 1.0, max_relative = 1e-12);
        // The reported cost is the transport cost to the projection.
        let w = lp_transport(&rho, &r.density, &tol).unwrap().cost;
        assert_relative_eq!(r.cost, w, max_relative = 1e-9, epsilon = 1e-15);
        // Any other feasible density is farther away.
        for k in 0..3 {
            let other = wasserstein_project(&random_density(&g, 1000 + 10 * seed + k, 3.0).unwrap()).unwrap();
            assert!(lp_transport(&rho, &other, &tol).unwrap().cost >= r.cost - 1e-12);
        }
    }
}

#[test]
fn projection_rejects_anisotropic_grids_only_when_needed() {
    let g = Grid::rect([2.0, 1.0], [8, 8]).unwrap();
    assert!(wasserstein_project(&DensityField::uniform(g)).is_ok());
    let mut v = vec![0.0; 64];
    v[0] = 1.0;
    let spike = DensityField::normalized(g, v).unwrap();
    assert!(matches!(wasserstein_project(&spike), Err(Error::InvalidGrid(_))));
}

fn spiky(grid: &Grid, seed: u64, mass: f64) -> DensityField {
    let mut rng = Rng::seeded(seed);
    let raw: Vec<f64> = (0..grid.len()).map(|_| rng.uniform().powi(5)).collect();
    let total: f64 = raw.iter().sum::<f64>() * grid.cell_volume();
    DensityField::from_values(*grid, raw.iter().map(|x| x * mass / total).collect()).unwrap()
}

fn grids() -> impl Strategy<Value = Grid> {
    prop_oneof![
        Just(Grid::line(2.0, 48).unwrap()),
        Just(Grid::rect([2.0, 2.0], [9, 9]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_feasible_mass_preserving_and_idempotent(grid in grids(), seed in any::<u64>(), mass in 0.3f64..1.8) {
        let rho = spiky(&grid, seed, mass);
        let p = wasserstein_project(&rho).unwrap();
        prop_assert!(p.max() <= 1.0 + 1e-12);
        prop_assert!((p.mass() - rho.mass()).abs() <= 1e-12 * rho.mass().max(1.0));
        prop_assert_eq!(wasserstein_project(&p).unwrap(), p);
    }

    #[test]
    fn projection_is_monotone(grid in grids(), seed in any::<u64>(), mass in 0.3f64..1.0, extra in 0.05f64..0.8) {
        let rho = spiky(&grid, seed, mass);
        let add = spiky(&grid, seed ^ 0x5555, extra);
        let eta = DensityField::from_values(grid, rho.values().iter().zip(add.values()).map(|(a, b)| a + b).collect()).unwrap();
        let pr = wasserstein_project(&rho).unwrap();
        let pe = wasserstein_project(&eta).unwrap();
        for (a, b) in pr.values().iter().zip(pe.values()) {
            prop_assert!(*a <= *b + 1e-8);
        }
    }

    #[test]
    fn projection_contracts_l1(grid in grids(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = spiky(&grid, s1, 1.0);
        let b = spiky(&grid, s2, 1.0);
        let pa = wasserstein_project(&a).unwrap();
        let pb = wasserstein_project(&b).unwrap();
        let before = congested_crowd_core::l1_distance(&a, &b).unwrap();
        let after = congested_crowd_core::l1_distance(&pa, &pb).unwrap();
        prop_assert!(after <= before + 1e-8);
    }

    #[test]
    fn quantile_and_lp_agree(seed in any::<u64>(), n in 4usize..24) {
        let g = Grid::line(2.0, n).unwrap();
        let a = spiky(&g, seed, 1.0);
        let b = spiky(&g, seed.wrapping_add(1), 1.0);
        let lp = w2_lp(&a, &b, &tol()).unwrap();
        prop_assert!((lp - w2_exact_1d(&a, &b).unwrap()).abs() <= 1e-9);
    }
}
