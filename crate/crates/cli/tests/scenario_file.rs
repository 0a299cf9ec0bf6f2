use congested_crowd::scenario_file::{parse_scenario, serialize_scenario, MAX_SEED};
use congested_crowd_core::preset::Bump;
use congested_crowd_core::{DensityPreset, Grid, Order, Scenario, Tolerances, VelocityPreset};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = Grid> {
    (prop_oneof![Just(1usize), Just(2usize)], 0.02f64..0.25, 2usize..40, 2usize..40).prop_filter_map(
        "domain too small",
        |(dim, h, nx, ny)| Grid::new(dim, [h * nx as f64, h * ny as f64], [nx, ny]).ok(),
    )
}

fn point(dim: usize) -> impl Strategy<Value = [f64; 2]> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(move |(x, y)| [x, if dim == 2 { y } else { 0.0 }])
}

fn bump(dim: usize) -> impl Strategy<Value = Bump> {
    (point(dim), 0.01f64..1.0, 0.1f64..3.0).prop_map(|(center, radius, weight)| Bump { center, radius, weight })
}

fn initial(g: &Grid) -> impl Strategy<Value = DensityPreset> {
    let dim = g.dim();
    let n = g.len();
    prop_oneof![
        Just(DensityPreset::Uniform),
        Just(DensityPreset::Noise),
        (point(dim), point(dim)).prop_map(move |(a, b)| {
            let mut hi = [a[0] + b[0].abs() + 0.1, a[1] + b[1].abs() + 0.1];
            if dim == 1 {
                hi[1] = 0.0;
            }
            DensityPreset::Box { lo: a, hi }
        }),
        bump(dim).prop_map(DensityPreset::Bump),
        (bump(dim), bump(dim)).prop_map(|(a, b)| DensityPreset::TwoBumps(a, b)),
        proptest::collection::vec(0.0f64..1.0, n).prop_map(DensityPreset::Table),
    ]
}

fn velocity(g: &Grid) -> BoxedStrategy<VelocityPreset> {
    let dim = g.dim();
    let n = g.len();
    let mut options = vec![
        Just(VelocityPreset::Zero).boxed(),
        point(dim).prop_map(VelocityPreset::Constant).boxed(),
        (point(dim), -3.0f64..3.0)
            .prop_map(|(center, strength)| VelocityPreset::PotentialWell { center, strength })
            .boxed(),
        proptest::collection::vec(-2.0f64..2.0, 0..4)
            .prop_flat_map(|mut breaks| {
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
                let k = breaks.len() + 1;
                (Just(breaks), proptest::collection::vec(-2.0f64..2.0, k))
            })
            .prop_map(|(breaks, values)| VelocityPreset::PiecewiseX { breaks, values })
            .boxed(),
        proptest::collection::vec(point(dim), n).prop_map(VelocityPreset::Table).boxed(),
    ];
    if dim == 2 {
        options.push(
            (point(2), -2.0f64..2.0)
                .prop_map(|(center, omega)| VelocityPreset::Rotation { center, omega })
                .boxed(),
        );
    }
    proptest::strategy::Union::new(options).boxed()
}

fn tolerances() -> impl Strategy<Value = Tolerances> {
    (
        (1e-14f64..1e-2, 1e-12f64..1e-2, 1e-12f64..1e-2, 1e-12f64..1e-2),
        (1usize..100_000, 1e-12f64..1e-2, 1e-12f64..1e-2, 1e-12f64..1e-2),
        (1usize..100_000, 1usize..10_000_000, 0.01f64..=1.0),
    )
        .prop_map(|((mass, constraint, saturation, cone_stop), (cone_max_iter, ortho, duality, marginal), (sinkhorn_max_iter, lp_pair_cap, cfl))| Tolerances {
            mass,
            constraint,
            saturation,
            cone_stop,
            cone_max_iter,
            ortho,
            duality,
            marginal,
            sinkhorn_max_iter,
            lp_pair_cap,
            cfl,
        })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    grid().prop_flat_map(|g| {
        (
            initial(&g),
            velocity(&g),
            (prop_oneof![Just(Order::First), Just(Order::Second)], 1e-5f64..0.1, 1.0f64..100.0),
            (1usize..50, any::<bool>(), any::<bool>(), 0..=MAX_SEED),
            tolerances(),
            Just(g),
        )
            .prop_map(|(initial, velocity, (order, tau, steps), (frame_every, pressure, step_distance, seed), tolerances, grid)| Scenario {
                grid,
                initial,
                velocity,
                order,
                horizon: tau * steps,
                tau,
                frame_every,
                pressure,
                step_distance,
                tolerances,
                seed,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialized_scenarios_parse_back(s in scenario()) {
        let text = serialize_scenario(&s).unwrap();
        let back = parse_scenario(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, s);
    }
}
