use etcon::analysis::{conservation_residual, lyapunov_series, lyapunov_v, trigger_excess};
use etcon::cli::{generate_random, Topology};
use etcon::graph::{
    build_laplacian, condense, spectral_ratio, symmetric_eigenvalues, WeightedDigraph,
};
use etcon::nonlinearity::Component;
use etcon::prelude::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn random_file(seed: u64, n: usize, p: usize, topology: Topology) -> etcon::cli::ScenarioFile {
    generate_random(n, p, seed, topology).unwrap()
}

fn random_scenario(seed: u64, n: usize, p: usize, topology: Topology, horizon: f64) -> Scenario {
    let mut f = random_file(seed, n, p, topology);
    f.horizon = horizon;
    f.to_scenario().unwrap()
}

fn adjacency() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.1f64..3.0], n * n).prop_map(move |w| {
            let mut m = DMatrix::from_vec(n, n, w);
            m.fill_diagonal(0.0);
            m
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_rows_sum_to_zero(a in adjacency()) {
        let g = WeightedDigraph::from_adjacency(a).unwrap();
        let l = build_laplacian(&g);
        for i in 0..g.n() {
            let s: f64 = (0..g.n()).map(|j| l.get(i, j)).sum();
            prop_assert!(s.abs() <= 1e-12);
        }
    }

    #[test]
    fn left_vector_ignores_weight_scale(seed in 0u64..10_000, n in 2usize..10, c in 0.01f64..100.0) {
        let g = random_file(seed, n, 1, Topology::Strong).graph.to_graph().unwrap();
        let scaled = WeightedDigraph::from_adjacency(g.adjacency() * c).unwrap();
        let xi = condense(&g).unwrap().global_xi().unwrap();
        let xs = condense(&scaled).unwrap().global_xi().unwrap();
        for (a, b) in xi.iter().zip(&xs) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn symmetrised_laplacian_has_one_zero_mode(seed in 0u64..10_000, n in 2usize..12) {
        let g = random_file(seed, n, 1, Topology::Strong).graph.to_graph().unwrap();
        let xi = condense(&g).unwrap().global_xi().unwrap();
        let l = build_laplacian(&g).entries;
        let xil = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(xi)) * &l;
        let s = &xil + xil.transpose();
        for i in 0..n {
            prop_assert!(s.row(i).sum().abs() <= 1e-10);
        }
        let eig = symmetric_eigenvalues(&s);
        prop_assert!(eig[0].abs() <= 1e-8);
        prop_assert!(eig[1] > 1e-8);
    }

    #[test]
    fn open_blocks_positive_and_closed_certificate_holds(seed in 0u64..100_000, n in 2usize..12) {
        let g = random_file(seed, n, 1, Topology::SpanningTree).graph.to_graph().unwrap();
        let dec = condense(&g).unwrap();
        prop_assert!(dec.depth() >= 2);
        for b in &dec.blocks[..dec.depth() - 1] {
            prop_assert!(b.q_min_eig > 0.0);
        }
        prop_assert!(spectral_ratio(&dec).certificate_holds(1e-9));
    }

    #[test]
    fn saturation_is_idempotent_and_odd(h in 0.1f64..5.0, x in -1e3f64..1e3) {
        let c = Component::saturation(h).unwrap();
        prop_assert_eq!(c.apply(c.apply(x)), c.apply(x));
        prop_assert_eq!(c.apply(-x), -c.apply(x));
        prop_assert!(c.apply(x).abs() <= h);
    }

    #[test]
    fn antiderivative_nonnegative_and_zero_only_on_level_set(h in 0.5f64..3.0, a in -5.0f64..5.0, x in -8.0f64..8.0) {
        let f = OutputFunction::saturation(1, h);
        let g = f.antiderivative(0, a, x).unwrap();
        prop_assert!(g >= -1e-12);
        let c = f.component(0);
        if (c.apply(x) - c.apply(a)).abs() > 1e-6 {
            prop_assert!(g > 0.0);
        } else {
            prop_assert!(g.abs() <= 1e-9);
        }
    }

    #[test]
    fn antiderivative_grows_radially(h in 0.5f64..3.0, a in -0.4f64..0.4, sign in prop::bool::ANY) {
        let s = if sign { 1.0 } else { -1.0 };
        for f in [OutputFunction::saturation(1, h), OutputFunction::identity(1)] {
            let v: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|r| f.antiderivative(0, a, s * r).unwrap()).collect();
            prop_assert!(v[0] < v[1] && v[1] < v[2]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_bit_identical(seed in 0u64..10_000, n in 2usize..8) {
        let s = random_scenario(seed, n, 1, Topology::SpanningTree, 8.0);
        let a = run(&s, &EngineConfig::default()).unwrap();
        let b = run(&s, &EngineConfig::default()).unwrap();
        prop_assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            prop_assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
        prop_assert_eq!(a.final_state.as_slice(), b.final_state.as_slice());
    }

    #[test]
    fn flow_is_piecewise_linear_and_continuous(seed in 0u64..10_000, n in 2usize..8, p in 1usize..3) {
        let s = random_scenario(seed, n, p, Topology::Strong, 6.0);
        let r = run(&s, &EngineConfig::default()).unwrap();
        for w in r.segments.windows(2) {
            prop_assert_eq!(w[0].t_end, w[1].t_start);
            let end = w[0].x_end();
            for (a, b) in end.as_slice().iter().zip(w[1].x_start.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
        let last = r.segments.last().unwrap();
        prop_assert_eq!(last.t_end, r.end_time);
        let end = last.x_end();
        prop_assert_eq!(end.as_slice(), r.final_state.as_slice());
    }

    #[test]
    fn threshold_respected_at_every_sample(seed in 0u64..10_000, n in 2usize..9) {
        let s = random_scenario(seed, n, 1, Topology::SpanningTree, 10.0);
        let r = run(&s, &EngineConfig::default()).unwrap();
        prop_assert!(trigger_excess(&s, &r) <= 1e-8);
    }

    #[test]
    fn broadcast_equals_output_at_last_event(seed in 0u64..10_000, n in 2usize..7) {
        let s = random_scenario(seed, n, 1, Topology::Strong, 5.0);
        let r = run(&s, &EngineConfig::default()).unwrap();
        for sample in r.samples.iter().step_by(37) {
            for i in 0..n {
                let k = r.events[i].partition_point(|&t| t <= sample.t);
                prop_assert!(k > 0);
                let te = r.events[i][k - 1];
                let seg = r.segments.iter().find(|sg| sg.t_start <= te && te <= sg.t_end).unwrap();
                let xi = seg.x_start.get(i, 0) + (te - seg.t_start) * seg.u.get(i, 0);
                let g = s.outputs.for_agent(i).evaluate(&[xi]).unwrap()[0];
                prop_assert!((g - sample.ghat.get(i, 0)).abs() <= 1e-12 * (1.0 + g.abs()));
            }
        }
    }

    #[test]
    fn weighted_average_is_conserved(seed in 0u64..10_000, n in 2usize..10, p in 1usize..3) {
        let s = random_scenario(seed, n, p, Topology::SpanningTree, 10.0);
        let r = run(&s, &EngineConfig::default()).unwrap();
        let dec = condense(&s.graph).unwrap();
        prop_assert!(conservation_residual(&dec, &s.x0, &r) <= 1e-9);
    }

    #[test]
    fn lyapunov_value_nonnegative(seed in 0u64..10_000, n in 2usize..7) {
        let s = random_scenario(seed, n, 1, Topology::Strong, 5.0);
        let r = run(&s, &EngineConfig::default()).unwrap();
        let dec = condense(&s.graph).unwrap();
        let series = lyapunov_series(&dec, &s, &r).unwrap();
        prop_assert!(series.min_value() >= -1e-12);
        let x = r.final_state.clone();
        prop_assert!(lyapunov_v(&dec, &s.outputs, &x, &series.reference).unwrap() >= -1e-12);
    }
}
