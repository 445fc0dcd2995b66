use proptest::prelude::*;

use commcost::noise::NoiseParams;
use commcost::strategy::{
    crossover, execute, frontier, intermediate_presets, run_rng, yield_estimate, CostReport,
    CurvePoint, Family,
};

fn family(cluster: bool) -> Family {
    if cluster {
        Family::Cluster
    } else {
        Family::Ghz
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_targets_cost_one_use_per_edge(n in 3usize..=9, pick in any::<prop::sample::Index>(), cluster: bool, seed: u64) {
        let all = intermediate_presets(n, 3);
        prop_assume!(!all.is_empty());
        let st = &all[pick.index(all.len())];
        let m = 16;
        let p = NoiseParams::depolarizing(0.9, 0.99).unwrap();
        let rs = execute(st, family(cluster), n, m, &p, &mut run_rng(seed, 0, 0)).unwrap();
        prop_assert_eq!(rs.channel_uses, ((n - 1) * m) as u64);
        let again = execute(st, family(cluster), n, m, &p, &mut run_rng(seed, 0, 0)).unwrap();
        prop_assert_eq!(&rs, &again);
        if rs.n_final > 0 {
            let report = CostReport::new(st.to_string(), n, st.purification_steps(), &rs).unwrap();
            let y = yield_estimate(&rs).value;
            prop_assert!((report.cost() - (n - 1) as f64 / y).abs() <= 1e-9 * report.cost());
        }
    }

    #[test]
    fn frontiers_never_cross_themselves(points in prop::collection::vec((0.3f64..1.0, 1.0f64..100.0), 1..12)) {
        let pts: Vec<CurvePoint> = points.iter().map(|&(f, c)| CurvePoint::new(f, c)).collect();
        let front = frontier(&pts);
        prop_assert!(crossover(&front, &front).is_none());
    }
}
