//! Invariants checked on generated instances.

mod common;

use common::*;
use gwcoarse::gw::{gw_cost, normalized_plan_norm, solve_gw, solve_inner_ot, GwConfig, GwInit};
use gwcoarse::heavy_edge::heavy_edge_baseline;
use gwcoarse::kgc::{objective, objective_trace_form, refine, run_kgc, KgcConfig, KgcInit};
use gwcoarse::linalg::Mat;
use gwcoarse::spectral::{bound_single, compression_spectra, interlacing_violation};
use gwcoarse::{build_operators, coarsen_similarity, membership_transport_plan, Magnitude, Partition, TransportPlan};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..14).prop_flat_map(|(seed, n)| (Just(seed), Just(n), 1..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interlacing_holds((seed, n, k) in instance()) {
        let mut r = rng(seed);
        let (_, net) = random_net(&mut r, n);
        let ops = build_operators(&random_partition(&mut r, n, k), net.masses()).unwrap();
        let sp = compression_spectra(&net, &ops).unwrap();
        prop_assert!(interlacing_violation(&sp.lambda, &sp.lambda_c) <= 1e-9);
    }

    #[test]
    fn objective_forms_agree((seed, n, k) in instance()) {
        let mut r = rng(seed);
        let (_, net) = random_net(&mut r, n);
        let p = random_partition(&mut r, n, k);
        let a = objective(&net, &p).unwrap();
        let b = objective_trace_form(&net, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn kgc_trace_is_monotone((seed, n, k) in instance(), iters in 1usize..20) {
        let mut r = rng(seed);
        let (_, net) = random_net(&mut r, n);
        let res = run_kgc(&net, &KgcConfig::new(k, KgcInit::Random(seed)).with_max_iter(iters)).unwrap();
        prop_assert!(res.iterations <= iters);
        for w in res.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
        prop_assert_eq!(res.partition.n_clusters(), k);
        prop_assert!((objective(&net, &res.partition).unwrap() - res.objective()).abs() < 1e-9);
    }

    #[test]
    fn refine_never_hurts((seed, n, k) in instance()) {
        let mut r = rng(seed);
        let (g, net) = random_net(&mut r, n);
        let start = heavy_edge_baseline(&g, k).unwrap();
        prop_assert_eq!(start.n_clusters(), k);
        let before = objective(&net, &start).unwrap();
        let res = refine(&net, &start, &KgcConfig::new(k, KgcInit::PlusPlus(0))).unwrap();
        prop_assert!(res.objective() <= before + 1e-9);
    }

    #[test]
    fn bound_chain((seed, n, k) in instance()) {
        let mut r = rng(seed);
        let (_, net) = random_net(&mut r, n);
        let ops = build_operators(&random_partition(&mut r, n, k), net.masses()).unwrap();
        let report = bound_single(&net, &ops).unwrap();
        prop_assert!(report.membership_cost <= report.bound_rhs + 1e-8);
        prop_assert!((report.membership_cost - report.membership_cost_frobenius).abs() < 1e-9);
        let coarse = coarsen_similarity(&net, &ops, Magnitude::Averaging).unwrap();
        let plan = membership_transport_plan(&ops);
        prop_assert!((gw_cost(&net, &coarse, &plan).unwrap() - report.membership_cost).abs() < 1e-9);
    }

    #[test]
    fn self_distance_vanishes(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let (_, net) = random_net(&mut r, n.max(2));
        let diag = TransportPlan::diagonal(net.masses());
        let scale = net.weighted_similarity().dot(&net.weighted_similarity());
        prop_assert!(gw_cost(&net, &net, &diag).unwrap().abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn fw_trace_monotone_and_plan_feasible(seed in any::<u64>(), n1 in 2usize..9, n2 in 2usize..9) {
        let mut r = rng(seed);
        let (_, a) = random_net(&mut r, n1);
        let (_, b) = random_net(&mut r, n2);
        let cfg = GwConfig::default().with_init(GwInit::Random(seed)).with_restarts(1);
        let res = solve_gw(&a, &b, &cfg).unwrap();
        for w in res.trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
        }
        prop_assert!(res.plan.marginal_residual() <= 1e-8);
        prop_assert!(res.plan.matrix().as_slice().iter().all(|&x| x >= 0.0));
        prop_assert!((gw_cost(&a, &b, &res.plan).unwrap() - res.value).abs() < 1e-9);
    }

    #[test]
    fn plan_norm_at_most_one(seed in any::<u64>(), m in 1usize..9, n in 1usize..9) {
        let mut r = rng(seed);
        let a = random_masses(&mut r, m);
        let b = random_masses(&mut r, n);
        let t = random_plan(&mut r, &a, &b);
        prop_assert!(normalized_plan_norm(t.matrix()).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn inner_ot_is_feasible_vertex(seed in any::<u64>(), m in 1usize..12, n in 1usize..12) {
        let mut r = rng(seed);
        let a = random_masses(&mut r, m);
        let b = random_masses(&mut r, n);
        let cost = Mat::from_fn(m, n, |i, j| ((seed as usize + 7 * i + 13 * j) % 17) as f64);
        let plan = solve_inner_ot(&cost, &a, &b).unwrap();
        prop_assert!(plan.marginal_residual() < 1e-12);
        let support = plan.matrix().as_slice().iter().filter(|&&x| x > 0.0).count();
        prop_assert!(support < m + n);
    }

    #[test]
    fn heavy_edge_is_deterministic_and_sized(seed in any::<u64>(), n in 2usize..20) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.2);
        for k in 1..=n {
            let p = heavy_edge_baseline(&g, k).unwrap();
            prop_assert_eq!(p.n_clusters(), k);
            prop_assert_eq!(&p, &heavy_edge_baseline(&g, k).unwrap());
        }
    }
}

#[test]
fn identity_partition_is_lossless() {
    let mut r = rng(1);
    for n in 2..10 {
        let (_, net) = random_net(&mut r, n);
        let ops = build_operators(&Partition::identity(n), net.masses()).unwrap();
        let report = bound_single(&net, &ops).unwrap();
        assert!(report.delta.abs() < 1e-9);
        assert!(report.membership_cost.abs() < 1e-9);
    }
}
