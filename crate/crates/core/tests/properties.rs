use proptest::prelude::*;

use creditnet::clearing::clear_observed;
use creditnet::generators::{checks, generate, Topology, TopologySpec};
use creditnet::model::{
    firm_metrics, same_network_up_to_relabelling, weakly_connected_components, PaymentMatrix,
};
use creditnet::operations::{compress_cycles, enumerate_simple_cycles, remove_debts, CycleLimits};
use creditnet::statements::{
    aggregate_statements, build_execution_prompt, parse_extraction_record, parse_plan_reply, records_from_network,
    render_extraction_record, render_plan_block, AggregationOptions, AnomalyKind, CLEARING_SOURCE, DEFAULT_OBJECTIVE,
};
use creditnet::strategies::{
    evaluate_plan, plan_greedy_compression, plan_greedy_removal, plan_none, plan_random, OperationKind,
    StrategyConfig,
};
use creditnet::{clear, verify_fixed_point, ClearingConfig, CreditNetwork, DebtEdge};

/// Small networks with whole-number amounts, so sums are exact.
fn arb_network(max_n: usize) -> impl Strategy<Value = CreditNetwork> {
    (2..=max_n).prop_flat_map(|n| {
        let cells = prop::collection::vec(prop_oneof![2 => Just(0u32), 3 => 1u32..40], n * n);
        let assets = prop::collection::vec(0u32..50, n);
        (cells, assets).prop_map(move |(cells, assets)| {
            let l: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { cells[i * n + j] as f64 }).collect())
                .collect();
            CreditNetwork::unlabelled(l, assets.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

fn arb_generated() -> impl Strategy<Value = (TopologySpec, CreditNetwork)> {
    (4usize..=12, 0usize..4, any::<u64>(), any::<bool>()).prop_map(|(n, k, seed, integer)| {
        let mut spec = TopologySpec::new(Topology::synthetic(n)[k].clone(), n, seed);
        spec.integer_amounts = integer;
        let network = generate(&spec).unwrap();
        (spec, network)
    })
}

fn cfg() -> ClearingConfig {
    ClearingConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn asset_identity_and_equity(network in arb_network(7), scale in 0.0f64..=1.0) {
        // any payment matrix within bounds
        let rows: Vec<Vec<f64>> = network.liability_matrix().iter()
            .map(|r| r.iter().map(|l| (l * scale).floor()).collect()).collect();
        let payments = PaymentMatrix::from_rows(rows.clone()).unwrap();
        let metrics = firm_metrics(&network, &payments).unwrap();
        let total: f64 = metrics.iter().map(|m| m.total_assets).sum();
        let expected = network.external_assets().iter().sum::<f64>() + rows.iter().flatten().sum::<f64>();
        prop_assert_eq!(total, expected);
        for m in &metrics {
            if m.solvent {
                prop_assert_eq!(m.equity, m.total_assets - m.total_liability);
            } else {
                prop_assert_eq!(m.equity, 0.0);
            }
        }
    }

    #[test]
    fn clearing_is_a_bounded_fixed_point(network in arb_network(7)) {
        let r = clear(&network, &cfg()).unwrap();
        let n = network.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert!(r.payments.get(i, j) >= 0.0);
                prop_assert!(r.payments.get(i, j) <= network.liability(i, j));
            }
            if r.metrics[i].solvent {
                prop_assert_eq!(r.payments.row(i), network.row(i));
            }
        }
        prop_assert!(verify_fixed_point(&network, &r.payments, &cfg()).unwrap().residual <= cfg().convergence_tolerance);
    }

    #[test]
    fn picard_iterates_never_increase(network in arb_network(7)) {
        let mut previous: Option<PaymentMatrix> = None;
        clear_observed(&network, &cfg(), |p| {
            if let Some(prev) = &previous {
                for i in 0..p.len() {
                    for j in 0..p.len() {
                        assert!(p.get(i, j) <= prev.get(i, j));
                    }
                }
            }
            previous = Some(p.clone());
        }).unwrap();
    }

    #[test]
    fn components_clear_independently(network in arb_network(8)) {
        let whole = clear(&network, &cfg()).unwrap();
        let parts = weakly_connected_components(&network);
        let total: f64 = parts.iter().map(|p| clear(p, &cfg()).unwrap().total_assets()).sum();
        prop_assert!((total - whole.total_assets()).abs() <= 1e-9);
        let defaults: usize = parts.iter().map(|p| clear(p, &cfg()).unwrap().default_count()).sum();
        prop_assert_eq!(defaults, whole.default_count());
    }

    #[test]
    fn full_recovery_without_shortfall_pays_in_full(network in arb_network(6)) {
        // enough outside money that nobody falls short
        let padded: Vec<f64> = (0..network.len()).map(|i| network.total_liability(i)).collect();
        let rich = CreditNetwork::unlabelled(network.liability_matrix(), padded).unwrap();
        let r = clear(&rich, &ClearingConfig::with_alpha(1.0)).unwrap();
        prop_assert_eq!(r.payments.to_rows(), rich.liability_matrix());
    }

    #[test]
    fn more_endowment_never_lowers_payments(network in arb_network(6), firm in 0usize..6, extra in 1u32..30) {
        let firm = firm % network.len();
        let mut e = network.external_assets().to_vec();
        e[firm] += f64::from(extra);
        let richer = CreditNetwork::unlabelled(network.liability_matrix(), e).unwrap();
        let before = clear(&network, &cfg()).unwrap();
        let after = clear(&richer, &cfg()).unwrap();
        for i in 0..network.len() {
            for j in 0..network.len() {
                prop_assert!(after.payments.get(i, j) >= before.payments.get(i, j) - 1e-9);
            }
        }
    }

    #[test]
    fn clearing_is_deterministic(network in arb_network(7)) {
        let a = clear(&network, &cfg()).unwrap();
        let b = clear(&network, &cfg()).unwrap();
        let bits = |p: &PaymentMatrix| p.to_rows().into_iter().flatten().map(f64::to_bits).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.payments), bits(&b.payments));
    }

    #[test]
    fn compression_conserves_and_shrinks(network in arb_network(6), seed in any::<u64>()) {
        let cycles = enumerate_simple_cycles(&network, &CycleLimits::unlimited()).unwrap();
        let (after, report) = compress_cycles(&network, &cycles, seed).unwrap();
        prop_assert_eq!(after.net_positions(), network.net_positions());
        prop_assert_eq!(after.external_assets(), network.external_assets());
        for i in 0..network.len() {
            for j in 0..network.len() {
                prop_assert!(after.liability(i, j) <= network.liability(i, j));
                prop_assert!(after.liability(i, j) >= 0.0);
            }
        }
        prop_assert_eq!(report.steps.len(), cycles.len());
        // compressing everything leaves the network acyclic
        prop_assert!(enumerate_simple_cycles(&after, &CycleLimits::unlimited()).unwrap().is_empty());
    }

    #[test]
    fn removal_idempotent_and_commutative(network in arb_network(6), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..6)) {
        let edges = network.edges();
        prop_assume!(!edges.is_empty());
        let mut chosen: Vec<DebtEdge> = picks.iter()
            .map(|ix| { let (b, l) = edges[ix.index(edges.len())]; DebtEdge::new(b, l).unwrap() })
            .collect();
        chosen.sort();
        chosen.dedup();
        let (first, second) = chosen.split_at(chosen.len() / 2);
        let once = remove_debts(&network, &chosen).unwrap();
        let ab = remove_debts(&remove_debts(&network, first).unwrap(), second).unwrap();
        let ba = remove_debts(&remove_debts(&network, second).unwrap(), first).unwrap();
        prop_assert_eq!(&ab, &once);
        prop_assert_eq!(&ba, &once);
        // the removed debts are gone, so removing them again is an error or a no-op
        if let Ok(again) = remove_debts(&once, &chosen) {
            prop_assert_eq!(again, once);
        }
    }

    #[test]
    fn none_plan_is_identity_on_totals(network in arb_network(6)) {
        let report = evaluate_plan(&network, &plan_none(&network), &cfg()).unwrap();
        prop_assert_eq!(report.pre_total, report.post_total);
        prop_assert_eq!(report.pre_defaults, report.post_defaults);
    }

    #[test]
    fn greedy_removal_cures_what_it_touches(network in arb_network(6)) {
        let config = StrategyConfig::default();
        let plan = plan_greedy_removal(&network, &config).unwrap();
        let (after, _) = creditnet::strategies::apply_plan(&network, &plan).unwrap();
        let r = clear(&after, &config.clearing).unwrap();
        for edge in plan.edges() {
            prop_assert!(r.metrics[edge.borrower()].solvent, "firm {} not cured", edge.borrower());
        }
    }

    #[test]
    fn strategies_are_deterministic(network in arb_network(6), seed in any::<u64>()) {
        let config = StrategyConfig::default();
        for kind in [OperationKind::Compression, OperationKind::Removal] {
            prop_assert_eq!(
                plan_random(&network, kind, seed, &config).unwrap(),
                plan_random(&network, kind, seed, &config).unwrap()
            );
        }
        prop_assert_eq!(plan_greedy_compression(&network, &config).unwrap(), plan_greedy_compression(&network, &config).unwrap());
        prop_assert_eq!(plan_greedy_removal(&network, &config).unwrap(), plan_greedy_removal(&network, &config).unwrap());
    }

    #[test]
    fn plan_blocks_round_trip(network in arb_network(6), seed in any::<u64>()) {
        let config = StrategyConfig::default();
        for kind in [OperationKind::Compression, OperationKind::Removal] {
            let plan = plan_random(&network, kind, seed, &config).unwrap();
            let parsed = parse_plan_reply(&render_plan_block(&plan, kind), kind).unwrap()
                .into_plan(&network, plan.seed(), plan.provenance()).unwrap();
            prop_assert!(parsed.same_selection(&plan));
        }
    }

    #[test]
    fn execution_prompt_is_pure(network in arb_network(5)) {
        let build = || build_execution_prompt(&network, OperationKind::Removal, CLEARING_SOURCE, DEFAULT_OBJECTIVE, "task");
        prop_assert_eq!(build(), build());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generators_respect_structure((spec, network) in arb_generated()) {
        prop_assert_eq!(network.len(), spec.n);
        prop_assert_eq!(&generate(&spec).unwrap(), &network);
        for i in 0..network.len() {
            prop_assert!((30.0..=50.0).contains(&network.external_assets()[i]));
            for &l in network.row(i) {
                prop_assert!(l == 0.0 || (15.0..=40.0).contains(&l));
                if spec.integer_amounts {
                    prop_assert_eq!(l.fract(), 0.0);
                }
            }
        }
        match &spec.topology {
            Topology::CorePeriphery { core, .. } => prop_assert!(checks::is_core_periphery(&network, *core)),
            Topology::IsolatedBlocks { sizes, .. } => {
                prop_assert!(checks::blocks_isolated(&network, sizes));
                prop_assert_eq!(checks::weak_component_count(&network), sizes.len());
            }
            Topology::DagSccs { sizes, .. } => {
                prop_assert!(checks::is_dag_of_complete_sccs(&network, sizes));
                prop_assert_eq!(checks::scc_count(&network), sizes.len());
                prop_assert!(checks::condensation_is_acyclic(&network));
            }
            _ => {}
        }
    }

    #[test]
    fn records_round_trip((_, network) in arb_generated()) {
        let records = records_from_network(&network);
        for record in &records {
            let text = render_extraction_record(record);
            let parsed = parse_extraction_record(&text).unwrap();
            prop_assert_eq!(&parsed, record);
            prop_assert_eq!(render_extraction_record(&parsed), text);
        }
        let report = aggregate_statements(&records, &AggregationOptions::default());
        prop_assert!(report.anomalies.is_empty());
        let parts: Vec<CreditNetwork> = report.networks.into_iter().map(|a| a.network).collect();
        prop_assert!(same_network_up_to_relabelling(&network, &parts));
    }

    #[test]
    fn single_fault_is_pinpointed((_, network) in arb_generated(), pick in any::<prop::sample::Index>(), delta in 0.5f64..10.0) {
        let mut records = records_from_network(&network);
        // (record, triple) pairs whose counterpart was reported earlier
        let mut candidates = Vec::new();
        for (k, r) in records.iter().enumerate() {
            for (t, l) in r.liabilities.iter().enumerate() {
                let other = if l.borrower == r.firm { &l.lender } else { &l.borrower };
                if records[..k].iter().any(|p| &p.firm == other) {
                    candidates.push((k, t));
                }
            }
        }
        prop_assume!(!candidates.is_empty());
        let (k, t) = candidates[pick.index(candidates.len())];
        records[k].liabilities[t].amount += delta;
        let report = aggregate_statements(&records, &AggregationOptions::default());
        prop_assert_eq!(report.halted_at, Some(k));
        prop_assert_eq!(report.anomalies.len(), 1);
        prop_assert_eq!(report.anomalies[0].kind(), AnomalyKind::AmountConflict);
    }
}
