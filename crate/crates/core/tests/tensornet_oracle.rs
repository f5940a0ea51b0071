//! Tensor-network correlations against dense simulation of the same circuit.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use treeqaoa::instance::{gen_regular_maxcut, Edge, SpinGlass};
use treeqaoa::rcc::{build_tree_cone, reverse_causal_cone, CausalCone, TreeSpec};
use treeqaoa::rng::stream_rng;
use treeqaoa::statevector::{correlation, qaoa_state};
use treeqaoa::tensornet::{
    build_network, build_network_with, contract, evaluate_eg, plan_contraction, BuildOptions,
    ConeEvaluator, Observable, PlannerOptions,
};
use treeqaoa::QaoaParams;

fn random_params(p: usize, seed: u64, idx: u64) -> QaoaParams {
    let mut rng = stream_rng(seed, idx);
    QaoaParams::new(
        (0..p).map(|_| rng.random_range(-PI..PI)).collect(),
        (0..p).map(|_| rng.random_range(-PI..PI)).collect(),
    )
    .unwrap()
}

/// Dense simulation of the full QAOA circuit on the cone's graph.
fn oracle(cone: &CausalCone, params: &QaoaParams) -> f64 {
    let psi = qaoa_state(&cone.graph, params, None).unwrap();
    correlation(&psi, cone.marked_edge.0, cone.marked_edge.1).unwrap()
}

fn evaluator(cone: CausalCone) -> ConeEvaluator {
    ConeEvaluator::new(cone, &PlannerOptions { restarts: 4, seed: 3, ..Default::default() }).unwrap()
}

#[test]
fn tree_cones_match_statevector() {
    let cases = [
        (TreeSpec::maxcut(3, 1).unwrap(), 6),
        (TreeSpec::maxcut(3, 2).unwrap(), 14),
        (TreeSpec::pm_glass(4, 1).unwrap(), 8),
        (TreeSpec::pm_glass(3, 2).unwrap(), 14),
    ];
    for (spec, qubits) in cases {
        let cone = build_tree_cone(&spec).unwrap();
        assert_eq!(cone.n(), qubits);
        let ev = evaluator(cone.clone());
        for k in 0..20 {
            let params = random_params(spec.depth, 17, k);
            let tn = ev.expectation(&params).unwrap();
            let sv = oracle(&cone, &params);
            assert!((tn - sv).abs() < 1e-9, "{spec:?} point {k}: {tn} vs {sv}");
        }
    }
}

#[test]
fn fixed_point_degree3_p1() {
    let spec = TreeSpec::maxcut(3, 1).unwrap();
    let cone = build_tree_cone(&spec).unwrap();
    let params = QaoaParams::new(vec![0.3], vec![0.55]).unwrap();
    let tn = evaluate_eg(&spec, &params).unwrap();
    assert!((tn - oracle(&cone, &params)).abs() < 1e-10);
}

#[test]
fn pruned_and_unpruned_networks_agree() {
    for spec in [TreeSpec::maxcut(3, 1).unwrap(), TreeSpec::maxcut(3, 2).unwrap()] {
        let cone = build_tree_cone(&spec).unwrap();
        for k in 0..5 {
            let params = random_params(spec.depth, 5, k);
            let pruned = build_network(&cone, &params).unwrap();
            let full = build_network_with(
                &cone,
                &params,
                BuildOptions { unpruned: true, ..Default::default() },
            )
            .unwrap();
            assert!(full.len() > pruned.len());
            let pp = plan_contraction(&pruned, 2, 0).unwrap();
            let fp = plan_contraction(&full, 2, 0).unwrap();
            let a = contract(pruned, &pp).unwrap();
            let b = contract(full, &fp).unwrap();
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn general_cones_with_cycles_and_fields_match_statevector() {
    // A 3-regular instance has short cycles, so cones are not trees; local
    // fields exercise the one-qubit Z rotations.
    let base = gen_regular_maxcut(12, 3, 8).unwrap();
    let fields: Vec<f64> = (0..12).map(|k| 0.1 * k as f64 - 0.5).collect();
    let sg = SpinGlass::new(
        12,
        base.edges()
            .iter()
            .enumerate()
            .map(|(k, e)| Edge { coupling: if k % 3 == 0 { -0.7 } else { 1.1 }, ..*e })
            .collect(),
        fields,
        0.0,
    )
    .unwrap();
    let e = sg.edges()[4];
    for p in 1..=2 {
        let cone = reverse_causal_cone(&sg, (e.i, e.j), p).unwrap();
        let ev = evaluator(cone.clone());
        for k in 0..5 {
            let params = random_params(p, 23, k);
            let tn = ev.expectation(&params).unwrap();
            let psi = qaoa_state(&sg, &params, None).unwrap();
            let sv = correlation(&psi, e.i, e.j).unwrap();
            assert!((tn - sv).abs() < 1e-9, "p={p}: {tn} vs {sv}");
        }
    }
}

#[test]
fn high_girth_instance_edge_matches_tree() {
    // Heawood graph, girth 6: every p = 2 cone is the degree-3 tree.
    let mut edges: Vec<(usize, usize)> = (0..14).map(|k| (k, (k + 1) % 14)).collect();
    edges.extend((0..14).step_by(2).map(|k| (k, (k + 5) % 14)));
    let sg = SpinGlass::maxcut(14, &edges).unwrap();
    let spec = TreeSpec::maxcut(3, 2).unwrap();
    let params = random_params(2, 99, 0);
    let e_g = evaluate_eg(&spec, &params).unwrap();
    let psi = qaoa_state(&sg, &params, None).unwrap();
    for &(i, j) in &edges {
        assert!((correlation(&psi, i, j).unwrap() - e_g).abs() < 1e-10);
    }
}

#[test]
fn trace_normalization_range_periodicity_time_reversal() {
    for spec in [TreeSpec::maxcut(3, 2).unwrap(), TreeSpec::pm_glass(3, 2).unwrap()] {
        let cone = build_tree_cone(&spec).unwrap();
        let ev = evaluator(cone.clone());
        let tr = ConeEvaluator::with_options(
            cone,
            BuildOptions { observable: Observable::Trace, unpruned: false },
            &PlannerOptions::default(),
        )
        .unwrap();
        // gamma period: pi / |J|
        let gamma_period = PI / spec.coupling.abs();
        for k in 0..10 {
            let params = random_params(spec.depth, 41, k);
            assert!((tr.value(&params).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            let e = ev.expectation(&params).unwrap();
            assert!((-1.0..=1.0).contains(&e));
            assert!((ev.expectation(&params.negated()).unwrap() - e).abs() < 1e-12);
            for block in 0..spec.depth {
                let mut shifted = params.clone();
                shifted.betas[block] += PI;
                assert!((ev.expectation(&shifted).unwrap() - e).abs() < 1e-12);
                let mut shifted = params.clone();
                shifted.gammas[block] += gamma_period;
                assert!((ev.expectation(&shifted).unwrap() - e).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn plan_peak_rank_degree3_p2() {
    let cone = build_tree_cone(&TreeSpec::maxcut(3, 2).unwrap()).unwrap();
    let net = build_network(&cone, &random_params(2, 1, 1)).unwrap();
    let plan = plan_contraction(&net, 8, 7).unwrap();
    assert!(plan.peak_rank <= 2 * 2 + 2, "peak rank {}", plan.peak_rank);
    plan.validate(&net.shapes()).unwrap();
    let v = contract(net, &plan).unwrap();
    assert!(v.im.abs() < 1e-9);
}
