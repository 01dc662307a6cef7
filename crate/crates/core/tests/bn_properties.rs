use foodscape::bn::{
    bic_score, family_bic, hill_climb, improvement_threshold, to_edge_list, Dag, DataMatrix,
};
use foodscape::data::FoodCategory;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Poisson};

fn count_table(rows: usize, vars: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut data = vec![vec![0.0; vars]; rows];
    for row in data.iter_mut() {
        let base = f64::from(rng.random_range(0u32..6));
        for (j, v) in row.iter_mut().enumerate() {
            let lambda = 2.0 + j as f64 + if j % 2 == 0 { base } else { 0.0 };
            *v = Poisson::new(lambda).unwrap().sample(&mut rng);
        }
    }
    DataMatrix::from_rows(&data).unwrap()
}

fn random_dag(n: usize, rng: &mut ChaCha20Rng) -> Dag {
    let mut dag = Dag::empty(n);
    for _ in 0..rng.random_range(0..2 * n) {
        let (p, c) = (rng.random_range(0..n), rng.random_range(0..n));
        if dag.can_add(p, c) {
            dag.add_edge(p, c).unwrap();
        }
    }
    dag
}

/// All 25 DAGs on three labelled nodes: each pair absent, forward or backward,
/// minus the two directed triangles.
fn all_three_node_dags() -> Vec<Dag> {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut out = Vec::new();
    for code in 0..27 {
        let mut edges = Vec::new();
        let mut rest = code;
        for &(a, b) in &pairs {
            match rest % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            rest /= 3;
        }
        if let Ok(dag) = Dag::from_edges(3, &edges) {
            out.push(dag);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn score_delta_is_sum_of_family_deltas(seed in any::<u64>(), vars in 2usize..7, rows in 20usize..120) {
        let data = count_table(rows, vars, seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
        let dag = random_dag(vars, &mut rng);
        let moves = dag.legal_moves();
        prop_assume!(!moves.is_empty());
        let mv = moves[rng.random_range(0..moves.len())];
        let next = dag.apply(mv).unwrap();
        let before = bic_score(&data, &dag).unwrap();
        let after = bic_score(&data, &next).unwrap();
        let mut family_delta = 0.0;
        for v in 0..vars {
            if dag.parent_mask(v) != next.parent_mask(v) {
                family_delta += family_bic(&data, v, &next.parents_of(v)).unwrap().score
                    - family_bic(&data, v, &dag.parents_of(v)).unwrap().score;
            } else {
                prop_assert_eq!(before.family_scores[v], after.family_scores[v]);
            }
        }
        prop_assert!((after.total_bic - before.total_bic - family_delta).abs() < 1e-9);
    }

    #[test]
    fn row_order_does_not_matter(seed in any::<u64>()) {
        let data = count_table(60, 5, seed);
        let mut order: Vec<usize> = (0..60).collect();
        order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        let shuffled = data.permute_rows(&order);
        let dag = random_dag(5, &mut ChaCha20Rng::seed_from_u64(seed.wrapping_add(1)));
        let a = bic_score(&data, &dag).unwrap().total_bic;
        let b = bic_score(&shuffled, &dag).unwrap().total_bic;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn search_trace_invariants(seed in any::<u64>()) {
        let data = count_table(80, 5, seed);
        let init = random_dag(5, &mut ChaCha20Rng::seed_from_u64(seed));
        let (dag, trace) = hill_climb(&data, &init, 200).unwrap();
        let mut g = init.clone();
        for step in &trace.iterations {
            prop_assert!(step.delta() > 0.0);
            g = g.apply(step.mv).expect("trace moves are legal");
            prop_assert!(g.is_acyclic());
        }
        prop_assert_eq!(&g, &dag);
        prop_assert!(trace.converged);
        let best = bic_score(&data, &dag).unwrap().total_bic;
        for mv in dag.legal_moves() {
            let s = bic_score(&data, &dag.apply(mv).unwrap()).unwrap().total_bic;
            prop_assert!(s - best <= improvement_threshold(best));
        }
    }
}

#[test]
fn enumeration_has_25_graphs() {
    assert_eq!(all_three_node_dags().len(), 25);
}

#[test]
fn three_node_search_reaches_exhaustive_optimum() {
    let e = Normal::new(0.0f64, 1.0).unwrap();
    for seed in 0..10u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..500)
            .map(|_| {
                let a = 10.0 + 3.0 * e.sample(&mut rng);
                let b = 0.8 * a + 2.0 * e.sample(&mut rng);
                let c = 1.2 * b + 2.0 * e.sample(&mut rng);
                vec![a.round(), b.round(), c.round()]
            })
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let optimum = all_three_node_dags()
            .iter()
            .map(|d| bic_score(&data, d).unwrap().total_bic)
            .fold(f64::NEG_INFINITY, f64::max);
        let (_, trace) = hill_climb(&data, &Dag::empty(3), 100).unwrap();
        assert!(
            (trace.final_score.total_bic - optimum).abs() < 1e-9,
            "seed {seed}"
        );
    }
}

#[test]
fn independent_columns_stay_nearly_empty() {
    let mut rng = ChaCha20Rng::seed_from_u64(365);
    let rows: Vec<Vec<f64>> = (0..365)
        .map(|_| {
            (0..8)
                .map(|j| Poisson::new(3.0 + j as f64).unwrap().sample(&mut rng))
                .collect()
        })
        .collect();
    let data = DataMatrix::from_rows(&rows).unwrap();
    let (dag, trace) = hill_climb(&data, &Dag::empty(8), 100).unwrap();
    assert!(dag.n_edges() <= 1, "{:?}", dag.edges());
    assert!(trace.final_score.total_bic >= bic_score(&data, &Dag::empty(8)).unwrap().total_bic);
}

#[test]
fn coupled_pair_gets_exactly_one_edge() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let rows: Vec<Vec<f64>> = (0..365)
        .map(|_| {
            let mut r: Vec<f64> = (0..8)
                .map(|_| Poisson::new(4.0).unwrap().sample(&mut rng))
                .collect();
            r[5] = 2.0 * r[3] + 1.0;
            r
        })
        .collect();
    let data = DataMatrix::from_rows(&rows).unwrap();
    let (dag, _) = hill_climb(&data, &Dag::empty(8), 100).unwrap();
    assert_eq!(dag.skeleton(), [(3, 5)]);
}

#[test]
fn edge_list_is_a_topological_witness() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for _ in 0..50 {
        let dag = random_dag(8, &mut rng);
        let list = to_edge_list(&dag).unwrap();
        assert!(list
            .windows(2)
            .all(|w| (w[0].0.index(), w[0].1.index()) < (w[1].0.index(), w[1].1.index())));
        // Kahn's algorithm on the list alone must consume every node.
        let mut indegree = [0usize; 8];
        for (_, c) in &list {
            indegree[c.index()] += 1;
        }
        let mut ready: Vec<usize> = (0..8).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for (p, c) in &list {
                if p.index() == v {
                    indegree[c.index()] -= 1;
                    if indegree[c.index()] == 0 {
                        ready.push(c.index());
                    }
                }
            }
        }
        assert_eq!(seen, 8);
        let rebuilt = Dag::from_edges(
            8,
            &list
                .iter()
                .map(|(p, c)| (p.index(), c.index()))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(rebuilt, dag);
    }
    assert_eq!(FoodCategory::ALL.len(), 8);
}
