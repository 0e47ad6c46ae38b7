mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opf_relax::case_io::bundled;
use opf_relax::chordal::{
    build_graph, decompose, decompose_with, is_perfect_elimination_ordering, maximal_cliques, order_vertices,
    symbolic_factorization, ChordalError, SparsityGraph,
};

fn path(n: usize) -> SparsityGraph {
    SparsityGraph::from_edges(n, (1..n).map(|k| (k - 1, k)))
}

fn complete(n: usize) -> SparsityGraph {
    SparsityGraph::from_edges(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
}

fn cycle4() -> SparsityGraph {
    SparsityGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
}

#[test]
fn ring_becomes_a_triangle() {
    let mut g = SparsityGraph::new(3);
    for (a, b) in [(0, 1), (1, 2), (2, 0), (1, 0)] {
        g.add_edge(a, b);
    }
    g.add_edge(2, 2);
    assert_eq!(g.num_edges(), 3);
    assert_eq!(decompose(&g).cliques, vec![vec![0, 1, 2]]);
}

#[test]
fn case9_graph() {
    let g = build_graph(&bundled::load("case9").unwrap());
    assert_eq!(g.num_vertices(), 9);
    assert_eq!(g.num_edges(), 9);
    assert!(g.is_connected());
}

#[test]
fn star_center_goes_last() {
    let g = SparsityGraph::from_edges(6, (0..5).map(|leaf| (leaf, 5)));
    let ord = order_vertices(&g);
    assert_eq!(*ord.last().unwrap(), 5);
    // With the center at index 0 the final tie between it and one leaf goes to
    // the smaller index, so it is eliminated second to last.
    let g = SparsityGraph::from_edges(6, (1..6).map(|leaf| (0, leaf)));
    let ord = order_vertices(&g);
    assert_eq!(ord[4], 0);
    assert!(symbolic_factorization(&g, &ord).unwrap().is_empty());
}

#[test]
fn path_starts_at_an_endpoint() {
    let ord = order_vertices(&path(6));
    assert!(ord[0] == 0 || ord[0] == 5);
}

#[test]
fn complete_graph_order_is_deterministic() {
    let g = complete(4);
    assert_eq!(order_vertices(&g), vec![0, 1, 2, 3]);
    assert_eq!(order_vertices(&g), order_vertices(&g));
}

#[test]
fn trees_have_no_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.gen_range(2..30);
        let g = SparsityGraph::from_edges(n, (1..n).map(|v| (v, rng.gen_range(0..v))));
        let ord = order_vertices(&g);
        assert!(symbolic_factorization(&g, &ord).unwrap().is_empty());
    }
}

#[test]
fn four_cycle_fill() {
    // Eliminating 1 then 3 (0-based 0, 2) joins 2 and 4 (0-based 1, 3).
    let fill = symbolic_factorization(&cycle4(), &[0, 2, 1, 3]).unwrap();
    assert_eq!(fill.into_iter().collect::<Vec<_>>(), vec![(1, 3)]);
}

#[test]
fn chordal_input_with_a_perfect_ordering_has_no_fill() {
    let mut g = cycle4();
    g.add_edge(1, 3);
    assert!(symbolic_factorization(&g, &[0, 2, 1, 3]).unwrap().is_empty());
    assert!(is_perfect_elimination_ordering(&g, &[0, 2, 1, 3]).is_ok());
    assert!(matches!(
        is_perfect_elimination_ordering(&cycle4(), &[0, 2, 1, 3]),
        Err(ChordalError::NotChordal(_))
    ));
}

#[test]
fn orderings_must_be_permutations() {
    let g = path(3);
    assert!(matches!(symbolic_factorization(&g, &[0, 1]), Err(ChordalError::BadOrdering(_))));
    assert!(matches!(symbolic_factorization(&g, &[0, 1, 1]), Err(ChordalError::BadOrdering(_))));
    assert!(matches!(decompose_with(&g, &[0, 1, 3]), Err(ChordalError::BadOrdering(_))));
}

#[test]
fn path_cliques() {
    let g = path(3);
    let ord = order_vertices(&g);
    let fill = symbolic_factorization(&g, &ord).unwrap();
    let mut cliques = maximal_cliques(&g, &fill, &ord).unwrap().cliques;
    cliques.sort();
    assert_eq!(cliques, vec![vec![0, 1], vec![1, 2]]);
}

#[test]
fn chorded_four_cycle_cliques() {
    let d = decompose_with(&cycle4(), &[0, 2, 1, 3]).unwrap();
    let mut cliques = d.cliques.clone();
    cliques.sort();
    assert_eq!(cliques, vec![vec![0, 1, 3], vec![1, 2, 3]]);
}

#[test]
fn complete_graph_is_one_clique() {
    let d = decompose(&complete(5));
    assert_eq!(d.cliques, vec![vec![0, 1, 2, 3, 4]]);
    assert!(d.fill_edges.is_empty());
}

#[test]
fn random_graphs_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..500 {
        let n = rng.gen_range(1..=10);
        let g = common::random_connected(&mut rng, n);
        let d = decompose(&g);
        let ext = d.extension(&g);
        assert!(is_perfect_elimination_ordering(&ext, &d.ordering).is_ok(), "trial {trial}");
        for (a, b) in g.edges() {
            assert!(ext.has_edge(a, b));
        }
        let got: BTreeSet<Vec<usize>> = d
            .cliques
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c
            })
            .collect();
        assert_eq!(got.len(), d.cliques.len(), "trial {trial}: duplicate cliques");
        assert_eq!(got, common::brute_force_cliques(&ext), "trial {trial}");
    }
}

#[test]
fn every_branch_lies_in_some_clique() {
    for name in bundled::NAMES {
        let g = build_graph(&bundled::load(name).unwrap());
        let d = decompose(&g);
        for (a, b) in g.edges() {
            assert!(
                d.cliques.iter().any(|c| c.contains(&a) && c.contains(&b)),
                "{name}: edge ({a}, {b})"
            );
        }
    }
}

#[test]
fn text_and_dot_dumps_use_labels() {
    let g = path(3);
    let d = decompose(&g);
    let labels = [10, 20, 30];
    let text = d.to_text(Some(&labels));
    assert!(text.contains("cliques: 2"));
    assert!(text.contains("20"));
    let dot = d.to_dot(&g, Some(&labels));
    assert!(dot.starts_with("graph"));
    assert!(dot.contains("10 -- 20") || dot.contains("20 -- 10"));
}
