mod common;

use common::{max_abs_diff, random_graph, rng, Dense};
use fjpd::{Graph, IdMode, IngestOptions};
use proptest::prelude::*;
use rand::Rng;

fn graph_from(seed: u64, n: usize) -> Graph {
    let mut r = rng(seed);
    let p = r.random_range(0.0..=0.5);
    let connected = r.random_bool(0.5);
    random_graph(&mut r, n, p, connected)
}

proptest! {
    #[test]
    fn laplacian_annihilates_ones(seed: u64, n in 1usize..60, x in prop::collection::vec(-10.0f64..10.0, 60)) {
        let g = graph_from(seed, n);
        let lx = g.laplacian_apply(&x[..n]).unwrap();
        let norm = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(lx.iter().sum::<f64>().abs() <= 1e-12 * norm.max(1.0) * g.total_weight().max(1.0));
    }

    #[test]
    fn laplacian_is_psd(seed: u64, n in 1usize..60) {
        let g = graph_from(seed, n);
        let mut r = rng(seed ^ 0x5EED);
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
            let q = g.laplacian_quadratic(&x).unwrap();
            let lx = g.laplacian_apply(&x).unwrap();
            prop_assert!(q >= 0.0);
            prop_assert!((q - common::dot(&x, &lx)).abs() <= 1e-9 * (1.0 + q));
        }
    }

    #[test]
    fn laplacian_matches_dense_oracle(seed: u64, n in 1usize..=50) {
        let g = graph_from(seed, n);
        let dense = Dense::laplacian(&g);
        let mut r = rng(seed.wrapping_add(1));
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        prop_assert!(max_abs_diff(&g.laplacian_apply(&x).unwrap(), &dense.mul(&x)) <= 1e-12);
        let lib = g.dense_laplacian();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((lib[(i, j)] - dense.at(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn edge_list_round_trip(seed: u64, n in 1usize..40) {
        let g = graph_from(seed, n);
        let text = g.to_edge_list();
        for mode in [IdMode::FirstSeen, IdMode::Numeric] {
            let back = Graph::from_edge_list(&text, &IngestOptions { ids: mode }).unwrap();
            prop_assert_eq!(&back.graph, &g);
        }
    }

    #[test]
    fn largest_component_is_connected(seed: u64, n in 1usize..60) {
        let g = graph_from(seed, n);
        let sub = g.largest_component();
        prop_assert!(sub.graph.is_connected());
        let labels = g.components();
        let mut sizes = std::collections::BTreeMap::new();
        for l in &labels {
            *sizes.entry(*l).or_insert(0usize) += 1;
        }
        prop_assert_eq!(sub.graph.node_count(), *sizes.values().max().unwrap());
        for (new, &old) in sub.new_to_old.iter().enumerate() {
            prop_assert_eq!(sub.old_to_new[old], Some(new));
        }
    }
}

#[test]
fn snap_style_file() {
    let text = "# Directed graph (each unordered pair of nodes is saved once)\n\
                # FromNodeId\tToNodeId\n\
                10\t20\n20\t30\n30\t10\n20\t10\n40\t40\n";
    let p = Graph::from_edge_list(text, &IngestOptions::default()).unwrap();
    assert_eq!(p.graph.node_count(), 4);
    assert_eq!(p.graph.edge_count(), 3);
    assert_eq!(p.merged_duplicates, 1);
    assert_eq!(p.dropped_self_loops, 1);
    assert_eq!(p.id_of("30"), Some(2));
    assert!(!p.graph.is_connected());
    assert_eq!(p.graph.largest_component().graph.node_count(), 3);
}
