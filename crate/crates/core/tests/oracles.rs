mod common;

use std::collections::BTreeMap;

use common::{brute_force_cd, random_dag, random_labelled, replay_null, small_spec, swap_labels};
use teamcite_core::disruption::{cd_batch, cd_index, Horizon};
use teamcite_core::ecc::{excess_self_citation, EccEstimator};
use teamcite_core::graph::CitationGraph;
use teamcite_core::novelty::{novelty_scores, null_model_zscores, PairZTable};
use teamcite_core::synth::generate;

#[test]
fn cd_matches_enumeration() {
    for seed in 0..300 {
        let corpus = random_dag(seed, 30);
        let (g, _) = CitationGraph::build(&corpus);
        for n in g.nodes() {
            let got = cd_index(&g, n, Horizon::All);
            let (want, cd) = brute_force_cd(&corpus, g.id(n));
            assert_eq!(
                (got.n_i, got.n_j, got.n_k),
                (want.n_i, want.n_j, want.n_k),
                "seed {seed}"
            );
            assert_eq!(got.cd, cd, "seed {seed} paper {}", g.id(n));
        }
    }
}

#[test]
fn cd_batch_agrees_with_single_calls() {
    let corpus = random_dag(7, 30);
    let (g, _) = CitationGraph::build(&corpus);
    let mut nodes: Vec<u32> = g.nodes().collect();
    nodes.reverse();
    let batch = cd_batch(&g, &nodes, Horizon::YearsAfter(2));
    for (n, rec) in nodes.iter().zip(batch) {
        assert_eq!(rec, cd_index(&g, *n, Horizon::YearsAfter(2)));
    }
}

fn tables(g: &CitationGraph, years: &[i32], workers: usize) -> BTreeMap<i32, PairZTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap();
    pool.install(|| {
        years
            .iter()
            .map(|&y| (y, null_model_zscores(g, y, 10, 77).unwrap()))
            .collect()
    })
}

#[test]
fn novelty_matches_replay_and_is_worker_invariant() {
    for seed in 0..5 {
        let corpus = teamcite_core::corpus::Corpus::from_records(
            generate(&small_spec(seed)).unwrap().records,
        )
        .unwrap();
        assert!(corpus.len() <= 50);
        let (g, _) = CitationGraph::build(&corpus);
        let years: Vec<i32> = (2000..=2004).collect();
        let one = tables(&g, &years, 1);
        let eight = tables(&g, &years, 8);
        assert_eq!(one, eight);
        assert!(one
            .values()
            .any(|t| t.pairs.values().any(|s| s.z.is_some())));
        for (year, table) in &one {
            let replay = replay_null(&corpus, *year, 10, 77);
            assert_eq!(table.pairs.len(), replay.len());
            for (pair, s) in &table.pairs {
                let r = &replay[&(pair.first().to_string(), pair.second().to_string())];
                assert_eq!(s.observed, r.observed);
                assert_eq!(s.null_mean, r.mean);
                assert!((s.null_sd - r.sd).abs() <= 1e-12 * (1.0 + r.sd));
                if r.sd > 0.0 {
                    let z = (r.observed as f64 - r.mean) / r.sd;
                    assert!((s.z.unwrap() - z).abs() <= 1e-9 * (1.0 + z.abs()));
                } else {
                    assert_eq!(s.z, None);
                }
            }
        }
        for n in g.nodes() {
            let rec = novelty_scores(&g, n, &one[&g.year(n)]);
            if let (Some(a), Some(c)) = (rec.atypicality, rec.conventionality) {
                assert!(a <= c);
            }
        }
    }
}

#[test]
fn ecc_label_swap_exchanges_sides() {
    for seed in 0..100 {
        let (corpus, teams) = random_labelled(seed);
        let (g, _) = CitationGraph::build(&corpus);
        let swapped = swap_labels(&teams);
        for year in 2010..2014 {
            for est in [EccEstimator::PooledEdges, EccEstimator::PerPaper] {
                let a = excess_self_citation(&g, &teams, year, est);
                let b = excess_self_citation(&g, &swapped, year, est);
                match (a, b) {
                    (Ok(a), Ok(b)) => {
                        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
                            (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
                            (None, None) => true,
                            _ => false,
                        };
                        assert!(
                            close(a.ecc_industry, b.ecc_academic),
                            "seed {seed} year {year}"
                        );
                        assert!(
                            close(a.ecc_academic, b.ecc_industry),
                            "seed {seed} year {year}"
                        );
                        assert_eq!(a.n_edges, b.n_edges);
                    }
                    (Err(_), Err(_)) => {}
                    _ => panic!("swap changed whether ECC is defined (seed {seed})"),
                }
            }
        }
    }
}
