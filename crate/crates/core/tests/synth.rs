use std::collections::BTreeSet;
use std::path::Path;

use teamcite_core::classify::{label_corpus, Classifier, Registry, TeamType};
use teamcite_core::config::RunConfig;
use teamcite_core::corpus::Corpus;
use teamcite_core::graph::CitationGraph;
use teamcite_core::synth::{generate, GeneratorSpec};

fn data_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn bundled_spec() -> GeneratorSpec {
    RunConfig::from_file(&data_dir().join("synth.conf"))
        .unwrap()
        .synth
}

#[test]
fn bundled_files_match_regeneration() {
    let g = generate(&bundled_spec()).unwrap();
    let mut corpus = Vec::new();
    let mut labels = Vec::new();
    let mut registry = Vec::new();
    g.write_corpus(&mut corpus).unwrap();
    g.write_labels(&mut labels).unwrap();
    g.write_registry(&mut registry).unwrap();
    assert_eq!(
        corpus,
        std::fs::read(data_dir().join("synth_corpus.jsonl")).unwrap()
    );
    assert_eq!(
        labels,
        std::fs::read(data_dir().join("synth_labels.csv")).unwrap()
    );
    assert_eq!(
        registry,
        std::fs::read(data_dir().join("synth_registry.csv")).unwrap()
    );
}

#[test]
fn citations_only_point_backwards() {
    let g = generate(&bundled_spec()).unwrap();
    let corpus = Corpus::from_records(g.records).unwrap();
    assert!(corpus.dangling_references().is_empty());
    for p in corpus.papers() {
        for r in &p.references {
            assert!(corpus.get(r).unwrap().year < p.year);
        }
    }
}

#[test]
fn ground_truth_is_recovered_by_classification() {
    let g = generate(&bundled_spec()).unwrap();
    let registry = Registry::from_reader(g.registry.to_csv().as_bytes()).unwrap();
    let corpus = Corpus::from_records(g.records.clone()).unwrap();
    let labels = label_corpus(&corpus, &Classifier::new(registry));
    assert!(labels.unresolved_affiliations.is_empty());
    for (l, (id, t)) in labels.labels.iter().zip(&g.labels) {
        assert_eq!(&l.paper_id, id);
        assert_eq!(l.team_type, *t);
    }
}

#[test]
fn planted_citation_rate_doubles_in_degree() {
    let spec = bundled_spec();
    let g = generate(&spec).unwrap();
    let corpus = Corpus::from_records(g.records).unwrap();
    let (graph, _) = CitationGraph::build(&corpus);
    let mean_in = |team: TeamType| {
        let xs: Vec<f64> = graph
            .nodes()
            .filter(|&n| g.labels[n as usize].1 == team && graph.year(n) < spec.last_year)
            .map(|n| graph.citers(n).len() as f64)
            .collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    let ratio = mean_in(TeamType::IndustryOnly) / mean_in(TeamType::AcademicOnly);
    assert!((1.7..=2.3).contains(&ratio), "in-degree ratio {ratio}");
}

#[test]
fn broader_reference_lists_give_more_distinct_pairs() {
    let g = generate(&bundled_spec()).unwrap();
    let corpus = Corpus::from_records(g.records).unwrap();
    let mean_pairs = |team: TeamType| {
        let xs: Vec<f64> = corpus
            .papers()
            .iter()
            .zip(&g.labels)
            .filter(|(p, (_, t))| *t == team && !p.references.is_empty())
            .map(|(p, _)| {
                let venues: Vec<&str> = p
                    .references
                    .iter()
                    .map(|r| corpus.get(r).unwrap().venue.as_str())
                    .collect();
                let mut pairs = BTreeSet::new();
                for i in 0..venues.len() {
                    for j in i + 1..venues.len() {
                        pairs.insert((venues[i].min(venues[j]), venues[i].max(venues[j])));
                    }
                }
                pairs.len() as f64
            })
            .collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    assert!(mean_pairs(TeamType::AcademicOnly) > mean_pairs(TeamType::IndustryOnly));
}
