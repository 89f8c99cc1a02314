#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teamcite_core::classify::TeamType;
use teamcite_core::corpus::{Authorship, Corpus, PaperRecord};
use teamcite_core::novelty::shuffle_seed;
use teamcite_core::subfield::Subfield;
use teamcite_core::synth::{GeneratorSpec, PerTeam};

pub fn paper(id: &str, year: i32, venue: &str, refs: &[String]) -> PaperRecord {
    PaperRecord {
        paper_id: id.to_string(),
        year,
        venue: venue.to_string(),
        authors: vec![Authorship {
            id: format!("au-{id}"),
            affiliations: vec![],
        }],
        references: refs.to_vec(),
    }
}

/// Random citation DAG with up to `max_nodes` papers. Papers are listed in
/// non-decreasing year order and cite only earlier-listed papers.
pub fn random_dag(seed: u64, max_nodes: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_nodes);
    let density: f64 = rng.random_range(0.05..0.6);
    let mut years: Vec<i32> = (0..n).map(|_| rng.random_range(2000..2006)).collect();
    years.sort_unstable();
    let venues = ["A", "B", "C", "D"];
    let records = (0..n).map(|i| {
        let refs: Vec<String> = (0..i)
            .filter(|_| rng.random_bool(density))
            .map(|j| format!("p{j}"))
            .collect();
        paper(
            &format!("p{i}"),
            years[i],
            venues[rng.random_range(0..venues.len())],
            &refs,
        )
    });
    Corpus::from_records(records.collect::<Vec<_>>()).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CdCounts {
    pub n_i: u32,
    pub n_j: u32,
    pub n_k: u32,
}

/// Enumerates every other paper published no earlier than the focal one
/// and checks its reference list directly.
pub fn brute_force_cd(corpus: &Corpus, focal: &str) -> (CdCounts, Option<f64>) {
    let f = corpus.get(focal).unwrap();
    let focal_refs: Vec<&String> = f
        .references
        .iter()
        .filter(|r| corpus.get(r).is_some())
        .collect();
    let mut c = CdCounts {
        n_i: 0,
        n_j: 0,
        n_k: 0,
    };
    for q in corpus.papers() {
        if q.paper_id == focal || q.year < f.year {
            continue;
        }
        let cites_f = q.references.iter().any(|r| r == focal);
        let cites_ref = q.references.iter().any(|r| focal_refs.contains(&r));
        match (cites_f, cites_ref) {
            (true, false) => c.n_i += 1,
            (true, true) => c.n_j += 1,
            (false, true) => c.n_k += 1,
            (false, false) => {}
        }
    }
    let total = c.n_i + c.n_j + c.n_k;
    let cd = (total > 0).then(|| (c.n_i as f64 - c.n_j as f64) / total as f64);
    (c, cd)
}

pub struct ReplayStats {
    pub observed: u64,
    pub mean: f64,
    pub sd: f64,
}

fn count_pairs(lists: &[Vec<String>], out: &mut BTreeMap<(String, String), u64>) {
    for vs in lists {
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let (a, b) = if vs[i] <= vs[j] {
                    (&vs[i], &vs[j])
                } else {
                    (&vs[j], &vs[i])
                };
                *out.entry((a.clone(), b.clone())).or_insert(0) += 1;
            }
        }
    }
}

/// Replays the documented shuffle schedule with string venues and
/// floating-point two-pass moments.
pub fn replay_null(
    corpus: &Corpus,
    year: i32,
    shuffles: u32,
    seed: u64,
) -> BTreeMap<(String, String), ReplayStats> {
    let position = |id: &str| corpus.position(id);
    let lists: Vec<Vec<String>> = corpus
        .papers()
        .iter()
        .filter(|p| p.year == year)
        .map(|p| {
            let mut refs: Vec<usize> = p.references.iter().filter_map(|r| position(r)).collect();
            refs.sort_unstable();
            refs.dedup();
            refs.into_iter()
                .map(|i| corpus.papers()[i].venue.clone())
                .filter(|v| !v.is_empty())
                .collect::<Vec<_>>()
        })
        .filter(|v| !v.is_empty())
        .collect();
    let mut observed = BTreeMap::new();
    count_pairs(&lists, &mut observed);

    let flat: Vec<String> = lists.iter().flatten().cloned().collect();
    let mut draws: Vec<BTreeMap<(String, String), u64>> = Vec::new();
    for r in 0..shuffles {
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed(seed, year, r));
        let mut perm = flat.clone();
        for i in (1..perm.len()).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let mut shuffled = Vec::new();
        let mut at = 0;
        for l in &lists {
            shuffled.push(perm[at..at + l.len()].to_vec());
            at += l.len();
        }
        let mut counts = BTreeMap::new();
        count_pairs(&shuffled, &mut counts);
        draws.push(counts);
    }
    let mut keys: Vec<(String, String)> = observed.keys().cloned().collect();
    for d in &draws {
        keys.extend(d.keys().cloned());
    }
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            let xs: Vec<f64> = draws
                .iter()
                .map(|d| *d.get(&k).unwrap_or(&0) as f64)
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
            let stats = ReplayStats {
                observed: *observed.get(&k).unwrap_or(&0),
                mean,
                sd: var.sqrt(),
            };
            (k, stats)
        })
        .collect()
}

/// Random corpus with team labels for ECC checks: papers over four years,
/// each citing up to four earlier papers.
pub fn random_labelled(seed: u64) -> (Corpus, Vec<TeamType>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..40);
    let mut years: Vec<i32> = (0..n).map(|_| rng.random_range(2010..2014)).collect();
    years.sort_unstable();
    let mut records = Vec::new();
    let mut teams = Vec::new();
    for i in 0..n {
        let k = rng.random_range(0..=4.min(i));
        let refs: Vec<String> = (0..k)
            .map(|_| format!("p{}", rng.random_range(0..i)))
            .collect();
        records.push(paper(&format!("p{i}"), years[i], "ACL", &refs));
        teams.push(match rng.random_range(0..4) {
            0 => TeamType::AcademicOnly,
            1 => TeamType::IndustryOnly,
            2 => TeamType::Mixed,
            _ => TeamType::AcademicOnly,
        });
    }
    (Corpus::from_records(records).unwrap(), teams)
}

pub fn swap_labels(teams: &[TeamType]) -> Vec<TeamType> {
    teams
        .iter()
        .map(|t| match t {
            TeamType::AcademicOnly => TeamType::IndustryOnly,
            TeamType::IndustryOnly => TeamType::AcademicOnly,
            other => *other,
        })
        .collect()
}

/// Generator settings for corpora of 50 papers over four venues.
pub fn small_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        first_year: 2000,
        last_year: 2004,
        papers_per_year: 10,
        reference_breadth: PerTeam {
            academic: 3,
            industry: 2,
            mixed: 2,
        },
        refs_per_venue: 1,
        venues: vec![
            ("ACL".into(), Subfield::Nlp),
            ("EMNLP".into(), Subfield::Nlp),
            ("CVPR".into(), Subfield::Cv),
            ("ICLR".into(), Subfield::Ml),
        ],
        academic_authors: 40,
        industry_authors: 30,
        ..GeneratorSpec::default()
    }
}
