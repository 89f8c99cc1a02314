//! CD (consolidation–disruption) index.
//!
//! For focal paper `F` with references `R(F)`, among candidate papers
//! published no earlier than `F` (and no later than the horizon):
//!
//! * `n_i`: cite `F` but none of `R(F)`
//! * `n_j`: cite `F` and at least one of `R(F)`
//! * `n_k`: cite at least one of `R(F)` but not `F`
//!
//! `cd = (n_i - n_j) / (n_i + n_j + n_k)`, undefined when the denominator is 0.

use rayon::prelude::*;

use crate::graph::{CitationGraph, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct DisruptionRecord {
    pub paper_id: String,
    pub cd: Option<f64>,
    pub n_i: u32,
    pub n_j: u32,
    pub n_k: u32,
}

impl DisruptionRecord {
    pub fn is_defined(&self) -> bool {
        self.cd.is_some()
    }
}

/// Last citing year considered; `None` uses everything available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Horizon {
    #[default]
    All,
    /// Citing years up to and including this calendar year.
    UpTo(i32),
    /// Citing years up to `year(focal) + n`.
    YearsAfter(i32),
}

impl Horizon {
    fn last_year(self, focal_year: i32) -> i32 {
        match self {
            Horizon::All => i32::MAX,
            Horizon::UpTo(y) => y,
            Horizon::YearsAfter(n) => focal_year + n,
        }
    }
}

pub fn cd_index(graph: &CitationGraph, focal: NodeId, horizon: Horizon) -> DisruptionRecord {
    let y0 = graph.year(focal);
    let last = horizon.last_year(y0);
    let in_range = |q: NodeId| {
        q != focal && {
            let y = graph.year(q);
            y >= y0 && y <= last
        }
    };
    let refs = graph.references(focal);
    let cites_a_ref = |q: NodeId| {
        graph
            .references(q)
            .iter()
            .any(|r| refs.binary_search(r).is_ok())
    };

    let (mut n_i, mut n_j) = (0u32, 0u32);
    for &q in graph.citers(focal) {
        if !in_range(q) {
            continue;
        }
        if cites_a_ref(q) {
            n_j += 1;
        } else {
            n_i += 1;
        }
    }

    let mut ref_citers: Vec<NodeId> = refs
        .iter()
        .flat_map(|&r| graph.citers(r).iter().copied())
        .filter(|&q| in_range(q))
        .collect();
    ref_citers.sort_unstable();
    ref_citers.dedup();
    let n_k = ref_citers
        .iter()
        .filter(|&&q| !graph.cites(q, focal))
        .count() as u32;

    let denom = n_i + n_j + n_k;
    let cd = (denom > 0).then(|| (n_i as f64 - n_j as f64) / denom as f64);
    DisruptionRecord {
        paper_id: graph.id(focal).to_string(),
        cd,
        n_i,
        n_j,
        n_k,
    }
}

/// One record per input paper, in input order.
pub fn cd_batch(
    graph: &CitationGraph,
    papers: &[NodeId],
    horizon: Horizon,
) -> Vec<DisruptionRecord> {
    papers
        .par_iter()
        .map(|&p| cd_index(graph, p, horizon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Authorship, Corpus, PaperRecord};

    fn paper(id: &str, year: i32, refs: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id.into(),
            year,
            venue: "ACL".into(),
            authors: vec![Authorship {
                id: "x".into(),
                affiliations: vec![],
            }],
            references: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn build(records: Vec<PaperRecord>) -> CitationGraph {
        CitationGraph::build(&Corpus::from_records(records).unwrap()).0
    }

    #[test]
    fn fully_disruptive() {
        let g = build(vec![
            paper("R", 2000, &[]),
            paper("F", 2001, &["R"]),
            paper("A", 2002, &["F"]),
            paper("B", 2003, &["F"]),
        ]);
        let r = cd_index(&g, g.node("F").unwrap(), Horizon::All);
        assert_eq!((r.n_i, r.n_j, r.n_k, r.cd), (2, 0, 0, Some(1.0)));
    }

    #[test]
    fn fully_consolidating() {
        let g = build(vec![
            paper("R", 2000, &[]),
            paper("F", 2001, &["R"]),
            paper("A", 2002, &["F", "R"]),
            paper("B", 2003, &["F", "R"]),
        ]);
        let r = cd_index(&g, g.node("F").unwrap(), Horizon::All);
        assert_eq!((r.n_i, r.n_j, r.n_k, r.cd), (0, 2, 0, Some(-1.0)));
    }

    #[test]
    fn balanced_mix_and_old_ref_citers() {
        let g = build(vec![
            paper("R", 2000, &[]),
            paper("old", 2000, &["R"]),
            paper("F", 2001, &["R"]),
            paper("A", 2002, &["F"]),
            paper("B", 2002, &["F", "R"]),
            paper("C", 2003, &["R"]),
        ]);
        let r = cd_index(&g, g.node("F").unwrap(), Horizon::All);
        assert_eq!((r.n_i, r.n_j, r.n_k), (1, 1, 1));
        assert_eq!(r.cd, Some(0.0));
    }

    #[test]
    fn undefined_and_horizon() {
        let g = build(vec![paper("F", 2001, &[]), paper("A", 2009, &["F"])]);
        let f = g.node("F").unwrap();
        assert_eq!(cd_index(&g, f, Horizon::All).cd, Some(1.0));
        let cut = cd_index(&g, f, Horizon::YearsAfter(5));
        assert_eq!(cut.cd, None);
        assert!(!cut.is_defined());
        assert_eq!(cd_index(&g, f, Horizon::UpTo(2009)).n_i, 1);
        assert_eq!(cd_index(&g, g.node("A").unwrap(), Horizon::All).cd, None);
    }

    #[test]
    fn batch_over_two_stars() {
        let g = build(vec![
            paper("R1", 2000, &[]),
            paper("F1", 2001, &["R1"]),
            paper("A1", 2002, &["F1"]),
            paper("B1", 2002, &["F1"]),
            paper("R2", 2000, &[]),
            paper("F2", 2001, &["R2"]),
            paper("A2", 2002, &["F2", "R2"]),
            paper("B2", 2002, &["F2", "R2"]),
        ]);
        assert!(cd_batch(&g, &[], Horizon::All).is_empty());
        let out = cd_batch(
            &g,
            &[g.node("F1").unwrap(), g.node("F2").unwrap()],
            Horizon::All,
        );
        assert_eq!(out[0].paper_id, "F1");
        assert_eq!(out[0].cd, Some(1.0));
        assert_eq!(out[1].paper_id, "F2");
        assert_eq!(out[1].cd, Some(-1.0));
    }
}
