//! Excess self-citation between exclusively academic and exclusively
//! industry teams.
//!
//! For citing year `t`, with cited papers published no later than `t`:
//!
//! ```text
//! ECC_t(I) = (P(I|I) - P(I)) - (P(A|I) - P(A))
//! ECC_t(A) = (P(A|A) - P(A)) - (P(I|A) - P(I))
//! ```
//!
//! `P(a|b)` is the share of citations from team-type `b` papers that land on
//! team-type `a` papers; `P(a)` is the same share over all labelled citing
//! papers. Mixed and unclassifiable papers take no part on either side.

use std::fmt;
use std::str::FromStr;

use crate::classify::TeamType;
use crate::error::{CoreError, Result};
use crate::graph::CitationGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EccEstimator {
    /// Pool citation edges.
    #[default]
    PooledEdges,
    /// Average the per-citing-paper shares.
    PerPaper,
}

impl fmt::Display for EccEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EccEstimator::PooledEdges => "pooled",
            EccEstimator::PerPaper => "per-paper",
        })
    }
}

impl FromStr for EccEstimator {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pooled" => Ok(EccEstimator::PooledEdges),
            "per-paper" => Ok(EccEstimator::PerPaper),
            other => Err(CoreError::Config(format!(
                "unknown ECC estimator `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EccResult {
    pub year: i32,
    pub p_ind_given_ind: Option<f64>,
    pub p_acad_given_ind: Option<f64>,
    pub p_acad_given_acad: Option<f64>,
    pub p_ind_given_acad: Option<f64>,
    pub p_ind: f64,
    pub p_acad: f64,
    /// Missing when no industry paper cites a labelled paper in this year.
    pub ecc_industry: Option<f64>,
    /// Missing when no academic paper cites a labelled paper in this year.
    pub ecc_academic: Option<f64>,
    pub n_edges: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Acad,
    Ind,
}

fn side(t: TeamType) -> Option<Side> {
    match t {
        TeamType::AcademicOnly => Some(Side::Acad),
        TeamType::IndustryOnly => Some(Side::Ind),
        _ => None,
    }
}

/// Per citing paper: its side and how many labelled references land on each
/// side.
fn citing_rows(graph: &CitationGraph, teams: &[TeamType], t: i32) -> Vec<(Side, f64, f64)> {
    graph
        .nodes()
        .filter(|&n| graph.year(n) == t)
        .filter_map(|n| side(teams[n as usize]).map(|s| (n, s)))
        .filter_map(|(n, s)| {
            let (mut to_a, mut to_i) = (0.0, 0.0);
            for &r in graph.references(n) {
                if graph.year(r) > t {
                    continue;
                }
                match side(teams[r as usize]) {
                    Some(Side::Acad) => to_a += 1.0,
                    Some(Side::Ind) => to_i += 1.0,
                    None => {}
                }
            }
            (to_a + to_i > 0.0).then_some((s, to_a, to_i))
        })
        .collect()
}

pub fn excess_self_citation(
    graph: &CitationGraph,
    teams: &[TeamType],
    t: i32,
    estimator: EccEstimator,
) -> Result<EccResult> {
    if teams.len() != graph.len() {
        return Err(CoreError::Contract(format!(
            "{} team labels for {} papers",
            teams.len(),
            graph.len()
        )));
    }
    let rows = citing_rows(graph, teams, t);
    let n_edges = rows.iter().map(|(_, a, i)| a + i).sum::<f64>() as usize;
    if rows.is_empty() {
        return Err(CoreError::NoData(format!(
            "no citations between labelled papers in {t}"
        )));
    }

    // (share to academic, share to industry) for rows selected by `keep`
    let shares = |keep: &dyn Fn(Side) -> bool| -> Option<(f64, f64)> {
        let sel: Vec<&(Side, f64, f64)> = rows.iter().filter(|r| keep(r.0)).collect();
        if sel.is_empty() {
            return None;
        }
        Some(match estimator {
            EccEstimator::PooledEdges => {
                let a: f64 = sel.iter().map(|r| r.1).sum();
                let i: f64 = sel.iter().map(|r| r.2).sum();
                (a / (a + i), i / (a + i))
            }
            EccEstimator::PerPaper => {
                let m = sel.len() as f64;
                let a: f64 = sel.iter().map(|r| r.1 / (r.1 + r.2)).sum::<f64>() / m;
                let i: f64 = sel.iter().map(|r| r.2 / (r.1 + r.2)).sum::<f64>() / m;
                (a, i)
            }
        })
    };

    let (p_acad, p_ind) = shares(&|_| true).expect("rows non-empty");
    let from_ind = shares(&|s| s == Side::Ind);
    let from_acad = shares(&|s| s == Side::Acad);

    let ecc_industry = from_ind.map(|(a_i, i_i)| (i_i - p_ind) - (a_i - p_acad));
    let ecc_academic = from_acad.map(|(a_a, i_a)| (a_a - p_acad) - (i_a - p_ind));
    Ok(EccResult {
        year: t,
        p_ind_given_ind: from_ind.map(|s| s.1),
        p_acad_given_ind: from_ind.map(|s| s.0),
        p_acad_given_acad: from_acad.map(|s| s.0),
        p_ind_given_acad: from_acad.map(|s| s.1),
        p_ind,
        p_acad,
        ecc_industry,
        ecc_academic,
        n_edges,
    })
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

    #[test]
    fn four_prior_papers() {
        use TeamType::*;
        let c = Corpus::from_records([
            paper("I1", 2010, &[]),
            paper("I2", 2010, &[]),
            paper("A1", 2010, &[]),
            paper("A2", 2010, &[]),
            paper("ci", 2012, &["I1", "I2"]),
            paper("ca", 2012, &["I1", "A1"]),
        ])
        .unwrap();
        let (g, _) = CitationGraph::build(&c);
        let teams = [
            IndustryOnly,
            IndustryOnly,
            AcademicOnly,
            AcademicOnly,
            IndustryOnly,
            AcademicOnly,
        ];
        let r = excess_self_citation(&g, &teams, 2012, EccEstimator::PooledEdges).unwrap();
        assert_eq!(r.p_ind_given_ind, Some(1.0));
        assert_eq!(r.p_acad_given_ind, Some(0.0));
        assert_eq!(r.p_ind, 0.75);
        assert_eq!(r.p_acad, 0.25);
        assert!((r.ecc_industry.unwrap() - 0.5).abs() <= 1e-12);
        assert!((r.ecc_academic.unwrap() - 0.5).abs() <= 1e-12);
        assert_eq!(r.n_edges, 4);
    }

    #[test]
    fn anti_assortative_is_negative() {
        use TeamType::*;
        let c = Corpus::from_records([
            paper("I1", 2010, &[]),
            paper("A1", 2010, &[]),
            paper("ci", 2012, &["A1"]),
            paper("ca", 2012, &["I1"]),
        ])
        .unwrap();
        let (g, _) = CitationGraph::build(&c);
        let teams = [IndustryOnly, AcademicOnly, IndustryOnly, AcademicOnly];
        let r = excess_self_citation(&g, &teams, 2012, EccEstimator::PooledEdges).unwrap();
        assert_eq!(r.ecc_industry, r.ecc_academic);
        assert!(r.ecc_industry.unwrap() < 0.0);
    }

    #[test]
    fn missing_side_and_no_data() {
        use TeamType::*;
        let c = Corpus::from_records([
            paper("I1", 2010, &[]),
            paper("ca", 2012, &["I1"]),
            paper("m", 2013, &["I1"]),
        ])
        .unwrap();
        let (g, _) = CitationGraph::build(&c);
        let teams = [IndustryOnly, AcademicOnly, Mixed];
        let r = excess_self_citation(&g, &teams, 2012, EccEstimator::PooledEdges).unwrap();
        assert_eq!(r.ecc_industry, None);
        assert!(r.ecc_academic.is_some());
        assert!(matches!(
            excess_self_citation(&g, &teams, 2013, EccEstimator::PooledEdges),
            Err(CoreError::NoData(_))
        ));
    }

    #[test]
    fn later_cited_papers_ignored() {
        use TeamType::*;
        // a same-year cycle target published after t must not count
        let c = Corpus::from_records([
            paper("I1", 2010, &[]),
            paper("ci", 2010, &["I1", "late"]),
            paper("late", 2011, &[]),
        ])
        .unwrap();
        let (g, _) = CitationGraph::build(&c);
        let teams = [IndustryOnly, IndustryOnly, AcademicOnly];
        let r = excess_self_citation(&g, &teams, 2010, EccEstimator::PooledEdges).unwrap();
        assert_eq!(r.n_edges, 1);
    }

    #[test]
    fn per_paper_estimator_differs_from_pooled() {
        use TeamType::*;
        let c = Corpus::from_records([
            paper("I1", 2010, &[]),
            paper("A1", 2010, &[]),
            paper("A2", 2010, &[]),
            paper("A3", 2010, &[]),
            paper("c1", 2012, &["I1"]),
            paper("c2", 2012, &["A1", "A2", "A3"]),
        ])
        .unwrap();
        let (g, _) = CitationGraph::build(&c);
        let teams = [
            IndustryOnly,
            AcademicOnly,
            AcademicOnly,
            AcademicOnly,
            AcademicOnly,
            AcademicOnly,
        ];
        let pooled = excess_self_citation(&g, &teams, 2012, EccEstimator::PooledEdges).unwrap();
        let per = excess_self_citation(&g, &teams, 2012, EccEstimator::PerPaper).unwrap();
        assert_eq!(pooled.p_acad_given_acad, Some(0.75));
        assert_eq!(per.p_acad_given_acad, Some(0.5));
    }
}
