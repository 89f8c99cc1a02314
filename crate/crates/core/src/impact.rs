//! Citation-count impact: windowed citations (C5), per-year top-decile flags,
//! time-truncated h-index, academic age and team aggregates.

use std::collections::{BTreeMap, HashMap};

use crate::error::{CoreError, Result};
use crate::graph::{CitationGraph, NodeId};

/// Citing-year window `[year, year + years]` (or `year + years - 1` when the
/// upper bound is exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CitationWindow {
    pub years: i32,
    pub inclusive: bool,
}

impl Default for CitationWindow {
    fn default() -> Self {
        Self {
            years: 5,
            inclusive: true,
        }
    }
}

impl CitationWindow {
    pub fn last_year(&self, published: i32) -> i32 {
        if self.inclusive {
            published + self.years
        } else {
            published + self.years - 1
        }
    }
}

pub fn citations_in_window(graph: &CitationGraph, node: NodeId, window: CitationWindow) -> u32 {
    let y = graph.year(node);
    let last = window.last_year(y);
    graph
        .citers(node)
        .iter()
        .filter(|&&q| {
            let yq = graph.year(q);
            yq >= y && yq <= last
        })
        .count() as u32
}

/// Number of citers of `paper_id` with citing year in `[y, y + window_years]`.
pub fn citations_within(graph: &CitationGraph, paper_id: &str, window_years: i32) -> Result<u32> {
    let node = graph
        .node(paper_id)
        .ok_or_else(|| CoreError::NotFound(format!("paper `{paper_id}`")))?;
    Ok(citations_in_window(
        graph,
        node,
        CitationWindow {
            years: window_years,
            inclusive: true,
        },
    ))
}

/// Flags the `ceil(n / 10)` highest counts in one cohort. Every paper tied
/// with the threshold value is flagged too.
pub fn top_decile_flags(counts: &[u32]) -> Vec<bool> {
    if counts.is_empty() {
        return Vec::new();
    }
    let k = counts.len().div_ceil(10);
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let threshold = sorted[k - 1];
    counts.iter().map(|&c| c >= threshold).collect()
}

/// Top-decile flags with cohorts formed by publication year.
pub fn top_decile_by_year(years: &[i32], counts: &[u32]) -> Vec<bool> {
    let mut cohorts: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &y) in years.iter().enumerate() {
        cohorts.entry(y).or_default().push(i);
    }
    let mut flags = vec![false; counts.len()];
    for members in cohorts.values() {
        let c: Vec<u32> = members.iter().map(|&i| counts[i]).collect();
        for (&i, f) in members.iter().zip(top_decile_flags(&c)) {
            flags[i] = f;
        }
    }
    flags
}

/// Textbook h-index of a list of citation counts.
pub fn h_index(counts: &[u32]) -> u32 {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|(i, &c)| c as usize > *i)
        .count() as u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorTimeline {
    pub author_id: String,
    pub first_pub_year: i32,
    /// `(year, h_index, academic_age)` for every year from the first
    /// publication through `last_year`.
    pub per_year: Vec<(i32, u32, i32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamStats {
    pub paper_id: String,
    pub team_size: usize,
    pub mean_h: Option<f64>,
    pub mean_age: Option<f64>,
}

/// Per-author publication lists and per-paper sorted citer years.
#[derive(Debug, Clone)]
pub struct AuthorIndex {
    papers_by_author: HashMap<String, Vec<NodeId>>,
    citer_years: Vec<Vec<i32>>,
    bylines: Vec<Vec<String>>,
    years: Vec<i32>,
    ids: Vec<String>,
}

impl AuthorIndex {
    pub fn build(corpus: &crate::corpus::Corpus, graph: &CitationGraph) -> Self {
        let mut papers_by_author: HashMap<String, Vec<NodeId>> = HashMap::new();
        let mut bylines = Vec::with_capacity(corpus.len());
        for (i, p) in corpus.papers().iter().enumerate() {
            let mut byline = Vec::with_capacity(p.authors.len());
            for a in &p.authors {
                let list = papers_by_author.entry(a.id.clone()).or_default();
                if list.last() != Some(&(i as NodeId)) {
                    list.push(i as NodeId);
                }
                byline.push(a.id.clone());
            }
            bylines.push(byline);
        }
        let citer_years = graph
            .nodes()
            .map(|n| {
                let mut ys: Vec<i32> = graph.citers(n).iter().map(|&q| graph.year(q)).collect();
                ys.sort_unstable();
                ys
            })
            .collect();
        Self {
            papers_by_author,
            citer_years,
            bylines,
            years: graph.nodes().map(|n| graph.year(n)).collect(),
            ids: graph.nodes().map(|n| graph.id(n).to_string()).collect(),
        }
    }

    fn papers(&self, author: &str) -> Result<&[NodeId]> {
        self.papers_by_author
            .get(author)
            .map(Vec::as_slice)
            .ok_or_else(|| CoreError::NotFound(format!("author `{author}`")))
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.papers_by_author.keys().map(String::as_str)
    }

    /// h-index using only papers published by `t` and citations made by `t`.
    pub fn h_index_at(&self, author: &str, t: i32) -> Result<u32> {
        let counts: Vec<u32> = self
            .papers(author)?
            .iter()
            .filter(|&&p| self.years[p as usize] <= t)
            .map(|&p| self.citer_years[p as usize].partition_point(|&y| y <= t) as u32)
            .collect();
        Ok(h_index(&counts))
    }

    pub fn first_pub_year(&self, author: &str) -> Result<i32> {
        self.papers(author)?
            .iter()
            .map(|&p| self.years[p as usize])
            .min()
            .ok_or_else(|| CoreError::NotFound(format!("author `{author}`")))
    }

    pub fn academic_age_at(&self, author: &str, t: i32) -> Result<i32> {
        let first = self.first_pub_year(author)?;
        if first > t {
            return Err(CoreError::UndefinedAge {
                author: author.to_string(),
                year: t,
            });
        }
        Ok(t - first)
    }

    pub fn timeline(&self, author: &str, last_year: i32) -> Result<AuthorTimeline> {
        let first = self.first_pub_year(author)?;
        let per_year = (first..=last_year.max(first))
            .map(|t| Ok((t, self.h_index_at(author, t)?, t - first)))
            .collect::<Result<Vec<_>>>()?;
        Ok(AuthorTimeline {
            author_id: author.to_string(),
            first_pub_year: first,
            per_year,
        })
    }

    /// `(h_index, academic_age)` of every byline author at the paper's year.
    pub fn byline_seniority(&self, node: NodeId) -> Vec<(String, Option<u32>, Option<i32>)> {
        let t = self.years[node as usize];
        self.bylines[node as usize]
            .iter()
            .map(|a| {
                (
                    a.clone(),
                    self.h_index_at(a, t).ok(),
                    self.academic_age_at(a, t).ok(),
                )
            })
            .collect()
    }

    pub fn team_aggregates(&self, node: NodeId) -> TeamStats {
        let seniority = self.byline_seniority(node);
        let hs: Vec<Option<f64>> = seniority.iter().map(|(_, h, _)| h.map(f64::from)).collect();
        let ages: Vec<Option<f64>> = seniority.iter().map(|(_, _, a)| a.map(f64::from)).collect();
        TeamStats {
            paper_id: self.ids[node as usize].clone(),
            team_size: self.bylines[node as usize].len(),
            mean_h: mean_defined(&hs),
            mean_age: mean_defined(&ages),
        }
    }
}

/// Arithmetic mean over the defined entries; `None` if there are none.
pub fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}
