//! Per-paper metric table.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::classify::{CollabSubtype, CorpusLabels, TeamType};
use crate::corpus::Corpus;
use crate::disruption::{cd_batch, Horizon};
use crate::error::{CoreError, Result};
use crate::graph::{CitationGraph, NodeId};
use crate::impact::{citations_in_window, top_decile_by_year, AuthorIndex, CitationWindow};
use crate::novelty::{novelty_scores, NoveltyRecord, PairZTable};
use crate::subfield::{Subfield, SubfieldMap};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub paper_id: String,
    pub year: i32,
    pub venue: String,
    pub subfield: Subfield,
    pub team_type: TeamType,
    pub subtype: Option<CollabSubtype>,
    pub team_size: usize,
    pub mean_h: Option<f64>,
    pub mean_age: Option<f64>,
    pub c5: u32,
    pub top_decile: bool,
    pub cd: Option<f64>,
    pub n_i: u32,
    pub n_j: u32,
    pub n_k: u32,
    pub atypicality: Option<f64>,
    pub conventionality: Option<f64>,
    pub n_pairs: usize,
    pub n_undefined_pairs: usize,
}

impl MetricRow {
    pub fn neg_atypicality(&self) -> Option<f64> {
        self.atypicality.map(|a| -a)
    }
}

pub struct MetricSettings<'a> {
    pub window: CitationWindow,
    pub horizon: Horizon,
    pub subfields: &'a SubfieldMap,
    /// Pair z-tables by publication year; papers in other years get no
    /// novelty scores.
    pub novelty: Option<&'a BTreeMap<i32, PairZTable>>,
}

pub fn compute_metrics(
    corpus: &Corpus,
    graph: &CitationGraph,
    labels: &CorpusLabels,
    settings: &MetricSettings<'_>,
) -> Result<Vec<MetricRow>> {
    if labels.labels.len() != graph.len() {
        return Err(CoreError::Contract("labels do not match the corpus".into()));
    }
    let authors = AuthorIndex::build(corpus, graph);
    let nodes: Vec<NodeId> = graph.nodes().collect();
    let c5: Vec<u32> = nodes
        .iter()
        .map(|&n| citations_in_window(graph, n, settings.window))
        .collect();
    let years: Vec<i32> = nodes.iter().map(|&n| graph.year(n)).collect();
    let top = top_decile_by_year(&years, &c5);
    let cds = cd_batch(graph, &nodes, settings.horizon);
    let teams: Vec<_> = nodes
        .par_iter()
        .map(|&n| authors.team_aggregates(n))
        .collect();
    let novelty: Vec<Option<NoveltyRecord>> = nodes
        .par_iter()
        .map(|&n| {
            settings
                .novelty
                .and_then(|t| t.get(&graph.year(n)))
                .map(|table| novelty_scores(graph, n, table))
        })
        .collect();

    Ok(nodes
        .iter()
        .map(|&n| {
            let i = n as usize;
            let label = &labels.labels[i];
            let nov = novelty[i].as_ref();
            MetricRow {
                paper_id: graph.id(n).to_string(),
                year: years[i],
                venue: graph.venue(n).to_string(),
                subfield: settings.subfields.subfield_of(graph.venue(n)),
                team_type: label.team_type,
                subtype: label.subtype,
                team_size: teams[i].team_size,
                mean_h: teams[i].mean_h,
                mean_age: teams[i].mean_age,
                c5: c5[i],
                top_decile: top[i],
                cd: cds[i].cd,
                n_i: cds[i].n_i,
                n_j: cds[i].n_j,
                n_k: cds[i].n_k,
                atypicality: nov.and_then(|r| r.atypicality),
                conventionality: nov.and_then(|r| r.conventionality),
                n_pairs: nov.map_or(0, |r| r.n_pairs),
                n_undefined_pairs: nov.map_or(0, |r| r.n_undefined_pairs),
            }
        })
        .collect())
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_metrics<W: Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "paper_id",
        "year",
        "venue",
        "subfield",
        "team_type",
        "subtype",
        "team_size",
        "mean_h",
        "mean_age",
        "c5",
        "top_decile",
        "cd",
        "n_i",
        "n_j",
        "n_k",
        "atypicality",
        "neg_atypicality",
        "conventionality",
        "n_pairs",
        "n_undefined_pairs",
    ])?;
    for r in rows {
        w.write_record([
            r.paper_id.clone(),
            r.year.to_string(),
            r.venue.clone(),
            r.subfield.as_str().to_string(),
            r.team_type.as_str().to_string(),
            r.subtype
                .map(|s| s.as_str().to_string())
                .unwrap_or_default(),
            r.team_size.to_string(),
            fmt_opt(r.mean_h),
            fmt_opt(r.mean_age),
            r.c5.to_string(),
            u8::from(r.top_decile).to_string(),
            fmt_opt(r.cd),
            r.n_i.to_string(),
            r.n_j.to_string(),
            r.n_k.to_string(),
            fmt_opt(r.atypicality),
            fmt_opt(r.neg_atypicality()),
            fmt_opt(r.conventionality),
            r.n_pairs.to_string(),
            r.n_undefined_pairs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CoreError::io("<metrics>", e))
}

/// Mean of an optional per-row quantity over rows of one team type.
pub fn team_mean<F>(rows: &[MetricRow], team: TeamType, f: F) -> Option<f64>
where
    F: Fn(&MetricRow) -> Option<f64>,
{
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.team_type == team)
        .filter_map(f)
        .collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}
