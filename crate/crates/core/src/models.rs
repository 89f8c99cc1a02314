//! Mixed-model ladder and seniority clustering on the metric table.

use std::io::Write;

use rayon::prelude::*;
use teamcite_stats::{
    fit_lmm, gmm_fit, FixedColumn, GmmFit, GmmOptions, LmmFit, LmmOptions, MixedModelData,
    RandomFactor,
};

use crate::classify::TeamType;
use crate::corpus::Corpus;
use crate::error::{CoreError, Result};
use crate::graph::CitationGraph;
use crate::impact::AuthorIndex;
use crate::metrics::{fmt_opt, MetricRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    C5,
    NegAtypicality,
}

impl Response {
    pub fn as_str(self) -> &'static str {
        match self {
            Response::C5 => "c5",
            Response::NegAtypicality => "neg_atypicality",
        }
    }

    fn value(self, r: &MetricRow) -> Option<f64> {
        match self {
            Response::C5 => Some(f64::from(r.c5)),
            Response::NegAtypicality => r.neg_atypicality(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    TeamSize,
    MeanAge,
    MeanH,
    Year,
}

impl Predictor {
    pub fn as_str(self) -> &'static str {
        match self {
            Predictor::TeamSize => "team_size",
            Predictor::MeanAge => "mean_age",
            Predictor::MeanH => "mean_h",
            Predictor::Year => "year",
        }
    }

    fn value(self, r: &MetricRow) -> Option<f64> {
        match self {
            Predictor::TeamSize => Some(r.team_size as f64),
            Predictor::MeanAge => r.mean_age,
            Predictor::MeanH => r.mean_h,
            Predictor::Year => Some(f64::from(r.year)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    TeamType,
    Subfield,
}

impl Factor {
    pub fn as_str(self) -> &'static str {
        match self {
            Factor::TeamType => "team_type",
            Factor::Subfield => "subfield",
        }
    }

    fn level(self, r: &MetricRow) -> String {
        match self {
            Factor::TeamType => r.team_type.as_str().to_string(),
            Factor::Subfield => r.subfield.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmmSpec {
    pub name: String,
    pub response: Response,
    pub fixed: Vec<Predictor>,
    pub factors: Vec<Factor>,
}

/// Model 1: team type only. Model 2 adds team size, Model 3 mean academic
/// age and mean h-index, Full adds publication year and a subfield random
/// intercept.
pub fn ladder(response: Response) -> Vec<LmmSpec> {
    use Predictor::*;
    let spec = |name: &str, fixed: Vec<Predictor>, factors: Vec<Factor>| LmmSpec {
        name: name.to_string(),
        response,
        fixed,
        factors,
    };
    vec![
        spec("Model 1", vec![], vec![Factor::TeamType]),
        spec("Model 2", vec![TeamSize], vec![Factor::TeamType]),
        spec(
            "Model 3",
            vec![TeamSize, MeanAge, MeanH],
            vec![Factor::TeamType],
        ),
        spec(
            "Full",
            vec![TeamSize, MeanAge, MeanH, Year],
            vec![Factor::TeamType, Factor::Subfield],
        ),
    ]
}

#[derive(Debug, Clone)]
pub struct LadderFit {
    pub specs: Vec<LmmSpec>,
    pub fits: Vec<LmmFit>,
    /// Rows with a known team type that lacked a variable of the largest model.
    pub dropped: usize,
}

impl LadderFit {
    pub fn log_likelihoods(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f.log_likelihood).collect()
    }
}

fn model_frame(rows: &[&MetricRow], spec: &LmmSpec) -> MixedModelData {
    MixedModelData {
        response: rows
            .iter()
            .map(|r| spec.response.value(r).unwrap())
            .collect(),
        fixed: spec
            .fixed
            .iter()
            .map(|p| FixedColumn {
                name: p.as_str().to_string(),
                values: rows.iter().map(|r| p.value(r).unwrap()).collect(),
            })
            .collect(),
        factors: spec
            .factors
            .iter()
            .map(|f| RandomFactor {
                name: f.as_str().to_string(),
                levels: rows.iter().map(|r| f.level(r)).collect(),
            })
            .collect(),
    }
}

/// Fits a nested ladder on the rows complete for its last model, so every
/// model sees the same observations. Each model starts from the previous
/// optimum, with new factors at zero.
pub fn fit_ladder(rows: &[MetricRow], specs: Vec<LmmSpec>) -> Result<LadderFit> {
    let last = specs
        .last()
        .ok_or_else(|| CoreError::Contract("empty model ladder".into()))?;
    let labelled: Vec<&MetricRow> = rows
        .iter()
        .filter(|r| r.team_type != TeamType::Unclassifiable)
        .collect();
    let complete: Vec<&MetricRow> = labelled
        .iter()
        .copied()
        .filter(|r| {
            last.response.value(r).is_some() && last.fixed.iter().all(|p| p.value(r).is_some())
        })
        .collect();
    let dropped = labelled.len() - complete.len();

    let mut fits: Vec<LmmFit> = Vec::with_capacity(specs.len());
    for spec in &specs {
        let data = model_frame(&complete, spec);
        let start = fits.last().map(|prev: &LmmFit| {
            let prev_spec = &specs[fits.len() - 1];
            spec.factors
                .iter()
                .map(|f| {
                    prev_spec
                        .factors
                        .iter()
                        .position(|g| g == f)
                        .map_or(0.0, |i| prev.theta[i])
                })
                .collect()
        });
        let fit = fit_lmm(
            &data,
            &LmmOptions {
                start_theta: start,
                ..LmmOptions::default()
            },
        )?;
        fits.push(fit);
    }
    Ok(LadderFit {
        specs,
        fits,
        dropped,
    })
}

/// Table layout: one column per model, rows for fixed effects and their
/// standard errors, BLUPs per level, variance components, log-likelihood,
/// AIC and n.
pub fn write_ladder<W: Write>(ladder: &LadderFit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["kind".to_string(), "term".to_string()];
    header.extend(ladder.specs.iter().map(|s| s.name.clone()));
    w.write_record(&header)?;

    let mut terms: Vec<(String, String)> = Vec::new();
    let mut push = |kind: &str, term: &str| {
        let key = (kind.to_string(), term.to_string());
        if !terms.contains(&key) {
            terms.push(key);
        }
    };
    for f in &ladder.fits {
        for e in &f.fixed {
            push("fixed", &e.name);
        }
    }
    for f in &ladder.fits {
        for e in &f.fixed {
            push("std_error", &e.name);
        }
    }
    for f in &ladder.fits {
        for r in &f.random {
            push("blup", &format!("{}={}", r.factor, r.level));
        }
    }
    for f in &ladder.fits {
        for v in &f.variance_components {
            push("variance", &v.name);
        }
    }
    for kind in ["residual_variance", "log_likelihood", "aic", "n"] {
        push(kind, "");
    }

    for (kind, term) in terms {
        let mut row = vec![kind.clone(), term.clone()];
        for f in &ladder.fits {
            let v = match kind.as_str() {
                "fixed" => f.fixed_effect(&term).map(|e| e.estimate),
                "std_error" => f.fixed_effect(&term).map(|e| e.std_error),
                "blup" => {
                    let (factor, level) = term.split_once('=').unwrap();
                    f.blup(factor, level)
                }
                "variance" => f.variance_of(&term),
                "residual_variance" => Some(f.residual_variance),
                "log_likelihood" => Some(f.log_likelihood),
                "aic" => Some(f.aic),
                _ => None,
            };
            row.push(if kind == "n" {
                f.n_observations.to_string()
            } else {
                fmt_opt(v)
            });
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CoreError::io("<lmm>", e))
}

/// `(h_index, academic_age)` of every byline position on papers of `team`,
/// both taken at the paper's year. Positions with undefined values are
/// skipped.
pub fn seniority_points(
    corpus: &Corpus,
    graph: &CitationGraph,
    rows: &[MetricRow],
    team: TeamType,
) -> Vec<Vec<f64>> {
    let index = AuthorIndex::build(corpus, graph);
    graph
        .nodes()
        .filter(|&n| rows[n as usize].team_type == team)
        .flat_map(|n| index.byline_seniority(n))
        .filter_map(|(_, h, age)| Some(vec![f64::from(h?), f64::from(age?)]))
        .collect()
}

/// One two-component fit per team type, in `teams` order.
pub fn seniority_clusters(
    corpus: &Corpus,
    graph: &CitationGraph,
    rows: &[MetricRow],
    teams: &[TeamType],
    opts: &GmmOptions,
) -> Vec<(TeamType, Result<GmmFit>)> {
    teams
        .par_iter()
        .map(|&t| {
            let pts = seniority_points(corpus, graph, rows, t);
            (t, gmm_fit(&pts, opts).map_err(CoreError::from))
        })
        .collect()
}

pub fn write_clusters<W: Write>(fits: &[(TeamType, Result<GmmFit>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "team_type",
        "component",
        "weight",
        "mean_h",
        "mean_age",
        "var_h",
        "var_age",
        "sem_h",
        "sem_age",
        "n_points",
        "log_likelihood",
        "converged",
        "note",
    ])?;
    for (team, fit) in fits {
        match fit {
            Ok(f) => {
                let sem = f.mean_sem();
                for (i, c) in f.components.iter().enumerate() {
                    w.write_record([
                        team.as_str().to_string(),
                        i.to_string(),
                        format!("{:?}", c.weight),
                        format!("{:?}", c.mean[0]),
                        format!("{:?}", c.mean[1]),
                        format!("{:?}", c.variance[0]),
                        format!("{:?}", c.variance[1]),
                        format!("{:?}", sem[i][0]),
                        format!("{:?}", sem[i][1]),
                        f.n_points.to_string(),
                        format!("{:?}", f.log_likelihood()),
                        f.converged.to_string(),
                        String::new(),
                    ])?;
                }
            }
            Err(e) => {
                let mut row = vec![team.as_str().to_string()];
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.push(e.to_string());
                w.write_record(&row)?;
            }
        }
    }
    w.flush().map_err(|e| CoreError::io("<gmm>", e))
}
