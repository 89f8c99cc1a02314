//! End-to-end run: ingest, classify, metrics, statistics and reports.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use teamcite_stats::{piecewise_fit, welch_t_test, GmmOptions};
use thiserror::Error;

use crate::classify::{label_corpus, Classifier, CorpusLabels, Registry, TeamType};
use crate::config::RunConfig;
use crate::corpus::{parse_corpus, Corpus};
use crate::ecc::excess_self_citation;
use crate::error::{CoreError, Result};
use crate::graph::{CitationGraph, GraphDiagnostics};
use crate::impact::CitationWindow;
use crate::metrics::{compute_metrics, fmt_opt, write_metrics, MetricRow, MetricSettings};
use crate::models::{
    fit_ladder, ladder, seniority_clusters, write_clusters, write_ladder, Response,
};
use crate::novelty::{null_model_zscores, PairZTable};
use crate::sota::{
    load_models, magnitude_series, yearly_summary, ModelRegistry, ModelTeam, BUNDLED_REGISTRY,
};
use crate::strata::{strata_summary, stratify_teams, write_strata};
use crate::subfield::SubfieldMap;

pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Ingest,
    Classify,
    Impact,
    Disruption,
    Novelty,
    Ecc,
    Lmm,
    Gmm,
    Sota,
    Report,
    All,
}

impl Target {
    fn needs_corpus(self) -> bool {
        self != Target::Sota
    }

    fn needs_novelty(self, cfg: &RunConfig) -> bool {
        match self {
            Target::Novelty => true,
            Target::Lmm | Target::Report | Target::All => cfg.novelty,
            _ => false,
        }
    }
}

#[derive(Debug, Error)]
#[error("stage `{stage}` failed: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: CoreError,
}

impl StageError {
    /// 1 usage/config, 2 data, 3 computation.
    pub fn exit_code(&self) -> i32 {
        match self.source {
            CoreError::Config(_) => 1,
            CoreError::Parse { .. }
            | CoreError::DuplicatePaper { .. }
            | CoreError::NotFound(_)
            | CoreError::Io { .. }
            | CoreError::Csv(_) => 2,
            _ => 3,
        }
    }
}

fn at(stage: &'static str) -> impl Fn(CoreError) -> StageError {
    move |source| StageError { stage, source }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    /// Files written, relative to the output directory, in write order.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

struct Out<'a> {
    dir: &'a Path,
    summary: RunSummary,
}

impl Out<'_> {
    fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CoreError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CoreError::io(&path, e))?;
        self.summary.files.push(name.to_string());
        Ok(())
    }

    fn warn(&mut self, w: String) {
        self.summary.warnings.push(w);
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CoreError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Checks that every input the target reads exists, before any computation.
pub fn check_inputs(cfg: &RunConfig, target: Target) -> Result<()> {
    let mut required: Vec<(&str, &Path)> = Vec::new();
    if target.needs_corpus() {
        required.push(("corpus", &cfg.corpus));
        required.push(("registry", &cfg.registry));
    }
    if let Some(m) = &cfg.models {
        if matches!(target, Target::Sota | Target::All) {
            required.push(("models", m));
        }
    }
    for (key, path) in required {
        if !path.is_file() {
            return Err(CoreError::NotFound(format!(
                "{key} file {}",
                path.display()
            )));
        }
    }
    Ok(())
}

/// Runs `target`, writing reports to `cfg.out_dir`. On failure an
/// `INCOMPLETE` marker naming the stage is left in the output directory.
pub fn run(cfg: &RunConfig, target: Target) -> std::result::Result<RunSummary, StageError> {
    cfg.validate().map_err(at("config"))?;
    check_inputs(cfg, target).map_err(at("startup"))?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| at("startup")(CoreError::io(&cfg.out_dir, e)))?;
    let marker = cfg.out_dir.join(INCOMPLETE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| at("startup")(CoreError::io(&marker, e)))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| at("startup")(CoreError::Config(e.to_string())))?;
    let result = pool.install(|| run_stages(cfg, target));
    if let Err(e) = &result {
        let _ = fs::write(&marker, format!("stage={}\nerror={}\n", e.stage, e.source));
    }
    result
}

struct Loaded {
    corpus: Corpus,
    graph: CitationGraph,
    diagnostics: GraphDiagnostics,
    labels: CorpusLabels,
    subfields: SubfieldMap,
}

fn load(cfg: &RunConfig) -> Result<Loaded> {
    let file = File::open(&cfg.corpus).map_err(|e| CoreError::io(&cfg.corpus, e))?;
    let corpus = parse_corpus(BufReader::new(file))?;
    let reg_file = File::open(&cfg.registry).map_err(|e| CoreError::io(&cfg.registry, e))?;
    let registry = Registry::from_reader(reg_file)?;
    let classifier = Classifier::with_keywords(registry, &cfg.academic_keywords);
    let (graph, diagnostics) = CitationGraph::build(&corpus);
    let labels = label_corpus(&corpus, &classifier);
    Ok(Loaded {
        corpus,
        graph,
        diagnostics,
        labels,
        subfields: SubfieldMap::with_priority(cfg.subfield_priority.clone())?,
    })
}

fn write_diagnostics(out: &mut Out<'_>, data: &Loaded) -> Result<()> {
    out.write("diagnostics.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["kind", "paper_id", "detail"])?;
        for d in data.corpus.dangling_references() {
            w.write_record(["dangling_reference", &d.paper_id, &d.target])?;
        }
        for p in data.corpus.dropped_self_references() {
            w.write_record(["self_reference", p.as_str(), ""])?;
        }
        for (a, b) in &data.diagnostics.two_cycles {
            w.write_record(["two_cycle", a.as_str(), b.as_str()])?;
        }
        for (name, count) in &data.labels.unresolved_affiliations {
            w.write_record(["unresolved_affiliation", "", &format!("{name} ({count})")])?;
        }
        w.write_record([
            "authors_without_affiliation",
            "",
            &data.labels.authors_without_affiliation.to_string(),
        ])?;
        Ok(())
    })
}

fn write_labels(out: &mut Out<'_>, data: &Loaded) -> Result<()> {
    out.write("labels.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["paper_id", "team_type", "subtype"])?;
        for l in &data.labels.labels {
            w.write_record([
                l.paper_id.as_str(),
                l.team_type.as_str(),
                l.subtype.map(|s| s.as_str()).unwrap_or(""),
            ])?;
        }
        Ok(())
    })
}

/// Pair z-tables for every publication year, reusing cached tables keyed by
/// year, shuffle count, seed and corpus hash.
pub fn novelty_tables(
    cfg: &RunConfig,
    corpus: &Corpus,
    graph: &CitationGraph,
) -> Result<BTreeMap<i32, PairZTable>> {
    let cache = cfg.cache_dir();
    fs::create_dir_all(&cache).map_err(|e| CoreError::io(&cache, e))?;
    let hash = corpus.content_hash();
    let mut years: Vec<i32> = graph.nodes().map(|n| graph.year(n)).collect();
    years.sort_unstable();
    years.dedup();
    let mut tables = BTreeMap::new();
    for year in years {
        let path = cache.join(PairZTable::cache_key(
            year,
            cfg.novelty_shuffles,
            cfg.novelty_seed,
            &hash,
        ));
        let cached = File::open(&path)
            .ok()
            .and_then(|f| PairZTable::read_csv(BufReader::new(f)).ok())
            .filter(|t| {
                t.year == year && t.shuffles == cfg.novelty_shuffles && t.seed == cfg.novelty_seed
            });
        let table = match cached {
            Some(t) => t,
            None => {
                let t = null_model_zscores(graph, year, cfg.novelty_shuffles, cfg.novelty_seed)?;
                let f = File::create(&path).map_err(|e| CoreError::io(&path, e))?;
                t.write_csv(BufWriter::new(f))?;
                t
            }
        };
        tables.insert(year, table);
    }
    Ok(tables)
}

fn metrics_for(
    cfg: &RunConfig,
    data: &Loaded,
    tables: Option<&BTreeMap<i32, PairZTable>>,
) -> Result<Vec<MetricRow>> {
    let settings = MetricSettings {
        window: CitationWindow {
            years: cfg.window_years,
            inclusive: cfg.window_inclusive,
        },
        horizon: cfg.cd_horizon,
        subfields: &data.subfields,
        novelty: tables,
    };
    compute_metrics(&data.corpus, &data.graph, &data.labels, &settings)
}

fn write_projection(
    out: &mut Out<'_>,
    name: &str,
    rows: &[MetricRow],
    target: Target,
) -> Result<()> {
    out.write(name, |w| {
        let mut w = csv::Writer::from_writer(w);
        match target {
            Target::Impact => {
                w.write_record([
                    "paper_id",
                    "year",
                    "team_type",
                    "team_size",
                    "mean_h",
                    "mean_age",
                    "c5",
                    "top_decile",
                ])?;
                for r in rows {
                    w.write_record([
                        r.paper_id.clone(),
                        r.year.to_string(),
                        r.team_type.as_str().to_string(),
                        r.team_size.to_string(),
                        fmt_opt(r.mean_h),
                        fmt_opt(r.mean_age),
                        r.c5.to_string(),
                        u8::from(r.top_decile).to_string(),
                    ])?;
                }
            }
            Target::Disruption => {
                w.write_record(["paper_id", "year", "team_type", "cd", "n_i", "n_j", "n_k"])?;
                for r in rows {
                    w.write_record([
                        r.paper_id.clone(),
                        r.year.to_string(),
                        r.team_type.as_str().to_string(),
                        fmt_opt(r.cd),
                        r.n_i.to_string(),
                        r.n_j.to_string(),
                        r.n_k.to_string(),
                    ])?;
                }
            }
            _ => {
                w.write_record([
                    "paper_id",
                    "year",
                    "team_type",
                    "atypicality",
                    "conventionality",
                    "n_pairs",
                    "n_undefined_pairs",
                ])?;
                for r in rows {
                    w.write_record([
                        r.paper_id.clone(),
                        r.year.to_string(),
                        r.team_type.as_str().to_string(),
                        fmt_opt(r.atypicality),
                        fmt_opt(r.conventionality),
                        r.n_pairs.to_string(),
                        r.n_undefined_pairs.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })
}

fn write_ecc(out: &mut Out<'_>, cfg: &RunConfig, data: &Loaded) -> Result<()> {
    let teams: Vec<TeamType> = data.labels.labels.iter().map(|l| l.team_type).collect();
    let mut years: Vec<i32> = data.graph.nodes().map(|n| data.graph.year(n)).collect();
    years.sort_unstable();
    years.dedup();
    let mut results = Vec::new();
    for y in years {
        match excess_self_citation(&data.graph, &teams, y, cfg.ecc_estimator) {
            Ok(r) => results.push(r),
            Err(CoreError::NoData(m)) => out.warn(format!("ecc: {m}")),
            Err(e) => return Err(e),
        }
    }
    out.write("ecc.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "year",
            "n_edges",
            "p_ind_given_ind",
            "p_acad_given_ind",
            "p_acad_given_acad",
            "p_ind_given_acad",
            "p_ind",
            "p_acad",
            "ecc_industry",
            "ecc_academic",
        ])?;
        for r in &results {
            w.write_record([
                r.year.to_string(),
                r.n_edges.to_string(),
                fmt_opt(r.p_ind_given_ind),
                fmt_opt(r.p_acad_given_ind),
                fmt_opt(r.p_acad_given_acad),
                fmt_opt(r.p_ind_given_acad),
                format!("{:?}", r.p_ind),
                format!("{:?}", r.p_acad),
                fmt_opt(r.ecc_industry),
                fmt_opt(r.ecc_academic),
            ])?;
        }
        Ok(())
    })
}

fn write_lmm(out: &mut Out<'_>, cfg: &RunConfig, rows: &[MetricRow]) -> Result<()> {
    for name in &cfg.lmm_responses {
        let response = if name == "c5" {
            Response::C5
        } else {
            Response::NegAtypicality
        };
        let fit = fit_ladder(rows, ladder(response))?;
        if fit.dropped > 0 {
            out.warn(format!(
                "lmm {name}: {} incomplete rows dropped",
                fit.dropped
            ));
        }
        let ll = fit.log_likelihoods();
        if ll
            .windows(2)
            .any(|w| w[1] < w[0] - 1e-8 * (1.0 + w[0].abs()))
        {
            out.warn(format!(
                "lmm {name}: log-likelihood not monotone along the ladder {ll:?}"
            ));
        }
        out.write(&format!("lmm_{name}.csv"), |w| write_ladder(&fit, w))?;
    }
    Ok(())
}

fn write_gmm(out: &mut Out<'_>, cfg: &RunConfig, data: &Loaded, rows: &[MetricRow]) -> Result<()> {
    let opts = GmmOptions {
        k: 2,
        seed: cfg.gmm_seed,
        max_iter: cfg.gmm_max_iter,
        var_floor: cfg.gmm_var_floor,
        ..GmmOptions::default()
    };
    let teams = [
        TeamType::AcademicOnly,
        TeamType::IndustryOnly,
        TeamType::Mixed,
    ];
    let fits = seniority_clusters(&data.corpus, &data.graph, rows, &teams, &opts);
    for (t, f) in &fits {
        if let Err(e) = f {
            out.warn(format!("gmm {}: {e}", t.as_str()));
        }
    }
    out.write("gmm.csv", |w| write_clusters(&fits, w))
}

fn load_registry(cfg: &RunConfig) -> Result<ModelRegistry> {
    match &cfg.models {
        Some(p) => load_models(File::open(p).map_err(|e| CoreError::io(p, e))?),
        None => load_models(BUNDLED_REGISTRY.as_bytes()),
    }
}

fn write_sota(out: &mut Out<'_>, cfg: &RunConfig) -> Result<()> {
    let reg = load_registry(cfg)?;
    for r in &reg.rejected {
        out.warn(format!(
            "models line {}: `{}` rejected: {}",
            r.line, r.name, r.reason
        ));
    }
    out.write("sota_models.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "name",
            "year",
            "team_type",
            "domain",
            "parameters",
            "log10_parameters",
            "magnitude_order",
        ])?;
        for m in &reg.records {
            w.write_record([
                m.name.clone(),
                m.year.to_string(),
                m.team_type.as_str().to_string(),
                m.domain.as_str().to_string(),
                m.parameters.to_string(),
                format!("{:?}", m.log10_parameters()),
                m.magnitude_order().to_string(),
            ])?;
        }
        Ok(())
    })?;
    out.write("sota_rejected.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["line", "name", "reason"])?;
        for r in &reg.rejected {
            w.write_record([r.line.to_string(), r.name.clone(), r.reason.to_string()])?;
        }
        Ok(())
    })?;
    let summary = yearly_summary(&reg.records);
    out.write("sota_summary.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "year",
            "academic",
            "industry",
            "mixed",
            "total",
            "industry_academic_ratio",
            "industry_academic_excess",
            "binomial_p",
            "mean_log10_academic",
            "mean_log10_industry",
            "mean_log10_mixed",
        ])?;
        for s in &summary {
            w.write_record([
                s.year.to_string(),
                s.academic.to_string(),
                s.industry.to_string(),
                s.mixed.to_string(),
                s.total().to_string(),
                fmt_opt(s.industry_academic_ratio),
                fmt_opt(s.industry_academic_excess),
                fmt_opt(s.binomial_p),
                fmt_opt(s.mean_log10_academic),
                fmt_opt(s.mean_log10_industry),
                fmt_opt(s.mean_log10_mixed),
            ])?;
        }
        Ok(())
    })?;
    let mut fits = Vec::new();
    for team in [ModelTeam::Academic, ModelTeam::Industry, ModelTeam::Mixed] {
        let pts = magnitude_series(&reg.records, team);
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        fits.push((team, pts.len(), piecewise_fit(&xs, &ys)));
    }
    out.write("piecewise.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "team_type",
            "n_points",
            "breakpoint",
            "left_slope",
            "right_slope",
            "left_intercept",
            "right_intercept",
            "rss",
            "line_rss",
            "note",
        ])?;
        for (team, n, fit) in &fits {
            let mut row = vec![team.as_str().to_string(), n.to_string()];
            match fit {
                Ok(f) => {
                    for v in [
                        f.breakpoint,
                        f.left_slope,
                        f.right_slope,
                        f.left_intercept,
                        f.right_intercept,
                        f.rss,
                        f.line_rss,
                    ] {
                        row.push(format!("{v:?}"));
                    }
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 7));
                    row.push(e.to_string());
                }
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

const SUMMARY_COLUMNS: [&str; 12] = [
    "n_papers",
    "mean_c5",
    "top_decile_rate",
    "mean_cd",
    "n_cd_defined",
    "mean_atypicality",
    "mean_conventionality",
    "atypical_share",
    "n_novelty_defined",
    "mean_team_size",
    "mean_h",
    "mean_age",
];

fn mean(xs: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let (mut s, mut n) = (0.0, 0usize);
    for x in xs {
        s += x;
        n += 1;
    }
    ((n > 0).then(|| s / n as f64), n)
}

fn summary_cells(rows: &[&MetricRow]) -> Vec<String> {
    let (c5, n) = mean(rows.iter().map(|r| f64::from(r.c5)));
    let (top, _) = mean(rows.iter().map(|r| f64::from(u8::from(r.top_decile))));
    let (cd, n_cd) = mean(rows.iter().filter_map(|r| r.cd));
    let (aty, n_nov) = mean(rows.iter().filter_map(|r| r.atypicality));
    let (conv, _) = mean(rows.iter().filter_map(|r| r.conventionality));
    let (share, _) = mean(
        rows.iter()
            .filter_map(|r| r.atypicality)
            .map(|a| f64::from(u8::from(a < 0.0))),
    );
    let (size, _) = mean(rows.iter().map(|r| r.team_size as f64));
    let (h, _) = mean(rows.iter().filter_map(|r| r.mean_h));
    let (age, _) = mean(rows.iter().filter_map(|r| r.mean_age));
    vec![
        n.to_string(),
        fmt_opt(c5),
        fmt_opt(top),
        fmt_opt(cd),
        n_cd.to_string(),
        fmt_opt(aty),
        fmt_opt(conv),
        fmt_opt(share),
        n_nov.to_string(),
        fmt_opt(size),
        fmt_opt(h),
        fmt_opt(age),
    ]
}

fn write_grouped<K: Ord>(
    out: &mut Out<'_>,
    name: &str,
    key_columns: &[&str],
    rows: &[MetricRow],
    key: impl Fn(&MetricRow) -> Option<(K, Vec<String>)>,
) -> Result<()> {
    let mut groups: BTreeMap<K, (Vec<String>, Vec<&MetricRow>)> = BTreeMap::new();
    for r in rows {
        if let Some((k, labels)) = key(r) {
            groups
                .entry(k)
                .or_insert_with(|| (labels, Vec::new()))
                .1
                .push(r);
        }
    }
    out.write(name, |w| {
        let mut w = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = key_columns.to_vec();
        header.extend(SUMMARY_COLUMNS);
        w.write_record(&header)?;
        for (labels, members) in groups.values() {
            let mut row = labels.clone();
            row.extend(summary_cells(members));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

fn write_tests(out: &mut Out<'_>, rows: &[MetricRow]) -> Result<()> {
    type Getter = fn(&MetricRow) -> Option<f64>;
    let metrics: [(&str, Getter); 5] = [
        ("c5", |r| Some(f64::from(r.c5))),
        ("top_decile", |r| Some(f64::from(u8::from(r.top_decile)))),
        ("cd", |r| r.cd),
        ("atypicality", |r| r.atypicality),
        ("conventionality", |r| r.conventionality),
    ];
    let sample = |team: TeamType, f: Getter| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.team_type == team)
            .filter_map(f)
            .collect()
    };
    out.write("tests.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "metric",
            "group_a",
            "group_b",
            "n_a",
            "n_b",
            "mean_a",
            "mean_b",
            "t",
            "df",
            "p_two_sided",
            "note",
        ])?;
        for (name, f) in metrics {
            let a = sample(TeamType::IndustryOnly, f);
            let b = sample(TeamType::AcademicOnly, f);
            let (ma, _) = mean(a.iter().copied());
            let (mb, _) = mean(b.iter().copied());
            let mut row = vec![
                name.to_string(),
                "industry".into(),
                "academic".into(),
                a.len().to_string(),
                b.len().to_string(),
                fmt_opt(ma),
                fmt_opt(mb),
            ];
            match welch_t_test(&a, &b) {
                Ok(t) => {
                    row.extend([
                        format!("{:?}", t.t),
                        format!("{:?}", t.df),
                        format!("{:?}", t.p_two_sided),
                        String::new(),
                    ]);
                }
                Err(e) => {
                    row.extend([String::new(), String::new(), String::new(), e.to_string()]);
                }
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}

fn write_report(out: &mut Out<'_>, cfg: &RunConfig, rows: &[MetricRow]) -> Result<()> {
    out.write("metrics.csv", |w| write_metrics(rows, w))?;
    write_grouped(out, "summary_team.csv", &["team_type"], rows, |r| {
        Some((r.team_type, vec![r.team_type.as_str().to_string()]))
    })?;
    write_grouped(
        out,
        "summary_subfield.csv",
        &["subfield", "team_type"],
        rows,
        |r| {
            Some((
                (r.subfield, r.team_type),
                vec![
                    r.subfield.as_str().to_string(),
                    r.team_type.as_str().to_string(),
                ],
            ))
        },
    )?;
    write_grouped(out, "summary_subtype.csv", &["subtype"], rows, |r| {
        r.subtype.map(|s| (s, vec![s.as_str().to_string()]))
    })?;
    let strata = stratify_teams(rows, &cfg.strata);
    for w in &strata.warnings {
        out.warn(format!("strata: {w}"));
    }
    let summary = strata_summary(rows, &strata, &cfg.strata);
    out.write("strata.csv", |w| write_strata(&summary, w))?;
    write_tests(out, rows)
}

/// Rules in force that are not configuration keys.
pub const DESIGN_DEFAULTS: &[(&str, &str)] = &[
    (
        "team_type_rule",
        "unknown authors ignored; academic and industry anywhere on the byline is mixed",
    ),
    (
        "subtype_rule",
        "dual affiliation counts as academic; unresolved end authors skipped inward",
    ),
    (
        "top_decile_rule",
        "ceil(n/10) highest C5 per publication year, ties at the cutoff included",
    ),
    (
        "h_index_rule",
        "papers published and citations made by the paper's year",
    ),
    (
        "academic_age_rule",
        "paper year minus first publication year",
    ),
    (
        "cd_candidates",
        "papers published no earlier than the focal paper, excluding it",
    ),
    (
        "ecc_cited_years",
        "cited papers published no later than the citing year",
    ),
    (
        "novelty_null",
        "Fisher-Yates shuffle of cited-venue slots among papers of one citing year",
    ),
    (
        "novelty_sd",
        "population standard deviation over shuffles; z undefined when zero",
    ),
    (
        "novelty_pairs",
        "all unordered pairs of resolvable references, same-venue pairs included",
    ),
    (
        "novelty_percentiles",
        "nearest-rank 10th percentile and median of defined z-scores",
    ),
    ("lmm_estimator", "maximum likelihood"),
    (
        "lmm_aic_parameters",
        "fixed effects + variance components + residual",
    ),
    (
        "lmm_rows",
        "rows complete for the largest model in the ladder, known team type",
    ),
    (
        "gmm_points",
        "(h-index, academic age) per byline position at the paper's year",
    ),
    ("gmm_covariance", "diagonal"),
    (
        "piecewise_grid",
        "observed years excluding the extremes, ties to the earlier year",
    ),
    (
        "binomial_two_sided",
        "sum of outcomes no more probable than the observed one",
    ),
    (
        "sota_ratios",
        "industry/academic and (industry-academic)/academic both reported",
    ),
    (
        "strata_rule",
        "per publication year, ceil(p n/100) with ties included, cohorts under 4 skipped",
    ),
];

fn write_manifest(
    out: &mut Out<'_>,
    cfg: &RunConfig,
    target: Target,
    corpus_hash: Option<&str>,
) -> Result<()> {
    let mut lines = vec![format!("target={target:?}")];
    if let Some(h) = corpus_hash {
        lines.push(format!("corpus_sha256={h}"));
    }
    if target.needs_corpus() {
        lines.push(format!("registry_sha256={}", sha256_file(&cfg.registry)?));
    }
    match &cfg.models {
        Some(p) => lines.push(format!("models_sha256={}", sha256_file(p)?)),
        None => lines.push(format!(
            "models_sha256={}",
            hex::encode(Sha256::digest(BUNDLED_REGISTRY))
        )),
    }
    // locations and thread counts do not affect results
    const SKIP: [&str; 6] = [
        "corpus",
        "registry",
        "models",
        "out_dir",
        "cache_dir",
        "workers",
    ];
    for (k, v) in cfg.entries() {
        if !SKIP.contains(&k) {
            lines.push(format!("config.{k}={v}"));
        }
    }
    for (k, v) in DESIGN_DEFAULTS {
        lines.push(format!("default.{k}={v}"));
    }
    for w in &out.summary.warnings {
        lines.push(format!("warning={w}"));
    }
    out.write(MANIFEST, |w| {
        for l in &lines {
            writeln!(w, "{l}").map_err(|e| CoreError::io(MANIFEST, e))?;
        }
        Ok(())
    })
}

fn run_stages(cfg: &RunConfig, target: Target) -> std::result::Result<RunSummary, StageError> {
    let mut out = Out {
        dir: &cfg.out_dir,
        summary: RunSummary::default(),
    };
    if target == Target::Sota {
        write_sota(&mut out, cfg).map_err(at("sota"))?;
        write_manifest(&mut out, cfg, target, None).map_err(at("manifest"))?;
        return Ok(out.summary);
    }

    let data = load(cfg).map_err(at("ingest"))?;
    if matches!(target, Target::Ingest | Target::All) {
        write_diagnostics(&mut out, &data).map_err(at("ingest"))?;
    }
    if matches!(target, Target::Classify | Target::All) {
        write_labels(&mut out, &data).map_err(at("classify"))?;
    }
    if matches!(target, Target::Ecc | Target::All) && (cfg.ecc || target == Target::Ecc) {
        write_ecc(&mut out, cfg, &data).map_err(at("ecc"))?;
    }
    let needs_metrics = !matches!(target, Target::Ingest | Target::Classify | Target::Ecc);
    if needs_metrics {
        let tables = if target.needs_novelty(cfg) {
            Some(novelty_tables(cfg, &data.corpus, &data.graph).map_err(at("novelty"))?)
        } else {
            None
        };
        let rows = metrics_for(cfg, &data, tables.as_ref()).map_err(at("metrics"))?;
        match target {
            Target::Impact => {
                write_projection(&mut out, "impact.csv", &rows, target).map_err(at("impact"))?
            }
            Target::Disruption => write_projection(&mut out, "disruption.csv", &rows, target)
                .map_err(at("disruption"))?,
            Target::Novelty => {
                write_projection(&mut out, "novelty.csv", &rows, target).map_err(at("novelty"))?
            }
            _ => {}
        }
        if target == Target::Lmm || (target == Target::All && cfg.lmm) {
            write_lmm(&mut out, cfg, &rows).map_err(at("lmm"))?;
        }
        if target == Target::Gmm || (target == Target::All && cfg.gmm) {
            write_gmm(&mut out, cfg, &data, &rows).map_err(at("gmm"))?;
        }
        if matches!(target, Target::Report | Target::All) {
            write_report(&mut out, cfg, &rows).map_err(at("report"))?;
        }
    }
    if target == Target::All && cfg.sota {
        write_sota(&mut out, cfg).map_err(at("sota"))?;
    }
    write_manifest(&mut out, cfg, target, Some(&data.corpus.content_hash()))
        .map_err(at("manifest"))?;
    Ok(out.summary)
}

/// Generates a synthetic corpus from `cfg.synth` and writes it to
/// `cfg.corpus`, its company registry to `cfg.registry` and the ground-truth
/// labels to `labels`.
pub fn write_synthetic(cfg: &RunConfig, labels: &Path) -> Result<GeneratedSummary> {
    let g = crate::synth::generate(&cfg.synth)?;
    let create = |p: &Path| -> Result<BufWriter<File>> {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
        }
        Ok(BufWriter::new(
            File::create(p).map_err(|e| CoreError::io(p, e))?,
        ))
    };
    g.write_corpus(create(&cfg.corpus)?)?;
    g.write_registry(create(&cfg.registry)?)?;
    g.write_labels(create(labels)?)?;
    Ok(GeneratedSummary {
        papers: g.records.len(),
        references: g.records.iter().map(|p| p.references.len()).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratedSummary {
    pub papers: usize,
    pub references: usize,
}
