//! Curated registry of state-of-the-art models and per-year summaries.
//!
//! Registry rows: `name,year,team_type,domain,parameters,citations,
//! high_acceptance,sota_at_publication,deployed`. A model is accepted when it
//! has at least 1000 citations, all three flags are true and it has a
//! positive parameter count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use teamcite_stats::exact_binomial_test;

use crate::error::{CoreError, Result};

pub const MIN_CITATIONS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelTeam {
    Academic,
    Industry,
    Mixed,
}

impl ModelTeam {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTeam::Academic => "academic",
            ModelTeam::Industry => "industry",
            ModelTeam::Mixed => "mixed",
        }
    }
}

impl FromStr for ModelTeam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "academic" | "academia" => Ok(ModelTeam::Academic),
            "industry" => Ok(ModelTeam::Industry),
            "mixed" | "collaboration" => Ok(ModelTeam::Mixed),
            other => Err(format!("unknown team type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Language,
    Vision,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Language => "language",
            Domain::Vision => "vision",
        }
    }
}

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "language" | "nlp" => Ok(Domain::Language),
            "vision" | "cv" => Ok(Domain::Vision),
            other => Err(format!("unknown domain `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub name: String,
    pub year: i32,
    pub team_type: ModelTeam,
    pub domain: Domain,
    pub parameters: u64,
    pub citations: u64,
}

impl ModelRecord {
    pub fn log10_parameters(&self) -> f64 {
        (self.parameters as f64).log10()
    }

    /// Floored order of magnitude, computed on integers.
    pub fn magnitude_order(&self) -> u32 {
        self.parameters.ilog10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    TooFewCitations(u64),
    NotHighAcceptance,
    NotStateOfTheArt,
    NotDeployed,
    NoParameters,
    Malformed(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::TooFewCitations(c) => {
                write!(f, "{c} citations, at least {MIN_CITATIONS} required")
            }
            RejectReason::NotHighAcceptance => f.write_str("not highly accepted"),
            RejectReason::NotStateOfTheArt => f.write_str("not state of the art at publication"),
            RejectReason::NotDeployed => f.write_str("not deployed"),
            RejectReason::NoParameters => f.write_str("parameter count must be positive"),
            RejectReason::Malformed(m) => write!(f, "malformed row: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    /// 1-based line in the file, header included.
    pub line: usize,
    pub name: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelRegistry {
    pub records: Vec<ModelRecord>,
    pub rejected: Vec<RejectedRow>,
}

const HEADER: [&str; 9] = [
    "name",
    "year",
    "team_type",
    "domain",
    "parameters",
    "citations",
    "high_acceptance",
    "sota_at_publication",
    "deployed",
];

fn parse_flag(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "y" => Ok(true),
        "false" | "no" | "0" | "n" => Ok(false),
        other => Err(format!("bad flag `{other}`")),
    }
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<ModelRecord, RejectReason> {
    let malformed = RejectReason::Malformed;
    if row.len() != HEADER.len() {
        return Err(malformed(format!(
            "expected {} fields, found {}",
            HEADER.len(),
            row.len()
        )));
    }
    let int = |k: usize| -> std::result::Result<u64, RejectReason> {
        row[k]
            .trim()
            .parse()
            .map_err(|_| malformed(format!("bad {} `{}`", HEADER[k], &row[k])))
    };
    let year: i32 = row[1]
        .trim()
        .parse()
        .map_err(|_| malformed(format!("bad year `{}`", &row[1])))?;
    let team_type = row[2].parse().map_err(malformed)?;
    let domain = row[3].parse().map_err(malformed)?;
    let parameters = int(4)?;
    let citations = int(5)?;
    let accepted = parse_flag(&row[6]).map_err(malformed)?;
    let sota = parse_flag(&row[7]).map_err(malformed)?;
    let deployed = parse_flag(&row[8]).map_err(malformed)?;
    if citations < MIN_CITATIONS {
        return Err(RejectReason::TooFewCitations(citations));
    }
    if !accepted {
        return Err(RejectReason::NotHighAcceptance);
    }
    if !sota {
        return Err(RejectReason::NotStateOfTheArt);
    }
    if !deployed {
        return Err(RejectReason::NotDeployed);
    }
    if parameters == 0 {
        return Err(RejectReason::NoParameters);
    }
    Ok(ModelRecord {
        name: row[0].trim().to_string(),
        year,
        team_type,
        domain,
        parameters,
        citations,
    })
}

/// Reads a registry. An empty input yields an empty registry; a header row
/// is required otherwise.
pub fn load_models<R: Read>(input: R) -> Result<ModelRegistry> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut out = ModelRegistry::default();
    let mut rows = rdr.records();
    match rows.next() {
        None => return Ok(out),
        Some(h) => {
            let h = h?;
            let names: Vec<&str> = h.iter().map(str::trim).collect();
            if names != HEADER {
                return Err(CoreError::Parse {
                    line: 1,
                    message: format!("registry header must be {}", HEADER.join(",")),
                });
            }
        }
    }
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                out.rejected.push(RejectedRow {
                    line,
                    name: String::new(),
                    reason: RejectReason::Malformed(e.to_string()),
                });
                continue;
            }
        };
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        match parse_row(&row) {
            Ok(r) => out.records.push(r),
            Err(reason) => out.rejected.push(RejectedRow {
                line,
                name: row.get(0).unwrap_or("").trim().to_string(),
                reason,
            }),
        }
    }
    Ok(out)
}

/// Writes accepted records in the registry schema (all flags true).
pub fn write_models<W: Write>(records: &[ModelRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.name.clone(),
            r.year.to_string(),
            r.team_type.as_str().to_string(),
            r.domain.as_str().to_string(),
            r.parameters.to_string(),
            r.citations.to_string(),
            "true".into(),
            "true".into(),
            "true".into(),
        ])?;
    }
    w.flush().map_err(|e| CoreError::io("<registry>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearSummary {
    pub year: i32,
    pub academic: usize,
    pub industry: usize,
    pub mixed: usize,
    /// Industry count over academic count.
    pub industry_academic_ratio: Option<f64>,
    /// `(industry - academic) / academic`, i.e. "how many times more".
    pub industry_academic_excess: Option<f64>,
    /// Exact two-sided binomial test of industry vs academic counts, p0 = 0.5.
    pub binomial_p: Option<f64>,
    pub mean_log10_academic: Option<f64>,
    pub mean_log10_industry: Option<f64>,
    pub mean_log10_mixed: Option<f64>,
}

impl YearSummary {
    pub fn total(&self) -> usize {
        self.academic + self.industry + self.mixed
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// One row per year that has at least one record, in year order.
pub fn yearly_summary(records: &[ModelRecord]) -> Vec<YearSummary> {
    let mut by_year: BTreeMap<i32, [Vec<f64>; 3]> = BTreeMap::new();
    for r in records {
        let slot = match r.team_type {
            ModelTeam::Academic => 0,
            ModelTeam::Industry => 1,
            ModelTeam::Mixed => 2,
        };
        by_year.entry(r.year).or_default()[slot].push(r.log10_parameters());
    }
    by_year
        .into_iter()
        .map(|(year, [a, i, m])| {
            let (na, ni) = (a.len(), i.len());
            let ratio = (na > 0).then(|| ni as f64 / na as f64);
            YearSummary {
                year,
                academic: na,
                industry: ni,
                mixed: m.len(),
                industry_academic_ratio: ratio,
                industry_academic_excess: ratio.map(|r| r - 1.0),
                binomial_p: (na + ni > 0)
                    .then(|| exact_binomial_test(ni as u64, (na + ni) as u64, 0.5).ok())
                    .flatten(),
                mean_log10_academic: mean(&a),
                mean_log10_industry: mean(&i),
                mean_log10_mixed: mean(&m),
            }
        })
        .collect()
}

/// `(year, log10 parameters)` points for one team type, sorted by year then
/// name.
pub fn magnitude_series(records: &[ModelRecord], team: ModelTeam) -> Vec<(f64, f64)> {
    let mut rows: Vec<&ModelRecord> = records.iter().filter(|r| r.team_type == team).collect();
    rows.sort_by(|a, b| a.year.cmp(&b.year).then_with(|| a.name.cmp(&b.name)));
    rows.iter()
        .map(|r| (r.year as f64, r.log10_parameters()))
        .collect()
}

/// The illustrative registry shipped with the crate.
pub const BUNDLED_REGISTRY: &str = include_str!("../../../data/sota_models.csv");
