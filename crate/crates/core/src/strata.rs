//! Seniority strata: per publication-year cohort, papers whose team mean
//! h-index is in the top, middle-and-up, or bottom share of the cohort.

use std::collections::BTreeMap;
use std::io::Write;

use crate::classify::TeamType;
use crate::error::{CoreError, Result};
use crate::metrics::{fmt_opt, MetricRow};

pub const MIN_COHORT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrataSpec {
    /// Percent of each cohort flagged from the top.
    pub top: f64,
    pub upper: f64,
    /// Percent flagged from the bottom.
    pub bottom: f64,
}

impl Default for StrataSpec {
    fn default() -> Self {
        Self {
            top: 10.0,
            upper: 50.0,
            bottom: 25.0,
        }
    }
}

impl StrataSpec {
    pub fn validate(&self) -> Result<()> {
        for p in [self.top, self.upper, self.bottom] {
            if !(p > 0.0 && p <= 100.0) {
                return Err(CoreError::Config(format!(
                    "stratum percent {p} outside (0, 100]"
                )));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> [String; 3] {
        [
            format!("top_{}", self.top),
            format!("top_{}", self.upper),
            format!("bottom_{}", self.bottom),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Strata {
    /// Per row: `[top, upper, bottom]`.
    pub flags: Vec<[bool; 3]>,
    pub warnings: Vec<String>,
}

fn rank_count(pct: f64, n: usize) -> usize {
    ((pct * n as f64 / 100.0).ceil() as usize).clamp(1, n)
}

/// Rows with undefined mean h belong to no stratum. A stratum takes the
/// `ceil(p n / 100)` most (or least) senior papers plus everything tied with
/// the last one taken.
pub fn stratify_teams(rows: &[MetricRow], spec: &StrataSpec) -> Strata {
    let mut cohorts: BTreeMap<i32, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        if let Some(h) = r.mean_h {
            cohorts.entry(r.year).or_default().push((i, h));
        }
    }
    let mut out = Strata {
        flags: vec![[false; 3]; rows.len()],
        warnings: Vec::new(),
    };
    for (year, mut cohort) in cohorts {
        let n = cohort.len();
        if n < MIN_COHORT {
            out.warnings.push(format!(
                "cohort {year}: {n} papers with a defined mean h-index, strata skipped"
            ));
            continue;
        }
        cohort.sort_by(|a, b| b.1.total_cmp(&a.1));
        if cohort[0].1 == cohort[n - 1].1 {
            out.warnings.push(format!(
                "cohort {year}: all mean h-index values tied, every paper falls in every stratum"
            ));
        }
        let top_cut = |pct: f64| cohort[rank_count(pct, n) - 1].1;
        let hi = top_cut(spec.top);
        let mid = top_cut(spec.upper);
        let lo = cohort[n - rank_count(spec.bottom, n)].1;
        for &(i, h) in &cohort {
            out.flags[i] = [h >= hi, h >= mid, h <= lo];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumSummary {
    pub stratum: String,
    pub team_type: TeamType,
    pub n_papers: usize,
    pub top_decile_rate: Option<f64>,
    pub mean_c5: Option<f64>,
}

pub fn strata_summary(
    rows: &[MetricRow],
    strata: &Strata,
    spec: &StrataSpec,
) -> Vec<StratumSummary> {
    let names = spec.names();
    let mut out = Vec::new();
    for (s, name) in names.iter().enumerate() {
        for team in TeamType::ALL {
            let members: Vec<&MetricRow> = rows
                .iter()
                .zip(&strata.flags)
                .filter(|(r, f)| f[s] && r.team_type == team)
                .map(|(r, _)| r)
                .collect();
            let n = members.len();
            let rate =
                (n > 0).then(|| members.iter().filter(|r| r.top_decile).count() as f64 / n as f64);
            let c5 =
                (n > 0).then(|| members.iter().map(|r| f64::from(r.c5)).sum::<f64>() / n as f64);
            out.push(StratumSummary {
                stratum: name.clone(),
                team_type: team,
                n_papers: n,
                top_decile_rate: rate,
                mean_c5: c5,
            });
        }
    }
    out
}

pub fn write_strata<W: Write>(summary: &[StratumSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "stratum",
        "team_type",
        "n_papers",
        "top_decile_rate",
        "mean_c5",
    ])?;
    for s in summary {
        w.write_record([
            s.stratum.clone(),
            s.team_type.as_str().to_string(),
            s.n_papers.to_string(),
            fmt_opt(s.top_decile_rate),
            fmt_opt(s.mean_c5),
        ])?;
    }
    w.flush().map_err(|e| CoreError::io("<strata>", e))
}
