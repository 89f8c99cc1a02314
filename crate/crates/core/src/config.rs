//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::disruption::Horizon;
use crate::ecc::EccEstimator;
use crate::error::{CoreError, Result};
use crate::strata::StrataSpec;
use crate::subfield::{Subfield, SubfieldMap, DEFAULT_PRIORITY};
use crate::synth::{GeneratorSpec, PerTeam};

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("corpus", "line-delimited JSON corpus"),
    ("registry", "organization registry (name,class)"),
    ("models", "model registry CSV; empty uses the bundled one"),
    ("out_dir", "report directory"),
    ("cache_dir", "null-model cache; empty means <out_dir>/cache"),
    ("window_years", "citation window length in years"),
    ("window_inclusive", "count citations in year t+window"),
    ("cd_horizon", "all | upto:<year> | years:<n>"),
    ("ecc_estimator", "pooled | per-paper"),
    ("novelty", "compute atypicality and conventionality"),
    ("novelty_shuffles", "null-model shuffles per year"),
    ("novelty_seed", "null-model seed"),
    ("ecc", "compute excess self-citation"),
    ("lmm", "fit the mixed-model ladders"),
    ("lmm_responses", "comma list of c5, neg_atypicality"),
    ("gmm", "fit seniority clusters"),
    ("gmm_seed", "clustering seed"),
    ("gmm_max_iter", "EM iteration cap"),
    ("gmm_var_floor", "EM variance floor"),
    ("sota", "summarize the model registry"),
    ("strata_top", "percent of each cohort in the top stratum"),
    (
        "strata_upper",
        "percent of each cohort in the upper stratum",
    ),
    (
        "strata_bottom",
        "percent of each cohort in the bottom stratum",
    ),
    (
        "subfield_priority",
        "order used for venues listed under two subfields",
    ),
    (
        "academic_keywords",
        "comma list of academic affiliation keywords",
    ),
    ("workers", "worker threads; 0 lets the runtime decide"),
    ("synth_seed", "generator seed"),
    ("synth_first_year", "first generated year"),
    ("synth_last_year", "last generated year"),
    ("synth_papers_per_year", "papers per generated year"),
    ("synth_mixture", "academic,industry,mixed proportions"),
    (
        "synth_citation_rate",
        "academic,industry,mixed citation weights",
    ),
    (
        "synth_breadth",
        "academic,industry,mixed distinct cited venues",
    ),
    ("synth_refs_per_venue", "references per cited venue"),
    ("synth_locality", "weight of same-subfield venues"),
    ("synth_team_size", "min,max byline length"),
    ("synth_academic_authors", "academic author pool size"),
    ("synth_industry_authors", "industry author pool size"),
];

pub const WORKERS_ENV: &str = "TEAMCITE_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub registry: PathBuf,
    pub models: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub window_years: i32,
    pub window_inclusive: bool,
    pub cd_horizon: Horizon,
    pub ecc_estimator: EccEstimator,
    pub novelty: bool,
    pub novelty_shuffles: u32,
    pub novelty_seed: u64,
    pub ecc: bool,
    pub lmm: bool,
    pub lmm_responses: Vec<String>,
    pub gmm: bool,
    pub gmm_seed: u64,
    pub gmm_max_iter: usize,
    pub gmm_var_floor: f64,
    pub sota: bool,
    pub strata: StrataSpec,
    pub subfield_priority: Vec<Subfield>,
    pub academic_keywords: Vec<String>,
    pub workers: usize,
    pub synth: GeneratorSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::from("corpus.jsonl"),
            registry: PathBuf::from("registry.csv"),
            models: None,
            out_dir: PathBuf::from("reports"),
            cache_dir: None,
            window_years: 5,
            window_inclusive: true,
            cd_horizon: Horizon::All,
            ecc_estimator: EccEstimator::PooledEdges,
            novelty: true,
            novelty_shuffles: 10,
            novelty_seed: 1,
            ecc: true,
            lmm: true,
            lmm_responses: vec!["c5".into(), "neg_atypicality".into()],
            gmm: true,
            gmm_seed: 7,
            gmm_max_iter: 500,
            gmm_var_floor: 1e-6,
            sota: true,
            strata: StrataSpec::default(),
            subfield_priority: DEFAULT_PRIORITY.to_vec(),
            academic_keywords: crate::classify::DEFAULT_ACADEMIC_KEYWORDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            workers: 0,
            synth: GeneratorSpec::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CoreError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CoreError::Config(format!(
            "`{key}`: expected true or false, got `{value}`"
        ))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_triple<T: FromStr + Copy>(key: &str, value: &str) -> Result<PerTeam<T>> {
    match parse_list::<T>(key, value)?.as_slice() {
        [a, i, m] => Ok(PerTeam {
            academic: *a,
            industry: *i,
            mixed: *m,
        }),
        _ => Err(CoreError::Config(format!(
            "`{key}` needs three comma-separated values"
        ))),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn triple<T: ToString + Copy>(t: &PerTeam<T>) -> String {
    join(&[t.academic, t.industry, t.mixed])
}

fn path_or_empty(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

pub fn parse_horizon(value: &str) -> Result<Horizon> {
    let v = value.trim();
    if v == "all" {
        return Ok(Horizon::All);
    }
    if let Some(y) = v.strip_prefix("upto:") {
        return Ok(Horizon::UpTo(parse("cd_horizon", y)?));
    }
    if let Some(n) = v.strip_prefix("years:") {
        return Ok(Horizon::YearsAfter(parse("cd_horizon", n)?));
    }
    Err(CoreError::Config(format!(
        "`cd_horizon`: unknown value `{value}`"
    )))
}

fn horizon_str(h: Horizon) -> String {
    match h {
        Horizon::All => "all".into(),
        Horizon::UpTo(y) => format!("upto:{y}"),
        Horizon::YearsAfter(n) => format!("years:{n}"),
    }
}

const PATH_KEYS: [&str; 5] = ["corpus", "registry", "models", "out_dir", "cache_dir"];

impl RunConfig {
    /// Reads a config file. Relative paths are taken relative to the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, base)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CoreError::Config(format!("line {}: expected key = value", i + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if PATH_KEYS.contains(&key) && !value.is_empty() && Path::new(value).is_relative() {
                self.set(key, &base.join(value).display().to_string())?;
            } else {
                self.set(key, value)?;
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let opt_path = |v: &str| (!v.trim().is_empty()).then(|| PathBuf::from(v.trim()));
        match key {
            "corpus" => self.corpus = PathBuf::from(value.trim()),
            "registry" => self.registry = PathBuf::from(value.trim()),
            "models" => self.models = opt_path(value),
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "cache_dir" => self.cache_dir = opt_path(value),
            "window_years" => self.window_years = parse(key, value)?,
            "window_inclusive" => self.window_inclusive = parse_bool(key, value)?,
            "cd_horizon" => self.cd_horizon = parse_horizon(value)?,
            "ecc_estimator" => self.ecc_estimator = value.parse()?,
            "novelty" => self.novelty = parse_bool(key, value)?,
            "novelty_shuffles" => self.novelty_shuffles = parse(key, value)?,
            "novelty_seed" => self.novelty_seed = parse(key, value)?,
            "ecc" => self.ecc = parse_bool(key, value)?,
            "lmm" => self.lmm = parse_bool(key, value)?,
            "lmm_responses" => self.lmm_responses = parse_list(key, value)?,
            "gmm" => self.gmm = parse_bool(key, value)?,
            "gmm_seed" => self.gmm_seed = parse(key, value)?,
            "gmm_max_iter" => self.gmm_max_iter = parse(key, value)?,
            "gmm_var_floor" => self.gmm_var_floor = parse(key, value)?,
            "sota" => self.sota = parse_bool(key, value)?,
            "strata_top" => self.strata.top = parse(key, value)?,
            "strata_upper" => self.strata.upper = parse(key, value)?,
            "strata_bottom" => self.strata.bottom = parse(key, value)?,
            "subfield_priority" => self.subfield_priority = parse_list(key, value)?,
            "academic_keywords" => self.academic_keywords = parse_list(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "synth_seed" => self.synth.seed = parse(key, value)?,
            "synth_first_year" => self.synth.first_year = parse(key, value)?,
            "synth_last_year" => self.synth.last_year = parse(key, value)?,
            "synth_papers_per_year" => self.synth.papers_per_year = parse(key, value)?,
            "synth_mixture" => self.synth.mixture = parse_triple(key, value)?,
            "synth_citation_rate" => self.synth.citation_rate = parse_triple(key, value)?,
            "synth_breadth" => self.synth.reference_breadth = parse_triple(key, value)?,
            "synth_refs_per_venue" => self.synth.refs_per_venue = parse(key, value)?,
            "synth_locality" => self.synth.locality = parse(key, value)?,
            "synth_team_size" => match parse_list::<usize>(key, value)?.as_slice() {
                [lo, hi] => self.synth.team_size = (*lo, *hi),
                _ => return Err(CoreError::Config("`synth_team_size` needs min,max".into())),
            },
            "synth_academic_authors" => self.synth.academic_authors = parse(key, value)?,
            "synth_industry_authors" => self.synth.industry_authors = parse(key, value)?,
            _ => return Err(CoreError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Worker count from the environment unless already set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            if !v.trim().is_empty() {
                self.workers = parse(WORKERS_ENV, &v)?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_years < 0 {
            return Err(CoreError::Config(
                "window_years must be non-negative".into(),
            ));
        }
        if self.novelty && self.novelty_shuffles == 0 {
            return Err(CoreError::Config(
                "novelty_shuffles must be positive".into(),
            ));
        }
        for r in &self.lmm_responses {
            if r != "c5" && r != "neg_atypicality" {
                return Err(CoreError::Config(format!("unknown LMM response `{r}`")));
            }
        }
        self.strata.validate()?;
        SubfieldMap::with_priority(self.subfield_priority.clone())?;
        Ok(())
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("cache"))
    }

    /// Every key with its value in force, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|(k, _)| {
                let v = match *k {
                    "corpus" => self.corpus.display().to_string(),
                    "registry" => self.registry.display().to_string(),
                    "models" => path_or_empty(&self.models),
                    "out_dir" => self.out_dir.display().to_string(),
                    "cache_dir" => path_or_empty(&self.cache_dir),
                    "window_years" => self.window_years.to_string(),
                    "window_inclusive" => self.window_inclusive.to_string(),
                    "cd_horizon" => horizon_str(self.cd_horizon),
                    "ecc_estimator" => self.ecc_estimator.to_string(),
                    "novelty" => self.novelty.to_string(),
                    "novelty_shuffles" => self.novelty_shuffles.to_string(),
                    "novelty_seed" => self.novelty_seed.to_string(),
                    "ecc" => self.ecc.to_string(),
                    "lmm" => self.lmm.to_string(),
                    "lmm_responses" => self.lmm_responses.join(","),
                    "gmm" => self.gmm.to_string(),
                    "gmm_seed" => self.gmm_seed.to_string(),
                    "gmm_max_iter" => self.gmm_max_iter.to_string(),
                    "gmm_var_floor" => format!("{:?}", self.gmm_var_floor),
                    "sota" => self.sota.to_string(),
                    "strata_top" => self.strata.top.to_string(),
                    "strata_upper" => self.strata.upper.to_string(),
                    "strata_bottom" => self.strata.bottom.to_string(),
                    "subfield_priority" => join(&self.subfield_priority),
                    "academic_keywords" => self.academic_keywords.join(","),
                    "workers" => self.workers.to_string(),
                    "synth_seed" => self.synth.seed.to_string(),
                    "synth_first_year" => self.synth.first_year.to_string(),
                    "synth_last_year" => self.synth.last_year.to_string(),
                    "synth_papers_per_year" => self.synth.papers_per_year.to_string(),
                    "synth_mixture" => triple(&self.synth.mixture),
                    "synth_citation_rate" => triple(&self.synth.citation_rate),
                    "synth_breadth" => triple(&self.synth.reference_breadth),
                    "synth_refs_per_venue" => self.synth.refs_per_venue.to_string(),
                    "synth_locality" => self.synth.locality.to_string(),
                    "synth_team_size" => {
                        format!("{},{}", self.synth.team_size.0, self.synth.team_size.1)
                    }
                    "synth_academic_authors" => self.synth.academic_authors.to_string(),
                    "synth_industry_authors" => self.synth.industry_authors.to_string(),
                    other => unreachable!("key {other} has no value"),
                };
                (*k, v)
            })
            .collect()
    }
}
