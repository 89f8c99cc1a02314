//! Seeded generator of synthetic corpora with planted team effects.
//!
//! Every paper gets a team type from the mixture, a home venue, and a
//! byline drawn from persistent author pools. From the second year on, a
//! paper samples `reference_breadth` distinct venues (its own subfield's
//! venues weighted by `locality`) and cites `refs_per_venue` earlier papers
//! in each, chosen with probability proportional to the cited paper's team
//! citation rate.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{OrgClass, Registry, TeamType};
use crate::corpus::{write_records, Authorship, PaperRecord};
use crate::error::{CoreError, Result};
use crate::subfield::Subfield;

/// One value per generated team type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerTeam<T> {
    pub academic: T,
    pub industry: T,
    pub mixed: T,
}

impl<T: Copy> PerTeam<T> {
    pub fn get(&self, team: TeamType) -> T {
        match team {
            TeamType::AcademicOnly => self.academic,
            TeamType::IndustryOnly => self.industry,
            _ => self.mixed,
        }
    }
}

const TEAMS: [TeamType; 3] = [
    TeamType::AcademicOnly,
    TeamType::IndustryOnly,
    TeamType::Mixed,
];

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub first_year: i32,
    pub last_year: i32,
    pub papers_per_year: usize,
    /// Team-type proportions; must sum to 1.
    pub mixture: PerTeam<f64>,
    /// Relative chance of a team's papers being cited.
    pub citation_rate: PerTeam<f64>,
    /// Distinct venues cited per paper.
    pub reference_breadth: PerTeam<usize>,
    pub refs_per_venue: usize,
    /// Weight of same-subfield venues relative to others when sampling venues.
    pub locality: f64,
    pub team_size: (usize, usize),
    pub academic_authors: usize,
    pub industry_authors: usize,
    pub venues: Vec<(String, Subfield)>,
}

pub const UNIVERSITIES: &[&str] = &[
    "University of Arden",
    "University of Bramwell",
    "University of Calder",
    "University of Dunmore",
    "University of Ellery",
    "University of Fenwick",
    "University of Garrow",
    "University of Hollis",
];

pub const COMPANIES: &[&str] = &[
    "Northwind Labs",
    "Bluefin Systems",
    "Crestline AI",
    "Halcyon Research",
    "Ironwood Analytics",
    "Meridian Labs",
];

fn default_venues() -> Vec<(String, Subfield)> {
    let table: [(Subfield, [&str; 4]); 5] = [
        (Subfield::Nlp, ["ACL", "EMNLP", "NAACL", "COLING"]),
        (Subfield::Cv, ["CVPR", "ECCV", "WACV", "BMVC"]),
        (Subfield::Ml, ["NEURIPS", "ICLR", "AISTATS", "UAI"]),
        (Subfield::Dm, ["KDD", "WSDM", "SIGIR", "CIKM"]),
        (Subfield::Robotics, ["ICRA", "IROS", "RSS", "HRI"]),
    ];
    table
        .iter()
        .flat_map(|(f, vs)| vs.iter().map(move |v| (v.to_string(), *f)))
        .collect()
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            seed: 20240601,
            first_year: 2000,
            last_year: 2009,
            papers_per_year: 200,
            mixture: PerTeam {
                academic: 0.45,
                industry: 0.35,
                mixed: 0.20,
            },
            citation_rate: PerTeam {
                academic: 1.0,
                industry: 2.0,
                mixed: 1.5,
            },
            reference_breadth: PerTeam {
                academic: 6,
                industry: 3,
                mixed: 4,
            },
            refs_per_venue: 2,
            locality: 30.0,
            team_size: (2, 5),
            academic_authors: 600,
            industry_authors: 400,
            venues: default_venues(),
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::Config(m));
        let mix = [
            self.mixture.academic,
            self.mixture.industry,
            self.mixture.mixed,
        ];
        if mix.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || (mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad(format!(
                "team mixture {mix:?} must be non-negative and sum to 1"
            ));
        }
        let rates = [
            self.citation_rate.academic,
            self.citation_rate.industry,
            self.citation_rate.mixed,
        ];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad(format!("citation rates {rates:?} must be positive"));
        }
        if !(self.locality.is_finite() && self.locality > 0.0) {
            return bad("locality must be positive".into());
        }
        if self.first_year > self.last_year {
            return bad("first_year after last_year".into());
        }
        if self.papers_per_year == 0 || self.refs_per_venue == 0 {
            return bad("papers_per_year and refs_per_venue must be positive".into());
        }
        let (lo, hi) = self.team_size;
        if lo == 0 || lo > hi {
            return bad(format!("team size range {lo}..={hi} is empty"));
        }
        if self.venues.is_empty() {
            return bad("no venues".into());
        }
        let needs_academic = self.mixture.academic > 0.0 || self.mixture.mixed > 0.0;
        let needs_industry = self.mixture.industry > 0.0 || self.mixture.mixed > 0.0;
        if (needs_academic && self.academic_authors == 0)
            || (needs_industry && self.industry_authors == 0)
        {
            return bad("author pool empty for a team type with positive mixture".into());
        }
        for t in TEAMS {
            let b = self.reference_breadth.get(t);
            if b == 0 || b > self.venues.len() {
                return bad(format!(
                    "reference breadth {b} must be in 1..={}",
                    self.venues.len()
                ));
            }
        }
        Ok(())
    }
}

struct PoolAuthor {
    id: String,
    org: &'static str,
    entry_year: i32,
}

fn build_pool(
    rng: &mut ChaCha8Rng,
    n: usize,
    prefix: &str,
    orgs: &'static [&'static str],
    spec: &GeneratorSpec,
) -> Vec<PoolAuthor> {
    (0..n)
        .map(|i| PoolAuthor {
            id: format!("{prefix}{i:04}"),
            org: orgs[i % orgs.len()],
            entry_year: rng.random_range(spec.first_year..=spec.last_year),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub records: Vec<PaperRecord>,
    /// Ground-truth team type per paper, in record order.
    pub labels: Vec<(String, TeamType)>,
    /// Registry covering every company name used.
    pub registry: Registry,
}

impl GeneratedCorpus {
    pub fn write_corpus<W: Write>(&self, out: W) -> Result<()> {
        write_records(&self.records, out).map_err(|e| CoreError::io("<corpus>", e))
    }

    pub fn write_labels<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["paper_id", "team_type"])?;
        for (id, t) in &self.labels {
            w.write_record([id.as_str(), t.as_str()])?;
        }
        w.flush().map_err(|e| CoreError::io("<labels>", e))
    }

    pub fn write_registry<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.registry.to_csv().as_bytes())
            .map_err(|e| CoreError::io("<registry>", e))
    }
}

fn pick_team(rng: &mut ChaCha8Rng, mix: &PerTeam<f64>) -> TeamType {
    let u: f64 = rng.random();
    if u < mix.academic {
        TeamType::AcademicOnly
    } else if u < mix.academic + mix.industry {
        TeamType::IndustryOnly
    } else {
        TeamType::Mixed
    }
}

fn pick_authors<'a>(
    rng: &mut ChaCha8Rng,
    pool: &'a [PoolAuthor],
    year: i32,
    n: usize,
) -> Vec<&'a PoolAuthor> {
    let active: Vec<&PoolAuthor> = pool.iter().filter(|a| a.entry_year <= year).collect();
    // early years may have few active authors; fall back to the whole pool
    let source: Vec<&PoolAuthor> = if active.len() >= n {
        active
    } else {
        pool.iter().collect()
    };
    let n = n.min(source.len());
    let mut picked: Vec<usize> = index::sample(rng, source.len(), n).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| source[i]).collect()
}

/// Generates a corpus. The same spec always yields the same records.
pub fn generate(spec: &GeneratorSpec) -> Result<GeneratedCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let academics = build_pool(&mut rng, spec.academic_authors, "a", UNIVERSITIES, spec);
    let industrials = build_pool(&mut rng, spec.industry_authors, "i", COMPANIES, spec);

    let mut registry = Registry::default();
    for c in COMPANIES {
        registry.insert(c, OrgClass::Industry)?;
    }

    let mut records = Vec::new();
    let mut labels = Vec::new();
    // prior papers per venue: (record index, cited weight)
    let mut by_venue: Vec<Vec<(usize, f64)>> = vec![Vec::new(); spec.venues.len()];

    for year in spec.first_year..=spec.last_year {
        let mut this_year: Vec<(usize, usize, f64)> = Vec::new();
        for k in 0..spec.papers_per_year {
            let team = pick_team(&mut rng, &spec.mixture);
            let home = rng.random_range(0..spec.venues.len());
            let (lo, hi) = spec.team_size;
            let mut size = rng.random_range(lo..=hi);
            let byline: Vec<&PoolAuthor> = match team {
                TeamType::AcademicOnly => pick_authors(&mut rng, &academics, year, size),
                TeamType::IndustryOnly => pick_authors(&mut rng, &industrials, year, size),
                _ => {
                    size = size.max(2);
                    let n_acad = rng.random_range(1..size);
                    let mut b = pick_authors(&mut rng, &academics, year, n_acad);
                    b.extend(pick_authors(&mut rng, &industrials, year, size - n_acad));
                    b.shuffle(&mut rng);
                    b
                }
            };
            let authors = byline
                .iter()
                .map(|a| Authorship {
                    id: a.id.clone(),
                    affiliations: vec![a.org.to_string()],
                })
                .collect();

            let references = if year == spec.first_year {
                Vec::new()
            } else {
                cite(&mut rng, spec, team, home, &by_venue, &records)?
            };
            let paper_id = format!("S{year}-{k:04}");
            labels.push((paper_id.clone(), team));
            records.push(PaperRecord {
                paper_id,
                year,
                venue: spec.venues[home].0.clone(),
                authors,
                references,
            });
            this_year.push((home, records.len() - 1, spec.citation_rate.get(team)));
        }
        for (v, idx, w) in this_year {
            by_venue[v].push((idx, w));
        }
    }
    Ok(GeneratedCorpus {
        records,
        labels,
        registry,
    })
}

fn cite(
    rng: &mut ChaCha8Rng,
    spec: &GeneratorSpec,
    team: TeamType,
    home: usize,
    by_venue: &[Vec<(usize, f64)>],
    records: &[PaperRecord],
) -> Result<Vec<String>> {
    let breadth = spec.reference_breadth.get(team);
    let per = spec.refs_per_venue;
    let prior: usize = by_venue.iter().map(Vec::len).sum();
    if prior < breadth * per {
        return Err(CoreError::Infeasible(format!(
            "{} references requested but only {prior} earlier papers exist",
            breadth * per
        )));
    }
    let eligible: Vec<usize> = (0..by_venue.len())
        .filter(|&v| by_venue[v].len() >= per)
        .collect();
    if eligible.len() < breadth {
        return Err(CoreError::Infeasible(format!(
            "{breadth} venues with {per} earlier papers each requested, only {} available",
            eligible.len()
        )));
    }
    let field = spec.venues[home].1;
    let venue_weight = |i: usize| {
        if spec.venues[eligible[i]].1 == field {
            spec.locality
        } else {
            1.0
        }
    };
    let mut chosen: Vec<usize> = index::sample_weighted(rng, eligible.len(), venue_weight, breadth)
        .map_err(|e| CoreError::Infeasible(e.to_string()))?
        .into_vec();
    chosen.sort_unstable();
    let mut refs = Vec::with_capacity(breadth * per);
    for i in chosen {
        let cands = &by_venue[eligible[i]];
        let mut picked = index::sample_weighted(rng, cands.len(), |j| cands[j].1, per)
            .map_err(|e| CoreError::Infeasible(e.to_string()))?
            .into_vec();
        picked.sort_unstable();
        refs.extend(
            picked
                .into_iter()
                .map(|j| records[cands[j].0].paper_id.clone()),
        );
    }
    Ok(refs)
}

/// Ground-truth team counts.
pub fn label_counts(labels: &[(String, TeamType)]) -> BTreeMap<TeamType, usize> {
    let mut m = BTreeMap::new();
    for (_, t) in labels {
        *m.entry(*t).or_insert(0) += 1;
    }
    m
}
