//! Atypicality and conventionality from co-cited venue pairs.
//!
//! Each paper contributes every unordered pair of its cited references'
//! venues. Within one publication year, the observed pair counts are compared
//! against `R` Monte-Carlo shuffles of the citation endpoints: the cited-venue
//! slots of all citing papers in the year are permuted (Fisher–Yates), which
//! keeps every paper's reference count and every venue's citation total
//! fixed. A pair's z-score is `(observed - mean) / sd` over the shuffles.
//!
//! Per paper, atypicality is the nearest-rank 10th percentile of its pair
//! z-scores and conventionality the median. Lower z means a rarer
//! combination.
//!
//! Shuffle `r` of year `y` draws from `ChaCha8Rng` seeded with
//! [`shuffle_seed`]`(seed, y, r)`, so results do not depend on how shuffles
//! are scheduled across threads. Counts are merged as exact integer sums.
//! Slots are laid out citing paper by citing paper in corpus order, and
//! within a paper in corpus order of the cited papers.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::graph::{CitationGraph, NodeId};

/// Unordered venue pair stored in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VenuePair(String, String);

impl VenuePair {
    pub fn new(a: &str, b: &str) -> Self {
        if a <= b {
            VenuePair(a.to_string(), b.to_string())
        } else {
            VenuePair(b.to_string(), a.to_string())
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }
}

/// Every unordered pair over a list of cited venues (one entry per cited
/// reference). Empty venues are dropped first.
pub fn venue_pairs<S: AsRef<str>>(venues: &[S]) -> Vec<VenuePair> {
    let vs: Vec<&str> = venues
        .iter()
        .map(AsRef::as_ref)
        .filter(|v| !v.is_empty())
        .collect();
    let mut out = Vec::with_capacity(vs.len() * vs.len().saturating_sub(1) / 2);
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            out.push(VenuePair::new(vs[i], vs[j]));
        }
    }
    out
}

/// Venues of the references of `node` that are present in the graph and carry
/// a venue, in reference order.
pub fn cited_venues(graph: &CitationGraph, node: NodeId) -> Vec<&str> {
    graph
        .references(node)
        .iter()
        .map(|&r| graph.venue(r))
        .filter(|v| !v.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub observed: u64,
    pub null_mean: f64,
    pub null_sd: f64,
    /// Undefined when the null standard deviation is zero.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairZTable {
    pub year: i32,
    pub shuffles: u32,
    pub seed: u64,
    pub pairs: BTreeMap<VenuePair, PairStats>,
}

impl PairZTable {
    pub fn get(&self, pair: &VenuePair) -> Option<&PairStats> {
        self.pairs.get(pair)
    }

    /// `None` for pairs absent from the table or with undefined z.
    pub fn z(&self, pair: &VenuePair) -> Option<f64> {
        self.pairs.get(pair).and_then(|s| s.z)
    }

    pub fn undefined_count(&self) -> usize {
        self.pairs.values().filter(|s| s.z.is_none()).count()
    }

    /// Cache file name for this table given the corpus hash.
    pub fn cache_key(year: i32, shuffles: u32, seed: u64, corpus_hash: &str) -> String {
        let short = &corpus_hash[..corpus_hash.len().min(16)];
        format!("ztable_{year}_r{shuffles}_s{seed}_{short}.csv")
    }

    /// Writes `venue_a,venue_b,observed,null_mean,null_sd,z` rows preceded by
    /// a `#year,shuffles,seed` line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "#{},{},{}", self.year, self.shuffles, self.seed)
            .map_err(|e| CoreError::io("<ztable>", e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "venue_a",
            "venue_b",
            "observed",
            "null_mean",
            "null_sd",
            "z",
        ])?;
        for (p, s) in &self.pairs {
            w.write_record([
                p.0.clone(),
                p.1.clone(),
                s.observed.to_string(),
                format!("{:?}", s.null_mean),
                format!("{:?}", s.null_sd),
                s.z.map(|z| format!("{z:?}")).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| CoreError::io("<ztable>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input
            .read_to_string(&mut text)
            .map_err(|e| CoreError::io("<ztable>", e))?;
        let (meta, body) = text.split_once('\n').unwrap_or((&text, ""));
        let bad = |m: &str| CoreError::Parse {
            line: 1,
            message: format!("z-table header: {m}"),
        };
        let fields: Vec<&str> = meta
            .strip_prefix('#')
            .ok_or_else(|| bad("missing"))?
            .split(',')
            .collect();
        if fields.len() != 3 {
            return Err(bad("expected year,shuffles,seed"));
        }
        let year = fields[0].parse().map_err(|_| bad("year"))?;
        let shuffles = fields[1].parse().map_err(|_| bad("shuffles"))?;
        let seed = fields[2].parse().map_err(|_| bad("seed"))?;
        let mut pairs = BTreeMap::new();
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 3;
            let num = |k: usize| -> Result<f64> {
                row[k].parse().map_err(|_| CoreError::Parse {
                    line,
                    message: format!("bad number `{}`", &row[k]),
                })
            };
            let observed = row[2].parse().map_err(|_| CoreError::Parse {
                line,
                message: format!("bad count `{}`", &row[2]),
            })?;
            let z = if row[5].is_empty() {
                None
            } else {
                Some(num(5)?)
            };
            pairs.insert(
                VenuePair::new(&row[0], &row[1]),
                PairStats {
                    observed,
                    null_mean: num(3)?,
                    null_sd: num(4)?,
                    z,
                },
            );
        }
        Ok(PairZTable {
            year,
            shuffles,
            seed,
            pairs,
        })
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of shuffle `r` for publication year `year`:
/// `splitmix64(seed ^ splitmix64((year << 32) | r))`.
pub fn shuffle_seed(seed: u64, year: i32, r: u32) -> u64 {
    let tag = ((year as u32 as u64) << 32) | r as u64;
    splitmix64(seed ^ splitmix64(tag))
}

/// In-place Fisher–Yates: for `i` from `len - 1` down to 1, swap `i` with a
/// uniform `j` in `0..=i`.
pub fn fisher_yates<T>(slots: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..slots.len()).rev() {
        let j = rng.random_range(0..=i);
        slots.swap(i, j);
    }
}

/// Cited-venue slots of one year's citing papers, with venues interned in
/// lexicographic order so `(a, b)` with `a <= b` is the canonical pair.
struct YearSlots {
    venues: Vec<String>,
    slots: Vec<u32>,
    offsets: Vec<usize>,
}

impl YearSlots {
    fn collect(graph: &CitationGraph, year: i32) -> Self {
        let citing: Vec<Vec<&str>> = graph
            .nodes()
            .filter(|&n| graph.year(n) == year)
            .map(|n| cited_venues(graph, n))
            .filter(|v| !v.is_empty())
            .collect();
        let mut venues: Vec<String> = citing.iter().flatten().map(|v| v.to_string()).collect();
        venues.sort();
        venues.dedup();
        let mut slots = Vec::new();
        let mut offsets = vec![0];
        for paper in &citing {
            for v in paper {
                slots.push(venues.binary_search_by(|x| x.as_str().cmp(v)).unwrap() as u32);
            }
            offsets.push(slots.len());
        }
        Self {
            venues,
            slots,
            offsets,
        }
    }

    fn pair_counts(&self, slots: &[u32]) -> HashMap<(u32, u32), u64> {
        let mut counts = HashMap::new();
        for w in self.offsets.windows(2) {
            let s = &slots[w[0]..w[1]];
            for i in 0..s.len() {
                for j in i + 1..s.len() {
                    let key = if s[i] <= s[j] {
                        (s[i], s[j])
                    } else {
                        (s[j], s[i])
                    };
                    *counts.entry(key).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    fn venue_totals(&self, slots: &[u32]) -> Vec<u32> {
        let mut t = vec![0; self.venues.len()];
        for &s in slots {
            t[s as usize] += 1;
        }
        t
    }
}

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

/// Builds the pair z-table for one publication year.
pub fn null_model_zscores(
    graph: &CitationGraph,
    year: i32,
    shuffles: u32,
    seed: u64,
) -> Result<PairZTable> {
    if shuffles == 0 {
        return Err(CoreError::Contract(
            "the null model needs at least one shuffle".into(),
        ));
    }
    let data = YearSlots::collect(graph, year);
    let observed = data.pair_counts(&data.slots);

    let merged: HashMap<(u32, u32), Moments> = (0..shuffles)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed(seed, year, r));
            let mut perm = data.slots.clone();
            fisher_yates(&mut perm, &mut rng);
            debug_assert_eq!(data.venue_totals(&perm), data.venue_totals(&data.slots));
            data.pair_counts(&perm)
                .into_iter()
                .map(|(k, c)| {
                    let c = c as u128;
                    (
                        k,
                        Moments {
                            sum: c,
                            sum_sq: c * c,
                        },
                    )
                })
                .collect::<HashMap<_, _>>()
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, m) in b {
                let e = a.entry(k).or_default();
                e.sum += m.sum;
                e.sum_sq += m.sum_sq;
            }
            a
        });

    let r = shuffles as u128;
    let mut keys: Vec<(u32, u32)> = observed.keys().chain(merged.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let pairs = keys
        .into_iter()
        .map(|k| {
            let obs = observed.get(&k).copied().unwrap_or(0);
            let m = merged.get(&k).copied().unwrap_or_default();
            let mean = m.sum as f64 / r as f64;
            // population variance, exact in integers before conversion
            let var = (r * m.sum_sq - m.sum * m.sum) as f64 / (r * r) as f64;
            let sd = var.sqrt();
            let z = (sd > 0.0).then(|| (obs as f64 - mean) / sd);
            (
                VenuePair(
                    data.venues[k.0 as usize].clone(),
                    data.venues[k.1 as usize].clone(),
                ),
                PairStats {
                    observed: obs,
                    null_mean: mean,
                    null_sd: sd,
                    z,
                },
            )
        })
        .collect();
    Ok(PairZTable {
        year,
        shuffles,
        seed,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyRecord {
    pub paper_id: String,
    /// Nearest-rank 10th percentile of the defined pair z-scores.
    pub atypicality: Option<f64>,
    /// Median of the defined pair z-scores.
    pub conventionality: Option<f64>,
    pub n_pairs: usize,
    pub n_undefined_pairs: usize,
}

impl NoveltyRecord {
    /// Larger means more novel.
    pub fn neg_atypicality(&self) -> Option<f64> {
        self.atypicality.map(|a| -a)
    }

    /// The paper's rarest tenth of combinations is below the null expectation.
    pub fn is_atypical(&self) -> Option<bool> {
        self.atypicality.map(|a| a < 0.0)
    }
}

/// Nearest-rank percentile (`0 < pct <= 100`) of a sorted slice.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    let rank = ((pct / 100.0) * n as f64).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Summarizes a paper's z multiset; `None` entries are undefined pairs.
pub fn novelty_from_z(paper_id: &str, zs: &[Option<f64>]) -> NoveltyRecord {
    let mut defined: Vec<f64> = zs.iter().flatten().copied().collect();
    defined.sort_by(f64::total_cmp);
    let (atypicality, conventionality) = if defined.is_empty() {
        (None, None)
    } else {
        // ceil(n / 10) in integers avoids 0.1 * n rounding up past an integer
        let rank = defined.len().div_ceil(10);
        (Some(defined[rank - 1]), Some(median(&defined)))
    };
    NoveltyRecord {
        paper_id: paper_id.to_string(),
        atypicality,
        conventionality,
        n_pairs: zs.len(),
        n_undefined_pairs: zs.len() - defined.len(),
    }
}

pub fn novelty_scores(graph: &CitationGraph, node: NodeId, table: &PairZTable) -> NoveltyRecord {
    let zs: Vec<Option<f64>> = venue_pairs(&cited_venues(graph, node))
        .iter()
        .map(|p| table.z(p))
        .collect();
    novelty_from_z(graph.id(node), &zs)
}
