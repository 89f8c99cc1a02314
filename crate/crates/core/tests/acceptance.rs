//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_force_cd, random_dag, random_labelled, replay_null, small_spec, swap_labels};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use teamcite_core::classify::TeamType;
use teamcite_core::config::RunConfig;
use teamcite_core::corpus::{Authorship, Corpus, PaperRecord};
use teamcite_core::disruption::{cd_index, Horizon};
use teamcite_core::ecc::{excess_self_citation, EccEstimator};
use teamcite_core::graph::CitationGraph;
use teamcite_core::impact::top_decile_flags;
use teamcite_core::novelty::{novelty_scores, null_model_zscores, PairZTable};
use teamcite_core::pipeline::{run, Target};
use teamcite_core::synth::generate;
use teamcite_stats::{
    exact_binomial_test, fit_lmm, gmm_fit, piecewise_fit, FixedColumn, GmmOptions, LmmFit,
    LmmOptions, MixedModelData, RandomFactor, INTERCEPT,
};

type Outcome = Result<(), String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit: f64) -> Outcome {
    check(elapsed.as_secs_f64() < limit, || {
        format!("took {:.2} s, limit {limit} s", elapsed.as_secs_f64())
    })
}

fn binomial() -> Outcome {
    let t = Instant::now();
    let p = exact_binomial_test(2, 27, 0.5).map_err(|e| e.to_string())?;
    let exact = 758.0 / 2f64.powi(27);
    check(((p - exact) / exact).abs() <= 1e-12, || {
        format!("p = {p:e}, expected {exact:e}")
    })?;
    within_time(t.elapsed(), 1.0)
}

fn cd_oracle() -> Outcome {
    let t = Instant::now();
    for seed in 0..1000 {
        let corpus = random_dag(10_000 + seed, 30);
        let (g, _) = CitationGraph::build(&corpus);
        for n in g.nodes() {
            let got = cd_index(&g, n, Horizon::All);
            let (want, cd) = brute_force_cd(&corpus, g.id(n));
            check(
                (got.n_i, got.n_j, got.n_k) == (want.n_i, want.n_j, want.n_k) && got.cd == cd,
                || {
                    format!(
                        "DAG {seed}, paper {}: {got:?} vs {want:?} / {cd:?}",
                        g.id(n)
                    )
                },
            )?;
        }
    }
    within_time(t.elapsed(), 10.0)
}

fn ecc() -> Outcome {
    let p = |id: &str, refs: &[&str]| PaperRecord {
        paper_id: id.into(),
        year: if refs.is_empty() { 2010 } else { 2012 },
        venue: "ACL".into(),
        authors: vec![Authorship {
            id: id.into(),
            affiliations: vec![],
        }],
        references: refs.iter().map(|s| s.to_string()).collect(),
    };
    let corpus = Corpus::from_records([
        p("I1", &[]),
        p("I2", &[]),
        p("A1", &[]),
        p("A2", &[]),
        p("ci", &["I1", "I2"]),
        p("ca", &["I1", "A1"]),
    ])
    .map_err(|e| e.to_string())?;
    let (g, _) = CitationGraph::build(&corpus);
    use TeamType::*;
    let teams = [
        IndustryOnly,
        IndustryOnly,
        AcademicOnly,
        AcademicOnly,
        IndustryOnly,
        AcademicOnly,
    ];
    let r = excess_self_citation(&g, &teams, 2012, EccEstimator::PooledEdges)
        .map_err(|e| e.to_string())?;
    let (ei, ea) = (
        r.ecc_industry.unwrap_or(f64::NAN),
        r.ecc_academic.unwrap_or(f64::NAN),
    );
    check(
        (ei - 0.5).abs() <= 1e-12 && (ea - 0.5).abs() <= 1e-12,
        || format!("ECC(I) = {ei}, ECC(A) = {ea}"),
    )?;

    for seed in 0..100 {
        let (corpus, teams) = random_labelled(50_000 + seed);
        let (g, _) = CitationGraph::build(&corpus);
        let swapped = swap_labels(&teams);
        for year in 2010..2014 {
            let a = excess_self_citation(&g, &teams, year, EccEstimator::PooledEdges).ok();
            let b = excess_self_citation(&g, &swapped, year, EccEstimator::PooledEdges).ok();
            let same = |x: Option<f64>, y: Option<f64>| match (x, y) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
                (None, None) => true,
                _ => false,
            };
            let ok = match (&a, &b) {
                (Some(a), Some(b)) => {
                    same(a.ecc_industry, b.ecc_academic) && same(a.ecc_academic, b.ecc_industry)
                }
                (None, None) => true,
                _ => false,
            };
            check(ok, || format!("corpus {seed}, year {year}: {a:?} vs {b:?}"))?;
        }
    }
    Ok(())
}

fn novelty() -> Outcome {
    let corpus = Corpus::from_records(generate(&small_spec(3)).map_err(|e| e.to_string())?.records)
        .map_err(|e| e.to_string())?;
    check(corpus.len() <= 50, || format!("{} papers", corpus.len()))?;
    let (g, _) = CitationGraph::build(&corpus);
    let years: Vec<i32> = (2000..=2004).collect();
    let seed = 20240;
    let build = |workers: usize| -> BTreeMap<i32, PairZTable> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        pool.install(|| {
            years
                .iter()
                .map(|&y| (y, null_model_zscores(&g, y, 10, seed).unwrap()))
                .collect()
        })
    };
    let one = build(1);
    let eight = build(8);
    let bits = |t: &BTreeMap<i32, PairZTable>| -> Vec<(u64, u64, u64, Option<u64>)> {
        t.values()
            .flat_map(|t| t.pairs.values())
            .map(|s| {
                (
                    s.observed,
                    s.null_mean.to_bits(),
                    s.null_sd.to_bits(),
                    s.z.map(f64::to_bits),
                )
            })
            .collect()
    };
    check(one == eight && bits(&one) == bits(&eight), || {
        "1- and 8-worker tables differ".into()
    })?;
    check(
        one.values()
            .any(|t| t.pairs.values().any(|s| s.z.is_some())),
        || "no defined z".into(),
    )?;

    for (year, table) in &one {
        let replay = replay_null(&corpus, *year, 10, seed);
        check(replay.len() == table.pairs.len(), || {
            format!("{year}: pair sets differ")
        })?;
        for (pair, s) in &table.pairs {
            let r = replay
                .get(&(pair.first().to_string(), pair.second().to_string()))
                .ok_or_else(|| format!("{year}: {pair:?} missing from replay"))?;
            let z_ok = match s.z {
                Some(z) => {
                    r.sd > 0.0
                        && (z - (r.observed as f64 - r.mean) / r.sd).abs() <= 1e-9 * (1.0 + z.abs())
                }
                None => r.sd == 0.0,
            };
            check(
                s.observed == r.observed
                    && s.null_mean == r.mean
                    && (s.null_sd - r.sd).abs() <= 1e-12
                    && z_ok,
                || format!("{year}: {pair:?} differs from replay"),
            )?;
        }
    }
    for tables in [&one, &eight] {
        for n in g.nodes() {
            let rec = novelty_scores(&g, n, &tables[&g.year(n)]);
            if let (Some(a), Some(c)) = (rec.atypicality, rec.conventionality) {
                check(a <= c, || {
                    format!("{}: atypicality {a} > conventionality {c}", rec.paper_id)
                })?;
            }
        }
    }
    Ok(())
}

/// Level effects centred and scaled so their mean square is exactly `variance`.
fn planted_levels(rng: &mut ChaCha8Rng, levels: usize, variance: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..levels)
        .map(|_| Normal::new(0.0, 1.0).unwrap().sample(rng))
        .collect();
    let mean = raw.iter().sum::<f64>() / levels as f64;
    let ms = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / levels as f64;
    raw.iter()
        .map(|v| (v - mean) * (variance / ms).sqrt())
        .collect()
}

fn lmm() -> Outcome {
    let t = Instant::now();
    let n = 5000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let team_effect = planted_levels(&mut rng, 30, 4.0);
    let field_effect = planted_levels(&mut rng, 20, 1.0);
    let (b0, b1, b2) = (2.0, 1.5, -0.75);
    let team: Vec<usize> = (0..n).map(|i| i % 30).collect();
    let mut field: Vec<usize> = (0..n).map(|i| i % 20).collect();
    field.shuffle(&mut rng);
    let x1: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    let x2: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            b0 + b1 * x1[i]
                + b2 * x2[i]
                + team_effect[team[i]]
                + field_effect[field[i]]
                + noise.sample(&mut rng)
        })
        .collect();
    let team_levels: Vec<String> = team.iter().map(|t| format!("t{t}")).collect();
    let field_levels: Vec<String> = field.iter().map(|f| format!("f{f}")).collect();

    let column = |name: &str, v: &[f64]| FixedColumn {
        name: name.into(),
        values: v.to_vec(),
    };
    let factor = |name: &str, v: &[String]| RandomFactor {
        name: name.into(),
        levels: v.to_vec(),
    };
    let ladder = [
        (vec![], vec![factor("team", &team_levels)]),
        (vec![column("x1", &x1)], vec![factor("team", &team_levels)]),
        (
            vec![column("x1", &x1), column("x2", &x2)],
            vec![factor("team", &team_levels)],
        ),
        (
            vec![column("x1", &x1), column("x2", &x2)],
            vec![factor("team", &team_levels), factor("field", &field_levels)],
        ),
    ];
    let mut fits: Vec<LmmFit> = Vec::new();
    for (fixed, factors) in ladder {
        let start = fits.last().map(|f| {
            let mut s = f.theta.clone();
            s.resize(factors.len(), 0.0);
            s
        });
        let data = MixedModelData {
            response: y.clone(),
            fixed,
            factors,
        };
        let opts = LmmOptions {
            start_theta: start,
            ..LmmOptions::default()
        };
        fits.push(fit_lmm(&data, &opts).map_err(|e| e.to_string())?);
    }
    let full = fits.last().unwrap();
    let rel = |est: f64, truth: f64| ((est - truth) / truth).abs();
    let vt = full.variance_of("team").unwrap();
    let vf = full.variance_of("field").unwrap();
    let vr = full.residual_variance;
    check(
        rel(vt, 4.0) <= 0.2 && rel(vf, 1.0) <= 0.2 && rel(vr, 1.0) <= 0.2,
        || format!("variances team {vt:.3}, field {vf:.3}, residual {vr:.3}"),
    )?;
    for (name, truth) in [(INTERCEPT, b0), ("x1", b1), ("x2", b2)] {
        let est = full.fixed_effect(name).unwrap().estimate;
        check((est - truth).abs() <= 0.05, || {
            format!("{name}: {est:.4} vs {truth}")
        })?;
    }
    let ll: Vec<f64> = fits.iter().map(|f| f.log_likelihood).collect();
    check(ll.windows(2).all(|w| w[1] >= w[0]), || {
        format!("log-likelihoods {ll:?}")
    })?;
    within_time(t.elapsed(), 30.0)
}

fn gmm() -> Outcome {
    let mut successes = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spread = Normal::new(0.0, 2.0).unwrap();
        let points: Vec<Vec<f64>> = (0..10_000)
            .map(|i| {
                let (cx, cy) = if i % 2 == 0 { (3.0, 3.0) } else { (23.0, 19.0) };
                vec![cx + spread.sample(&mut rng), cy + spread.sample(&mut rng)]
            })
            .collect();
        let fit = gmm_fit(
            &points,
            &GmmOptions {
                seed,
                ..GmmOptions::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let trace = &fit.loglik_trace;
        check(
            trace.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()),
            || format!("seed {seed}: loglik trace decreases"),
        )?;
        let m = |k: usize| &fit.components[k].mean;
        let ok = (m(0)[0] - 3.0).abs() <= 0.5
            && (m(0)[1] - 3.0).abs() <= 0.5
            && (m(1)[0] - 23.0).abs() <= 0.5
            && (m(1)[1] - 19.0).abs() <= 0.5;
        successes += usize::from(ok);
    }
    check(successes >= 19, || {
        format!("{successes}/20 seeds recovered both means")
    })
}

fn piecewise() -> Outcome {
    let kink = |x: f64, at: f64, left: f64, right: f64| {
        6.0 + left * (x - 2005.0) + (right - left) * (x - at).max(0.0)
    };
    let xs: Vec<f64> = (2005..=2022).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| kink(x, 2013.0, 0.1, 0.6)).collect();
    let f = piecewise_fit(&xs, &ys).map_err(|e| e.to_string())?;
    check(
        f.breakpoint == 2013.0
            && (f.left_slope - 0.1).abs() <= 1e-9
            && (f.right_slope - 0.6).abs() <= 1e-9,
        || format!("noiseless fit {f:?}"),
    )?;

    let xs: Vec<f64> = (0..60).map(|i| f64::from(2005 + i / 3)).collect();
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.2).unwrap();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| kink(x, 2014.0, 0.05, 0.45) + noise.sample(&mut rng))
            .collect();
        let f = piecewise_fit(&xs, &ys).map_err(|e| e.to_string())?;
        hits += usize::from((f.breakpoint - 2014.0).abs() <= 1.0);
    }
    check(hits >= 95, || {
        format!("{hits}/100 breakpoints within a year")
    })
}

fn end_to_end() -> Outcome {
    let t = Instant::now();
    let data = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"));
    let mut cfg = RunConfig::from_file(&data.join("synth.conf")).map_err(|e| e.to_string())?;
    let mut regenerated = Vec::new();
    generate(&cfg.synth)
        .and_then(|g| g.write_corpus(&mut regenerated))
        .map_err(|e| e.to_string())?;
    let bundled = std::fs::read(data.join("synth_corpus.jsonl")).map_err(|e| e.to_string())?;
    check(regenerated == bundled, || {
        "bundled corpus differs from its generator spec".into()
    })?;

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    cfg.out_dir = out.path().to_path_buf();
    run(&cfg, Target::All).map_err(|e| e.to_string())?;

    let mut rdr =
        csv::Reader::from_path(out.path().join("metrics.csv")).map_err(|e| e.to_string())?;
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (team, c5, top, aty) = (
        col("team_type"),
        col("c5"),
        col("top_decile"),
        col("atypicality"),
    );
    let mut sums: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        for k in [c5, top, aty] {
            if let Ok(v) = rec[k].parse::<f64>() {
                let e = sums.entry((rec[team].to_string(), k)).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
    }
    let mean = |t: &str, k: usize| {
        sums.get(&(t.to_string(), k))
            .map(|(s, n)| s / *n as f64)
            .unwrap_or(f64::NAN)
    };
    let (ic5, ac5) = (mean("industry", c5), mean("academic", c5));
    let (iaty, aaty) = (mean("industry", aty), mean("academic", aty));
    let (itop, atop) = (mean("industry", top), mean("academic", top));
    check(ic5 > ac5, || {
        format!("mean C5 industry {ic5:.3} vs academic {ac5:.3}")
    })?;
    check(aaty < iaty, || {
        format!("mean atypicality academic {aaty:.3} vs industry {iaty:.3}")
    })?;
    check(itop > atop, || {
        format!("top-decile rate industry {itop:.3} vs academic {atop:.3}")
    })?;
    within_time(t.elapsed(), 60.0)
}

fn top_decile() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1000usize, 1001, 1009, 4321, 10_000] {
        let mut counts: Vec<u32> = (0..n as u32).map(|c| c * 3 + 1).collect();
        counts.shuffle(&mut rng);
        let k = top_decile_flags(&counts).iter().filter(|&&f| f).count();
        let frac = k as f64 / n as f64;
        check((0.10..=0.10 + 1.0 / n as f64).contains(&frac), || {
            format!("n = {n}: fraction {frac}")
        })?;
    }
    let tied = vec![7u32; 1000];
    check(top_decile_flags(&tied).iter().all(|&f| f), || {
        "all-tied cohort not fully flagged".into()
    })?;
    let mut near = vec![1u32; 18];
    near.extend([9, 9]);
    near[0] = 9;
    let flags = top_decile_flags(&near);
    check(
        flags.iter().filter(|&&f| f).count() == 3 && flags[0] && flags[18] && flags[19],
        || format!("tie at the cutoff: {flags:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact binomial test k=2 n=27 matches 758/2^27", binomial),
        (
            "CD index equals brute-force enumeration on 1000 random DAGs",
            cd_oracle,
        ),
        ("ECC hand example and label-swap antisymmetry", ecc),
        (
            "novelty z-tables worker-invariant and equal to replay",
            novelty,
        ),
        ("mixed-model variance and fixed-effect recovery", lmm),
        ("two-component mixture recovery across 20 seeds", gmm),
        ("piecewise breakpoint recovery", piecewise),
        ("planted team effects reproduced end to end", end_to_end),
        ("top-decile flag fraction and tie rule", top_decile),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS  {}  {name}  ({secs:.2} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}  {name}  ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
