use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use teamcite_core::config::{RunConfig, KEYS, WORKERS_ENV};
use teamcite_core::pipeline::{run, write_synthetic, Target};
use teamcite_core::CoreError;

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("ingest", "parse the corpus and report data problems"),
    ("classify", "label every paper's team type"),
    (
        "impact",
        "C5 citations, top-decile flags and team seniority",
    ),
    ("disruption", "CD index per paper"),
    ("novelty", "atypicality and conventionality per paper"),
    ("ecc", "excess self-citation per year"),
    ("lmm", "mixed-model ladders"),
    ("gmm", "seniority clusters per team type"),
    ("sota", "model registry summaries and parameter-growth fits"),
    ("synth", "generate a synthetic corpus and registry"),
    (
        "report",
        "metric table with team, subfield, subtype and strata summaries",
    ),
    ("run-all", "every stage"),
];

fn cli() -> Command {
    let mut cmd = Command::new("teamcite")
        .about("Citation-graph analytics for academic, industry and mixed research teams")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .after_help(format!(
            "Settings apply in order: config file, {WORKERS_ENV}, flags.\n\
             Exit codes: 0 success, 1 usage or config, 2 data, 3 computation."
        ))
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_name("FILE")
                .global(true)
                .help("key = value configuration file"),
        )
        .arg(
            Arg::new("labels")
                .long("labels")
                .value_name("FILE")
                .global(true)
                .help("synth: ground-truth label file (default: next to the corpus)"),
        );
    for (key, help) in KEYS {
        let mut arg = Arg::new(*key)
            .long(*key)
            .value_name("VALUE")
            .global(true)
            .action(ArgAction::Set)
            .help(*help);
        if key.contains('_') {
            let hyphenated: &'static str = key.replace('_', "-").leak();
            arg = arg.alias(hyphenated);
        }
        cmd = cmd.arg(arg);
    }
    for (name, about) in SUBCOMMANDS {
        cmd = cmd.subcommand(Command::new(*name).about(*about));
    }
    cmd
}

fn target(name: &str) -> Option<Target> {
    Some(match name {
        "ingest" => Target::Ingest,
        "classify" => Target::Classify,
        "impact" => Target::Impact,
        "disruption" => Target::Disruption,
        "novelty" => Target::Novelty,
        "ecc" => Target::Ecc,
        "lmm" => Target::Lmm,
        "gmm" => Target::Gmm,
        "sota" => Target::Sota,
        "report" => Target::Report,
        "run-all" => Target::All,
        _ => return None,
    })
}

/// File, then environment, then flags.
fn config(m: &ArgMatches) -> Result<RunConfig, CoreError> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => RunConfig::from_file(&PathBuf::from(p))?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    for (key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let cfg = match config(sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("teamcite: {e}");
            return ExitCode::from(1);
        }
    };

    if name == "synth" {
        let labels = sub
            .get_one::<String>("labels")
            .map(PathBuf::from)
            .unwrap_or_else(|| cfg.corpus.with_extension("labels.csv"));
        return match write_synthetic(&cfg, &labels) {
            Ok(s) => {
                println!(
                    "wrote {} papers with {} references to {}",
                    s.papers,
                    s.references,
                    cfg.corpus.display()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("teamcite: synth: {e}");
                ExitCode::from(match e {
                    CoreError::Config(_) => 1,
                    CoreError::Io { .. } => 2,
                    _ => 3,
                })
            }
        };
    }

    let target = target(name).expect("every subcommand is mapped");
    match run(&cfg, target) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &summary.files {
                println!("{}", cfg.out_dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("teamcite: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
