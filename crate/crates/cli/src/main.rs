// Copyright 2026 The behaviorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `behaviorlab`: convert raw extracts to behavior files, mine them, and
//! generate synthetic inputs.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use behaviorlab_core::combined::{self, PatternCluster, PatternPair};
use behaviorlab_core::config::RunConfig;
use behaviorlab_core::ingest::{self, ConversionSummary};
use behaviorlab_core::io::{read_sequences, write_jsonl};
use behaviorlab_core::model::{BehaviorSequence, ItemKind};
use behaviorlab_core::synth::{self, Profile, SynthParams};
use behaviorlab_core::{impact, microstructure, oracle, seqmine, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "behaviorlab", version, about = "Behavior sequence conversion and pattern mining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw CSV extract into a behavior file (JSON lines).
    Convert(ConvertArgs),
    /// Mine a behavior file and write a JSON-lines report.
    Mine(MineArgs),
    /// Write a seeded synthetic dataset and its ground truth.
    Generate(GenerateArgs),
    /// Enumerate every pattern of a small behavior file exhaustively.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Orderbook,
    Activity,
    Demographic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exceptional,
    Impact,
    Contrast,
    Reversal,
    Combined,
}

#[derive(Args)]
struct Common {
    /// Flat TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    input: PathBuf,
    /// Debt records used to label activity and demographic data.
    #[arg(long)]
    debts: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Behavior file(s). Contrast takes a target and a non-target file (or
    /// one labeled file); combined takes a demographic and an activity file.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    benchmark_days: Option<usize>,
    #[arg(long)]
    min_ii: Option<f64>,
    /// Minimum exceptional interestingness.
    #[arg(long)]
    min_ie: Option<f64>,
    #[arg(long)]
    min_supp: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    cir_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    cps_min: Option<f64>,
    /// Also write alert rules (exceptional mode).
    #[arg(long)]
    rules: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GenerateArgs {
    /// uniform, planted-exception, planted-reversal or debt-cohort.
    #[arg(long)]
    profile: String,
    /// Required here or as `seed` in --config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    accounts: Option<usize>,
    #[arg(long)]
    persons: Option<usize>,
    #[arg(long)]
    bench_rate: Option<f64>,
    #[arg(long)]
    rate_ratio: Option<f64>,
    #[arg(long)]
    prevalence: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    min_supp: Option<f64>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    contiguous: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Header { .. } | Error::InvalidInput(_) | Error::DuplicateIds(_) => 2,
        Error::Io { .. } => 2,
        Error::Schema(_) | Error::KindMismatch { .. } | Error::Json(_) | Error::OrphanIds(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(args) => {
            let cfg = load_config(args.common.config.as_deref(), RunConfig::default())?;
            with_workers(args.common.workers.or(cfg.workers), || convert(&args, &cfg))
        }
        Command::Mine(args) => {
            let flags = RunConfig {
                benchmark_days: args.benchmark_days,
                min_ii: args.min_ii,
                min_ie: args.min_ie,
                min_support: args.min_supp,
                cir_min: args.cir_min,
                cps_min: args.cps_min,
                ..Default::default()
            };
            let cfg = load_config(args.common.config.as_deref(), flags)?;
            with_workers(args.common.workers.or(cfg.workers), || mine(&args, &cfg))
        }
        Command::Generate(args) => generate(&args),
        Command::Oracle(args) => run_oracle(&args),
    }
}

fn load_config(path: Option<&Path>, flags: RunConfig) -> Result<RunConfig> {
    let base = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(flags);
    cfg.validate()?;
    Ok(cfg)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(Error::Config("workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f),
    }
}

/// Writes records to `out` (or stdout) and prints `summary` on stdout, or on
/// stderr when the records went to stdout.
fn emit<T: Serialize>(out: Option<&Path>, records: &[T], summary: &str) -> Result<()> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            write_jsonl(f, records)?;
            println!("{summary}");
        }
        None => {
            write_jsonl(io::stdout().lock(), records)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn convert(args: &ConvertArgs, cfg: &RunConfig) -> Result<()> {
    let conv = cfg.conversion()?;
    let debts = match &args.debts {
        Some(p) => ingest::parse_debts(p, &conv)?,
        None => Vec::new(),
    };
    let (seqs, summary) = match args.kind {
        Kind::Orderbook => {
            let orders = ingest::parse_orderbook(&args.input, &conv)?;
            ingest::build_microstructure_sequences(&orders, &conv)?
        }
        Kind::Activity => {
            let acts = ingest::parse_activities(&args.input, &conv)?;
            ingest::build_activity_sequences(&acts, &debts, &conv)?
        }
        Kind::Demographic => {
            let demo = ingest::parse_demographics(&args.input)?;
            ingest::build_demographic_vectors(&demo, &debts, &conv)?
        }
    };
    emit(args.common.out.as_deref().or(cfg.out.as_deref()), &seqs, &summary_line(&summary))
}

fn summary_line(s: &ConversionSummary) -> String {
    format!(
        "convert kind={} records={} sequences={} dropped_empty={} out_of_window={} target={} non_target={}",
        s.kind, s.records, s.sequences, s.dropped_empty, s.out_of_window, s.target, s.non_target
    )
}

fn read_all(paths: &[PathBuf], kind: Option<ItemKind>) -> Result<Vec<Vec<BehaviorSequence>>> {
    paths.iter().map(|p| read_sequences(p, kind)).collect()
}

fn single(args: &MineArgs, kind: ItemKind) -> Result<Vec<BehaviorSequence>> {
    match &args.input[..] {
        [p] => read_sequences(p, Some(kind)),
        _ => Err(Error::Config("this mode takes exactly one --input".into())),
    }
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum CombinedRecord<'a> {
    Pattern(&'a combined::CombinedPattern),
    Pair(&'a PatternPair),
    Cluster(&'a PatternCluster),
}

fn mine(args: &MineArgs, cfg: &RunConfig) -> Result<()> {
    let out = args.common.out.as_deref().or(cfg.out.as_deref());
    match args.mode {
        Mode::Exceptional => {
            let data = single(args, ItemKind::Microstructure)?;
            let ecfg = cfg.exceptional()?;
            let report = if data.is_empty() {
                microstructure::ExceptionalReport::default()
            } else {
                microstructure::mine_exceptional(&data, &ecfg)?
            };
            for w in &report.warnings {
                eprintln!("warning: {}: {}", w.date, w.message);
            }
            if let Some(path) = &args.rules {
                let rules = microstructure::to_alert_rules(&report.patterns, &ecfg.tiers);
                let f = File::create(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                write_jsonl(f, &rules)?;
            }
            let summary = format!(
                "mine mode=exceptional patterns={} skipped_days={}",
                report.patterns.len(),
                report.warnings.len()
            );
            emit(out, &report.patterns, &summary)
        }
        Mode::Impact => {
            let data = single(args, ItemKind::Activity)?;
            let recs = if data.is_empty() {
                Vec::new()
            } else {
                impact::mine_impact(&data, &cfg.mining()?)?
            };
            emit(out, &recs, &format!("mine mode=impact rules={}", recs.len()))
        }
        Mode::Contrast => {
            let sets = read_all(&args.input, Some(ItemKind::Activity))?;
            let (a, b) = match sets.len() {
                1 => impact::split_by_label(&sets[0]),
                2 => (sets[0].clone(), sets[1].clone()),
                _ => return Err(Error::Config("contrast takes one or two --input files".into())),
            };
            let report = if a.is_empty() || b.is_empty() {
                impact::ContrastReport {
                    warnings: vec!["one side of the contrast is empty".into()],
                    ..Default::default()
                }
            } else {
                impact::mine_contrast(&a, &b, &cfg.mining()?)?
            };
            warn(&report.warnings);
            emit(out, &report.patterns, &format!("mine mode=contrast patterns={}", report.patterns.len()))
        }
        Mode::Reversal => {
            let data = single(args, ItemKind::Activity)?;
            let report = impact::mine_reversals(&data, &cfg.mining()?, cfg.cir_min(), cfg.cps_min())?;
            warn(&report.warnings);
            emit(out, &report.pairs, &format!("mine mode=reversal pairs={}", report.pairs.len()))
        }
        Mode::Combined => {
            let sets = read_all(&args.input, None)?;
            let [x, y] = &sets[..] else {
                return Err(Error::Config("combined takes a demographic and an activity --input".into()));
            };
            let is_demo = |s: &[BehaviorSequence]| s.first().is_some_and(|q| q.kind == ItemKind::Demographic);
            let (demo, acts) = if is_demo(y) && !is_demo(x) { (y, x) } else { (x, y) };
            let ccfg = cfg.combined()?;
            let persons = combined::join_persons(demo, acts)?;
            let patterns = if persons.is_empty() {
                Vec::new()
            } else {
                combined::mine_combined(&persons, &ccfg)?
            };
            let pairs = combined::make_pairs(&patterns, &ccfg.distance);
            let clusters = combined::make_clusters(&patterns, &ccfg);
            let records: Vec<CombinedRecord> = patterns
                .iter()
                .map(CombinedRecord::Pattern)
                .chain(pairs.iter().map(CombinedRecord::Pair))
                .chain(clusters.iter().map(CombinedRecord::Cluster))
                .collect();
            let summary = format!(
                "mine mode=combined patterns={} pairs={} clusters={}",
                patterns.len(),
                pairs.len(),
                clusters.len()
            );
            emit(out, &records, &summary)
        }
    }
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let profile: Profile = args.profile.parse()?;
    let cfg = load_config(args.config.as_deref(), RunConfig { seed: args.seed, ..Default::default() })?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Config("generate requires --seed (or `seed` in the config)".into()))?;
    let d = SynthParams::new(seed);
    let params = SynthParams {
        seed,
        days: args.days.unwrap_or(d.days),
        accounts: args.accounts.unwrap_or(d.accounts),
        bench_rate: args.bench_rate.unwrap_or(d.bench_rate),
        rate_ratio: args.rate_ratio.unwrap_or(d.rate_ratio),
        persons: args.persons,
        prevalence: args.prevalence.unwrap_or(d.prevalence),
    };
    let generated = synth::generate(profile, &params)?;
    generated.write_to(&args.out)?;
    println!(
        "generate profile={} seed={} files={} out={}",
        profile.name(),
        seed,
        generated.files.len() + 1,
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct OracleRow<'a> {
    pattern: &'a behaviorlab_core::model::Pattern,
    support: f64,
    count: u64,
}

fn run_oracle(args: &OracleArgs) -> Result<()> {
    let data = read_sequences(&args.input, None)?;
    let max_len = args.max_len.unwrap_or(seqmine::DEFAULT_MAX_PATTERN_LENGTH);
    let e = oracle::enumerate_patterns_with(&data, max_len, args.contiguous)?;
    let min = args.min_supp.unwrap_or(0.0);
    let mut rows: Vec<OracleRow> = e
        .counts
        .iter()
        .filter(|(_, &c)| min == 0.0 || seqmine::meets_support(c, e.total, min))
        .map(|(p, &c)| OracleRow {
            pattern: p,
            support: c as f64 / e.total as f64,
            count: c,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.pattern.cmp(b.pattern)));
    let mut summary = format!("oracle patterns={}", rows.len());
    if let Some(s) = args.min_supp {
        let cfg = seqmine::MiningConfig {
            min_support: s,
            max_pattern_length: max_len,
            contiguous: args.contiguous,
        };
        let mined = seqmine::mine_frequent(&data, &cfg)?;
        let agree = mined.len() == rows.len()
            && mined.iter().zip(&rows).all(|(m, r)| &m.pattern == r.pattern && m.count == r.count);
        summary.push_str(&format!(" miner_agrees={agree}"));
    }
    emit(args.out.as_deref(), &rows, &summary)?;
    io::stdout().flush().map_err(|e| Error::InvalidInput(e.to_string()))
}
