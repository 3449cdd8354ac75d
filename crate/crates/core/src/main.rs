use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stairbin::closeness::TestDistance;
use stairbin::harness::{
    export_empirical_pmf, generate_dataset, read_sample_set, run_granularity_eval,
    run_ranking_validation, ExperimentConfig, RandomBaseline,
};
use stairbin::synthetic::{perturb, PerturbMode, PerturbSpec};

/// Binned identity testing of generative models against a stair reference.
#[derive(Parser)]
#[command(name = "stairbin", version)]
struct Cli {
    /// TOML experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    c: Option<u32>,
    /// Number of flat regions.
    #[arg(long, global = true)]
    s: Option<usize>,
    #[arg(long, global = true)]
    support_ratio: Option<f64>,
    /// Masses of the s−1 positive regions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    mass_profile: Option<Vec<f64>>,
    /// Samples per model per trial.
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    k_min: Option<usize>,
    #[arg(long, global = true)]
    k_max: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    bootstrap_reps: Option<usize>,
    #[arg(long, global = true, value_parser = parse_distance)]
    distance: Option<TestDistance>,
    #[arg(long, global = true)]
    bonferroni: bool,
    #[arg(long, global = true)]
    split_samples: bool,
    /// Target TVs of the synthetic suite, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    targets: Option<Vec<f64>>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<PerturbMode>,
    #[arg(long, global = true, value_parser = parse_baseline)]
    random_baseline: Option<RandomBaseline>,
    #[arg(long, global = true)]
    ci_level: Option<f64>,
    #[arg(long, global = true)]
    ci_resamples: Option<usize>,
    /// Model sample files; replaces the synthetic suite.
    #[arg(long = "samples", global = true)]
    samples: Vec<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a sample file drawn from the reference or a perturbation of it.
    Generate {
        #[arg(long)]
        output: PathBuf,
        /// Draw from a perturbation at this TV instead of the reference.
        #[arg(long)]
        target_tv: Option<f64>,
    },
    /// Granularity test of sample-file models.
    Evaluate,
    /// Granularity and empirical TV of every model, ranked.
    Rank,
    /// Kendall tau of optimized versus random binnings on the synthetic suite.
    ValidateBinning,
    /// Per-element empirical pmf against the reference, as CSV.
    ExportPmf {
        /// Output CSV; defaults to <out-dir>/empirical_pmf.csv.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

fn parse_distance(s: &str) -> Result<TestDistance, String> {
    parse_enum(s)
}

fn parse_mode(s: &str) -> Result<PerturbMode, String> {
    parse_enum(s)
}

fn parse_baseline(s: &str) -> Result<RandomBaseline, String> {
    parse_enum(s)
}

fn apply(cfg: &mut ExperimentConfig, o: Overrides) {
    macro_rules! set {
        ($field:expr, $value:expr) => {
            if let Some(v) = $value {
                $field = v;
            }
        };
    }
    set!(cfg.stair.n, o.n);
    set!(cfg.stair.c, o.c);
    set!(cfg.stair.s, o.s);
    if o.support_ratio.is_some() {
        cfg.stair.support_ratio = o.support_ratio;
    }
    if o.mass_profile.is_some() {
        cfg.stair.mass_profile = o.mass_profile;
    }
    set!(cfg.m, o.m);
    set!(cfg.trials, o.trials);
    set!(cfg.seed, o.seed);
    if o.k_min.is_some() {
        cfg.k_min = o.k_min;
    }
    if o.k_max.is_some() {
        cfg.k_max = o.k_max;
    }
    set!(cfg.test.epsilon_test, o.epsilon);
    set!(cfg.test.delta, o.delta);
    set!(cfg.test.bootstrap_reps, o.bootstrap_reps);
    set!(cfg.test.distance, o.distance);
    cfg.test.bonferroni |= o.bonferroni;
    cfg.test.split_samples |= o.split_samples;
    set!(cfg.suite.targets, o.targets);
    set!(cfg.suite.mode, o.mode);
    set!(cfg.random_baseline, o.random_baseline);
    set!(cfg.ci_level, o.ci_level);
    set!(cfg.ci_resamples, o.ci_resamples);
    if !o.samples.is_empty() {
        cfg.sample_files = o.samples;
    }
    set!(cfg.out_dir, o.out_dir);
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Serialize)]
struct GenerateReport<'a> {
    config: &'a ExperimentConfig,
    output: &'a Path,
    target_tv: Option<f64>,
    exact_tv: f64,
    m: usize,
}

#[derive(Serialize)]
struct ExportReport<'a> {
    config: &'a ExperimentConfig,
    samples: &'a Path,
    output: &'a Path,
    d_tv: f64,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply(&mut cfg, cli.overrides);
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let out = cfg.out_dir.clone();

    match cli.command {
        Command::Generate { output, target_tv } => {
            let p = cfg.stair.build()?;
            let seed = cfg.seed;
            let exact_tv = match target_tv {
                Some(t) => {
                    let spec = PerturbSpec { target_tv: t, mode: cfg.suite.mode, ..PerturbSpec::default() };
                    let q = perturb(&p, &spec)?;
                    generate_dataset(&q, cfg.m, seed, &output)?;
                    q.exact_tv()
                }
                None => {
                    generate_dataset(&p, cfg.m, seed, &output)?;
                    0.0
                }
            };
            let report = GenerateReport {
                config: &cfg.resolved(),
                output: &output,
                target_tv,
                exact_tv,
                m: cfg.m,
            };
            let path = write_json(&out, "generate.json", &report)?;
            println!("wrote {} samples to {} ({})", cfg.m, output.display(), path.display());
        }
        Command::Evaluate => {
            if cfg.sample_files.is_empty() {
                bail!("evaluate needs at least one --samples file");
            }
            let report = run_granularity_eval(&cfg)?;
            let path = write_json(&out, "evaluate.json", &report)?;
            for m in &report.models {
                println!(
                    "{}: mean highest k {:.2}, passed all {:.0}%",
                    m.label,
                    m.mean_highest_passed,
                    100.0 * m.pass_all_fraction
                );
            }
            println!("report: {}", path.display());
        }
        Command::Rank => {
            let report = run_granularity_eval(&cfg)?;
            let path = write_json(&out, "rank.json", &report)?;
            write_text(&out, "rank.csv", &report.summary_csv())?;
            for (i, label) in report.ranking.iter().enumerate() {
                let m = report.model(label).expect("ranked labels come from the report");
                println!(
                    "{}. {label}: mean highest k {:.2}, empirical TV {:.4}",
                    i + 1,
                    m.mean_highest_passed,
                    m.mean_empirical_tv
                );
            }
            println!("report: {}", path.display());
        }
        Command::ValidateBinning => {
            let report = run_ranking_validation(&cfg)?;
            let path = write_json(&out, "ranking_validation.json", &report)?;
            let csv = report.summary_csv();
            write_text(&out, "ranking_summary.csv", &csv)?;
            print!("{csv}");
            println!("report: {}", path.display());
        }
        Command::ExportPmf { output } => {
            let [samples] = cfg.sample_files.as_slice() else {
                bail!("export-pmf needs exactly one --samples file");
            };
            let p = cfg.stair.build()?;
            let set = read_sample_set(samples, p.space())?;
            let output = output.unwrap_or_else(|| out.join("empirical_pmf.csv"));
            let d_tv = export_empirical_pmf(&p, &set, &output)?;
            let report = ExportReport { config: &cfg.resolved(), samples, output: &output, d_tv };
            write_json(&out, "export_pmf.json", &report)?;
            println!("d_tv = {d_tv}; wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
