use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hebo_core::bench::{gp_fit_comparison, lookup, read_records, run_plan, summarize, write_records, GpFitConfig, Plan, Toggle};
use hebo_core::stats::{fligner_killeen_test, levene_test, paired_t_test, Alternative, GroupedSamples};

const RESULTS_CSV: &str = "results.csv";
const SUMMARY_JSON: &str = "summary.json";

#[derive(Parser)]
#[command(name = "hebo", version, about = "Benchmark runs, scoring and diagnostics for hebo-core")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment plan and write results.csv and summary.json.
    Run {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Solver used as the score baseline.
        #[arg(long, default_value = "random")]
        baseline: String,
    },
    /// Summarise a results directory (or CSV file) as normalised scores.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "random")]
        baseline: String,
    },
    /// Run a hypothesis test on `group,value` rows and print the result as JSON.
    Stats {
        #[arg(long)]
        test: TestKind,
        #[arg(long)]
        input: PathBuf,
        /// Alternative for the paired t-test.
        #[arg(long, value_enum, default_value_t = Alt::TwoSided)]
        alternative: Alt,
    },
    /// Compare held-out GP fit with one model component on and off.
    Gpfit {
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        toggle: ToggleArg,
        #[arg(long, default_value_t = GpFitConfig::default().n_train)]
        n_train: usize,
        #[arg(long, default_value_t = GpFitConfig::default().n_test)]
        n_test: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TestKind {
    Levene,
    Fligner,
    /// Paired t-test of the first group against the second.
    Ttest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alt {
    TwoSided,
    Greater,
    Less,
}

impl From<Alt> for Alternative {
    fn from(a: Alt) -> Self {
        match a {
            Alt::TwoSided => Alternative::TwoSided,
            Alt::Greater => Alternative::Greater,
            Alt::Less => Alternative::Less,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ToggleArg {
    Warp,
    Output,
}

impl From<ToggleArg> for Toggle {
    fn from(t: ToggleArg) -> Self {
        match t {
            ToggleArg::Warp => Toggle::Warp,
            ToggleArg::Output => Toggle::Output,
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn run(plan_path: &Path, out: &Path, baseline: &str) -> Result<()> {
    let text = fs::read_to_string(plan_path).with_context(|| format!("reading {}", plan_path.display()))?;
    let plan = Plan::from_json(&text)?;
    let records = run_plan(&plan)?;
    fs::create_dir_all(out)?;
    let csv_path = out.join(RESULTS_CSV);
    write_records(&records, BufWriter::new(File::create(&csv_path)?))?;
    eprintln!("wrote {} rows to {}", records.len(), csv_path.display());
    if plan.solvers.iter().any(|s| s.label() == baseline) {
        write_json(&out.join(SUMMARY_JSON), &summarize(&records, baseline)?)?;
    } else {
        eprintln!("baseline `{baseline}` not in plan, skipping {SUMMARY_JSON}");
    }
    Ok(())
}

fn score(input: &Path, baseline: &str) -> Result<()> {
    let csv_path = if input.is_dir() { input.join(RESULTS_CSV) } else { input.to_path_buf() };
    let file = File::open(&csv_path).with_context(|| format!("opening {}", csv_path.display()))?;
    print_json(&summarize(&read_records(BufReader::new(file))?, baseline)?)
}

fn stats(test: TestKind, input: &Path, alternative: Alt) -> Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let (names, samples) = GroupedSamples::from_csv(BufReader::new(file))?;
    let result = match test {
        TestKind::Levene => levene_test(&samples)?,
        TestKind::Fligner => fligner_killeen_test(&samples)?,
        TestKind::Ttest => {
            let groups = samples.groups();
            if groups.len() != 2 {
                bail!("paired t-test needs exactly two groups, got {} ({})", groups.len(), names.join(", "));
            }
            paired_t_test(&groups[0], &groups[1], alternative.into())?
        }
    };
    print_json(&result)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { plan, out, baseline } => run(&plan, &out, &baseline),
        Command::Score { input, baseline } => score(&input, &baseline),
        Command::Stats { test, input, alternative } => stats(test, &input, alternative),
        Command::Gpfit { function, seeds, toggle, n_train, n_test } => {
            let cfg = GpFitConfig { n_train, n_test, ..GpFitConfig::default() };
            let seeds: Vec<u64> = (0..seeds).collect();
            print_json(&gp_fit_comparison(&lookup(&function)?, &seeds, toggle.into(), &cfg)?)
        }
    }
}
