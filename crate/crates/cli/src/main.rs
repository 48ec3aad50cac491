//! `edlcs`: approximate edit distance and LCS from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use edlcs_core::bench::{
    deviation_report, generate_corpus, parse_sequence, run_experiment, Corpus, CorpusSpec, Generator, RunConfig,
};
use edlcs_core::estimator::{approximate, estimate_to_search, exact_value, window_spacing, SearchConfig};
use edlcs_core::{InputPair, Kind};

const SEED_ENV: &str = "EDLCS_SEED";

#[derive(Parser, Debug)]
#[command(name = "edlcs", version, about = "Sub-quadratic edit distance and LCS estimation")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Objective: ed or lcs
    #[arg(long, global = true)]
    mode: Option<Kind>,

    /// Run seed; falls back to the config file, then EDLCS_SEED, then 0
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Flat key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Use the length formulas for M, S and phi_y
    #[arg(long, global = true, conflicts_with = "desk_profile")]
    paper_params: bool,

    /// Small-input profile: M = 4, phi_y = 16, active probability 0.5 (default)
    #[arg(long, global = true)]
    desk_profile: bool,

    /// Use the exact DP oracle instead of (or alongside) the estimator
    #[arg(long, global = true)]
    exact: bool,

    /// Write the JSON report here
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// Write the CSV report here (bench only)
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the distance of one pair of files
    Estimate { x: PathBuf, y: PathBuf },
    /// Emit an edit script (ed) or common-subsequence witness (lcs)
    Search {
        x: PathBuf,
        y: PathBuf,
        /// Waypoint rounding parameter
        #[arg(long)]
        gamma: Option<usize>,
    },
    /// Tree deviation of a sequence file (one number per line)
    Deviation {
        file: PathBuf,
        /// Second sequence for the scaled total; all ones if absent
        #[arg(long, value_name = "PATH")]
        against: Option<PathBuf>,
        /// Branching factor
        #[arg(short, long, default_value_t = 2)]
        m: usize,
    },
    /// Run a corpus through the estimator
    Bench { corpus: PathBuf },
    /// Generate a corpus file
    Gen {
        /// random_uniform, planted_ed or planted_lcs
        #[arg(long, default_value = "planted_ed")]
        generator: Generator,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        /// Length of each string
        #[arg(long, default_value_t = 1024)]
        length: usize,
        #[arg(long, default_value_t = 4)]
        alphabet: usize,
        /// Planted edits (ed) or planted subsequence length (lcs)
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Write the two-lines-per-pair text format instead of binary
        #[arg(long)]
        text: bool,
        #[arg(short, long, value_name = "PATH")]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

/// Profile, then config file, then flags; the seed falls back to the environment.
fn run_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = if c.paper_params { RunConfig::paper() } else { RunConfig::default() };
    if let Some(p) = &c.config {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in {}", p.display()))?;
    }
    if let Some(m) = c.mode {
        cfg.mode = m;
    }
    if let Some(s) = c.seed {
        cfg.set_seed(s);
    } else if !cfg.seed_set {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let s = v.trim().parse().with_context(|| format!("{SEED_ENV}=`{v}` is not an unsigned integer"))?;
            cfg.set_seed(s);
        }
    }
    if c.exact {
        cfg.estimator.compute_exact = true;
    }
    if c.json.is_some() {
        cfg.output.clone_from(&c.json);
    }
    if c.csv.is_some() {
        cfg.csv.clone_from(&c.csv);
    }
    Ok(cfg)
}

fn emit_json(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pair_of(x: &Path, y: &Path) -> Result<InputPair> {
    Ok(InputPair::new(read(x)?, read(y)?))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = run_config(&cli.common)?;
    match cli.command {
        Command::Estimate { x, y } => {
            let pair = pair_of(&x, &y)?;
            if cli.common.exact {
                println!("{}", exact_value(&pair, cfg.mode));
                return Ok(());
            }
            let report = approximate(&pair, cfg.mode, &cfg.estimator)?;
            println!("{}", report.estimate);
            if let Some(p) = &cfg.output {
                write(p, serde_json::to_string_pretty(&report)? + "\n")?;
            }
        }
        Command::Search { x, y, gamma } => {
            let pair = pair_of(&x, &y)?;
            // exact: waypoints on every row, so the stitched path is optimal
            let gamma = if cli.common.exact { Some(window_spacing(pair.n())) } else { gamma.or(cfg.search_gamma) };
            let scfg = SearchConfig { gamma, backend: cfg.search_backend, estimator: cfg.estimator.clone() };
            let res = estimate_to_search(&pair, cfg.mode, &scfg)?;
            let text = serde_json::to_string_pretty(&res)? + "\n";
            match &cfg.output {
                Some(p) => {
                    write(p, text)?;
                    println!("{}", res.cost);
                }
                None => print!("{text}"),
            }
        }
        Command::Deviation { file, against, m } => {
            let a = parse_sequence(&String::from_utf8_lossy(&read(&file)?))
                .with_context(|| format!("in {}", file.display()))?;
            let b = match &against {
                Some(p) => Some(parse_sequence(&String::from_utf8_lossy(&read(p)?)).with_context(|| format!("in {}", p.display()))?),
                None => None,
            };
            let out = deviation_report(&a, b.as_deref(), m)?;
            emit_json(cfg.output.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))?;
        }
        Command::Bench { corpus } => {
            let corpus = Corpus::read(&corpus)?;
            let report = run_experiment(&corpus, &cfg)?;
            let s = &report.summary;
            eprintln!(
                "pairs {} dispatched {} median error {} query fraction {}",
                s.pairs,
                s.dispatched,
                s.median_relative_error.map_or("-".into(), |v| format!("{v:.4}")),
                s.query_fraction.map_or("-".into(), |v| format!("{v:.4}")),
            );
            if let Some(p) = &cfg.csv {
                write(p, report.to_csv()?)?;
            }
            emit_json(cfg.output.as_deref(), &report.to_json())?;
        }
        Command::Gen { generator, pairs, length, alphabet, k, text, out } => {
            if generator == Generator::File {
                bail!("`file` is not a generator");
            }
            let spec = CorpusSpec { generator, pairs, length, alphabet_size: alphabet, k, seed: cfg.seed() };
            generate_corpus(&spec)?.write(&out, text)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
