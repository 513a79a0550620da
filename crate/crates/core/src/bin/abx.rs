use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use abx_core::commands::{self, RunConfig, SWEEP_SECONDS};
use abx_core::reverb::DEFAULT_DECAY_SECONDS;
use abx_core::{AbxMode, Error, Pooling, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "abx", version, about = "ABX discriminability of pooled speech representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every recording pair of a manifest, one matrix per snippet length.
    Score(ScoreArgs),
    /// Score at several snippet lengths and emit heatmaps plus a summary table.
    Sweep {
        #[command(flatten)]
        score: ScoreArgs,
        /// Label for the summary rows (defaults to the dataset name).
        #[arg(long)]
        group: Option<String>,
    },
    /// Add artificial reverberation to every WAV in a directory.
    Reverb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        wet: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_DECAY_SECONDS)]
        decay_seconds: f64,
    },
    /// Render a score matrix as an SVG heatmap.
    Report {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean/std of inter- and same-recording scores across score files.
    Summary {
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<PathBuf>,
        /// One label for all files, or one per file.
        #[arg(long, num_args = 1.., required = true)]
        group: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average scores by the values of one metadata key.
    Contrast {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        key: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Max,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    #[value(alias = "sampled")]
    Sample,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated snippet lengths in seconds.
    #[arg(long, value_delimiter = ',')]
    snippet_seconds: Vec<f64>,
    #[arg(long, value_enum, default_value = "max")]
    pool: PoolArg,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Triplets drawn per directional pair in sample mode.
    #[arg(long)]
    max_triplets: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

impl ScoreArgs {
    fn into_config(self, default_seconds: &[f64]) -> Result<RunConfig, Error> {
        let mode = match (self.mode, self.max_triplets, self.seed) {
            (ModeArg::Full, None, None) => AbxMode::Full,
            (ModeArg::Full, _, _) => {
                return Err(Error::Usage(
                    "--max-triplets/--seed only apply with --mode sample".into(),
                ))
            }
            (ModeArg::Sample, Some(count), Some(seed)) => AbxMode::Sampled { seed, count },
            (ModeArg::Sample, _, _) => {
                return Err(Error::Usage(
                    "--mode sample needs both --max-triplets and --seed".into(),
                ))
            }
        };
        let snippet_seconds = if self.snippet_seconds.is_empty() {
            default_seconds.to_vec()
        } else {
            self.snippet_seconds
        };
        let config = RunConfig {
            manifest: self.manifest,
            snippet_seconds,
            pooling: match self.pool {
                PoolArg::Max => Pooling::Max,
                PoolArg::Mean => Pooling::Mean,
            },
            mode,
            out_dir: self.out,
        };
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Score(args) => {
            commands::cmd_score(&args.into_config(&[10.0])?)?;
        }
        Command::Sweep { score, group } => {
            commands::cmd_sweep(&score.into_config(&SWEEP_SECONDS)?, group.as_deref())?;
        }
        Command::Reverb {
            input,
            out,
            wet,
            decay_seconds,
        } => {
            commands::cmd_reverb(&input, &out, &wet, decay_seconds)?;
        }
        Command::Report { scores, out } => commands::cmd_report(&scores, &out)?,
        Command::Summary { scores, group, out } => commands::cmd_summary(&scores, &group, &out)?,
        Command::Contrast {
            scores,
            manifest,
            key,
            out,
        } => commands::cmd_contrast(&scores, &manifest, &key, &out)?,
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("ERROR usage: {}", one_line(first));
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let s = s.to_string();
                if !msg.contains(&s) {
                    msg.push_str(": ");
                    msg.push_str(&s);
                }
                source = s_source(source);
            }
            eprintln!("ERROR {}: {}", e.code(), one_line(&msg));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn s_source<'a>(
    e: Option<&'a (dyn std::error::Error + 'static)>,
) -> Option<&'a (dyn std::error::Error + 'static)> {
    e.and_then(|e| e.source())
}
