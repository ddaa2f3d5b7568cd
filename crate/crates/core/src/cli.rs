//! Command-line front end: `factor`, `dist` and `bench`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchConfig};
use crate::error::{Error, Result};
use crate::factorizer::factor_observed;
use crate::model::{safe_qubits, FactoringParams, OrderCeiling, DEFAULT_MAX_TRIALS};
use crate::sampler::SamplerConfig;
use crate::spectrum::spectrum;
use crate::transcript::{write_jsonl_event, TextRenderer};

/// Exit status for a run that ended without factors.
pub const EXIT_FAILED: i32 = 1;
/// Exit status for rejected input.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "shorsim",
    version,
    about = "Pseudo-simulation of Shor's factoring algorithm"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TranscriptFormat {
    Text,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor N and print the history of every attempt.
    Factor {
        n: u64,
        /// Work-register qubits; defaults to the safe value.
        #[arg(long, short = 'L')]
        qubits: Option<u32>,
        /// Random seed; a fresh one is drawn when neither this nor SHORSIM_SEED is set.
        #[arg(long, env = "SHORSIM_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
        max_trials: u32,
        /// `sqrt`, `none` or a positive integer.
        #[arg(long, default_value = "sqrt")]
        order_ceiling: OrderCeiling,
        #[arg(long, value_enum, default_value = "text")]
        format: TranscriptFormat,
        /// Write the transcript here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ring-expansion cutoff for the readout sampler.
        #[arg(long, default_value_t = 1e-12)]
        tail_threshold: f64,
        /// Also narrate every y rejected by the order ceiling.
        #[arg(long)]
        show_rejected: bool,
    },
    /// Export the readout probabilities for one y.
    Dist {
        n: u64,
        #[arg(long, short = 'L')]
        qubits: u32,
        #[arg(long, short = 'y')]
        y: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: SpectrumFormat,
        /// Neighbor rings around each dominant readout when the register is
        /// too large to list in full.
        #[arg(long, default_value_t = 8)]
        rings: u128,
    },
    /// Time many independent runs per register size.
    Bench {
        n: u64,
        /// Comma-separated register sizes.
        #[arg(long, short = 'L', value_delimiter = ',', required = true)]
        qubits: Vec<u32>,
        #[arg(long, default_value_t = 4)]
        runs: u32,
        #[arg(long, env = "SHORSIM_SEED", default_value_t = 0)]
        seed_base: u64,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
        max_trials: u32,
        #[arg(long, default_value = "sqrt")]
        order_ceiling: OrderCeiling,
        /// Per-run CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Parses the process arguments and runs; returns the exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            if matches!(e, Error::PrimeInput(_)) {
                println!("{e}");
            } else {
                eprintln!("error: {e}");
            }
            EXIT_USAGE
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Factor {
            n,
            qubits,
            seed,
            max_trials,
            order_ceiling,
            format,
            out,
            tail_threshold,
            show_rejected,
        } => {
            safe_qubits(n)?;
            let seed = seed.unwrap_or_else(rand::random);
            let params = FactoringParams::new(n, qubits)?
                .with_seed(seed)
                .with_max_trials(max_trials)
                .with_order_ceiling(order_ceiling);
            let config = SamplerConfig {
                tail_threshold,
                ..SamplerConfig::default()
            };
            let mut sink = open_out(&out)?;
            let mut renderer = TextRenderer::new(show_rejected);
            let mut io_err = None;
            let (history, _) = factor_observed(&params, config, |event| {
                if io_err.is_some() {
                    return;
                }
                let res = match format {
                    TranscriptFormat::Jsonl => write_jsonl_event(&mut sink, event),
                    TranscriptFormat::Text => renderer
                        .render(event)
                        .iter()
                        .try_for_each(|line| writeln!(sink, "{line}"))
                        .map_err(Error::from),
                };
                io_err = res.err();
            })?;
            if let Some(e) = io_err {
                return Err(e);
            }
            sink.flush()?;
            Ok(if history.succeeded() { 0 } else { EXIT_FAILED })
        }
        Command::Dist {
            n,
            qubits,
            y,
            out,
            format,
            rings,
        } => {
            let s = spectrum(n, qubits, y, rings)?;
            let mut sink = open_out(&out)?;
            match format {
                SpectrumFormat::Csv => s.write_csv(&mut sink)?,
                SpectrumFormat::Jsonl => s.write_jsonl(&mut sink)?,
            }
            sink.flush()?;
            Ok(0)
        }
        Command::Bench {
            n,
            qubits,
            runs,
            seed_base,
            jobs,
            max_trials,
            order_ceiling,
            out,
        } => {
            let config = BenchConfig {
                n,
                qubits,
                runs,
                seed_base,
                jobs,
                max_trials,
                order_ceiling,
                sampler: SamplerConfig::default(),
            };
            let rows = bench::bench(&config)?;
            let mut stdout = io::stdout().lock();
            for line in bench::render_table(n, &rows) {
                writeln!(stdout, "{line}")?;
            }
            if let Some(path) = out {
                let mut file = BufWriter::new(File::create(path)?);
                bench::write_csv(&mut file, &rows)?;
                file.flush()?;
            }
            Ok(0)
        }
    }
}
