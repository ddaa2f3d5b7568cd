//! Timing and trial statistics over many independent sessions.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::factorizer::factor;
use crate::model::{FactoringParams, OrderCeiling};
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub n: u64,
    pub qubits: Vec<u32>,
    pub runs: u32,
    pub seed_base: u64,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub max_trials: u32,
    pub order_ceiling: OrderCeiling,
    pub sampler: SamplerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRun {
    pub qubits: u32,
    pub run: u32,
    pub seed: u64,
    pub elapsed_secs: f64,
    pub trials: u32,
    pub factors: Option<(u64, u64)>,
}

impl BenchRun {
    pub fn succeeded(&self) -> bool {
        self.factors.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub qubits: u32,
    pub runs: Vec<BenchRun>,
}

impl BenchRow {
    pub fn mean_secs(&self) -> f64 {
        self.runs.iter().map(|r| r.elapsed_secs).sum::<f64>() / self.runs.len() as f64
    }

    /// Mean trial count over the successful runs; `None` if all failed.
    pub fn mean_trials(&self) -> Option<f64> {
        let ok: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.succeeded())
            .map(|r| r.trials as f64)
            .collect();
        (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
    }
}

/// Runs `runs` sessions per register size, seeds `seed_base + run`.
pub fn bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let params: Vec<FactoringParams> = config
        .qubits
        .iter()
        .map(|&l| {
            FactoringParams::new(config.n, Some(l)).map(|p| {
                p.with_max_trials(config.max_trials)
                    .with_order_ceiling(config.order_ceiling)
            })
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u32)> = (0..params.len())
        .flat_map(|i| (0..config.runs).map(move |run| (i, run)))
        .collect();

    let work = || {
        jobs.par_iter()
            .map(|&(i, run)| {
                let seed = config.seed_base.wrapping_add(run as u64);
                let p = params[i].clone().with_seed(seed);
                factor(&p, config.sampler).map(|h| BenchRun {
                    qubits: p.qubits,
                    run,
                    seed,
                    elapsed_secs: h.elapsed_secs,
                    trials: h.total_trials,
                    factors: h.result.factors(),
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    let runs = if config.jobs == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .expect("thread pool")
            .install(work)?
    };

    let mut rows: Vec<BenchRow> = config
        .qubits
        .iter()
        .map(|&qubits| BenchRow {
            qubits,
            runs: Vec::new(),
        })
        .collect();
    for (&(i, _), run) in jobs.iter().zip(runs) {
        rows[i].runs.push(run);
    }
    Ok(rows)
}

fn trim_mean(v: f64) -> String {
    let s = format!("{v:.1}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

/// One line per register size: each run as `secs(trials)` with `-` for a
/// failed run, then the row means.
pub fn render_table(n: u64, rows: &[BenchRow]) -> Vec<String> {
    let mut lines = vec![format!("FACTORIZATION OF N = {n}")];
    for row in rows {
        let mut cells: Vec<String> = row
            .runs
            .iter()
            .map(|r| {
                let trials = if r.succeeded() {
                    r.trials.to_string()
                } else {
                    "-".to_string()
                };
                format!("{:.3}({trials})", r.elapsed_secs)
            })
            .collect();
        let mean_trials = row.mean_trials().map_or("--".to_string(), trim_mean);
        cells.push(format!("{:.3}({mean_trials})", row.mean_secs()));
        lines.push(format!("L = {}\t{}", row.qubits, cells.join("\t")));
    }
    lines
}

pub fn write_csv<W: Write>(out: &mut W, rows: &[BenchRow]) -> Result<()> {
    writeln!(
        out,
        "L,run,seed,elapsed_secs,trials,success,factor1,factor2"
    )?;
    for run in rows.iter().flat_map(|r| &r.runs) {
        let (f1, f2) = run
            .factors
            .map_or((String::new(), String::new()), |(a, b)| {
                (a.to_string(), b.to_string())
            });
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            run.qubits,
            run.run,
            run.seed,
            run.elapsed_secs,
            run.trials,
            run.succeeded(),
            f1,
            f2
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(trials: u32, ok: bool) -> BenchRun {
        BenchRun {
            qubits: 30,
            run: 0,
            seed: 0,
            elapsed_secs: 1.0,
            trials,
            factors: ok.then_some((3623, 7069)),
        }
    }

    #[test]
    fn mean_trials_skips_failures() {
        let row = BenchRow {
            qubits: 30,
            runs: vec![
                run(100, false),
                run(100, false),
                run(56, true),
                run(64, true),
            ],
        };
        assert_eq!(row.mean_trials(), Some(60.0));
        let row = BenchRow {
            qubits: 30,
            runs: vec![run(100, false)],
        };
        assert_eq!(row.mean_trials(), None);
        let table = render_table(25610987, &[row]);
        assert_eq!(table[1], "L = 30\t1.000(-)\t1.000(--)");
    }

    #[test]
    fn single_row_bench() {
        let rows = bench(&BenchConfig {
            n: 187,
            qubits: vec![16],
            runs: 1,
            seed_base: 0,
            jobs: 1,
            max_trials: 100,
            order_ceiling: OrderCeiling::Sqrt,
            sampler: SamplerConfig::default(),
        })
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].runs.len(), 1);
        let r = &rows[0].runs[0];
        assert!(r.succeeded());
        assert_eq!(trim_mean(10.0 / 3.0), "3.3");
        assert_eq!(trim_mean(4.0), "4");
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let cfg = |jobs| BenchConfig {
            n: 1328881,
            qubits: vec![41, 30],
            runs: 4,
            seed_base: 10,
            jobs,
            max_trials: 100,
            order_ceiling: OrderCeiling::Sqrt,
            sampler: SamplerConfig::default(),
        };
        let strip = |rows: Vec<BenchRow>| {
            rows.into_iter()
                .flat_map(|r| r.runs)
                .map(|r| (r.qubits, r.seed, r.trials, r.factors))
                .collect::<Vec<_>>()
        };
        assert_eq!(
            strip(bench(&cfg(1)).unwrap()),
            strip(bench(&cfg(4)).unwrap())
        );
    }
}
