//! Sweeps over the number of bins per frame.

use rayon::prelude::*;
use timebin_core::info::{
    analytic_rate_uniform_jitter, mutual_information_bias, optimize_bins, select_best, Metric,
    SweepModel, UniformOffsetChannel,
};

use crate::config::{ExperimentConfig, SweepModelName};
use crate::error::{AppError, AppResult};
use crate::pipeline::{run_pipeline, RunReport};

/// One line of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n: u32,
    pub metric_name: &'static str,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub metric: Metric,
    pub best_n: u32,
    pub records: Vec<SweepRecord>,
    /// Full run reports per candidate, for simulated sweeps.
    pub reports: Vec<RunReport>,
}

fn record(n: u32, metric_name: &'static str, value: f64, stderr: f64) -> SweepRecord {
    SweepRecord {
        n,
        metric_name,
        value,
        stderr,
    }
}

/// Evaluates every candidate `n` and picks the best by the configured metric.
///
/// Every candidate runs with the config seed, so simulated candidates see
/// the same photon record; results do not depend on scheduling.
pub fn run_sweep(cfg: &ExperimentConfig) -> AppResult<SweepOutcome> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| AppError::Parameter("config has no [sweep] table".into()))?;
    let metric: Metric = sweep.metric.into();

    match sweep.model {
        SweepModelName::UniformOffset => {
            let channel = UniformOffsetChannel {
                frame_duration: cfg.frame.frame_duration,
                offset_span: sweep.offset_span,
            };
            let model = SweepModel::UniformOffset {
                channel,
                frames: sweep.frames,
            };
            let table = optimize_bins(&sweep.candidates, &model, metric, cfg.seed)
                .map_err(|e| AppError::stage("sweep", e))?;
            let mut records = Vec::new();
            for row in &table.rows {
                records.push(record(row.n, metric.name(), row.value, row.stderr));
                let analytic = analytic_rate_uniform_jitter(
                    row.n,
                    channel.frame_duration,
                    channel.offset_span,
                )
                .map_err(|e| AppError::stage("sweep", e))?;
                records.push(record(row.n, "analytic_bits_per_frame", analytic, 0.0));
            }
            Ok(SweepOutcome {
                metric,
                best_n: table.best_n,
                records,
                reports: Vec::new(),
            })
        }
        SweepModelName::Simulated => {
            let runs: Vec<(RunReport, f64)> = sweep
                .candidates
                .par_iter()
                .map(|&n| {
                    let run = run_pipeline(&cfg.with_bins(n))?;
                    let bias = if run.sifted.is_empty() {
                        0.0
                    } else {
                        mutual_information_bias(&run.histogram)
                            .map_err(|e| AppError::stage("sweep", e))?
                    };
                    Ok((run.report, bias))
                })
                .collect::<AppResult<_>>()?;

            let mut records = Vec::new();
            let mut triples = Vec::new();
            for (r, bias) in &runs {
                let n = r.bins_per_frame;
                let duration = cfg.source.duration;
                let scale = match metric {
                    Metric::BitsPerFrame => 1.0,
                    Metric::BitsPerSecond if duration > 0.0 => r.frames_retained as f64 / duration,
                    Metric::BitsPerPhoton if r.emitted_pairs > 0 => {
                        r.frames_retained as f64 / r.emitted_pairs as f64
                    }
                    _ => 0.0,
                };
                let (value, se, b) = (r.mi_estimate * scale, r.mi_stderr * scale, bias * scale);
                triples.push((n, value, (se * se + b * b).sqrt()));
                records.push(record(n, metric.name(), value, se));
                if metric != Metric::BitsPerFrame {
                    records.push(record(
                        n,
                        Metric::BitsPerFrame.name(),
                        r.mi_estimate,
                        r.mi_stderr,
                    ));
                }
                records.push(record(
                    n,
                    "final_key_bits_per_second",
                    r.bits_per_second,
                    0.0,
                ));
                records.push(record(n, "naive_rate", (n as f64).log2(), 0.0));
                if let (Some(h), Some(m)) = (r.entropy_rate, r.memoryless_rate) {
                    records.push(record(n, "entropy_rate", h, 0.0));
                    records.push(record(n, "memoryless_rate", m, 0.0));
                }
            }
            let best_n = select_best(&triples).expect("candidates validated non-empty");
            Ok(SweepOutcome {
                metric,
                best_n,
                records,
                reports: runs.into_iter().map(|(r, _)| r).collect(),
            })
        }
    }
}
