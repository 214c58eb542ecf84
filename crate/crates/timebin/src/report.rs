//! Report emission: text summary and the CSV bundle.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use timebin_core::binning::{SiftedPair, SiftedPairs};
use timebin_core::bits::to_hex;
use timebin_core::info::{JointHistogram, MarkovChain};
use timebin_core::source::{Origin, TimeTagStream};

use crate::error::{AppError, AppResult};
use crate::pipeline::{Run, RunReport};
use crate::sweep::SweepOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    CsvBundle,
}

fn writer(path: &Path) -> AppResult<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| AppError::csv(path, e))
}

fn reader(path: &Path) -> AppResult<csv::Reader<fs::File>> {
    csv::Reader::from_path(path).map_err(|e| AppError::csv(path, e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> AppResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| AppError::csv(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| AppError::csv(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Column order of `report.csv`.
pub const REPORT_COLUMNS: [&str; 34] = [
    "seed",
    "bins_per_frame",
    "emitted_pairs",
    "detected_alice",
    "detected_bob",
    "frames_total",
    "frames_retained",
    "discard_alice_empty",
    "discard_bob_empty",
    "discard_alice_multi",
    "discard_bob_multi",
    "discard_both_invalid",
    "training_frames",
    "payload_frames",
    "raw_bits",
    "symbol_error_rate",
    "mi_estimate",
    "mi_stderr",
    "entropy_rate",
    "memoryless_rate",
    "entropy_per_bit",
    "layer_rates",
    "converged",
    "iterations",
    "reconciliation_leaked_bits",
    "training_leaked_bits",
    "residual_bit_errors",
    "verified",
    "final_key_bits",
    "keys_match",
    "bits_per_photon_emitted",
    "bits_per_photon_detected",
    "bits_per_photon_retained",
    "bits_per_second",
];

fn report_values(r: &RunReport) -> Vec<String> {
    let rec = r.reconciliation.as_ref();
    let d = &r.discards;
    vec![
        r.seed.to_string(),
        r.bins_per_frame.to_string(),
        r.emitted_pairs.to_string(),
        r.detected_alice.to_string(),
        r.detected_bob.to_string(),
        r.frames_total.to_string(),
        r.frames_retained.to_string(),
        d.alice_empty.to_string(),
        d.bob_empty.to_string(),
        d.alice_multi.to_string(),
        d.bob_multi.to_string(),
        d.both_invalid.to_string(),
        r.training_frames.to_string(),
        r.payload_frames.to_string(),
        r.raw_bits.to_string(),
        r.symbol_error_rate.to_string(),
        r.mi_estimate.to_string(),
        r.mi_stderr.to_string(),
        opt(r.entropy_rate),
        opt(r.memoryless_rate),
        r.entropy_per_bit.to_string(),
        rec.map(|x| {
            x.layer_rates
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default(),
        rec.map(|x| x.converged.to_string()).unwrap_or_default(),
        rec.map(|x| x.iterations.to_string()).unwrap_or_default(),
        rec.map(|x| x.leaked_bits.to_string()).unwrap_or_default(),
        r.training_leaked_bits.to_string(),
        rec.map(|x| x.residual_bit_errors.to_string())
            .unwrap_or_default(),
        r.verified().to_string(),
        r.final_key_bits.to_string(),
        r.keys_match.to_string(),
        r.bits_per_photon_emitted.to_string(),
        r.bits_per_photon_detected.to_string(),
        r.bits_per_photon_retained.to_string(),
        r.bits_per_second.to_string(),
    ]
}

pub fn write_text(r: &RunReport, out: &mut impl Write) -> std::io::Result<()> {
    let d = &r.discards;
    writeln!(out, "seed                 {}", r.seed)?;
    writeln!(out, "bins per frame       {}", r.bins_per_frame)?;
    writeln!(out, "emitted pairs        {}", r.emitted_pairs)?;
    writeln!(
        out,
        "detected (A / B)     {} / {}",
        r.detected_alice, r.detected_bob
    )?;
    writeln!(
        out,
        "frames               {} total, {} retained",
        r.frames_total, r.frames_retained
    )?;
    writeln!(
        out,
        "discards             alice empty {}, bob empty {}, alice multi {}, bob multi {}, both {}",
        d.alice_empty, d.bob_empty, d.alice_multi, d.bob_multi, d.both_invalid
    )?;
    writeln!(
        out,
        "training / payload   {} / {} frames",
        r.training_frames, r.payload_frames
    )?;
    writeln!(out, "raw bits             {}", r.raw_bits)?;
    writeln!(out, "symbol error rate    {:.6}", r.symbol_error_rate)?;
    writeln!(
        out,
        "mutual information   {:.6} +/- {:.6} bits/frame",
        r.mi_estimate, r.mi_stderr
    )?;
    if let (Some(h), Some(m)) = (r.entropy_rate, r.memoryless_rate) {
        writeln!(
            out,
            "entropy rate         {h:.6} bits/frame (memoryless {m:.6})"
        )?;
    }
    writeln!(out, "entropy per bit      {:.6}", r.entropy_per_bit)?;
    match &r.reconciliation {
        Some(x) => {
            writeln!(out, "layer rates          {:?}", x.layer_rates)?;
            writeln!(
                out,
                "reconciliation       converged {}, {} iterations, verified {}",
                x.converged, x.iterations, x.verified
            )?;
            writeln!(
                out,
                "leaked bits          {} reconciliation + {} training",
                x.leaked_bits, r.training_leaked_bits
            )?;
            writeln!(out, "residual bit errors  {}", x.residual_bit_errors)?;
        }
        None => writeln!(out, "reconciliation       skipped (no payload)")?,
    }
    writeln!(
        out,
        "final key bits       {} (keys match: {})",
        r.final_key_bits, r.keys_match
    )?;
    writeln!(
        out,
        "bits per photon      {:.6} emitted, {:.6} detected, {:.6} retained",
        r.bits_per_photon_emitted, r.bits_per_photon_detected, r.bits_per_photon_retained
    )?;
    writeln!(
        out,
        "bits per second      {:.3} (simulated time)",
        r.bits_per_second
    )
}

pub fn write_sweep_text(s: &SweepOutcome, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>6}  {:<28} {:>16} {:>12}",
        "n", "metric", "value", "stderr"
    )?;
    for r in &s.records {
        writeln!(
            out,
            "{:>6}  {:<28} {:>16.6} {:>12.3e}",
            r.n, r.metric_name, r.value, r.stderr
        )?;
    }
    writeln!(out, "best n by {}: {}", s.metric.name(), s.best_n)
}

pub fn write_report_csv(path: &Path, r: &RunReport) -> AppResult<()> {
    write_rows(path, &REPORT_COLUMNS, [report_values(r)])
}

pub fn write_sweep_csv(path: &Path, s: &SweepOutcome) -> AppResult<()> {
    write_rows(
        path,
        &["n", "metric_name", "value", "stderr"],
        s.records.iter().map(|r| {
            [
                r.n.to_string(),
                r.metric_name.to_string(),
                r.value.to_string(),
                r.stderr.to_string(),
            ]
        }),
    )
}

pub fn write_histogram_csv(path: &Path, h: &JointHistogram) -> AppResult<()> {
    let n = h.n();
    write_rows(
        path,
        &["alice_bin", "bob_bin", "count"],
        (0..n).flat_map(|a| {
            (0..n).map(move |b| [a.to_string(), b.to_string(), h.get(a, b).to_string()])
        }),
    )
}

fn parse<T: std::str::FromStr>(path: &Path, line: usize, field: Option<&str>) -> AppResult<T> {
    field
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| AppError::Format {
            path: path.to_path_buf(),
            line,
            reason: format!("bad field {field:?}"),
        })
}

/// Reads a histogram written by [`write_histogram_csv`]; `n` is inferred
/// from the number of cells.
pub fn read_histogram_csv(path: &Path) -> AppResult<JointHistogram> {
    let mut cells = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| AppError::csv(path, e))?;
        let a: u32 = parse(path, i + 2, rec.get(0))?;
        let b: u32 = parse(path, i + 2, rec.get(1))?;
        let c: u64 = parse(path, i + 2, rec.get(2))?;
        cells.push((a, b, c));
    }
    let n = (cells.len() as f64).sqrt() as u32;
    if (n * n) as usize != cells.len() {
        return Err(AppError::Format {
            path: path.to_path_buf(),
            line: cells.len() + 1,
            reason: format!("{} cells is not a square", cells.len()),
        });
    }
    let mut counts = vec![0u64; cells.len()];
    for (i, &(a, b, c)) in cells.iter().enumerate() {
        if a >= n || b >= n {
            return Err(AppError::Format {
                path: path.to_path_buf(),
                line: i + 2,
                reason: format!("bin ({a}, {b}) outside 0..{n}"),
            });
        }
        counts[(a * n + b) as usize] = c;
    }
    JointHistogram::from_counts(n, counts).map_err(|e| AppError::stage("histogram", e))
}

pub fn write_sifted_csv(path: &Path, pairs: &SiftedPairs) -> AppResult<()> {
    write_rows(
        path,
        &["frame_index", "alice_bin", "bob_bin"],
        pairs.pairs.iter().map(|p| {
            [
                p.frame_index.to_string(),
                p.alice_bin.to_string(),
                p.bob_bin.to_string(),
            ]
        }),
    )
}

pub fn read_sifted_csv(path: &Path) -> AppResult<Vec<SiftedPair>> {
    reader(path)?
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| AppError::csv(path, e))?;
            Ok(SiftedPair {
                frame_index: parse(path, i + 2, rec.get(0))?,
                alice_bin: parse(path, i + 2, rec.get(1))?,
                bob_bin: parse(path, i + 2, rec.get(2))?,
            })
        })
        .collect()
}

/// `timestamp_s,origin,detector_id`, timestamps to 12 significant digits.
pub fn write_tags_csv(path: &Path, stream: &TimeTagStream) -> AppResult<()> {
    write_rows(
        path,
        &["timestamp_s", "origin", "detector_id"],
        stream.tags.iter().map(|t| {
            let origin = match t.origin {
                Origin::Signal => "signal",
                Origin::Dark => "dark",
            };
            [
                format!("{:.11e}", t.time),
                origin.to_string(),
                t.detector.to_string(),
            ]
        }),
    )
}

/// Key report line: `raw_bits,reconciled_bits,leaked_bits,entropy_per_bit,final_bits`.
pub fn write_key_report(path: &Path, r: &RunReport) -> AppResult<()> {
    write_rows(
        path,
        &[
            "raw_bits",
            "reconciled_bits",
            "leaked_bits",
            "entropy_per_bit",
            "final_bits",
        ],
        [[
            r.raw_bits.to_string(),
            r.reconciled_bits.to_string(),
            r.leaked_bits_total().to_string(),
            r.entropy_per_bit.to_string(),
            r.final_key_bits.to_string(),
        ]],
    )
}

/// Adjacency listing `state_label,next_state_label,probability`.
pub fn write_chain(out: impl Write, mc: &MarkovChain) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["state_label", "next_state_label", "probability"])?;
    let labels = mc.labels();
    for (i, j, p) in mc.transitions() {
        w.write_record([labels[i].as_str(), labels[j].as_str(), &p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

/// Emits a run. Text goes to `out`; the CSV bundle is written into `dir`
/// and the paths written are returned.
pub fn emit_report(
    run: &Run,
    sweep: Option<&SweepOutcome>,
    format: ReportFormat,
    dir: Option<&Path>,
    out: &mut impl Write,
) -> AppResult<Vec<PathBuf>> {
    match format {
        ReportFormat::Text => {
            write_text(&run.report, out).map_err(|e| AppError::io(Path::new("<stdout>"), e))?;
            if let Some(s) = sweep {
                write_sweep_text(s, out).map_err(|e| AppError::io(Path::new("<stdout>"), e))?;
            }
            Ok(Vec::new())
        }
        ReportFormat::CsvBundle => {
            let dir = dir.ok_or_else(|| {
                AppError::Parameter("csv bundle needs an output directory".into())
            })?;
            ensure_dir(dir)?;
            let mut written = Vec::new();
            let mut path = |name: &str| {
                let p = dir.join(name);
                written.push(p.clone());
                p
            };
            write_report_csv(&path("report.csv"), &run.report)?;
            if let Some(s) = sweep {
                write_sweep_csv(&path("sweep.csv"), s)?;
            }
            write_histogram_csv(&path("joint_histogram.csv"), &run.histogram)?;
            write_sifted_csv(&path("sifted_pairs.csv"), &run.sifted)?;
            let key_path = path("key.hex");
            fs::write(&key_path, format!("{}\n", to_hex(&run.alice_key)))
                .map_err(|e| AppError::io(&key_path, e))?;
            write_key_report(&path("key_report.csv"), &run.report)?;
            if let Some((a, b)) = &run.tags {
                write_tags_csv(&path("alice_tags.csv"), a)?;
                write_tags_csv(&path("bob_tags.csv"), b)?;
            }
            Ok(written)
        }
    }
}
