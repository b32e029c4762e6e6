use serde::Serialize;

use super::{BenchReport, Phase};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Raw per-repetition samples: `phase,repetition,delta,gamma,ms`.
    Csv,
    /// Comparison table with one measured row per sweep point.
    MarkdownTable,
    JsonDoc,
}

/// Published comparison figures: method, encryption ms, decryption ms, noise
/// growth, computational overhead, ciphertext KB. Reference data only, never
/// compared against measurements.
pub const REFERENCE_ROWS: [(&str, u32, u32, &str, &str, u32); 5] = [
    ("Kim et al.", 50, 200, "Moderate", "Low", 5),
    ("Xu et al.", 45, 180, "Moderate", "Moderate", 7),
    ("Agrawal et al.", 30, 150, "Low", "Low", 6),
    ("Zhang et al.", 40, 160, "Low", "High", 8),
    ("Proposed Method", 35, 140, "Very Low", "Low", 4),
];

const HEADER: &str = "| Method | Encryption Time (ms) | Decryption Time (ms) | Noise Growth | Computational Overhead | Ciphertext Size (KB) |";

pub fn emit_report(report: &BenchReport, format: ReportFormat, include_reference_rows: bool) -> Result<String> {
    Ok(match format {
        ReportFormat::Csv => csv(report)?,
        ReportFormat::MarkdownTable => markdown(report, include_reference_rows),
        ReportFormat::JsonDoc => json(report, include_reference_rows)?,
    })
}

fn csv(report: &BenchReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| crate::error::HimError::Io(e.to_string());
    w.write_record(["phase", "repetition", "delta", "gamma", "ms"]).map_err(io)?;
    for s in &report.samples {
        w.write_record([
            s.phase.name().to_string(),
            s.repetition.to_string(),
            s.delta.to_string(),
            s.gamma.to_string(),
            format!("{:.6}", s.ms),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::HimError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn markdown(report: &BenchReport, include_reference_rows: bool) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str("|---|---|---|---|---|---|\n");
    let single = report.points.len() == 1;
    for p in &report.points {
        let label = if single {
            "Proposed Method".to_string()
        } else {
            format!("Proposed Method (delta={}, gamma={}, beta={})", p.delta, p.gamma, p.beta)
        };
        out.push_str(&format!(
            "| {label} | {:.3} | {:.3} | {} | {} | {:.2} |\n",
            p.stats(Phase::Encrypt).mean_ms,
            p.stats(Phase::Decrypt).mean_ms,
            p.noise_growth,
            p.overhead,
            p.ciphertext_size_kb,
        ));
    }
    if include_reference_rows {
        for (method, enc, dec, noise, overhead, kb) in REFERENCE_ROWS {
            out.push_str(&format!("| {method} (reference) | {enc} | {dec} | {noise} | {overhead} | {kb} |\n"));
        }
    }
    out.push('\n');
    out.push_str(&format!(
        "Measured rows: mean wall-clock per phase over {} repetition(s), dataset {}..={}, mode {}, host: {}.\n",
        report.config.repetitions,
        report.config.dataset_min,
        report.config.dataset_max,
        report.config.mode,
        report.environment,
    ));
    out.push_str(
        "Computational overhead is evaluate-phase time over encrypt-phase time (<1 Low, <3 Moderate, else High).\n",
    );
    if include_reference_rows {
        out.push_str("Rows marked (reference) are published figures from different hardware, not measurements.\n");
    }
    out
}

#[derive(Serialize)]
struct ReferenceRow {
    method: &'static str,
    encryption_ms: u32,
    decryption_ms: u32,
    noise_growth: &'static str,
    computational_overhead: &'static str,
    ciphertext_kb: u32,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    #[serde(flatten)]
    report: &'a BenchReport,
    reference_rows: Vec<ReferenceRow>,
}

fn json(report: &BenchReport, include_reference_rows: bool) -> Result<String> {
    let reference_rows = if include_reference_rows {
        REFERENCE_ROWS
            .iter()
            .map(|&(method, enc, dec, noise, overhead, kb)| ReferenceRow {
                method,
                encryption_ms: enc,
                decryption_ms: dec,
                noise_growth: noise,
                computational_overhead: overhead,
                ciphertext_kb: kb,
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(serde_json::to_string_pretty(&JsonReport { report, reference_rows })? + "\n")
}
