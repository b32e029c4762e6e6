use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::BenchConfig;
use crate::cipher::{decrypt, encrypt};
use crate::error::{HimError, Result};
use crate::eval::{add, scalar_mul};
use crate::keys::{keygen, validate_params, SecurityParams};

const KEYGEN_RUNS: usize = 15;
const BATCHES: usize = 7;
const BATCH_SIZE: usize = 64;

/// Operation timed by the scaling probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOp {
    Keygen,
    Encrypt,
    Add,
    ScalarMul,
    Decrypt,
}

impl ProbeOp {
    pub const ALL: [ProbeOp; 5] =
        [ProbeOp::Keygen, ProbeOp::Encrypt, ProbeOp::Add, ProbeOp::ScalarMul, ProbeOp::Decrypt];

    pub fn name(self) -> &'static str {
        match self {
            ProbeOp::Keygen => "keygen",
            ProbeOp::Encrypt => "encrypt",
            ProbeOp::Add => "add",
            ProbeOp::ScalarMul => "scalar_mul",
            ProbeOp::Decrypt => "decrypt",
        }
    }
}

impl fmt::Display for ProbeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Least-squares fit of `ln(ms) = slope * ln(delta) + intercept` for one operation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub op: ProbeOp,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit, in natural-log units.
    pub rms_residual: f64,
    /// Median time per operation at each delta, in milliseconds.
    pub medians_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeTable {
    pub deltas: Vec<u32>,
    pub rows: Vec<SlopeRow>,
}

impl SlopeTable {
    pub fn row(&self, op: ProbeOp) -> Option<&SlopeRow> {
        self.rows.iter().find(|r| r.op == op)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Operation | Slope | RMS residual |");
        for d in &self.deltas {
            out.push_str(&format!(" delta={d} (ms) |"));
        }
        out.push_str("\n|---|---|---|");
        out.push_str(&"---|".repeat(self.deltas.len()));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("| {} | {:.3} | {:.3} |", r.op, r.slope, r.rms_residual));
            for m in &r.medians_ms {
                out.push_str(&format!(" {m:.6} |"));
            }
            out.push('\n');
        }
        out
    }
}

/// Returns `(slope, intercept, rms_residual)` of the least-squares line.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Median per-operation time of `op` over several batches.
fn per_op_median(mut op: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut batches = Vec::with_capacity(BATCHES);
    for _ in 0..BATCHES {
        let start = Instant::now();
        for _ in 0..BATCH_SIZE {
            op()?;
        }
        batches.push(start.elapsed().as_secs_f64() * 1e3 / BATCH_SIZE as f64);
    }
    Ok(median(batches))
}

/// Times keygen, encrypt, add, scalar_mul and decrypt at each delta (with
/// `gamma = 2 * delta`) and fits log-log slopes.
///
/// Needs at least four distinct deltas whose largest is at least eight times
/// the smallest.
pub fn scaling_probe(deltas: &[u32], config: &BenchConfig) -> Result<SlopeTable> {
    let mut sorted = deltas.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let min = sorted.first().copied().unwrap_or(0);
    let max = sorted.last().copied().unwrap_or(0);
    if sorted.len() < 4 || min < 2 || u64::from(max) < 8 * u64::from(min) {
        return Err(HimError::InsufficientPoints { needed: 4, got: sorted.len() });
    }

    let mut medians: Vec<Vec<f64>> = vec![Vec::new(); ProbeOp::ALL.len()];
    for &delta in &sorted {
        let params = validate_params(
            SecurityParams::new(delta, 2 * delta).with_mask(config.mask_mode, 1).with_d_max(BigInt::from(1u32 << 16)),
        )?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ u64::from(delta));

        let mut keygen_runs = Vec::with_capacity(KEYGEN_RUNS);
        let mut keys = None;
        for _ in 0..KEYGEN_RUNS {
            let start = Instant::now();
            let kp = keygen(&params, &mut rng, None)?;
            keygen_runs.push(start.elapsed().as_secs_f64() * 1e3);
            keys.get_or_insert(kp);
        }
        medians[0].push(median(keygen_runs));

        let keys = keys.expect("at least one keygen run");
        let pk = &keys.public;
        let d = BigInt::from(12345);
        let a = encrypt(pk, &d, config.mode)?;
        let b = encrypt(pk, &BigInt::from(678), config.mode)?;
        let k = BigInt::from(3);

        medians[1].push(per_op_median(|| encrypt(pk, &d, config.mode).map(drop))?);
        medians[2].push(per_op_median(|| add(pk, &a, &b).map(drop))?);
        medians[3].push(per_op_median(|| scalar_mul(pk, &a, &k).map(drop))?);
        medians[4].push(per_op_median(|| decrypt(&keys, &a).map(drop))?);
    }

    let xs: Vec<f64> = sorted.iter().map(|&d| f64::from(d).ln()).collect();
    let rows = ProbeOp::ALL
        .iter()
        .zip(medians)
        .map(|(&op, medians_ms)| {
            // Clamp so a zero reading from a coarse clock cannot produce -inf.
            let ys: Vec<f64> = medians_ms.iter().map(|m| m.max(1e-9).ln()).collect();
            let (slope, intercept, rms_residual) = fit_slope(&xs, &ys);
            SlopeRow { op, slope, intercept, rms_residual, medians_ms }
        })
        .collect();
    Ok(SlopeTable { deltas: sorted, rows })
}
