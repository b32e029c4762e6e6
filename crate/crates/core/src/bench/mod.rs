//! Benchmark harness.
//!
//! [`run_benchmark`] follows a fixed protocol: a dataset of consecutive
//! integers is encrypted, folded by pairwise additions, doubled element-wise,
//! bootstrapped and decrypted, with a monotonic wall-clock timer around each
//! phase. Every decryption is checked against plaintext arithmetic before any
//! timing is reported. [`scaling_probe`] fits log-log slopes of per-operation
//! cost against the prime size.

mod report;
mod scaling;

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bootstrap::{bootstrap, gen_rational_sequence};
use crate::cipher::{decrypt, encrypt, Ciphertext, EvalMode};
use crate::error::{HimError, Result};
use crate::eval::{add, scalar_mul};
use crate::format::ciphertext_to_string;
use crate::keys::{keygen, validate_params, MaskMode, SecurityParams};

pub use report::{emit_report, ReportFormat, REFERENCE_ROWS};
pub use scaling::{fit_slope, scaling_probe, ProbeOp, SlopeRow, SlopeTable};

/// Environment variable overriding the host descriptor in reports.
pub const ENV_VAR: &str = "HIM_BENCH_ENV";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Workload {
    Standard,
    ScalingProbe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchConfig {
    pub dataset_min: i64,
    pub dataset_max: i64,
    pub repetitions: usize,
    pub deltas: Vec<u32>,
    pub gammas: Vec<u32>,
    pub betas: Vec<u32>,
    pub mask_mode: MaskMode,
    pub mode: EvalMode,
    pub seed: u64,
    pub workload: Workload,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset_min: 1,
            dataset_max: 100,
            repetitions: 3,
            deltas: vec![32],
            gammas: vec![64],
            betas: vec![1],
            mask_mode: MaskMode::Zero,
            mode: EvalMode::Literal,
            seed: 2024,
            workload: Workload::Standard,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dataset_min > self.dataset_max {
            return Err(HimError::InvalidBounds { min: self.dataset_min, max: self.dataset_max });
        }
        if self.dataset_min < 0 {
            return Err(HimError::ConfigError("dataset values must be non-negative".into()));
        }
        if self.repetitions == 0 {
            return Err(HimError::ConfigError("repetitions must be at least 1".into()));
        }
        if self.deltas.is_empty() || self.gammas.is_empty() || self.betas.is_empty() {
            return Err(HimError::ConfigError("parameter sweep lists must be non-empty".into()));
        }
        Ok(())
    }

    /// Every `(delta, gamma, beta)` combination of the sweep lists.
    pub fn points(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for &d in &self.deltas {
            for &g in &self.gammas {
                for &b in &self.betas {
                    out.push((d, g, b));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Keygen,
    Encrypt,
    Evaluate,
    Bootstrap,
    Decrypt,
}

impl Phase {
    pub const ALL: [Phase; 5] = [Phase::Keygen, Phase::Encrypt, Phase::Evaluate, Phase::Bootstrap, Phase::Decrypt];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Keygen => "keygen",
            Phase::Encrypt => "encrypt",
            Phase::Evaluate => "evaluate",
            Phase::Bootstrap => "bootstrap",
            Phase::Decrypt => "decrypt",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NoiseGrowth {
    VeryLow,
    Low,
    Moderate,
    High,
}

impl fmt::Display for NoiseGrowth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseGrowth::VeryLow => "Very Low",
            NoiseGrowth::Low => "Low",
            NoiseGrowth::Moderate => "Moderate",
            NoiseGrowth::High => "High",
        })
    }
}

/// Evaluate-phase time relative to encrypt-phase time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overhead {
    Low,
    Moderate,
    High,
}

impl Overhead {
    pub fn classify(ratio: f64) -> Self {
        if ratio < 1.0 {
            Overhead::Low
        } else if ratio < 3.0 {
            Overhead::Moderate
        } else {
            Overhead::High
        }
    }
}

impl fmt::Display for Overhead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overhead::Low => "Low",
            Overhead::Moderate => "Moderate",
            Overhead::High => "High",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseStats {
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl PhaseStats {
    pub fn from_samples(ms: &[f64]) -> Self {
        assert!(!ms.is_empty(), "statistics need at least one sample");
        let min_ms = ms.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ms = ms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean_ms = (ms.iter().sum::<f64>() / ms.len() as f64).clamp(min_ms, max_ms);
        PhaseStats { mean_ms, min_ms, max_ms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub phase: Phase,
    pub repetition: usize,
    pub delta: u32,
    pub gamma: u32,
    pub ms: f64,
}

/// Results for one `(delta, gamma, beta)` point of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub delta: u32,
    pub gamma: u32,
    pub beta: u32,
    pub phases: Vec<(Phase, PhaseStats)>,
    pub ciphertext_size_bytes: f64,
    pub ciphertext_size_kb: f64,
    /// Max post-evaluation noise bound over the fresh noise bound.
    pub noise_ratio: f64,
    pub noise_growth: NoiseGrowth,
    pub overhead_ratio: f64,
    pub overhead: Overhead,
}

impl PointReport {
    pub fn stats(&self, phase: Phase) -> PhaseStats {
        self.phases.iter().find(|(p, _)| *p == phase).map(|(_, s)| *s).expect("every phase is measured")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub environment: String,
    pub points: Vec<PointReport>,
    pub samples: Vec<Sample>,
}

pub fn gen_dataset(config: &BenchConfig) -> Result<Vec<i64>> {
    if config.dataset_min > config.dataset_max {
        return Err(HimError::InvalidBounds { min: config.dataset_min, max: config.dataset_max });
    }
    Ok((config.dataset_min..=config.dataset_max).collect())
}

/// Byte length of the canonical ciphertext document.
pub fn measure_ciphertext_size(ct: &Ciphertext) -> usize {
    ciphertext_to_string(ct).len()
}

/// Bytes to kilobytes, rounded to two decimals.
pub fn to_kb(bytes: f64) -> f64 {
    (bytes / 1024.0 * 100.0).round() / 100.0
}

/// `max(post) / max(fresh)` as an exact ratio.
pub fn noise_ratio(fresh: &[BigInt], post: &[BigInt]) -> BigRational {
    let fresh = fresh.iter().max().cloned().unwrap_or_else(|| BigInt::from(1));
    let post = post.iter().max().cloned().unwrap_or_else(|| BigInt::from(0));
    BigRational::new(post, fresh.max(BigInt::from(1)))
}

/// Bands: at most 2 is very low, 8 low, 64 moderate, above that high.
pub fn classify_noise_growth(ratio: &BigRational) -> NoiseGrowth {
    let band = |n: i64| BigRational::from_integer(BigInt::from(n));
    if ratio <= &band(2) {
        NoiseGrowth::VeryLow
    } else if ratio <= &band(8) {
        NoiseGrowth::Low
    } else if ratio <= &band(64) {
        NoiseGrowth::Moderate
    } else {
        NoiseGrowth::High
    }
}

/// `HIM_BENCH_ENV` if set, otherwise a short host summary.
pub fn environment() -> String {
    match std::env::var(ENV_VAR) {
        Ok(v) if !v.trim().is_empty() => v,
        _ => {
            let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
            format!("{} {} ({cpus} logical cpus)", std::env::consts::OS, std::env::consts::ARCH)
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct RepOutcome {
    timings: [f64; 5],
    sizes: Vec<usize>,
    noise_ratio: BigRational,
}

fn run_repetition(
    config: &BenchConfig,
    dataset: &[i64],
    (delta, gamma, beta): (u32, u32, u32),
    repetition: usize,
) -> Result<RepOutcome> {
    let params = SecurityParams::new(delta, gamma).with_mask(config.mask_mode, beta).with_d_max(config.dataset_max + 1);
    let params = validate_params(params).map_err(|e| HimError::ConfigError(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed.wrapping_add(repetition as u64));
    let plain: Vec<BigInt> = dataset.iter().map(|&d| BigInt::from(d)).collect();
    let mut timings = [0.0; 5];

    let start = Instant::now();
    let keys = keygen(&params, &mut rng, None)?;
    timings[0] = ms(start.elapsed());
    let pk = &keys.public;

    let start = Instant::now();
    let fresh = plain.iter().map(|d| encrypt(pk, d, config.mode)).collect::<Result<Vec<_>>>()?;
    timings[1] = ms(start.elapsed());

    let start = Instant::now();
    let mut folded = fresh[0].clone();
    for ct in &fresh[1..] {
        folded = add(pk, &folded, ct)?;
    }
    let two = BigInt::from(2);
    let doubled = fresh.iter().map(|ct| scalar_mul(pk, ct, &two)).collect::<Result<Vec<_>>>()?;
    timings[2] = ms(start.elapsed());

    let fresh_noise: Vec<BigInt> = fresh.iter().map(|c| c.noise_bound.clone()).collect();
    let post_noise: Vec<BigInt> = std::iter::once(&folded).chain(&doubled).map(|c| c.noise_bound.clone()).collect();
    let ratio = noise_ratio(&fresh_noise, &post_noise);

    let seq = gen_rational_sequence(2, &mut rng)?;
    let start = Instant::now();
    let results =
        std::iter::once(&folded).chain(&doubled).map(|ct| bootstrap(pk, ct, &seq)).collect::<Result<Vec<_>>>()?;
    timings[3] = ms(start.elapsed());

    let start = Instant::now();
    let decrypted_fresh = fresh.iter().map(|c| decrypt(&keys, c)).collect::<Result<Vec<_>>>()?;
    let decrypted_results = results.iter().map(|c| decrypt(&keys, c)).collect::<Result<Vec<_>>>()?;
    timings[4] = ms(start.elapsed());

    let verify = |phase: &str, got: &[BigInt], want: &[BigInt]| -> Result<()> {
        match got.iter().zip(want).position(|(g, w)| g != w) {
            Some(index) => Err(HimError::VerificationFailed { phase: phase.to_string(), index }),
            None => Ok(()),
        }
    };
    verify("decrypt", &decrypted_fresh, &plain)?;
    let mut expected = vec![plain.iter().sum::<BigInt>()];
    expected.extend(plain.iter().map(|d| d * 2));
    verify("evaluate", &decrypted_results, &expected)?;

    Ok(RepOutcome { timings, sizes: fresh.iter().map(measure_ciphertext_size).collect(), noise_ratio: ratio })
}

/// Runs the protocol at every sweep point. Timings are collected strictly
/// sequentially.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    if config.workload != Workload::Standard {
        return Err(HimError::ConfigError(
            "run_benchmark runs the standard workload; use scaling_probe for the probe".into(),
        ));
    }
    let dataset = gen_dataset(config)?;
    let mut points = Vec::new();
    let mut samples = Vec::new();

    for point in config.points() {
        let mut per_phase = vec![Vec::new(); 5];
        let mut sizes = Vec::new();
        let mut ratio = None;
        for rep in 0..config.repetitions {
            let outcome = run_repetition(config, &dataset, point, rep)?;
            for (i, &t) in outcome.timings.iter().enumerate() {
                per_phase[i].push(t);
                samples.push(Sample { phase: Phase::ALL[i], repetition: rep, delta: point.0, gamma: point.1, ms: t });
            }
            sizes.extend(outcome.sizes);
            ratio.get_or_insert(outcome.noise_ratio);
        }
        let phases: Vec<(Phase, PhaseStats)> =
            Phase::ALL.iter().zip(&per_phase).map(|(&p, ms)| (p, PhaseStats::from_samples(ms))).collect();
        let size_bytes = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        let ratio = ratio.expect("at least one repetition");
        let encrypt_mean = phases[1].1.mean_ms;
        let evaluate_mean = phases[2].1.mean_ms;
        let overhead_ratio = if encrypt_mean > 0.0 { evaluate_mean / encrypt_mean } else { f64::INFINITY };
        points.push(PointReport {
            delta: point.0,
            gamma: point.1,
            beta: point.2,
            phases,
            ciphertext_size_bytes: size_bytes,
            ciphertext_size_kb: to_kb(size_bytes),
            noise_ratio: num_traits::ToPrimitive::to_f64(&ratio).unwrap_or(f64::INFINITY),
            noise_growth: classify_noise_growth(&ratio),
            overhead_ratio,
            overhead: Overhead::classify(overhead_ratio),
        });
    }

    Ok(BenchReport { config: config.clone(), environment: environment(), points, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::{FixedKey, KeyPair};

    fn small_config(min: i64, max: i64, reps: usize) -> BenchConfig {
        BenchConfig {
            dataset_min: min,
            dataset_max: max,
            repetitions: reps,
            deltas: vec![16],
            gammas: vec![40],
            ..BenchConfig::default()
        }
    }

    #[test]
    fn dataset_shapes() {
        assert_eq!(gen_dataset(&BenchConfig::default()).unwrap(), (1..=100).collect::<Vec<_>>());
        assert_eq!(gen_dataset(&small_config(5, 5, 1)).unwrap(), vec![5]);
        for (lo, hi) in [(0, 0), (3, 17), (10, 1000)] {
            assert_eq!(gen_dataset(&small_config(lo, hi, 1)).unwrap().len() as i64, hi - lo + 1);
        }
        assert!(matches!(gen_dataset(&small_config(6, 5, 1)), Err(HimError::InvalidBounds { min: 6, max: 5 })));
    }

    #[test]
    fn single_repetition_collapses_stats() {
        let report = run_benchmark(&small_config(1, 20, 1)).unwrap();
        for (_, s) in &report.points[0].phases {
            assert_eq!(s.min_ms, s.mean_ms);
            assert_eq!(s.mean_ms, s.max_ms);
        }
        assert_eq!(report.samples.len(), 5);
    }

    #[test]
    fn report_fields() {
        let report = run_benchmark(&small_config(1, 10, 2)).unwrap();
        assert_eq!(report.config, small_config(1, 10, 2));
        assert!(!report.environment.is_empty());
        let p = &report.points[0];
        for (_, s) in &p.phases {
            assert!(s.min_ms <= s.mean_ms && s.mean_ms <= s.max_ms);
        }
        assert!(p.ciphertext_size_bytes > 0.0);
        assert_eq!(p.noise_ratio, 10.0);
        assert_eq!(p.noise_growth, NoiseGrowth::Moderate);
    }

    #[test]
    fn non_timing_fields_are_deterministic() {
        let strip = |r: BenchReport| {
            r.points.into_iter().map(|p| (p.ciphertext_size_bytes, p.noise_growth, p.noise_ratio)).collect::<Vec<_>>()
        };
        let a = strip(run_benchmark(&small_config(1, 30, 2)).unwrap());
        let b = strip(run_benchmark(&small_config(1, 30, 2)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn strict_mode_protocol() {
        let config = BenchConfig { mode: EvalMode::Strict, ..small_config(1, 50, 1) };
        run_benchmark(&config).unwrap();
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(run_benchmark(&small_config(1, 5, 0)), Err(HimError::ConfigError(_))));
        assert!(matches!(run_benchmark(&small_config(9, 5, 1)), Err(HimError::InvalidBounds { .. })));
        let bad_gamma = BenchConfig { gammas: vec![8], ..small_config(1, 5, 1) };
        assert!(matches!(run_benchmark(&bad_gamma), Err(HimError::ConfigError(_))));
    }

    #[test]
    fn noise_growth_bands() {
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert_eq!(classify_noise_growth(&r(2)), NoiseGrowth::VeryLow);
        assert_eq!(classify_noise_growth(&r(3)), NoiseGrowth::Low);
        assert_eq!(classify_noise_growth(&r(8)), NoiseGrowth::Low);
        assert_eq!(classify_noise_growth(&r(64)), NoiseGrowth::Moderate);
        assert_eq!(classify_noise_growth(&r(100)), NoiseGrowth::High);
    }

    fn demo_fixed_key_pair() -> KeyPair {
        let params = validate_params(SecurityParams::new(4, 10).with_d_max(101)).unwrap();
        keygen(&params, &mut ChaCha20Rng::seed_from_u64(0), Some(&FixedKey::new(19, 1))).unwrap()
    }

    #[test]
    fn noise_ratios_of_workloads() {
        let kp = demo_fixed_key_pair();
        let pk = &kp.public;
        let fresh: Vec<Ciphertext> =
            (1..=100).map(|d| encrypt(pk, &BigInt::from(d), EvalMode::Literal).unwrap()).collect();
        let nb = |cs: &[&Ciphertext]| cs.iter().map(|c| c.noise_bound.clone()).collect::<Vec<_>>();
        let fresh_nb = nb(&fresh.iter().collect::<Vec<_>>());

        let pair = add(pk, &fresh[0], &fresh[1]).unwrap();
        assert_eq!(classify_noise_growth(&noise_ratio(&fresh_nb, &nb(&[&pair]))), NoiseGrowth::VeryLow);

        let doubled = scalar_mul(pk, &fresh[0], &BigInt::from(2)).unwrap();
        assert_eq!(classify_noise_growth(&noise_ratio(&fresh_nb, &nb(&[&doubled]))), NoiseGrowth::VeryLow);

        let mut fold = fresh[0].clone();
        for c in &fresh[1..] {
            fold = add(pk, &fold, c).unwrap();
        }
        // Oracle: 100 fresh bounds summed.
        let ratio = noise_ratio(&fresh_nb, &nb(&[&fold]));
        assert_eq!(ratio, BigRational::from_integer(100.into()));
        assert_eq!(classify_noise_growth(&ratio), NoiseGrowth::High);
    }

    #[test]
    fn ciphertext_sizes() {
        let size_at = |gamma: u32| {
            let params = validate_params(SecurityParams::new(16, gamma).with_d_max(100)).unwrap();
            let kp = keygen(&params, &mut ChaCha20Rng::seed_from_u64(3), None).unwrap();
            measure_ciphertext_size(&encrypt(&kp.public, &BigInt::from(7), EvalMode::Literal).unwrap())
        };
        // The ciphertext document does not carry a0, so size tracks delta through the blind.
        assert_eq!(size_at(16), size_at(64));

        let kp = demo_fixed_key_pair();
        let a = encrypt(&kp.public, &BigInt::from(7), EvalMode::Literal).unwrap();
        let b = encrypt(&kp.public, &BigInt::from(7), EvalMode::Literal).unwrap();
        assert_eq!(measure_ciphertext_size(&a), measure_ciphertext_size(&b));
        assert_eq!(to_kb(1536.0), 1.5);
        assert_eq!(to_kb(1000.0), 0.98);
    }

    #[test]
    fn environment_override() {
        // Only checks the fallback; the variable is process-global.
        if std::env::var(ENV_VAR).is_err() {
            assert!(environment().contains(std::env::consts::ARCH));
        }
    }
}
