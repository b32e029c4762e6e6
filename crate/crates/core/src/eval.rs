//! Homomorphic evaluation and the transformation log.
//!
//! Every ciphertext carries a log of the operations that produced it. Folding
//! the log yields two quantities:
//!
//! * the blind weight `w`, the number of copies of the key's blinding
//!   constant contained in the value, and
//! * a rational correction `K` collecting everything subtracted by
//!   bootstraps and modular reductions.
//!
//! For any tracked history `value = P + w * blind + K`, where `P` is the
//! plaintext combination (encrypted messages, plaintext constants and
//! scalars). Decryption subtracts the adjustment `w * blind + K`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cipher::{Ciphertext, EvalMode};
use crate::error::{HimError, Result};
use crate::keys::PublicKey;
use crate::num;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogRecord {
    FreshEncryption,
    /// Addition of another ciphertext, whose full history is embedded.
    Add {
        other: Arc<TransformationLog>,
    },
    AddPlain {
        k: BigInt,
    },
    ScalarMul {
        k: BigInt,
    },
    /// `value' = value - offset - quotient`; `noise_before` restores the
    /// noise bound when the bootstrap is undone.
    Bootstrap {
        offset: BigRational,
        quotient: BigRational,
        noise_before: BigInt,
    },
    /// `value' = value - multiple`, with `multiple` a multiple of `a0`.
    ModReduce {
        multiple: BigInt,
    },
}

/// Ordered operation history. Cloning is cheap for embedded sub-logs, which
/// are shared rather than copied.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransformationLog {
    records: Vec<LogRecord>,
    blind_weight: BigInt,
}

/// Result of folding a log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogFold {
    pub blind_weight: BigInt,
    /// Total (signed) amount removed by bootstraps and reductions.
    pub correction: BigRational,
    pub fresh_count: usize,
}

impl TransformationLog {
    pub fn fresh() -> Self {
        TransformationLog { records: vec![LogRecord::FreshEncryption], blind_weight: BigInt::one() }
    }

    /// Rebuilds a log from stored parts, checking that `blind_weight` matches the records.
    pub fn from_parts(records: Vec<LogRecord>, blind_weight: BigInt) -> Result<Self> {
        let log = TransformationLog { records, blind_weight };
        log.fold()?;
        Ok(log)
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn blind_weight(&self) -> &BigInt {
        &self.blind_weight
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Whether any record, including those of embedded logs, matches.
    pub fn contains(&self, pred: impl Fn(&LogRecord) -> bool + Copy) -> bool {
        self.records.iter().any(|r| {
            pred(r)
                || match r {
                    LogRecord::Add { other } => other.contains(pred),
                    _ => false,
                }
        })
    }

    fn push(&mut self, record: LogRecord) {
        match &record {
            LogRecord::FreshEncryption => self.blind_weight += 1,
            LogRecord::Add { other } => self.blind_weight += &other.blind_weight,
            LogRecord::ScalarMul { k } => self.blind_weight *= k,
            LogRecord::AddPlain { .. } | LogRecord::Bootstrap { .. } | LogRecord::ModReduce { .. } => {}
        }
        self.records.push(record);
    }

    pub(crate) fn pop_bootstrap(&mut self) -> Option<(BigRational, BigRational, BigInt)> {
        match self.records.last() {
            Some(LogRecord::Bootstrap { .. }) => match self.records.pop() {
                Some(LogRecord::Bootstrap { offset, quotient, noise_before }) => Some((offset, quotient, noise_before)),
                _ => unreachable!(),
            },
            _ => None,
        }
    }

    pub(crate) fn push_bootstrap(&mut self, offset: BigRational, quotient: BigRational, noise_before: BigInt) {
        self.push(LogRecord::Bootstrap { offset, quotient, noise_before });
    }

    /// Folds the records, validating each one.
    pub fn fold(&self) -> Result<LogFold> {
        let mut weight = BigInt::zero();
        let mut correction = BigRational::zero();
        let mut fresh_count = 0;
        for (index, record) in self.records.iter().enumerate() {
            match record {
                LogRecord::FreshEncryption => {
                    if index != 0 {
                        return Err(HimError::MalformedLog(format!("fresh encryption at position {index}")));
                    }
                    weight += 1;
                    fresh_count += 1;
                }
                LogRecord::Add { other } => {
                    let inner = other.fold()?;
                    weight += inner.blind_weight;
                    correction += inner.correction;
                    fresh_count += inner.fresh_count;
                }
                LogRecord::AddPlain { k } => {
                    if k.is_negative() {
                        return Err(HimError::MalformedLog(format!("negative plaintext constant {k}")));
                    }
                }
                LogRecord::ScalarMul { k } => {
                    if !k.is_positive() {
                        return Err(HimError::MalformedLog(format!("non-positive scalar {k}")));
                    }
                    weight *= k;
                    correction *= num::int(k);
                }
                LogRecord::Bootstrap { offset, quotient, .. } => {
                    if !num::is_even_integer(quotient) {
                        return Err(HimError::MalformedLog(format!(
                            "bootstrap quotient {} is not an even integer",
                            num::fraction(quotient)
                        )));
                    }
                    if offset.is_negative() || offset >= &num::ratio(2, 1) {
                        return Err(HimError::MalformedLog(format!(
                            "bootstrap offset {} outside [0, 2)",
                            num::fraction(offset)
                        )));
                    }
                    correction -= offset + quotient;
                }
                LogRecord::ModReduce { multiple } => {
                    correction -= num::int(multiple);
                }
            }
        }
        if weight != self.blind_weight {
            return Err(HimError::MalformedLog(format!(
                "stored blind weight {} but records fold to {weight}",
                self.blind_weight
            )));
        }
        Ok(LogFold { blind_weight: weight, correction, fresh_count })
    }

    /// Upper bound on the tracked plaintext combination when every encrypted
    /// message is below `d_max`.
    pub fn plaintext_bound(&self, d_max: &BigInt) -> BigInt {
        let mut bound = BigInt::zero();
        for record in &self.records {
            match record {
                LogRecord::FreshEncryption => bound += d_max,
                LogRecord::Add { other } => bound += other.plaintext_bound(d_max),
                LogRecord::AddPlain { k } => bound += k.abs(),
                LogRecord::ScalarMul { k } => bound *= k.abs(),
                LogRecord::Bootstrap { .. } | LogRecord::ModReduce { .. } => {}
            }
        }
        bound
    }

    /// Re-executes the history over the encrypted messages, which are consumed
    /// in the order their fresh encryptions appear (depth first).
    pub fn replay(&self, blind: &BigInt, plaintexts: &mut dyn Iterator<Item = BigInt>) -> Result<BigRational> {
        let mut value = BigRational::zero();
        for record in &self.records {
            match record {
                LogRecord::FreshEncryption => {
                    let d = plaintexts
                        .next()
                        .ok_or_else(|| HimError::MalformedLog("ran out of plaintexts during replay".into()))?;
                    value = num::int(&(d + blind));
                }
                LogRecord::Add { other } => value += other.replay(blind, plaintexts)?,
                LogRecord::AddPlain { k } => value += num::int(k),
                LogRecord::ScalarMul { k } => value *= num::int(k),
                LogRecord::Bootstrap { offset, quotient, .. } => value = value - offset - quotient,
                LogRecord::ModReduce { multiple } => value -= num::int(multiple),
            }
        }
        Ok(value)
    }
}

/// `w * blind + K`: the amount by which a ciphertext value exceeds its tracked
/// plaintext combination.
pub fn compute_adjustment(log: &TransformationLog, blind: &BigInt) -> Result<BigRational> {
    let fold = log.fold()?;
    Ok(num::int(&(fold.blind_weight * blind)) + fold.correction)
}

pub fn noise_of(ct: &Ciphertext) -> BigInt {
    ct.noise_bound.clone()
}

fn check_operand(key: &PublicKey, ct: &Ciphertext) -> Result<()> {
    key.check(&ct.key_id)?;
    if ct.mode == EvalMode::Strict && ct.log.contains(|r| matches!(r, LogRecord::Bootstrap { .. })) {
        return Err(HimError::BootstrappedOperand);
    }
    Ok(())
}

/// In strict mode: check the budget `noise + plaintext bound < a0`, then
/// reduce modulo `a0` and record the subtracted multiple.
fn finish(key: &PublicKey, mut ct: Ciphertext) -> Result<Ciphertext> {
    if ct.mode == EvalMode::Literal {
        return Ok(ct);
    }
    let required = &ct.noise_bound + ct.log.plaintext_bound(&key.params.d_max);
    if required >= key.a0 {
        return Err(HimError::NoiseBudgetExceeded { required: required.to_string(), a0: key.a0.to_string() });
    }
    let (reduced, multiple) = reduce_mod(&ct.value.to_integer(), &key.a0);
    if !multiple.is_zero() {
        ct.value = num::int(&reduced);
        ct.log.push(LogRecord::ModReduce { multiple });
    }
    Ok(ct)
}

/// `(v mod a0, v - v mod a0)` with the residue in `[0, a0)`.
pub fn reduce_mod(value: &BigInt, a0: &BigInt) -> (BigInt, BigInt) {
    let reduced = value.mod_floor(a0);
    let multiple = value - &reduced;
    (reduced, multiple)
}

pub fn add(key: &PublicKey, ct1: &Ciphertext, ct2: &Ciphertext) -> Result<Ciphertext> {
    check_operand(key, ct1)?;
    check_operand(key, ct2)?;
    if ct1.mode != ct2.mode {
        return Err(HimError::ModeMismatch);
    }
    let mut log = ct1.log.clone();
    log.push(LogRecord::Add { other: Arc::new(ct2.log.clone()) });
    finish(
        key,
        Ciphertext {
            value: &ct1.value + &ct2.value,
            noise_bound: &ct1.noise_bound + &ct2.noise_bound,
            key_id: ct1.key_id,
            log,
            mode: ct1.mode,
        },
    )
}

/// Adds an unencrypted constant `k >= 0`.
pub fn add_plain(key: &PublicKey, ct: &Ciphertext, k: &BigInt) -> Result<Ciphertext> {
    check_operand(key, ct)?;
    if k.is_negative() {
        return Err(HimError::NegativeConstant(k.to_string()));
    }
    let mut out = ct.clone();
    out.value += num::int(k);
    out.log.push(LogRecord::AddPlain { k: k.clone() });
    finish(key, out)
}

pub fn scalar_mul(key: &PublicKey, ct: &Ciphertext, k: &BigInt) -> Result<Ciphertext> {
    check_operand(key, ct)?;
    if !k.is_positive() {
        return Err(HimError::NonPositiveScalar(k.to_string()));
    }
    let mut out = ct.clone();
    out.value *= num::int(k);
    out.noise_bound *= k;
    out.log.push(LogRecord::ScalarMul { k: k.clone() });
    finish(key, out)
}
