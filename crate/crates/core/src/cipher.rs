//! Encryption, decryption and the parity channel.
//!
//! A fresh ciphertext is `d + 2r + 2S`. Every blinding contribution is even,
//! so `value mod 2` tracks the plaintext parity through additions and scalar
//! multiplications. Decryption subtracts the adjustment recorded in the
//! ciphertext's [`TransformationLog`], which recovers the full integer
//! plaintext (not only its parity) after any sequence of tracked operations.

use std::fmt;

use num_bigint::BigInt;
use num_bigint::RandBigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HimError, Result};
use crate::eval::{compute_adjustment, LogRecord, TransformationLog};
use crate::keys::{KeyId, KeyPair, MaskMode, PublicKey, SecurityParams};
use crate::num;

/// Whether evaluation reduces modulo `a0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Plain integer arithmetic, no reduction.
    #[default]
    Literal,
    /// Sums and products are reduced modulo `a0` under a checked noise budget.
    Strict,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Literal => "literal",
            EvalMode::Strict => "strict",
        })
    }
}

impl std::str::FromStr for EvalMode {
    type Err = HimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(EvalMode::Literal),
            "strict" => Ok(EvalMode::Strict),
            other => Err(HimError::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    /// Integral until bootstrapped.
    pub value: BigRational,
    /// Upper bound on the non-plaintext part of `value`.
    pub noise_bound: BigInt,
    pub key_id: KeyId,
    pub log: TransformationLog,
    pub mode: EvalMode,
}

impl Ciphertext {
    pub fn is_integral(&self) -> bool {
        self.value.is_integer()
    }

    pub fn blind_weight(&self) -> &BigInt {
        self.log.blind_weight()
    }
}

/// One summand `y * a_i0 * a_j1 * a_k2 * x` of the mask sum (1-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTerm {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub y_coef: u8,
    pub a_i0: BigInt,
    pub a_j1: BigInt,
    pub a_k2: BigInt,
    /// Always 1, which makes the decryption subtraction equal the encryption mask.
    pub x_aux: BigInt,
}

impl MaskTerm {
    pub fn product(&self) -> BigInt {
        BigInt::from(self.y_coef) * &self.a_i0 * &self.a_j1 * &self.a_k2 * &self.x_aux
    }
}

/// Derives the mask sum `S` and its terms from the public seed.
///
/// In seeded mode a ChaCha20 stream seeded with `rs1` first fills the three
/// element vectors `a_(.,0)`, `a_(.,1)`, `a_(.,2)` (each `beta` values in
/// `[0, 2^delta)`), then draws one coefficient in `{0, 1}` per index triple
/// in lexicographic order.
pub fn derive_mask_sum(rs1: u64, params: &SecurityParams) -> (BigInt, Vec<MaskTerm>) {
    if params.mask_mode == MaskMode::Zero {
        return (BigInt::zero(), Vec::new());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rs1);
    let beta = params.beta as usize;
    let bound = BigInt::from(1) << params.delta;
    let mut elements: [Vec<BigInt>; 3] = Default::default();
    for column in elements.iter_mut() {
        *column = (0..beta).map(|_| rng.gen_bigint_range(&BigInt::zero(), &bound)).collect();
    }
    let mut terms = Vec::with_capacity(beta.pow(3));
    let mut sum = BigInt::zero();
    for i in 0..beta {
        for j in 0..beta {
            for k in 0..beta {
                let term = MaskTerm {
                    i: i as u32 + 1,
                    j: j as u32 + 1,
                    k: k as u32 + 1,
                    y_coef: rng.gen_range(0..=1u8),
                    a_i0: elements[0][i].clone(),
                    a_j1: elements[1][j].clone(),
                    a_k2: elements[2][k].clone(),
                    x_aux: BigInt::from(1),
                };
                sum += term.product();
                terms.push(term);
            }
        }
    }
    (sum, terms)
}

/// Encrypts `d` as `d + blind`.
pub fn encrypt(key: &PublicKey, d: &BigInt, mode: EvalMode) -> Result<Ciphertext> {
    if d.is_negative() || d >= &key.params.d_max {
        return Err(HimError::MessageOutOfRange { value: d.to_string(), d_max: key.params.d_max.to_string() });
    }
    Ok(Ciphertext {
        value: num::int(&(d + &key.blind)),
        noise_bound: key.blind.clone(),
        key_id: key.key_id,
        log: TransformationLog::fresh(),
        mode,
    })
}

/// Recovers the plaintext combination tracked by the ciphertext's log.
///
/// Bootstraps and modular reductions anywhere in the history are undone
/// through the recorded offsets, quotients and multiples; for a fresh
/// ciphertext this is `value - 2r - 2S`.
pub fn decrypt(keys: &KeyPair, ct: &Ciphertext) -> Result<BigInt> {
    if ct.key_id != keys.private.key_id {
        return Err(HimError::KeyMismatch { expected: keys.private.key_id.to_string(), found: ct.key_id.to_string() });
    }
    if ct.mode == EvalMode::Literal && ct.log.contains(|r| matches!(r, LogRecord::ModReduce { .. })) {
        return Err(HimError::MalformedLog("modular reduction in a literal-mode log".into()));
    }
    let adjustment = compute_adjustment(&ct.log, &keys.public.blind)?;
    let d = &ct.value - adjustment;
    if !d.is_integer() {
        return Err(HimError::NonIntegerDecryption(num::fraction(&d)));
    }
    let d = d.to_integer();
    if ct.mode == EvalMode::Literal && d.is_negative() {
        return Err(HimError::IntegrityFailure(d.to_string()));
    }
    Ok(d)
}

/// `value mod 2`, the parity of the tracked plaintext combination.
pub fn parity(ct: &Ciphertext) -> Result<u8> {
    if !ct.value.is_integer() {
        return Err(HimError::NonIntegerDecryption(num::fraction(&ct.value)));
    }
    Ok(if ct.value.numer().is_odd() { 1 } else { 0 })
}
