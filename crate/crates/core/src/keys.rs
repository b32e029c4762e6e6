//! Security parameters and key construction.
//!
//! A key pair is built from a secret prime `r` and a multiplier `q0`:
//! the evaluation modulus is `a0 = q0 * r`, and the blinding constant added
//! to every plaintext at encryption is `2r + 2S`, where `S` is the mask sum
//! derived from the public seed `rs1` (see [`crate::cipher::derive_mask_sum`]).
//!
//! The blinding constant is stored with the public material because
//! encryption needs it. That makes encryption deterministic per key and
//! exposes `2r + 2S` to anyone holding the public key, so this is a
//! research construction, not a semantically secure scheme.

use std::fmt;

use num_bigint::{BigInt, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cipher::derive_mask_sum;
use crate::error::{HimError, Result};
use crate::prime::{generate_prime, is_probable_prime};

/// How the mask sum `S` of the encryption formula is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    /// `S = 0`.
    Zero,
    /// `S` is folded from pseudo-random elements seeded by `rs1`.
    Seeded,
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskMode::Zero => "zero",
            MaskMode::Seeded => "seeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SecurityParams {
    /// Bit length of the secret prime.
    pub delta: u32,
    /// `q0` is drawn from `[1, 2^gamma / r]`.
    pub gamma: u32,
    /// Mask dimension; the mask sum runs over `beta^3` index triples.
    pub beta: u32,
    /// Structure parameter, strictly between 1 and 2.
    pub y: BigRational,
    pub mask_mode: MaskMode,
    /// Exclusive upper bound on plaintexts.
    pub d_max: BigInt,
}

impl SecurityParams {
    /// Parameters with `beta = 2`, `y = 3/2`, a zero mask and `d_max = 2^delta`.
    pub fn new(delta: u32, gamma: u32) -> Self {
        SecurityParams {
            delta,
            gamma,
            beta: 2,
            y: BigRational::new(3.into(), 2.into()),
            mask_mode: MaskMode::Zero,
            d_max: BigInt::one() << delta,
        }
    }

    pub fn with_mask(mut self, mask_mode: MaskMode, beta: u32) -> Self {
        self.mask_mode = mask_mode;
        self.beta = beta;
        self
    }

    pub fn with_d_max(mut self, d_max: impl Into<BigInt>) -> Self {
        self.d_max = d_max.into();
        self
    }

    pub fn with_y(mut self, y: BigRational) -> Self {
        self.y = y;
        self
    }
}

/// Parameters that passed [`validate_params`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValidatedParams(SecurityParams);

impl ValidatedParams {
    pub fn get(&self) -> &SecurityParams {
        &self.0
    }

    pub fn into_inner(self) -> SecurityParams {
        self.0
    }
}

impl std::ops::Deref for ValidatedParams {
    type Target = SecurityParams;

    fn deref(&self) -> &SecurityParams {
        &self.0
    }
}

pub fn validate_params(params: SecurityParams) -> Result<ValidatedParams> {
    if params.delta < 2 {
        return Err(HimError::invalid("delta", format!("{} < 2 leaves no prime range", params.delta)));
    }
    if params.gamma < params.delta {
        return Err(HimError::invalid("gamma", format!("2^{} < 2^{} admits no q0 >= 1", params.gamma, params.delta)));
    }
    if params.beta < 1 {
        return Err(HimError::invalid("beta", "must be at least 1"));
    }
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    if params.y <= one || params.y >= two {
        return Err(HimError::invalid("y", format!("{} is not in (1, 2)", params.y)));
    }
    if !params.d_max.is_positive() {
        return Err(HimError::invalid("d_max", format!("{} < 1", params.d_max)));
    }
    Ok(ValidatedParams(params))
}

/// SHA-256 digest identifying a key pair.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyId(pub [u8; 32]);

impl KeyId {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| HimError::Parse(format!("key_id: {e}")))?;
        let arr: [u8; 32] = bytes.try_into().map_err(|_| HimError::Parse("key_id must be 32 bytes".into()))?;
        Ok(KeyId(arr))
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex()[..16])
    }
}

impl fmt::Debug for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyId({})", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    /// Evaluation modulus `q0 * r`.
    pub a0: BigInt,
    pub rs1: u64,
    pub params: SecurityParams,
    /// Even blinding constant `2r + 2S`.
    pub blind: BigInt,
    pub key_id: KeyId,
}

impl PublicKey {
    /// Digest over the canonical encoding of every other public field.
    pub fn compute_key_id(a0: &BigInt, rs1: u64, params: &SecurityParams, blind: &BigInt) -> KeyId {
        let canonical = format!(
            "him-key-v1\na0={a0}\nrs1={rs1}\ndelta={}\ngamma={}\nbeta={}\ny={}/{}\nmask={}\nd_max={}\nblind={blind}\n",
            params.delta,
            params.gamma,
            params.beta,
            params.y.numer(),
            params.y.denom(),
            params.mask_mode,
            params.d_max,
        );
        KeyId(Sha256::digest(canonical.as_bytes()).into())
    }

    pub fn check(&self, key_id: &KeyId) -> Result<()> {
        if &self.key_id != key_id {
            return Err(HimError::KeyMismatch { expected: self.key_id.to_string(), found: key_id.to_string() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub r: BigInt,
    pub key_id: KeyId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public: PublicKey,
    pub private: PrivateKey,
}

/// Bypasses sampling of `r` and `q0`, e.g. to reproduce `r = 19, q0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedKey {
    pub r: BigInt,
    pub q0: BigInt,
    /// Seed for the mask; drawn from the generator when absent.
    pub rs1: Option<u64>,
}

impl FixedKey {
    pub fn new(r: impl Into<BigInt>, q0: impl Into<BigInt>) -> Self {
        FixedKey { r: r.into(), q0: q0.into(), rs1: None }
    }

    pub fn with_seed(mut self, rs1: u64) -> Self {
        self.rs1 = Some(rs1);
        self
    }
}

/// Builds a key pair. The result is a pure function of `(params, rng state, fixed)`.
pub fn keygen<R: RngCore + ?Sized>(params: &ValidatedParams, rng: &mut R, fixed: Option<&FixedKey>) -> Result<KeyPair> {
    let two_gamma = BigInt::one() << params.gamma;
    let (r, q0, rs1) = match fixed {
        Some(fixed) => {
            if !is_probable_prime(&fixed.r) {
                return Err(HimError::FixedKeyInvalid(format!("r = {} is not prime", fixed.r)));
            }
            let q0_max = &two_gamma / &fixed.r;
            if fixed.q0 < BigInt::one() || fixed.q0 > q0_max {
                return Err(HimError::FixedKeyInvalid(format!("q0 = {} outside [1, {q0_max}]", fixed.q0)));
            }
            let rs1 = fixed.rs1.unwrap_or_else(|| rng.next_u64());
            (fixed.r.clone(), fixed.q0.clone(), rs1)
        }
        None => {
            let r = generate_prime(params.delta, rng)?;
            let q0_max = &two_gamma / &r;
            let q0 = rng.gen_bigint_range(&BigInt::one(), &(q0_max + 1));
            let rs1 = rng.next_u64();
            (r, q0, rs1)
        }
    };

    let a0 = &q0 * &r;
    let (mask_sum, _) = derive_mask_sum(rs1, params);
    let blind = 2 * (&r + mask_sum);
    let key_id = PublicKey::compute_key_id(&a0, rs1, params, &blind);

    Ok(KeyPair {
        public: PublicKey { a0, rs1, params: params.get().clone(), blind, key_id },
        private: PrivateKey { r, key_id },
    })
}
