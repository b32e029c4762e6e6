//! Integer homomorphic encryption with exact recovery.
//!
//! Plaintexts are hidden behind an even blinding constant, `CT = d + 2r + 2S`.
//! Ciphertexts support addition, addition of plaintext constants and
//! multiplication by positive scalars, either as plain integer arithmetic
//! ([`EvalMode::Literal`]) or reduced modulo `a0 = q0 * r` under a checked
//! noise budget ([`EvalMode::Strict`]). A rational-offset bootstrap maps any
//! value into `[0, 2)`.
//!
//! Every ciphertext carries a [`TransformationLog`]. Decryption folds the log
//! into the total adjustment applied by the history (copies of the blinding
//! constant, bootstrap offsets and quotients, modular reductions) and
//! subtracts it, so the exact plaintext combination comes back no matter how
//! the ciphertext was produced.
//!
//! ```
//! use him::{add, bootstrap, decrypt, encrypt, keygen, scalar_mul, validate_params};
//! use him::{EvalMode, RationalSequence, SecurityParams};
//! use num_bigint::BigInt;
//! use rand::SeedableRng;
//!
//! let params = validate_params(SecurityParams::new(32, 64))?;
//! let keys = keygen(&params, &mut rand_chacha::ChaCha20Rng::seed_from_u64(7), None)?;
//! let pk = &keys.public;
//!
//! let a = encrypt(pk, &BigInt::from(12), EvalMode::Literal)?;
//! let b = encrypt(pk, &BigInt::from(30), EvalMode::Literal)?;
//! let c = scalar_mul(pk, &add(pk, &a, &b)?, &BigInt::from(3))?;
//! let c = bootstrap(pk, &c, &RationalSequence::worked_example())?;
//!
//! assert_eq!(decrypt(&keys, &c)?, BigInt::from(126));
//! # Ok::<(), him::HimError>(())
//! ```
//!
//! The scheme is deterministic per key and the blinding constant is part of
//! the public material; it demonstrates bookkeeping and recovery, not
//! semantic security.

pub mod bench;
pub mod bootstrap;
pub mod cipher;
pub mod demo;
pub mod error;
pub mod eval;
pub mod format;
pub mod keys;
pub mod matrix;
pub mod num;
pub mod prime;

pub use bootstrap::{bootstrap, gen_rational_sequence, rational_mod2, unbootstrap, RationalSequence};
pub use cipher::{decrypt, derive_mask_sum, encrypt, parity, Ciphertext, EvalMode, MaskTerm};
pub use error::{HimError, Result};
pub use eval::{add, add_plain, compute_adjustment, noise_of, scalar_mul, LogRecord, TransformationLog};
pub use keys::{
    keygen, validate_params, FixedKey, KeyId, KeyPair, MaskMode, PrivateKey, PublicKey, SecurityParams, ValidatedParams,
};
pub use matrix::{
    add_matrices, bootstrap_matrix, decrypt_matrix, encrypt_matrix, scalar_mul_matrix, CipherMatrix, PlainMatrix,
};
pub use prime::generate_prime;

// The guide under `book/` is compiled here so its snippets run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/keys.md")]
    pub mod keys {}
    #[doc = include_str!("../../../book/src/encryption.md")]
    pub mod encryption {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    pub mod evaluation {}
    #[doc = include_str!("../../../book/src/bootstrapping.md")]
    pub mod bootstrapping {}
    #[doc = include_str!("../../../book/src/worked-example.md")]
    pub mod worked_example {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    pub mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
