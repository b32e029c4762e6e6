//! Text file formats for keys, ciphertexts and cipher matrices.
//!
//! All documents are JSON with a `version` field. Arbitrary-precision
//! integers are decimal strings and rationals are `["num", "den"]` pairs.
//! The encodings are canonical: a value written and read back is identical,
//! and equal values always produce identical bytes.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cipher::{Ciphertext, EvalMode};
use crate::error::{HimError, Result};
use crate::eval::{LogRecord, TransformationLog};
use crate::keys::{KeyId, KeyPair, MaskMode, PrivateKey, PublicKey, SecurityParams};
use crate::matrix::CipherMatrix;
use crate::num::{dec, dec_ratio};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    delta: u32,
    gamma: u32,
    beta: u32,
    #[serde(with = "dec")]
    y_num: BigInt,
    #[serde(with = "dec")]
    y_den: BigInt,
    mask_mode: MaskMode,
    #[serde(with = "dec")]
    d_max: BigInt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyDoc {
    version: u32,
    params: ParamsDoc,
    #[serde(with = "dec")]
    a0: BigInt,
    rs1: u64,
    #[serde(with = "dec")]
    blind: BigInt,
    key_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<String>,
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(HimError::Parse(format!("unsupported format version {v}")));
    }
    Ok(())
}

fn key_doc(pk: &PublicKey, r: Option<&BigInt>) -> KeyDoc {
    KeyDoc {
        version: FORMAT_VERSION,
        params: ParamsDoc {
            delta: pk.params.delta,
            gamma: pk.params.gamma,
            beta: pk.params.beta,
            y_num: pk.params.y.numer().clone(),
            y_den: pk.params.y.denom().clone(),
            mask_mode: pk.params.mask_mode,
            d_max: pk.params.d_max.clone(),
        },
        a0: pk.a0.clone(),
        rs1: pk.rs1,
        blind: pk.blind.clone(),
        key_id: pk.key_id.to_hex(),
        r: r.map(|r| r.to_string()),
    }
}

fn public_from_doc(doc: &KeyDoc) -> Result<PublicKey> {
    check_version(doc.version)?;
    if doc.params.y_den == BigInt::from(0) {
        return Err(HimError::Parse("y_den is zero".into()));
    }
    let params = SecurityParams {
        delta: doc.params.delta,
        gamma: doc.params.gamma,
        beta: doc.params.beta,
        y: BigRational::new(doc.params.y_num.clone(), doc.params.y_den.clone()),
        mask_mode: doc.params.mask_mode,
        d_max: doc.params.d_max.clone(),
    };
    let key_id = KeyId::from_hex(&doc.key_id)?;
    let expected = PublicKey::compute_key_id(&doc.a0, doc.rs1, &params, &doc.blind);
    if expected != key_id {
        return Err(HimError::Parse("key_id does not match the key fields".into()));
    }
    Ok(PublicKey { a0: doc.a0.clone(), rs1: doc.rs1, params, blind: doc.blind.clone(), key_id })
}

fn to_text<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn public_key_to_string(pk: &PublicKey) -> String {
    to_text(&key_doc(pk, None))
}

/// The secret-key file: every public field plus `r`.
pub fn secret_key_to_string(kp: &KeyPair) -> String {
    to_text(&key_doc(&kp.public, Some(&kp.private.r)))
}

/// Reads a public key file. Secret-key files are accepted too; `r` is ignored.
pub fn public_key_from_str(s: &str) -> Result<PublicKey> {
    let doc: KeyDoc = serde_json::from_str(s)?;
    public_from_doc(&doc)
}

pub fn secret_key_from_str(s: &str) -> Result<KeyPair> {
    let doc: KeyDoc = serde_json::from_str(s)?;
    let public = public_from_doc(&doc)?;
    let r = doc.r.as_deref().ok_or_else(|| HimError::Parse("not a secret-key file: missing `r`".into()))?;
    let r = crate::num::parse_int(r)?;
    if &public.a0 % &r != BigInt::from(0) {
        return Err(HimError::Parse("r does not divide a0".into()));
    }
    let key_id = public.key_id;
    Ok(KeyPair { public, private: PrivateKey { r, key_id } })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RecordDoc {
    Fresh,
    Add {
        other: LogDoc,
    },
    AddPlain {
        #[serde(with = "dec")]
        k: BigInt,
    },
    ScalarMul {
        #[serde(with = "dec")]
        k: BigInt,
    },
    Bootstrap {
        #[serde(with = "dec_ratio")]
        offset: BigRational,
        #[serde(with = "dec_ratio")]
        quotient: BigRational,
        #[serde(with = "dec")]
        noise_before: BigInt,
    },
    ModReduce {
        #[serde(with = "dec")]
        multiple: BigInt,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogDoc {
    #[serde(with = "dec")]
    blind_weight: BigInt,
    records: Vec<RecordDoc>,
}

impl From<&TransformationLog> for LogDoc {
    fn from(log: &TransformationLog) -> Self {
        LogDoc {
            blind_weight: log.blind_weight().clone(),
            records: log
                .records()
                .iter()
                .map(|r| match r {
                    LogRecord::FreshEncryption => RecordDoc::Fresh,
                    LogRecord::Add { other } => RecordDoc::Add { other: LogDoc::from(other.as_ref()) },
                    LogRecord::AddPlain { k } => RecordDoc::AddPlain { k: k.clone() },
                    LogRecord::ScalarMul { k } => RecordDoc::ScalarMul { k: k.clone() },
                    LogRecord::Bootstrap { offset, quotient, noise_before } => RecordDoc::Bootstrap {
                        offset: offset.clone(),
                        quotient: quotient.clone(),
                        noise_before: noise_before.clone(),
                    },
                    LogRecord::ModReduce { multiple } => RecordDoc::ModReduce { multiple: multiple.clone() },
                })
                .collect(),
        }
    }
}

impl TryFrom<LogDoc> for TransformationLog {
    type Error = HimError;

    fn try_from(doc: LogDoc) -> Result<Self> {
        let records = doc
            .records
            .into_iter()
            .map(|r| {
                Ok(match r {
                    RecordDoc::Fresh => LogRecord::FreshEncryption,
                    RecordDoc::Add { other } => LogRecord::Add { other: Arc::new(TransformationLog::try_from(other)?) },
                    RecordDoc::AddPlain { k } => LogRecord::AddPlain { k },
                    RecordDoc::ScalarMul { k } => LogRecord::ScalarMul { k },
                    RecordDoc::Bootstrap { offset, quotient, noise_before } => {
                        LogRecord::Bootstrap { offset, quotient, noise_before }
                    }
                    RecordDoc::ModReduce { multiple } => LogRecord::ModReduce { multiple },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TransformationLog::from_parts(records, doc.blind_weight)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CiphertextDoc {
    version: u32,
    key_id: String,
    mode: EvalMode,
    #[serde(with = "dec")]
    value_num: BigInt,
    #[serde(with = "dec")]
    value_den: BigInt,
    #[serde(with = "dec")]
    noise_bound: BigInt,
    log: LogDoc,
}

impl From<&Ciphertext> for CiphertextDoc {
    fn from(ct: &Ciphertext) -> Self {
        CiphertextDoc {
            version: FORMAT_VERSION,
            key_id: ct.key_id.to_hex(),
            mode: ct.mode,
            value_num: ct.value.numer().clone(),
            value_den: ct.value.denom().clone(),
            noise_bound: ct.noise_bound.clone(),
            log: LogDoc::from(&ct.log),
        }
    }
}

impl TryFrom<CiphertextDoc> for Ciphertext {
    type Error = HimError;

    fn try_from(doc: CiphertextDoc) -> Result<Self> {
        check_version(doc.version)?;
        if doc.value_den <= BigInt::from(0) {
            return Err(HimError::Parse("value_den must be positive".into()));
        }
        Ok(Ciphertext {
            value: BigRational::new(doc.value_num, doc.value_den),
            noise_bound: doc.noise_bound,
            key_id: KeyId::from_hex(&doc.key_id)?,
            log: TransformationLog::try_from(doc.log)?,
            mode: doc.mode,
        })
    }
}

pub fn ciphertext_to_string(ct: &Ciphertext) -> String {
    to_text(&CiphertextDoc::from(ct))
}

pub fn ciphertext_from_str(s: &str) -> Result<Ciphertext> {
    let doc: CiphertextDoc = serde_json::from_str(s)?;
    Ciphertext::try_from(doc)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CipherMatrixDoc {
    version: u32,
    key_id: String,
    rows: usize,
    cols: usize,
    entries: Vec<CiphertextDoc>,
}

pub fn cipher_matrix_to_string(m: &CipherMatrix) -> String {
    to_text(&CipherMatrixDoc {
        version: FORMAT_VERSION,
        key_id: m.key_id().to_hex(),
        rows: m.rows(),
        cols: m.cols(),
        entries: m.entries().iter().map(CiphertextDoc::from).collect(),
    })
}

pub fn cipher_matrix_from_str(s: &str) -> Result<CipherMatrix> {
    let doc: CipherMatrixDoc = serde_json::from_str(s)?;
    check_version(doc.version)?;
    let key_id = KeyId::from_hex(&doc.key_id)?;
    let entries = doc.entries.into_iter().map(Ciphertext::try_from).collect::<Result<Vec<_>>>()?;
    let m = CipherMatrix::new(doc.rows, doc.cols, entries)?;
    if m.key_id() != key_id {
        return Err(HimError::Parse("matrix header key_id differs from its entries".into()));
    }
    Ok(m)
}
