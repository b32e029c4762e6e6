//! Element-wise matrix API over the scalar operations.

use std::fmt;

use num_bigint::BigInt;

use crate::bootstrap::{bootstrap, RationalSequence};
use crate::cipher::{decrypt, encrypt, Ciphertext, EvalMode};
use crate::error::{HimError, Result};
use crate::eval::{add, add_plain, scalar_mul};
use crate::keys::{KeyId, KeyPair, PublicKey};
use crate::num;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl PlainMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(HimError::Parse(format!(
                "{} entries do not form a non-empty {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(PlainMatrix { rows, cols, entries })
    }

    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[&[T]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(HimError::Parse("ragged rows".into()));
        }
        let entries = rows.iter().flat_map(|r| r.iter().map(|&v| v.into())).collect();
        Self::new(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.cols + col]
    }

    /// Reads decimal integers, one matrix row per line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| HimError::Parse(e.to_string()))?;
            rows.push(record.iter().map(num::parse_int).collect::<Result<Vec<_>>>()?);
        }
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(HimError::Parse("ragged CSV rows".into()));
        }
        Self::new(rows.len(), cols, rows.into_iter().flatten().collect())
    }

    pub fn to_csv(&self) -> String {
        self.entries
            .chunks(self.cols)
            .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n")
            .collect()
    }
}

impl fmt::Display for PlainMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .chunks(self.cols)
            .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherMatrix {
    rows: usize,
    cols: usize,
    key_id: KeyId,
    entries: Vec<Ciphertext>,
}

impl CipherMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Ciphertext>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(HimError::Parse(format!(
                "{} ciphertexts do not form a non-empty {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let key_id = entries[0].key_id;
        let mode = entries[0].mode;
        if let Some(i) = entries.iter().position(|c| c.key_id != key_id) {
            return Err(HimError::at(
                i / cols,
                i % cols,
                HimError::KeyMismatch { expected: key_id.to_string(), found: entries[i].key_id.to_string() },
            ));
        }
        if let Some(i) = entries.iter().position(|c| c.mode != mode) {
            return Err(HimError::at(i / cols, i % cols, HimError::ModeMismatch));
        }
        Ok(CipherMatrix { rows, cols, key_id, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn key_id(&self) -> KeyId {
        self.key_id
    }

    pub fn mode(&self) -> EvalMode {
        self.entries[0].mode
    }

    pub fn entries(&self) -> &[Ciphertext] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &Ciphertext {
        &self.entries[row * self.cols + col]
    }

    /// Values as exact fractions, e.g. `[2/5,7/5;2/5,7/5]`.
    pub fn render_fractions(&self) -> String {
        self.render(num::fraction)
    }

    /// Values in decimal notation, e.g. `[0.4,1.4;0.4,1.4]`.
    pub fn render_decimals(&self) -> String {
        self.render(|v| num::decimal(v, 12))
    }

    fn render(&self, f: impl Fn(&num_rational::BigRational) -> String) -> String {
        let rows: Vec<String> = self
            .entries
            .chunks(self.cols)
            .map(|row| row.iter().map(|c| f(&c.value)).collect::<Vec<_>>().join(","))
            .collect();
        format!("[{}]", rows.join(";"))
    }

    fn map(&self, op: impl Fn(usize, &Ciphertext) -> Result<Ciphertext>) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, c)| op(i, c).map_err(|e| HimError::at(i / self.cols, i % self.cols, e)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CipherMatrix { entries, ..*self })
    }
}

impl fmt::Display for CipherMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_fractions())
    }
}

/// Right-hand operand of [`add_matrices`].
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Cipher(&'a CipherMatrix),
    Plain(&'a PlainMatrix),
}

impl<'a> From<&'a CipherMatrix> for Operand<'a> {
    fn from(m: &'a CipherMatrix) -> Self {
        Operand::Cipher(m)
    }
}

impl<'a> From<&'a PlainMatrix> for Operand<'a> {
    fn from(m: &'a PlainMatrix) -> Self {
        Operand::Plain(m)
    }
}

pub fn encrypt_matrix(key: &PublicKey, m: &PlainMatrix, mode: EvalMode) -> Result<CipherMatrix> {
    let entries = m
        .entries
        .iter()
        .enumerate()
        .map(|(i, d)| encrypt(key, d, mode).map_err(|e| HimError::at(i / m.cols, i % m.cols, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CipherMatrix { rows: m.rows, cols: m.cols, key_id: key.key_id, entries })
}

/// Element-wise sum; plain operands go through `add_plain`.
pub fn add_matrices<'a>(key: &PublicKey, a: &CipherMatrix, b: impl Into<Operand<'a>>) -> Result<CipherMatrix> {
    let b = b.into();
    let (rows, cols) = match b {
        Operand::Cipher(m) => (m.rows, m.cols),
        Operand::Plain(m) => (m.rows, m.cols),
    };
    if (rows, cols) != (a.rows, a.cols) {
        return Err(HimError::ShapeMismatch {
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: rows,
            right_cols: cols,
        });
    }
    a.map(|i, c| match b {
        Operand::Cipher(m) => add(key, c, &m.entries[i]),
        Operand::Plain(m) => add_plain(key, c, &m.entries[i]),
    })
}

pub fn scalar_mul_matrix(key: &PublicKey, a: &CipherMatrix, k: &BigInt) -> Result<CipherMatrix> {
    a.map(|_, c| scalar_mul(key, c, k))
}

/// Bootstraps every entry with the same sequence.
pub fn bootstrap_matrix(key: &PublicKey, a: &CipherMatrix, seq: &RationalSequence) -> Result<CipherMatrix> {
    a.map(|_, c| bootstrap(key, c, seq))
}

pub fn decrypt_matrix(keys: &KeyPair, a: &CipherMatrix) -> Result<PlainMatrix> {
    let entries = a
        .entries
        .iter()
        .enumerate()
        .map(|(i, c)| decrypt(keys, c).map_err(|e| HimError::at(i / a.cols, i % a.cols, e)))
        .collect::<Result<Vec<_>>>()?;
    PlainMatrix::new(a.rows, a.cols, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::unbootstrap;
    use crate::keys::{keygen, validate_params, FixedKey, SecurityParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn demo_fixed_key_pair() -> KeyPair {
        let params = validate_params(SecurityParams::new(4, 10).with_d_max(100)).unwrap();
        keygen(&params, &mut ChaCha20Rng::seed_from_u64(0), Some(&FixedKey::new(19, 1))).unwrap()
    }

    fn m(rows: &[&[i64]]) -> PlainMatrix {
        PlainMatrix::from_rows(rows).unwrap()
    }

    fn values(c: &CipherMatrix) -> Vec<String> {
        c.entries().iter().map(|e| num::fraction(&e.value)).collect()
    }

    #[test]
    fn worked_example_matrices() {
        let kp = demo_fixed_key_pair();
        let ct = encrypt_matrix(&kp.public, &m(&[&[5, 10], &[15, 20]]), EvalMode::Literal).unwrap();
        assert_eq!(values(&ct), ["43", "48", "53", "58"]);
        let sum = add_matrices(&kp.public, &ct, &m(&[&[1, 2], &[3, 4]])).unwrap();
        assert_eq!(values(&sum), ["44", "50", "56", "62"]);
        let doubled = scalar_mul_matrix(&kp.public, &ct, &BigInt::from(2)).unwrap();
        assert_eq!(values(&doubled), ["86", "96", "106", "116"]);
        let boot = bootstrap_matrix(&kp.public, &ct, &RationalSequence::worked_example()).unwrap();
        assert_eq!(values(&boot), ["2/5", "7/5", "2/5", "7/5"]);
        assert_eq!(boot.render_decimals(), "[0.4,1.4;0.4,1.4]");
        assert_eq!(decrypt_matrix(&kp, &ct).unwrap(), m(&[&[5, 10], &[15, 20]]));
        assert_eq!(decrypt_matrix(&kp, &boot).unwrap(), m(&[&[5, 10], &[15, 20]]));
        let restored = boot.map(|_, c| unbootstrap(c)).unwrap();
        assert_eq!(restored, ct);
    }

    #[test]
    fn one_by_one_zero() {
        let kp = demo_fixed_key_pair();
        let ct = encrypt_matrix(&kp.public, &m(&[&[0]]), EvalMode::Literal).unwrap();
        assert_eq!(values(&ct), ["38"]);
        assert_eq!(decrypt_matrix(&kp, &ct).unwrap(), m(&[&[0]]));
    }

    #[test]
    fn identities() {
        let kp = demo_fixed_key_pair();
        let ct = encrypt_matrix(&kp.public, &m(&[&[1, 2, 3]]), EvalMode::Literal).unwrap();
        let zeros = add_matrices(&kp.public, &ct, &m(&[&[0, 0, 0]])).unwrap();
        assert_eq!(values(&zeros), values(&ct));
        let once = scalar_mul_matrix(&kp.public, &ct, &BigInt::from(1)).unwrap();
        assert_eq!(values(&once), values(&ct));
    }

    #[test]
    fn random_matrices_against_plain_oracle() {
        let kp = demo_fixed_key_pair();
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for _ in 0..50 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..4);
            let gen = |rng: &mut ChaCha20Rng| -> Vec<i64> { (0..rows * cols).map(|_| rng.gen_range(0..100)).collect() };
            let (x, y) = (gen(&mut rng), gen(&mut rng));
            let px = PlainMatrix::new(rows, cols, x.iter().map(|&v| v.into()).collect()).unwrap();
            let py = PlainMatrix::new(rows, cols, y.iter().map(|&v| v.into()).collect()).unwrap();
            let ex = encrypt_matrix(&kp.public, &px, EvalMode::Literal).unwrap();
            let ey = encrypt_matrix(&kp.public, &py, EvalMode::Literal).unwrap();
            assert_eq!(decrypt_matrix(&kp, &ex).unwrap(), px);
            let sum = decrypt_matrix(&kp, &add_matrices(&kp.public, &ex, &ey).unwrap()).unwrap();
            let expected: Vec<BigInt> = x.iter().zip(&y).map(|(a, b)| BigInt::from(a + b)).collect();
            assert_eq!(sum.entries(), expected.as_slice());
            let tripled = decrypt_matrix(&kp, &scalar_mul_matrix(&kp.public, &ex, &BigInt::from(3)).unwrap()).unwrap();
            let expected: Vec<BigInt> = x.iter().map(|a| BigInt::from(3 * a)).collect();
            assert_eq!(tripled.entries(), expected.as_slice());
        }
    }

    #[test]
    fn errors_carry_the_index() {
        let kp = demo_fixed_key_pair();
        let err = encrypt_matrix(&kp.public, &m(&[&[1, 2], &[100, 3]]), EvalMode::Literal).unwrap_err();
        assert!(matches!(err, HimError::AtEntry { row: 1, col: 0, .. }));
        assert!(matches!(err.root(), HimError::MessageOutOfRange { .. }));

        let ct = encrypt_matrix(&kp.public, &m(&[&[1, 2]]), EvalMode::Literal).unwrap();
        assert!(matches!(add_matrices(&kp.public, &ct, &m(&[&[1], &[2]])), Err(HimError::ShapeMismatch { .. })));
    }

    #[test]
    fn csv_roundtrip() {
        let p = PlainMatrix::from_csv("5, 10\n15,20\n").unwrap();
        assert_eq!(p, m(&[&[5, 10], &[15, 20]]));
        assert_eq!(p.to_csv(), "5,10\n15,20\n");
        assert!(PlainMatrix::from_csv("1,2\n3\n").is_err());
        assert!(PlainMatrix::from_csv("").is_err());
        assert_eq!(p.to_string(), "[5,10;15,20]");
    }
}
