//! Rational-offset bootstrapping.
//!
//! `bootstrap` maps a ciphertext value `c` to `(c - sum v_t) mod 2`, which
//! lies in `[0, 2)`. The even quotient removed by the reduction is kept in
//! the log together with the offset, so [`unbootstrap`] (and decryption) can
//! restore the pre-bootstrap value exactly.
//!
//! This is an invertible value transform with bookkeeping. It does not
//! evaluate a decryption circuit and gives no cryptographic noise refresh.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::Rng;

use crate::cipher::Ciphertext;
use crate::error::{HimError, Result};
use crate::keys::PublicKey;
use crate::num;

/// Largest denominator used by [`gen_rational_sequence`].
pub const MAX_DENOMINATOR: u64 = 1_000_000;

/// The values `v_0, ..., v_s`, each in `(0, 1)`, with sum below 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSequence {
    values: Vec<BigRational>,
    offset: BigRational,
}

impl RationalSequence {
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() {
            return Err(HimError::InvalidSequence("needs at least one value".into()));
        }
        let one = num::ratio(1, 1);
        if let Some(v) = values.iter().find(|v| !v.is_positive() || **v >= one) {
            return Err(HimError::InvalidSequence(format!("{} is not in (0, 1)", num::fraction(v))));
        }
        let offset: BigRational = values.iter().sum();
        if offset >= num::ratio(2, 1) {
            return Err(HimError::InvalidSequence(format!("offset {} is not below 2", num::fraction(&offset))));
        }
        Ok(RationalSequence { values, offset })
    }

    /// The sequence `0.1, 0.2, 0.3` with offset `0.6`.
    pub fn worked_example() -> Self {
        Self::new(vec![num::ratio(1, 10), num::ratio(2, 10), num::ratio(3, 10)]).expect("valid")
    }

    /// Index bound `s`; the sequence has `s + 1` values.
    pub fn s(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }
}

/// `x - 2 * floor(x / 2)`, in `[0, 2)`.
pub fn rational_mod2(x: &BigRational) -> BigRational {
    x - num::int(&(num::two() * num::floor(&(x / num::int(&num::two())))))
}

/// Draws `s + 1` rationals with denominators at most 10^6.
///
/// Each value is drawn from `(0, c)` with `c = min(1, 2 / (s + 1))`, so the
/// offset stays below 2 without rejection.
pub fn gen_rational_sequence<R: Rng + ?Sized>(s: usize, rng: &mut R) -> Result<RationalSequence> {
    let count = s as u64 + 1;
    // Smallest denominator for which a numerator of 1 still fits under 2/(s+1).
    let min_den = (count / 2 + 1).max(2);
    if min_den > MAX_DENOMINATOR {
        return Err(HimError::InvalidSequence(format!(
            "{count} values below 2 in total need denominators above {MAX_DENOMINATOR}"
        )));
    }
    let values = (0..count)
        .map(|_| {
            let den = rng.gen_range(min_den..=MAX_DENOMINATOR);
            let max_num = if count <= 2 { den - 1 } else { (2 * den - 1) / count };
            let numer = rng.gen_range(1..=max_num);
            BigRational::new(BigInt::from(numer), BigInt::from(den))
        })
        .collect();
    RationalSequence::new(values)
}

pub fn bootstrap(key: &PublicKey, ct: &Ciphertext, seq: &RationalSequence) -> Result<Ciphertext> {
    key.check(&ct.key_id)?;
    let pre_mod = &ct.value - seq.offset();
    let quotient = num::int(&(num::two() * num::floor(&(&pre_mod / num::int(&num::two())))));
    let value = &pre_mod - &quotient;
    debug_assert!(!value.is_negative() && value < num::ratio(2, 1));

    let mut out = ct.clone();
    out.log.push_bootstrap(seq.offset().clone(), quotient, ct.noise_bound.clone());
    out.value = value;
    out.noise_bound = num::two();
    Ok(out)
}

/// Undoes the most recent bootstrap.
pub fn unbootstrap(ct: &Ciphertext) -> Result<Ciphertext> {
    let mut out = ct.clone();
    let (offset, quotient, noise_before) = out.log.pop_bootstrap().ok_or(HimError::NoBootstrapRecord)?;
    out.value = &out.value + quotient + offset;
    out.noise_bound = noise_before;
    Ok(out)
}

/// Undoes every trailing bootstrap.
pub fn unbootstrap_all(ct: &Ciphertext) -> Ciphertext {
    let mut out = ct.clone();
    while let Ok(next) = unbootstrap(&out) {
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{decrypt, encrypt, EvalMode};
    use crate::eval::{add, scalar_mul, LogRecord};
    use crate::keys::{keygen, validate_params, FixedKey, KeyPair, SecurityParams};
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn demo_fixed_key_pair() -> KeyPair {
        let params = validate_params(SecurityParams::new(4, 10).with_d_max(100)).unwrap();
        keygen(&params, &mut ChaCha20Rng::seed_from_u64(0), Some(&FixedKey::new(19, 1))).unwrap()
    }

    #[test]
    fn mod2_examples() {
        assert_eq!(rational_mod2(&num::ratio(424, 10)), num::ratio(2, 5));
        assert_eq!(rational_mod2(&num::ratio(4, 1)), num::ratio(0, 1));
        assert_eq!(rational_mod2(&num::ratio(-6, 10)), num::ratio(7, 5));
        assert_eq!(rational_mod2(&num::ratio(1, 1)), num::ratio(1, 1));
    }

    #[test]
    fn worked_example_sequence() {
        let seq = RationalSequence::worked_example();
        assert_eq!(seq.offset(), &num::ratio(3, 5));
        assert_eq!(seq.s(), 2);
    }

    #[test]
    fn sequence_validation() {
        assert!(RationalSequence::new(vec![]).is_err());
        assert!(RationalSequence::new(vec![num::ratio(0, 1)]).is_err());
        assert!(RationalSequence::new(vec![num::ratio(1, 1)]).is_err());
        assert!(RationalSequence::new(vec![num::ratio(9, 10), num::ratio(9, 10), num::ratio(2, 10)]).is_err());
        let single = RationalSequence::new(vec![num::ratio(1, 2)]).unwrap();
        assert_eq!(single.offset(), &num::ratio(1, 2));
        assert_eq!(single.s(), 0);
    }

    #[test]
    fn generated_sequences_are_valid() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for s in [0usize, 1, 2, 5, 50, 200] {
            let seq = gen_rational_sequence(s, &mut rng).unwrap();
            assert_eq!(seq.values().len(), s + 1);
            let resum = seq.values().iter().fold(BigRational::zero(), |acc, v| acc + v);
            assert_eq!(&resum, seq.offset());
            assert!(seq.offset() < &num::ratio(2, 1));
            for v in seq.values() {
                assert!(v.is_positive() && v < &BigRational::one());
                assert!(v.denom() <= &BigInt::from(MAX_DENOMINATOR));
            }
        }
        let a = gen_rational_sequence(3, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let b = gen_rational_sequence(3, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(gen_rational_sequence(2_000_000, &mut rng).is_err());
    }

    #[test]
    fn worked_example_bootstrap_values() {
        let kp = demo_fixed_key_pair();
        let seq = RationalSequence::worked_example();
        for (d, expected) in
            [(5, num::ratio(2, 5)), (10, num::ratio(7, 5)), (15, num::ratio(2, 5)), (20, num::ratio(7, 5))]
        {
            let ct = encrypt(&kp.public, &BigInt::from(d), EvalMode::Literal).unwrap();
            let boot = bootstrap(&kp.public, &ct, &seq).unwrap();
            assert_eq!(boot.value, expected);
            assert_eq!(boot.noise_bound, BigInt::from(2));
            assert_eq!(boot.blind_weight(), &BigInt::one());
            assert_eq!(decrypt(&kp, &boot).unwrap(), BigInt::from(d));
        }
    }

    #[test]
    fn quotient_is_recorded() {
        let kp = demo_fixed_key_pair();
        let ct = encrypt(&kp.public, &BigInt::from(5), EvalMode::Literal).unwrap();
        let boot = bootstrap(&kp.public, &ct, &RationalSequence::worked_example()).unwrap();
        match boot.log.records().last() {
            Some(LogRecord::Bootstrap { offset, quotient, .. }) => {
                assert_eq!(offset, &num::ratio(3, 5));
                assert_eq!(quotient, &num::ratio(42, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let back = unbootstrap(&boot).unwrap();
        assert_eq!(back, ct);
        assert!(matches!(unbootstrap(&back), Err(HimError::NoBootstrapRecord)));
    }

    #[test]
    fn even_value_reduces_to_zero() {
        // Sequences have a positive offset, so a zero offset is checked on the transform itself.
        assert_eq!(rational_mod2(&num::ratio(38, 1)), num::ratio(0, 1));
        let kp = demo_fixed_key_pair();
        let ct = encrypt(&kp.public, &BigInt::from(0), EvalMode::Literal).unwrap();
        let seq = RationalSequence::new(vec![num::ratio(1, 2), num::ratio(1, 2)]).unwrap();
        assert_eq!(bootstrap(&kp.public, &ct, &seq).unwrap().value, num::ratio(1, 1));
    }

    #[test]
    fn literal_evaluation_after_bootstrap_still_decrypts() {
        let kp = demo_fixed_key_pair();
        let e = |d: i64| encrypt(&kp.public, &BigInt::from(d), EvalMode::Literal).unwrap();
        let seq = RationalSequence::worked_example();
        let boot = bootstrap(&kp.public, &e(5), &seq).unwrap();
        let sum = add(&kp.public, &boot, &e(10)).unwrap();
        let sum = scalar_mul(&kp.public, &sum, &BigInt::from(3)).unwrap();
        let again = bootstrap(&kp.public, &add(&kp.public, &e(1), &sum).unwrap(), &seq).unwrap();
        assert_eq!(decrypt(&kp, &again).unwrap(), BigInt::from(1 + 3 * 15));
    }

    #[test]
    fn strict_mode_refuses_bootstrapped_operands() {
        let kp = demo_fixed_key_pair();
        let ct = encrypt(&kp.public, &BigInt::from(5), EvalMode::Strict).unwrap();
        let boot = bootstrap(&kp.public, &ct, &RationalSequence::worked_example()).unwrap();
        assert!(matches!(add(&kp.public, &boot, &ct), Err(HimError::BootstrappedOperand)));
    }
}
