//! Prime sampling for the secret key.
//!
//! Candidates are screened by trial division against every prime below
//! 2^16, which decides primality outright for values below 2^32. Larger
//! candidates then go through [`MILLER_RABIN_ROUNDS`] rounds of Miller-Rabin
//! whose bases are derived from the candidate itself, so the test is a pure
//! function of its input.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{HimError, Result};

pub const MILLER_RABIN_ROUNDS: usize = 40;
const TRIAL_DIVISION_LIMIT: u32 = 1 << 16;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_DIVISION_LIMIT as usize;
        let mut composite = vec![false; n];
        let mut primes = Vec::new();
        for i in 2..n {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j < n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Probabilistic primality test (exact below 2^32).
pub fn is_probable_prime(n: &BigInt) -> bool {
    let Some(n) = n.to_biguint() else {
        return false;
    };
    if n < BigUint::from(2u32) {
        return false;
    }
    let small = n.to_u64();
    for &p in small_primes() {
        match small {
            Some(s) => {
                let p = u64::from(p);
                if p * p > s {
                    return true;
                }
                if s % p == 0 {
                    return false;
                }
            }
            None => {
                if (&n % p).is_zero() {
                    return false;
                }
            }
        }
    }
    miller_rabin(&n, MILLER_RABIN_ROUNDS)
}

fn miller_rabin(n: &BigUint, rounds: usize) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;

    let seed: [u8; 32] = Sha256::digest(n.to_bytes_be()).into();
    let mut rng = ChaCha20Rng::from_seed(seed);

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Samples a prime uniformly among candidates in `[2^(delta-1), 2^delta)`.
pub fn generate_prime<R: RngCore + ?Sized>(delta: u32, rng: &mut R) -> Result<BigInt> {
    if delta < 2 {
        return Err(HimError::invalid("delta", "must be at least 2"));
    }
    let low = BigInt::one() << (delta - 1);
    let high = BigInt::one() << delta;
    // Prime density in the range is about 1/(0.7 * delta); this cap is
    // unreachable in practice.
    let attempts = 1000 + 200 * delta as usize;
    for _ in 0..attempts {
        let mut candidate = rng.gen_bigint_range(&low, &high);
        if candidate.is_even() && candidate.to_u32() != Some(2) {
            candidate += 1;
            if candidate >= high {
                continue;
            }
        }
        if is_probable_prime(&candidate) {
            return Ok(candidate);
        }
    }
    Err(HimError::PrimeSearchExhausted { delta, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn agrees_with_trial_division_below_ten_thousand() {
        for n in 0..10_000u64 {
            assert_eq!(is_probable_prime(&BigInt::from(n)), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn agrees_with_trial_division_above_the_sieve() {
        // Both sides of 2^32 so the Miller-Rabin path is exercised.
        for n in (1u64 << 32) - 300..(1u64 << 32) + 300 {
            assert_eq!(is_probable_prime(&BigInt::from(n)), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn rejects_carmichael_numbers() {
        for n in [561u64, 41041, 825265, 321197185, 5394826801, 232250619601] {
            assert!(!is_probable_prime(&BigInt::from(n)), "{n}");
        }
    }

    #[test]
    fn accepts_large_known_primes() {
        let m127 = (BigInt::one() << 127) - 1;
        assert!(is_probable_prime(&m127));
        let m128 = (BigInt::one() << 128) - 1;
        assert!(!is_probable_prime(&m128));
    }

    #[test]
    fn two_bit_primes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = generate_prime(2, &mut rng).unwrap();
            assert!(p == BigInt::from(2) || p == BigInt::from(3), "{p}");
        }
    }

    #[test]
    fn five_bit_primes_pass_trial_division() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = generate_prime(5, &mut rng).unwrap().to_u64().unwrap();
            assert!((16..32).contains(&p));
            assert!(trial_division(p));
        }
    }

    #[test]
    fn rejects_one_bit() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(matches!(generate_prime(1, &mut rng), Err(HimError::InvalidParams { field: "delta", .. })));
    }

    #[test]
    fn deterministic_given_seed() {
        let a = generate_prime(64, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let b = generate_prime(64, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits(), 64);
    }
}
