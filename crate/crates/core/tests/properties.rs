use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use him::eval::reduce_mod;
use him::format::{ciphertext_from_str, ciphertext_to_string};
use him::{
    add, add_plain, bootstrap, compute_adjustment, decrypt, encrypt, keygen, parity, rational_mod2, scalar_mul,
    unbootstrap, validate_params, EvalMode, KeyPair, MaskMode, RationalSequence, SecurityParams,
};

fn keys(delta: u32, seeded: bool, seed: u64) -> KeyPair {
    let mask = if seeded { MaskMode::Seeded } else { MaskMode::Zero };
    let params =
        validate_params(SecurityParams::new(delta, delta + 16).with_mask(mask, 2).with_d_max(1u64 << 20)).unwrap();
    keygen(&params, &mut ChaCha20Rng::seed_from_u64(seed), None).unwrap()
}

#[derive(Debug, Clone)]
enum Op {
    AddFresh(u32),
    AddPlain(u32),
    Scalar(u32),
    Bootstrap(u32, u32),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u32..1000).prop_map(Op::AddFresh),
        (0u32..1000).prop_map(Op::AddPlain),
        (1u32..10).prop_map(Op::Scalar),
        (1u32..1000, 1u32..1000).prop_map(|(a, b)| Op::Bootstrap(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn any_history_decrypts_to_its_plaintext(
        delta in 4u32..40,
        seeded in any::<bool>(),
        seed in any::<u64>(),
        d in 0u32..1000,
        ops in prop::collection::vec(op(), 0..12),
    ) {
        let kp = keys(delta, seeded, seed);
        let pk = &kp.public;
        let mut ct = encrypt(pk, &d.into(), EvalMode::Literal).unwrap();
        let mut p = BigInt::from(d);
        for op in ops {
            match op {
                Op::AddFresh(x) => {
                    ct = add(pk, &ct, &encrypt(pk, &x.into(), EvalMode::Literal).unwrap()).unwrap();
                    p += x;
                }
                Op::AddPlain(k) => {
                    ct = add_plain(pk, &ct, &k.into()).unwrap();
                    p += k;
                }
                Op::Scalar(k) => {
                    ct = scalar_mul(pk, &ct, &k.into()).unwrap();
                    p *= k;
                }
                Op::Bootstrap(a, b) => {
                    // Offset a / (a + b) lies in (0, 1).
                    let seq = RationalSequence::new(vec![BigRational::new(a.into(), (a + b).into())]).unwrap();
                    let before = ct.clone();
                    ct = bootstrap(pk, &ct, &seq).unwrap();
                    prop_assert_eq!(&unbootstrap(&ct).unwrap().value, &before.value);
                    // Continue from the pre-bootstrap value.
                    ct = before;
                }
            }
            let adjustment = compute_adjustment(&ct.log, &pk.blind).unwrap();
            prop_assert_eq!(&ct.value - adjustment, BigRational::from_integer(p.clone()));
            prop_assert_eq!(parity(&ct).unwrap(), u8::from(p.is_odd()));
        }
        prop_assert_eq!(decrypt(&kp, &ct).unwrap(), p);
    }

    #[test]
    fn serialization_is_canonical(delta in 4u32..64, seed in any::<u64>(), d in 0u32..1000, k in 1u32..10) {
        let kp = keys(delta, true, seed);
        let pk = &kp.public;
        let ct = scalar_mul(pk, &encrypt(pk, &d.into(), EvalMode::Literal).unwrap(), &k.into()).unwrap();
        let text = ciphertext_to_string(&ct);
        let back = ciphertext_from_str(&text).unwrap();
        prop_assert_eq!(&back, &ct);
        prop_assert_eq!(ciphertext_to_string(&back), text);
    }

    #[test]
    fn mod2_lands_in_half_open_interval(n in -10_000i64..10_000, m in 1i64..1000) {
        let x = BigRational::new(n.into(), m.into());
        let r = rational_mod2(&x);
        prop_assert!(!r.is_negative() && r < BigRational::from_integer(2.into()));
        let q = (&x - &r) / BigRational::from_integer(2.into());
        prop_assert!(q.is_integer());
    }

    #[test]
    fn reduce_mod_splits_exactly(v in any::<i64>(), a0 in 1i64..1_000_000) {
        let (r, multiple) = reduce_mod(&v.into(), &a0.into());
        prop_assert!(!r.is_negative() && r < BigInt::from(a0));
        prop_assert_eq!(&r + &multiple, BigInt::from(v));
        prop_assert!((multiple % a0).is_zero());
    }
}
