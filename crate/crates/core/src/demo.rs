//! The five-step worked example: a 2x2 matrix taken through encryption,
//! evaluation, bootstrapping and decryption under the key `r = 19, q0 = 1`.

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bootstrap::RationalSequence;
use crate::cipher::EvalMode;
use crate::error::Result;
use crate::keys::{keygen, validate_params, FixedKey, KeyPair, SecurityParams};
use crate::matrix::{
    add_matrices, bootstrap_matrix, decrypt_matrix, encrypt_matrix, scalar_mul_matrix, CipherMatrix, PlainMatrix,
};
use crate::num;

/// Expected outputs of each step, row-major.
pub mod golden {
    pub const PLAIN: [i64; 4] = [5, 10, 15, 20];
    pub const ENCRYPTED: [i64; 4] = [43, 48, 53, 58];
    pub const ADDEND: [i64; 4] = [1, 2, 3, 4];
    pub const SUM: [i64; 4] = [44, 50, 56, 62];
    pub const SCALAR: i64 = 2;
    pub const SCALED: [i64; 4] = [86, 96, 106, 116];
    /// `(numerator, denominator)` pairs.
    pub const BOOTSTRAPPED: [(i64, i64); 4] = [(2, 5), (7, 5), (2, 5), (7, 5)];
}

/// The demo key: `delta = 4`, `gamma = 10`, `r = 19`, `q0 = 1`, `rs1 = 42`, zero mask.
pub fn demo_key() -> KeyPair {
    let params = validate_params(SecurityParams::new(4, 10).with_d_max(100)).expect("demo parameters are valid");
    keygen(&params, &mut ChaCha20Rng::seed_from_u64(0), Some(&FixedKey::new(19, 1).with_seed(42)))
        .expect("demo key is valid")
}

#[derive(Debug, Clone)]
pub struct DemoRun {
    pub key: KeyPair,
    pub plain: PlainMatrix,
    pub encrypted: CipherMatrix,
    pub addend: PlainMatrix,
    pub sum: CipherMatrix,
    pub scaled: CipherMatrix,
    pub bootstrapped: CipherMatrix,
    pub recovered: PlainMatrix,
}

fn square(v: [i64; 4]) -> PlainMatrix {
    PlainMatrix::new(2, 2, v.iter().map(|&x| BigInt::from(x)).collect()).expect("2x2")
}

pub fn run_demo() -> Result<DemoRun> {
    let key = demo_key();
    let plain = square(golden::PLAIN);
    let addend = square(golden::ADDEND);
    let encrypted = encrypt_matrix(&key.public, &plain, EvalMode::Literal)?;
    let sum = add_matrices(&key.public, &encrypted, &addend)?;
    let scaled = scalar_mul_matrix(&key.public, &encrypted, &BigInt::from(golden::SCALAR))?;
    let bootstrapped = bootstrap_matrix(&key.public, &encrypted, &RationalSequence::worked_example())?;
    let recovered = decrypt_matrix(&key, &bootstrapped)?;
    Ok(DemoRun { key, plain, encrypted, addend, sum, scaled, bootstrapped, recovered })
}

/// Lists every step whose output differs from the golden constants.
pub fn check_golden(run: &DemoRun) -> Vec<String> {
    let ints = |m: &CipherMatrix| m.entries().iter().map(|c| num::fraction(&c.value)).collect::<Vec<_>>();
    let want_ints = |v: [i64; 4]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let mut diffs = Vec::new();
    let mut compare = |step: &str, got: Vec<String>, want: Vec<String>| {
        if got != want {
            diffs.push(format!("{step}: expected [{}], got [{}]", want.join(","), got.join(",")));
        }
    };
    compare("encrypted", ints(&run.encrypted), want_ints(golden::ENCRYPTED));
    compare("sum", ints(&run.sum), want_ints(golden::SUM));
    compare("scaled", ints(&run.scaled), want_ints(golden::SCALED));
    compare(
        "bootstrapped",
        ints(&run.bootstrapped),
        golden::BOOTSTRAPPED.iter().map(|&(n, d)| num::fraction(&num::ratio(n, d))).collect(),
    );
    compare("recovered", run.recovered.entries().iter().map(|v| v.to_string()).collect(), want_ints(golden::PLAIN));
    diffs
}

/// Human-readable transcript of the run.
pub fn transcript(run: &DemoRun) -> String {
    let mut out = String::new();
    let pk = &run.key.public;
    out.push_str(&format!("Plain matrix:         {}\n", run.plain));
    out.push_str(&format!(
        "Key:                  r = {}, a0 = {}, rs1 = {}, blind = {}\n",
        run.key.private.r, pk.a0, pk.rs1, pk.blind
    ));
    out.push_str(&format!("Encrypted matrix:     {}\n", run.encrypted));
    out.push_str(&format!("Addition result:      {} (plain addend {})\n", run.sum, run.addend));
    out.push_str(&format!("Scalar result:        {} (scalar {})\n", run.scaled, golden::SCALAR));
    out.push_str(&format!(
        "Bootstrapped matrix:  {} = {} (offset 0.1 + 0.2 + 0.3 = 0.6)\n",
        run.bootstrapped.render_fractions(),
        run.bootstrapped.render_decimals()
    ));
    out.push_str(&format!("Recovered Data: {}\n", run.recovered));
    out
}

#[derive(Serialize)]
struct DemoDoc {
    key: KeyDoc,
    plain: Vec<String>,
    encrypted: Vec<String>,
    addend: Vec<String>,
    sum: Vec<String>,
    scaled: Vec<String>,
    bootstrapped: Vec<String>,
    bootstrapped_decimal: Vec<String>,
    recovered: Vec<String>,
    matches_golden: bool,
}

#[derive(Serialize)]
struct KeyDoc {
    r: String,
    q0: String,
    a0: String,
    rs1: u64,
    blind: String,
}

/// The same values as [`transcript`], as a JSON document.
pub fn to_json(run: &DemoRun) -> String {
    let cipher = |m: &CipherMatrix| m.entries().iter().map(|c| num::fraction(&c.value)).collect();
    let plain = |m: &PlainMatrix| m.entries().iter().map(|v| v.to_string()).collect();
    let pk = &run.key.public;
    let doc = DemoDoc {
        key: KeyDoc {
            r: run.key.private.r.to_string(),
            q0: (&pk.a0 / &run.key.private.r).to_string(),
            a0: pk.a0.to_string(),
            rs1: pk.rs1,
            blind: pk.blind.to_string(),
        },
        plain: plain(&run.plain),
        encrypted: cipher(&run.encrypted),
        addend: plain(&run.addend),
        sum: cipher(&run.sum),
        scaled: cipher(&run.scaled),
        bootstrapped: cipher(&run.bootstrapped),
        bootstrapped_decimal: run.bootstrapped.entries().iter().map(|c| num::decimal(&c.value, 12)).collect(),
        recovered: plain(&run.recovered),
        matches_golden: check_golden(run).is_empty(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_matches_golden() {
        let run = run_demo().unwrap();
        assert!(check_golden(&run).is_empty(), "{:?}", check_golden(&run));
        let t = transcript(&run);
        assert!(t.contains("Recovered Data: [5,10;15,20]"));
        assert!(t.contains("[0.4,1.4;0.4,1.4]"));
        assert!(t.contains("[2/5,7/5;2/5,7/5]"));
        assert_eq!(t, transcript(&run_demo().unwrap()));
    }

    #[test]
    fn mismatches_are_reported() {
        let mut run = run_demo().unwrap();
        run.recovered = PlainMatrix::from_rows(&[&[5, 10], &[15, 21]]).unwrap();
        let diffs = check_golden(&run);
        assert_eq!(diffs.len(), 1);
        assert!(diffs[0].starts_with("recovered"));
    }

    #[test]
    fn json_document() {
        let json: serde_json::Value = serde_json::from_str(&to_json(&run_demo().unwrap())).unwrap();
        assert_eq!(json["matches_golden"], true);
        assert_eq!(json["encrypted"][3], "58");
        assert_eq!(json["bootstrapped_decimal"][1], "1.4");
        assert_eq!(json["key"]["a0"], "19");
    }
}
