mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use him::bench::{emit_report, run_benchmark, scaling_probe, BenchConfig, ReportFormat};
use him::demo::{check_golden, run_demo, to_json, transcript};
use him::format::{cipher_matrix_to_string, ciphertext_to_string, public_key_to_string, secret_key_to_string};
use him::num::{parse_int, parse_rational};
use him::{
    add, add_matrices, add_plain, bootstrap, bootstrap_matrix, decrypt, decrypt_matrix, encrypt, encrypt_matrix,
    gen_rational_sequence, keygen, scalar_mul, scalar_mul_matrix, unbootstrap, validate_params, EvalMode, FixedKey,
    HimError, MaskMode, PlainMatrix, RationalSequence, Result, SecurityParams,
};

use crate::io::{load_public, load_secret, read_input, write_output, Doc};

#[derive(Parser)]
#[command(name = "him", version, about = "Integer homomorphic encryption with exact recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen(KeygenArgs),
    /// Encrypt one integer.
    Encrypt(EncryptArgs),
    /// Encrypt a CSV matrix of integers.
    EncryptMatrix(EncryptMatrixArgs),
    /// Add two ciphertexts (or two ciphertext matrices).
    Add(AddArgs),
    /// Add a non-negative plaintext constant.
    AddPlain(AddPlainArgs),
    /// Multiply by a positive integer.
    ScalarMul(ScalarMulArgs),
    /// Subtract a rational offset and reduce into [0, 2).
    Bootstrap(BootstrapArgs),
    /// Undo the most recent bootstrap.
    Unbootstrap(UnaryArgs),
    /// Decrypt one ciphertext and print the integer.
    Decrypt(DecryptArgs),
    /// Decrypt a ciphertext matrix and print it as CSV.
    DecryptMatrix(DecryptArgs),
    /// Run the fixed-key worked example and check it against the golden values.
    Demo {
        #[arg(long)]
        json: bool,
    },
    /// Time keygen/encrypt/evaluate/bootstrap/decrypt and write reports.
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, default_value_t = 32)]
    delta: u32,
    #[arg(long, default_value_t = 64)]
    gamma: u32,
    #[arg(long, default_value_t = 2)]
    beta: u32,
    #[arg(long, default_value = "3/2")]
    y: String,
    #[arg(long, value_enum, default_value_t = MaskArg::Zero)]
    mask: MaskArg,
    /// Exclusive plaintext bound (default 2^delta).
    #[arg(long)]
    dmax: Option<String>,
    /// Seed for a reproducible key; OS entropy otherwise.
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed secret prime (requires --q0).
    #[arg(long, requires = "q0")]
    r: Option<String>,
    #[arg(long, requires = "r")]
    q0: Option<String>,
    /// Fixed mask seed for a fixed key.
    #[arg(long, requires = "r")]
    rs1: Option<u64>,
    /// Secret-key file.
    #[arg(long, default_value = "-")]
    out: String,
    /// Also write the public key here.
    #[arg(long = "pub")]
    public: Option<String>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MaskArg {
    Zero,
    Seeded,
}

impl From<MaskArg> for MaskMode {
    fn from(m: MaskArg) -> Self {
        match m {
            MaskArg::Zero => MaskMode::Zero,
            MaskArg::Seeded => MaskMode::Seeded,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Literal,
    Strict,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Literal => EvalMode::Literal,
            ModeArg::Strict => EvalMode::Strict,
        }
    }
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long = "pub")]
    public: String,
    #[arg(long)]
    value: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Literal)]
    mode: ModeArg,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct EncryptMatrixArgs {
    #[arg(long = "pub")]
    public: String,
    /// CSV file of non-negative integers.
    #[arg(long)]
    matrix: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Literal)]
    mode: ModeArg,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct AddArgs {
    #[arg(long = "pub")]
    public: String,
    left: String,
    right: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct AddPlainArgs {
    #[arg(long = "pub")]
    public: String,
    input: String,
    /// Constant added to every entry.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    value: Option<String>,
    /// CSV matrix added entry-wise.
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct ScalarMulArgs {
    #[arg(long = "pub")]
    public: String,
    input: String,
    #[arg(long)]
    scalar: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct BootstrapArgs {
    #[arg(long = "pub")]
    public: String,
    input: String,
    /// Comma-separated rationals in (0, 1), e.g. `1/10,2/10,3/10`.
    #[arg(long)]
    offsets: Option<String>,
    /// Seed for a generated three-value sequence when --offsets is absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct UnaryArgs {
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long = "priv")]
    private: String,
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    min: i64,
    #[arg(long, default_value_t = 100)]
    max: i64,
    #[arg(long, value_delimiter = ',', default_value = "32")]
    delta: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "64")]
    gamma: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    beta: Vec<u32>,
    #[arg(long, value_enum, default_value_t = MaskArg::Zero)]
    mask: MaskArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Literal)]
    mode: ModeArg,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Directory for bench.csv, bench.md and (with --json) bench.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Append the published comparison rows to the Markdown table.
    #[arg(long)]
    include_paper_rows: bool,
    #[arg(long)]
    json: bool,
    /// Run the log-log scaling probe over --delta instead.
    #[arg(long)]
    scaling: bool,
}

fn rng_from(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn cmd_keygen(a: KeygenArgs) -> Result<()> {
    let d_max = match &a.dmax {
        Some(s) => parse_int(s)?,
        None => BigInt::one() << a.delta,
    };
    let params = validate_params(
        SecurityParams::new(a.delta, a.gamma)
            .with_mask(a.mask.into(), a.beta)
            .with_y(parse_rational(&a.y)?)
            .with_d_max(d_max),
    )?;
    let fixed = match (&a.r, &a.q0) {
        (Some(r), Some(q0)) => {
            let key = FixedKey::new(parse_int(r)?, parse_int(q0)?);
            Some(match a.rs1 {
                Some(rs1) => key.with_seed(rs1),
                None => key,
            })
        }
        _ => None,
    };
    let keys = keygen(&params, &mut rng_from(a.seed), fixed.as_ref())?;
    if let Some(path) = &a.public {
        write_output(path, &public_key_to_string(&keys.public))?;
    }
    write_output(&a.out, &secret_key_to_string(&keys))?;
    eprintln!("key {}", keys.public.key_id);
    Ok(())
}

fn cmd_encrypt(a: EncryptArgs) -> Result<()> {
    let pk = load_public(&a.public)?;
    let ct = encrypt(&pk, &parse_int(&a.value)?, a.mode.into())?;
    write_output(&a.out, &ciphertext_to_string(&ct))
}

fn cmd_encrypt_matrix(a: EncryptMatrixArgs) -> Result<()> {
    let pk = load_public(&a.public)?;
    let m = PlainMatrix::from_csv(&read_input(&a.matrix)?)?;
    let cm = encrypt_matrix(&pk, &m, a.mode.into())?;
    write_output(&a.out, &cipher_matrix_to_string(&cm))
}

fn cmd_add(a: AddArgs) -> Result<()> {
    let pk = load_public(&a.public)?;
    let out = match (Doc::load(&a.left)?, Doc::load(&a.right)?) {
        (Doc::Single(x), Doc::Single(y)) => Doc::Single(add(&pk, &x, &y)?),
        (Doc::Matrix(x), Doc::Matrix(y)) => Doc::Matrix(add_matrices(&pk, &x, &y)?),
        _ => return Err(HimError::Parse("cannot add a single ciphertext to a matrix".into())),
    };
    write_output(&a.out, &out.to_text())
}

fn cmd_add_plain(a: AddPlainArgs) -> Result<()> {
    let pk = load_public(&a.public)?;
    let out = match (Doc::load(&a.input)?, &a.value, &a.matrix) {
        (Doc::Single(ct), Some(k), None) => Doc::Single(add_plain(&pk, &ct, &parse_int(k)?)?),
        (Doc::Matrix(m), Some(k), None) => {
            let k = parse_int(k)?;
            let plain = PlainMatrix::new(m.rows(), m.cols(), vec![k; m.rows() * m.cols()])?;
            Doc::Matrix(add_matrices(&pk, &m, &plain)?)
        }
        (Doc::Matrix(m), None, Some(path)) => {
            let plain = PlainMatrix::from_csv(&read_input(path)?)?;
            Doc::Matrix(add_matrices(&pk, &m, &plain)?)
        }
        _ => return Err(HimError::Parse("--matrix needs a ciphertext matrix input".into())),
    };
    write_output(&a.out, &out.to_text())
}

fn cmd_scalar_mul(a: ScalarMulArgs) -> Result<()> {
    let pk = load_public(&a.public)?;
    let k = parse_int(&a.scalar)?;
    let out = match Doc::load(&a.input)? {
        Doc::Single(ct) => Doc::Single(scalar_mul(&pk, &ct, &k)?),
        Doc::Matrix(m) => Doc::Matrix(scalar_mul_matrix(&pk, &m, &k)?),
    };
    write_output(&a.out, &out.to_text())
}

fn cmd_bootstrap(a: BootstrapArgs) -> Result<()> {
    let pk = load_public(&a.public)?;
    let seq = match &a.offsets {
        Some(list) => {
            RationalSequence::new(list.split(',').map(|v| parse_rational(v.trim())).collect::<Result<Vec<_>>>()?)?
        }
        None => gen_rational_sequence(2, &mut rng_from(a.seed))?,
    };
    let out = match Doc::load(&a.input)? {
        Doc::Single(ct) => Doc::Single(bootstrap(&pk, &ct, &seq)?),
        Doc::Matrix(m) => Doc::Matrix(bootstrap_matrix(&pk, &m, &seq)?),
    };
    write_output(&a.out, &out.to_text())
}

fn cmd_unbootstrap(a: UnaryArgs) -> Result<()> {
    let out = match Doc::load(&a.input)? {
        Doc::Single(ct) => Doc::Single(unbootstrap(&ct)?),
        Doc::Matrix(m) => {
            let entries = m.entries().iter().map(unbootstrap).collect::<Result<Vec<_>>>()?;
            Doc::Matrix(him::CipherMatrix::new(m.rows(), m.cols(), entries)?)
        }
    };
    write_output(&a.out, &out.to_text())
}

fn cmd_decrypt(a: DecryptArgs) -> Result<()> {
    let keys = load_secret(&a.private)?;
    match Doc::load(&a.input)? {
        Doc::Single(ct) => write_output(&a.out, &format!("{}\n", decrypt(&keys, &ct)?)),
        Doc::Matrix(_) => Err(HimError::Parse("input is a matrix; use decrypt-matrix".into())),
    }
}

fn cmd_decrypt_matrix(a: DecryptArgs) -> Result<()> {
    let keys = load_secret(&a.private)?;
    match Doc::load(&a.input)? {
        Doc::Matrix(m) => write_output(&a.out, &decrypt_matrix(&keys, &m)?.to_csv()),
        Doc::Single(_) => Err(HimError::Parse("input is a single ciphertext; use decrypt".into())),
    }
}

fn cmd_demo(json: bool) -> Result<()> {
    let run = run_demo()?;
    if json {
        print!("{}", to_json(&run));
    } else {
        print!("{}", transcript(&run));
    }
    let diffs = check_golden(&run);
    if diffs.is_empty() {
        return Ok(());
    }
    for d in &diffs {
        eprintln!("golden mismatch: {d}");
    }
    Err(HimError::VerificationFailed { phase: "demo".into(), index: diffs.len() })
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let config = BenchConfig {
        dataset_min: a.min,
        dataset_max: a.max,
        repetitions: a.reps,
        deltas: a.delta,
        gammas: a.gamma,
        betas: a.beta,
        mask_mode: a.mask.into(),
        mode: a.mode.into(),
        seed: a.seed,
        ..BenchConfig::default()
    };
    let dir = a.out.to_string_lossy().into_owned();
    let path = |name: &str| a.out.join(name).to_string_lossy().into_owned();

    if a.scaling {
        let table = scaling_probe(&config.deltas, &config)?;
        let md = table.to_markdown();
        write_output(&path("scaling.md"), &md)?;
        if a.json {
            write_output(&path("scaling.json"), &(serde_json::to_string_pretty(&table)? + "\n"))?;
        }
        print!("{md}");
        return Ok(());
    }

    let report = run_benchmark(&config)?;
    write_output(&path("bench.csv"), &emit_report(&report, ReportFormat::Csv, false)?)?;
    let md = emit_report(&report, ReportFormat::MarkdownTable, a.include_paper_rows)?;
    write_output(&path("bench.md"), &md)?;
    if a.json {
        write_output(&path("bench.json"), &emit_report(&report, ReportFormat::JsonDoc, a.include_paper_rows)?)?;
    }
    print!("{md}");
    eprintln!("reports written to {dir}");
    Ok(())
}

fn exit_code(e: &HimError) -> u8 {
    match e.root() {
        HimError::Parse(_) => 2,
        HimError::KeyMismatch { .. } => 3,
        HimError::MessageOutOfRange { .. } => 4,
        HimError::NoiseBudgetExceeded { .. } => 5,
        HimError::NonIntegerDecryption(_) => 6,
        HimError::VerificationFailed { .. } => 7,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::EncryptMatrix(a) => cmd_encrypt_matrix(a),
        Command::Add(a) => cmd_add(a),
        Command::AddPlain(a) => cmd_add_plain(a),
        Command::ScalarMul(a) => cmd_scalar_mul(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
        Command::Unbootstrap(a) => cmd_unbootstrap(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::DecryptMatrix(a) => cmd_decrypt_matrix(a),
        Command::Demo { json } => cmd_demo(json),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
