//! `zkqr` command-line front end.
//!
//! Exit codes: 0 accept/success, 1 reject, 2 usage, 3 I/O, 4 key/params
//! mismatch, 5 undecodable QR or proof document.

use std::ffi::OsString;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::rngs::OsRng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::attacksim::{simulate_random_forgery, AttackHarness, ForgeryConfig, Scenario};
use crate::bench::{export_csv, export_json, run_bench_with, BenchConfig};
use crate::codec::{
    decode_proof_json, encode_proof_json, qr_decode_png, qr_encode, EcLevel, DEFAULT_MODULE_PX,
};
use crate::error::Error;
use crate::group::{generate_params, is_supported_bit_length, GroupParams};
use crate::identity::{keygen, write_atomic, KeyPair, KeyRegistry, PublicKey};
use crate::protocol::{verify_at, ChallengeMode, Clock, FreshnessPolicy, NonceStore, SystemClock};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_UNDECODABLE: i32 = 5;

/// Smallest modulus accepted without `--insecure-small-params`.
pub const MIN_SECURE_BITS: u32 = 256;

#[derive(Debug, Parser)]
#[command(
    name = "zkqr",
    version,
    about = "Schnorr zero-knowledge identification over QR codes"
)]
pub struct Cli {
    /// Group parameter file.
    #[arg(long, global = true, default_value = "params.json")]
    params: PathBuf,

    /// Timestamp tolerance in seconds.
    #[arg(long, global = true, default_value_t = crate::protocol::DEFAULT_DELTA_SECONDS)]
    delta: u64,

    /// Allow moduli below 256 bits (tests and simulations only).
    #[arg(long, global = true)]
    insecure_small_params: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a safe-prime group and write the parameter file.
    Params(ParamsArgs),
    /// Generate a prover key pair.
    Keygen(KeygenArgs),
    /// Register a public key with the verifier.
    Register(RegisterArgs),
    /// Produce a proof as canonical JSON and a QR code.
    Prove(ProveArgs),
    /// Verify a proof from a QR PNG or a JSON document.
    Verify(VerifyArgs),
    /// Time proof generation and verification.
    Bench(BenchArgs),
    /// Run an adversary scenario.
    Attack(AttackArgs),
}

#[derive(Debug, Args)]
struct ParamsArgs {
    #[arg(long)]
    bits: u32,
    #[arg(short, long)]
    out: PathBuf,
    /// Deterministic generation from a seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct KeygenArgs {
    /// Private key output.
    #[arg(short, long)]
    out: PathBuf,
    /// Public key output (also printed to stdout).
    #[arg(long)]
    public_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RegisterArgs {
    #[arg(long)]
    registry: PathBuf,
    #[arg(long)]
    key_id: String,
    /// Public key file written by `keygen`.
    #[arg(long)]
    public: PathBuf,
}

#[derive(Debug, Args)]
struct ProveArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    key_id: Option<String>,
    /// QR code PNG output.
    #[arg(long)]
    png: Option<PathBuf>,
    /// Proof JSON output; printed to stdout when omitted.
    #[arg(long)]
    json: Option<PathBuf>,
    /// QR block-art output.
    #[arg(long)]
    text: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MODULE_PX)]
    module_px: u32,
    #[arg(long, default_value = "M")]
    ec: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    registry: PathBuf,
    /// QR PNG or proof JSON.
    #[arg(long)]
    input: PathBuf,
    /// Persistent nonce store; defaults to `<registry>.nonces.json`.
    #[arg(long)]
    nonce_store: Option<PathBuf>,
    /// Override the verifier's clock (Unix seconds).
    #[arg(long)]
    now: Option<u64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(short = 'n', long, default_value_t = 50)]
    iterations: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    include_warmup: bool,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[arg(long)]
    scenario: String,
    #[arg(short = 'n', long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }
}

/// Default mapping for library errors surfacing from file handling.
impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Storage { .. } | Error::Parse(_) | Error::Schema(_) | Error::Encoding(_) => {
                EXIT_IO
            }
            Error::ParamsMismatch(_) => EXIT_MISMATCH,
            Error::QrDecode(_) => EXIT_UNDECODABLE,
            _ => EXIT_USAGE,
        };
        CliError::new(code, err.to_string())
    }
}

type CliResult<T = i32> = Result<T, CliError>;

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Params(a) => cmd_params(cli, a),
        Command::Keygen(a) => cmd_keygen(cli, a),
        Command::Register(a) => cmd_register(cli, a),
        Command::Prove(a) => cmd_prove(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Bench(a) => cmd_bench(cli, a),
        Command::Attack(a) => cmd_attack(cli, a),
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn guard_bits(cli: &Cli, bits: u32) -> CliResult<()> {
    if bits < MIN_SECURE_BITS && !cli.insecure_small_params {
        return Err(CliError::usage(format!(
            "{bits}-bit parameters are insecure; pass --insecure-small-params to use them for testing"
        )));
    }
    Ok(())
}

fn load_params(cli: &Cli) -> CliResult<GroupParams> {
    let bytes = read_file(&cli.params)?;
    let params = GroupParams::load_json(&bytes).map_err(|e| {
        CliError::new(EXIT_IO, format!("{}: {e}", cli.params.display()))
    })?;
    guard_bits(cli, params.bit_length())?;
    Ok(params)
}

fn policy(cli: &Cli) -> FreshnessPolicy {
    FreshnessPolicy::with_delta(cli.delta)
}

fn cmd_params(cli: &Cli, args: &ParamsArgs) -> CliResult {
    if !is_supported_bit_length(args.bits) {
        return Err(CliError::usage(format!(
            "unsupported bit length {}",
            args.bits
        )));
    }
    guard_bits(cli, args.bits)?;
    let params = match args.seed {
        Some(seed) => generate_params(args.bits, &mut ChaCha20Rng::seed_from_u64(seed))?,
        None => generate_params(args.bits, &mut OsRng)?,
    };
    write_atomic(&args.out, &params.to_canonical_json(), false)?;
    println!("wrote {}-bit parameters to {}", params.bit_length(), args.out.display());
    Ok(EXIT_OK)
}

fn cmd_keygen(cli: &Cli, args: &KeygenArgs) -> CliResult {
    let params = load_params(cli)?;
    let keypair = keygen(&params, &mut OsRng)?;
    let public = keypair.public_key().to_json();
    keypair.save_private(&args.out)?;
    if let Some(path) = &args.public_out {
        write_atomic(path, &public, false)?;
    }
    println!("{}", String::from_utf8_lossy(&public));
    Ok(EXIT_OK)
}

fn cmd_register(cli: &Cli, args: &RegisterArgs) -> CliResult {
    let params = load_params(cli)?;
    let public = PublicKey::from_json(&read_file(&args.public)?)?;
    if public.params_digest != params.digest() {
        return Err(CliError::new(
            EXIT_MISMATCH,
            "public key was generated for different group parameters",
        ));
    }
    let registry = KeyRegistry::open(&args.registry)?;
    registry.register(&args.key_id, public.y, public.params_digest)?;
    println!("registered `{}` in {}", args.key_id, args.registry.display());
    Ok(EXIT_OK)
}

fn cmd_prove(cli: &Cli, args: &ProveArgs) -> CliResult {
    let ec: EcLevel = args.ec.parse()?;
    let params = load_params(cli)?;
    let keypair = KeyPair::from_private_json(&read_file(&args.key)?, &params)?;
    let key_id = args.key_id.as_deref().filter(|id| !id.is_empty());

    let proof = crate::protocol::prove(&params, &keypair, key_id, &SystemClock, &mut OsRng)?;
    let json = encode_proof_json(&proof, params.bit_length())?;
    let qr = qr_encode(&json, ec)?;

    // everything is computed before the first write; undo earlier writes on failure
    let mut written: Vec<&Path> = Vec::new();
    let mut outputs: Vec<(&Path, Vec<u8>)> = Vec::new();
    if let Some(path) = &args.json {
        outputs.push((path, json.clone()));
    }
    if let Some(path) = &args.png {
        outputs.push((path, qr.to_png(args.module_px)?));
    }
    if let Some(path) = &args.text {
        outputs.push((path, qr.to_text().into_bytes()));
    }
    for (path, bytes) in &outputs {
        if let Err(e) = write_atomic(path, bytes, false) {
            for done in &written {
                let _ = fs::remove_file(done);
            }
            return Err(e.into());
        }
        written.push(path);
    }
    if args.json.is_none() {
        println!("{}", String::from_utf8_lossy(&json));
    }
    eprintln!(
        "proof: {} bytes, QR version {} at level {}",
        json.len(),
        qr.version(),
        qr.error_correction()
    );
    Ok(EXIT_OK)
}

fn decode_input(bytes: &[u8], bit_length: u32) -> CliResult<crate::protocol::Proof> {
    const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";
    let doc = if bytes.starts_with(PNG_MAGIC) {
        qr_decode_png(bytes).map_err(|e| CliError::new(EXIT_UNDECODABLE, e.to_string()))?
    } else {
        bytes.to_vec()
    };
    // tolerate a trailing newline on hand-written JSON files
    let doc = doc.strip_suffix(b"\n").unwrap_or(&doc);
    decode_proof_json(doc, bit_length)
        .map_err(|e| CliError::new(EXIT_UNDECODABLE, format!("proof document: {e}")))
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> CliResult {
    let params = load_params(cli)?;
    let registry = KeyRegistry::open(&args.registry)?;
    let proof = decode_input(&read_file(&args.input)?, params.bit_length())?;
    let policy = policy(cli);
    let now = match args.now {
        Some(now) => now,
        None => SystemClock.now()?,
    };

    let store_path = args.nonce_store.clone().unwrap_or_else(|| {
        let mut name = args.registry.as_os_str().to_owned();
        name.push(".nonces.json");
        PathBuf::from(name)
    });
    let mut lock_name = store_path.as_os_str().to_owned();
    lock_name.push(".lock");
    let lock = File::create(PathBuf::from(&lock_name))
        .map_err(|e| Error::storage(PathBuf::from(&lock_name), e))?;
    lock.lock()
        .map_err(|e| Error::storage(PathBuf::from(&lock_name), e))?;

    let store = NonceStore::load(&store_path, policy)?;
    store.evict_expired(now);
    let decision = verify_at(
        &params,
        &registry,
        &proof,
        now,
        &policy,
        &store,
        ChallengeMode::Full,
    );
    store.save(&store_path)?;
    drop(lock);

    println!("{decision}");
    Ok(if decision.accepted { EXIT_OK } else { EXIT_REJECT })
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> CliResult {
    if args.iterations == 0 {
        return Err(CliError::usage("iterations must be at least 1"));
    }
    let params = load_params(cli)?;
    let config = BenchConfig {
        iterations: args.iterations,
        include_warmup: args.include_warmup,
    };
    let report = run_bench_with(&params, &config, &mut OsRng)?;
    if let Some(path) = &args.csv {
        export_csv(&report, path)?;
    }
    if let Some(path) = &args.json {
        export_json(&report, path)?;
    }
    let s = &report.summary;
    println!(
        "{}-bit, {} iterations: gen median {:.6}s [{:.6}, {:.6}], verify median {:.6}s [{:.6}, {:.6}], proof {} bytes",
        report.bit_length,
        report.iterations,
        s.gen_seconds.median,
        s.gen_seconds.min,
        s.gen_seconds.max,
        s.verify_seconds.median,
        s.verify_seconds.min,
        s.verify_seconds.max,
        s.proof_bytes.max,
    );
    Ok(EXIT_OK)
}

fn cmd_attack(cli: &Cli, args: &AttackArgs) -> CliResult {
    let scenario: Scenario = args.scenario.parse()?;
    if args.trials == 0 {
        return Err(CliError::usage("trials must be at least 1"));
    }
    let params = load_params(cli)?;
    let mut rng = match args.seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_rng(OsRng).map_err(|e| Error::Entropy(e.to_string()))?,
    };
    let outcome = if scenario == Scenario::RandomForgery {
        let config = ForgeryConfig {
            allow_insecure: cli.insecure_small_params,
            ..ForgeryConfig::for_params(&params)
        };
        simulate_random_forgery(&params, args.trials, config, &mut rng)?
    } else {
        AttackHarness::new(params, policy(cli), rng)?.run(scenario, args.trials)?
    };
    let json = outcome.to_json();
    if let Some(path) = &args.report {
        write_atomic(path, &json, false)?;
    }
    print!("{}", String::from_utf8_lossy(&json));
    Ok(EXIT_OK)
}
