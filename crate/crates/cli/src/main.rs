//! Command-line front end: provision a deployment, run honest scenarios,
//! export transcripts and cards, run the attack chain against captured
//! material, and emit deterministic reports.
//!
//! Exit codes: 0 success, 1 protocol/step failure, 2 attack ran but
//! failed, 3 input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tempcred::attacks::{self, escape_bytes, Dictionary, PasswordOracle, StolenCard};
use tempcred::bitcodec::hash_op_count;
use tempcred::netsim::transcript::Transcript;
use tempcred::netsim::{Fault, ScenarioConfig, SimError, Step, World};
use tempcred::scheme::{Ephemeral, Identity, SessionKey};
use tempcred::vectors;

const DEFAULT_SEED: u64 = 42;

const EXIT_OK: u8 = 0;
const EXIT_PROTOCOL: u8 = 1;
const EXIT_ATTACK_FAILED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tempcred",
    about = "Temporal-credential authentication simulator and attack suite for wireless sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Provision one user and one sensor, run registration and one
    /// login, and report per-step verdicts.
    Demo(DemoArgs),
    /// Run an attack against captured material.
    Attack(AttackArgs),
    /// Emit the golden vector file.
    ExportVectors(ExportArgs),
    /// Write a dictionary that contains the demo passwords for a seed.
    GenDict(GenDictArgs),
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Freshness window in seconds (strict).
    #[arg(long, default_value_t = 5)]
    delta_t: u64,
    /// Fault script: `flip:<kind>:<field>:<bit>`, `delay:<kind>:<secs>`,
    /// `drop:<kind>`.
    #[arg(long)]
    fault: Vec<String>,
    /// Print secrets (passwords, credentials, keys) instead of hiding them.
    #[arg(long)]
    reveal: bool,
    /// Write the wire transcript to this file.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Write the completed smart card to this file.
    #[arg(long)]
    card: Option<PathBuf>,
    /// Write a flat key=value report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Which attack to run.
    #[arg(long, value_enum)]
    which: Which,
    /// Transcript captured from a demo run.
    #[arg(long)]
    transcript: PathBuf,
    /// Stolen card file (needed by user-pw, session-key, impersonate, full-chain).
    #[arg(long)]
    card: Option<PathBuf>,
    /// Candidate password file, one per line.
    #[arg(long)]
    dict: PathBuf,
    /// Seed of the deployment to impersonate against.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    delta_t: u64,
    #[arg(long)]
    reveal: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    PrePw,
    UserPw,
    SessionKey,
    Impersonate,
    FullChain,
}

impl Which {
    fn token(self) -> &'static str {
        match self {
            Which::PrePw => "pre-pw",
            Which::UserPw => "user-pw",
            Which::SessionKey => "session-key",
            Which::Impersonate => "impersonate",
            Which::FullChain => "full-chain",
        }
    }

    fn needs_card(self) -> bool {
        !matches!(self, Which::PrePw)
    }
}

#[derive(Args)]
struct ExportArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenDictArgs {
    /// Demo seed whose passwords the dictionary must contain.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    size: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Flat key=value report, deterministic for a fixed seed.
#[derive(Default)]
struct KvReport {
    pairs: Vec<(String, String)>,
}

impl KvReport {
    fn push(&mut self, key: &str, value: impl Into<String>) {
        self.pairs.push((key.to_string(), value.into()));
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    fn write_if(&self, path: &Option<PathBuf>) -> Result<()> {
        if let Some(path) = path {
            std::fs::write(path, self.to_text())
                .with_context(|| format!("writing report {}", path.display()))?;
        }
        Ok(())
    }
}

fn secret(reveal: bool, value: String) -> String {
    if reveal {
        value
    } else {
        "[hidden]".to_string()
    }
}

fn key_text(reveal: bool, key: &SessionKey) -> String {
    secret(reveal, key.to_hex())
}

fn read_file(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let hash_ops_before = hash_op_count();
    let result = match cli.command {
        Command::Demo(args) => cmd_demo(args),
        Command::Attack(args) => cmd_attack(args),
        Command::ExportVectors(args) => cmd_export_vectors(args),
        Command::GenDict(args) => cmd_gen_dict(args),
    };
    eprintln!(
        "wall-ms: {} hash-ops: {}",
        started.elapsed().as_millis(),
        hash_op_count() - hash_ops_before
    );
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

/// The protocol steps each phase walks through, for verdict printing.
const USER_REG_STEPS: [Step; 3] = [Step::U1, Step::U2, Step::U3];
const SENSOR_REG_STEPS: [Step; 3] = [Step::S1, Step::S2, Step::S3];
const LOGIN_STEPS: [Step; 5] = [Step::A1, Step::A2, Step::A3, Step::A4User, Step::A4Gwn];

fn print_phase(steps: &[Step], failure: Option<&SimError>) {
    for step in steps {
        match failure {
            Some(err) if err.step() == Some(*step) => {
                println!("{step}: {}", err.code());
                return;
            }
            _ => println!("{step}: ok"),
        }
    }
}

fn cmd_demo(args: DemoArgs) -> Result<u8> {
    let mut faults = Vec::new();
    for spec in &args.fault {
        faults.push(Fault::parse(spec).map_err(|e| anyhow!("fault `{spec}`: {e}"))?);
    }
    let cfg = ScenarioConfig {
        seed: args.seed,
        delta_t: args.delta_t,
        faults,
        ..Default::default()
    };
    let scenario = format!("demo-{}", args.seed);
    println!("scenario: {scenario}");
    println!("delta-t: {}", args.delta_t);

    let mut report = KvReport::default();
    report.push("scenario", scenario);
    report.push("seed", args.seed.to_string());
    report.push("delta_t", args.delta_t.to_string());

    let mut world = World::new(cfg);
    let hash_ops_before = hash_op_count();

    let mut outcome = None;
    let mut failure: Option<SimError> = None;
    for (name, steps) in [
        ("user_registration", &USER_REG_STEPS[..]),
        ("sensor_registration", &SENSOR_REG_STEPS[..]),
        ("login", &LOGIN_STEPS[..]),
    ] {
        let result = match name {
            "user_registration" => world.run_user_registration().map(|_| None),
            "sensor_registration" => world.run_sensor_registration().map(|_| None),
            _ => world.run_login_session().map(Some),
        };
        match result {
            Ok(o) => {
                print_phase(steps, None);
                report.push(&format!("phase.{name}"), "ok");
                outcome = o;
            }
            Err(err) => {
                print_phase(steps, Some(&err));
                report.push(&format!("phase.{name}"), err.code());
                failure = Some(err);
                break;
            }
        }
    }

    // Export whatever material exists even on failure; the attack suite
    // feeds on partial transcripts too.
    if let Some(path) = &args.transcript {
        std::fs::write(path, world.transcript().to_text())
            .with_context(|| format!("writing transcript {}", path.display()))?;
    }
    if let Some(path) = &args.card {
        match world.user_card() {
            Some(card) => std::fs::write(path, StolenCard::read_from(card).to_text())
                .with_context(|| format!("writing card {}", path.display()))?,
            None => eprintln!("no card to export: user registration did not complete"),
        }
    }

    if args.reveal {
        println!(
            "credentials: id={} pw={} id-pre={} pw-pre={}",
            escape_bytes(world.user_secret().id().as_bytes()),
            escape_bytes(world.user_secret().pw()),
            escape_bytes(world.pre_credential().id_pre().as_bytes()),
            escape_bytes(world.pre_credential().pw_pre()),
        );
    }

    let code = match (&failure, &outcome) {
        (Some(err), _) => {
            println!("failed: {err}");
            report.push("failure", err.to_string());
            report.push("keys_match", "false");
            EXIT_PROTOCOL
        }
        (None, Some(outcome)) => {
            let keys_match =
                outcome.user_key == outcome.sensor_key && outcome.gwn_key == outcome.sensor_key;
            println!("KEY_ij match: {keys_match}");
            report.push("keys_match", keys_match.to_string());
            report.push("user_key", key_text(args.reveal, &outcome.user_key));
            report.push("sensor_key", key_text(args.reveal, &outcome.sensor_key));
            report.push("gwn_key", key_text(args.reveal, &outcome.gwn_key));
            let record = world.user_record().expect("login succeeded");
            println!(
                "identity-table: status-bit={} last-login={}",
                record.status_bit as u8,
                record
                    .last_login
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "-".into())
            );
            report.push("status_bit", record.status_bit.to_string());
            report.push(
                "last_login",
                record
                    .last_login
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "-".into()),
            );
            if keys_match {
                EXIT_OK
            } else {
                EXIT_PROTOCOL
            }
        }
        (None, None) => unreachable!("no failure and no outcome"),
    };
    report.push("hash_ops", (hash_op_count() - hash_ops_before).to_string());
    report.push("exit", code.to_string());
    report.write_if(&args.out)?;
    Ok(code)
}

fn cmd_attack(args: AttackArgs) -> Result<u8> {
    let transcript = Transcript::parse(&read_file(&args.transcript, "transcript")?)
        .context("parsing transcript")?;
    let dict =
        Dictionary::parse(&read_file(&args.dict, "dictionary")?).context("parsing dictionary")?;
    let card = match &args.card {
        Some(path) => Some(StolenCard::parse(&read_file(path, "card")?).context("parsing card")?),
        None => None,
    };
    if args.which.needs_card() && card.is_none() {
        bail!("MissingInput: attack `{}` needs --card", args.which.token());
    }

    let scenario = format!("attack-{}-{}", args.which.token(), args.seed);
    println!("scenario: {scenario}");
    let mut report = KvReport::default();
    report.push("scenario", scenario);
    report.push("seed", args.seed.to_string());

    let mut failed = false;
    let mut input_missing: Option<String> = None;
    let reveal = args.reveal;

    // Stage 1: offline guessing of the pre-shared password from the
    // eavesdropped registration request.
    let reg = attacks::first_registration(&transcript)
        .map_err(|e| anyhow!("transcript is unusable: {e}"))?;
    let pre_report = attacks::guess_pre_password(reg, &dict);
    println!(
        "stage pre-pw: success={} guesses={} hash-ops={} recovered={}",
        pre_report.success,
        pre_report.guesses_tried,
        pre_report.hash_ops,
        pre_report
            .recovered
            .as_ref()
            .map(|pw| secret(reveal, escape_bytes(pw)))
            .unwrap_or_else(|| "-".into())
    );
    report.push("pre_pw.success", pre_report.success.to_string());
    report.push("pre_pw.guesses", pre_report.guesses_tried.to_string());
    report.push("pre_pw.hash_ops", pre_report.hash_ops.to_string());
    failed |= !pre_report.success;

    'chain: {
        if args.which == Which::PrePw || failed {
            break 'chain;
        }
        let pw_pre = pre_report.recovered.as_ref().expect("stage succeeded");

        // Stages 2-3: unmask identity and password verifier.
        let (id_bytes, q) = match attacks::recover_identity_and_verifier(reg, pw_pre) {
            Ok(pair) => pair,
            Err(err) => {
                println!("stage recover-id: failed ({err})");
                report.push("recover_id.success", "false");
                failed = true;
                break 'chain;
            }
        };
        println!(
            "stage recover-id: id={} q={}",
            escape_bytes(&id_bytes),
            secret(reveal, q.to_hex())
        );
        report.push("recover_id.success", "true");
        report.push("recover_id.id", escape_bytes(&id_bytes));

        let card = card.as_ref().expect("checked above");

        // Stage 4: guess the real password against both oracles.
        let via_verifier =
            attacks::guess_user_password(card, &id_bytes, PasswordOracle::Verifier(q), &dict);
        let via_card =
            attacks::guess_user_password(card, &id_bytes, PasswordOracle::CardDigest, &dict);
        let agree = via_verifier.recovered == via_card.recovered;
        println!(
            "stage user-pw(verifier): success={} guesses={} hash-ops={} recovered={}",
            via_verifier.success,
            via_verifier.guesses_tried,
            via_verifier.hash_ops,
            via_verifier
                .recovered
                .as_ref()
                .map(|pw| secret(reveal, escape_bytes(pw)))
                .unwrap_or_else(|| "-".into())
        );
        println!(
            "stage user-pw(card): success={} guesses={} hash-ops={} oracles-agree={}",
            via_card.success, via_card.guesses_tried, via_card.hash_ops, agree
        );
        report.push("user_pw.success", via_verifier.success.to_string());
        report.push("user_pw.guesses", via_verifier.guesses_tried.to_string());
        report.push("user_pw.hash_ops", via_verifier.hash_ops.to_string());
        report.push("user_pw.card_hash_ops", via_card.hash_ops.to_string());
        report.push("user_pw.oracles_agree", agree.to_string());
        failed |= !via_verifier.success || !via_card.success || !agree;
        if args.which == Which::UserPw || failed {
            break 'chain;
        }

        // Stage 5: unmask the temporal credential.
        let tc = attacks::extract_temporal_credential(card, &q);
        println!("stage extract-tc: tc={}", secret(reveal, tc.to_hex()));
        report.push("extract_tc.success", "true");

        // Stage 6: recover every eavesdropped session key.
        let sessions = attacks::sessions(&transcript);
        if args.which == Which::SessionKey || args.which == Which::FullChain {
            if sessions.is_empty() {
                input_missing = Some("transcript has no login session to recover".into());
                break 'chain;
            }
            for (index, (login, reply)) in sessions.iter().enumerate() {
                let key = attacks::recover_session_key(login, reply, &tc);
                println!(
                    "stage session-key[{index}]: recovered={}",
                    key_text(reveal, &key)
                );
                report.push(&format!("session_key.{index}"), key_text(reveal, &key));
            }
            report.push("session_key.count", sessions.len().to_string());
        }
        if args.which == Which::SessionKey {
            break 'chain;
        }

        // Stage 7: impersonate the victim against a rebuilt deployment.
        let id = match Identity::new(id_bytes.clone()) {
            Ok(id) => id,
            Err(err) => {
                println!("stage impersonate: recovered identity unusable ({err})");
                failed = true;
                break 'chain;
            }
        };
        let cfg = ScenarioConfig {
            seed: args.seed,
            delta_t: args.delta_t,
            ..Default::default()
        };
        let mut world = World::new(cfg);
        world
            .run_user_registration()
            .and_then(|_| world.run_sensor_registration())
            .map_err(|err| anyhow!("deployment rebuild failed: {err}"))?;
        let mut adversary_rng =
            <rand_chacha::ChaCha20Rng as rand_core::SeedableRng>::seed_from_u64(
                args.seed ^ 0xadf0_0ba5,
            );
        let k_a = Ephemeral::random(&mut adversary_rng);
        let outcome = attacks::impersonate_user(&mut world, &id, &q, &tc, card.te, &k_a);
        let established = outcome.key_established();
        println!(
            "stage impersonate: accepted={} key-established={}{}",
            outcome.accepted(),
            established,
            outcome
                .rejection
                .as_ref()
                .map(|r| format!(" rejection={r}"))
                .unwrap_or_default()
        );
        report.push("impersonate.accepted", outcome.accepted().to_string());
        report.push("impersonate.key_established", established.to_string());
        if let Some(key) = &outcome.adversary_key {
            report.push("impersonate.key", key_text(reveal, key));
        }
        failed |= !outcome.accepted() || !established;
    }

    if let Some(reason) = input_missing {
        bail!("MissingInput: {reason}");
    }
    let verdict = if failed { "failed" } else { "success" };
    println!("{}: {verdict}", args.which.token());
    report.push("verdict", verdict);
    let code = if failed { EXIT_ATTACK_FAILED } else { EXIT_OK };
    report.push("exit", code.to_string());
    report.write_if(&args.out)?;
    Ok(code)
}

fn cmd_export_vectors(args: ExportArgs) -> Result<u8> {
    let text = vectors::render_golden_vectors();
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing vectors {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn cmd_gen_dict(args: GenDictArgs) -> Result<u8> {
    use rand_core::{RngCore, SeedableRng};
    if args.size < 2 {
        bail!("dictionary size must be at least 2");
    }
    // Reconstruct the demo deployment to learn its passwords, then bury
    // them at seeded positions among decoys.
    let world = World::new(ScenarioConfig::with_seed(args.seed));
    let pw_pre = world.pre_credential().pw_pre().to_vec();
    let pw = world.user_secret().pw().to_vec();
    let mut candidates: Vec<Vec<u8>> = (0..args.size - 2)
        .map(|i| format!("candidate-{i:06}").into_bytes())
        .collect();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(args.seed.wrapping_add(args.size as u64));
    let at = (rng.next_u64() as usize) % (candidates.len() + 1);
    candidates.insert(at, pw_pre);
    let at = (rng.next_u64() as usize) % (candidates.len() + 1);
    candidates.insert(at, pw);
    std::fs::write(&args.out, Dictionary::new(candidates).to_text())
        .with_context(|| format!("writing dictionary {}", args.out.display()))?;
    Ok(EXIT_OK)
}
