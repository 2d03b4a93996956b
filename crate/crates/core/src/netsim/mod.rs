//! Deterministic actor harness: drives the user (with smart card),
//! gateway and sensor state machines over a simulated channel that
//! records every message into a [`Transcript`] and advances a shared
//! clock one step per hop.
//!
//! Scenarios are fully seeded; the same [`ScenarioConfig`] always yields
//! a byte-identical transcript. Faults (bit flips, delays, drops) are
//! scripted per message kind and applied in transit, which is where a
//! channel adversary would apply them.

pub mod transcript;

use std::fmt;

use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

use crate::bitcodec::{decode_ts, encode_ts, Digest, Timestamp};
use crate::scheme::{
    self, Ephemeral, GwnKeys, GwnUserRecord, Identity, LoginRequest, PreCredential, PreRegStore,
    SchemeError, SensorReply, SensorSecret, SessionKey, SmartCard, UserSecret,
};
use transcript::{ActorId, MessageKind, Payload, Transcript, WireMessage};

/// Protocol steps, used to label where a scenario failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    U1,
    U2,
    U3,
    S1,
    S2,
    S3,
    A1,
    A2,
    A3,
    A4User,
    A4Gwn,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Step::U1 => "U-1",
            Step::U2 => "U-2",
            Step::U3 => "U-3",
            Step::S1 => "S-1",
            Step::S2 => "S-2",
            Step::S3 => "S-3",
            Step::A1 => "A-1",
            Step::A2 => "A-2",
            Step::A3 => "A-3",
            Step::A4User => "A-4/user",
            Step::A4Gwn => "A-4/gwn",
        };
        f.write_str(s)
    }
}

/// A scenario failure: a protocol rejection at a labeled step, a timeout
/// on a dropped message, or an unusable fault script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    Step { step: Step, source: SchemeError },
    Timeout { step: Step, waiting: MessageKind },
    BadFault { reason: String },
}

impl SimError {
    pub fn step(&self) -> Option<Step> {
        match self {
            SimError::Step { step, .. } | SimError::Timeout { step, .. } => Some(*step),
            SimError::BadFault { .. } => None,
        }
    }

    /// Stable failure code ("LoginRejected", "Timeout", ...).
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Step { source, .. } => source.code(),
            SimError::Timeout { .. } => "Timeout",
            SimError::BadFault { .. } => "BadFault",
        }
    }
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Step { step, source } => write!(f, "{} at {}", source.code(), step),
            SimError::Timeout { step, waiting } => {
                write!(f, "Timeout at {} waiting for {}", step, waiting)
            }
            SimError::BadFault { reason } => write!(f, "invalid fault: {}", reason),
        }
    }
}

impl std::error::Error for SimError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SimError::Step { source, .. } => Some(source),
            _ => None,
        }
    }
}

fn step_err(step: Step) -> impl Fn(SchemeError) -> SimError {
    move |source| SimError::Step { step, source }
}

/// What a fault does to its target message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultAction {
    /// Flip one bit of a named payload field. Bits are indexed from the
    /// most significant bit of the field's first octet.
    Flip { field: String, bit: usize },
    /// Hold the message in transit for this many extra seconds.
    Delay { seconds: u64 },
    /// Never deliver the message.
    Drop,
}

/// A scripted fault applied to every in-flight message of one kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub target: MessageKind,
    pub action: FaultAction,
}

impl Fault {
    /// Parse the CLI fault grammar:
    /// `flip:<kind>:<field>:<bit>` | `delay:<kind>:<seconds>` | `drop:<kind>`.
    pub fn parse(spec: &str) -> Result<Fault, String> {
        let parts: Vec<&str> = spec.split(':').collect();
        let kind = |token: &str| {
            MessageKind::from_token(token).ok_or_else(|| format!("unknown message kind `{token}`"))
        };
        match parts.as_slice() {
            ["flip", k, field, bit] => {
                let target = kind(k)?;
                if !field_names(target).contains(field) {
                    return Err(format!("message `{k}` has no field `{field}`"));
                }
                let bit = bit.parse::<usize>().map_err(|_| "bad bit index".to_string())?;
                Ok(Fault {
                    target,
                    action: FaultAction::Flip {
                        field: field.to_string(),
                        bit,
                    },
                })
            }
            ["delay", k, seconds] => Ok(Fault {
                target: kind(k)?,
                action: FaultAction::Delay {
                    seconds: seconds.parse().map_err(|_| "bad delay".to_string())?,
                },
            }),
            ["drop", k] => Ok(Fault {
                target: kind(k)?,
                action: FaultAction::Drop,
            }),
            _ => Err("expected flip:<kind>:<field>:<bit>, delay:<kind>:<secs> or drop:<kind>".into()),
        }
    }
}

/// Payload field names addressable by flip faults, in wire order.
pub fn field_names(kind: MessageKind) -> &'static [&'static str] {
    match kind {
        MessageKind::UserReg => &["id_pre", "ts1", "vi", "ci", "di"],
        MessageKind::UserRegReply => &["hq", "te", "ptc", "echo"],
        MessageKind::SensorReg => &["sid", "ts2", "vi"],
        MessageKind::SensorRegReply => &["ts3", "q", "reg"],
        MessageKind::Login => &["did", "ts4", "c", "pks", "te"],
        MessageKind::GwnToSensor => &["ts5", "did", "did_gwn", "c_gwn", "pks_gwn"],
        MessageKind::SensorReply => &["sid", "ts6", "c", "pks"],
    }
}

/// Field names that carry timestamps rather than hash/XOR material.
pub fn timestamp_fields(kind: MessageKind) -> &'static [&'static str] {
    match kind {
        MessageKind::UserReg => &["ts1"],
        MessageKind::UserRegReply => &["te"],
        MessageKind::SensorReg => &["ts2"],
        MessageKind::SensorRegReply => &["ts3"],
        MessageKind::Login => &["ts4", "te"],
        MessageKind::GwnToSensor => &["ts5"],
        MessageKind::SensorReply => &["ts6"],
    }
}

fn flip_ts(ts: &mut Timestamp, bit: usize) -> Result<(), String> {
    if bit >= 64 {
        return Err(format!("bit {bit} out of range for a timestamp"));
    }
    let mut bytes = encode_ts(*ts);
    bytes[bit / 8] ^= 0x80 >> (bit % 8);
    *ts = decode_ts(&bytes);
    Ok(())
}

fn flip_digest(d: &mut Digest, bit: usize) -> Result<(), String> {
    if bit >= 160 {
        return Err(format!("bit {bit} out of range for a digest"));
    }
    *d = d.flip_bit(bit);
    Ok(())
}

fn flip_bytes(bytes: &mut [u8], bit: usize) -> Result<(), String> {
    if bit >= bytes.len() * 8 {
        return Err(format!("bit {bit} out of range for a {}-octet field", bytes.len()));
    }
    bytes[bit / 8] ^= 0x80 >> (bit % 8);
    Ok(())
}

/// Flip one bit of a named field in a payload.
pub fn flip_field(payload: &mut Payload, field: &str, bit: usize) -> Result<(), String> {
    match (payload, field) {
        (Payload::UserReg(m), "id_pre") => flip_bytes(&mut m.id_pre, bit),
        (Payload::UserReg(m), "ts1") => flip_ts(&mut m.ts1, bit),
        (Payload::UserReg(m), "vi") => flip_digest(&mut m.vi, bit),
        (Payload::UserReg(m), "ci") => flip_digest(&mut m.ci, bit),
        (Payload::UserReg(m), "di") => flip_digest(&mut m.di, bit),
        (Payload::UserRegReply(m), "hq") => flip_digest(&mut m.card.hq, bit),
        (Payload::UserRegReply(m), "te") => flip_ts(&mut m.card.te, bit),
        (Payload::UserRegReply(m), "ptc") => flip_digest(&mut m.card.ptc, bit),
        (Payload::UserRegReply(m), "echo") => flip_digest(&mut m.echo, bit),
        (Payload::SensorReg(m), "sid") => flip_bytes(&mut m.sid, bit),
        (Payload::SensorReg(m), "ts2") => flip_ts(&mut m.ts2, bit),
        (Payload::SensorReg(m), "vi") => flip_digest(&mut m.vi, bit),
        (Payload::SensorRegReply(m), "ts3") => flip_ts(&mut m.ts3, bit),
        (Payload::SensorRegReply(m), "q") => flip_digest(&mut m.q, bit),
        (Payload::SensorRegReply(m), "reg") => flip_digest(&mut m.reg, bit),
        (Payload::Login(m), "did") => flip_digest(&mut m.did, bit),
        (Payload::Login(m), "ts4") => flip_ts(&mut m.ts4, bit),
        (Payload::Login(m), "c") => flip_digest(&mut m.c, bit),
        (Payload::Login(m), "pks") => flip_digest(&mut m.pks, bit),
        (Payload::Login(m), "te") => flip_ts(&mut m.te, bit),
        (Payload::GwnToSensor(m), "ts5") => flip_ts(&mut m.ts5, bit),
        (Payload::GwnToSensor(m), "did") => flip_digest(&mut m.did, bit),
        (Payload::GwnToSensor(m), "did_gwn") => flip_digest(&mut m.did_gwn, bit),
        (Payload::GwnToSensor(m), "c_gwn") => flip_digest(&mut m.c_gwn, bit),
        (Payload::GwnToSensor(m), "pks_gwn") => flip_digest(&mut m.pks_gwn, bit),
        (Payload::SensorReply(m), "sid") => flip_bytes(&mut m.sid, bit),
        (Payload::SensorReply(m), "ts6") => flip_ts(&mut m.ts6, bit),
        (Payload::SensorReply(m), "c") => flip_digest(&mut m.c, bit),
        (Payload::SensorReply(m), "pks") => flip_digest(&mut m.pks, bit),
        (payload, _) => Err(format!(
            "message `{}` has no field `{}`",
            payload.kind(),
            field
        )),
    }
}

/// Everything that determines a scenario: the seed, the clock model and
/// the fault script. Identical configs replay identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Freshness window in seconds; acceptance is strict (`< delta_t`).
    pub delta_t: u64,
    /// Seconds the shared clock advances per hop.
    pub clock_step: u64,
    /// Seconds from issuance to credential expiry.
    pub credential_lifetime: u64,
    pub user_skew: i64,
    pub gwn_skew: i64,
    pub sensor_skew: i64,
    pub faults: Vec<Fault>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            delta_t: 5,
            clock_step: 1,
            credential_lifetime: 1_000_000,
            user_skew: 0,
            gwn_skew: 0,
            sensor_skew: 0,
            faults: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn with_seed(seed: u64) -> Self {
        ScenarioConfig {
            seed,
            ..Default::default()
        }
    }
}

/// Fixed provisioning data, for scenarios that need pinned credentials
/// instead of seed-derived ones.
#[derive(Debug, Clone)]
pub struct Provisioning {
    pub keys: GwnKeys,
    pub pre: PreCredential,
    pub secret: UserSecret,
    pub sid: Vec<u8>,
    pub sensor_r: Digest,
}

struct Gateway {
    keys: GwnKeys,
    user_prereg: PreRegStore,
    sensor_prereg: PreRegStore,
    records: Vec<GwnUserRecord>,
}

struct UserActor {
    pre: PreCredential,
    secret: UserSecret,
    card: Option<SmartCard>,
}

struct SensorActor {
    state: SensorSecret,
}

/// Outcome of an honest login session: the three independently derived
/// session keys and the accepted request's timestamp.
#[derive(Debug, Clone)]
pub struct LoginOutcome {
    pub user_key: SessionKey,
    pub sensor_key: SessionKey,
    pub gwn_key: SessionKey,
    pub ts4: Timestamp,
    pub gwn_accepted_user: bool,
    pub gwn_accepted_sensor: bool,
}

/// Outcome of a login injected from outside the user actor: the sensor
/// reply the adversary can observe, plus the keys the legitimate
/// verifiers derived.
#[derive(Debug, Clone)]
pub struct InjectedLogin {
    pub reply: SensorReply,
    pub sensor_key: SessionKey,
    pub gwn_key: SessionKey,
}

/// A login carried through the A-1..A-3 pipeline, ready for A-4.
struct RelayedLogin {
    reply: SensorReply,
    ts4: Timestamp,
    gwn_k_i: Digest,
    gwn_expected_id: Identity,
    sid: Vec<u8>,
    sensor_k_i: Digest,
    sensor_key: SessionKey,
}

/// One user, one gateway, one sensor on a shared recorded channel.
pub struct World {
    cfg: ScenarioConfig,
    rng: ChaCha20Rng,
    now: Timestamp,
    transcript: Transcript,
    gateway: Gateway,
    user: UserActor,
    sensor: SensorActor,
}

const ID_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

fn random_identity(rng: &mut ChaCha20Rng, prefix: &str) -> Identity {
    use rand_core::RngCore;
    let len = 1 + (rng.next_u32() as usize) % (19 - prefix.len());
    let mut bytes = prefix.as_bytes().to_vec();
    for _ in 0..len {
        bytes.push(ID_ALPHABET[(rng.next_u32() as usize) % ID_ALPHABET.len()]);
    }
    Identity::new(bytes).expect("alphabet is zero-free")
}

fn random_password(rng: &mut ChaCha20Rng) -> Vec<u8> {
    use rand_core::RngCore;
    let len = 4 + (rng.next_u32() as usize) % 12;
    (0..len)
        .map(|_| ID_ALPHABET[(rng.next_u32() as usize) % ID_ALPHABET.len()])
        .collect()
}

impl World {
    /// Provision a deployment with seed-derived credentials. The
    /// pre-registration phase writes directly into the gateway stores;
    /// nothing crosses the channel until registration.
    pub fn new(cfg: ScenarioConfig) -> World {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        let keys = GwnKeys::random(&mut rng);
        let pre = PreCredential::new(random_identity(&mut rng, "p"), random_password(&mut rng))
            .expect("generated password fits");
        let secret = UserSecret::new(
            random_identity(&mut rng, "u"),
            random_password(&mut rng),
            scheme::random_digest(&mut rng),
        )
        .expect("generated password fits");
        let sid = random_identity(&mut rng, "s").as_bytes().to_vec();
        let sensor_r = scheme::random_digest(&mut rng);
        let provisioning = Provisioning {
            keys,
            pre,
            secret,
            sid,
            sensor_r,
        };
        World::from_parts(cfg, provisioning, rng)
    }

    /// Provision with pinned credentials.
    pub fn with_provisioning(cfg: ScenarioConfig, provisioning: Provisioning) -> World {
        let rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        World::from_parts(cfg, provisioning, rng)
    }

    fn from_parts(cfg: ScenarioConfig, p: Provisioning, rng: ChaCha20Rng) -> World {
        let mut user_prereg = PreRegStore::new();
        user_prereg.insert(p.pre.id_pre().as_bytes().to_vec(), p.pre.secret_hash());
        let mut sensor_prereg = PreRegStore::new();
        sensor_prereg.insert(
            p.sid.clone(),
            scheme::formulas::sensor_secret_hash(&p.sid, &p.sensor_r),
        );
        let sensor_state = SensorSecret::new(p.sid, p.sensor_r).expect("valid sid");
        World {
            cfg,
            rng,
            now: Timestamp(0),
            transcript: Transcript::default(),
            gateway: Gateway {
                keys: p.keys,
                user_prereg,
                sensor_prereg,
                records: Vec::new(),
            },
            user: UserActor {
                pre: p.pre,
                secret: p.secret,
                card: None,
            },
            sensor: SensorActor {
                state: sensor_state,
            },
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    /// The shared simulated clock (readable by anyone, including an
    /// adversary forging timestamps).
    pub fn now(&self) -> Timestamp {
        self.now
    }

    /// Advance the shared clock, e.g. to model an adversary sitting on a
    /// captured message before replaying it.
    pub fn advance(&mut self, seconds: u64) {
        self.now = self.now.plus(seconds);
    }

    /// An actor's local clock: shared time plus its configured skew.
    pub fn local(&self, actor: ActorId) -> Timestamp {
        let skew = match actor {
            ActorId::User => self.cfg.user_skew,
            ActorId::Gateway => self.cfg.gwn_skew,
            ActorId::Sensor => self.cfg.sensor_skew,
            ActorId::Adversary => 0,
        };
        Timestamp((self.now.seconds() as i64).saturating_add(skew).max(0) as u64)
    }

    pub fn user_card(&self) -> Option<&SmartCard> {
        self.user.card.as_ref()
    }

    pub fn user_secret(&self) -> &UserSecret {
        &self.user.secret
    }

    pub fn pre_credential(&self) -> &PreCredential {
        &self.user.pre
    }

    pub fn sensor_sid(&self) -> &[u8] {
        self.sensor.state.sid()
    }

    pub fn sensor_state(&self) -> &SensorSecret {
        &self.sensor.state
    }

    /// The gateway's identity table row for the provisioned user.
    pub fn user_record(&self) -> Option<&GwnUserRecord> {
        self.gateway
            .records
            .iter()
            .find(|r| r.id == *self.user.secret.id())
    }

    /// Send a payload through the channel: apply faults, record the wire
    /// state, advance the clock one hop. A dropped message still appears
    /// on the wire but is never delivered; the scenario times out once
    /// the initiator has waited past the freshness window.
    fn transmit(
        &mut self,
        sender: ActorId,
        receivers: &[ActorId],
        payload: Payload,
        await_step: Step,
    ) -> Result<Payload, SimError> {
        let sent_at = self.local(sender);
        let mut payload = payload;
        let mut extra_delay = 0u64;
        let mut dropped = false;
        for fault in &self.cfg.faults {
            if fault.target != payload.kind() {
                continue;
            }
            match &fault.action {
                FaultAction::Flip { field, bit } => {
                    flip_field(&mut payload, field, *bit)
                        .map_err(|reason| SimError::BadFault { reason })?;
                }
                FaultAction::Delay { seconds } => extra_delay += seconds,
                FaultAction::Drop => dropped = true,
            }
        }
        let kind = payload.kind();
        self.transcript.push(WireMessage {
            sender,
            receivers: receivers.to_vec(),
            sent_at,
            payload: payload.clone(),
        });
        if dropped {
            self.now = self.now.plus(self.cfg.delta_t + 1);
            return Err(SimError::Timeout {
                step: await_step,
                waiting: kind,
            });
        }
        self.now = self.now.plus(self.cfg.clock_step + extra_delay);
        Ok(payload)
    }

    /// Registration phase for the user: U-1 through U-3.
    pub fn run_user_registration(&mut self) -> Result<(), SimError> {
        let ts1 = self.local(ActorId::User);
        let request = scheme::user_make_registration(&self.user.pre, &self.user.secret, ts1);
        let wire = self.transmit(
            ActorId::User,
            &[ActorId::Gateway],
            Payload::UserReg(request),
            Step::U2,
        )?;
        let Payload::UserReg(request) = wire else {
            unreachable!()
        };

        let gwn_now = self.local(ActorId::Gateway);
        let te = gwn_now.plus(self.cfg.credential_lifetime);
        let (reply, record) = scheme::gwn_process_registration(
            &request,
            &self.gateway.user_prereg,
            &self.gateway.keys,
            gwn_now,
            self.cfg.delta_t,
            te,
        )
        .map_err(step_err(Step::U2))?;
        self.upsert_record(record);

        let wire = self.transmit(
            ActorId::Gateway,
            &[ActorId::User],
            Payload::UserRegReply(reply),
            Step::U3,
        )?;
        let Payload::UserRegReply(reply) = wire else {
            unreachable!()
        };
        let card =
            scheme::user_verify_card(&reply, &self.user.secret).map_err(step_err(Step::U3))?;
        self.user.card = Some(card);
        Ok(())
    }

    /// Registration phase for the sensor: S-1 through S-3.
    pub fn run_sensor_registration(&mut self) -> Result<(), SimError> {
        let ts2 = self.local(ActorId::Sensor);
        let request = scheme::sensor_make_registration(&self.sensor.state, ts2)
            .map_err(step_err(Step::S1))?;
        let wire = self.transmit(
            ActorId::Sensor,
            &[ActorId::Gateway],
            Payload::SensorReg(request),
            Step::S2,
        )?;
        let Payload::SensorReg(request) = wire else {
            unreachable!()
        };

        let gwn_now = self.local(ActorId::Gateway);
        let reply = scheme::gwn_process_sensor_registration(
            &request,
            &self.gateway.sensor_prereg,
            &self.gateway.keys,
            gwn_now,
            self.cfg.delta_t,
            gwn_now,
        )
        .map_err(step_err(Step::S2))?;

        let wire = self.transmit(
            ActorId::Gateway,
            &[ActorId::Sensor],
            Payload::SensorRegReply(reply),
            Step::S3,
        )?;
        let Payload::SensorRegReply(reply) = wire else {
            unreachable!()
        };
        let updated = scheme::sensor_finish_registration(
            &self.sensor.state,
            &reply,
            self.local(ActorId::Sensor),
            self.cfg.delta_t,
        )
        .map_err(step_err(Step::S3))?;
        self.sensor.state = updated;
        Ok(())
    }

    /// Login and authentication phase: A-1 through A-4, ending with the
    /// user's, gateway's and sensor's independently derived keys.
    pub fn run_login_session(&mut self) -> Result<LoginOutcome, SimError> {
        let card = self
            .user
            .card
            .clone()
            .ok_or(SimError::Step {
                step: Step::A1,
                source: SchemeError::MissingCredential,
            })?;
        let k_i = Ephemeral::random(&mut self.rng);
        let ts4 = self.local(ActorId::User);
        let request = scheme::user_login(&card, &self.user.secret, &k_i, ts4);
        let relayed = self.relay_login(ActorId::User, request)?;

        // Both addressees of the broadcast verify; the user first.
        let user_key = scheme::finalize(
            &relayed.reply,
            k_i.digest(),
            self.user.secret.id(),
            &relayed.reply.sid,
            self.local(ActorId::User),
            self.cfg.delta_t,
        )
        .map_err(step_err(Step::A4User))?;
        let gwn_key = self.gwn_finalize(&relayed)?;
        let gwn_accepted_sensor = relayed.sensor_k_i == relayed.gwn_k_i;
        Ok(LoginOutcome {
            user_key,
            sensor_key: relayed.sensor_key,
            gwn_key,
            ts4: relayed.ts4,
            gwn_accepted_user: true,
            gwn_accepted_sensor,
        })
    }

    /// Deliver a login request (honest or forged) and run the gateway
    /// relay and the sensor through the broadcast reply. A-4
    /// verification is left to the caller so the two addressees can run
    /// it in order.
    fn relay_login(
        &mut self,
        sender: ActorId,
        request: LoginRequest,
    ) -> Result<RelayedLogin, SimError> {
        let wire = self.transmit(sender, &[ActorId::Gateway], Payload::Login(request), Step::A2)?;
        let Payload::Login(request) = wire else {
            unreachable!()
        };

        let gwn_now = self.local(ActorId::Gateway);
        let sid = self.sensor.state.sid().to_vec();
        let acceptance = scheme::gwn_process_login(
            &request,
            &self.gateway.records,
            &self.gateway.keys,
            gwn_now,
            self.cfg.delta_t,
            &sid,
            gwn_now,
        )
        .map_err(step_err(Step::A2))?;
        self.gateway.records[acceptance.record_index] = acceptance.record.clone();

        let wire = self.transmit(
            ActorId::Gateway,
            &[ActorId::Sensor],
            Payload::GwnToSensor(acceptance.relay.clone()),
            Step::A3,
        )?;
        let Payload::GwnToSensor(relay) = wire else {
            unreachable!()
        };

        let k_j = Ephemeral::random(&mut self.rng);
        let ts6 = self.local(ActorId::Sensor);
        let (reply, sensor_k_i) = scheme::sensor_process(
            &relay,
            &self.sensor.state,
            &k_j,
            self.local(ActorId::Sensor),
            self.cfg.delta_t,
            ts6,
        )
        .map_err(step_err(Step::A3))?;
        let sensor_key = scheme::sensor_session_key(&sensor_k_i, &k_j);

        let wire = self.transmit(
            ActorId::Sensor,
            &[ActorId::User, ActorId::Gateway],
            Payload::SensorReply(reply),
            Step::A4User,
        )?;
        let Payload::SensorReply(reply) = wire else {
            unreachable!()
        };

        Ok(RelayedLogin {
            reply,
            ts4: request.ts4,
            gwn_k_i: acceptance.k_i,
            gwn_expected_id: acceptance.record.id.clone(),
            sid,
            sensor_k_i,
            sensor_key,
        })
    }

    /// The gateway's own A-4 verification of the broadcast reply.
    fn gwn_finalize(&self, relayed: &RelayedLogin) -> Result<SessionKey, SimError> {
        scheme::finalize(
            &relayed.reply,
            &relayed.gwn_k_i,
            &relayed.gwn_expected_id,
            &relayed.sid,
            self.local(ActorId::Gateway),
            self.cfg.delta_t,
        )
        .map_err(step_err(Step::A4Gwn))
    }

    /// Feed a forged login request into the live deployment, as an
    /// active adversary on the channel would. The gateway and sensor run
    /// unmodified; the caller sees the broadcast reply plus the keys the
    /// honest parties derived.
    pub fn inject_login(&mut self, request: LoginRequest) -> Result<InjectedLogin, SimError> {
        let relayed = self.relay_login(ActorId::Adversary, request)?;
        let gwn_key = self.gwn_finalize(&relayed)?;
        Ok(InjectedLogin {
            reply: relayed.reply,
            sensor_key: relayed.sensor_key,
            gwn_key,
        })
    }

    fn upsert_record(&mut self, record: GwnUserRecord) {
        if let Some(existing) = self
            .gateway
            .records
            .iter_mut()
            .find(|r| r.id == record.id)
        {
            *existing = record;
        } else {
            self.gateway.records.push(record);
        }
    }
}

/// Result of a standalone user registration scenario.
#[derive(Debug)]
pub struct UserRegistrationRun {
    pub transcript: Transcript,
    pub card: SmartCard,
    pub record: GwnUserRecord,
}

/// Run user registration on a fresh deployment.
pub fn run_user_registration(cfg: &ScenarioConfig) -> Result<UserRegistrationRun, SimError> {
    let mut world = World::new(cfg.clone());
    world.run_user_registration()?;
    Ok(UserRegistrationRun {
        card: world.user_card().expect("registration succeeded").clone(),
        record: world.user_record().expect("registration succeeded").clone(),
        transcript: world.transcript.clone(),
    })
}

/// Result of a standalone sensor registration scenario.
#[derive(Debug)]
pub struct SensorRegistrationRun {
    pub transcript: Transcript,
    pub sensor: SensorSecret,
}

/// Run sensor registration on a fresh deployment.
pub fn run_sensor_registration(cfg: &ScenarioConfig) -> Result<SensorRegistrationRun, SimError> {
    let mut world = World::new(cfg.clone());
    world.run_sensor_registration()?;
    Ok(SensorRegistrationRun {
        sensor: world.sensor.state.clone(),
        transcript: world.transcript.clone(),
    })
}

/// Result of a full scenario: both registrations plus one login.
#[derive(Debug)]
pub struct LoginSessionRun {
    pub transcript: Transcript,
    pub outcome: LoginOutcome,
    pub record: GwnUserRecord,
}

/// Run both registrations and one login session on a fresh deployment.
pub fn run_login_session(cfg: &ScenarioConfig) -> Result<LoginSessionRun, SimError> {
    let mut world = World::new(cfg.clone());
    world.run_user_registration()?;
    world.run_sensor_registration()?;
    let outcome = world.run_login_session()?;
    Ok(LoginSessionRun {
        record: world.user_record().expect("login succeeded").clone(),
        transcript: world.transcript.clone(),
        outcome,
    })
}

pub use transcript::eavesdrop;
