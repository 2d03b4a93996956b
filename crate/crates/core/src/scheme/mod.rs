//! Pure implementations of the four protocol phases: pre-registration
//! provisioning, user and sensor registration, login, and mutual
//! verification with key agreement.
//!
//! Every operation is a pure function over explicit state values; the
//! gateway's identity table is passed in and updated rows are returned,
//! never mutated in place. The actor harness in [`crate::netsim`] owns
//! the stores and the clocks.

pub mod formulas;

use std::collections::HashMap;
use std::fmt;

use rand_core::RngCore;
use thiserror::Error;

use crate::bitcodec::{decode_id, encode_id, CodecError, Digest, Timestamp, MAX_ID_LEN};
use formulas::*;

/// Protocol-level failures. Each variant corresponds to a check some
/// party performs; which step raises it is reported by the harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    /// The timestamp differs from the receiver's clock by at least the
    /// freshness window (strict `< delta_t` acceptance).
    #[error("stale timestamp: |{sent} - {now}| >= {delta_t}")]
    StaleTimestamp {
        sent: Timestamp,
        now: Timestamp,
        delta_t: u64,
    },
    #[error("verifier mismatch")]
    BadVerifier,
    #[error("unknown pre-registration identity")]
    UnknownPreId,
    #[error("unknown sensor identity")]
    UnknownSensor,
    #[error("card rejected: echoed verifier does not match the password verifier")]
    CardRejected,
    #[error("login rejected")]
    LoginRejected,
    #[error("expiration time disagrees with the identity table")]
    TeMismatch,
    #[error("temporal credential expired")]
    ExpiredCredential,
    #[error("gateway message rejected by sensor")]
    GwnRejected,
    #[error("sensor reply rejected")]
    SensorRejected,
    #[error("required credential has not been established yet")]
    MissingCredential,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl SchemeError {
    /// Stable machine-readable code, used in step-failure lines and
    /// key-value reports.
    pub fn code(&self) -> &'static str {
        match self {
            SchemeError::StaleTimestamp { .. } => "StaleTimestamp",
            SchemeError::BadVerifier => "BadVerifier",
            SchemeError::UnknownPreId => "UnknownPreId",
            SchemeError::UnknownSensor => "UnknownSensor",
            SchemeError::CardRejected => "CardRejected",
            SchemeError::LoginRejected => "LoginRejected",
            SchemeError::TeMismatch => "TeMismatch",
            SchemeError::ExpiredCredential => "ExpiredCredential",
            SchemeError::GwnRejected => "GwnRejected",
            SchemeError::SensorRejected => "SensorRejected",
            SchemeError::MissingCredential => "MissingCredential",
            SchemeError::Codec(CodecError::IdTooLong { .. }) => "IdTooLong",
            SchemeError::Codec(CodecError::IdNotCanonical) => "IdNotCanonical",
            SchemeError::Codec(CodecError::FieldTooLong { .. }) => "FieldTooLong",
            SchemeError::Codec(CodecError::LengthMismatch { .. }) => "LengthMismatch",
        }
    }
}

fn check_fresh(sent: Timestamp, now: Timestamp, delta_t: u64) -> Result<(), SchemeError> {
    if sent.distance(now) < delta_t {
        Ok(())
    } else {
        Err(SchemeError::StaleTimestamp { sent, now, delta_t })
    }
}

/// A party identity: 1 to 20 octets, none of them zero, so the fixed
/// 20-octet block encoding is invertible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity(Vec<u8>);

impl Identity {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, CodecError> {
        let bytes = bytes.into();
        if bytes.len() > MAX_ID_LEN {
            return Err(CodecError::IdTooLong { len: bytes.len() });
        }
        if bytes.is_empty() || bytes.contains(&0) {
            return Err(CodecError::IdNotCanonical);
        }
        Ok(Identity(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// The fixed 20-octet block this identity XORs as.
    pub fn encoded(&self) -> Digest {
        encode_id(&self.0).expect("validated at construction")
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

const MAX_FIELD_LEN: usize = (1 << 16) - 1;

fn check_field_len(bytes: &[u8]) -> Result<(), CodecError> {
    if bytes.len() > MAX_FIELD_LEN {
        return Err(CodecError::FieldTooLong { len: bytes.len() });
    }
    Ok(())
}

/// The bootstrap identity/password pair installed before registration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreCredential {
    id_pre: Identity,
    pw_pre: Vec<u8>,
}

impl PreCredential {
    pub fn new(id_pre: Identity, pw_pre: impl Into<Vec<u8>>) -> Result<Self, CodecError> {
        let pw_pre = pw_pre.into();
        check_field_len(&pw_pre)?;
        Ok(PreCredential { id_pre, pw_pre })
    }

    pub fn id_pre(&self) -> &Identity {
        &self.id_pre
    }

    pub fn pw_pre(&self) -> &[u8] {
        &self.pw_pre
    }

    /// h(id_pre ‖ pw_pre), the value the gateway stores.
    pub fn secret_hash(&self) -> Digest {
        pre_secret_hash(self.id_pre.as_bytes(), &self.pw_pre)
    }
}

/// The identity, password and registration random the user chooses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSecret {
    id: Identity,
    pw: Vec<u8>,
    r: Digest,
}

impl UserSecret {
    pub fn new(id: Identity, pw: impl Into<Vec<u8>>, r: Digest) -> Result<Self, CodecError> {
        let pw = pw.into();
        check_field_len(&pw)?;
        Ok(UserSecret { id, pw, r })
    }

    pub fn id(&self) -> &Identity {
        &self.id
    }

    pub fn pw(&self) -> &[u8] {
        &self.pw
    }

    pub fn r(&self) -> &Digest {
        &self.r
    }

    /// Q_i as the user computes it from memory plus the card random.
    pub fn password_verifier(&self) -> Digest {
        password_verifier(self.id.as_bytes(), &self.pw, &self.r)
    }
}

/// The user registration request sent over the open channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationRequest {
    pub id_pre: Vec<u8>,
    pub ts1: Timestamp,
    pub vi: Digest,
    pub ci: Digest,
    pub di: Digest,
}

/// Card contents as personalized by the gateway, before the user enters
/// the registration random.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuedCard {
    pub hq: Digest,
    pub te: Timestamp,
    pub ptc: Digest,
}

/// The gateway's registration reply: the issued card plus the echoed
/// card verifier the user checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationReply {
    pub card: IssuedCard,
    pub echo: Digest,
}

/// The completed smart card: issued contents plus the user's random.
/// This is the artifact the stolen-card attack reads out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmartCard {
    pub hq: Digest,
    pub te: Timestamp,
    pub ptc: Digest,
    pub r: Digest,
}

/// One row of the gateway's write-protected identity table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwnUserRecord {
    pub id: Identity,
    pub q: Digest,
    pub te: Timestamp,
    pub status_bit: bool,
    pub last_login: Option<Timestamp>,
}

/// Sensor-side state: the pre-configured random, replaced by the
/// temporal credential once registration finishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorSecret {
    sid: Vec<u8>,
    r: Option<Digest>,
    tc: Option<Digest>,
}

impl SensorSecret {
    pub fn new(sid: impl Into<Vec<u8>>, r: Digest) -> Result<Self, CodecError> {
        let sid = sid.into();
        check_field_len(&sid)?;
        if sid.is_empty() {
            return Err(CodecError::IdNotCanonical);
        }
        Ok(SensorSecret {
            sid,
            r: Some(r),
            tc: None,
        })
    }

    pub fn sid(&self) -> &[u8] {
        &self.sid
    }

    pub fn r(&self) -> Option<&Digest> {
        self.r.as_ref()
    }

    pub fn tc(&self) -> Option<&Digest> {
        self.tc.as_ref()
    }
}

/// Sensor registration request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorRegRequest {
    pub sid: Vec<u8>,
    pub ts2: Timestamp,
    pub vi: Digest,
}

/// Gateway reply carrying the masked sensor temporal credential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorRegReply {
    pub ts3: Timestamp,
    pub q: Digest,
    pub reg: Digest,
}

/// The login request: masked identity, verifier, masked ephemeral key,
/// and the card's credential expiry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoginRequest {
    pub did: Digest,
    pub ts4: Timestamp,
    pub c: Digest,
    pub pks: Digest,
    pub te: Timestamp,
}

/// The gateway's relay to the chosen sensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwnToSensor {
    pub ts5: Timestamp,
    pub did: Digest,
    pub did_gwn: Digest,
    pub c_gwn: Digest,
    pub pks_gwn: Digest,
}

/// The sensor's reply, broadcast to both the user and the gateway.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorReply {
    pub sid: Vec<u8>,
    pub ts6: Timestamp,
    pub c: Digest,
    pub pks: Digest,
}

/// The gateway's two private system parameters. Never transmitted; the
/// fields stay private so attack operations cannot reach them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwnKeys {
    k_user: Digest,
    k_sensor: Digest,
}

impl GwnKeys {
    pub fn new(k_user: Digest, k_sensor: Digest) -> Self {
        GwnKeys { k_user, k_sensor }
    }

    pub fn random(rng: &mut impl RngCore) -> Self {
        GwnKeys {
            k_user: random_digest(rng),
            k_sensor: random_digest(rng),
        }
    }

    pub(crate) fn user_key(&self) -> &Digest {
        &self.k_user
    }

    pub(crate) fn sensor_key(&self) -> &Digest {
        &self.k_sensor
    }
}

/// A fresh per-session ephemeral key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ephemeral(Digest);

impl Ephemeral {
    pub fn new(k: Digest) -> Self {
        Ephemeral(k)
    }

    pub fn random(rng: &mut impl RngCore) -> Self {
        Ephemeral(random_digest(rng))
    }

    pub fn digest(&self) -> &Digest {
        &self.0
    }
}

/// KEY_ij, derived independently by user, sensor and gateway. Equality
/// across the three is the end-to-end correctness oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionKey(Digest);

impl SessionKey {
    pub fn from_digest(digest: Digest) -> Self {
        SessionKey(digest)
    }

    pub fn digest(&self) -> &Digest {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

pub fn random_digest(rng: &mut impl RngCore) -> Digest {
    let mut bytes = [0u8; 20];
    rng.fill_bytes(&mut bytes);
    Digest::from_bytes(bytes)
}

/// Pre-registration store: cleartext key to stored secret hash.
pub type PreRegStore = HashMap<Vec<u8>, Digest>;

/// Build the user registration request (VI_i, CI_i, DI_i).
pub fn user_make_registration(
    pre: &PreCredential,
    secret: &UserSecret,
    ts1: Timestamp,
) -> RegistrationRequest {
    let pre_hash = pre.secret_hash();
    let q = secret.password_verifier();
    RegistrationRequest {
        id_pre: pre.id_pre().as_bytes().to_vec(),
        ts1,
        vi: timed_verifier(ts1, &pre_hash),
        ci: pre_hash.xor(&q),
        di: secret.id().encoded().xor(&pre_hash),
    }
}

/// Gateway side of user registration: verify the request, derive the
/// temporal credential, personalize the card, and produce the identity
/// table row (status bit cleared, no login recorded).
pub fn gwn_process_registration(
    req: &RegistrationRequest,
    db: &PreRegStore,
    keys: &GwnKeys,
    now: Timestamp,
    delta_t: u64,
    te: Timestamp,
) -> Result<(RegistrationReply, GwnUserRecord), SchemeError> {
    check_fresh(req.ts1, now, delta_t)?;
    let pre_hash = db.get(&req.id_pre).ok_or(SchemeError::UnknownPreId)?;
    if timed_verifier(req.ts1, pre_hash) != req.vi {
        return Err(SchemeError::BadVerifier);
    }
    let q = req.ci.xor(pre_hash);
    let id = Identity::new(decode_id(&req.di.xor(pre_hash))?)?;
    let p = credential_binding(id.as_bytes(), te);
    let tc = user_temporal_credential(keys.user_key(), &p, te);
    let hq = card_verifier(&q);
    let reply = RegistrationReply {
        card: IssuedCard {
            hq,
            te,
            ptc: tc.xor(&q),
        },
        echo: hq,
    };
    let record = GwnUserRecord {
        id,
        q,
        te,
        status_bit: false,
        last_login: None,
    };
    Ok((reply, record))
}

/// User side of card issuance: recompute h(Q_i), compare it against the
/// echo and the card copy, and enter the registration random.
pub fn user_verify_card(
    reply: &RegistrationReply,
    secret: &UserSecret,
) -> Result<SmartCard, SchemeError> {
    let expected = card_verifier(&secret.password_verifier());
    if expected != reply.echo || expected != reply.card.hq {
        return Err(SchemeError::CardRejected);
    }
    Ok(SmartCard {
        hq: reply.card.hq,
        te: reply.card.te,
        ptc: reply.card.ptc,
        r: *secret.r(),
    })
}

/// Build the sensor registration request (VI_j).
pub fn sensor_make_registration(
    s: &SensorSecret,
    ts2: Timestamp,
) -> Result<SensorRegRequest, SchemeError> {
    let r = s.r().ok_or(SchemeError::MissingCredential)?;
    let sh = sensor_secret_hash(s.sid(), r);
    Ok(SensorRegRequest {
        sid: s.sid().to_vec(),
        ts2,
        vi: timed_verifier(ts2, &sh),
    })
}

/// Gateway side of sensor registration: verify and send back the masked
/// temporal credential.
pub fn gwn_process_sensor_registration(
    req: &SensorRegRequest,
    db: &PreRegStore,
    keys: &GwnKeys,
    now: Timestamp,
    delta_t: u64,
    ts3: Timestamp,
) -> Result<SensorRegReply, SchemeError> {
    check_fresh(req.ts2, now, delta_t)?;
    let sh = db.get(&req.sid).ok_or(SchemeError::UnknownSensor)?;
    if timed_verifier(req.ts2, sh) != req.vi {
        return Err(SchemeError::BadVerifier);
    }
    let tc = sensor_temporal_credential(keys.sensor_key(), &req.sid);
    Ok(SensorRegReply {
        ts3,
        q: timed_verifier(ts3, sh),
        reg: reg_mask(sh, ts3).xor(&tc),
    })
}

/// Sensor side of registration completion: verify the reply, unmask and
/// store the temporal credential, and erase the pre-configured random.
pub fn sensor_finish_registration(
    s: &SensorSecret,
    reply: &SensorRegReply,
    now: Timestamp,
    delta_t: u64,
) -> Result<SensorSecret, SchemeError> {
    let r = s.r().ok_or(SchemeError::MissingCredential)?;
    check_fresh(reply.ts3, now, delta_t)?;
    let sh = sensor_secret_hash(s.sid(), r);
    if timed_verifier(reply.ts3, &sh) != reply.q {
        return Err(SchemeError::BadVerifier);
    }
    Ok(SensorSecret {
        sid: s.sid().to_vec(),
        r: None,
        tc: Some(reply.reg.xor(&reg_mask(&sh, reply.ts3))),
    })
}

/// Build the login request. The temporal credential is reconstructed
/// from the card: TC_i = PTC_i ⊕ Q_i.
pub fn user_login(
    card: &SmartCard,
    secret: &UserSecret,
    k_i: &Ephemeral,
    ts4: Timestamp,
) -> LoginRequest {
    let q = secret.password_verifier();
    let tc = card.ptc.xor(&q);
    LoginRequest {
        did: secret.id().encoded().xor(&login_mask(&tc, ts4)),
        ts4,
        c: login_verifier(&q, ts4, &tc),
        pks: k_i.digest().xor(&ephemeral_mask(&tc, ts4)),
        te: card.te,
    }
}

/// A gateway-accepted login: the relay message for the sensor, the
/// recovered user ephemeral, and the updated identity table row.
#[derive(Debug, Clone)]
pub struct LoginAcceptance {
    pub relay: GwnToSensor,
    pub k_i: Digest,
    pub record: GwnUserRecord,
    pub record_index: usize,
}

/// Gateway side of login. The masked identity cannot be unmasked without
/// the temporal credential, and the credential cannot be recomputed
/// without the identity, so the gateway walks its identity table and
/// accepts the unique row whose credential unmasks the request to that
/// row's own identity.
pub fn gwn_process_login(
    req: &LoginRequest,
    records: &[GwnUserRecord],
    keys: &GwnKeys,
    now: Timestamp,
    delta_t: u64,
    sensor_sid: &[u8],
    ts5: Timestamp,
) -> Result<LoginAcceptance, SchemeError> {
    check_fresh(req.ts4, now, delta_t)?;
    let mut resolved: Option<(usize, Digest)> = None;
    for (index, record) in records.iter().enumerate() {
        let p = credential_binding(record.id.as_bytes(), record.te);
        let tc_star = user_temporal_credential(keys.user_key(), &p, record.te);
        if req.did.xor(&login_mask(&tc_star, req.ts4)) == record.id.encoded() {
            if resolved.is_some() {
                return Err(SchemeError::LoginRejected);
            }
            resolved = Some((index, tc_star));
        }
    }
    let (record_index, tc_star) = resolved.ok_or(SchemeError::LoginRejected)?;
    let record = &records[record_index];
    if req.te != record.te {
        return Err(SchemeError::TeMismatch);
    }
    if now >= record.te {
        return Err(SchemeError::ExpiredCredential);
    }
    if login_verifier(&record.q, req.ts4, &tc_star) != req.c {
        return Err(SchemeError::LoginRejected);
    }
    let k_i = req.pks.xor(&ephemeral_mask(&tc_star, req.ts4));
    let tc_j = sensor_temporal_credential(keys.sensor_key(), sensor_sid);
    let relay = GwnToSensor {
        ts5,
        did: req.did,
        did_gwn: record.id.encoded().xor(&relay_identity_mask(&req.did, &tc_j, ts5)),
        c_gwn: relay_verifier(record.id.as_bytes(), &tc_j, ts5),
        pks_gwn: k_i.xor(&relay_ephemeral_mask(&tc_j, ts5)),
    };
    let mut updated = record.clone();
    updated.status_bit = true;
    updated.last_login = Some(req.ts4);
    Ok(LoginAcceptance {
        relay,
        k_i,
        record: updated,
        record_index,
    })
}

/// Sensor side of login: authenticate the gateway, recover the user's
/// ephemeral key, and reply with its own masked ephemeral.
pub fn sensor_process(
    msg: &GwnToSensor,
    s: &SensorSecret,
    k_j: &Ephemeral,
    now: Timestamp,
    delta_t: u64,
    ts6: Timestamp,
) -> Result<(SensorReply, Digest), SchemeError> {
    let tc = s.tc().ok_or(SchemeError::MissingCredential)?;
    check_fresh(msg.ts5, now, delta_t)?;
    let id_block = msg.did_gwn.xor(&relay_identity_mask(&msg.did, tc, msg.ts5));
    let id = decode_id(&id_block).map_err(|_| SchemeError::GwnRejected)?;
    if relay_verifier(&id, tc, msg.ts5) != msg.c_gwn {
        return Err(SchemeError::GwnRejected);
    }
    let k_i = msg.pks_gwn.xor(&relay_ephemeral_mask(tc, msg.ts5));
    let reply = SensorReply {
        sid: s.sid().to_vec(),
        ts6,
        c: sensor_verifier(k_j.digest(), &id, s.sid(), ts6),
        pks: k_j.digest().xor(&reply_ephemeral_mask(&k_i, ts6)),
    };
    Ok((reply, k_i))
}

/// Verify the sensor reply and derive the session key. Run identically
/// by the user and by the gateway.
pub fn finalize(
    reply: &SensorReply,
    k_i: &Digest,
    expected_id: &Identity,
    expected_sid: &[u8],
    now: Timestamp,
    delta_t: u64,
) -> Result<SessionKey, SchemeError> {
    check_fresh(reply.ts6, now, delta_t)?;
    let k_j = reply.pks.xor(&reply_ephemeral_mask(k_i, reply.ts6));
    if sensor_verifier(&k_j, expected_id.as_bytes(), expected_sid, reply.ts6) != reply.c {
        return Err(SchemeError::SensorRejected);
    }
    Ok(SessionKey(session_key(k_i, &k_j)))
}

/// The sensor's own session key derivation from the ephemerals.
pub fn sensor_session_key(k_i: &Digest, k_j: &Ephemeral) -> SessionKey {
    SessionKey(session_key(k_i, k_j.digest()))
}

#[cfg(test)]
mod tests;
