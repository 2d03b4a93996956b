//! The cryptanalysis suite: everything here works from what a channel
//! adversary can legitimately obtain — eavesdropped transcript payloads,
//! a one-shot read of a stolen smart card, and a password dictionary.
//! No operation takes gateway keys or party secrets.
//!
//! The chain: the registration request authenticates itself with a hash
//! of the pre-shared identity/password pair, so its verifier field is an
//! offline guessing oracle for the pre-password. The recovered pre-hash
//! unmasks the victim's identity and password verifier from the same
//! message; the card random then turns the password verifier into a
//! guessing oracle for the real password; the card's masked credential
//! unmasks to the temporal credential; and the temporal credential
//! opens every login session's ephemerals, hence every session key, and
//! lets the adversary log in as the victim.

pub mod dictionary;

use thiserror::Error;

use crate::bitcodec::{decode_id, CodecError, Digest, Timestamp};
use crate::netsim::transcript::{eavesdrop, MessageKind, Payload, Transcript};
use crate::netsim::{SimError, World};
use crate::scheme::formulas::{
    card_verifier, ephemeral_mask, login_mask, login_verifier, password_verifier,
    pre_secret_hash, reply_ephemeral_mask, session_key, timed_verifier,
};
use crate::scheme::{
    Ephemeral, Identity, LoginRequest, RegistrationRequest, SensorReply, SessionKey, SmartCard,
};

pub use dictionary::{escape_bytes, unescape_bytes, Dictionary, DictionaryParseError};

/// Result of a guessing attack: whether it succeeded, what it recovered,
/// and what it cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport<T> {
    pub success: bool,
    pub recovered: Option<T>,
    pub guesses_tried: u64,
    pub hash_ops: u64,
}

/// Smart card contents as read out by an adversary who held the card
/// for a while. Byte-identical to the victim's card; the victim keeps
/// using the card unaware.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StolenCard {
    pub hq: Digest,
    pub te: Timestamp,
    pub ptc: Digest,
    pub r: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("card file: {reason}")]
pub struct CardParseError {
    pub reason: String,
}

impl StolenCard {
    /// The read-out oracle: memory contents, nothing else.
    pub fn read_from(card: &SmartCard) -> StolenCard {
        StolenCard {
            hq: card.hq,
            te: card.te,
            ptc: card.ptc,
            r: card.r,
        }
    }

    /// Card file format: the four fields hex-encoded, one per line, in
    /// the order hq, te, ptc, r.
    pub fn to_text(&self) -> String {
        format!(
            "{}\n{}\n{}\n{}\n",
            self.hq.to_hex(),
            hex::encode(crate::bitcodec::encode_ts(self.te)),
            self.ptc.to_hex(),
            self.r.to_hex()
        )
    }

    pub fn parse(text: &str) -> Result<StolenCard, CardParseError> {
        let err = |reason: &str| CardParseError {
            reason: reason.to_string(),
        };
        let lines: Vec<&str> = text.lines().map(str::trim).collect();
        if lines.len() != 4 {
            return Err(err("expected 4 lines: hq, te, ptc, r"));
        }
        let te_bytes: [u8; 8] = hex::decode(lines[1])
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| err("bad te"))?;
        Ok(StolenCard {
            hq: Digest::from_hex(lines[0]).ok_or_else(|| err("bad hq"))?,
            te: crate::bitcodec::decode_ts(&te_bytes),
            ptc: Digest::from_hex(lines[2]).ok_or_else(|| err("bad ptc"))?,
            r: Digest::from_hex(lines[3]).ok_or_else(|| err("bad r"))?,
        })
    }
}

/// Offline guessing of the pre-shared password from one eavesdropped
/// registration request: for each candidate, recompute the request
/// verifier (two hashes) and compare against the eavesdropped one.
pub fn guess_pre_password(reg: &RegistrationRequest, dict: &Dictionary) -> AttackReport<Vec<u8>> {
    let mut guesses_tried = 0;
    let mut hash_ops = 0;
    for candidate in dict.candidates() {
        guesses_tried += 1;
        let pre_hash = pre_secret_hash(&reg.id_pre, candidate);
        let vi_guess = timed_verifier(reg.ts1, &pre_hash);
        hash_ops += 2;
        if vi_guess == reg.vi {
            return AttackReport {
                success: true,
                recovered: Some(candidate.clone()),
                guesses_tried,
                hash_ops,
            };
        }
    }
    AttackReport {
        success: false,
        recovered: None,
        guesses_tried,
        hash_ops,
    }
}

/// With the pre-password known, unmask the victim's identity and
/// password verifier from the same registration request.
pub fn recover_identity_and_verifier(
    reg: &RegistrationRequest,
    pw_pre: &[u8],
) -> Result<(Vec<u8>, Digest), CodecError> {
    let pre_hash = pre_secret_hash(&reg.id_pre, pw_pre);
    let id = decode_id(&reg.di.xor(&pre_hash))?;
    let q = reg.ci.xor(&pre_hash);
    Ok((id, q))
}

/// How a guessed user password is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PasswordOracle {
    /// Compare h(id ‖ pw* ‖ r) against the unmasked password verifier
    /// (needs the eavesdropped registration). One hash per guess.
    Verifier(Digest),
    /// Compare h(h(id ‖ pw* ‖ r)) against the card's own stored check
    /// value (needs only the card). Two hashes per guess.
    CardDigest,
}

/// Offline guessing of the victim's real password, using the stolen
/// card's random plus one of the two verification oracles.
pub fn guess_user_password(
    card: &StolenCard,
    id: &[u8],
    oracle: PasswordOracle,
    dict: &Dictionary,
) -> AttackReport<Vec<u8>> {
    let mut guesses_tried = 0;
    let mut hash_ops = 0;
    for candidate in dict.candidates() {
        guesses_tried += 1;
        let q_guess = password_verifier(id, candidate, &card.r);
        hash_ops += 1;
        let matched = match oracle {
            PasswordOracle::Verifier(q) => q_guess == q,
            PasswordOracle::CardDigest => {
                hash_ops += 1;
                card_verifier(&q_guess) == card.hq
            }
        };
        if matched {
            return AttackReport {
                success: true,
                recovered: Some(candidate.clone()),
                guesses_tried,
                hash_ops,
            };
        }
    }
    AttackReport {
        success: false,
        recovered: None,
        guesses_tried,
        hash_ops,
    }
}

/// Unmask the victim's temporal credential from the stolen card:
/// TC_i = PTC_i ⊕ Q_i.
pub fn extract_temporal_credential(card: &StolenCard, q: &Digest) -> Digest {
    card.ptc.xor(q)
}

/// Recover the session key of an eavesdropped login session given the
/// victim's temporal credential: unmask K_i from the login request,
/// then K_j from the sensor reply, then KEY_ij = h(K_i ⊕ K_j).
pub fn recover_session_key(
    login: &LoginRequest,
    reply: &SensorReply,
    tc: &Digest,
) -> SessionKey {
    let k_i = login.pks.xor(&ephemeral_mask(tc, login.ts4));
    let k_j = reply.pks.xor(&reply_ephemeral_mask(&k_i, reply.ts6));
    SessionKey::from_digest(session_key(&k_i, &k_j))
}

/// Build a login request from extracted credentials, exactly as an
/// honest user would from a card.
pub fn forge_login(
    id: &Identity,
    q: &Digest,
    tc: &Digest,
    te: Timestamp,
    k_a: &Ephemeral,
    ts: Timestamp,
) -> LoginRequest {
    LoginRequest {
        did: id.encoded().xor(&login_mask(tc, ts)),
        ts4: ts,
        c: login_verifier(q, ts, tc),
        pks: k_a.digest().xor(&ephemeral_mask(tc, ts)),
        te,
    }
}

/// Outcome of an impersonation attempt against a live deployment.
#[derive(Debug, Clone)]
pub struct ImpersonationOutcome {
    pub forged: LoginRequest,
    pub rejection: Option<SimError>,
    /// The key the adversary derives from the broadcast sensor reply.
    pub adversary_key: Option<SessionKey>,
    /// The key the sensor derived for this session.
    pub sensor_key: Option<SessionKey>,
    /// The key the gateway derived for this session.
    pub gwn_key: Option<SessionKey>,
}

impl ImpersonationOutcome {
    /// The forged login passed every gateway check.
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }

    /// The adversary ended up sharing the session key with the sensor.
    pub fn key_established(&self) -> bool {
        self.adversary_key.is_some() && self.adversary_key == self.sensor_key
    }
}

/// Impersonate the victim against an unmodified deployment: forge a
/// fresh login from extracted credentials, inject it, and derive the
/// session key from the broadcast reply like any session peer.
pub fn impersonate_user(
    world: &mut World,
    id: &Identity,
    q: &Digest,
    tc: &Digest,
    te: Timestamp,
    k_a: &Ephemeral,
) -> ImpersonationOutcome {
    let forged = forge_login(id, q, tc, te, k_a, world.now());
    match world.inject_login(forged.clone()) {
        Err(rejection) => ImpersonationOutcome {
            forged,
            rejection: Some(rejection),
            adversary_key: None,
            sensor_key: None,
            gwn_key: None,
        },
        Ok(session) => {
            let adversary_key = crate::scheme::finalize(
                &session.reply,
                k_a.digest(),
                id,
                &session.reply.sid,
                world.now(),
                world.config().delta_t,
            )
            .ok();
            ImpersonationOutcome {
                forged,
                rejection: None,
                adversary_key,
                sensor_key: Some(session.sensor_key),
                gwn_key: Some(session.gwn_key),
            }
        }
    }
}

/// Errors raised when an attack is missing its inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("transcript has no {0} message")]
    MissingMessage(MessageKind),
}

/// The first eavesdropped user registration request, if any.
pub fn first_registration(transcript: &Transcript) -> Result<&RegistrationRequest, AttackError> {
    eavesdrop(transcript, MessageKind::UserReg)
        .into_iter()
        .find_map(|p| match p {
            Payload::UserReg(m) => Some(m),
            _ => None,
        })
        .ok_or(AttackError::MissingMessage(MessageKind::UserReg))
}

/// Eavesdropped login sessions: the i-th login request paired with the
/// i-th sensor reply.
pub fn sessions(transcript: &Transcript) -> Vec<(&LoginRequest, &SensorReply)> {
    let logins = eavesdrop(transcript, MessageKind::Login)
        .into_iter()
        .filter_map(|p| match p {
            Payload::Login(m) => Some(m),
            _ => None,
        });
    let replies = eavesdrop(transcript, MessageKind::SensorReply)
        .into_iter()
        .filter_map(|p| match p {
            Payload::SensorReply(m) => Some(m),
            _ => None,
        });
    logins.zip(replies).collect()
}
