//! The eavesdropper's view of the channel: every wire message in
//! delivery order, exportable to a line-oriented text format that the
//! attack suite consumes.
//!
//! One message per line: kind, sender, receivers, send time, then the
//! payload fields hex-encoded in a fixed per-kind order. Timestamps
//! inside payloads use the 8-octet big-endian encoding; the envelope
//! send time is decimal.

use std::fmt;

use thiserror::Error;

use crate::bitcodec::{decode_ts, encode_ts, Digest, Timestamp};
use crate::scheme::{
    GwnToSensor, IssuedCard, LoginRequest, RegistrationReply, RegistrationRequest, SensorRegReply,
    SensorRegRequest, SensorReply,
};

/// Parties on the simulated channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorId {
    User,
    Gateway,
    Sensor,
    Adversary,
}

impl ActorId {
    fn token(&self) -> &'static str {
        match self {
            ActorId::User => "user",
            ActorId::Gateway => "gwn",
            ActorId::Sensor => "sensor",
            ActorId::Adversary => "adversary",
        }
    }

    fn from_token(token: &str) -> Option<ActorId> {
        match token {
            "user" => Some(ActorId::User),
            "gwn" => Some(ActorId::Gateway),
            "sensor" => Some(ActorId::Sensor),
            "adversary" => Some(ActorId::Adversary),
            _ => None,
        }
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// The seven wire message kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    UserReg,
    UserRegReply,
    SensorReg,
    SensorRegReply,
    Login,
    GwnToSensor,
    SensorReply,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        MessageKind::UserReg,
        MessageKind::UserRegReply,
        MessageKind::SensorReg,
        MessageKind::SensorRegReply,
        MessageKind::Login,
        MessageKind::GwnToSensor,
        MessageKind::SensorReply,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            MessageKind::UserReg => "user_reg",
            MessageKind::UserRegReply => "user_reg_reply",
            MessageKind::SensorReg => "sensor_reg",
            MessageKind::SensorRegReply => "sensor_reg_reply",
            MessageKind::Login => "login",
            MessageKind::GwnToSensor => "gwn_to_sensor",
            MessageKind::SensorReply => "sensor_reply",
        }
    }

    pub fn from_token(token: &str) -> Option<MessageKind> {
        MessageKind::ALL.iter().copied().find(|k| k.token() == token)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A wire message body. The kind is implied by the variant, so a payload
/// can never disagree with its envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    UserReg(RegistrationRequest),
    UserRegReply(RegistrationReply),
    SensorReg(SensorRegRequest),
    SensorRegReply(SensorRegReply),
    Login(LoginRequest),
    GwnToSensor(GwnToSensor),
    SensorReply(SensorReply),
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::UserReg(_) => MessageKind::UserReg,
            Payload::UserRegReply(_) => MessageKind::UserRegReply,
            Payload::SensorReg(_) => MessageKind::SensorReg,
            Payload::SensorRegReply(_) => MessageKind::SensorRegReply,
            Payload::Login(_) => MessageKind::Login,
            Payload::GwnToSensor(_) => MessageKind::GwnToSensor,
            Payload::SensorReply(_) => MessageKind::SensorReply,
        }
    }

    fn fields(&self) -> Vec<String> {
        fn ts(t: Timestamp) -> String {
            hex::encode(encode_ts(t))
        }
        match self {
            Payload::UserReg(m) => vec![
                hex::encode(&m.id_pre),
                ts(m.ts1),
                m.vi.to_hex(),
                m.ci.to_hex(),
                m.di.to_hex(),
            ],
            Payload::UserRegReply(m) => vec![
                m.card.hq.to_hex(),
                ts(m.card.te),
                m.card.ptc.to_hex(),
                m.echo.to_hex(),
            ],
            Payload::SensorReg(m) => vec![hex::encode(&m.sid), ts(m.ts2), m.vi.to_hex()],
            Payload::SensorRegReply(m) => vec![ts(m.ts3), m.q.to_hex(), m.reg.to_hex()],
            Payload::Login(m) => vec![
                m.did.to_hex(),
                ts(m.ts4),
                m.c.to_hex(),
                m.pks.to_hex(),
                ts(m.te),
            ],
            Payload::GwnToSensor(m) => vec![
                ts(m.ts5),
                m.did.to_hex(),
                m.did_gwn.to_hex(),
                m.c_gwn.to_hex(),
                m.pks_gwn.to_hex(),
            ],
            Payload::SensorReply(m) => vec![
                hex::encode(&m.sid),
                ts(m.ts6),
                m.c.to_hex(),
                m.pks.to_hex(),
            ],
        }
    }

    fn from_fields(kind: MessageKind, fields: &[&str]) -> Option<Payload> {
        fn bytes(s: &str) -> Option<Vec<u8>> {
            hex::decode(s).ok()
        }
        fn digest(s: &str) -> Option<Digest> {
            Digest::from_hex(s)
        }
        fn ts(s: &str) -> Option<Timestamp> {
            let arr: [u8; 8] = bytes(s)?.try_into().ok()?;
            Some(decode_ts(&arr))
        }
        match (kind, fields) {
            (MessageKind::UserReg, [id_pre, ts1, vi, ci, di]) => {
                Some(Payload::UserReg(RegistrationRequest {
                    id_pre: bytes(id_pre)?,
                    ts1: ts(ts1)?,
                    vi: digest(vi)?,
                    ci: digest(ci)?,
                    di: digest(di)?,
                }))
            }
            (MessageKind::UserRegReply, [hq, te, ptc, echo]) => {
                Some(Payload::UserRegReply(RegistrationReply {
                    card: IssuedCard {
                        hq: digest(hq)?,
                        te: ts(te)?,
                        ptc: digest(ptc)?,
                    },
                    echo: digest(echo)?,
                }))
            }
            (MessageKind::SensorReg, [sid, ts2, vi]) => Some(Payload::SensorReg(SensorRegRequest {
                sid: bytes(sid)?,
                ts2: ts(ts2)?,
                vi: digest(vi)?,
            })),
            (MessageKind::SensorRegReply, [ts3, q, reg]) => {
                Some(Payload::SensorRegReply(SensorRegReply {
                    ts3: ts(ts3)?,
                    q: digest(q)?,
                    reg: digest(reg)?,
                }))
            }
            (MessageKind::Login, [did, ts4, c, pks, te]) => Some(Payload::Login(LoginRequest {
                did: digest(did)?,
                ts4: ts(ts4)?,
                c: digest(c)?,
                pks: digest(pks)?,
                te: ts(te)?,
            })),
            (MessageKind::GwnToSensor, [ts5, did, did_gwn, c_gwn, pks_gwn]) => {
                Some(Payload::GwnToSensor(GwnToSensor {
                    ts5: ts(ts5)?,
                    did: digest(did)?,
                    did_gwn: digest(did_gwn)?,
                    c_gwn: digest(c_gwn)?,
                    pks_gwn: digest(pks_gwn)?,
                }))
            }
            (MessageKind::SensorReply, [sid, ts6, c, pks]) => {
                Some(Payload::SensorReply(SensorReply {
                    sid: bytes(sid)?,
                    ts6: ts(ts6)?,
                    c: digest(c)?,
                    pks: digest(pks)?,
                }))
            }
            _ => None,
        }
    }
}

/// One delivered wire message with its envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub sender: ActorId,
    pub receivers: Vec<ActorId>,
    pub sent_at: Timestamp,
    pub payload: Payload,
}

impl WireMessage {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}

/// Append-only record of everything that crossed the channel, in
/// delivery order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    entries: Vec<WireMessage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transcript line {line}: {reason}")]
pub struct TranscriptParseError {
    pub line: usize,
    pub reason: String,
}

impl Transcript {
    pub fn push(&mut self, message: WireMessage) {
        self.entries.push(message);
    }

    pub fn entries(&self) -> &[WireMessage] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serialize to the line-oriented interchange format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.entries {
            let receivers: Vec<&str> = m.receivers.iter().map(|r| r.token()).collect();
            out.push_str(&format!(
                "{} {} {} {}",
                m.kind().token(),
                m.sender.token(),
                receivers.join("+"),
                m.sent_at.seconds()
            ));
            for field in m.payload.fields() {
                out.push(' ');
                out.push_str(&field);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Transcript, TranscriptParseError> {
        let mut transcript = Transcript::default();
        for (index, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| TranscriptParseError {
                line: index + 1,
                reason: reason.to_string(),
            };
            let tokens: Vec<&str> = line.split(' ').collect();
            if tokens.len() < 4 {
                return Err(err("expected kind, sender, receivers, sent_at, fields"));
            }
            let kind = MessageKind::from_token(tokens[0]).ok_or_else(|| err("unknown kind"))?;
            let sender = ActorId::from_token(tokens[1]).ok_or_else(|| err("unknown sender"))?;
            let receivers = tokens[2]
                .split('+')
                .map(ActorId::from_token)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err("unknown receiver"))?;
            let sent_at = tokens[3]
                .parse::<u64>()
                .map(Timestamp)
                .map_err(|_| err("bad send time"))?;
            let payload = Payload::from_fields(kind, &tokens[4..])
                .ok_or_else(|| err("bad payload fields"))?;
            transcript.push(WireMessage {
                sender,
                receivers,
                sent_at,
                payload,
            });
        }
        Ok(transcript)
    }
}

/// The passive adversary's read-only view: all payloads of one kind, in
/// delivery order.
pub fn eavesdrop(transcript: &Transcript, kind: MessageKind) -> Vec<&Payload> {
    transcript
        .entries
        .iter()
        .filter(|m| m.kind() == kind)
        .map(|m| &m.payload)
        .collect()
}
