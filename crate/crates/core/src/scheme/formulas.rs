//! The individual protocol formulas, one function per masked or hashed
//! value, so each can be tested and cross-checked in isolation. Step
//! operations in the parent module compose these; nothing else computes
//! a digest.
//!
//! Every hash input is the canonical length-prefixed concatenation of
//! its fields; identities enter hashes as raw octets and enter XOR as
//! their fixed 20-octet encodings.

use crate::bitcodec::{concat, encode_ts, hash, Digest, Timestamp};

/// Three-octet ASCII literal that domain-separates the ephemeral-key
/// mask in the login request.
pub const EPHEMERAL_LITERAL: &[u8] = b"000";

/// Protocol hash over a field list. Field lengths are validated at type
/// construction, so the canonical encoding cannot fail here.
fn h(fields: &[&[u8]]) -> Digest {
    hash(&concat(fields).expect("protocol field fits the length prefix"))
}

/// h(id_pre ‖ pw_pre): the shared secret of the pre-registration phase.
pub fn pre_secret_hash(id_pre: &[u8], pw_pre: &[u8]) -> Digest {
    h(&[id_pre, pw_pre])
}

/// Q_i = h(id ‖ pw ‖ r): the user's password verifier.
pub fn password_verifier(id: &[u8], pw: &[u8], r: &Digest) -> Digest {
    h(&[id, pw, r.as_bytes()])
}

/// h(ts ‖ secret): the timestamped request verifier used for VI_i, VI_j
/// and the sensor registration echo Q_j.
pub fn timed_verifier(ts: Timestamp, secret_hash: &Digest) -> Digest {
    h(&[&encode_ts(ts), secret_hash.as_bytes()])
}

/// h(sid ‖ r): the sensor's pre-registration secret.
pub fn sensor_secret_hash(sid: &[u8], r: &Digest) -> Digest {
    h(&[sid, r.as_bytes()])
}

/// P_i = h(id ‖ te): binds an identity to its credential expiry.
pub fn credential_binding(id: &[u8], te: Timestamp) -> Digest {
    h(&[id, &encode_ts(te)])
}

/// TC_i = h(k_user ‖ p ‖ te): the user's temporal credential.
pub fn user_temporal_credential(k_user: &Digest, p: &Digest, te: Timestamp) -> Digest {
    h(&[k_user.as_bytes(), p.as_bytes(), &encode_ts(te)])
}

/// TC_j = h(k_sensor ‖ sid): the sensor's temporal credential.
pub fn sensor_temporal_credential(k_sensor: &Digest, sid: &[u8]) -> Digest {
    h(&[k_sensor.as_bytes(), sid])
}

/// h(h(sid ‖ r) ‖ ts3): the pad masking TC_j in the registration reply.
pub fn reg_mask(sensor_hash: &Digest, ts3: Timestamp) -> Digest {
    h(&[sensor_hash.as_bytes(), &encode_ts(ts3)])
}

/// h(tc ‖ ts4): the pad masking the identity in a login request.
pub fn login_mask(tc: &Digest, ts4: Timestamp) -> Digest {
    h(&[tc.as_bytes(), &encode_ts(ts4)])
}

/// C_i = h(q ‖ ts4) ⊕ tc: the login request verifier.
pub fn login_verifier(q: &Digest, ts4: Timestamp, tc: &Digest) -> Digest {
    h(&[q.as_bytes(), &encode_ts(ts4)]).xor(tc)
}

/// h(tc ‖ ts4 ‖ "000"): the pad masking the user's ephemeral key.
pub fn ephemeral_mask(tc: &Digest, ts4: Timestamp) -> Digest {
    h(&[tc.as_bytes(), &encode_ts(ts4), EPHEMERAL_LITERAL])
}

/// h(did ‖ tc_j ‖ ts5): the pad masking the identity relayed to the sensor.
pub fn relay_identity_mask(did: &Digest, tc_j: &Digest, ts5: Timestamp) -> Digest {
    h(&[did.as_bytes(), tc_j.as_bytes(), &encode_ts(ts5)])
}

/// C_GWN = h(id ‖ tc_j ‖ ts5): the gateway-to-sensor verifier.
pub fn relay_verifier(id: &[u8], tc_j: &Digest, ts5: Timestamp) -> Digest {
    h(&[id, tc_j.as_bytes(), &encode_ts(ts5)])
}

/// h(tc_j ‖ ts5): the pad masking the ephemeral key relayed to the sensor.
pub fn relay_ephemeral_mask(tc_j: &Digest, ts5: Timestamp) -> Digest {
    h(&[tc_j.as_bytes(), &encode_ts(ts5)])
}

/// C_j = h(k_j ‖ id ‖ sid ‖ ts6): the sensor reply verifier.
pub fn sensor_verifier(k_j: &Digest, id: &[u8], sid: &[u8], ts6: Timestamp) -> Digest {
    h(&[k_j.as_bytes(), id, sid, &encode_ts(ts6)])
}

/// h(k_i ‖ ts6): the pad masking the sensor's ephemeral key in its reply.
pub fn reply_ephemeral_mask(k_i: &Digest, ts6: Timestamp) -> Digest {
    h(&[k_i.as_bytes(), &encode_ts(ts6)])
}

/// h(q): the card verifier echoed to the user at registration.
pub fn card_verifier(q: &Digest) -> Digest {
    h(&[q.as_bytes()])
}

/// KEY_ij = h(k_i ⊕ k_j): the session key both ends derive.
pub fn session_key(k_i: &Digest, k_j: &Digest) -> Digest {
    h(&[k_i.xor(k_j).as_bytes()])
}
