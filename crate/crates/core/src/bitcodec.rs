//! Bit-exact primitives underneath every protocol formula: the 160-bit
//! hash, canonical field concatenation, XOR, and the fixed-width codecs
//! for identities and timestamps.
//!
//! Every value that crosses the wire or enters a formula is built from
//! these five operations, so two implementations that agree here agree
//! everywhere. The concatenation is length-prefixed (2-octet big-endian
//! length before each field) to make `h(a ‖ b)` injective over field
//! boundaries; raw juxtaposition would let different splits collide.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use sha1::{Digest as _, Sha1};
use thiserror::Error;

/// Number of octets in a [`Digest`] (160 bits).
pub const DIGEST_LEN: usize = 20;

/// Maximum identity length accepted by [`encode_id`].
pub const MAX_ID_LEN: usize = 20;

static HASH_OPS: AtomicU64 = AtomicU64::new(0);

/// Errors from the codec primitives.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    /// A concatenation field does not fit a 16-bit length prefix.
    #[error("field of {len} octets exceeds the 16-bit length prefix")]
    FieldTooLong { len: usize },
    /// XOR operands of different lengths.
    #[error("xor length mismatch: {left} vs {right} octets")]
    LengthMismatch { left: usize, right: usize },
    /// Identity longer than [`MAX_ID_LEN`] octets.
    #[error("identity of {len} octets exceeds {MAX_ID_LEN}")]
    IdTooLong { len: usize },
    /// Identity or identity block that the zero-padding codec cannot
    /// represent invertibly.
    #[error("identity is not canonical for the zero-padding codec")]
    IdNotCanonical,
}

/// A 160-bit value: hash outputs, masked wire fields, and the scheme's
/// random blocks all share this shape. The value space is opaque; the
/// only arithmetic is XOR.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest([u8; DIGEST_LEN]);

impl Digest {
    pub const fn from_bytes(bytes: [u8; DIGEST_LEN]) -> Self {
        Digest(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    /// Octet-wise XOR with another digest.
    pub fn xor(&self, other: &Digest) -> Digest {
        let mut out = [0u8; DIGEST_LEN];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i] ^ other.0[i];
        }
        Digest(out)
    }

    /// Flip a single bit, indexed from the most significant bit of the
    /// first octet. Panics if `bit >= 160`.
    pub fn flip_bit(&self, bit: usize) -> Digest {
        assert!(bit < DIGEST_LEN * 8);
        let mut out = self.0;
        out[bit / 8] ^= 0x80 >> (bit % 8);
        Digest(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Digest> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; DIGEST_LEN] = bytes.try_into().ok()?;
        Some(Digest(arr))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl std::ops::BitXor for &Digest {
    type Output = Digest;

    fn bitxor(self, rhs: &Digest) -> Digest {
        self.xor(rhs)
    }
}

/// A simulated clock value: whole seconds since epoch 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn seconds(&self) -> u64 {
        self.0
    }

    /// Absolute difference in seconds.
    pub fn distance(&self, other: Timestamp) -> u64 {
        self.0.abs_diff(other.0)
    }

    pub fn plus(&self, seconds: u64) -> Timestamp {
        Timestamp(self.0 + seconds)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The scheme's one-way hash: SHA-1, giving the 160-bit digests every
/// formula operates on.
pub fn hash(input: &[u8]) -> Digest {
    HASH_OPS.fetch_add(1, Ordering::Relaxed);
    let out = Sha1::digest(input);
    Digest(out.into())
}

/// Process-wide count of [`hash`] invocations, for cost reporting.
pub fn hash_op_count() -> u64 {
    HASH_OPS.load(Ordering::Relaxed)
}

/// Canonical injective concatenation: each field is emitted as a 2-octet
/// big-endian length followed by its octets.
pub fn concat(fields: &[&[u8]]) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(fields.iter().map(|f| f.len() + 2).sum());
    for field in fields {
        let len = field.len();
        if len >= 1 << 16 {
            return Err(CodecError::FieldTooLong { len });
        }
        out.extend_from_slice(&(len as u16).to_be_bytes());
        out.extend_from_slice(field);
    }
    Ok(out)
}

/// Octet-wise XOR of two equal-length strings.
pub fn xor(a: &[u8], b: &[u8]) -> Result<Vec<u8>, CodecError> {
    if a.len() != b.len() {
        return Err(CodecError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

/// Encode an identity as a fixed 20-octet block: the identity octets
/// followed by zero padding. Identities may not contain a zero octet,
/// otherwise the padding boundary is ambiguous and [`decode_id`] cannot
/// invert the encoding.
pub fn encode_id(id: &[u8]) -> Result<Digest, CodecError> {
    if id.len() > MAX_ID_LEN {
        return Err(CodecError::IdTooLong { len: id.len() });
    }
    if id.contains(&0) {
        return Err(CodecError::IdNotCanonical);
    }
    let mut out = [0u8; DIGEST_LEN];
    out[..id.len()].copy_from_slice(id);
    Ok(Digest(out))
}

/// Invert [`encode_id`]: strip the zero padding. Fails if the block is
/// not of the canonical form `identity ‖ 0…0`, i.e. if any nonzero octet
/// follows a zero octet.
pub fn decode_id(block: &Digest) -> Result<Vec<u8>, CodecError> {
    let bytes = block.as_bytes();
    let id_len = bytes.iter().position(|&b| b == 0).unwrap_or(DIGEST_LEN);
    if bytes[id_len..].iter().any(|&b| b != 0) {
        return Err(CodecError::IdNotCanonical);
    }
    Ok(bytes[..id_len].to_vec())
}

/// 8-octet big-endian timestamp encoding.
pub fn encode_ts(ts: Timestamp) -> [u8; 8] {
    ts.0.to_be_bytes()
}

pub fn decode_ts(bytes: &[u8; 8]) -> Timestamp {
    Timestamp(u64::from_be_bytes(*bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_core::{RngCore, SeedableRng};

    fn rng(seed: u64) -> rand_chacha::ChaCha20Rng {
        rand_chacha::ChaCha20Rng::seed_from_u64(seed)
    }

    fn random_bytes(rng: &mut impl RngCore, len: usize) -> Vec<u8> {
        let mut buf = vec![0u8; len];
        rng.fill_bytes(&mut buf);
        buf
    }

    #[test]
    fn hash_empty_matches_known_vector() {
        assert_eq!(
            hash(b"").to_hex(),
            "da39a3ee5e6b4b0d3255bfef95601890afd80709"
        );
    }

    #[test]
    fn hash_abc_matches_known_vector() {
        assert_eq!(
            hash(b"abc").to_hex(),
            "a9993e364706816aba3e25717850c26c9cd0d89d"
        );
    }

    #[test]
    fn hash_is_deterministic() {
        let mut r = rng(1);
        for _ in 0..1000 {
            let len = (r.next_u32() % 64) as usize;
            let input = random_bytes(&mut r, len);
            assert_eq!(hash(&input), hash(&input));
        }
    }

    #[test]
    fn hash_distinct_inputs_distinct_outputs() {
        let mut r = rng(2);
        for _ in 0..1000 {
            let a = random_bytes(&mut r, 16);
            let mut b = random_bytes(&mut r, 16);
            while b == a {
                b = random_bytes(&mut r, 16);
            }
            assert_ne!(hash(&a), hash(&b));
        }
    }

    #[test]
    fn concat_empty_list_is_empty() {
        assert_eq!(concat(&[]).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn concat_single_field() {
        assert_eq!(concat(&[b"AB"]).unwrap(), vec![0x00, 0x02, 0x41, 0x42]);
    }

    #[test]
    fn concat_rejects_oversized_field() {
        let big = vec![0u8; 1 << 16];
        assert_eq!(
            concat(&[&big]),
            Err(CodecError::FieldTooLong { len: 1 << 16 })
        );
    }

    #[test]
    fn concat_injective_at_desk_scale() {
        // 10^4 random pairs of field lists; distinct lists never encode equal.
        let mut r = rng(3);
        let field = |r: &mut rand_chacha::ChaCha20Rng| {
            let len = (r.next_u32() % 8) as usize;
            random_bytes(r, len)
        };
        for _ in 0..10_000 {
            let a = (field(&mut r), field(&mut r));
            let b = (field(&mut r), field(&mut r));
            let ea = concat(&[&a.0, &a.1]).unwrap();
            let eb = concat(&[&b.0, &b.1]).unwrap();
            assert_eq!(a == b, ea == eb);
        }
    }

    #[test]
    fn xor_self_is_zero() {
        let a = [0x5au8; 20];
        assert_eq!(xor(&a, &a).unwrap(), vec![0u8; 20]);
    }

    #[test]
    fn xor_length_mismatch() {
        assert_eq!(
            xor(&[0u8; 20], &[0u8; 19]),
            Err(CodecError::LengthMismatch {
                left: 20,
                right: 19
            })
        );
    }

    #[test]
    fn xor_involution_fuzz() {
        let mut r = rng(4);
        for _ in 0..1000 {
            let a = random_bytes(&mut r, 20);
            let b = random_bytes(&mut r, 20);
            let masked = xor(&a, &b).unwrap();
            assert_eq!(xor(&masked, &b).unwrap(), a);
        }
    }

    #[test]
    fn encode_id_pads_with_zeros() {
        let block = encode_id(b"A").unwrap();
        let mut expected = [0u8; 20];
        expected[0] = 0x41;
        assert_eq!(block.as_bytes(), &expected);
    }

    #[test]
    fn encode_id_rejects_oversized() {
        assert_eq!(
            encode_id(&[0x41; 21]),
            Err(CodecError::IdTooLong { len: 21 })
        );
    }

    #[test]
    fn encode_id_rejects_zero_octets() {
        assert_eq!(encode_id(b"a\x00"), Err(CodecError::IdNotCanonical));
        assert_eq!(encode_id(b"a\x00b"), Err(CodecError::IdNotCanonical));
    }

    #[test]
    fn decode_id_rejects_nonzero_after_padding() {
        let mut bytes = [0u8; 20];
        bytes[0] = 0x61;
        bytes[5] = 0x62; // gap of zeros before this octet
        assert_eq!(
            decode_id(&Digest::from_bytes(bytes)),
            Err(CodecError::IdNotCanonical)
        );
    }

    #[test]
    fn timestamp_encoding_examples() {
        assert_eq!(encode_ts(Timestamp(0)), [0u8; 8]);
        assert_eq!(encode_ts(Timestamp(1)), [0, 0, 0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn timestamp_round_trip_fuzz() {
        let mut r = rng(5);
        for _ in 0..1000 {
            let t = Timestamp(r.next_u64());
            assert_eq!(decode_ts(&encode_ts(t)), t);
        }
    }

    proptest! {
        #[test]
        fn prop_concat_round_trip_boundaries(
            a in prop::collection::vec(any::<u8>(), 0..64),
            b in prop::collection::vec(any::<u8>(), 0..64),
        ) {
            let enc = concat(&[&a, &b]).unwrap();
            // Field boundaries are recoverable from the length prefixes.
            let la = u16::from_be_bytes([enc[0], enc[1]]) as usize;
            prop_assert_eq!(&enc[2..2 + la], &a[..]);
            let lb = u16::from_be_bytes([enc[2 + la], enc[3 + la]]) as usize;
            prop_assert_eq!(&enc[4 + la..4 + la + lb], &b[..]);
            prop_assert_eq!(enc.len(), 4 + la + lb);
        }

        #[test]
        fn prop_xor_commutes(a in prop::collection::vec(any::<u8>(), 20), b in prop::collection::vec(any::<u8>(), 20)) {
            prop_assert_eq!(xor(&a, &b).unwrap(), xor(&b, &a).unwrap());
        }

        #[test]
        fn prop_id_round_trip(id in prop::collection::vec(1u8..=255, 0..=20)) {
            let block = encode_id(&id).unwrap();
            prop_assert_eq!(decode_id(&block).unwrap(), id);
        }
    }
}
