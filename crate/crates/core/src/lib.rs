//! Executable model of a temporal-credential mutual authentication and
//! key agreement scheme for wireless sensor networks, together with the
//! attack chain that breaks it.
//!
//! The scheme has three parties: a user with a smart card, a gateway
//! holding two private system parameters, and a sensor node. A
//! pre-registration phase installs bootstrap secrets; registration
//! issues temporal credentials (the card for the user, a stored
//! credential for the sensor); login establishes a session key
//! `KEY_ij = h(K_i ⊕ K_j)` between user and sensor with the gateway
//! mediating. All traffic uses one 160-bit hash plus XOR masking over a
//! public channel.
//!
//! The trouble is that the registration request authenticates itself
//! with `h(TS1 ‖ h(id_pre ‖ pw_pre))`, an offline guessing oracle for
//! the pre-shared password available to anyone who eavesdrops the open
//! registration channel. From the recovered pre-secret, the same
//! message unmasks the user's identity and password verifier; a read of
//! the (lost-and-returned) smart card then yields the password, the
//! temporal credential, every recorded session key, and full user
//! impersonation. The [`attacks`] module reproduces that chain
//! mechanically, and the `acceptance` test target demonstrates each
//! stage end to end.
//!
//! Module map:
//!
//! - [`bitcodec`]: the 160-bit hash, canonical concatenation, XOR, and
//!   fixed-width codecs every formula is built from.
//! - [`scheme`]: pure per-step implementations of the four phases.
//! - [`netsim`]: deterministic actor harness with a recorded channel,
//!   per-actor clocks, and scripted faults.
//! - [`attacks`]: the adversary's toolbox, restricted by construction
//!   to transcript payloads, stolen-card contents, and dictionaries.
//! - [`vectors`]: golden vector export/verification for
//!   cross-implementation checks.

pub mod attacks;
pub mod bitcodec;
pub mod netsim;
pub mod scheme;
pub mod vectors;
