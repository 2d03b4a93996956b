use super::*;
use crate::bitcodec::{hash, Digest, Timestamp};
use rand_core::{RngCore, SeedableRng};

const DELTA_T: u64 = 5;

fn digest(byte: u8) -> Digest {
    Digest::from_bytes([byte; 20])
}

fn hex(s: &str) -> Digest {
    Digest::from_hex(s).unwrap()
}

/// The fixture behind the golden vector file: one user, one sensor, one
/// registration and one login, all with pinned inputs.
struct Fixture {
    pre: PreCredential,
    secret: UserSecret,
    keys: GwnKeys,
    sensor: SensorSecret,
    user_db: PreRegStore,
    sensor_db: PreRegStore,
}

fn fixture() -> Fixture {
    let pre = PreCredential::new(Identity::new(b"alice-pre".as_slice()).unwrap(), b"pw0".as_slice())
        .unwrap();
    let secret = UserSecret::new(
        Identity::new(b"alice".as_slice()).unwrap(),
        b"secret".as_slice(),
        digest(0x11),
    )
    .unwrap();
    let keys = GwnKeys::new(digest(0x77), digest(0x88));
    let sensor = SensorSecret::new(b"s1".as_slice(), digest(0x22)).unwrap();
    let mut user_db = PreRegStore::new();
    user_db.insert(pre.id_pre().as_bytes().to_vec(), pre.secret_hash());
    let mut sensor_db = PreRegStore::new();
    sensor_db.insert(
        sensor.sid().to_vec(),
        formulas::sensor_secret_hash(sensor.sid(), sensor.r().unwrap()),
    );
    Fixture {
        pre,
        secret,
        keys,
        sensor,
        user_db,
        sensor_db,
    }
}

struct HonestRun {
    card: SmartCard,
    record: GwnUserRecord,
    sensor: SensorSecret,
}

fn run_registrations(f: &Fixture) -> HonestRun {
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    let (reply, record) = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap();
    let card = user_verify_card(&reply, &f.secret).unwrap();

    let sreq = sensor_make_registration(&f.sensor, Timestamp(2000)).unwrap();
    let sreply = gwn_process_sensor_registration(
        &sreq,
        &f.sensor_db,
        &f.keys,
        Timestamp(2001),
        DELTA_T,
        Timestamp(2001),
    )
    .unwrap();
    let sensor = sensor_finish_registration(&f.sensor, &sreply, Timestamp(2002), DELTA_T).unwrap();
    HonestRun {
        card,
        record,
        sensor,
    }
}

#[test]
fn registration_request_matches_golden_vectors() {
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    assert_eq!(req.vi, hex("ec67eba89190645384d8b4db2a6c4a4558a786ee"));
    assert_eq!(req.ci, hex("b6b8a90fff8293aed65522e30dfc6ef26a03ec73"));
    assert_eq!(req.di, hex("1e5644a70f1d3f047473c7c0a1717cfe910b958d"));
}

#[test]
fn registration_vi_changes_with_timestamp() {
    let f = fixture();
    let mut seen = std::collections::HashSet::new();
    for ts in 0..100u64 {
        let req = user_make_registration(&f.pre, &f.secret, Timestamp(ts));
        assert!(seen.insert(req.vi));
    }
}

#[test]
fn registration_di_unmasks_to_encoded_id() {
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    assert_eq!(req.di.xor(&f.pre.secret_hash()), f.secret.id().encoded());
}

#[test]
fn gwn_recovers_password_verifier_and_identity() {
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    let (reply, record) = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap();
    assert_eq!(record.q, f.secret.password_verifier());
    assert_eq!(record.id, *f.secret.id());
    assert!(!record.status_bit);
    assert_eq!(record.last_login, None);
    // PTC_i ⊕ Q_i recovers the temporal credential issued by the gateway.
    assert_eq!(
        reply.card.ptc.xor(&record.q),
        hex("ea963ffc58a6670f6ea1330542ab6d60715b9091")
    );
}

#[test]
fn registration_freshness_is_strict() {
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    let at = |now: u64| {
        gwn_process_registration(
            &req,
            &f.user_db,
            &f.keys,
            Timestamp(now),
            DELTA_T,
            Timestamp(500_000),
        )
    };
    assert!(at(1000 + DELTA_T - 1).is_ok());
    assert!(matches!(
        at(1000 + DELTA_T),
        Err(SchemeError::StaleTimestamp { .. })
    ));
    assert!(matches!(
        at(1000 + DELTA_T + 1),
        Err(SchemeError::StaleTimestamp { .. })
    ));
}

#[test]
fn freshness_is_checked_before_any_verifier() {
    // A stale message with a corrupted verifier reports staleness, not
    // the verifier mismatch.
    let f = fixture();
    let mut req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    req.vi = req.vi.flip_bit(0);
    let err = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1000 + DELTA_T),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap_err();
    assert!(matches!(err, SchemeError::StaleTimestamp { .. }));
}

#[test]
fn registration_unknown_pre_id() {
    let f = fixture();
    let mut req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    req.id_pre = b"nobody".to_vec();
    let err = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::UnknownPreId);
}

#[test]
fn registration_flipped_vi_rejected() {
    let f = fixture();
    let mut req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    req.vi = req.vi.flip_bit(0);
    let err = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::BadVerifier);
}

#[test]
fn card_accepted_on_honest_flow() {
    let f = fixture();
    let run = run_registrations(&f);
    assert_eq!(run.card.r, *f.secret.r());
    assert_eq!(run.card.te, Timestamp(500_000));
}

#[test]
fn card_rejected_on_flipped_echo() {
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    let (mut reply, _) = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap();
    reply.echo = reply.echo.flip_bit(13);
    assert_eq!(
        user_verify_card(&reply, &f.secret).unwrap_err(),
        SchemeError::CardRejected
    );
}

#[test]
fn card_rejected_on_wrong_password() {
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    let (reply, _) = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap();
    let wrong = UserSecret::new(f.secret.id().clone(), b"wrong".as_slice(), *f.secret.r()).unwrap();
    assert_eq!(
        user_verify_card(&reply, &wrong).unwrap_err(),
        SchemeError::CardRejected
    );
}

#[test]
fn sensor_registration_matches_golden_vector() {
    let f = fixture();
    let req = sensor_make_registration(&f.sensor, Timestamp(2000)).unwrap();
    assert_eq!(req.vi, hex("da66dcc9c2da8035d611a800f1aa6953e0650c3e"));
    let again = sensor_make_registration(&f.sensor, Timestamp(2000)).unwrap();
    assert_eq!(req, again);
    let shifted = sensor_make_registration(&f.sensor, Timestamp(2001)).unwrap();
    assert_ne!(req.vi, shifted.vi);
}

#[test]
fn sensor_finish_installs_gateway_credential() {
    let f = fixture();
    let run = run_registrations(&f);
    let expected = formulas::sensor_temporal_credential(f.keys.sensor_key(), f.sensor.sid());
    assert_eq!(run.sensor.tc(), Some(&expected));
    assert_eq!(run.sensor.r(), None, "registration random is erased");
    assert_eq!(
        expected,
        hex("b69de28c96ed68db2b51d4b1a5feaa27041ae63a")
    );
}

#[test]
fn sensor_registration_stale_at_window() {
    let f = fixture();
    let req = sensor_make_registration(&f.sensor, Timestamp(2000)).unwrap();
    let err = gwn_process_sensor_registration(
        &req,
        &f.sensor_db,
        &f.keys,
        Timestamp(2000 + DELTA_T),
        DELTA_T,
        Timestamp(2000 + DELTA_T),
    )
    .unwrap_err();
    assert!(matches!(err, SchemeError::StaleTimestamp { .. }));
}

#[test]
fn sensor_reply_flipped_q_rejected() {
    let f = fixture();
    let req = sensor_make_registration(&f.sensor, Timestamp(2000)).unwrap();
    let mut reply = gwn_process_sensor_registration(
        &req,
        &f.sensor_db,
        &f.keys,
        Timestamp(2001),
        DELTA_T,
        Timestamp(2001),
    )
    .unwrap();
    reply.q = reply.q.flip_bit(77);
    assert_eq!(
        sensor_finish_registration(&f.sensor, &reply, Timestamp(2002), DELTA_T).unwrap_err(),
        SchemeError::BadVerifier
    );
}

#[test]
fn login_request_matches_golden_vectors() {
    let f = fixture();
    let run = run_registrations(&f);
    let req = user_login(&run.card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(4000));
    assert_eq!(req.did, hex("3d8897594d9e901f6e5de1a7d6032b017120765b"));
    assert_eq!(req.c, hex("87a6afabbe73533f52557f692c0e6b0d93b208d9"));
    assert_eq!(req.pks, hex("77b52c404b19ac9018a1baa2d632f164b3d66616"));
    assert_eq!(req.te, run.card.te);
}

#[test]
fn login_masks_unmask_with_honest_credential() {
    let f = fixture();
    let run = run_registrations(&f);
    let k_i = Ephemeral::new(digest(0x33));
    let req = user_login(&run.card, &f.secret, &k_i, Timestamp(4000));
    let tc = run.card.ptc.xor(&f.secret.password_verifier());
    assert_eq!(
        req.did.xor(&formulas::login_mask(&tc, req.ts4)),
        f.secret.id().encoded()
    );
    assert_eq!(
        req.pks.xor(&formulas::ephemeral_mask(&tc, req.ts4)),
        *k_i.digest()
    );
}

fn full_login(
    f: &Fixture,
    run: &HonestRun,
) -> (LoginRequest, LoginAcceptance, SensorReply, Digest) {
    let k_i = Ephemeral::new(digest(0x33));
    let req = user_login(&run.card, &f.secret, &k_i, Timestamp(4000));
    let records = vec![run.record.clone()];
    let acceptance = gwn_process_login(
        &req,
        &records,
        &f.keys,
        Timestamp(4001),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(4001),
    )
    .unwrap();
    let (reply, sensor_k_i) = sensor_process(
        &acceptance.relay,
        &run.sensor,
        &Ephemeral::new(digest(0x44)),
        Timestamp(4002),
        DELTA_T,
        Timestamp(4002),
    )
    .unwrap();
    (req, acceptance, reply, sensor_k_i)
}

#[test]
fn honest_login_recovers_ephemeral_and_updates_record() {
    let f = fixture();
    let run = run_registrations(&f);
    let (req, acceptance, _, sensor_k_i) = full_login(&f, &run);
    assert_eq!(acceptance.k_i, digest(0x33));
    assert_eq!(sensor_k_i, digest(0x33));
    assert!(acceptance.record.status_bit);
    assert_eq!(acceptance.record.last_login, Some(req.ts4));
}

#[test]
fn session_keys_agree_and_match_golden_vector() {
    let f = fixture();
    let run = run_registrations(&f);
    let (_, acceptance, reply, sensor_k_i) = full_login(&f, &run);
    let user_key = finalize(
        &reply,
        &digest(0x33),
        f.secret.id(),
        &reply.sid,
        Timestamp(4003),
        DELTA_T,
    )
    .unwrap();
    let gwn_key = finalize(
        &reply,
        &acceptance.k_i,
        &acceptance.record.id,
        f.sensor.sid(),
        Timestamp(4003),
        DELTA_T,
    )
    .unwrap();
    let sensor_key = sensor_session_key(&sensor_k_i, &Ephemeral::new(digest(0x44)));
    assert_eq!(user_key, sensor_key);
    assert_eq!(gwn_key, sensor_key);
    assert_eq!(
        user_key.to_hex(),
        "9488f910c61bc43e3576ba5877e1de023cd33848"
    );
}

#[test]
fn login_flipped_c_rejected() {
    let f = fixture();
    let run = run_registrations(&f);
    let mut req = user_login(&run.card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(4000));
    req.c = req.c.flip_bit(159);
    let err = gwn_process_login(
        &req,
        std::slice::from_ref(&run.record),
        &f.keys,
        Timestamp(4001),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(4001),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::LoginRejected);
}

#[test]
fn login_te_mismatch_rejected() {
    let f = fixture();
    let run = run_registrations(&f);
    let mut req = user_login(&run.card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(4000));
    req.te = Timestamp(req.te.seconds() + 1);
    let err = gwn_process_login(
        &req,
        std::slice::from_ref(&run.record),
        &f.keys,
        Timestamp(4001),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(4001),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::TeMismatch);
}

#[test]
fn login_after_expiry_rejected() {
    let f = fixture();
    let run = run_registrations(&f);
    let te = run.card.te.seconds();
    let req = user_login(&run.card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(te + 1));
    let err = gwn_process_login(
        &req,
        std::slice::from_ref(&run.record),
        &f.keys,
        Timestamp(te + 2),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(te + 2),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::ExpiredCredential);
}

#[test]
fn login_ambiguous_table_rejected() {
    let f = fixture();
    let run = run_registrations(&f);
    let req = user_login(&run.card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(4000));
    let records = vec![run.record.clone(), run.record.clone()];
    let err = gwn_process_login(
        &req,
        &records,
        &f.keys,
        Timestamp(4001),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(4001),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::LoginRejected);
}

#[test]
fn login_resolution_skips_unrelated_records() {
    let f = fixture();
    let run = run_registrations(&f);
    let decoy = GwnUserRecord {
        id: Identity::new(b"bob".as_slice()).unwrap(),
        q: digest(0x5a),
        te: Timestamp(500_000),
        status_bit: false,
        last_login: None,
    };
    let req = user_login(&run.card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(4000));
    let records = vec![decoy, run.record.clone()];
    let acceptance = gwn_process_login(
        &req,
        &records,
        &f.keys,
        Timestamp(4001),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(4001),
    )
    .unwrap();
    assert_eq!(acceptance.record_index, 1);
}

#[test]
fn sensor_rejects_flipped_relay_verifier() {
    let f = fixture();
    let run = run_registrations(&f);
    let (_, mut acceptance, _, _) = full_login(&f, &run);
    acceptance.relay.c_gwn = acceptance.relay.c_gwn.flip_bit(1);
    let err = sensor_process(
        &acceptance.relay,
        &run.sensor,
        &Ephemeral::new(digest(0x44)),
        Timestamp(4002),
        DELTA_T,
        Timestamp(4002),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::GwnRejected);
}

#[test]
fn sensor_rejects_flipped_relayed_did() {
    let f = fixture();
    let run = run_registrations(&f);
    let (_, mut acceptance, _, _) = full_login(&f, &run);
    acceptance.relay.did = acceptance.relay.did.flip_bit(42);
    let err = sensor_process(
        &acceptance.relay,
        &run.sensor,
        &Ephemeral::new(digest(0x44)),
        Timestamp(4002),
        DELTA_T,
        Timestamp(4002),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::GwnRejected);
}

#[test]
fn finalize_rejects_flipped_pks() {
    let f = fixture();
    let run = run_registrations(&f);
    let (_, _, mut reply, _) = full_login(&f, &run);
    reply.pks = reply.pks.flip_bit(3);
    let err = finalize(
        &reply,
        &digest(0x33),
        f.secret.id(),
        f.sensor.sid(),
        Timestamp(4003),
        DELTA_T,
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::SensorRejected);
}

#[test]
fn equal_ephemerals_hash_the_zero_block() {
    let key = formulas::session_key(&digest(0x33), &digest(0x33));
    let zero = [0u8; 20];
    assert_eq!(key, hash(&crate::bitcodec::concat(&[&zero]).unwrap()));
}

#[test]
fn corrupted_sensor_credential_detected_at_relay_check() {
    // A flipped REG_j is invisible at S-3 but surfaces when the sensor
    // checks the relay verifier.
    let f = fixture();
    let req = user_make_registration(&f.pre, &f.secret, Timestamp(1000));
    let (reply, record) = gwn_process_registration(
        &req,
        &f.user_db,
        &f.keys,
        Timestamp(1001),
        DELTA_T,
        Timestamp(500_000),
    )
    .unwrap();
    let card = user_verify_card(&reply, &f.secret).unwrap();

    let sreq = sensor_make_registration(&f.sensor, Timestamp(2000)).unwrap();
    let mut sreply = gwn_process_sensor_registration(
        &sreq,
        &f.sensor_db,
        &f.keys,
        Timestamp(2001),
        DELTA_T,
        Timestamp(2001),
    )
    .unwrap();
    sreply.reg = sreply.reg.flip_bit(99);
    let sensor = sensor_finish_registration(&f.sensor, &sreply, Timestamp(2002), DELTA_T).unwrap();

    let login = user_login(&card, &f.secret, &Ephemeral::new(digest(0x33)), Timestamp(4000));
    let acceptance = gwn_process_login(
        &login,
        std::slice::from_ref(&record),
        &f.keys,
        Timestamp(4001),
        DELTA_T,
        f.sensor.sid(),
        Timestamp(4001),
    )
    .unwrap();
    let err = sensor_process(
        &acceptance.relay,
        &sensor,
        &Ephemeral::new(digest(0x44)),
        Timestamp(4002),
        DELTA_T,
        Timestamp(4002),
    )
    .unwrap_err();
    assert_eq!(err, SchemeError::GwnRejected);
}

#[test]
fn pipeline_round_trip_fuzz() {
    // 100 randomized full runs: registration through key agreement, all
    // three derived keys byte-identical.
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
    for _ in 0..100 {
        let (f, ids) = random_fixture(&mut rng);
        let run = run_registrations(&f);
        let k_i = Ephemeral::random(&mut rng);
        let k_j = Ephemeral::random(&mut rng);
        let req = user_login(&run.card, &f.secret, &k_i, Timestamp(4000));
        let acceptance = gwn_process_login(
            &req,
            std::slice::from_ref(&run.record),
            &f.keys,
            Timestamp(4001),
            DELTA_T,
            f.sensor.sid(),
            Timestamp(4001),
        )
        .unwrap();
        assert_eq!(acceptance.k_i, *k_i.digest());
        let (reply, sensor_k_i) = sensor_process(
            &acceptance.relay,
            &run.sensor,
            &k_j,
            Timestamp(4002),
            DELTA_T,
            Timestamp(4002),
        )
        .unwrap();
        let user_key = finalize(
            &reply,
            k_i.digest(),
            &ids,
            &reply.sid,
            Timestamp(4003),
            DELTA_T,
        )
        .unwrap();
        let sensor_key = sensor_session_key(&sensor_k_i, &k_j);
        assert_eq!(user_key, sensor_key);
    }
}

/// Random fixture with printable identities and arbitrary passwords.
fn random_fixture(rng: &mut rand_chacha::ChaCha20Rng) -> (Fixture, Identity) {
    let id = random_identity(rng);
    let id_pre = random_identity(rng);
    let pre = PreCredential::new(id_pre, random_password(rng)).unwrap();
    let secret = UserSecret::new(id.clone(), random_password(rng), random_digest(rng)).unwrap();
    let keys = GwnKeys::random(rng);
    let sensor = SensorSecret::new(random_identity(rng).as_bytes(), random_digest(rng)).unwrap();
    let mut user_db = PreRegStore::new();
    user_db.insert(pre.id_pre().as_bytes().to_vec(), pre.secret_hash());
    let mut sensor_db = PreRegStore::new();
    sensor_db.insert(
        sensor.sid().to_vec(),
        formulas::sensor_secret_hash(sensor.sid(), sensor.r().unwrap()),
    );
    (
        Fixture {
            pre,
            secret,
            keys,
            sensor,
            user_db,
            sensor_db,
        },
        id,
    )
}

fn random_identity(rng: &mut rand_chacha::ChaCha20Rng) -> Identity {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    let len = 1 + (rng.next_u32() as usize) % 20;
    let bytes: Vec<u8> = (0..len)
        .map(|_| ALPHABET[(rng.next_u32() as usize) % ALPHABET.len()])
        .collect();
    Identity::new(bytes).unwrap()
}

fn random_password(rng: &mut rand_chacha::ChaCha20Rng) -> Vec<u8> {
    let len = 1 + (rng.next_u32() as usize) % 24;
    let mut bytes = vec![0u8; len];
    rng.fill_bytes(&mut bytes);
    bytes
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn identity_strategy() -> impl Strategy<Value = Identity> {
        prop::collection::vec(1u8..=255, 1..=20).prop_map(|b| Identity::new(b).unwrap())
    }

    fn password_strategy() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(any::<u8>(), 0..=32)
    }

    fn digest_strategy() -> impl Strategy<Value = Digest> {
        prop::array::uniform20(any::<u8>()).prop_map(Digest::from_bytes)
    }

    fn world(
        id_pre: Identity,
        pw_pre: Vec<u8>,
        id: Identity,
        pw: Vec<u8>,
        seeds: [Digest; 5],
    ) -> (Fixture, HonestRun) {
        let [r_i, r_j, k_u, k_s, _] = seeds;
        let pre = PreCredential::new(id_pre, pw_pre).unwrap();
        let secret = UserSecret::new(id, pw, r_i).unwrap();
        let keys = GwnKeys::new(k_u, k_s);
        let sensor = SensorSecret::new(b"node".as_slice(), r_j).unwrap();
        let mut user_db = PreRegStore::new();
        user_db.insert(pre.id_pre().as_bytes().to_vec(), pre.secret_hash());
        let mut sensor_db = PreRegStore::new();
        sensor_db.insert(
            sensor.sid().to_vec(),
            formulas::sensor_secret_hash(sensor.sid(), sensor.r().unwrap()),
        );
        let f = Fixture {
            pre,
            secret,
            keys,
            sensor,
            user_db,
            sensor_db,
        };
        let run = run_registrations(&f);
        (f, run)
    }

    proptest! {
        // Registration through key agreement succeeds and all three
        // parties derive the same key, for arbitrary credentials and
        // arbitrary hop delays inside the freshness window.
        #[test]
        fn round_trip_key_agreement(
            id_pre in identity_strategy(),
            pw_pre in password_strategy(),
            id in identity_strategy(),
            pw in password_strategy(),
            seeds in prop::array::uniform5(digest_strategy()),
            hops in prop::array::uniform3(0..DELTA_T),
        ) {
            let (f, run) = world(id_pre, pw_pre, id, pw, seeds);
            let k_i = Ephemeral::new(seeds[4]);
            let ts4 = Timestamp(4000);
            let gwn_now = ts4.plus(hops[0]);
            let sensor_now = gwn_now.plus(hops[1]);
            let final_now = sensor_now.plus(hops[2]);
            let req = user_login(&run.card, &f.secret, &k_i, ts4);
            let acceptance = gwn_process_login(
                &req,
                std::slice::from_ref(&run.record),
                &f.keys,
                gwn_now,
                DELTA_T,
                f.sensor.sid(),
                gwn_now,
            )
            .unwrap();
            let (reply, sensor_k_i) = sensor_process(
                &acceptance.relay,
                &run.sensor,
                &Ephemeral::new(seeds[0]),
                sensor_now,
                DELTA_T,
                sensor_now,
            )
            .unwrap();
            let user_key = finalize(
                &reply,
                k_i.digest(),
                f.secret.id(),
                &reply.sid,
                final_now,
                DELTA_T,
            )
            .unwrap();
            let sensor_key = sensor_session_key(&sensor_k_i, &Ephemeral::new(seeds[0]));
            prop_assert_eq!(user_key, sensor_key);
        }

        // A login attempted with the wrong password never reaches the
        // sensor: the reconstructed credential is wrong, so no identity
        // table row resolves.
        #[test]
        fn wrong_password_login_is_rejected(
            id_pre in identity_strategy(),
            pw_pre in password_strategy(),
            id in identity_strategy(),
            pw in password_strategy(),
            wrong_pw in password_strategy(),
            seeds in prop::array::uniform5(digest_strategy()),
        ) {
            prop_assume!(pw != wrong_pw);
            let (f, run) = world(id_pre, pw_pre, id.clone(), pw, seeds);
            let wrong = UserSecret::new(id, wrong_pw, *f.secret.r()).unwrap();
            let req = user_login(&run.card, &wrong, &Ephemeral::new(seeds[4]), Timestamp(4000));
            let err = gwn_process_login(
                &req,
                std::slice::from_ref(&run.record),
                &f.keys,
                Timestamp(4001),
                DELTA_T,
                f.sensor.sid(),
                Timestamp(4001),
            )
            .unwrap_err();
            prop_assert_eq!(err, SchemeError::LoginRejected);
        }
    }
}
