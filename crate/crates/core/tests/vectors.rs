//! Frozen values computed outside this crate (Python hashlib, sympy, hand
//! arithmetic) for the challenge layout and the worked toy-group example.

mod common;

use common::{big, params_256, toy, P256};
use num_bigint::BigUint;
use zkqr::protocol::{
    challenge_preimage, derive_challenge, respond, verify_at, verify_equation, ChallengeMode,
    Commitment,
};
use zkqr::{FreshnessPolicy, KeyPair, KeyRegistry, Nonce, NonceStore, Proof, RejectReason};

fn counting_nonce() -> Nonce {
    let mut n = [0u8; 16];
    n.iter_mut().enumerate().for_each(|(i, b)| *b = i as u8);
    Nonce(n)
}

#[test]
fn toy_challenge_vector() {
    let params = toy();
    let pre = challenge_preimage(&params, &big(10), &big(8), &counting_nonce(), 1_700_000_000);
    assert_eq!(
        hex::encode(&pre),
        "0a08000102030405060708090a0b0c0d0e0f000000006553f100"
    );
    let c = derive_challenge(&params, &big(10), &big(8), &counting_nonce(), 1_700_000_000);
    let expected: BigUint =
        "68950698072129235466921119637157328565707548242629973861578859236797794329145"
            .parse()
            .unwrap();
    assert_eq!(c, expected);
}

#[test]
fn challenge_vector_256() {
    let params = params_256();
    assert_eq!(params.p().to_str_radix(10), P256);
    let t = params.pow_g(&big(12345));
    let y = params.pow_g(&big(67890));
    assert_eq!(
        t.to_str_radix(10),
        "91997354570010225555918405015145732364570863700259329246735400520170360049633"
    );
    assert_eq!(
        y.to_str_radix(10),
        "87656586556391665422777789955690411804106244386428141841630479952944957021855"
    );
    let pre = challenge_preimage(&params, &t, &y, &Nonce([0xff; 16]), 1_234_567_890);
    assert_eq!(pre.len(), 32 + 32 + 16 + 8);
    let c = derive_challenge(&params, &t, &y, &Nonce([0xff; 16]), 1_234_567_890);
    assert_eq!(
        c.to_str_radix(10),
        "45458581039770090989630214182291597225493303147352304918824707369732966557381"
    );
}

#[test]
fn worked_example_through_the_verifier() {
    // x = 6 -> y = 8; r = 3 -> t = 10; c = 4 -> s = 5; 5^5 = 20 = 10 * 8^4 (mod 23)
    let params = toy();
    let kp = KeyPair::from_secret(&params, big(6)).unwrap();
    assert_eq!(kp.public(), &big(8));
    let commitment = Commitment::from_secret(&params, big(3));
    assert_eq!(commitment.t, big(10));
    let s = respond(commitment.secret(), &big(4), kp.secret(), &params);
    assert_eq!(s, big(5));
    assert!(verify_equation(&params, &big(8), &big(10), &big(5), &big(4)));
    assert!(!verify_equation(&params, &big(8), &big(10), &big(6), &big(4)));
    assert!(!verify_equation(&params, &big(9), &big(10), &big(5), &big(4)));
}

/// Search for a nonce whose reduced challenge is 4 so the worked example
/// runs through the full verifier, hash included.
#[test]
fn worked_example_with_hashed_challenge() {
    let params = toy();
    let kp = KeyPair::from_secret(&params, big(6)).unwrap();
    let registry = KeyRegistry::new();
    registry
        .register("alice", kp.public().clone(), kp.params_digest())
        .unwrap();
    let ts = 1_000;
    let nonce = (0u8..=255)
        .map(|i| Nonce([i; 16]))
        .find(|n| derive_challenge(&params, &big(10), &big(8), n, ts) % 22u32 == big(4))
        .expect("some nonce reduces to c = 4");

    let proof = Proof {
        t: big(10),
        s: big(5),
        nonce,
        timestamp: ts,
        key_id: Some("alice".into()),
    };
    let store = NonceStore::new(FreshnessPolicy::default());
    let policy = FreshnessPolicy::default();
    let d = verify_at(&params, &registry, &proof, ts, &policy, &store, ChallengeMode::ReducedModOrder);
    assert!(d.accepted);

    let mut wrong_s = proof.clone();
    wrong_s.s = big(6);
    wrong_s.nonce.0[15] ^= 0x80;
    let d = verify_at(&params, &registry, &wrong_s, ts, &policy, &store, ChallengeMode::ReducedModOrder);
    assert!(!d.accepted);
    let d = verify_at(&params, &registry, &proof, ts, &policy, &store, ChallengeMode::ReducedModOrder);
    assert_eq!(d.reason, RejectReason::ReplayedNonce);
}
