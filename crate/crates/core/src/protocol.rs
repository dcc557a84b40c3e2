//! Non-interactive Schnorr identification with timestamp and nonce freshness.
//!
//! Prover: `t = g^r`, `c = SHA-256(t || y || nonce || timestamp)`,
//! `s = r + c*x mod (p - 1)`. Verifier: resolve the key, range-check `t` and
//! `s`, check the timestamp window, consume the nonce, then test
//! `g^s == t * y^c (mod p)`. The first failing check names the rejection.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{random_in_range, GroupParams};
use crate::identity::{write_atomic, KeyPair, KeyRegistry, PublicKey};

pub const NONCE_LEN: usize = 16;
pub const DEFAULT_DELTA_SECONDS: u64 = 30;
pub const DEFAULT_NONCE_TTL_SECONDS: u64 = 120;

/// Single-use 16-byte session value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nonce(pub [u8; NONCE_LEN]);

impl Nonce {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Result<Self> {
        let mut bytes = [0u8; NONCE_LEN];
        rng.try_fill_bytes(&mut bytes)
            .map_err(|e| Error::Entropy(e.to_string()))?;
        Ok(Nonce(bytes))
    }

    pub fn as_bytes(&self) -> &[u8; NONCE_LEN] {
        &self.0
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if s.len() != 2 * NONCE_LEN {
            return Err(Error::Encoding(format!(
                "nonce must be {} hex characters, got {}",
                2 * NONCE_LEN,
                s.len()
            )));
        }
        let mut out = [0u8; NONCE_LEN];
        hex::decode_to_slice(s, &mut out).map_err(|e| Error::Encoding(format!("nonce: {e}")))?;
        Ok(Nonce(out))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonce({})", self.to_hex())
    }
}

/// The transported tuple `(t, s, nonce, timestamp)` plus the key id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub t: BigUint,
    pub s: BigUint,
    pub nonce: Nonce,
    /// Unix seconds.
    pub timestamp: u64,
    pub key_id: Option<String>,
}

/// Timestamp tolerance and nonce retention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreshnessPolicy {
    delta_seconds: u64,
    nonce_ttl_seconds: u64,
}

impl FreshnessPolicy {
    /// A nonce must outlive every window in which its proof could verify, so
    /// `nonce_ttl_seconds >= 2 * delta_seconds`.
    pub fn new(delta_seconds: u64, nonce_ttl_seconds: u64) -> Result<Self> {
        if nonce_ttl_seconds < delta_seconds.saturating_mul(2) {
            return Err(Error::Parameter(format!(
                "nonce TTL {nonce_ttl_seconds}s is shorter than twice the window {delta_seconds}s"
            )));
        }
        Ok(FreshnessPolicy {
            delta_seconds,
            nonce_ttl_seconds,
        })
    }

    /// Window `delta` with the TTL widened to `2 * delta` if the default is too short.
    pub fn with_delta(delta_seconds: u64) -> Self {
        let ttl = DEFAULT_NONCE_TTL_SECONDS.max(delta_seconds.saturating_mul(2));
        FreshnessPolicy {
            delta_seconds,
            nonce_ttl_seconds: ttl,
        }
    }

    pub fn delta_seconds(&self) -> u64 {
        self.delta_seconds
    }

    pub fn nonce_ttl_seconds(&self) -> u64 {
        self.nonce_ttl_seconds
    }
}

impl Default for FreshnessPolicy {
    fn default() -> Self {
        FreshnessPolicy {
            delta_seconds: DEFAULT_DELTA_SECONDS,
            nonce_ttl_seconds: DEFAULT_NONCE_TTL_SECONDS,
        }
    }
}

/// Why a proof was rejected, or `Ok`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectReason {
    Ok,
    StaleTimestamp,
    FutureTimestamp,
    ReplayedNonce,
    BadRange,
    EquationFailed,
    UnknownKey,
    ParamsMismatch,
}

impl RejectReason {
    pub const ALL: [RejectReason; 8] = [
        RejectReason::Ok,
        RejectReason::StaleTimestamp,
        RejectReason::FutureTimestamp,
        RejectReason::ReplayedNonce,
        RejectReason::BadRange,
        RejectReason::EquationFailed,
        RejectReason::UnknownKey,
        RejectReason::ParamsMismatch,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Ok => "ok",
            RejectReason::StaleTimestamp => "stale_timestamp",
            RejectReason::FutureTimestamp => "future_timestamp",
            RejectReason::ReplayedNonce => "replayed_nonce",
            RejectReason::BadRange => "bad_range",
            RejectReason::EquationFailed => "equation_failed",
            RejectReason::UnknownKey => "unknown_key",
            RejectReason::ParamsMismatch => "params_mismatch",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyDecision {
    pub accepted: bool,
    pub reason: RejectReason,
}

impl VerifyDecision {
    pub fn accept() -> Self {
        VerifyDecision {
            accepted: true,
            reason: RejectReason::Ok,
        }
    }

    pub fn reject(reason: RejectReason) -> Self {
        debug_assert_ne!(reason, RejectReason::Ok);
        VerifyDecision {
            accepted: false,
            reason,
        }
    }
}

impl fmt::Display for VerifyDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accepted {
            f.write_str("ACCEPT")
        } else {
            write!(f, "REJECT:{}", self.reason)
        }
    }
}

/// Source of Unix time in seconds.
pub trait Clock {
    fn now(&self) -> Result<u64>;
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> Result<u64> {
        (**self).now()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Result<u64> {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .map_err(|e| Error::Clock(e.to_string()))
    }
}

/// Settable clock for tests and simulations.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(now: u64) -> Self {
        ManualClock(AtomicU64::new(now))
    }

    pub fn set(&self, now: u64) {
        self.0.store(now, Ordering::SeqCst);
    }

    pub fn advance(&self, seconds: u64) {
        self.0.fetch_add(seconds, Ordering::SeqCst);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Result<u64> {
        Ok(self.get())
    }
}

/// How the hash output is turned into the challenge exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChallengeMode {
    /// The full 256-bit digest, unreduced.
    #[default]
    Full,
    /// Digest reduced mod `p - 1`. Test-only: gives exact forgery statistics on toy groups.
    ReducedModOrder,
}

impl ChallengeMode {
    fn apply(&self, c: BigUint, params: &GroupParams) -> BigUint {
        match self {
            ChallengeMode::Full => c,
            ChallengeMode::ReducedModOrder => c % params.order(),
        }
    }
}

/// Ephemeral secret `r` and commitment `t = g^r mod p`.
pub struct Commitment {
    r: BigUint,
    pub t: BigUint,
}

impl fmt::Debug for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Commitment")
            .field("r", &"<redacted>")
            .field("t", &self.t)
            .finish()
    }
}

impl Commitment {
    /// Commitment from a chosen `r`; for fixtures and brute-force checks.
    pub fn from_secret(params: &GroupParams, r: BigUint) -> Self {
        let t = params.pow_g(&r);
        Commitment { r, t }
    }

    pub fn secret(&self) -> &BigUint {
        &self.r
    }
}

/// Draws `r` uniformly from `[1, p - 2]` and commits to it.
pub fn commit<R: RngCore + CryptoRng>(params: &GroupParams, rng: &mut R) -> Result<Commitment> {
    let r = random_in_range(rng, &BigUint::one(), &(params.p() - 2u32))?;
    Ok(Commitment::from_secret(params, r))
}

/// Fixed-width big-endian encoding, left-padded with zeros to `width` bytes.
pub(crate) fn encode_fixed(value: &BigUint, width: usize) -> Vec<u8> {
    let raw = value.to_bytes_be();
    let raw = if value.is_zero() { Vec::new() } else { raw };
    debug_assert!(raw.len() <= width, "value wider than field");
    let mut out = vec![0u8; width.saturating_sub(raw.len())];
    out.extend_from_slice(&raw);
    out
}

/// Hash pre-image: `enc(t) || enc(y) || nonce || be64(timestamp)` where
/// `enc` pads to `ceil(bit_length / 8)` bytes.
pub fn challenge_preimage(
    params: &GroupParams,
    t: &BigUint,
    y: &BigUint,
    nonce: &Nonce,
    timestamp: u64,
) -> Vec<u8> {
    let width = params.element_len();
    let mut buf = Vec::with_capacity(2 * width + NONCE_LEN + 8);
    buf.extend_from_slice(&encode_fixed(t, width));
    buf.extend_from_slice(&encode_fixed(y, width));
    buf.extend_from_slice(nonce.as_bytes());
    buf.extend_from_slice(&timestamp.to_be_bytes());
    buf
}

/// `c` = SHA-256 of the pre-image, read as a big-endian integer.
pub fn derive_challenge(
    params: &GroupParams,
    t: &BigUint,
    y: &BigUint,
    nonce: &Nonce,
    timestamp: u64,
) -> BigUint {
    let digest = Sha256::digest(challenge_preimage(params, t, y, nonce, timestamp));
    BigUint::from_bytes_be(&digest)
}

/// `s = (r + c*x) mod (p - 1)`.
pub fn respond(r: &BigUint, c: &BigUint, x: &BigUint, params: &GroupParams) -> BigUint {
    (r + c * x) % params.order()
}

/// Builds a proof for `keypair` stamped with `clock`'s current time.
pub fn prove<C: Clock, R: RngCore + CryptoRng>(
    params: &GroupParams,
    keypair: &KeyPair,
    key_id: Option<&str>,
    clock: &C,
    rng: &mut R,
) -> Result<Proof> {
    prove_with_mode(params, keypair, key_id, clock, rng, ChallengeMode::Full)
}

pub fn prove_with_mode<C: Clock, R: RngCore + CryptoRng>(
    params: &GroupParams,
    keypair: &KeyPair,
    key_id: Option<&str>,
    clock: &C,
    rng: &mut R,
    mode: ChallengeMode,
) -> Result<Proof> {
    if keypair.params_digest() != params.digest() {
        return Err(Error::ParamsMismatch(
            "key pair belongs to a different parameter set".into(),
        ));
    }
    if let Some(id) = key_id {
        crate::identity::validate_key_id(id)?;
    }
    let commitment = commit(params, rng)?;
    let nonce = Nonce::random(rng)?;
    let timestamp = clock.now()?;
    let c = mode.apply(
        derive_challenge(params, &commitment.t, keypair.public(), &nonce, timestamp),
        params,
    );
    let s = respond(&commitment.r, &c, keypair.secret(), params);
    Ok(Proof {
        t: commitment.t,
        s,
        nonce,
        timestamp,
        key_id: key_id.map(str::to_owned),
    })
}

/// Where `timestamp` falls relative to the window `[now - delta, now + delta]`.
pub fn freshness_verdict(timestamp: u64, now: u64, policy: &FreshnessPolicy) -> RejectReason {
    if timestamp <= now {
        if now - timestamp > policy.delta_seconds {
            return RejectReason::StaleTimestamp;
        }
    } else if timestamp - now > policy.delta_seconds {
        return RejectReason::FutureTimestamp;
    }
    RejectReason::Ok
}

/// `|now - timestamp| <= delta`.
pub fn check_freshness(timestamp: u64, now: u64, policy: &FreshnessPolicy) -> bool {
    freshness_verdict(timestamp, now, policy) == RejectReason::Ok
}

#[derive(Debug, Default)]
struct NonceState {
    seen: HashMap<Nonce, u64>,
    last_sweep: u64,
}

/// Nonces seen within the retention window.
#[derive(Debug)]
pub struct NonceStore {
    state: Mutex<NonceState>,
    policy: FreshnessPolicy,
}

impl NonceStore {
    pub fn new(policy: FreshnessPolicy) -> Self {
        NonceStore {
            state: Mutex::new(NonceState::default()),
            policy,
        }
    }

    pub fn policy(&self) -> &FreshnessPolicy {
        &self.policy
    }

    /// Records `nonce` and returns true if it is unseen (or expired);
    /// returns false if it is still retained. Atomic.
    pub fn check_and_insert(&self, nonce: &Nonce, now: u64) -> bool {
        let ttl = self.policy.nonce_ttl_seconds;
        let mut state = self.state.lock().expect("nonce store lock poisoned");
        // sweep at most once per tick of the clock
        if now != state.last_sweep {
            state.seen.retain(|_, &mut at| now.saturating_sub(at) <= ttl);
            state.last_sweep = now;
        }
        match state.seen.get(nonce) {
            Some(&at) if now.saturating_sub(at) <= ttl => false,
            _ => {
                state.seen.insert(*nonce, now);
                true
            }
        }
    }

    /// Drops every entry older than the TTL.
    pub fn evict_expired(&self, now: u64) {
        let ttl = self.policy.nonce_ttl_seconds;
        let mut state = self.state.lock().expect("nonce store lock poisoned");
        state.seen.retain(|_, &mut at| now.saturating_sub(at) <= ttl);
        state.last_sweep = now;
    }

    pub fn clear(&self) {
        self.state.lock().expect("nonce store lock poisoned").seen.clear();
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("nonce store lock poisoned").seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, nonce: &Nonce) -> bool {
        self.state
            .lock()
            .expect("nonce store lock poisoned")
            .seen
            .contains_key(nonce)
    }

    /// `{"<nonce hex>": <inserted unix seconds>, ...}` with sorted keys.
    pub fn to_json(&self) -> Vec<u8> {
        let state = self.state.lock().expect("nonce store lock poisoned");
        let sorted: std::collections::BTreeMap<String, u64> = state
            .seen
            .iter()
            .map(|(n, &at)| (n.to_hex(), at))
            .collect();
        let mut out = serde_json::to_vec_pretty(&sorted).expect("nonce store serialize");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8], policy: FreshnessPolicy) -> Result<Self> {
        let raw: HashMap<String, u64> = serde_json::from_slice(bytes).map_err(Error::from_json)?;
        let seen = raw
            .into_iter()
            .map(|(k, at)| Ok((Nonce::from_hex(&k)?, at)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(NonceStore {
            state: Mutex::new(NonceState { seen, last_sweep: 0 }),
            policy,
        })
    }

    /// Loads a persisted store; a missing file yields an empty one.
    pub fn load(path: &Path, policy: FreshnessPolicy) -> Result<Self> {
        match std::fs::read(path) {
            Ok(bytes) => Self::from_json(&bytes, policy),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new(policy)),
            Err(e) => Err(Error::storage(path, e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_json(), false)
    }
}

pub fn nonce_check_and_insert(store: &NonceStore, nonce: &Nonce, now: u64) -> bool {
    store.check_and_insert(nonce, now)
}

/// The Schnorr equation `g^s == t * y^c (mod p)`.
pub fn verify_equation(
    params: &GroupParams,
    y: &BigUint,
    t: &BigUint,
    s: &BigUint,
    c: &BigUint,
) -> bool {
    let p = params.p();
    let lhs = params.pow_g(s);
    let rhs = (t * y.modpow(c, p)) % p;
    lhs == rhs
}

fn in_range(params: &GroupParams, proof: &Proof) -> bool {
    !proof.t.is_zero() && &proof.t < params.p() && proof.s < params.order()
}

/// Full verification against the registry, reading time from `clock`.
///
/// Checks run key, range, freshness, nonce, equation; the nonce is consumed
/// only once the cheaper checks before it have passed. Errors only if the
/// clock fails.
pub fn verify<C: Clock>(
    params: &GroupParams,
    registry: &KeyRegistry,
    proof: &Proof,
    clock: &C,
    policy: &FreshnessPolicy,
    store: &NonceStore,
) -> Result<VerifyDecision> {
    let now = clock.now()?;
    Ok(verify_at(
        params,
        registry,
        proof,
        now,
        policy,
        store,
        ChallengeMode::Full,
    ))
}

/// [`verify`] with an explicit time and challenge mode.
pub fn verify_at(
    params: &GroupParams,
    registry: &KeyRegistry,
    proof: &Proof,
    now: u64,
    policy: &FreshnessPolicy,
    store: &NonceStore,
    mode: ChallengeMode,
) -> VerifyDecision {
    let key = match proof.key_id.as_deref().map(|id| registry.lookup(id)) {
        Some(Ok(key)) => key,
        _ => return VerifyDecision::reject(RejectReason::UnknownKey),
    };
    verify_with_key(params, &key, proof, now, policy, store, mode)
}

/// Verification against an already-resolved public key.
pub fn verify_with_key(
    params: &GroupParams,
    key: &PublicKey,
    proof: &Proof,
    now: u64,
    policy: &FreshnessPolicy,
    store: &NonceStore,
    mode: ChallengeMode,
) -> VerifyDecision {
    if key.params_digest != params.digest() {
        return VerifyDecision::reject(RejectReason::ParamsMismatch);
    }
    if !in_range(params, proof) {
        return VerifyDecision::reject(RejectReason::BadRange);
    }
    let fresh = freshness_verdict(proof.timestamp, now, policy);
    if fresh != RejectReason::Ok {
        return VerifyDecision::reject(fresh);
    }
    if !store.check_and_insert(&proof.nonce, now) {
        return VerifyDecision::reject(RejectReason::ReplayedNonce);
    }
    let c = mode.apply(
        derive_challenge(params, &proof.t, &key.y, &proof.nonce, proof.timestamp),
        params,
    );
    if verify_equation(params, &key.y, &proof.t, &proof.s, &c) {
        VerifyDecision::accept()
    } else {
        VerifyDecision::reject(RejectReason::EquationFailed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::sync::Arc;

    fn toy() -> GroupParams {
        GroupParams::new(BigUint::from(23u32), BigUint::from(5u32)).unwrap()
    }

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn commit_with_forced_r() {
        let params = toy();
        assert_eq!(Commitment::from_secret(&params, b(3)).t, b(10));
        assert_eq!(125 % 23, 10);
        assert_eq!(Commitment::from_secret(&params, b(0)).t, b(1));
        assert_eq!(Commitment::from_secret(&params, b(11)).t, b(22));
    }

    #[test]
    fn commit_draws_nonzero_r() {
        let params = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..2_000 {
            let c = commit(&params, &mut rng).unwrap();
            let r = c.secret().to_u64().unwrap();
            assert!((1..=21).contains(&r));
            assert_eq!(c.t, params.pow_g(c.secret()));
        }
        assert!(format!("{:?}", commit(&params, &mut rng).unwrap()).contains("<redacted>"));
    }

    #[test]
    fn respond_examples() {
        let params = toy();
        assert_eq!(respond(&b(3), &b(4), &b(6), &params), b(5));
        assert_eq!(respond(&b(3), &b(0), &b(17), &params), b(3));
        assert_eq!(respond(&b(0), &b(4), &b(6), &params), b(2));
    }

    #[test]
    fn challenge_layout_and_determinism() {
        let params = toy();
        let nonce = Nonce([0xab; 16]);
        let pre = challenge_preimage(&params, &b(10), &b(8), &nonce, 0x0102);
        let mut expected = vec![0x0a, 0x08];
        expected.extend_from_slice(&[0xab; 16]);
        expected.extend_from_slice(&[0, 0, 0, 0, 0, 0, 1, 2]);
        assert_eq!(pre, expected);

        let c1 = derive_challenge(&params, &b(10), &b(8), &nonce, 0x0102);
        let c2 = derive_challenge(&params, &b(10), &b(8), &nonce, 0x0102);
        assert_eq!(c1, c2);
        assert!(c1.bits() <= 256);

        let mut flipped = nonce;
        flipped.0[7] ^= 1;
        assert_ne!(derive_challenge(&params, &b(10), &b(8), &flipped, 0x0102), c1);
    }

    #[test]
    fn freshness_window() {
        let policy = FreshnessPolicy::new(30, 120).unwrap();
        assert!(check_freshness(980, 1000, &policy));
        assert!(!check_freshness(960, 1000, &policy));
        assert!(!check_freshness(1040, 1000, &policy));
        assert!(check_freshness(970, 1000, &policy));
        assert!(check_freshness(1030, 1000, &policy));
        assert!(!check_freshness(969, 1000, &policy));
        assert!(!check_freshness(1031, 1000, &policy));
        assert_eq!(freshness_verdict(960, 1000, &policy), RejectReason::StaleTimestamp);
        assert_eq!(freshness_verdict(1040, 1000, &policy), RejectReason::FutureTimestamp);
        assert!(check_freshness(5, 0, &policy));
    }

    #[test]
    fn policy_requires_ttl_cover() {
        assert!(FreshnessPolicy::new(30, 59).is_err());
        assert!(FreshnessPolicy::new(30, 60).is_ok());
        let p = FreshnessPolicy::with_delta(100);
        assert_eq!(p.nonce_ttl_seconds(), 200);
        assert_eq!(FreshnessPolicy::default().delta_seconds(), 30);
        assert_eq!(FreshnessPolicy::default().nonce_ttl_seconds(), 120);
    }

    #[test]
    fn nonce_single_use_and_expiry() {
        let store = NonceStore::new(FreshnessPolicy::default());
        let n = Nonce([1; 16]);
        assert!(nonce_check_and_insert(&store, &n, 0));
        assert!(!nonce_check_and_insert(&store, &n, 0));
        assert!(!nonce_check_and_insert(&store, &n, 120));
        store.evict_expired(121);
        assert!(!store.contains(&n));
        assert!(nonce_check_and_insert(&store, &n, 121));
    }

    #[test]
    fn eviction_drops_only_expired() {
        let store = NonceStore::new(FreshnessPolicy::default());
        store.check_and_insert(&Nonce([1; 16]), 0);
        store.check_and_insert(&Nonce([2; 16]), 50);
        store.check_and_insert(&Nonce([3; 16]), 100);
        store.evict_expired(160);
        assert_eq!(store.len(), 2);
        assert!(!store.contains(&Nonce([1; 16])));
        // opportunistic sweep on a later insert
        store.check_and_insert(&Nonce([4; 16]), 200);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn concurrent_nonce_submission_has_one_winner() {
        let store = Arc::new(NonceStore::new(FreshnessPolicy::default()));
        let n = Nonce([9; 16]);
        let handles: Vec<_> = (0..16)
            .map(|_| {
                let store = Arc::clone(&store);
                std::thread::spawn(move || store.check_and_insert(&n, 10))
            })
            .collect();
        let wins = handles
            .into_iter()
            .map(|h| h.join().unwrap())
            .filter(|&w| w)
            .count();
        assert_eq!(wins, 1);
    }

    #[test]
    fn nonce_store_persistence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nonces.json");
        let store = NonceStore::load(&path, FreshnessPolicy::default()).unwrap();
        assert!(store.is_empty());
        store.check_and_insert(&Nonce([7; 16]), 1000);
        store.save(&path).unwrap();
        let back = NonceStore::load(&path, FreshnessPolicy::default()).unwrap();
        assert!(!back.check_and_insert(&Nonce([7; 16]), 1010));
        assert!(NonceStore::from_json(br#"{"abcd": 1}"#, FreshnessPolicy::default()).is_err());
    }

    /// The worked example: x=6 (y=8), r=3 (t=10), c=4 gives s=5.
    #[test]
    fn toy_equation_examples() {
        let params = toy();
        let (y, t, c) = (b(8), b(10), b(4));
        let s = respond(&b(3), &c, &b(6), &params);
        assert_eq!(s, b(5));
        // 5^5 = 3125 = 20 mod 23; 10 * 8^4 = 10 * 4096 = 10 * 2 = 20 mod 23
        assert_eq!(3125 % 23, 20);
        assert_eq!(4096 % 23, 2);
        assert!(verify_equation(&params, &y, &t, &s, &c));
        // s = 6: 5^6 = 8 != 20
        assert!(!verify_equation(&params, &y, &t, &b(6), &c));
        // wrong key y = 9: 10 * 9^4 = 14 mod 23
        assert_eq!(10 * 6561 % 23, 14);
        assert!(!verify_equation(&params, &b(9), &t, &s, &c));
    }

    struct Fixture {
        params: GroupParams,
        kp: KeyPair,
        registry: KeyRegistry,
        policy: FreshnessPolicy,
        store: NonceStore,
        clock: ManualClock,
        rng: ChaCha20Rng,
    }

    fn fixture(params: GroupParams) -> Fixture {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let kp = crate::identity::keygen(&params, &mut rng).unwrap();
        let registry = KeyRegistry::new();
        registry
            .register("alice", kp.public().clone(), kp.params_digest())
            .unwrap();
        Fixture {
            params,
            kp,
            registry,
            policy: FreshnessPolicy::default(),
            store: NonceStore::new(FreshnessPolicy::default()),
            clock: ManualClock::new(1_700_000_000),
            rng,
        }
    }

    impl Fixture {
        fn prove(&mut self) -> Proof {
            prove(&self.params, &self.kp, Some("alice"), &self.clock, &mut self.rng).unwrap()
        }

        fn verify(&self, proof: &Proof) -> VerifyDecision {
            verify(&self.params, &self.registry, proof, &self.clock, &self.policy, &self.store)
                .unwrap()
        }
    }

    #[test]
    fn honest_proofs_accept_and_replays_reject() {
        let mut f = fixture(toy());
        for _ in 0..200 {
            let proof = f.prove();
            assert!(proof.t >= b(1) && proof.t < b(23));
            assert!(proof.s < b(22));
            assert_eq!(f.verify(&proof), VerifyDecision::accept());
            assert_eq!(
                f.verify(&proof),
                VerifyDecision::reject(RejectReason::ReplayedNonce)
            );
        }
    }

    #[test]
    fn consecutive_proofs_differ() {
        let mut f = fixture(toy());
        let a = f.prove();
        let b = f.prove();
        assert_ne!(a.nonce, b.nonce);
    }

    #[test]
    fn rejection_order() {
        let mut f = fixture(toy());
        let proof = f.prove();

        let mut unknown = proof.clone();
        unknown.key_id = Some("ghost".into());
        assert_eq!(f.verify(&unknown).reason, RejectReason::UnknownKey);
        let mut anonymous = proof.clone();
        anonymous.key_id = None;
        assert_eq!(f.verify(&anonymous).reason, RejectReason::UnknownKey);

        let mut zero_t = proof.clone();
        zero_t.t = b(0);
        assert_eq!(f.verify(&zero_t).reason, RejectReason::BadRange);
        let mut big_t = proof.clone();
        big_t.t = b(23);
        assert_eq!(f.verify(&big_t).reason, RejectReason::BadRange);
        let mut big_s = proof.clone();
        big_s.s = b(22);
        assert_eq!(f.verify(&big_s).reason, RejectReason::BadRange);

        // stale copy must not burn the nonce
        f.clock.advance(31);
        assert_eq!(f.verify(&proof).reason, RejectReason::StaleTimestamp);
        assert!(!f.store.contains(&proof.nonce));
        f.clock.set(proof.timestamp - 31);
        assert_eq!(f.verify(&proof).reason, RejectReason::FutureTimestamp);
        f.clock.set(proof.timestamp + 30);
        assert!(f.verify(&proof).accepted);
    }

    #[test]
    fn params_mismatch_detected() {
        let mut f = fixture(toy());
        let proof = f.prove();
        let other = GroupParams::new(b(47), b(5)).unwrap();
        f.registry
            .register("bob", f.kp.public().clone(), other.digest())
            .unwrap();
        let mut to_bob = proof.clone();
        to_bob.key_id = Some("bob".into());
        assert_eq!(f.verify(&to_bob).reason, RejectReason::ParamsMismatch);

        let kp47 = KeyPair::from_secret(&other, b(3)).unwrap();
        let err = prove(&f.params, &kp47, None, &f.clock, &mut f.rng).unwrap_err();
        assert!(matches!(err, Error::ParamsMismatch(_)));
    }

    #[test]
    fn verify_propagates_clock_failure() {
        struct Broken;
        impl Clock for Broken {
            fn now(&self) -> Result<u64> {
                Err(Error::Clock("stopped".into()))
            }
        }
        let mut f = fixture(toy());
        let proof = f.prove();
        assert!(verify(&f.params, &f.registry, &proof, &Broken, &f.policy, &f.store).is_err());
        assert!(prove(&f.params, &f.kp, None, &Broken, &mut f.rng).is_err());
    }

    #[test]
    fn decision_display() {
        assert_eq!(VerifyDecision::accept().to_string(), "ACCEPT");
        assert_eq!(
            VerifyDecision::reject(RejectReason::ReplayedNonce).to_string(),
            "REJECT:replayed_nonce"
        );
        for r in RejectReason::ALL {
            assert_eq!(r == RejectReason::Ok, r.as_str() == "ok");
        }
    }
}
