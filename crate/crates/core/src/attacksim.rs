//! Scripted adversaries against the verifier.
//!
//! Each scenario runs a number of independent trials and records how the
//! verifier answered the adversary's submission. `accepts` counts only
//! illegitimate acceptances; the reason histogram shows which layer (nonce
//! store, timestamp window, range check or equation) caught each attempt.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{random_below, random_in_range, GroupParams};
use crate::identity::{keygen, KeyPair, KeyRegistry};
use crate::protocol::{
    prove_with_mode, verify_at, ChallengeMode, Clock, FreshnessPolicy, ManualClock, Nonce,
    NonceStore, Proof, RejectReason, VerifyDecision,
};

/// Simulated wall-clock start (2023-11-14T22:13:20Z).
pub const SIM_EPOCH: u64 = 1_700_000_000;
pub const MIN_FORGERY_TRIALS: usize = 10_000;
const VICTIM_KEY_ID: &str = "victim";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Replay,
    StaleReplay,
    FutureStamp,
    TamperT,
    TamperS,
    TamperNonce,
    TamperTimestamp,
    RandomForgery,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Replay,
        Scenario::StaleReplay,
        Scenario::FutureStamp,
        Scenario::TamperT,
        Scenario::TamperS,
        Scenario::TamperNonce,
        Scenario::TamperTimestamp,
        Scenario::RandomForgery,
    ];

    pub const TAMPER: [Scenario; 4] = [
        Scenario::TamperT,
        Scenario::TamperS,
        Scenario::TamperNonce,
        Scenario::TamperTimestamp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Replay => "replay",
            Scenario::StaleReplay => "stale_replay",
            Scenario::FutureStamp => "future_stamp",
            Scenario::TamperT => "tamper_t",
            Scenario::TamperS => "tamper_s",
            Scenario::TamperNonce => "tamper_nonce",
            Scenario::TamperTimestamp => "tamper_timestamp",
            Scenario::RandomForgery => "random_forgery",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown attack scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackOutcome {
    pub scenario: Scenario,
    pub trials: u64,
    pub accepts: u64,
    pub reject_reasons: BTreeMap<RejectReason, u64>,
}

#[derive(Serialize)]
struct OutcomeJson<'a> {
    scenario: &'a str,
    trials: u64,
    accepts: u64,
    reasons: BTreeMap<&'a str, u64>,
}

impl AttackOutcome {
    fn new(scenario: Scenario) -> Self {
        AttackOutcome {
            scenario,
            trials: 0,
            accepts: 0,
            reject_reasons: BTreeMap::new(),
        }
    }

    fn record(&mut self, decision: VerifyDecision) {
        self.trials += 1;
        if decision.accepted {
            self.accepts += 1;
        }
        *self.reject_reasons.entry(decision.reason).or_default() += 1;
    }

    pub fn accept_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accepts as f64 / self.trials as f64
        }
    }

    pub fn count(&self, reason: RejectReason) -> u64 {
        self.reject_reasons.get(&reason).copied().unwrap_or(0)
    }

    /// `{"scenario":..,"trials":N,"accepts":M,"reasons":{..}}`; accepted
    /// submissions appear under `"ok"`.
    pub fn to_json(&self) -> Vec<u8> {
        let doc = OutcomeJson {
            scenario: self.scenario.as_str(),
            trials: self.trials,
            accepts: self.accepts,
            reasons: self
                .reject_reasons
                .iter()
                .map(|(r, &n)| (r.as_str(), n))
                .collect(),
        };
        let mut out = serde_json::to_vec_pretty(&doc).expect("outcome serialize");
        out.push(b'\n');
        out
    }
}

/// A victim prover, a verifier that trusts the victim's key, and a
/// simulated clock the adversary can wait on.
pub struct AttackHarness<R> {
    params: GroupParams,
    victim: KeyPair,
    registry: KeyRegistry,
    policy: FreshnessPolicy,
    store: NonceStore,
    clock: ManualClock,
    mode: ChallengeMode,
    rng: R,
}

impl AttackHarness<ChaCha20Rng> {
    /// Reproducible harness: every random draw comes from `seed`.
    pub fn seeded(params: GroupParams, policy: FreshnessPolicy, seed: u64) -> Result<Self> {
        Self::new(params, policy, ChaCha20Rng::seed_from_u64(seed))
    }
}

impl<R: RngCore + CryptoRng> AttackHarness<R> {
    pub fn new(params: GroupParams, policy: FreshnessPolicy, mut rng: R) -> Result<Self> {
        let victim = keygen(&params, &mut rng)?;
        let registry = KeyRegistry::new();
        registry.register(VICTIM_KEY_ID, victim.public().clone(), victim.params_digest())?;
        Ok(AttackHarness {
            params,
            victim,
            registry,
            policy,
            store: NonceStore::new(policy),
            clock: ManualClock::new(SIM_EPOCH),
            mode: ChallengeMode::Full,
            rng,
        })
    }

    /// Switches prover and verifier to a challenge mode (see [`ChallengeMode`]).
    pub fn with_challenge_mode(mut self, mode: ChallengeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn registry(&self) -> &KeyRegistry {
        &self.registry
    }

    pub fn store(&self) -> &NonceStore {
        &self.store
    }

    pub fn clock(&self) -> &ManualClock {
        &self.clock
    }

    /// An honest proof from the victim at the current simulated time.
    pub fn honest_proof(&mut self) -> Result<Proof> {
        prove_with_mode(
            &self.params,
            &self.victim,
            Some(VICTIM_KEY_ID),
            &self.clock,
            &mut self.rng,
            self.mode,
        )
    }

    pub fn submit(&self, proof: &Proof) -> VerifyDecision {
        verify_at(
            &self.params,
            &self.registry,
            proof,
            self.clock.get(),
            &self.policy,
            &self.store,
            self.mode,
        )
    }

    fn submit_honest(&mut self) -> Result<Proof> {
        let proof = self.honest_proof()?;
        let decision = self.submit(&proof);
        if !decision.accepted {
            return Err(Error::Refused(format!(
                "honest proof rejected ({}); harness is misconfigured",
                decision.reason
            )));
        }
        Ok(proof)
    }

    fn check_trials(trials: usize) -> Result<()> {
        if trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Honest submission followed by a byte-identical copy within the window.
    pub fn simulate_replay(&mut self, trials: usize) -> Result<AttackOutcome> {
        Self::check_trials(trials)?;
        let mut outcome = AttackOutcome::new(Scenario::Replay);
        for _ in 0..trials {
            let proof = self.submit_honest()?;
            outcome.record(self.submit(&proof));
        }
        Ok(outcome)
    }

    /// Control for [`Self::simulate_replay`]: the nonce store is wiped before
    /// the copy arrives, so only the store stood between the copy and acceptance.
    pub fn simulate_replay_without_store(&mut self, trials: usize) -> Result<AttackOutcome> {
        Self::check_trials(trials)?;
        let mut outcome = AttackOutcome::new(Scenario::Replay);
        for _ in 0..trials {
            let proof = self.submit_honest()?;
            self.store.clear();
            outcome.record(self.submit(&proof));
        }
        Ok(outcome)
    }

    /// The copy is held past the window (store wiped), so only the timestamp
    /// check remains.
    pub fn simulate_stale_replay(&mut self, trials: usize) -> Result<AttackOutcome> {
        Self::check_trials(trials)?;
        let mut outcome = AttackOutcome::new(Scenario::StaleReplay);
        let delay = self.policy.delta_seconds() + 1;
        for _ in 0..trials {
            let proof = self.submit_honest()?;
            self.store.clear();
            self.clock.advance(delay);
            outcome.record(self.submit(&proof));
        }
        Ok(outcome)
    }

    /// A prover whose clock runs ahead by more than the window.
    pub fn simulate_future_stamp(&mut self, trials: usize) -> Result<AttackOutcome> {
        Self::check_trials(trials)?;
        let mut outcome = AttackOutcome::new(Scenario::FutureStamp);
        let delta = self.policy.delta_seconds();
        for _ in 0..trials {
            let now = self.clock.get();
            let ahead = delta + self.rng.gen_range(1..=delta.max(1));
            self.clock.set(now + ahead);
            let proof = self.honest_proof()?;
            self.clock.set(now);
            outcome.record(self.submit(&proof));
        }
        Ok(outcome)
    }

    /// One field of a fresh honest proof is mutated before submission.
    pub fn simulate_tamper(&mut self, scenario: Scenario, trials: usize) -> Result<AttackOutcome> {
        Self::check_trials(trials)?;
        if !Scenario::TAMPER.contains(&scenario) {
            return Err(Error::Parameter(format!("`{scenario}` is not a tamper scenario")));
        }
        let mut outcome = AttackOutcome::new(scenario);
        for _ in 0..trials {
            let mut proof = self.honest_proof()?;
            self.tamper(scenario, &mut proof);
            outcome.record(self.submit(&proof));
        }
        Ok(outcome)
    }

    /// Random bit flip in `t`, `s` or the nonce; `±k` seconds on the
    /// timestamp with `k` in `[1, 2Δ]`, so both sides of the window are hit.
    fn tamper(&mut self, scenario: Scenario, proof: &mut Proof) {
        let bits = self.params.bit_length() as u64;
        match scenario {
            Scenario::TamperT => {
                let bit = self.rng.gen_range(0..bits);
                proof.t ^= BigUint::one() << bit;
            }
            Scenario::TamperS => {
                let bit = self.rng.gen_range(0..bits);
                proof.s ^= BigUint::one() << bit;
            }
            Scenario::TamperNonce => {
                let bit = self.rng.gen_range(0..128usize);
                proof.nonce.0[bit / 8] ^= 1 << (bit % 8);
            }
            Scenario::TamperTimestamp => {
                let k = self
                    .rng
                    .gen_range(1..=(2 * self.policy.delta_seconds()).max(1));
                if self.rng.gen_bool(0.5) {
                    proof.timestamp += k;
                } else {
                    proof.timestamp -= k;
                }
            }
            _ => unreachable!("checked by caller"),
        }
    }

    /// Runs one named scenario. Random forgery uses its own entry point.
    pub fn run(&mut self, scenario: Scenario, trials: usize) -> Result<AttackOutcome> {
        match scenario {
            Scenario::Replay => self.simulate_replay(trials),
            Scenario::StaleReplay => self.simulate_stale_replay(trials),
            Scenario::FutureStamp => self.simulate_future_stamp(trials),
            Scenario::RandomForgery => Err(Error::Parameter(
                "random_forgery runs through simulate_random_forgery".into(),
            )),
            tamper => self.simulate_tamper(tamper, trials),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ForgeryConfig {
    pub mode: ChallengeMode,
    /// Required to run reduced challenges on parameters of 64 bits or more.
    pub allow_insecure: bool,
}

impl ForgeryConfig {
    /// Reduced challenges on toy groups, full challenges otherwise.
    pub fn for_params(params: &GroupParams) -> Self {
        let mode = if params.bit_length() <= 16 {
            ChallengeMode::ReducedModOrder
        } else {
            ChallengeMode::Full
        };
        ForgeryConfig {
            mode,
            allow_insecure: false,
        }
    }
}

/// An adversary without the secret submits uniformly random `(t, s)` with a
/// fresh nonce and current timestamp. For fixed `t` and `c` exactly one `s`
/// in `[0, p - 2]` satisfies the equation, so the expected accept rate is
/// `1 / (p - 1)`.
pub fn simulate_random_forgery<R: RngCore + CryptoRng>(
    params: &GroupParams,
    trials: usize,
    config: ForgeryConfig,
    rng: &mut R,
) -> Result<AttackOutcome> {
    if trials < MIN_FORGERY_TRIALS {
        return Err(Error::Parameter(format!(
            "random forgery needs at least {MIN_FORGERY_TRIALS} trials"
        )));
    }
    if config.mode == ChallengeMode::ReducedModOrder
        && params.bit_length() >= 64
        && !config.allow_insecure
    {
        return Err(Error::Refused(
            "reduced challenges on parameters of 64 bits or more require the insecure flag".into(),
        ));
    }

    let victim = keygen(params, rng)?;
    let registry = KeyRegistry::new();
    registry.register(VICTIM_KEY_ID, victim.public().clone(), victim.params_digest())?;
    drop(victim);

    let policy = FreshnessPolicy::default();
    let store = NonceStore::new(policy);
    let clock = ManualClock::new(SIM_EPOCH);
    let (t_max, s_bound) = (params.p() - 1u32, params.order());

    let mut outcome = AttackOutcome::new(Scenario::RandomForgery);
    for _ in 0..trials {
        let proof = Proof {
            t: random_in_range(rng, &BigUint::one(), &t_max)?,
            s: random_below(rng, &s_bound)?,
            nonce: Nonce::random(rng)?,
            timestamp: clock.now()?,
            key_id: Some(VICTIM_KEY_ID.into()),
        };
        outcome.record(verify_at(
            params,
            &registry,
            &proof,
            clock.get(),
            &policy,
            &store,
            config.mode,
        ));
    }
    Ok(outcome)
}

/// Analytic accept rate `1 / (p - 1)` for the random-forgery adversary.
pub fn analytic_forgery_rate(params: &GroupParams) -> f64 {
    use num_traits::ToPrimitive;
    params.order().to_f64().map_or(0.0, |n| 1.0 / n)
}
