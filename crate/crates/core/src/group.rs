//! Multiplicative group Z_p^* over a safe prime `p = 2q + 1`.
//!
//! Parameters are generated by searching random safe primes and then taking
//! the first generator candidate `g = 2, 3, 4, ...` with `g^2 != 1` and
//! `g^q != 1 (mod p)`. Since the group order `p - 1 = 2q` has only the prime
//! factors 2 and q, those two checks are enough for `g` to be a primitive root.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Miller-Rabin rounds used when generating and validating parameters.
pub const DEFAULT_MR_ROUNDS: u32 = 40;

/// Smallest modulus size accepted by [`generate_params`] (test groups only).
pub const MIN_TEST_BITS: u32 = 5;
/// Largest "insecure test" modulus size.
pub const MAX_TEST_BITS: u32 = 32;
/// Production sizes.
pub const PRODUCTION_BITS: [u32; 4] = [256, 512, 1024, 2048];

/// Returns whether `bits` is a modulus size [`generate_params`] accepts.
pub fn is_supported_bit_length(bits: u32) -> bool {
    (MIN_TEST_BITS..=MAX_TEST_BITS).contains(&bits) || PRODUCTION_BITS.contains(&bits)
}

/// Public group parameters. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    g: BigUint,
    bit_length: u32,
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("p", &self.p.to_str_radix(10))
            .field("g", &self.g.to_str_radix(10))
            .field("bit_length", &self.bit_length)
            .finish()
    }
}

/// On-disk form: big integers as decimal strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    p: String,
    g: String,
    bit_length: u32,
}

impl GroupParams {
    /// Builds parameters from raw parts without checking any invariant.
    /// Pair with [`validate_params`] before use.
    pub fn from_parts(p: BigUint, g: BigUint, bit_length: u32) -> Self {
        GroupParams { p, g, bit_length }
    }

    /// Builds and validates parameters, with `bit_length` taken from `p`.
    pub fn new(p: BigUint, g: BigUint) -> Result<Self> {
        let bit_length = p.bits() as u32;
        let params = GroupParams { p, g, bit_length };
        params.ensure_valid()?;
        Ok(params)
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn bit_length(&self) -> u32 {
        self.bit_length
    }

    /// Group order `p - 1`; exponents live in `Z_{p-1}`.
    pub fn order(&self) -> BigUint {
        &self.p - 1u32
    }

    /// Width in bytes of a fixed-width group element encoding.
    pub fn element_len(&self) -> usize {
        (self.bit_length as usize).div_ceil(8)
    }

    /// `g^e mod p`.
    pub fn pow_g(&self, exponent: &BigUint) -> BigUint {
        self.g.modpow(exponent, &self.p)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_params(self);
        if report.ok {
            Ok(())
        } else {
            let names: Vec<&str> = report.failures.iter().map(|f| f.as_str()).collect();
            Err(Error::Parameter(format!(
                "group parameters fail validation: {}",
                names.join(", ")
            )))
        }
    }

    /// Canonical JSON bytes: `{"p":"..","g":"..","bit_length":N}`, no whitespace.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        let file = ParamsFile {
            p: self.p.to_str_radix(10),
            g: self.g.to_str_radix(10),
            bit_length: self.bit_length,
        };
        serde_json::to_vec(&file).expect("params serialize")
    }

    /// Parses a parameter file. Does not validate; see [`GroupParams::load_json`].
    pub fn from_json_unchecked(bytes: &[u8]) -> Result<Self> {
        let file: ParamsFile = serde_json::from_slice(bytes).map_err(Error::from_json)?;
        let p = parse_decimal(&file.p, "p")?;
        let g = parse_decimal(&file.g, "g")?;
        Ok(GroupParams::from_parts(p, g, file.bit_length))
    }

    /// Parses a parameter file and rejects it unless every invariant holds.
    pub fn load_json(bytes: &[u8]) -> Result<Self> {
        let params = Self::from_json_unchecked(bytes)?;
        params.ensure_valid()?;
        Ok(params)
    }

    /// SHA-256 of the canonical parameter file bytes.
    pub fn digest(&self) -> ParamsDigest {
        ParamsDigest(Sha256::digest(self.to_canonical_json()).into())
    }
}

pub(crate) fn parse_decimal(s: &str, field: &str) -> Result<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Encoding(format!(
            "field `{field}` is not a decimal integer"
        )));
    }
    BigUint::parse_bytes(s.as_bytes(), 10)
        .ok_or_else(|| Error::Encoding(format!("field `{field}` is not a decimal integer")))
}

/// Binds keys and registry entries to one parameter set.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamsDigest(pub [u8; 32]);

impl fmt::Display for ParamsDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for ParamsDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamsDigest({self})")
    }
}

impl FromStr for ParamsDigest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)
            .map_err(|e| Error::Encoding(format!("params digest: {e}")))?;
        Ok(ParamsDigest(out))
    }
}

impl Serialize for ParamsDigest {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ParamsDigest {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A named invariant violation reported by [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamFailure {
    PNotPrime,
    /// `(p - 1) / 2` is not prime, so `p` is not a safe prime.
    PNotSafePrime,
    GOutOfRange,
    GOrderTrivial,
    BitLengthMismatch,
}

impl ParamFailure {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParamFailure::PNotPrime => "p_not_prime",
            ParamFailure::PNotSafePrime => "p_not_safe_prime",
            ParamFailure::GOutOfRange => "g_out_of_range",
            ParamFailure::GOrderTrivial => "g_order_trivial",
            ParamFailure::BitLengthMismatch => "bit_length_mismatch",
        }
    }
}

impl fmt::Display for ParamFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub failures: Vec<ParamFailure>,
}

impl ValidationReport {
    fn from_failures(failures: Vec<ParamFailure>) -> Self {
        ValidationReport {
            ok: failures.is_empty(),
            failures,
        }
    }
}

/// Checks every parameter invariant and reports each violation by name.
///
/// Generator checks are skipped when `p` is not prime or `g` is out of
/// range, since they are meaningless there.
pub fn validate_params(params: &GroupParams) -> ValidationReport {
    let mut failures = Vec::new();
    let p = &params.p;

    if params.bit_length as u64 != p.bits() {
        failures.push(ParamFailure::BitLengthMismatch);
    }

    let p_prime = is_probable_prime(p, DEFAULT_MR_ROUNDS);
    if !p_prime {
        failures.push(ParamFailure::PNotPrime);
    }

    let q = if p_prime && p > &BigUint::from(3u32) {
        let q: BigUint = (p - 1u32) >> 1;
        if !is_probable_prime(&q, DEFAULT_MR_ROUNDS) {
            failures.push(ParamFailure::PNotSafePrime);
        }
        Some(q)
    } else {
        if p_prime {
            // p = 2 or 3: (p-1)/2 is not prime
            failures.push(ParamFailure::PNotSafePrime);
        }
        None
    };

    let g = &params.g;
    let g_in_range = g > &BigUint::one() && g < p;
    if !g_in_range {
        failures.push(ParamFailure::GOutOfRange);
    } else if let Some(q) = q {
        let one = BigUint::one();
        if g.modpow(&BigUint::from(2u32), p) == one || g.modpow(&q, p) == one {
            failures.push(ParamFailure::GOrderTrivial);
        }
    }

    ValidationReport::from_failures(failures)
}

/// `base^exponent mod modulus`.
pub fn mod_exp(base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if modulus < &BigUint::from(2u32) {
        return Err(Error::Parameter("modulus must be at least 2".into()));
    }
    Ok(base.modpow(exponent, modulus))
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 2048;
        let mut sieve = vec![true; LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < LIMIT {
            if sieve[i] {
                (i * i..LIMIT).step_by(i).for_each(|j| sieve[j] = false);
            }
            i += 1;
        }
        (0..LIMIT)
            .filter(|&i| sieve[i])
            .map(|i| i as u32)
            .collect()
    })
}

/// Result of trial division by the small-prime table.
enum Trial {
    Prime,
    Composite,
    Unknown,
}

fn trial_divide(n: &BigUint) -> Trial {
    for &sp in small_primes() {
        let sp_big = BigUint::from(sp);
        if n == &sp_big {
            return Trial::Prime;
        }
        if (n % sp).is_zero() {
            return Trial::Composite;
        }
    }
    let last = *small_primes().last().unwrap() as u64;
    match n.to_u64() {
        Some(v) if v < last * last => Trial::Prime,
        _ => Trial::Unknown,
    }
}

/// Miller-Rabin with `rounds` random bases drawn from a generator seeded by
/// `n` itself, so the answer for a given `n` is reproducible.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    let seed: [u8; 32] = Sha256::digest(n.to_bytes_be()).into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    is_probable_prime_with(n, rounds, &mut rng)
}

/// Miller-Rabin with bases drawn from `rng`. Composite inputs are reported
/// prime with probability at most `4^-rounds`; primes always pass.
pub fn is_probable_prime_with<R: RngCore>(n: &BigUint, rounds: u32, rng: &mut R) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    match trial_divide(n) {
        Trial::Prime => return true,
        Trial::Composite => return false,
        Trial::Unknown => {}
    }

    let one = BigUint::one();
    let n_minus_1 = n - 1u32;
    let n_minus_3 = n - 3u32;
    let shift = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> shift;

    'witness: for _ in 0..rounds.max(1) {
        // base in [2, n-2]
        let a = sample_below_infallible(rng, &n_minus_3) + 2u32;
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..shift {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

fn sample_below_infallible<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let len = bits.div_ceil(8) as usize;
    let excess = (len as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; len];
    loop {
        rng.fill_bytes(&mut buf);
        if let Some(first) = buf.first_mut() {
            *first &= 0xffu8.checked_shr(excess).unwrap_or(0);
        }
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Uniform integer in `[0, bound)`, failing only if the entropy source fails.
pub fn random_below<R: RngCore + CryptoRng>(rng: &mut R, bound: &BigUint) -> Result<BigUint> {
    if bound.is_zero() {
        return Err(Error::Parameter("empty sampling range".into()));
    }
    let bits = bound.bits();
    let len = bits.div_ceil(8) as usize;
    let excess = (len as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; len];
    loop {
        rng.try_fill_bytes(&mut buf)
            .map_err(|e| Error::Entropy(e.to_string()))?;
        if let Some(first) = buf.first_mut() {
            *first &= 0xffu8.checked_shr(excess).unwrap_or(0);
        }
        let candidate = BigUint::from_bytes_be(&buf);
        if &candidate < bound {
            return Ok(candidate);
        }
    }
}

/// Uniform integer in the inclusive range `[low, high]`.
pub fn random_in_range<R: RngCore + CryptoRng>(
    rng: &mut R,
    low: &BigUint,
    high: &BigUint,
) -> Result<BigUint> {
    if low > high {
        return Err(Error::Parameter("empty sampling range".into()));
    }
    let span = high - low + 1u32;
    Ok(random_below(rng, &span)? + low)
}

/// Generates a safe prime `p` of exactly `bit_length` bits and its smallest
/// primitive root.
pub fn generate_params<R: RngCore + CryptoRng>(
    bit_length: u32,
    rng: &mut R,
) -> Result<GroupParams> {
    if !is_supported_bit_length(bit_length) {
        return Err(Error::Parameter(format!(
            "unsupported bit length {bit_length}; expected {MIN_TEST_BITS}..={MAX_TEST_BITS} or one of {PRODUCTION_BITS:?}"
        )));
    }
    let p = generate_safe_prime(bit_length, rng)?;
    let q: BigUint = (&p - 1u32) >> 1;
    let g = find_generator(&p, &q);
    let params = GroupParams { p, g, bit_length };
    debug_assert!(validate_params(&params).ok);
    Ok(params)
}

fn generate_safe_prime<R: RngCore + CryptoRng>(bit_length: u32, rng: &mut R) -> Result<BigUint> {
    // q has bit_length - 1 bits with the top bit set, so p = 2q + 1 has exactly bit_length bits
    let q_bits = bit_length - 1;
    let q_low = BigUint::one() << (q_bits - 1);
    let q_high = (BigUint::one() << q_bits) - 1u32;
    loop {
        let q = random_in_range(rng, &q_low, &q_high)?;
        if !sieve_safe_candidate(&q) {
            continue;
        }
        let p: BigUint = (&q << 1) + 1u32;
        // cheap single-round screens first, full rounds only on survivors
        if !is_probable_prime_with(&q, 1, rng) || !is_probable_prime_with(&p, 1, rng) {
            continue;
        }
        if is_probable_prime(&q, DEFAULT_MR_ROUNDS) && is_probable_prime(&p, DEFAULT_MR_ROUNDS) {
            return Ok(p);
        }
    }
}

/// Rejects q when q or 2q+1 has a small factor (other than being that factor).
fn sieve_safe_candidate(q: &BigUint) -> bool {
    if q.is_even() && q != &BigUint::from(2u32) {
        return false;
    }
    for &sp in small_primes() {
        let r = (q % sp).to_u32().unwrap();
        let q_is_sp = r == 0 && q == &BigUint::from(sp);
        if r == 0 && !q_is_sp {
            return false;
        }
        // 2q + 1 ≡ 0 (mod sp)
        if (2 * r as u64 + 1).is_multiple_of(sp as u64) {
            let p: BigUint = (q << 1) + 1u32;
            if p != BigUint::from(sp) {
                return false;
            }
        }
    }
    true
}

fn find_generator(p: &BigUint, q: &BigUint) -> BigUint {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let mut g = two.clone();
    loop {
        if g.modpow(&two, p) != one && g.modpow(q, p) != one {
            return g;
        }
        g += 1u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    /// base^exp mod m by repeated multiplication.
    fn naive_pow(base: u64, exp: u64, m: u64) -> u64 {
        let mut acc = 1 % m;
        for _ in 0..exp {
            acc = acc * (base % m) % m;
        }
        acc
    }

    #[test]
    fn mod_exp_matches_repeated_multiplication() {
        assert_eq!(mod_exp(&big(5), &big(6), &big(23)).unwrap(), big(8));
        assert_eq!(naive_pow(5, 6, 23), 8);
        assert_eq!(mod_exp(&big(5), &big(22), &big(23)).unwrap(), big(1));
        for m in 2..40u64 {
            for b in 0..m + 3 {
                for e in 0..30u64 {
                    assert_eq!(
                        mod_exp(&big(b), &big(e), &big(m)).unwrap(),
                        big(naive_pow(b, e, m)),
                        "{b}^{e} mod {m}"
                    );
                }
            }
        }
    }

    #[test]
    fn mod_exp_zero_exponent_and_bad_modulus() {
        for m in [2u64, 3, 23, 1000] {
            assert_eq!(mod_exp(&big(77), &big(0), &big(m)).unwrap(), big(1));
        }
        assert!(matches!(
            mod_exp(&big(3), &big(2), &big(1)),
            Err(Error::Parameter(_))
        ));
        assert!(mod_exp(&big(3), &big(2), &big(0)).is_err());
    }

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_examples() {
        assert!(is_probable_prime(&big(23), 40));
        assert!(!is_probable_prime(&big(24), 40));
        assert!(!trial_division(561));
        assert!(!is_probable_prime(&big(561), 40));
        assert!(!is_probable_prime(&big(0), 1));
        assert!(!is_probable_prime(&big(1), 1));
        assert!(is_probable_prime(&big(2), 1));
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_probable_prime(&big(n), 8), trial_division(n), "n = {n}");
        }
        // Carmichael numbers and strong pseudoprimes past the trial-division table
        for n in [8_911u64, 1_373_653, 25_326_001, 3_215_031_751, 4_294_967_291] {
            assert_eq!(is_probable_prime(&big(n), 40), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn validate_examples() {
        let ok = validate_params(&GroupParams::from_parts(big(23), big(5), 5));
        assert!(ok.ok && ok.failures.is_empty());

        let composite = validate_params(&GroupParams::from_parts(big(24), big(5), 5));
        assert!(!composite.ok);
        assert_eq!(composite.failures, vec![ParamFailure::PNotPrime]);

        let trivial = validate_params(&GroupParams::from_parts(big(23), big(1), 5));
        assert!(!trivial.ok);
        assert_eq!(trivial.failures, vec![ParamFailure::GOutOfRange]);
    }

    #[test]
    fn validate_catches_each_failure() {
        // 2 is a quadratic residue mod 23: order 11
        let r = validate_params(&GroupParams::from_parts(big(23), big(2), 5));
        assert_eq!(r.failures, vec![ParamFailure::GOrderTrivial]);
        // 22 = -1 has order 2
        let r = validate_params(&GroupParams::from_parts(big(23), big(22), 5));
        assert_eq!(r.failures, vec![ParamFailure::GOrderTrivial]);
        // 29 is prime, 14 is not
        let r = validate_params(&GroupParams::from_parts(big(29), big(2), 5));
        assert_eq!(r.failures, vec![ParamFailure::PNotSafePrime]);
        let r = validate_params(&GroupParams::from_parts(big(23), big(5), 8));
        assert_eq!(r.failures, vec![ParamFailure::BitLengthMismatch]);
        let r = validate_params(&GroupParams::from_parts(big(23), big(23), 5));
        assert_eq!(r.failures, vec![ParamFailure::GOutOfRange]);
        assert!(r.failures[0].to_string() == "g_out_of_range");
    }

    /// Exhaustive search for safe primes below 256 with their first generator.
    fn safe_primes_below_256() -> Vec<(u64, u64)> {
        (5..256u64)
            .filter(|&p| trial_division(p) && trial_division((p - 1) / 2))
            .map(|p| {
                let g = (2..p)
                    .find(|&g| {
                        let mut seen = std::collections::HashSet::new();
                        let mut acc = 1;
                        for _ in 0..p - 1 {
                            acc = acc * g % p;
                            seen.insert(acc);
                        }
                        seen.len() as u64 == p - 1
                    })
                    .unwrap();
                (p, g)
            })
            .collect()
    }

    #[test]
    fn generate_small_params_against_exhaustive_search() {
        let table = safe_primes_below_256();
        assert!(table.contains(&(23, 5)));
        assert!(table.contains(&(227, 2)));
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for bits in 5..=8u32 {
            for _ in 0..10 {
                let params = generate_params(bits, &mut rng).unwrap();
                let p = params.p().to_u64().unwrap();
                let g = params.g().to_u64().unwrap();
                assert_eq!(params.p().bits(), bits as u64);
                assert!(table.contains(&(p, g)), "({p}, {g}) not in oracle table");
            }
        }
        // only one 5-bit safe prime exists
        let params = generate_params(5, &mut rng).unwrap();
        assert_eq!((params.p(), params.g()), (&big(23), &big(5)));
    }

    #[test]
    fn generate_rejects_unsupported_sizes() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for bits in [0u32, 4, 33, 64, 255, 4096] {
            assert!(matches!(
                generate_params(bits, &mut rng),
                Err(Error::Parameter(_))
            ));
        }
    }

    #[test]
    fn generate_256_bit_params() {
        let mut rng = ChaCha20Rng::seed_from_u64(256);
        let params = generate_params(256, &mut rng).unwrap();
        assert_eq!(params.p().bits(), 256);
        assert_eq!(params.bit_length(), 256);
        assert_eq!(params.element_len(), 32);
        assert!(validate_params(&params).ok);
    }

    #[test]
    fn params_json_round_trip_and_digest() {
        let params = GroupParams::from_parts(big(23), big(5), 5);
        let bytes = params.to_canonical_json();
        assert_eq!(bytes, br#"{"p":"23","g":"5","bit_length":5}"#);
        let back = GroupParams::load_json(&bytes).unwrap();
        assert_eq!(back, params);
        assert_eq!(back.digest(), params.digest());
        let digest_hex = params.digest().to_string();
        assert_eq!(digest_hex.len(), 64);
        assert_eq!(digest_hex.parse::<ParamsDigest>().unwrap(), params.digest());

        let other = GroupParams::from_parts(big(47), big(5), 6);
        assert_ne!(other.digest(), params.digest());
    }

    #[test]
    fn params_json_rejects_bad_files() {
        assert!(matches!(
            GroupParams::load_json(br#"{"p":23,"g":"5","bit_length":5}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            GroupParams::load_json(br#"{"p":"23","g":"5""#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            GroupParams::load_json(br#"{"p":"0x17","g":"5","bit_length":5}"#),
            Err(Error::Encoding(_))
        ));
        assert!(matches!(
            GroupParams::load_json(br#"{"p":"24","g":"5","bit_length":5}"#),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn random_in_range_stays_in_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (lo, hi) = (big(1), big(21));
        let mut hits = [0u32; 22];
        for _ in 0..22_000 {
            let v = random_in_range(&mut rng, &lo, &hi).unwrap().to_usize().unwrap();
            assert!((1..=21).contains(&v));
            hits[v] += 1;
        }
        assert!(hits[1..].iter().all(|&h| h > 700 && h < 1400));
    }
}
