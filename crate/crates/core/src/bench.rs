//! Per-iteration timing of proof generation and verification, plus proof size.
//!
//! Each iteration is timed on its own with a monotonic clock; nothing is
//! batched. Key generation happens once before timing starts, and one
//! untimed warm-up round runs first unless `include_warmup` is set.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore};
use serde::Serialize;

use crate::codec::encode_proof_json;
use crate::error::{Error, Result};
use crate::group::GroupParams;
use crate::identity::{keygen, write_atomic, KeyRegistry};
use crate::protocol::{prove, verify, FreshnessPolicy, NonceStore, SystemClock};

const BENCH_KEY_ID: &str = "bench";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl SeriesSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Some(SeriesSummary {
            min: sorted[0],
            median,
            max: sorted[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub gen_seconds: SeriesSummary,
    pub verify_seconds: SeriesSummary,
    pub proof_bytes: SeriesSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub bit_length: u32,
    pub iterations: usize,
    pub gen_times: Vec<f64>,
    pub verify_times: Vec<f64>,
    pub proof_sizes: Vec<usize>,
    pub summary: BenchSummary,
}

impl BenchReport {
    /// Builds a report, deriving the summary from the raw series.
    pub fn from_series(
        bit_length: u32,
        gen_times: Vec<f64>,
        verify_times: Vec<f64>,
        proof_sizes: Vec<usize>,
    ) -> Result<Self> {
        let iterations = gen_times.len();
        if iterations == 0 || verify_times.len() != iterations || proof_sizes.len() != iterations
        {
            return Err(Error::Parameter(
                "bench series must be non-empty and of equal length".into(),
            ));
        }
        let sizes: Vec<f64> = proof_sizes.iter().map(|&b| b as f64).collect();
        let summary = BenchSummary {
            gen_seconds: SeriesSummary::of(&gen_times).unwrap(),
            verify_seconds: SeriesSummary::of(&verify_times).unwrap(),
            proof_bytes: SeriesSummary::of(&sizes).unwrap(),
        };
        Ok(BenchReport {
            bit_length,
            iterations,
            gen_times,
            verify_times,
            proof_sizes,
            summary,
        })
    }

    /// `max - min` of the proof-size series.
    pub fn size_spread(&self) -> usize {
        let max = self.proof_sizes.iter().max().copied().unwrap_or(0);
        let min = self.proof_sizes.iter().min().copied().unwrap_or(0);
        max - min
    }

    /// Summary JSON mirroring the report.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serialize");
        out.push(b'\n');
        out
    }

    /// CSV text: `iteration,gen_seconds,verify_seconds,proof_bytes`, nine decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,gen_seconds,verify_seconds,proof_bytes\n");
        for i in 0..self.iterations {
            writeln!(
                out,
                "{},{:.9},{:.9},{}",
                i + 1,
                self.gen_times[i],
                self.verify_times[i],
                self.proof_sizes[i]
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub iterations: usize,
    /// Keep the first (setup-affected) round in the series.
    pub include_warmup: bool,
}

impl BenchConfig {
    pub fn new(iterations: usize) -> Self {
        BenchConfig {
            iterations,
            include_warmup: false,
        }
    }
}

pub fn run_bench(params: &GroupParams, iterations: usize) -> Result<BenchReport> {
    run_bench_with(params, &BenchConfig::new(iterations), &mut OsRng)
}

pub fn run_bench_with<R: RngCore + CryptoRng>(
    params: &GroupParams,
    config: &BenchConfig,
    rng: &mut R,
) -> Result<BenchReport> {
    if config.iterations == 0 {
        return Err(Error::Parameter("iterations must be at least 1".into()));
    }
    let keypair = keygen(params, rng)?;
    let registry = KeyRegistry::new();
    registry.register(BENCH_KEY_ID, keypair.public().clone(), keypair.params_digest())?;
    let policy = FreshnessPolicy::default();
    let clock = SystemClock;

    let mut gen_times = Vec::with_capacity(config.iterations);
    let mut verify_times = Vec::with_capacity(config.iterations);
    let mut proof_sizes = Vec::with_capacity(config.iterations);

    let rounds = config.iterations + usize::from(!config.include_warmup);
    for round in 0..rounds {
        let started = Instant::now();
        let proof = prove(params, &keypair, Some(BENCH_KEY_ID), &clock, rng)?;
        let gen = started.elapsed();

        let bytes = encode_proof_json(&proof, params.bit_length())?;

        // fresh store so replay detection never short-circuits the timing
        let store = NonceStore::new(policy);
        let started = Instant::now();
        let decision = verify(params, &registry, &proof, &clock, &policy, &store)?;
        let ver = started.elapsed();
        if !decision.accepted {
            return Err(Error::Refused(format!(
                "honest proof rejected during benchmark: {}",
                decision.reason
            )));
        }

        if round == 0 && !config.include_warmup {
            continue;
        }
        gen_times.push(gen.as_secs_f64());
        verify_times.push(ver.as_secs_f64());
        proof_sizes.push(bytes.len());
    }

    BenchReport::from_series(params.bit_length(), gen_times, verify_times, proof_sizes)
}

/// Writes the CSV atomically; on failure no file is left at `path`.
pub fn export_csv(report: &BenchReport, path: &Path) -> Result<()> {
    write_atomic(path, report.to_csv().as_bytes(), false)
}

pub fn export_json(report: &BenchReport, path: &Path) -> Result<()> {
    write_atomic(path, &report.to_json(), false)
}
