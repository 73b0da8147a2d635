//! Seeded Monte Carlo sampling of `R (W1, W2)` and rank-based estimators of
//! `chi(q)` and `eta`.
//!
//! Draws come from ChaCha20 seeded with `seed`; the batch is cut into blocks
//! of [`BLOCK`] pairs and block `b` uses stream `b`, so blocks can be drawn in
//! any order or in parallel and still give the same batch.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use libm::{floor, log, pow, sqrt};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

use crate::depcalc::{Coefficient, DependenceSummary};
use crate::distmodel::ConstructionSpec;
use crate::error::{invalid, Error, Result};
use crate::quadeval::{chi_point, hill_target};

/// Pairs per RNG stream.
pub const BLOCK: usize = 65_536;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleBatch {
    pub n: usize,
    pub seed: u64,
    pub pairs: Vec<[f64; 2]>,
    /// FNV-1a hash of the construction's description.
    pub fingerprint: u64,
}

impl SampleBatch {
    /// Wrap externally produced pairs, e.g. blocks drawn in parallel.
    pub fn from_pairs(spec: &ConstructionSpec, seed: u64, pairs: Vec<[f64; 2]>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("sample size must be >= 1"));
        }
        Ok(SampleBatch {
            n: pairs.len(),
            seed,
            pairs,
            fingerprint: fingerprint(spec),
        })
    }

    /// Apply `f` to the first coordinate of every pair.
    pub fn map_first(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.pairs {
            p[0] = f(p[0]);
        }
        out
    }
}

pub fn fingerprint(spec: &ConstructionSpec) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in spec.describe().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Number of blocks needed for `n` pairs.
pub fn block_count(n: usize) -> usize {
    n.div_ceil(BLOCK)
}

/// Pairs `[b * BLOCK, min((b + 1) * BLOCK, n))` of the batch for `seed`.
pub fn sample_block(spec: &ConstructionSpec, n: usize, seed: u64, block: usize) -> Vec<[f64; 2]> {
    let start = block * BLOCK;
    let len = n.saturating_sub(start).min(BLOCK);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let r = spec.radial.sample(&mut rng);
        let (w1, w2) = spec.angular.sample_pair(&mut rng);
        out.push([r * w1, r * w2]);
    }
    out
}

/// `n` independent draws of `R (W1, W2)`.
pub fn sample(spec: &ConstructionSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(invalid("sample size must be >= 1"));
    }
    let mut pairs = Vec::with_capacity(n);
    for b in 0..block_count(n) {
        pairs.extend(sample_block(spec, n, seed, b));
    }
    SampleBatch::from_pairs(spec, seed, pairs)
}

/// An estimate with its normal-approximation standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Ranks `1..=n` of each coordinate; ties broken by position.
fn ranks(batch: &SampleBatch, coord: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..batch.n as u32).collect();
    idx.sort_by(|&a, &b| batch.pairs[a as usize][coord].total_cmp(&batch.pairs[b as usize][coord]));
    let mut r = alloc::vec![0u32; batch.n];
    for (pos, &i) in idx.iter().enumerate() {
        r[i as usize] = pos as u32 + 1;
    }
    r
}

/// `P(U1 > q, U2 > q) / (1 - q)` on rank-transformed margins.
pub fn empirical_chi(batch: &SampleBatch, q: f64) -> Result<Estimate> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("q must lie in (0, 1), got {q}")));
    }
    let n = batch.n as f64;
    if n * (1.0 - q) < 50.0 {
        return Err(Error::InsufficientData(format!(
            "n (1 - q) = {} < 50 expected exceedances",
            n * (1.0 - q)
        )));
    }
    let r1 = ranks(batch, 0);
    let r2 = ranks(batch, 1);
    let scale = 1.0 / (n + 1.0);
    let hits = r1
        .iter()
        .zip(&r2)
        .filter(|(a, b)| **a as f64 * scale > q && **b as f64 * scale > q)
        .count() as f64;
    let p = hits / n;
    Ok(Estimate {
        value: p / (1.0 - q),
        std_err: sqrt(p * (1.0 - p) / n) / (1.0 - q),
    })
}

/// Default number of upper order statistics for [`hill_eta`].
pub fn default_k(n: usize) -> usize {
    floor(pow(n as f64, 0.6)) as usize
}

/// Hill estimate of `eta` from the structure variable
/// `T = min(1 / (1 - U1), 1 / (1 - U2))` over the top `k` order statistics.
pub fn hill_eta(batch: &SampleBatch, k: usize) -> Result<Estimate> {
    if k < 10 || k > batch.n / 2 {
        return Err(invalid(format!("k must lie in [10, n/2] = [10, {}], got {k}", batch.n / 2)));
    }
    let r1 = ranks(batch, 0);
    let r2 = ranks(batch, 1);
    let np1 = batch.n as f64 + 1.0;
    let mut t: Vec<f64> = r1
        .iter()
        .zip(&r2)
        .map(|(a, b)| np1 / (np1 - (*a).min(*b) as f64))
        .collect();
    t.sort_by(|a, b| a.total_cmp(b));
    let n = t.len();
    let threshold = log(t[n - k - 1]);
    let sum: f64 = t[n - k..].iter().map(|v| log(*v) - threshold).sum();
    let eta = sum / k as f64;
    Ok(Estimate {
        value: eta,
        std_err: eta / sqrt(k as f64),
    })
}

/// Simulation budget and tolerances for [`verify`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Budget {
    pub n: usize,
    pub q: f64,
    /// `None` selects [`default_k`].
    pub k: Option<usize>,
    /// Allowed distance in standard errors.
    pub z: f64,
    /// Absolute tolerance floor for the Hill estimate of `eta`.
    pub eta_tol: f64,
}

impl Budget {
    pub fn new(n: usize, q: f64) -> Self {
        Budget {
            n,
            q,
            k: None,
            z: 4.0,
            eta_tol: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub target: Option<f64>,
    pub estimate: Option<f64>,
    pub std_err: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl Check {
    fn judged(name: &str, target: f64, est: Estimate, tolerance: f64) -> Self {
        let ok = (est.value - target).abs() <= tolerance;
        Check {
            name: String::from(name),
            target: Some(target),
            estimate: Some(est.value),
            std_err: Some(est.std_err),
            tolerance: Some(tolerance),
            status: if ok { Status::Pass } else { Status::Fail },
            note: String::new(),
        }
    }

    fn skipped(name: &str, note: impl Into<String>) -> Self {
        Check {
            name: String::from(name),
            target: None,
            estimate: None,
            std_err: None,
            tolerance: None,
            status: Status::Skipped,
            note: note.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyReport {
    pub fingerprint: u64,
    pub n: usize,
    pub seed: u64,
    pub q: f64,
    pub k: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// No check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

/// Compare a symbolic summary with estimates from a fresh batch.
pub fn verify(spec: &ConstructionSpec, symbolic: &DependenceSummary, budget: Budget, seed: u64) -> Result<VerifyReport> {
    let batch = sample(spec, budget.n, seed)?;
    verify_batch(spec, &batch, symbolic, budget)
}

/// [`verify`] on an existing batch.
pub fn verify_batch(
    spec: &ConstructionSpec,
    batch: &SampleBatch,
    symbolic: &DependenceSummary,
    budget: Budget,
) -> Result<VerifyReport> {
    let k = budget.k.unwrap_or_else(|| default_k(batch.n));
    let mut checks = Vec::new();
    let chi_est = empirical_chi(batch, budget.q)?;
    let quad = chi_point(spec, 1.0 - budget.q);
    let noise = budget.z * chi_est.std_err.max(1e-12);
    match &symbolic.chi {
        Coefficient::Defined { value } => {
            // chi(q) - chi is deterministic; allow it when quadrature knows it
            let bias = quad.as_ref().map(|p| (p.chi_q - value).abs() + p.abs_err_est).unwrap_or(0.0);
            let mut c = Check::judged("chi limit vs empirical chi(q)", *value, chi_est, noise + bias);
            c.note = format!(
                "distance {:.3e}, finite-q bias {:.3e}",
                (chi_est.value - value).abs(),
                bias
            );
            checks.push(c);
        }
        other => checks.push(Check::skipped("chi limit vs empirical chi(q)", format!("symbolic chi {other}"))),
    }
    match quad {
        Ok(p) => {
            checks.push(Check::judged(
                "quadrature chi(q) vs empirical chi(q)",
                p.chi_q,
                chi_est,
                noise + p.abs_err_est,
            ));
        }
        Err(e) => checks.push(Check::skipped("quadrature chi(q) vs empirical chi(q)", format!("{e}"))),
    }
    match &symbolic.eta {
        Coefficient::Defined { value } => {
            let est = hill_eta(batch, k)?;
            let noise = budget.eta_tol.max(budget.z * est.std_err);
            // Hill at finite k targets hill_target, not eta; allow the gap
            let target = hill_target(spec, k as f64 / (batch.n as f64 + 1.0));
            let bias = target.as_ref().map(|t| (t - value).abs()).unwrap_or(0.0);
            let mut c = Check::judged("eta vs Hill estimate", *value, est, noise + bias);
            c.note = format!("distance {:.3e}, finite-k bias {:.3e}", (est.value - value).abs(), bias);
            checks.push(c);
            match target {
                Ok(t) => checks.push(Check::judged(
                    "finite-k Hill target vs Hill estimate",
                    t,
                    est,
                    budget.z * est.std_err,
                )),
                Err(e) => checks.push(Check::skipped("finite-k Hill target vs Hill estimate", format!("{e}"))),
            }
        }
        other => checks.push(Check::skipped("eta vs Hill estimate", format!("symbolic eta {other}"))),
    }
    Ok(VerifyReport {
        fingerprint: batch.fingerprint,
        n: batch.n,
        seed: batch.seed,
        q: budget.q,
        k,
        checks,
    })
}
