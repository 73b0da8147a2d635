//! Rayon-backed versions of the core's embarrassingly parallel loops.
//! Results are identical to the serial ones.

use rayon::prelude::*;
use rayon::ThreadPool;
use taildep_core::distmodel::ConstructionSpec;
use taildep_core::quadeval::{check_grid, chi_point, ChiCurve};
use taildep_core::simest::{block_count, sample_block, SampleBatch};

use crate::error::CliError;

pub const THREADS_ENV: &str = "TAILDEP_THREADS";

/// Thread pool of `threads` workers; `None` or 0 means all cores.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}

/// `chi(q)` on a grid of `q`, one quadrature per worker item.
pub fn chi_curve(pool: &ThreadPool, spec: &ConstructionSpec, q_grid: &[f64]) -> Result<ChiCurve, CliError> {
    check_grid(q_grid, 0.0, 1.0)?;
    let points = pool.install(|| {
        q_grid
            .par_iter()
            .map(|q| chi_point(spec, 1.0 - q))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(ChiCurve::from_points(points))
}

/// `chi` at tail probabilities `1 - q`, given directly to keep precision near `q = 1`.
pub fn chi_curve_tails(pool: &ThreadPool, spec: &ConstructionSpec, tails: &[f64]) -> Result<ChiCurve, CliError> {
    // descending tails, i.e. ascending q
    let ascending: Vec<f64> = tails.iter().rev().copied().collect();
    check_grid(&ascending, 0.0, 1.0)?;
    let points = pool.install(|| {
        tails
            .par_iter()
            .map(|&t| chi_point(spec, t))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(ChiCurve::from_points(points))
}

/// Same batch as `simest::sample`, with blocks drawn in parallel.
pub fn sample(pool: &ThreadPool, spec: &ConstructionSpec, n: usize, seed: u64) -> Result<SampleBatch, CliError> {
    if n == 0 {
        return Err(CliError::Invalid("sample size must be >= 1".into()));
    }
    let blocks: Vec<Vec<[f64; 2]>> = pool.install(|| {
        (0..block_count(n))
            .into_par_iter()
            .map(|b| sample_block(spec, n, seed, b))
            .collect()
    });
    Ok(SampleBatch::from_pairs(spec, seed, blocks.concat())?)
}
