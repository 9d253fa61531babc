//! Scaling sweeps: one engine run per `N` on the single-particle, `d = 1`
//! family, a CSV record per run, and a least-squares fit of
//! `log(op_count)` against `log(N)`.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{expectation, EngineError};
use crate::generate::{generate_instance, GenConfig, GenError};
use crate::model::Statistics;
use crate::poly::{dense_table_size, DENSE_TABLE_LIMIT};

pub const MAX_BOSON_RANK: usize = 2;
pub const MAX_BOSON_BLOCKS: usize = 256;
pub const MAX_FERMION_RANK: usize = 6;
pub const MAX_FERMION_BLOCKS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub stat: Statistics,
    pub deg_cap: usize,
    pub op_count: u64,
    pub wall_s: f64,
    pub re: f64,
    pub im: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("resource guard: N = {n}, k = {k} is outside the {statistics} limits ({reason})")]
    ResourceGuard {
        n: usize,
        k: usize,
        statistics: Statistics,
        reason: String,
    },
    #[error("a slope fit needs at least 4 distinct N values, got {0}")]
    TooFewPoints(usize),
    #[error("op_count must be positive for a log-log fit (N = {0})")]
    NonPositive(usize),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("instance failed validation: {0}")]
    Instance(#[from] crate::instance::InstanceError),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Refuses sweeps whose cost or memory would be out of proportion.
pub fn check_guard(statistics: Statistics, k: usize, n: usize) -> Result<(), ScalingError> {
    let refuse = |reason: String| {
        Err(ScalingError::ResourceGuard {
            n,
            k,
            statistics,
            reason,
        })
    };
    match statistics {
        Statistics::Boson => {
            if k > MAX_BOSON_RANK {
                return refuse(format!("k ≤ {MAX_BOSON_RANK}"));
            }
            if n > MAX_BOSON_BLOCKS {
                return refuse(format!("N ≤ {MAX_BOSON_BLOCKS}"));
            }
            let size = dense_table_size(k, n as u32);
            if size > DENSE_TABLE_LIMIT {
                return refuse(format!("coefficient table above {DENSE_TABLE_LIMIT} entries"));
            }
        }
        Statistics::Fermion => {
            if k > MAX_FERMION_RANK {
                return refuse(format!("k ≤ {MAX_FERMION_RANK}"));
            }
            if n > MAX_FERMION_BLOCKS {
                return refuse(format!("N ≤ {MAX_FERMION_BLOCKS}"));
            }
        }
    }
    if k == 0 || n == 0 {
        return refuse("N and k must be positive".into());
    }
    Ok(())
}

/// The benchmark instance for one `N`: one particle per single-mode block,
/// `u`, `v` entries uniform on `[−1, 1]²` scaled by `1/√N` so the matrix
/// element stays of order one.
pub fn bench_config(statistics: Statistics, k: usize, n: usize) -> GenConfig {
    GenConfig {
        blocks: n,
        d: 1,
        k,
        statistics,
        n_max: 1,
        single_particle: true,
        scale: 1.0 / (n as f64).sqrt(),
        ..GenConfig::default()
    }
}

pub fn run_one(statistics: Statistics, k: usize, n: usize, seed: u64) -> Result<BenchRecord, ScalingError> {
    check_guard(statistics, k, n)?;
    let inst = generate_instance(&bench_config(statistics, k, n), seed)?.validate()?;
    let report = expectation(&inst.bra, &inst.ket, &inst.op)?;
    Ok(BenchRecord {
        n,
        k,
        d: 1,
        stat: statistics,
        deg_cap: report.degree_cap,
        op_count: report.op_count,
        wall_s: report.wall_time,
        re: report.value.re,
        im: report.value.im,
        seed,
    })
}

/// Runs every `N` in ascending order. All guards are checked before any
/// work starts.
pub fn run_sweep(
    statistics: Statistics,
    k: usize,
    ns: &[usize],
    seed: u64,
) -> Result<Vec<BenchRecord>, ScalingError> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        check_guard(statistics, k, n)?;
    }
    ns.iter().map(|&n| run_one(statistics, k, n, seed)).collect()
}

/// Ordinary least squares of `log(op_count)` on `log(N)`.
pub fn fit_slope(records: &[BenchRecord]) -> Result<SlopeFit, ScalingError> {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(ScalingError::TooFewPoints(ns.len()));
    }
    if let Some(r) = records.iter().find(|r| r.op_count == 0) {
        return Err(ScalingError::NonPositive(r.n));
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| ((r.n as f64).ln(), (r.op_count as f64).ln()))
        .collect();
    Ok(least_squares(&pts))
}

fn least_squares(pts: &[(f64, f64)]) -> SlopeFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Expected slope: `2k + 1` for bosons, `1` for fermions.
pub fn target_slope(statistics: Statistics, k: usize) -> f64 {
    match statistics {
        Statistics::Boson => (2 * k + 1) as f64,
        Statistics::Fermion => 1.0,
    }
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<(), ScalingError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
