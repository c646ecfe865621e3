use rayon::prelude::*;

use super::{run_single, RunConfig, RunRecord, SolverKind};
use crate::error::{Error, Result};
use crate::problems::{instantiate, ProblemId, ProblemParams};
use crate::solver::SolverSettings;

/// Obstacle sweep over one problem and several solvers.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub problem: ProblemId,
    pub solvers: Vec<SolverKind>,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub settings: SolverSettings,
    /// Worker count; `None` uses one per logical core.
    pub jobs: Option<usize>,
}

/// `n` evenly spaced points from `lo` to `hi`, both ends exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Runs every (solver, obstacle) pair. Records come back ordered by the
/// solver's position in the config, then by obstacle position. A failing
/// instance yields a failure record and does not stop the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<RunRecord>> {
    if config.solvers.is_empty() {
        return Err(Error::Config("sweep needs at least one solver".into()));
    }
    if config.n == 0 || !(config.lo <= config.hi) {
        return Err(Error::Config(format!(
            "bad sweep range [{}, {}] with {} points",
            config.lo, config.hi, config.n
        )));
    }
    config.settings.validate()?;
    let points = linspace(config.lo, config.hi, config.n);
    for &p in [points[0], points[points.len() - 1]].iter() {
        instantiate(config.problem, ProblemParams { obstacle: Some(p) })?;
    }

    let jobs: Vec<(usize, usize)> = (0..config.solvers.len())
        .flat_map(|s| (0..points.len()).map(move |i| (s, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut results: Vec<((usize, usize), RunRecord)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, i)| {
                let run = RunConfig {
                    problem: config.problem,
                    params: ProblemParams {
                        obstacle: Some(points[i]),
                    },
                    solver: config.solvers[s],
                    settings: config.settings.clone(),
                };
                let record = match run_single(&run) {
                    Ok((record, _)) => record,
                    Err(e) => {
                        log::warn!("instance {} failed: {e}", points[i]);
                        RunRecord::failure(config.problem, &config.solvers[s], Some(points[i]), 0.0)
                    }
                };
                ((s, i), record)
            })
            .collect()
    });
    results.sort_by_key(|(key, _)| *key);
    Ok(results.into_iter().map(|(_, r)| r).collect())
}
