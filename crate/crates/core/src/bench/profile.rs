use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::RunRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    WallTime,
    HessianEvals,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::WallTime => "walltime",
            Metric::HessianEvals => "hessian_evals",
        }
    }

    fn of(self, r: &RunRecord) -> f64 {
        match self {
            Metric::WallTime => r.wall_time,
            Metric::HessianEvals => r.hessian_evals as f64,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walltime" => Ok(Metric::WallTime),
            "hessian_evals" => Ok(Metric::HessianEvals),
            other => Err(Error::Profile(format!("unknown metric `{other}`"))),
        }
    }
}

/// Performance profile curves `ρ_s(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub metric: Metric,
    pub solvers: Vec<String>,
    /// Performance ratio per solver and included instance, `∞` on failure.
    pub ratios: Vec<Vec<f64>>,
    /// Breakpoints: every distinct finite ratio, ascending.
    pub taus: Vec<f64>,
    /// `curves[s][j] = ρ_s(taus[j])`.
    pub curves: Vec<Vec<f64>>,
    pub instances: Vec<String>,
    /// Instances no solver solved.
    pub excluded: Vec<String>,
}

impl Profile {
    /// Fraction of included instances solved with ratio at most `tau`.
    pub fn rho(&self, solver: &str, tau: f64) -> Option<f64> {
        let s = self.solvers.iter().position(|n| n == solver)?;
        let hits = self.ratios[s]
            .iter()
            .filter(|&&r| r.is_finite() && r <= tau)
            .count();
        Some(hits as f64 / self.instances.len() as f64)
    }
}

/// Builds profiles from run records grouped by instance and solver label.
///
/// A solver without a solved record on an instance gets ratio `∞` there.
/// Instances that no solver solved are dropped with a warning.
pub fn performance_profile(records: &[RunRecord], metric: Metric) -> Result<Profile> {
    let mut table: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut solvers = BTreeSet::new();
    for r in records {
        let label = r.solver_label();
        solvers.insert(label.clone());
        let value = if r.status.solved() {
            metric.of(r)
        } else {
            f64::INFINITY
        };
        if !(value >= 0.0) {
            return Err(Error::Profile(format!(
                "invalid {metric} value {value} for {label}"
            )));
        }
        if table
            .entry(r.instance_label())
            .or_default()
            .insert(label.clone(), value)
            .is_some()
        {
            return Err(Error::Profile(format!(
                "duplicate record for {label} on {}",
                r.instance_label()
            )));
        }
    }
    if solvers.is_empty() {
        return Err(Error::Profile("no records".into()));
    }
    let solvers: Vec<String> = solvers.into_iter().collect();

    let mut instances = Vec::new();
    let mut excluded = Vec::new();
    let mut ratios = vec![Vec::new(); solvers.len()];
    for (instance, row) in &table {
        let values: Vec<f64> = solvers
            .iter()
            .map(|s| row.get(s).copied().unwrap_or(f64::INFINITY))
            .collect();
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        if best == f64::INFINITY {
            log::warn!("no solver solved {instance}; excluded from the profile");
            excluded.push(instance.clone());
            continue;
        }
        instances.push(instance.clone());
        for (s, &v) in values.iter().enumerate() {
            let r = if best == 0.0 {
                if v == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                v / best
            };
            ratios[s].push(r);
        }
    }
    if instances.is_empty() {
        return Err(Error::Profile(
            "no instance was solved by any solver".into(),
        ));
    }

    let mut taus: Vec<f64> = ratios
        .iter()
        .flatten()
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let n = instances.len() as f64;
    let curves = ratios
        .iter()
        .map(|rs| {
            taus.iter()
                .map(|&t| rs.iter().filter(|&&r| r <= t).count() as f64 / n)
                .collect()
        })
        .collect();
    Ok(Profile {
        metric,
        solvers,
        ratios,
        taus,
        curves,
        instances,
        excluded,
    })
}

/// Writes `tau` and one column per solver; the last row is `tau = inf`.
pub fn write_profile<W: Write>(writer: W, profile: &Profile) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["tau".to_string()];
    header.extend(profile.solvers.iter().cloned());
    w.write_record(&header)?;
    for (j, tau) in profile.taus.iter().enumerate() {
        let mut row = vec![tau.to_string()];
        row.extend(profile.curves.iter().map(|c| c[j].to_string()));
        w.write_record(&row)?;
    }
    let mut row = vec!["inf".to_string()];
    row.extend(
        profile
            .solvers
            .iter()
            .map(|s| profile.rho(s, f64::INFINITY).unwrap_or(0.0).to_string()),
    );
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}
