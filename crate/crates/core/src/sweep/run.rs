//! Parallel evaluation of a sweep grid.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Observable, PointSetup, SweepConfig, WEAK_COMPONENT_MS};
use crate::error::{Error, Result};
use crate::observables::{rectification, weak_coupling_current};
use crate::point::{evaluate_certified, Needs};

/// Upper bound on the number of terms in the weak-coupling sum.
pub const WEAK_MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Axis coordinates in grid order.
    pub axes: Vec<f64>,
    /// Observable values in column order; `NaN` on failure.
    pub values: Vec<f64>,
    /// Accepted truncation; `None` when no master-equation quantity was needed.
    pub converged_n: Option<usize>,
    pub residual: f64,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Column headers of the observables, in output order.
pub fn value_columns(cfg: &SweepConfig) -> Vec<String> {
    cfg.observables().into_iter().flat_map(|o| o.columns()).collect()
}

fn needs(cfg: &SweepConfig) -> Needs {
    let obs = cfg.observables();
    let has = |o| obs.contains(&o);
    Needs {
        current: has(Observable::Current) || has(Observable::CurrentScaled),
        noise: has(Observable::Noise),
        skewness: has(Observable::Skewness),
        xi_squared: has(Observable::XiSquared),
    }
}

struct Evaluated {
    values: Vec<f64>,
    converged_n: Option<usize>,
    residual: f64,
}

fn evaluate(cfg: &SweepConfig, setup: &PointSetup) -> Result<Evaluated> {
    let policy = &cfg.truncation;
    let need = needs(cfg);
    let want_rect = cfg.wants(Observable::Rectification);
    let mut converged_n = None;
    let mut residual = 0.0;

    let main = if need.any() {
        let c = evaluate_certified(&setup.params, &setup.resonator, &setup.qubit, need, policy)?;
        converged_n = Some(c.converged_n);
        residual = c.residual;
        Some(c.values)
    } else {
        None
    };

    let rect = if want_rect {
        // both currents vanish exactly in equilibrium, whatever the rounding says
        if setup.resonator.temperature == setup.qubit.temperature {
            return Err(Error::BothCurrentsZero);
        }
        let current_only = Needs {
            current: true,
            ..Needs::default()
        };
        let fwd = match &main {
            Some(v) if need.current => v.current,
            _ => {
                let c = evaluate_certified(
                    &setup.params,
                    &setup.resonator,
                    &setup.qubit,
                    current_only,
                    policy,
                )?;
                converged_n = converged_n.max(Some(c.converged_n));
                residual = f64::max(residual, c.residual);
                c.values.current
            }
        };
        // swapping the bath temperatures reverses the bias
        let mut r = setup.resonator;
        let mut q = setup.qubit;
        std::mem::swap(&mut r.temperature, &mut q.temperature);
        let rev = evaluate_certified(&setup.params, &r, &q, current_only, policy)?;
        converged_n = converged_n.max(Some(rev.converged_n));
        residual = f64::max(residual, rev.residual);
        Some(rectification(fwd, rev.values.current)?.factor)
    } else {
        None
    };

    let weak = if cfg.wants(Observable::WeakCurrent) || cfg.wants(Observable::WeakComponents) {
        Some(weak_coupling_current(
            &setup.params,
            &setup.resonator,
            &setup.qubit,
            WEAK_MAX_TERMS,
        )?)
    } else {
        None
    };

    let mut values = Vec::new();
    for o in cfg.observables() {
        let dme = main.unwrap_or_default();
        match o {
            Observable::Current => values.push(dme.current),
            Observable::Noise => values.push(dme.noise),
            Observable::Skewness => values.push(dme.skewness),
            Observable::XiSquared => values.push(dme.xi_squared),
            Observable::CurrentScaled => {
                let l = setup.params.lambda();
                values.push(dme.current / (l * l));
            }
            Observable::Rectification => values.push(rect.unwrap_or(f64::NAN)),
            Observable::WeakCurrent => values.push(weak.as_ref().map_or(f64::NAN, |w| w.total)),
            Observable::WeakComponents => {
                for m in WEAK_COMPONENT_MS {
                    let (i1, i0) = weak
                        .as_ref()
                        .and_then(|w| w.component(m))
                        .unwrap_or((f64::NAN, f64::NAN));
                    values.push(i1);
                    values.push(i0);
                }
            }
        }
    }
    Ok(Evaluated {
        values,
        converged_n,
        residual,
    })
}

/// Evaluates one grid point; failures are captured in the record.
pub fn evaluate_record(cfg: &SweepConfig, coords: &[f64]) -> SweepRecord {
    let start = Instant::now();
    let width = value_columns(cfg).len();
    let outcome = cfg.setup(coords).and_then(|s| evaluate(cfg, &s));
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(e) => SweepRecord {
            axes: coords.to_vec(),
            values: e.values,
            converged_n: e.converged_n,
            residual: e.residual,
            wall_time_ms,
            error: None,
        },
        Err(err) => {
            log::warn!("point {coords:?} failed: {err}");
            SweepRecord {
                axes: coords.to_vec(),
                values: vec![f64::NAN; width],
                converged_n: None,
                residual: f64::NAN,
                wall_time_ms,
                error: Some(err.to_string()),
            }
        }
    }
}

/// Evaluates every grid point on `cfg.workers` threads; records come back in
/// row-major grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let points = cfg.grid_points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Io(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|c| evaluate_record(cfg, c))
            .collect()
    }))
}
