//! Evaluation of one parameter point with automatic truncation escalation.

use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, RateSet};
use crate::cumulants::{cumulants_perturbative, direct_current};
use crate::error::{Error, Result};
use crate::generator::{build_generator, steady_state};
use crate::observables::squeezing_factor;
use crate::spectrum::{Spectrum, ValidatedParams};

/// Truncation ladder `initial_n, initial_n + step, ...` capped at `max_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationPolicy {
    #[serde(rename = "initial_N", default = "default_initial")]
    pub initial_n: usize,
    #[serde(rename = "max_N", default = "default_max")]
    pub max_n: usize,
    #[serde(default = "default_step")]
    pub step: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_initial() -> usize {
    40
}
fn default_max() -> usize {
    200
}
fn default_step() -> usize {
    10
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            initial_n: default_initial(),
            max_n: default_max(),
            step: default_step(),
            tol: default_tol(),
        }
    }
}

/// Absolute floor added to the relative test for cumulants, which vanish
/// identically in equilibrium.
pub const CUMULANT_ATOL: f64 = 1e-18;

/// Which dressed-master-equation quantities a point must deliver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Needs {
    pub current: bool,
    pub noise: bool,
    pub skewness: bool,
    pub xi_squared: bool,
}

impl Needs {
    pub fn any(&self) -> bool {
        self.current || self.noise || self.skewness || self.xi_squared
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DmeValues {
    pub current: f64,
    pub noise: f64,
    pub skewness: f64,
    pub xi_squared: f64,
    pub theta_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPoint {
    pub values: DmeValues,
    pub converged_n: usize,
    pub residual: f64,
}

/// Values at a single truncation, without any convergence check.
pub fn evaluate_at(
    params: &ValidatedParams,
    resonator: &BathSpec,
    qubit: &BathSpec,
    needs: Needs,
    n: usize,
) -> Result<(DmeValues, f64)> {
    let spectrum = Spectrum::new(params, n);
    let rates = RateSet::build(&spectrum, resonator, qubit)?;
    let p = steady_state(&build_generator(&rates, &spectrum, 0.0, 0.0)?)?;
    let mut v = DmeValues::default();
    if needs.noise || needs.skewness {
        let c = cumulants_perturbative(&rates, &spectrum)?;
        v.current = c.current;
        v.noise = c.noise;
        v.skewness = c.skewness;
    } else if needs.current {
        v.current = direct_current(&p, &rates, &spectrum)?;
    }
    if needs.xi_squared {
        let s = squeezing_factor(&p, &spectrum, 64);
        v.xi_squared = s.xi_squared;
        v.theta_star = s.theta_star;
    }
    Ok((v, p.residual))
}

/// Largest relative change among the requested quantities, or `None` if all
/// are within tolerance.
fn unconverged(needs: Needs, a: &DmeValues, b: &DmeValues, tol: f64) -> Option<(f64, &'static str)> {
    let checks = [
        (needs.current, a.current, b.current, CUMULANT_ATOL, "current"),
        (needs.noise, a.noise, b.noise, CUMULANT_ATOL, "noise"),
        (needs.skewness, a.skewness, b.skewness, CUMULANT_ATOL, "skewness"),
        (needs.xi_squared, a.xi_squared, b.xi_squared, 0.0, "xi_squared"),
    ];
    let mut worst: Option<(f64, &'static str)> = None;
    for (on, x, y, atol, name) in checks {
        if !on {
            continue;
        }
        let diff = (x - y).abs();
        if diff > tol * x.abs() + atol || !diff.is_finite() {
            let change = diff / x.abs().max(f64::MIN_POSITIVE);
            if worst.map_or(true, |w| change > w.0) {
                worst = Some((change, name));
            }
        }
    }
    worst
}

/// Escalates the truncation until every requested quantity changes by at most
/// `tol` relative between `N` and `N + step`, and reports the values at `N`.
pub fn evaluate_certified(
    params: &ValidatedParams,
    resonator: &BathSpec,
    qubit: &BathSpec,
    needs: Needs,
    policy: &TruncationPolicy,
) -> Result<CertifiedPoint> {
    if policy.step == 0 || policy.initial_n + policy.step > policy.max_n {
        return Err(Error::InvalidParameter(format!(
            "truncation ladder {} + {} exceeds max_N = {}",
            policy.initial_n, policy.step, policy.max_n
        )));
    }
    let mut n = policy.initial_n;
    let mut current = evaluate_at(params, resonator, qubit, needs, n)?;
    let mut last = (f64::INFINITY, "none");
    while n + policy.step <= policy.max_n {
        let next = evaluate_at(params, resonator, qubit, needs, n + policy.step)?;
        match unconverged(needs, &current.0, &next.0, policy.tol) {
            None => {
                return Ok(CertifiedPoint {
                    values: current.0,
                    converged_n: n,
                    residual: current.1,
                })
            }
            Some(w) => last = w,
        }
        n += policy.step;
        current = next;
    }
    Err(Error::TruncationUnconverged {
        max_n: policy.max_n,
        last_change: last.0,
        observable: last.1.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathLabel;
    use crate::spectrum::SystemParams;

    fn baths(t_r: f64, t_q: f64) -> (BathSpec, BathSpec) {
        (
            BathSpec::new(BathLabel::R, 1e-3, 10.0, t_r).unwrap(),
            BathSpec::new(BathLabel::Q, 1e-3, 10.0, t_q).unwrap(),
        )
    }

    #[test]
    fn certified_value_is_stable_under_refinement() {
        let p = SystemParams::new(1.0, 1.0, 0.1).validate().unwrap();
        let (r, q) = baths(1.25, 0.75);
        let needs = Needs {
            current: true,
            ..Needs::default()
        };
        let c = evaluate_certified(&p, &r, &q, needs, &TruncationPolicy::default()).unwrap();
        assert!(c.converged_n <= 200);
        assert!(c.residual <= 1e-12);
        let (far, _) = evaluate_at(&p, &r, &q, needs, c.converged_n + 40).unwrap();
        assert!(((far.current - c.values.current) / c.values.current).abs() < 1e-7);
    }

    #[test]
    fn impossible_ladder_reports_unconverged() {
        let p = SystemParams::new(1.0, 1.0, 0.2).validate().unwrap();
        let (r, q) = baths(2.0, 0.0);
        let needs = Needs {
            current: true,
            ..Needs::default()
        };
        let policy = TruncationPolicy {
            initial_n: 4,
            max_n: 8,
            step: 2,
            tol: 1e-12,
        };
        assert!(matches!(
            evaluate_certified(&p, &r, &q, needs, &policy),
            Err(Error::TruncationUnconverged { max_n: 8, .. })
        ));
    }

    #[test]
    fn invalid_ladder_is_rejected() {
        let p = SystemParams::new(1.0, 1.0, 0.1).validate().unwrap();
        let (r, q) = baths(1.0, 1.0);
        let policy = TruncationPolicy {
            initial_n: 40,
            max_n: 45,
            ..TruncationPolicy::default()
        };
        assert!(evaluate_certified(&p, &r, &q, Needs::default(), &policy).is_err());
    }
}
