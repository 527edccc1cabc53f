//! Derived quantities: rectification, quadrature squeezing, the weak-coupling
//! current and NDTC detection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bath::{bose_occupation, spectral_density, BathSpec};
use crate::error::{Error, Result};
use crate::generator::PopulationVector;
use crate::spectrum::{Branch, Spectrum, ValidatedParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectificationResult {
    pub forward_current: f64,
    pub reverse_current: f64,
    pub factor: f64,
}

/// `R = |J(dT) + J(-dT)| / max(|J(dT)|, |J(-dT)|)`.
pub fn rectification(j_forward: f64, j_reverse: f64) -> Result<RectificationResult> {
    let denom = j_forward.abs().max(j_reverse.abs());
    if denom == 0.0 {
        return Err(Error::BothCurrentsZero);
    }
    Ok(RectificationResult {
        forward_current: j_forward,
        reverse_current: j_reverse,
        factor: (j_forward + j_reverse).abs() / denom,
    })
}

/// `(<X^2>, <P^2>)` with `X = a^dag + a`, `P = i(a^dag - a)` for a state that is
/// diagonal in the dressed basis. The symmetrized cross moment vanishes.
pub fn quadrature_moments(p: &PopulationVector, spectrum: &Spectrum) -> (f64, f64) {
    let mut x2 = 0.0;
    let mut p2 = 0.0;
    for s in Branch::BOTH {
        let b = spectrum.branch(s);
        let (cx, cp) = ((b.f - b.g).powi(2), (b.f + b.g).powi(2));
        for n in 0..=p.n_max {
            let w = p.get(s, n) * (2 * n + 1) as f64;
            x2 += w * cx;
            p2 += w * cp;
        }
    }
    (x2, p2)
}

/// `Var(X_theta)` for `X_theta = X cos(theta) + P sin(theta)`.
pub fn quadrature_variance(p: &PopulationVector, spectrum: &Spectrum, theta: f64) -> f64 {
    let (x2, p2) = quadrature_moments(p, spectrum);
    variance_at(x2, p2, theta)
}

fn variance_at(x2: f64, p2: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * c * x2 + s * s * p2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingResult {
    pub xi_squared: f64,
    pub theta_star: f64,
    pub var_x: f64,
    pub var_p: f64,
}

impl SqueezingResult {
    pub fn is_squeezed(&self) -> bool {
        self.xi_squared < 1.0
    }
}

const GOLDEN_TOL: f64 = 1e-12;

/// Minimum quadrature variance over `theta in [0, pi)`: a uniform grid of
/// `theta_grid_size` points (raised to 4 if smaller), refined by golden-section
/// search around the best grid point.
pub fn squeezing_factor(p: &PopulationVector, spectrum: &Spectrum, theta_grid_size: usize) -> SqueezingResult {
    let (x2, p2) = quadrature_moments(p, spectrum);
    let k = theta_grid_size.max(4);
    let step = PI / k as f64;
    let var = |t: f64| variance_at(x2, p2, t);
    let best = (0..k)
        .map(|i| i as f64 * step)
        .min_by(|a, b| var(*a).total_cmp(&var(*b)))
        .unwrap_or(0.0);

    let (mut a, mut b) = (best - step, best + step);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > GOLDEN_TOL {
        if var(c) < var(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    let mut theta = 0.5 * (a + b);
    let mut xi = var(theta);
    if var(best) <= xi {
        theta = best;
        xi = var(best);
    }
    SqueezingResult {
        xi_squared: xi,
        theta_star: theta.rem_euclid(PI),
        var_x: x2,
        var_p: p2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCouplingCurrent {
    pub total: f64,
    /// `(m, I_{m,1}, I_{m,0})` for `m = 2..=cutoff_m`.
    pub components: Vec<(usize, f64, f64)>,
    pub cutoff_m: usize,
}

impl WeakCouplingCurrent {
    pub fn component(&self, m: usize) -> Option<(f64, f64)> {
        self.components
            .iter()
            .find(|c| c.0 == m)
            .map(|c| (c.1, c.2))
    }
}

const WEAK_TAIL_TOL: f64 = 1e-10;

/// Leading-order current in `lambda / omega_a` from the two cyclic transition
/// families, summed over `m` until the geometric tail drops below `1e-10` of
/// the accumulated weight or `max_terms` is reached.
pub fn weak_coupling_current(
    params: &ValidatedParams,
    resonator: &BathSpec,
    qubit: &BathSpec,
    max_terms: usize,
) -> Result<WeakCouplingCurrent> {
    let (w, eps, lambda) = (params.omega_a(), params.epsilon(), params.lambda());
    if lambda > 0.02 * w {
        log::warn!("weak-coupling current used at lambda = {lambda}, outside its regime");
    }
    if !(resonator.temperature > 0.0) {
        return Err(Error::InvalidBath(
            "weak-coupling current needs a resonator temperature > 0".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weak-coupling current needs epsilon > 0, got {eps}"
        )));
    }
    let (t_r, t_q) = (resonator.temperature, qubit.temperature);
    let nq_eps = bose_occupation(eps, t_q)?;
    let nr_w = bose_occupation(w, t_r)?;
    let nr_2w = bose_occupation(2.0 * w, t_r)?;
    let denom_q = (1.0 + 2.0 * nq_eps) * (1.0 + nr_w);

    let kernel_1 = {
        let e = 2.0 * w + eps;
        let n = bose_occupation(e, t_q)?;
        spectral_density(e, qubit)
            * ((1.0 + n) * nq_eps * nr_2w - n * (1.0 + nq_eps) * (1.0 + nr_2w))
    };
    let kernel_0 = {
        let e = 2.0 * w - eps;
        if e > 0.0 {
            let n = bose_occupation(e, t_q)?;
            spectral_density(e, qubit)
                * ((1.0 + n) * (1.0 + nq_eps) * nr_2w - n * nq_eps * (1.0 + nr_2w))
        } else {
            0.0
        }
    };

    // e^{-m w / T_R} / n_R(2w), kept finite as T_R -> 0
    let x = w / t_r;
    let ratio = (-x).exp();
    let cyclic_weight = |m: usize| (-((m - 2) as f64) * x).exp() * -(-2.0 * x).exp_m1();

    let mut components = Vec::new();
    let mut sum = 0.0;
    let mut weight_sum = 0.0;
    let peak = (2.0 / x).ceil() as usize + 2;
    for m in 2..2 + max_terms {
        let cw = cyclic_weight(m) / denom_q;
        let (i1, i0) = (cw * kernel_1, cw * kernel_0);
        components.push((m, i1, i0));
        let mm = (m * (m - 1)) as f64;
        sum += mm * (i1 + i0);
        let weight = mm * cw;
        weight_sum += weight;
        if m >= peak {
            let tail = weight * ratio * (m + 1) as f64 / (m - 1) as f64 / (1.0 - ratio);
            if tail <= WEAK_TAIL_TOL * weight_sum {
                return Ok(WeakCouplingCurrent {
                    total: 2.0 * lambda * lambda / w * sum,
                    components,
                    cutoff_m: m,
                });
            }
        }
    }
    Err(Error::CutoffUnconverged(max_terms))
}

/// Interior maximum `(dT_peak, J_peak)` of a current curve sampled on
/// increasing `dT`, if the curve rises into it and falls after it.
pub fn detect_ndtc(curve: &[(f64, f64)]) -> Result<Option<(f64, f64)>> {
    if curve.len() < 5 {
        return Err(Error::TooFewPoints(curve.len()));
    }
    let (i, &(dt, j)) = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty");
    if i == 0 || i + 1 == curve.len() {
        return Ok(None);
    }
    if curve[i - 1].1 < j && curve[i + 1].1 < j {
        Ok(Some((dt, j)))
    } else {
        Ok(None)
    }
}
