//! First three cumulants of the energy transferred into the qubit bath.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bath::{BathLabel, RateSet};
use crate::error::{Error, Result};
use crate::generator::{
    build_generator, dominant_eigenpair, generator_from_jumps, jumps, steady_state, Jump,
    PopulationVector,
};
use crate::spectrum::Spectrum;

/// Default finite-difference step in units of `1 / omega_a`.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Largest tolerated `exp(2 step dE_max)`.
pub const FD_GROWTH_LIMIT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CumulantMethod {
    FiniteDifference,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantResult {
    pub current: f64,
    pub noise: f64,
    pub skewness: f64,
    pub method: CumulantMethod,
    pub truncation_n: usize,
}

/// Energy-weighted net emission into the qubit bath.
pub fn direct_current(p: &PopulationVector, rates: &RateSet, spectrum: &Spectrum) -> Result<f64> {
    let list = jumps(rates, spectrum)?;
    if p.values.len() != 2 * (rates.n_max + 1) {
        return Err(Error::DimensionMismatch {
            expected: 2 * (rates.n_max + 1),
            found: p.values.len(),
        });
    }
    Ok(list
        .iter()
        .filter(|j| j.bath == BathLabel::Q)
        .map(|j| j.emitted * j.rate * p.values[j.from])
        .sum())
}

/// Cumulants from central differences of the tilted Perron root, combined
/// over steps `step` and `step / 2` by Richardson extrapolation.
pub fn cumulants_fd(rates: &RateSet, spectrum: &Spectrum, step: f64) -> Result<CumulantResult> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!("step = {step} must be > 0")));
    }
    let list = jumps(rates, spectrum)?;
    let de_max = list
        .iter()
        .filter(|j| j.bath == BathLabel::Q)
        .map(|j| j.emitted.abs())
        .fold(0.0, f64::max);
    let growth = (2.0 * step * de_max).exp();
    if growth > FD_GROWTH_LIMIT {
        return Err(Error::StepTooLarge { step, growth });
    }

    let untilted = generator_from_jumps(&list, rates.n_max, 0.0, 0.0);
    let p = steady_state(&untilted)?;
    let cgf = |u: f64| -> Result<f64> {
        let g = generator_from_jumps(&list, rates.n_max, 0.0, u);
        dominant_eigenpair(&g, Some((&p.values, 0.0))).map(|(mu, _)| mu)
    };

    let derivs = |h: f64| -> Result<[f64; 3]> {
        let (gp, gm) = (cgf(h)?, cgf(-h)?);
        let (gp2, gm2) = (cgf(2.0 * h)?, cgf(-2.0 * h)?);
        Ok([
            (gp - gm) / (2.0 * h),
            (gp + gm) / (h * h),
            (gp2 - 2.0 * gp + 2.0 * gm - gm2) / (2.0 * h * h * h),
        ])
    };
    let coarse = derivs(step)?;
    let fine = derivs(0.5 * step)?;
    let rich = |k: usize| (4.0 * fine[k] - coarse[k]) / 3.0;

    Ok(CumulantResult {
        current: rich(0),
        noise: rich(1),
        skewness: rich(2),
        method: CumulantMethod::FiniteDifference,
        truncation_n: rates.n_max,
    })
}

/// `k`-th derivative in `u_Q` of the tilted generator at zero tilt.
fn tilt_derivative(list: &[Jump], dim: usize, k: i32) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for j in list.iter().filter(|j| j.bath == BathLabel::Q) {
        m[(j.to, j.from)] += j.rate * j.emitted.powi(k);
    }
    m
}

/// Cumulants from Rayleigh-Schroedinger expansion of the Perron root to third
/// order in `u_Q`. Correction equations are solved with the generator bordered
/// by the stationary state and the normalization row.
pub fn cumulants_perturbative(rates: &RateSet, spectrum: &Spectrum) -> Result<CumulantResult> {
    let list = jumps(rates, spectrum)?;
    let gen = generator_from_jumps(&list, rates.n_max, 0.0, 0.0);
    let p = steady_state(&gen)?.values;
    let dim = gen.dim();

    let mut bordered = DMatrix::zeros(dim + 1, dim + 1);
    bordered.view_mut((0, 0), (dim, dim)).copy_from(&gen.matrix);
    for i in 0..dim {
        bordered[(i, dim)] = p[i];
        bordered[(dim, i)] = 1.0;
    }
    let lu = bordered.lu();
    let solve = |b: DVector<f64>| -> Result<DVector<f64>> {
        let mut rhs = DVector::zeros(dim + 1);
        rhs.rows_mut(0, dim).copy_from(&b);
        let x = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSolve("bordered generator is singular".into()))?;
        Ok(x.rows(0, dim).into_owned())
    };

    let l1 = tilt_derivative(&list, dim, 1);
    let l2 = tilt_derivative(&list, dim, 2);
    let l3 = tilt_derivative(&list, dim, 3);

    let l1p = &l1 * &p;
    let l2p = &l2 * &p;
    let c1 = l1p.sum();
    let r1 = solve(&p * c1 - &l1p)?;

    let l1r1 = &l1 * &r1;
    let c2 = l1r1.sum() + 0.5 * l2p.sum();
    let r2 = solve(&p * c2 + &r1 * c1 - &l1r1 - &l2p * 0.5)?;

    let c3 = (&l1 * &r2).sum() + 0.5 * (&l2 * &r1).sum() + (&l3 * &p).sum() / 6.0;

    Ok(CumulantResult {
        current: c1,
        noise: 2.0 * c2,
        skewness: 6.0 * c3,
        method: CumulantMethod::Perturbative,
        truncation_n: rates.n_max,
    })
}

/// Steady state and current from a fresh untilted generator.
pub fn stationary_current(rates: &RateSet, spectrum: &Spectrum) -> Result<(PopulationVector, f64)> {
    let p = steady_state(&build_generator(rates, spectrum, 0.0, 0.0)?)?;
    let j = direct_current(&p, rates, spectrum)?;
    Ok((p, j))
}
