//! Thermal baths and dressed-state transition rates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlap::{overlap_table, OverlapTable, SqueezeMismatch};
use crate::spectrum::{Branch, BranchData, Spectrum};

/// Which subsystem a bath couples to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BathLabel {
    /// Couples to the resonator quadrature `a^dag + a`.
    R,
    /// Couples to the qubit through `sigma_x`.
    Q,
}

/// Super-Ohmic bosonic bath at temperature `temperature` (`k_B = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub label: BathLabel,
    pub alpha: f64,
    pub omega_c: f64,
    pub temperature: f64,
}

impl BathSpec {
    pub fn new(label: BathLabel, alpha: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        let b = Self {
            label,
            alpha,
            omega_c,
            temperature,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidBath(format!("alpha = {} must be >= 0", self.alpha)));
        }
        if !(self.omega_c > 0.0) || !self.omega_c.is_finite() {
            return Err(Error::InvalidBath(format!("omega_c = {} must be > 0", self.omega_c)));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidBath(format!(
                "temperature = {} must be >= 0",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }
}

/// `gamma(w) = pi alpha w^3 / w_c^2 exp(-w / w_c)` for `w > 0`, zero otherwise.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let x = omega / bath.omega_c;
    std::f64::consts::PI * bath.alpha * omega * x * x * (-x).exp()
}

/// Bose-Einstein occupation `1 / (exp(w / T) - 1)`, exactly zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// `(Gamma^{R,+}_{m,sigma}, Gamma^{R,-}_{m,sigma})`: excitation `m-1 -> m` and
/// relaxation `m -> m-1` within one branch.
pub fn resonator_rates(b: &BranchData, m: usize, bath: &BathSpec) -> (f64, f64) {
    if m == 0 {
        return (0.0, 0.0);
    }
    let w = b.mode_frequency();
    let n = bose_occupation(w, bath.temperature).unwrap_or(0.0);
    let base = m as f64 * (b.f - b.g).powi(2) * spectral_density(w, bath);
    (base * n, base * (1.0 + n))
}

/// `(Gamma^{Q,+}_{m,m',sigma}, Gamma^{Q,-}_{m,m',sigma})` for the pair
/// `|psi^{flip(sigma)}_{m'}> <-> |psi^sigma_m>`, nonzero only when the gap
/// `E^sigma_m - E^{flip(sigma)}_{m'}` is positive and `|m - m'|` is even.
///
/// `overlaps[s]` holds `G^{.,s}_{.,flip(s)}` for both branches `s`.
pub fn qubit_rates(
    m: usize,
    m_prime: usize,
    sigma: Branch,
    bath: &BathSpec,
    overlaps: &[OverlapTable; 2],
    spectrum: &Spectrum,
) -> (f64, f64) {
    if (m + m_prime) % 2 == 1 {
        return (0.0, 0.0);
    }
    let gap = spectrum.energy(sigma, m) - spectrum.energy(sigma.flip(), m_prime);
    if !(gap > 0.0) {
        return (0.0, 0.0);
    }
    let weight =
        overlaps[sigma.flip().index()].get(m_prime, m) * overlaps[sigma.index()].get(m, m_prime);
    let base = weight * spectral_density(gap, bath);
    let n = bose_occupation(gap, bath.temperature).unwrap_or(0.0);
    (base * n, base * (1.0 + n))
}

/// All dressed transition rates of one parameter point.
#[derive(Debug, Clone)]
pub struct RateSet {
    pub n_max: usize,
    /// `resonator_up[sigma][m]` is `Gamma^{R,+}_{m,sigma}`.
    pub resonator_up: [Vec<f64>; 2],
    pub resonator_down: [Vec<f64>; 2],
    /// `qubit_up[sigma][(m, m')]` is `Gamma^{Q,+}_{m,m',sigma}`.
    pub qubit_up: [DMatrix<f64>; 2],
    pub qubit_down: [DMatrix<f64>; 2],
}

/// Overlap tables `G^{.,s}_{.,flip(s)}` for both branches of a spectrum.
pub fn branch_overlaps(spectrum: &Spectrum) -> Result<[OverlapTable; 2]> {
    Ok([
        overlap_table(spectrum.n_max, &SqueezeMismatch::for_branch(spectrum, Branch::Down))?,
        overlap_table(spectrum.n_max, &SqueezeMismatch::for_branch(spectrum, Branch::Up))?,
    ])
}

impl RateSet {
    pub fn build(spectrum: &Spectrum, resonator_bath: &BathSpec, qubit_bath: &BathSpec) -> Result<Self> {
        let overlaps = branch_overlaps(spectrum)?;
        Self::build_with_overlaps(spectrum, &overlaps, resonator_bath, qubit_bath)
    }

    pub fn build_with_overlaps(
        spectrum: &Spectrum,
        overlaps: &[OverlapTable; 2],
        resonator_bath: &BathSpec,
        qubit_bath: &BathSpec,
    ) -> Result<Self> {
        resonator_bath.validate()?;
        qubit_bath.validate()?;
        let n_max = spectrum.n_max;
        for t in overlaps {
            if t.size != n_max + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n_max + 1,
                    found: t.size,
                });
            }
        }
        let size = n_max + 1;
        let resonator = Branch::BOTH.map(|s| {
            (0..size)
                .map(|m| resonator_rates(spectrum.branch(s), m, resonator_bath))
                .collect::<Vec<_>>()
        });
        let mut qubit_up = [DMatrix::zeros(size, size), DMatrix::zeros(size, size)];
        let mut qubit_down = qubit_up.clone();
        for s in Branch::BOTH {
            for m in 0..size {
                for mp in ((m % 2)..size).step_by(2) {
                    let (up, down) = qubit_rates(m, mp, s, qubit_bath, overlaps, spectrum);
                    qubit_up[s.index()][(m, mp)] = up;
                    qubit_down[s.index()][(m, mp)] = down;
                }
            }
        }
        Ok(Self {
            n_max,
            resonator_up: resonator.clone().map(|v| v.iter().map(|r| r.0).collect()),
            resonator_down: resonator.map(|v| v.iter().map(|r| r.1).collect()),
            qubit_up,
            qubit_down,
        })
    }
}
