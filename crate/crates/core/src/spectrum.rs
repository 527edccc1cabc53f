//! Exact spectrum of the quadratically coupled qubit-resonator Hamiltonian
//!
//! `H = omega_a a^dag a + (epsilon/2) sigma_z + lambda sigma_z (a^dag + a)^2`
//!
//! is block diagonal in the qubit basis. Each block is a single-mode quadratic
//! boson Hamiltonian that a Bogoliubov (squeeze) transformation brings to
//! `eta_s omega_s A^dag A + const`, so every block is a harmonic ladder.
//! A dense diagonalization in the bare Fock basis is provided as a test oracle.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance kept from the spectral-collapse boundary `lambda = omega_a / 4`.
pub const COUPLING_MARGIN: f64 = 1e-6;

/// Qubit basis state labelling one block of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// Qubit in `|0>` (`sigma = 0`).
    Down = 0,
    /// Qubit in `|1>` (`sigma = 1`).
    Up = 1,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Down, Branch::Up];

    /// `(-1)^(sigma + 1)`: `+1` for `Up`, `-1` for `Down`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Down => -1.0,
            Branch::Up => 1.0,
        }
    }

    pub fn flip(self) -> Branch {
        match self {
            Branch::Down => Branch::Up,
            Branch::Up => Branch::Down,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Bare model parameters, all in units of `omega_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_a: f64,
    pub epsilon: f64,
    pub lambda: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_a: 1.0,
            epsilon: 1.0,
            lambda: 0.0,
        }
    }
}

impl SystemParams {
    pub fn new(omega_a: f64, epsilon: f64, lambda: f64) -> Self {
        Self {
            omega_a,
            epsilon,
            lambda,
        }
    }

    /// Largest admissible coupling for a given resonator frequency.
    pub fn max_coupling(omega_a: f64) -> f64 {
        omega_a / 4.0 - COUPLING_MARGIN * omega_a
    }

    pub fn validate(self) -> Result<ValidatedParams> {
        validate_params(self)
    }
}

/// Parameters that passed [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(SystemParams);

impl ValidatedParams {
    pub fn get(&self) -> &SystemParams {
        &self.0
    }
    pub fn omega_a(&self) -> f64 {
        self.0.omega_a
    }
    pub fn epsilon(&self) -> f64 {
        self.0.epsilon
    }
    pub fn lambda(&self) -> f64 {
        self.0.lambda
    }
}

pub fn validate_params(p: SystemParams) -> Result<ValidatedParams> {
    if !(p.omega_a > 0.0) || !p.omega_a.is_finite() {
        return Err(Error::NonPositiveFrequency(p.omega_a));
    }
    if !p.epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon = {} is not finite", p.epsilon)));
    }
    let limit = SystemParams::max_coupling(p.omega_a);
    if !(p.lambda >= 0.0 && p.lambda <= limit) {
        return Err(Error::CouplingOutOfRange {
            lambda: p.lambda,
            omega_a: p.omega_a,
            limit,
        });
    }
    Ok(ValidatedParams(p))
}

/// Squeezed-mode data of one qubit branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchData {
    pub sigma: Branch,
    /// Renormalization factor `eta = sqrt(1 - (2 lambda / omega_sigma)^2)`.
    pub eta: f64,
    /// Displaced frequency `omega_a + 2 lambda_sigma`.
    pub omega_sigma: f64,
    /// Bogoliubov coefficients of `A = f a + g a^dag`.
    pub f: f64,
    pub g: f64,
    /// Squeeze parameter, `tanh(alpha) = g / f`.
    pub alpha: f64,
    /// Squeezed-vacuum ratio `-g / f`.
    pub phi: f64,
    pub epsilon_sigma: f64,
    pub lambda_sigma: f64,
}

impl BranchData {
    /// Ladder spacing `eta_sigma * omega_sigma`.
    pub fn mode_frequency(&self) -> f64 {
        self.eta * self.omega_sigma
    }
}

pub fn build_branch(p: &ValidatedParams, sigma: Branch) -> BranchData {
    let s = sigma.sign();
    let lambda = p.lambda();
    let lambda_sigma = s * lambda;
    let omega_sigma = p.omega_a() + 2.0 * lambda_sigma;
    let ratio = 2.0 * lambda / omega_sigma;
    let eta = (1.0 - ratio * ratio).sqrt();
    // (1 - eta) via ratio^2 / (1 + eta) keeps precision when lambda is tiny.
    let one_minus_eta = ratio * ratio / (1.0 + eta);
    let f = ((1.0 + eta) / (2.0 * eta)).sqrt();
    let g = s * (one_minus_eta / (2.0 * eta)).sqrt();
    let tanh_alpha = s * (one_minus_eta / (1.0 + eta)).sqrt();
    BranchData {
        sigma,
        eta,
        omega_sigma,
        f,
        g,
        alpha: tanh_alpha.atanh(),
        phi: -g / f,
        epsilon_sigma: s * p.epsilon(),
        lambda_sigma,
    }
}

/// `E^sigma_n = eta omega_sigma n + (eta - 1) omega_sigma / 2 + epsilon_sigma / 2 + lambda_sigma`.
///
/// The zero-point shift of a squeezed mode is `(eta - 1) omega_sigma / 2`; the
/// dense diagonalization in [`brute_force_spectrum`] pins this constant.
pub fn eigen_energy(b: &BranchData, n: usize) -> f64 {
    let w = b.mode_frequency();
    w * n as f64 + 0.5 * (w - b.omega_sigma) + 0.5 * b.epsilon_sigma + b.lambda_sigma
}

/// Index of a dressed eigenstate `|psi^sigma_n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DressedIndex {
    pub sigma: Branch,
    pub n: usize,
}

impl DressedIndex {
    pub fn new(sigma: Branch, n: usize) -> Self {
        Self { sigma, n }
    }

    /// Flat position in a population vector of truncation `n_max`.
    pub fn flat(self, n_max: usize) -> usize {
        self.sigma.index() * (n_max + 1) + self.n
    }

    pub fn from_flat(i: usize, n_max: usize) -> Self {
        let len = n_max + 1;
        let sigma = if i < len { Branch::Down } else { Branch::Up };
        Self { sigma, n: i % len }
    }
}

/// Both branches and their level energies up to a truncation `n_max`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub params: ValidatedParams,
    pub n_max: usize,
    branches: [BranchData; 2],
    energies: [Vec<f64>; 2],
}

impl Spectrum {
    pub fn new(params: &ValidatedParams, n_max: usize) -> Self {
        let branches = [
            build_branch(params, Branch::Down),
            build_branch(params, Branch::Up),
        ];
        Self::from_branches(params, branches, n_max)
    }

    /// Spectrum from explicitly supplied branch data, e.g. a simplified model.
    pub fn from_branches(params: &ValidatedParams, branches: [BranchData; 2], n_max: usize) -> Self {
        let energies = branches.map(|b| (0..=n_max).map(|n| eigen_energy(&b, n)).collect());
        Self {
            params: *params,
            branches,
            n_max,
            energies,
        }
    }

    pub fn branch(&self, sigma: Branch) -> &BranchData {
        &self.branches[sigma.index()]
    }

    pub fn branches(&self) -> &[BranchData; 2] {
        &self.branches
    }

    pub fn energy(&self, sigma: Branch, n: usize) -> f64 {
        self.energies[sigma.index()][n]
    }

    pub fn energies(&self, sigma: Branch) -> &[f64] {
        &self.energies[sigma.index()]
    }

    /// Number of dressed states, `2 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }
}

/// One eigenvalue from the dense diagonalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareLevel {
    pub energy: f64,
    pub branch: Branch,
    /// Rank of the level inside its branch (the squeezed-Fock number).
    pub occupation: usize,
}

/// Branch block of the Hamiltonian in a bare Fock basis of `n_bare` states.
///
/// `(a^dag + a)^2` is assembled from its normal-ordered form so the truncated
/// matrix is exact on every retained element.
pub fn bare_branch_hamiltonian(p: &ValidatedParams, sigma: Branch, n_bare: usize) -> DMatrix<f64> {
    let s = sigma.sign();
    let lambda = p.lambda();
    let mut h = DMatrix::zeros(n_bare, n_bare);
    for n in 0..n_bare {
        let nf = n as f64;
        h[(n, n)] = p.omega_a() * nf + 0.5 * s * p.epsilon() + s * lambda * (2.0 * nf + 1.0);
        if n + 2 < n_bare {
            let c = s * lambda * ((nf + 1.0) * (nf + 2.0)).sqrt();
            h[(n, n + 2)] = c;
            h[(n + 2, n)] = c;
        }
    }
    h
}

/// Fraction of each branch's computed eigenvalues treated as reliable.
const RELIABLE_FRACTION: f64 = 0.8;

/// Lowest `levels` eigenvalues of the full Hamiltonian from dense diagonalization
/// of both branch blocks in a Fock basis of `n_bare` states.
///
/// The top 20% of each block is discarded, and only levels below the lower of
/// the two branch cut-offs are returned.
pub fn brute_force_spectrum(p: &ValidatedParams, n_bare: usize, levels: usize) -> Result<Vec<BareLevel>> {
    let keep = (RELIABLE_FRACTION * n_bare as f64).floor() as usize;
    if keep == 0 {
        return Err(Error::TruncationTooSmall(format!("n_bare = {n_bare}")));
    }
    let mut all = Vec::with_capacity(2 * keep);
    let mut ceiling = f64::INFINITY;
    for sigma in Branch::BOTH {
        let mut ev: Vec<f64> = SymmetricEigen::new(bare_branch_hamiltonian(p, sigma, n_bare))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev.truncate(keep);
        ceiling = ceiling.min(*ev.last().unwrap());
        all.extend(ev.into_iter().enumerate().map(|(occupation, energy)| BareLevel {
            energy,
            branch: sigma,
            occupation,
        }));
    }
    all.retain(|l| l.energy <= ceiling);
    all.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    if levels > all.len() {
        return Err(Error::TruncationTooSmall(format!(
            "{levels} levels requested, {} reliable with n_bare = {n_bare}",
            all.len()
        )));
    }
    all.truncate(levels);
    Ok(all)
}
