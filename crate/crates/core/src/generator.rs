//! Counting-field-tilted population master equation and its steady state.
//!
//! States are flattened as `sigma * (N + 1) + n`. Counting fields are real
//! (`u = i chi`): a jump that emits energy `E` into a bath picks up `e^{+u E}`,
//! one that absorbs from it picks up `e^{-u E}`.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::condensation;
use petgraph::graph::DiGraph;
use petgraph::Direction;

use crate::bath::{BathLabel, RateSet};
use crate::error::{Error, Result};
use crate::spectrum::{Branch, DressedIndex, Spectrum};

/// Populations at or above this are clipped to zero after a solve.
pub const NEGATIVE_CLIP: f64 = -1e-12;

/// A single population transfer `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub bath: BathLabel,
    /// Energy released into `bath`; negative when the bath supplies it.
    pub emitted: f64,
}

/// Every nonzero jump of the dressed master equation.
pub fn jumps(rates: &RateSet, spectrum: &Spectrum) -> Result<Vec<Jump>> {
    check_dims(rates, spectrum)?;
    let n_max = rates.n_max;
    let idx = |s: Branch, n: usize| DressedIndex::new(s, n).flat(n_max);
    let mut out = Vec::new();
    let mut push = |from, to, rate: f64, bath, emitted| {
        if rate > 0.0 {
            out.push(Jump {
                from,
                to,
                rate,
                bath,
                emitted,
            });
        }
    };
    for s in Branch::BOTH {
        let i = s.index();
        let w = spectrum.branch(s).mode_frequency();
        for m in 1..=n_max {
            push(idx(s, m - 1), idx(s, m), rates.resonator_up[i][m], BathLabel::R, -w);
            push(idx(s, m), idx(s, m - 1), rates.resonator_down[i][m], BathLabel::R, w);
        }
        for m in 0..=n_max {
            for mp in ((m % 2)..=n_max).step_by(2) {
                let up = rates.qubit_up[i][(m, mp)];
                let down = rates.qubit_down[i][(m, mp)];
                if up == 0.0 && down == 0.0 {
                    continue;
                }
                let gap = spectrum.energy(s, m) - spectrum.energy(s.flip(), mp);
                let (upper, lower) = (idx(s, m), idx(s.flip(), mp));
                push(lower, upper, up, BathLabel::Q, -gap);
                push(upper, lower, down, BathLabel::Q, gap);
            }
        }
    }
    Ok(out)
}

fn check_dims(rates: &RateSet, spectrum: &Spectrum) -> Result<()> {
    if rates.n_max != spectrum.n_max {
        return Err(Error::DimensionMismatch {
            expected: spectrum.n_max + 1,
            found: rates.n_max + 1,
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TiltedGenerator {
    pub n_max: usize,
    pub matrix: DMatrix<f64>,
    pub tilt_q: f64,
    pub tilt_r: f64,
}

impl TiltedGenerator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_untilted(&self) -> bool {
        self.tilt_q == 0.0 && self.tilt_r == 0.0
    }
}

pub fn build_generator(
    rates: &RateSet,
    spectrum: &Spectrum,
    tilt_r: f64,
    tilt_q: f64,
) -> Result<TiltedGenerator> {
    let list = jumps(rates, spectrum)?;
    Ok(generator_from_jumps(&list, rates.n_max, tilt_r, tilt_q))
}

pub fn generator_from_jumps(list: &[Jump], n_max: usize, tilt_r: f64, tilt_q: f64) -> TiltedGenerator {
    let dim = 2 * (n_max + 1);
    let mut matrix = DMatrix::zeros(dim, dim);
    for j in list {
        let u = match j.bath {
            BathLabel::R => tilt_r,
            BathLabel::Q => tilt_q,
        };
        let factor = if u == 0.0 { 1.0 } else { (u * j.emitted).exp() };
        matrix[(j.to, j.from)] += j.rate * factor;
        matrix[(j.from, j.from)] -= j.rate;
    }
    TiltedGenerator {
        n_max,
        matrix,
        tilt_q,
        tilt_r,
    }
}

/// Stationary populations with the max-norm residual of the solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    pub n_max: usize,
    pub values: DVector<f64>,
    pub residual: f64,
}

impl PopulationVector {
    pub fn get(&self, sigma: Branch, n: usize) -> f64 {
        self.values[DressedIndex::new(sigma, n).flat(self.n_max)]
    }

    /// Total population of a branch.
    pub fn branch_weight(&self, sigma: Branch) -> f64 {
        (0..=self.n_max).map(|n| self.get(sigma, n)).sum()
    }
}

/// Number of closed communicating classes of the jump graph.
fn closed_classes(matrix: &DMatrix<f64>) -> usize {
    let dim = matrix.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(dim, 0);
    let nodes: Vec<_> = (0..dim).map(|_| graph.add_node(())).collect();
    for from in 0..dim {
        for to in 0..dim {
            if to != from && matrix[(to, from)] > 0.0 {
                graph.add_edge(nodes[from], nodes[to], ());
            }
        }
    }
    let dag = condensation(graph, true);
    dag.node_indices()
        .filter(|&n| dag.neighbors_directed(n, Direction::Outgoing).next().is_none())
        .count()
}

pub fn steady_state(gen: &TiltedGenerator) -> Result<PopulationVector> {
    if !gen.is_untilted() {
        return Err(Error::InvalidParameter(
            "steady state requires an untilted generator".into(),
        ));
    }
    let classes = closed_classes(&gen.matrix);
    if classes != 1 {
        return Err(Error::SingularSolve(format!(
            "{classes} closed classes, stationary state not unique"
        )));
    }
    let dim = gen.dim();
    let mut a = gen.matrix.clone();
    a.row_mut(0).fill(1.0);
    let mut rhs = DVector::zeros(dim);
    rhs[0] = 1.0;
    let mut p = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSolve("LU factorization failed".into()))?;
    if let Some(worst) = p.iter().copied().find(|&x| x < NEGATIVE_CLIP) {
        return Err(Error::SingularSolve(format!("population {worst:e} below clip threshold")));
    }
    p.apply(|x| *x = x.max(0.0));
    let total = p.sum();
    p /= total;
    let residual = (&gen.matrix * &p).amax();
    Ok(PopulationVector {
        n_max: gen.n_max,
        values: p,
        residual,
    })
}

const INVERSE_ITERATIONS: usize = 200;
const NEWTON_ITERATIONS: usize = 30;

/// Largest real eigenvalue of a tilted generator together with its right
/// eigenvector normalized to unit sum.
pub fn dominant_eigenpair(
    gen: &TiltedGenerator,
    warm: Option<(&DVector<f64>, f64)>,
) -> Result<(f64, DVector<f64>)> {
    let m = &gen.matrix;
    let dim = gen.dim();
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);

    let (mut x, mut mu) = match warm {
        Some((v, mu)) if v.len() == dim => (v.clone(), mu),
        Some((v, _)) => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            })
        }
        None => inverse_iteration(m, scale)?,
    };

    for _ in 0..NEWTON_ITERATIONS {
        let r = m * &x - &x * mu;
        let norm_err = x.sum() - 1.0;
        if r.amax() <= 1e-15 * scale && norm_err.abs() <= 1e-15 {
            return finish(x, mu);
        }
        let mut jac = DMatrix::zeros(dim + 1, dim + 1);
        jac.view_mut((0, 0), (dim, dim)).copy_from(m);
        for i in 0..dim {
            jac[(i, i)] -= mu;
            jac[(i, dim)] = -x[i];
            jac[(dim, i)] = 1.0;
        }
        let mut rhs = DVector::zeros(dim + 1);
        rhs.rows_mut(0, dim).copy_from(&(-r));
        rhs[dim] = -norm_err;
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::ConvergenceFailure("singular Newton system".into()))?;
        x += step.rows(0, dim);
        mu += step[dim];
        if step.rows(0, dim).amax() <= 1e-15 && step[dim].abs() <= 1e-16 * scale {
            return finish(x, mu);
        }
    }
    let r = (m * &x - &x * mu).amax();
    if r <= 1e-12 * scale {
        return finish(x, mu);
    }
    Err(Error::ConvergenceFailure(format!(
        "Newton residual {r:e} after {NEWTON_ITERATIONS} steps"
    )))
}

fn finish(x: DVector<f64>, mu: f64) -> Result<(f64, DVector<f64>)> {
    // the Perron vector has one sign; anything else means the iteration locked onto another root
    let floor = -1e-9 * x.amax();
    if x.iter().any(|&v| v < floor) {
        return Err(Error::ConvergenceFailure(
            "eigenvector is not positive, converged to a non-dominant root".into(),
        ));
    }
    Ok((mu, x))
}

fn inverse_iteration(m: &DMatrix<f64>, scale: f64) -> Result<(DVector<f64>, f64)> {
    let dim = m.nrows();
    // columns have non-negative off-diagonals, so the largest column sum bounds
    // the spectrum from the right
    let bound = (0..dim).map(|j| m.column(j).sum()).fold(f64::NEG_INFINITY, f64::max);
    let shift = bound + 1e-3 * scale;
    let mut a = -m.clone();
    for i in 0..dim {
        a[(i, i)] += shift;
    }
    let lu = a.lu();
    let mut x = DVector::from_element(dim, 1.0 / dim as f64);
    let mut mu = f64::NAN;
    for _ in 0..INVERSE_ITERATIONS {
        let y = lu
            .solve(&x)
            .ok_or_else(|| Error::ConvergenceFailure("singular shifted matrix".into()))?;
        let s = y.sum();
        if !(s.is_finite() && s != 0.0) {
            return Err(Error::ConvergenceFailure("inverse iteration lost the Perron vector".into()));
        }
        let next = y / s;
        let estimate = (m * &next).sum();
        let moved = (&next - &x).amax();
        x = next;
        if (estimate - mu).abs() <= 1e-10 * scale && moved <= 1e-8 {
            return Ok((x, estimate));
        }
        mu = estimate;
    }
    // slow contraction still leaves a good Newton start
    Ok((x, mu))
}

/// Largest real eigenvalue of a tilted generator.
pub fn dominant_eigenvalue(gen: &TiltedGenerator) -> Result<f64> {
    dominant_eigenpair(gen, None).map(|(mu, _)| mu)
}
