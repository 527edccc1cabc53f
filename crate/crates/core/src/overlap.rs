//! Overlaps `G^{m,s}_{m',s'} = <psi^s_m| sigma_x |psi^{s'}_{m'}>` between squeezed
//! Fock states of opposite qubit branches.
//!
//! The overlap is the Fock matrix element of a squeeze operator with parameter
//! `delta_alpha = alpha_s - alpha_s'`. Writing `m - l = 2p` and `m' - l = 2q`, the
//! closed-form sum regroups into integer powers only:
//!
//! ```text
//! G = sqrt(m! m'! / u) * sum_l (-v / 2u)^p (v / 2u)^q / (l! p! q! u^l)
//! ```
//!
//! with `u = cosh(delta_alpha)`, `v = -sinh(delta_alpha)`. Odd `|m - m'|` gives
//! exactly zero. All squeeze parameters are real, so `v* = v`.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectrum::{Branch, Spectrum};

/// Largest Fock index accepted by [`overlap`].
pub const STABLE_WINDOW: usize = 512;

/// Indices above this use log-domain factorials.
const DIRECT_LIMIT: usize = 30;

/// Squeeze mismatch between the two branches seen from one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeMismatch {
    pub delta_alpha: f64,
    pub u: f64,
    pub v: f64,
}

impl SqueezeMismatch {
    pub fn new(delta_alpha: f64) -> Self {
        Self {
            delta_alpha,
            u: delta_alpha.cosh(),
            v: -delta_alpha.sinh(),
        }
    }

    /// Mismatch `alpha_sigma - alpha_{flip(sigma)}` for a spectrum.
    pub fn for_branch(spectrum: &Spectrum, sigma: Branch) -> Self {
        Self::new(spectrum.branch(sigma).alpha - spectrum.branch(sigma.flip()).alpha)
    }
}

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(2 * STABLE_WINDOW + 2);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..=(2 * STABLE_WINDOW + 1) {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

fn factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![1.0];
        for k in 1..=DIRECT_LIMIT {
            let prev = t[k - 1];
            t.push(prev * k as f64);
        }
        t
    })
}

/// Overlap coefficient `G^{m,s}_{m',s'}` for a given mismatch.
pub fn overlap(m: usize, m_prime: usize, sq: &SqueezeMismatch) -> Result<f64> {
    if m.max(m_prime) > STABLE_WINDOW {
        return Err(Error::OverflowRisk {
            m,
            m_prime,
            window: STABLE_WINDOW,
        });
    }
    Ok(overlap_unchecked(m, m_prime, sq))
}

fn overlap_unchecked(m: usize, m_prime: usize, sq: &SqueezeMismatch) -> f64 {
    if (m + m_prime) % 2 == 1 {
        return 0.0;
    }
    if sq.v == 0.0 {
        return if m == m_prime { 1.0 } else { 0.0 };
    }
    if m.max(m_prime) <= DIRECT_LIMIT {
        overlap_direct(m, m_prime, sq)
    } else {
        overlap_log(m, m_prime, sq)
    }
}

fn overlap_direct(m: usize, m_prime: usize, sq: &SqueezeMismatch) -> f64 {
    let fact = factorials();
    let (u, v) = (sq.u, sq.v);
    let a = -v / (2.0 * u);
    let b = v / (2.0 * u);
    let lo = m.min(m_prime);
    let mut sum = 0.0;
    for l in ((lo % 2)..=lo).step_by(2) {
        let p = (m - l) / 2;
        let q = (m_prime - l) / 2;
        sum += a.powi(p as i32) * b.powi(q as i32)
            / (fact[l] * fact[p] * fact[q] * u.powi(l as i32));
    }
    (fact[m] * fact[m_prime] / u).sqrt() * sum
}

fn overlap_log(m: usize, m_prime: usize, sq: &SqueezeMismatch) -> f64 {
    let lf = ln_factorials();
    let (u, v) = (sq.u, sq.v);
    let ln_u = u.ln();
    let ln_ratio = (v.abs() / (2.0 * u)).ln();
    // (-v)^p v^q: sign of -v raised to p, sign of v raised to q
    let neg_v_negative = -v < 0.0;
    let v_negative = v < 0.0;
    let prefactor = 0.5 * (lf[m] + lf[m_prime] - ln_u);
    let lo = m.min(m_prime);

    let terms: Vec<(f64, f64)> = ((lo % 2)..=lo)
        .step_by(2)
        .map(|l| {
            let p = (m - l) / 2;
            let q = (m_prime - l) / 2;
            let ln_mag = prefactor + (p + q) as f64 * ln_ratio
                - lf[l]
                - lf[p]
                - lf[q]
                - l as f64 * ln_u;
            let negative = (neg_v_negative && p % 2 == 1) ^ (v_negative && q % 2 == 1);
            (ln_mag, if negative { -1.0 } else { 1.0 })
        })
        .collect();
    let peak = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = terms.iter().map(|(l, s)| s * (l - peak).exp()).sum();
    scaled * peak.exp()
}

/// Table of `G^{m,s}_{m',s'}` for `0 <= m, m' <= size - 1` at fixed `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTable {
    pub size: usize,
    pub entries: DMatrix<f64>,
}

impl OverlapTable {
    pub fn get(&self, m: usize, m_prime: usize) -> f64 {
        self.entries[(m, m_prime)]
    }

    /// `sum_{m'} G[m][m']^2`.
    pub fn row_square_sum(&self, m: usize) -> f64 {
        self.entries.row(m).iter().map(|x| x * x).sum()
    }

    /// Writes the table as CSV with columns `m,m_prime,overlap`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "m,m_prime,overlap")?;
        for m in 0..self.size {
            for mp in 0..self.size {
                writeln!(w, "{m},{mp},{:.16e}", self.get(m, mp))?;
            }
        }
        Ok(())
    }
}

/// Overlap table for truncation `n` (entries `0..=n` on both axes).
pub fn overlap_table(n: usize, sq: &SqueezeMismatch) -> Result<OverlapTable> {
    if n > STABLE_WINDOW {
        return Err(Error::OverflowRisk {
            m: n,
            m_prime: n,
            window: STABLE_WINDOW,
        });
    }
    let size = n + 1;
    let entries = DMatrix::from_fn(size, size, |m, mp| overlap_unchecked(m, mp, sq));
    Ok(OverlapTable { size, entries })
}

/// Oracle: `(m, m')` element of `exp((delta_alpha / 2)(a^dag^2 - a^2))` computed
/// by a dense matrix exponential in a Fock space of `n_bare` states.
pub fn brute_force_overlap(m: usize, m_prime: usize, delta_alpha: f64, n_bare: usize) -> Result<f64> {
    let need = 4 * m.max(m_prime) + 100;
    if n_bare < need {
        return Err(Error::TruncationTooSmall(format!(
            "n_bare = {n_bare} < {need} for overlap ({m}, {m_prime})"
        )));
    }
    Ok(brute_force_squeeze_matrix(delta_alpha, n_bare)[(m, m_prime)])
}

/// Full dense squeeze matrix used by [`brute_force_overlap`].
pub fn brute_force_squeeze_matrix(delta_alpha: f64, n_bare: usize) -> DMatrix<f64> {
    let mut gen = DMatrix::zeros(n_bare, n_bare);
    for n in 0..n_bare.saturating_sub(2) {
        let c = 0.5 * delta_alpha * ((n as f64 + 1.0) * (n as f64 + 2.0)).sqrt();
        // a^dag^2 raises n -> n + 2, a^2 lowers
        gen[(n + 2, n)] += c;
        gen[(n, n + 2)] -= c;
    }
    gen.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SystemParams;

    fn mismatch(lambda: f64, sigma: Branch) -> SqueezeMismatch {
        let p = SystemParams::new(1.0, 1.0, lambda).validate().unwrap();
        SqueezeMismatch::for_branch(&Spectrum::new(&p, 0), sigma)
    }

    #[test]
    fn selection_rule_is_exact_zero() {
        let sq = mismatch(0.2, Branch::Up);
        for m in 0..40 {
            for mp in 0..40 {
                if (m + mp) % 2 == 1 {
                    assert_eq!(overlap(m, mp, &sq).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn decoupled_is_identity() {
        let sq = mismatch(0.0, Branch::Up);
        let t = overlap_table(12, &sq).unwrap();
        assert_eq!(t.entries, DMatrix::identity(13, 13));
    }

    #[test]
    fn vacuum_overlap_at_lambda_0_2() {
        let sq = mismatch(0.2, Branch::Up);
        assert!((sq.delta_alpha - 0.549306144334055).abs() < 1e-12);
        assert!((sq.u - 1.154700538379252).abs() < 1e-12);
        let g = overlap(0, 0, &sq).unwrap();
        assert!((g - sq.u.powf(-0.5)).abs() < 1e-15);
        assert!((g - 0.930604859102100).abs() < 1e-12);
        let t = overlap_table(0, &sq).unwrap();
        assert_eq!(t.size, 1);
        assert_eq!(t.get(0, 0), g);
    }

    #[test]
    fn direct_and_log_paths_agree() {
        let sq = mismatch(0.2, Branch::Up);
        for m in 0..=DIRECT_LIMIT {
            for mp in ((m % 2)..=DIRECT_LIMIT).step_by(2) {
                let a = overlap_direct(m, mp, &sq);
                let b = overlap_log(m, mp, &sq);
                assert!((a - b).abs() < 1e-10, "({m},{mp}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn too_large_index_is_rejected() {
        let sq = mismatch(0.1, Branch::Up);
        assert!(matches!(
            overlap(STABLE_WINDOW + 1, 0, &sq),
            Err(Error::OverflowRisk { .. })
        ));
    }

    #[test]
    fn opposite_branch_table_is_transpose() {
        let up = overlap_table(30, &mismatch(0.15, Branch::Up)).unwrap();
        let down = overlap_table(30, &mismatch(0.15, Branch::Down)).unwrap();
        assert!((up.entries.transpose() - down.entries).amax() < 1e-14);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let t = overlap_table(1, &mismatch(0.1, Branch::Up)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("m,m_prime,overlap\n0,0,"));
    }
}
