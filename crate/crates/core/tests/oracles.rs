use nalgebra::{DMatrix, SymmetricEigen};

use qrheat::bath::{BathLabel, BathSpec, RateSet};
use qrheat::cumulants::stationary_current;
use qrheat::generator::{build_generator, steady_state, PopulationVector};
use qrheat::observables::{quadrature_moments, squeezing_factor, weak_coupling_current};
use qrheat::point::{evaluate_certified, Needs, TruncationPolicy};
use qrheat::spectrum::{bare_branch_hamiltonian, Branch, Spectrum, SystemParams, ValidatedParams};

fn params(lambda: f64) -> ValidatedParams {
    SystemParams::new(1.0, 1.0, lambda).validate().unwrap()
}

fn baths(t_r: f64, t_q: f64) -> (BathSpec, BathSpec) {
    (
        BathSpec::new(BathLabel::R, 1e-3, 10.0, t_r).unwrap(),
        BathSpec::new(BathLabel::Q, 1e-3, 10.0, t_q).unwrap(),
    )
}

fn stationary(lambda: f64, n: usize, t_r: f64, t_q: f64) -> (Spectrum, PopulationVector) {
    let s = Spectrum::new(&params(lambda), n);
    let (r, q) = baths(t_r, t_q);
    let rates = RateSet::build(&s, &r, &q).unwrap();
    let p = steady_state(&build_generator(&rates, &s, 0.0, 0.0).unwrap()).unwrap();
    (s, p)
}

/// `a` in a Fock basis of `n` states.
fn annihilation(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

struct DenseMoments {
    x2: f64,
    p2: f64,
    cross: f64,
}

/// Quadrature moments of a Gibbs state built from dense eigenvectors of both
/// branch blocks; `None` temperature selects the ground state.
fn dense_moments(lambda: f64, temperature: Option<f64>, n_bare: usize, levels: usize) -> DenseMoments {
    let p = params(lambda);
    let a = annihilation(n_bare);
    let ad = a.transpose();
    let x = &a + &ad;
    let pm = &ad - &a;
    let x2 = &x * &x;
    let p2 = -(&pm * &pm);
    // {X, P} / 2 = i (a^dag^2 - a^2); only the real antisymmetric factor is kept
    let cross = &ad * &ad - &a * &a;

    let mut states = Vec::new();
    for sig in Branch::BOTH {
        let eig = SymmetricEigen::new(bare_branch_hamiltonian(&p, sig, n_bare));
        let mut order: Vec<usize> = (0..n_bare).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        for &k in order.iter().take(levels) {
            states.push((eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned()));
        }
    }
    let e0 = states.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = states
        .iter()
        .map(|(e, _)| match temperature {
            Some(t) => (-(e - e0) / t).exp(),
            None => {
                if *e == e0 {
                    1.0
                } else {
                    0.0
                }
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut m = DenseMoments {
        x2: 0.0,
        p2: 0.0,
        cross: 0.0,
    };
    for (w, (_, v)) in weights.iter().zip(&states) {
        let w = w / z;
        m.x2 += w * v.dot(&(&x2 * v));
        m.p2 += w * v.dot(&(&p2 * v));
        m.cross += w * v.dot(&(&cross * v));
    }
    m
}

#[test]
fn ground_state_quadratures_match_dense_basis() {
    let dense = dense_moments(0.2, None, 200, 1);
    let (s, p) = stationary(0.2, 30, 0.0, 0.0);
    let (x2, p2) = quadrature_moments(&p, &s);
    assert!((x2 - dense.x2).abs() < 1e-10, "{x2} vs {}", dense.x2);
    assert!((p2 - dense.p2).abs() < 1e-10, "{p2} vs {}", dense.p2);
    assert!(dense.cross.abs() < 1e-12);
    let r = squeezing_factor(&p, &s, 64);
    assert!((r.xi_squared - 0.447214).abs() < 1e-6);
    assert!((r.var_x - 2.236068).abs() < 1e-6);
}

#[test]
fn thermal_quadratures_match_dense_basis() {
    let t = 0.5;
    let dense = dense_moments(0.2, Some(t), 300, 120);
    let (s, p) = stationary(0.2, 80, t, t);
    let (x2, p2) = quadrature_moments(&p, &s);
    assert!((x2 - dense.x2).abs() < 1e-9, "{x2} vs {}", dense.x2);
    assert!((p2 - dense.p2).abs() < 1e-9, "{p2} vs {}", dense.p2);
    assert!(dense.cross.abs() < 1e-12);
    assert!(x2 * p2 > 1.0);
}

#[test]
fn uncertainty_product_is_bounded() {
    for (lambda, t_r, t_q) in [(0.05, 0.3, 0.1), (0.2, 0.0, 0.8), (0.2, 1.5, 0.0), (0.1, 1.0, 1.0)] {
        let (s, p) = stationary(lambda, 80, t_r, t_q);
        let r = squeezing_factor(&p, &s, 64);
        assert!(r.var_x * r.var_p >= 1.0 - 1e-10);
        assert!(r.var_x * r.var_p > 1.0 + 1e-6, "only the pure ground state saturates");
    }
}

#[test]
fn current_scales_as_coupling_squared() {
    let needs = Needs {
        current: true,
        ..Needs::default()
    };
    let policy = TruncationPolicy::default();
    let scaled = |lambda: f64, dt: f64| {
        let (r, q) = baths(1.0 + 0.5 * dt, 1.0 - 0.5 * dt);
        let c = evaluate_certified(&params(lambda), &r, &q, needs, &policy).unwrap();
        c.values.current / (lambda * lambda)
    };
    let mut worst: f64 = 0.0;
    for i in 0..=14 {
        let dt = 0.1 + 0.1 * i as f64;
        let a = scaled(1e-3, dt);
        let b = scaled(5e-4, dt);
        worst = worst.max(((a - b) / b).abs());
    }
    assert!(worst <= 5e-3, "max relative deviation {worst:e}");
}

#[test]
fn cyclic_components_decay_with_photon_number() {
    let t_r = 1.25;
    let (r, q) = baths(t_r, 0.75);
    let w = weak_coupling_current(&params(1e-3), &r, &q, 10_000).unwrap();
    let pts: Vec<(f64, f64)> = w
        .components
        .iter()
        .filter(|c| (2..=12).contains(&c.0))
        .map(|c| (c.0 as f64, (c.1 + c.2).abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 1.0 / t_r).abs() < 1e-10, "slope {slope}");
}

/// With the dispersive shift and squeezing removed from the dressed data,
/// the master-equation current reduces to the cyclic-transition formula.
#[test]
fn shift_free_master_equation_matches_cyclic_formula() {
    let lambda = 1e-3;
    for dt in [0.25, 0.5, 1.0] {
        let (r, q) = baths(1.0 + 0.5 * dt, 1.0 - 0.5 * dt);
        let p = params(lambda);
        let mut branches = *Spectrum::new(&p, 40).branches();
        for sig in Branch::BOTH {
            let b = &mut branches[sig.index()];
            b.omega_sigma = 1.0;
            b.eta = 1.0;
            b.f = 1.0;
            b.g = 0.0;
            b.lambda_sigma = 0.0;
        }
        let s = Spectrum::from_branches(&p, branches, 40);
        let overlaps = qrheat::bath::branch_overlaps(&Spectrum::new(&p, 40)).unwrap();
        let rates = RateSet::build_with_overlaps(&s, &overlaps, &r, &q).unwrap();
        let (_, j) = stationary_current(&rates, &s).unwrap();
        let w = weak_coupling_current(&p, &r, &q, 10_000).unwrap();
        let rel = ((j - w.total) / w.total).abs();
        assert!(rel < 1e-3, "dT = {dt}: {j:e} vs {:e} ({rel:e})", w.total);
    }
}
