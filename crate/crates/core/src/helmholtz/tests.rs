use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grid::Grid;
use crate::resolvent::apply_free_resolvent;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn z(re: f64, im: f64) -> SpectralParameter {
    SpectralParameter::interior(c(re, im)).unwrap()
}

fn bump(grid: Grid, height: f64, width: f64) -> Potential {
    let centre = grid.length() / 2.0;
    let w = Field::scalar(grid, |x| {
        let r2: f64 = (0..3).map(|a| (x[a] - centre).powi(2)).sum();
        height * (-r2 / (2.0 * width * width)).exp()
    });
    Potential::scalar_times_identity(&w, 1).unwrap()
}

#[test]
fn zero_potential_gives_free_resolvent() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let f = Field::from_fn(g, 2, |x, k| c(x[0].sin(), k as f64));
    let v = Potential::zero(g, 2);
    let report = solve_lippmann_schwinger(&f, &z(0.0, 1.0), &v, SolveOptions::default()).unwrap();
    assert_eq!(report.iterations, 0);
    assert_eq!(report.method, SolveMethod::FreeResolvent);
    assert_eq!(report.solution, apply_free_resolvent(&f, &z(0.0, 1.0)).unwrap());
    assert_eq!(apply_bs_operator(&f, &z(0.0, 1.0), &v).unwrap().max_norm(), 0.0);
}

#[test]
fn constant_potential_mode_algebra() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    // k = 0 mode, zeta = i, c = 1: u = f / (1 + i)
    let f = Field::from_fn(g, 1, |_, _| c(2.0, -1.0));
    let v = Potential::constant_identity(g, 1, c(1.0, 0.0));
    let report = solve_lippmann_schwinger(&f, &z(0.0, 1.0), &v, SolveOptions::default()).unwrap();
    let expect = f.scale(c(1.0, 1.0).inv());
    assert!(report.solution.sub(&expect).unwrap().l2_norm() < 1e-9 * expect.l2_norm());

    // K on a plane wave
    let u = Field::from_fn(g, 2, |x, comp| if comp == 0 { c(0.0, x[1] * 2.0).exp() } else { c(0.0, 0.0) });
    let v = Potential::constant_identity(g, 2, c(0.5, 0.0));
    let zeta = c(0.3, 1.0);
    let ku = apply_bs_operator(&u, &z(0.3, 1.0), &v).unwrap();
    let expect = u.scale(-0.5 / (zeta - 4.0));
    assert!(ku.sub(&expect).unwrap().l2_norm() < 1e-12 * expect.l2_norm());
}

#[test]
fn neumann_and_gmres_paths() {
    let g = Grid::cube(8, 4.0).unwrap();
    let f = Field::from_fn(g, 1, |x, _| c((x[0] * 1.3).cos(), x[2].sin()));
    // small potential, far from the spectrum: Neumann regime
    let v = bump(g, 0.2, 0.8);
    let report = solve_lippmann_schwinger(&f, &z(-4.0, 1.0), &v, SolveOptions::default()).unwrap();
    assert_eq!(report.method, SolveMethod::Neumann);
    assert!(report.relative_residual <= 1e-10);
    // strong potential near the axis: GMRES
    let v = bump(g, 30.0, 0.8);
    let report = solve_lippmann_schwinger(&f, &z(3.0, 0.1), &v, SolveOptions::default()).unwrap();
    assert_eq!(report.method, SolveMethod::Gmres);
    assert!(report.relative_residual <= 1e-10);
    // the reported residual is recomputed from scratch
    let u = &report.solution;
    let rhs = apply_free_resolvent(&f, &z(3.0, 0.1)).unwrap();
    let lhs = u.sub(&apply_bs_operator(u, &z(3.0, 0.1), &v).unwrap()).unwrap();
    let rel = lhs.sub(&rhs).unwrap().l2_norm() / rhs.l2_norm();
    assert!((rel - report.relative_residual).abs() <= 1e-12);
}

#[test]
fn non_convergence_is_reported() {
    let g = Grid::cube(8, 4.0).unwrap();
    let f = Field::from_fn(g, 1, |x, _| c(x[0].cos(), 0.0));
    let v = bump(g, 30.0, 0.8);
    let opts = SolveOptions { tol: 1e-12, max_iter: 2 };
    match solve_lippmann_schwinger(&f, &z(3.0, 0.1), &v, opts) {
        Err(LapError::NonConvergence { report }) => {
            assert!(report.near_singular);
            assert_eq!(report.iterations, 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn decomposition_contract() {
    let g = Grid::cube(32, 8.0).unwrap();
    let v = bump(g, 10.0, 1.0);
    let two = LebesgueExponent::integer(2);
    let three_halves = LebesgueExponent::ratio(3, 2).unwrap();
    let eta = 0.1;
    let split = decompose_potential(&v, &three_halves, &two, eta).unwrap();
    let recomputed = split.v2.lebesgue_norm(&two);
    assert!((recomputed - split.v2_norm).abs() < 1e-14);
    assert!(recomputed <= eta && recomputed >= 0.9 * eta, "{recomputed}");
    let sum = split.v1.add(&split.v2).unwrap();
    assert_eq!(sum.values(), v.values());

    // already small: nothing moves
    let big = v.lebesgue_norm(&two) * 1.01;
    let split = decompose_potential(&v, &three_halves, &two, big).unwrap();
    assert!(split.v1.is_zero());
    assert_eq!(split.v2.values(), v.values());

    // monotone in eta
    let mut prev = f64::INFINITY;
    for eta in [1.0, 0.3, 0.1, 0.03, 0.01, 1e-4] {
        let s = decompose_potential(&v, &three_halves, &two, eta).unwrap();
        assert!(s.v2_norm <= prev);
        prev = s.v2_norm;
    }
    assert!(decompose_potential(&v, &two, &two, 0.0).is_err());
}

#[test]
fn injectivity_functional_examples() {
    let g = Grid::cube(8, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_band_limited(&g, 2, 3, &mut rng);
    let v = Potential::constant_identity(g, 2, c(0.0, 1.0));
    assert!((injectivity_functional(&u, &v).unwrap() - 1.0).abs() < 1e-12);
    let h = Potential::from_fn(g, 2, |x, m| {
        m[0] = c(x[0], 0.0);
        m[1] = c(1.0, x[1]);
        m[2] = c(1.0, -x[1]);
        m[3] = c(-2.0, 0.0);
    })
    .unwrap();
    assert!(h.is_hermitian());
    let value = injectivity_functional(&u, &h).unwrap();
    let scale = u.inner(&h.apply(&u).unwrap()).unwrap().norm();
    assert!(value.abs() <= 1e-12 * scale);
}

#[test]
fn sphere_trace_examples() {
    let l = 2.0 * PI;
    let g = Grid::cube(16, l).unwrap();
    let wave = Field::from_fn(g, 1, |x, _| c(0.0, 3.0 * x[0]).exp());
    let on = sphere_trace_l2(&wave, 9.0, 1.0).unwrap();
    let ghat = l.powi(3); // h^n N^n
    let expect = ghat * ghat * (2.0 * PI / l).powi(3) / 2.0;
    // only FFT roundoff leaks off the mode
    let off = sphere_trace_l2(&wave, 25.0, 1.0).unwrap();
    assert!(off.value < 1e-25 * expect);
    assert!((on.value - expect).abs() < 1e-9 * expect);
    let empty = sphere_trace_l2(&Field::zeros(g, 1), 9.0, 1.0).unwrap();
    assert_eq!(empty.value, 0.0);
    assert!(sphere_trace_l2(&wave, 9.0, 0.1).is_err());
}

#[test]
fn im_identity_single_off_shell_mode() {
    let l = 2.0 * PI;
    let g = Grid::cube(8, l).unwrap();
    let wave = Field::from_fn(g, 1, |x, _| c(0.0, 2.0 * x[1]).exp());
    let lambda = 2.5;
    let deltas = [0.5, 0.25, 0.125];
    let table = verify_im_resolvent_identity(&wave, lambda, &deltas, 1.0).unwrap();
    let ghat = l.powi(3);
    for row in &table.rows {
        // Parseval carries the (2 pi)^-n of the continuous transform
        let expect = row.delta * ghat * ghat * (2.0 * PI / l).powi(3) / (2.0 * PI).powi(3)
            / ((lambda - 4.0).powi(2) + row.delta * row.delta);
        assert!((row.lhs - expect).abs() < 1e-10 * expect);
    }
    let lhs: Vec<f64> = table.rows.iter().map(|r| r.lhs).collect();
    assert!(lhs[0] > lhs[1] && lhs[1] > lhs[2]);
}

#[test]
fn probe_identity_and_constant_potential() {
    let g = Grid::cube(8, 2.0 * PI).unwrap();
    let zp = z(2.5, 0.5);
    let v = Potential::zero(g, 1);
    let s = min_singular_value_probe(&zp, &v, ProbeOptions::default()).unwrap();
    assert!((s - 1.0).abs() < 1e-8);

    let cst = 0.7;
    let v = Potential::constant_identity(g, 1, c(cst, 0.0));
    let s = min_singular_value_probe(&zp, &v, ProbeOptions::default()).unwrap();
    let zeta = c(2.5, 0.5);
    let closed = (0..g.len())
        .map(|k| {
            let xi = g.wavevector(k);
            let n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            (1.0 + cst / (zeta - n2)).norm()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(s >= closed - 1e-6, "{s} < {closed}");
}

#[test]
fn adjoint_consistency() {
    let g = Grid::cube(8, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = Potential::from_fn(g, 2, |x, m| {
        m[0] = c(x[0].sin(), 0.3);
        m[1] = c(1.0, x[2]);
        m[2] = c(-0.5, 0.2);
        m[3] = c(x[1], -x[0]);
    })
    .unwrap();
    for _ in 0..5 {
        let zp = z(rng.random_range(-3.0..3.0), rng.random_range(0.1..2.0));
        let u = random_band_limited(&g, 2, 3, &mut rng);
        let w = random_band_limited(&g, 2, 3, &mut rng);
        let au = u.sub(&apply_bs_operator(&u, &zp, &v).unwrap()).unwrap();
        let lhs = au.inner(&w).unwrap();
        let rhs = u.inner(&apply_bs_adjoint(&w, &zp, &v).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }
}
