use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lap_core::exponents::{check_gutierrez, scaling_exponent, LebesgueExponent};
use lap_core::grid::{leray_project, random_band_limited};
use lap_core::helmholtz::{solve_lippmann_schwinger, Potential, SolveOptions};
use lap_core::resolvent::{apply_free_resolvent, SpectralParameter};
use lap_core::{Field, Grid};

fn field(grid: Grid, components: usize, seed: u64) -> Field {
    random_band_limited(&grid, components, grid.points() / 2, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

/// Spectral parameters a fixed angle away from the positive axis.
fn zeta() -> impl Strategy<Value = Complex64> {
    (0.3f64..20.0, 0.15f64..(2.0 * std::f64::consts::PI - 0.15)).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn interior(z: Complex64) -> SpectralParameter {
    SpectralParameter::interior(z).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resolvent_identity(z in zeta(), w in zeta(), seed in any::<u64>()) {
        prop_assume!((z - w).norm() > 1e-3);
        let f = field(Grid::cube(8, 5.0).unwrap(), 1, seed);
        let (rz, rw) = (interior(z), interior(w));
        let lhs = apply_free_resolvent(&f, &rz).unwrap().sub(&apply_free_resolvent(&f, &rw).unwrap()).unwrap();
        let rhs = apply_free_resolvent(&apply_free_resolvent(&f, &rw).unwrap(), &rz).unwrap().scale(w - z);
        prop_assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn resolvent_is_symmetric_for_the_bilinear_pairing(z in zeta(), seed in any::<u64>()) {
        let g = Grid::cube(8, 4.0).unwrap();
        let (f, h) = (field(g, 2, seed), field(g, 2, seed ^ 1));
        let r = interior(z);
        let a = apply_free_resolvent(&f, &r).unwrap().pairing(&h).unwrap();
        let b = f.pairing(&apply_free_resolvent(&h, &r).unwrap()).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(b.norm()));
    }

    #[test]
    fn dilation_covariance(z in zeta(), s in 0.25f64..4.0, seed in any::<u64>()) {
        // same samples on a box scaled by s: R0(zeta / s^2) = s^2 R0(zeta)
        let g = Grid::cube(8, 3.0).unwrap();
        let f = field(g, 1, seed);
        let scaled = Field::from_values(g.scaled(s).unwrap(), 1, f.values().to_vec()).unwrap();
        let u = apply_free_resolvent(&f, &interior(z)).unwrap();
        let us = apply_free_resolvent(&scaled, &interior(z / (s * s))).unwrap();
        let diff = us.values().iter().zip(u.values()).map(|(a, b)| (a - b * s * s).norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12 * s * s * u.max_norm());
    }

    #[test]
    fn leray_is_a_linear_projection(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = Grid::new(2, 16, 2.5).unwrap();
        let (f, h) = (field(g, 2, seed), field(g, 2, seed.wrapping_add(1)));
        let (pf, ph) = (leray_project(&f).unwrap(), leray_project(&h).unwrap());
        prop_assert!(rel(&leray_project(&pf).unwrap(), &pf) < 1e-13);
        let combo = f.scale(a.into()).add(&h.scale(b.into())).unwrap();
        let expect = pf.scale(a.into()).add(&ph.scale(b.into())).unwrap();
        prop_assert!(leray_project(&combo).unwrap().sub(&expect).unwrap().l2_norm() <= 1e-12 * combo.l2_norm());
        // orthogonal: ||f||^2 = ||Pf||^2 + ||f - Pf||^2
        let rest = f.sub(&pf).unwrap().l2_norm();
        prop_assert!((f.l2_norm().powi(2) - pf.l2_norm().powi(2) - rest * rest).abs() <= 1e-12 * f.l2_norm().powi(2));
    }

    #[test]
    fn exponent_text_round_trip(num in 1i64..500, den in 1i64..500) {
        prop_assume!(num >= den);
        let e = LebesgueExponent::ratio(num, den).unwrap();
        prop_assert_eq!(LebesgueExponent::parse(&e.to_string()).unwrap(), e.clone());
        prop_assert!(e.reciprocal() * BigRational::new(num.into(), den.into()) == BigRational::one());
    }

    #[test]
    fn gutierrez_scaling_exponent_is_in_band(n in 3u32..9, a in 0i64..120, b in 0i64..120) {
        // admissible pairs scale between |zeta|^-1/(n+1) and |zeta|^0
        let p = LebesgueExponent::from_reciprocal(BigRational::new((120 - a).into(), 120.into())).unwrap();
        let q = LebesgueExponent::from_reciprocal(BigRational::new(b.into(), 120.into())).unwrap();
        if check_gutierrez(&p, &q, n).unwrap().admissible() {
            let s = scaling_exponent(&p, &q, n).unwrap();
            let lo = BigRational::new((-1).into(), (n as i64 + 1).into());
            prop_assert!(s >= lo && s <= BigRational::zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lippmann_schwinger_solution_is_linear(seed in any::<u64>(), z in zeta(), amp in 0.1f64..2.0) {
        let g = Grid::cube(8, 4.0).unwrap();
        let v = Potential::from_fn(g, 1, |x, out| {
            out[0] = Complex64::new(amp * (x[0] * 1.5).cos() * (x[1] * 0.7).sin(), 0.2 * amp);
        }).unwrap();
        let (f, h) = (field(g, 1, seed), field(g, 1, seed ^ 7));
        let c = Complex64::new(0.3, -1.1);
        let opts = SolveOptions { tol: 1e-12, max_iter: 2000 };
        let r = interior(z);
        let uf = solve_lippmann_schwinger(&f, &r, &v, opts).unwrap().solution;
        let uh = solve_lippmann_schwinger(&h, &r, &v, opts).unwrap().solution;
        let combo = solve_lippmann_schwinger(&f.add(&h.scale(c)).unwrap(), &r, &v, opts).unwrap().solution;
        prop_assert!(rel(&combo, &uf.add(&uh.scale(c)).unwrap()) < 1e-9);
    }
}
