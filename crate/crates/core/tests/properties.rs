use harmonic_chain::chain::{
    commutation_matrix, mode_spectrum, propagator, propagator_rows, verify_symplectic, verify_symplectic_rows,
    ChainParams,
};
use harmonic_chain::gaussian::{evolve, initial_covariance, reduce_subsystem, PrepSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = (usize, f64, f64)> {
    (1usize..=32, 0.0f64..=5.0, 0.2f64..=3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_symplectic((n, eps, omega) in params(), t in -10.0f64..10.0) {
        let p = ChainParams::new(n, eps, omega).unwrap();
        let s = propagator(&p, &mode_spectrum(&p), t / omega);
        prop_assert!(verify_symplectic(s.matrix()).unwrap() < 1e-9);
    }

    #[test]
    fn group_and_inverse_laws((n, eps, omega) in params(), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let p = ChainParams::new(n, eps, omega).unwrap();
        let sp = mode_spectrum(&p);
        let a = propagator(&p, &sp, t1);
        let b = propagator(&p, &sp, t2);
        let ab = propagator(&p, &sp, t1 + t2);
        prop_assert!((a.matrix() * b.matrix() - ab.matrix()).amax() < 1e-9);
        let back = propagator(&p, &sp, -t1);
        let id = DMatrix::<f64>::identity(2 * n, 2 * n);
        prop_assert!((back.matrix() * a.matrix() - id).amax() < 1e-9);
    }

    #[test]
    fn rows_agree_with_full_propagator((n, eps, omega) in params(), t in -10.0f64..10.0, pick in 0usize..1000) {
        let p = ChainParams::new(n, eps, omega).unwrap();
        let sp = mode_spectrum(&p);
        let site = 1 + pick % n;
        let full = propagator(&p, &sp, t);
        let rows = propagator_rows(&p, &sp, t, &[site]).unwrap();
        let r = rows.rows();
        for j in 0..2 * n {
            prop_assert!((r[(0, j)] - full.matrix()[(site - 1, j)]).abs() < 1e-10);
            prop_assert!((r[(1, j)] - full.matrix()[(n + site - 1, j)]).abs() < 1e-10);
        }
        prop_assert!(verify_symplectic_rows(&rows) < 1e-9);
    }

    #[test]
    fn global_purity_is_conserved(
        (n, eps, omega) in params(),
        t in -10.0f64..10.0,
        eta in -2.0f64..2.0,
        mu in -2.0f64..2.0,
    ) {
        let p = ChainParams::new(n, eps, omega).unwrap();
        let prep = PrepSpec::new(eta, mu, vec![p.center_site()]).unwrap();
        let v0 = initial_covariance(&p, &prep).unwrap();
        let vt = evolve(&v0, &propagator(&p, &mode_spectrum(&p), t)).unwrap();
        prop_assert!((vt.purity().unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn reduced_states_are_physical(
        (n, eps, omega) in params(),
        t in 0.0f64..20.0,
        eta in -1.5f64..1.5,
    ) {
        let p = ChainParams::new(n, eps, omega).unwrap();
        let prep = PrepSpec::new(eta, 0.0, vec![1]).unwrap();
        let v0 = initial_covariance(&p, &prep).unwrap();
        let vt = evolve(&v0, &propagator(&p, &mode_spectrum(&p), t)).unwrap();
        let sites: Vec<usize> = (1..=n.min(3)).collect();
        let sub = reduce_subsystem(&vt, &sites).unwrap();
        prop_assert!(sub.purity > 0.0 && sub.purity <= 1.0 + 1e-9);
        prop_assert!(sub.entropy >= -1e-12);
        for d in &sub.symplectic_eigs {
            prop_assert!(*d >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn commutation_matrix_is_antisymmetric_square_root_of_minus_one(n in 1usize..20) {
        let g = commutation_matrix(n);
        prop_assert_eq!(&g.transpose(), &(-&g));
        prop_assert_eq!(&g * &g, -DMatrix::<f64>::identity(2 * n, 2 * n));
    }
}
