use harmonic_chain::chain::{mode_spectrum, propagator_rows, ChainParams};
use harmonic_chain::continuum::{continuum_covariance, ContinuumParams};
use harmonic_chain::gaussian::{evolve_rows, PrepSpec};
use harmonic_chain::Quadrature;

// Far from the ends the finite chain's mode sums are exact quadratures of the
// continuum integrals, so agreement is at roundoff until signals reach a wall.
#[test]
fn continuum_covariance_matches_finite_chain() {
    let (gamma, eta, mu) = (0.05, 0.8, -0.5);
    let n = 401;
    let params = ChainParams::from_gamma(n, gamma, 1.0).unwrap();
    let spectrum = mode_spectrum(&params);
    let c = params.center_site();
    let system = vec![c, c + 1];
    let diag = PrepSpec::new(eta, mu, system.clone()).unwrap().initial_diagonal(&params).unwrap();
    let cp = ContinuumParams::new(eta, mu, gamma, 1.0, system).unwrap();
    let ev = cp.quadrature_evaluator(Quadrature::new(1e-12).unwrap());
    let sites = [c - 1, c, c + 1, c + 3];
    for t in [0.0, 7.5, 30.0, 60.0] {
        let rows = propagator_rows(&params, &spectrum, t, &sites).unwrap();
        let exact = evolve_rows(&rows, &diag).unwrap();
        let cont = continuum_covariance(&sites, t, &cp, &ev).unwrap();
        let err = (exact.matrix() - cont).amax();
        assert!(err < 1e-10, "t={t}: {err:e}");
    }
}

#[test]
fn boundary_reflections_break_agreement_on_short_chains() {
    let (gamma, eta, mu) = (0.4, 1.0, 0.0);
    let n = 9;
    let params = ChainParams::from_gamma(n, gamma, 1.0).unwrap();
    let c = params.center_site();
    let diag = PrepSpec::new(eta, mu, vec![c]).unwrap().initial_diagonal(&params).unwrap();
    let cp = ContinuumParams::new(eta, mu, gamma, 1.0, vec![c]).unwrap();
    let ev = cp.quadrature_evaluator(Quadrature::default());
    let t = 40.0;
    let rows = propagator_rows(&params, &mode_spectrum(&params), t, &[c]).unwrap();
    let exact = evolve_rows(&rows, &diag).unwrap();
    let cont = continuum_covariance(&[c], t, &cp, &ev).unwrap();
    assert!((exact.matrix() - cont).amax() > 1e-3);
}
