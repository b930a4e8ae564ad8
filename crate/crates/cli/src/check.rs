//! Invariant suites behind the `check` subcommand: symplectic structure,
//! global purity conservation, thermal identification and the entropy
//! formula.

use harmonic_chain::chain::{mode_spectrum, propagator, verify_symplectic, ChainParams};
use harmonic_chain::continuum::steady_state_covariance;
use harmonic_chain::diagnostics::{boltzmann_covariance, effective_beta};
use harmonic_chain::gaussian::{evolve, initial_covariance, single_mode_entropy, PrepSpec};
use harmonic_chain::max_abs;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::Row;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
}

/// `max` that treats NaN as the worst possible residual.
fn worst_of(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.worst < self.tolerance
    }

    pub fn to_row(&self) -> Row {
        let mut row = Row::new();
        row.push("suite", crate::output::Cell::Text(self.name.to_string()));
        row.push("cases", self.cases);
        row.push("worst", self.worst);
        row.push("tolerance", self.tolerance);
        row.push("passed", self.passed());
        row
    }
}

/// Max residual of `S Gamma S^T = Gamma`, the group law and the inverse law
/// over random chains with `N <= 64`, `eps in [0, 5]`, `omega t in [-10, 10]`.
pub fn symplectic_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..=64);
        let eps = rng.random_range(0.0..=5.0);
        let omega = rng.random_range(0.5..=2.0);
        let t1 = rng.random_range(-10.0..=10.0) / omega;
        let t2 = rng.random_range(-10.0..=10.0) / omega;
        let p = ChainParams::new(n, eps, omega).expect("valid random chain");
        let sp = mode_spectrum(&p);
        let s1 = propagator(&p, &sp, t1);
        let s2 = propagator(&p, &sp, t2);
        let s12 = propagator(&p, &sp, t1 + t2);
        let back = propagator(&p, &sp, -t1);
        let symplectic = verify_symplectic(s1.matrix()).unwrap_or(f64::INFINITY);
        let group = max_abs(&(s1.matrix() * s2.matrix() - s12.matrix()));
        let inverse = max_abs(&(back.matrix() * s1.matrix() - DMatrix::identity(2 * n, 2 * n)));
        worst = worst_of(worst_of(worst, symplectic), worst_of(group, inverse));
    }
    SuiteResult {
        name: "symplectic",
        worst,
        tolerance: 1e-9,
        cases,
    }
}

/// Deviation of the global purity from one along stepped evolutions of a
/// 64-site chain, composing the one-step propagator `steps` times.
pub fn purity_suite(seed: u64, runs: usize, steps: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = 64;
    let mut worst = 0.0f64;
    for _ in 0..runs {
        let eps = rng.random_range(0.0..=2.0);
        let eta = rng.random_range(-2.0..=2.0);
        let mu = rng.random_range(-2.0..=2.0);
        let dt = rng.random_range(0.05..=0.5);
        let p = ChainParams::new(n, eps, 1.0).expect("valid chain");
        let step = propagator(&p, &mode_spectrum(&p), dt);
        let prep = PrepSpec::new(eta, mu, vec![p.center_site()]).expect("valid preparation");
        let mut v = initial_covariance(&p, &prep).expect("valid preparation");
        for _ in 0..steps {
            v = match evolve(&v, &step) {
                Ok(next) => next,
                Err(_) => {
                    worst = f64::INFINITY;
                    break;
                }
            };
            let nu = v.purity().unwrap_or(f64::NAN);
            worst = worst_of(worst, (nu - 1.0).abs());
        }
    }
    SuiteResult {
        name: "global_purity",
        worst,
        tolerance: 1e-7,
        cases: runs * steps,
    }
}

/// Relaxed single-mode state against the thermal form at the matching
/// inverse temperature.
pub fn thermal_suite() -> SuiteResult {
    let etas = [0.1, 0.5, 1.0, 2.0];
    let mut worst = 0.0f64;
    for &eta in &etas {
        let thermal = effective_beta(eta).and_then(|b| boltzmann_covariance(b).ok());
        for gamma in [0.0, 0.01, 0.05] {
            let relaxed = steady_state_covariance(1, eta, gamma).ok();
            let diff = match (&thermal, &relaxed) {
                (Some(a), Some(b)) => max_abs(&(a.matrix() - b.matrix())),
                _ => f64::INFINITY,
            };
            worst = worst_of(worst, diff);
        }
    }
    SuiteResult {
        name: "thermal_identification",
        worst,
        tolerance: 1e-14,
        cases: 3 * etas.len(),
    }
}

/// `cosh eta = coth(beta/2)` round trip.
pub fn beta_round_trip_suite() -> SuiteResult {
    let etas = [0.1, 0.5, 1.0, 2.0];
    let worst = etas
        .iter()
        .map(|&eta| match effective_beta(eta) {
            Some(beta) => (eta.cosh() - 1.0 / (0.5 * beta).tanh()).abs(),
            None => f64::INFINITY,
        })
        .fold(0.0, worst_of);
    SuiteResult {
        name: "beta_round_trip",
        worst,
        tolerance: 1e-12,
        cases: etas.len(),
    }
}

/// `S(nu = 1/3) = 2 ln 2`, checked against the occupation-number form
/// `(n+1) ln(n+1) - n ln n` as well.
pub fn entropy_suite() -> SuiteResult {
    let mut worst = 0.0f64;
    let s = single_mode_entropy(1.0 / 3.0).unwrap_or(f64::NAN);
    worst = worst_of(worst, (s - 2.0 * 2f64.ln()).abs());
    for nu in [1.0 / 3.0, 0.1, 0.5, 0.9, 0.999] {
        let nbar: f64 = 0.5 * (1.0 / nu - 1.0);
        let oracle = (nbar + 1.0) * nbar.ln_1p() - nbar * nbar.ln();
        let s = single_mode_entropy(nu).unwrap_or(f64::NAN);
        worst = worst_of(worst, (s - oracle).abs());
    }
    SuiteResult {
        name: "entropy_formula",
        worst,
        tolerance: 1e-12,
        cases: 6,
    }
}

pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![
        symplectic_suite(seed, 200),
        purity_suite(seed, 3, 100),
        thermal_suite(),
        beta_round_trip_suite(),
        entropy_suite(),
    ]
}
