//! Infinite-chain (`N -> inf`) covariance elements.
//!
//! In the long-chain limit every matrix function of the coupling matrix
//! becomes an integral over the mode angle:
//! `f(A)_{s,l} -> (2/pi) int_0^pi sin(s phi) sin(l phi) f(lambda(phi)) dphi`.
//! The integrals are expressed through the families
//!
//! ```text
//! C^(a,k)_{s,l}(t) = (1/pi) int sin(s phi) sin(l phi) lambda^k cos^a(w t lambda^1/2) dphi
//! S^(a,k)_{s,l}(t) = (1/pi) int sin(s phi) sin(l phi) lambda^k sin^a(w t lambda^1/2) dphi
//! ```
//!
//! with `lambda(phi) = 1 + 2 eps (1 - cos phi)`. Covariance elements are
//! assembled from these by [`covariance_terms`], which derives every
//! coefficient from `V(t) = S(t) [v + sum_i v_i] S(t)^T` rather than hard-coding
//! a table. Evaluation of the families is pluggable ([`CsEvaluator`]): direct
//! quadrature, or the weak-coupling Bessel closed forms.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::epsilon_from_gamma;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::quadrature::Quadrature;

/// Above this coupling the O(gamma) closed forms are no longer trusted.
pub const WEAK_COUPLING_LIMIT: f64 = 0.1;

const ALLOWED_KAPPAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Trig {
    Cos,
    Sin,
}

/// One member of the `C`/`S` integral families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralSpec {
    pub trig: Trig,
    pub power: u8,
    pub kappa: f64,
    pub s: usize,
    pub l: usize,
    pub t: f64,
}

impl IntegralSpec {
    pub fn new(trig: Trig, power: u8, kappa: f64, s: usize, l: usize, t: f64) -> Result<Self> {
        if !(power == 1 || power == 2) {
            return Err(Error::invalid("power", format!("must be 1 or 2, got {power}")));
        }
        if !ALLOWED_KAPPAS.contains(&kappa) {
            return Err(Error::invalid("kappa", format!("must be one of -1, -1/2, 0, 1/2, 1, got {kappa}")));
        }
        if s == 0 || l == 0 {
            return Err(Error::invalid("site", "site indices are 1-based"));
        }
        if !t.is_finite() {
            return Err(Error::invalid("t", "must be finite"));
        }
        Ok(Self { trig, power, kappa, s, l, t })
    }

    /// `C^(a,kappa)_{s,l}(t)`.
    pub fn c(power: u8, kappa: f64, s: usize, l: usize, t: f64) -> Result<Self> {
        Self::new(Trig::Cos, power, kappa, s, l, t)
    }

    /// `S^(a,kappa)_{s,l}(t)`.
    pub fn s(power: u8, kappa: f64, s: usize, l: usize, t: f64) -> Result<Self> {
        Self::new(Trig::Sin, power, kappa, s, l, t)
    }
}

/// `lambda(phi) = 1 + 2 eps (1 - cos phi)`.
pub fn lambda_continuum(phi: f64, epsilon: f64) -> f64 {
    1.0 + 2.0 * epsilon * (1.0 - phi.cos())
}

fn trig_power(trig: Trig, power: u8, x: f64) -> f64 {
    let v = match trig {
        Trig::Cos => x.cos(),
        Trig::Sin => x.sin(),
    };
    if power == 2 {
        v * v
    } else {
        v
    }
}

/// Direct quadrature of one family member.
pub fn csfun(spec: &IntegralSpec, epsilon: f64, omega: f64, quad: &Quadrature) -> Result<f64> {
    let wt = omega * spec.t;
    let (s, l) = (spec.s as f64, spec.l as f64);
    let phase_span = spec.power as f64 * wt.abs() * ((1.0 + 4.0 * epsilon).sqrt() - 1.0);
    let periods = 0.5 * (s + l) + phase_span / (2.0 * PI);
    let integrand = |phi: f64| {
        let lambda = lambda_continuum(phi, epsilon);
        (s * phi).sin() * (l * phi).sin() * lambda.powf(spec.kappa) * trig_power(spec.trig, spec.power, wt * lambda.sqrt())
    };
    Ok(quad.integrate(0.0, PI, periods, integrand)?.value / PI)
}

/// `(1/pi) int_0^pi cos(s phi) cos[x (1 - gamma cos phi)] dphi = J_s(gamma x) cos(x - s pi/2)`.
pub fn bessel_reduction(order: i32, gamma: f64, x: f64) -> f64 {
    libm::jn(order, gamma * x) * (x - order as f64 * FRAC_PI_2).cos()
}

/// Sine partner of [`bessel_reduction`]:
/// `(1/pi) int_0^pi cos(s phi) sin[x (1 - gamma cos phi)] dphi = J_s(gamma x) sin(x - s pi/2)`.
pub fn bessel_reduction_sin(order: i32, gamma: f64, x: f64) -> f64 {
    libm::jn(order, gamma * x) * (x - order as f64 * FRAC_PI_2).sin()
}

/// O(gamma) closed form of one family member.
///
/// Uses `sin(s phi) sin(l phi) = [cos((s-l) phi) - cos((s+l) phi)]/2`,
/// `lambda^k ~ (1+2eps)^k (1 - 2 k gamma cos phi)` and
/// `w t lambda^1/2 ~ Omega t (1 - gamma cos phi)`, after which every piece is
/// a [`bessel_reduction`].
pub fn csfun_weak_coupling(spec: &IntegralSpec, epsilon: f64, omega: f64) -> f64 {
    let gamma = epsilon / (1.0 + 2.0 * epsilon);
    let x = omega * (1.0 + 2.0 * epsilon).sqrt() * spec.t;
    let prefactor = (1.0 + 2.0 * epsilon).powf(spec.kappa);

    // (1/pi) int cos(m phi) g(theta) dphi for the trig power at hand
    let basis = |m: i64| -> f64 {
        let m = m.unsigned_abs() as i32;
        let delta = if m == 0 { 1.0 } else { 0.0 };
        match (spec.trig, spec.power) {
            (Trig::Cos, 1) => bessel_reduction(m, gamma, x),
            (Trig::Sin, 1) => bessel_reduction_sin(m, gamma, x),
            // cos^2 = (1 + cos 2theta)/2, sin^2 = (1 - cos 2theta)/2
            (Trig::Cos, _) => 0.5 * (delta + bessel_reduction(m, gamma, 2.0 * x)),
            (Trig::Sin, _) => 0.5 * (delta - bessel_reduction(m, gamma, 2.0 * x)),
        }
    };
    let with_lambda = |m: i64| basis(m) - spec.kappa * gamma * (basis(m + 1) + basis(m - 1));
    let (s, l) = (spec.s as i64, spec.l as i64);
    prefactor * 0.5 * (with_lambda(s - l) - with_lambda(s + l))
}

fn kronecker(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn neighbours(s: usize, l: usize) -> f64 {
    if s.abs_diff(l) == 1 {
        1.0
    } else {
        0.0
    }
}

/// Limits for `gamma Omega t -> inf`:
/// `C^(2,0) -> delta/4`, `C^(1,0), S^(1,+-1/2) -> 0`,
/// `S^(2,+-1) -> (delta -+ gamma [delta_{s,l+1} + delta_{s,l-1}])/4`.
pub fn asymptotic_csfun(spec: &IntegralSpec, gamma: f64) -> Result<f64> {
    let (s, l) = (spec.s, spec.l);
    let k = spec.kappa;
    match (spec.trig, spec.power) {
        (Trig::Cos, 2) if k == 0.0 => Ok(0.25 * kronecker(s, l)),
        (Trig::Cos, 1) if k == 0.0 => Ok(0.0),
        (Trig::Sin, 1) if k.abs() == 0.5 => Ok(0.0),
        (Trig::Sin, 2) if k.abs() == 1.0 => Ok(0.25 * (kronecker(s, l) - k * gamma * neighbours(s, l))),
        _ => Err(Error::Unsupported(format!(
            "no asymptotic limit for {:?}^({}, {})",
            spec.trig, spec.power, spec.kappa
        ))),
    }
}

/// Exact long-time mean of a family member at fixed coupling: single powers
/// average to zero, squares to half the static integral
/// `(1/pi) int sin sin lambda^k`.
pub fn long_time_limit(spec: &IntegralSpec, epsilon: f64, quad: &Quadrature) -> Result<f64> {
    if spec.power == 1 {
        return Ok(0.0);
    }
    let (s, l) = (spec.s as f64, spec.l as f64);
    let est = quad.integrate(0.0, PI, 0.5 * (s + l), |phi| {
        (s * phi).sin() * (l * phi).sin() * lambda_continuum(phi, epsilon).powf(spec.kappa)
    })?;
    Ok(0.5 * est.value / PI)
}

/// Something that can evaluate `C`/`S` family members.
pub trait CsEvaluator {
    fn csfun(&self, spec: &IntegralSpec) -> Result<f64>;
}

/// Family members by direct quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureEvaluator {
    pub epsilon: f64,
    pub omega: f64,
    pub quadrature: Quadrature,
}

impl CsEvaluator for QuadratureEvaluator {
    fn csfun(&self, spec: &IntegralSpec) -> Result<f64> {
        csfun(spec, self.epsilon, self.omega, &self.quadrature)
    }
}

/// Family members from the O(gamma) Bessel closed forms.
#[derive(Debug, Clone, Copy)]
pub struct WeakCouplingEvaluator {
    pub epsilon: f64,
    pub omega: f64,
}

impl CsEvaluator for WeakCouplingEvaluator {
    fn csfun(&self, spec: &IntegralSpec) -> Result<f64> {
        Ok(csfun_weak_coupling(spec, self.epsilon, self.omega))
    }
}

/// Long-time means of family members at fixed coupling (see
/// [`long_time_limit`]); evaluating a covariance with it gives the exact
/// relaxed state of the infinite chain, including O(gamma) shifts.
#[derive(Debug, Clone, Copy)]
pub struct LongTimeEvaluator {
    pub epsilon: f64,
    pub quadrature: Quadrature,
}

impl CsEvaluator for LongTimeEvaluator {
    fn csfun(&self, spec: &IntegralSpec) -> Result<f64> {
        long_time_limit(spec, self.epsilon, &self.quadrature)
    }
}

/// Preparation and coupling for the infinite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumParams {
    pub eta: f64,
    pub mu: f64,
    gamma: f64,
    big_omega: f64,
    system_sites: Vec<usize>,
}

impl ContinuumParams {
    pub fn new(eta: f64, mu: f64, gamma: f64, big_omega: f64, system_sites: Vec<usize>) -> Result<Self> {
        if !(eta.is_finite() && mu.is_finite()) {
            return Err(Error::invalid("eta/mu", "squeezing parameters must be finite"));
        }
        if !(gamma.is_finite() && (0.0..0.5).contains(&gamma)) {
            return Err(Error::invalid("gamma", format!("must lie in [0, 1/2), got {gamma}")));
        }
        if !(big_omega.is_finite() && big_omega > 0.0) {
            return Err(Error::invalid("Omega", "must be positive"));
        }
        if system_sites.contains(&0) || system_sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("system_sites", "must be 1-based and strictly increasing"));
        }
        Ok(Self {
            eta,
            mu,
            gamma,
            big_omega,
            system_sites,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn big_omega(&self) -> f64 {
        self.big_omega
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_from_gamma(self.gamma)
    }

    /// Bare frequency `omega = Omega / sqrt(1 + 2 eps)`.
    pub fn omega(&self) -> f64 {
        self.big_omega / (1.0 + 2.0 * self.epsilon()).sqrt()
    }

    pub fn system_sites(&self) -> &[usize] {
        &self.system_sites
    }

    pub fn quadrature_evaluator(&self, quadrature: Quadrature) -> QuadratureEvaluator {
        QuadratureEvaluator {
            epsilon: self.epsilon(),
            omega: self.omega(),
            quadrature,
        }
    }

    pub fn long_time_evaluator(&self, quadrature: Quadrature) -> LongTimeEvaluator {
        LongTimeEvaluator {
            epsilon: self.epsilon(),
            quadrature,
        }
    }

    pub fn weak_coupling_evaluator(&self) -> WeakCouplingEvaluator {
        WeakCouplingEvaluator {
            epsilon: self.epsilon(),
            omega: self.omega(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Block {
    QQ,
    PP,
    QP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Canonical {
    Q,
    P,
}

impl Block {
    fn rows(self) -> (Canonical, Canonical) {
        match self {
            Block::QQ => (Canonical::Q, Canonical::Q),
            Block::PP => (Canonical::P, Canonical::P),
            Block::QP => (Canonical::Q, Canonical::P),
        }
    }
}

/// A propagator block `sign * lambda^kappa * trig(w t lambda^1/2)` as a
/// function of one mode eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Kernel {
    sign: f64,
    trig: Trig,
    kappa: f64,
}

fn kernel(row: Canonical, col: Canonical) -> Kernel {
    match (row, col) {
        (Canonical::Q, Canonical::Q) | (Canonical::P, Canonical::P) => Kernel {
            sign: 1.0,
            trig: Trig::Cos,
            kappa: 0.0,
        },
        (Canonical::Q, Canonical::P) => Kernel {
            sign: 1.0,
            trig: Trig::Sin,
            kappa: -0.5,
        },
        (Canonical::P, Canonical::Q) => Kernel {
            sign: -1.0,
            trig: Trig::Sin,
            kappa: 0.5,
        },
    }
}

/// Family member with a time multiplier (`1` or `2`); site indices are
/// filled in at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Family {
    pub trig: Trig,
    pub power: u8,
    pub kappa: f64,
    pub time_factor: f64,
}

impl Family {
    fn at(&self, s: usize, l: usize, t: f64) -> Result<IntegralSpec> {
        IntegralSpec::new(self.trig, self.power, self.kappa, s, l, self.time_factor * t)
    }
}

/// One term of a continuum covariance element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Term {
    /// `coefficient * F_{s,l}(t)` from the uniform bath.
    Bath { coefficient: f64, family: Family },
    /// `coefficient * sum_i F_{s,r_i}(t) G_{l,r_i}(t)` from the system-site corrections.
    System { coefficient: f64, left: Family, right: Family },
}

/// Derives the terms of `V_block(t)_{s,l}` from the propagator structure.
///
/// For the bath, a product of two kernels of the same matrix is a single
/// function of `lambda`: `cos cos -> cos^2`, `sin sin -> sin^2`,
/// `cos sin -> sin(2x)/2`. Each matrix element of a kernel is twice a family
/// member, which supplies the factors of 2 and 4.
pub fn covariance_terms(block: Block, eta: f64, mu: f64) -> Vec<Term> {
    let (row, row2) = block.rows();
    let mut terms = Vec::new();
    for col in [Canonical::Q, Canonical::P] {
        let (bath, delta) = match col {
            Canonical::Q => (0.5 * (-eta).exp(), 0.5 * ((-mu).exp() - (-eta).exp())),
            Canonical::P => (0.5 * eta.exp(), 0.5 * (mu.exp() - eta.exp())),
        };
        let (k1, k2) = (kernel(row, col), kernel(row2, col));
        let sign = k1.sign * k2.sign;
        let kappa = k1.kappa + k2.kappa;
        let (family, factor) = match (k1.trig, k2.trig) {
            (Trig::Cos, Trig::Cos) => (
                Family { trig: Trig::Cos, power: 2, kappa, time_factor: 1.0 },
                2.0,
            ),
            (Trig::Sin, Trig::Sin) => (
                Family { trig: Trig::Sin, power: 2, kappa, time_factor: 1.0 },
                2.0,
            ),
            _ => (
                Family { trig: Trig::Sin, power: 1, kappa, time_factor: 2.0 },
                1.0,
            ),
        };
        terms.push(Term::Bath {
            coefficient: bath * sign * factor,
            family,
        });
        let single = |k: Kernel| Family {
            trig: k.trig,
            power: 1,
            kappa: k.kappa,
            time_factor: 1.0,
        };
        terms.push(Term::System {
            coefficient: 4.0 * delta * sign,
            left: single(k1),
            right: single(k2),
        });
    }
    terms
}

/// `V_block(t)_{s,l}` on the infinite chain.
pub fn covariance_element_continuum<E: CsEvaluator>(
    block: Block,
    s: usize,
    l: usize,
    t: f64,
    params: &ContinuumParams,
    evaluator: &E,
) -> Result<f64> {
    let mut total = 0.0;
    for term in covariance_terms(block, params.eta, params.mu) {
        match term {
            Term::Bath { coefficient, family } => {
                total += coefficient * evaluator.csfun(&family.at(s, l, t)?)?;
            }
            Term::System { coefficient, left, right } => {
                if coefficient == 0.0 {
                    continue;
                }
                for &r in params.system_sites() {
                    let a = evaluator.csfun(&left.at(s, r, t)?)?;
                    let b = evaluator.csfun(&right.at(l, r, t)?)?;
                    total += coefficient * a * b;
                }
            }
        }
    }
    Ok(total)
}

/// Reduced `2n x 2n` continuum covariance on `sites` in `(Q.., P..)` order.
/// Not checked for physicality.
pub fn continuum_covariance<E: CsEvaluator>(
    sites: &[usize],
    t: f64,
    params: &ContinuumParams,
    evaluator: &E,
) -> Result<DMatrix<f64>> {
    let n = sites.len();
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    for (i, &s) in sites.iter().enumerate() {
        for (j, &l) in sites.iter().enumerate() {
            if j >= i {
                let qq = covariance_element_continuum(Block::QQ, s, l, t, params, evaluator)?;
                let pp = covariance_element_continuum(Block::PP, s, l, t, params, evaluator)?;
                v[(i, j)] = qq;
                v[(j, i)] = qq;
                v[(n + i, n + j)] = pp;
                v[(n + j, n + i)] = pp;
            }
            let qp = covariance_element_continuum(Block::QP, s, l, t, params, evaluator)?;
            v[(i, n + j)] = qp;
            v[(n + j, i)] = qp;
        }
    }
    Ok(v)
}

/// Relaxed `n`-mode covariance to O(gamma):
/// `[V_Q]_{sl} = (cosh eta delta_{sl} + e^{-eta} gamma/2 [adjacent])/2`,
/// `[V_P]_{sl} = (cosh eta delta_{sl} - e^{eta} gamma/2 [adjacent])/2`,
/// no Q-P correlations.
pub fn steady_state_covariance(modes: usize, eta: f64, gamma: f64) -> Result<CovarianceMatrix> {
    if modes == 0 {
        return Err(Error::invalid("modes", "need at least one mode"));
    }
    let n = modes;
    let c = eta.cosh();
    let q_nn = 0.5 * (-eta).exp() * gamma;
    let p_nn = -0.5 * eta.exp() * gamma;
    let v = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let same_block = (i < n) == (j < n);
        if !same_block {
            return 0.0;
        }
        let (a, b) = (i % n, j % n);
        let nn = if i < n { q_nn } else { p_nn };
        0.5 * (c * kronecker(a, b) + nn * neighbours(a, b))
    });
    CovarianceMatrix::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quad() -> Quadrature {
        Quadrature::default()
    }

    #[test]
    fn lambda_endpoints() {
        assert_eq!(lambda_continuum(0.0, 0.3), 1.0);
        assert_abs_diff_eq!(lambda_continuum(PI, 0.3), 2.2, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_continuum(FRAC_PI_2, 0.1), 1.2, epsilon = 1e-15);
    }

    #[test]
    fn families_at_time_zero() {
        for s in 1..5 {
            for l in 1..5 {
                let c = csfun(&IntegralSpec::c(2, 0.0, s, l, 0.0).unwrap(), 0.2, 1.0, &quad()).unwrap();
                assert_abs_diff_eq!(c, 0.5 * kronecker(s, l), epsilon = 1e-12);
                for a in [1, 2] {
                    let v = csfun(&IntegralSpec::s(a, 0.5, s, l, 0.0).unwrap(), 0.2, 1.0, &quad()).unwrap();
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(IntegralSpec::c(3, 0.0, 1, 1, 0.0).is_err());
        assert!(IntegralSpec::c(1, 0.25, 1, 1, 0.0).is_err());
        assert!(IntegralSpec::c(1, 0.0, 0, 1, 0.0).is_err());
    }

    #[test]
    fn bessel_reduction_special_values() {
        for &x in &[0.3, 2.0, 17.0] {
            assert_abs_diff_eq!(bessel_reduction(0, 0.0, x), x.cos(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(bessel_reduction(1, 0.3, 0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bessel_reduction_matches_quadrature() {
        // mpmath quadrature of the left-hand side: 0.0411565441893436
        let (s, gamma, x) = (2, 0.01, 500.0);
        let lhs = quad()
            .integrate(0.0, PI, x * gamma, |phi| (s as f64 * phi).cos() * (x * (1.0 - gamma * phi.cos())).cos())
            .unwrap()
            .value
            / PI;
        assert_abs_diff_eq!(lhs, 0.0411565441893436, epsilon = 1e-12);
        let rhs = bessel_reduction(s, gamma, x);
        assert!((rhs - lhs).abs() <= 1e-2 * lhs.abs());
    }

    #[test]
    fn weak_coupling_exact_at_time_zero() {
        for s in 1..6 {
            for l in 1..6 {
                for trig in [Trig::Cos, Trig::Sin] {
                    for a in [1, 2] {
                        let spec = IntegralSpec::new(trig, a, 0.0, s, l, 0.0).unwrap();
                        let exact = csfun(&spec, 0.02, 1.0, &quad()).unwrap();
                        assert_abs_diff_eq!(csfun_weak_coupling(&spec, 0.02, 1.0), exact, epsilon = 1e-12);
                    }
                }
                // kappa != 0 static integrals carry an O(gamma^2) truncation
                let spec = IntegralSpec::c(1, 1.0, s, l, 0.0).unwrap();
                let exact = csfun(&spec, 0.02, 1.0, &quad()).unwrap();
                assert!((csfun_weak_coupling(&spec, 0.02, 1.0) - exact).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn weak_coupling_matches_quadrature() {
        let gamma = 0.01;
        let eps = epsilon_from_gamma(gamma);
        let omega = 1.0 / (1.0 + 2.0 * eps).sqrt();
        let spec = IntegralSpec::c(1, 0.0, 3, 5, 50.0).unwrap();
        let exact = csfun(&spec, eps, omega, &quad()).unwrap();
        let weak = csfun_weak_coupling(&spec, eps, omega);
        assert!((weak - exact).abs() <= 0.02 * exact.abs(), "{weak} vs {exact}");
    }

    #[test]
    fn asymptotic_table() {
        let g = 0.02;
        assert_eq!(asymptotic_csfun(&IntegralSpec::c(2, 0.0, 4, 4, 0.0).unwrap(), g).unwrap(), 0.25);
        assert_eq!(asymptotic_csfun(&IntegralSpec::c(2, 0.0, 4, 5, 0.0).unwrap(), g).unwrap(), 0.0);
        assert_abs_diff_eq!(
            asymptotic_csfun(&IntegralSpec::s(2, 1.0, 5, 4, 0.0).unwrap(), g).unwrap(),
            -g / 4.0,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            asymptotic_csfun(&IntegralSpec::s(2, -1.0, 5, 4, 0.0).unwrap(), g).unwrap(),
            g / 4.0,
            epsilon = 1e-16
        );
        assert_eq!(asymptotic_csfun(&IntegralSpec::s(1, 0.5, 5, 4, 0.0).unwrap(), g).unwrap(), 0.0);
        assert!(asymptotic_csfun(&IntegralSpec::c(1, 1.0, 5, 4, 0.0).unwrap(), g).is_err());
    }

    #[test]
    fn c20_relaxes_to_quarter() {
        let gamma = 0.01;
        let eps = epsilon_from_gamma(gamma);
        let omega = 1.0 / (1.0 + 2.0 * eps).sqrt();
        let t = 300.0 / gamma;
        let v = csfun(&IntegralSpec::c(2, 0.0, 5, 5, t).unwrap(), eps, omega, &quad()).unwrap();
        assert!((v - 0.25).abs() < 0.02, "{v}");
    }

    #[test]
    fn derived_terms_fix_printed_coefficients() {
        let (eta, mu): (f64, f64) = (0.7, -0.4);
        let dq = (-mu).exp() - (-eta).exp();
        let dp = mu.exp() - eta.exp();
        let coefficients = |block| {
            covariance_terms(block, eta, mu)
                .into_iter()
                .map(|t| match t {
                    Term::Bath { coefficient, family } => (coefficient, family.trig, family.power, family.kappa),
                    Term::System { coefficient, left, right } => {
                        assert_eq!(left.kappa, right.kappa);
                        (coefficient, left.trig, 0, left.kappa)
                    }
                })
                .collect::<Vec<_>>()
        };
        let qq = coefficients(Block::QQ);
        assert_abs_diff_eq!(qq[0].0, (-eta).exp(), epsilon = 1e-15);
        assert_eq!((qq[0].1, qq[0].2, qq[0].3), (Trig::Cos, 2, 0.0));
        assert_abs_diff_eq!(qq[1].0, 2.0 * dq, epsilon = 1e-15);
        assert_abs_diff_eq!(qq[2].0, eta.exp(), epsilon = 1e-15);
        assert_eq!((qq[2].1, qq[2].2, qq[2].3), (Trig::Sin, 2, -1.0));
        assert_abs_diff_eq!(qq[3].0, 2.0 * dp, epsilon = 1e-15);

        // the S^(1,1/2) S^(1,1/2) product carries the Q-type correction
        let pp = coefficients(Block::PP);
        assert_abs_diff_eq!(pp[0].0, (-eta).exp(), epsilon = 1e-15);
        assert_eq!((pp[0].1, pp[0].3), (Trig::Sin, 1.0));
        assert_abs_diff_eq!(pp[1].0, 2.0 * dq, epsilon = 1e-15);
        assert_eq!(pp[1].1, Trig::Sin);
        assert_abs_diff_eq!(pp[3].0, 2.0 * dp, epsilon = 1e-15);
        assert_eq!(pp[3].1, Trig::Cos);

        // the second correction of the QP block carries the P-type difference
        let qp = covariance_terms(Block::QP, eta, mu);
        match (qp[0], qp[2]) {
            (Term::Bath { coefficient: a, family: fa }, Term::Bath { coefficient: b, family: fb }) => {
                assert_abs_diff_eq!(a, -0.5 * (-eta).exp(), epsilon = 1e-15);
                assert_eq!((fa.kappa, fa.time_factor), (0.5, 2.0));
                assert_abs_diff_eq!(b, 0.5 * eta.exp(), epsilon = 1e-15);
                assert_eq!((fb.kappa, fb.time_factor), (-0.5, 2.0));
            }
            _ => unreachable!(),
        }
        match (qp[1], qp[3]) {
            (Term::System { coefficient: a, .. }, Term::System { coefficient: b, .. }) => {
                assert_abs_diff_eq!(a, -2.0 * dq, epsilon = 1e-15);
                assert_abs_diff_eq!(b, 2.0 * dp, epsilon = 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn reproduces_initial_condition() {
        let params = ContinuumParams::new(0.6, -0.2, 0.05, 1.0, vec![10, 11]).unwrap();
        let ev = params.quadrature_evaluator(quad());
        let bath_qq = covariance_element_continuum(Block::QQ, 3, 3, 0.0, &params, &ev).unwrap();
        assert_abs_diff_eq!(bath_qq, 0.5 * (-0.6f64).exp(), epsilon = 1e-11);
        let sys_pp = covariance_element_continuum(Block::PP, 10, 10, 0.0, &params, &ev).unwrap();
        assert_abs_diff_eq!(sys_pp, 0.5 * (-0.2f64).exp(), epsilon = 1e-11);
        for block in [Block::QQ, Block::PP, Block::QP] {
            let off = covariance_element_continuum(block, 10, 11, 0.0, &params, &ev).unwrap();
            assert_abs_diff_eq!(off, 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn steady_state_shapes() {
        let eta = 0.8f64;
        let v1 = steady_state_covariance(1, eta, 0.03).unwrap();
        assert_eq!(v1.matrix(), &(DMatrix::identity(2, 2) * (0.5 * eta.cosh())));

        let g = 0.03;
        let v2 = steady_state_covariance(2, eta, g).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                eta.cosh(), (-eta).exp() * g / 2.0, 0.0, 0.0,
                (-eta).exp() * g / 2.0, eta.cosh(), 0.0, 0.0,
                0.0, 0.0, eta.cosh(), -eta.exp() * g / 2.0,
                0.0, 0.0, -eta.exp() * g / 2.0, eta.cosh(),
            ],
        ) * 0.5;
        assert!((v2.matrix() - expected).amax() < 1e-16);

        assert_eq!(steady_state_covariance(3, 0.0, 0.0).unwrap(), CovarianceMatrix::vacuum(3));
    }

    #[test]
    fn relaxed_neighbour_correlations() {
        // the Q neighbours inherit the bath momentum squeezing e^eta, the
        // P neighbours the position squeezing e^-eta
        let (eta, gamma) = (1.0, 0.01);
        let cp = ContinuumParams::new(eta, 0.3, gamma, 1.0, vec![50, 51]).unwrap();
        let ev = cp.long_time_evaluator(Quadrature::new(1e-13).unwrap());
        let v = continuum_covariance(&[50, 51], 0.0, &cp, &ev).unwrap();
        let eps = cp.epsilon();
        let second_order = 4.0 * gamma * gamma;
        assert_abs_diff_eq!(v[(0, 1)], eta.exp() * gamma / 4.0 / (1.0 + 2.0 * eps), epsilon = second_order);
        assert_abs_diff_eq!(v[(2, 3)], -(-eta).exp() * gamma / 4.0 * (1.0 + 2.0 * eps), epsilon = second_order);
        let diag_q = 0.25 * ((-eta).exp() + eta.exp() / (1.0 + 2.0 * eps));
        assert_abs_diff_eq!(v[(0, 0)], diag_q, epsilon = second_order);
        assert_eq!(v[(0, 2)], 0.0);
    }

}
