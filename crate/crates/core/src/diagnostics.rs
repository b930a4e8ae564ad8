//! Thermodynamic and entanglement diagnostics of the relaxed states.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::continuum::steady_state_covariance;
use crate::error::{Error, Result};
use crate::gaussian::{single_mode_entropy, symplectic_eigenvalues, CovarianceMatrix};

/// Inverse temperature (units of `1/(hbar omega)`) of the single-mode
/// thermal state with `coth(beta/2) = cosh(eta)`, i.e.
/// `beta = 2 arccoth(cosh eta) = ln[(cosh eta + 1)/(cosh eta - 1)]`.
/// Returns `None` for `eta = 0`, where the state is the ground state and
/// `beta` is infinite.
pub fn effective_beta(eta: f64) -> Option<f64> {
    if eta == 0.0 {
        return None;
    }
    // cosh(eta) - 1 = 2 sinh^2(eta/2) avoids cancellation at small eta
    let below = 2.0 * (0.5 * eta).sinh().powi(2);
    Some(((eta.cosh() + 1.0) / below).ln())
}

/// Mean thermal occupation `(cosh eta - 1)/2` of the relaxed single mode.
pub fn mean_occupation(eta: f64) -> f64 {
    (0.5 * eta).sinh().powi(2)
}

/// `coth(beta/2) I / 2`, the covariance of a thermal oscillator. `beta` may
/// be `+inf` (ground state).
pub fn boltzmann_covariance(beta: f64) -> Result<CovarianceMatrix> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
    }
    let coth = if beta.is_infinite() { 1.0 } else { 1.0 / (0.5 * beta).tanh() };
    CovarianceMatrix::new(DMatrix::identity(2, 2) * (0.5 * coth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimonTest {
    pub value: f64,
    pub entangled: bool,
}

/// Closed-form separability test for the relaxed two-mode state:
/// `(cosh^2 eta - e^{-2eta} gamma^2/4)(cosh^2 eta - e^{2eta} gamma^2/4) - cosh 2eta`,
/// entangled when negative.
pub fn simon_criterion(eta: f64, gamma: f64) -> SimonTest {
    let c2 = eta.cosh().powi(2);
    let g2 = gamma * gamma / 4.0;
    let value = (c2 - (-2.0 * eta).exp() * g2) * (c2 - (2.0 * eta).exp() * g2) - (2.0 * eta).cosh();
    SimonTest {
        value,
        entangled: value < 0.0,
    }
}

/// Generic two-mode PPT test on an arbitrary covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptTest {
    /// `det A det B + (1/4 - |det C|)^2 - tr(A J C J B J C^T J) - (det A + det B)/4`;
    /// negative iff the partial transpose is unphysical.
    pub simon_invariant: f64,
    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub min_transposed_eig: f64,
    pub entangled: bool,
}

pub fn ppt_two_mode(v: &CovarianceMatrix) -> Result<PptTest> {
    if v.modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: v.dim(),
        });
    }
    let m = v.matrix();
    // (Q1, Q2, P1, P2) -> per-mode 2x2 blocks
    let block = |a: usize, b: usize| Matrix2::new(m[(a, b)], m[(a, b + 2)], m[(a + 2, b)], m[(a + 2, b + 2)]);
    let a = block(0, 0);
    let b = block(1, 1);
    let c = block(0, 1);
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let (da, db, dc) = (a.determinant(), b.determinant(), c.determinant());
    let trace = (a * j * c * j * b * j * c.transpose() * j).trace();
    let simon_invariant = da * db + (0.25 - dc.abs()).powi(2) - trace - 0.25 * (da + db);

    let mut transposed = m.clone();
    for k in 0..4 {
        transposed[(3, k)] = -transposed[(3, k)];
        transposed[(k, 3)] = -transposed[(k, 3)];
    }
    let min_transposed_eig = symplectic_eigenvalues(&transposed)?[0];
    Ok(PptTest {
        simon_invariant,
        min_transposed_eig,
        entangled: simon_invariant < 0.0,
    })
}

/// `nu2 = [4 sqrt(det V2)]^{-1}` for the relaxed two-mode matrix, evaluated
/// exactly: `[(cosh^2 eta - e^{-2eta} gamma^2/4)(cosh^2 eta - e^{2eta} gamma^2/4)]^{-1/2}`.
/// Can exceed one at small `eta`, where the O(gamma) matrix dips below the
/// uncertainty bound; the value is reported as is.
pub fn two_mode_purity(eta: f64, gamma: f64) -> f64 {
    let c2 = eta.cosh().powi(2);
    let g2 = gamma * gamma / 4.0;
    ((c2 - (-2.0 * eta).exp() * g2) * (c2 - (2.0 * eta).exp() * g2)).powf(-0.5)
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn threshold<F: Fn(f64) -> f64>(f: F, tol: f64) -> Option<f64> {
    if f(0.0) >= 0.0 {
        return None;
    }
    let mut hi = 0.5;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 64.0 {
            return None;
        }
    }
    bisect(f, 0.0, hi, tol)
}

/// Squeezing `eta*` above which the closed-form test reports separability.
/// `None` when there is no entangled region (`gamma = 0`).
pub fn simon_threshold(gamma: f64, tol: f64) -> Option<f64> {
    threshold(|eta| simon_criterion(eta, gamma).value, tol)
}

/// Same boundary located with the generic PPT test on the relaxed matrix.
pub fn ppt_threshold(gamma: f64, tol: f64) -> Option<f64> {
    threshold(
        |eta| {
            steady_state_covariance(2, eta, gamma)
                .and_then(|v| ppt_two_mode(&v))
                .map(|p| p.simon_invariant)
                .unwrap_or(f64::NAN)
        },
        tol,
    )
}

/// Max-abs distance of each `(t, V)` sample from `target`.
pub fn equilibration_distance(
    series: &[(f64, CovarianceMatrix)],
    target: &CovarianceMatrix,
) -> Result<Vec<(f64, f64)>> {
    series
        .iter()
        .map(|(t, v)| {
            if v.dim() != target.dim() {
                return Err(Error::DimensionMismatch {
                    expected: target.dim(),
                    found: v.dim(),
                });
            }
            Ok((*t, crate::max_abs(&(v.matrix() - target.matrix()))))
        })
        .collect()
}

/// Relaxed-state summary for one `(eta, gamma)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub eta: f64,
    pub gamma: f64,
    /// `None` means `beta = inf`.
    pub beta: Option<f64>,
    pub mean_occupation: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub entropy1: f64,
    pub simon_value: f64,
    pub entangled: bool,
    pub ppt_invariant: f64,
    pub ppt_entangled: bool,
    pub tests_agree: bool,
}

impl EquilibriumReport {
    pub fn new(eta: f64, gamma: f64) -> Result<Self> {
        let v1 = steady_state_covariance(1, eta, gamma)?;
        let nu1 = v1.purity()?;
        let simon = simon_criterion(eta, gamma);
        let ppt = ppt_two_mode(&steady_state_covariance(2, eta, gamma)?)?;
        Ok(Self {
            eta,
            gamma,
            beta: effective_beta(eta),
            mean_occupation: mean_occupation(eta),
            nu1,
            nu2: two_mode_purity(eta, gamma),
            entropy1: single_mode_entropy(nu1.min(1.0))?,
            simon_value: simon.value,
            entangled: simon.entangled,
            ppt_invariant: ppt.simon_invariant,
            ppt_entangled: ppt.entangled,
            tests_agree: simon.entangled == ppt.entangled,
        })
    }
}
