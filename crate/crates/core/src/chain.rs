//! Open harmonic chain with nearest-neighbour springs.
//!
//! Phase-space vectors are ordered `(Q_1..Q_N, P_1..P_N)` in the dimensionless
//! variables `Q = sqrt(m w / hbar) q`, `P = p / sqrt(m w hbar)`, with
//! `hbar = m = 1`. In these units the Hamiltonian is
//! `H = (w/2) [Q^T A Q + P^T P]` and the Heisenberg flow is the symplectic map
//!
//! ```text
//! S(t) = | cos(wt A^1/2)            A^-1/2 sin(wt A^1/2) |
//!        | -A^1/2 sin(wt A^1/2)     cos(wt A^1/2)        |
//! ```
//!
//! All matrix functions of `A` are evaluated through its closed-form
//! eigenbasis (a type-I discrete sine transform). Site indices in the public
//! API are 1-based.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Physical parameters of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    sites: usize,
    epsilon: f64,
    omega: f64,
}

impl ChainParams {
    /// `epsilon = k/K` is the ratio of coupling spring to on-site spring and
    /// `omega = sqrt(K/m)` the bare frequency.
    pub fn new(sites: usize, epsilon: f64, omega: f64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::invalid("sites", "chain needs at least one oscillator"));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be finite and > 0, got {omega}")));
        }
        Ok(Self { sites, epsilon, omega })
    }

    /// Builds the chain from the weak-coupling parameter `gamma = k/(K+2k)`
    /// and the renormalized frequency `Omega = sqrt((K+2k)/m)`.
    pub fn from_gamma(sites: usize, gamma: f64, big_omega: f64) -> Result<Self> {
        if !(gamma.is_finite() && (0.0..0.5).contains(&gamma)) {
            return Err(Error::invalid("gamma", format!("must lie in [0, 1/2), got {gamma}")));
        }
        let epsilon = epsilon_from_gamma(gamma);
        Self::new(sites, epsilon, big_omega / (1.0 + 2.0 * epsilon).sqrt())
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `gamma = epsilon / (1 + 2 epsilon)`, always in `[0, 1/2)`.
    pub fn gamma(&self) -> f64 {
        self.epsilon / (1.0 + 2.0 * self.epsilon)
    }

    /// `Omega = omega sqrt(1 + 2 epsilon)`.
    pub fn renormalized_omega(&self) -> f64 {
        self.omega * (1.0 + 2.0 * self.epsilon).sqrt()
    }

    /// Center site `ceil(N/2)`, the default system location.
    pub fn center_site(&self) -> usize {
        self.sites.div_ceil(2)
    }
}

pub fn epsilon_from_gamma(gamma: f64) -> f64 {
    gamma / (1.0 - 2.0 * gamma)
}

/// Tridiagonal coupling matrix with `1 + 2 eps` on the diagonal and `-eps`
/// on the first off-diagonals.
pub fn build_coupling_matrix(params: &ChainParams) -> DMatrix<f64> {
    let n = params.sites;
    let eps = params.epsilon;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 + 2.0 * eps
        } else if i.abs_diff(j) == 1 {
            -eps
        } else {
            0.0
        }
    })
}

/// Normal modes of the chain: `phi_l = l pi/(N+1)`,
/// `lambda_l = 1 + 2 eps (1 - cos phi_l)` and the orthogonal eigenvector
/// matrix `sigma_{s,l} = sqrt(2/(N+1)) sin(s phi_l)`.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    phis: Vec<f64>,
    lambdas: Vec<f64>,
    // sin(k pi/(N+1)) * sqrt(2/(N+1)) for k in 0..2(N+1)
    sine_table: Vec<f64>,
}

impl ModeSpectrum {
    pub fn new(params: &ChainParams) -> Self {
        let n = params.sites;
        let period = 2 * (n + 1);
        let norm = (2.0 / (n + 1) as f64).sqrt();
        let sine_table = (0..period)
            .map(|k| norm * (k as f64 * PI / (n + 1) as f64).sin())
            .collect();
        let phis: Vec<f64> = (1..=n).map(|l| l as f64 * PI / (n + 1) as f64).collect();
        let lambdas = phis
            .iter()
            .map(|&phi| 1.0 + 2.0 * params.epsilon * (1.0 - phi.cos()))
            .collect();
        Self { phis, lambdas, sine_table }
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `sigma_{s,l}` for 1-based `s` and `l`. The integer product `s l` is
    /// reduced modulo the sine period before lookup, so entries are exact to
    /// table precision for any chain length.
    #[inline]
    pub fn sigma_entry(&self, s: usize, l: usize) -> f64 {
        self.sine_table[(s * l) % self.sine_table.len()]
    }

    pub fn sigma(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| self.sigma_entry(i + 1, j + 1))
    }

    /// Dense `f(A) = sigma^T diag(f(lambda)) sigma`.
    pub fn matrix_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let sigma = self.sigma();
        let mut scaled = sigma.clone();
        for (l, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.lambdas[l]);
        }
        scaled * sigma
    }
}

pub fn mode_spectrum(params: &ChainParams) -> ModeSpectrum {
    ModeSpectrum::new(params)
}

/// `Gamma = [[0, I], [-I, 0]]` for `modes` oscillators.
pub fn commutation_matrix(modes: usize) -> DMatrix<f64> {
    let mut gamma = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        gamma[(i, modes + i)] = 1.0;
        gamma[(modes + i, i)] = -1.0;
    }
    gamma
}

/// The four propagator blocks as scalar functions of one eigenvalue.
#[derive(Debug, Clone, Copy)]
struct ModePhase {
    cos: f64,
    // lambda^{-1/2} sin
    sin_over_root: f64,
    // lambda^{1/2} sin
    sin_times_root: f64,
}

impl ModePhase {
    fn new(lambda: f64, omega_t: f64) -> Self {
        let root = lambda.sqrt();
        let (sin, cos) = (omega_t * root).sin_cos();
        Self {
            cos,
            sin_over_root: sin / root,
            sin_times_root: sin * root,
        }
    }
}

/// Full `2N x 2N` symplectic propagator at time `t`.
#[derive(Debug, Clone)]
pub struct Propagator {
    time: f64,
    matrix: DMatrix<f64>,
}

impl Propagator {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

pub fn propagator(params: &ChainParams, spectrum: &ModeSpectrum, t: f64) -> Propagator {
    let n = params.sites;
    let omega_t = params.omega * t;
    let phases: Vec<ModePhase> = spectrum
        .lambdas()
        .iter()
        .map(|&lambda| ModePhase::new(lambda, omega_t))
        .collect();

    let sigma = spectrum.sigma();
    let block = |f: &dyn Fn(&ModePhase) -> f64| {
        let mut scaled = sigma.clone();
        for (l, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(&phases[l]);
        }
        &scaled * &sigma
    };
    let cos = block(&|p| p.cos);
    let sin_over_root = block(&|p| p.sin_over_root);
    let sin_times_root = block(&|p| p.sin_times_root);

    let mut matrix = DMatrix::zeros(2 * n, 2 * n);
    matrix.view_mut((0, 0), (n, n)).copy_from(&cos);
    matrix.view_mut((0, n), (n, n)).copy_from(&sin_over_root);
    matrix.view_mut((n, 0), (n, n)).copy_from(&(-sin_times_root));
    matrix.view_mut((n, n), (n, n)).copy_from(&cos);
    Propagator { time: t, matrix }
}

/// Rows of `S(t)` belonging to a subset of sites: the `Q_s` rows for every
/// requested site followed by the matching `P_s` rows. This is all that is
/// needed to evolve a reduced state, and costs `O(n N^2)` instead of the
/// `O(N^3)` of the full propagator.
#[derive(Debug, Clone)]
pub struct PropagatorRows {
    time: f64,
    sites: Vec<usize>,
    rows: DMatrix<f64>,
}

impl PropagatorRows {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// `2n x 2N` matrix; row `i` is `Q_{sites[i]}`, row `n + i` is `P_{sites[i]}`.
    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }
}

pub fn propagator_rows(
    params: &ChainParams,
    spectrum: &ModeSpectrum,
    t: f64,
    sites: &[usize],
) -> Result<PropagatorRows> {
    let n = params.sites;
    validate_sites(sites, n)?;
    let omega_t = params.omega * t;
    let k = sites.len();

    // weights[i][l] = sigma_{s_i, l} * f(lambda_l) for the three block functions
    let weights: Vec<[Vec<f64>; 3]> = sites
        .iter()
        .map(|&s| {
            let mut w = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            for (l, &lambda) in spectrum.lambdas().iter().enumerate() {
                let p = ModePhase::new(lambda, omega_t);
                let sig = spectrum.sigma_entry(s, l + 1);
                w[0][l] = sig * p.cos;
                w[1][l] = sig * p.sin_over_root;
                w[2][l] = sig * p.sin_times_root;
            }
            w
        })
        .collect();

    // columns[j] holds the 3k contractions against sigma_{j+1, .}
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = vec![0.0; 3 * k];
            for l in 0..n {
                let sig = spectrum.sigma_entry(j + 1, l + 1);
                for (i, w) in weights.iter().enumerate() {
                    acc[3 * i] += sig * w[0][l];
                    acc[3 * i + 1] += sig * w[1][l];
                    acc[3 * i + 2] += sig * w[2][l];
                }
            }
            acc
        })
        .collect();

    let mut rows = DMatrix::zeros(2 * k, 2 * n);
    for (j, acc) in columns.iter().enumerate() {
        for i in 0..k {
            let (cos, sin_over_root, sin_times_root) = (acc[3 * i], acc[3 * i + 1], acc[3 * i + 2]);
            rows[(i, j)] = cos;
            rows[(i, n + j)] = sin_over_root;
            rows[(k + i, j)] = -sin_times_root;
            rows[(k + i, n + j)] = cos;
        }
    }
    Ok(PropagatorRows {
        time: t,
        sites: sites.to_vec(),
        rows,
    })
}

/// Max-abs entry of `S Gamma S^T - Gamma`.
pub fn verify_symplectic(s: &DMatrix<f64>) -> Result<f64> {
    let dim = s.nrows();
    if s.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.ncols(),
        });
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::OddDimension(dim));
    }
    let gamma = commutation_matrix(dim / 2);
    let residual = s * &gamma * s.transpose() - gamma;
    Ok(crate::max_abs(&residual))
}

/// Symplectic residual restricted to a row block: for rows `R` of a
/// symplectic `S`, `(S Gamma S^T)_{RR}` must equal `Gamma_{RR}`.
pub fn verify_symplectic_rows(rows: &PropagatorRows) -> f64 {
    let r = &rows.rows;
    let n = r.ncols() / 2;
    let k = rows.sites.len();
    let gamma = commutation_matrix(n);
    let product = r * gamma * r.transpose();
    let expected = commutation_matrix(k);
    crate::max_abs(&(product - expected))
}

pub(crate) fn validate_sites(sites: &[usize], n: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::invalid("sites", "at least one site is required"));
    }
    for (i, &s) in sites.iter().enumerate() {
        if s == 0 || s > n {
            return Err(Error::invalid("sites", format!("site {s} outside 1..={n}")));
        }
        if sites[..i].contains(&s) {
            return Err(Error::invalid("sites", format!("site {s} listed twice")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    #[test]
    fn coupling_matrix_small_chain() {
        let params = ChainParams::new(3, 0.1, 1.0).unwrap();
        let a = build_coupling_matrix(&params);
        let expected = DMatrix::from_row_slice(3, 3, &[1.2, -0.1, 0.0, -0.1, 1.2, -0.1, 0.0, -0.1, 1.2]);
        assert_abs_diff_eq!((a - expected).amax(), 0.0, epsilon = 1e-15);

        let uncoupled = build_coupling_matrix(&ChainParams::new(2, 0.0, 1.0).unwrap());
        assert_eq!(uncoupled, DMatrix::identity(2, 2));
    }

    #[test]
    fn coupling_eigenvalues_match_dense_solver() {
        // numpy.linalg.eigvalsh on the 3x3 matrix above
        let expected = [1.0585786437626905, 1.2, 1.3414213562373094];
        let params = ChainParams::new(3, 0.1, 1.0).unwrap();
        let mut dense: Vec<f64> = SymmetricEigen::new(build_coupling_matrix(&params))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        dense.sort_by(f64::total_cmp);
        let spectrum = mode_spectrum(&params);
        for i in 0..3 {
            assert_abs_diff_eq!(dense[i], expected[i], epsilon = 1e-12);
            assert_abs_diff_eq!(spectrum.lambdas()[i], expected[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            ChainParams::new(0, 0.1, 1.0),
            Err(Error::InvalidParameter { field: "sites", .. })
        ));
        assert!(matches!(
            ChainParams::new(4, -0.1, 1.0),
            Err(Error::InvalidParameter { field: "epsilon", .. })
        ));
    }

    #[test]
    fn derived_parameters() {
        for &eps in &[0.0, 0.01, 0.3, 5.0, 1e6] {
            let p = ChainParams::new(5, eps, 1.7).unwrap();
            assert_abs_diff_eq!(p.gamma(), eps / (1.0 + 2.0 * eps), epsilon = 1e-14);
            assert_abs_diff_eq!(p.renormalized_omega(), 1.7 * (1.0 + 2.0 * eps).sqrt(), epsilon = 1e-14 * p.renormalized_omega());
            assert!((0.0..0.5).contains(&p.gamma()));
        }
        let p = ChainParams::from_gamma(5, 0.05, 2.0).unwrap();
        assert_abs_diff_eq!(p.gamma(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(p.renormalized_omega(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_site_spectrum() {
        let p = ChainParams::new(1, 0.4, 1.0).unwrap();
        let sp = mode_spectrum(&p);
        assert_abs_diff_eq!(sp.phis()[0], PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sp.lambdas()[0], 1.8, epsilon = 1e-15);
        assert_abs_diff_eq!(sp.sigma()[(0, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sigma_is_orthogonal_and_diagonalizes_a() {
        for &(n, eps) in &[(4, 0.7), (17, 0.05), (40, 3.0)] {
            let p = ChainParams::new(n, eps, 1.0).unwrap();
            let sp = mode_spectrum(&p);
            let sigma = sp.sigma();
            let gram = &sigma * sigma.transpose() - DMatrix::<f64>::identity(n, n);
            assert!(gram.amax() < 1e-13, "orthogonality residual {}", gram.amax());
            let diag = &sigma * build_coupling_matrix(&p) * sigma.transpose()
                - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sp.lambdas().to_vec()));
            assert!(diag.amax() < 1e-12);
            assert!(sp.lambdas().iter().all(|&l| (1.0..=1.0 + 4.0 * eps).contains(&l)));
        }
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let p = ChainParams::new(6, 0.3, 1.0).unwrap();
        let s = propagator(&p, &mode_spectrum(&p), 0.0);
        assert!((s.matrix() - DMatrix::<f64>::identity(12, 12)).amax() < 1e-14);
    }

    #[test]
    fn free_oscillator_is_phase_rotation() {
        let p = ChainParams::new(1, 0.0, 2.0).unwrap();
        let t = 0.37;
        let s = propagator(&p, &mode_spectrum(&p), t);
        let (sin, cos) = (2.0 * t).sin_cos();
        let expected = DMatrix::from_row_slice(2, 2, &[cos, sin, -sin, cos]);
        assert!((s.matrix() - expected).amax() < 1e-15);
    }

    #[test]
    fn propagator_is_symplectic() {
        let p = ChainParams::new(8, 0.3, 1.0).unwrap();
        let sp = mode_spectrum(&p);
        for &t in &[2.7, 5.0] {
            let residual = verify_symplectic(propagator(&p, &sp, t).matrix()).unwrap();
            assert!(residual < 1e-10, "t = {t}: {residual}");
        }
    }

    #[test]
    fn verify_symplectic_edge_cases() {
        assert_eq!(verify_symplectic(&DMatrix::identity(6, 6)).unwrap(), 0.0);
        let scaled = DMatrix::from_diagonal_element(2, 2, 2.0);
        assert_abs_diff_eq!(verify_symplectic(&scaled).unwrap(), 3.0, epsilon = 1e-15);
        assert_eq!(verify_symplectic(&DMatrix::identity(3, 3)), Err(Error::OddDimension(3)));
    }

    #[test]
    fn rows_match_full_propagator() {
        let p = ChainParams::new(11, 0.8, 1.3).unwrap();
        let sp = mode_spectrum(&p);
        let t = 3.3;
        let full = propagator(&p, &sp, t);
        let sites = [6, 2, 11];
        let rows = propagator_rows(&p, &sp, t, &sites).unwrap();
        for (i, &s) in sites.iter().enumerate() {
            for c in 0..22 {
                assert_abs_diff_eq!(rows.rows()[(i, c)], full.matrix()[(s - 1, c)], epsilon = 1e-13);
                assert_abs_diff_eq!(rows.rows()[(3 + i, c)], full.matrix()[(11 + s - 1, c)], epsilon = 1e-13);
            }
        }
        assert!(verify_symplectic_rows(&rows) < 1e-13);
    }

    #[test]
    fn rows_reject_invalid_sites() {
        let p = ChainParams::new(5, 0.1, 1.0).unwrap();
        let sp = mode_spectrum(&p);
        assert!(propagator_rows(&p, &sp, 1.0, &[]).is_err());
        assert!(propagator_rows(&p, &sp, 1.0, &[0]).is_err());
        assert!(propagator_rows(&p, &sp, 1.0, &[6]).is_err());
        assert!(propagator_rows(&p, &sp, 1.0, &[2, 2]).is_err());
    }
}
