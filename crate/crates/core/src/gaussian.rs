//! Zero-mean Gaussian states carried by their covariance matrices
//! `V_ab = <{dxi_a, dxi_b}>/2` in the `(Q.., P..)` ordering.

use std::io::{BufRead, Write};

use nalgebra::{Cholesky, DMatrix};

use crate::chain::{commutation_matrix, validate_sites, ChainParams, Propagator, PropagatorRows};
use crate::error::{Error, Result};

/// Symplectic eigenvalues closer than this to `1/2` count as pure.
pub const PURITY_TOLERANCE: f64 = 1e-9;

/// Pairing tolerance for the `+- i d_k` spectrum of `Gamma V`.
pub const PAIRING_TOLERANCE: f64 = 1e-9;

/// Above this purity the single-mode entropy switches to its series form.
pub const ENTROPY_SERIES_THRESHOLD: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let dim = data.nrows();
        if data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.ncols(),
            });
        }
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Unphysical("non-finite covariance entry".into()));
        }
        let asym = (&data - data.transpose()).amax();
        if asym > 1e-12 * data.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { data })
    }

    /// Vacuum (`V = I/2`) on `modes` oscillators.
    pub fn vacuum(modes: usize) -> Self {
        Self {
            data: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    pub(crate) fn from_symmetrized(data: DMatrix<f64>) -> Self {
        let data = (&data + data.transpose()) * 0.5;
        Self { data }
    }

    pub fn modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// `ln det V` through a Cholesky factorization; fails if `V` is not
    /// positive definite.
    pub fn ln_det(&self) -> Result<f64> {
        let chol = Cholesky::new(self.data.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// `Tr rho^2 = [2^n sqrt(det V)]^-1`.
    pub fn purity(&self) -> Result<f64> {
        let n = self.modes() as f64;
        Ok((-n * std::f64::consts::LN_2 - 0.5 * self.ln_det()?).exp())
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.data)
    }

    /// Principal submatrix over the `Q` and `P` rows of the given 1-based
    /// modes, in the order given.
    pub fn submatrix(&self, sites: &[usize]) -> Result<CovarianceMatrix> {
        let n = self.modes();
        validate_sites(sites, n)?;
        let index: Vec<usize> = sites
            .iter()
            .map(|&s| s - 1)
            .chain(sites.iter().map(|&s| n + s - 1))
            .collect();
        let k = index.len();
        let data = DMatrix::from_fn(k, k, |i, j| self.data[(index[i], index[j])]);
        Ok(CovarianceMatrix { data })
    }

    /// Writes the plain-text matrix format: a header line `"<2n> <t>"`
    /// followed by one row per line, entries in `%.16e` (17 significant
    /// digits) separated by single spaces.
    pub fn write_text<W: Write>(&self, t: f64, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.dim(), format_float(t))?;
        for row in self.data.row_iter() {
            let line: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<(f64, CovarianceMatrix)> {
        let parse_err = |what: String| Error::invalid("matrix text", what);
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err("missing header".into()))?
            .map_err(|e| parse_err(e.to_string()))?;
        let mut head = header.split_whitespace();
        let dim: usize = head
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(format!("bad header `{header}`")))?;
        let t: f64 = head
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(format!("bad header `{header}`")))?;
        let mut values = Vec::with_capacity(dim * dim);
        for line in lines.take(dim) {
            let line = line.map_err(|e| parse_err(e.to_string()))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(e.to_string()))?;
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        if values.len() != dim * dim {
            return Err(parse_err(format!("expected {dim} rows")));
        }
        Ok((t, CovarianceMatrix::new(DMatrix::from_row_slice(dim, dim, &values))?))
    }
}

/// `%.16e`, the numeric format shared by every text output.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Squeezed product preparation: every bath site in a squeezed vacuum with
/// parameter `eta`, every system site with parameter `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepSpec {
    pub eta: f64,
    pub mu: f64,
    system_sites: Vec<usize>,
}

impl PrepSpec {
    /// `system_sites` are 1-based and must be strictly increasing.
    pub fn new(eta: f64, mu: f64, system_sites: Vec<usize>) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::invalid("eta", "must be finite"));
        }
        if !mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if system_sites.contains(&0) {
            return Err(Error::invalid("system_sites", "sites are 1-based"));
        }
        if system_sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("system_sites", "must be strictly increasing"));
        }
        Ok(Self { eta, mu, system_sites })
    }

    pub fn system_sites(&self) -> &[usize] {
        &self.system_sites
    }

    pub fn validate_for(&self, params: &ChainParams) -> Result<()> {
        let n = params.sites();
        if let Some(&last) = self.system_sites.last() {
            if last > n {
                return Err(Error::invalid("system_sites", format!("site {last} outside 1..={n}")));
            }
        }
        Ok(())
    }

    /// Diagonal of `V(0)`: `e^{-eta}/2` (bath) or `e^{-mu}/2` (system) on the
    /// Q entries and the reciprocal on the P entries.
    pub fn initial_diagonal(&self, params: &ChainParams) -> Result<Vec<f64>> {
        self.validate_for(params)?;
        let n = params.sites();
        let mut diag = vec![0.0; 2 * n];
        for i in 0..n {
            diag[i] = 0.5 * (-self.eta).exp();
            diag[n + i] = 0.5 * self.eta.exp();
        }
        for &r in &self.system_sites {
            diag[r - 1] = 0.5 * (-self.mu).exp();
            diag[n + r - 1] = 0.5 * self.mu.exp();
        }
        Ok(diag)
    }
}

pub fn initial_covariance(params: &ChainParams, prep: &PrepSpec) -> Result<CovarianceMatrix> {
    let diag = prep.initial_diagonal(params)?;
    Ok(CovarianceMatrix {
        data: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
    })
}

/// The rank-two correction a system site adds on top of the uniform bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteCorrection {
    pub site: usize,
    /// `(e^{-mu} - e^{-eta})/2` at `(r, r)`.
    pub q: f64,
    /// `(e^{mu} - e^{eta})/2` at `(N + r, N + r)`.
    pub p: f64,
}

impl SiteCorrection {
    pub fn to_matrix(&self, sites: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * sites, 2 * sites);
        m[(self.site - 1, self.site - 1)] = self.q;
        m[(sites + self.site - 1, sites + self.site - 1)] = self.p;
        m
    }
}

/// `V(0) = v + sum_i v_i` with `v = (e^{-eta} I + e^{eta} I)/2` the uniform
/// bath and `v_i` the per-system-site corrections.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSplit {
    pub sites: usize,
    pub bath_q: f64,
    pub bath_p: f64,
    pub corrections: Vec<SiteCorrection>,
}

impl CovarianceSplit {
    pub fn bath_matrix(&self) -> DMatrix<f64> {
        let n = self.sites;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i == j, i < n) {
            (true, true) => self.bath_q,
            (true, false) => self.bath_p,
            _ => 0.0,
        })
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.corrections
            .iter()
            .fold(self.bath_matrix(), |acc, c| acc + c.to_matrix(self.sites))
    }
}

pub fn split_covariance(
    v0: &CovarianceMatrix,
    params: &ChainParams,
    prep: &PrepSpec,
) -> Result<CovarianceSplit> {
    let expected = initial_covariance(params, prep)?;
    if v0.dim() != expected.dim() {
        return Err(Error::DimensionMismatch {
            expected: expected.dim(),
            found: v0.dim(),
        });
    }
    if v0.data != expected.data {
        return Err(Error::invalid(
            "v0",
            "covariance does not match the squeezed product preparation",
        ));
    }
    let (eta, mu) = (prep.eta, prep.mu);
    let corrections = prep
        .system_sites()
        .iter()
        .map(|&site| SiteCorrection {
            site,
            q: 0.5 * ((-mu).exp() - (-eta).exp()),
            p: 0.5 * (mu.exp() - eta.exp()),
        })
        .collect();
    Ok(CovarianceSplit {
        sites: params.sites(),
        bath_q: 0.5 * (-eta).exp(),
        bath_p: 0.5 * eta.exp(),
        corrections,
    })
}

/// `V(t) = S V(0) S^T`.
pub fn evolve(v0: &CovarianceMatrix, s: &Propagator) -> Result<CovarianceMatrix> {
    let sm = s.matrix();
    if sm.nrows() != v0.dim() {
        return Err(Error::DimensionMismatch {
            expected: v0.dim(),
            found: sm.nrows(),
        });
    }
    Ok(CovarianceMatrix::from_symmetrized(sm * &v0.data * sm.transpose()))
}

/// Reduced covariance on `rows.sites()` after evolving a state whose initial
/// covariance is diagonal (every squeezed product state is). Equivalent to
/// `evolve` followed by `submatrix`, without forming any `2N x 2N` matrix.
pub fn evolve_rows(rows: &PropagatorRows, initial_diagonal: &[f64]) -> Result<CovarianceMatrix> {
    let r = rows.rows();
    if r.ncols() != initial_diagonal.len() {
        return Err(Error::DimensionMismatch {
            expected: r.ncols(),
            found: initial_diagonal.len(),
        });
    }
    let mut weighted = r.clone();
    for (j, mut col) in weighted.column_iter_mut().enumerate() {
        col *= initial_diagonal[j];
    }
    Ok(CovarianceMatrix::from_symmetrized(weighted * r.transpose()))
}

/// A reduced state with its spectral diagnostics.
#[derive(Debug, Clone)]
pub struct SubsystemState {
    pub sites: Vec<usize>,
    pub covariance: CovarianceMatrix,
    pub purity: f64,
    pub entropy: f64,
    pub symplectic_eigs: Vec<f64>,
}

impl SubsystemState {
    /// Wraps an already-reduced covariance whose modes correspond to `sites`.
    pub fn from_covariance(sites: Vec<usize>, covariance: CovarianceMatrix) -> Result<Self> {
        if sites.len() != covariance.modes() {
            return Err(Error::DimensionMismatch {
                expected: covariance.modes(),
                found: sites.len(),
            });
        }
        let symplectic_eigs = covariance.symplectic_eigenvalues()?;
        if let Some(&d) = symplectic_eigs.first() {
            if d < 0.5 - PURITY_TOLERANCE {
                return Err(Error::Unphysical(format!(
                    "symplectic eigenvalue {d} violates the uncertainty bound 1/2"
                )));
            }
        }
        let purity = covariance.purity()?;
        let entropy = von_neumann_entropy(&symplectic_eigs)?;
        Ok(Self {
            sites,
            covariance,
            purity,
            entropy,
            symplectic_eigs,
        })
    }
}

pub fn reduce_subsystem(v: &CovarianceMatrix, sites: &[usize]) -> Result<SubsystemState> {
    let sub = v.submatrix(sites)?;
    SubsystemState::from_covariance(sites.to_vec(), sub)
}

/// Symplectic eigenvalues `d_k` (ascending): the moduli of the eigenvalues
/// `+- i d_k` of `Gamma V`.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = v.nrows();
    if dim == 0 || !dim.is_multiple_of(2) || v.ncols() != dim {
        return Err(Error::OddDimension(dim));
    }
    if Cholesky::new(v.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let n = dim / 2;
    let gv = commutation_matrix(n) * v;
    let eigs = gv.complex_eigenvalues();

    let scale = v.amax().max(1.0);
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for z in eigs.iter() {
        if z.re.abs() > PAIRING_TOLERANCE * scale {
            return Err(Error::UnpairedSpectrum(z.re.abs()));
        }
        if z.im >= 0.0 {
            upper.push(z.im);
        } else {
            lower.push(-z.im);
        }
    }
    if upper.len() != lower.len() {
        // a pair straddling zero imaginary part cannot happen for V > 0
        return Err(Error::UnpairedSpectrum(f64::NAN));
    }
    upper.sort_by(f64::total_cmp);
    lower.sort_by(f64::total_cmp);
    let mismatch = upper
        .iter()
        .zip(&lower)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if mismatch > PAIRING_TOLERANCE * scale {
        return Err(Error::UnpairedSpectrum(mismatch));
    }
    Ok(upper.iter().zip(&lower).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Entropy of one thermal-like mode with purity `nu`:
/// `S = ((1-nu)/(2nu)) ln((1+nu)/(1-nu)) - ln(2nu/(1+nu))`.
///
/// For `nu` within 1e-6 of one the closed form loses digits to `ln(1-nu)`,
/// so the expansion `S = n - n ln n + n^2/2` in the occupation
/// `n = (1-nu)/(2nu)` is used instead (truncation error below `n^3`).
pub fn single_mode_entropy(nu: f64) -> Result<f64> {
    if nu.is_nan() || nu <= 0.0 || nu > 1.0 + PURITY_TOLERANCE {
        return Err(Error::Unphysical(format!("single-mode purity {nu} outside (0, 1]")));
    }
    if nu >= 1.0 {
        return Ok(0.0);
    }
    if nu > ENTROPY_SERIES_THRESHOLD {
        let occ = (1.0 - nu) / (2.0 * nu);
        return Ok(occ - occ * occ.ln() + 0.5 * occ * occ);
    }
    Ok((1.0 - nu) / (2.0 * nu) * ((1.0 + nu) / (1.0 - nu)).ln() - (2.0 * nu / (1.0 + nu)).ln())
}

/// Multi-mode entropy: the single-mode entropy summed over the symplectic
/// spectrum, each mode contributing with purity `1/(2 d_k)`. This is the
/// standard Williamson-normal-form extension of the one-mode formula.
pub fn von_neumann_entropy(symplectic_eigs: &[f64]) -> Result<f64> {
    symplectic_eigs
        .iter()
        .map(|&d| single_mode_entropy(1.0 / (2.0 * d)))
        .sum()
}
