//! The four data-producing modes. Grid points are computed on the current
//! rayon pool and collected in grid order.

use harmonic_chain::chain::{mode_spectrum, propagator_rows, verify_symplectic_rows, ChainParams};
use harmonic_chain::continuum::{
    covariance_element_continuum, steady_state_covariance, Block, ContinuumParams, CsEvaluator,
};
use harmonic_chain::diagnostics::{
    effective_beta, mean_occupation, ppt_threshold, simon_threshold, EquilibriumReport,
};
use harmonic_chain::gaussian::{evolve_rows, PrepSpec, SubsystemState};
use harmonic_chain::{max_abs, CovarianceMatrix, Quadrature};
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Row;

/// Rows plus the non-fatal failures met while producing them.
#[derive(Debug, Default)]
pub struct Table {
    pub rows: Vec<Row>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

fn labels(sites: &[usize]) -> Vec<String> {
    let q = sites.iter().map(|s| format!("q{s}"));
    let p = sites.iter().map(|s| format!("p{s}"));
    q.chain(p).collect()
}

fn push_entries(row: &mut Row, prefix: &str, names: &[String], v: &DMatrix<f64>) {
    for i in 0..names.len() {
        for j in i..names.len() {
            row.push(format!("{prefix}v_{}_{}", names[i], names[j]), v[(i, j)]);
        }
    }
}

/// Purity, entropy and symplectic spectrum, or NaNs when `v` is not a
/// physical covariance matrix.
fn push_state(row: &mut Row, sites: &[usize], v: &DMatrix<f64>) {
    let state = CovarianceMatrix::new(v.clone()).and_then(|c| SubsystemState::from_covariance(sites.to_vec(), c));
    match state {
        Ok(s) => {
            row.push("physical", true);
            row.push("purity", s.purity);
            row.push("entropy", s.entropy);
            for (k, d) in s.symplectic_eigs.iter().enumerate() {
                row.push(format!("d{}", k + 1), *d);
            }
        }
        Err(_) => {
            row.push("physical", false);
            row.push("purity", f64::NAN);
            row.push("entropy", f64::NAN);
            for k in 0..sites.len() {
                row.push(format!("d{}", k + 1), f64::NAN);
            }
        }
    }
}

fn config_error(err: harmonic_chain::Error) -> CliError {
    CliError::Config(err.to_string())
}

pub fn run_finite(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg
        .sites
        .ok_or_else(|| CliError::Config("chain.sites: required in finite mode".into()))?;
    let params = ChainParams::new(n, cfg.coupling.epsilon, cfg.coupling.omega).map_err(config_error)?;
    let spectrum = mode_spectrum(&params);
    let prep = PrepSpec::new(cfg.eta, cfg.mu, cfg.system_sites.clone()).map_err(config_error)?;
    let diag = prep.initial_diagonal(&params).map_err(config_error)?;
    let sites = &cfg.system_sites;
    let names = labels(sites);
    let rate = cfg.coupling.gamma() * cfg.coupling.big_omega();

    let rows: Vec<Result<Row, CliError>> = cfg
        .time
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(step, t)| {
            let at = |e| CliError::at_step(step, t, e);
            let rows = propagator_rows(&params, &spectrum, t, sites).map_err(at)?;
            let residual = verify_symplectic_rows(&rows);
            let v = evolve_rows(&rows, &diag).map_err(at)?;
            let state = SubsystemState::from_covariance(sites.clone(), v).map_err(at)?;
            let mut row = Row::new();
            row.push("step", step);
            row.push("t", t);
            row.push("gamma_Omega_t", rate * t);
            row.push("purity", state.purity);
            row.push("entropy", state.entropy);
            for (k, d) in state.symplectic_eigs.iter().enumerate() {
                row.push(format!("d{}", k + 1), *d);
            }
            row.push("symplectic_residual", residual);
            push_entries(&mut row, "", &names, state.covariance.matrix());
            Ok(row)
        })
        .collect();
    Ok(Table {
        rows: rows.into_iter().collect::<Result<_, _>>()?,
        ..Table::default()
    })
}

/// Reduced continuum covariance built element by element; failed elements
/// are NaN and described in the returned messages.
fn continuum_matrix<E: CsEvaluator>(
    sites: &[usize],
    t: f64,
    params: &ContinuumParams,
    evaluator: &E,
    label: &str,
) -> (DMatrix<f64>, Vec<String>) {
    let n = sites.len();
    let mut v = DMatrix::from_element(2 * n, 2 * n, f64::NAN);
    let mut failures = Vec::new();
    let mut element = |block: Block, i: usize, j: usize| -> f64 {
        covariance_element_continuum(block, sites[i], sites[j], t, params, evaluator).unwrap_or_else(|e| {
            failures.push(format!("{label} {block:?}[{},{}] at t = {t}: {e}", sites[i], sites[j]));
            f64::NAN
        })
    };
    for i in 0..n {
        for j in 0..n {
            if j >= i {
                let qq = element(Block::QQ, i, j);
                let pp = element(Block::PP, i, j);
                v[(i, j)] = qq;
                v[(j, i)] = qq;
                v[(n + i, n + j)] = pp;
                v[(n + j, n + i)] = pp;
            }
            let qp = element(Block::QP, i, j);
            v[(i, n + j)] = qp;
            v[(n + j, i)] = qp;
        }
    }
    (v, failures)
}

pub fn run_continuum(cfg: &RunConfig) -> Result<Table, CliError> {
    let gamma = cfg.coupling.gamma();
    let big_omega = cfg.coupling.big_omega();
    let params =
        ContinuumParams::new(cfg.eta, cfg.mu, gamma, big_omega, cfg.system_sites.clone()).map_err(config_error)?;
    let quadrature = Quadrature::new(cfg.quadrature_tol).map_err(config_error)?;
    let exact = params.quadrature_evaluator(quadrature);
    let weak = params.weak_coupling_evaluator();
    let sites = &cfg.system_sites;
    let names = labels(sites);
    let (relaxed, relaxed_failures) =
        continuum_matrix(sites, 0.0, &params, &params.long_time_evaluator(quadrature), "long-time");

    let results: Vec<(Row, Vec<String>)> = cfg
        .time
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(step, t)| {
            let (v, mut failures) = continuum_matrix(sites, t, &params, &exact, "quadrature");
            let mut row = Row::new();
            row.push("step", step);
            row.push("t", t);
            row.push("gamma_Omega_t", gamma * big_omega * t);
            push_state(&mut row, sites, &v);
            row.push("distance_to_relaxed", max_abs(&(&v - &relaxed)));
            push_entries(&mut row, "", &names, &v);
            if cfg.weak_coupling {
                let (w, more) = continuum_matrix(sites, t, &params, &weak, "weak-coupling");
                failures.extend(more);
                row.push("wc_rel_diff", max_abs(&(&w - &v)) / max_abs(&v));
                push_entries(&mut row, "wc_", &names, &w);
            }
            row.push("failed_elements", failures.len());
            (row, failures)
        })
        .collect();

    let mut table = Table {
        failures: relaxed_failures,
        ..Table::default()
    };
    for (row, failures) in results {
        table.rows.push(row);
        table.failures.extend(failures);
    }
    Ok(table)
}

pub fn run_steady(cfg: &RunConfig) -> Result<Table, CliError> {
    let gamma = cfg.coupling.gamma();
    let modes = cfg.system_sites.len();
    let v = steady_state_covariance(modes, cfg.eta, gamma).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut row = Row::new();
    row.push("eta", cfg.eta);
    row.push("gamma", gamma);
    row.push("beta", effective_beta(cfg.eta).unwrap_or(f64::INFINITY));
    row.push("mean_occupation", mean_occupation(cfg.eta));
    row.push("modes", modes);
    push_state(&mut row, &cfg.system_sites, v.matrix());
    push_entries(&mut row, "", &labels(&cfg.system_sites), v.matrix());
    Ok(Table {
        rows: vec![row],
        ..Table::default()
    })
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: grid missing".into()))?;
    let points: Vec<(f64, f64)> = grid
        .gammas
        .iter()
        .flat_map(|&g| grid.etas.iter().map(move |&e| (g, e)))
        .collect();
    let thresholds: Vec<(f64, f64)> = grid
        .gammas
        .par_iter()
        .map(|&g| {
            (
                simon_threshold(g, grid.bisection_tol).unwrap_or(f64::NAN),
                ppt_threshold(g, grid.bisection_tol).unwrap_or(f64::NAN),
            )
        })
        .collect();
    let reports: Vec<Result<EquilibriumReport, CliError>> = points
        .par_iter()
        .map(|&(g, e)| {
            EquilibriumReport::new(e, g)
                .map_err(|err| CliError::Numerical(format!("eta = {e}, gamma = {g}: {err}")))
        })
        .collect();

    let mut table = Table::default();
    for (k, report) in reports.into_iter().enumerate() {
        let r = report?;
        let (eta_star, eta_star_ppt) = thresholds[k / grid.etas.len()];
        if !r.tests_agree {
            table.warnings.push(format!(
                "eta = {}, gamma = {}: closed-form test says entangled = {}, PPT test says {}",
                r.eta, r.gamma, r.entangled, r.ppt_entangled
            ));
        }
        let mut row = Row::new();
        row.push("gamma", r.gamma);
        row.push("eta", r.eta);
        row.push("beta", r.beta.unwrap_or(f64::INFINITY));
        row.push("mean_occupation", r.mean_occupation);
        row.push("nu1", r.nu1);
        row.push("nu2", r.nu2);
        row.push("entropy1", r.entropy1);
        row.push("simon_value", r.simon_value);
        row.push("entangled", r.entangled);
        row.push("ppt_invariant", r.ppt_invariant);
        row.push("ppt_entangled", r.ppt_entangled);
        row.push("tests_agree", r.tests_agree);
        row.push("eta_star", eta_star);
        row.push("eta_star_ppt", eta_star_ppt);
        table.rows.push(row);
    }
    Ok(table)
}
