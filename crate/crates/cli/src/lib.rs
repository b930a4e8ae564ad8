//! Driver for `hchain`: config resolution, the run modes, tabular output
//! and the `check` invariant suites.

pub mod check;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::fs::File;
use std::io::{BufWriter, Write};

use config::{Mode, RunConfig};
use error::CliError;
use run::Table;

pub fn execute_mode(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.mode {
        Mode::Finite => run::run_finite(cfg),
        Mode::Continuum => run::run_continuum(cfg),
        Mode::Steady => run::run_steady(cfg),
        Mode::Sweep => run::run_sweep(cfg),
        Mode::Check => {
            let results = check::run_all(cfg.seed);
            let failures = results
                .iter()
                .filter(|r| !r.passed())
                .map(|r| format!("suite {} worst {:e} >= tolerance {:e}", r.name, r.worst, r.tolerance))
                .collect();
            Ok(Table {
                rows: results.iter().map(|r| r.to_row()).collect(),
                failures,
                warnings: Vec::new(),
            })
        }
    }
}

/// Runs `cfg` on a bounded pool and writes its table. Non-fatal failures
/// are reported on stderr after the output is complete and turn into a
/// numerical-failure error.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    let table = pool.install(|| execute_mode(cfg))?;

    let write_err = |e: std::io::Error| CliError::Config(format!("output: {e}"));
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Config(format!("output {}: {e}", path.display())))?;
            output::write_table(&table.rows, cfg.format, BufWriter::new(file)).map_err(write_err)?;
        }
        None => {
            let stdout = std::io::stdout();
            match output::write_table(&table.rows, cfg.format, stdout.lock()) {
                // a closed downstream pipe (`| head`) is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other.map_err(write_err)?,
            }
        }
    }

    let mut stderr = std::io::stderr().lock();
    for w in &table.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    for f in &table.failures {
        let _ = writeln!(stderr, "failure: {f}");
    }
    if table.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{} failure(s), see above", table.failures.len())))
    }
}
