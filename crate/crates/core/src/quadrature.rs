//! Composite Gauss-Legendre quadrature for smooth, oscillatory integrands.
//!
//! The interval is cut into equal panels, each integrated with a fixed
//! 16-point rule. The starting panel count comes from a caller-supplied
//! estimate of how many oscillation periods the integrand has on the
//! interval (at least 8 nodes per period); the count is then doubled until
//! two successive estimates agree to the requested absolute tolerance.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

pub const NODES_PER_PANEL: usize = 16;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_EVALUATIONS: usize = 1 << 20;
const MIN_PANELS: usize = 4;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(NODES_PER_PANEL).unwrap()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    tolerance: f64,
    max_evaluations: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }
}

/// Converged value plus the panel count that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub panels: usize,
    pub evaluations: usize,
}

impl Quadrature {
    pub fn new(tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::invalid("tolerance", format!("must be positive, got {tolerance}")));
        }
        Ok(Self {
            tolerance,
            ..Self::default()
        })
    }

    pub fn with_max_evaluations(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_evaluations(&self) -> usize {
        self.max_evaluations
    }

    /// Fixed composite rule with `panels` equal panels.
    pub fn composite<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: &F) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * width;
                rule().integrate(lo, lo + width, f)
            })
            .sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, periods: f64, f: F) -> Result<Estimate> {
        let start = ((2.0 * periods.max(0.0) * 8.0 / NODES_PER_PANEL as f64).ceil() as usize).max(MIN_PANELS);
        let mut panels = start;
        let mut evaluations = panels * NODES_PER_PANEL;
        let mut coarse = Self::composite(a, b, panels, &f);
        loop {
            let fine_panels = 2 * panels;
            evaluations += fine_panels * NODES_PER_PANEL;
            if evaluations > self.max_evaluations {
                return Err(Error::NonConvergence {
                    evaluations,
                    last_change: f64::NAN,
                });
            }
            let fine = Self::composite(a, b, fine_panels, &f);
            let change = (fine - coarse).abs();
            if change <= self.tolerance {
                return Ok(Estimate {
                    value: fine,
                    panels: fine_panels,
                    evaluations,
                });
            }
            if evaluations + 2 * fine_panels * NODES_PER_PANEL > self.max_evaluations {
                return Err(Error::NonConvergence {
                    evaluations,
                    last_change: change,
                });
            }
            panels = fine_panels;
            coarse = fine;
        }
    }
}
