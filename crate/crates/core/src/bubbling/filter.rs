//! Selection of the balls that approximate the domain.

use serde::{Deserialize, Serialize};

use super::decomposition::Component;
use super::ledger::ConstantsLedger;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Radii compared against the ledger constants.
    Paper,
    /// Keep components with `rho_int >= R/2`.
    #[default]
    Empirical,
}

impl std::str::FromStr for FilterMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(FilterMode::Paper),
            "empirical" => Ok(FilterMode::Empirical),
            other => Err(Error::ConfigParse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FilterResult {
    pub mode: FilterMode,
    pub retained: Vec<usize>,
    pub discarded: Vec<usize>,
    /// Components matching neither predicate (paper mode only).
    pub unclassified: Vec<usize>,
    pub m: usize,
}

/// Paper-mode predicates are widened by `grid_tol` to absorb discretization
/// error in the measured radii.
pub fn ball_filter(
    components: &[Component],
    r: f64,
    delta: f64,
    ledger: &ConstantsLedger,
    mode: FilterMode,
    grid_tol: f64,
) -> Result<FilterResult> {
    let mut out = FilterResult {
        mode,
        ..Default::default()
    };
    match mode {
        FilterMode::Paper => {
            if delta > 1.0 {
                return Err(Error::Precondition(format!(
                    "paper filter requires delta <= 1, got {delta:.4e}"
                )));
            }
            let n = ledger.dim as f64;
            let keep = ledger.c10 * delta.powf(ledger.alpha / 4.0);
            let drop = ledger.c9 * delta.powf(ledger.alpha / (2.0 * n));
            for c in components {
                if (c.rho_int - r).abs() <= keep + grid_tol {
                    out.retained.push(c.id);
                } else if c.rho_int <= drop + grid_tol {
                    out.discarded.push(c.id);
                } else {
                    out.unclassified.push(c.id);
                }
            }
        }
        FilterMode::Empirical => {
            for c in components {
                if c.rho_int >= 0.5 * r {
                    out.retained.push(c.id);
                } else {
                    out.discarded.push(c.id);
                }
            }
        }
    }
    out.m = out.retained.len();
    Ok(out)
}
