//! Scenario configs, the analysis pipeline, sweeps, the annulus table and
//! report files.

pub mod annulus;
pub mod pipeline;
pub mod report;
pub mod sweep;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FamilySpec;

pub use annulus::{annulus_necessity, AnnulusRow, AnnulusTable};
pub use pipeline::{analyze, AnalysisReport, DecompositionReport, PipelineOptions};
pub use report::{emit_report, Output, Row, ROW_COLUMNS};
pub use sweep::{neck_sweep, SweepResult, SweepRow, SweepSpec};

/// A JSON scenario: a family spec plus pipeline flags and, for the
/// `sweep`/`annulus` commands, their parameter lists.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: FamilySpec,
    #[serde(flatten)]
    pub options: PipelineOptions,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        s.options.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.spec.family.name().to_string())
    }
}

/// Relative residual allowed for the exact identities.
pub const IDENTITY_TOL: f64 = 2e-2;

pub const DEFAULT_EPSILONS: [f64; 7] = [0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Sweep,
    Annulus,
    Identity,
}

/// Execute one command on a scenario.
pub fn run(command: Command, scenario: &Scenario) -> Result<Output> {
    let name = scenario.name();
    let opts = &scenario.options;
    match command {
        Command::Analyze => {
            let shape = crate::geometry::Shape::from_spec(&scenario.spec)?;
            Ok(Output::Analyze { reports: vec![analyze(&name, None, shape, opts)?] })
        }
        Command::Identity => {
            let shape = crate::geometry::Shape::from_spec(&scenario.spec)?;
            let opts = PipelineOptions {
                identities: true,
                decomposition: false,
                equal_radius: false,
                tubular_etas: vec![],
                tubular_asymptotic: false,
                ..opts.clone()
            };
            let mut r = analyze(&name, None, shape, &opts)?;
            if let Some(ids) = &r.identities {
                let residuals = [
                    ("fundamental identity", ids.deficits.fi_residual),
                    ("Pohozaev identity", ids.pohozaev.residual),
                    ("divergence identity", ids.divergence.residual),
                ];
                for (what, res) in residuals {
                    if !(res <= IDENTITY_TOL) {
                        r.violations.push(format!("{what}: relative residual {res:.3e} > {IDENTITY_TOL:e}"));
                    }
                }
            }
            Ok(Output::Identity { reports: vec![r] })
        }
        Command::Sweep => {
            let sweep = scenario
                .sweep
                .as_ref()
                .ok_or_else(|| Error::ConfigParse("sweep needs a `sweep` object with `param` and `values`".into()))?;
            Ok(Output::Sweep { scenario: name.clone(), sweep: neck_sweep(&name, &scenario.spec, sweep, opts)? })
        }
        Command::Annulus => {
            if scenario.spec.family != crate::geometry::FamilyTag::Annulus {
                return Err(Error::ConfigParse(format!("annulus needs family `annulus`, got `{}`", scenario.spec.family.name())));
            }
            let r_out = match scenario.spec.params.get("r_out") {
                Some(v) => v.as_f64().ok_or_else(|| Error::ConfigParse("`r_out` must be a number".into()))?,
                None => 2.0,
            };
            let eps = scenario.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
            Ok(Output::Annulus {
                scenario: name,
                table: annulus_necessity(scenario.spec.dim, r_out, &eps, &opts.tubular_etas)?,
            })
        }
    }
}
