//! Parameter sweeps with a log-log fit of `|Omega sym F|` against `delta`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{analyze, AnalysisReport, PipelineOptions};
use crate::error::{Error, Result};
use crate::geometry::{FamilySpec, Shape};

/// `delta` values below ten times this floor are excluded from the fit.
pub const DELTA_NOISE_FLOOR: f64 = 1e-10;
/// Relative slack allowed before adjacent `delta` values count as inverted.
pub const MONOTONE_NOISE: f64 = 0.05;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Name of the family parameter to vary.
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub delta: f64,
    pub sym_diff: f64,
    pub hausdorff: f64,
    pub perim_diff: f64,
    pub m: usize,
    pub radius_err_max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub param_name: String,
    /// Sorted by parameter, ascending.
    pub rows: Vec<SweepRow>,
    pub fit: Option<SlopeFit>,
    /// Whether `delta` decreases with the parameter (up to the noise slack).
    pub delta_decreasing: bool,
    /// Adjacent parameter pairs where `delta` fails to decrease.
    pub delta_inversions: Vec<(f64, f64)>,
    pub sym_diff_decreasing: bool,
    pub m_values: Vec<usize>,
    pub reports: Vec<AnalysisReport>,
}

/// Least squares `log y = a log x + b` over rows with resolvable `delta`.
pub fn fit_slope(rows: &[SweepRow]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.delta > 10.0 * DELTA_NOISE_FLOOR && r.sym_diff > 0.0)
        .map(|r| (r.delta.ln(), r.sym_diff.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Some(SlopeFit {
        slope,
        intercept,
        residual,
        points: pts.len(),
    })
}

fn with_param(base: &FamilySpec, name: &str, value: f64) -> Result<FamilySpec> {
    let mut spec = base.clone();
    let v = serde_json::Number::from_f64(value)
        .ok_or_else(|| Error::ConfigParse(format!("sweep value {value} is not finite")))?;
    spec.params.insert(name.to_string(), serde_json::Value::Number(v));
    Ok(spec)
}

/// Run the pipeline at every value of `sweep.param`; points run in parallel
/// and are gathered in parameter order.
pub fn neck_sweep(scenario: &str, base: &FamilySpec, sweep: &SweepSpec, opts: &PipelineOptions) -> Result<SweepResult> {
    if sweep.values.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: sweep.values.len(),
        });
    }
    let mut values = sweep.values.clone();
    values.sort_by(f64::total_cmp);
    let shapes: Vec<Shape> = values
        .iter()
        .map(|&v| Shape::from_spec(&with_param(base, &sweep.param, v)?))
        .collect::<Result<_>>()?;
    let reports: Vec<AnalysisReport> = values
        .par_iter()
        .zip(shapes.into_par_iter())
        .map(|(&v, shape)| analyze(&format!("{scenario}[{}={v}]", sweep.param), Some(v), shape, opts))
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| {
            let d = r.decomposition.as_ref();
            SweepRow {
                param: r.param.unwrap_or(f64::NAN),
                delta: r.summary.delta,
                sym_diff: d.map_or(f64::NAN, |d| d.metrics.sym_diff),
                hausdorff: d.map_or(f64::NAN, |d| d.metrics.hausdorff),
                perim_diff: d.map_or(f64::NAN, |d| d.metrics.perim_diff),
                m: d.map_or(0, |d| d.m),
                radius_err_max: d.map_or(f64::NAN, |d| d.metrics.radius_err_max),
            }
        })
        .collect();
    let delta_inversions: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| !(w[0].delta < w[1].delta * (1.0 + MONOTONE_NOISE)))
        .map(|w| (w[0].param, w[1].param))
        .collect();
    let sym_diff_decreasing = rows.windows(2).all(|w| w[0].sym_diff < w[1].sym_diff);
    Ok(SweepResult {
        param_name: sweep.param.clone(),
        fit: fit_slope(&rows),
        delta_decreasing: delta_inversions.is_empty(),
        delta_inversions,
        sym_diff_decreasing,
        m_values: rows.iter().map(|r| r.m).collect(),
        rows,
        reports,
    })
}
