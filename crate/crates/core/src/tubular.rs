//! Interior tubular neighbourhoods `{x in Omega : dist(x, dOmega) <= eta}`:
//! measured volumes, the curvature-weighted upper bound, and the small-eta
//! asymptotic `|tube| / eta -> |dOmega|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::domain::ImplicitDomain;
use crate::geometry::family::{Family, Shape};
use crate::geometry::summary::GeometricSummary;
use crate::quadrature::volume;
use crate::vecmath::unit_ball_volume;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubularReport {
    pub eta: f64,
    pub measured: f64,
    /// `(1 + eta M0)^{N-1} |dOmega| eta`.
    pub bound: f64,
    /// `measured / eta`.
    pub ratio: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Cut-cell volume of `{-eta <= phi < 0}`.
pub fn tubular_volume(domain: &ImplicitDomain, eta: f64) -> f64 {
    let inner: Vec<f64> = domain.phi.iter().map(|p| p + eta).collect();
    volume(&domain.grid, &domain.phi) - volume(&domain.grid, &inner)
}

/// Exact tube volume of an annulus `r_in < |x| < r_out`.
pub fn annulus_tubular_volume(shape: &Shape, eta: f64) -> Option<f64> {
    match shape.family {
        Family::Annulus { r_out, r_in } => {
            let n = shape.dim as i32;
            let b1 = unit_ball_volume(shape.dim);
            if 2.0 * eta >= r_out - r_in {
                return Some(b1 * (r_out.powi(n) - r_in.powi(n)));
            }
            Some(b1 * (r_out.powi(n) - (r_out - eta).powi(n) + (r_in + eta).powi(n) - r_in.powi(n)))
        }
        _ => None,
    }
}

fn bound_factor(summary: &GeometricSummary, eta: f64) -> f64 {
    (1.0 + eta * summary.m0_minus).powi(summary.dim as i32 - 1) * summary.perimeter
}

fn report(summary: &GeometricSummary, eta: f64, measured: f64, tolerance: f64) -> TubularReport {
    let bound = bound_factor(summary, eta) * eta;
    TubularReport {
        eta,
        measured,
        bound,
        ratio: measured / eta,
        tolerance,
        holds: measured <= bound + tolerance,
    }
}

/// Measured tube volumes against the bound. The tolerance is the bound's
/// factor times `2h`, the redistancing error budget.
pub fn tubular_reports(domain: &ImplicitDomain, summary: &GeometricSummary, etas: &[f64]) -> Result<Vec<TubularReport>> {
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        if !(eta > 0.0) {
            return Err(Error::Precondition(format!("eta must be positive, got {eta}")));
        }
        let tol = bound_factor(summary, eta) * 2.0 * domain.h();
        out.push(report(summary, eta, tubular_volume(domain, eta), tol));
    }
    Ok(out)
}

/// As [`tubular_reports`], failing with `BoundViolated` on the first
/// violation.
pub fn tubular_bound_check(domain: &ImplicitDomain, summary: &GeometricSummary, etas: &[f64]) -> Result<Vec<TubularReport>> {
    let reports = tubular_reports(domain, summary, etas)?;
    if let Some(r) = reports.iter().find(|r| !r.holds) {
        return Err(Error::BoundViolated {
            inequality: format!("tube volume at eta = {}", r.eta),
            slack: r.bound - r.measured,
            point: None,
        });
    }
    Ok(reports)
}

/// Closed-form reports for the annulus; no grid involved.
pub fn annulus_tubular_reports(shape: &Shape, summary: &GeometricSummary, etas: &[f64]) -> Result<Vec<TubularReport>> {
    etas.iter()
        .map(|&eta| {
            let v = annulus_tubular_volume(shape, eta).ok_or_else(|| {
                Error::Precondition(format!("closed-form tube volume needs an annulus, not `{}`", shape.tag().name()))
            })?;
            Ok(report(summary, eta, v, 1e-12 * summary.volume))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubularAsymptotic {
    pub etas: [f64; 3],
    pub ratios: [f64; 3],
    /// Value at `eta = 0` of the quadratic through the three ratios.
    pub extrapolated: f64,
    pub perimeter: f64,
    pub relative_gap: f64,
}

/// `|tube(eta)|/eta` at `eta = 8h, 4h, 2h`, extrapolated to zero.
pub fn tubular_asymptotic(domain: &ImplicitDomain, summary: &GeometricSummary) -> TubularAsymptotic {
    let h = domain.h();
    let etas = [8.0 * h, 4.0 * h, 2.0 * h];
    let ratios = etas.map(|e| tubular_volume(domain, e) / e);
    // Lagrange value at 0.
    let mut extrapolated = 0.0;
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        extrapolated += ratios[k] * etas[i] * etas[j] / ((etas[k] - etas[i]) * (etas[k] - etas[j]));
    }
    TubularAsymptotic {
        etas,
        ratios,
        extrapolated,
        perimeter: summary.perimeter,
        relative_gap: (extrapolated - summary.perimeter).abs() / summary.perimeter,
    }
}

/// CSV with columns `eta,measured,bound,ratio`.
pub fn write_csv<W: std::io::Write>(reports: &[TubularReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "measured", "bound", "ratio"])?;
    for r in reports {
        w.write_record([r.eta, r.measured, r.bound, r.ratio].map(|v| format!("{v:.12e}")))?;
    }
    w.flush()?;
    Ok(())
}
