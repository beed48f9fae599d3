//! First-order geometric quantities: measures, `R`, `H0`, `M0^-` and the
//! deficit `delta = int (H0 - H)^+`.

use serde::{Deserialize, Serialize};

use super::boundary::BoundarySample;
use super::domain::ImplicitDomain;
use super::family::{Family, Shape};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::vecmath::{dist, unit_ball_volume};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub dim: usize,
    pub volume: f64,
    pub perimeter: f64,
    pub diameter: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    pub m0_minus: f64,
    pub delta: f64,
    pub l1_deviation: f64,
    /// Discrete curvature measure: `(H_k, w_k)` pairs.
    #[serde(skip)]
    pub curvature_measure: Vec<(f64, f64)>,
    pub closed_form: bool,
}

/// `(a - b)^+` with differences at rounding level treated as zero.
pub fn positive_part_floored(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()) {
        0.0
    } else {
        d.max(0.0)
    }
}

impl GeometricSummary {
    /// Assemble from measures and a curvature measure.
    pub fn from_measure(dim: usize, volume: f64, perimeter: f64, diameter: f64, pairs: Vec<(f64, f64)>, closed_form: bool) -> Self {
        let r = dim as f64 * volume / perimeter;
        let h0 = 1.0 / r;
        let delta_terms: Vec<f64> = pairs.iter().map(|&(h, w)| positive_part_floored(h0, h) * w).collect();
        let l1_terms: Vec<f64> = pairs.iter().map(|&(h, w)| (h0 - h).abs() * w).collect();
        let m0_minus = pairs.iter().map(|&(h, _)| (-h).max(0.0)).fold(0.0, f64::max);
        GeometricSummary {
            dim,
            volume,
            perimeter,
            diameter,
            r,
            h0,
            m0_minus,
            delta: crate::vecmath::det_sum(&delta_terms),
            l1_deviation: crate::vecmath::det_sum(&l1_terms),
            curvature_measure: pairs,
            closed_form,
        }
    }

    /// `||H0 - H||_{L^p(dOmega)}`.
    pub fn lp_deviation(&self, p: f64) -> f64 {
        let terms: Vec<f64> = self
            .curvature_measure
            .iter()
            .map(|&(h, w)| (self.h0 - h).abs().powf(p) * w)
            .collect();
        crate::vecmath::det_sum(&terms).powf(1.0 / p)
    }

    /// Isoperimetric radius `(|Omega|/|B_1|)^{1/N}`.
    pub fn isoperimetric_radius(&self) -> f64 {
        (self.volume / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64)
    }
}

/// Summary of a grid-resolved domain from a boundary sample.
pub fn geometric_summary(domain: &ImplicitDomain, sample: &BoundarySample) -> Result<GeometricSummary> {
    let shape = &domain.shape;
    let volume = match shape.closed_form_volume() {
        Some(v) => v,
        None => quadrature::volume(&domain.grid, &domain.phi),
    };
    let perimeter = shape.closed_form_perimeter().unwrap_or_else(|| sample.total_weight());
    let diameter = match shape.closed_form_diameter() {
        Some(d) => d,
        None => sample_diameter(sample),
    };
    let pairs = sample
        .mean_curvature
        .iter()
        .zip(&sample.weights)
        .map(|(&h, &w)| (h, w))
        .collect();
    Ok(GeometricSummary::from_measure(shape.dim, volume, perimeter, diameter, pairs, false))
}

/// Largest pairwise distance between boundary samples.
pub fn sample_diameter(sample: &BoundarySample) -> f64 {
    let p = &sample.points;
    let mut d: f64 = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            d = d.max(dist(p[i], p[j]));
        }
    }
    d
}

/// Summary from closed forms only (annulus family).
pub fn closed_form_summary(shape: &Shape) -> Result<GeometricSummary> {
    match shape.family {
        Family::Annulus { r_out, r_in } => {
            let n = shape.dim;
            let c = n as f64 * unit_ball_volume(n);
            let pairs = vec![
                (1.0 / r_out, c * r_out.powi(n as i32 - 1)),
                (-1.0 / r_in, c * r_in.powi(n as i32 - 1)),
            ];
            Ok(GeometricSummary::from_measure(
                n,
                shape.closed_form_volume().unwrap_or(f64::NAN),
                shape.closed_form_perimeter().unwrap_or(f64::NAN),
                2.0 * r_out,
                pairs,
                true,
            ))
        }
        _ => Err(Error::Precondition(format!(
            "closed-form summary is only available for the annulus family, not `{}`",
            shape.tag().name()
        ))),
    }
}

/// Dilate so that `R = 1`; returns the new shape and the factor `R` that was
/// divided out.
pub fn rescale_to_unit_r(shape: &Shape, summary: &GeometricSummary) -> Result<(Shape, f64)> {
    if !(summary.r > 0.0 && summary.r.is_finite()) {
        return Err(Error::Precondition(format!("R must be positive, got {}", summary.r)));
    }
    let scale = summary.r;
    if scale == 1.0 {
        return Ok((shape.clone(), 1.0));
    }
    Ok((shape.scaled(1.0 / scale), scale))
}
