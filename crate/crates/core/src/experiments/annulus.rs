//! Closed-form annuli `B_{r_out} \ B_eps`: the curvature deficit vanishes as
//! `eps -> 0` while the negative curvature blows up and no family of balls
//! inside the domain can approach it.

use serde::{Deserialize, Serialize};

use crate::bubbling::ConstantsLedger;
use crate::error::{Error, Result};
use crate::geometry::{closed_form_summary, Family, Shape};
use crate::tubular::{annulus_tubular_reports, TubularReport};
use crate::vecmath::unit_ball_volume;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusRow {
    pub epsilon: f64,
    pub delta: f64,
    pub m0_minus: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    /// Exact `max |grad u|` of the radial torsion function.
    pub g: f64,
    /// Smallest `|rho - R|` over balls inside the domain: `R - (r_out - eps)/2`.
    pub radius_gap_lower: f64,
    /// Volume of the hole, which any union of balls covering it must add.
    pub hole_volume: f64,
    /// `C10 delta^(alpha/4)`, the radius tolerance the constants would allow.
    pub radius_bound: f64,
    pub min_threshold: f64,
    pub below_thresholds: bool,
    pub tubular: Vec<TubularReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusTable {
    pub dim: usize,
    pub r_out: f64,
    /// Rows in the given (decreasing) order of `eps`.
    pub rows: Vec<AnnulusRow>,
    /// `delta` strictly decreases along the rows.
    pub delta_monotone: bool,
    /// `M0 = 1/eps` strictly increases along the rows.
    pub m0_diverging: bool,
}

/// `max |u'|` for `u = r^2/2 + A + B r^{2-N}` vanishing at both radii.
pub fn annulus_gradient_bound(dim: usize, r_in: f64, r_out: f64) -> f64 {
    let p = 2.0 - dim as f64;
    // u(r_in) = u(r_out) = 0 gives B (r_out^p - r_in^p) = -(r_out^2 - r_in^2)/2.
    let b = -(r_out * r_out - r_in * r_in) / 2.0 / (r_out.powf(p) - r_in.powf(p));
    let du = |r: f64| r + b * p * r.powf(p - 1.0);
    // u' is increasing, so the extremes sit at the ends.
    du(r_in).abs().max(du(r_out).abs())
}

pub fn annulus_necessity(dim: usize, r_out: f64, epsilons: &[f64], etas: &[f64]) -> Result<AnnulusTable> {
    if dim != 3 {
        return Err(Error::UnsupportedDimension {
            dim,
            context: "annulus necessity table (N = 3 only)".into(),
        });
    }
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e < r_out)) {
        return Err(Error::ConfigParse(format!("epsilons must lie in (0, {r_out})")));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ConfigParse("epsilons must be strictly decreasing".into()));
    }
    let b1 = unit_ball_volume(dim);
    let mut rows = vec![];
    for &eps in epsilons {
        let shape = Shape::new(dim, Family::Annulus { r_out, r_in: eps })?;
        let s = closed_form_summary(&shape)?;
        let g = annulus_gradient_bound(dim, eps, r_out);
        let ledger = ConstantsLedger::new(dim, s.diameter, s.m0_minus, g, s.volume, None);
        rows.push(AnnulusRow {
            epsilon: eps,
            delta: s.delta,
            m0_minus: s.m0_minus,
            r: s.r,
            h0: s.h0,
            g,
            radius_gap_lower: s.r - (r_out - eps) / 2.0,
            hole_volume: b1 * eps.powi(dim as i32),
            radius_bound: ledger.c10 * s.delta.powf(ledger.alpha / 4.0),
            min_threshold: ledger.min_threshold(),
            below_thresholds: ledger.below_thresholds(s.delta),
            tubular: annulus_tubular_reports(&shape, &s, etas)?,
        });
    }
    Ok(AnnulusTable {
        dim,
        r_out,
        delta_monotone: rows.windows(2).all(|w| w[1].delta < w[0].delta),
        m0_diverging: rows.windows(2).all(|w| w[1].m0_minus > w[0].m0_minus),
        rows,
    })
}
