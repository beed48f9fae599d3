//! Equal-radius variant: every retained ball replaced by a ball of radius R,
//! then separated until disjoint.

use serde::{Deserialize, Serialize};

use super::metrics::{sphere_samples, Ball};
use crate::checks::Check;
use crate::error::{Error, Result};
use crate::geometry::domain::ImplicitDomain;
use crate::geometry::summary::GeometricSummary;
use crate::quadrature::volume;
use crate::vecmath::{add, dist, normalize, scale, sub, unit_ball_volume};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EqualRadiusFamily {
    pub radius: f64,
    pub balls: Vec<Ball>,
    /// Distance each center moved during separation.
    pub displacements: Vec<f64>,
    pub steps: usize,
    /// `|Omega sym F_hat|`, by grid quadrature.
    pub sym_diff: f64,
    /// `max_{dF_hat} dist(., dOmega)`.
    pub hausdorff: f64,
    pub perim_diff: f64,
    /// `|F sym F_hat|` against the original family.
    pub family_shift: f64,
    pub checks: Vec<Check>,
}

/// Translate overlapping pairs apart along their center line, worst pair
/// first. Fails after `100 m` steps.
pub fn separate(balls: &mut [Ball]) -> Result<usize> {
    let m = balls.len();
    let max_steps = 100 * m.max(1);
    let mut steps = 0;
    loop {
        let mut worst = (0, 0, 0.0);
        for i in 0..m {
            for j in i + 1..m {
                let o = balls[i].rho + balls[j].rho - dist(balls[i].z, balls[j].z);
                if o > worst.2 {
                    worst = (i, j, o);
                }
            }
        }
        let (i, j, o) = worst;
        if o <= 1e-12 * balls.iter().map(|b| b.rho).fold(1.0, f64::max) {
            return Ok(steps);
        }
        if steps >= max_steps {
            return Err(Error::SeparationFailure { steps });
        }
        let mut dir = sub(balls[j].z, balls[i].z);
        if dir.iter().all(|v| *v == 0.0) {
            dir = [1.0, 0.0, 0.0];
        }
        let dir = normalize(dir);
        // Half the overlap each, with a hair of margin.
        let s = 0.5 * o * (1.0 + 1e-9) + 1e-15;
        balls[i].z = sub(balls[i].z, scale(dir, s));
        balls[j].z = add(balls[j].z, scale(dir, s));
        steps += 1;
    }
}

fn union_level(balls: &[Ball], x: [f64; 3]) -> f64 {
    balls
        .iter()
        .map(|b| dist(x, b.z) - b.rho)
        .fold(f64::INFINITY, f64::min)
}

fn sym_diff_levels(domain: &ImplicitDomain, a: &dyn Fn(usize) -> f64, b: &dyn Fn(usize) -> f64) -> f64 {
    let grid = &domain.grid;
    let ab: Vec<f64> = (0..grid.len()).map(|i| a(i).max(-b(i))).collect();
    let ba: Vec<f64> = (0..grid.len()).map(|i| b(i).max(-a(i))).collect();
    volume(grid, &ab) + volume(grid, &ba)
}

pub fn equal_radius_family(
    family: &[Ball],
    r: f64,
    domain: &ImplicitDomain,
    summary: &GeometricSummary,
) -> Result<EqualRadiusFamily> {
    let dim = domain.dim();
    let mut balls: Vec<Ball> = family.iter().map(|b| Ball { z: b.z, rho: r }).collect();
    let steps = separate(&mut balls)?;
    let displacements: Vec<f64> = balls.iter().zip(family).map(|(a, b)| dist(a.z, b.z)).collect();
    let grid = &domain.grid;
    let phi = |i: usize| domain.phi[i];
    let f_hat = |i: usize| union_level(&balls, grid.point(i));
    let f_orig = |i: usize| union_level(family, grid.point(i));
    let sym_diff = sym_diff_levels(domain, &phi, &f_hat);
    let sym_orig = sym_diff_levels(domain, &phi, &f_orig);
    let family_shift = sym_diff_levels(domain, &f_orig, &f_hat);
    let mut hausdorff = 0.0f64;
    for b in &balls {
        for x in sphere_samples(dim, b, 0.5 * domain.h()) {
            hausdorff = hausdorff.max(domain.distance(x));
        }
    }
    let n = dim as f64;
    let perim_hat = balls.len() as f64 * n * unit_ball_volume(dim) * r.powi(dim as i32 - 1);
    let perim_diff = (summary.perimeter - perim_hat).abs();
    let mut checks = vec![Check::le(
        "triangle: |Omega sym F| <= |Omega sym F_hat| + |F sym F_hat|",
        sym_orig,
        sym_diff + family_shift,
        2.0 * domain.h() * summary.perimeter,
    )];
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            checks.push(Check::le(
                format!("balls {i},{j} disjoint"),
                2.0 * r,
                dist(balls[i].z, balls[j].z),
                1e-9 * r,
            ));
        }
    }
    Ok(EqualRadiusFamily {
        radius: r,
        balls,
        displacements,
        steps,
        sym_diff,
        hausdorff,
        perim_diff,
        family_shift,
        checks,
    })
}
