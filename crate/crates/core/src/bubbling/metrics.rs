//! Closeness of a union of balls to the domain.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::boundary::icosphere;
use crate::geometry::domain::ImplicitDomain;
use crate::geometry::summary::GeometricSummary;
use crate::quadrature::volume;
use crate::vecmath::{add, dist, scale, unit_ball_volume, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub z: Point,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BubbleMetrics {
    /// `|Omega| - sum |B_i|`.
    pub sym_diff: f64,
    /// Grid quadrature of `Omega \ F`, as a cross-check.
    pub sym_diff_grid: f64,
    /// `max_{dF} dist(., dOmega)`.
    pub hausdorff: f64,
    pub perim_f: f64,
    pub perim_diff: f64,
    pub radius_errors: Vec<f64>,
    pub radius_err_max: f64,
    /// Largest protrusion of any ball beyond the boundary (negative if inside).
    pub containment_depth: f64,
    /// Largest pairwise overlap `rho_i + rho_j - |z_i - z_j|` (negative if apart).
    pub overlap_depth: f64,
}

/// Points on the sphere `|x - z| = rho` at spacing about `spacing`.
pub fn sphere_samples(dim: usize, ball: &Ball, spacing: f64) -> Vec<Point> {
    if dim == 2 {
        let n = ((2.0 * PI * ball.rho / spacing).ceil() as usize).max(64);
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                add(ball.z, [ball.rho * t.cos(), ball.rho * t.sin(), 0.0])
            })
            .collect()
    } else {
        let mut sub = 2;
        // an icosphere of level s has ~ 10 * 4^s vertices
        while sub < 6 && 10.0 * 4f64.powi(sub as i32) * spacing * spacing < 4.0 * PI * ball.rho * ball.rho {
            sub += 1;
        }
        icosphere(sub)
            .0
            .into_iter()
            .map(|u| add(ball.z, scale(u, ball.rho)))
            .collect()
    }
}

fn signed_phi(domain: &ImplicitDomain, x: Point) -> f64 {
    if domain.shape.level_is_exact_distance() {
        domain.shape.level(x)
    } else {
        domain.grid.interpolate(&domain.phi, x)
    }
}

/// Tolerance on protrusion and overlap, in cells.
pub const GEOMETRY_TOL_CELLS: f64 = 0.1;

/// Metrics of the union `F` of `balls` against the domain. Fails with
/// `ContainmentViolation`/`OverlapViolation` if the balls are not disjoint
/// and inside beyond `0.1 h`.
pub fn bubble_metrics(
    domain: &ImplicitDomain,
    summary: &GeometricSummary,
    balls: &[Ball],
) -> Result<BubbleMetrics> {
    let m = compute_metrics(domain, summary, balls);
    let tol = GEOMETRY_TOL_CELLS * domain.h();
    if m.containment_depth > tol {
        let ball = worst_containment(domain, balls).0;
        return Err(Error::ContainmentViolation {
            ball,
            depth: m.containment_depth,
        });
    }
    if m.overlap_depth > tol {
        let (i, j) = worst_overlap(balls).0;
        return Err(Error::OverlapViolation {
            i,
            j,
            depth: m.overlap_depth,
        });
    }
    Ok(m)
}

fn worst_containment(domain: &ImplicitDomain, balls: &[Ball]) -> (usize, f64) {
    let spacing = 0.5 * domain.h();
    let mut worst = (0, f64::NEG_INFINITY);
    for (k, b) in balls.iter().enumerate() {
        for x in sphere_samples(domain.dim(), b, spacing) {
            let p = signed_phi(domain, x);
            if p > worst.1 {
                worst = (k, p);
            }
        }
    }
    worst
}

fn worst_overlap(balls: &[Ball]) -> ((usize, usize), f64) {
    let mut worst = ((0, 0), f64::NEG_INFINITY);
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let d = balls[i].rho + balls[j].rho - dist(balls[i].z, balls[j].z);
            if d > worst.1 {
                worst = ((i, j), d);
            }
        }
    }
    worst
}

/// Metrics without the validity checks; `F` may overlap or protrude.
pub fn compute_metrics(domain: &ImplicitDomain, summary: &GeometricSummary, balls: &[Ball]) -> BubbleMetrics {
    let dim = domain.dim();
    let b1 = unit_ball_volume(dim);
    let n = dim as f64;
    let vol_f: f64 = balls.iter().map(|b| b1 * b.rho.powi(dim as i32)).sum();
    let perim_f: f64 = balls.iter().map(|b| n * b1 * b.rho.powi(dim as i32 - 1)).sum();
    let grid = &domain.grid;
    let level: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let d_f = balls
                .iter()
                .map(|b| dist(x, b.z) - b.rho)
                .fold(f64::INFINITY, f64::min);
            domain.phi[i].max(-d_f)
        })
        .collect();
    let sym_diff_grid = volume(grid, &level);
    let spacing = 0.5 * domain.h();
    let mut hausdorff = 0.0f64;
    for b in balls {
        for x in sphere_samples(dim, b, spacing) {
            hausdorff = hausdorff.max(domain.distance(x));
        }
    }
    let r = summary.r;
    let radius_errors: Vec<f64> = balls.iter().map(|b| (b.rho - r).abs()).collect();
    let radius_err_max = radius_errors.iter().cloned().fold(0.0, f64::max);
    BubbleMetrics {
        sym_diff: summary.volume - vol_f,
        sym_diff_grid,
        hausdorff,
        perim_f,
        perim_diff: (summary.perimeter - perim_f).abs(),
        radius_errors,
        radius_err_max,
        containment_depth: if balls.is_empty() { f64::NEG_INFINITY } else { worst_containment(domain, balls).1 },
        overlap_depth: worst_overlap(balls).1,
    }
}
