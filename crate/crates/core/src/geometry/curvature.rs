//! Derivatives of the analytic level function and mean/principal curvature.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::family::Shape;
use crate::error::{Error, Result};
use crate::vecmath::{norm, scale, Point};

/// Central-difference gradient of the level function.
pub fn level_gradient(shape: &Shape, x: Point) -> Point {
    let s = 1e-6 * shape.length_scale();
    let mut g = [0.0; 3];
    for d in 0..shape.dim {
        let mut xp = x;
        let mut xm = x;
        xp[d] += s;
        xm[d] -= s;
        g[d] = (shape.level(xp) - shape.level(xm)) / (2.0 * s);
    }
    g
}

/// Central-difference Hessian of the level function.
pub fn level_hessian(shape: &Shape, x: Point) -> [[f64; 3]; 3] {
    let s = 1e-4 * shape.length_scale();
    let n = shape.dim;
    let f0 = shape.level(x);
    let mut hm = [[0.0; 3]; 3];
    let at = |a: usize, da: f64, b: usize, db: f64| {
        let mut y = x;
        y[a] += da;
        y[b] += db;
        shape.level(y)
    };
    for a in 0..n {
        hm[a][a] = (at(a, s, a, 0.0) - 2.0 * f0 + at(a, -s, a, 0.0)) / (s * s);
        for b in a + 1..n {
            let v = (at(a, s, b, s) - at(a, s, b, -s) - at(a, -s, b, s) + at(a, -s, b, -s)) / (4.0 * s * s);
            hm[a][b] = v;
            hm[b][a] = v;
        }
    }
    hm
}

/// Outward unit normal `grad(level)/|grad(level)|`, with the gradient norm.
pub fn unit_normal(shape: &Shape, x: Point) -> (Point, f64) {
    let g = level_gradient(shape, x);
    let gn = norm(g);
    (scale(g, 1.0 / gn), gn)
}

/// Mean curvature (average of principal curvatures) by differencing the
/// level function; a ball of radius `rho` gets `1/rho`.
pub fn differenced_mean_curvature(shape: &Shape, x: Point) -> Result<f64> {
    let n = shape.dim;
    let g = level_gradient(shape, x);
    let gn = norm(g);
    if !(gn >= 0.5) {
        return Err(Error::CurvatureSingularity { point: x, grad_norm: gn });
    }
    let hm = level_hessian(shape, x);
    let lap: f64 = (0..n).map(|d| hm[d][d]).sum();
    let mut ghg = 0.0;
    for a in 0..n {
        for b in 0..n {
            ghg += g[a] * hm[a][b] * g[b];
        }
    }
    Ok((lap / gn - ghg / gn.powi(3)) / (n - 1) as f64)
}

/// Mean curvature at a point within `h` of the boundary. Closed forms are
/// used where the family has one.
pub fn mean_curvature(shape: &Shape, x: Point, h: f64) -> Result<f64> {
    let phi = shape.level(x);
    if phi.abs() > h {
        return Err(Error::OffBoundary { point: x, phi: phi.abs(), h });
    }
    let (_, gn) = unit_normal(shape, x);
    if !(gn >= 0.5) {
        return Err(Error::CurvatureSingularity { point: x, grad_norm: gn });
    }
    match shape.closed_form_curvature(x) {
        Some(k) => Ok(k),
        None => differenced_mean_curvature(shape, x),
    }
}

/// Principal curvatures `k_1 <= ... <= k_{N-1}`.
pub fn principal_curvatures(shape: &Shape, x: Point) -> Result<Vec<f64>> {
    if shape.dim == 2 {
        let h = match shape.closed_form_curvature(x) {
            Some(k) => k,
            None => differenced_mean_curvature(shape, x)?,
        };
        return Ok(vec![h]);
    }
    if let Some(k) = shape.closed_form_curvature(x) {
        if shape.level_is_exact_distance() {
            return Ok(vec![k, k]);
        }
    }
    let g = level_gradient(shape, x);
    let gn = norm(g);
    if !(gn >= 0.5) {
        return Err(Error::CurvatureSingularity { point: x, grad_norm: gn });
    }
    let nrm = Vector3::new(g[0], g[1], g[2]) / gn;
    let hm = level_hessian(shape, x);
    let hmat = Matrix3::from_fn(|i, j| hm[i][j]);
    let p = Matrix3::identity() - nrm * nrm.transpose();
    let shape_op = p * hmat * p / gn;
    let sym = (shape_op + shape_op.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    // drop the eigenpair aligned with the normal
    let drop = (0..3)
        .max_by(|&a, &b| {
            let ca = eig.eigenvectors.column(a).dot(&nrm).abs();
            let cb = eig.eigenvectors.column(b).dot(&nrm).abs();
            ca.total_cmp(&cb)
        })
        .unwrap_or(0);
    let mut ks: Vec<f64> = (0..3).filter(|&i| i != drop).map(|i| eig.eigenvalues[i]).collect();
    ks.sort_by(f64::total_cmp);
    Ok(ks)
}
