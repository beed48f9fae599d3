//! Shortley–Weller discretization of `Laplace u = N`, `u = 0` on the boundary,
//! solved by Jacobi-preconditioned BiCGSTAB.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::family::Shape;
use crate::grid::Grid;
use crate::vecmath::{add, det_dot, scale, sub};

pub const SOLVER_TOL: f64 = 1e-10;
const MIN_ARM: f64 = 1e-8;

/// Fraction of the edge from interior `xi` to exterior `xj` where the level
/// function vanishes.
pub fn edge_crossing(shape: &Shape, xi: [f64; 3], xj: [f64; 3]) -> f64 {
    let dx = sub(xj, xi);
    let f = |t: f64| shape.level(add(xi, scale(dx, t)));
    let (mut a, mut b) = (0.0, 1.0);
    let (mut fa, mut fb) = (f(a), f(b));
    if fb < 0.0 {
        return 1.0;
    }
    // Illinois regula falsi
    let mut side = 0;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc.abs() < 1e-15 || (b - a).abs() < 1e-15 {
            a = c;
            b = c;
            break;
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    (0.5 * (a + b)).clamp(MIN_ARM, 1.0)
}

/// Compressed sparse rows.
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n())
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map(|k| self.vals[k])
                    .unwrap_or(1.0)
            })
            .collect()
    }
}

/// Interior nodes, their arms and the assembled system.
pub struct Discretization {
    pub interior: Vec<bool>,
    /// Unknown number of each interior node (`usize::MAX` elsewhere).
    pub unknown: Vec<usize>,
    pub nodes: Vec<usize>,
    /// Arm fractions per axis `[-x, +x, -y, +y, -z, +z]`; 1 for interior neighbours.
    pub arms: Vec<[f64; 6]>,
    pub matrix: Csr,
    pub rhs: Vec<f64>,
}

pub fn discretize(shape: &Shape, grid: &Grid, level: &[f64]) -> Discretization {
    let n = grid.dim;
    let h = grid.h;
    let interior: Vec<bool> = level.iter().map(|&v| v < 0.0).collect();
    let nodes: Vec<usize> = (0..grid.len()).filter(|&i| interior[i]).collect();
    let mut unknown = vec![usize::MAX; grid.len()];
    for (k, &i) in nodes.iter().enumerate() {
        unknown[i] = k;
    }
    let arms: Vec<[f64; 6]> = nodes
        .par_iter()
        .map(|&i| {
            let mut a = [1.0; 6];
            for axis in 0..n {
                for (s, dir) in [-1i64, 1].iter().enumerate() {
                    match grid.step(i, axis, *dir) {
                        Some(j) if interior[j] => {}
                        Some(j) => a[2 * axis + s] = edge_crossing(shape, grid.point(i), grid.point(j)),
                        None => a[2 * axis + s] = MIN_ARM.max(0.5),
                    }
                }
            }
            a
        })
        .collect();
    let mut row_ptr = vec![0usize];
    let mut cols = Vec::with_capacity(nodes.len() * (2 * n + 1));
    let mut vals = Vec::with_capacity(nodes.len() * (2 * n + 1));
    let rhs = vec![n as f64; nodes.len()];
    for (k, &i) in nodes.iter().enumerate() {
        let mut diag = 0.0;
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * n + 1);
        for axis in 0..n {
            let hl = arms[k][2 * axis] * h;
            let hr = arms[k][2 * axis + 1] * h;
            let cl = 2.0 / (hl * (hl + hr));
            let cr = 2.0 / (hr * (hl + hr));
            diag -= cl + cr;
            if arms[k][2 * axis] == 1.0 {
                if let Some(j) = grid.step(i, axis, -1).filter(|&j| interior[j]) {
                    row.push((unknown[j], cl));
                }
            }
            if arms[k][2 * axis + 1] == 1.0 {
                if let Some(j) = grid.step(i, axis, 1).filter(|&j| interior[j]) {
                    row.push((unknown[j], cr));
                }
            }
        }
        row.push((k, diag));
        row.sort_by_key(|e| e.0);
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Discretization {
        interior,
        unknown,
        nodes,
        arms,
        matrix: Csr { row_ptr, cols, vals },
        rhs,
    }
}

/// Jacobi-preconditioned BiCGSTAB. Returns `(x, iterations, relative residual)`.
pub fn bicgstab(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize, f64)> {
    let n = a.n();
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&dinv).map(|(x, d)| x * d).collect() };
    let bnorm = det_dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut res = 1.0;
    for it in 1..=max_iter {
        let rho_new = det_dot(&r0, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p.par_iter_mut()
            .zip(r.par_iter().zip(v.par_iter()))
            .for_each(|(pi, (ri, vi))| *pi = ri + beta * (*pi - omega * vi));
        let ph = precond(&p);
        a.matvec(&ph, &mut v);
        alpha = rho / det_dot(&r0, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let snorm = det_dot(&s, &s).sqrt() / bnorm;
        if snorm <= tol {
            x.iter_mut().zip(&ph).for_each(|(xi, pi)| *xi += alpha * pi);
            return Ok((x, it, snorm));
        }
        let sh = precond(&s);
        a.matvec(&sh, &mut t);
        let tt = det_dot(&t, &t);
        omega = if tt > 0.0 { det_dot(&t, &s) / tt } else { 0.0 };
        x.par_iter_mut()
            .zip(ph.par_iter().zip(sh.par_iter()))
            .for_each(|(xi, (pi, si))| *xi += alpha * pi + omega * si);
        r.iter_mut().zip(s.iter().zip(&t)).for_each(|(ri, (si, ti))| *ri = si - omega * ti);
        res = det_dot(&r, &r).sqrt() / bnorm;
        if !res.is_finite() {
            return Err(Error::SolverDivergence { iterations: it, residual: res });
        }
        if res <= tol {
            // confirm with the true residual
            let mut ax = vec![0.0; n];
            a.matvec(&x, &mut ax);
            let tr: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let true_res = det_dot(&tr, &tr).sqrt() / bnorm;
            if true_res <= tol {
                return Ok((x, it, true_res));
            }
            r = tr;
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(Error::SolverDivergence { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::family::Family;

    #[test]
    fn crossing_on_unit_circle() {
        let s = Shape::new(2, Family::Ball { center: [0.0; 3], rho: 1.0 }).unwrap();
        let t = edge_crossing(&s, [0.9, 0.0, 0.0], [1.1, 0.0, 0.0]);
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bicgstab_small_system() {
        // 1D Laplacian with Dirichlet ends
        let n = 50;
        let mut row_ptr = vec![0];
        let mut cols = vec![];
        let mut vals = vec![];
        for i in 0..n {
            if i > 0 {
                cols.push(i - 1);
                vals.push(1.0);
            }
            cols.push(i);
            vals.push(-2.0);
            if i + 1 < n {
                cols.push(i + 1);
                vals.push(1.0);
            }
            row_ptr.push(cols.len());
        }
        let a = Csr { row_ptr, cols, vals };
        let b = vec![1.0; n];
        let (x, _, res) = bicgstab(&a, &b, 1e-12, 10_000).unwrap();
        assert!(res <= 1e-12);
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        for (ai, bi) in ax.iter().zip(&b) {
            assert!((ai - bi).abs() < 1e-9);
        }
    }
}
