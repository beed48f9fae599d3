//! Torsion solution with derived fields: ghost extension, gradients,
//! Hessians and boundary normal derivatives.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{bicgstab, discretize, edge_crossing, SOLVER_TOL};
use crate::error::Result;
use crate::geometry::boundary::BoundarySample;
use crate::geometry::domain::ImplicitDomain;
use crate::geometry::family::Shape;
use crate::grid::Grid;
use crate::vecmath::{dot, norm, Point};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Debug)]
pub struct TorsionSolution {
    pub shape: Shape,
    pub grid: Grid,
    /// Nodal values; zero outside the domain.
    pub u: Vec<f64>,
    /// `u` extrapolated to the first layer of exterior nodes.
    pub u_ext: Vec<f64>,
    pub interior: Vec<bool>,
    /// Interior nodes plus the ghost layer.
    pub extended: Vec<bool>,
    /// Nodes whose full 3^N stencil is interior.
    pub full_stencil: Vec<bool>,
    pub arms: Vec<[f64; 6]>,
    pub grad: Vec<Point>,
    pub hess: Vec<Mat3>,
    pub max_interior_grad: f64,
    pub max_neg_u: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Boundary normal derivatives with Hopf-violation flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalDerivative {
    pub values: Vec<f64>,
    /// Sample indices with `u_nu < -1e-3`.
    pub flagged: Vec<usize>,
}

/// Derivative at 0 of the quadratic through `(s_k, v_k)`.
fn lagrange_slope(s: [f64; 3], v: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let denom = (s[k] - s[i]) * (s[k] - s[j]);
        acc += v[k] * (-(s[i] + s[j])) / denom;
    }
    acc
}

/// Value at 0 of the quadratic through `(s_k, v_k)`.
fn lagrange_value(s: [f64; 3], v: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        acc += v[k] * (s[i] * s[j]) / ((s[k] - s[i]) * (s[k] - s[j]));
    }
    acc
}

/// Solve the torsion problem on the domain's grid.
pub fn solve_torsion(domain: &ImplicitDomain) -> Result<TorsionSolution> {
    let shape = &domain.shape;
    let grid = domain.grid;
    let n = grid.dim;
    let h = grid.h;
    let disc = discretize(shape, &grid, &domain.level);
    let max_iter = 50_000;
    let (x, iterations, residual) = bicgstab(&disc.matrix, &disc.rhs, SOLVER_TOL, max_iter)?;
    let mut u = vec![0.0; grid.len()];
    let mut arms = vec![[1.0; 6]; grid.len()];
    for (k, &i) in disc.nodes.iter().enumerate() {
        u[i] = x[k].min(0.0);
        arms[i] = disc.arms[k];
    }
    let interior = disc.interior;
    let offsets = grid.neighbor_offsets();

    // ghost layer
    let ghosts: Vec<usize> = (0..grid.len())
        .into_par_iter()
        .filter(|&i| !interior[i] && offsets.iter().any(|&o| grid.offset(i, o).is_some_and(|j| interior[j])))
        .collect();
    let ghost_vals: Vec<f64> = ghosts
        .par_iter()
        .map(|&g| {
            let xg = grid.point(g);
            let (mut num, mut den) = (0.0, 0.0);
            for &o in &offsets {
                let Some(j1) = grid.offset(g, o).filter(|&j| interior[j]) else { continue };
                let len = h * ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt();
                let t = edge_crossing(shape, grid.point(j1), xg);
                if t < 1e-3 {
                    continue;
                }
                let sb = (1.0 - t) * len;
                let two = [2 * o[0], 2 * o[1], 2 * o[2]];
                let v = match grid.offset(g, two).filter(|&j| interior[j]) {
                    Some(j2) => lagrange_value([sb, len, 2.0 * len], [0.0, u[j1], u[j2]]),
                    None => u[j1] * (-sb) / (len - sb),
                };
                num += t * t * v;
                den += t * t;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();
    let mut u_ext = u.clone();
    let mut extended = interior.clone();
    for (g, v) in ghosts.iter().zip(ghost_vals) {
        u_ext[*g] = v;
        extended[*g] = true;
    }

    // gradients
    let grad: Vec<Point> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 3];
            if !extended[i] {
                return g;
            }
            for axis in 0..n {
                if interior[i] {
                    let hl = arms[i][2 * axis] * h;
                    let hr = arms[i][2 * axis + 1] * h;
                    let ul = if arms[i][2 * axis] == 1.0 { grid.step(i, axis, -1).map_or(0.0, |j| u[j]) } else { 0.0 };
                    let ur = if arms[i][2 * axis + 1] == 1.0 { grid.step(i, axis, 1).map_or(0.0, |j| u[j]) } else { 0.0 };
                    g[axis] = lagrange_slope([-hl, 0.0, hr], [ul, u[i], ur]);
                } else {
                    let at = |d: i64| grid.step(i, axis, d).filter(|&j| extended[j]);
                    g[axis] = match (at(-1), at(1)) {
                        (Some(l), Some(r)) => (u_ext[r] - u_ext[l]) / (2.0 * h),
                        (None, Some(r)) => match grid.step(r, axis, 1).filter(|&j| extended[j]) {
                            Some(rr) => (-3.0 * u_ext[i] + 4.0 * u_ext[r] - u_ext[rr]) / (2.0 * h),
                            None => (u_ext[r] - u_ext[i]) / h,
                        },
                        (Some(l), None) => match grid.step(l, axis, -1).filter(|&j| extended[j]) {
                            Some(ll) => (3.0 * u_ext[i] - 4.0 * u_ext[l] + u_ext[ll]) / (2.0 * h),
                            None => (u_ext[i] - u_ext[l]) / h,
                        },
                        (None, None) => 0.0,
                    };
                }
            }
            g
        })
        .collect();

    // Hessians on full stencils, inherited elsewhere
    let full_stencil: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map(|i| interior[i] && offsets.iter().all(|&o| grid.offset(i, o).is_some_and(|j| interior[j])))
        .collect();
    let mut hess: Vec<Mat3> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut m = [[0.0; 3]; 3];
            if !full_stencil[i] {
                return m;
            }
            let at = |o: [i64; 3]| u[grid.offset(i, o).unwrap()];
            for a in 0..n {
                let mut ea = [0i64; 3];
                ea[a] = 1;
                m[a][a] = (at(ea) - 2.0 * u[i] + at([-ea[0], -ea[1], -ea[2]])) / (h * h);
                for b in a + 1..n {
                    let mut pp = [0i64; 3];
                    pp[a] = 1;
                    pp[b] = 1;
                    let mut pm = pp;
                    pm[b] = -1;
                    let mut mp = pp;
                    mp[a] = -1;
                    let mm = [-pp[0], -pp[1], -pp[2]];
                    let v = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h);
                    m[a][b] = v;
                    m[b][a] = v;
                }
            }
            m
        })
        .collect();
    let mut owner = vec![usize::MAX; grid.len()];
    let mut queue = VecDeque::new();
    for i in 0..grid.len() {
        if full_stencil[i] {
            owner[i] = i;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for axis in 0..n {
            for d in [-1, 1] {
                if let Some(j) = grid.step(i, axis, d) {
                    if extended[j] && owner[j] == usize::MAX {
                        owner[j] = owner[i];
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    for i in 0..grid.len() {
        if extended[i] && !full_stencil[i] && owner[i] != usize::MAX {
            hess[i] = hess[owner[i]];
        }
    }

    let max_interior_grad = (0..grid.len())
        .filter(|&i| interior[i])
        .map(|i| norm(grad[i]))
        .fold(0.0, f64::max);
    let max_neg_u = u.iter().map(|&v| -v).fold(0.0, f64::max);
    Ok(TorsionSolution {
        shape: shape.clone(),
        grid,
        u,
        u_ext,
        interior,
        extended,
        full_stencil,
        arms,
        grad,
        hess,
        max_interior_grad,
        max_neg_u,
        iterations,
        residual,
    })
}

impl TorsionSolution {
    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    /// Multilinear interpolation of the extended `u`.
    pub fn interpolate_u(&self, x: Point) -> f64 {
        self.grid.interpolate(&self.u_ext, x)
    }

    /// Multilinear interpolation of the gradient field.
    pub fn interpolate_grad(&self, x: Point) -> Point {
        let mut g = [0.0; 3];
        for d in 0..self.dim() {
            let comp: Vec<f64> = self.grad.iter().map(|v| v[d]).collect();
            g[d] = self.grid.interpolate(&comp, x);
        }
        g
    }

    /// Gradient at `x` from a weighted least-squares quadratic fit of the
    /// extended field, constrained to vanish at `x`.
    pub fn boundary_gradient(&self, x: Point) -> Point {
        let grid = &self.grid;
        let n = grid.dim;
        let h = grid.h;
        let nb = if n == 2 { 6 } else { 10 };
        let basis = |y: Point| -> Vec<f64> {
            if n == 2 {
                vec![1.0, y[0], y[1], y[0] * y[0], y[0] * y[1], y[1] * y[1]]
            } else {
                vec![
                    1.0,
                    y[0],
                    y[1],
                    y[2],
                    y[0] * y[0],
                    y[1] * y[1],
                    y[2] * y[2],
                    y[0] * y[1],
                    y[0] * y[2],
                    y[1] * y[2],
                ]
            }
        };
        for radius in [2.0, 2.5, 3.0] {
            let c = grid.cell_of(x);
            let mut rows: Vec<(Vec<f64>, f64, f64)> = vec![];
            let kr = if n == 3 { -3i64..=4 } else { 0..=0 };
            for dk in kr {
                for dj in -3i64..=4 {
                    for di in -3i64..=4 {
                        let q = [c[0] as i64 + di, c[1] as i64 + dj, c[2] as i64 + dk];
                        if (0..n).any(|d| q[d] < 0 || q[d] >= grid.n[d] as i64) {
                            continue;
                        }
                        let j = grid.index([q[0] as usize, q[1] as usize, q[2] as usize]);
                        if !self.extended[j] {
                            continue;
                        }
                        let p = grid.point(j);
                        let y = [(p[0] - x[0]) / h, (p[1] - x[1]) / h, (p[2] - x[2]) / h];
                        let r = norm(y);
                        if r > radius {
                            continue;
                        }
                        rows.push((basis(y), self.u_ext[j], 1.0));
                    }
                }
            }
            if rows.len() < nb + 2 {
                continue;
            }
            rows.push((basis([0.0; 3]), 0.0, 1e4));
            let a = DMatrix::from_fn(rows.len(), nb, |r, k| rows[r].2 * rows[r].0[k]);
            let b = DVector::from_fn(rows.len(), |r, _| rows[r].2 * rows[r].1);
            let svd = a.svd(true, true);
            if let Ok(coef) = svd.solve(&b, 1e-12) {
                let mut g = [0.0; 3];
                for d in 0..n {
                    g[d] = coef[1 + d] / h;
                }
                return g;
            }
        }
        self.interpolate_grad(x)
    }

    /// `u_nu` at every boundary sample.
    pub fn normal_derivative(&self, sample: &BoundarySample) -> NormalDerivative {
        let values: Vec<f64> = sample
            .points
            .par_iter()
            .zip(sample.normals.par_iter())
            .map(|(x, nu)| dot(self.boundary_gradient(*x), *nu))
            .collect();
        let flagged = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < -1e-3)
            .map(|(k, _)| k)
            .collect();
        NormalDerivative { values, flagged }
    }

    /// `G = max(max interior |grad u|, max u_nu)`.
    pub fn gradient_bound(&self, u_nu: &NormalDerivative) -> f64 {
        u_nu.values.iter().cloned().fold(self.max_interior_grad, f64::max)
    }

    /// Largest violation of `Laplace_h u = N` over fully interior nodes.
    pub fn discrete_residual(&self) -> f64 {
        let n = self.dim();
        let h = self.grid.h;
        (0..self.grid.len())
            .filter(|&i| self.full_stencil[i])
            .map(|i| {
                let lap: f64 = (0..n)
                    .map(|a| {
                        let l = self.u[self.grid.step(i, a, -1).unwrap()];
                        let r = self.u[self.grid.step(i, a, 1).unwrap()];
                        (l - 2.0 * self.u[i] + r) / (h * h)
                    })
                    .sum();
                (lap - n as f64).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::boundary::sample_boundary;
    use crate::geometry::family::Family;

    fn disk(rho: f64, h: f64) -> (ImplicitDomain, TorsionSolution) {
        let d = ImplicitDomain::build(Shape::new(2, Family::Ball { center: [0.0; 3], rho }).unwrap(), Some(h)).unwrap();
        let s = solve_torsion(&d).unwrap();
        (d, s)
    }

    #[test]
    fn unit_disk_is_reproduced() {
        let (d, s) = disk(1.0, 1.0 / 32.0);
        let mut err: f64 = 0.0;
        for i in 0..d.grid.len() {
            if s.interior[i] {
                let p = d.grid.point(i);
                err = err.max((s.u[i] - 0.5 * (p[0] * p[0] + p[1] * p[1] - 1.0)).abs());
                assert!(s.u[i] <= 0.0);
            }
        }
        assert!(err < 1e-8, "{err}");
        assert!((s.max_neg_u - 0.5).abs() < 1e-8);
        assert!(s.discrete_residual() < 1e-5);
        let b = sample_boundary(&d.shape, &d.grid, &d.level, 256).unwrap();
        let un = s.normal_derivative(&b);
        assert!(un.values.iter().all(|v| (v - 1.0).abs() < 5e-3));
        assert!((s.gradient_bound(&un) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn ball_radius_two_center_value() {
        let (d, s) = disk(2.0, 1.0 / 32.0);
        let i0 = d.grid.index(d.grid.cell_of([0.0; 3]));
        assert!((s.u[i0] + 2.0).abs() < 2e-3);
    }

    #[test]
    fn hessian_trace_is_dimension() {
        let (d, s) = disk(1.0, 1.0 / 32.0);
        for i in 0..d.grid.len() {
            if s.extended[i] {
                let tr = s.hess[i][0][0] + s.hess[i][1][1];
                assert!((tr - 2.0).abs() < 1e-6, "{tr}");
            }
        }
    }

    #[test]
    fn ellipse_mean_normal_derivative_is_r() {
        let sh = Shape::new(2, Family::Ellipse { center: [0.0; 3], a: 1.5, b: 1.0 }).unwrap();
        let d = ImplicitDomain::build(sh, Some(1.0 / 64.0)).unwrap();
        let s = solve_torsion(&d).unwrap();
        let b = sample_boundary(&d.shape, &d.grid, &d.level, 512).unwrap();
        let un = s.normal_derivative(&b);
        let per = b.total_weight();
        let area = std::f64::consts::PI * 1.5;
        let mean = b.integrate(&un.values) / per;
        // divergence theorem: int u_nu = N |Omega|
        assert!((mean - 2.0 * area / per).abs() < 5e-3, "{mean}");
    }
}
