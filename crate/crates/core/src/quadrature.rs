//! Cut-cell volume quadrature. Cells are split into simplices (two triangles
//! in 2D, six Kuhn tetrahedra in 3D); each simplex is clipped against the
//! piecewise-linear interpolant of the level function, and the clipped piece
//! is integrated exactly for P1 integrands. The result is a set of nodal
//! weights `W` with `int_{level<0} f ~= sum_i W_i f_i`.

use crate::grid::Grid;
use crate::vecmath::{det_dot, det_sum};

type Bary = [f64; 4];

fn det3(m: &[Bary]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: &[Bary]) -> f64 {
    let mut acc = 0.0;
    for c in 0..4 {
        let minor: Vec<Bary> = (1..4)
            .map(|r| {
                let mut row = [0.0; 4];
                let mut k = 0;
                for cc in 0..4 {
                    if cc != c {
                        row[k] = m[r][cc];
                        k += 1;
                    }
                }
                row
            })
            .collect();
        let s = if c % 2 == 0 { 1.0 } else { -1.0 };
        acc += s * m[0][c] * det3(&minor);
    }
    acc
}

fn vertex(i: usize) -> Bary {
    let mut b = [0.0; 4];
    b[i] = 1.0;
    b
}

/// Point on edge (i, j) where the linear level vanishes.
fn crossing(phi: &[f64], i: usize, j: usize) -> Bary {
    let t = phi[i] / (phi[i] - phi[j]);
    let mut b = [0.0; 4];
    b[i] = 1.0 - t;
    b[j] = t;
    b
}

/// Accumulate `sign * |sub|/(n+1) * sum of barycentric vertices` into `w`.
fn add_sub(w: &mut [f64; 4], sub: &[Bary], n: usize, sign: f64) {
    let vol = if n == 2 { det3(sub).abs() } else { det4(sub).abs() };
    let f = sign * vol / (n + 1) as f64;
    for b in sub {
        for k in 0..=n {
            w[k] += f * b[k];
        }
    }
}

/// Weights (as fractions of the simplex volume) on the simplex vertices for
/// integrating a P1 function over `{phi < 0}`.
pub fn clip_simplex(phi: &[f64], n: usize) -> [f64; 4] {
    let mut w = [0.0; 4];
    let neg: Vec<usize> = (0..=n).filter(|&k| phi[k] < 0.0).collect();
    let pos: Vec<usize> = (0..=n).filter(|&k| phi[k] >= 0.0).collect();
    let full = 1.0 / (n + 1) as f64;
    if neg.is_empty() {
        return w;
    }
    if pos.is_empty() {
        for k in 0..=n {
            w[k] = full;
        }
        return w;
    }
    if neg.len() == 1 {
        let i = neg[0];
        let mut sub = vec![vertex(i)];
        for &j in &pos {
            sub.push(crossing(phi, i, j));
        }
        add_sub(&mut w, &sub, n, 1.0);
        return w;
    }
    if pos.len() == 1 {
        let i = pos[0];
        for k in 0..=n {
            w[k] = full;
        }
        let mut sub = vec![vertex(i)];
        for &j in &neg {
            sub.push(crossing(phi, i, j));
        }
        add_sub(&mut w, &sub, n, -1.0);
        return w;
    }
    // n == 3 with two negative and two positive vertices: a triangular prism.
    let (i, j) = (neg[0], neg[1]);
    let (k, l) = (pos[0], pos[1]);
    let a = [vertex(i), crossing(phi, i, k), crossing(phi, i, l)];
    let b = [vertex(j), crossing(phi, j, k), crossing(phi, j, l)];
    add_sub(&mut w, &[a[0], a[1], a[2], b[0]], n, 1.0);
    add_sub(&mut w, &[a[1], a[2], b[0], b[1]], n, 1.0);
    add_sub(&mut w, &[a[2], b[0], b[1], b[2]], n, 1.0);
    w
}

/// Simplices of a unit cell as lists of corner bit-masks (bit d = +e_d).
fn cell_simplices(dim: usize) -> Vec<Vec<usize>> {
    if dim == 2 {
        vec![vec![0, 1, 3], vec![0, 3, 2]]
    } else {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        perms
            .iter()
            .map(|p| {
                let mut s = vec![0usize];
                let mut m = 0usize;
                for &a in p {
                    m |= 1 << a;
                    s.push(m);
                }
                s
            })
            .collect()
    }
}

/// Nodal quadrature weights for the region `{level < 0}`.
pub fn volume_weights(grid: &Grid, level: &[f64]) -> Vec<f64> {
    let n = grid.dim;
    let mut w = vec![0.0; grid.len()];
    let simplices = cell_simplices(n);
    let simplex_vol = grid.cell_volume() / if n == 2 { 2.0 } else { 6.0 };
    let cells = grid.cells();
    let ncorner = 1usize << n;
    let mut corner = [0usize; 8];
    let mut phi = [0.0; 8];
    for k in 0..cells[2] {
        for j in 0..cells[1] {
            for i in 0..cells[0] {
                let mut any_neg = false;
                for m in 0..ncorner {
                    let c = [i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1)];
                    corner[m] = grid.index(c);
                    phi[m] = level[corner[m]];
                    any_neg |= phi[m] < 0.0;
                }
                if !any_neg {
                    continue;
                }
                for s in &simplices {
                    let sphi: Vec<f64> = s.iter().map(|&m| phi[m]).collect();
                    let sw = clip_simplex(&sphi, n);
                    for (v, &m) in s.iter().enumerate() {
                        w[corner[m]] += simplex_vol * sw[v];
                    }
                }
            }
        }
    }
    w
}

/// Measure of `{level < 0}`.
pub fn volume(grid: &Grid, level: &[f64]) -> f64 {
    det_sum(&volume_weights(grid, level))
}

/// `sum_i W_i f_i` with a deterministic reduction order.
pub fn integrate(weights: &[f64], f: &[f64]) -> f64 {
    det_dot(weights, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BBox;
    use std::f64::consts::PI;

    fn field(g: &Grid, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..g.len()).map(|i| f(g.point(i))).collect()
    }

    #[test]
    fn planar_cut_is_exact() {
        let b = BBox { min: [-1.0, -1.0, 0.0], max: [1.0, 1.0, 0.0] };
        let g = Grid::covering(&b, 2, 0.1);
        let lv = field(&g, |p| p[0] + 0.5 * p[1] - 0.137);
        // exact area of {x + y/2 < 0.137} inside the square
        let exact: f64 = 2.0 * (0.137 + 1.0);
        assert!((volume(&g, &lv) - exact).abs() < 1e-12);
    }

    #[test]
    fn disk_area_second_order() {
        let mut errs = vec![];
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let b = BBox { min: [-1.25, -1.25, 0.0], max: [1.25, 1.25, 0.0] };
            let g = Grid::covering(&b, 2, h);
            let lv = field(&g, |p| (p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0);
            errs.push((volume(&g, &lv) - PI).abs());
        }
        assert!(errs[1] < 1e-3);
        assert!(errs[0] / errs[1] > 3.0);
    }

    #[test]
    fn ball_volume_3d() {
        let b = BBox { min: [-1.25; 3], max: [1.25; 3] };
        let g = Grid::covering(&b, 3, 1.0 / 32.0);
        let lv = field(&g, |p| crate::vecmath::norm(p) - 1.0);
        let v = volume(&g, &lv);
        assert!((v - 4.0 * PI / 3.0).abs() < 5e-3, "{v}");
    }

    #[test]
    fn prism_case_matches_complement() {
        let phi = [-0.3, -0.1, 0.4, 0.2];
        let w = clip_simplex(&phi, 3);
        let neg: [f64; 4] = phi.map(|x| -x);
        let wc = clip_simplex(&neg, 3);
        let total: f64 = w.iter().sum::<f64>() + wc.iter().sum::<f64>();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_integrand_over_full_square() {
        let b = BBox { min: [0.0, 0.0, 0.0], max: [1.0, 1.0, 0.0] };
        let g = Grid::covering(&b, 2, 0.125);
        let lv = vec![-1.0; g.len()];
        let w = volume_weights(&g, &lv);
        let f = field(&g, |p| p[0] + 2.0 * p[1]);
        assert!((integrate(&w, &f) - 1.5).abs() < 1e-13);
    }
}
