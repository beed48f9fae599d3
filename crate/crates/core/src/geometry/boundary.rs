//! Boundary sampling: marching squares plus Newton projection in 2D,
//! radially projected icospheres in 3D.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::curvature::{level_gradient, mean_curvature, principal_curvatures, unit_normal};
use super::family::Shape;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::vecmath::{add, cross, dist, dot, norm, normalize, scale, sub, Point};

/// Quadrature nodes on the boundary with geometric data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundarySample {
    pub dim: usize,
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub mean_curvature: Vec<f64>,
    pub principal_curvatures: Option<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
    /// Boundary component each sample belongs to.
    pub component: Vec<usize>,
}

impl BoundarySample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        crate::vecmath::det_sum(&self.weights)
    }

    /// `sum_k w_k f_k`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        crate::vecmath::det_dot(&self.weights, f)
    }
}

/// Newton projection onto `{level = 0}` along the level gradient.
pub fn project(shape: &Shape, mut x: Point) -> Result<Point> {
    let tol = 1e-13 * shape.length_scale();
    for _ in 0..40 {
        let f = shape.level(x);
        if f.abs() <= tol {
            break;
        }
        let g = level_gradient(shape, x);
        let g2 = dot(g, g);
        if g2 < 0.25 {
            return Err(Error::DegenerateBoundary { point: x, grad_norm: g2.sqrt() });
        }
        x = sub(x, scale(g, f / g2));
    }
    let (_, gn) = unit_normal(shape, x);
    if gn < 0.5 {
        return Err(Error::DegenerateBoundary { point: x, grad_norm: gn });
    }
    if shape.level(x).abs() > 1e-8 {
        return Err(Error::DegenerateBoundary { point: x, grad_norm: gn });
    }
    Ok(x)
}

/// Zero-level polylines of a nodal field on a 2D grid, as closed loops.
pub fn marching_squares(grid: &Grid, level: &[f64]) -> Vec<Vec<Point>> {
    let cells = grid.cells();
    let inside = |i: usize, j: usize| level[grid.index([i, j, 0])] < 0.0;
    let edge_point = |id: usize| -> Point {
        let node = id / 2;
        let c = grid.coords(node);
        let other = if id % 2 == 0 { [c[0] + 1, c[1], 0] } else { [c[0], c[1] + 1, 0] };
        let a = grid.point(node);
        let b = grid.point_of(other);
        let fa = level[node];
        let fb = level[grid.index(other)];
        let t = fa / (fa - fb);
        add(a, scale(sub(b, a), t))
    };
    let mut segs: Vec<[usize; 2]> = Vec::new();
    for j in 0..cells[1] {
        for i in 0..cells[0] {
            let b = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let e = [
                2 * grid.index([i, j, 0]),
                2 * grid.index([i + 1, j, 0]) + 1,
                2 * grid.index([i, j + 1, 0]),
                2 * grid.index([i, j, 0]) + 1,
            ];
            // edge k joins corners k and k+1 (mod 4)
            let cut: Vec<usize> = (0..4).filter(|&k| b[k] != b[(k + 1) % 4]).collect();
            match cut.len() {
                2 => segs.push([e[cut[0]], e[cut[1]]]),
                4 => {
                    let center: f64 = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]]
                        .iter()
                        .map(|c| level[grid.index([c[0], c[1], 0])])
                        .sum::<f64>()
                        / 4.0;
                    // isolate the corners that are not connected through the center
                    let center_in = center < 0.0;
                    let isolate_odd = b[0] == center_in;
                    if isolate_odd {
                        segs.push([e[0], e[1]]);
                        segs.push([e[2], e[3]]);
                    } else {
                        segs.push([e[3], e[0]]);
                        segs.push([e[1], e[2]]);
                    }
                }
                _ => {}
            }
        }
    }
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, pair) in segs.iter().enumerate() {
        for &e in pair {
            by_edge.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segs[start][0];
        let mut edges = vec![first];
        let mut cur = segs[start][1];
        let mut seg = start;
        while cur != first {
            edges.push(cur);
            let next = by_edge[&cur].iter().copied().find(|&s| s != seg && !used[s]);
            match next {
                Some(s) => {
                    used[s] = true;
                    seg = s;
                    cur = if segs[s][0] == cur { segs[s][1] } else { segs[s][0] };
                }
                None => break,
            }
        }
        loops.push(edges.into_iter().map(edge_point).collect());
    }
    loops
}

fn polyline_length(pts: &[Point]) -> f64 {
    let m = pts.len();
    (0..m).map(|k| dist(pts[k], pts[(k + 1) % m])).sum()
}

/// Equally spaced points (by arclength) along a closed polyline.
fn resample_closed(pts: &[Point], count: usize) -> Vec<Point> {
    let m = pts.len();
    let mut cum = vec![0.0; m + 1];
    for k in 0..m {
        cum[k + 1] = cum[k] + dist(pts[k], pts[(k + 1) % m]);
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        let s = total * k as f64 / count as f64;
        while seg + 1 < m && cum[seg + 1] <= s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        let a = pts[seg];
        let b = pts[(seg + 1) % m];
        out.push(add(a, scale(sub(b, a), t)));
    }
    out
}

/// Dense closed boundary curves, projected onto the zero level, with the
/// given maximal spacing.
pub fn boundary_loops(shape: &Shape, grid: &Grid, level: &[f64], spacing: f64) -> Result<Vec<Vec<Point>>> {
    let raw = marching_squares(grid, level);
    let mut out = Vec::with_capacity(raw.len());
    for lp in raw.iter().filter(|l| l.len() >= 3) {
        let count = ((polyline_length(lp) / spacing).ceil() as usize).max(16);
        let mut pts = resample_closed(lp, count);
        for pass in 0..2 {
            pts = pts.into_iter().map(|p| project(shape, p)).collect::<Result<_>>()?;
            if pass == 0 {
                pts = resample_closed(&pts, count);
            }
        }
        out.push(pts);
    }
    Ok(out)
}

fn sample_2d(shape: &Shape, grid: &Grid, level: &[f64], target: usize) -> Result<BoundarySample> {
    let raw = marching_squares(grid, level);
    let raw: Vec<_> = raw.into_iter().filter(|l| l.len() >= 3).collect();
    let total: f64 = raw.iter().map(|l| polyline_length(l)).sum();
    let mut s = BoundarySample {
        dim: 2,
        points: vec![],
        normals: vec![],
        mean_curvature: vec![],
        principal_curvatures: None,
        weights: vec![],
        component: vec![],
    };
    for (ci, lp) in raw.iter().enumerate() {
        let count = ((target as f64 * polyline_length(lp) / total).round() as usize).max(16);
        let mut pts = resample_closed(lp, count);
        for pass in 0..2 {
            pts = pts.into_iter().map(|p| project(shape, p)).collect::<Result<_>>()?;
            if pass == 0 {
                pts = resample_closed(&pts, count);
            }
        }
        let curv: Vec<f64> = pts
            .iter()
            .map(|&p| mean_curvature(shape, p, grid.h))
            .collect::<Result<_>>()?;
        let m = pts.len();
        let arc = |k: usize| {
            let c = dist(pts[k], pts[(k + 1) % m]);
            let kb = 0.5 * (curv[k] + curv[(k + 1) % m]);
            c * (1.0 + (kb * c).powi(2) / 24.0)
        };
        let arcs: Vec<f64> = (0..m).map(arc).collect();
        for k in 0..m {
            let (nrm, _) = unit_normal(shape, pts[k]);
            s.points.push(pts[k]);
            s.normals.push(nrm);
            s.mean_curvature.push(curv[k]);
            s.weights.push(0.5 * (arcs[(k + m - 1) % m] + arcs[k]));
            s.component.push(ci);
        }
    }
    s.principal_curvatures = Some(s.mean_curvature.iter().map(|&k| vec![k]).collect());
    Ok(s)
}

/// Unit icosphere with `subdivisions` midpoint refinements.
pub fn icosphere(subdivisions: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Point> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| normalize(p))
    .collect();
    let mut f: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, v: &mut Vec<Point>| {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                v.push(normalize(scale(add(v[a], v[b]), 0.5)));
                v.len() - 1
            })
        };
        let mut nf = Vec::with_capacity(f.len() * 4);
        for tri in &f {
            let ab = mid(tri[0], tri[1], &mut v);
            let bc = mid(tri[1], tri[2], &mut v);
            let ca = mid(tri[2], tri[0], &mut v);
            nf.push([tri[0], ab, ca]);
            nf.push([tri[1], bc, ab]);
            nf.push([tri[2], ca, bc]);
            nf.push([ab, bc, ca]);
        }
        f = nf;
    }
    (v, f)
}

/// Solid angle subtended by a spherical triangle of unit vectors.
fn solid_angle(a: Point, b: Point, c: Point) -> f64 {
    let num = dot(a, cross(b, c)).abs();
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

fn radial_root(shape: &Shape, c: Point, u: Point, mut r_in: f64, mut r_out: f64) -> f64 {
    let f = |r: f64| shape.level(add(c, scale(u, r)));
    let tol = 1e-15 * shape.length_scale().max(1.0);
    for _ in 0..200 {
        let m = 0.5 * (r_in + r_out);
        if f(m) < 0.0 {
            r_in = m;
        } else {
            r_out = m;
        }
        if (r_out - r_in).abs() <= tol {
            break;
        }
    }
    0.5 * (r_in + r_out)
}

/// Dense surface points of a star-shaped 3D boundary, with their components.
pub fn surface_points(shape: &Shape, per_component: usize) -> Result<Vec<(Point, Point, f64, usize)>> {
    let comps = shape.radial_components().ok_or_else(|| Error::UnsupportedDimension {
        dim: shape.dim,
        context: format!("surface sampling of family `{}`", shape.tag().name()),
    })?;
    let mut sub = 0;
    while 10 * 4usize.pow(sub as u32) + 2 < per_component {
        sub += 1;
    }
    let (verts, faces) = icosphere(sub);
    let mut omega = vec![0.0; verts.len()];
    for t in &faces {
        let w = solid_angle(verts[t[0]], verts[t[1]], verts[t[2]]) / 3.0;
        for &i in t {
            omega[i] += w;
        }
    }
    let mut out = Vec::with_capacity(comps.len() * verts.len());
    for (ci, comp) in comps.iter().enumerate() {
        for (k, &u) in verts.iter().enumerate() {
            let r = radial_root(shape, comp.center, u, comp.r_inside, comp.r_outside);
            let x = add(comp.center, scale(u, r));
            let (nrm, gn) = unit_normal(shape, x);
            if gn < 0.5 {
                return Err(Error::DegenerateBoundary { point: x, grad_norm: gn });
            }
            let cosang = dot(nrm, u).abs().max(1e-3);
            out.push((x, nrm, omega[k] * r * r / cosang, ci));
        }
    }
    Ok(out)
}

fn sample_3d(shape: &Shape, grid: &Grid, target: usize) -> Result<BoundarySample> {
    let ncomp = shape.radial_components().map(|c| c.len()).unwrap_or(1);
    let pts = surface_points(shape, target.div_ceil(ncomp))?;
    let mut s = BoundarySample {
        dim: 3,
        points: vec![],
        normals: vec![],
        mean_curvature: vec![],
        principal_curvatures: Some(vec![]),
        weights: vec![],
        component: vec![],
    };
    for (x, nrm, w, ci) in pts {
        let h = mean_curvature(shape, x, grid.h)?;
        let ks = principal_curvatures(shape, x)?;
        s.points.push(x);
        s.normals.push(nrm);
        s.mean_curvature.push(h);
        if let Some(p) = s.principal_curvatures.as_mut() {
            p.push(ks);
        }
        s.weights.push(w);
        s.component.push(ci);
    }
    Ok(s)
}

/// Sample the boundary with roughly `target_count` points.
pub fn sample_boundary(shape: &Shape, grid: &Grid, level: &[f64], target_count: usize) -> Result<BoundarySample> {
    if target_count < 64 {
        return Err(Error::Precondition(format!("target_count must be at least 64, got {target_count}")));
    }
    let s = if shape.dim == 2 {
        sample_2d(shape, grid, level, target_count)?
    } else {
        sample_3d(shape, grid, target_count)?
    };
    debug_assert!(s.normals.iter().all(|n| (norm(*n) - 1.0).abs() < 1e-10));
    Ok(s)
}
