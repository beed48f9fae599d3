//! Implicit domains on a grid: analytic level values plus a signed distance.

use rayon::prelude::*;

use super::boundary::{boundary_loops, project, surface_points};
use super::curvature::unit_normal;
use super::family::{FamilySpec, Shape};
use crate::error::{Error, Result};
use crate::grid::{BBox, Grid};
use crate::vecmath::{add, dist, dot, scale, sub, Point};

/// Bucketed point cloud for nearest-neighbour queries.
pub struct PointIndex {
    points: Vec<Point>,
    dim: usize,
    origin: Point,
    cell: f64,
    dims: [usize; 3],
    buckets: Vec<Vec<u32>>,
}

impl PointIndex {
    pub fn new(points: Vec<Point>, bbox: &BBox, dim: usize, cell: f64) -> Self {
        let mut dims = [1usize; 3];
        for d in 0..dim {
            dims[d] = (((bbox.max[d] - bbox.min[d]) / cell).ceil() as usize).max(1);
        }
        let mut buckets = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        let mut idx = PointIndex { points: vec![], dim, origin: bbox.min, cell, dims, buckets: vec![] };
        for (k, p) in points.iter().enumerate() {
            let c = idx.cell_of(*p);
            buckets[idx.flat(c)].push(k as u32);
        }
        idx.points = points;
        idx.buckets = buckets;
        idx
    }

    fn cell_of(&self, p: Point) -> [i64; 3] {
        let mut c = [0i64; 3];
        for d in 0..self.dim {
            let t = ((p[d] - self.origin[d]) / self.cell).floor() as i64;
            c[d] = t.clamp(0, self.dims[d] as i64 - 1);
        }
        c
    }

    fn flat(&self, c: [i64; 3]) -> usize {
        c[0] as usize + self.dims[0] * (c[1] as usize + self.dims[1] * c[2] as usize)
    }

    pub fn point(&self, k: usize) -> Point {
        self.points[k]
    }

    /// Index of and distance to the nearest stored point.
    pub fn nearest(&self, x: Point) -> (usize, f64) {
        let c = self.cell_of(x);
        let maxr = *self.dims.iter().max().unwrap_or(&1) as i64;
        let mut best = (usize::MAX, f64::INFINITY);
        let zr = |r: i64| if self.dim == 3 { r } else { 0 };
        for r in 0..=maxr {
            for dk in -zr(r)..=zr(r) {
                for dj in -r..=r {
                    for di in -r..=r {
                        if di.abs().max(dj.abs()).max(dk.abs()) != r {
                            continue;
                        }
                        let q = [c[0] + di, c[1] + dj, c[2] + dk];
                        if (0..3).any(|d| q[d] < 0 || q[d] >= self.dims[d] as i64) {
                            continue;
                        }
                        for &k in &self.buckets[self.flat(q)] {
                            let dd = dist(x, self.points[k as usize]);
                            if dd < best.1 || (dd == best.1 && (k as usize) < best.0) {
                                best = (k as usize, dd);
                            }
                        }
                    }
                }
            }
            if best.1 <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

/// A domain resolved on a grid.
#[derive(Clone, Debug)]
pub struct ImplicitDomain {
    pub shape: Shape,
    pub bbox: BBox,
    pub grid: Grid,
    /// Analytic level values at the nodes.
    pub level: Vec<f64>,
    /// Signed distance to the boundary at the nodes.
    pub phi: Vec<f64>,
}

/// Default spacing: 1/128 of the box diagonal in 2D, 1/32 in 3D.
pub fn default_h(shape: &Shape) -> f64 {
    if shape.dim == 2 {
        shape.padded_bbox().diagonal(2) / 128.0
    } else {
        1.0 / 32.0
    }
}

/// Refine a boundary foot point of `x`, starting from a nearby boundary point.
fn foot_point(shape: &Shape, x: Point, seed: Point) -> Point {
    let mut y = seed;
    let mut best = dist(x, y);
    for _ in 0..4 {
        let (nrm, _) = unit_normal(shape, y);
        let v = sub(x, y);
        let tangential = sub(v, scale(nrm, dot(v, nrm)));
        let cand = match project(shape, add(y, tangential)) {
            Ok(c) => c,
            Err(_) => break,
        };
        let dd = dist(x, cand);
        if dd < best {
            best = dd;
            y = cand;
        } else {
            break;
        }
    }
    y
}

impl ImplicitDomain {
    /// Resolve `shape` on a lattice-aligned grid of spacing `h`.
    pub fn build(shape: Shape, h: Option<f64>) -> Result<Self> {
        let h = h.unwrap_or_else(|| default_h(&shape));
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Precondition(format!("grid spacing must be positive, got {h}")));
        }
        let fw = shape.min_feature_width();
        if fw < 8.0 * h {
            return Err(Error::UnresolvedGeometry { feature_width: fw, h });
        }
        let bbox = shape.padded_bbox();
        let grid = Grid::covering(&bbox, shape.dim, h);
        let level: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| shape.level(grid.point(i))).collect();
        let phi = if shape.level_is_exact_distance() {
            level.clone()
        } else {
            redistance(&shape, &grid, &level)?
        };
        Ok(ImplicitDomain { shape, bbox, grid, level, phi })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn contains(&self, x: Point) -> bool {
        self.shape.contains(x)
    }

    /// Interpolated distance to the boundary.
    pub fn distance(&self, x: Point) -> f64 {
        if self.shape.level_is_exact_distance() {
            self.shape.level(x).abs()
        } else {
            self.grid.interpolate(&self.phi, x).abs()
        }
    }
}

/// Signed distance from a dense boundary cloud (spacing h/4) with foot-point
/// refinement near the boundary; sign from the analytic level.
pub fn redistance(shape: &Shape, grid: &Grid, level: &[f64]) -> Result<Vec<f64>> {
    let h = grid.h;
    let spacing = h / 4.0;
    let pts: Vec<Point> = if shape.dim == 2 {
        boundary_loops(shape, grid, level, spacing)?.into_iter().flatten().collect()
    } else {
        let comps = shape.radial_components().map(|c| c.len()).unwrap_or(1);
        let area_guess = 4.0 * std::f64::consts::PI * shape.length_scale().powi(2);
        let per = ((area_guess / (spacing * spacing)) as usize / comps).clamp(642, 200_000);
        surface_points(shape, per)?.into_iter().map(|t| t.0).collect()
    };
    let bbox = BBox {
        min: grid.origin,
        max: grid.point(grid.len() - 1),
    };
    let index = PointIndex::new(pts, &bbox, shape.dim, 4.0 * h);
    let band = 12.0 * h;
    let phi = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let (k, d0) = index.nearest(x);
            let d = if level[i].abs() < band {
                dist(x, foot_point(shape, x, index.point(k))).min(d0)
            } else {
                d0
            };
            if level[i] < 0.0 {
                -d
            } else {
                d
            }
        })
        .collect();
    Ok(phi)
}

/// Validate a JSON family description and resolve it on a grid.
pub fn build_family(spec: &FamilySpec, h: Option<f64>) -> Result<ImplicitDomain> {
    ImplicitDomain::build(Shape::from_spec(spec)?, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::family::Family;

    #[test]
    fn ellipse_redistanced_gradient_near_boundary() {
        let s = Shape::new(2, Family::Ellipse { center: [0.0; 3], a: 1.5, b: 1.0 }).unwrap();
        let d = ImplicitDomain::build(s, Some(1.0 / 64.0)).unwrap();
        let g = &d.grid;
        let h = g.h;
        let mut checked = 0;
        for i in 0..g.len() {
            if d.phi[i].abs() > 10.0 * h {
                continue;
            }
            let c = g.coords(i);
            if c[0] == 0 || c[1] == 0 || c[0] + 1 >= g.n[0] || c[1] + 1 >= g.n[1] {
                continue;
            }
            let gx = (d.phi[g.step(i, 0, 1).unwrap()] - d.phi[g.step(i, 0, -1).unwrap()]) / (2.0 * h);
            let gy = (d.phi[g.step(i, 1, 1).unwrap()] - d.phi[g.step(i, 1, -1).unwrap()]) / (2.0 * h);
            let gn = (gx * gx + gy * gy).sqrt();
            assert!((0.9..=1.1).contains(&gn), "|grad phi| = {gn} at {:?}", g.point(i));
            checked += 1;
        }
        assert!(checked > 1000);
    }

    #[test]
    fn ellipse_distance_at_known_points() {
        let s = Shape::new(2, Family::Ellipse { center: [0.0; 3], a: 1.5, b: 1.0 }).unwrap();
        let d = ImplicitDomain::build(s, Some(1.0 / 32.0)).unwrap();
        // distance from the origin is the semi-minor axis
        let i0 = d.grid.index(d.grid.cell_of([0.0; 3]));
        assert_eq!(d.grid.point(i0), [0.0, 0.0, 0.0]);
        assert!((d.phi[i0] + 1.0).abs() < 1e-6, "{}", d.phi[i0]);
    }

    #[test]
    fn dumbbell_is_connected_by_flood_fill() {
        let spec: FamilySpec = serde_json::from_value(serde_json::json!(
            {"family":"dumbbell","N":2,"params":{"d":3.0,"rho":1.0,"w":0.2}}
        ))
        .unwrap();
        let d = build_family(&spec, Some(1.0 / 64.0)).unwrap();
        let g = &d.grid;
        let inside: Vec<bool> = d.level.iter().map(|&v| v < 0.0).collect();
        let start = (0..g.len()).find(|&i| inside[i]).unwrap();
        let mut seen = vec![false; g.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for axis in 0..2 {
                for dir in [-1, 1] {
                    if let Some(j) = g.step(i, axis, dir) {
                        if inside[j] && !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        let n_inside = inside.iter().filter(|&&b| b).count();
        let n_seen = seen.iter().filter(|&&b| b).count();
        assert_eq!(n_inside, n_seen);
    }

    #[test]
    fn thin_neck_unresolved_on_coarse_grid() {
        let s = Shape::new(2, Family::Dumbbell { d: 3.0, rho: 1.0, w: 0.1, k: 0.05 }).unwrap();
        assert!(matches!(ImplicitDomain::build(s, Some(0.05)), Err(Error::UnresolvedGeometry { .. })));
    }
}
