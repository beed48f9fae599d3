//! Uniform Cartesian grids in two or three dimensions.

use serde::{Deserialize, Serialize};

use crate::vecmath::Point;

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn diagonal(&self, dim: usize) -> f64 {
        (0..dim)
            .map(|d| (self.max[d] - self.min[d]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, p: Point, dim: usize) -> bool {
        (0..dim).all(|d| p[d] >= self.min[d] && p[d] <= self.max[d])
    }
}

/// Node lattice `origin + h * (i, j, k)`. In 2D `n[2] == 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub origin: Point,
    pub h: f64,
    pub n: [usize; 3],
}

impl Grid {
    /// Grid covering `bbox`, with nodes aligned to the lattice `h Z^N`.
    pub fn covering(bbox: &BBox, dim: usize, h: f64) -> Self {
        let mut origin = [0.0; 3];
        let mut n = [1usize; 3];
        for d in 0..dim {
            let lo = (bbox.min[d] / h).floor();
            let hi = (bbox.max[d] / h).ceil();
            origin[d] = lo * h;
            n[d] = (hi - lo) as usize + 1;
        }
        Grid { dim, origin, h, n }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.n[0] * (ijk[1] + self.n[1] * ijk[2])
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let rest = idx / self.n[0];
        [i, rest % self.n[1], rest / self.n[1]]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        self.point_of(c)
    }

    #[inline]
    pub fn point_of(&self, c: [usize; 3]) -> Point {
        let mut p = [0.0; 3];
        for d in 0..self.dim {
            p[d] = self.origin[d] + self.h * c[d] as f64;
        }
        p
    }

    /// Neighbor along `axis` in direction `dir` (-1 or +1).
    #[inline]
    pub fn step(&self, idx: usize, axis: usize, dir: i64) -> Option<usize> {
        let mut c = self.coords(idx);
        let v = c[axis] as i64 + dir;
        if v < 0 || v >= self.n[axis] as i64 {
            return None;
        }
        c[axis] = v as usize;
        Some(self.index(c))
    }

    /// Neighbor by an integer offset vector.
    #[inline]
    pub fn offset(&self, idx: usize, off: [i64; 3]) -> Option<usize> {
        let mut c = self.coords(idx);
        for d in 0..3 {
            let v = c[d] as i64 + off[d];
            if v < 0 || v >= self.n[d] as i64 {
                return None;
            }
            c[d] = v as usize;
        }
        Some(self.index(c))
    }

    /// All offsets in {-1,0,1}^N except zero.
    pub fn neighbor_offsets(&self) -> Vec<[i64; 3]> {
        let r: i64 = 1;
        let zr = if self.dim == 3 { r } else { 0 };
        let mut out = Vec::new();
        for k in -zr..=zr {
            for j in -r..=r {
                for i in -r..=r {
                    if i != 0 || j != 0 || k != 0 {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out
    }

    /// Number of cells along each axis.
    pub fn cells(&self) -> [usize; 3] {
        let mut c = [1usize; 3];
        for d in 0..self.dim {
            c[d] = self.n[d] - 1;
        }
        c
    }

    /// Lower-corner node index of the cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for d in 0..self.dim {
            let t = ((p[d] - self.origin[d]) / self.h).floor();
            let max = self.n[d].saturating_sub(2) as f64;
            c[d] = t.clamp(0.0, max) as usize;
        }
        c
    }

    /// Multilinear interpolation of a nodal field.
    pub fn interpolate(&self, field: &[f64], p: Point) -> f64 {
        let c = self.cell_of(p);
        let mut t = [0.0; 3];
        for d in 0..self.dim {
            t[d] = ((p[d] - self.origin[d]) / self.h - c[d] as f64).clamp(0.0, 1.0);
        }
        let kmax = if self.dim == 3 { 1 } else { 0 };
        let mut acc = 0.0;
        for dk in 0..=kmax {
            for dj in 0..=1 {
                for di in 0..=1 {
                    let w = (if di == 1 { t[0] } else { 1.0 - t[0] })
                        * (if dj == 1 { t[1] } else { 1.0 - t[1] })
                        * if self.dim == 3 {
                            if dk == 1 {
                                t[2]
                            } else {
                                1.0 - t[2]
                            }
                        } else {
                            1.0
                        };
                    if w != 0.0 {
                        acc += w * field[self.index([c[0] + di, c[1] + dj, c[2] + dk])];
                    }
                }
            }
        }
        acc
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_grid_is_lattice_aligned() {
        let b = BBox { min: [-1.25, -1.25, 0.0], max: [1.25, 1.25, 0.0] };
        let g = Grid::covering(&b, 2, 1.0 / 128.0);
        assert_eq!(g.n[0], 321);
        assert_eq!(g.n[2], 1);
        let mid = g.index([160, 160, 0]);
        assert_eq!(g.point(mid), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn index_roundtrip_3d() {
        let b = BBox { min: [0.0; 3], max: [1.0, 2.0, 3.0] };
        let g = Grid::covering(&b, 3, 0.5);
        for idx in [0, 7, g.len() - 1] {
            assert_eq!(g.index(g.coords(idx)), idx);
        }
        assert_eq!(g.neighbor_offsets().len(), 26);
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let b = BBox { min: [-1.0, -1.0, 0.0], max: [1.0, 1.0, 0.0] };
        let g = Grid::covering(&b, 2, 0.1);
        let f: Vec<f64> = (0..g.len()).map(|i| {
            let p = g.point(i);
            2.0 * p[0] - 3.0 * p[1] + 0.5
        }).collect();
        let p = [0.123, -0.456, 0.0];
        assert!((g.interpolate(&f, p) - (2.0 * 0.123 + 3.0 * 0.456 + 0.5)).abs() < 1e-12);
    }
}
