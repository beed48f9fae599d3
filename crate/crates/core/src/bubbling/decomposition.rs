//! Sublevel-set decomposition of the torsion function.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::ledger::ConstantsLedger;
use crate::checks::Check;
use crate::error::{Error, Result};
use crate::torsion::TorsionSolution;
use crate::vecmath::{dist, Point};

/// Fraction of `max(-u)` a local minimum must persist to count as a bubble.
pub const SIGNIFICANCE: f64 = 0.05;

/// One connected component of `{u < -2 eps}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    /// Refined minimum point of `u` on the component.
    pub z: Point,
    pub rho_int: f64,
    pub rho_ext: f64,
    pub min_u: f64,
    #[serde(skip)]
    pub nodes: Vec<usize>,
}

fn face_neighbors(sol: &TorsionSolution, i: usize) -> impl Iterator<Item = (usize, usize, Option<usize>)> + '_ {
    let n = sol.dim();
    (0..n).flat_map(move |axis| {
        [(0usize, -1i64), (1, 1)]
            .into_iter()
            .map(move |(s, dir)| (axis, s, sol.grid.step(i, axis, dir)))
    })
}

/// Grid argmin (first in index order) refined by one parabola step per axis,
/// clamped to half a cell.
fn refined_min(sol: &TorsionSolution, nodes: &[usize]) -> (Point, f64) {
    let mut best = nodes[0];
    for &i in nodes {
        if sol.u[i] < sol.u[best] {
            best = i;
        }
    }
    let grid = &sol.grid;
    let h = grid.h;
    let mut z = grid.point(best);
    for axis in 0..grid.dim {
        let l = grid.step(best, axis, -1).filter(|&j| sol.interior[j]);
        let r = grid.step(best, axis, 1).filter(|&j| sol.interior[j]);
        if let (Some(l), Some(r)) = (l, r) {
            let (ul, uc, ur) = (sol.u[l], sol.u[best], sol.u[r]);
            let curv = ul - 2.0 * uc + ur;
            if curv > 0.0 {
                let s = (0.5 * (ul - ur) / curv * h).clamp(-0.5 * h, 0.5 * h);
                z[axis] += s;
            }
        }
    }
    (z, sol.u[best])
}

/// Components of `{u < -2 eps}` by face-adjacent flood fill, numbered in
/// order of their first node.
pub fn sublevel_decomposition(sol: &TorsionSolution, eps: f64) -> Result<Vec<Component>> {
    let two_eps = 2.0 * eps;
    if !(eps >= 0.0) || two_eps >= sol.max_neg_u {
        return Err(Error::EmptySublevel {
            two_eps,
            max_neg_u: sol.max_neg_u,
        });
    }
    let grid = &sol.grid;
    let h = grid.h;
    let level = -two_eps;
    let inside = |i: usize| sol.interior[i] && sol.u[i] < level;
    let mut label = vec![usize::MAX; grid.len()];
    let mut comps = Vec::new();
    for start in 0..grid.len() {
        if !inside(start) || label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut nodes = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < nodes.len() {
            let i = nodes[head];
            head += 1;
            for (_, _, j) in face_neighbors(sol, i) {
                if let Some(j) = j {
                    if inside(j) && label[j] == usize::MAX {
                        label[j] = id;
                        nodes.push(j);
                    }
                }
            }
        }
        nodes.sort_unstable();
        let (z, min_u) = refined_min(sol, &nodes);
        // Crossings of the level along edges leaving the component.
        let (mut rho_int, mut rho_ext) = (f64::INFINITY, 0.0f64);
        for &i in &nodes {
            let xi = grid.point(i);
            for (axis, s, j) in face_neighbors(sol, i) {
                let t = match j {
                    Some(j) if sol.interior[j] => {
                        if sol.u[j] < level {
                            continue;
                        }
                        (level - sol.u[i]) / (sol.u[j] - sol.u[i])
                    }
                    _ => {
                        // Boundary at arm fraction theta where u = 0.
                        let theta = sol.arms[i][2 * axis + s];
                        theta * (level - sol.u[i]) / (0.0 - sol.u[i])
                    }
                };
                let mut x = xi;
                x[axis] += if s == 0 { -t * h } else { t * h };
                let r = dist(x, z);
                rho_int = rho_int.min(r);
                rho_ext = rho_ext.max(r);
            }
        }
        comps.push(Component {
            id,
            z,
            rho_int,
            rho_ext,
            min_u,
            nodes,
        });
    }
    Ok(comps)
}

/// Smallest `eps` separating every significant local minimum of `u`, from
/// 0-dimensional sublevel persistence. `None` when only one minimum is
/// significant.
pub fn split_epsilon(sol: &TorsionSolution) -> Option<f64> {
    let grid = &sol.grid;
    let mut order: Vec<usize> = (0..grid.len()).filter(|&i| sol.interior[i]).collect();
    order.sort_by(|&a, &b| sol.u[a].total_cmp(&sol.u[b]).then(a.cmp(&b)));
    let mut parent = vec![usize::MAX; grid.len()];
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let threshold = SIGNIFICANCE * sol.max_neg_u;
    // (depth of merge, depth of younger minimum)
    let mut merges: Vec<(f64, f64)> = vec![];
    for &i in &order {
        parent[i] = i;
        for (_, _, j) in face_neighbors(sol, i) {
            let Some(j) = j else { continue };
            if parent[j] == usize::MAX {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri == rj {
                continue;
            }
            // Roots are the minima; the elder (deeper) survives.
            let (old, young) = if (sol.u[ri], ri) < (sol.u[rj], rj) { (ri, rj) } else { (rj, ri) };
            if sol.u[i] - sol.u[young] >= threshold {
                merges.push((-sol.u[i], -sol.u[young]));
            }
            parent[young] = old;
        }
    }
    if merges.is_empty() {
        return None;
    }
    let merge_depth = merges.iter().map(|m| m.0).fold(0.0, f64::max);
    let birth_depth = merges.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    Some(0.5 * (merge_depth + 0.1 * (birth_depth - merge_depth)))
}

/// Sublevel parameter for the empirical pipeline: `min(delta^alpha, eps_split)`,
/// or 0 when a single minimum dominates.
pub fn empirical_epsilon(sol: &TorsionSolution, delta: f64, alpha: f64) -> f64 {
    match split_epsilon(sol) {
        Some(e) => delta.powf(alpha).min(e),
        None => 0.0,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexityReport {
    /// Least eigenvalue of `D^2 u` over full-stencil component nodes.
    pub min_eigenvalue: f64,
    /// Largest Frobenius norm of `D^2 h = I - D^2 u` over the same nodes.
    pub max_hessian_h: f64,
    /// `C2 delta^{alpha/2}`.
    pub hessian_h_bound: f64,
    /// Whether `delta < C2^{-2/alpha}`, i.e. the estimates apply.
    pub applies: bool,
    pub nodes_checked: usize,
    pub checks: Vec<Check>,
}

fn sym_eigen_min(m: &[[f64; 3]; 3], dim: usize) -> f64 {
    if dim == 2 {
        let a = Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
        SymmetricEigen::new(a).eigenvalues.min()
    } else {
        let a = Matrix3::from_fn(|i, j| m[i][j]);
        SymmetricEigen::new(a).eigenvalues.min()
    }
}

/// Positive definiteness of `D^2 u` and the size of `D^2 h` on the components.
pub fn convexity_check(
    sol: &TorsionSolution,
    components: &[Component],
    ledger: &ConstantsLedger,
    delta: f64,
) -> ConvexityReport {
    let dim = sol.dim();
    let (mut min_eig, mut max_hh, mut count) = (f64::INFINITY, 0.0f64, 0usize);
    for c in components {
        for &i in &c.nodes {
            if !sol.full_stencil[i] {
                continue;
            }
            let m = &sol.hess[i];
            min_eig = min_eig.min(sym_eigen_min(m, dim));
            let mut f = 0.0;
            for a in 0..dim {
                for b in 0..dim {
                    let id = if a == b { 1.0 } else { 0.0 };
                    f += (id - m[a][b]).powi(2);
                }
            }
            max_hh = max_hh.max(f.sqrt());
            count += 1;
        }
    }
    let applies = delta < ledger.thresholds[1];
    let bound = ledger.c2 * delta.powf(ledger.alpha / 2.0);
    let h = sol.grid.h;
    let mut checks = vec![];
    if applies && count > 0 {
        checks.push(Check::le("D2u positive semidefinite", -min_eig, 0.0, h));
        checks.push(Check::le("|D2h| <= C2 delta^(alpha/2)", max_hh, bound, h));
    }
    ConvexityReport {
        min_eigenvalue: if count > 0 { min_eig } else { f64::NAN },
        max_hessian_h: max_hh,
        hessian_h_bound: bound,
        applies,
        nodes_checked: count,
        checks,
    }
}
