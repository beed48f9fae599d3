//! Integral identities and inequalities for the torsion function: the
//! fundamental identity, its two deficit inequalities, Pohozaev, the
//! divergence identity for `|grad u| grad u`, and the Hölder comparison.

use serde::{Deserialize, Serialize};

use crate::checks::{first_failure, Check};
use crate::error::{Error, Result};
use crate::geometry::boundary::BoundarySample;
use crate::geometry::domain::ImplicitDomain;
use crate::geometry::summary::GeometricSummary;
use crate::quadrature;
use crate::torsion::{NormalDerivative, TorsionSolution};
use crate::vecmath::{det_dot, det_sum, dot, norm, sub, Point};

/// Everything the identity checks integrate over.
pub struct IdentityContext<'a> {
    pub domain: &'a ImplicitDomain,
    pub solution: &'a TorsionSolution,
    pub sample: &'a BoundarySample,
    pub summary: &'a GeometricSummary,
    pub u_nu: &'a NormalDerivative,
    pub g: f64,
    /// Nodal volume weights of the domain.
    pub weights: Vec<f64>,
}

impl<'a> IdentityContext<'a> {
    pub fn new(
        domain: &'a ImplicitDomain,
        solution: &'a TorsionSolution,
        sample: &'a BoundarySample,
        summary: &'a GeometricSummary,
        u_nu: &'a NormalDerivative,
    ) -> Self {
        let weights = quadrature::volume_weights(&domain.grid, &domain.phi);
        let g = solution.gradient_bound(u_nu);
        IdentityContext { domain, solution, sample, summary, u_nu, g, weights }
    }

    fn volume_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.weights.len())
            .map(|i| if self.weights[i] != 0.0 { f(i) } else { 0.0 })
            .collect();
        det_dot(&self.weights, &vals)
    }

    fn boundary_integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        let vals: Vec<f64> = (0..self.sample.len()).map(f).collect();
        self.sample.integrate(&vals)
    }

    /// `int (-u)`.
    pub fn integral_neg_u(&self) -> f64 {
        self.volume_integral(|i| -self.solution.u_ext[i])
    }

    /// `int |grad u|`.
    pub fn integral_grad(&self) -> f64 {
        self.volume_integral(|i| norm(self.solution.grad[i]))
    }
}

fn cs_integrand(hm: &[[f64; 3]; 3], n: usize) -> f64 {
    let mut sq = 0.0;
    let mut tr = 0.0;
    for a in 0..n {
        tr += hm[a][a];
        for b in 0..n {
            sq += hm[a][b] * hm[a][b];
        }
    }
    sq - tr * tr / n as f64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeficitReport {
    pub cs_deficit: f64,
    pub serrin_deficit: f64,
    pub rhs_weighted: f64,
    pub fi_lhs: f64,
    pub fi_residual: f64,
    /// Smallest Cauchy–Schwarz integrand over fully interior nodes.
    pub cs_integrand_min: f64,
    /// Volume weight carried by nodes with an inherited Hessian.
    pub inherited_hessian_weight: f64,
    /// `(1/|dOmega|) int u_nu`, which equals `R`.
    pub mean_u_nu: f64,
    pub g: f64,
    pub lemma21_slacks: [f64; 2],
}

/// Both sides of the fundamental identity.
pub fn fundamental_identity(ctx: &IdentityContext) -> DeficitReport {
    let sol = ctx.solution;
    let n = sol.dim();
    let s = ctx.summary;
    let cs = ctx.volume_integral(|i| cs_integrand(&sol.hess[i], n));
    let un = &ctx.u_nu.values;
    let serrin = ctx.boundary_integral(|k| (un[k] - s.r).powi(2)) / s.r;
    let rhs = ctx.boundary_integral(|k| (s.h0 - ctx.sample.mean_curvature[k]) * un[k] * un[k]);
    let lhs = cs / (n as f64 - 1.0) + serrin;
    let cs_min = (0..sol.grid.len())
        .filter(|&i| sol.full_stencil[i])
        .map(|i| cs_integrand(&sol.hess[i], n))
        .fold(f64::INFINITY, f64::min);
    let inherited: Vec<f64> = (0..ctx.weights.len())
        .filter(|&i| !sol.full_stencil[i])
        .map(|i| ctx.weights[i])
        .collect();
    let g2d = ctx.g * ctx.g * s.delta;
    DeficitReport {
        cs_deficit: cs,
        serrin_deficit: serrin,
        rhs_weighted: rhs,
        fi_lhs: lhs,
        fi_residual: (lhs - rhs).abs() / rhs.abs().max(1.0),
        cs_integrand_min: cs_min,
        inherited_hessian_weight: det_sum(&inherited),
        mean_u_nu: ctx.boundary_integral(|k| un[k]) / ctx.sample.total_weight(),
        g: ctx.g,
        lemma21_slacks: [(n as f64 - 1.0) * g2d - cs, g2d - serrin],
    }
}

pub const LEMMA21_TOL: f64 = 1e-3;

/// Cauchy–Schwarz and Serrin deficits against `G^2 delta`.
pub fn lemma21_check(report: &DeficitReport, summary: &GeometricSummary) -> Result<[Check; 2]> {
    let n = summary.dim as f64;
    let g2d = report.g * report.g * summary.delta;
    let checks = [
        Check::le("int(|D2u|^2-(Lu)^2/N) <= (N-1) G^2 delta", report.cs_deficit, (n - 1.0) * g2d, LEMMA21_TOL),
        Check::le("(1/R) int(u_nu-R)^2 <= G^2 delta", report.serrin_deficit, g2d, LEMMA21_TOL),
    ];
    match first_failure(&checks) {
        Some(c) => Err(c.inequality_error()),
        None => Ok(checks),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub z: Point,
    pub integral_neg_u: f64,
    pub dirichlet_over_n: f64,
    pub boundary_term: f64,
    pub residual: f64,
    /// Relative gap between `int(-u)` and `(1/N) int |grad u|^2`.
    pub ibp_residual: f64,
    pub inequality: Check,
}

/// `int(-u) = 1/(N(N+2)) int u_nu^2 <x - z, nu>` for `z` in the domain.
pub fn pohozaev_check(ctx: &IdentityContext, z: Point) -> Result<PohozaevReport> {
    if !ctx.domain.contains(z) {
        return Err(Error::ZOutsideDomain { z });
    }
    let sol = ctx.solution;
    let n = sol.dim() as f64;
    let s = ctx.summary;
    let un = &ctx.u_nu.values;
    let lhs = ctx.integral_neg_u();
    let dir = ctx.volume_integral(|i| dot(sol.grad[i], sol.grad[i])) / n;
    let bt = ctx.boundary_integral(|k| un[k] * un[k] * dot(sub(ctx.sample.points[k], z), ctx.sample.normals[k]))
        / (n * (n + 2.0));
    let c3 = 2.0 * (n * s.volume).sqrt() * s.diameter * ctx.g * ctx.g;
    let tol = 1e-3 * lhs.abs().max(1.0);
    let inequality = Check::le(
        "|int(-u) - R^2|Omega|/(N+2)| <= C3 sqrt(delta)",
        (lhs - s.r * s.r * s.volume / (n + 2.0)).abs(),
        c3 * s.delta.sqrt(),
        tol,
    );
    Ok(PohozaevReport {
        z,
        integral_neg_u: lhs,
        dirichlet_over_n: dir,
        boundary_term: bt,
        residual: (lhs - bt).abs() / lhs.abs().max(f64::MIN_POSITIVE),
        ibp_residual: (lhs - dir).abs() / lhs.abs().max(f64::MIN_POSITIVE),
        inequality,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub lhs: f64,
    pub rn_volume: f64,
    pub boundary_term: f64,
    pub hessian_term: f64,
    pub rhs: f64,
    pub residual: f64,
    pub checks: Vec<Check>,
}

/// `(N+1) int|grad u| = RN|Omega| + int(u_nu^2 - R^2) - int |grad u|^{-1} <(D2u - I) grad u, grad u>`.
pub fn divergence_identity_check(ctx: &IdentityContext) -> DivergenceReport {
    let sol = ctx.solution;
    let nn = sol.dim();
    let n = nn as f64;
    let s = ctx.summary;
    let un = &ctx.u_nu.values;
    let int_grad = ctx.integral_grad();
    let lhs = (n + 1.0) * int_grad;
    let bt = ctx.boundary_integral(|k| un[k] * un[k] - s.r * s.r);
    let ht = ctx.volume_integral(|i| {
        let g = sol.grad[i];
        let gn = norm(g);
        if gn <= 1e-8 {
            return 0.0;
        }
        let hm = &sol.hess[i];
        let mut q = 0.0;
        for a in 0..nn {
            for b in 0..nn {
                let m = hm[a][b] - if a == b { 1.0 } else { 0.0 };
                q += m * g[a] * g[b];
            }
        }
        q / gn
    });
    let rnv = s.r * n * s.volume;
    let rhs = rnv + bt - ht;
    let g2 = ctx.g * ctx.g;
    let sd = s.delta.sqrt();
    let tol = 1e-3 * lhs.abs().max(1.0);
    let checks = vec![
        Check::le(
            "|int |grad u|^-1 <(D2u-I) grad u, grad u>| <= sqrt(N-1) G^2 |Omega|^(1/2) sqrt(delta)",
            ht.abs(),
            (n - 1.0).sqrt() * g2 * s.volume.sqrt() * sd,
            tol,
        ),
        Check::le(
            "|int(u_nu^2 - R^2)| <= 2 (N|Omega|)^(1/2) G^2 sqrt(delta)",
            bt.abs(),
            2.0 * (n * s.volume).sqrt() * g2 * sd,
            tol,
        ),
        Check::le(
            "|R|Omega| - (N+1)/N int|grad u|| <= ((2 sqrt N + sqrt(N-1))/N) |Omega|^(1/2) G^2 sqrt(delta)",
            (s.r * s.volume - (n + 1.0) / n * int_grad).abs(),
            (2.0 * n.sqrt() + (n - 1.0).sqrt()) / n * s.volume.sqrt() * g2 * sd,
            tol,
        ),
    ];
    DivergenceReport {
        lhs,
        rn_volume: rnv,
        boundary_term: bt,
        hessian_term: ht,
        rhs,
        residual: (lhs - rhs).abs() / lhs.abs().max(1.0),
        checks,
    }
}

/// `delta <= |dOmega|^{(N-3)/(N-2)} ||H0 - H||_{L^{N-2}}`.
pub fn holder_corollary_check(summary: &GeometricSummary) -> Result<Check> {
    let n = summary.dim;
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            context: "Hölder comparison with p = N-2 (needs N >= 3)".into(),
        });
    }
    let p = n as f64 - 2.0;
    let bound = summary.perimeter.powf((n as f64 - 3.0) / p) * summary.lp_deviation(p);
    Ok(Check::le(
        "delta <= |dOmega|^((N-3)/(N-2)) ||H0-H||_{L^(N-2)}",
        summary.delta,
        bound,
        1e-12 * bound.abs().max(1.0),
    ))
}

/// Identity residuals and inequality checks for one domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub deficits: DeficitReport,
    pub lemma21: Vec<Check>,
    pub pohozaev: PohozaevReport,
    pub divergence: DivergenceReport,
}

/// Run the full identity suite with the reference point `z`.
pub fn identity_suite(ctx: &IdentityContext, z: Point) -> Result<IdentityReport> {
    let deficits = fundamental_identity(ctx);
    let lemma21 = lemma21_check(&deficits, ctx.summary)
        .map(|c| c.to_vec())
        .unwrap_or_else(|_| {
            let n = ctx.summary.dim as f64;
            let g2d = deficits.g * deficits.g * ctx.summary.delta;
            vec![
                Check::le("int(|D2u|^2-(Lu)^2/N) <= (N-1) G^2 delta", deficits.cs_deficit, (n - 1.0) * g2d, LEMMA21_TOL),
                Check::le("(1/R) int(u_nu-R)^2 <= G^2 delta", deficits.serrin_deficit, g2d, LEMMA21_TOL),
            ]
        });
    Ok(IdentityReport {
        pohozaev: pohozaev_check(ctx, z)?,
        divergence: divergence_identity_check(ctx),
        deficits,
        lemma21,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::boundary::sample_boundary;
    use crate::geometry::family::{Family, Shape};
    use crate::geometry::summary::{closed_form_summary, geometric_summary};
    use crate::torsion::solve_torsion;
    use std::f64::consts::PI;

    fn run(shape: Shape, h: f64, z: Point) -> (GeometricSummary, IdentityReport) {
        let d = ImplicitDomain::build(shape, Some(h)).unwrap();
        let sol = solve_torsion(&d).unwrap();
        let count = (8.0 * 2.0 * PI / h) as usize;
        let b = sample_boundary(&d.shape, &d.grid, &d.level, count).unwrap();
        let sum = geometric_summary(&d, &b).unwrap();
        let un = sol.normal_derivative(&b);
        let ctx = IdentityContext::new(&d, &sol, &b, &sum, &un);
        let rep = identity_suite(&ctx, z).unwrap();
        (sum, rep)
    }

    #[test]
    fn unit_disk_identities() {
        let disk = Shape::new(2, Family::Ball { center: [0.0; 3], rho: 1.0 }).unwrap();
        let (_, r) = run(disk.clone(), 1.0 / 32.0, [0.0; 3]);
        assert!(r.deficits.cs_deficit.abs() < 1e-3);
        assert!(r.deficits.serrin_deficit.abs() < 1e-3);
        assert!(r.deficits.rhs_weighted.abs() < 1e-3);
        assert!(r.deficits.fi_residual < 1e-3);
        assert!((r.pohozaev.integral_neg_u - PI / 4.0).abs() < 1e-3);
        assert!(r.pohozaev.residual < 2e-3);
        assert!((r.divergence.lhs - 2.0 * PI).abs() < 2e-2);
        assert!(r.divergence.residual < 2e-3);
        let (_, r2) = run(disk, 1.0 / 32.0, [0.5, 0.0, 0.0]);
        assert!((r2.pohozaev.residual - r.pohozaev.residual).abs() < 1e-3);
    }

    #[test]
    fn ellipse_identities_and_lemma21() {
        let e = Shape::new(2, Family::Ellipse { center: [0.0; 3], a: 1.5, b: 1.0 }).unwrap();
        let (_, r) = run(e, 1.0 / 64.0, [0.0; 3]);
        assert!(r.deficits.fi_residual < 2e-2, "{:?}", r.deficits);
        assert!(r.pohozaev.residual < 2e-2);
        assert!(r.divergence.residual < 2e-2);
        assert!(r.lemma21.iter().all(|c| c.holds));
        assert!(r.deficits.cs_integrand_min >= -1e-10);
    }

    #[test]
    fn z_outside_rejected() {
        let disk = Shape::new(2, Family::Ball { center: [0.0; 3], rho: 1.0 }).unwrap();
        let d = ImplicitDomain::build(disk, Some(1.0 / 16.0)).unwrap();
        let sol = solve_torsion(&d).unwrap();
        let b = sample_boundary(&d.shape, &d.grid, &d.level, 128).unwrap();
        let sum = geometric_summary(&d, &b).unwrap();
        let un = sol.normal_derivative(&b);
        let ctx = IdentityContext::new(&d, &sol, &b, &sum, &un);
        assert!(matches!(pohozaev_check(&ctx, [2.0, 0.0, 0.0]), Err(Error::ZOutsideDomain { .. })));
    }

    #[test]
    fn holder_annulus_and_planar_rejection() {
        let a = Shape::new(3, Family::Annulus { r_out: 2.0, r_in: 0.3 }).unwrap();
        let c = holder_corollary_check(&closed_form_summary(&a).unwrap()).unwrap();
        assert!(c.holds && c.slack >= 0.0);
        let disk = Shape::new(2, Family::Annulus { r_out: 2.0, r_in: 0.3 }).unwrap();
        let s2 = closed_form_summary(&disk).unwrap();
        assert!(matches!(holder_corollary_check(&s2), Err(Error::UnsupportedDimension { .. })));
    }
}
