//! Theorem-level bounds and the intermediate inequalities of the
//! decomposition, evaluated with ledger constants.

use serde::{Deserialize, Serialize};

use super::decomposition::Component;
use super::ledger::ConstantsLedger;
use super::metrics::BubbleMetrics;
use crate::checks::Check;
use crate::geometry::domain::ImplicitDomain;
use crate::geometry::summary::GeometricSummary;
use crate::torsion::TorsionSolution;
use crate::vecmath::unit_ball_volume;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundPath {
    /// `delta` below every smallness threshold: ledger constants.
    Constructive,
    /// `delta >= c`: bounds that hold for any admissible domain.
    Trivial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub path: BoundPath,
    /// The smallness constant `c`.
    pub c: f64,
    pub checks: Vec<Check>,
}

impl TheoremReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Evaluate (1.5)-(1.9) for the retained family. `m` is the number of
/// retained balls; `h` sets the discretization tolerances.
pub fn theorem_bound_check(
    metrics: &BubbleMetrics,
    summary: &GeometricSummary,
    delta: f64,
    ledger: &ConstantsLedger,
    m: usize,
    h: f64,
) -> TheoremReport {
    let dim = ledger.dim;
    let n = dim as f64;
    let b1 = unit_ball_volume(dim);
    let a = ledger.alpha;
    let d = ledger.d_omega;
    let vol = ledger.volume;
    let r = summary.r;
    let e4 = delta.powf(a / 4.0);
    let e2 = delta.powf(a / 2.0);
    let amax = a / n.max(4.0);
    let emax = delta.powf(amax);
    let c = ledger.min_threshold();
    // Tolerances: radii are resolved to 2h; volumes and perimeters to a
    // 2h shell of the boundary.
    let tol_r = 2.0 * h;
    let tol_v = 2.0 * h * summary.perimeter;
    let tol_p = 2.0 * h * (n - 1.0).max(1.0) * summary.perimeter / r;
    let mut checks = vec![];
    let path = if ledger.below_thresholds(delta) {
        checks.push(Check::le("(1.5) |rho_int - R| <= C10 delta^(alpha/4)", metrics.radius_err_max, ledger.c10 * e4, tol_r));
        checks.push(Check::le("(1.6) |Omega sym F| <= C11 delta^(alpha/max(4,N))", metrics.sym_diff, ledger.c11 * emax, tol_v));
        checks.push(Check::le("(1.7) max_dF dist <= (2 + 2 d C2) delta^(alpha/2)", metrics.hausdorff, (2.0 + 2.0 * d * ledger.c2) * e2, tol_r));
        checks.push(Check::le(
            "(1.8) ||dOmega| - |dF|| <= N (C11 + 2|Omega| C10) delta^(alpha/max(4,N))",
            metrics.perim_diff,
            n * (ledger.c11 + 2.0 * vol * ledger.c10) * emax,
            tol_p,
        ));
        let denom = b1 * (r - ledger.c10 * e4).abs().powi(dim as i32);
        checks.push(Check::le("(1.9) m <= |Omega| / (|B1| |R - C10 delta^(alpha/4)|^N)", m as f64, vol / denom, 1e-9 * (m as f64).max(1.0)));
        BoundPath::Constructive
    } else {
        checks.push(Check::le("(1.5) trivial: |rho_int - R| <= d c^(-alpha/4) delta^(alpha/4)", metrics.radius_err_max, d / c.powf(a / 4.0) * e4, tol_r));
        let vb = b1 * d.powi(dim as i32) / c.powf(amax) * emax;
        checks.push(Check::le("(1.6) trivial: |Omega sym F| <= |B1| d^N c^(-alpha/max(4,N)) delta^(alpha/max(4,N))", metrics.sym_diff, vb, tol_v));
        checks.push(Check::le("(1.7) trivial: max_dF dist <= d c^(-alpha/2) delta^(alpha/2)", metrics.hausdorff, d / c.powf(a / 2.0) * e2, tol_r));
        checks.push(Check::le("(1.8) trivial: ||dOmega| - |dF|| <= N |B1| d^N c^(-alpha/max(4,N)) delta^(alpha/max(4,N))", metrics.perim_diff, n * vb, tol_p));
        BoundPath::Trivial
    };
    TheoremReport { path, c, checks }
}

/// Intermediate inequalities of the construction, over all components of
/// the sublevel set. `applies` is false above the smallness thresholds, where
/// the checks are reported but not implied by the argument.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepReport {
    pub applies: bool,
    pub checks: Vec<Check>,
}

impl StepReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn step_inequalities(
    domain: &ImplicitDomain,
    sol: &TorsionSolution,
    summary: &GeometricSummary,
    components: &[Component],
    ledger: &ConstantsLedger,
    delta: f64,
    eps: f64,
    integral_neg_u: f64,
    integral_grad: f64,
) -> StepReport {
    let dim = ledger.dim;
    let n = dim as f64;
    let b1 = unit_ball_volume(dim);
    let r = summary.r;
    let vol = summary.volume;
    let e2 = delta.powf(ledger.alpha / 2.0);
    let h = domain.h();
    let rho: Vec<f64> = components.iter().map(|c| c.rho_int).collect();
    let sum_pow = |k: i32| -> f64 { rho.iter().map(|p| p.powi(k)).sum() };
    let tol = 2.0 * h * summary.perimeter;
    let mut checks = vec![
        Check::le(
            "radii sum: |B1| sum rho^N (rho - R)^2 <= C6 delta^(alpha/2)",
            b1 * rho.iter().map(|p| p.powi(dim as i32) * (p - r).powi(2)).sum::<f64>(),
            ledger.c6 * e2,
            tol,
        ),
        Check::le(
            "radii squared: |R^2 |Omega| - |B1| sum rho^(N+2)| <= (N+2)(C3+C4) delta^(alpha/2)",
            (r * r * vol - b1 * sum_pow(dim as i32 + 2)).abs(),
            (n + 2.0) * (ledger.c3 + ledger.c4) * e2,
            tol,
        ),
        Check::le(
            "radii: |R |Omega| - |B1| sum rho^(N+1)| <= C5 delta^(alpha/2)",
            (r * vol - b1 * sum_pow(dim as i32 + 1)).abs(),
            ledger.c5 * e2,
            tol,
        ),
        Check::le(
            "torsion volume: |int(-u) - |B1|/(N+2) sum rho^(N+2)| <= C4 delta^(alpha/2)",
            (integral_neg_u - b1 / (n + 2.0) * sum_pow(dim as i32 + 2)).abs(),
            ledger.c4 * e2,
            tol,
        ),
        Check::le(
            "gradient volume: |(N+1)/N int|grad u| - |B1| sum rho^(N+1)| <= C8 delta^(alpha/2)",
            ((n + 1.0) / n * integral_grad - b1 * sum_pow(dim as i32 + 1)).abs(),
            ledger.c8 * e2,
            tol,
        ),
    ];
    for c in components {
        checks.push(Check::le(
            format!("component {}: rho_ext - rho_int <= 2 d C2 delta^(alpha/2)", c.id),
            c.rho_ext - c.rho_int,
            2.0 * ledger.d_omega * ledger.c2 * e2,
            2.0 * h,
        ));
    }
    // dist >= eps / G on the eps-sublevel.
    let g = ledger.g;
    let mut worst = (f64::INFINITY, [0.0; 3]);
    for i in 0..sol.grid.len() {
        if sol.interior[i] && sol.u[i] < -eps {
            let x = sol.grid.point(i);
            let s = domain.distance(x) - eps / g;
            if s < worst.0 {
                worst = (s, x);
            }
        }
    }
    if worst.0.is_finite() {
        checks.push(Check::le("dist >= eps/G on Omega_eps", 0.0, worst.0, 0.1 * h).at(worst.1));
    }
    StepReport {
        applies: ledger.below_thresholds(delta),
        checks,
    }
}
