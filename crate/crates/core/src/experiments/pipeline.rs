//! One domain through geometry, torsion, identities, decomposition and tubes.

use serde::{Deserialize, Serialize};

use crate::bubbling::{
    ball_filter, bubble_metrics, compute_metrics, convexity_check, empirical_epsilon, equal_radius_family,
    step_inequalities, sublevel_decomposition, theorem_bound_check, Ball, BubbleMetrics, ConstantsLedger,
    ConvexityReport, EqualRadiusFamily, FilterMode, FilterResult, StepReport, TheoremReport,
};
use crate::checks::Check;
use crate::error::{Error, Result};
use crate::geometry::{geometric_summary, rescale_to_unit_r, sample_boundary, GeometricSummary, ImplicitDomain, Shape};
use crate::identities::{identity_suite, IdentityContext, IdentityReport};
use crate::torsion::{lemma22_bounds_check, solve_torsion, Lemma22Report, TorsionSolution};
use crate::tubular::{tubular_asymptotic, tubular_reports, TubularAsymptotic, TubularReport};
use crate::vecmath::Point;

pub const DEFAULT_ETAS: [f64; 4] = [0.05, 0.1, 0.2, 0.5];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    /// Grid spacing in units where `R = 1`; `None` picks the default.
    pub grid_h: Option<f64>,
    pub mode: FilterMode,
    pub identities: bool,
    pub decomposition: bool,
    pub tubular_etas: Vec<f64>,
    pub tubular_asymptotic: bool,
    pub equal_radius: bool,
    /// Override of the interior-estimate constant.
    pub cbar: Option<f64>,
    /// Dilate to `R = 1` before analysis.
    pub rescale: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            grid_h: None,
            mode: FilterMode::Empirical,
            identities: true,
            decomposition: true,
            tubular_etas: DEFAULT_ETAS.to_vec(),
            tubular_asymptotic: true,
            equal_radius: false,
            cbar: None,
            rescale: true,
        }
    }
}

impl PipelineOptions {
    pub fn validate(&self) -> Result<()> {
        if self.equal_radius && !self.decomposition {
            return Err(Error::ConfigParse("equal_radius requires decomposition".into()));
        }
        if let Some(h) = self.grid_h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::ConfigParse(format!("grid_h must be positive, got {h}")));
            }
        }
        if self.tubular_etas.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::ConfigParse("tubular_etas must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorsionInfo {
    pub iterations: usize,
    pub residual: f64,
    pub max_neg_u: f64,
    pub integral_neg_u: f64,
    pub g: f64,
    /// Boundary samples where the normal derivative came out negative.
    pub hopf_flagged: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallRecord {
    pub z: Point,
    pub rho_int: f64,
    pub rho_ext: f64,
    pub retained: bool,
}

/// Serialized decomposition: balls, metrics, ledger and mode, plus the checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub m: usize,
    pub balls: Vec<BallRecord>,
    pub metrics: BubbleMetrics,
    pub ledger: ConstantsLedger,
    pub mode: FilterMode,
    pub epsilon: f64,
    /// Set when the sublevel set was empty and the trivial bounds were used.
    pub fallback: Option<String>,
    pub filter: FilterResult,
    pub convexity: Option<ConvexityReport>,
    pub theorem: TheoremReport,
    pub steps: Option<StepReport>,
    pub equal_radius: Option<EqualRadiusFamily>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubularSection {
    pub reports: Vec<TubularReport>,
    pub asymptotic: Option<TubularAsymptotic>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub scenario: String,
    pub param: Option<f64>,
    pub shape: Shape,
    /// The factor divided out to reach `R = 1`.
    pub scale: f64,
    pub h: f64,
    pub summary: GeometricSummary,
    pub torsion: TorsionInfo,
    pub lemma22: Lemma22Report,
    pub identities: Option<IdentityReport>,
    pub decomposition: Option<DecompositionReport>,
    pub tubular: Option<TubularSection>,
    /// Names of every failed check.
    pub violations: Vec<String>,
}

fn sample_count(shape: &Shape, h: f64) -> usize {
    let l = shape.padded_bbox().diagonal(shape.dim);
    if shape.dim == 2 {
        ((8.0 * std::f64::consts::PI * l / h).ceil() as usize).clamp(256, 400_000)
    } else {
        let s = shape.length_scale() / h;
        ((4.0 * s * s).ceil() as usize).clamp(2_000, 400_000)
    }
}

/// Domain, boundary sample and summary.
pub fn prepare(shape: Shape, h: Option<f64>) -> Result<(ImplicitDomain, crate::geometry::BoundarySample, GeometricSummary)> {
    let domain = ImplicitDomain::build(shape, h)?;
    let sample = sample_boundary(&domain.shape, &domain.grid, &domain.level, sample_count(&domain.shape, domain.h()))?;
    let summary = geometric_summary(&domain, &sample)?;
    Ok((domain, sample, summary))
}

/// Grid node where `u` is smallest; a safe interior reference point.
fn deepest_point(sol: &TorsionSolution) -> Point {
    let mut best = None::<usize>;
    for i in 0..sol.grid.len() {
        if sol.interior[i] && best.map_or(true, |b| sol.u[i] < sol.u[b]) {
            best = Some(i);
        }
    }
    best.map(|i| sol.grid.point(i)).unwrap_or([0.0; 3])
}

fn collect(violations: &mut Vec<String>, prefix: &str, checks: &[Check]) {
    for c in checks.iter().filter(|c| !c.holds) {
        violations.push(format!("{prefix}: {} (slack {:.3e})", c.name, c.slack));
    }
}

/// Run the pipeline on `shape`.
pub fn analyze(scenario: &str, param: Option<f64>, shape: Shape, opts: &PipelineOptions) -> Result<AnalysisReport> {
    opts.validate()?;
    let (mut domain, mut sample, mut summary) = prepare(shape.clone(), opts.grid_h)?;
    let mut scale = 1.0;
    if opts.rescale && summary.r != 1.0 {
        let (scaled, s) = rescale_to_unit_r(&shape, &summary)?;
        scale = s;
        (domain, sample, summary) = prepare(scaled, opts.grid_h)?;
    }
    let h = domain.h();
    let sol = solve_torsion(&domain)?;
    let u_nu = sol.normal_derivative(&sample);
    let ctx = IdentityContext::new(&domain, &sol, &sample, &summary, &u_nu);
    let g = ctx.g;
    let integral_neg_u = ctx.integral_neg_u();
    let mut violations = vec![];
    let lemma22 = lemma22_bounds_check(&domain, &sol, &summary, g);
    collect(&mut violations, "maximum/gradient bounds", &lemma22.checks);

    let identities = if opts.identities {
        let rep = identity_suite(&ctx, deepest_point(&sol))?;
        collect(&mut violations, "deficit inequalities", &rep.lemma21);
        collect(&mut violations, "Pohozaev", std::slice::from_ref(&rep.pohozaev.inequality));
        collect(&mut violations, "step 5", &rep.divergence.checks);
        Some(rep)
    } else {
        None
    };

    let decomposition = if opts.decomposition {
        let ledger = ConstantsLedger::new(summary.dim, summary.diameter, summary.m0_minus, g, summary.volume, opts.cbar);
        let delta = summary.delta;
        let eps = match opts.mode {
            FilterMode::Paper => delta.powf(ledger.alpha),
            FilterMode::Empirical => empirical_epsilon(&sol, delta, ledger.alpha),
        };
        let (comps, fallback) = match sublevel_decomposition(&sol, eps) {
            Ok(c) => (c, None),
            Err(e @ Error::EmptySublevel { .. }) => (vec![], Some(e.to_string())),
            Err(e) => return Err(e),
        };
        let filter = match ball_filter(&comps, summary.r, delta, &ledger, opts.mode, 2.0 * h) {
            Ok(f) => f,
            Err(Error::Precondition(msg)) => {
                violations.push(format!("filter skipped: {msg}"));
                FilterResult { mode: opts.mode, ..Default::default() }
            }
            Err(e) => return Err(e),
        };
        if !filter.unclassified.is_empty() {
            violations.push(format!("unclassified components: {:?}", filter.unclassified));
        }
        let balls: Vec<Ball> = filter.retained.iter().map(|&i| Ball { z: comps[i].z, rho: comps[i].rho_int }).collect();
        let metrics = match bubble_metrics(&domain, &summary, &balls) {
            Ok(m) => m,
            Err(e @ (Error::ContainmentViolation { .. } | Error::OverlapViolation { .. })) => {
                violations.push(e.to_string());
                compute_metrics(&domain, &summary, &balls)
            }
            Err(e) => return Err(e),
        };
        let theorem = theorem_bound_check(&metrics, &summary, delta, &ledger, filter.m, h);
        collect(&mut violations, "theorem bounds", &theorem.checks);
        let (convexity, steps) = if comps.is_empty() {
            (None, None)
        } else {
            let cv = convexity_check(&sol, &comps, &ledger, delta);
            collect(&mut violations, "convexity", &cv.checks);
            let st = step_inequalities(&domain, &sol, &summary, &comps, &ledger, delta, eps, integral_neg_u, ctx.integral_grad());
            if st.applies {
                collect(&mut violations, "construction inequalities", &st.checks);
            }
            (Some(cv), Some(st))
        };
        let equal_radius = if opts.equal_radius && !balls.is_empty() {
            let er = equal_radius_family(&balls, summary.r, &domain, &summary)?;
            collect(&mut violations, "equal radius", &er.checks);
            Some(er)
        } else {
            None
        };
        let records = comps
            .iter()
            .map(|c| BallRecord {
                z: c.z,
                rho_int: c.rho_int,
                rho_ext: c.rho_ext,
                retained: filter.retained.contains(&c.id),
            })
            .collect();
        Some(DecompositionReport {
            m: filter.m,
            balls: records,
            metrics,
            ledger,
            mode: opts.mode,
            epsilon: eps,
            fallback,
            filter,
            convexity,
            theorem,
            steps,
            equal_radius,
        })
    } else {
        None
    };

    let tubular = if !opts.tubular_etas.is_empty() || opts.tubular_asymptotic {
        let reports = tubular_reports(&domain, &summary, &opts.tubular_etas)?;
        for r in reports.iter().filter(|r| !r.holds) {
            violations.push(format!("tube volume at eta = {}: measured {:.4e} > bound {:.4e}", r.eta, r.measured, r.bound));
        }
        let asymptotic = opts.tubular_asymptotic.then(|| tubular_asymptotic(&domain, &summary));
        Some(TubularSection { reports, asymptotic })
    } else {
        None
    };

    Ok(AnalysisReport {
        scenario: scenario.to_string(),
        param,
        shape: domain.shape.clone(),
        scale,
        h,
        summary,
        torsion: TorsionInfo {
            iterations: sol.iterations,
            residual: sol.residual,
            max_neg_u: sol.max_neg_u,
            integral_neg_u,
            g,
            hopf_flagged: u_nu.flagged.len(),
        },
        lemma22,
        identities,
        decomposition,
        tubular,
        violations,
    })
}
