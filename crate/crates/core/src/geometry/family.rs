//! Analytic domain families: level functions, closed forms and metadata.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::grid::BBox;
use crate::vecmath::{self, dist, norm, sub, unit_ball_volume, Point};

/// Family tags accepted in scenario files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Ball,
    UnionOfBalls,
    Ellipse,
    Dumbbell,
    PerturbedBall,
    Annulus,
}

impl FamilyTag {
    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::Ball => "ball",
            FamilyTag::UnionOfBalls => "union_of_balls",
            FamilyTag::Ellipse => "ellipse",
            FamilyTag::Dumbbell => "dumbbell",
            FamilyTag::PerturbedBall => "perturbed_ball",
            FamilyTag::Annulus => "annulus",
        }
    }
}

/// Family description as it appears in JSON:
/// `{"family":"dumbbell","N":2,"params":{"d":3.0,"rho":1.0,"w":0.2}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyTag,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(default)]
    pub params: Map<String, Value>,
}

/// Validated family parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Ball { center: Point, rho: f64 },
    UnionOfBalls { centers: Vec<Point>, radii: Vec<f64> },
    Ellipse { center: Point, a: f64, b: f64 },
    /// Two balls of radius `rho` centered at `(-d/2, 0)` and `(d/2, 0)`
    /// joined by a neck of half-width `w`, blended with smoothing length `k`.
    Dumbbell { d: f64, rho: f64, w: f64, k: f64 },
    /// Star-shaped `r = rho (1 + amplitude cos(mode * angle))`.
    PerturbedBall { rho: f64, amplitude: f64, mode: u32 },
    /// `B_{r_out} \ closure(B_{r_in})`, centered at the origin.
    Annulus { r_out: f64, r_in: f64 },
}

/// Ray bracket used to locate one star-shaped boundary component.
#[derive(Clone, Copy, Debug)]
pub struct RadialComponent {
    pub center: Point,
    pub r_inside: f64,
    pub r_outside: f64,
}

/// A family together with its ambient dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub dim: usize,
    pub family: Family,
}

fn invalid(family: FamilyTag, reason: impl Into<String>) -> Error {
    Error::InvalidFamilyParams {
        family: family.name().to_string(),
        reason: reason.into(),
    }
}

fn get_f64(params: &Map<String, Value>, key: &str, default: Option<f64>, tag: FamilyTag) -> Result<f64> {
    match params.get(key) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| invalid(tag, format!("parameter `{key}` must be a number"))),
        None => default.ok_or_else(|| invalid(tag, format!("missing parameter `{key}`"))),
    }
}

fn get_point(params: &Map<String, Value>, key: &str, tag: FamilyTag) -> Result<Point> {
    match params.get(key) {
        None => Ok([0.0; 3]),
        Some(v) => parse_point(v, tag),
    }
}

fn parse_point(v: &Value, tag: FamilyTag) -> Result<Point> {
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(tag, "points must be arrays of numbers"))?;
    let xs: Option<Vec<f64>> = arr.iter().map(|x| x.as_f64()).collect();
    let xs = xs.ok_or_else(|| invalid(tag, "points must be arrays of numbers"))?;
    if xs.is_empty() || xs.len() > 3 {
        return Err(invalid(tag, "points must have 1 to 3 coordinates"));
    }
    Ok(vecmath::from_slice(&xs))
}

fn positive(tag: FamilyTag, name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(tag, format!("`{name}` must be positive, got {v}")))
    }
}

/// Numerically stable `-k ln sum exp(-a_i / k)`.
fn smooth_min(values: &[f64], k: f64) -> f64 {
    let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let s: f64 = values.iter().map(|a| (-(a - m) / k).exp()).sum();
    m - k * s.ln()
}

fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let t = (vecmath::dot(sub(x, a), ab) / vecmath::dot(ab, ab)).clamp(0.0, 1.0);
    dist(x, vecmath::add(a, vecmath::scale(ab, t)))
}

impl Shape {
    /// Validate a JSON family spec.
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let tag = spec.family;
        let dim = spec.dim;
        if !(dim == 2 || dim == 3) {
            return Err(Error::UnsupportedDimension {
                dim,
                context: format!("family `{}` (N must be 2 or 3)", tag.name()),
            });
        }
        let p = &spec.params;
        let family = match tag {
            FamilyTag::Ball => Family::Ball {
                center: get_point(p, "center", tag)?,
                rho: get_f64(p, "rho", Some(1.0), tag)?,
            },
            FamilyTag::UnionOfBalls => {
                let centers: Vec<Point> = p
                    .get("centers")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| invalid(tag, "missing array parameter `centers`"))?
                    .iter()
                    .map(|v| parse_point(v, tag))
                    .collect::<Result<_>>()?;
                let radii: Vec<f64> = match p.get("radii") {
                    Some(v) => v
                        .as_array()
                        .ok_or_else(|| invalid(tag, "`radii` must be an array"))?
                        .iter()
                        .map(|x| x.as_f64().ok_or_else(|| invalid(tag, "`radii` must be numbers")))
                        .collect::<Result<_>>()?,
                    None => vec![get_f64(p, "rho", Some(1.0), tag)?; centers.len()],
                };
                Family::UnionOfBalls { centers, radii }
            }
            FamilyTag::Ellipse => Family::Ellipse {
                center: get_point(p, "center", tag)?,
                a: get_f64(p, "a", None, tag)?,
                b: get_f64(p, "b", None, tag)?,
            },
            FamilyTag::Dumbbell => {
                let rho = get_f64(p, "rho", Some(1.0), tag)?;
                Family::Dumbbell {
                    d: get_f64(p, "d", None, tag)?,
                    rho,
                    w: get_f64(p, "w", None, tag)?,
                    k: get_f64(p, "k", Some(0.05 * rho), tag)?,
                }
            }
            FamilyTag::PerturbedBall => Family::PerturbedBall {
                rho: get_f64(p, "rho", Some(1.0), tag)?,
                amplitude: get_f64(p, "amplitude", Some(0.1), tag)?,
                mode: get_f64(p, "mode", Some(3.0), tag)? as u32,
            },
            FamilyTag::Annulus => Family::Annulus {
                r_out: get_f64(p, "r_out", Some(2.0), tag)?,
                r_in: match p.get("r_in") {
                    Some(_) => get_f64(p, "r_in", None, tag)?,
                    None => get_f64(p, "eps", None, tag)?,
                },
            },
        };
        let shape = Shape { dim, family };
        shape.validate()?;
        Ok(shape)
    }

    pub fn new(dim: usize, family: Family) -> Result<Self> {
        let s = Shape { dim, family };
        s.validate()?;
        Ok(s)
    }

    pub fn tag(&self) -> FamilyTag {
        match self.family {
            Family::Ball { .. } => FamilyTag::Ball,
            Family::UnionOfBalls { .. } => FamilyTag::UnionOfBalls,
            Family::Ellipse { .. } => FamilyTag::Ellipse,
            Family::Dumbbell { .. } => FamilyTag::Dumbbell,
            Family::PerturbedBall { .. } => FamilyTag::PerturbedBall,
            Family::Annulus { .. } => FamilyTag::Annulus,
        }
    }

    fn validate(&self) -> Result<()> {
        let tag = self.tag();
        if !(self.dim == 2 || self.dim == 3) {
            return Err(Error::UnsupportedDimension {
                dim: self.dim,
                context: format!("family `{}`", tag.name()),
            });
        }
        match &self.family {
            Family::Ball { rho, .. } => positive(tag, "rho", *rho),
            Family::UnionOfBalls { centers, radii } => {
                if centers.is_empty() {
                    return Err(invalid(tag, "need at least one ball"));
                }
                if centers.len() != radii.len() {
                    return Err(invalid(tag, "`centers` and `radii` differ in length"));
                }
                for r in radii {
                    positive(tag, "radius", *r)?;
                }
                for i in 0..centers.len() {
                    for j in i + 1..centers.len() {
                        if dist(centers[i], centers[j]) <= radii[i] + radii[j] {
                            return Err(invalid(tag, format!("balls {i} and {j} are not disjoint")));
                        }
                    }
                }
                Ok(())
            }
            Family::Ellipse { a, b, .. } => {
                if self.dim != 2 {
                    return Err(Error::UnsupportedDimension {
                        dim: self.dim,
                        context: "ellipse family (planar only)".into(),
                    });
                }
                positive(tag, "a", *a)?;
                positive(tag, "b", *b)
            }
            Family::Dumbbell { d, rho, w, k } => {
                positive(tag, "d", *d)?;
                positive(tag, "rho", *rho)?;
                positive(tag, "w", *w)?;
                positive(tag, "k", *k)?;
                if *w >= *rho {
                    return Err(invalid(tag, format!("neck half-width w={w} must be smaller than rho={rho}")));
                }
                Ok(())
            }
            Family::PerturbedBall { rho, amplitude, mode } => {
                positive(tag, "rho", *rho)?;
                if !(amplitude.abs() < 0.5) {
                    return Err(invalid(tag, "|amplitude| must be below 0.5"));
                }
                if *mode == 0 {
                    return Err(invalid(tag, "mode must be at least 1"));
                }
                Ok(())
            }
            Family::Annulus { r_out, r_in } => {
                positive(tag, "r_out", *r_out)?;
                positive(tag, "r_in", *r_in)?;
                if r_in >= r_out {
                    return Err(invalid(tag, format!("inner radius {r_in} must be below outer radius {r_out}")));
                }
                Ok(())
            }
        }
    }

    /// Level function: negative inside, zero on the boundary.
    pub fn level(&self, x: Point) -> f64 {
        match &self.family {
            Family::Ball { center, rho } => dist(x, *center) - rho,
            Family::UnionOfBalls { centers, radii } => centers
                .iter()
                .zip(radii)
                .map(|(c, r)| dist(x, *c) - r)
                .fold(f64::INFINITY, f64::min),
            Family::Ellipse { center, a, b } => {
                let y = sub(x, *center);
                let q = ((y[0] / a).powi(2) + (y[1] / b).powi(2)).sqrt();
                (q - 1.0) * (a * b).sqrt()
            }
            Family::Dumbbell { d, rho, w, k } => {
                let c1 = [-d / 2.0, 0.0, 0.0];
                let c2 = [d / 2.0, 0.0, 0.0];
                let parts = [
                    dist(x, c1) - rho,
                    dist(x, c2) - rho,
                    segment_distance(x, c1, c2) - w,
                ];
                smooth_min(&parts, *k)
            }
            Family::PerturbedBall { rho, amplitude, mode } => {
                let r = norm(x);
                let angle = if self.dim == 2 {
                    x[1].atan2(x[0])
                } else if r > 0.0 {
                    (x[2] / r).clamp(-1.0, 1.0).acos()
                } else {
                    0.0
                };
                r - rho * (1.0 + amplitude * (*mode as f64 * angle).cos())
            }
            Family::Annulus { r_out, r_in } => {
                let r = norm(x);
                (r - r_out).max(r_in - r)
            }
        }
    }

    /// True when `level` is an exact signed distance function.
    pub fn level_is_exact_distance(&self) -> bool {
        matches!(
            self.family,
            Family::Ball { .. } | Family::UnionOfBalls { .. } | Family::Annulus { .. }
        )
    }

    /// Characteristic length used to pick finite-difference steps.
    pub fn length_scale(&self) -> f64 {
        match &self.family {
            Family::Ball { rho, .. } => *rho,
            Family::UnionOfBalls { radii, .. } => radii.iter().cloned().fold(0.0, f64::max),
            Family::Ellipse { a, b, .. } => a.max(*b),
            Family::Dumbbell { rho, .. } => *rho,
            Family::PerturbedBall { rho, .. } => *rho,
            Family::Annulus { r_out, .. } => *r_out,
        }
    }

    /// Mean curvature in closed form, where one exists.
    pub fn closed_form_curvature(&self, x: Point) -> Option<f64> {
        match &self.family {
            Family::Ball { rho, .. } => Some(1.0 / rho),
            Family::UnionOfBalls { centers, radii } => {
                let (i, _) = centers
                    .iter()
                    .zip(radii)
                    .map(|(c, r)| (dist(x, *c) - r).abs())
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
                Some(1.0 / radii[i])
            }
            Family::Ellipse { center, a, b } => {
                let y = sub(x, *center);
                let t = (y[1] / b).atan2(y[0] / a);
                let s = (a * t.sin()).powi(2) + (b * t.cos()).powi(2);
                Some(a * b / s.powf(1.5))
            }
            Family::Annulus { r_out, r_in } => {
                let r = norm(x);
                if (r - r_out).abs() <= (r - r_in).abs() {
                    Some(1.0 / r_out)
                } else {
                    Some(-1.0 / r_in)
                }
            }
            Family::Dumbbell { .. } | Family::PerturbedBall { .. } => None,
        }
    }

    /// `|Omega|` in closed form where one exists.
    pub fn closed_form_volume(&self) -> Option<f64> {
        let n = self.dim as i32;
        let b1 = unit_ball_volume(self.dim);
        match &self.family {
            Family::Ball { rho, .. } => Some(b1 * rho.powi(n)),
            Family::UnionOfBalls { radii, .. } => Some(radii.iter().map(|r| b1 * r.powi(n)).sum()),
            Family::Annulus { r_out, r_in } => Some(b1 * (r_out.powi(n) - r_in.powi(n))),
            Family::Ellipse { a, b, .. } => Some(std::f64::consts::PI * a * b),
            Family::PerturbedBall { rho, amplitude, .. } if self.dim == 2 => {
                Some(std::f64::consts::PI * rho * rho * (1.0 + 0.5 * amplitude * amplitude))
            }
            _ => None,
        }
    }

    /// `|dOmega|` in closed form, for the sphere-bounded families.
    pub fn closed_form_perimeter(&self) -> Option<f64> {
        let n = self.dim as i32;
        let c = self.dim as f64 * unit_ball_volume(self.dim);
        match &self.family {
            Family::Ball { rho, .. } => Some(c * rho.powi(n - 1)),
            Family::UnionOfBalls { radii, .. } => Some(radii.iter().map(|r| c * r.powi(n - 1)).sum()),
            Family::Annulus { r_out, r_in } => Some(c * (r_out.powi(n - 1) + r_in.powi(n - 1))),
            _ => None,
        }
    }

    /// Exact diameter where known.
    pub fn closed_form_diameter(&self) -> Option<f64> {
        match &self.family {
            Family::Ball { rho, .. } => Some(2.0 * rho),
            Family::Annulus { r_out, .. } => Some(2.0 * r_out),
            Family::UnionOfBalls { centers, radii } => {
                let mut d = radii.iter().cloned().fold(0.0, f64::max) * 2.0;
                for i in 0..centers.len() {
                    for j in i + 1..centers.len() {
                        d = d.max(dist(centers[i], centers[j]) + radii[i] + radii[j]);
                    }
                }
                Some(d)
            }
            _ => None,
        }
    }

    /// Tight box around the closure of the domain.
    pub fn extent(&self) -> BBox {
        let n = self.dim;
        let cube = |c: Point, r: f64| {
            let mut min = [0.0; 3];
            let mut max = [0.0; 3];
            for d in 0..n {
                min[d] = c[d] - r;
                max[d] = c[d] + r;
            }
            BBox { min, max }
        };
        match &self.family {
            Family::Ball { center, rho } => cube(*center, *rho),
            Family::UnionOfBalls { centers, radii } => {
                let mut b = cube(centers[0], radii[0]);
                for (c, r) in centers.iter().zip(radii).skip(1) {
                    let o = cube(*c, *r);
                    for d in 0..n {
                        b.min[d] = b.min[d].min(o.min[d]);
                        b.max[d] = b.max[d].max(o.max[d]);
                    }
                }
                b
            }
            Family::Ellipse { center, a, b } => BBox {
                min: [center[0] - a, center[1] - b, 0.0],
                max: [center[0] + a, center[1] + b, 0.0],
            },
            Family::Dumbbell { d, rho, .. } => {
                let mut b = cube([0.0; 3], *rho);
                b.min[0] = -d / 2.0 - rho;
                b.max[0] = d / 2.0 + rho;
                b
            }
            Family::PerturbedBall { rho, amplitude, .. } => cube([0.0; 3], rho * (1.0 + amplitude.abs())),
            Family::Annulus { r_out, .. } => cube([0.0; 3], *r_out),
        }
    }

    /// Extent padded by at least 0.25 on every side.
    pub fn padded_bbox(&self) -> BBox {
        let mut b = self.extent();
        let pad = 0.25_f64.max(0.125 * self.length_scale());
        for d in 0..self.dim {
            b.min[d] -= pad;
            b.max[d] += pad;
        }
        b
    }

    /// Width of the thinnest feature the grid has to resolve.
    pub fn min_feature_width(&self) -> f64 {
        match &self.family {
            Family::Ball { rho, .. } => 2.0 * rho,
            Family::UnionOfBalls { radii, .. } => 2.0 * radii.iter().cloned().fold(f64::INFINITY, f64::min),
            Family::Ellipse { a, b, .. } => 2.0 * a.min(*b),
            Family::Dumbbell { w, .. } => 2.0 * w,
            Family::PerturbedBall { rho, amplitude, .. } => 2.0 * rho * (1.0 - amplitude.abs()),
            Family::Annulus { r_out, r_in } => (r_out - r_in).min(2.0 * r_in),
        }
    }

    /// Dilation by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> Shape {
        let sp = |p: &Point| vecmath::scale(*p, lambda);
        let family = match &self.family {
            Family::Ball { center, rho } => Family::Ball { center: sp(center), rho: rho * lambda },
            Family::UnionOfBalls { centers, radii } => Family::UnionOfBalls {
                centers: centers.iter().map(sp).collect(),
                radii: radii.iter().map(|r| r * lambda).collect(),
            },
            Family::Ellipse { center, a, b } => Family::Ellipse { center: sp(center), a: a * lambda, b: b * lambda },
            Family::Dumbbell { d, rho, w, k } => Family::Dumbbell {
                d: d * lambda,
                rho: rho * lambda,
                w: w * lambda,
                k: k * lambda,
            },
            Family::PerturbedBall { rho, amplitude, mode } => Family::PerturbedBall {
                rho: rho * lambda,
                amplitude: *amplitude,
                mode: *mode,
            },
            Family::Annulus { r_out, r_in } => Family::Annulus { r_out: r_out * lambda, r_in: r_in * lambda },
        };
        Shape { dim: self.dim, family }
    }

    /// Star-shaped boundary components with ray brackets, for surface sampling.
    pub fn radial_components(&self) -> Option<Vec<RadialComponent>> {
        match &self.family {
            Family::Ball { center, rho } => Some(vec![RadialComponent {
                center: *center,
                r_inside: 0.0,
                r_outside: 1.5 * rho,
            }]),
            Family::UnionOfBalls { centers, radii } => {
                let mut gap = f64::INFINITY;
                for i in 0..centers.len() {
                    for j in i + 1..centers.len() {
                        gap = gap.min(dist(centers[i], centers[j]) - radii[i] - radii[j]);
                    }
                }
                Some(
                    centers
                        .iter()
                        .zip(radii)
                        .map(|(c, r)| RadialComponent {
                            center: *c,
                            r_inside: 0.0,
                            r_outside: r + 0.5 * gap.min(*r),
                        })
                        .collect(),
                )
            }
            Family::PerturbedBall { rho, amplitude, .. } => Some(vec![RadialComponent {
                center: [0.0; 3],
                r_inside: 0.0,
                r_outside: rho * (1.0 + amplitude.abs()) * 1.01,
            }]),
            Family::Annulus { r_out, r_in } => {
                let mid = 0.5 * (r_out + r_in);
                Some(vec![
                    RadialComponent { center: [0.0; 3], r_inside: mid, r_outside: 1.01 * r_out },
                    RadialComponent { center: [0.0; 3], r_inside: mid, r_outside: 0.0 },
                ])
            }
            Family::Ellipse { center, .. } => Some(vec![RadialComponent {
                center: *center,
                r_inside: 0.0,
                r_outside: 1.01 * self.length_scale(),
            }]),
            Family::Dumbbell { .. } => None,
        }
    }

    /// Inside test for a point (strict).
    pub fn contains(&self, x: Point) -> bool {
        self.level(x) < 0.0
    }
}
