//! Inequality checks with slack and tolerance.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::vecmath::Point;

/// One evaluated inequality `lhs <= rhs`, accepted when `rhs - lhs >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Point>,
}

impl Check {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        Check {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            holds: slack >= -tolerance && slack.is_finite(),
            point: None,
        }
    }

    pub fn at(mut self, p: Point) -> Self {
        self.point = Some(p);
        self
    }

    pub fn bound_error(&self) -> Error {
        Error::BoundViolated {
            inequality: self.name.clone(),
            slack: self.slack,
            point: self.point,
        }
    }

    pub fn inequality_error(&self) -> Error {
        Error::InequalityViolated {
            inequality: self.name.clone(),
            slack: self.slack,
            tolerance: self.tolerance,
        }
    }
}

/// First failing check, if any.
pub fn first_failure(checks: &[Check]) -> Option<&Check> {
    checks.iter().find(|c| !c.holds)
}
