//! Explicit constants of the constructive decomposition.

use serde::{Deserialize, Serialize};

use crate::vecmath::unit_ball_volume;

/// Constants `C1..C11`, `Ĉ` and the interior-estimate constant `C̄`, together
/// with the inputs they were computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub dim: usize,
    pub d_omega: f64,
    pub m0_minus: f64,
    pub g: f64,
    pub volume: f64,
    pub alpha: f64,
    pub cbar: f64,
    /// Human-readable formula used for `cbar`.
    pub cbar_formula: String,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c_hat: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub c10: f64,
    pub c11: f64,
    /// `delta <= 1`, `delta < C2^{-2/alpha}`, `delta < (1/(2 C10))^{4/alpha}`.
    pub thresholds: [f64; 3],
}

/// `2/(2N+7)`.
pub fn alpha(dim: usize) -> f64 {
    2.0 / (2.0 * dim as f64 + 7.0)
}

/// Default interior-estimate constant: `2 N^2 d^2`.
pub fn default_cbar(dim: usize, d_omega: f64) -> f64 {
    let n = dim as f64;
    2.0 * n * n * d_omega * d_omega
}

impl ConstantsLedger {
    /// Evaluate every constant. `cbar = None` selects [`default_cbar`].
    pub fn new(
        dim: usize,
        d_omega: f64,
        m0_minus: f64,
        g: f64,
        volume: f64,
        cbar: Option<f64>,
    ) -> Self {
        let n = dim as f64;
        let b1 = unit_ball_volume(dim);
        let d = d_omega;
        let alpha = alpha(dim);
        let (cbar, cbar_formula) = match cbar {
            Some(c) => (c, "user supplied".to_string()),
            None => (default_cbar(dim, d), "2 N^2 d^2".to_string()),
        };
        let c1 = g.powi(dim as i32) / b1 * (n.sqrt() + cbar * g * g);
        let c2 = n * ((n - 1.0).sqrt() * g + c1);
        let c3 = 2.0 * (n * volume).sqrt() * d * g * g;
        let c_hat = 2.0 + 2.0 * d * d * c2 * (c2 + 1.0);
        let c4 = volume * (2.0 + 2.0 * g * d * c2 + d * d * c2 / 2.0 + c_hat);
        let k = 2.0 + 2.0 * d * c2;
        let c7 = g * (1.0 + k * m0_minus).powi(dim as i32 - 1) * k * n * volume;
        let c8 = (n + 1.0) / n.sqrt() * (d * c2 * volume + c7 / n.sqrt());
        let c5 = (2.0 * n.sqrt() + (n - 1.0).sqrt()) / n * volume.sqrt() * g * g + c8;
        let c6 = (n + 2.0) * (c3 + c4) + 2.0 * g * c5;
        let c9 = (4.0 * c6 / b1).powf(1.0 / n);
        let c10 = (2f64.powi(dim as i32) * c6 / b1).sqrt();
        let c11 = volume * (c10 * c10 + 2.0 * g * c10 + c9 * c9) + (c3 + c4);
        let thresholds = [
            1.0,
            c2.powf(-2.0 / alpha),
            (1.0 / (2.0 * c10)).powf(4.0 / alpha),
        ];
        ConstantsLedger {
            dim,
            d_omega,
            m0_minus,
            g,
            volume,
            alpha,
            cbar,
            cbar_formula,
            c1,
            c2,
            c3,
            c4,
            c_hat,
            c5,
            c6,
            c7,
            c8,
            c9,
            c10,
            c11,
            thresholds,
        }
    }

    /// The smallness constant `c`: the least of the thresholds.
    pub fn min_threshold(&self) -> f64 {
        self.thresholds.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Whether `delta` satisfies every smallness condition (`<= 1`, strict
    /// for the other two).
    pub fn below_thresholds(&self, delta: f64) -> bool {
        delta <= self.thresholds[0] && delta < self.thresholds[1] && delta < self.thresholds[2]
    }

    pub fn all_finite_positive(&self) -> bool {
        [
            self.c1, self.c2, self.c3, self.c4, self.c_hat, self.c5, self.c6, self.c7, self.c8,
            self.c9, self.c10, self.c11,
        ]
        .iter()
        .all(|c| c.is_finite() && *c > 0.0)
    }
}
