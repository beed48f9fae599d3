//! Decomposition of almost-umbilical domains into nearly equal balls.

pub mod bounds;
pub mod decomposition;
pub mod equal_radius;
pub mod filter;
pub mod ledger;
pub mod metrics;

pub use bounds::{step_inequalities, theorem_bound_check, BoundPath, StepReport, TheoremReport};
pub use decomposition::{convexity_check, empirical_epsilon, split_epsilon, sublevel_decomposition, Component, ConvexityReport};
pub use equal_radius::{equal_radius_family, EqualRadiusFamily};
pub use filter::{ball_filter, FilterMode, FilterResult};
pub use ledger::ConstantsLedger;
pub use metrics::{bubble_metrics, compute_metrics, Ball, BubbleMetrics};
