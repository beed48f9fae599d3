pub mod boundary;
pub mod curvature;
pub mod domain;
pub mod family;
pub mod summary;

pub use boundary::{sample_boundary, BoundarySample};
pub use curvature::mean_curvature;
pub use domain::{build_family, default_h, ImplicitDomain};
pub use family::{Family, FamilySpec, FamilyTag, Shape};
pub use summary::{closed_form_summary, geometric_summary, rescale_to_unit_r, GeometricSummary};
