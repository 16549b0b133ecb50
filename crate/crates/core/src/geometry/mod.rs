//! Hyperbolic geometry of the unit ball `B^q ⊂ C^q`.

pub mod automorphism;
pub mod metric;
pub mod point;
pub mod regions;
pub mod sampling;

pub use automorphism::{Automorphism, BoundaryNormalForm};
pub use metric::{
    axis_point, dist_to_geodesic, geodesic_point, horofunction, horofunction_limit, kob_dist,
    GeodesicProjection,
};
pub use point::{BallPoint, BoundaryPoint, BOUNDARY_GUARD};
pub use regions::{koranyi_functional, GeodesicTube, Horosphere, KoranyiRegion, Membership};
