//! Exact construction and cluster analysis of Engel sets: layered Delone
//! sets built from translates of `2aℤ^{d-1}` stacked along the last axis.
//!
//! All arithmetic is exact. Squared distances are rational even when `b` is
//! not, and radii such as `2dR - ε` are handled as `u + v·√D`.
//!
//! ```
//! use engelset::{count_classes, EngelParams, Limits, RadiusSq, Rational};
//!
//! let planar = EngelParams::planar_example();
//! let report = count_classes(&planar, &RadiusSq::from_radius(&Rational::from(48)), Limits::default()).unwrap();
//! assert_eq!(report.n, 1);
//! ```

pub mod clusters;
pub mod congruence;
pub mod construct;
pub mod error;
pub mod figure;
pub mod frame;
pub mod geometry;
pub mod number;
pub mod onedim;
pub mod params;
pub mod regularity;
pub mod sequence;
pub mod tables;

pub use clusters::{
    cluster_group, clusters_equivalent, count_classes, extract_cluster, layer_representatives, ClassReport, Cluster,
    ClusterGroup, IsometryWitness,
};
pub use construct::{chain_point, chain_profile, generate_window, layer_origin, required_window, LayerWindow, Limits};
pub use error::{Error, Result};
pub use geometry::{sq_dist, OrthoMap, SplitVector};
pub use number::{cmp_rational_quad, QuadRadius, RadiusSq, Rational};
pub use params::{EngelParams, ParamFile};
pub use sequence::ShiftSequence;
