//! Anti-robust exploratory statistics for paired series.
//!
//! Tonsuring removes the observations closest to the center of a bivariate
//! sample (under an L2 or R1 distance) and re-evaluates association on what
//! is left, so the statistics describe only the larger joint moves. The
//! crate also provides empirical tail dependence and tail insulation curves,
//! copula-space octant populations, a tonsured CAPM beta, and seeded
//! Gaussian null models to compare every scan against.

pub mod association;
pub mod distance;
pub mod error;
pub mod ingest;
pub mod null;
pub mod scans;
pub mod series;
pub mod tail;
pub mod tonsure;

pub use association::{pearson, somers_dba, spearman, AssociationValue, Measure};
pub use distance::{distances, DistanceVector, Metric, Space};
pub use error::{Error, Result};
pub use null::{gen_gaussian_pair, gh_transform, GandHSpec, GaussianPairSpec, NullEnvelope, NullSpec};
pub use scans::{ScanCurve, ScanKind, ScanPoint};
pub use series::{compute_centroid, compute_ranks, Centroid, CentroidMode, PairedSeries, RankedSeries};
pub use tail::{PseudoObservations, TailCurve, TailRegion};
pub use tonsure::{tonsure_by_percent, tonsure_grid, TonsureResult};
