//! Weighted colourings of Binomial random graphs with random integer edge
//! weights, and the threshold for locally correct colourings of balanced
//! pattern graphs.
//!
//! * [`graph`] and [`weights`]: `G(n, p)` generation and i.i.d. edge weights
//!   from a reproducible [`Seed`].
//! * [`colouring`]: verifier, interval-exclusion greedy, the locally averaged
//!   bound, the two-stage bad-vertex colouring and an exact branch and bound.
//! * [`patterns`]: balancedness, automorphisms and copy enumeration.
//! * [`threshold`]: good copies and colourings, `G_K`, the threshold exponent
//!   and the progression / window counters.
//! * [`experiments`]: parameter sweeps emitting CSV or JSON lines.

pub mod colouring;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod patterns;
pub mod scalar;
pub mod seed;
pub mod threshold;
pub mod weights;

pub use colouring::{
    exact_chi_w, greedy_colour, greedy_colour_default, local_average_bound, max_incident_weight, two_stage_colour,
    verify_weighted, vertex_weight_sums, Colouring, ExactOutcome, TwoStageReport,
};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentKind, OutputFormat, TrialRecord};
pub use graph::{degree_stats, gen_gnp, DegreeStats, EdgeWeightMap, Graph, Vertex};
pub use patterns::{enumerate_copies, expected_copy_count, Copy, PatternGraph};
pub use scalar::Scalar;
pub use seed::Seed;
pub use threshold::{
    count_y_lower, count_z_upper, estimate_good_fraction, is_good_copy, restrict_to_gk, theta_threshold,
    GoodnessReport, ThresholdParams,
};
pub use weights::{sample_weights, WeightDistributionSpec};

/// Default floating-point scalar.
pub type Real = f64;
/// Exact scalar for densities and thresholds with rational inputs.
pub type Rational = num_rational::Ratio<i64>;
/// Arbitrary-precision exact scalar.
pub type BigRational = num_rational::BigRational;
