//! Radial spanning trees (RST) and directed spanning forests (DSF) built on
//! Palm-version Poisson point processes in the plane, together with the
//! machinery used to study their semi-infinite paths and the competition
//! interfaces between the subtrees rooted at the children of the origin.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, angles and the exact segment predicates.
//! * [`ppp`]: Poisson sampling and the deterministic proof configurations.
//! * [`tree`]: RST / DSF construction and invariant checks.
//! * [`paths`]: surviving-path proxies, crossing counts and the DSF agreement test.
//! * [`interfaces`]: colouring, traces, interface angles and sectors.
//! * [`stats`] and [`montecarlo`]: estimators and the replicate harness.
//! * [`io`]: the CSV schemas shared with the command-line tool.

// Parameter checks use `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod grid;
pub mod interfaces;
pub mod io;
pub mod montecarlo;
pub mod paths;
pub mod ppp;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
pub use geometry::{segment_circle_intersections, Point};
pub use interfaces::{
    color_subtrees, sector_angles, theta_r, trace_at, trace_interface, unbounded_count, Color,
    Coloring, InterfaceTrace, LabelScheme, Sector, ThetaR, TracePoint,
};
pub use montecarlo::{run_monte_carlo, AggregateReport, MonteCarloConfig, ReplicateRecord};
pub use paths::{
    chi, chi_tilde, directional_paths, dsf_rst_agreement, extreme_path, spine_bifurcations,
    surviving_set, PathProxy, Side, SurvivorConfig, Survivors,
};
pub use ppp::{make_m1_config, make_m2_config, sample_palm_ppp, PointSet, ORIGIN};
pub use stats::{beta_moment_fit, empirical_distribution, ks_statistic, BetaFit};
pub use tree::{
    build_dsf, build_rst_indexed, build_rst_naive, check_noncrossing, verify_rst_property, Forest,
    Tree,
};
