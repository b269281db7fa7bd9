//! Finite-depth realizations of random Cantor sets `E(M_n, N_n)` together with
//! their natural measure, exact affine geometry against the subdivision grid,
//! and Monte-Carlo experiments on intersection statistics with flats, strips
//! and tubes.
//!
//! The crate is organised around five subsystems:
//!
//! * [`construction`] — subdivision parameters, pluggable subset-selection
//!   rules and reproducible tree construction;
//! * [`measure`] — the natural mass distribution on a realization, ball
//!   measures, regularity scans and exact planar projections;
//! * [`geometry`] — flat/cube intersection measures, plane angles, the
//!   projection sup-metric, discretization nets and strip incidence counts;
//! * [`stats`] — martingale, moment-generating-function, tail, good-event,
//!   tube-scan and box-dimension experiments;
//! * [`config`] / [`report`] — run configuration, experiment registry and
//!   JSON/CSV report emission.

pub mod config;
pub mod construction;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod measure;
pub mod report;
pub mod stats;

pub use construction::{ConstructionParams, CubeAddress, LevelSpec, Realization};
pub use error::Error;
pub use geometry::{Flat, Strip};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
