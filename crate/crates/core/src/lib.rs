//! Rectangular Gilbert tessellation.
//!
//! Seeds of a marked Poisson process each grow a horizontal or vertical segment in both
//! directions at unit speed; a growing tip stops on hitting an existing segment. This crate
//! provides:
//!
//! - [`engine`]: exact event-driven growth in a square box, plus early-terminating resolution
//!   of selected half-rays;
//! - [`oracle`]: a brute-force time-stepping simulator used as an independent check;
//! - [`graph`]: the planar subdivision of a frozen tessellation, with Euler bookkeeping;
//! - [`experiments`]: Palm Monte Carlo estimators for segment lengths, growth-event
//!   covariances and boundary-escaping counts;
//! - [`lattice`]: the inhibitory cellular automaton and a discrete ray-growth model;
//! - [`render`]: SVG output.
//!
//! ```
//! use gilbert_tess::{simulate, BoxDomain, Direction, Point2, SeedSet};
//!
//! let domain = BoxDomain::new(4.0).unwrap();
//! let seeds = SeedSet::from_points(
//!     domain,
//!     &[(Point2::new(1.0, 1.0), Direction::Horizontal), (Point2::new(3.0, 2.0), Direction::Vertical)],
//! )
//! .unwrap();
//! let t = simulate(&seeds, 4.0).unwrap();
//! assert_eq!(t.escaping_rays().unwrap(), 3);
//! ```

pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod lattice;
pub mod oracle;
pub mod render;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use engine::{resolve_half_rays, simulate, HalfRay, RayLength, Stop, Tessellation};
pub use error::{Error, Result};
pub use geometry::{
    independence_horizon, l1_distance, regions_intersect, BoxDomain, DependenceRegion, Direction, Point2, Side,
};
pub use graph::{euler_check, extract_graph, EulerReport, PlanarGraph};
pub use lattice::{ca_run, ca_step, lattice_ray_simulate, LatticeRayConfig, LatticeState};
pub use oracle::oracle_simulate;
pub use sampling::{insert_palm, sample_poisson, MarkDistribution, SeedPoint, SeedSet};
