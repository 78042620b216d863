//! Reading-order engine for visually rich documents.
//!
//! Eye-tracking trajectories become gold reading orders ([`gaze`]), rule
//! orderers and pairwise comparators produce predicted orders ([`orderers`],
//! [`comparator`], [`preorder`]) and [`metrics`] scores them.

pub mod cli;
pub mod comparator;
pub mod error;
pub mod gaze;
pub mod io;
pub mod metrics;
pub mod model;
pub mod orderers;
pub mod preorder;
pub mod render;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use model::{BoundingBox, Centroid, Document, GazePoint, GazeTrajectory, ReadingSequence, SubsetTag};
