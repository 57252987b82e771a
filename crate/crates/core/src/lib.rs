//! Incidence rigidity for points and spheres over prime fields.
//!
//! Builds point-sphere configurations in `F_q^d`, measures incidence energy
//! and the near-extremality parameter `K`, and extracts a linear certificate
//! (a hyperplane carrying a large structured subset) from the bisector
//! hyperplanes of coinciding sphere pairs.

pub mod error;
pub mod exact;
pub mod field;
pub mod generators;
pub mod geometry;
pub mod incidence;
pub mod io;
pub mod matrix;
pub mod multiset;
pub mod pipeline;
pub mod poly;
pub mod reductions;
pub mod stratify;
pub mod verify;

pub use error::{Error, Result};
