//! Optimal quantum tracking: transform weighted sequences of source density
//! matrices into target sequences with the best physically allowed channel.

pub mod analytic;
pub mod applications;
pub mod channels;
pub mod distances;
pub mod error;
pub mod mat;
pub mod multistep;
pub mod sdp;
pub mod sequence;
pub mod tracking;

pub use error::{Error, Result};
