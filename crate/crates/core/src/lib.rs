//! Reconstruction of polyhedral scenes from sparse marker data.

pub mod error;
pub mod generate;
pub mod geometry;
pub mod io;
pub mod markup;
pub mod oracle;
pub mod pipeline;
pub mod placement;
pub mod recon;
pub mod tolerance;

pub use error::{Error, Result};
