//! Reconstruction rules from markup back to scenes.

pub mod convex;
pub mod dense;
pub mod elaboration;
pub mod rect2d;
pub mod vertex;

use crate::markup::MarkerId;
use std::fmt;

/// Non-fatal findings reported alongside a reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The marker's plane supports no face of the result.
    RedundantPlane(MarkerId),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::RedundantPlane(id) => write!(f, "plane of marker {id} supports no face and was ignored"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Outcome<T> {
    pub fn clean(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }
}
