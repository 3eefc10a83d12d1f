//! Bounds on the power, MMSE and rate trade-offs of Gaussian information
//! embedding, where an encoder must both convey a message and shape a host
//! signal that the decoder reconstructs. At rate zero this is the vector
//! Witsenhausen counterexample.

pub mod achievability;
pub mod cli;
pub mod error;
pub mod lower_bounds;
pub mod mc;
pub mod model;
pub mod optim;
pub mod sweep;
pub mod weighted_cost;

pub use error::{Error, Result};
pub use model::{ProblemParams, WeightedCostParams};
