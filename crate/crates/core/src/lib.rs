//! Exact payment-minimizing mechanisms for covering problems.

pub mod bounds;
pub mod dsicext;
pub mod error;
pub mod exact;
pub mod instances;
pub mod io;
pub mod lookahead;
pub mod lp;
pub mod mechanism;
pub mod model;
pub mod payment;
pub mod plugins;
pub mod relax;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Rational;
