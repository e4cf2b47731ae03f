//! Exact computational engine for the achievable rate region of the noisy
//! three-pair interference channel.

pub mod channel;
pub mod constraints;
pub mod error;
pub mod identities;
pub mod io;
pub mod logform;
pub mod pmf;
pub mod polytope;
pub mod rates;
pub mod rational;
pub mod region;
pub mod suite;
pub mod tables;
pub mod vars;

pub use error::{Error, Result};
