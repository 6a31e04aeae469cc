//! Phase-plane analysis of nonnegative travelling waves of a degenerate
//! parabolic equation and its porous-medium transforms.

pub mod asymptotics;
pub mod bifurcation;
pub mod cli;
pub mod compactify;
pub mod equilibria;
pub mod error;
pub mod field;
pub mod integrate;
pub mod params;
pub mod profile;
pub mod profiles;
pub mod residual;

pub use error::{Error, Result};
pub use params::Params;
