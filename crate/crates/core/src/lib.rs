//! Affine iterated function systems with condensation: affinity dimension
//! estimation, attractor generation, box-counting dimension estimates and
//! numerical checks of the dimension bounds relating them.

pub mod affinity;
pub mod attractor;
pub mod boxdim;
pub mod cli;
pub mod config;
pub mod error;
pub mod geom;
pub mod ifs;
pub mod io;
pub mod matrix;
pub mod verify;

pub use error::{Error, Result};
