//! Pseudo-spectral simulation of ideal viscoelastic (Oldroyd) flow on the
//! periodic box, with run-time monitors for every quantity entering the
//! Beale–Kato–Majda type continuation criterion: the curl time integral,
//! the `H³` energy and curl `L²` growth bounds, Kato's logarithmic gradient
//! inequality and the Gronwall quantity.

pub mod checks;
pub mod config;
pub mod curl_system;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod io;
pub mod monitor;
pub mod run;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
