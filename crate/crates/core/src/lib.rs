//! Numerical laboratory for Littlewood-Paley analysis, Besov norms and
//! pseudospectral Camassa-Holm / Degasperis-Procesi experiments on a large
//! periodic torus.

pub mod constructions;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod fit;
pub mod io;
pub mod littlewood_paley;
pub mod quadrature;
pub mod spectral;

pub use error::{LabError, Result};
