pub mod decay_analysis;
pub mod eigensystem;
pub mod error;
pub mod littlewood_paley;
pub mod oscillatory_quadrature;
pub mod propagator;
pub mod smooth;
pub mod spectral;
pub mod summation;
pub mod witness_data;

pub use error::{LabError, Result};
