//! Quadrature building blocks: fixed Gauss-Legendre cells, the adaptive
//! driver, on-axis inverse Fourier transforms and the oscillatory region
//! integrals built on top of them.

pub mod adaptive;
pub mod axis;
pub mod gauss;
pub mod halfspace;
pub mod regions;
pub mod sup;

pub use adaptive::{integrate, integrate_real, integrate_vec, QuadOptions, QuadValue};
pub use axis::{
    inverse_ft_axis, inverse_ft_cartesian, AxisEvaluator, AxisMarginal, AxisSum,
    AxisymmetricIntegrand, Branch, Certificate, Harmonic, PhaseMeta, RadialIntegrand,
    RadialMarginal, FT_NORM,
};
