//! Dyadic partition of unity, block norms `||Delta_j f||_p` for `p` in
//! `{2, inf}` and homogeneous Besov norms with high/low frequency bands.

mod besov;
mod norms;
mod partition;

pub use besov::{
    besov_norm, Band, BesovEvaluator, BesovNorm, BesovSpec, Exponent, DEFAULT_J_MAX, DEFAULT_J_MIN,
};
pub use norms::{
    block_norm, field_l1, field_l2_squared, l2_norm, linf_norm, NormValue, PNative, RadialWindow,
};
pub use partition::{build_partition, PartitionProfile, DEFAULT_TRANSITION_WIDTH};

pub use crate::spectral::{Component, SpectralState, SymmetryTag};
