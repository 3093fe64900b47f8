//! Pairwise (cascade) summation.
//!
//! Every reduction in the crate goes through these helpers so that results are
//! independent of how work was split across threads: callers collect partial
//! values in a fixed order and reduce them here.

use num_complex::Complex64;

const BLOCK: usize = 8;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}
