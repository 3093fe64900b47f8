use serde::{Deserialize, Serialize};

use crate::error::{finite, invalid, Result};
use crate::smooth::smooth_step;

pub const DEFAULT_TRANSITION_WIDTH: f64 = 0.25;

/// Radial dyadic partition `phi_j(xi) = phi_0(2^{-j} xi)` with
/// `phi_0(r) = chi(r) - chi(2r)`.
///
/// `chi` equals 1 for `log2 r <= 1/2 - w` and 0 for `log2 r >= 1/2 + w`, with
/// an `exp(-1/x)` smooth step in between (`w` is `transition_width`, measured
/// in octaves). Hence `phi_0` is 1 on `2^{-1/2+w} <= r <= 2^{1/2-w}` and
/// vanishes outside `2^{-1/2-w} <= r <= 2^{1/2+w}`, inside `[1/2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionProfile {
    transition_width: f64,
}

impl Default for PartitionProfile {
    fn default() -> Self {
        Self {
            transition_width: DEFAULT_TRANSITION_WIDTH,
        }
    }
}

pub fn build_partition(transition_width: f64) -> Result<PartitionProfile> {
    let w = finite("transition_width", transition_width)?;
    if !(w > 0.0 && w < 0.5) {
        return Err(invalid(
            "transition_width",
            format!("must lie in (0, 1/2) to leave a nonempty plateau, got {w}"),
        ));
    }
    Ok(PartitionProfile {
        transition_width: w,
    })
}

impl PartitionProfile {
    pub fn transition_width(&self) -> f64 {
        self.transition_width
    }

    /// Smooth cutoff: 1 near the origin, 0 for `r >= 2^{1/2+w}`.
    pub fn chi(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        let w = self.transition_width;
        1.0 - smooth_step((r.log2() - (0.5 - w)) / (2.0 * w))
    }

    pub fn phi0(&self, r: f64) -> f64 {
        let r = r.abs();
        if r == 0.0 {
            return 0.0;
        }
        // the two transitions never overlap, so each side is a single step
        // evaluated without cancellation
        let w = self.transition_width;
        let u = (r.log2() - (0.5 - w)) / (2.0 * w);
        let u2 = u + 0.5 / w;
        if u <= 0.0 {
            smooth_step(u2)
        } else if u2 >= 1.0 {
            smooth_step(1.0 - u)
        } else {
            smooth_step(u2) - smooth_step(u)
        }
    }

    pub fn phi(&self, j: i32, r: f64) -> f64 {
        self.phi0(r * 2f64.powi(-j))
    }

    pub fn phi_at(&self, j: i32, xi: [f64; 3]) -> f64 {
        self.phi(j, (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt())
    }

    /// Closed support `[lo, hi]` of `phi_j` in `|xi|`.
    pub fn support(&self, j: i32) -> (f64, f64) {
        let w = self.transition_width;
        (2f64.powf(j as f64 - 0.5 - w), 2f64.powf(j as f64 + 0.5 + w))
    }

    /// Plateau `[lo, hi]` on which `phi_j = 1`.
    pub fn plateau(&self, j: i32) -> (f64, f64) {
        let w = self.transition_width;
        (2f64.powf(j as f64 - 0.5 + w), 2f64.powf(j as f64 + 0.5 - w))
    }

    /// Points where `phi_j` switches between constant and transitional.
    pub fn breaks(&self, j: i32) -> Vec<f64> {
        let (a, d) = self.support(j);
        let (b, c) = self.plateau(j);
        vec![a, b, c, d]
    }

    /// Indices `j` with `phi_j(r)` possibly nonzero.
    pub fn active_indices(&self, r: f64) -> std::ops::RangeInclusive<i32> {
        let w = self.transition_width;
        let l = r.log2();
        ((l - 0.5 - w).floor() as i32)..=((l + 0.5 + w).ceil() as i32)
    }

    /// `sum_{j_min <= j <= j_max} phi_j(r)`.
    pub fn partial_sum(&self, r: f64, j_min: i32, j_max: i32) -> f64 {
        (j_min..=j_max).map(|j| self.phi(j, r)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_plateau() {
        assert!(build_partition(0.5).is_err());
        assert!(build_partition(0.0).is_err());
        assert!(build_partition(f64::NAN).is_err());
        assert!(build_partition(0.49).is_ok());
    }

    #[test]
    fn plateau_contains_unit_sphere() {
        for w in [0.05, 0.25, 0.45] {
            let p = build_partition(w).unwrap();
            assert_eq!(p.phi0(1.0), 1.0);
            for j in [-3, -2, 2, 3, 7] {
                assert_eq!(p.phi(j, 1.0), 0.0);
            }
        }
    }

    #[test]
    fn support_endpoints_are_exact_zeros() {
        let p = PartitionProfile::default();
        assert_eq!(p.phi(3, 3.99), 0.0);
        assert_eq!(p.phi(3, 16.01), 0.0);
        let (lo, hi) = p.support(3);
        assert!(lo >= 4.0 && hi <= 16.0);
        assert_eq!(p.phi(3, lo), 0.0);
        assert_eq!(p.phi(3, hi), 0.0);
        assert!(p.phi(3, lo * 1.001) > 0.0);
    }

    #[test]
    fn telescoping_sum() {
        let p = PartitionProfile::default();
        for k in 0..200 {
            let r = 2f64.powf(-19.0 + 38.0 * k as f64 / 199.0);
            let s = p.partial_sum(r, -20, 20);
            assert!((s - 1.0).abs() < 1e-12, "r={r}: {s}");
            let s2: f64 = p.active_indices(r).map(|j| p.phi(j, r)).sum();
            assert!((s2 - 1.0).abs() < 1e-12);
        }
    }
}
