//! Compactly supported C-infinity building blocks based on `exp(-1/x)`.

/// `exp(-1/x)` for `x > 0`, exactly zero otherwise.
#[inline]
pub fn mollifier_seed(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, C-infinity in between.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = mollifier_seed(x);
    let b = mollifier_seed(1.0 - x);
    a / (a + b)
}

/// Smooth bump supported in the open interval `(lo, hi)`, equal to 1 at the
/// midpoint and symmetric about it.
#[inline]
pub fn smooth_bump(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo || x >= hi {
        return 0.0;
    }
    let half = 0.5 * (hi - lo);
    smooth_step((x - lo) / half) * smooth_step((hi - x) / half)
}
