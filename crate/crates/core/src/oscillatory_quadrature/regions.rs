//! The rescaled low-frequency kernel
//!
//! ```text
//! I(s) = \int e^{i s eta_1} exp(t lambda(t^{-1/2} |eta|)) phi_0(2^{-j} t^{-1/2} |eta|) d eta
//! ```
//!
//! with `s = t^{-1/2} x_1`, so that
//! `F^{-1}[e^{t lambda} phi_j](x_1 e_1) = (2 pi)^{-3/2} t^{-3/2} I(t^{-1/2} x_1)`,
//! split over the four sets cut out by `|eta_2|, |eta_3| = t^{-1/4}`.
//!
//! The integrand is radial, so each region only changes the angular measure
//! around the `eta_1` axis: at cylinder radius `r` the admissible angles form
//! a set of measure `w(r)` known in closed form. B2 and B3 are mirror images
//! under `eta_2 <-> eta_3` and share one weight.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::adaptive::QuadOptions;
use super::axis::{
    AxisEvaluator, AxisMarginal, AxisymmetricIntegrand, Branch, Certificate, Harmonic, PhaseMeta,
    RadialIntegrand, RadialMarginal,
};
use super::sup::{sup_on_axis, SupResult};
use crate::eigensystem::{eigenvalues, Wavenumber};
use crate::error::{invalid, Result};
use crate::littlewood_paley::PartitionProfile;

/// Default smallest time treated as "large".
pub const T0: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    B1,
    B2,
    B3,
    B4,
    WholeSpace,
    HalfSpaceXiNeg,
    HalfSpaceXiPos,
}

impl RegionTag {
    pub const QUADRANTS: [RegionTag; 4] =
        [RegionTag::B1, RegionTag::B2, RegionTag::B3, RegionTag::B4];
}

/// Angular measure of region `tag` on the circle of radius `r`, threshold `tau`.
pub fn angular_weight(tag: RegionTag, r: f64, tau: f64) -> f64 {
    match tag {
        RegionTag::B1 => {
            if r <= tau {
                2.0 * PI
            } else if r <= SQRT_2 * tau {
                2.0 * PI - 8.0 * (tau / r).acos()
            } else {
                0.0
            }
        }
        RegionTag::B2 | RegionTag::B3 => {
            if r < tau {
                0.0
            } else {
                let q = tau / r;
                4.0 * q.acos().min(q.min(1.0).asin())
            }
        }
        RegionTag::B4 => {
            if r <= SQRT_2 * tau {
                0.0
            } else {
                8.0 * (FRAC_PI_4 - (tau / r).asin())
            }
        }
        _ => 2.0 * PI,
    }
}

/// Choice of dyadic index that keeps the rescaled support near `|eta| = 1`.
pub fn natural_index(t: f64) -> i32 {
    (-0.5 * t.log2()).round() as i32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionProblem {
    pub t: f64,
    pub branch: Branch,
    pub j: i32,
    pub profile: PartitionProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionValue {
    pub tag: RegionTag,
    /// Rescaled coordinate `s = t^{-1/2} x_1`.
    pub s: f64,
    pub value: Complex64,
    pub certificate: Certificate,
}

impl RegionProblem {
    pub fn new(t: f64, branch: Branch, j: i32, profile: PartitionProfile) -> Result<Self> {
        if !(t.is_finite() && t >= T0) {
            return Err(invalid("t", format!("must be at least {T0}, got {t}")));
        }
        if j > -1 {
            return Err(invalid(
                "j",
                format!("low-frequency kernel needs j <= -1, got {j}"),
            ));
        }
        Ok(Self {
            t,
            branch,
            j,
            profile,
        })
    }

    pub fn tau(&self) -> f64 {
        self.t.powf(-0.25)
    }

    fn dilation(&self) -> f64 {
        2f64.powi(-self.j) * self.t.powf(-0.5)
    }

    /// Radial support in `|eta|`.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.profile.support(0);
        let d = self.dilation();
        (a / d, b / d)
    }

    fn radial_breaks(&self) -> Vec<f64> {
        let d = self.dilation();
        self.profile.breaks(0).into_iter().map(|b| b / d).collect()
    }

    /// `exp(t lambda(t^{-1/2} rho)) phi_0(2^{-j} t^{-1/2} rho)`.
    pub fn radial(&self) -> Arc<dyn Fn(f64) -> Complex64 + Send + Sync> {
        let t = self.t;
        let sq = t.sqrt();
        let d = self.dilation();
        let profile = self.profile;
        let branch = self.branch;
        Arc::new(move |rho: f64| {
            let cut = profile.phi0(d * rho);
            if cut == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let pair = eigenvalues(Wavenumber::new(rho / sq).expect("nonnegative radius"));
            // Plus oscillates like e^{+i ...}: lambda_- has positive imaginary part
            let lambda = match branch {
                Branch::Plus => pair.lambda_minus,
                Branch::Minus => pair.lambda_plus,
            };
            (lambda * t).exp() * cut
        })
    }

    fn phase(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        let t = self.t;
        let sq = t.sqrt();
        Arc::new(move |rho: f64| {
            let r = rho / sq;
            if r >= 2.0 {
                0.0
            } else {
                t * 0.5 * r * ((2.0 - r) * (2.0 + r)).sqrt()
            }
        })
    }

    /// Region-restricted integrand in cylindrical form around `eta_1`.
    pub fn region_integrand(&self, tag: RegionTag) -> AxisymmetricIntegrand {
        let radial = self.radial();
        let phase = self.phase();
        let tau = self.tau();
        let (_, hi) = self.support();
        let r_lo = match tag {
            RegionTag::B2 | RegionTag::B3 => tau,
            RegionTag::B4 => SQRT_2 * tau,
            _ => 0.0,
        };
        let r_hi = match tag {
            RegionTag::B1 => (SQRT_2 * tau).min(hi),
            _ => hi,
        };
        let mut xi1_breaks = Vec::new();
        for b in self.radial_breaks() {
            xi1_breaks.push(b);
            xi1_breaks.push(-b);
        }
        xi1_breaks.push(0.0);
        let (lo, _) = self.support();
        AxisymmetricIntegrand::new(
            Arc::new(move |a, r| {
                let w = angular_weight(tag, r, tau);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                radial(a.hypot(r)) * (w / (2.0 * PI))
            }),
            (-hi, hi),
            (r_lo.min(r_hi), r_hi),
        )
        .with_r_bounds(Arc::new(move |a: f64| {
            let inner = if a.abs() >= lo {
                0.0
            } else {
                (lo * lo - a * a).sqrt()
            };
            (inner, (hi * hi - a * a).max(0.0).sqrt())
        }))
        .with_r_breaks(vec![tau, SQRT_2 * tau])
        .with_xi1_breaks(xi1_breaks)
        .with_phase(Arc::new(move |a, r| phase(a.hypot(r))))
        .with_meta(PhaseMeta {
            t: self.t,
            branch: self.branch,
        })
    }

    /// On-axis evaluator of `I` restricted to `tag`, valid for `|s| <= s_limit`.
    /// The whole-space kernel goes through the independent radial path.
    pub fn evaluator(
        &self,
        tag: RegionTag,
        s_limit: f64,
        opts: &QuadOptions,
    ) -> Box<dyn AxisEvaluator> {
        match tag {
            RegionTag::B1 | RegionTag::B2 | RegionTag::B3 | RegionTag::B4 => Box::new(
                AxisMarginal::build(&self.region_integrand(tag), s_limit, opts),
            ),
            _ => {
                let m = RadialIntegrand::new(self.radial(), Harmonic::Monopole, self.support())
                    .with_breaks(self.radial_breaks())
                    .with_phase(self.phase());
                Box::new(RadialMarginal::build(&m, s_limit, opts))
            }
        }
    }

    /// Largest rescaled coordinate searched: `x_1` up to `2t`.
    pub fn s_max(&self) -> f64 {
        2.0 * self.t.sqrt()
    }
}

/// `I` restricted to `tag` at one rescaled point `s` (no `(2 pi)^{-3/2}`).
pub fn region_integral(
    problem: &RegionProblem,
    tag: RegionTag,
    s: f64,
    opts: &QuadOptions,
) -> Result<RegionValue> {
    match tag {
        RegionTag::HalfSpaceXiNeg | RegionTag::HalfSpaceXiPos => {
            return Err(invalid(
                "tag",
                "half-space tags belong to the witness integrals",
            ));
        }
        _ => {}
    }
    let e = problem.evaluator(tag, s.abs(), opts);
    Ok(RegionValue {
        tag,
        s,
        value: e.eval_raw(s),
        certificate: e.certificate(),
    })
}

/// `sup_s |I_tag(s)|` over `|s| <= s_max`.
pub fn region_sup(
    problem: &RegionProblem,
    tag: RegionTag,
    opts: &QuadOptions,
) -> (SupResult, Certificate) {
    let e = problem.evaluator(tag, problem.s_max(), opts);
    let sup = sup_on_axis(|s| e.eval_raw(s).norm(), problem.s_max());
    (sup, e.certificate())
}

/// Sum of the four quadrant regions against the whole-space kernel at `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Additivity {
    pub s: f64,
    pub parts: [Complex64; 4],
    pub whole: Complex64,
    pub relative_gap: f64,
}

pub fn region_additivity(
    problem: &RegionProblem,
    s: f64,
    opts: &QuadOptions,
) -> Result<Additivity> {
    let whole = region_integral(problem, RegionTag::WholeSpace, s, opts)?.value;
    let mut parts = [Complex64::new(0.0, 0.0); 4];
    for (k, tag) in RegionTag::QUADRANTS.iter().enumerate() {
        parts[k] = region_integral(problem, *tag, s, opts)?.value;
    }
    let sum: Complex64 = parts.iter().sum();
    Ok(Additivity {
        s,
        parts,
        whole,
        relative_gap: (sum - whole).norm() / whole.norm().max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_the_circle() {
        let tau = 0.3;
        for k in 0..500 {
            let r = 1e-3 + k as f64 * 0.004;
            let s: f64 = [RegionTag::B1, RegionTag::B2, RegionTag::B3, RegionTag::B4]
                .iter()
                .map(|t| angular_weight(*t, r, tau))
                .sum();
            assert!((s - 2.0 * PI).abs() < 1e-12, "r={r}: {s}");
        }
    }

    #[test]
    fn weights_match_direct_angle_count() {
        let tau = 0.5;
        let n = 200_000;
        for r in [0.3, 0.6, 0.7, 0.9, 2.0] {
            let mut counts = [0usize; 4];
            for k in 0..n {
                let th = (k as f64 + 0.5) * 2.0 * PI / n as f64;
                let (a, b) = ((r * th.cos()).abs(), (r * th.sin()).abs());
                let idx = match (a <= tau, b <= tau) {
                    (true, true) => 0,
                    (false, true) => 1,
                    (true, false) => 2,
                    (false, false) => 3,
                };
                counts[idx] += 1;
            }
            for (i, tag) in RegionTag::QUADRANTS.iter().enumerate() {
                let direct = counts[i] as f64 * 2.0 * PI / n as f64;
                assert!(
                    (direct - angular_weight(*tag, r, tau)).abs() < 1e-3,
                    "r={r} {tag:?}"
                );
            }
        }
    }

    #[test]
    fn natural_index_values() {
        assert_eq!(natural_index(1e2), -3);
        assert_eq!(natural_index(1e3), -5);
        assert_eq!(natural_index(1e4), -7);
    }

    #[test]
    fn rejects_small_time_and_high_index() {
        let p = PartitionProfile::default();
        assert!(RegionProblem::new(5.0, Branch::Plus, -2, p).is_err());
        assert!(RegionProblem::new(100.0, Branch::Plus, 0, p).is_err());
    }

    #[test]
    fn branches_are_conjugate() {
        let p = PartitionProfile::default();
        let opts = QuadOptions::default();
        let a = RegionProblem::new(100.0, Branch::Plus, -3, p).unwrap();
        let b = RegionProblem::new(100.0, Branch::Minus, -3, p).unwrap();
        let va = region_integral(&a, RegionTag::WholeSpace, 7.0, &opts)
            .unwrap()
            .value;
        let vb = region_integral(&b, RegionTag::WholeSpace, -7.0, &opts)
            .unwrap()
            .value;
        assert!((va - vb.conj()).norm() < 1e-12 * va.norm());
    }
}
