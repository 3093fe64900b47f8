use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::norms::{block_norm, NormValue, PNative};
use super::partition::PartitionProfile;
use crate::error::{finite, invalid, Result};
use crate::oscillatory_quadrature::QuadOptions;
use crate::spectral::{Component, SpectralState};

pub const DEFAULT_J_MIN: i32 = -30;
pub const DEFAULT_J_MAX: i32 = 12;
/// Neglected blocks must stay below this fraction of the total.
pub const TAIL_RATIO: f64 = 1e-12;

/// A Lebesgue or summation exponent in `[1, inf]`; written as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() || x < 1.0 {
            return Err(invalid(
                "exponent",
                format!("must lie in [1, inf], got {x}"),
            ));
        }
        Ok(Self(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let x = match Raw::deserialize(d)? {
            Raw::Num(x) => x,
            Raw::Text(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            Raw::Text(s) => return Err(serde::de::Error::custom(format!("not an exponent: {s}"))),
        };
        Exponent::new(x).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    Full,
    /// `j >= 3`.
    High,
    /// `j <= 2`.
    Low,
}

impl Band {
    pub const HIGH_MIN: i32 = 3;
    pub const LOW_MAX: i32 = 2;

    pub fn clamp(self, j_min: i32, j_max: i32) -> (i32, i32) {
        match self {
            Band::Full => (j_min, j_max),
            Band::High => (j_min.max(Self::HIGH_MIN), j_max),
            Band::Low => (j_min, j_max.min(Self::LOW_MAX)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub band: Band,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64, band: Band) -> Result<Self> {
        Ok(Self {
            s: finite("s", s)?,
            p: Exponent::new(p)?,
            q: Exponent::new(q)?,
            band,
        })
    }

    /// Short label such as `B^0_{2,2}[Low]`.
    pub fn tag(&self) -> String {
        format!("B^{}_{{{},{}}}[{:?}]", self.s, self.p, self.q, self.band)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    /// `(j, 2^{sj} ||Delta_j f||_p)` for every block in range.
    pub blocks: Vec<(i32, f64)>,
    /// Largest weighted block just outside a truncated end of the range.
    pub tail: f64,
    pub tail_certified: bool,
    /// Set for `2 < p < inf`, where the value is the interpolation bound.
    pub upper_bound_only: bool,
    pub error: f64,
    pub converged: bool,
    pub j_range: (i32, i32),
}

/// Memoised block evaluations of one state component.
pub struct BesovEvaluator {
    state: SpectralState,
    component: Component,
    profile: PartitionProfile,
    t_context: f64,
    opts: QuadOptions,
    cache: Mutex<HashMap<(i32, PNative), NormValue>>,
}

impl BesovEvaluator {
    pub fn new(
        state: SpectralState,
        component: Component,
        profile: PartitionProfile,
        t_context: f64,
        opts: QuadOptions,
    ) -> Self {
        Self {
            state,
            component,
            profile,
            t_context,
            opts,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn block(&self, j: i32, p: PNative) -> Result<NormValue> {
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&(j, p)) {
            return Ok(*v);
        }
        let v = block_norm(
            &self.state,
            self.component,
            &self.profile,
            j,
            p,
            self.t_context,
            &self.opts,
        )?;
        self.cache.lock().expect("cache poisoned").insert((j, p), v);
        Ok(v)
    }

    pub fn cached_blocks(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    /// `||Delta_j f||_p` for any `p >= 2`; `p` strictly between 2 and inf
    /// uses `||g||_2^{2/p} ||g||_inf^{1-2/p}`.
    fn block_p(&self, j: i32, p: Exponent) -> Result<(f64, NormValue)> {
        let p = p.get();
        if p == 2.0 {
            let v = self.block(j, PNative::Two)?;
            Ok((v.value, v))
        } else if p.is_infinite() {
            let v = self.block(j, PNative::Inf)?;
            Ok((v.value, v))
        } else if p > 2.0 {
            let a = self.block(j, PNative::Two)?;
            let b = self.block(j, PNative::Inf)?;
            let theta = 2.0 / p;
            let value = a.value.powf(theta) * b.value.powf(1.0 - theta);
            let merged = NormValue {
                value,
                upper: a.upper.powf(theta) * b.upper.powf(1.0 - theta),
                error: a.error + b.error,
                converged: a.converged && b.converged,
                argmax: b.argmax,
            };
            Ok((value, merged))
        } else {
            Err(invalid("p", format!("only p >= 2 is computable, got {p}")))
        }
    }
}

/// `(sum_j (2^{sj} ||Delta_j f||_p)^q)^{1/q}` over the band-clamped range.
pub fn besov_norm(
    eval: &BesovEvaluator,
    spec: &BesovSpec,
    j_min: i32,
    j_max: i32,
) -> Result<BesovNorm> {
    if j_min > j_max {
        return Err(invalid("j_min", format!("{j_min} exceeds j_max {j_max}")));
    }
    let (lo, hi) = spec.band.clamp(j_min, j_max);
    if lo > hi {
        return Err(invalid(
            "band",
            format!("{:?} leaves no blocks in [{j_min}, {j_max}]", spec.band),
        ));
    }
    let weight = |j: i32| 2f64.powf(spec.s * j as f64);
    // neighbours that are dropped by truncation rather than by the band cut
    let mut probes: Vec<i32> = (lo..=hi).collect();
    let below = spec.band != Band::High || lo > Band::HIGH_MIN;
    let above = spec.band != Band::Low || hi < Band::LOW_MAX;
    if below {
        probes.push(lo - 1);
    }
    if above {
        probes.push(hi + 1);
    }
    let results: Vec<Result<(f64, NormValue)>> = probes
        .par_iter()
        .map(|j| eval.block_p(*j, spec.p))
        .collect();
    let mut blocks = Vec::new();
    let mut tail: f64 = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for (j, r) in probes.iter().zip(results) {
        let (v, nv) = r?;
        let wv = weight(*j) * v;
        if *j < lo || *j > hi {
            tail = tail.max(wv);
        } else {
            blocks.push((*j, wv));
            error += weight(*j) * nv.error;
            converged &= nv.converged;
        }
    }
    let q = spec.q.get();
    let value = if q.is_infinite() {
        blocks.iter().map(|b| b.1).fold(0.0, f64::max)
    } else {
        let m = blocks.iter().map(|b| b.1).fold(0.0, f64::max);
        if m == 0.0 {
            0.0
        } else {
            m * blocks
                .iter()
                .map(|b| (b.1 / m).powf(q))
                .sum::<f64>()
                .powf(1.0 / q)
        }
    };
    let p = spec.p.get();
    Ok(BesovNorm {
        value,
        blocks,
        tail,
        tail_certified: tail <= TAIL_RATIO * value || (value == 0.0 && tail == 0.0),
        upper_bound_only: p > 2.0 && p.is_finite(),
        error,
        converged,
        j_range: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::sync::Arc;

    use crate::spectral::{Angular, Field, Term};

    fn gaussian() -> SpectralState {
        let t = Term::new(
            Angular::Isotropic,
            Arc::new(|r: f64| Complex64::new((-0.25 * r * r).exp(), 0.0)),
            (0.0, 20.0),
        );
        SpectralState::new(Field::single(t), Field::zero())
    }

    fn eval() -> BesovEvaluator {
        BesovEvaluator::new(
            gaussian(),
            Component::A,
            PartitionProfile::default(),
            1.0,
            QuadOptions::default(),
        )
    }

    #[test]
    fn exponent_serde() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.is_infinite());
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"inf\"");
        let e: Exponent = serde_json::from_str("2.0").unwrap();
        assert_eq!(e.get(), 2.0);
        assert!(serde_json::from_str::<Exponent>("0.5").is_err());
    }

    #[test]
    fn bands_split_the_sum() {
        let e = eval();
        let q = 2.0;
        let full = besov_norm(
            &e,
            &BesovSpec::new(0.0, 2.0, q, Band::Full).unwrap(),
            -30,
            10,
        )
        .unwrap();
        let hi = besov_norm(
            &e,
            &BesovSpec::new(0.0, 2.0, q, Band::High).unwrap(),
            -30,
            10,
        )
        .unwrap();
        let lo = besov_norm(
            &e,
            &BesovSpec::new(0.0, 2.0, q, Band::Low).unwrap(),
            -30,
            10,
        )
        .unwrap();
        assert!(
            (full.value.powf(q) - hi.value.powf(q) - lo.value.powf(q)).abs()
                < 1e-12 * full.value.powf(q)
        );
        assert_eq!(hi.j_range, (3, 10));
        assert_eq!(lo.j_range, (-30, 2));
    }

    #[test]
    fn tail_is_certified_on_wide_range() {
        let e = eval();
        let r = besov_norm(
            &e,
            &BesovSpec::new(0.0, 2.0, 1.0, Band::Full).unwrap(),
            -30,
            10,
        )
        .unwrap();
        assert!(r.tail_certified, "tail {} vs {}", r.tail, r.value);
        assert!(r.converged);
        let narrow = besov_norm(
            &e,
            &BesovSpec::new(0.0, 2.0, 1.0, Band::Full).unwrap(),
            -2,
            2,
        )
        .unwrap();
        assert!(!narrow.tail_certified);
        assert!(narrow.value <= r.value);
    }

    #[test]
    fn memoised_blocks_are_reused() {
        let e = eval();
        let spec = BesovSpec::new(0.0, 2.0, 2.0, Band::Full).unwrap();
        besov_norm(&e, &spec, -5, 5).unwrap();
        let n = e.cached_blocks();
        besov_norm(&e, &spec, -4, 4).unwrap();
        assert_eq!(e.cached_blocks(), n);
    }

    #[test]
    fn rejects_p_below_two() {
        let e = eval();
        let spec = BesovSpec::new(0.0, 1.5, 2.0, Band::Full).unwrap();
        assert!(besov_norm(&e, &spec, -2, 2).is_err());
    }
}
