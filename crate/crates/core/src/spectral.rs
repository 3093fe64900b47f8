//! Frequency-space fields built from separable terms
//! `coeff * Y(xi) * R(|xi|)`, kept as closures so that no grid is committed
//! to before a norm or an inverse transform asks for one.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::oscillatory_quadrature::axis::{AxialFn, RBoundsFn, RadialFn, RadialPhaseFn};
use crate::oscillatory_quadrature::{
    AxisEvaluator, AxisMarginal, AxisSum, AxisymmetricIntegrand, Harmonic, QuadOptions,
    RadialIntegrand, RadialMarginal,
};

/// Axisymmetric angular factor `g(xi_1, r)` with its support box.
#[derive(Clone)]
pub struct AxialShape {
    pub g: AxialFn,
    pub xi1_range: (f64, f64),
    pub r_range: (f64, f64),
    pub r_bounds: Option<RBoundsFn>,
    pub xi1_breaks: Vec<f64>,
}

#[derive(Clone)]
pub enum Angular {
    Isotropic,
    /// `(d . xi) / |xi|`.
    Dipole([f64; 3]),
    Axial(AxialShape),
}

impl std::fmt::Debug for Angular {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Angular::Isotropic => write!(f, "Isotropic"),
            Angular::Dipole(d) => write!(f, "Dipole({d:?})"),
            Angular::Axial(s) => write!(f, "Axial(xi1 {:?}, r {:?})", s.xi1_range, s.r_range),
        }
    }
}

impl Angular {
    pub fn eval(&self, xi: [f64; 3], rho: f64) -> Complex64 {
        match self {
            Angular::Isotropic => Complex64::new(1.0, 0.0),
            Angular::Dipole(d) => {
                if rho == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((d[0] * xi[0] + d[1] * xi[1] + d[2] * xi[2]) / rho, 0.0)
                }
            }
            Angular::Axial(s) => {
                let r = xi[1].hypot(xi[2]);
                if xi[0] < s.xi1_range.0
                    || xi[0] > s.xi1_range.1
                    || r < s.r_range.0
                    || r > s.r_range.1
                {
                    Complex64::new(0.0, 0.0)
                } else {
                    (s.g)(xi[0], r)
                }
            }
        }
    }

    pub fn is_axisymmetric(&self) -> bool {
        match self {
            Angular::Isotropic | Angular::Axial(_) => true,
            Angular::Dipole(d) => d[1] == 0.0 && d[2] == 0.0,
        }
    }
}

/// `coeff * Y(xi) * R(|xi|)` supported in `support.0 <= |xi| <= support.1`.
#[derive(Clone)]
pub struct Term {
    pub coeff: Complex64,
    pub angular: Angular,
    pub radial: RadialFn,
    pub support: (f64, f64),
    /// Radial phase of `R`, only used to size quadrature cells.
    pub phase: Option<RadialPhaseFn>,
    pub breaks: Vec<f64>,
}

impl std::fmt::Debug for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Term")
            .field("coeff", &self.coeff)
            .field("angular", &self.angular)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl Term {
    pub fn new(angular: Angular, radial: RadialFn, support: (f64, f64)) -> Self {
        Self {
            coeff: Complex64::new(1.0, 0.0),
            angular,
            radial,
            support,
            phase: None,
            breaks: Vec::new(),
        }
    }

    pub fn with_coeff(mut self, c: Complex64) -> Self {
        self.coeff = c;
        self
    }

    pub fn with_breaks(mut self, b: Vec<f64>) -> Self {
        self.breaks = b;
        self
    }

    pub fn eval(&self, xi: [f64; 3]) -> Complex64 {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if rho < self.support.0 || rho > self.support.1 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeff * self.angular.eval(xi, rho) * (self.radial)(rho)
    }

    /// Multiply the radial part by `h`, restrict to `support` and add the
    /// breaks and phase that come with `h`.
    pub fn with_radial_factor(
        &self,
        h: RadialFn,
        support: (f64, f64),
        breaks: &[f64],
        phase: Option<RadialPhaseFn>,
    ) -> Option<Self> {
        let lo = self.support.0.max(support.0);
        let hi = self.support.1.min(support.1);
        if !(hi > lo) {
            return None;
        }
        let r = self.radial.clone();
        let mut out = self.clone();
        out.radial = Arc::new(move |rho| r(rho) * h(rho));
        out.support = (lo, hi);
        out.breaks
            .extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
        out.phase = match (self.phase.clone(), phase) {
            (Some(a), Some(b)) => Some(Arc::new(move |rho| a(rho) + b(rho))),
            (a, b) => a.or(b),
        };
        Some(out)
    }

    fn breaks_within(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        let mut b = vec![lo, hi];
        b.extend(self.breaks.iter().copied().filter(|x| *x > lo && *x < hi));
        b
    }

    /// On-axis evaluator for this term; `None` when the term vanishes on the
    /// `x_1` axis by odd symmetry.
    pub fn axis_evaluator(
        &self,
        x_limit: f64,
        opts: &QuadOptions,
    ) -> Option<Box<dyn AxisEvaluator>> {
        match &self.angular {
            Angular::Isotropic => {
                let mut m =
                    RadialIntegrand::new(self.radial.clone(), Harmonic::Monopole, self.support)
                        .with_coeff(self.coeff)
                        .with_breaks(self.breaks.clone());
                if let Some(p) = &self.phase {
                    m = m.with_phase(p.clone());
                }
                Some(Box::new(RadialMarginal::build(&m, x_limit, opts)))
            }
            Angular::Dipole(d) => {
                // the d_2, d_3 parts are odd in xi_2, xi_3 and drop out on the axis
                if d[0] == 0.0 {
                    return None;
                }
                let mut m =
                    RadialIntegrand::new(self.radial.clone(), Harmonic::Dipole, self.support)
                        .with_coeff(self.coeff * d[0])
                        .with_breaks(self.breaks.clone());
                if let Some(p) = &self.phase {
                    m = m.with_phase(p.clone());
                }
                Some(Box::new(RadialMarginal::build(&m, x_limit, opts)))
            }
            Angular::Axial(s) => {
                let radial = self.radial.clone();
                let g = s.g.clone();
                let c = self.coeff;
                let (lo, hi) = self.support;
                let mut m = AxisymmetricIntegrand::new(
                    Arc::new(move |a, r| {
                        let rho = a.hypot(r);
                        if rho < lo || rho > hi {
                            Complex64::new(0.0, 0.0)
                        } else {
                            c * g(a, r) * radial(rho)
                        }
                    }),
                    (s.xi1_range.0.max(-hi), s.xi1_range.1.min(hi)),
                    (s.r_range.0, s.r_range.1.min(hi)),
                )
                .with_xi1_breaks(s.xi1_breaks.clone());
                if let Some(b) = &s.r_bounds {
                    m = m.with_r_bounds(b.clone());
                }
                if let Some(p) = &self.phase {
                    let p = p.clone();
                    m = m.with_phase(Arc::new(move |a, r| p(a.hypot(r))));
                }
                Some(Box::new(AxisMarginal::build(&m, x_limit, opts)))
            }
        }
    }

    /// `\int |Y|` over the unit sphere, for radial-only angular factors.
    fn angular_l1(&self) -> Option<f64> {
        match &self.angular {
            Angular::Isotropic => Some(4.0 * PI),
            Angular::Dipole(d) => Some(2.0 * PI * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()),
            Angular::Axial(_) => None,
        }
    }

    pub(crate) fn radial_breaks(&self) -> Vec<f64> {
        self.breaks_within()
    }

    pub(crate) fn radial_l1_factor(&self) -> Option<f64> {
        self.angular_l1()
    }
}

/// Angular Gram entry `\int Y_a conj(Y_b)` over the unit sphere for
/// non-axial factors.
pub(crate) fn angular_gram(a: &Angular, b: &Angular) -> Option<f64> {
    match (a, b) {
        (Angular::Isotropic, Angular::Isotropic) => Some(4.0 * PI),
        (Angular::Isotropic, Angular::Dipole(_)) | (Angular::Dipole(_), Angular::Isotropic) => {
            Some(0.0)
        }
        (Angular::Dipole(d), Angular::Dipole(e)) => {
            Some(4.0 * PI * (d[0] * e[0] + d[1] * e[1] + d[2] * e[2]) / 3.0)
        }
        _ => None,
    }
}

/// A scalar field as a sum of terms.
#[derive(Clone, Debug, Default)]
pub struct Field {
    pub terms: Vec<Term>,
}

impl Field {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(t: Term) -> Self {
        Self { terms: vec![t] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, xi: [f64; 3]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(xi)).sum()
    }

    pub fn push(&mut self, t: Term) {
        self.terms.push(t);
    }

    /// Smallest interval containing every term's radial support.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.terms
            .iter()
            .map(|t| t.support)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    pub fn has_axial(&self) -> bool {
        self.terms
            .iter()
            .any(|t| matches!(t.angular, Angular::Axial(_)))
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.terms.iter().all(|t| t.angular.is_axisymmetric())
    }

    /// Multiply every term by the same radial factor.
    pub fn with_radial_factor(
        &self,
        h: RadialFn,
        support: (f64, f64),
        breaks: &[f64],
        phase: Option<RadialPhaseFn>,
    ) -> Field {
        Field {
            terms: self
                .terms
                .iter()
                .filter_map(|t| t.with_radial_factor(h.clone(), support, breaks, phase.clone()))
                .collect(),
        }
    }

    /// Sum of on-axis evaluators of all terms that survive on the axis.
    pub fn axis_evaluator(&self, x_limit: f64, opts: &QuadOptions) -> AxisSum {
        let mut sum = AxisSum::new();
        for t in &self.terms {
            if let Some(e) = t.axis_evaluator(x_limit, opts) {
                sum.push(e);
            }
        }
        sum
    }

    /// `f(-xi) = conj(f(xi))` at the given samples, to `tol` relative.
    pub fn is_hermitian_on(&self, samples: &[[f64; 3]], tol: f64) -> bool {
        samples.iter().all(|xi| {
            let a = self.eval(*xi);
            let b = self.eval([-xi[0], -xi[1], -xi[2]]);
            (a - b.conj()).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryTag {
    General,
    AxisymmetricXi1,
    Radial,
}

/// Which part of `(a, v)` a norm measures. `Pair` is the pointwise
/// Euclidean norm `sqrt(|a|^2 + |v|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    A,
    V,
    Pair,
}

/// The pair `(a_hat, v_hat)`.
#[derive(Clone, Debug)]
pub struct SpectralState {
    pub a_hat: Field,
    pub v_hat: Field,
    pub symmetry: SymmetryTag,
}

impl SpectralState {
    pub fn new(a_hat: Field, v_hat: Field) -> Self {
        let symmetry = classify(&a_hat, &v_hat);
        Self {
            a_hat,
            v_hat,
            symmetry,
        }
    }

    pub fn zero() -> Self {
        Self::new(Field::zero(), Field::zero())
    }

    pub fn eval(&self, xi: [f64; 3]) -> (Complex64, Complex64) {
        (self.a_hat.eval(xi), self.v_hat.eval(xi))
    }

    /// Fields making up `component`; `Pair` yields both.
    pub fn fields(&self, component: Component) -> Vec<&Field> {
        match component {
            Component::A => vec![&self.a_hat],
            Component::V => vec![&self.v_hat],
            Component::Pair => vec![&self.a_hat, &self.v_hat],
        }
    }
}

fn classify(a: &Field, v: &Field) -> SymmetryTag {
    let all = a.terms.iter().chain(v.terms.iter());
    let mut radial = true;
    let mut axial = true;
    for t in all {
        match &t.angular {
            Angular::Isotropic => {}
            Angular::Dipole(d) => {
                radial = false;
                axial &= d[1] == 0.0 && d[2] == 0.0;
            }
            Angular::Axial(_) => radial = false,
        }
    }
    if radial {
        SymmetryTag::Radial
    } else if axial {
        SymmetryTag::AxisymmetricXi1
    } else {
        SymmetryTag::General
    }
}
