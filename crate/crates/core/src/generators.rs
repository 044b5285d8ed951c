//! Strictly convex generators, their Legendre-Fenchel conjugates, and the
//! pointwise dominance relation required by the duo divergences.
//!
//! A generator `F` lives on a product of open intervals (a box). Its conjugate
//!
//! ```text
//! F*(η) = sup_θ { ⟨η, θ⟩ − F(θ) }
//! ```
//!
//! is attained at the unique `θ*` solving `∇F(θ*) = η`. Generators may carry a
//! stored closed form for `F*` and `(∇F)⁻¹`; otherwise the conjugate is obtained
//! by safeguarded root finding on the gradient map.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    pub const NEGATIVE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: 0.0,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Param(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    /// Finite sub-interval used for sampling. Unbounded ends are clipped to
    /// `±clip`, or to `clip` away from a finite opposite end.
    pub fn clipped(&self, clip: f64) -> (f64, f64) {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo.max(0.0) + clip),
            (false, true) => (self.hi.min(0.0) - clip, self.hi),
            (false, false) => (-clip, clip),
        }
    }

    /// Midpoint for bounded intervals, a unit step inside for half-lines,
    /// and 0 for the real line.
    pub fn seed(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }
}

/// Product of open intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    intervals: Vec<Interval>,
}

impl BoxDomain {
    pub fn new(intervals: Vec<Interval>) -> Self {
        assert!(!intervals.is_empty(), "a domain needs at least one coordinate");
        Self { intervals }
    }

    pub fn interval(iv: Interval) -> Self {
        Self::new(vec![iv])
    }

    pub fn real(dim: usize) -> Self {
        Self::new(vec![Interval::REAL_LINE; dim])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim() && self.intervals.iter().zip(theta).all(|(iv, &t)| iv.contains(t))
    }

    pub fn intersect(&self, other: &BoxDomain) -> Option<BoxDomain> {
        if self.dim() != other.dim() {
            return None;
        }
        self.intervals
            .iter()
            .zip(&other.intervals)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(BoxDomain::new)
    }

    pub fn seed(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::seed).collect()
    }

    pub fn clipped(&self, clip: f64) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| iv.clipped(clip)).collect()
    }

    pub(crate) fn require(&self, theta: &[f64], what: &str) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} {theta:?} is outside the domain {:?}",
                self.intervals
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugateMode {
    ClosedForm,
    Numeric,
}

/// A strictly convex, differentiable function on a box domain.
///
/// Implementations evaluate `eval` and `grad` without domain checks; callers
/// validate membership through [`ConvexGenerator::domain`].
pub trait ConvexGenerator: fmt::Debug + Send + Sync {
    fn domain(&self) -> &BoxDomain;

    fn eval(&self, theta: &[f64]) -> f64;

    fn grad(&self, theta: &[f64]) -> Vec<f64>;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// Hessian; central differences of `grad` unless overridden.
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        fd_hessian(self, theta)
    }

    /// True when `∂F/∂θ_i` depends on `θ_i` only.
    fn is_separable(&self) -> bool {
        self.dim() == 1
    }

    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::Numeric
    }

    /// Stored formula for `F*(η)`, when the generator has one.
    fn closed_conjugate(&self, _eta: &[f64]) -> Option<Result<f64>> {
        None
    }

    /// Stored formula for `(∇F)⁻¹(η) = ∇F*(η)`, when the generator has one.
    fn closed_grad_inverse(&self, _eta: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Image of the domain under `∇F`, when it is itself a box.
    fn gradient_range(&self) -> Option<BoxDomain> {
        None
    }

    /// Membership test for the gradient range when it is not a box.
    /// Defaults to [`ConvexGenerator::gradient_range`].
    fn gradient_range_contains(&self, eta: &[f64]) -> Option<bool> {
        self.gradient_range().map(|r| r.contains(eta))
    }

    /// Starting point for the numeric gradient inversion.
    fn solver_seed(&self, _eta: &[f64]) -> Vec<f64> {
        self.domain().seed()
    }

    /// Finite box on which dominance is sampled.
    fn sampling_box(&self, clip: f64) -> Vec<(f64, f64)> {
        self.domain().clipped(clip)
    }

    fn label(&self) -> String {
        format!("{self:?}")
    }
}

impl<G: ConvexGenerator + ?Sized> ConvexGenerator for &G {
    fn domain(&self) -> &BoxDomain {
        (**self).domain()
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        (**self).eval(theta)
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        (**self).grad(theta)
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        (**self).hessian(theta)
    }
    fn is_separable(&self) -> bool {
        (**self).is_separable()
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        (**self).conjugate_mode()
    }
    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        (**self).closed_conjugate(eta)
    }
    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).closed_grad_inverse(eta)
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        (**self).gradient_range()
    }
    fn gradient_range_contains(&self, eta: &[f64]) -> Option<bool> {
        (**self).gradient_range_contains(eta)
    }
    fn solver_seed(&self, eta: &[f64]) -> Vec<f64> {
        (**self).solver_seed(eta)
    }
    fn sampling_box(&self, clip: f64) -> Vec<(f64, f64)> {
        (**self).sampling_box(clip)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

fn fd_hessian<G: ConvexGenerator + ?Sized>(f: &G, theta: &[f64]) -> DMatrix<f64> {
    let d = theta.len();
    let dom = f.domain();
    let mut h = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut step = 1e-5 * theta[j].abs().max(1.0);
        let iv = dom.intervals()[j];
        while !(iv.contains(theta[j] - step) && iv.contains(theta[j] + step)) && step > 1e-300 {
            step *= 0.5;
        }
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[j] += step;
        minus[j] -= step;
        let gp = f.grad(&plus);
        let gm = f.grad(&minus);
        for i in 0..d {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    (&h + h.transpose()) * 0.5
}

// -----------------------------------------------------------------------------
// Catalog generators
// -----------------------------------------------------------------------------

/// `F(θ) = (a/2)‖θ‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: f64,
    domain: BoxDomain,
}

impl Quadratic {
    pub fn new(a: f64) -> Self {
        Self::with_dim(a, 1)
    }

    pub fn with_dim(a: f64, dim: usize) -> Self {
        assert!(a > 0.0, "quadratic scale must be positive");
        Self {
            a,
            domain: BoxDomain::real(dim),
        }
    }

    /// Restricts the generator to a sub-box of the domain.
    pub fn on(mut self, domain: BoxDomain) -> Self {
        assert_eq!(domain.dim(), self.domain.dim());
        self.domain = domain;
        self
    }

    pub fn scale(&self) -> f64 {
        self.a
    }
}

impl ConvexGenerator for Quadratic {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        0.5 * self.a * theta.iter().map(|t| t * t).sum::<f64>()
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().map(|t| self.a * t).collect()
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(theta.len(), theta.len()) * self.a
    }
    fn is_separable(&self) -> bool {
        true
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::ClosedForm
    }
    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        Some(
            self.closed_grad_inverse(eta)?
                .map(|_| eta.iter().map(|e| e * e).sum::<f64>() / (2.0 * self.a)),
        )
    }
    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        let theta: Vec<f64> = eta.iter().map(|e| e / self.a).collect();
        Some(self.domain.require(&theta, "preimage").map(|_| theta))
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        let a = self.a;
        Some(BoxDomain::new(
            self.domain
                .intervals()
                .iter()
                .map(|iv| Interval {
                    lo: a * iv.lo,
                    hi: a * iv.hi,
                })
                .collect(),
        ))
    }
    fn label(&self) -> String {
        format!("quadratic(a={})", self.a)
    }
}

/// `F(θ) = c·θ^p` for `p > 1` on `(0, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Power {
    c: f64,
    p: f64,
    domain: BoxDomain,
}

impl Power {
    pub fn new(c: f64, p: f64, hi: f64) -> Result<Self> {
        if !(c > 0.0 && p > 1.0) {
            return Err(Error::Param(format!(
                "power generator needs c > 0, p > 1 (got c={c}, p={p})"
            )));
        }
        Ok(Self {
            c,
            p,
            domain: BoxDomain::interval(Interval::new(0.0, hi)?),
        })
    }

    fn theta_star(&self, eta: f64) -> f64 {
        (eta / (self.c * self.p)).powf(1.0 / (self.p - 1.0))
    }
}

impl ConvexGenerator for Power {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        self.c * theta[0].powf(self.p)
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        vec![self.c * self.p * theta[0].powf(self.p - 1.0)]
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.c * self.p * (self.p - 1.0) * theta[0].powf(self.p - 2.0))
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::ClosedForm
    }
    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        Some(self.closed_grad_inverse(eta)?.map(|t| {
            // η θ* − c θ*^p = (1 − 1/p) η θ*
            (1.0 - 1.0 / self.p) * eta[0] * t[0]
        }))
    }
    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        let theta = vec![self.theta_star(eta[0])];
        Some(self.domain.require(&theta, "preimage").map(|_| theta))
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        let hi = self.domain.intervals()[0].hi;
        Some(BoxDomain::interval(Interval {
            lo: 0.0,
            hi: self.c * self.p * hi.powf(self.p - 1.0),
        }))
    }
    fn label(&self) -> String {
        format!("power(c={},p={})", self.c, self.p)
    }
}

/// `F(θ) = exp(θ)`, the Poisson log-normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponential {
    domain: BoxDomain,
}

impl Default for Exponential {
    fn default() -> Self {
        Self {
            domain: BoxDomain::real(1),
        }
    }
}

impl ConvexGenerator for Exponential {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        theta[0].exp()
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        vec![theta[0].exp()]
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, theta[0].exp())
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::ClosedForm
    }
    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        Some(self.closed_grad_inverse(eta)?.map(|_| eta[0] * eta[0].ln() - eta[0]))
    }
    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(if eta[0] > 0.0 {
            Ok(vec![eta[0].ln()])
        } else {
            Err(Error::Domain(format!("η = {} outside gradient range (0, ∞)", eta[0])))
        })
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        Some(BoxDomain::interval(Interval::POSITIVE))
    }
    fn label(&self) -> String {
        "exp".into()
    }
}

/// `F(θ) = −w·log θ + c` on `θ > 0`.
///
/// With `w = 1` this is the exponential (`c = 0`) or Laplacian (`c = log 2`)
/// log-normalizer and, for `c = 0`, the Itakura-Saito generator. With `w = ½`
/// it is the half-normal / zero-mean normal scale log-normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct NegLog {
    weight: f64,
    offset: f64,
    domain: BoxDomain,
}

impl NegLog {
    pub fn new(weight: f64, offset: f64) -> Self {
        assert!(weight > 0.0, "neglog weight must be positive");
        Self {
            weight,
            offset,
            domain: BoxDomain::interval(Interval::POSITIVE),
        }
    }

    pub fn itakura_saito() -> Self {
        Self::new(1.0, 0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl ConvexGenerator for NegLog {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        -self.weight * theta[0].ln() + self.offset
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        vec![-self.weight / theta[0]]
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.weight / (theta[0] * theta[0]))
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::ClosedForm
    }
    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        let w = self.weight;
        Some(
            self.closed_grad_inverse(eta)?
                .map(|_| -w + w * (-w / eta[0]).ln() - self.offset),
        )
    }
    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(if eta[0] < 0.0 {
            Ok(vec![-self.weight / eta[0]])
        } else {
            Err(Error::Domain(format!("η = {} outside gradient range (−∞, 0)", eta[0])))
        })
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        Some(BoxDomain::interval(Interval::NEGATIVE))
    }
    fn label(&self) -> String {
        format!("neglog(w={},c={})", self.weight, self.offset)
    }
}

/// `F(θ) = −log(1 − exp θ)` on `θ < 0`, the geometric log-normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricLogNormalizer {
    domain: BoxDomain,
}

impl Default for GeometricLogNormalizer {
    fn default() -> Self {
        Self {
            domain: BoxDomain::interval(Interval::NEGATIVE),
        }
    }
}

impl ConvexGenerator for GeometricLogNormalizer {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        -(-theta[0].exp_m1()).ln()
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        vec![theta[0].exp() / -theta[0].exp_m1()]
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let q = -theta[0].exp_m1();
        DMatrix::from_element(1, 1, theta[0].exp() / (q * q))
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::ClosedForm
    }
    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        Some(self.closed_grad_inverse(eta)?.map(|_| {
            let e = eta[0];
            e * e.ln() - (1.0 + e) * e.ln_1p()
        }))
    }
    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(if eta[0] > 0.0 {
            Ok(vec![(eta[0] / (1.0 + eta[0])).ln()])
        } else {
            Err(Error::Domain(format!("η = {} outside gradient range (0, ∞)", eta[0])))
        })
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        Some(BoxDomain::interval(Interval::POSITIVE))
    }
    fn label(&self) -> String {
        "geometric".into()
    }
}

/// Hides a generator's stored conjugate so that every conjugate query goes
/// through the numeric solver.
#[derive(Debug, Clone)]
pub struct NumericOnly<G>(pub G);

impl<G: ConvexGenerator> ConvexGenerator for NumericOnly<G> {
    fn domain(&self) -> &BoxDomain {
        self.0.domain()
    }
    fn eval(&self, theta: &[f64]) -> f64 {
        self.0.eval(theta)
    }
    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        self.0.grad(theta)
    }
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        self.0.hessian(theta)
    }
    fn is_separable(&self) -> bool {
        self.0.is_separable()
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        self.0.gradient_range()
    }
    fn gradient_range_contains(&self, eta: &[f64]) -> Option<bool> {
        self.0.gradient_range_contains(eta)
    }
    fn solver_seed(&self, eta: &[f64]) -> Vec<f64> {
        self.0.solver_seed(eta)
    }
    fn sampling_box(&self, clip: f64) -> Vec<(f64, f64)> {
        self.0.sampling_box(clip)
    }
    fn label(&self) -> String {
        format!("numeric[{}]", self.0.label())
    }
}

/// The Legendre conjugate `F*` viewed as a generator on the moment side.
///
/// `eval` and `grad` never panic; points where the gradient inversion fails
/// evaluate to NaN.
#[derive(Debug)]
pub struct Conjugate<'a> {
    primal: &'a dyn ConvexGenerator,
    domain: BoxDomain,
}

impl<'a> Conjugate<'a> {
    pub fn new(primal: &'a dyn ConvexGenerator) -> Self {
        let domain = primal.gradient_range().unwrap_or_else(|| BoxDomain::real(primal.dim()));
        Self { primal, domain }
    }

    pub fn primal(&self) -> &dyn ConvexGenerator {
        self.primal
    }
}

impl ConvexGenerator for Conjugate<'_> {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    fn eval(&self, eta: &[f64]) -> f64 {
        legendre_conjugate(self.primal, eta).unwrap_or(f64::NAN)
    }
    fn grad(&self, eta: &[f64]) -> Vec<f64> {
        gradient_inverse(self.primal, eta).unwrap_or_else(|_| vec![f64::NAN; eta.len()])
    }
    fn is_separable(&self) -> bool {
        self.primal.is_separable()
    }
    fn conjugate_mode(&self) -> ConjugateMode {
        ConjugateMode::ClosedForm
    }
    fn closed_conjugate(&self, theta: &[f64]) -> Option<Result<f64>> {
        // F** = F
        Some(
            self.primal
                .domain()
                .require(theta, "θ")
                .map(|_| self.primal.eval(theta)),
        )
    }
    fn closed_grad_inverse(&self, theta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(
            self.primal
                .domain()
                .require(theta, "θ")
                .map(|_| self.primal.grad(theta)),
        )
    }
    fn gradient_range(&self) -> Option<BoxDomain> {
        Some(self.primal.domain().clone())
    }
    fn label(&self) -> String {
        format!("conjugate[{}]", self.primal.label())
    }
}

// -----------------------------------------------------------------------------
// Conjugation
// -----------------------------------------------------------------------------

/// Settings of the numeric gradient inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Budget for the bracket search that precedes Newton/bisection.
    pub max_bracket_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            max_bracket_steps: 2100,
        }
    }
}

/// `F*(η)`, from the stored formula when present, numerically otherwise.
pub fn legendre_conjugate(f: &dyn ConvexGenerator, eta: &[f64]) -> Result<f64> {
    check_dim(f, eta)?;
    match f.closed_conjugate(eta) {
        Some(value) => value,
        None => legendre_conjugate_numeric(f, eta, &SolverConfig::default()),
    }
}

/// `F*(η) = ⟨η, θ*⟩ − F(θ*)` with `θ*` from the numeric solver, ignoring any
/// stored formula.
pub fn legendre_conjugate_numeric(f: &dyn ConvexGenerator, eta: &[f64], cfg: &SolverConfig) -> Result<f64> {
    let theta = solve_gradient(f, eta, cfg)?;
    Ok(dot(eta, &theta) - f.eval(&theta))
}

/// `∇F*(η) = (∇F)⁻¹(η)`.
pub fn gradient_inverse(f: &dyn ConvexGenerator, eta: &[f64]) -> Result<Vec<f64>> {
    check_dim(f, eta)?;
    match f.closed_grad_inverse(eta) {
        Some(theta) => theta,
        None => solve_gradient(f, eta, &SolverConfig::default()),
    }
}

/// Solves `∇F(θ) = η` numerically.
///
/// Separable generators are inverted coordinate-wise by bracketing followed by
/// Newton steps with a bisection safeguard. Other generators use damped Newton
/// on `θ ↦ F(θ) − ⟨η, θ⟩` with backtracking.
pub fn solve_gradient(f: &dyn ConvexGenerator, eta: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    check_dim(f, eta)?;
    if eta.iter().any(|e| !e.is_finite()) {
        return Err(Error::Domain(format!("η = {eta:?} is not finite")));
    }
    if f.gradient_range_contains(eta) == Some(false) {
        return Err(Error::Domain(format!(
            "η = {eta:?} outside the gradient range of {}",
            f.label()
        )));
    }
    if f.is_separable() {
        solve_separable(f, eta, cfg)
    } else {
        solve_newton(f, eta, cfg)
    }
}

fn check_dim(f: &dyn ConvexGenerator, v: &[f64]) -> Result<()> {
    if v.len() == f.dim() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "dimension {} does not match generator dimension {}",
            v.len(),
            f.dim()
        )))
    }
}

fn solve_separable(f: &dyn ConvexGenerator, eta: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let seed = f.solver_seed(eta);
    let mut theta = seed.clone();
    for i in 0..eta.len() {
        let iv = f.domain().intervals()[i];
        let target = eta[i];
        let mut probe = seed.clone();
        let mut g = |x: f64| {
            probe[i] = x;
            let gi = f.grad(&probe)[i] - target;
            let hi = f.hessian(&probe)[(i, i)];
            (gi, hi)
        };
        theta[i] = solve_monotone(&mut g, iv, seed[i], target, cfg)?;
    }
    Ok(theta)
}

/// Root of an increasing function `g` on an open interval.
fn solve_monotone(
    g: &mut dyn FnMut(f64) -> (f64, f64),
    iv: Interval,
    seed: f64,
    target: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let tol = cfg.tol * (1.0 + target.abs());
    let x0 = if iv.contains(seed) { seed } else { iv.seed() };
    let (g0, _) = g(x0);
    if !g0.is_finite() {
        return Err(Error::Domain(format!("gradient not finite at seed {x0}")));
    }
    if g0.abs() <= tol {
        return Ok(x0);
    }

    // bracket [lo, hi] with g(lo) < 0 < g(hi)
    let upward = g0 < 0.0;
    let (mut inner, mut step) = (x0, x0.abs().max(1.0));
    let mut outer = None;
    for _ in 0..cfg.max_bracket_steps {
        let edge = if upward { iv.hi } else { iv.lo };
        let candidate = if upward { inner + step } else { inner - step };
        let candidate = if (upward && candidate < edge) || (!upward && candidate > edge) {
            candidate
        } else {
            0.5 * (inner + edge)
        };
        if !candidate.is_finite() || candidate == inner || !iv.contains(candidate) {
            break;
        }
        let (gc, _) = g(candidate);
        if gc.abs() <= tol {
            return Ok(candidate);
        }
        if (upward && gc > 0.0) || (!upward && gc < 0.0) {
            outer = Some(candidate);
            break;
        }
        inner = candidate;
        step *= 2.0;
    }
    let Some(outer) = outer else {
        return Err(Error::Domain(format!(
            "η = {target} lies outside the gradient range on {iv:?}"
        )));
    };
    let (mut lo, mut hi) = if upward { (inner, outer) } else { (outer, inner) };

    let mut x = 0.5 * (lo + hi);
    let mut last_residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let (gx, dgx) = g(x);
        last_residual = gx.abs();
        if gx.abs() <= tol {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let newton = x - gx / dgx;
        x = if dgx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        residual: last_residual,
    })
}

fn solve_newton(f: &dyn ConvexGenerator, eta: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let tol = cfg.tol * (1.0 + norm_inf(eta));
    let mut theta = f.solver_seed(eta);
    if !f.domain().contains(&theta) {
        theta = f.domain().seed();
    }
    let objective = |t: &[f64]| f.eval(t) - dot(eta, t);
    let residual = |t: &[f64]| -> Vec<f64> { f.grad(t).iter().zip(eta).map(|(g, e)| g - e).collect() };

    let mut r = residual(&theta);
    for _ in 0..cfg.max_iter {
        let rn = norm_inf(&r);
        if !rn.is_finite() {
            return Err(Error::Domain(format!("gradient not finite at {theta:?}")));
        }
        if rn <= tol {
            return Ok(theta);
        }
        let h = f.hessian(&theta);
        let rhs = -DVector::from_column_slice(&r);
        let dir = h
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .or_else(|| h.lu().solve(&rhs))
            .unwrap_or(rhs);
        let slope = dot(&r, dir.as_slice());
        let g0 = objective(&theta);
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = theta.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            if f.domain().contains(&trial) {
                let rt = residual(&trial);
                let gt = objective(&trial);
                let armijo = gt <= g0 + 1e-4 * t * slope;
                if rt.iter().all(|v| v.is_finite()) && (armijo || norm_inf(&rt) < rn) {
                    break Some((trial, rt));
                }
            }
            t *= 0.5;
            if t < 1e-14 {
                break None;
            }
        };
        match accepted {
            Some((next, rnext)) => {
                theta = next;
                r = rnext;
            }
            None => {
                return Err(Error::Convergence {
                    iterations: cfg.max_iter,
                    residual: rn,
                })
            }
        }
    }
    let rn = norm_inf(&r);
    if rn <= tol {
        Ok(theta)
    } else {
        Err(Error::Convergence {
            iterations: cfg.max_iter,
            residual: rn,
        })
    }
}

// -----------------------------------------------------------------------------
// Dominance
// -----------------------------------------------------------------------------

/// How `F1 ≥ F2` is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceCheck {
    pub samples: usize,
    /// Unbounded domain coordinates are clipped to this half-width.
    pub clip: f64,
    pub tol: f64,
}

impl Default for DominanceCheck {
    fn default() -> Self {
        Self {
            samples: 1000,
            clip: 10.0,
            tol: 1e-12,
        }
    }
}

/// True iff `F1(θ) ≥ F2(θ) − 1e−12` on a Halton grid over the shared domain.
pub fn check_dominance(f1: &dyn ConvexGenerator, f2: &dyn ConvexGenerator, sample_count: usize) -> Result<bool> {
    check_dominance_with(
        f1,
        f2,
        &DominanceCheck {
            samples: sample_count,
            ..DominanceCheck::default()
        },
    )
}

pub fn check_dominance_with(f1: &dyn ConvexGenerator, f2: &dyn ConvexGenerator, cfg: &DominanceCheck) -> Result<bool> {
    let shared = f1
        .domain()
        .intersect(f2.domain())
        .ok_or_else(|| Error::Domain(format!("{} and {} have disjoint domains", f1.label(), f2.label())))?;
    // sample on the tighter of the two generators' sampling boxes
    let boxes: Vec<(f64, f64)> = f1
        .sampling_box(cfg.clip)
        .into_iter()
        .zip(f2.sampling_box(cfg.clip))
        .zip(shared.clipped(cfg.clip))
        .map(|((a, b), c)| (a.0.max(b.0).max(c.0), a.1.min(b.1).min(c.1)))
        .collect();
    if boxes.iter().any(|(lo, hi)| lo >= hi) {
        return Err(Error::Domain("sampling boxes do not overlap".into()));
    }
    for point in halton_points(&boxes, cfg.samples) {
        if !shared.contains(&point) {
            continue;
        }
        let (v1, v2) = (f1.eval(&point), f2.eval(&point));
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Domain(format!("generator not finite at {point:?}")));
        }
        if v1 < v2 - cfg.tol {
            return Ok(false);
        }
    }
    Ok(true)
}

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

/// First `n` Halton points scaled into the given box (index starts at 1, so no
/// point lies on the box boundary).
pub fn halton_points(bounds: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    assert!(bounds.len() <= PRIMES.len());
    (1..=n as u64)
        .map(|i| {
            bounds
                .iter()
                .zip(PRIMES)
                .map(|(&(lo, hi), p)| lo + (hi - lo) * radical_inverse(i, p))
                .collect()
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
