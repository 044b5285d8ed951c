//! Bregman, Fenchel-Young and Jensen divergences and their two-generator
//! ("duo") generalizations.
//!
//! | Divergence | Formula |
//! |------------|---------|
//! | [`bregman`] | `B_F(θ:θ') = F(θ) − F(θ') − ⟨θ−θ', ∇F(θ')⟩` |
//! | [`fenchel_young`] | `Y_{F,F*}(θ, η') = F(θ) + F*(η') − ⟨θ, η'⟩` |
//! | [`jensen`] | `J_{F,α}(θ1:θ2) = αF(θ1) + (1−α)F(θ2) − F(αθ1 + (1−α)θ2)` |
//! | [`DuoPair::duo_bregman`] | `B_{F1,F2}(θ:θ') = F1(θ) − F2(θ') − ⟨θ−θ', ∇F2(θ')⟩` |
//! | [`DuoPair::duo_fenchel_young`] | `Y_{F1,F2*}(θ, η') = F1(θ) + F2*(η') − ⟨θ, η'⟩` |
//! | [`DuoPair::dual_duo_bregman`] | `B_{F2*,F1*}(η':η)` |
//! | [`DuoPair::duo_jensen`] | `αF2(θ1) + (1−α)F1(θ2) − F2(αθ1 + (1−α)θ2)` |
//!
//! A [`DuoPair`] holds a *major* generator `F1` and a *minor* generator `F2`
//! with `F1 ≥ F2` on the shared domain; the duo divergences are non-negative
//! only under that dominance, so the pair checks it at construction.
//!
//! The skewed duo Jensen divergence is usually written with the generators the
//! other way round (`J_{F1,F2,α}` with `F2 ≥ F1`): the *smaller* generator is
//! applied at `θ1` and at the mixture. [`DuoPair::duo_jensen`] follows that
//! convention, so for a pair `(major, minor)` it evaluates
//! `α·minor(θ1) + (1−α)·major(θ2) − minor(αθ1 + (1−α)θ2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{
    check_dominance_with, dot, gradient_inverse, legendre_conjugate, BoxDomain, ConvexGenerator, DominanceCheck,
};

/// Roundoff allowance below zero before a value is reported as negative.
pub const NEGATIVE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Finite(f64),
    /// `+∞`, e.g. a Kullback-Leibler divergence without absolute continuity.
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    pub value: Value,
    pub method: Method,
    pub abs_error_estimate: f64,
}

impl DivergenceValue {
    /// Wraps a closed-form evaluation. Values in `[−1e−10, 0)` are clamped to
    /// zero and the clamped amount is recorded as the error estimate.
    pub fn closed_form(raw: f64) -> Result<Self> {
        Self::new(raw, Method::ClosedForm, 0.0)
    }

    pub fn oracle(raw: f64, abs_error_estimate: f64) -> Result<Self> {
        Self::new(raw, Method::Oracle, abs_error_estimate)
    }

    pub fn infinite(method: Method) -> Self {
        Self {
            value: Value::Infinite,
            method,
            abs_error_estimate: 0.0,
        }
    }

    fn new(raw: f64, method: Method, err: f64) -> Result<Self> {
        if !raw.is_finite() {
            return Err(Error::Domain(format!("divergence evaluated to {raw}")));
        }
        let (value, err) = if (-NEGATIVE_SLACK..0.0).contains(&raw) {
            (0.0, err + -raw)
        } else {
            (raw, err)
        };
        Ok(Self {
            value: Value::Finite(value),
            method,
            abs_error_estimate: err,
        })
    }

    pub fn finite(&self) -> Option<f64> {
        match self.value {
            Value::Finite(v) => Some(v),
            Value::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.value, Value::Infinite)
    }

    /// Finite value; panics on the `+∞` sentinel.
    pub fn unwrap_finite(&self) -> f64 {
        self.finite().expect("divergence is +∞")
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Alpha(alpha))
    }
}

fn mix(alpha: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `B_F(θ1:θ2) = F(θ1) − F(θ2) − ⟨θ1 − θ2, ∇F(θ2)⟩`.
pub fn bregman(f: &dyn ConvexGenerator, theta1: &[f64], theta2: &[f64]) -> Result<DivergenceValue> {
    f.domain().require(theta1, "θ1")?;
    f.domain().require(theta2, "θ2")?;
    DivergenceValue::closed_form(bregman_raw(f, f, theta1, theta2))
}

fn bregman_raw(f1: &dyn ConvexGenerator, f2: &dyn ConvexGenerator, t1: &[f64], t2: &[f64]) -> f64 {
    f1.eval(t1) - f2.eval(t2) - dot(&sub(t1, t2), &f2.grad(t2))
}

/// Ordinary Fenchel-Young divergence `F(θ) + F*(η') − ⟨θ, η'⟩`.
pub fn fenchel_young(f: &dyn ConvexGenerator, theta: &[f64], eta_p: &[f64]) -> Result<DivergenceValue> {
    f.domain().require(theta, "θ")?;
    let conj = legendre_conjugate(f, eta_p)?;
    DivergenceValue::closed_form(f.eval(theta) + conj - dot(theta, eta_p))
}

/// Skewed Jensen divergence `αF(θ1) + (1−α)F(θ2) − F(αθ1 + (1−α)θ2)`.
pub fn jensen(f: &dyn ConvexGenerator, theta1: &[f64], theta2: &[f64], alpha: f64) -> Result<DivergenceValue> {
    check_alpha(alpha)?;
    f.domain().require(theta1, "θ1")?;
    f.domain().require(theta2, "θ2")?;
    let m = mix(alpha, theta1, theta2);
    f.domain().require(&m, "mixture")?;
    DivergenceValue::closed_form(alpha * f.eval(theta1) + (1.0 - alpha) * f.eval(theta2) - f.eval(&m))
}

/// Jeffreys-type symmetrized Bregman divergence `⟨θ2 − θ1, ∇F(θ2) − ∇F(θ1)⟩`.
pub fn jeffreys_symmetrized_bregman(
    f: &dyn ConvexGenerator,
    theta1: &[f64],
    theta2: &[f64],
) -> Result<DivergenceValue> {
    f.domain().require(theta1, "θ1")?;
    f.domain().require(theta2, "θ2")?;
    let d_eta = sub(&f.grad(theta2), &f.grad(theta1));
    DivergenceValue::closed_form(dot(&sub(theta2, theta1), &d_eta))
}

/// Itakura-Saito divergence `λ1/λ2 − log(λ1/λ2) − 1`.
pub fn itakura_saito(lambda1: f64, lambda2: f64) -> Result<DivergenceValue> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(Error::Domain(format!(
            "Itakura-Saito needs positive arguments, got ({lambda1}, {lambda2})"
        )));
    }
    let r = lambda1 / lambda2;
    DivergenceValue::closed_form(r - r.ln() - 1.0)
}

/// A pair of generators `(F1, F2)` with `F1 ≥ F2` on their shared domain.
#[derive(Debug, Clone, Copy)]
pub struct DuoPair<'a> {
    major: &'a dyn ConvexGenerator,
    minor: &'a dyn ConvexGenerator,
    checked: bool,
}

impl<'a> DuoPair<'a> {
    /// Builds the pair after sampling `F1 ≥ F2` at 1000 points.
    pub fn new(major: &'a dyn ConvexGenerator, minor: &'a dyn ConvexGenerator) -> Result<Self> {
        Self::with_check(major, minor, &DominanceCheck::default())
    }

    pub fn with_check(
        major: &'a dyn ConvexGenerator,
        minor: &'a dyn ConvexGenerator,
        cfg: &DominanceCheck,
    ) -> Result<Self> {
        if major.dim() != minor.dim() {
            return Err(Error::Domain(format!(
                "generator dimensions differ: {} vs {}",
                major.dim(),
                minor.dim()
            )));
        }
        if !check_dominance_with(major, minor, cfg)? {
            return Err(Error::Dominance(format!(
                "{} does not dominate {}",
                major.label(),
                minor.label()
            )));
        }
        Ok(Self {
            major,
            minor,
            checked: true,
        })
    }

    /// Skips the dominance guard. Divergences of such a pair may be negative.
    pub fn unchecked(major: &'a dyn ConvexGenerator, minor: &'a dyn ConvexGenerator) -> Self {
        Self {
            major,
            minor,
            checked: false,
        }
    }

    pub fn major(&self) -> &'a dyn ConvexGenerator {
        self.major
    }

    pub fn minor(&self) -> &'a dyn ConvexGenerator {
        self.minor
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }

    pub fn shared_domain(&self) -> Result<BoxDomain> {
        self.major
            .domain()
            .intersect(self.minor.domain())
            .ok_or_else(|| Error::Domain("generators have disjoint domains".into()))
    }

    /// `B_{F1,F2}(θ:θ') = F1(θ) − F2(θ') − ⟨θ − θ', ∇F2(θ')⟩ ≥ B_{F2}(θ:θ')`.
    pub fn duo_bregman(&self, theta: &[f64], theta_p: &[f64]) -> Result<DivergenceValue> {
        let dom = self.shared_domain()?;
        dom.require(theta, "θ")?;
        dom.require(theta_p, "θ'")?;
        DivergenceValue::closed_form(bregman_raw(self.major, self.minor, theta, theta_p))
    }

    /// `Y_{F1,F2*}(θ, η') = F1(θ) + F2*(η') − ⟨θ, η'⟩`.
    pub fn duo_fenchel_young(&self, theta: &[f64], eta_p: &[f64]) -> Result<DivergenceValue> {
        self.major.domain().require(theta, "θ")?;
        let conj = legendre_conjugate(self.minor, eta_p)?;
        DivergenceValue::closed_form(self.major.eval(theta) + conj - dot(theta, eta_p))
    }

    /// `B_{F2*,F1*}(η':η) = F2*(η') − F1*(η) − ⟨η' − η, ∇F1*(η)⟩`
    /// for `η = ∇F1(θ)` and `η' = ∇F2(θ')`; equals `B_{F1,F2}(θ:θ')`.
    pub fn dual_duo_bregman(&self, eta_p: &[f64], eta: &[f64]) -> Result<DivergenceValue> {
        let theta = gradient_inverse(self.major, eta)?;
        let f2_conj = legendre_conjugate(self.minor, eta_p)?;
        let f1_conj = legendre_conjugate(self.major, eta)?;
        DivergenceValue::closed_form(f2_conj - f1_conj - dot(&sub(eta_p, eta), &theta))
    }

    /// `S_{F1,F2}(θ1, θ2) = B_{F1,F2}(θ1:θ2) + B_{F1,F2}(θ2:θ1)`.
    pub fn symmetrized_duo_bregman(&self, theta1: &[f64], theta2: &[f64]) -> Result<DivergenceValue> {
        let a = self.duo_bregman(theta1, theta2)?;
        let b = self.duo_bregman(theta2, theta1)?;
        DivergenceValue::closed_form(a.unwrap_finite() + b.unwrap_finite())
    }

    /// Expanded form `⟨θ1 − θ2, ∇F2(θ1) − ∇F2(θ2)⟩ + F1(θ1) − F2(θ1) + F1(θ2) − F2(θ2)`.
    pub fn symmetrized_duo_bregman_expanded(&self, theta1: &[f64], theta2: &[f64]) -> Result<DivergenceValue> {
        let dom = self.shared_domain()?;
        dom.require(theta1, "θ1")?;
        dom.require(theta2, "θ2")?;
        let (f1, f2) = (self.major, self.minor);
        let grad_gap = sub(&f2.grad(theta1), &f2.grad(theta2));
        let gaps = f1.eval(theta1) - f2.eval(theta1) + f1.eval(theta2) - f2.eval(theta2);
        DivergenceValue::closed_form(dot(&sub(theta1, theta2), &grad_gap) + gaps)
    }

    /// Duo skewed Jensen divergence with the minor generator at `θ1` and at
    /// the mixture: `α·F2(θ1) + (1−α)·F1(θ2) − F2(αθ1 + (1−α)θ2)`.
    ///
    /// For nested exponential families with `minor` the truncated
    /// log-normalizer this is the skewed Bhattacharyya distance
    /// `−log ∫ p_{θ1}^α q_{θ2}^{1−α}`.
    pub fn duo_jensen(&self, theta1: &[f64], theta2: &[f64], alpha: f64) -> Result<DivergenceValue> {
        check_alpha(alpha)?;
        let dom = self.shared_domain()?;
        dom.require(theta1, "θ1")?;
        dom.require(theta2, "θ2")?;
        let m = mix(alpha, theta1, theta2);
        dom.require(&m, "mixture")?;
        let (lower, upper) = (self.minor, self.major);
        DivergenceValue::closed_form(alpha * lower.eval(theta1) + (1.0 - alpha) * upper.eval(theta2) - lower.eval(&m))
    }
}
