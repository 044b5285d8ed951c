//! Catalog of exponential families in canonical form
//! `p_θ(x) = exp(⟨θ, t(x)⟩ − F(θ) + k(x))`.
//!
//! | Family | Source | θ | t(x) | F(θ) | k(x) | Support |
//! |--------|--------|---|------|------|------|---------|
//! | Poisson | λ | log λ | x | e^θ | −log x! | ℕ (counting) |
//! | geometric | p | log(1 − p) | x | −log(1 − e^θ) | 0 | ℕ (counting) |
//! | exponential | λ | λ | −x | −log θ | 0 | (0, ∞) |
//! | Laplacian | λ | λ | −\|x\| | −log θ + log 2 | 0 | ℝ |
//! | half-normal | σ | 1/σ² | −x²/2 | −½ log θ + ½ log(π/2) | 0 | (0, ∞) |
//! | normal | m, s | (m/s², −1/(2s²)) | (x, x²) | −θ1²/(4θ2) + ½ log(−π/θ2) | 0 | ℝ |
//! | truncated normal | m, s, a, b | (m/s², −1/(2s²)) | (x, x²) | see [`crate::truncnorm`] | 0 | (a, b) |
//!
//! Exponential and Laplacian share `t` and `k`, so the exponential family is
//! the Laplacian family truncated to `(0, ∞)`; likewise every truncated
//! normal (half-normal included) is a truncation of the normal family. For
//! such *nested* pairs the Kullback-Leibler divergence is a duo Bregman
//! divergence `D_KL[p_θ1 : q_θ2] = B_{F2,F1}(θ2 : θ1)` and is `+∞` in the
//! other direction.
//!
//! Between unrelated families the divergence is
//!
//! ```text
//! D_KL[P_θ : Q_θ'] = F_Q(θ') + F_P*(η) − ⟨θ', E_P[t_Q(x)]⟩ + E_P[k_P(x) − k_Q(x)],
//! ```
//!
//! which needs pair-specific expectations; only (Poisson, geometric) is
//! registered.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::divergences::{bregman, jensen, DivergenceValue, DuoPair, Method};
use crate::error::{Error, Result};
use crate::generators::{
    gradient_inverse, legendre_conjugate, Conjugate, ConvexGenerator, Exponential, GeometricLogNormalizer, NegLog,
};
use crate::oracle::{Density, Estimate, Support};
use crate::truncnorm::{self, kl_trunc_normal, TruncNormalLogNormalizer, TruncNormalParams};

/// Absolute tail bound for the `E[log x!]` series.
pub const LOG_FACTORIAL_TAIL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    Poisson,
    Geometric,
    Exponential,
    Laplacian,
    HalfNormal,
    Normal,
    TruncNormal,
}

impl FamilyId {
    /// Name used in spec strings.
    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Poisson => "poisson",
            FamilyId::Geometric => "geometric",
            FamilyId::Exponential => "exponential",
            FamilyId::Laplacian => "laplacian",
            FamilyId::HalfNormal => "halfnormal",
            FamilyId::Normal => "normal",
            FamilyId::TruncNormal => "truncnormal",
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Base measure of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMeasure {
    Counting,
    Lebesgue,
}

/// A family; truncated normals carry their window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Poisson,
    Geometric,
    Exponential,
    Laplacian,
    HalfNormal,
    Normal,
    TruncNormal { a: f64, b: f64 },
}

/// Families that are truncations of a common parent share a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NestingGroup {
    /// `t(x) = −|x|`: exponential ⊂ Laplacian.
    AbsoluteValue,
    /// `t(x) = (x, x²)`: truncated normals ⊂ normal.
    Gaussian,
}

impl Family {
    pub fn id(&self) -> FamilyId {
        match self {
            Family::Poisson => FamilyId::Poisson,
            Family::Geometric => FamilyId::Geometric,
            Family::Exponential => FamilyId::Exponential,
            Family::Laplacian => FamilyId::Laplacian,
            Family::HalfNormal => FamilyId::HalfNormal,
            Family::Normal => FamilyId::Normal,
            Family::TruncNormal { .. } => FamilyId::TruncNormal,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::Normal | Family::TruncNormal { .. } => 2,
            _ => 1,
        }
    }

    /// Log-normalizer `F`.
    pub fn log_normalizer(&self) -> Box<dyn ConvexGenerator> {
        match *self {
            Family::Poisson => Box::new(Exponential::default()),
            Family::Geometric => Box::new(GeometricLogNormalizer::default()),
            Family::Exponential => Box::new(exponential_generator()),
            Family::Laplacian => Box::new(laplacian_generator()),
            Family::HalfNormal => Box::new(half_normal_scale_generator()),
            Family::Normal => Box::new(TruncNormalLogNormalizer::untruncated()),
            Family::TruncNormal { a, b } => {
                Box::new(TruncNormalLogNormalizer::new(a, b).expect("window validated at construction"))
            }
        }
    }

    pub fn support(&self) -> Support {
        match *self {
            Family::Poisson | Family::Geometric => Support::Counting,
            Family::Exponential | Family::HalfNormal => Support::Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            Family::Laplacian | Family::Normal => Support::real_line(),
            Family::TruncNormal { a, b } => Support::Interval { lo: a, hi: b },
        }
    }

    pub fn base_measure(&self) -> BaseMeasure {
        match self {
            Family::Poisson | Family::Geometric => BaseMeasure::Counting,
            _ => BaseMeasure::Lebesgue,
        }
    }

    /// Sufficient statistic `t(x)`.
    pub fn sufficient_stat(&self, x: f64) -> Vec<f64> {
        match self {
            Family::Poisson | Family::Geometric => vec![x],
            Family::Exponential => vec![-x],
            Family::Laplacian => vec![-x.abs()],
            Family::HalfNormal => vec![-0.5 * x * x],
            Family::Normal | Family::TruncNormal { .. } => vec![x, x * x],
        }
    }

    /// Carrier term `k(x)`.
    pub fn carrier(&self, x: f64) -> f64 {
        match self {
            Family::Poisson => -ln_factorial(x),
            _ => 0.0,
        }
    }

    fn nesting_group(&self) -> Option<NestingGroup> {
        match self {
            Family::Exponential | Family::Laplacian => Some(NestingGroup::AbsoluteValue),
            Family::HalfNormal | Family::Normal | Family::TruncNormal { .. } => Some(NestingGroup::Gaussian),
            Family::Poisson | Family::Geometric => None,
        }
    }

    /// Source parameters of the member with natural parameter `θ`.
    pub fn source_from_natural(&self, theta: &[f64]) -> Result<SourceParams> {
        if theta.len() != self.dim() {
            return Err(Error::Domain(format!(
                "{} expects a {}-dimensional θ",
                self.id(),
                self.dim()
            )));
        }
        let t = theta[0];
        let params = match *self {
            Family::Poisson => SourceParams::Poisson { lambda: t.exp() },
            Family::Geometric => SourceParams::Geometric { p: -t.exp_m1() },
            Family::Exponential => SourceParams::Exponential { lambda: t },
            Family::Laplacian => SourceParams::Laplacian { lambda: t },
            Family::HalfNormal => SourceParams::HalfNormal { sigma: 1.0 / t.sqrt() },
            Family::Normal => {
                let p = TruncNormalParams::from_natural(theta, f64::NEG_INFINITY, f64::INFINITY)?;
                SourceParams::Normal { m: p.m, s: p.s }
            }
            Family::TruncNormal { a, b } => SourceParams::TruncNormal(TruncNormalParams::from_natural(theta, a, b)?),
        };
        let g = self.log_normalizer();
        g.domain().require(theta, "θ")?;
        params.validate()?;
        Ok(params)
    }
}

fn exponential_generator() -> NegLog {
    NegLog::new(1.0, 0.0)
}

fn laplacian_generator() -> NegLog {
    NegLog::new(1.0, LN_2)
}

fn half_normal_scale_generator() -> NegLog {
    NegLog::new(0.5, 0.5 * (0.5 * PI).ln())
}

fn normal_scale_generator() -> NegLog {
    NegLog::new(0.5, 0.5 * (2.0 * PI).ln())
}

fn ln_factorial(x: f64) -> f64 {
    if x < 2.0 {
        0.0
    } else {
        libm::lgamma(x + 1.0)
    }
}

/// Parameters in the usual (source) parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceParams {
    Poisson { lambda: f64 },
    Geometric { p: f64 },
    Exponential { lambda: f64 },
    Laplacian { lambda: f64 },
    HalfNormal { sigma: f64 },
    Normal { m: f64, s: f64 },
    TruncNormal(TruncNormalParams),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Param(format!("{name} = {v} must be positive and finite")))
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceParams::Poisson { lambda }
            | SourceParams::Exponential { lambda }
            | SourceParams::Laplacian { lambda } => positive("lambda", lambda),
            SourceParams::Geometric { p } => {
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Param(format!("p = {p} must lie in (0, 1)")))
                }
            }
            SourceParams::HalfNormal { sigma } => positive("sigma", sigma),
            SourceParams::Normal { m, s } => TruncNormalParams::normal(m, s).map(|_| ()),
            SourceParams::TruncNormal(p) => TruncNormalParams::new(p.m, p.s, p.a, p.b).map(|_| ()),
        }
    }

    pub fn family(&self) -> Family {
        match *self {
            SourceParams::Poisson { .. } => Family::Poisson,
            SourceParams::Geometric { .. } => Family::Geometric,
            SourceParams::Exponential { .. } => Family::Exponential,
            SourceParams::Laplacian { .. } => Family::Laplacian,
            SourceParams::HalfNormal { .. } => Family::HalfNormal,
            SourceParams::Normal { .. } => Family::Normal,
            SourceParams::TruncNormal(p) => Family::TruncNormal { a: p.a, b: p.b },
        }
    }

    pub fn family_id(&self) -> FamilyId {
        self.family().id()
    }

    /// Named parameter values in canonical order.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        match *self {
            SourceParams::Poisson { lambda }
            | SourceParams::Exponential { lambda }
            | SourceParams::Laplacian { lambda } => vec![("lambda", lambda)],
            SourceParams::Geometric { p } => vec![("p", p)],
            SourceParams::HalfNormal { sigma } => vec![("sigma", sigma)],
            SourceParams::Normal { m, s } => vec![("m", m), ("s", s)],
            SourceParams::TruncNormal(p) => vec![("m", p.m), ("s", p.s), ("a", p.a), ("b", p.b)],
        }
    }

    /// The member as a truncated normal, for the Gaussian families.
    pub fn as_trunc_normal(&self) -> Option<TruncNormalParams> {
        match *self {
            SourceParams::HalfNormal { sigma } => TruncNormalParams::half_normal(sigma).ok(),
            SourceParams::Normal { m, s } => TruncNormalParams::normal(m, s).ok(),
            SourceParams::TruncNormal(p) => Some(p),
            _ => None,
        }
    }

    /// Natural parameter `θ`.
    pub fn to_natural(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match *self {
            SourceParams::Poisson { lambda } => vec![lambda.ln()],
            SourceParams::Geometric { p } => vec![(-p).ln_1p()],
            SourceParams::Exponential { lambda } | SourceParams::Laplacian { lambda } => vec![lambda],
            SourceParams::HalfNormal { sigma } => vec![1.0 / (sigma * sigma)],
            SourceParams::Normal { m, s } => TruncNormalParams::normal(m, s)?.natural().to_vec(),
            SourceParams::TruncNormal(p) => p.natural().to_vec(),
        })
    }
}

impl fmt::Display for SourceParams {
    /// Formats as a spec string, e.g. `normal:m=0,s=1`. Values use the
    /// shortest representation that parses back to the same `f64`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family_id().name())?;
        for (i, (k, v)) in self.named().into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for SourceParams {
    type Err = Error;

    /// Parses `family:key=value,...`. Keys may appear in any order; every key
    /// of the family is required and unknown keys are rejected. Truncation
    /// bounds accept `inf` and `-inf`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("'{s}': expected family:key=value,...")))?;
        let keys: &[&str] = match name.trim() {
            "poisson" | "exponential" | "laplacian" => &["lambda"],
            "geometric" => &["p"],
            "halfnormal" => &["sigma"],
            "normal" => &["m", "s"],
            "truncnormal" => &["m", "s", "a", "b"],
            other => return Err(Error::Parse(format!("unknown family '{other}'"))),
        };
        let mut values = vec![None; keys.len()];
        for item in rest.split(',').filter(|i| !i.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("'{item}': expected key=value")))?;
            let (k, v) = (k.trim(), v.trim());
            let idx = keys
                .iter()
                .position(|key| *key == k)
                .ok_or_else(|| Error::Parse(format!("unknown parameter '{k}' for {name}")))?;
            if values[idx].is_some() {
                return Err(Error::Parse(format!("parameter '{k}' given twice")));
            }
            let value: f64 = v.parse().map_err(|_| Error::Parse(format!("'{v}' is not a number")))?;
            if value.is_nan() {
                return Err(Error::Parse(format!("parameter '{k}' is NaN")));
            }
            values[idx] = Some(value);
        }
        let mut got = Vec::with_capacity(keys.len());
        for (k, v) in keys.iter().zip(values) {
            got.push(v.ok_or_else(|| Error::Parse(format!("missing parameter '{k}' for {name}")))?);
        }
        let params = match name.trim() {
            "poisson" => SourceParams::Poisson { lambda: got[0] },
            "exponential" => SourceParams::Exponential { lambda: got[0] },
            "laplacian" => SourceParams::Laplacian { lambda: got[0] },
            "geometric" => SourceParams::Geometric { p: got[0] },
            "halfnormal" => SourceParams::HalfNormal { sigma: got[0] },
            "normal" => SourceParams::Normal { m: got[0], s: got[1] },
            _ => SourceParams::TruncNormal(TruncNormalParams::new(got[0], got[1], got[2], got[3])?),
        };
        params.validate()?;
        Ok(params)
    }
}

/// A catalog member: source parameters, natural parameter and log-normalizer.
#[derive(Debug)]
pub struct ExpFamilyMember {
    source: SourceParams,
    family: Family,
    theta: Vec<f64>,
    log_normalizer: Box<dyn ConvexGenerator>,
}

impl Clone for ExpFamilyMember {
    fn clone(&self) -> Self {
        Self::new(self.source).expect("source parameters were validated")
    }
}

impl ExpFamilyMember {
    pub fn new(source: SourceParams) -> Result<Self> {
        let theta = source.to_natural()?;
        let family = source.family();
        let log_normalizer = family.log_normalizer();
        log_normalizer.domain().require(&theta, "θ")?;
        Ok(Self {
            source,
            family,
            theta,
            log_normalizer,
        })
    }

    pub fn from_natural(family: Family, theta: &[f64]) -> Result<Self> {
        Self::new(family.source_from_natural(theta)?)
    }

    pub fn source(&self) -> &SourceParams {
        &self.source
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn family_id(&self) -> FamilyId {
        self.family.id()
    }

    pub fn natural(&self) -> &[f64] {
        &self.theta
    }

    pub fn log_normalizer(&self) -> &dyn ConvexGenerator {
        self.log_normalizer.as_ref()
    }

    /// Moment parameter `η = ∇F(θ) = E[t(x)]`.
    pub fn moment(&self) -> Vec<f64> {
        self.log_normalizer.grad(&self.theta)
    }

    pub fn support(&self) -> Support {
        self.family.support()
    }

    pub fn base_measure(&self) -> BaseMeasure {
        self.family.base_measure()
    }

    /// `⟨θ, t(x)⟩ − F(θ) + k(x)`, or `−∞` outside the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return f64::NEG_INFINITY;
        }
        let t = self.family.sufficient_stat(x);
        crate::generators::dot(&self.theta, &t) - self.log_normalizer.eval(&self.theta) + self.family.carrier(x)
    }

    /// Density (mass) at `x`. Continuous families are zero outside their
    /// support; discrete families reject points off `ℕ`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if self.support().is_discrete() && !self.support().contains(x) {
            return Err(Error::Support(x));
        }
        Ok(self.ln_density(x).exp())
    }

    /// Like [`ExpFamilyMember::density`] but rejects every `x` off the support.
    pub fn density_strict(&self, x: f64) -> Result<f64> {
        if !self.support().contains(x) {
            return Err(Error::Support(x));
        }
        self.density(x)
    }
}

fn location_scale(source: &SourceParams) -> (f64, f64) {
    match *source {
        SourceParams::Poisson { lambda } => (lambda, lambda.sqrt().max(1.0)),
        SourceParams::Geometric { p } => ((1.0 - p) / p, ((1.0 - p).sqrt() / p).max(1.0)),
        SourceParams::Exponential { lambda } => (1.0 / lambda, 1.0 / lambda),
        SourceParams::Laplacian { lambda } => (0.0, 1.0 / lambda),
        SourceParams::HalfNormal { sigma } => (sigma, sigma),
        SourceParams::Normal { m, s } => (m, s),
        SourceParams::TruncNormal(p) => (p.m, p.s),
    }
}

impl Density for ExpFamilyMember {
    fn support(&self) -> Support {
        self.family.support()
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_density(x)
    }
    fn center(&self) -> f64 {
        location_scale(&self.source).0
    }
    fn scale(&self) -> f64 {
        location_scale(&self.source).1
    }
}

/// The member's density written the textbook way (`λ^x e^{−λ}/x!`,
/// `(1 − p)^x p`, `λe^{−λx}`, ...), independent of the canonical
/// decomposition. Used as the oracle's view of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceDensity(pub SourceParams);

impl Density for ReferenceDensity {
    fn support(&self) -> Support {
        self.0.family().support()
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return f64::NEG_INFINITY;
        }
        match self.0 {
            SourceParams::Poisson { lambda } => x * lambda.ln() - lambda - libm::lgamma(x + 1.0),
            SourceParams::Geometric { p } => x * (1.0 - p).ln() + p.ln(),
            SourceParams::Exponential { lambda } => lambda.ln() - lambda * x,
            SourceParams::Laplacian { lambda } => (0.5 * lambda).ln() - lambda * x.abs(),
            SourceParams::HalfNormal { sigma } => (2.0 / PI).sqrt().ln() - sigma.ln() - x * x / (2.0 * sigma * sigma),
            SourceParams::Normal { m, s } => {
                let z = (x - m) / s;
                -0.5 * z * z - s.ln() - 0.5 * (2.0 * PI).ln()
            }
            SourceParams::TruncNormal(p) => p.ln_pdf(x).unwrap_or(f64::NAN),
        }
    }
    fn center(&self) -> f64 {
        location_scale(&self.0).0
    }
    fn scale(&self) -> f64 {
        location_scale(&self.0).1
    }
}

/// Moment parameter of a member.
pub fn to_moment(member: &ExpFamilyMember) -> Vec<f64> {
    member.moment()
}

/// Natural parameter of the family member with moment parameter `η`.
pub fn from_moment(family: Family, eta: &[f64]) -> Result<Vec<f64>> {
    gradient_inverse(family.log_normalizer().as_ref(), eta)
}

fn same_family(p: &ExpFamilyMember, q: &ExpFamilyMember) -> bool {
    p.family == q.family
}

fn mismatch(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Error {
    Error::FamilyMismatch(p.source.to_string(), q.source.to_string())
}

/// `D_KL[p : q] = B_F(θ_q : θ_p)` within one family.
pub fn kl_same_family(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue> {
    if !same_family(p, q) {
        return Err(mismatch(p, q));
    }
    bregman(p.log_normalizer(), q.natural(), p.natural())
}

/// Same divergence through the dual Bregman divergence `B_{F*}(η_p : η_q)`.
pub fn kl_same_family_dual(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue> {
    if !same_family(p, q) {
        return Err(mismatch(p, q));
    }
    let conj = Conjugate::new(p.log_normalizer());
    bregman(&conj, &p.moment(), &q.moment())
}

/// `E[log x!]` for `x ~ Poisson(λ)`.
///
/// Terms `T_k = e^{−λ} λ^k log(k!)/k!` are summed from `k = 2` until the
/// ratio bound `T_{j+1}/T_j ≤ r_k = λ/(k+1)·(1 + log(k+1)/log k!)`, which
/// decreases in `j ≥ k ≥ 2`, certifies a tail below
/// [`LOG_FACTORIAL_TAIL_TOL`].
pub fn poisson_expected_log_factorial(lambda: f64) -> Result<Estimate> {
    positive("lambda", lambda)?;
    let ln_lambda = lambda.ln();
    let limit = (lambda + 200.0 * lambda.sqrt() + 1000.0) as u64;
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    let mut k = 2u64;
    loop {
        let kf = k as f64;
        let ln_fact = libm::lgamma(kf + 1.0);
        let term = (kf * ln_lambda - lambda - ln_fact).exp() * ln_fact;
        let s = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - s) + term
        } else {
            (term - s) + sum
        };
        sum = s;
        let r = lambda / (kf + 1.0) * (1.0 + (kf + 1.0).ln() / ln_fact);
        if r < 1.0 {
            let tail = term * r / (1.0 - r);
            if tail < LOG_FACTORIAL_TAIL_TOL {
                let value = sum + comp;
                return Ok(Estimate {
                    value,
                    abs_error: tail + kf * f64::EPSILON * value,
                });
            }
        }
        k += 1;
        if k > limit {
            return Err(Error::Convergence {
                iterations: k as usize,
                residual: term,
            });
        }
    }
}

/// `D_KL[Poisson(λ) : geometric(p)]
///   = −log p + λ log(λ/(1 − p)) − λ − E[log x!]`.
///
/// Assembled term by term from the cross-family formula:
/// `F_Q(θ') = −log p`, `F_P*(λ) = λ log λ − λ`, `E_P[t_Q] = λ`, and
/// `E_P[k_P − k_Q] = −E[log x!]`.
pub fn kl_poisson_geometric(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue> {
    let (SourceParams::Poisson { lambda }, SourceParams::Geometric { .. }) = (p.source, q.source) else {
        return Err(Error::UnsupportedPair(p.source.to_string(), q.source.to_string()));
    };
    let f_q = q.log_normalizer().eval(q.natural());
    let f_p_star = legendre_conjugate(p.log_normalizer(), &p.moment())?;
    let e_t_q = lambda;
    let log_fact = poisson_expected_log_factorial(lambda)?;
    let raw = f_q + f_p_star - q.natural()[0] * e_t_q - log_fact.value;
    let mut v = DivergenceValue::closed_form(raw)?;
    v.abs_error_estimate += log_fact.abs_error;
    Ok(v)
}

/// `D_KL[p : q]` for `p` on a truncation of `q`'s family:
/// `B_{F_q,F_p}(θ_q : θ_p)`.
///
/// The reverse direction (support of `p` strictly larger) is `+∞`. Families
/// that are not truncations of one another, or truncated normals whose
/// windows overlap without nesting, give [`Error::Nesting`].
pub fn kl_nested(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue> {
    let (gp, gq) = (p.family.nesting_group(), q.family.nesting_group());
    if gp.is_none() || gp != gq {
        return Err(Error::Nesting(format!(
            "{} and {} are not truncations of a common family",
            p.family_id(),
            q.family_id()
        )));
    }
    let (sp, sq) = (p.support(), q.support());
    if !sp.is_subset_of(&sq) {
        if sq.is_subset_of(&sp) {
            return Ok(DivergenceValue::infinite(Method::ClosedForm));
        }
        return Err(Error::Nesting(format!(
            "supports of {} and {} are not nested",
            p.source, q.source
        )));
    }
    match gp {
        Some(NestingGroup::AbsoluteValue) => {
            // dominance F_q ≥ F_p follows from the nested supports
            let pair = DuoPair::unchecked(q.log_normalizer(), p.log_normalizer());
            pair.duo_bregman(q.natural(), p.natural())
        }
        _ => {
            let (tp, tq) = gaussian_pair(p, q);
            kl_trunc_normal(&tp, &tq)
        }
    }
}

fn gaussian_pair(p: &ExpFamilyMember, q: &ExpFamilyMember) -> (TruncNormalParams, TruncNormalParams) {
    (
        p.source.as_trunc_normal().expect("gaussian group member"),
        q.source.as_trunc_normal().expect("gaussian group member"),
    )
}

/// `D_KL[half-normal(σ1) : N(0, σ2²)] = log 2 + ½ log(σ2²/σ1²) + ½(σ1²/σ2² − 1)`,
/// evaluated as a duo Bregman divergence of the scale log-normalizers
/// `F1 = −½ log θ + ½ log(π/2)` and `F2 = −½ log θ + ½ log 2π` at `θ = 1/σ²`.
pub fn kl_halfnormal_normal(sigma1: f64, sigma2: f64) -> Result<DivergenceValue> {
    positive("sigma1", sigma1)?;
    positive("sigma2", sigma2)?;
    let (f1, f2) = (half_normal_scale_generator(), normal_scale_generator());
    let pair = DuoPair::unchecked(&f2, &f1);
    pair.duo_bregman(&[1.0 / (sigma2 * sigma2)], &[1.0 / (sigma1 * sigma1)])
}

/// `D_KL[p : q]` for any pair the catalog can handle.
///
/// Dispatch order: `+∞` when the support of `p` is not inside that of `q`;
/// same family; registered cross-family pairs; nested families. Anything
/// else is [`Error::UnsupportedPair`].
pub fn kl_cross_family(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue> {
    if p.base_measure() != q.base_measure() {
        return Err(Error::UnsupportedPair(p.source.to_string(), q.source.to_string()));
    }
    if !p.support().is_subset_of(&q.support()) {
        return Ok(DivergenceValue::infinite(Method::ClosedForm));
    }
    if same_family(p, q) {
        return kl_same_family(p, q);
    }
    match (p.family_id(), q.family_id()) {
        (FamilyId::Poisson, FamilyId::Geometric) => kl_poisson_geometric(p, q),
        _ if p.family.nesting_group().is_some() && p.family.nesting_group() == q.family.nesting_group() => {
            kl_nested(p, q)
        }
        _ => Err(Error::UnsupportedPair(p.source.to_string(), q.source.to_string())),
    }
}

/// Alias of [`kl_cross_family`].
pub fn kl(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue> {
    kl_cross_family(p, q)
}

/// Skewed Bhattacharyya distance `−log ∫ p^α q^{1−α}` in closed form.
///
/// Same family: the Jensen divergence `J_{F,α}(θ_p : θ_q)`. Nested families:
/// the duo Jensen divergence with the smaller family's log-normalizer at `θ_p`
/// and at the mixture (roles and `α` swap when `q` is the truncated one).
/// Truncated normals with overlapping windows use the intersection window's
/// log-normalizer at the mixture.
pub fn bhattacharyya(p: &ExpFamilyMember, q: &ExpFamilyMember, alpha: f64) -> Result<DivergenceValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Alpha(alpha));
    }
    if same_family(p, q) {
        return jensen(p.log_normalizer(), p.natural(), q.natural(), alpha);
    }
    let group = p.family.nesting_group();
    if group.is_none() || group != q.family.nesting_group() {
        return Err(Error::UnsupportedPair(p.source.to_string(), q.source.to_string()));
    }
    if group == Some(NestingGroup::AbsoluteValue) {
        return if p.support().is_subset_of(&q.support()) {
            DuoPair::unchecked(q.log_normalizer(), p.log_normalizer()).duo_jensen(p.natural(), q.natural(), alpha)
        } else {
            DuoPair::unchecked(p.log_normalizer(), q.log_normalizer()).duo_jensen(q.natural(), p.natural(), 1.0 - alpha)
        };
    }

    let (tp, tq) = gaussian_pair(p, q);
    let (fp, fq) = (
        TruncNormalLogNormalizer::new(tp.a, tp.b)?,
        TruncNormalLogNormalizer::new(tq.a, tq.b)?,
    );
    let (thp, thq) = (tp.natural(), tq.natural());
    if tp.window_within(&tq) {
        return DuoPair::unchecked(&fq, &fp).duo_jensen(&thp, &thq, alpha);
    }
    if tq.window_within(&tp) {
        return DuoPair::unchecked(&fp, &fq).duo_jensen(&thq, &thp, 1.0 - alpha);
    }
    let (lo, hi) = (tp.a.max(tq.a), tp.b.min(tq.b));
    if lo >= hi {
        return Ok(DivergenceValue::infinite(Method::ClosedForm));
    }
    let common = TruncNormalLogNormalizer::new(lo, hi)?;
    let m: Vec<f64> = thp
        .iter()
        .zip(&thq)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect();
    DivergenceValue::closed_form(alpha * fp.eval(&thp) + (1.0 - alpha) * fq.eval(&thq) - common.eval(&m))
}

/// Entropy `−F*(η) − E[k(x)]` (differential for continuous families).
pub fn entropy(member: &ExpFamilyMember) -> Result<Estimate> {
    let exact = |value: f64| Estimate { value, abs_error: 0.0 };
    Ok(match member.source {
        SourceParams::Poisson { lambda } => {
            let log_fact = poisson_expected_log_factorial(lambda)?;
            Estimate {
                value: lambda * (1.0 - lambda.ln()) + log_fact.value,
                abs_error: log_fact.abs_error,
            }
        }
        SourceParams::Geometric { p } => exact((-(1.0 - p) * (-p).ln_1p() - p * p.ln()) / p),
        SourceParams::Exponential { .. } | SourceParams::Laplacian { .. } | SourceParams::HalfNormal { .. } => {
            // k = 0, so the entropy is −F*(η)
            exact(-legendre_conjugate(member.log_normalizer(), &member.moment())?)
        }
        SourceParams::Normal { .. } | SourceParams::TruncNormal(_) => exact(truncnorm::trunc_entropy(
            &member.source.as_trunc_normal().expect("gaussian"),
        )?),
    })
}
