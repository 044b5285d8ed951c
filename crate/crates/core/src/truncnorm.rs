//! Truncated normal distributions `N_{a,b}(m, s)` as an exponential family.
//!
//! The density on `(a, b)` is `exp(−(x − m)²/(2s²)) / Z_{a,b}(m, s)` with
//!
//! ```text
//! Z_{a,b}(m, s) = √(2π)·s·(Φ(β) − Φ(α)),   α = (a − m)/s,  β = (b − m)/s.
//! ```
//!
//! With sufficient statistic `t(x) = (x, x²)` and natural parameter
//! `θ = (m/s², −1/(2s²))` the log-normalizer is
//! `F_{a,b}(θ) = −θ1²/(4θ2) + log Z_{a,b}(θ)` on `ℝ × ℝ₋₋`, and
//! `∇F_{a,b}(θ) = (E[x], E[x²])`.
//!
//! `m` and `s` are location and scale, not the mean and standard deviation
//! once the support is truncated. Infinite bounds are exact: `φ(±∞) = 0` and
//! `(±∞)·φ(±∞) = 0`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;

use crate::divergences::{DivergenceValue, DuoPair, Method};
use crate::error::{Error, Result};
use crate::generators::{BoxDomain, ConjugateMode, ConvexGenerator, Interval};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 − erf(x)`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density `φ(x)`; exactly 0 at `±∞`.
pub fn std_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x - LN_SQRT_2PI).exp()
    }
}

/// Standard normal CDF `Φ(x) = ½(1 + erf(x/√2))`.
pub fn std_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

/// `Φ(β) − Φ(α)` for `α < β`, using `erfc` when both bounds lie on the same
/// side of zero so that far-tail windows do not cancel.
pub fn std_cdf_diff(alpha: f64, beta: f64) -> f64 {
    if alpha >= 0.0 {
        0.5 * (erfc(alpha * FRAC_1_SQRT_2) - erfc(beta * FRAC_1_SQRT_2))
    } else if beta <= 0.0 {
        0.5 * (erfc(-beta * FRAC_1_SQRT_2) - erfc(-alpha * FRAC_1_SQRT_2))
    } else {
        0.5 * (erf(beta * FRAC_1_SQRT_2) - erf(alpha * FRAC_1_SQRT_2))
    }
}

/// `x·φ(x)` with the limit 0 at `±∞`.
fn x_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x * std_pdf(x)
    }
}

/// Location `m`, scale `s` and truncation window `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TruncNormalParams {
    pub m: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
}

impl TruncNormalParams {
    pub fn new(m: f64, s: f64, a: f64, b: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Param(format!("location m = {m} must be finite")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Param(format!("scale s = {s} must be positive")));
        }
        if a.is_nan() || b.is_nan() || a >= b || a == f64::INFINITY || b == f64::NEG_INFINITY {
            return Err(Error::Param(format!("truncation window ({a}, {b}) is empty")));
        }
        Ok(Self { m, s, a, b })
    }

    /// Untruncated normal `N(m, s²)`.
    pub fn normal(m: f64, s: f64) -> Result<Self> {
        Self::new(m, s, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Half-normal with scale `σ`, i.e. `N(0, σ²)` truncated to `(0, ∞)`.
    pub fn half_normal(sigma: f64) -> Result<Self> {
        Self::new(0.0, sigma, 0.0, f64::INFINITY)
    }

    /// Parameters from `θ = (m/s², −1/(2s²))` on the window `(a, b)`.
    pub fn from_natural(theta: &[f64], a: f64, b: f64) -> Result<Self> {
        if theta.len() != 2 || theta[1].is_nan() || theta[1] >= 0.0 {
            return Err(Error::Domain(format!("θ = {theta:?} outside ℝ × ℝ₋₋")));
        }
        let s2 = -0.5 / theta[1];
        Self::new(theta[0] * s2, s2.sqrt(), a, b)
    }

    pub fn natural(&self) -> [f64; 2] {
        let s2 = self.s * self.s;
        [self.m / s2, -0.5 / s2]
    }

    pub fn alpha_std(&self) -> f64 {
        (self.a - self.m) / self.s
    }

    pub fn beta_std(&self) -> f64 {
        (self.b - self.m) / self.s
    }

    pub fn is_untruncated(&self) -> bool {
        self.a == f64::NEG_INFINITY && self.b == f64::INFINITY
    }

    /// `[a1, b1] ⊆ [a2, b2]`.
    pub fn window_within(&self, other: &TruncNormalParams) -> bool {
        other.a <= self.a && self.b <= other.b
    }

    fn mass(&self) -> Result<f64> {
        let mass = std_cdf_diff(self.alpha_std(), self.beta_std());
        if mass > 0.0 && mass.is_finite() {
            Ok(mass)
        } else {
            Err(Error::Degenerate(format!(
                "Φ(β) − Φ(α) underflows for window ({}, {}) with m = {}, s = {}",
                self.a, self.b, self.m, self.s
            )))
        }
    }

    /// Density at `x` (zero outside the window).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > self.a && x < self.b) {
            return Ok(0.0);
        }
        Ok(std_pdf((x - self.m) / self.s) / (self.s * self.mass()?))
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x > self.a && x < self.b) {
            return Ok(f64::NEG_INFINITY);
        }
        let z = (x - self.m) / self.s;
        Ok(-0.5 * z * z - LN_SQRT_2PI - self.s.ln() - self.mass()?.ln())
    }
}

/// `Z_{a,b}(m, s) = √(2π)·s·(Φ(β) − Φ(α))`.
pub fn partition(p: &TruncNormalParams) -> Result<f64> {
    Ok((2.0 * PI).sqrt() * p.s * p.mass()?)
}

/// `log Z_{a,b}(m, s)`.
pub fn log_partition(p: &TruncNormalParams) -> Result<f64> {
    Ok(LN_SQRT_2PI + p.s.ln() + p.mass()?.ln())
}

/// Mean and variance of the truncated normal.
pub fn trunc_moments(p: &TruncNormalParams) -> Result<(f64, f64)> {
    let (alpha, beta) = (p.alpha_std(), p.beta_std());
    let mass = p.mass()?;
    let ratio = (std_pdf(beta) - std_pdf(alpha)) / mass;
    let tilt = (x_pdf(beta) - x_pdf(alpha)) / mass;
    let mean = p.m - p.s * ratio;
    let var = p.s * p.s * (1.0 - tilt - ratio * ratio);
    if var.is_nan() || var <= 0.0 {
        return Err(Error::Degenerate(format!("non-positive variance {var} for {p:?}")));
    }
    Ok((mean, var))
}

/// Moment parameter `η = (E[x], E[x²])`.
pub fn moment_params(p: &TruncNormalParams) -> Result<[f64; 2]> {
    let (mean, var) = trunc_moments(p)?;
    Ok([mean, var + mean * mean])
}

/// `F_{a,b}` in source parameters: `m²/(2s²) + ½ log(2πs²) + log(Φ(β) − Φ(α))`.
pub fn log_normalizer_source(p: &TruncNormalParams) -> Result<f64> {
    Ok(p.m * p.m / (2.0 * p.s * p.s) + log_partition(p)?)
}

/// Differential entropy
/// `log(√(2πe)·s·(Φ(β) − Φ(α))) + (αφ(α) − βφ(β)) / (2(Φ(β) − Φ(α)))`.
pub fn trunc_entropy(p: &TruncNormalParams) -> Result<f64> {
    let (alpha, beta) = (p.alpha_std(), p.beta_std());
    let mass = p.mass()?;
    Ok(LN_SQRT_2PI + 0.5 + p.s.ln() + mass.ln() + (x_pdf(alpha) - x_pdf(beta)) / (2.0 * mass))
}

/// `D_KL[p1 : p2]` as the duo Bregman divergence `B_{F_{a2,b2}, F_{a1,b1}}(θ2 : θ1)`.
///
/// Returns the `+∞` sentinel unless `[a1, b1] ⊆ [a2, b2]`.
pub fn kl_trunc_normal(p1: &TruncNormalParams, p2: &TruncNormalParams) -> Result<DivergenceValue> {
    if !p1.window_within(p2) {
        return Ok(DivergenceValue::infinite(Method::ClosedForm));
    }
    let inner = TruncNormalLogNormalizer::new(p1.a, p1.b)?;
    let outer = TruncNormalLogNormalizer::new(p2.a, p2.b)?;
    // nesting of the windows guarantees F_{a2,b2} ≥ F_{a1,b1}
    let pair = DuoPair::unchecked(&outer, &inner);
    pair.duo_bregman(&p2.natural(), &p1.natural())
}

/// Log-normalizer `F_{a,b}` of the truncated normal family as a generator on
/// `θ ∈ ℝ × ℝ₋₋`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncNormalLogNormalizer {
    a: f64,
    b: f64,
    domain: BoxDomain,
}

impl TruncNormalLogNormalizer {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        // validates the window
        TruncNormalParams::new(0.0, 1.0, a, b)?;
        Ok(Self {
            a,
            b,
            domain: BoxDomain::new(vec![Interval::REAL_LINE, Interval::NEGATIVE]),
        })
    }

    pub fn untruncated() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY).expect("real line is a valid window")
    }

    pub fn window(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn params(&self, theta: &[f64]) -> Result<TruncNormalParams> {
        TruncNormalParams::from_natural(theta, self.a, self.b)
    }

    fn untruncated_natural(eta: &[f64]) -> Option<[f64; 2]> {
        let var = eta[1] - eta[0] * eta[0];
        (var > 0.0 && var.is_finite()).then(|| [eta[0] / var, -0.5 / var])
    }
}

impl ConvexGenerator for TruncNormalLogNormalizer {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn eval(&self, theta: &[f64]) -> f64 {
        self.params(theta)
            .and_then(|p| log_normalizer_source(&p))
            .unwrap_or(f64::NAN)
    }

    fn grad(&self, theta: &[f64]) -> Vec<f64> {
        self.params(theta)
            .and_then(|p| moment_params(&p))
            .map(|eta| eta.to_vec())
            .unwrap_or_else(|_| vec![f64::NAN; 2])
    }

    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        if self.a == f64::NEG_INFINITY && self.b == f64::INFINITY {
            // covariance of (x, x²) under N(m, s²)
            if let Ok(p) = self.params(theta) {
                let (m, v) = (p.m, p.s * p.s);
                let c12 = 2.0 * m * v;
                let c22 = 2.0 * v * v + 4.0 * m * m * v;
                return DMatrix::from_row_slice(2, 2, &[v, c12, c12, c22]);
            }
        }
        fd_hessian_scaled(self, theta)
    }

    fn is_separable(&self) -> bool {
        false
    }

    fn conjugate_mode(&self) -> ConjugateMode {
        if self.a == f64::NEG_INFINITY && self.b == f64::INFINITY {
            ConjugateMode::ClosedForm
        } else {
            ConjugateMode::Numeric
        }
    }

    fn closed_conjugate(&self, eta: &[f64]) -> Option<Result<f64>> {
        if self.conjugate_mode() == ConjugateMode::Numeric {
            return None;
        }
        // negative differential entropy of N(η1, η2 − η1²)
        Some(match Self::untruncated_natural(eta) {
            Some(_) => {
                let var = eta[1] - eta[0] * eta[0];
                Ok(-0.5 * (2.0 * PI * std::f64::consts::E * var).ln())
            }
            None => Err(Error::Domain(format!("η = {eta:?} needs η2 > η1²"))),
        })
    }

    fn closed_grad_inverse(&self, eta: &[f64]) -> Option<Result<Vec<f64>>> {
        if self.conjugate_mode() == ConjugateMode::Numeric {
            return None;
        }
        Some(
            Self::untruncated_natural(eta)
                .map(|t| t.to_vec())
                .ok_or_else(|| Error::Domain(format!("η = {eta:?} needs η2 > η1²"))),
        )
    }

    fn gradient_range_contains(&self, eta: &[f64]) -> Option<bool> {
        let var = eta[1] - eta[0] * eta[0];
        let mut ok = eta[0] > self.a && eta[0] < self.b && var > 0.0;
        if self.a.is_finite() && self.b.is_finite() {
            // variance on a bounded window is below (b − a)²/4
            ok &= var < 0.25 * (self.b - self.a).powi(2);
        }
        Some(ok)
    }

    fn solver_seed(&self, eta: &[f64]) -> Vec<f64> {
        Self::untruncated_natural(eta)
            .map(|t| t.to_vec())
            .unwrap_or_else(|| vec![0.0, -0.5])
    }

    fn sampling_box(&self, clip: f64) -> Vec<(f64, f64)> {
        // keeps Φ(β) − Φ(α) clear of underflow for windows near the origin
        let c = clip.min(5.0);
        vec![(-c, c), (-c, -0.05)]
    }

    fn label(&self) -> String {
        format!("truncnormal(a={},b={})", self.a, self.b)
    }
}

/// Central differences of the analytic gradient with a step proportional to
/// each coordinate.
fn fd_hessian_scaled(f: &TruncNormalLogNormalizer, theta: &[f64]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(2, 2);
    for j in 0..2 {
        let mut step = 1e-5 * theta[j].abs().max(1e-3);
        if j == 1 {
            step = step.min(0.5 * -theta[1]);
        }
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[j] += step;
        minus[j] -= step;
        let (gp, gm) = (f.grad(&plus), f.grad(&minus));
        for i in 0..2 {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    (&h + h.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gradient_inverse, legendre_conjugate, legendre_conjugate_numeric, SolverConfig};

    #[test]
    fn erf_reference_values() {
        // 40-digit references
        let table = [
            (0.0, 0.0),
            (1e-8, 1.128_379_167_095_512_5e-8),
            (0.5, 0.520_499_877_813_046_5),
            (1.0, 0.842_700_792_949_714_9),
            (2.0, 0.995_322_265_018_952_7),
            (3.5, 0.999_999_256_901_627_7),
        ];
        for (x, e) in table {
            let got = erf(x);
            let rel = if e == 0.0 { got.abs() } else { ((got - e) / e).abs() };
            assert!(rel <= 1e-13, "erf({x}) = {got}, expected {e}");
            assert_eq!(erf(-x), -got);
        }
    }

    #[test]
    fn partition_examples() {
        let std = TruncNormalParams::normal(0.0, 1.0).unwrap();
        assert!((partition(&std).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-15);
        let half = TruncNormalParams::half_normal(1.0).unwrap();
        assert!((partition(&half).unwrap() - 1.253_314_137_315_500_3).abs() < 1e-15);
        let window = TruncNormalParams::new(1.0, 2.0, 0.0, 3.0).unwrap();
        assert!((partition(&window).unwrap() - 2.671_099_221_704_066).abs() < 1e-14);
    }

    #[test]
    fn degenerate_window() {
        let far = TruncNormalParams::new(0.0, 1.0, 60.0, 61.0).unwrap();
        assert!(matches!(partition(&far), Err(Error::Degenerate(_))));
        assert!(matches!(trunc_moments(&far), Err(Error::Degenerate(_))));
    }

    #[test]
    fn tail_window_is_stable() {
        // naive Φ(β) − Φ(α) is exactly 0 here
        let p = TruncNormalParams::new(0.0, 1.0, 9.0, 10.0).unwrap();
        assert_eq!(std_cdf(10.0) - std_cdf(9.0), 0.0);
        let (mean, var) = trunc_moments(&p).unwrap();
        assert!(mean > 9.0 && mean < 9.2, "{mean}");
        assert!(var > 0.0 && var < 0.02, "{var}");
    }

    #[test]
    fn moments_of_standard_and_half_normal() {
        let (mu, var) = trunc_moments(&TruncNormalParams::normal(0.0, 1.0).unwrap()).unwrap();
        assert_eq!((mu, var), (0.0, 1.0));
        let (mu, var) = trunc_moments(&TruncNormalParams::half_normal(1.0).unwrap()).unwrap();
        assert!((mu - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((var - (1.0 - 2.0 / PI)).abs() < 1e-15);
    }

    #[test]
    fn log_normalizer_standard_normal() {
        let f = TruncNormalLogNormalizer::untruncated();
        let theta = TruncNormalParams::normal(0.0, 1.0).unwrap().natural();
        assert!((f.eval(&theta) - 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        assert_eq!(f.grad(&theta), vec![0.0, 1.0]);
    }

    #[test]
    fn natural_and_source_forms_agree() {
        let f = TruncNormalLogNormalizer::new(-1.0, 2.5).unwrap();
        let p = TruncNormalParams::new(0.4, 1.3, -1.0, 2.5).unwrap();
        let theta = p.natural();
        let natural_form = -theta[0] * theta[0] / (4.0 * theta[1]) + log_partition(&p).unwrap();
        assert!((f.eval(&theta) - natural_form).abs() < 1e-14);
        assert!((f.eval(&theta) - log_normalizer_source(&p).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let h = trunc_entropy(&TruncNormalParams::normal(0.0, 1.0).unwrap()).unwrap();
        assert!((h - 1.418_938_533_204_672_7).abs() < 1e-15);
        let h = trunc_entropy(&TruncNormalParams::normal(3.0, 2.5).unwrap()).unwrap();
        assert!((h - (1.418_938_533_204_672_7 + 2.5f64.ln())).abs() < 1e-14);
        let h = trunc_entropy(&TruncNormalParams::half_normal(1.0).unwrap()).unwrap();
        assert!((h - 0.725_791_352_644_727_4).abs() < 1e-15);
    }

    #[test]
    fn entropy_is_negative_conjugate() {
        let p = TruncNormalParams::new(0.7, 0.9, -0.5, 2.0).unwrap();
        let f = TruncNormalLogNormalizer::new(p.a, p.b).unwrap();
        let theta = p.natural();
        let eta = moment_params(&p).unwrap();
        let via_conjugate = f.eval(&theta) - theta[0] * eta[0] - theta[1] * eta[1];
        assert!((trunc_entropy(&p).unwrap() - via_conjugate).abs() < 1e-12);
        let numeric = legendre_conjugate(&f, &eta).unwrap();
        assert!((numeric + trunc_entropy(&p).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn kl_examples() {
        let half = TruncNormalParams::half_normal(1.0).unwrap();
        let std = TruncNormalParams::normal(0.0, 1.0).unwrap();
        let kl = kl_trunc_normal(&half, &std).unwrap().unwrap_finite();
        assert!((kl - 2f64.ln()).abs() < 1e-14);
        assert_eq!(kl_trunc_normal(&half, &half).unwrap().unwrap_finite(), 0.0);
        let wide = TruncNormalParams::normal(1.0, 2.0).unwrap();
        let kl = kl_trunc_normal(&std, &wide).unwrap().unwrap_finite();
        assert!((kl - 0.443_147_180_559_945_3).abs() < 1e-15);
        assert!(kl_trunc_normal(&std, &half).unwrap().is_infinite());
    }

    #[test]
    fn kl_matches_expanded_source_form() {
        // m²/(2s²) terms, log ratios of scales and masses, then the moment terms
        let p1 = TruncNormalParams::new(0.4, 0.8, -1.0, 2.0).unwrap();
        let p2 = TruncNormalParams::new(-0.2, 1.5, -3.0, f64::INFINITY).unwrap();
        let (mu, var) = trunc_moments(&p1).unwrap();
        let (s1, s2) = (p1.s * p1.s, p2.s * p2.s);
        let expanded = p2.m * p2.m / (2.0 * s2) - p1.m * p1.m / (2.0 * s1)
            + (p2.s / p1.s).ln()
            + (p2.mass().unwrap() / p1.mass().unwrap()).ln()
            - (p2.m / s2 - p1.m / s1) * mu
            + (1.0 / (2.0 * s2) - 1.0 / (2.0 * s1)) * (var + mu * mu);
        let kl = kl_trunc_normal(&p1, &p2).unwrap().unwrap_finite();
        assert!((kl - expanded).abs() < 1e-12, "{kl} vs {expanded}");
    }

    #[test]
    fn untruncated_conjugate_matches_solver() {
        let f = TruncNormalLogNormalizer::untruncated();
        let eta = [0.3, 2.0];
        let closed = legendre_conjugate(&f, &eta).unwrap();
        let numeric = legendre_conjugate_numeric(&f, &eta, &SolverConfig::default()).unwrap();
        assert!((closed - numeric).abs() < 1e-10);
    }

    #[test]
    fn truncated_gradient_inversion() {
        let p = TruncNormalParams::new(-0.3, 1.7, 0.0, 3.0).unwrap();
        let f = TruncNormalLogNormalizer::new(p.a, p.b).unwrap();
        let eta = moment_params(&p).unwrap();
        let theta = gradient_inverse(&f, &eta).unwrap();
        let expected = p.natural();
        assert!(
            (theta[0] - expected[0]).abs() < 1e-8 && (theta[1] - expected[1]).abs() < 1e-8,
            "{theta:?} vs {expected:?}"
        );
        // mean outside the window is not a moment of this family
        assert!(matches!(gradient_inverse(&f, &[4.0, 17.0]), Err(Error::Domain(_))));
    }
}
