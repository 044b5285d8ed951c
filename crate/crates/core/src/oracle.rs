//! Numerical ground truth computed directly from densities.
//!
//! Nothing here calls the closed-form modules: densities are only evaluated
//! pointwise through the [`Density`] trait. Continuous integrals use globally
//! adaptive 15-point Gauss-Kronrod quadrature; half-lines are mapped onto
//! `[0, 1)` by `x = c ± s·u/(1 − u)` after splitting at the density's center.
//! Discrete expectations are summed until a geometric tail estimate falls
//! below `series_tail_tol`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::divergences::{DivergenceValue, Method};
use crate::error::{Error, Result};

/// Support of a distribution together with its base measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `{0, 1, 2, ...}` under the counting measure.
    Counting,
    /// Open interval `(lo, hi)` under the Lebesgue measure.
    Interval { lo: f64, hi: f64 },
}

impl Support {
    pub fn real_line() -> Self {
        Support::Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Support::Counting)
    }

    /// `self ⊆ other`. Supports under different base measures are never nested.
    pub fn is_subset_of(&self, other: &Support) -> bool {
        match (self, other) {
            (Support::Counting, Support::Counting) => true,
            (Support::Interval { lo: a, hi: b }, Support::Interval { lo: c, hi: d }) => c <= a && b <= d,
            _ => false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Counting => x >= 0.0 && x.fract() == 0.0 && x.is_finite(),
            Support::Interval { lo, hi } => x > lo && x < hi,
        }
    }

    fn intersect(&self, other: &Support) -> Option<Support> {
        match (*self, *other) {
            (Support::Counting, Support::Counting) => Some(Support::Counting),
            (Support::Interval { lo: a, hi: b }, Support::Interval { lo: c, hi: d }) => {
                let (lo, hi) = (a.max(c), b.min(d));
                (lo < hi).then_some(Support::Interval { lo, hi })
            }
            _ => None,
        }
    }
}

/// A probability density (or mass function) evaluable pointwise.
pub trait Density: Sync {
    fn support(&self) -> Support;

    /// Log-density; `−∞` outside the support.
    fn ln_pdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Location where the mass concentrates (split point for quadrature).
    fn center(&self) -> f64 {
        0.0
    }

    /// Typical spread around [`Density::center`].
    fn scale(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OracleConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub series_tail_tol: f64,
    pub fd_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            series_tail_tol: 1e-14,
            fd_step: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.abs_tol, self.rel_tol, self.series_tail_tol, self.fd_step]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive {
            return Err(Error::Param("oracle tolerances must be strictly positive".into()));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::Param("max_subdivisions must be at least 10".into()));
        }
        Ok(())
    }
}

/// Numerical value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

// -----------------------------------------------------------------------------
// Gauss-Kronrod 7/15
// -----------------------------------------------------------------------------

// nodes and weights are quoted to full published precision

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    piece: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.piece.cmp(&self.piece))
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kronrod.abs();
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let result = kronrod * half;
    let resabs = abs_k * half.abs();
    let resasc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Pairwise summation in a fixed order.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Integrates `f` over `(lo, hi)`; infinite ends are mapped onto `[0, 1)`
/// around `center` with length scale `scale`.
///
/// Returns [`Error::Tolerance`] (carrying the best value and its error
/// estimate) when the subdivision budget runs out before the tolerance is met.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    center: f64,
    scale: f64,
    cfg: &OracleConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Param(format!("empty integration range ({lo}, {hi})")));
    }
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let c = if center > lo && center < hi && center.is_finite() {
        Some(center)
    } else {
        None
    };

    // pieces: (map, u_lo, u_hi)
    let mut pieces: Vec<(Map, f64, f64)> = Vec::new();
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => pieces.push((Map::Identity, lo, hi)),
        (true, false) => match c {
            Some(c) => {
                pieces.push((Map::Identity, lo, c));
                pieces.push((Map::Right { c, s: scale }, 0.0, 1.0));
            }
            None => pieces.push((Map::Right { c: lo, s: scale }, 0.0, 1.0)),
        },
        (false, true) => match c {
            Some(c) => {
                pieces.push((Map::Left { c, s: scale }, 0.0, 1.0));
                pieces.push((Map::Identity, c, hi));
            }
            None => pieces.push((Map::Left { c: hi, s: scale }, 0.0, 1.0)),
        },
        (false, false) => {
            let c = c.unwrap_or(0.0);
            pieces.push((Map::Left { c, s: scale }, 0.0, 1.0));
            pieces.push((Map::Right { c, s: scale }, 0.0, 1.0));
        }
    }

    let mapped: Vec<Box<dyn Fn(f64) -> f64 + '_>> = pieces
        .iter()
        .map(|&(map, _, _)| -> Box<dyn Fn(f64) -> f64 + '_> { Box::new(move |u| map.eval(f, u)) })
        .collect();

    const INITIAL_SPLITS: usize = 8;
    let mut heap = BinaryHeap::new();
    for (piece, &(_, a, b)) in pieces.iter().enumerate() {
        let w = (b - a) / INITIAL_SPLITS as f64;
        for k in 0..INITIAL_SPLITS {
            let (sa, sb) = (
                a + k as f64 * w,
                if k + 1 == INITIAL_SPLITS {
                    b
                } else {
                    a + (k + 1) as f64 * w
                },
            );
            let (value, error) = gk15(&*mapped[piece], sa, sb);
            heap.push(Segment {
                piece,
                lo: sa,
                hi: sb,
                value,
                error,
            });
        }
    }

    let totals = |heap: &BinaryHeap<Segment>| -> (f64, f64) {
        let mut segs: Vec<Segment> = heap.iter().copied().collect();
        segs.sort_by(|a, b| a.piece.cmp(&b.piece).then(a.lo.total_cmp(&b.lo)));
        let values: Vec<f64> = segs.iter().map(|s| s.value).collect();
        let errors: Vec<f64> = segs.iter().map(|s| s.error).collect();
        (pairwise_sum(&values), pairwise_sum(&errors))
    };

    let mut subdivisions = heap.len();
    loop {
        let (value, error) = totals(&heap);
        if !value.is_finite() {
            return Err(Error::Domain(format!("integrand is not integrable (sum = {value})")));
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Estimate {
                value,
                abs_error: error,
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Tolerance {
                value,
                abs_error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval at floating-point resolution: keep it and stop refining
            heap.push(Segment { error: 0.0, ..worst });
            let (value, _) = totals(&heap);
            return Err(Error::Tolerance {
                value,
                abs_error_estimate: error,
            });
        }
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, error) = gk15(&*mapped[worst.piece], a, b);
            heap.push(Segment {
                piece: worst.piece,
                lo: a,
                hi: b,
                value,
                error,
            });
        }
        subdivisions += 1;
    }
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = c + s·u/(1−u)`
    Right {
        c: f64,
        s: f64,
    },
    /// `x = c − s·u/(1−u)`
    Left {
        c: f64,
        s: f64,
    },
}

impl Map {
    fn eval(self, f: &dyn Fn(f64) -> f64, u: f64) -> f64 {
        match self {
            Map::Identity => f(u),
            Map::Right { c, s } | Map::Left { c, s } => {
                let w = 1.0 - u;
                let jac = s / (w * w);
                let x = match self {
                    Map::Right { .. } => c + s * u / w,
                    _ => c - s * u / w,
                };
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx * jac
                }
            }
        }
    }
}

/// Sums `term(k)` for `k = 0, 1, ...`.
///
/// Stops once `k` is past `start + 10·spread` and the largest ratio
/// `|t_{k+1}/t_k|` seen over the last eight terms, `r`, bounds the remainder
/// as `|t_k|·r/(1 − r) < tail_tol`. The returned error is that bound.
pub fn sum_series(term: &dyn Fn(u64) -> f64, start: f64, spread: f64, cfg: &OracleConfig) -> Result<Estimate> {
    cfg.validate()?;
    const WINDOW: usize = 8;
    const MAX_TERMS: u64 = 50_000_000;
    let min_k = (start.max(0.0) + 10.0 * spread.max(1.0)).ceil() as u64 + WINDOW as u64;
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    let mut prev = f64::NAN;
    let mut ratios = [f64::INFINITY; WINDOW];
    let mut zeros = 0usize;
    for k in 0..MAX_TERMS {
        let t = term(k);
        if !t.is_finite() {
            return Err(Error::Domain(format!("series term {k} is {t}")));
        }
        // Neumaier summation
        let s = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;

        zeros = if t == 0.0 { zeros + 1 } else { 0 };
        if prev.is_finite() && prev != 0.0 {
            ratios[k as usize % WINDOW] = (t / prev).abs();
        } else if t == 0.0 && prev == 0.0 {
            ratios[k as usize % WINDOW] = 0.0;
        }
        prev = t;
        if k < min_k {
            continue;
        }
        if zeros > WINDOW {
            return Ok(Estimate {
                value: sum + comp,
                abs_error: 0.0,
            });
        }
        let r = ratios.iter().copied().fold(0.0_f64, f64::max);
        if r < 1.0 {
            let tail = t.abs() * r / (1.0 - r);
            if tail < cfg.series_tail_tol {
                return Ok(Estimate {
                    value: sum + comp,
                    abs_error: tail,
                });
            }
        }
    }
    Err(Error::Tolerance {
        value: sum + comp,
        abs_error_estimate: f64::INFINITY,
    })
}

/// `E_p[g(x)]` over the support of `p`.
pub fn expectation_numeric(p: &dyn Density, g: &dyn Fn(f64) -> f64, cfg: &OracleConfig) -> Result<Estimate> {
    let integrand = |x: f64| {
        let px = p.pdf(x);
        if px == 0.0 {
            0.0
        } else {
            px * g(x)
        }
    };
    match p.support() {
        Support::Counting => sum_series(&|k| integrand(k as f64), p.center(), p.scale(), cfg),
        Support::Interval { lo, hi } => integrate(&integrand, lo, hi, p.center(), p.scale(), cfg),
    }
}

/// `∫ p` (or `Σ p`); should be 1.
pub fn normalization_numeric(p: &dyn Density, cfg: &OracleConfig) -> Result<Estimate> {
    expectation_numeric(p, &|_| 1.0, cfg)
}

/// Differential (or Shannon) entropy `−E_p[log p]`.
pub fn entropy_numeric(p: &dyn Density, cfg: &OracleConfig) -> Result<Estimate> {
    let integrand = |x: f64| {
        let lp = p.ln_pdf(x);
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            -lp.exp() * lp
        }
    };
    match p.support() {
        Support::Counting => sum_series(&|k| integrand(k as f64), p.center(), p.scale(), cfg),
        Support::Interval { lo, hi } => integrate(&integrand, lo, hi, p.center(), p.scale(), cfg),
    }
}

fn mixed_measures() -> Error {
    Error::Param("densities use different base measures".into())
}

/// `D_KL[p:q] = ∫ p log(p/q)`, or the `+∞` sentinel when `p ≪ q` fails.
pub fn kl_numeric(p: &dyn Density, q: &dyn Density, cfg: &OracleConfig) -> Result<DivergenceValue> {
    let (sp, sq) = (p.support(), q.support());
    if sp.is_discrete() != sq.is_discrete() {
        return Err(mixed_measures());
    }
    if !sp.is_subset_of(&sq) {
        return Ok(DivergenceValue::infinite(Method::Oracle));
    }
    let escaped = std::sync::atomic::AtomicBool::new(false);
    let integrand = |x: f64| {
        let lp = p.ln_pdf(x);
        if lp == f64::NEG_INFINITY {
            return 0.0;
        }
        let lq = q.ln_pdf(x);
        if lq == f64::NEG_INFINITY {
            escaped.store(true, std::sync::atomic::Ordering::Relaxed);
            return 0.0;
        }
        lp.exp() * (lp - lq)
    };
    let est = match sp {
        Support::Counting => sum_series(&|k| integrand(k as f64), p.center(), p.scale(), cfg),
        Support::Interval { lo, hi } => integrate(&integrand, lo, hi, p.center(), p.scale(), cfg),
    };
    if escaped.load(std::sync::atomic::Ordering::Relaxed) {
        return Ok(DivergenceValue::infinite(Method::Oracle));
    }
    let est = est?;
    DivergenceValue::oracle(est.value, est.abs_error)
}

/// Skewed affinity `I_α[p:q] = ∫ p^α q^{1−α}`.
pub fn affinity_numeric(p: &dyn Density, q: &dyn Density, alpha: f64, cfg: &OracleConfig) -> Result<Estimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Alpha(alpha));
    }
    let (sp, sq) = (p.support(), q.support());
    if sp.is_discrete() != sq.is_discrete() {
        return Err(mixed_measures());
    }
    let Some(common) = sp.intersect(&sq) else {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
        });
    };
    let integrand = |x: f64| {
        let (lp, lq) = (p.ln_pdf(x), q.ln_pdf(x));
        if lp == f64::NEG_INFINITY || lq == f64::NEG_INFINITY {
            0.0
        } else {
            (alpha * lp + (1.0 - alpha) * lq).exp()
        }
    };
    let center = alpha * p.center() + (1.0 - alpha) * q.center();
    let scale = p.scale().min(q.scale());
    match common {
        Support::Counting => sum_series(&|k| integrand(k as f64), center, p.scale().max(q.scale()), cfg),
        Support::Interval { lo, hi } => integrate(&integrand, lo, hi, center, scale, cfg),
    }
}

/// `D_Bhat,α[p:q] = −log I_α[p:q]`.
pub fn bhattacharyya_numeric(
    p: &dyn Density,
    q: &dyn Density,
    alpha: f64,
    cfg: &OracleConfig,
) -> Result<DivergenceValue> {
    let affinity = affinity_numeric(p, q, alpha, cfg)?;
    if affinity.value <= 0.0 {
        return Ok(DivergenceValue::infinite(Method::Oracle));
    }
    DivergenceValue::oracle(-affinity.value.ln(), affinity.abs_error / affinity.value)
}

/// Central-difference gradient with one Richardson step (`h` and `h/2`).
///
/// `margin` is the distance from `theta` to the domain boundary per
/// coordinate; it must be at least `2·fd_step`.
pub fn finite_diff_grad(
    f: &dyn Fn(&[f64]) -> f64,
    theta: &[f64],
    margin: &[f64],
    cfg: &OracleConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let mut grad = Vec::with_capacity(theta.len());
    let mut err = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let h = cfg.fd_step * theta[i].abs().max(1.0);
        if margin[i] < 2.0 * h {
            return Err(Error::Domain(format!(
                "θ[{i}] = {} is within {} of the domain boundary",
                theta[i], margin[i]
            )));
        }
        let central = |h: f64| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        };
        let (d1, d2) = (central(h), central(0.5 * h));
        let extrapolated = (4.0 * d2 - d1) / 3.0;
        grad.push(extrapolated);
        err.push((extrapolated - d2).abs());
    }
    Ok((grad, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct StdNormal;
    impl Density for StdNormal {
        fn support(&self) -> Support {
            Support::real_line()
        }
        fn ln_pdf(&self, x: f64) -> f64 {
            -0.5 * x * x - 0.5 * (2.0 * PI).ln()
        }
    }

    struct Geometric(f64);
    impl Density for Geometric {
        fn support(&self) -> Support {
            Support::Counting
        }
        fn ln_pdf(&self, x: f64) -> f64 {
            x * (1.0 - self.0).ln() + self.0.ln()
        }
        fn scale(&self) -> f64 {
            1.0 / self.0
        }
    }

    #[test]
    fn gaussian_integral() {
        let cfg = OracleConfig::default();
        let est = integrate(
            &|x: f64| (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            0.0,
            1.0,
            &cfg,
        )
        .unwrap();
        assert!((est.value - PI.sqrt()).abs() < 1e-12, "{est:?}");
        let half = integrate(&|x: f64| (-x).exp(), 0.0, f64::INFINITY, 0.0, 1.0, &cfg).unwrap();
        assert!((half.value - 1.0).abs() < 1e-12);
        let left = integrate(&|x: f64| x.exp(), f64::NEG_INFINITY, 2.0, 0.0, 1.0, &cfg).unwrap();
        assert!((left.value - 2f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_tolerance_error() {
        let cfg = OracleConfig {
            max_subdivisions: 20,
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            ..OracleConfig::default()
        };
        let err = integrate(&|x: f64| x.abs().sqrt().recip(), -1.0, 1.0, 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Tolerance { .. }));
    }

    #[test]
    fn series_of_geometric_pmf() {
        let cfg = OracleConfig::default();
        let g = Geometric(0.3);
        let total = normalization_numeric(&g, &cfg).unwrap();
        assert!((total.value - 1.0).abs() < 1e-13);
        let mean = expectation_numeric(&g, &|x| x, &cfg).unwrap();
        assert!((mean.value - (1.0 / 0.3 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn kl_identity_and_escape() {
        let cfg = OracleConfig::default();
        let kl = kl_numeric(&StdNormal, &StdNormal, &cfg).unwrap();
        assert!(kl.unwrap_finite().abs() <= cfg.abs_tol);

        struct Positive;
        impl Density for Positive {
            fn support(&self) -> Support {
                Support::Interval {
                    lo: 0.0,
                    hi: f64::INFINITY,
                }
            }
            fn ln_pdf(&self, x: f64) -> f64 {
                if x > 0.0 {
                    -x
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
        assert!(kl_numeric(&StdNormal, &Positive, &cfg).unwrap().is_infinite());
        assert!(matches!(
            kl_numeric(&StdNormal, &Geometric(0.5), &cfg),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn bhattacharyya_swap_identity() {
        struct Shifted(f64);
        impl Density for Shifted {
            fn support(&self) -> Support {
                Support::real_line()
            }
            fn ln_pdf(&self, x: f64) -> f64 {
                StdNormal.ln_pdf(x - self.0)
            }
            fn center(&self) -> f64 {
                self.0
            }
        }
        let cfg = OracleConfig::default();
        let (p, q) = (StdNormal, Shifted(1.0));
        let d = bhattacharyya_numeric(&p, &q, 0.5, &cfg).unwrap().unwrap_finite();
        assert!((d - 0.125).abs() < 1e-9);
        let a = bhattacharyya_numeric(&p, &q, 0.3, &cfg).unwrap().unwrap_finite();
        let b = bhattacharyya_numeric(&q, &p, 0.7, &cfg).unwrap().unwrap_finite();
        assert!((a - b).abs() < 1e-9);
        assert!(matches!(bhattacharyya_numeric(&p, &q, 1.0, &cfg), Err(Error::Alpha(_))));
    }

    #[test]
    fn finite_differences() {
        let cfg = OracleConfig::default();
        let (g, _) = finite_diff_grad(&|t| 0.5 * t[0] * t[0], &[3.0], &[f64::INFINITY], &cfg).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-8);
        let (g, _) = finite_diff_grad(&|t| t[0].exp(), &[0.0], &[f64::INFINITY], &cfg).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8);
        let near = finite_diff_grad(&|t| t[0].ln(), &[1e-6], &[1e-6], &cfg);
        assert!(matches!(near, Err(Error::Domain(_))));
    }

    #[test]
    fn config_validation() {
        let bad = OracleConfig {
            max_subdivisions: 5,
            ..OracleConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = OracleConfig {
            abs_tol: 0.0,
            ..OracleConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
