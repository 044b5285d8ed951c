//! Sided centroids of the duo Bregman divergence `B_{F1,F2}` with `F1 ≥ F2`.
//!
//! | Side | Objective | Minimizer |
//! |------|-----------|-----------|
//! | right | `(1/n) Σ B_{F1,F2}(θ_i : θ)` | `(1/n) Σ θ_i` |
//! | left | `(1/n) Σ B_{F1,F2}(θ : θ_i)` | `(∇F1)⁻¹((1/n) Σ ∇F2(θ_i))` |
//!
//! The right centroid does not depend on the generators. With `F1 = F2 = F`
//! separable, the left centroid is the quasi-arithmetic mean generated by
//! `∇F`. When `F1 ≠ F2` the averaged gradient may fall outside the range of
//! `∇F1`; this is reported as [`Error::Domain`] rather than projected.

use serde::Serialize;

use crate::divergences::DuoPair;
use crate::error::{Error, Result};
use crate::generators::{gradient_inverse, halton_points};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::Parse(format!("side must be left or right, got '{other}'"))),
        }
    }
}

/// Points `θ_1..θ_n` and a generator pair.
#[derive(Debug)]
pub struct CentroidProblem<'a> {
    pair: DuoPair<'a>,
    points: Vec<Vec<f64>>,
    side: Side,
}

impl<'a> CentroidProblem<'a> {
    pub fn new(pair: DuoPair<'a>, points: Vec<Vec<f64>>, side: Side) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Param("centroid of an empty point set".into()));
        }
        let domain = pair.shared_domain()?;
        for (i, p) in points.iter().enumerate() {
            if p.len() != domain.dim() {
                return Err(Error::Domain(format!(
                    "point {i} has dimension {}, expected {}",
                    p.len(),
                    domain.dim()
                )));
            }
            domain.require(p, "point")?;
        }
        Ok(Self { pair, points, side })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn pair(&self) -> &DuoPair<'a> {
        &self.pair
    }

    /// Centroid on the problem's side.
    pub fn solve(&self) -> Result<Vec<f64>> {
        match self.side {
            Side::Right => right_centroid(self),
            Side::Left => left_centroid(self),
        }
    }

    /// Averaged divergence with `theta` in the problem's argument slot.
    pub fn objective(&self, theta: &[f64]) -> Result<f64> {
        let n = self.points.len() as f64;
        let mut total = 0.0;
        for p in &self.points {
            let d = match self.side {
                Side::Right => self.pair.duo_bregman(p, theta)?,
                Side::Left => self.pair.duo_bregman(theta, p)?,
            };
            total += d.unwrap_finite();
        }
        Ok(total / n)
    }
}

fn require_side(prob: &CentroidProblem<'_>, side: Side) -> Result<()> {
    if prob.side == side {
        Ok(())
    } else {
        Err(Error::Param(format!("problem is posed for the {:?} side", prob.side)))
    }
}

fn mean(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len() as f64;
    let mut acc = vec![0.0; vectors[0].len()];
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    acc.iter().map(|a| a / n).collect()
}

/// Arithmetic mean of the points.
pub fn right_centroid(prob: &CentroidProblem<'_>) -> Result<Vec<f64>> {
    require_side(prob, Side::Right)?;
    Ok(mean(&prob.points))
}

/// `(∇F1)⁻¹` of the averaged `∇F2(θ_i)`.
pub fn left_centroid(prob: &CentroidProblem<'_>) -> Result<Vec<f64>> {
    require_side(prob, Side::Left)?;
    let grads: Vec<Vec<f64>> = prob.points.iter().map(|p| prob.pair.minor().grad(p)).collect();
    let eta_bar = mean(&grads);
    gradient_inverse(prob.pair.major(), &eta_bar)
}

/// Outcome of comparing a candidate centroid against perturbed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub perturbations: usize,
    pub violations: usize,
    pub objective: f64,
    pub smallest_gap: f64,
}

/// Evaluates the objective at `count` deterministic perturbations of
/// `candidate` and counts those that do not increase it. Perturbations are
/// Halton points in the box of half-width `radius` around `candidate`,
/// skipping points outside the domain and points closer than `radius/100`
/// (where the objective gap falls below rounding).
pub fn minimality_check(
    prob: &CentroidProblem<'_>,
    candidate: &[f64],
    radius: f64,
    count: usize,
) -> Result<MinimalityReport> {
    let domain = prob.pair.shared_domain()?;
    let objective = prob.objective(candidate)?;
    let bounds: Vec<(f64, f64)> = candidate.iter().map(|c| (c - radius, c + radius)).collect();
    let (mut tried, mut violations, mut smallest_gap) = (0, 0, f64::INFINITY);
    // oversample so that `count` in-domain points remain near boundaries
    for point in halton_points(&bounds, 20 * count) {
        if tried == count {
            break;
        }
        let offset = point
            .iter()
            .zip(candidate)
            .fold(0.0_f64, |m, (p, c)| m.max((p - c).abs()));
        if !domain.contains(&point) || offset < 0.01 * radius {
            continue;
        }
        tried += 1;
        let gap = prob.objective(&point)? - objective;
        smallest_gap = smallest_gap.min(gap);
        if gap <= 0.0 {
            violations += 1;
        }
    }
    Ok(MinimalityReport {
        perturbations: tried,
        violations,
        objective,
        smallest_gap,
    })
}

/// Spread of the points: largest coordinate range, or 1 for a single point.
pub fn point_spread(points: &[Vec<f64>]) -> f64 {
    let dim = points[0].len();
    let spread = (0..dim)
        .map(|j| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[j]), hi.max(p[j]))
            });
            hi - lo
        })
        .fold(0.0, f64::max);
    if spread > 0.0 {
        spread
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{Exponential, Quadratic};

    fn solve(pair: DuoPair<'_>, pts: &[f64], side: Side) -> Vec<f64> {
        let points = pts.iter().map(|p| vec![*p]).collect();
        CentroidProblem::new(pair, points, side).unwrap().solve().unwrap()
    }

    #[test]
    fn right_is_mean() {
        let f = Quadratic::new(1.0);
        let pair = DuoPair::new(&f, &f).unwrap();
        assert_eq!(solve(pair, &[1.0, 3.0], Side::Right), vec![2.0]);
        let pair = DuoPair::new(&f, &f).unwrap();
        assert_eq!(solve(pair, &[-0.7], Side::Right), vec![-0.7]);
    }

    #[test]
    fn left_quasi_arithmetic_mean() {
        let f = Exponential::default();
        let pair = DuoPair::new(&f, &f).unwrap();
        let c = solve(pair, &[0.0, 2f64.ln()], Side::Left);
        assert!((c[0] - 1.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn left_with_scaled_quadratic() {
        let (f1, f2) = (Quadratic::new(2.0), Quadratic::new(1.0));
        let pair = DuoPair::new(&f1, &f2).unwrap();
        let c = solve(pair, &[1.0, 3.0], Side::Left);
        assert!((c[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimality_both_sides() {
        let (f1, f2) = (Quadratic::new(2.0), Quadratic::new(1.0));
        for side in [Side::Left, Side::Right] {
            let pair = DuoPair::new(&f1, &f2).unwrap();
            let prob = CentroidProblem::new(pair, vec![vec![1.0], vec![3.0], vec![-0.5]], side).unwrap();
            let c = prob.solve().unwrap();
            let r = minimality_check(&prob, &c, 0.1 * point_spread(prob.points()), 100).unwrap();
            assert_eq!((r.perturbations, r.violations), (100, 0), "{side:?}");
        }
    }

    #[test]
    fn errors() {
        let f = Quadratic::new(1.0);
        let empty = CentroidProblem::new(DuoPair::new(&f, &f).unwrap(), vec![], Side::Left);
        assert!(matches!(empty, Err(Error::Param(_))));
        let prob = CentroidProblem::new(DuoPair::new(&f, &f).unwrap(), vec![vec![1.0]], Side::Left).unwrap();
        assert!(matches!(right_centroid(&prob), Err(Error::Param(_))));
        let e = Exponential::default();
        let bad = CentroidProblem::new(DuoPair::new(&e, &e).unwrap(), vec![vec![1.0, 2.0]], Side::Left);
        assert!(matches!(bad, Err(Error::Domain(_))));
    }
}
