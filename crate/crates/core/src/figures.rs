//! Grid data for plotting duo divergences and conjugate pairs.
//!
//! | Table | Columns | Content |
//! |-------|---------|---------|
//! | [`duo_squared_euclidean`] | `theta, theta_p, value` | `D_a(θ:θ') = (a/2)θ² + ½θ'² − θθ'` |
//! | [`quartic_conjugates`] | `x, f1, f2, f1_star, f2_star` | `θ²`, `θ⁴` on `(0, 1)` and their conjugates on `(0, 2)` |
//! | [`quadratic_conjugates`] | `x, f1, f2, f1_star, f2_star` | `(a/2)θ²`, `θ²/2` and their conjugates |
//!
//! Conjugates in these tables are always computed by the numeric Legendre
//! transform, so the tables double as a check of the solver against the
//! known closed forms `η²/4`, `3η^{4/3}/4^{4/3}` and `η²/(2a)`.

use serde::Serialize;

use crate::divergences::DuoPair;
use crate::error::{Error, Result};
use crate::generators::{
    legendre_conjugate_numeric, BoxDomain, ConvexGenerator, Interval, NumericOnly, Power, Quadratic, SolverConfig,
};

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV with a header row; floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `n` evenly spaced points strictly inside `(lo, hi)` (cell midpoints).
pub fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn closed_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_grid(lo: f64, hi: f64, n: usize) -> Result<()> {
    if lo < hi && lo.is_finite() && hi.is_finite() && n >= 2 {
        Ok(())
    } else {
        Err(Error::Param(format!("grid [{lo}, {hi}] with {n} points")))
    }
}

/// Duo Bregman divergence of `((a/2)θ², θ²/2)` on an `n × n` grid over
/// `[lo, hi]²`. No dominance check is made, so `a < 1` yields negative values.
pub fn duo_squared_euclidean(a: f64, lo: f64, hi: f64, n: usize) -> Result<Table> {
    check_grid(lo, hi, n)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Param(format!("a = {a} must be positive")));
    }
    let (f1, f2) = (Quadratic::new(a), Quadratic::new(1.0));
    let pair = DuoPair::unchecked(&f1, &f2);
    let grid = closed_grid(lo, hi, n);
    let mut table = Table::new(&["theta", "theta_p", "value"]);
    for &t in &grid {
        for &tp in &grid {
            let v = pair.duo_bregman(&[t], &[tp])?.unwrap_finite();
            table.rows.push(vec![t, tp, v]);
        }
    }
    Ok(table)
}

fn conjugate_table(f1: &dyn ConvexGenerator, f2: &dyn ConvexGenerator, primal: &[f64], dual: &[f64]) -> Result<Table> {
    let cfg = SolverConfig::default();
    let (n1, n2) = (NumericOnly(f1), NumericOnly(f2));
    let mut table = Table::new(&["x", "f1", "f2", "f1_star", "f2_star"]);
    for (i, &t) in primal.iter().enumerate() {
        let eta = dual[i];
        table.rows.push(vec![
            t,
            f1.eval(&[t]),
            f2.eval(&[t]),
            legendre_conjugate_numeric(&n1, &[eta], &cfg)?,
            legendre_conjugate_numeric(&n2, &[eta], &cfg)?,
        ]);
    }
    Ok(table)
}

/// `F1 = θ²` and `F2 = θ⁴` on `(0, 1)` with numeric conjugates on `(0, 2)`.
///
/// Row `i` holds `F1, F2` at the `i`-th primal grid point and the conjugates
/// at the `i`-th dual grid point, both in the `x` column scaled to `(0, 1)`:
/// the primal abscissa is `x` and the dual abscissa is `2x`.
pub fn quartic_conjugates(n: usize) -> Result<Table> {
    check_grid(0.0, 1.0, n)?;
    let (f1, f2) = quartic_pair();
    let primal = interior_grid(0.0, 1.0, n);
    let dual: Vec<f64> = primal.iter().map(|x| 2.0 * x).collect();
    conjugate_table(&f1, &f2, &primal, &dual)
}

/// The `(θ², θ⁴)` pair on `(0, 1)`.
pub fn quartic_pair() -> (Quadratic, Power) {
    let unit = BoxDomain::interval(Interval { lo: 0.0, hi: 1.0 });
    (
        Quadratic::new(2.0).on(unit),
        Power::new(1.0, 4.0, 1.0).expect("valid power generator"),
    )
}

/// `F1 = (a/2)θ²` and `F2 = θ²/2` on `[−r, r]` with numeric conjugates at
/// the same abscissae.
pub fn quadratic_conjugates(a: f64, r: f64, n: usize) -> Result<Table> {
    check_grid(-r, r, n)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Param(format!("a = {a} must be positive")));
    }
    let (f1, f2) = (Quadratic::new(a), Quadratic::new(1.0));
    let grid = closed_grid(-r, r, n);
    conjugate_table(&f1, &f2, &grid, &grid)
}

/// Result of testing that `F1 ≥ F2` implies `F1* ≤ F2*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversalReport {
    pub primal_points: usize,
    pub dual_points: usize,
    /// `min (F1 − F2)` over the primal grid.
    pub primal_min_gap: f64,
    /// `max (F1* − F2*)` over the dual grid.
    pub dual_max_excess: f64,
}

impl ReversalReport {
    /// Primal dominance holds and the conjugates are reversed within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.primal_min_gap >= 0.0 && self.dual_max_excess <= tol
    }
}

/// Evaluates `F1 − F2` on `primal` and the numeric `F1* − F2*` on `dual`.
pub fn dominance_reversal(
    f1: &dyn ConvexGenerator,
    f2: &dyn ConvexGenerator,
    primal: &[f64],
    dual: &[f64],
) -> Result<ReversalReport> {
    let cfg = SolverConfig::default();
    let (n1, n2) = (NumericOnly(f1), NumericOnly(f2));
    let primal_min_gap = primal
        .iter()
        .map(|&t| f1.eval(&[t]) - f2.eval(&[t]))
        .fold(f64::INFINITY, f64::min);
    let mut dual_max_excess = f64::NEG_INFINITY;
    for &e in dual {
        let d = legendre_conjugate_numeric(&n1, &[e], &cfg)? - legendre_conjugate_numeric(&n2, &[e], &cfg)?;
        dual_max_excess = dual_max_excess.max(d);
    }
    Ok(ReversalReport {
        primal_points: primal.len(),
        dual_points: dual.len(),
        primal_min_gap,
        dual_max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surfaces_sign() {
        let half = duo_squared_euclidean(0.5, -2.0, 2.0, 21).unwrap();
        assert!(half.column("value").unwrap().iter().any(|v| *v < -1e-3));
        for a in [1.0, 2.0] {
            let t = duo_squared_euclidean(a, -2.0, 2.0, 21).unwrap();
            assert!(t.column("value").unwrap().iter().all(|v| *v >= -1e-10));
        }
        assert_eq!(half.rows.len(), 441);
    }

    #[test]
    fn quartic_table_matches_closed_forms() {
        let t = quartic_conjugates(50).unwrap();
        for row in &t.rows {
            let eta = 2.0 * row[0];
            assert!((row[3] - eta * eta / 4.0).abs() < 1e-10);
            assert!((row[4] - 3.0 / 4f64.powf(4.0 / 3.0) * eta.powf(4.0 / 3.0)).abs() < 1e-10);
            assert!(row[3] <= row[4] + 1e-10);
        }
    }

    #[test]
    fn csv_layout() {
        let t = quadratic_conjugates(2.0, 1.0, 3).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,f1,f2,f1_star,f2_star");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0,0,0,"));
    }

    #[test]
    fn reversal_report() {
        let (f1, f2) = quartic_pair();
        let r = dominance_reversal(&f1, &f2, &interior_grid(0.0, 1.0, 100), &interior_grid(0.0, 2.0, 100)).unwrap();
        assert!(r.holds(1e-10), "{r:?}");
    }
}
