//! Textbook densities for oracle comparisons.
//!
//! These are written from the usual closed-form pmf/pdf expressions and never
//! touch the canonical decomposition, `erf`, or the truncated-normal module:
//! the truncated normal normalizes itself by quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use duodiv::oracle::{integrate, Density, OracleConfig, Support};
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub enum Textbook {
    Poisson { lambda: f64 },
    Geometric { p: f64 },
    Exponential { lambda: f64 },
    Laplacian { lambda: f64 },
    HalfNormal { sigma: f64 },
    Normal { m: f64, s: f64 },
    Trunc { m: f64, s: f64, a: f64, b: f64, log_z: f64 },
}

impl Textbook {
    /// `exp(−(x−m)²/(2s²))` on `(a, b)`, normalized by quadrature.
    pub fn trunc(m: f64, s: f64, a: f64, b: f64) -> Self {
        let cfg = OracleConfig::default();
        let z =
            integrate(&|x| (-(x - m) * (x - m) / (2.0 * s * s)).exp(), a, b, m, s, &cfg).expect("normalizing integral");
        Textbook::Trunc {
            m,
            s,
            a,
            b,
            log_z: z.value.ln(),
        }
    }
}

fn ln_factorial(k: f64) -> f64 {
    (1..=k as u64).map(|i| (i as f64).ln()).sum()
}

impl Density for Textbook {
    fn support(&self) -> Support {
        match *self {
            Textbook::Poisson { .. } | Textbook::Geometric { .. } => Support::Counting,
            Textbook::Exponential { .. } | Textbook::HalfNormal { .. } => Support::Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            Textbook::Laplacian { .. } | Textbook::Normal { .. } => Support::real_line(),
            Textbook::Trunc { a, b, .. } => Support::Interval { lo: a, hi: b },
        }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Textbook::Poisson { lambda } => x * lambda.ln() - lambda - ln_factorial(x),
            Textbook::Geometric { p } => x * (1.0 - p).ln() + p.ln(),
            Textbook::Exponential { lambda } => lambda.ln() - lambda * x,
            Textbook::Laplacian { lambda } => (lambda / 2.0).ln() - lambda * x.abs(),
            Textbook::HalfNormal { sigma } => (2.0 / (PI * sigma * sigma)).sqrt().ln() - x * x / (2.0 * sigma * sigma),
            Textbook::Normal { m, s } => -(x - m) * (x - m) / (2.0 * s * s) - (2.0 * PI * s * s).sqrt().ln(),
            Textbook::Trunc { m, s, log_z, .. } => -(x - m) * (x - m) / (2.0 * s * s) - log_z,
        }
    }

    fn center(&self) -> f64 {
        match *self {
            Textbook::Poisson { lambda } => lambda,
            Textbook::Geometric { p } => (1.0 - p) / p,
            Textbook::Exponential { lambda } => 1.0 / lambda,
            Textbook::Laplacian { .. } => 0.0,
            Textbook::HalfNormal { sigma } => sigma,
            Textbook::Normal { m, .. } | Textbook::Trunc { m, .. } => m,
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Textbook::Poisson { lambda } => lambda.sqrt().max(1.0),
            Textbook::Geometric { p } => ((1.0 - p).sqrt() / p).max(1.0),
            Textbook::Exponential { lambda } | Textbook::Laplacian { lambda } => 1.0 / lambda,
            Textbook::HalfNormal { sigma } => sigma,
            Textbook::Normal { s, .. } | Textbook::Trunc { s, .. } => s,
        }
    }
}

/// Random nested windows `(a1, b1) ⊆ (a2, b2)`, each containing `[−0.2, 0.2]`.
pub fn nested_windows<R: Rng>(rng: &mut R) -> ((f64, f64), (f64, f64)) {
    let a2 = if rng.random_bool(0.3) {
        f64::NEG_INFINITY
    } else {
        rng.random_range(-3.0..-0.5)
    };
    let b2 = if rng.random_bool(0.3) {
        f64::INFINITY
    } else {
        rng.random_range(0.5..3.0)
    };
    let a1 = if a2 == f64::NEG_INFINITY && rng.random_bool(0.3) {
        f64::NEG_INFINITY
    } else {
        a2.max(rng.random_range(-2.5..-0.2))
    };
    let b1 = if b2 == f64::INFINITY && rng.random_bool(0.3) {
        f64::INFINITY
    } else {
        b2.min(rng.random_range(0.2..2.5))
    };
    ((a1, b1), (a2, b2))
}

/// Location in `(−1, 1)` and scale in `(0.5, 2)`.
pub fn location_scale<R: Rng>(rng: &mut R) -> (f64, f64) {
    (rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0))
}
