//! Duo Bregman, duo Fenchel-Young and duo Jensen divergences, with a catalog
//! of exponential families whose Kullback-Leibler and Bhattacharyya
//! divergences reduce to them.
//!
//! For two convex generators with `F1 ≥ F2`:
//!
//! | Divergence | Definition |
//! |------------|------------|
//! | duo Fenchel-Young | `Y_{F1,F2*}(θ, η') = F1(θ) + F2*(η') − ⟨θ, η'⟩` |
//! | duo Bregman | `B_{F1,F2}(θ:θ') = F1(θ) − F2(θ') − ⟨θ − θ', ∇F2(θ')⟩` |
//! | duo Jensen | `J_{F1,F2,α}(θ1:θ2) = αF1(θ1) + (1−α)F2(θ2) − F1(αθ1 + (1−α)θ2)`, `F2 ≥ F1` |
//!
//! The Kullback-Leibler divergence between a density `p_θ1` of a truncated
//! family and `q_θ2` of its parent is `B_{F2,F1}(θ2 : θ1)`.
//!
//! Modules:
//!
//! - [`generators`]: convex generators, numeric Legendre conjugates and
//!   gradient inversion, dominance sampling.
//! - [`divergences`]: single- and two-generator divergences.
//! - [`families`]: the exponential-family catalog and its KL, Bhattacharyya
//!   and entropy formulas.
//! - [`truncnorm`]: truncated normal partition function, moments, KL, entropy.
//! - [`centroids`]: sided duo Bregman centroids.
//! - [`oracle`]: quadrature and series ground truth from densities alone.
//! - [`figures`]: plotting grids.
//!
//! ```
//! use duodiv::families::{kl, ExpFamilyMember};
//!
//! let p = ExpFamilyMember::new("exponential:lambda=1".parse()?)?;
//! let q = ExpFamilyMember::new("laplacian:lambda=1".parse()?)?;
//! let d = kl(&p, &q)?.unwrap_finite();
//! assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
//! # Ok::<(), duodiv::Error>(())
//! ```

pub mod centroids;
pub mod divergences;
pub mod error;
pub mod families;
pub mod figures;
pub mod generators;
pub mod oracle;
pub mod truncnorm;

pub use divergences::{DivergenceValue, DuoPair, Method, Value};
pub use error::{Error, Result};
pub use families::{ExpFamilyMember, Family, FamilyId, SourceParams};
pub use generators::ConvexGenerator;
pub use oracle::OracleConfig;

/// Library version, as recorded in CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
