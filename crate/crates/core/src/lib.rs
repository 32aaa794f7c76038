//! Mutual information of thermal states of translation-invariant free-fermion
//! chains.
//!
//! A chain of `N` sites on a ring carries a quadratic, real, reflection
//! symmetric hopping Hamiltonian of finite range. Its Gibbs state is Gaussian,
//! so every Renyi or von-Neumann entropy reduces to a trace of a scalar
//! function over the spectrum of a real symmetric covariance block. This
//! crate computes the mutual information between a contiguous block `A` and
//! its complement `B` in two independent ways:
//!
//! * [`exact`]: dense eigensolves of the finite-`N` Töplitz blocks (plus a
//!   brute-force Fock-space oracle for `N <= 8`),
//! * [`widom`]: the large-`N` limit written as a regularized periodic double
//!   integral over the thermal symbol, evaluated by a tensor-product
//!   rectangular rule with grid doubling.
//!
//! The [`torus`] module reduces bisected slabs in `D` dimensions to a sum of
//! modulated one-dimensional problems, and [`scan`] / [`fit`] drive parameter
//! sweeps and the scaling fits used by the command-line frontend.
//!
//! All entropies are measured in bits.
//!
//! ```
//! use ffmi_core::{ModelSpec, ThermalParams, ThermalSymbol, QuadratureConfig};
//! use ffmi_core::widom::mutual_info_asymptotic;
//!
//! let symbol = ThermalSymbol::new(ModelSpec::xx(1.0, 1.0), ThermalParams::new(0.1, 1.0)?);
//! let result = mutual_info_asymptotic(&symbol, &QuadratureConfig::default())?;
//! // High-temperature law: I / beta^2 -> alpha b^2 / (2 ln 2).
//! assert!((result.value / 0.01 - 0.721348).abs() < 0.01);
//! # Ok::<(), ffmi_core::Error>(())
//! ```

// `!(x < y)` is used on purpose: it rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
mod error;
pub mod exact;
pub mod fit;
pub mod fock;
pub mod linalg;
pub mod model;
mod par;
pub mod scan;
pub mod tail;
pub mod torus;
pub mod widom;

pub use entropy::EntropyKind;
pub use error::{Error, Result};
pub use exact::{MIResult, RingGeometry};
pub use linalg::{SymmetricMatrix, ToeplitzCoeffs};
pub use model::{ModelSpec, ThermalParams, ThermalSymbol};
pub use widom::{QuadratureConfig, WidomResult};
