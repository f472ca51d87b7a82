//! Simple max-stable dependence models and the orthant/concordance orders
//! between them.
//!
//! Five model families are supported: independent, fully dependent,
//! max-stable Dirichlet, Hüsler–Reiß and the discrete Choquet
//! (Tawn–Molchanov) model. Every model is a [`ModelSpec`]; the stable tail
//! dependence function `ℓ` and everything derived from it dispatch on that
//! handle. Closed forms are used where they exist; elsewhere values come
//! from seeded Monte Carlo over the family's generator and carry their
//! standard error, so downstream order checks can widen tolerances instead
//! of comparing raw floats.
//!
//! ```
//! use maxstab::{EvalOptions, ModelSpec};
//!
//! let m = ModelSpec::husler_reiss(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
//! let v = m.ell(&[1.0, 1.0], &EvalOptions::default()).unwrap();
//! assert!((v.value - 1.3829249225480261).abs() < 1e-12);
//! ```

pub mod coeffs;
pub mod error;
pub mod grid;
pub mod json;
pub mod models;
pub mod montecarlo;
pub mod orders;
pub mod projections;
pub mod quadrature;
pub mod special;
pub mod subset;
pub mod variogram;
pub mod zonoid;

pub use coeffs::{ChoquetModel, CoefficientTable, TableKind};
pub use error::{Error, Result, VariogramDefect};
pub use grid::{Direction, SimplexGrid};
pub use models::{Accuracy, DirichletParams, EllValue, EvalOptions, ModelSpec};
pub use montecarlo::{GeneratorSample, McEstimate};
pub use orders::{OrderVerdict, Outcome, Relation};
pub use subset::{enumerate_subsets, signed_subset_sum, SignRule, SubsetMask};
pub use variogram::{validate_variogram, VariogramMatrix};
