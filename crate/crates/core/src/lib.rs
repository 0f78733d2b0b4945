//! Adversarial classification risk on finite metric spaces.
//!
//! The crate computes the set-expansion, transport-map, kernel and
//! ∞-Wasserstein-ball formulations of adversarial risk, the optimal
//! adversarial risk through an unbalanced `{0,1}`-cost transport problem,
//! and pure Nash equilibria of the adversary-versus-classifier game.
//!
//! Every mass is an exact [`Rational`]. Distances are exact when the space is
//! built from rational data (integer grids, explicit rational matrices,
//! `ℓ1`/`ℓ∞` point clouds) and fall back to `f64` with an absolute tolerance of
//! `1e-9` otherwise. All `{0,1}`-cost transport reduces to max-flow, so every
//! optimum ships with a min-cut dual certificate.
//!
//! On a finite space the infimum defining `d(x, A)` is attained, so the
//! Minkowski expansion, the closed expansion and the open-ball variant coincide;
//! [`metric::expand`] is the single expansion operator.
//!
//! ```
//! use advrisk::num::{int, ratio};
//! use advrisk::{optimal, DiscreteMeasure, FiniteMetricSpace, GameInstance};
//! use std::sync::Arc;
//!
//! let space = Arc::new(FiniteMetricSpace::grid_1d(3)?);
//! let inst = GameInstance::new(
//!     DiscreteMeasure::dirac(&space, 0)?,
//!     DiscreteMeasure::dirac(&space, 2)?,
//!     int(1), // T
//!     int(1), // epsilon
//! )?;
//! let report = optimal::optimal_risk(&inst)?;
//! assert_eq!(report.value, ratio(1, 2));
//! # Ok::<(), advrisk::Error>(())
//! ```

pub mod error;
pub mod flow;
pub mod game;
pub mod measure;
pub mod metric;
pub mod num;
pub mod optimal;
pub mod risk;
pub mod scenario;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use measure::DiscreteMeasure;
pub use metric::{DecisionRegion, Distance, FiniteMetricSpace, MidpointReport, SpaceSpec};
pub use num::Rational;
pub use risk::GameInstance;

