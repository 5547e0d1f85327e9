//! Numerical laboratory for statistical properties of torus flows.
//!
//! The crate builds invariant (minimizing) measures of Mañé-type vector
//! fields on the flat torus 𝕋ⁿ = ℝⁿ/ℤⁿ, computes Wasserstein-1 distances
//! between them by exact, entropic, dual, and closed-form routes, and runs
//! the scaling experiments that relate transport distance to the arithmetic
//! of the flow frequency:
//!
//! * [`diophantine`] — continued fractions, convergents, Diophantine
//!   verification, and simultaneous-approximation schedules.
//! * [`measures`] — torus geometry and the measure families the experiments
//!   compare: point clouds, line families, grid densities, graph lifts.
//! * [`flows`] — vector fields, the quadratic Mañé action, RK4 integration
//!   with torus wrapping, and Poincaré first-return maps.
//! * [`transport`] — Wasserstein-1 solvers: exact min-cost flow, log-domain
//!   Sinkhorn, Kantorovich–Rubinstein dual lower bounds, closed forms.
//! * [`ergodic`] — Birkhoff averages along linear flows and decay-rate fits.
//! * [`linres`] — Fourier-space cohomological equation, first-order
//!   conjugacy, and the linear response of the invariant measure.
//! * [`lab`] — experiment orchestration, TOML configs, JSON/CSV/SVG reports,
//!   and the `mather-lab` CLI entry points.

// `!(x > 0.0)`-style guards are negated on purpose: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diophantine;
pub mod ergodic;
pub mod flows;
pub mod lab;
pub mod linres;
pub mod measures;
pub mod transport;

pub use diophantine::Frequency;
pub use linres::fourier::FourierSeries;
pub use measures::{DiscreteMeasure, LineFamilyMeasure, TorusPoint};
pub use transport::{W1Result, TransportPlan};
