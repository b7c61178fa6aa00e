//! Simulation and discrete stochastic calculus for discontinuous martingales
//! on Riemannian submanifolds of Euclidean space.
//!
//! The crate provides:
//!
//! - [`geometry`]: a small catalog of isometrically embedded manifolds
//!   (spheres, flat tori) with exact tangent projections, the chord
//!   connection rule `γ(x, y) = Π_x(y − x)`, a smooth ambient extension of
//!   the embedding with analytic Jacobian/Hessian, derivative bounds over
//!   ambient balls, and greedy geodesic-ball covers.
//! - [`paths`]: grid-synchronous càdlàg paths with explicit jump flags and
//!   killing, seeded reproducible samplers (Brownian, compound Poisson,
//!   symmetric α-stable), stopping rules and first-exit scans.
//! - [`calculus`]: left-point stochastic integrals, quadratic variation with
//!   a continuous/jump split, the connection-rule Itô integral, and the
//!   exact discrete semimartingale decomposition of coordinate functions.
//! - [`martingales`]: constructors for geodesic-jump martingales with end
//!   points, coupled pairs with controllable sup distance, a statistical
//!   martingale-property tester, and closed-form canonical decompositions.
//! - [`metrics`]: estimators for the u.c.p. distance `r`, a dictionary lower
//!   bound for the semimartingale distance `r̂`, an upper bound for the
//!   `H^p` norm through an explicit decomposition, and a convergence
//!   classifier for sequences of processes.
//!
//! All samplers and estimators are pure functions of `(grid, seed)`;
//! ensembles can be generated and reduced in parallel with results
//! independent of thread scheduling.

// Indexed loops mirror the componentwise math throughout; `!(x > 0)`
// guards reject NaN parameters, which `x <= 0` would let through.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod martingales;
pub mod metrics;
pub mod paths;
pub mod seeding;
pub mod separation;
pub mod stats;

pub use error::{Error, Result};
