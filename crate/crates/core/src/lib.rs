//! Hyperbolic t-SNE: embeds high-dimensional data into the 2-D Poincaré disk.
//!
//! The pipeline mirrors the usual t-SNE recipe — PCA to 50 dimensions, exact
//! kNN, perplexity-calibrated Gaussian affinities — but the low-dimensional
//! side lives in hyperbolic space: Student-t kernel over the hyperbolic
//! distance, Riemannian gradient steps via the exponential map, and a
//! Barnes-Hut style far-field approximation built on a polar quadtree over
//! hyperbolic polar coordinates.
//!
//! Module map:
//! - [`geometry`]: Poincaré/Klein primitives (distance, gradient, Möbius
//!   addition, exp map, Einstein midpoint).
//! - [`affinity`]: PCA, exact kNN, bandwidth calibration, symmetrized sparse P.
//! - [`quadtree`]: the polar quadtree with per-node Einstein midpoints and the
//!   θ-criterion far-field traversal.
//! - [`objective`]: KL cost and the exact / accelerated gradient fields.
//! - [`optimizer`]: momentum + gains descent loop with boundary stopping.
//! - [`metrics`]: evaluation protocol (gradient/cost errors, 1-NN,
//!   precision/recall, scaling exponents).
//! - [`synth`]: deterministic synthetic datasets for tests and benchmarks.

pub mod affinity;
pub mod geometry;
pub mod metrics;
pub mod objective;
pub mod optimizer;
pub mod quadtree;
pub mod report;
pub mod synth;
