//! The embedding objective: low-dimensional probabilities with hyperbolic
//! distances, the KL cost, and its gradient in exact and tree-accelerated
//! form.
//!
//! With `w_ij = (1 + d_ij²)⁻¹` for hyperbolic distances `d_ij` and
//! `Z = Σ_{k≠ℓ} w_kℓ`, the low-dimensional probabilities are `q_ij = w_ij/Z`
//! and the cost is `C = Σ p_ij log(p_ij/q_ij)`. The variation splits into an
//! attractive sum over the sparse affinities and a dense repulsive sum:
//!
//! `δC/δy_i = 4 (Σ_j p_ij w_ij d_ij ∂d_ij − Z⁻¹ Σ_j w_ij² d_ij ∂d_ij)`
//!
//! where `∂d_ij` is the distance gradient with respect to `y_i`. The
//! accelerated path replaces the dense sum with quadtree far-field visits,
//! summaries contributing with multiplicity `N_cell` at the cell midpoint.
//! Both paths funnel every pair through the same accumulation kernel and
//! reduce in ascending index order, so a θ = 0 traversal reproduces the exact
//! gradient bit-for-bit.
//!
//! Fields returned here are the raw variations; the optimizer applies the
//! inverse metric factor to turn them into Riemannian descent directions.

use rayon::prelude::*;

use crate::affinity::SparseAffinities;
use crate::geometry::{distance_and_gradient, hyperbolic_distance, PoincarePoint, TangentVector};
use crate::quadtree::{PolarQuadtree, Visit};

/// Floor applied to `q_ij` inside the KL sum.
pub const Q_FLOOR: f64 = 1e-12;

/// Per-point cost variations `δC/δy_i` (before the λ⁻¹ metric scaling).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub vectors: Vec<TangentVector>,
}

impl GradientField {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Euclidean norm over all 2n components.
    pub fn flat_norm(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| v.dx * v.dx + v.dy * v.dy)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.vectors.iter().all(|v| v.dx.is_finite() && v.dy.is_finite())
    }
}

/// Rolling repulsive-term state for one query point: the unnormalized force
/// sum and this query's share of the normalizer Z.
#[derive(Debug, Clone, Copy, Default)]
pub struct RepulsionAccumulator {
    pub force: TangentVector,
    pub z_partial: f64,
}

impl RepulsionAccumulator {
    /// Fold one interaction partner (or a cell of `count` summarized points)
    /// into the accumulator. Both gradient paths use this exact sequence of
    /// operations, which is what makes θ = 0 reproduce the exact gradient
    /// bit-for-bit.
    #[inline]
    fn fold(&mut self, query: PoincarePoint, other: PoincarePoint, count: f64) {
        let (d, g) = distance_and_gradient(query, other);
        let w = 1.0 / (1.0 + d * d);
        let s = count * w * w * d;
        self.force.dx += s * g.dx;
        self.force.dy += s * g.dy;
        self.z_partial += count * w;
    }
}

/// Visit counters from one accelerated gradient evaluation, summed over all
/// query points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TraversalStats {
    pub point_visits: u64,
    pub summary_visits: u64,
}

impl TraversalStats {
    pub fn total_visits(&self) -> u64 {
        self.point_visits + self.summary_visits
    }
}

/// Attractive variation for point `i`: `Σ_j p_ij w_ij d_ij ∂d_ij` over the
/// stored affinity row. Coincident pairs contribute zero (d = 0 and the
/// gradient floor yields a zero vector).
fn attractive_term(p: &SparseAffinities, embedding: &[PoincarePoint], i: usize) -> TangentVector {
    let a = embedding[i];
    let mut acc = TangentVector { dx: 0.0, dy: 0.0 };
    let (cols, vals) = p.row(i);
    for (&j, &pij) in cols.iter().zip(vals) {
        let b = embedding[j as usize];
        let (d, g) = distance_and_gradient(a, b);
        let w = 1.0 / (1.0 + d * d);
        let s = pij * w * d;
        acc.dx += s * g.dx;
        acc.dy += s * g.dy;
    }
    acc
}

/// Combine per-point attractive and repulsive sums into the final field.
/// `exaggeration` multiplies the attractive term (early exaggeration without
/// rescaling P); Z is the global sum of per-query partials in index order.
fn combine(
    attractive: &[TangentVector],
    repulsion: &[RepulsionAccumulator],
    exaggeration: f64,
) -> GradientField {
    let z: f64 = repulsion.iter().map(|r| r.z_partial).sum();
    let z = if z > 0.0 { z } else { 1.0 };
    let vectors = attractive
        .iter()
        .zip(repulsion)
        .map(|(a, r)| TangentVector {
            dx: 4.0 * (exaggeration * a.dx - r.force.dx / z),
            dy: 4.0 * (exaggeration * a.dy - r.force.dy / z),
        })
        .collect();
    GradientField { vectors }
}

/// Exact O(n²) gradient. The repulsive inner loop runs in ascending j order,
/// skipping bitwise-coincident pairs in both the force and Z sums.
pub fn gradient_exact(
    p: &SparseAffinities,
    embedding: &[PoincarePoint],
    exaggeration: f64,
) -> GradientField {
    let n = embedding.len();
    let parts: Vec<(TangentVector, RepulsionAccumulator)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = embedding[i];
            let mut rep = RepulsionAccumulator::default();
            for (j, &b) in embedding.iter().enumerate() {
                if j == i || (a.x == b.x && a.y == b.y) {
                    continue;
                }
                rep.fold(a, b, 1.0);
            }
            (attractive_term(p, embedding, i), rep)
        })
        .collect();
    let (attractive, repulsion): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    combine(&attractive, &repulsion, exaggeration)
}

/// Tree-accelerated gradient. The far-field plan is compiled once per call
/// and shared by all n queries. At θ = 0 visits are buffered and sorted by
/// point index before folding, which reproduces [`gradient_exact`]
/// bit-for-bit; for θ > 0 each visit folds immediately in traversal order.
/// The normalizer Z is global: per-query partials summed over all i.
pub fn gradient_accelerated(
    p: &SparseAffinities,
    embedding: &[PoincarePoint],
    tree: &PolarQuadtree,
    theta: f64,
    exaggeration: f64,
) -> (GradientField, TraversalStats) {
    const SUMMARY_KEY: u32 = u32::MAX;
    let n = embedding.len();
    let far = tree.far_field(theta);
    let parts: Vec<(TangentVector, RepulsionAccumulator, TraversalStats)> = (0..n)
        .into_par_iter()
        .map_init(
            Vec::new,
            |buf: &mut Vec<(u32, f64, PoincarePoint)>, i| {
                let a = embedding[i];
                let mut rep = RepulsionAccumulator::default();
                let mut stats = TraversalStats::default();
                if theta == 0.0 {
                    buf.clear();
                    far.visit(a, &mut |v| match v {
                        Visit::Point { index, point } => buf.push((index, 1.0, point)),
                        Visit::Summary { count, midpoint } => {
                            buf.push((SUMMARY_KEY, count as f64, midpoint))
                        }
                    });
                    buf.sort_by_key(|&(key, _, _)| key);
                    for &(key, count, point) in buf.iter() {
                        rep.fold(a, point, count);
                        if key == SUMMARY_KEY {
                            stats.summary_visits += 1;
                        } else {
                            stats.point_visits += 1;
                        }
                    }
                } else {
                    far.visit(a, &mut |v| match v {
                        Visit::Point { point, .. } => {
                            rep.fold(a, point, 1.0);
                            stats.point_visits += 1;
                        }
                        Visit::Summary { count, midpoint } => {
                            rep.fold(a, midpoint, count as f64);
                            stats.summary_visits += 1;
                        }
                    });
                }
                (attractive_term(p, embedding, i), rep, stats)
            },
        )
        .collect();
    let mut attractive = Vec::with_capacity(n);
    let mut repulsion = Vec::with_capacity(n);
    let mut stats = TraversalStats::default();
    for (a, r, s) in parts {
        attractive.push(a);
        repulsion.push(r);
        stats.point_visits += s.point_visits;
        stats.summary_visits += s.summary_visits;
    }
    (combine(&attractive, &repulsion, exaggeration), stats)
}

/// Dense low-dimensional probabilities and their normalizer. Diagonal is
/// zero; all off-diagonal pairs participate in Z, coincident ones with
/// w = 1. Intended for exact-cost reporting and small-instance oracles.
pub fn q_matrix_exact(embedding: &[PoincarePoint]) -> (Vec<f64>, f64) {
    let n = embedding.len();
    let mut q = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = hyperbolic_distance(embedding[i], embedding[j]);
            let w = 1.0 / (1.0 + d * d);
            q[i * n + j] = w;
            q[j * n + i] = w;
            z += 2.0 * w;
        }
    }
    if z > 0.0 {
        for v in &mut q {
            *v /= z;
        }
    }
    (q, z)
}

/// Exact normalizer Z over all ordered pairs, in parallel.
fn z_exact(embedding: &[PoincarePoint]) -> f64 {
    let n = embedding.len();
    let halves: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = embedding[i];
            let mut acc = 0.0;
            for &b in &embedding[i + 1..] {
                let d = hyperbolic_distance(a, b);
                acc += 1.0 / (1.0 + d * d);
            }
            acc
        })
        .collect();
    2.0 * halves.iter().sum::<f64>()
}

/// KL divergence `Σ p_ij log(p_ij / q_ij)` over stored affinity entries with
/// q floored at [`Q_FLOOR`]. O(n²) via the exact normalizer.
pub fn kl_cost(p: &SparseAffinities, embedding: &[PoincarePoint]) -> f64 {
    let z = z_exact(embedding);
    let z = if z > 0.0 { z } else { 1.0 };
    let mut cost = 0.0;
    for (i, j, pij) in p.iter_entries() {
        if pij <= 0.0 {
            continue;
        }
        let d = hyperbolic_distance(embedding[i], embedding[j as usize]);
        let w = 1.0 / (1.0 + d * d);
        let q = (w / z).max(Q_FLOOR);
        cost += pij * (pij / q).ln();
    }
    cost
}
