//! Evaluation machinery: gradient/cost approximation errors, neighborhood
//! preservation (1-NN error, precision/recall), iteration-timing summaries,
//! and the empirical order-of-convergence estimator for scaling studies.

use std::fmt;

use rayon::prelude::*;

use crate::affinity::DataMatrix;
use crate::geometry::{hyperbolic_distance, PoincarePoint};
use crate::objective::GradientField;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    TooFewPoints { n: usize },
    LengthMismatch { left: usize, right: usize },
    NonPositiveTime { index: usize },
    SizesNotIncreasing,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::TooFewPoints { n } => write!(f, "need at least 2 points, got {n}"),
            MetricsError::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            MetricsError::NonPositiveTime { index } => {
                write!(f, "timing sample {index} is not positive")
            }
            MetricsError::SizesNotIncreasing => write!(f, "sizes must be strictly increasing"),
        }
    }
}

impl std::error::Error for MetricsError {}

/// Relative gradient-field error sample. The value treats each gradient
/// vector as a disk point and relates hyperbolic distances:
/// `√(Σᵢ d^H(gᵢ, ĝᵢ)²) / √(Σᵢ d^H(0, gᵢ)²)`. Vectors with norm ≥ 1 cannot
/// be interpreted as disk points and are radially clamped to norm
/// `1 − 10⁻⁵`; `clamped` counts them so callers can see when the metric
/// operated outside its comfortable range.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GradientErrorSample {
    pub value: f64,
    pub clamped: usize,
}

fn clamp_to_disk(v: crate::geometry::TangentVector, clamped: &mut usize) -> PoincarePoint {
    const MAX_NORM: f64 = 1.0 - 1e-5;
    let norm = (v.dx * v.dx + v.dy * v.dy).sqrt();
    if norm >= 1.0 {
        *clamped += 1;
        let s = MAX_NORM / norm;
        PoincarePoint::new_unchecked(v.dx * s, v.dy * s)
    } else {
        PoincarePoint::new_unchecked(v.dx, v.dy)
    }
}

/// Relative error between an exact and an approximate gradient field.
/// Returns NaN as the undefined-value sentinel when the exact field is
/// identically zero (callers map it to a missing value in reports).
pub fn relative_gradient_error(exact: &GradientField, approx: &GradientField) -> GradientErrorSample {
    assert_eq!(exact.len(), approx.len(), "field lengths differ");
    let mut clamped = 0usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, a) in exact.vectors.iter().zip(&approx.vectors) {
        let gp = clamp_to_disk(*g, &mut clamped);
        let ap = clamp_to_disk(*a, &mut clamped);
        num += hyperbolic_distance(gp, ap).powi(2);
        den += hyperbolic_distance(PoincarePoint::ORIGIN, gp).powi(2);
    }
    let value = if den > 0.0 { (num / den).sqrt() } else { f64::NAN };
    GradientErrorSample { value, clamped }
}

/// `|C − C′| / C`; NaN sentinel when the exact cost is not positive.
pub fn relative_cost_error(c_exact: f64, c_approx: f64) -> f64 {
    if c_exact > 0.0 {
        (c_exact - c_approx).abs() / c_exact
    } else {
        f64::NAN
    }
}

/// Fraction of points whose hyperbolic nearest neighbor carries a different
/// label. Ties break toward the lower index.
pub fn one_nn_error(embedding: &[PoincarePoint], labels: &[u32]) -> Result<f64, MetricsError> {
    let n = embedding.len();
    if n < 2 {
        return Err(MetricsError::TooFewPoints { n });
    }
    if labels.len() != n {
        return Err(MetricsError::LengthMismatch { left: n, right: labels.len() });
    }
    let mismatches: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, &p) in embedding.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = hyperbolic_distance(embedding[i], p);
                if d < best.0 {
                    best = (d, j);
                }
            }
            (labels[best.1] != labels[i]) as u64
        })
        .sum();
    Ok(mismatches as f64 / n as f64)
}

/// Mean precision/recall against fixed-size high-dimensional neighborhoods.
/// `precision[k-1]`/`recall[k-1]` hold the averages for embedded
/// neighborhood size k.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionRecallCurve {
    pub k_max: usize,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

/// Indices of the k nearest rows by the provided squared distance, excluding
/// `i`, ties broken by index.
fn k_smallest(dists: &mut Vec<(f64, u32)>, k: usize) -> Vec<u32> {
    if dists.len() > k {
        dists.select_nth_unstable_by(k - 1, |a, b| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        });
        dists.truncate(k);
    }
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.iter().map(|&(_, j)| j).collect()
}

/// For each point take its `k_max` Euclidean neighbors in the
/// high-dimensional data and its hyperbolic neighbors in the embedding; with
/// `TP_k` the overlap against the k closest embedded neighbors,
/// `PR_k = TP_k/k` and `RC_k = TP_k/k_max`, averaged over points.
pub fn precision_recall(
    data_hd: &DataMatrix,
    embedding: &[PoincarePoint],
    k_max: usize,
) -> Result<PrecisionRecallCurve, MetricsError> {
    let n = embedding.len();
    if data_hd.n() != n {
        return Err(MetricsError::LengthMismatch { left: data_hd.n(), right: n });
    }
    if k_max == 0 || k_max >= n {
        return Err(MetricsError::TooFewPoints { n });
    }
    let sums: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut hd: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (crate::affinity::squared_distance(data_hd.row(i), data_hd.row(j)), j as u32))
                .collect();
            let hd_set: Vec<u32> = k_smallest(&mut hd, k_max);
            let mut in_hd = vec![false; n];
            for &j in &hd_set {
                in_hd[j as usize] = true;
            }
            let mut ld: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = hyperbolic_distance(embedding[i], embedding[j]);
                    (d * d, j as u32)
                })
                .collect();
            let ld_order = k_smallest(&mut ld, k_max);
            let mut pr = vec![0.0; k_max];
            let mut rc = vec![0.0; k_max];
            let mut hits = 0usize;
            for (rank, &j) in ld_order.iter().enumerate() {
                if in_hd[j as usize] {
                    hits += 1;
                }
                pr[rank] = hits as f64 / (rank + 1) as f64;
                rc[rank] = hits as f64 / k_max as f64;
            }
            (pr, rc)
        })
        .collect();
    let mut precision = vec![0.0; k_max];
    let mut recall = vec![0.0; k_max];
    for (pr, rc) in &sums {
        for k in 0..k_max {
            precision[k] += pr[k];
            recall[k] += rc[k];
        }
    }
    for k in 0..k_max {
        precision[k] /= n as f64;
        recall[k] /= n as f64;
    }
    Ok(PrecisionRecallCurve { k_max, precision, recall })
}

/// Pairwise empirical order of convergence over a size/time series.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalingEstimate {
    pub sizes: Vec<usize>,
    pub mean_iter_times: Vec<f64>,
    /// `α_i = (ln t_{i+1} − ln t_i) / (ln n_{i+1} − ln n_i)`.
    pub alphas: Vec<f64>,
}

pub fn estimate_alpha(sizes: &[usize], times: &[f64]) -> Result<ScalingEstimate, MetricsError> {
    if sizes.len() < 2 {
        return Err(MetricsError::TooFewPoints { n: sizes.len() });
    }
    if sizes.len() != times.len() {
        return Err(MetricsError::LengthMismatch { left: sizes.len(), right: times.len() });
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MetricsError::SizesNotIncreasing);
    }
    if let Some(idx) = times.iter().position(|&t| t <= 0.0 || t.is_nan()) {
        return Err(MetricsError::NonPositiveTime { index: idx });
    }
    let alphas = sizes
        .windows(2)
        .zip(times.windows(2))
        .map(|(ns, ts)| (ts[1].ln() - ts[0].ln()) / ((ns[1] as f64).ln() - (ns[0] as f64).ln()))
        .collect();
    Ok(ScalingEstimate {
        sizes: sizes.to_vec(),
        mean_iter_times: times.to_vec(),
        alphas,
    })
}

/// Iterations at which cost (and, with an exact baseline, gradient error) is
/// sampled: every 50th iteration of each phase plus the phase-final one.
pub fn sampling_schedule(exaggeration_iters: usize, max_iters: usize) -> Vec<usize> {
    let mut schedule = Vec::new();
    let mut phase = |start: usize, len: usize| {
        let mut it = 0;
        while it < len {
            schedule.push(start + it);
            it += 50;
        }
        if len > 0 {
            schedule.push(start + len - 1);
        }
    };
    phase(0, exaggeration_iters);
    phase(exaggeration_iters, max_iters);
    schedule.dedup();
    schedule
}

/// Wall-time statistics over per-iteration samples, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimingSummary {
    pub min: f64,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub samples: usize,
}

pub fn timing_summary(samples: &[f64]) -> Option<TimingSummary> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&t| (t - mean).powi(2)).sum::<f64>() / n;
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(TimingSummary { min, mean, std: var.sqrt(), max, samples: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TangentVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(components: &[(f64, f64)]) -> GradientField {
        GradientField {
            vectors: components.iter().map(|&(dx, dy)| TangentVector { dx, dy }).collect(),
        }
    }

    #[test]
    fn gradient_error_identity_and_zero_approx() {
        let g = field(&[(0.1, 0.2), (-0.3, 0.05), (0.0, 0.4)]);
        let same = relative_gradient_error(&g, &g);
        assert_eq!(same.value, 0.0);
        assert_eq!(same.clamped, 0);

        let zero = field(&[(0.0, 0.0); 3]);
        let against_zero = relative_gradient_error(&g, &zero);
        assert!((against_zero.value - 1.0).abs() < 1e-15);

        let undefined = relative_gradient_error(&zero, &g);
        assert!(undefined.value.is_nan(), "zero exact field is a sentinel");
    }

    #[test]
    fn gradient_error_clamps_oversized_vectors() {
        let g = field(&[(5.0, 0.0), (0.1, 0.1)]);
        let a = field(&[(2.0, 0.0), (0.1, 0.1)]);
        let sample = relative_gradient_error(&g, &a);
        assert_eq!(sample.clamped, 2);
        assert!(sample.value.is_finite());
    }

    #[test]
    fn cost_error_basics() {
        assert_eq!(relative_cost_error(2.0, 1.0), 0.5);
        assert_eq!(relative_cost_error(3.0, 3.0), 0.0);
        assert!(relative_cost_error(0.0, 1.0).is_nan());
    }

    fn pt(x: f64, y: f64) -> PoincarePoint {
        PoincarePoint::new(x, y).unwrap()
    }

    #[test]
    fn one_nn_pure_clusters_score_zero() {
        let mut embedding = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let jitter = i as f64 * 1e-3;
            embedding.push(pt(0.5 + jitter * 0.01, 0.0));
            labels.push(0);
            embedding.push(pt(-0.5 - jitter * 0.01, 0.0));
            labels.push(1);
        }
        assert_eq!(one_nn_error(&embedding, &labels).unwrap(), 0.0);
    }

    #[test]
    fn one_nn_random_labels_near_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 1000;
        let classes = 4u32;
        let embedding: Vec<_> = (0..n)
            .map(|_| pt(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7)))
            .collect();
        let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        let err = one_nn_error(&embedding, &labels).unwrap();
        let chance = (classes - 1) as f64 / classes as f64;
        assert!((err - chance).abs() < 0.05, "err = {err}, chance = {chance}");
    }

    #[test]
    fn one_nn_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let embedding: Vec<_> = (0..60)
            .map(|_| pt(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6)))
            .collect();
        let labels: Vec<u32> = (0..60).map(|i| (i % 3) as u32).collect();
        let base = one_nn_error(&embedding, &labels).unwrap();
        let (s, c) = (1.234f64).sin_cos();
        let rotated: Vec<_> =
            embedding.iter().map(|p| pt(c * p.x - s * p.y, s * p.x + c * p.y)).collect();
        assert_eq!(one_nn_error(&rotated, &labels).unwrap(), base);
    }

    #[test]
    fn one_nn_needs_two_points() {
        assert!(matches!(
            one_nn_error(&[pt(0.0, 0.0)], &[0]),
            Err(MetricsError::TooFewPoints { n: 1 })
        ));
    }

    #[test]
    fn precision_recall_perfect_on_isometric_line() {
        // Points on a common ray: hyperbolic distance equals the difference
        // of hyperbolic radii, so a 1-D data column holding those radii has
        // identical neighbor order and the curve is exact.
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut radii: Vec<f64> = (0..40).map(|_| rng.random_range(0.1..3.0)).collect();
        radii.sort_by(f64::total_cmp);
        let embedding: Vec<_> =
            radii.iter().map(|&r| pt((r / 2.0).tanh(), 0.0)).collect();
        let data = DataMatrix::new(radii.len(), 1, radii);
        let k_max = 10;
        let curve = precision_recall(&data, &embedding, k_max).unwrap();
        for k in 1..=k_max {
            assert!((curve.precision[k - 1] - 1.0).abs() < 1e-12, "PR_{k}");
            assert!((curve.recall[k - 1] - k as f64 / k_max as f64).abs() < 1e-12, "RC_{k}");
        }
    }

    #[test]
    fn precision_recall_random_embedding_scores_low() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 500;
        let data = DataMatrix::new(
            n,
            5,
            (0..n * 5).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        let embedding: Vec<_> = (0..n)
            .map(|_| pt(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7)))
            .collect();
        let curve = precision_recall(&data, &embedding, 30).unwrap();
        // Chance level is k_max/n ≈ 0.06.
        assert!(curve.precision[29] < 0.15, "PR_30 = {}", curve.precision[29]);
        // PR equals RC at k = k_max by definition.
        assert!((curve.precision[29] - curve.recall[29]).abs() < 1e-15);
        for k in 1..30 {
            assert!(curve.recall[k] >= curve.recall[k - 1], "recall must not decrease");
        }
    }

    #[test]
    fn alpha_recovers_quadratic_exponent() {
        let sizes = [1000usize, 2000, 4000, 8000];
        let times: Vec<f64> = sizes.iter().map(|&n| 3.7e-9 * (n as f64).powi(2)).collect();
        let est = estimate_alpha(&sizes, &times).unwrap();
        for a in &est.alphas {
            assert!((a - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_nlogn_frozen_value() {
        let sizes = [1000usize, 2000];
        let times: Vec<f64> = sizes.iter().map(|&n| 1e-6 * n as f64 * (n as f64).log2()).collect();
        let est = estimate_alpha(&sizes, &times).unwrap();
        assert!((est.alphas[0] - 1.1379537473209833).abs() < 1e-12, "α = {}", est.alphas[0]);
    }

    #[test]
    fn alpha_constant_times_and_errors() {
        let est = estimate_alpha(&[100, 200], &[0.5, 0.5]).unwrap();
        assert_eq!(est.alphas, vec![0.0]);
        assert!(estimate_alpha(&[100], &[0.5]).is_err());
        assert!(estimate_alpha(&[100, 100], &[0.5, 0.5]).is_err());
        assert!(matches!(
            estimate_alpha(&[100, 200], &[0.5, 0.0]),
            Err(MetricsError::NonPositiveTime { index: 1 })
        ));
    }

    #[test]
    fn schedule_matches_default_protocol() {
        let s = sampling_schedule(250, 750);
        let exaggeration: Vec<usize> = vec![0, 50, 100, 150, 200, 249];
        let main: Vec<usize> = vec![250, 300, 350, 400, 450, 500, 550, 600, 650, 700, 750, 800, 850, 900, 950, 999];
        let expected: Vec<usize> = exaggeration.into_iter().chain(main).collect();
        assert_eq!(s, expected);

        assert_eq!(sampling_schedule(0, 120), vec![0, 50, 100, 119]);
        assert_eq!(sampling_schedule(30, 0), vec![0, 29]);
    }

    #[test]
    fn timing_summary_basics() {
        let s = timing_summary(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 3.0);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(timing_summary(&[]).is_none());
    }
}
