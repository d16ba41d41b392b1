//! High-dimensional affinities: PCA preprocessing, exact kNN, per-point
//! bandwidth calibration against a perplexity target, and the symmetrized,
//! globally normalized sparse `P` used by the objective.
//!
//! The neighbor count follows the usual convention `k = ⌊3 · perplexity⌋`.
//! kNN is an exact brute-force scan (rayon-parallel, ties broken by lower
//! index). A metric tree buys nothing in 50 post-PCA dimensions at the scales
//! this crate targets, and the flat scan is trivially exact.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub enum AffinityError {
    /// Need `n − 1 ≥ k ≥ 1`; reports the offending pair.
    BadNeighborCount { n: usize, k: usize },
    /// Perplexity must be positive and finite.
    BadPerplexity { value: f64 },
    /// Data contains NaN or infinity at the given row.
    NonFiniteRow { row: usize },
}

impl fmt::Display for AffinityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffinityError::BadNeighborCount { n, k } => {
                write!(f, "need 1 <= k <= n - 1, got k = {k} with n = {n}")
            }
            AffinityError::BadPerplexity { value } => {
                write!(f, "perplexity must be positive and finite, got {value}")
            }
            AffinityError::NonFiniteRow { row } => {
                write!(f, "non-finite value in data row {row}")
            }
        }
    }
}

impl std::error::Error for AffinityError {}

/// Dense row-major `n × d` data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> DataMatrix {
        assert_eq!(values.len(), n * d, "row-major buffer must be n*d long");
        DataMatrix { n, d, values }
    }

    pub fn zeros(n: usize, d: usize) -> DataMatrix {
        DataMatrix { n, d, values: vec![0.0; n * d] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copy of the rows selected by `indices`, in the given order.
    pub fn subsample(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix::new(indices.len(), self.d, values)
    }

    pub fn check_finite(&self) -> Result<(), AffinityError> {
        for i in 0..self.n {
            if self.row(i).iter().any(|v| !v.is_finite()) {
                return Err(AffinityError::NonFiniteRow { row: i });
            }
        }
        Ok(())
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}

/// PCA projection of `data` onto its top `target` principal axes.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// Projected scores, `n × retained`.
    pub data: DataMatrix,
    /// Principal axes, column-major `d × retained` (axis `j` at `j*d..(j+1)*d`).
    pub components: Vec<f64>,
    /// Column means subtracted before projection.
    pub mean: Vec<f64>,
    /// Number of components actually returned.
    pub retained: usize,
    /// True when the covariance rank fell short of the request.
    pub rank_deficient: bool,
}

/// Mean-center and project onto the top `target` principal axes.
///
/// Uses the eigendecomposition of whichever Gram matrix is smaller (`dxd`
/// covariance or `nxn` outer Gram), so wide matrices are fine. Eigenvalues
/// within `1e-12` of zero relative to the largest are treated as null space;
/// if that leaves fewer than `target` axes the result is flagged
/// `rank_deficient` and carries however many survived. Component signs are
/// fixed so each axis' largest-magnitude loading is positive.
pub fn pca_reduce(data: &DataMatrix, target: usize) -> PcaResult {
    let n = data.n();
    let d = data.dims();
    let target = target.min(d).min(n);

    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(data.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut centered = DMatrix::<f64>::zeros(n, d);
    for i in 0..n {
        for (j, v) in data.row(i).iter().enumerate() {
            centered[(i, j)] = v - mean[j];
        }
    }

    // (eigenvalue, axis as length-d vector) pairs, descending.
    let mut pairs: Vec<(f64, Vec<f64>)> = if d <= n {
        let cov = centered.transpose() * &centered;
        let eig = SymmetricEigen::new(cov);
        (0..d)
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors.column(j).iter().copied().collect()))
            .collect()
    } else {
        let gram = &centered * centered.transpose();
        let eig = SymmetricEigen::new(gram);
        (0..n)
            .map(|j| {
                let lambda: f64 = eig.eigenvalues[j];
                let axis = if lambda > 0.0 {
                    let u = eig.eigenvectors.column(j);
                    let v = centered.transpose() * u;
                    let inv = 1.0 / lambda.sqrt();
                    v.iter().map(|x| x * inv).collect()
                } else {
                    vec![0.0; d]
                };
                (lambda, axis)
            })
            .collect()
    };
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0).max(0.0);
    let cutoff = lambda_max * 1e-12;
    let retained = pairs
        .iter()
        .take(target)
        .filter(|(l, _)| *l > cutoff && *l > 0.0)
        .count();
    let rank_deficient = retained < target;
    if rank_deficient {
        log::warn!("pca: rank {retained} < requested {target} components");
    }

    let mut components = Vec::with_capacity(retained * d);
    for (_, axis) in pairs.iter().take(retained) {
        let mut axis = axis.clone();
        // Sign convention: largest-magnitude loading positive.
        let mut best = 0usize;
        for (idx, v) in axis.iter().enumerate() {
            if v.abs() > axis[best].abs() {
                best = idx;
            }
        }
        if axis[best] < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        components.extend_from_slice(&axis);
    }

    let mut scores = vec![0.0; n * retained];
    for i in 0..n {
        for c in 0..retained {
            let axis = &components[c * d..(c + 1) * d];
            let mut s = 0.0;
            for j in 0..d {
                s += centered[(i, j)] * axis[j];
            }
            scores[i * retained + c] = s;
        }
    }

    PcaResult {
        data: DataMatrix::new(n, retained, scores),
        components,
        mean,
        retained,
        rank_deficient,
    }
}

/// Exact k-nearest-neighbor lists (squared Euclidean), sorted ascending by
/// `(distance, index)`; the query point itself is excluded.
#[derive(Debug, Clone)]
pub struct NeighborLists {
    pub k: usize,
    /// Row-major `n × k` neighbor indices.
    pub neighbors: Vec<u32>,
    /// Matching squared distances.
    pub dist_sq: Vec<f64>,
}

impl NeighborLists {
    pub fn n(&self) -> usize {
        self.neighbors.len().checked_div(self.k).unwrap_or(0)
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let s = i * self.k;
        (&self.neighbors[s..s + self.k], &self.dist_sq[s..s + self.k])
    }
}

/// Brute-force exact kNN. Ties on distance resolve to the lower index.
pub fn knn(data: &DataMatrix, k: usize) -> Result<NeighborLists, AffinityError> {
    let n = data.n();
    if k == 0 || k >= n {
        return Err(AffinityError::BadNeighborCount { n, k });
    }
    data.check_finite()?;

    let mut neighbors = vec![0u32; n * k];
    let mut dist_sq = vec![0.0f64; n * k];
    neighbors
        .par_chunks_mut(k)
        .zip(dist_sq.par_chunks_mut(k))
        .enumerate()
        .for_each(|(i, (nb_row, d_row))| {
            let qi = data.row(i);
            let mut all: Vec<(f64, u32)> = Vec::with_capacity(n - 1);
            for j in 0..n {
                if j != i {
                    all.push((squared_distance(qi, data.row(j)), j as u32));
                }
            }
            all.select_nth_unstable_by(k - 1, |a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            });
            all.truncate(k);
            all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (slot, (d, j)) in all.iter().enumerate() {
                nb_row[slot] = *j;
                d_row[slot] = *d;
            }
        });

    Ok(NeighborLists { k, neighbors, dist_sq })
}

/// Per-point Gaussian bandwidths calibrated so the conditional distribution
/// over the k neighbors hits the perplexity target.
#[derive(Debug, Clone)]
pub struct Calibration {
    /// Conditional probabilities aligned with the neighbor lists (`n × k`).
    pub probs: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// Rows where the bisection hit the step cap without reaching tolerance.
    pub unconverged: usize,
}

const PERPLEXITY_TOL: f64 = 1e-5;
const MAX_BISECTIONS: usize = 200;

/// Conditional probabilities and achieved perplexity for one row at a given
/// log-bandwidth. Distances are shifted by their minimum before
/// exponentiation; the shift cancels in the normalization.
fn row_distribution(d_sq: &[f64], log_sigma: f64, probs: &mut [f64]) -> f64 {
    let inv = 0.5 / (2.0 * log_sigma).exp(); // 1 / (2σ²)
    let shift = d_sq.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (p, &dsq) in probs.iter_mut().zip(d_sq) {
        let e = (-(dsq - shift) * inv).exp();
        *p = e;
        sum += e;
    }
    let mut entropy_bits = 0.0; // H = −Σ p log2 p
    for p in probs.iter_mut() {
        *p /= sum;
        if *p > 0.0 {
            entropy_bits -= *p * p.log2();
        }
    }
    entropy_bits.exp2()
}

/// Binary search over log σ for each point until `2^H` matches `perplexity`
/// within `1e-5`, capped at 200 bisections.
pub fn calibrate_bandwidths(
    lists: &NeighborLists,
    perplexity: f64,
) -> Result<Calibration, AffinityError> {
    if !perplexity.is_finite() || perplexity <= 0.0 {
        return Err(AffinityError::BadPerplexity { value: perplexity });
    }
    let n = lists.n();
    let k = lists.k;
    let mut probs = vec![0.0f64; n * k];
    let mut sigmas = vec![0.0f64; n];
    let flags: Vec<bool> = probs
        .par_chunks_mut(k)
        .zip(sigmas.par_iter_mut())
        .enumerate()
        .map(|(i, (row, sigma))| {
            let (_, d_sq) = lists.row(i);
            let mut lo = -30.0f64;
            let mut hi = 30.0f64;
            // Perplexity is monotone increasing in σ; widen until bracketed or
            // until exp(2·logσ) would leave f64 range (constant-perplexity rows
            // never bracket and fall out of bisection as unconverged).
            for _ in 0..20 {
                if hi < 350.0 && row_distribution(d_sq, hi, row) < perplexity {
                    hi = (hi * 2.0).min(350.0);
                } else {
                    break;
                }
            }
            for _ in 0..20 {
                if lo > -350.0 && row_distribution(d_sq, lo, row) > perplexity {
                    lo = (lo * 2.0).max(-350.0);
                } else {
                    break;
                }
            }
            let mut mid = 0.5 * (lo + hi);
            let mut converged = false;
            for _ in 0..MAX_BISECTIONS {
                mid = 0.5 * (lo + hi);
                let perp = row_distribution(d_sq, mid, row);
                if (perp - perplexity).abs() <= PERPLEXITY_TOL {
                    converged = true;
                    break;
                }
                if perp > perplexity {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            *sigma = mid.exp();
            !converged
        })
        .collect();

    let unconverged = flags.iter().filter(|f| **f).count();
    if unconverged > 0 {
        log::warn!("bandwidth calibration: {unconverged} rows did not reach tolerance");
    }
    Ok(Calibration { probs, sigmas, unconverged })
}

/// Symmetrized, globally normalized sparse affinities in CSR form with
/// column-sorted rows. `p_ij = (p_{j|i} + p_{i|j}) / (2n)`, so the whole
/// matrix sums to one and `p_ij = p_ji` bit-for-bit.
#[derive(Debug, Clone)]
pub struct SparseAffinities {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseAffinities {
    /// Build directly from `(row, col, value)` triplets. Rows are sorted by
    /// column and duplicate positions summed; diagonal entries are rejected.
    /// Symmetry is the caller's responsibility (supply both directions).
    /// Intended for hand-built matrices; [`affinities`] is the usual pipeline.
    pub fn from_entries(n: usize, entries: &[(u32, u32, f64)]) -> SparseAffinities {
        let mut per_row: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in entries {
            assert_ne!(i, j, "diagonal affinity entry ({i}, {j})");
            per_row[i as usize].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        for row in &mut per_row {
            row.sort_by_key(|&(j, _)| j);
            let mut it = row.iter().copied().peekable();
            while let Some((j, mut v)) = it.next() {
                while it.peek().map(|&(j2, _)| j2 == j).unwrap_or(false) {
                    v += it.next().unwrap().1;
                }
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseAffinities { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[s..e], &self.vals[s..e])
    }

    pub fn total(&self) -> f64 {
        self.vals.iter().sum()
    }

    /// Copy with every stored value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> SparseAffinities {
        SparseAffinities {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &p)| (i, j, p))
        })
    }
}

/// Symmetrize conditional probabilities over the union sparsity pattern and
/// normalize by `2n`.
pub fn symmetrize_normalize(lists: &NeighborLists, cal: &Calibration) -> SparseAffinities {
    let n = lists.n();
    let k = lists.k;
    // cond[(i, j)] lookup via per-row sorted scratch; rows are small (k).
    let mut per_row: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (i, row) in per_row.iter_mut().enumerate() {
        let (nbrs, _) = lists.row(i);
        for (slot, &j) in nbrs.iter().enumerate() {
            let c = cal.probs[i * k + slot];
            row.push((j, c));
        }
    }
    // Union pattern with both directions present.
    let mut buckets: Vec<Vec<(u32, f64, bool)>> = vec![Vec::new(); n];
    for i in 0..n {
        for &(j, c) in &per_row[i] {
            buckets[i].push((j, c, true)); // forward contribution p_{j|i}
            buckets[j as usize].push((i as u32, c, false)); // reverse p_{j|i} seen from j
        }
    }
    let norm = 1.0 / (2.0 * n as f64);
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for (i, bucket) in buckets.iter_mut().enumerate() {
        bucket.sort_by_key(|e| e.0);
        let mut idx = 0;
        while idx < bucket.len() {
            let j = bucket[idx].0;
            debug_assert_ne!(j as usize, i, "diagonal must not appear");
            let mut forward = 0.0;
            let mut reverse = 0.0;
            while idx < bucket.len() && bucket[idx].0 == j {
                if bucket[idx].2 {
                    forward += bucket[idx].1;
                } else {
                    reverse += bucket[idx].1;
                }
                idx += 1;
            }
            cols.push(j);
            vals.push((forward + reverse) * norm);
        }
        row_ptr.push(cols.len());
    }
    SparseAffinities { n, row_ptr, cols, vals }
}

/// Full affinity pipeline: `k = ⌊3·perplexity⌋` exact neighbors, calibrated
/// bandwidths, symmetrized and normalized `P`.
pub fn affinities(
    data: &DataMatrix,
    perplexity: f64,
) -> Result<(SparseAffinities, Calibration), AffinityError> {
    if !perplexity.is_finite() || perplexity <= 0.0 {
        return Err(AffinityError::BadPerplexity { value: perplexity });
    }
    let k = (3.0 * perplexity).floor() as usize;
    let lists = knn(data, k)?;
    let cal = calibrate_bandwidths(&lists, perplexity)?;
    Ok((symmetrize_normalize(&lists, &cal), cal))
}
