//! Synthetic benchmark datasets. The reference corpora used for evaluation
//! are external downloads, so the scaling and quality experiments ship with
//! two seeded generators instead: a Gaussian mixture with controllable class
//! separation and a hierarchical generator whose clusters nest in a tree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::affinity::DataMatrix;

/// Mixture of `classes` unit-variance Gaussians in `dims` dimensions.
/// Class c sits at `separation` along coordinate axis `c mod dims`; labels
/// cycle through the classes so every prefix of the rows is balanced.
pub fn gaussian_mixture(
    n: usize,
    classes: usize,
    dims: usize,
    separation: f64,
    seed: u64,
) -> (DataMatrix, Vec<u32>) {
    assert!(classes >= 1 && dims >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        for j in 0..dims {
            let center = if j == c % dims { separation } else { 0.0 };
            let noise: f64 = StandardNormal.sample(&mut rng);
            values.push(center + noise);
        }
        labels.push(c as u32);
    }
    (DataMatrix::new(n, dims, values), labels)
}

/// Tree-structured clusters: `branching^depth` leaf centers grown by a
/// random walk whose step size decays by half per level, starting at
/// `separation`. Points are spread round-robin over the leaves with
/// unit-variance noise scaled to the deepest level; labels name the
/// top-level branch, so coarse structure is what a metric can check.
pub fn hierarchical(
    n: usize,
    branching: usize,
    depth: usize,
    dims: usize,
    separation: f64,
    seed: u64,
) -> (DataMatrix, Vec<u32>) {
    assert!(branching >= 2 && depth >= 1 && dims >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<(Vec<f64>, u32)> = vec![(vec![0.0; dims], 0)];
    let mut scale = separation;
    for level in 0..depth {
        let mut next = Vec::with_capacity(centers.len() * branching);
        for (center, top) in &centers {
            for b in 0..branching {
                let label = if level == 0 { b as u32 } else { *top };
                let child: Vec<f64> = center
                    .iter()
                    .map(|&x| {
                        let step: f64 = StandardNormal.sample(&mut rng);
                        x + scale * step
                    })
                    .collect();
                next.push((child, label));
            }
        }
        centers = next;
        scale *= 0.5;
    }
    let leaf_noise = scale;
    let mut values = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (center, top) = &centers[i % centers.len()];
        for &x in center {
            let noise: f64 = StandardNormal.sample(&mut rng);
            values.push(x + leaf_noise * noise);
        }
        labels.push(*top);
    }
    (DataMatrix::new(n, dims, values), labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mixture_shape_and_labels() {
        let (data, labels) = gaussian_mixture(100, 3, 50, 10.0, 7);
        assert_eq!(data.n(), 100);
        assert_eq!(data.dims(), 50);
        assert_eq!(labels.len(), 100);
        assert_eq!(&labels[..6], &[0, 1, 2, 0, 1, 2]);
        // Class means land near their configured centers.
        let mut mean0 = vec![0.0; 50];
        let mut count = 0;
        for (i, &label) in labels.iter().enumerate() {
            if label == 0 {
                for (m, v) in mean0.iter_mut().zip(data.row(i)) {
                    *m += v;
                }
                count += 1;
            }
        }
        for v in &mut mean0 {
            *v /= count as f64;
        }
        assert!((mean0[0] - 10.0).abs() < 1.0, "axis mean {}", mean0[0]);
        assert!(mean0[1].abs() < 1.0);
    }

    #[test]
    fn gaussian_mixture_is_seed_deterministic() {
        let (a, _) = gaussian_mixture(50, 4, 10, 5.0, 11);
        let (b, _) = gaussian_mixture(50, 4, 10, 5.0, 11);
        let (c, _) = gaussian_mixture(50, 4, 10, 5.0, 12);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn hierarchical_labels_cover_top_branches() {
        let (data, labels) = hierarchical(200, 3, 3, 20, 8.0, 5);
        assert_eq!(data.n(), 200);
        assert_eq!(data.dims(), 20);
        for b in 0..3u32 {
            assert!(labels.contains(&b), "missing top branch {b}");
        }
        assert!(labels.iter().all(|&l| l < 3));
    }

    #[test]
    fn hierarchical_top_split_dominates() {
        // Distances within a top-level branch should typically be smaller
        // than across branches, since deeper steps decay geometrically.
        let (data, labels) = hierarchical(150, 2, 3, 10, 10.0, 9);
        let (mut within, mut across) = (0.0, 0.0);
        let (mut nw, mut na) = (0, 0);
        for i in 0..data.n() {
            for j in (i + 1)..data.n() {
                let d = crate::affinity::squared_distance(data.row(i), data.row(j));
                if labels[i] == labels[j] {
                    within += d;
                    nw += 1;
                } else {
                    across += d;
                    na += 1;
                }
            }
        }
        assert!(across / na as f64 > 2.0 * within / nw as f64);
    }
}
