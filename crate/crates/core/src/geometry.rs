//! Primitives on the Poincaré disk model of the hyperbolic plane.
//!
//! Points live strictly inside the unit disk. The conformal metric factor at
//! `y` is `λ_y = 2 / (1 − ‖y‖²)`, and the distance between `a` and `b` is
//!
//! ```text
//! d(a, b) = acosh(1 + 2‖a − b‖² / ((1 − ‖a‖²)(1 − ‖b‖²)))
//! ```
//!
//! Besides the metric itself this module provides the pieces the optimizer and
//! the quadtree need: the closed-form derivative of the distance, Möbius
//! addition and the exponential map for Riemannian updates, conversions to the
//! Klein model, and the Einstein midpoint (the hyperbolic center of mass used
//! for cell summaries), both as a batch formula and as a rolling accumulator.

use std::f64::consts::TAU;
use std::fmt;

/// Default margin for [`project_to_disk`]: points are pulled back to norm
/// `1 − PROJECT_EPS`. One order of magnitude inside the boundary-stop band so
/// a projected point is only ever in the band when the raw update already
/// crossed it.
pub const PROJECT_EPS: f64 = 1e-5;

/// Floor for `sqrt(γ² − 1)` in [`distance_gradient`] when called on (nearly)
/// coincident points. Pairwise sums skip coincident pairs instead.
pub const GRADIENT_SINGULARITY_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// A coordinate pair with `‖p‖ ≥ 1` was passed where a disk point is required.
    OutsideDisk { norm: f64 },
    /// A coordinate was NaN or infinite.
    NonFinite,
    /// Einstein midpoint of an empty point set.
    EmptyMidpoint,
    /// Einstein midpoint weights must be positive and finite.
    BadWeight { value: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::OutsideDisk { norm } => {
                write!(f, "point lies outside the open unit disk (norm {norm})")
            }
            GeometryError::NonFinite => write!(f, "non-finite coordinate"),
            GeometryError::EmptyMidpoint => write!(f, "midpoint of an empty point set"),
            GeometryError::BadWeight { value } => {
                write!(f, "midpoint weight must be positive and finite, got {value}")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// A point strictly inside the unit disk.
///
/// The checked constructor enforces the invariant; hot paths that produce
/// points already known to be valid use [`PoincarePoint::new_unchecked`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoincarePoint {
    pub x: f64,
    pub y: f64,
}

impl PoincarePoint {
    pub const ORIGIN: PoincarePoint = PoincarePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<PoincarePoint, GeometryError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let norm_sq = x * x + y * y;
        if norm_sq >= 1.0 {
            return Err(GeometryError::OutsideDisk { norm: norm_sq.sqrt() });
        }
        Ok(PoincarePoint { x, y })
    }

    /// Construct without the disk check. Callers are responsible for the
    /// invariant; `exp_map` output can graze the boundary in floating point
    /// and is expected to be followed by [`project_to_disk`].
    #[inline]
    pub fn new_unchecked(x: f64, y: f64) -> PoincarePoint {
        PoincarePoint { x, y }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// A point of the Klein (Beltrami) model, used for Einstein midpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KleinPoint {
    pub x: f64,
    pub y: f64,
}

impl KleinPoint {
    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// A tangent vector at some disk point, in embedding coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TangentVector {
    pub dx: f64,
    pub dy: f64,
}

impl TangentVector {
    #[inline]
    pub fn norm(self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy).sqrt()
    }
}

/// Conformal metric factor `λ_p = 2 / (1 − ‖p‖²)`.
#[inline]
pub fn metric_factor(p: PoincarePoint) -> f64 {
    2.0 / (1.0 - p.norm_sq())
}

/// Hyperbolic distance `acosh(1 + 2‖a−b‖² / ((1−‖a‖²)(1−‖b‖²)))`.
#[inline]
pub fn hyperbolic_distance(a: PoincarePoint, b: PoincarePoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let diff_sq = dx * dx + dy * dy;
    let t = 2.0 * diff_sq / ((1.0 - a.norm_sq()) * (1.0 - b.norm_sq()));
    // acosh(1 + t) written as ln1p(t + sqrt(t(t+2))): well conditioned for
    // close pairs and one sqrt instead of acosh's internal one, which lets
    // the fused distance-and-gradient kernel share it.
    (t + (t * (t + 2.0)).sqrt()).ln_1p()
}

/// Derivative of `d(a, b)` with respect to `a`:
///
/// ```text
/// δd/δa = 4 ((‖b‖² − 2⟨a,b⟩ + 1) a / α − b) / (α β sqrt(γ² − 1))
/// ```
///
/// with `α = 1 − ‖a‖²`, `β = 1 − ‖b‖²`, `γ = 1 + 2‖a−b‖²/(αβ)`. The
/// square root is floored at [`GRADIENT_SINGULARITY_FLOOR`] so the value stays
/// finite when `a → b`; summations over pairs skip coincident pairs instead of
/// relying on the floor.
#[inline]
pub fn distance_gradient(a: PoincarePoint, b: PoincarePoint) -> TangentVector {
    let alpha = 1.0 - a.norm_sq();
    let beta = 1.0 - b.norm_sq();
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let diff_sq = dx * dx + dy * dy;
    // sqrt(γ² − 1) = sqrt(t(t + 2)) with γ = 1 + t; the product form avoids
    // the cancellation in γ² − 1 for close pairs.
    let t = 2.0 * diff_sq / (alpha * beta);
    let root = (t * (t + 2.0)).sqrt().max(GRADIENT_SINGULARITY_FLOOR);
    let coeff = (b.norm_sq() - 2.0 * (a.x * b.x + a.y * b.y) + 1.0) / alpha;
    let scale = 4.0 / (alpha * beta * root);
    TangentVector {
        dx: scale * (coeff * a.x - b.x),
        dy: scale * (coeff * a.y - b.y),
    }
}

/// Fused `(d(a, b), δd/δa)` sharing one evaluation of `α`, `β` and `γ`.
///
/// The objective evaluates both per visited pair, so computing them together
/// roughly halves the cost of the hottest loop in the crate. Bit-identical to
/// calling [`hyperbolic_distance`] and [`distance_gradient`] separately.
#[inline]
pub fn distance_and_gradient(a: PoincarePoint, b: PoincarePoint) -> (f64, TangentVector) {
    let alpha = 1.0 - a.norm_sq();
    let beta = 1.0 - b.norm_sq();
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let diff_sq = dx * dx + dy * dy;
    let t = 2.0 * diff_sq / (alpha * beta);
    let raw_root = (t * (t + 2.0)).sqrt();
    let root = raw_root.max(GRADIENT_SINGULARITY_FLOOR);
    let coeff = (b.norm_sq() - 2.0 * (a.x * b.x + a.y * b.y) + 1.0) / alpha;
    let scale = 4.0 / (alpha * beta * root);
    let grad = TangentVector {
        dx: scale * (coeff * a.x - b.x),
        dy: scale * (coeff * a.y - b.y),
    };
    ((t + raw_root).ln_1p(), grad)
}

/// Möbius addition
/// `a ⊕ b = ((1 + 2⟨a,b⟩ + ‖b‖²) a + (1 − ‖a‖²) b) / (1 + 2⟨a,b⟩ + ‖a‖²‖b‖²)`.
#[inline]
pub fn mobius_add(a: PoincarePoint, b: PoincarePoint) -> PoincarePoint {
    let dot = a.x * b.x + a.y * b.y;
    let na = a.norm_sq();
    let nb = b.norm_sq();
    let ca = 1.0 + 2.0 * dot + nb;
    let cb = 1.0 - na;
    let denom = 1.0 + 2.0 * dot + na * nb;
    PoincarePoint::new_unchecked((ca * a.x + cb * b.x) / denom, (ca * a.y + cb * b.y) / denom)
}

/// Exponential map `exp_p(v) = p ⊕ (tanh(λ_p ‖v‖ / 2) · v/‖v‖)`.
///
/// `v = 0` returns `p` exactly. For saturating arguments the result can land
/// on the boundary in floating point; the descent loop always follows with
/// [`project_to_disk`].
#[inline]
pub fn exp_map(p: PoincarePoint, v: TangentVector) -> PoincarePoint {
    let norm = v.norm();
    if norm == 0.0 {
        return p;
    }
    let t = (metric_factor(p) * norm / 2.0).tanh();
    let step = PoincarePoint::new_unchecked(t * v.dx / norm, t * v.dy / norm);
    mobius_add(p, step)
}

/// Radially rescale to norm `1 − eps` if `‖(x, y)‖ ≥ 1 − eps`; otherwise the
/// point passes through unchanged. Accepts raw coordinates so callers can feed
/// vectors that have left the disk.
#[inline]
pub fn project_to_disk(x: f64, y: f64, eps: f64) -> PoincarePoint {
    let limit = 1.0 - eps;
    let norm = (x * x + y * y).sqrt();
    if norm >= limit {
        let s = limit / norm;
        PoincarePoint::new_unchecked(x * s, y * s)
    } else {
        PoincarePoint::new_unchecked(x, y)
    }
}

/// Poincaré → Klein: `k = 2p / (1 + ‖p‖²)`.
#[inline]
pub fn poincare_to_klein(p: PoincarePoint) -> KleinPoint {
    let s = 2.0 / (1.0 + p.norm_sq());
    KleinPoint { x: s * p.x, y: s * p.y }
}

/// Klein → Poincaré: `p = k / (1 + sqrt(1 − ‖k‖²))`.
#[inline]
pub fn klein_to_poincare(k: KleinPoint) -> PoincarePoint {
    let s = 1.0 + (1.0 - k.norm_sq()).max(0.0).sqrt();
    PoincarePoint::new_unchecked(k.x / s, k.y / s)
}

/// Lorentz factor of a Klein-model point, `γ(v) = 1 / sqrt(1 − ‖v‖²)`.
#[inline]
pub fn klein_gamma(k: KleinPoint) -> f64 {
    1.0 / (1.0 - k.norm_sq()).max(f64::MIN_POSITIVE).sqrt()
}

/// Hyperbolic polar coordinates of `p`: radius `r = d(0, p) = 2 atanh ‖p‖`
/// and angle `φ = atan2(y, x)` normalized into `[0, 2π)`.
#[inline]
pub fn polar_coords(p: PoincarePoint) -> (f64, f64) {
    let r = 2.0 * p.norm().atanh();
    let mut phi = p.y.atan2(p.x);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi = 0.0;
    }
    (r, phi)
}

/// Inverse of [`polar_coords`]: the disk point at hyperbolic radius `r` along
/// angle `φ` (Euclidean radius `tanh(r/2)`).
#[inline]
pub fn from_polar(r: f64, phi: f64) -> PoincarePoint {
    let rho = (r / 2.0).tanh();
    PoincarePoint::new_unchecked(rho * phi.cos(), rho * phi.sin())
}

/// Rolling Einstein-midpoint state: `Σ wγ(v)` and `Σ wγ(v) v` over Klein-model
/// points, so one more point folds in with O(1) work. This is exactly what the
/// quadtree keeps per node while points stream in.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MidpointAccumulator {
    pub weighted_gamma: f64,
    pub weighted_gx: f64,
    pub weighted_gy: f64,
}

impl MidpointAccumulator {
    pub fn new() -> MidpointAccumulator {
        MidpointAccumulator::default()
    }

    #[inline]
    pub fn fold(&mut self, p: PoincarePoint, weight: f64) {
        self.fold_klein(poincare_to_klein(p), weight);
    }

    #[inline]
    pub fn fold_klein(&mut self, k: KleinPoint, weight: f64) {
        let wg = weight * klein_gamma(k);
        self.weighted_gamma += wg;
        self.weighted_gx += wg * k.x;
        self.weighted_gy += wg * k.y;
    }

    /// Finalized midpoint in Poincaré coordinates; `None` while empty.
    #[inline]
    pub fn finalize(&self) -> Option<PoincarePoint> {
        if self.weighted_gamma <= 0.0 {
            return None;
        }
        let k = KleinPoint {
            x: self.weighted_gx / self.weighted_gamma,
            y: self.weighted_gy / self.weighted_gamma,
        };
        Some(klein_to_poincare(k))
    }
}

/// Batch Einstein midpoint `Σ_j (w_j γ(v_j) / Σ_ℓ w_ℓ γ(v_ℓ)) v_j` evaluated in
/// Klein coordinates and mapped back to the disk.
pub fn einstein_midpoint(
    points: &[PoincarePoint],
    weights: &[f64],
) -> Result<PoincarePoint, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyMidpoint);
    }
    assert_eq!(points.len(), weights.len(), "one weight per point");
    for &w in weights {
        if w <= 0.0 || !w.is_finite() {
            return Err(GeometryError::BadWeight { value: w });
        }
    }
    let klein: Vec<KleinPoint> = points.iter().map(|&p| poincare_to_klein(p)).collect();
    let total: f64 = klein
        .iter()
        .zip(weights)
        .map(|(&k, &w)| w * klein_gamma(k))
        .sum();
    let mut mx = 0.0;
    let mut my = 0.0;
    for (&k, &w) in klein.iter().zip(weights) {
        let c = w * klein_gamma(k) / total;
        mx += c * k.x;
        my += c * k.y;
    }
    Ok(klein_to_poincare(KleinPoint { x: mx, y: my }))
}
