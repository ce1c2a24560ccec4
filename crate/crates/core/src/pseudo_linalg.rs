//! Linear algebra over real vector spaces with a diagonal indefinite inner
//! product of signature `(t, m - t)`.
//!
//! Coordinates are ordered with the negative axes first: the weight of
//! coordinate `i` is `-1` for `i < t` and `+1` otherwise.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative threshold under which a Gram-Schmidt remainder counts as light-like.
pub const LIGHTLIKE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(Signature, Signature),
    #[error("degenerate remainder for vector {index} (self-inner-product {norm:e})")]
    Degenerate { index: usize, norm: f64 },
    #[error("vector {index} is {found:?}, expected {expected:?}")]
    CharacterMismatch {
        index: usize,
        expected: Character,
        found: Character,
    },
    #[error("invalid signature: {negative} negative axes in dimension {dim}")]
    InvalidSignature { negative: usize, dim: usize },
}

/// Metric signature with `negative_count` time-like axes listed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    negative_count: usize,
    total_dim: usize,
}

impl Signature {
    pub fn new(negative_count: usize, total_dim: usize) -> Result<Self, LinalgError> {
        if total_dim < 2 || negative_count > total_dim {
            return Err(LinalgError::InvalidSignature {
                negative: negative_count,
                dim: total_dim,
            });
        }
        Ok(Self {
            negative_count,
            total_dim,
        })
    }

    pub fn negative_count(&self) -> usize {
        self.negative_count
    }

    pub fn positive_count(&self) -> usize {
        self.total_dim - self.negative_count
    }

    pub fn dim(&self) -> usize {
        self.total_dim
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i < self.negative_count {
            -1.0
        } else {
            1.0
        }
    }

    /// Weighted sum over raw coordinate slices. Callers guarantee equal lengths.
    #[inline]
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.total_dim);
        debug_assert_eq!(b.len(), self.total_dim);
        let (neg_a, pos_a) = a.split_at(self.negative_count);
        let (neg_b, pos_b) = b.split_at(self.negative_count);
        let neg: f64 = neg_a.iter().zip(neg_b).map(|(x, y)| x * y).sum();
        let pos: f64 = pos_a.iter().zip(pos_b).map(|(x, y)| x * y).sum();
        pos - neg
    }

    /// The `i`-th standard basis vector.
    pub fn basis(&self, i: usize) -> PVector {
        let mut coords = vec![0.0; self.total_dim];
        coords[i] = 1.0;
        PVector::new(*self, coords).expect("basis length matches signature")
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.negative_count, self.positive_count())
    }
}

/// Causal character of a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Character {
    SpaceLike,
    TimeLike,
    LightLike,
    Zero,
}

/// A vector of a pseudo-Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PVector {
    coords: Vec<f64>,
    signature: Signature,
}

impl PVector {
    pub fn new(signature: Signature, coords: Vec<f64>) -> Result<Self, LinalgError> {
        if coords.len() != signature.dim() {
            return Err(LinalgError::DimensionMismatch(
                coords.len(),
                signature.dim(),
            ));
        }
        Ok(Self { coords, signature })
    }

    pub fn zeros(signature: Signature) -> Self {
        Self {
            coords: vec![0.0; signature.dim()],
            signature,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Self-inner-product `<v, v>`.
    pub fn norm_sq(&self) -> f64 {
        self.signature.dot(&self.coords, &self.coords)
    }

    /// Euclidean length of the coordinate array.
    pub fn coord_norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Causal character, with light-like meaning `|<v,v>|` below
    /// [`LIGHTLIKE_TOL`] times the squared coordinate norm.
    pub fn character(&self) -> Character {
        let scale = self.coord_norm();
        if scale == 0.0 {
            return Character::Zero;
        }
        let n = self.norm_sq();
        if n.abs() <= LIGHTLIKE_TOL * scale * scale {
            Character::LightLike
        } else if n > 0.0 {
            Character::SpaceLike
        } else {
            Character::TimeLike
        }
    }

    pub fn scale(&self, k: f64) -> PVector {
        PVector {
            coords: self.coords.iter().map(|x| k * x).collect(),
            signature: self.signature,
        }
    }

    /// `self + k * other`, the workhorse of projections.
    pub fn axpy(&self, k: f64, other: &PVector) -> PVector {
        assert_eq!(self.signature, other.signature, "signature mismatch");
        PVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + k * b)
                .collect(),
            signature: self.signature,
        }
    }
}

impl Add for &PVector {
    type Output = PVector;
    fn add(self, rhs: &PVector) -> PVector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &PVector {
    type Output = PVector;
    fn sub(self, rhs: &PVector) -> PVector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<&PVector> for f64 {
    type Output = PVector;
    fn mul(self, rhs: &PVector) -> PVector {
        rhs.scale(self)
    }
}

impl Neg for &PVector {
    type Output = PVector;
    fn neg(self) -> PVector {
        self.scale(-1.0)
    }
}

/// Indefinite inner product `sum_i w_i u_i v_i`.
pub fn inner(u: &PVector, v: &PVector) -> Result<f64, LinalgError> {
    if u.dim() != v.dim() {
        return Err(LinalgError::DimensionMismatch(u.dim(), v.dim()));
    }
    if u.signature != v.signature {
        return Err(LinalgError::SignatureMismatch(u.signature, v.signature));
    }
    Ok(u.signature.dot(&u.coords, &v.coords))
}

/// Requested causal character of an orthonormalized vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causal {
    SpaceLike,
    TimeLike,
}

impl Causal {
    pub fn sign(self) -> f64 {
        match self {
            Causal::SpaceLike => 1.0,
            Causal::TimeLike => -1.0,
        }
    }

    fn character(self) -> Character {
        match self {
            Causal::SpaceLike => Character::SpaceLike,
            Causal::TimeLike => Character::TimeLike,
        }
    }
}

/// Remove from `v` its components along an orthonormal family `basis`
/// whose self-inner-products are `signs`.
pub fn project_out(v: &PVector, basis: &[PVector], signs: &[f64]) -> PVector {
    let mut r = v.clone();
    for (b, &eps) in basis.iter().zip(signs) {
        let c = r.signature.dot(&r.coords, &b.coords) * eps;
        r = r.axpy(-c, b);
    }
    r
}

/// Gram-Schmidt in the given order, no pivoting.
///
/// Each output vector has self-inner-product `+1` or `-1` as requested.
pub fn orthonormalize(
    vectors: &[PVector],
    required: &[Causal],
) -> Result<Vec<PVector>, LinalgError> {
    if vectors.len() != required.len() {
        return Err(LinalgError::DimensionMismatch(
            vectors.len(),
            required.len(),
        ));
    }
    let mut out: Vec<PVector> = Vec::with_capacity(vectors.len());
    let mut signs: Vec<f64> = Vec::with_capacity(vectors.len());
    for (index, (v, want)) in vectors.iter().zip(required).enumerate() {
        if let Some(first) = out.first() {
            if first.signature != v.signature {
                return Err(LinalgError::SignatureMismatch(first.signature, v.signature));
            }
        }
        let r = project_out(v, &out, &signs);
        let norm = r.norm_sq();
        let scale = r.coord_norm();
        if scale == 0.0 || norm.abs() < LIGHTLIKE_TOL * scale * scale {
            return Err(LinalgError::Degenerate { index, norm });
        }
        let found = if norm > 0.0 {
            Character::SpaceLike
        } else {
            Character::TimeLike
        };
        if found != want.character() {
            return Err(LinalgError::CharacterMismatch {
                index,
                expected: want.character(),
                found,
            });
        }
        out.push(r.scale(1.0 / norm.abs().sqrt()));
        signs.push(want.sign());
    }
    Ok(out)
}

/// Symmetric 2x2 matrix in an orthonormal tangent frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        a11: 0.0,
        a12: 0.0,
        a22: 0.0,
    };

    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    pub fn offdiag(g: f64) -> Self {
        Self::new(0.0, g, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.a11,
            (1, 1) => self.a22,
            _ => self.a12,
        }
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a12, self.a22]]
    }

    pub fn scale(&self, k: f64) -> Sym2 {
        Sym2::new(k * self.a11, k * self.a12, k * self.a22)
    }

    pub fn lin(&self, a: f64, other: &Sym2, b: f64) -> Sym2 {
        Sym2::new(
            a * self.a11 + b * other.a11,
            a * self.a12 + b * other.a12,
            a * self.a22 + b * other.a22,
        )
    }

    /// Components in the frame rotated by `theta`:
    /// `e1' = cos e1 + sin e2`, `e2' = -sin e1 + cos e2`.
    pub fn rotated(&self, theta: f64) -> Sym2 {
        let (s, c) = theta.sin_cos();
        let a11 = c * c * self.a11 + 2.0 * s * c * self.a12 + s * s * self.a22;
        let a22 = s * s * self.a11 - 2.0 * s * c * self.a12 + c * c * self.a22;
        let a12 = (c * c - s * s) * self.a12 + s * c * (self.a22 - self.a11);
        Sym2::new(a11, a12, a22)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a11 * self.a11 + 2.0 * self.a12 * self.a12 + self.a22 * self.a22
    }
}

/// The `(2,1)` entry of `[a, b] = ab - ba`, i.e. `<[a,b] e1, e2>`.
/// The commutator of two symmetric matrices is antisymmetric, so this is its
/// only independent entry.
pub fn commutator_21(a: &Sym2, b: &Sym2) -> f64 {
    // (ab)_21 - (ba)_21
    (a.a12 * b.a11 + a.a22 * b.a12) - (b.a12 * a.a11 + b.a22 * a.a12)
}

/// Eigenvalues (descending) and frame angle `theta` in `[0, pi)` such that
/// rotating the frame by `theta` diagonalizes `m`.
pub fn eigen_sym2(m: &Sym2) -> ((f64, f64), f64) {
    let mean = 0.5 * (m.a11 + m.a22);
    let half_diff = 0.5 * (m.a11 - m.a22);
    let radius = half_diff.hypot(m.a12);
    let mut theta = if radius == 0.0 {
        0.0
    } else {
        0.5 * (2.0 * m.a12).atan2(m.a11 - m.a22)
    };
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    ((mean + radius, mean - radius), theta)
}
