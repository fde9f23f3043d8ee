//! Per-tetrahedron linear distance fields.
//!
//! Inside a small tetrahedron the distance to each generator is replaced by
//! the unique affine function `d = a·x + b·y + c·z + w` that interpolates the
//! (transformed) distances at the four tet vertices. Two such fields agree on
//! a 3D plane, the bisector. Weighted diagram variants only change the values
//! that get interpolated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{circumradius, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TagKind {
    Real,
    /// Mirrored generator with vertex distances `2d - D`, used by offsetting.
    Virtual,
}

/// Identifies which generator a field (or a facet side) belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorTag {
    pub kind: TagKind,
    pub patch: usize,
}

impl GeneratorTag {
    pub const fn real(patch: usize) -> Self {
        GeneratorTag { kind: TagKind::Real, patch }
    }

    pub const fn mirror(patch: usize) -> Self {
        GeneratorTag { kind: TagKind::Virtual, patch }
    }

    pub fn is_virtual(&self) -> bool {
        self.kind == TagKind::Virtual
    }

    /// Integer encoding used in output files: real `p` is `p`, virtual `p`
    /// is `-(p + 1)`.
    pub fn encode(&self) -> i64 {
        match self.kind {
            TagKind::Real => self.patch as i64,
            TagKind::Virtual => -(self.patch as i64) - 1,
        }
    }

    pub fn decode(v: i64) -> Self {
        if v >= 0 {
            GeneratorTag::real(v as usize)
        } else {
            GeneratorTag::mirror((-v - 1) as usize)
        }
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TagKind::Real => write!(f, "{}", self.patch),
            TagKind::Virtual => write!(f, "{}'", self.patch),
        }
    }
}

/// A linear field `d = a·x + b·y + c·z + w` over one tetrahedron, read as
/// a hyperplane in (x, y, z, d) space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperplane4 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub w: f64,
    pub tag: GeneratorTag,
}

impl Hyperplane4 {
    pub const fn new(a: f64, b: f64, c: f64, w: f64, tag: GeneratorTag) -> Self {
        Hyperplane4 { a, b, c, w, tag }
    }

    #[inline]
    pub fn eval(&self, p: Vec3) -> f64 {
        self.a * p.x + self.b * p.y + self.c * p.z + self.w
    }

    pub fn gradient(&self) -> Vec3 {
        Vec3::new(self.a, self.b, self.c)
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.w]
    }
}

/// Plane `A·x + B·y + C·z + W = 0` in 3D.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane3 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub w: f64,
}

impl Plane3 {
    #[inline]
    pub fn eval(&self, p: Vec3) -> f64 {
        self.a * p.x + self.b * p.y + self.c * p.z + self.w
    }

    pub fn normal(&self) -> Vec3 {
        Vec3::new(self.a, self.b, self.c)
    }

    /// Euclidean distance from `p` to the plane.
    pub fn distance(&self, p: Vec3) -> f64 {
        self.eval(p).abs() / self.normal().norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantKind {
    /// Ordinary diagram: `D`.
    Vd,
    /// Power diagram: `D² - w²`.
    Pd,
    /// Additively weighted: `D + w`.
    Awvd,
    /// Multiplicatively weighted: `D · w`.
    Mwvd,
}

impl VariantKind {
    /// Weight assumed for patches without an explicit entry.
    pub fn neutral_weight(self) -> f64 {
        match self {
            VariantKind::Mwvd => 1.0,
            _ => 0.0,
        }
    }
}

/// Distance metric variant plus per-patch weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricVariant {
    pub kind: VariantKind,
    /// Indexed by patch id; missing entries use [`VariantKind::neutral_weight`].
    pub weights: Vec<f64>,
}

impl Default for MetricVariant {
    fn default() -> Self {
        MetricVariant::ordinary()
    }
}

impl MetricVariant {
    pub fn ordinary() -> Self {
        MetricVariant { kind: VariantKind::Vd, weights: Vec::new() }
    }

    pub fn new(kind: VariantKind, weights: Vec<f64>) -> Self {
        MetricVariant { kind, weights }
    }

    pub fn weight(&self, patch: usize) -> f64 {
        self.weights.get(patch).copied().unwrap_or(self.kind.neutral_weight())
    }

    pub fn transform(&self, patch: usize, distance: f64) -> Result<f64> {
        transform_distance(distance, self.weight(patch), self.kind).map_err(|e| match e {
            Error::NonPositiveWeight { weight, .. } => Error::NonPositiveWeight { patch, weight },
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == VariantKind::Mwvd {
            if let Some((patch, &weight)) = self.weights.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
                return Err(Error::NonPositiveWeight { patch, weight });
            }
        }
        if let Some((patch, w)) = self.weights.iter().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(Error::Validation(format!("weight of patch {patch} is not finite ({w})")));
        }
        Ok(())
    }

    /// Largest transformed value possible for Euclidean distances up to `max_distance`.
    pub fn transformed_upper_bound(&self, max_distance: f64) -> f64 {
        let wmax = self.weights.iter().fold(self.kind.neutral_weight(), |m, w| m.max(w.abs()));
        match self.kind {
            VariantKind::Vd => max_distance,
            VariantKind::Pd => max_distance * max_distance,
            VariantKind::Awvd => max_distance + wmax,
            VariantKind::Mwvd => max_distance * wmax,
        }
    }

    /// Smallest transformed value possible for nonnegative distances.
    pub fn transformed_lower_bound(&self) -> f64 {
        let wmax = self.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        match self.kind {
            VariantKind::Vd | VariantKind::Mwvd => 0.0,
            VariantKind::Pd => -wmax * wmax,
            VariantKind::Awvd => -wmax,
        }
    }
}

/// Applies a metric variant to a Euclidean distance.
pub fn transform_distance(distance: f64, weight: f64, kind: VariantKind) -> Result<f64> {
    if distance < 0.0 {
        return Err(Error::NegativeDistance(distance));
    }
    Ok(match kind {
        VariantKind::Vd => distance,
        VariantKind::Pd => distance * distance - weight * weight,
        VariantKind::Awvd => distance + weight,
        VariantKind::Mwvd => {
            if !(weight > 0.0) {
                return Err(Error::NonPositiveWeight { patch: usize::MAX, weight });
            }
            distance * weight
        }
    })
}

/// Fits the linear field interpolating `values` at the four tet vertices.
///
/// Solves the 4×4 system `[x y z 1] · (a b c w)ᵀ = d` by Gaussian
/// elimination with partial pivoting.
pub fn fit_hyperplane(tet: &[Vec3; 4], values: [f64; 4], tag: GeneratorTag) -> Result<Hyperplane4> {
    let mut m = [[0.0f64; 5]; 4];
    for (row, (v, d)) in m.iter_mut().zip(tet.iter().zip(values)) {
        *row = [v.x, v.y, v.z, 1.0, d];
    }
    let scale = m.iter().flat_map(|r| r[..4].iter()).fold(0.0f64, |s, x| s.max(x.abs()));
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if !(m[pivot][col].abs() > 1e-300 * scale.max(1.0)) {
            return Err(Error::DegenerateTet);
        }
        m.swap(col, pivot);
        for r in col + 1..4 {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for k in col..5 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = [0.0f64; 4];
    for r in (0..4).rev() {
        let mut s = m[r][4];
        for k in r + 1..4 {
            s -= m[r][k] * x[k];
        }
        x[r] = s / m[r][r];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateTet);
    }
    Ok(Hyperplane4::new(x[0], x[1], x[2], x[3], tag))
}

/// The plane on which two fields agree. Parallel fields yield a plane with
/// zero normal and nonzero offset, i.e. no points.
pub fn bisector_plane(hi: &Hyperplane4, hj: &Hyperplane4) -> Result<Plane3> {
    let p = Plane3 { a: hi.a - hj.a, b: hi.b - hj.b, c: hi.c - hj.c, w: hi.w - hj.w };
    if p.a == 0.0 && p.b == 0.0 && p.c == 0.0 && p.w == 0.0 {
        return Err(Error::IdenticalHyperplanes);
    }
    Ok(p)
}

/// Upper bound on `|true distance - fitted field|` inside the tet: twice
/// the circumradius, valid for any 1-Lipschitz distance function.
pub fn linearization_error_bound(tet: &[Vec3; 4]) -> f64 {
    2.0 * circumradius(tet)
}
