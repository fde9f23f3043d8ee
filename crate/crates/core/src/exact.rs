//! Exact rational arithmetic for the plane-encoded cutting backend.
//!
//! Every binary64 value is a dyadic rational, so inputs are embedded without
//! rounding. Vertices are represented as the solution of four hyperplane
//! equations drawn from the input, which keeps bit lengths bounded no matter
//! how many cuts produced them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geom::Vec3;

pub type Rational = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(q: &Rational) -> Sign {
        if q.is_zero() {
            Sign::Zero
        } else if q.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn of_f64(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Exact embedding of a finite double.
pub fn rational(v: f64) -> Rational {
    assert!(v.is_finite(), "cannot embed non-finite value {v}");
    if v == 0.0 {
        return Rational::zero();
    }
    Rational::from_float(v).expect("finite")
}

pub fn rational_vec(p: Vec3) -> [Rational; 3] {
    [rational(p.x), rational(p.y), rational(p.z)]
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow; saturate with the right sign.
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Hyperplane `g · (x, y, z, d) + w = 0` with rational coefficients.
/// The polytope interior is the side where the expression is negative.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPlane {
    pub g: [Rational; 4],
    pub w: Rational,
}

impl ExactPlane {
    pub fn eval(&self, p: &[Rational; 4]) -> Rational {
        let mut s = self.w.clone();
        for (gi, pi) in self.g.iter().zip(p) {
            if !gi.is_zero() {
                s += gi * pi;
            }
        }
        s
    }

    pub fn to_f64(&self) -> ([f64; 4], f64) {
        (
            [to_f64(&self.g[0]), to_f64(&self.g[1]), to_f64(&self.g[2]), to_f64(&self.g[3])],
            to_f64(&self.w),
        )
    }
}

/// Solves `m · x = rhs` exactly; `None` if `m` is singular.
pub fn solve4(mut m: [[Rational; 4]; 4], mut rhs: [Rational; 4]) -> Option<[Rational; 4]> {
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..4 {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &m[col][col];
            for k in col..4 {
                let t = &f * &m[col][k];
                m[r][k] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    let mut x: [Rational; 4] = Default::default();
    for r in (0..4).rev() {
        let mut s = rhs[r].clone();
        for k in r + 1..4 {
            if !m[r][k].is_zero() {
                s -= &m[r][k] * &x[k];
            }
        }
        x[r] = s / &m[r][r];
    }
    Some(x)
}

/// The unique point on four hyperplanes: solves `A v + w = 0`.
pub fn intersect_planes(planes: [&ExactPlane; 4]) -> Result<[Rational; 4]> {
    let m = planes.map(|p| p.g.clone());
    let rhs = planes.map(|p| -p.w.clone());
    solve4(m, rhs).ok_or(Error::SingularEncoding)
}

/// Sign of `gᵀ A⁻¹ (−w) + w` for the vertex encoded by four planes,
/// evaluated against the query plane `h`.
pub fn exact_side(encoding: [&ExactPlane; 4], h: &ExactPlane) -> Result<Sign> {
    let v = intersect_planes(encoding)?;
    Ok(Sign::of(&h.eval(&v)))
}

/// Sign of `h(v)` with a floating-point filter in front of the exact
/// evaluation. `v_approx` and `h_approx` must be the correctly rounded
/// images of `v` and `h`.
pub fn filtered_side(
    h: &ExactPlane,
    h_approx: &([f64; 4], f64),
    v: &[Rational; 4],
    v_approx: &[f64; 4],
) -> Sign {
    let (g, w) = h_approx;
    let mut value = *w;
    let mut magnitude = w.abs();
    for i in 0..4 {
        let t = g[i] * v_approx[i];
        value += t;
        magnitude += t.abs();
    }
    // Each term carries at most a few ulps of relative error; 64 ulps of the
    // absolute sum leaves a wide margin.
    let bound = magnitude * 64.0 * f64::EPSILON;
    if value.is_finite() && magnitude.is_finite() && value.abs() > bound {
        return Sign::of_f64(value);
    }
    Sign::of(&h.eval(v))
}

/// Exact linear field through four tet vertices, returned as `(a, b, c, w)`.
pub fn fit_exact(tet: &[Vec3; 4], values: [f64; 4]) -> Result<[Rational; 4]> {
    let one = Rational::from_integer(BigInt::from(1));
    let m = [0, 1, 2, 3].map(|i| {
        let p = rational_vec(tet[i]);
        let [x, y, z] = p;
        [x, y, z, one.clone()]
    });
    let rhs = values.map(rational);
    solve4(m, rhs).ok_or(Error::DegenerateTet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> Rational {
        rational(v)
    }

    fn plane(g: [f64; 4], w: f64) -> ExactPlane {
        ExactPlane { g: g.map(q), w: q(w) }
    }

    #[test]
    fn embedding_is_exact() {
        for v in [0.1, -3.75, 1e-300, 123456789.123, 2f64.powi(-60)] {
            assert_eq!(to_f64(&rational(v)), v);
        }
    }

    #[test]
    fn solve_identity() {
        let m = [0, 1, 2, 3].map(|i| [0, 1, 2, 3].map(|j| q(if i == j { 1.0 } else { 0.0 })));
        let x = solve4(m, [q(1.0), q(2.0), q(3.0), q(4.0)]).unwrap();
        assert_eq!(x.map(|v| to_f64(&v)), [1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn singular_system_detected() {
        let a = plane([1.0, 0.0, 0.0, 0.0], 0.0);
        let b = plane([2.0, 0.0, 0.0, 0.0], 1.0);
        let c = plane([0.0, 1.0, 0.0, 0.0], 0.0);
        let d = plane([0.0, 0.0, 1.0, 0.0], 0.0);
        assert!(matches!(intersect_planes([&a, &b, &c, &d]), Err(Error::SingularEncoding)));
    }

    #[test]
    fn prism_corner_below_constant_field() {
        // x = 0, y = 0, z = 0, d = 0
        let enc = [
            plane([-1.0, 0.0, 0.0, 0.0], 0.0),
            plane([0.0, -1.0, 0.0, 0.0], 0.0),
            plane([0.0, 0.0, -1.0, 0.0], 0.0),
            plane([0.0, 0.0, 0.0, -1.0], 0.0),
        ];
        // field d = 1 reads as d - 1 <= 0
        let h = plane([0.0, 0.0, 0.0, 1.0], -1.0);
        let refs = [&enc[0], &enc[1], &enc[2], &enc[3]];
        assert_eq!(exact_side(refs, &h).unwrap(), Sign::Negative);
        assert_eq!(exact_side(refs, &enc[2]).unwrap(), Sign::Zero);
    }

    #[test]
    fn exact_fit_reproduces_values() {
        let t = [
            Vec3::new(0.1, 0.2, 0.3),
            Vec3::new(1.0, 0.0, 0.1),
            Vec3::new(0.0, 0.9, 0.2),
            Vec3::new(0.3, 0.1, 1.1),
        ];
        let vals = [0.7, 0.1, 0.33, 0.25];
        let c = fit_exact(&t, vals).unwrap();
        for (p, v) in t.iter().zip(vals) {
            let [x, y, z] = rational_vec(*p);
            let e = &c[0] * x + &c[1] * y + &c[2] * z + &c[3];
            assert_eq!(e, rational(v));
        }
    }
}
