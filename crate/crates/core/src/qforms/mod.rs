//! Integral binary quadratic forms `Q(X, Y) = aX² + bXY + cY²`.
//!
//! Everything that decides an orbit is exact: integers, `i128` intermediates
//! and elements of `ℚ(√Δ)`. Floating point only chooses starting points and
//! enumeration bounds, with slack.

mod field;
mod pell;
mod reduction;
mod reps;

pub use field::QuadFieldElem;
pub use pell::{automorph_generator, pell_fundamental, regulator, regulator_of_discriminant, PellSolution};
pub use reduction::{
    count_orbit_irrationals, equivalence_witness, equivalent, feet_distribution, is_reduced,
    orbit_forms, reduce, reduction_cycle, OrbitForm,
};
pub use reps::{
    canonical_rep, count_all_reps, count_primitive_reps, gauss_count, is_canonical, perp_length,
    primitive_rep_values, Representation, RepValues,
};

/// A product of `len` random elementary matrices `(1, k; 0, 1)`, `(1, 0; k, 1)`
/// with `|k| ≤ 2`.
pub fn random_sl2<R: rand::Rng>(rng: &mut R, len: usize) -> Mat2 {
    let mut m = Mat2::IDENTITY;
    for _ in 0..len {
        let k = rng.gen_range(-2..=2);
        let g = if rng.gen_bool(0.5) { Mat2::new(1, k, 0, 1) } else { Mat2::new(1, 0, k, 1) };
        m = m.mul(&g).expect("short words fit in 64 bits");
    }
    m
}

/// Signed distance from `{height ≥ 1}` to `γ·C_Q`, computed geometrically by
/// moving the endpoints of `C_Q` and measuring in the upper half-plane.
pub fn perp_length_geometric(q: &BinaryQF, gamma: &Mat2) -> Result<f64> {
    use crate::geom::{dist_between, BoundaryPoint, GeomObject, Geodesic, Horoball, MoebiusMap};
    let (r1, r2) = q.roots().ok_or_else(|| Error::InvalidArgument("form must be indefinite".into()))?;
    let c = Geodesic::new(BoundaryPoint::real(r1), BoundaryPoint::real(r2))?;
    let g = MoebiusMap::from_real(gamma.a as f64, gamma.b as f64, gamma.c as f64, gamma.d as f64);
    let image = g.apply_geodesic(&c, 1)?;
    dist_between(&GeomObject::Horoball(Horoball::standard()), &GeomObject::Geodesic(image))
}

use serde::{Deserialize, Serialize};

use crate::arith::is_square;
use crate::error::{invalid, Error, Result};

/// A 2×2 integer matrix `(a, b; c, d)` acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Capacity(format!("{v} does not fit in 64 bits")))
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1, b: 0, c: 0, d: 1 };
    pub const MINUS_IDENTITY: Mat2 = Mat2 { a: -1, b: 0, c: 0, d: -1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> i128 {
        self.a as i128 * self.d as i128 - self.b as i128 * self.c as i128
    }

    pub fn mul(&self, o: &Mat2) -> Result<Mat2> {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        let (e, f, g, h) = (o.a as i128, o.b as i128, o.c as i128, o.d as i128);
        Ok(Mat2 {
            a: narrow(a * e + b * g)?,
            b: narrow(a * f + b * h)?,
            c: narrow(c * e + d * g)?,
            d: narrow(c * f + d * h)?,
        })
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, x: i64, y: i64) -> Result<(i64, i64)> {
        let (x, y) = (x as i128, y as i128);
        Ok((
            narrow(self.a as i128 * x + self.b as i128 * y)?,
            narrow(self.c as i128 * x + self.d as i128 * y)?,
        ))
    }

    pub fn pow(&self, mut k: u64) -> Result<Mat2> {
        let mut base = *self;
        let mut acc = Mat2::IDENTITY;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }
}

/// The form `aX² + bXY + cY²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryQF {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryQF {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        BinaryQF { a, b, c }
    }

    /// `Δ = b² − 4ac`.
    pub fn disc(&self) -> i128 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        b * b - 4 * a * c
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    pub fn is_primitive(&self) -> bool {
        num_integer::gcd(num_integer::gcd(self.a, self.b), self.c) == 1
    }

    pub fn neg(&self) -> BinaryQF {
        BinaryQF::new(-self.a, -self.b, -self.c)
    }

    /// Precomposition `Q ∘ M`, i.e. `(Q∘M)(v) = Q(Mv)`.
    pub fn act(&self, m: &Mat2) -> Result<BinaryQF> {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let (p, q, r, s) = (m.a as i128, m.b as i128, m.c as i128, m.d as i128);
        Ok(BinaryQF {
            a: narrow(self.eval(m.a, m.c))?,
            b: narrow(2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s)?,
            c: narrow(self.eval(m.b, m.d))?,
        })
    }

    /// The roots `(−b ∓ √Δ)/(2a)` of `Q(X, 1)` as floats, first root first.
    pub fn roots(&self) -> Option<(f64, f64)> {
        let d = self.disc();
        if d <= 0 || self.a == 0 {
            return None;
        }
        let sd = (d as f64).sqrt();
        let a2 = 2.0 * self.a as f64;
        let b = self.b as f64;
        Some(((-b + sd) / a2, (-b - sd) / a2))
    }

    /// Checks the standing assumptions of the counting routines: primitive,
    /// positive nonsquare discriminant.
    pub fn check_indefinite(&self) -> Result<i128> {
        let d = self.disc();
        if d <= 0 {
            return invalid(format!("discriminant {d} is not positive"));
        }
        if is_square(d) {
            return invalid(format!("discriminant {d} is a perfect square"));
        }
        if !self.is_primitive() {
            return invalid("form is not primitive");
        }
        Ok(d)
    }
}

impl std::fmt::Display for BinaryQF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_law() {
        let q = BinaryQF::new(3, 5, -7);
        let m = Mat2::new(2, 1, 1, 1);
        let n = Mat2::new(1, -3, 0, 1);
        let qm = q.act(&m).unwrap();
        assert_eq!(qm.disc(), q.disc());
        for (x, y) in [(1, 0), (0, 1), (3, -2), (-5, 7)] {
            let (u, v) = m.apply(x, y).unwrap();
            assert_eq!(qm.eval(x, y), q.eval(u, v));
        }
        assert_eq!(q.act(&m.mul(&n).unwrap()).unwrap(), qm.act(&n).unwrap());
        assert_eq!(q.act(&Mat2::IDENTITY).unwrap(), q);
        assert_eq!(m.mul(&m.inv()).unwrap(), Mat2::IDENTITY);
        assert_eq!(m.pow(3).unwrap(), m.mul(&m).unwrap().mul(&m).unwrap());
    }

    #[test]
    fn two_routes_to_the_perpendicular() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q = BinaryQF::new(1, 0, -2);
        let mut checked = 0;
        for _ in 0..500 {
            let g = random_sl2(&mut rng, 6);
            assert_eq!(g.det(), 1);
            if let Ok(l) = perp_length(&q, &g) {
                if l > 0.0 {
                    assert!((perp_length_geometric(&q, &g).unwrap() - l).abs() < 1e-9);
                    checked += 1;
                }
            }
        }
        assert!(checked > 50);
    }
}
