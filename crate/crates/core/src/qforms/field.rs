use std::cmp::Ordering;

use num_integer::Integer;

use crate::error::{invalid, Error, Result};

/// An exact element `(p + q√Δ)/den` of `ℚ(√Δ)`, `Δ > 0` nonsquare, kept in
/// lowest terms with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadFieldElem {
    p: i128,
    q: i128,
    den: i128,
    delta: i128,
}

fn overflow() -> Error {
    Error::Capacity("quadratic field arithmetic overflowed 128 bits".into())
}

impl QuadFieldElem {
    pub fn new(p: i128, q: i128, den: i128, delta: i128) -> Result<Self> {
        if den == 0 {
            return invalid("zero denominator");
        }
        if delta <= 0 {
            return invalid("discriminant must be positive");
        }
        let s = if den < 0 { -1 } else { 1 };
        let g = p.gcd(&q).gcd(&den);
        Ok(QuadFieldElem {
            p: s * p / g,
            q: s * q / g,
            den: s * den / g,
            delta,
        })
    }

    pub fn integral(p: i128, q: i128, delta: i128) -> Self {
        QuadFieldElem { p, q, den: 1, delta }.reduced()
    }

    fn reduced(self) -> Self {
        let g = self.p.gcd(&self.q).gcd(&self.den);
        if g <= 1 {
            return self;
        }
        QuadFieldElem {
            p: self.p / g,
            q: self.q / g,
            den: self.den / g,
            delta: self.delta,
        }
    }

    pub fn parts(&self) -> (i128, i128, i128) {
        (self.p, self.q, self.den)
    }

    /// Sign of `p + q√Δ`, decided by comparing `p²` with `q²Δ`.
    pub fn signum(&self) -> i32 {
        let sp = self.p.signum() as i32;
        let sq = self.q.signum() as i32;
        if sp == 0 || sq == 0 || sp == sq {
            return if sp != 0 { sp } else { sq };
        }
        let p2 = self.p.checked_mul(self.p);
        let q2d = self.q.checked_mul(self.q).and_then(|v| v.checked_mul(self.delta));
        match (p2, q2d) {
            (Some(a), Some(b)) => match a.cmp(&b) {
                Ordering::Greater => sp,
                Ordering::Less => sq,
                Ordering::Equal => 0,
            },
            // beyond 128 bits fall back on the magnitudes in floating point,
            // which cannot tie for a nonsquare Δ at this size
            _ => {
                let a = (self.p as f64).abs();
                let b = (self.q as f64).abs() * (self.delta as f64).sqrt();
                if a > b {
                    sp
                } else {
                    sq
                }
            }
        }
    }

    fn same_field(&self, o: &Self) -> Result<()> {
        if self.delta != o.delta {
            return invalid("elements of different quadratic fields");
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_field(o)?;
        let f = || -> Option<(i128, i128, i128)> {
            Some((
                self.p.checked_mul(o.den)?.checked_add(o.p.checked_mul(self.den)?)?,
                self.q.checked_mul(o.den)?.checked_add(o.q.checked_mul(self.den)?)?,
                self.den.checked_mul(o.den)?,
            ))
        };
        let (p, q, d) = f().ok_or_else(overflow)?;
        QuadFieldElem::new(p, q, d, self.delta)
    }

    pub fn neg(&self) -> Self {
        QuadFieldElem { p: -self.p, q: -self.q, ..*self }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_field(o)?;
        let f = || -> Option<(i128, i128, i128)> {
            let pp = self.p.checked_mul(o.p)?;
            let qq = self.q.checked_mul(o.q)?.checked_mul(self.delta)?;
            let pq = self.p.checked_mul(o.q)?;
            let qp = self.q.checked_mul(o.p)?;
            Some((pp.checked_add(qq)?, pq.checked_add(qp)?, self.den.checked_mul(o.den)?))
        };
        let (p, q, d) = f().ok_or_else(overflow)?;
        QuadFieldElem::new(p, q, d, self.delta)
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            self.neg()
        } else {
            *self
        }
    }

    /// Galois conjugate `p − q√Δ`.
    pub fn conj(&self) -> Self {
        QuadFieldElem { q: -self.q, ..*self }
    }

    /// Exact comparison.
    pub fn compare(&self, o: &Self) -> Result<Ordering> {
        Ok(self.sub(o)?.signum().cmp(&0))
    }

    pub fn to_f64(&self) -> f64 {
        (self.p as f64 + self.q as f64 * (self.delta as f64).sqrt()) / self.den as f64
    }
}
