use serde::{Deserialize, Serialize};

use super::{narrow, BinaryQF, Mat2};
use crate::arith::{is_square, isqrt};
use crate::error::{invalid, Error, Result};

/// The minimal solution of `t² − Δu² = 4` with `t, u > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellSolution {
    pub t: i128,
    pub u: i128,
}

fn capacity() -> Error {
    Error::Capacity("Pell solution exceeds 128 bits".into())
}

/// Fundamental solution of `t² − Δu² = 4`.
///
/// Walks the continued fraction of `ω = (σ + √Δ)/2`, `σ ≡ Δ (mod 2)`, as exact
/// states `(P + √Δ)/Q`. A convergent `p/q` yields `t = 2p − σq`, `u = q`, with
/// `t² − Δu² = 4 N(p − qω)`; the first convergent of unit norm gives the
/// fundamental unit, squared when its norm is `−1`.
pub fn pell_fundamental(delta: i128) -> Result<PellSolution> {
    if delta <= 0 || is_square(delta) {
        return invalid(format!("Δ = {delta} must be positive and nonsquare"));
    }
    if delta.rem_euclid(4) > 1 {
        return invalid(format!("Δ = {delta} is not a discriminant"));
    }
    let sigma = delta % 2;
    let root = isqrt(delta as u128) as i128;
    let (mut pp, mut qq) = (sigma, 2i128);
    let (mut p_prev, mut p_cur) = (0i128, 1i128);
    let (mut q_prev, mut q_cur) = (1i128, 0i128);
    for _ in 0..100_000 {
        // floor((P + √Δ)/Q) for Q > 0; Q stays positive for this expansion
        let a = (pp + root).div_euclid(qq);
        let p_next = a
            .checked_mul(p_cur)
            .and_then(|v| v.checked_add(p_prev))
            .ok_or_else(capacity)?;
        let q_next = a
            .checked_mul(q_cur)
            .and_then(|v| v.checked_add(q_prev))
            .ok_or_else(capacity)?;
        (p_prev, p_cur, q_prev, q_cur) = (p_cur, p_next, q_cur, q_next);
        let t = 2 * p_cur - sigma * q_cur;
        let u = q_cur;
        let norm4 = t
            .checked_mul(t)
            .zip(u.checked_mul(u).and_then(|v| v.checked_mul(delta)))
            .map(|(a, b)| a - b)
            .ok_or_else(capacity)?;
        if norm4 == 4 {
            return Ok(PellSolution { t, u });
        }
        if norm4 == -4 {
            let t2 = t
                .checked_mul(t)
                .and_then(|a| u.checked_mul(u).and_then(|b| b.checked_mul(delta)).and_then(|b| a.checked_add(b)))
                .ok_or_else(capacity)?
                / 2;
            let u2 = t.checked_mul(u).ok_or_else(capacity)?;
            return Ok(PellSolution { t: t2, u: u2 });
        }
        pp = a * qq - pp;
        qq = (delta - pp * pp) / qq;
    }
    Err(Error::Internal("continued fraction period not found".into()))
}

/// `ln ε` with `ε = (t + u√Δ)/2` the fundamental unit of norm one.
pub fn regulator_of_discriminant(delta: i64) -> Result<f64> {
    let s = pell_fundamental(delta as i128)?;
    let (t, u) = (s.t as f64, s.u as f64);
    // ln((t + u√Δ)/2), computed from the larger of the two summands
    Ok((0.5 * (t + u * (delta as f64).sqrt())).ln())
}

/// `R_Q = ln((t_Q + u_Q√Δ)/2)`.
pub fn regulator(q: &BinaryQF) -> Result<f64> {
    let d = q.check_indefinite()?;
    regulator_of_discriminant(narrow(d)?)
}

/// The generator `((t − bu)/2, −cu; au, (t + bu)/2)` of the automorph group
/// `SO(Q, ℤ)` modulo `±I`.
pub fn automorph_generator(q: &BinaryQF) -> Result<Mat2> {
    let d = q.check_indefinite()?;
    let PellSolution { t, u } = pell_fundamental(d)?;
    automorph_from(q, t, u)
}

/// The automorph attached to any solution `(t, u)` of `t² − Δu² = 4`.
pub(crate) fn automorph_from(q: &BinaryQF, t: i128, u: i128) -> Result<Mat2> {
    let (a, b, c) = (q.a as i128, q.b as i128, q.c as i128);
    let bu = b.checked_mul(u).ok_or_else(capacity)?;
    if (t - bu).rem_euclid(2) != 0 {
        return Err(Error::Internal("Pell solution has the wrong parity".into()));
    }
    let m = Mat2 {
        a: narrow((t - bu) / 2)?,
        b: narrow(-c.checked_mul(u).ok_or_else(capacity)?)?,
        c: narrow(a.checked_mul(u).ok_or_else(capacity)?)?,
        d: narrow((t + bu) / 2)?,
    };
    debug_assert_eq!(m.det(), 1);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(delta: i128) -> (i128, i128) {
        for u in 1.. {
            let t2 = 4 + delta * u * u;
            if is_square(t2) {
                return (isqrt(t2 as u128) as i128, u);
            }
        }
        unreachable!()
    }

    #[test]
    fn small_discriminants() {
        assert_eq!(pell_fundamental(5).unwrap(), PellSolution { t: 3, u: 1 });
        assert_eq!(pell_fundamental(8).unwrap(), PellSolution { t: 6, u: 2 });
        assert_eq!(pell_fundamental(13).unwrap(), PellSolution { t: 11, u: 3 });
        assert!(pell_fundamental(9).is_err());
        assert!(pell_fundamental(-3).is_err());
        assert!(pell_fundamental(7).is_err());
        for delta in (5..400i128).filter(|d| d % 4 <= 1 && !is_square(*d)) {
            let s = pell_fundamental(delta).unwrap();
            if s.u <= 2000 {
                assert_eq!((s.t, s.u), brute(delta), "Δ = {delta}");
            }
            assert_eq!(s.t * s.t - delta * s.u * s.u, 4);
        }
    }

    #[test]
    fn regulators() {
        let r8 = regulator(&BinaryQF::new(1, 0, -2)).unwrap();
        assert!((r8 - (3.0 + 2f64.sqrt() * 2.0).ln()).abs() < 1e-14);
        assert!((r8 - 1.762_747_174_039_086).abs() < 1e-12);
        let r5 = regulator(&BinaryQF::new(1, 1, -1)).unwrap();
        assert!((r5 - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn automorphs() {
        let q = BinaryQF::new(1, 0, -2);
        let g = automorph_generator(&q).unwrap();
        assert_eq!(g, Mat2::new(3, 4, 2, 3));
        assert_eq!(q.act(&g).unwrap(), q);
        assert_eq!(automorph_from(&q, -2, 0).unwrap(), Mat2::MINUS_IDENTITY);
        for q in [BinaryQF::new(1, 1, -1), BinaryQF::new(3, 5, -7), BinaryQF::new(-2, 3, 4)] {
            let g = automorph_generator(&q).unwrap();
            assert_eq!(g.det(), 1);
            assert_eq!(q.act(&g).unwrap(), q);
        }
    }
}
