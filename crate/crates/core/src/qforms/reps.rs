use std::cmp::Ordering;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::QuadFieldElem;
use super::pell::{automorph_from, pell_fundamental};
use super::{narrow, BinaryQF, Mat2};
use crate::arith::isqrt;
use crate::error::{invalid, Error, Result};

/// A representation `Q(x, y) = value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Representation {
    pub x: i64,
    pub y: i64,
    pub value: i64,
}

/// Per-form data shared by the canonicalisation routines.
struct Window {
    q: BinaryQF,
    delta: i128,
    gamma: Mat2,
    gamma_inv: Mat2,
    /// `ε² = ((t + u√Δ)/2)²`, scaled by 4: `(t² + Δu²) + 2tu√Δ`.
    eps2_times4: QuadFieldElem,
    two_r: f64,
    eps: f64,
}

impl Window {
    fn new(q: &BinaryQF) -> Result<Self> {
        let delta = q.check_indefinite()?;
        let pell = pell_fundamental(delta)?;
        let gamma = automorph_from(q, pell.t, pell.u)?;
        let (t, u) = (pell.t, pell.u);
        let e2 = QuadFieldElem::integral(
            t.checked_mul(t)
                .and_then(|a| u.checked_mul(u)?.checked_mul(delta)?.checked_add(a))
                .ok_or_else(|| Error::Capacity("fundamental unit too large".into()))?,
            2 * t * u,
            delta,
        );
        let eps = 0.5 * (t as f64 + u as f64 * (delta as f64).sqrt());
        Ok(Window {
            q: *q,
            delta,
            gamma,
            gamma_inv: gamma.inv(),
            eps2_times4: e2,
            two_r: 2.0 * eps.ln(),
            eps,
        })
    }

    /// `2a·L₁ = (2ax + by) − y√Δ` and `2a·L₂ = (2ax + by) + y√Δ`.
    fn linear_forms(&self, x: i64, y: i64) -> (QuadFieldElem, QuadFieldElem) {
        let p = 2 * self.q.a as i128 * x as i128 + self.q.b as i128 * y as i128;
        (
            QuadFieldElem::integral(p, -(y as i128), self.delta),
            QuadFieldElem::integral(p, y as i128, self.delta),
        )
    }

    /// Position in the window: `Less` if `|L₁| < |L₂|`, `Greater` if
    /// `|L₁| ≥ ε²|L₂|`, `Equal` inside `[1, ε²)`.
    fn locate(&self, x: i64, y: i64) -> Result<Ordering> {
        let (n1, n2) = self.linear_forms(x, y);
        let (a1, a2) = (n1.abs(), n2.abs());
        if a1.compare(&a2)? == Ordering::Less {
            return Ok(Ordering::Less);
        }
        let four = QuadFieldElem::integral(4, 0, self.delta);
        let lhs = four.mul(&a1)?;
        let rhs = self.eps2_times4.mul(&a2)?;
        Ok(if lhs.compare(&rhs)? == Ordering::Less {
            Ordering::Equal
        } else {
            Ordering::Greater
        })
    }

    /// `L₂ > 0`, i.e. `sign(2a·L₂) = sign(a)`.
    fn positive_l2(&self, x: i64, y: i64) -> bool {
        let (_, n2) = self.linear_forms(x, y);
        n2.signum() == self.q.a.signum() as i32
    }

    fn is_canonical(&self, x: i64, y: i64) -> Result<bool> {
        Ok(self.locate(x, y)? == Ordering::Equal && self.positive_l2(x, y))
    }

    fn canonical(&self, x: i64, y: i64) -> Result<(i64, i64)> {
        // float estimate of θ = ln|L₁/L₂| to jump close to the window
        let p = 2.0 * self.q.a as f64 * x as f64 + self.q.b as f64 * y as f64;
        let s = y as f64 * (self.delta as f64).sqrt();
        let big = p.abs() + s.abs();
        let small = (4.0 * self.q.a as f64 * self.q.eval(x, y) as f64).abs() / big;
        let theta = if (p - s).abs() >= (p + s).abs() {
            (big / small).ln()
        } else {
            (small / big).ln()
        };
        let k = (theta / self.two_r).floor();
        let (mut x, mut y) = (x, y);
        if k.is_finite() && k != 0.0 {
            // γ divides L₁/L₂ by ε², so γ^k moves θ by −2kR
            // one step at a time: the orbit points shrink towards the window
            // while powers of γ may not fit in 64 bits
            let m = if k > 0.0 { self.gamma } else { self.gamma_inv };
            for _ in 0..(k.abs() as u64).min(10_000) {
                (x, y) = m.apply(x, y)?;
            }
        }
        for _ in 0..10_000 {
            match self.locate(x, y)? {
                Ordering::Equal => {
                    if !self.positive_l2(x, y) {
                        (x, y) = (-x, -y);
                    }
                    return Ok((x, y));
                }
                Ordering::Less => (x, y) = self.gamma_inv.apply(x, y)?,
                Ordering::Greater => (x, y) = self.gamma.apply(x, y)?,
            }
        }
        Err(Error::Internal("canonical window not reached".into()))
    }
}

/// The canonical element of the `SO(Q, ℤ)`-orbit of `(x, y)`: the unique
/// orbit point with `|L₁/L₂| ∈ [1, ε²)` and `L₂ > 0`.
pub fn canonical_rep(q: &BinaryQF, x: i64, y: i64) -> Result<Representation> {
    let value = q.eval(x, y);
    if value == 0 {
        return invalid("Q(x, y) = 0 has no canonical representative");
    }
    let w = Window::new(q)?;
    let (x, y) = w.canonical(x, y)?;
    Ok(Representation { x, y, value: narrow(value)? })
}

/// Whether `(x, y)` is already its own canonical representative.
pub fn is_canonical(q: &BinaryQF, x: i64, y: i64) -> Result<bool> {
    if q.eval(x, y) == 0 {
        return Ok(false);
    }
    Window::new(q)?.is_canonical(x, y)
}

/// The sorted values `|Q(x)|` over canonical primitive representations with
/// `|Q(x)| ≤ s`. `Ψ_Q(t)` for any `t ≤ s` is the number of entries `≤ t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepValues {
    pub bound: u64,
    pub values: Vec<u64>,
}

impl RepValues {
    /// `Ψ_Q(t)`.
    pub fn psi(&self, t: f64) -> u64 {
        if t < 1.0 {
            return 0;
        }
        let t = t.floor() as u64;
        self.values.partition_point(|&v| v <= t) as u64
    }

    /// `Ψ̃_Q(t) = Σ_{k ≥ 1} Ψ_Q(t/k²)`.
    pub fn psi_all(&self, t: f64) -> u64 {
        let mut total = 0;
        let mut k = 1u64;
        while (k * k) as f64 <= t {
            total += self.psi(t / (k * k) as f64);
            k += 1;
        }
        total
    }
}

/// Enumerates canonical primitive representations with `|Q(x)| ≤ s`.
///
/// A canonical point has `|L₁| ≥ |L₂|`, `|L₁| < ε|L₂|·ε` and
/// `|L₁L₂| = |Q|/|a| ≤ s/|a|`, hence `|L₂| ≤ √(s/|a|) =: B` and `|L₁| < εB`.
/// Since `L₂ − L₁ = y√Δ/a` this gives `|y| ≤ |a|(1 + ε)B/√Δ`, and for each `y`
/// the two strips `|L₁| < εB`, `|L₂| ≤ B` bound `x`. The bounds are widened by
/// 5% so that no canonical point is missed; extra points are rejected by the
/// exact window test.
pub fn primitive_rep_values(q: &BinaryQF, s: u64) -> Result<RepValues> {
    let w = Window::new(q)?;
    if s > 1 << 40 {
        return Err(Error::Capacity(format!("bound {s} too large for enumeration")));
    }
    let a = q.a as f64;
    let b = q.b as f64;
    let sd = (w.delta as f64).sqrt();
    let bound2 = (s as f64 / a.abs()).sqrt() * 1.05 + 1.0;
    let bound1 = w.eps * bound2;
    let y_max = (a.abs() * (bound1 + bound2) / sd * 1.05).ceil() as i64 + 1;
    let sbig = s as i128;
    let chunks: Vec<Result<Vec<u64>>> = (-y_max..=y_max)
        .into_par_iter()
        .map(|y| {
            let yf = y as f64;
            // L₂ = x + (b + √Δ)y/(2a), L₁ = x + (b − √Δ)y/(2a)
            let c2 = (b + sd) * yf / (2.0 * a);
            let c1 = (b - sd) * yf / (2.0 * a);
            let lo = (-bound2 - c2).max(-bound1 - c1).floor() as i64 - 1;
            let hi = (bound2 - c2).min(bound1 - c1).ceil() as i64 + 1;
            let mut out = Vec::new();
            for x in lo..=hi {
                if x.gcd(&y) != 1 {
                    continue;
                }
                let v = q.eval(x, y);
                if v == 0 || v.abs() > sbig {
                    continue;
                }
                if w.is_canonical(x, y)? {
                    out.push(v.unsigned_abs() as u64);
                }
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::new();
    for c in chunks {
        values.extend(c?);
    }
    values.sort_unstable();
    Ok(RepValues { bound: s, values })
}

/// `Ψ_Q(s)`: primitive representations with `|Q(x)| ≤ s` modulo `SO(Q, ℤ)`.
pub fn count_primitive_reps(q: &BinaryQF, s: u64) -> Result<u64> {
    Ok(primitive_rep_values(q, s)?.values.len() as u64)
}

/// `Ψ̃_Q(s) = Σ_{k≥1} Ψ_Q(s/k²)`: all representations modulo `SO(Q, ℤ)`.
pub fn count_all_reps(q: &BinaryQF, s: u64) -> Result<u64> {
    Ok(primitive_rep_values(q, s)?.psi_all(s as f64))
}

/// Signed length `ln(2|Q(D, −C)|/√Δ)` of the common perpendicular between
/// the horoball `{height ≥ 1}` and `γ·C_Q`, `γ = (A, B; C, D)`, where `C_Q` is
/// the geodesic joining the roots of `Q(X, 1)`.
pub fn perp_length(q: &BinaryQF, gamma: &Mat2) -> Result<f64> {
    if gamma.det() != 1 {
        return invalid("γ must have determinant 1");
    }
    let d = q.disc();
    if d <= 0 {
        return invalid("form must be indefinite");
    }
    let lead = q.eval(gamma.d, -gamma.c);
    if lead == 0 {
        return invalid("γ·C_Q ends at infinity");
    }
    Ok((2.0 * lead.unsigned_abs() as f64 / (d as f64).sqrt()).ln())
}

/// Number of `x ∈ ℤ²` (origin included) with `Q(x) ≤ t`, for a positive
/// definite form.
pub fn gauss_count(q: &BinaryQF, t: u64) -> Result<u64> {
    let d = q.disc();
    if d >= 0 || q.a <= 0 {
        return invalid("form must be positive definite");
    }
    let (a, b) = (q.a as i128, q.b as i128);
    let t = t as i128;
    let nd = -d;
    // Q(x, y) ≤ t  ⟺  (2ax + by)² ≤ 4at − |Δ|y²
    let y_max = isqrt((4 * a * t / nd) as u128) as i128 + 1;
    let total: u64 = (-y_max..=y_max)
        .into_par_iter()
        .map(|y| {
            let rhs = 4 * a * t - nd * y * y;
            if rhs < 0 {
                return 0;
            }
            let r = isqrt(rhs as u128) as i128;
            let lo = Integer::div_ceil(&(-b * y - r), &(2 * a));
            let hi = Integer::div_floor(&(-b * y + r), &(2 * a));
            (hi - lo + 1).max(0) as u64
        })
        .sum();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn canonical_examples() {
        let q = BinaryQF::new(1, 0, -2);
        let c = canonical_rep(&q, 1, 1).unwrap();
        assert_eq!(canonical_rep(&q, 7, 5).unwrap(), c);
        assert_eq!(canonical_rep(&q, -1, 1).unwrap(), c);
        assert_eq!(canonical_rep(&q, c.x, c.y).unwrap(), c);
        assert!(is_canonical(&q, c.x, c.y).unwrap());
        assert!(canonical_rep(&q, 0, 0).is_err());
        assert_eq!(count_primitive_reps(&q, 1).unwrap(), 2);
        assert_eq!(count_all_reps(&q, 1).unwrap(), 2);
    }

    #[test]
    fn orbit_words() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for q in [BinaryQF::new(1, 0, -3), BinaryQF::new(1, 1, -1), BinaryQF::new(-3, 5, 7)] {
            let g = super::super::automorph_generator(&q).unwrap();
            for _ in 0..300 {
                let (x, y) = (rng.gen_range(-50..50), rng.gen_range(-50..50));
                if q.eval(x, y) == 0 {
                    continue;
                }
                let c = canonical_rep(&q, x, y).unwrap();
                let (mut u, mut v) = (x, y);
                for _ in 0..rng.gen_range(0..4) {
                    (u, v) = match rng.gen_range(0..3) {
                        0 => g.apply(u, v).unwrap(),
                        1 => g.inv().apply(u, v).unwrap(),
                        _ => (-u, -v),
                    };
                }
                assert_eq!(canonical_rep(&q, u, v).unwrap(), c);
            }
        }
    }

    #[test]
    fn enumeration_matches_canonicalised_box() {
        // every canonical class found by canonicalising a large box
        for q in [BinaryQF::new(1, 0, -2), BinaryQF::new(2, 1, -4), BinaryQF::new(-1, 3, 2)] {
            let s = 60;
            let mut seen = HashSet::new();
            for x in -300i64..=300 {
                for y in -300i64..=300 {
                    let v = q.eval(x, y);
                    if x.gcd(&y) == 1 && v != 0 && v.abs() <= s as i128 {
                        seen.insert(canonical_rep(&q, x, y).unwrap());
                    }
                }
            }
            assert_eq!(count_primitive_reps(&q, s).unwrap(), seen.len() as u64, "{q}");
        }
    }

    #[test]
    fn perp_length_example() {
        let q = BinaryQF::new(1, 0, -2);
        let l = perp_length(&q, &Mat2::new(1, 0, 2, 1)).unwrap();
        assert!((l - (14.0 / 8f64.sqrt()).ln()).abs() < 1e-14);
        // geometric route: image of the geodesic ]−√2, √2[ under z ↦ z/(2z + 1)
        let img = |z: f64| z / (2.0 * z + 1.0);
        let r = (img(-2f64.sqrt()) - img(2f64.sqrt())).abs() / 2.0;
        assert!((l + r.ln()).abs() < 1e-12);
        assert!((l - 1.599_34).abs() < 1e-5);
        let l0 = perp_length(&q, &Mat2::IDENTITY).unwrap();
        assert!((l0 + 2f64.sqrt().ln()).abs() < 1e-14);
        assert!(perp_length(&BinaryQF::new(0, 1, 1), &Mat2::IDENTITY).is_err());
    }

    #[test]
    fn gauss_counts() {
        let q = BinaryQF::new(1, 0, 1);
        assert_eq!(gauss_count(&q, 2).unwrap(), 9);
        assert_eq!(gauss_count(&q, 0).unwrap(), 1);
        let q2 = BinaryQF::new(2, 1, 3);
        for t in [0u64, 1, 5, 17, 40] {
            let mut n = 0;
            for x in -20i64..=20 {
                for y in -20i64..=20 {
                    if q2.eval(x, y) <= t as i128 {
                        n += 1;
                    }
                }
            }
            assert_eq!(gauss_count(&q2, t).unwrap(), n);
        }
    }
}
