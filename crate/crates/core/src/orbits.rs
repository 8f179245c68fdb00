//! Orbit points of `PSL₂(ℤ)` and `PSL₂(𝒪_K)` in hyperbolic balls.
//!
//! For `γ ∈ SL₂` the displacement of the base point (`i` in `ℍ²`, `j` in `ℍ³`)
//! satisfies `2 cosh d(x₀, γx₀) = ‖γ‖²`, the sum of the squared moduli of the
//! entries. The ball of radius `s` is therefore the set `‖γ‖² ≤ 2 cosh s`.

use std::f64::consts::PI;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{ext_gcd, isqrt};
use crate::constants::{humbert_volume, margulis};
use crate::cusps::ImagQuadInt;
use crate::error::{invalid, Error, Result};
use crate::report::{CountReport, Growth, Row};

/// The ring of entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ring {
    /// `ℤ`, acting on `ℍ²`.
    Integers,
    /// `𝒪_K` for a supported imaginary quadratic discriminant, acting on `ℍ³`.
    Imaginary(i64),
}

impl Ring {
    /// Dimension `n` of the hyperbolic space acted on.
    pub fn dim(&self) -> u32 {
        match self {
            Ring::Integers => 2,
            Ring::Imaginary(_) => 3,
        }
    }

    /// Covolume of `PSL₂` of the ring.
    pub fn covolume(&self) -> Result<f64> {
        match *self {
            Ring::Integers => Ok(PI / 3.0),
            Ring::Imaginary(dk) => humbert_volume(dk),
        }
    }
}

/// Matrix counts in a ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallCount {
    /// Elements of `PSL₂` with `‖γ‖² ≤ bound`.
    pub psl: u64,
    /// Order of the stabiliser of the base point in `PSL₂`.
    pub stabilizer: u64,
    /// Distinct orbit points, `psl / stabilizer`.
    pub orbit_points: u64,
    /// The integer bound `⌊2 cosh s⌋`.
    pub bound: u64,
}

/// Largest number of first columns the enumeration accepts.
pub const MAX_COLUMNS: f64 = 4e9;

/// Number of `k ∈ ℤ` with `(Uk + P)² ≤ M`.
fn count_progression(u: i128, p: i128, m: i128) -> u64 {
    if m < 0 {
        return 0;
    }
    let r = isqrt(m as u128) as i128;
    let lo = Integer::div_ceil(&(-r - p), &u);
    let hi = Integer::div_floor(&(r - p), &u);
    (hi - lo + 1).max(0) as u64
}

/// `SL₂(ℤ)` matrices with `‖γ‖² ≤ t`, over first columns `(a, c)`. The second
/// columns are `v₀ + k(a, c)` and Lagrange's identity gives
/// `U‖v‖² = (Uk + P)² + 1` with `U = a² + c²`, `P = a b₀ + c d₀`.
fn sl2z_count(t: i128) -> u64 {
    let amax = isqrt(t as u128) as i64;
    (-amax..=amax)
        .into_par_iter()
        .map(|a| {
            let mut acc = 0u64;
            let rest = t - (a as i128) * (a as i128);
            let cmax = isqrt(rest.max(0) as u128) as i64;
            for c in -cmax..=cmax {
                let (g, x, y) = ext_gcd(a, c);
                if g.abs() != 1 {
                    continue;
                }
                // a x + c y = g, so (b₀, d₀) = g(−y, x) gives a d₀ − b₀ c = 1
                let (b0, d0) = (-(y as i128) * g as i128, x as i128 * g as i128);
                let uu = (a as i128).pow(2) + (c as i128).pow(2);
                let p = a as i128 * b0 + c as i128 * d0;
                acc += count_progression(uu, p, uu * (t - uu) - 1);
            }
            acc
        })
        .sum()
}

/// Number of `k ∈ 𝒪_K` with `N(Uk + P) ≤ M`, `U ∈ ℤ_{>0}`, in coordinates
/// `m + nω` with `N(x, y) = x² + t·xy + ν·y²`.
fn count_lattice_disk(tr: i128, nu: i128, u: i128, pm: i128, pn: i128, m: i128) -> u64 {
    if m < 0 {
        return 0;
    }
    // (2x + t y)² + (4ν − t²) y² ≤ 4M
    let f = 4 * nu - tr * tr;
    let ymax = isqrt((4 * m / f) as u128) as i128;
    let klo = Integer::div_ceil(&(-ymax - pn), &u);
    let khi = Integer::div_floor(&(ymax - pn), &u);
    let mut acc = 0;
    for k in klo..=khi {
        let y = pn + u * k;
        let disc = 4 * m - f * y * y;
        if disc < 0 {
            continue;
        }
        let r = isqrt(disc as u128) as i128;
        // |2x + ty| ≤ r
        let xlo = Integer::div_ceil(&(-r - tr * y), &2);
        let xhi = Integer::div_floor(&(r - tr * y), &2);
        if xlo > xhi {
            continue;
        }
        // x ≡ pm (mod u)
        let jlo = Integer::div_ceil(&(xlo - pm), &u);
        let jhi = Integer::div_floor(&(xhi - pm), &u);
        acc += (jhi - jlo + 1).max(0) as u64;
    }
    acc
}

fn sl2ok_count(dk: i64, t: i128) -> Result<u64> {
    let probe = ImagQuadInt::new(0, 0, dk)?;
    let d = dk as i128;
    let (tr, nu) = if d.rem_euclid(4) == 0 { (0i128, -d / 4) } else { (1, (1 - d) / 4) };
    let f = 4 * nu - tr * tr;
    // all elements of norm ≤ t
    let ymax = isqrt((4 * t / f) as u128) as i64;
    let mut elems = Vec::new();
    for y in -ymax..=ymax {
        let disc = 4 * t - f * (y as i128).pow(2);
        if disc < 0 {
            continue;
        }
        let r = isqrt(disc as u128) as i128;
        let xlo = Integer::div_ceil(&(-r - tr * y as i128), &2) as i64;
        let xhi = Integer::div_floor(&(r - tr * y as i128), &2) as i64;
        for x in xlo..=xhi {
            elems.push(probe_with(&probe, x, y));
        }
    }
    elems.sort_by_key(|e| e.norm());
    let per_a = |a: &ImagQuadInt| -> Result<u64> {
        let mut acc = 0u64;
        let na = a.norm() as i128;
        let limit = (t - na) as u64;
        let end = elems.partition_point(|e| e.norm() <= limit);
        for c in &elems[..end] {
            if a.is_zero() && c.is_zero() {
                continue;
            }
            let (g, x, y) = a.ext_gcd(c)?;
            if !g.is_unit() {
                continue;
            }
            // a x + c y = g: (b₀, d₀) = g⁻¹(−y, x)
            let gi = g.conj();
            let b0 = y.mul(&gi)?.neg();
            let d0 = x.mul(&gi)?;
            let uu = na + c.norm() as i128;
            // P = ā b₀ + c̄ d₀
            let p = a.conj().mul(&b0)?.add(&c.conj().mul(&d0)?)?;
            acc += count_lattice_disk(tr, nu, uu, p.m as i128, p.n as i128, uu * (t - uu) - 1);
        }
        Ok(acc)
    };
    elems
        .par_iter()
        .map(per_a)
        .try_reduce(|| 0, |x, y| Ok(x + y))
}

fn probe_with(p: &ImagQuadInt, m: i64, n: i64) -> ImagQuadInt {
    ImagQuadInt { m, n, field: p.field }
}

fn frobenius_bound(s: f64) -> Result<i128> {
    if !(s >= 0.0) || !s.is_finite() {
        return invalid("s must be nonnegative");
    }
    Ok((2.0 * s.cosh() * (1.0 + 1e-12)).floor() as i128)
}

fn sl_count(ring: Ring, t: i128) -> Result<u64> {
    let columns = match ring {
        Ring::Integers => PI * t as f64,
        Ring::Imaginary(dk) => {
            let area = 2.0 * PI / (dk.unsigned_abs() as f64).sqrt();
            area * area * (t as f64).powi(2) / 2.0
        }
    };
    if columns > MAX_COLUMNS {
        return Err(Error::Capacity(format!("about {columns:.3e} first columns to enumerate")));
    }
    match ring {
        Ring::Integers => Ok(sl2z_count(t)),
        Ring::Imaginary(dk) => sl2ok_count(dk, t),
    }
}

/// Counts `γ ∈ PSL₂(ring)` with `d(x₀, γx₀) ≤ s`.
pub fn ball_matrices(ring: Ring, s: f64) -> Result<BallCount> {
    let t = frobenius_bound(s)?;
    let psl = sl_count(ring, t)? / 2;
    let stabilizer = sl_count(ring, 2)? / 2;
    Ok(BallCount {
        psl,
        stabilizer,
        orbit_points: psl / stabilizer,
        bound: t as u64,
    })
}

/// Predicted leading term `C e^{(n−1)s}` for the number of `γ ∈ PSL₂(ring)`
/// with `d(x₀, γx₀) ≤ s`, with `C = Vol(𝕊^{n−1}) / (2^{n−1}(n−1) Vol)`.
pub fn ball_prediction(ring: Ring) -> Result<(f64, f64)> {
    let n = ring.dim();
    Ok((margulis(n, ring.covolume()?)?, (n - 1) as f64))
}

/// Counts over a grid of radii against the predicted growth. The count is
/// the number of group elements in the ball, so each orbit point appears as
/// many times as the order of the stabiliser of the base point.
pub fn orbit_ball_report(ring: Ring, s_grid: &[f64]) -> Result<CountReport> {
    let (c, delta) = ball_prediction(ring)?;
    let name = match ring {
        Ring::Integers => "orbit-ball-psl2z".to_string(),
        Ring::Imaginary(dk) => format!("orbit-ball-psl2-ok({dk})"),
    };
    let mut report = CountReport::new(name)
        .param("prediction_constant", c)
        .param("delta", delta);
    let mut stab = 0;
    for &s in s_grid {
        let b = ball_matrices(ring, s)?;
        stab = b.stabilizer;
        report.push(Row::new(s, b.psl, c * (delta * s).exp())?);
    }
    report = report.param("stabilizer", stab);
    if !report.rows.is_empty() {
        report.fit_with(Growth::Exponential(delta))?;
    }
    Ok(report)
}
