//! Cusp-to-cusp counts: Farey horoballs for `PSL₂(ℤ)` and their analogue for
//! the Bianchi groups of the norm-Euclidean imaginary quadratic fields.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_with, isqrt, kronecker, spf_sieve, totient_sieve};
use crate::constants::FieldData;
use crate::error::{invalid, Error, Result};

/// Largest totient sieve accepted by [`phi_summatory`].
pub const MAX_SIEVE: u64 = 400_000_000;

/// Largest norm bound accepted by [`bianchi_cusp_count`].
pub const MAX_NORM: u64 = 100_000_000;

/// `Σ_{q ≤ N} φ(q)`.
pub fn phi_summatory(n: u64) -> Result<u64> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    if n > MAX_SIEVE {
        return Err(Error::Capacity(format!("N = {n} exceeds the sieve limit {MAX_SIEVE}")));
    }
    Ok(totient_sieve(n as usize).iter().map(|&v| v as u64).sum())
}

/// `e^x` rounded down, with a relative slack absorbing the rounding of `x`.
fn floor_exp(x: f64) -> Result<u64> {
    if !(x >= 0.0) || !x.is_finite() {
        return invalid("s must be nonnegative");
    }
    let v = (x.exp() * (1.0 + 1e-12)).floor();
    if v > u64::MAX as f64 / 4.0 {
        return Err(Error::Capacity(format!("e^{x} is too large")));
    }
    Ok(v as u64)
}

/// Number of horoballs of the Farey family `{H_{p/q}}` with `0 ≤ p/q < 1`
/// at distance at most `s` from `{height ≥ 1}`: `Σ_{q ≤ e^{s/2}} φ(q)`.
pub fn mertens_count(s: f64) -> Result<u64> {
    let n = floor_exp(s / 2.0)?;
    if n == 0 {
        return Ok(0);
    }
    phi_summatory(n)
}

/// Discriminants of the norm-Euclidean imaginary quadratic fields.
pub const SUPPORTED_DK: [i64; 5] = [-3, -4, -7, -8, -11];

/// An element `m + nω` of `𝒪_K`, with `ω = √D_K/2` if `D_K ≡ 0 (mod 4)` and
/// `ω = (1 + √D_K)/2` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImagQuadInt {
    pub m: i64,
    pub n: i64,
    pub field: FieldData,
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Capacity(format!("{v} does not fit in 64 bits")))
}

impl ImagQuadInt {
    pub fn new(m: i64, n: i64, dk: i64) -> Result<Self> {
        if !SUPPORTED_DK.contains(&dk) {
            return invalid(format!("D_K = {dk} is not supported"));
        }
        Ok(ImagQuadInt { m, n, field: FieldData::new(dk)? })
    }

    fn with(&self, m: i64, n: i64) -> Self {
        ImagQuadInt { m, n, field: self.field }
    }

    pub fn dk(&self) -> i64 {
        self.field.dk
    }

    /// `(tr ω, N(ω))`.
    fn omega(&self) -> (i128, i128) {
        let d = self.field.dk as i128;
        if d.rem_euclid(4) == 0 {
            (0, -d / 4)
        } else {
            (1, (1 - d) / 4)
        }
    }

    pub fn norm(&self) -> u64 {
        let (t, nw) = self.omega();
        let (m, n) = (self.m as i128, self.n as i128);
        (m * m + t * m * n + nw * n * n) as u64
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.n == 0
    }

    pub fn is_unit(&self) -> bool {
        self.norm() == 1
    }

    pub fn conj(&self) -> Self {
        let (t, _) = self.omega();
        // ω̄ = t − ω
        self.with(self.m + t as i64 * self.n, -self.n)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(self.with(narrow(self.m as i128 + o.m as i128)?, narrow(self.n as i128 + o.n as i128)?))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(self.with(narrow(self.m as i128 - o.m as i128)?, narrow(self.n as i128 - o.n as i128)?))
    }

    pub fn neg(&self) -> Self {
        self.with(-self.m, -self.n)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        // ω² = tω − N(ω)
        let (t, nw) = self.omega();
        let (a, b, c, d) = (self.m as i128, self.n as i128, o.m as i128, o.n as i128);
        let bd = b * d;
        Ok(self.with(narrow(a * c - nw * bd)?, narrow(a * d + b * c + t * bd)?))
    }

    pub fn to_complex(&self) -> Complex64 {
        let d = self.field.dk;
        let im = (d.unsigned_abs() as f64).sqrt() / 2.0;
        let w = if d.rem_euclid(4) == 0 { Complex64::new(0.0, im) } else { Complex64::new(0.5, im) };
        self.m as f64 + w * self.n as f64
    }

    /// Whether `self` divides `o`.
    pub fn divides(&self, o: &Self) -> Result<bool> {
        if self.is_zero() {
            return Ok(o.is_zero());
        }
        let num = o.mul(&self.conj())?;
        let nn = self.norm() as i64;
        Ok(num.m % nn == 0 && num.n % nn == 0)
    }

    /// A nearest quotient `κ` with `N(self − κ o) < N(o)`.
    pub fn div_round(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return invalid("division by zero");
        }
        let num = self.mul(&o.conj())?;
        let nn = o.norm() as f64;
        let (x, y) = (num.m as f64 / nn, num.n as f64 / nn);
        let (m0, n0) = (x.round() as i64, y.round() as i64);
        let mut best: Option<(u64, Self)> = None;
        for dm in -1..=1 {
            for dn in -1..=1 {
                let k = self.with(m0 + dm, n0 + dn);
                let r = self.sub(&k.mul(o)?)?.norm();
                if best.map_or(true, |(b, _)| r < b) {
                    best = Some((r, k));
                }
            }
        }
        let (r, k) = best.expect("nonempty");
        if r >= o.norm() {
            return Err(Error::Internal("Euclidean division failed".into()));
        }
        Ok(k)
    }

    /// `(g, x, y)` with `g = x·self + y·o` a greatest common divisor.
    pub fn ext_gcd(&self, o: &Self) -> Result<(Self, Self, Self)> {
        let zero = self.with(0, 0);
        let one = self.with(1, 0);
        let (mut r0, mut r1) = (*self, *o);
        let (mut x0, mut x1) = (one, zero);
        let (mut y0, mut y1) = (zero, one);
        while !r1.is_zero() {
            let k = r0.div_round(&r1)?;
            (r0, r1) = (r1, r0.sub(&k.mul(&r1)?)?);
            (x0, x1) = (x1, x0.sub(&k.mul(&x1)?)?);
            (y0, y1) = (y1, y0.sub(&k.mul(&y1)?)?);
        }
        Ok((r0, x0, y0))
    }

    /// The units of `𝒪_K`.
    pub fn units(dk: i64) -> Result<Vec<ImagQuadInt>> {
        let mut out = Vec::new();
        for m in -2..=2 {
            for n in -2..=2 {
                let u = ImagQuadInt::new(m, n, dk)?;
                if u.is_unit() {
                    out.push(u);
                }
            }
        }
        Ok(out)
    }
}

impl std::fmt::Display for ImagQuadInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}ω", self.m, self.n)
    }
}

/// `φ_K(q) = N(q) ∏_{𝔭 | q} (1 − 1/N𝔭)` from the splitting of each rational
/// prime `p | N(q)`: inert primes contribute `1 − p⁻²`, ramified primes
/// `1 − p⁻¹`, and split primes `1 − p⁻¹` or `(1 − p⁻¹)²` according as one or
/// both conjugate factors divide `q`, the latter exactly when `p | q`.
fn phi_from_factors(dk: i64, m: i64, n: i64, norm: u64, factors: &[(u64, u32)]) -> u64 {
    let mut phi = norm;
    let g = m.gcd(&n).unsigned_abs();
    for &(p, _) in factors {
        match kronecker(dk, p) {
            -1 => phi = phi / (p * p) * (p * p - 1),
            0 => phi = phi / p * (p - 1),
            _ => {
                phi = phi / p * (p - 1);
                if g % p == 0 {
                    phi = phi / p * (p - 1);
                }
            }
        }
    }
    phi
}

/// Number of units modulo `q`.
pub fn phi_k(q: &ImagQuadInt) -> Result<u64> {
    if q.is_zero() {
        return invalid("φ_K(0) is undefined");
    }
    let norm = q.norm();
    let f = crate::arith::factor(norm);
    Ok(phi_from_factors(q.dk(), q.m, q.n, norm, &f))
}

/// Number of `Γ_∞`-classes modulo translations by `𝒪_K` of horoballs in the
/// `PSL₂(𝒪_K)`-orbit of `{height ≥ 1}`, other than itself, at distance at
/// most `s` from it.
///
/// The image under `(p, ∗; q, ∗)` is tangent at `p/q` with Euclidean diameter
/// `1/N(q)`, at distance `ln N(q)`. Classes are pairs `(q, p mod q)` with `p`
/// coprime to `q`, taken up to the diagonal action of the units, so the count
/// is `Σ_{0 < N(q) ≤ e^s} φ_K(q) / |𝒪_K^×|`.
pub fn bianchi_cusp_count(dk: i64, s: f64) -> Result<u64> {
    let field = ImagQuadInt::new(0, 0, dk)?.field;
    let x = floor_exp(s)?;
    if x > MAX_NORM {
        return Err(Error::Capacity(format!("norm bound {x} exceeds {MAX_NORM}")));
    }
    let spf = spf_sieve(x as usize);
    let probe = ImagQuadInt::new(0, 0, dk)?;
    let (t, nw) = probe.omega();
    // N(m + nω) = (m + tn/2)² + (N(ω) − t²/4) n², so |n| ≤ √(4x/(4N(ω) − t²))
    let n_max = isqrt((4 * x as u128) / (4 * nw - t * t) as u128) as i64 + 1;
    let total: u64 = (-n_max..=n_max)
        .into_par_iter()
        .map(|n| {
            // m² + t n m + N(ω) n² ≤ x
            let nn = n as i128;
            let disc = t * t * nn * nn - 4 * (nw * nn * nn - x as i128);
            if disc < 0 {
                return 0;
            }
            let r = isqrt(disc as u128) as i128;
            let lo = Integer::div_ceil(&(-t * nn - r), &2) as i64;
            let hi = Integer::div_floor(&(-t * nn + r), &2) as i64;
            let mut acc = 0u64;
            for m in lo..=hi {
                let norm = (m as i128 * m as i128 + t * m as i128 * nn + nw * nn * nn) as u64;
                if norm == 0 || norm > x {
                    continue;
                }
                let f = factor_with(&spf, norm as usize);
                acc += phi_from_factors(dk, m, n, norm, &f);
            }
            acc
        })
        .sum();
    let w = field.units as u64;
    debug_assert_eq!(total % w, 0);
    Ok(total / w)
}
