use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{narrow, BinaryQF, Mat2};
use crate::arith::{factor_with, isqrt, spf_sieve, sqrt_mod};
use crate::error::{invalid, Error, Result};

/// `0 < b < √Δ` and `√Δ − b < 2|a| < √Δ + b`, decided in integers.
pub fn is_reduced(q: &BinaryQF) -> bool {
    let d = q.disc();
    let (a, b) = (q.a.unsigned_abs() as i128, q.b as i128);
    if d <= 0 || b <= 0 || b * b >= d {
        return false;
    }
    let hi = 2 * a + b;
    let lo = 2 * a - b;
    d < hi * hi && (lo < 0 || lo * lo < d)
}

/// One step `(a, b, c) ↦ (c, r, (r² − Δ)/(4c))` with `r ≡ −b (mod 2c)` chosen
/// in `(−|c|, |c|]` when `|c| > √Δ` and in `(√Δ − 2|c|, √Δ)` otherwise. The
/// new form is `Q ∘ (0, −1; 1, δ)` with `r = −b + 2cδ`.
fn rho(q: &BinaryQF, d: i128, root: i128) -> Result<(BinaryQF, i64)> {
    let (b, c) = (q.b as i128, q.c as i128);
    let m = 2 * c.abs();
    let r = if c * c > d {
        // representative of −b in (−|c|, |c|]
        let mut r = (-b).rem_euclid(m);
        if r > c.abs() {
            r -= m;
        }
        r
    } else {
        // representative of −b in [root − 2|c| + 1, root]
        let lo = root - m + 1;
        lo + (-b - lo).rem_euclid(m)
    };
    let delta = (r + b) / (2 * c);
    let next = BinaryQF {
        a: q.c,
        b: narrow(r)?,
        c: narrow((r * r - d) / (4 * c))?,
    };
    Ok((next, narrow(delta)?))
}

fn disc_and_root(q: &BinaryQF) -> Result<(i128, i128)> {
    let d = q.disc();
    if d <= 0 {
        return invalid("form must be indefinite");
    }
    if crate::arith::is_square(d) {
        return invalid(format!("discriminant {d} is a perfect square"));
    }
    Ok((d, isqrt(d as u128) as i128))
}

const MAX_STEPS: usize = 1_000_000;

/// Reduces `Q` and returns `(R, W)` with `R = Q ∘ W` reduced.
pub fn reduce(q: &BinaryQF) -> Result<(BinaryQF, Mat2)> {
    let (d, root) = disc_and_root(q)?;
    let mut cur = *q;
    let mut w = Mat2::IDENTITY;
    for _ in 0..MAX_STEPS {
        if is_reduced(&cur) {
            return Ok((cur, w));
        }
        let (next, delta) = rho(&cur, d, root)?;
        w = w.mul(&Mat2::new(0, -1, 1, delta))?;
        cur = next;
    }
    Err(Error::Internal("reduction did not terminate".into()))
}

fn reduce_form(q: &BinaryQF, d: i128, root: i128) -> Result<BinaryQF> {
    let mut cur = *q;
    for _ in 0..MAX_STEPS {
        if is_reduced(&cur) {
            return Ok(cur);
        }
        cur = rho(&cur, d, root)?.0;
    }
    Err(Error::Internal("reduction did not terminate".into()))
}

/// The cycle of reduced forms in the proper equivalence class of `Q`,
/// starting from the reduced form reached from `Q`.
pub fn reduction_cycle(q: &BinaryQF) -> Result<Vec<BinaryQF>> {
    Ok(cycle_with_steps(q)?.into_iter().map(|(f, _)| f).collect())
}

/// Cycle forms together with `P_j` such that `R_j = R_0 ∘ P_j`.
fn cycle_with_steps(q: &BinaryQF) -> Result<Vec<(BinaryQF, Mat2)>> {
    let (d, root) = disc_and_root(q)?;
    let (start, _) = reduce(q)?;
    let mut out = vec![(start, Mat2::IDENTITY)];
    let mut cur = start;
    let mut p = Mat2::IDENTITY;
    for _ in 0..MAX_STEPS {
        let (next, delta) = rho(&cur, d, root)?;
        if next == start {
            return Ok(out);
        }
        p = p.mul(&Mat2::new(0, -1, 1, delta))?;
        out.push((next, p));
        cur = next;
    }
    Err(Error::Internal("reduction cycle did not close".into()))
}

/// Proper (`SL₂(ℤ)`) equivalence of indefinite forms.
pub fn equivalent(q1: &BinaryQF, q2: &BinaryQF) -> Result<bool> {
    if q1.disc() != q2.disc() {
        return Ok(false);
    }
    Ok(equivalence_witness(q1, q2)?.is_some())
}

/// A matrix `γ ∈ SL₂(ℤ)` with `q1 ∘ γ = q2`, if one exists.
pub fn equivalence_witness(q1: &BinaryQF, q2: &BinaryQF) -> Result<Option<Mat2>> {
    if q1.disc() != q2.disc() {
        return Ok(None);
    }
    let cycle = cycle_with_steps(q1)?;
    let (_, w1) = reduce(q1)?;
    let (r2, w2) = reduce(q2)?;
    for (f, p) in cycle {
        if f == r2 {
            // q1∘W1 = R0, R0∘P = R2, q2∘W2 = R2  ⟹  q1∘(W1 P W2⁻¹) = q2
            return Ok(Some(w1.mul(&p)?.mul(&w2.inv())?));
        }
    }
    Ok(None)
}

/// A form in the `PSL₂(ℤ)`-orbit of `±Q₀`, normalised modulo translation so
/// that the center `−b/(2a)` of its geodesic lies in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitForm {
    pub form: BinaryQF,
    /// `+1` if equivalent to `Q₀`, `−1` if equivalent to `−Q₀`.
    pub sign: i8,
}

impl OrbitForm {
    /// The root `(−b + √Δ)/(2a)`.
    pub fn root(&self) -> f64 {
        self.form.roots().expect("indefinite").0
    }

    pub fn center(&self) -> f64 {
        -(self.form.b as f64) / (2.0 * self.form.a as f64)
    }
}

/// All forms `(a', b', c')` of discriminant `Δ(Q₀)` with `0 < |a'| ≤ a_max`,
/// center in `[0, 1)`, properly equivalent to `Q₀` or `−Q₀`, sorted.
///
/// For fixed `a'` the admissible `b'` are the solutions of `b'² ≡ Δ (mod 4|a'|)`,
/// which are well defined modulo `2|a'|`.
pub fn orbit_forms(q0: &BinaryQF, a_max: u64) -> Result<Vec<OrbitForm>> {
    let (d, root) = disc_and_root(q0)?;
    if !q0.is_primitive() {
        return invalid("form is not primitive");
    }
    if a_max > 50_000_000 {
        return Err(Error::Capacity(format!("a' bound {a_max} too large")));
    }
    let mut classes: HashMap<BinaryQF, i8> = HashMap::new();
    for (sign, q) in [(1i8, *q0), (-1, q0.neg())] {
        for f in reduction_cycle(&q)? {
            classes.entry(f).or_insert(sign);
        }
    }
    let spf = spf_sieve(a_max as usize);
    let delta = narrow(d)?;
    let mut out: Vec<OrbitForm> = (1..=a_max)
        .into_par_iter()
        .map(|a| -> Result<Vec<OrbitForm>> {
            let mut fac = factor_with(&spf, a as usize);
            match fac.first_mut() {
                Some((2, e)) => *e += 2,
                _ => fac.insert(0, (2, 2)),
            }
            let m = 2 * a;
            let mut residues: Vec<u64> = sqrt_mod(delta, &fac).into_iter().map(|r| r % m).collect();
            residues.sort_unstable();
            residues.dedup();
            let mut found = Vec::new();
            for r in residues {
                let ai = a as i128;
                // a' > 0: b' ∈ (−2a', 0];  a' < 0: b' ∈ [0, 2|a'|)
                let b_pos = if r == 0 { 0 } else { r as i128 - 2 * ai };
                for (aa, bb) in [(ai, b_pos), (-ai, r as i128)] {
                    let cc = (bb * bb - d) / (4 * aa);
                    let f = BinaryQF {
                        a: narrow(aa)?,
                        b: narrow(bb)?,
                        c: narrow(cc)?,
                    };
                    if !f.is_primitive() {
                        continue;
                    }
                    if let Some(&sign) = classes.get(&reduce_form(&f, d, root)?) {
                        found.push(OrbitForm { form: f, sign });
                    }
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.sort();
    Ok(out)
}

fn height_bound(s: f64, delta: i128) -> Result<u64> {
    if !(s > 0.0) || !s.is_finite() {
        return invalid("s must be positive");
    }
    Ok((s * (delta as f64).sqrt() / 2.0 * (1.0 + 1e-12)).floor() as u64)
}

/// Number of quadratic irrationals `α` in the `PSL₂(ℤ)`-orbit of the roots of
/// `Q₀`, modulo translation by `ℤ`, with `h(α) = 2/|α − α^σ| ≤ s`.
///
/// `α` is the root `(−b' + √Δ)/(2a')` of a unique primitive form `Q'` and
/// `h(α) = 2|a'|/√Δ`; the roots of `Q₀` are the first roots of `Q₀` and `−Q₀`.
pub fn count_orbit_irrationals(q0: &BinaryQF, s: f64) -> Result<u64> {
    let d = q0.check_indefinite()?;
    let bound = height_bound(s, d)?;
    Ok(orbit_forms(q0, bound)?.len() as u64)
}

/// Horizontal coordinates in `[0, 1)` of the feet on the horosphere of
/// height 1 of the common perpendiculars of length in `(0, s]` from the
/// horoball `{height ≥ 1}` to the `PSL₂(ℤ)`-orbit of `C_Q`, modulo `ℤ`.
///
/// Each geodesic is the zero set of a pair `±Q'`; taking `a' > 0` picks one,
/// and its perpendicular has length `ln(2a'/√Δ)` and foot over `−b'/(2a')`.
pub fn feet_distribution(q: &BinaryQF, s: f64) -> Result<Vec<f64>> {
    let d = q.check_indefinite()?;
    if !(s > 0.0) {
        return invalid("s must be positive");
    }
    let a_max = ((d as f64).sqrt() / 2.0 * s.exp() * (1.0 + 1e-12)).floor() as u64;
    let forms = orbit_forms(q, a_max)?;
    let mut feet: Vec<f64> = forms
        .iter()
        .filter(|f| f.form.a > 0 && 4 * (f.form.a as i128) * (f.form.a as i128) > d)
        .map(|f| f.center())
        .collect();
    feet.sort_by(f64::total_cmp);
    Ok(feet)
}

/// Distinct forms of the orbit as a set, for checks.
pub(crate) fn _orbit_set(forms: &[OrbitForm]) -> HashSet<BinaryQF> {
    forms.iter().map(|f| f.form).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sl2<R: Rng>(rng: &mut R, steps: usize) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        for _ in 0..steps {
            let k = rng.gen_range(-3..=3);
            let g = if rng.gen_bool(0.5) { Mat2::new(1, k, 0, 1) } else { Mat2::new(1, 0, k, 1) };
            m = m.mul(&g).unwrap();
        }
        m
    }

    #[test]
    fn golden_form_cycle() {
        let q = BinaryQF::new(1, -1, -1);
        let cycle = reduction_cycle(&q).unwrap();
        assert!(!cycle.is_empty());
        assert!(cycle.iter().all(is_reduced));
        assert!(equivalent(&q, &q).unwrap());
        assert!(!equivalent(&q, &BinaryQF::new(1, 0, -2)).unwrap());
        assert!(reduction_cycle(&BinaryQF::new(1, 0, -1)).is_err());
    }

    #[test]
    fn equivalence_under_action() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for q in [BinaryQF::new(1, -1, -1), BinaryQF::new(3, 5, -7), BinaryQF::new(1, 0, -3), BinaryQF::new(2, 0, -5)] {
            for _ in 0..100 {
                let g = random_sl2(&mut rng, 6);
                let q2 = q.act(&g).unwrap();
                let w = equivalence_witness(&q, &q2).unwrap().expect("equivalent");
                assert_eq!(w.det(), 1);
                assert_eq!(q.act(&w).unwrap(), q2);
            }
        }
        // x² − 3y² and −x² + 3y² are not properly equivalent
        assert!(!equivalent(&BinaryQF::new(1, 0, -3), &BinaryQF::new(-1, 0, 3)).unwrap());
    }

    #[test]
    fn orbit_forms_brute_force() {
        for q0 in [BinaryQF::new(1, -1, -1), BinaryQF::new(1, 0, -3), BinaryQF::new(2, 1, -2)] {
            let d = q0.disc();
            let a_max = 40i64;
            let mut expect = Vec::new();
            for a in (-a_max..=a_max).filter(|&a| a != 0) {
                for b in -2 * a_max..=2 * a_max {
                    let center2 = -b as f64 / (2.0 * a as f64);
                    if !(0.0..1.0).contains(&center2) {
                        continue;
                    }
                    let num = b as i128 * b as i128 - d;
                    if num % (4 * a as i128) != 0 {
                        continue;
                    }
                    let f = BinaryQF::new(a, b, (num / (4 * a as i128)) as i64);
                    if f.is_primitive() && (equivalent(&f, &q0).unwrap() || equivalent(&f, &q0.neg()).unwrap()) {
                        expect.push(f);
                    }
                }
            }
            expect.sort();
            let mut got: Vec<BinaryQF> = orbit_forms(&q0, a_max as u64).unwrap().into_iter().map(|f| f.form).collect();
            got.sort();
            assert_eq!(got, expect, "{q0}");
        }
    }

    #[test]
    fn irrationals_monotone_and_witnessed() {
        let q0 = BinaryQF::new(1, -1, -1);
        let mut prev = 0;
        for s in [1.0, 5.0, 20.0, 80.0] {
            let c = count_orbit_irrationals(&q0, s).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        for f in orbit_forms(&q0, 30).unwrap() {
            let target = if f.sign > 0 { q0 } else { q0.neg() };
            let w = equivalence_witness(&target, &f.form).unwrap().unwrap();
            assert_eq!(target.act(&w).unwrap(), f.form);
            assert!((0.0..1.0).contains(&f.center()));
        }
    }

    #[test]
    fn feet_in_unit_interval() {
        let q = BinaryQF::new(1, -1, -1);
        let feet = feet_distribution(&q, 6.0).unwrap();
        assert!(!feet.is_empty());
        assert!(feet.iter().all(|x| (0.0..1.0).contains(x)));
    }
}
