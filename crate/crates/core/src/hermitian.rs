//! Indefinite binary Hermitian forms over `ℤ[i]` and the circles they cut out
//! on the boundary of `ℍ³`.

use std::collections::HashSet;

use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::isqrt;
use crate::constants::hermitian_qi_constant;
use crate::error::{invalid, Error, Result};
use crate::report::{fit_power, CountReport, Fit, Growth, Row};

/// A Gaussian integer.
pub type Gauss = Complex<i64>;

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Capacity(format!("{v} does not fit in 64 bits")))
}

fn wide(z: Gauss) -> Complex<i128> {
    Complex::new(z.re as i128, z.im as i128)
}

fn narrow_c(z: Complex<i128>) -> Result<Gauss> {
    Ok(Complex::new(narrow(z.re)?, narrow(z.im)?))
}

/// A matrix `(a, b; c, d)` over `ℤ[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussMat {
    pub a: Gauss,
    pub b: Gauss,
    pub c: Gauss,
    pub d: Gauss,
}

impl GaussMat {
    pub const fn new(a: Gauss, b: Gauss, c: Gauss, d: Gauss) -> Self {
        GaussMat { a, b, c, d }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::new(1, 0), Complex::new(0, 0));
        GaussMat::new(o, z, z, o)
    }

    /// `z ↦ z + w`.
    pub fn translation(w: Gauss) -> Self {
        let (o, z) = (Complex::new(1, 0), Complex::new(0, 0));
        GaussMat::new(o, w, z, o)
    }

    /// `z ↦ −1/z`.
    pub fn inversion() -> Self {
        let (o, z) = (Complex::new(1, 0), Complex::new(0, 0));
        GaussMat::new(z, -o, o, z)
    }

    /// `z ↦ −z`, from `diag(i, −i)`.
    pub fn rotation() -> Self {
        let z = Complex::new(0, 0);
        GaussMat::new(Complex::new(0, 1), z, z, Complex::new(0, -1))
    }

    pub fn det(&self) -> Complex<i128> {
        wide(self.a) * wide(self.d) - wide(self.b) * wide(self.c)
    }

    pub fn mul(&self, o: &GaussMat) -> Result<GaussMat> {
        let (a, b, c, d) = (wide(self.a), wide(self.b), wide(self.c), wide(self.d));
        let (e, f, g, h) = (wide(o.a), wide(o.b), wide(o.c), wide(o.d));
        Ok(GaussMat::new(
            narrow_c(a * e + b * g)?,
            narrow_c(a * f + b * h)?,
            narrow_c(c * e + d * g)?,
            narrow_c(c * f + d * h)?,
        ))
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv(&self) -> GaussMat {
        GaussMat::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn to_complex(&self) -> [Complex64; 4] {
        let f = |z: Gauss| Complex64::new(z.re as f64, z.im as f64);
        [f(self.a), f(self.b), f(self.c), f(self.d)]
    }
}

/// The form `f(u, v) = a|u|² + 2 Re(b ū v) + c|v|²` with matrix `(a, b; b̄, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HermForm {
    pub a: i64,
    pub b: Gauss,
    pub c: i64,
}

impl HermForm {
    pub fn new(a: i64, b: Gauss, c: i64) -> Self {
        HermForm { a, b, c }
    }

    /// `Δ(f) = |b|² − ac`.
    pub fn disc(&self) -> i128 {
        wide(self.b).norm_sqr() - self.a as i128 * self.c as i128
    }

    pub fn eval(&self, u: Gauss, v: Gauss) -> i128 {
        let (u, v) = (wide(u), wide(v));
        let cross = (wide(self.b) * u.conj() * v).re;
        self.a as i128 * u.norm_sqr() + 2 * cross + self.c as i128 * v.norm_sqr()
    }

    /// Value at a complex point `(z, 1)`.
    pub fn eval_complex(&self, z: Complex64) -> f64 {
        let b = Complex64::new(self.b.re as f64, self.b.im as f64);
        self.a as f64 * z.norm_sqr() + 2.0 * (b * z.conj()).re + self.c as f64
    }

    pub fn neg(&self) -> HermForm {
        HermForm::new(-self.a, -self.b, -self.c)
    }

    /// `f ∘ g`, with matrix `g* M(f) g`.
    pub fn act(&self, g: &GaussMat) -> Result<HermForm> {
        if g.det() != Complex::new(1, 0) {
            return invalid("g must have determinant 1");
        }
        let (p, q, r, t) = (wide(g.a), wide(g.c), wide(g.b), wide(g.d));
        let (a, b, c) = (self.a as i128, wide(self.b), self.c as i128);
        let b12 = p.conj() * (r * a + b * t) + q.conj() * (b.conj() * r + t * c);
        Ok(HermForm {
            a: narrow(self.eval(g.a, g.c))?,
            b: narrow_c(b12)?,
            c: narrow(self.eval(g.b, g.d))?,
        })
    }

    fn check_indefinite(&self) -> Result<i128> {
        let d = self.disc();
        if d <= 0 {
            return invalid(format!("Δ(f) = {d} is not positive"));
        }
        Ok(d)
    }
}

impl std::fmt::Display for HermForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}{:+}i, {})", self.a, self.b.re, self.b.im, self.c)
    }
}

/// The zero set of `f(z, 1)` on `ℂ ∪ {∞}`, oriented by the sign of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitCircle {
    /// Center `−b/a` and squared radius `Δ/a²`, kept as the exact data
    /// `(a, b, Δ)`; the sign of `a` records on which side `f` is negative.
    Circle { a: i64, b: Gauss, delta: i64 },
    /// `a = 0`: the line `2 Re(b z̄) + c = 0` through `∞`.
    Line,
}

impl OrbitCircle {
    pub fn center(&self) -> Option<Complex64> {
        match *self {
            OrbitCircle::Circle { a, b, .. } => Some(Complex64::new(-b.re as f64, -b.im as f64) / a as f64),
            OrbitCircle::Line => None,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            OrbitCircle::Circle { a, delta, .. } => (delta as f64).sqrt() / a.unsigned_abs() as f64,
            OrbitCircle::Line => f64::INFINITY,
        }
    }

    /// Key modulo the translations `z ↦ z + ℤ[i]`: `b` reduced into `[0, |a|)²`,
    /// which moves the center into a fixed unit cell.
    pub fn key(&self) -> Option<CircleKey> {
        match *self {
            OrbitCircle::Circle { a, b, .. } => Some(CircleKey::new(a, b)),
            OrbitCircle::Line => None,
        }
    }
}

/// Exact key of an oriented circle modulo translations, ordered by `|a|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircleKey {
    pub a: i64,
    pub b_re: i64,
    pub b_im: i64,
}

impl Ord for CircleKey {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.a.unsigned_abs(), self.a, self.b_re, self.b_im).cmp(&(o.a.unsigned_abs(), o.a, o.b_re, o.b_im))
    }
}

impl PartialOrd for CircleKey {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl CircleKey {
    fn new(a: i64, b: Gauss) -> Self {
        let m = a.abs();
        CircleKey { a, b_re: b.re.rem_euclid(m), b_im: b.im.rem_euclid(m) }
    }

    pub fn b(&self) -> Gauss {
        Complex::new(self.b_re, self.b_im)
    }

    /// The form with this key, normalised as above.
    fn form(&self, delta: i128) -> HermForm {
        let c = (wide(self.b()).norm_sqr() - delta) / self.a as i128;
        HermForm::new(self.a, self.b(), c as i64)
    }

    pub fn circle(&self, delta: i64) -> OrbitCircle {
        OrbitCircle::Circle { a: self.a, b: self.b(), delta }
    }
}

/// The circle `{z : f(z, 1) = 0}`.
pub fn circle_of(f: &HermForm) -> Result<OrbitCircle> {
    let d = f.check_indefinite()?;
    if f.a == 0 {
        return Ok(OrbitCircle::Line);
    }
    Ok(OrbitCircle::Circle { a: f.a, b: f.b, delta: narrow(d)? })
}

/// Signed distance `ln(|a(f∘g)| / (τ√Δ))` from the horoball `{height ≥ 1/τ}`
/// to the hemisphere over the circle of `f∘g`, whose top is at height
/// `√Δ/|a(f∘g)|`.
pub fn perp_length_herm(f: &HermForm, g: &GaussMat, tau: f64) -> Result<f64> {
    let d = f.check_indefinite()?;
    if !(tau > 0.0) {
        return invalid("τ must be positive");
    }
    let fg = f.act(g)?;
    if fg.a == 0 {
        return invalid("the circle of f∘g passes through ∞");
    }
    Ok((fg.a.unsigned_abs() as f64 / (tau * (d as f64).sqrt())).ln())
}

/// Largest number of visited circles.
pub const MAX_VISITED: usize = 60_000_000;

fn key_of(f: &HermForm) -> Option<CircleKey> {
    if f.a == 0 {
        return None;
    }
    Some(CircleKey::new(f.a, f.b))
}

/// Keys of the circles `f∘T_w∘S` (`T_w: z ↦ z + w`, `S: z ↦ −1/z`) with
/// `0 < |a| ≤ a_cap`, together with the rotated circle `f∘diag(i, −i)`.
///
/// `a(f∘T_w∘S) = f(w, 1) = a|w − z₀|² − Δ/a` with `z₀ = −b/a`, so `w` runs
/// over the Gaussian integers in the annulus `||w − z₀|² − Δ/a²| ≤ a_cap/a`.
fn neighbours(key: &CircleKey, delta: i128, a_cap: i64) -> Result<Vec<CircleKey>> {
    let f = key.form(delta);
    // a·f(w, 1) = |a w + b|² − Δ = ||a| w + sgn(a) b|² − Δ
    let a = f.a.unsigned_abs() as i128;
    let sg = f.a.signum() as i128;
    let mut out = Vec::new();
    if let Some(k) = key_of(&HermForm::new(f.a, -f.b, f.c)) {
        out.push(k);
    }
    // a·f(w,1) = |a w + b|² − Δ, so we need |a w + b|² ≤ Δ + a·a_cap
    let outer = delta + a * a_cap as i128;
    let r = isqrt(outer as u128) as i128;
    let (br, bi) = (sg * f.b.re as i128, sg * f.b.im as i128);
    // a x + b_re ∈ [−r, r]
    let xlo = num_integer::Integer::div_ceil(&(-r - br), &a);
    let xhi = num_integer::Integer::div_floor(&(r - br), &a);
    let s = GaussMat::inversion();
    for x in xlo..=xhi {
        let px = a * x + br;
        let rem = outer - px * px;
        if rem < 0 {
            continue;
        }
        let ry = isqrt(rem as u128) as i128;
        let ylo = num_integer::Integer::div_ceil(&(-ry - bi), &a);
        let yhi = num_integer::Integer::div_floor(&(ry - bi), &a);
        for y in ylo..=yhi {
            let py = a * y + bi;
            let value = px * px + py * py - delta; // a·f(w, 1)
            if value == 0 || value.abs() > a * a_cap as i128 {
                continue;
            }
            let w = Complex::new(narrow(x)?, narrow(y)?);
            let img = f.act(&GaussMat::translation(w).mul(&s)?)?;
            if let Some(k) = key_of(&img) {
                out.push(k);
            }
        }
    }
    Ok(out)
}

/// Breadth-first search of the circles of `f∘g`, `g ∈ SL₂(ℤ[i])`, modulo
/// translations, keeping circles with `|a| ≤ a_cap`. Returns the sorted keys.
fn bfs(f: &HermForm, a_cap: i64) -> Result<Vec<CircleKey>> {
    let delta = f.check_indefinite()?;
    if a_cap >= 1 << 31 {
        return Err(Error::Capacity(format!("bound {a_cap} too large")));
    }
    let mut visited: HashSet<CircleKey> = HashSet::new();
    let mut frontier: Vec<CircleKey> = Vec::new();
    let seed = |k: CircleKey, visited: &mut HashSet<CircleKey>, frontier: &mut Vec<CircleKey>| {
        if k.a.abs() <= a_cap && visited.insert(k) {
            frontier.push(k);
        }
    };
    match key_of(f) {
        Some(k) => seed(k, &mut visited, &mut frontier),
        None => {
            // a line: one inversion step gives circles
            for k in neighbours_of_form(f, a_cap)? {
                seed(k, &mut visited, &mut frontier);
            }
        }
    }
    while !frontier.is_empty() {
        let found: Vec<Vec<CircleKey>> = frontier
            .par_iter()
            .map(|k| neighbours(k, delta, a_cap))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for k in found.into_iter().flatten() {
            seed(k, &mut visited, &mut next);
        }
        if visited.len() > MAX_VISITED {
            return Err(Error::Capacity(format!("more than {MAX_VISITED} circles visited")));
        }
        next.sort();
        frontier = next;
    }
    let mut out: Vec<CircleKey> = visited.into_iter().collect();
    out.sort();
    Ok(out)
}

fn neighbours_of_form(f: &HermForm, a_cap: i64) -> Result<Vec<CircleKey>> {
    let mut out = Vec::new();
    for x in -3..=3 {
        for y in -3..=3 {
            let g = GaussMat::translation(Complex::new(x, y)).mul(&GaussMat::inversion())?;
            if let Some(k) = key_of(&f.act(&g)?) {
                if k.a.abs() <= a_cap {
                    out.push(k);
                }
            }
        }
    }
    Ok(out)
}

fn bound_from_radius(delta: i128, r_min: f64) -> Result<i64> {
    if !(r_min > 0.0) || !r_min.is_finite() {
        return invalid("r_min must be positive");
    }
    let a = ((delta as f64).sqrt() / r_min * (1.0 + 1e-12)).floor();
    if a >= (1u64 << 31) as f64 {
        return Err(Error::Capacity(format!("radius {r_min} too small")));
    }
    Ok(a as i64)
}

/// Circles of the orbit with `|a| ≤ a_max`, searched with the pruning bound
/// `slack·a_max` and again with `2·slack·a_max`; the two results must agree.
pub fn orbit_circle_keys(f: &HermForm, a_max: i64, slack: f64) -> Result<Vec<CircleKey>> {
    if !(slack >= 1.0) || !slack.is_finite() {
        return invalid("slack must be at least 1");
    }
    if a_max < 1 {
        return Ok(Vec::new());
    }
    let cap = |m: f64| -> i64 { (a_max as f64 * m).floor() as i64 };
    let keep = |v: Vec<CircleKey>| -> Vec<CircleKey> { v.into_iter().filter(|k| k.a.abs() <= a_max).collect() };
    let first = keep(bfs(f, cap(slack))?);
    let second = keep(bfs(f, cap(2.0 * slack))?);
    if first != second {
        return Err(Error::Stabilization(format!(
            "{} circles with slack {slack}, {} with slack {}",
            first.len(),
            second.len(),
            2.0 * slack
        )));
    }
    Ok(first)
}

/// Circles of radius at least `r_min` in the `SL₂(ℤ[i])`-orbit of the circle
/// of `f`, one per class modulo `ℤ[i]`-translations.
pub fn orbit_circles(f: &HermForm, r_min: f64, slack: f64) -> Result<Vec<OrbitCircle>> {
    let delta = f.check_indefinite()?;
    let a_max = bound_from_radius(delta, r_min)?;
    let d = narrow(delta)?;
    Ok(orbit_circle_keys(f, a_max, slack)?.into_iter().map(|k| k.circle(d)).collect())
}

/// Counts `N(s) = #{circles with |a| ≤ s}` over a grid against
/// `C s²` with `C` the constant evaluated from `ι(f)` and `ζ_{ℚ(i)}(2)`.
/// Reports the fitted exponent as a parameter and the fitted constant of `s²`.
pub fn herm_count_report(f: &HermForm, s_grid: &[f64], slack: f64) -> Result<CountReport> {
    let delta = f.check_indefinite()?;
    let c = hermitian_qi_constant(f.a, f.c, narrow(delta)?)?;
    let s_max = s_grid.iter().copied().fold(0.0, f64::max);
    let keys = orbit_circle_keys(f, (s_max * (1.0 + 1e-12)).floor() as i64, slack)?;
    let mut report = CountReport::new("hermitian-circles")
        .param("form", f)
        .param("slack", slack)
        .param("prediction_constant", c);
    for &s in s_grid {
        if !(s > 0.0) {
            return invalid("s must be positive");
        }
        let bound = (s * (1.0 + 1e-12)).floor() as i64;
        let count = keys.partition_point(|k| k.a.abs() <= bound) as u64;
        report.push(Row::new(s, count, c * s * s)?);
    }
    if report.rows.len() >= 2 {
        let (k, _) = fit_power(&report.rows)?;
        report = report.param("fitted_exponent", k);
        let _: Fit = report.fit_with(Growth::Power(2.0))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dist_between, BoundaryPoint, GeomObject, Geodesic, Horoball};
    use rand::{Rng, SeedableRng};

    fn gi(re: i64, im: i64) -> Gauss {
        Complex::new(re, im)
    }

    fn random_word<R: Rng>(rng: &mut R, len: usize) -> GaussMat {
        let mut g = GaussMat::identity();
        for _ in 0..len {
            let h = match rng.gen_range(0..5) {
                0 => GaussMat::translation(gi(1, 0)),
                1 => GaussMat::translation(gi(-1, 0)),
                2 => GaussMat::translation(gi(0, 1)),
                3 => GaussMat::translation(gi(0, -1)),
                _ => GaussMat::inversion(),
            };
            g = g.mul(&h).unwrap();
        }
        g
    }

    fn unit_form() -> HermForm {
        HermForm::new(1, gi(0, 0), -1)
    }

    #[test]
    fn action_laws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = HermForm::new(2, gi(1, 3), -5);
        assert_eq!(f.act(&GaussMat::identity()).unwrap(), f);
        for _ in 0..1000 {
            let g = random_word(&mut rng, 8);
            let h = random_word(&mut rng, 4);
            let fg = f.act(&g).unwrap();
            assert_eq!(fg.disc(), f.disc());
            assert_eq!(f.act(&g.mul(&h).unwrap()).unwrap(), fg.act(&h).unwrap());
            // (f∘g)(u, v) = f(g(u, v))
            let (u, v) = (gi(2, -1), gi(1, 1));
            let gu = g.a * u + g.b * v;
            let gv = g.c * u + g.d * v;
            assert_eq!(fg.eval(u, v), f.eval(gu, gv));
        }
    }

    #[test]
    fn circles() {
        let c = circle_of(&unit_form()).unwrap();
        assert_eq!(c.center().unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(c.radius(), 1.0);
        assert_eq!(circle_of(&HermForm::new(0, gi(1, 0), 3)).unwrap(), OrbitCircle::Line);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let f = HermForm::new(rng.gen_range(-9..9), gi(rng.gen_range(-9..9), rng.gen_range(-9..9)), rng.gen_range(-9..9));
            if f.disc() <= 0 || f.a == 0 {
                continue;
            }
            let c = circle_of(&f).unwrap();
            assert!((c.radius() - (f.disc() as f64).sqrt() / f.a.abs() as f64).abs() < 1e-12);
            for k in 0..8 {
                let th = k as f64 * 0.7;
                let z = c.center().unwrap() + Complex64::from_polar(c.radius(), th);
                assert!(f.eval_complex(z).abs() < 1e-9 * (1.0 + f.a.abs() as f64 * c.radius().powi(2)));
            }
        }
    }

    #[test]
    fn perpendicular_two_routes() {
        let f = unit_form();
        assert!(perp_length_herm(&f, &GaussMat::identity(), 1.0).unwrap().abs() < 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..1000 {
            let f = HermForm::new(1, gi(1, 1), -3);
            let g = random_word(&mut rng, 6);
            let fg = f.act(&g).unwrap();
            if fg.a == 0 {
                assert!(perp_length_herm(&f, &g, 1.0).is_err());
                continue;
            }
            let l = perp_length_herm(&f, &g, 1.0).unwrap();
            let c = circle_of(&fg).unwrap();
            let (z, r) = (c.center().unwrap(), c.radius());
            let geo = Geodesic::new(
                BoundaryPoint::Finite(vec![z.re - r, z.im]),
                BoundaryPoint::Finite(vec![z.re + r, z.im]),
            )
            .unwrap();
            if l > 0.0 {
                let d = dist_between(&GeomObject::Horoball(Horoball::standard()), &GeomObject::Geodesic(geo)).unwrap();
                assert!((d - l).abs() < 1e-9);
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn bfs_small() {
        let f = unit_form();
        let keys = orbit_circle_keys(&f, 1, 2.0).unwrap();
        assert!(keys.contains(&CircleKey { a: 1, b_re: 0, b_im: 0 }));
        let mut prev = 0;
        for a_max in [1, 2, 4, 8, 16] {
            let n = orbit_circle_keys(&f, a_max, 2.0).unwrap().len();
            assert!(n >= prev);
            prev = n;
        }
        let r = orbit_circles(&f, 0.99, 2.0).unwrap();
        assert!(r.iter().all(|c| c.radius() >= 0.99));
    }

    #[test]
    fn bfs_matches_word_search() {
        // every circle reached by a short word appears in the search
        let f = unit_form();
        let a_max = 12;
        let keys: HashSet<CircleKey> = orbit_circle_keys(&f, a_max, 2.0).unwrap().into_iter().collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..3000 {
            let g = random_word(&mut rng, 10);
            let fg = f.act(&g).unwrap();
            if let Some(k) = key_of(&fg) {
                if k.a.abs() <= a_max {
                    assert!(keys.contains(&k), "{fg} missing");
                }
            }
        }
    }
}
