//! Closed-form hyperbolic geometry in the upper half-space, ball and
//! hyperboloid models of `Hⁿ`, `n ∈ {2, 3, 5}`.
//!
//! Points of the upper half-space are `(x̄, xₙ)` with `x̄ ∈ ℝⁿ⁻¹` and `xₙ > 0`.
//! Horizontal coordinates are identified with `ℝ`, `ℂ` or `ℍ` so that a single
//! quaternionic [`MoebiusMap`] covers all three dimensions.
//!
//! Most constructions work by moving the configuration into a normal form with
//! a short chain of elementary isometries (horizontal translation, dilation,
//! inversion in the unit sphere), reading off the answer there, and mapping
//! back.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quat::Quaternion;

const SUPPORTED_HORIZONTAL: [usize; 3] = [1, 2, 4];

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn same_dim(m1: usize, m2: usize) -> Result<()> {
    if m1 == m2 {
        Ok(())
    } else {
        invalid(format!("dimension mismatch: {} vs {}", m1 + 1, m2 + 1))
    }
}

/// A point `(x̄, xₙ)` of the upper half-space model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UhsPoint {
    pub horizontal: Vec<f64>,
    pub height: f64,
}

impl UhsPoint {
    pub fn new(horizontal: Vec<f64>, height: f64) -> Result<Self> {
        if !SUPPORTED_HORIZONTAL.contains(&horizontal.len()) {
            return invalid(format!("unsupported dimension {}", horizontal.len() + 1));
        }
        if !(height > 0.0 && height.is_finite()) || horizontal.iter().any(|x| !x.is_finite()) {
            return invalid("point must have finite coordinates and positive height");
        }
        Ok(UhsPoint { horizontal, height })
    }

    /// The base point `(0, 1)` of `Hⁿ`.
    pub fn origin(n: usize) -> Result<Self> {
        UhsPoint::new(vec![0.0; n.saturating_sub(1)], 1.0)
    }

    /// Dimension `n` of the ambient hyperbolic space.
    pub fn dim(&self) -> usize {
        self.horizontal.len() + 1
    }

    fn full(&self) -> Vec<f64> {
        let mut v = self.horizontal.clone();
        v.push(self.height);
        v
    }

    fn from_full(mut v: Vec<f64>) -> Self {
        let height = v.pop().expect("nonempty");
        UhsPoint { horizontal: v, height }
    }

    /// Euclidean distance squared to a boundary point, `∞` excluded.
    fn dist2_to(&self, xi: &[f64]) -> f64 {
        norm2(&sub(&self.horizontal, xi)) + self.height * self.height
    }
}

/// A point at infinity: finite in `ℝⁿ⁻¹ × {0}`, or `∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(Vec<f64>),
    Infinity,
}

impl BoundaryPoint {
    pub fn real(x: f64) -> Self {
        BoundaryPoint::Finite(vec![x])
    }

    fn check_dim(&self, m: usize) -> Result<()> {
        match self {
            BoundaryPoint::Finite(v) => same_dim(v.len(), m),
            BoundaryPoint::Infinity => Ok(()),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }
}

/// The geodesic line with the two given distinct endpoints, oriented from the
/// first to the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub start: BoundaryPoint,
    pub end: BoundaryPoint,
}

impl Geodesic {
    pub fn new(start: BoundaryPoint, end: BoundaryPoint) -> Result<Self> {
        if start == end {
            return invalid("geodesic endpoints must be distinct");
        }
        if let (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) = (&start, &end) {
            same_dim(a.len(), b.len())?;
        }
        Ok(Geodesic { start, end })
    }

    /// Euclidean center and radius when both endpoints are finite.
    pub fn center_radius(&self) -> Option<(Vec<f64>, f64)> {
        match (&self.start, &self.end) {
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                let c = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
                Some((c, 0.5 * norm2(&sub(a, b)).sqrt()))
            }
            _ => None,
        }
    }

    /// Horizontal footpoint of a vertical geodesic.
    pub fn vertical_foot(&self) -> Option<&[f64]> {
        match (&self.start, &self.end) {
            (BoundaryPoint::Finite(a), BoundaryPoint::Infinity)
            | (BoundaryPoint::Infinity, BoundaryPoint::Finite(a)) => Some(a),
            _ => None,
        }
    }

    fn horizontal_dim(&self) -> Option<usize> {
        match (&self.start, &self.end) {
            (BoundaryPoint::Finite(a), _) | (_, BoundaryPoint::Finite(a)) => Some(a.len()),
            _ => None,
        }
    }

    pub fn reversed(&self) -> Geodesic {
        Geodesic {
            start: self.end.clone(),
            end: self.start.clone(),
        }
    }
}

/// A horoball: for a finite center the Euclidean ball of diameter `size`
/// tangent to the boundary there; for `∞` the set of points of height at least
/// `size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    pub center: BoundaryPoint,
    pub size: f64,
}

impl Horoball {
    pub fn new(center: BoundaryPoint, size: f64) -> Result<Self> {
        if !(size > 0.0 && size.is_finite()) {
            return invalid("horoball size must be positive");
        }
        Ok(Horoball { center, size })
    }

    /// The horoball `{height ≥ 1}`.
    pub fn standard() -> Self {
        Horoball {
            center: BoundaryPoint::Infinity,
            size: 1.0,
        }
    }

    /// The horoball centered at `center` whose boundary passes through `p`.
    pub fn through(center: BoundaryPoint, p: &UhsPoint) -> Result<Self> {
        match &center {
            BoundaryPoint::Infinity => Horoball::new(center, p.height),
            BoundaryPoint::Finite(c) => {
                let d = p.dist2_to(c) / p.height;
                Horoball::new(center, d)
            }
        }
    }

    /// The point of the horosphere farthest from the center (the top of the
    /// Euclidean ball, or `(0, size)` for a horoball at `∞`).
    fn marker(&self, m: usize) -> UhsPoint {
        match &self.center {
            BoundaryPoint::Infinity => UhsPoint {
                horizontal: vec![0.0; m],
                height: self.size,
            },
            BoundaryPoint::Finite(c) => UhsPoint {
                horizontal: c.clone(),
                height: self.size,
            },
        }
    }

    /// Signed membership test: `true` if `p` lies in the closed horoball.
    pub fn contains(&self, p: &UhsPoint) -> bool {
        match &self.center {
            BoundaryPoint::Infinity => p.height >= self.size,
            BoundaryPoint::Finite(c) => p.dist2_to(c) <= self.size * p.height,
        }
    }
}

/// A unit tangent vector: `direction` has Euclidean norm equal to the height
/// of `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent {
    pub base: UhsPoint,
    pub direction: Vec<f64>,
}

impl UnitTangent {
    pub fn new(base: UhsPoint, direction: Vec<f64>) -> Result<Self> {
        if direction.len() != base.dim() {
            return invalid("tangent direction has the wrong dimension");
        }
        let len = norm2(&direction).sqrt();
        if (len - base.height).abs() > 1e-9 * base.height {
            return invalid("tangent vector is not of unit hyperbolic length");
        }
        Ok(UnitTangent { base, direction })
    }

    /// Rescales an arbitrary nonzero direction to unit hyperbolic length.
    pub fn normalized(base: UhsPoint, direction: Vec<f64>) -> Result<Self> {
        let len = norm2(&direction).sqrt();
        if len == 0.0 || !len.is_finite() {
            return invalid("zero tangent direction");
        }
        let d = scaled(&direction, base.height / len);
        UnitTangent::new(base, d)
    }

    pub fn antipode(&self) -> UnitTangent {
        UnitTangent {
            base: self.base.clone(),
            direction: scaled(&self.direction, -1.0),
        }
    }
}

/// A point of the hyperboloid `{q(x) = −1, x₀ > 0}` with
/// `q(x) = −x₀² + x₁² + … + xₙ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidPoint {
    pub coords: Vec<f64>,
}

/// The Minkowski bilinear form `⟨x, y⟩ = −x₀y₀ + Σ xᵢyᵢ`.
pub fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + dot(&x[1..], &y[1..])
}

impl HyperboloidPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if !SUPPORTED_HORIZONTAL.contains(&(coords.len().saturating_sub(2))) {
            return invalid("unsupported hyperboloid dimension");
        }
        let q = minkowski(&coords, &coords);
        if coords[0] <= 0.0 || (q + 1.0).abs() > 1e-9 * coords[0] * coords[0] {
            return invalid("point is not on the upper sheet of the hyperboloid");
        }
        Ok(HyperboloidPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

/// Hyperbolic distance in the upper half-space model,
/// `d = 2 asinh(‖x − y‖ / (2√(xₙyₙ)))`, equivalent to
/// `cosh d = 1 + ‖x − y‖²/(2xₙyₙ)` but accurate for nearby points.
pub fn dist(x: &UhsPoint, y: &UhsPoint) -> Result<f64> {
    same_dim(x.horizontal.len(), y.horizontal.len())?;
    let e = norm2(&sub(&x.full(), &y.full())).sqrt();
    Ok(2.0 * (e / (2.0 * (x.height * y.height).sqrt())).asinh())
}

/// Hyperbolic distance on the hyperboloid, `cosh d = −⟨x, y⟩`, evaluated as
/// `2 asinh(√q(x − y) / 2)`.
pub fn dist_hyperboloid(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    if x.coords.len() != y.coords.len() {
        return invalid("dimension mismatch");
    }
    let d = sub(&x.coords, &y.coords);
    let q = minkowski(&d, &d).max(0.0);
    Ok(2.0 * (q.sqrt() / 2.0).asinh())
}

/// Busemann cocycle `β_ξ(x, y)`, the limit of `d(x, z) − d(y, z)` as `z → ξ`.
pub fn busemann(xi: &BoundaryPoint, x: &UhsPoint, y: &UhsPoint) -> Result<f64> {
    same_dim(x.horizontal.len(), y.horizontal.len())?;
    xi.check_dim(x.horizontal.len())?;
    Ok(match xi {
        BoundaryPoint::Infinity => (y.height / x.height).ln(),
        BoundaryPoint::Finite(v) => {
            (y.height / x.height).ln() + x.dist2_to(v).ln() - y.dist2_to(v).ln()
        }
    })
}

/// Visual distance `d_x(ξ, η)` seen from `x`; zero when `ξ = η`.
pub fn visual_dist(x: &UhsPoint, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    let m = x.horizontal.len();
    xi.check_dim(m)?;
    eta.check_dim(m)?;
    if xi == eta {
        return Ok(0.0);
    }
    Ok(match (xi, eta) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
            x.height * norm2(&sub(a, b)).sqrt() / (x.dist2_to(a) * x.dist2_to(b)).sqrt()
        }
        (BoundaryPoint::Finite(a), BoundaryPoint::Infinity)
        | (BoundaryPoint::Infinity, BoundaryPoint::Finite(a)) => x.height / x.dist2_to(a).sqrt(),
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => unreachable!(),
    })
}

/// Curvature-to-distance conversions for circle packings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurvKind {
    /// Curvature of a circle tangent at a point: `curv = sinh d`.
    PointTangency,
    /// Curvature of a horocycle: `curv = e^d`.
    Horoball,
}

pub fn curv_to_dist(curv: f64, kind: CurvKind) -> Result<f64> {
    if !(curv >= 0.0) {
        return invalid("curvature must be nonnegative");
    }
    match kind {
        CurvKind::PointTangency => Ok(curv.asinh()),
        CurvKind::Horoball if curv > 0.0 => Ok(curv.ln()),
        CurvKind::Horoball => invalid("horoball curvature must be positive"),
    }
}

/// Distance from `x` to the level set of `w` on the hyperboloid, dispatched on
/// `q(w)`:
///
/// * `q(w) = −1`: `w` is a point and the distance is `arccosh(−⟨x, w⟩)`;
/// * `q(w) = 0`, `w₀ > 0`: signed distance `ln(−⟨x, w⟩)` to the horoball
///   `{−⟨·, w⟩ ≤ 1}`, negative inside;
/// * `q(w) = 1`: distance `asinh |⟨x, w⟩|` to the hyperplane `w^⊥`.
pub fn hyperboloid_level_dist(w: &[f64], x: &HyperboloidPoint) -> Result<f64> {
    if w.len() != x.coords.len() {
        return invalid("dimension mismatch");
    }
    let q = minkowski(w, w);
    let scale = norm2(w).max(1.0);
    let ip = minkowski(&x.coords, w);
    if (q + 1.0).abs() <= 1e-10 * scale {
        let w = if w[0] < 0.0 { scaled(w, -1.0) } else { w.to_vec() };
        dist_hyperboloid(x, &HyperboloidPoint { coords: w })
    } else if q.abs() <= 1e-10 * scale {
        if w[0] <= 0.0 {
            return invalid("light-like vector must be future pointing");
        }
        Ok((-ip).ln())
    } else if (q - 1.0).abs() <= 1e-10 * scale {
        Ok(ip.abs().asinh())
    } else {
        invalid(format!("q(w) = {q} is not in {{-1, 0, 1}}"))
    }
}

/// The three models of hyperbolic space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    UpperHalfSpace,
    Ball,
    Hyperboloid,
}

/// A point in one of the three models. Ball points are vectors of norm `< 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelPoint {
    Uhs(UhsPoint),
    Ball(Vec<f64>),
    Hyperboloid(HyperboloidPoint),
}

impl ModelPoint {
    pub fn model(&self) -> Model {
        match self {
            ModelPoint::Uhs(_) => Model::UpperHalfSpace,
            ModelPoint::Ball(_) => Model::Ball,
            ModelPoint::Hyperboloid(_) => Model::Hyperboloid,
        }
    }

    /// Distance, computed in the model of `self` after converting `other`.
    pub fn dist(&self, other: &ModelPoint) -> Result<f64> {
        let other = convert(other, self.model())?;
        match (self, &other) {
            (ModelPoint::Uhs(a), ModelPoint::Uhs(b)) => dist(a, b),
            (ModelPoint::Hyperboloid(a), ModelPoint::Hyperboloid(b)) => dist_hyperboloid(a, b),
            (ModelPoint::Ball(a), ModelPoint::Ball(b)) => {
                if a.len() != b.len() {
                    return invalid("dimension mismatch");
                }
                // sinh²(d/2) = |a − b|² / ((1 − |a|²)(1 − |b|²))
                let num = norm2(&sub(a, b));
                let den = (1.0 - norm2(a)) * (1.0 - norm2(b));
                Ok(2.0 * (num / den).sqrt().asinh())
            }
            _ => unreachable!(),
        }
    }
}

fn uhs_to_hyperboloid(p: &UhsPoint) -> HyperboloidPoint {
    let h = p.height;
    let u2 = norm2(&p.horizontal);
    let mut coords = Vec::with_capacity(p.dim() + 1);
    coords.push((1.0 + u2 + h * h) / (2.0 * h));
    coords.extend(p.horizontal.iter().map(|u| u / h));
    coords.push((u2 + h * h - 1.0) / (2.0 * h));
    HyperboloidPoint { coords }
}

fn hyperboloid_to_uhs(x: &HyperboloidPoint) -> Result<UhsPoint> {
    let n = x.dim();
    let denom = x.coords[0] - x.coords[n];
    if !(denom > 0.0) {
        return invalid("hyperboloid point too close to the north pole");
    }
    let h = 1.0 / denom;
    UhsPoint::new(x.coords[1..n].iter().map(|v| v * h).collect(), h)
}

fn ball_to_hyperboloid(b: &[f64]) -> Result<HyperboloidPoint> {
    let r2 = norm2(b);
    if !(r2 < 1.0) {
        return invalid("ball point must have norm < 1");
    }
    let mut coords = Vec::with_capacity(b.len() + 1);
    coords.push((1.0 + r2) / (1.0 - r2));
    coords.extend(b.iter().map(|v| 2.0 * v / (1.0 - r2)));
    HyperboloidPoint::new(coords)
}

fn hyperboloid_to_ball(x: &HyperboloidPoint) -> Vec<f64> {
    x.coords[1..].iter().map(|v| v / (1.0 + x.coords[0])).collect()
}

/// Converts a point between models through the hyperboloid.
pub fn convert(p: &ModelPoint, to: Model) -> Result<ModelPoint> {
    if p.model() == to {
        return Ok(p.clone());
    }
    let hyp = match p {
        ModelPoint::Uhs(u) => uhs_to_hyperboloid(u),
        ModelPoint::Ball(b) => ball_to_hyperboloid(b)?,
        ModelPoint::Hyperboloid(h) => h.clone(),
    };
    Ok(match to {
        Model::UpperHalfSpace => ModelPoint::Uhs(hyperboloid_to_uhs(&hyp)?),
        Model::Ball => ModelPoint::Ball(hyperboloid_to_ball(&hyp)),
        Model::Hyperboloid => ModelPoint::Hyperboloid(hyp),
    })
}

/// Boundary point of the upper half-space to the unit sphere; `∞` goes to the
/// north pole. `m` is the horizontal dimension.
pub fn boundary_to_ball(xi: &BoundaryPoint, m: usize) -> Result<Vec<f64>> {
    xi.check_dim(m)?;
    Ok(match xi {
        BoundaryPoint::Infinity => {
            let mut v = vec![0.0; m + 1];
            v[m] = 1.0;
            v
        }
        BoundaryPoint::Finite(x) => {
            let r2 = norm2(x);
            let mut v: Vec<f64> = x.iter().map(|t| 2.0 * t / (1.0 + r2)).collect();
            v.push((r2 - 1.0) / (1.0 + r2));
            v
        }
    })
}

/// Inverse of [`boundary_to_ball`].
pub fn ball_to_boundary(v: &[f64]) -> Result<BoundaryPoint> {
    let m = v.len().saturating_sub(1);
    if !SUPPORTED_HORIZONTAL.contains(&m) || (norm2(v) - 1.0).abs() > 1e-9 {
        return invalid("not a point of the unit sphere");
    }
    let top = 1.0 - v[m];
    if top == 0.0 {
        return Ok(BoundaryPoint::Infinity);
    }
    Ok(BoundaryPoint::Finite(v[..m].iter().map(|t| t / top).collect()))
}

/// One elementary isometry of the upper half-space.
#[derive(Debug, Clone, PartialEq)]
enum Step {
    /// Horizontal translation by a vector.
    Translate(Vec<f64>),
    /// Dilation `p ↦ λp`.
    Scale(f64),
    /// Inversion `p ↦ p/|p|²` in the unit sphere (an involution).
    Invert,
}

/// A composition of elementary isometries, applied left to right.
#[derive(Debug, Clone, PartialEq)]
struct Frame {
    m: usize,
    steps: Vec<Step>,
}

impl Frame {
    fn new(m: usize) -> Self {
        Frame { m, steps: Vec::new() }
    }

    fn then(mut self, s: Step) -> Self {
        self.steps.push(s);
        self
    }

    fn inverse(&self) -> Frame {
        let steps = self
            .steps
            .iter()
            .rev()
            .map(|s| match s {
                Step::Translate(v) => Step::Translate(scaled(v, -1.0)),
                Step::Scale(l) => Step::Scale(1.0 / l),
                Step::Invert => Step::Invert,
            })
            .collect();
        Frame { m: self.m, steps }
    }

    fn point(&self, p: &UhsPoint) -> UhsPoint {
        let mut v = p.full();
        for s in &self.steps {
            match s {
                Step::Translate(t) => {
                    for (x, d) in v.iter_mut().zip(t) {
                        *x += d;
                    }
                }
                Step::Scale(l) => v.iter_mut().for_each(|x| *x *= l),
                Step::Invert => {
                    let r2 = norm2(&v);
                    v.iter_mut().for_each(|x| *x /= r2);
                }
            }
        }
        UhsPoint::from_full(v)
    }

    fn boundary(&self, xi: &BoundaryPoint) -> BoundaryPoint {
        let mut cur = xi.clone();
        for s in &self.steps {
            cur = match (s, cur) {
                (Step::Translate(t), BoundaryPoint::Finite(v)) => {
                    BoundaryPoint::Finite(v.iter().zip(t).map(|(x, d)| x + d).collect())
                }
                (Step::Scale(l), BoundaryPoint::Finite(v)) => BoundaryPoint::Finite(scaled(&v, *l)),
                (Step::Invert, BoundaryPoint::Finite(v)) => {
                    let r2 = norm2(&v);
                    if r2 == 0.0 {
                        BoundaryPoint::Infinity
                    } else {
                        BoundaryPoint::Finite(scaled(&v, 1.0 / r2))
                    }
                }
                (Step::Invert, BoundaryPoint::Infinity) => BoundaryPoint::Finite(vec![0.0; self.m]),
                (_, BoundaryPoint::Infinity) => BoundaryPoint::Infinity,
            };
        }
        cur
    }

    /// Pushes a tangent vector forward by the differential.
    fn tangent(&self, v: &UnitTangent) -> UnitTangent {
        let mut p = v.base.full();
        let mut d = v.direction.clone();
        for s in &self.steps {
            match s {
                Step::Translate(t) => {
                    for (x, dx) in p.iter_mut().zip(t) {
                        *x += dx;
                    }
                }
                Step::Scale(l) => {
                    p.iter_mut().for_each(|x| *x *= l);
                    d.iter_mut().for_each(|x| *x *= l);
                }
                Step::Invert => {
                    let r2 = norm2(&p);
                    let pd = dot(&p, &d);
                    d = axpy(&scaled(&d, 1.0 / r2), -2.0 * pd / (r2 * r2), &p);
                    p.iter_mut().for_each(|x| *x /= r2);
                }
            }
        }
        UnitTangent {
            base: UhsPoint::from_full(p),
            direction: d,
        }
    }

    fn horoball(&self, h: &Horoball) -> Horoball {
        let center = self.boundary(&h.center);
        let marker = self.point(&h.marker(self.m));
        Horoball::through(center, &marker).expect("isometries preserve horoballs")
    }

    fn geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic {
            start: self.boundary(&g.start),
            end: self.boundary(&g.end),
        }
    }
}

/// Isometry sending `ξ ↦ 0` and `η ↦ ∞`.
fn normalize_geodesic(xi: &BoundaryPoint, eta: &BoundaryPoint, m: usize) -> Frame {
    match (xi, eta) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Infinity) => {
            Frame::new(m).then(Step::Translate(scaled(a, -1.0)))
        }
        (BoundaryPoint::Infinity, BoundaryPoint::Finite(b)) => Frame::new(m)
            .then(Step::Translate(scaled(b, -1.0)))
            .then(Step::Invert),
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
            let w = sub(a, b);
            let w = scaled(&w, 1.0 / norm2(&w));
            Frame::new(m)
                .then(Step::Translate(scaled(b, -1.0)))
                .then(Step::Invert)
                .then(Step::Translate(scaled(&w, -1.0)))
        }
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => unreachable!("distinct endpoints"),
    }
}

/// Isometry sending the horoball to `{height ≥ 1}` and its top point to `(0, 1)`.
fn normalize_horoball(h: &Horoball, m: usize) -> Frame {
    match &h.center {
        BoundaryPoint::Infinity => Frame::new(m).then(Step::Scale(1.0 / h.size)),
        BoundaryPoint::Finite(c) => Frame::new(m)
            .then(Step::Translate(scaled(c, -1.0)))
            .then(Step::Invert)
            .then(Step::Scale(h.size)),
    }
}

/// Hamenstädt distance on the boundary of `H`, in closed form: after
/// normalising `H` to `{height ≥ 1}` it is the Euclidean distance.
pub fn hamenstadt_dist(h: &Horoball, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    if *xi == h.center || *eta == h.center {
        return invalid("boundary point coincides with the horoball center");
    }
    let m = match (xi, eta) {
        (BoundaryPoint::Finite(v), _) | (_, BoundaryPoint::Finite(v)) => v.len(),
        _ => return invalid("both points at infinity"),
    };
    xi.check_dim(m)?;
    eta.check_dim(m)?;
    h.center.check_dim(m)?;
    if xi == eta {
        return Ok(0.0);
    }
    let f = normalize_horoball(h, m);
    match (f.boundary(xi), f.boundary(eta)) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => Ok(norm2(&sub(&a, &b)).sqrt()),
        _ => Err(Error::Internal("normalised point at infinity".into())),
    }
}

/// Hamenstädt distance as the limit `e^t d_{ρ_t}(ξ, η)`, where `ρ` is the
/// geodesic ray from the top of `H` to its center. Iterates `t = 1, 2, …, 30`
/// and stops once successive values differ by less than `1e-10` (relative).
pub fn hamenstadt_dist_limit(h: &Horoball, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    if *xi == h.center || *eta == h.center {
        return invalid("boundary point coincides with the horoball center");
    }
    let m = match (xi, eta) {
        (BoundaryPoint::Finite(v), _) | (_, BoundaryPoint::Finite(v)) => v.len(),
        _ => return invalid("both points at infinity"),
    };
    let rho = |t: f64| match &h.center {
        BoundaryPoint::Infinity => UhsPoint {
            horizontal: vec![0.0; m],
            height: h.size * t.exp(),
        },
        BoundaryPoint::Finite(c) => UhsPoint {
            horizontal: c.clone(),
            height: h.size * (-t).exp(),
        },
    };
    let mut prev = f64::NAN;
    for k in 0..=30 {
        let t = k as f64;
        let cur = t.exp() * visual_dist(&rho(t), xi, eta)?;
        if (cur - prev).abs() < 1e-10 * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Stabilization("Hamenstädt limit did not settle by t = 30".into()))
}

/// A homography `(a, b; c, d)` with quaternionic entries, acting on the
/// boundary by `ξ ↦ (aξ + b)(cξ + d)⁻¹` and on the upper half-space by the
/// Poincaré extension
/// `(z, r) ↦ ((az+b)(cz+d)‾ + a c̄ r², Det·r) / (n(cz+d) + r² n(c))`.
/// Real entries act on `H²`, complex ones on `H³`, general ones on `H⁵`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: Quaternion,
    pub b: Quaternion,
    pub c: Quaternion,
    pub d: Quaternion,
}

impl MoebiusMap {
    /// Builds a map without checking the determinant; the extension formula
    /// includes the Dieudonné determinant so projective scaling is harmless.
    pub fn new(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Self {
        MoebiusMap { a, b, c, d }
    }

    /// Builds a map and checks `Det = 1` to `1e-12` relative to the entries.
    pub fn checked(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Result<Self> {
        let g = MoebiusMap::new(a, b, c, d);
        let scale = a.norm() + b.norm() + c.norm() + d.norm();
        if (g.det() - 1.0).abs() > 1e-12 * scale.max(1.0) {
            return invalid(format!("determinant {} is not 1", g.det()));
        }
        Ok(g)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        MoebiusMap::new(
            Quaternion::real(a),
            Quaternion::real(b),
            Quaternion::real(c),
            Quaternion::real(d),
        )
    }

    pub fn from_complex(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        let q = |z: Complex64| Quaternion::complex(z.re, z.im);
        MoebiusMap::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        MoebiusMap::from_real(1.0, 0.0, 0.0, 1.0)
    }

    /// `z ↦ z + b` for a horizontal vector `b`.
    pub fn translation(b: &[f64]) -> Self {
        MoebiusMap::new(Quaternion::ONE, Quaternion::from_slice(b), Quaternion::ZERO, Quaternion::ONE)
    }

    /// `S = (0, −1; 1, 0)`.
    pub fn inversion() -> Self {
        MoebiusMap::from_real(0.0, -1.0, 1.0, 0.0)
    }

    /// Dieudonné determinant.
    pub fn det(&self) -> f64 {
        crate::quat::QuatMatrix::new(self.a, self.b, self.c, self.d).dieudonne_det()
    }

    /// Rescales to determinant 1.
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        if !(det > 0.0) {
            return invalid("singular matrix");
        }
        let s = 1.0 / det.sqrt();
        Ok(MoebiusMap::new(self.a.scale(s), self.b.scale(s), self.c.scale(s), self.d.scale(s)))
    }

    /// Matrix product, so that `self.compose(g)` acts as `self ∘ g`.
    pub fn compose(&self, g: &MoebiusMap) -> MoebiusMap {
        MoebiusMap::new(
            self.a * g.a + self.b * g.c,
            self.a * g.b + self.b * g.d,
            self.c * g.a + self.d * g.c,
            self.c * g.b + self.d * g.d,
        )
    }

    fn ring_dim(&self) -> usize {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|q| q.ring_dim())
            .max()
            .unwrap_or(1)
    }

    fn check_ring(&self, m: usize) -> Result<()> {
        if self.ring_dim() > m {
            return invalid(format!(
                "coefficients do not preserve the boundary of H^{}",
                m + 1
            ));
        }
        Ok(())
    }

    fn truncate(q: Quaternion, m: usize) -> Vec<f64> {
        q.to_array()[..m].to_vec()
    }

    pub fn apply_point(&self, p: &UhsPoint) -> Result<UhsPoint> {
        let m = p.horizontal.len();
        self.check_ring(m)?;
        let z = Quaternion::from_slice(&p.horizontal);
        let r2 = p.height * p.height;
        let czd = self.c * z + self.d;
        let den = czd.norm() + r2 * self.c.norm();
        let num = (self.a * z + self.b) * czd.conj() + (self.a * self.c.conj()).scale(r2);
        UhsPoint::new(
            MoebiusMap::truncate(num.scale(1.0 / den), m),
            self.det() * p.height / den,
        )
    }

    pub fn apply_boundary(&self, xi: &BoundaryPoint, m: usize) -> Result<BoundaryPoint> {
        self.check_ring(m)?;
        xi.check_dim(m)?;
        Ok(match xi {
            BoundaryPoint::Infinity => {
                if self.c.is_zero() {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(MoebiusMap::truncate(self.a * self.c.inv(), m))
                }
            }
            BoundaryPoint::Finite(v) => {
                let z = Quaternion::from_slice(v);
                let den = self.c * z + self.d;
                if den.is_zero() {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(MoebiusMap::truncate((self.a * z + self.b) * den.inv(), m))
                }
            }
        })
    }

    pub fn apply_geodesic(&self, g: &Geodesic, m: usize) -> Result<Geodesic> {
        Geodesic::new(self.apply_boundary(&g.start, m)?, self.apply_boundary(&g.end, m)?)
    }

    pub fn apply_horoball(&self, h: &Horoball, m: usize) -> Result<Horoball> {
        let center = self.apply_boundary(&h.center, m)?;
        let marker = self.apply_point(&h.marker(m))?;
        Horoball::through(center, &marker)
    }

    pub fn apply_object(&self, o: &GeomObject, m: usize) -> Result<GeomObject> {
        Ok(match o {
            GeomObject::Point(p) => GeomObject::Point(self.apply_point(p)?),
            GeomObject::Geodesic(g) => GeomObject::Geodesic(self.apply_geodesic(g, m)?),
            GeomObject::Horoball(h) => GeomObject::Horoball(self.apply_horoball(h, m)?),
        })
    }
}

/// The convex sets between which distances and perpendiculars are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeomObject {
    Point(UhsPoint),
    Geodesic(Geodesic),
    Horoball(Horoball),
}

impl GeomObject {
    fn horizontal_dim(&self) -> Option<usize> {
        match self {
            GeomObject::Point(p) => Some(p.horizontal.len()),
            GeomObject::Geodesic(g) => g.horizontal_dim(),
            GeomObject::Horoball(h) => match &h.center {
                BoundaryPoint::Finite(c) => Some(c.len()),
                BoundaryPoint::Infinity => None,
            },
        }
    }

    fn rank(&self) -> u8 {
        match self {
            GeomObject::Point(_) => 0,
            GeomObject::Horoball(_) => 1,
            GeomObject::Geodesic(_) => 2,
        }
    }
}

/// A common perpendicular: feet on each set and the length between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perpendicular {
    pub foot_a: UhsPoint,
    pub foot_b: UhsPoint,
    pub length: f64,
}

/// Result of the case analysis: signed distance plus, when positive, the feet
/// in the order of the (possibly swapped) arguments.
struct Separation {
    signed: f64,
    feet: Option<(UhsPoint, UhsPoint)>,
}

fn common_dim(a: &GeomObject, b: &GeomObject) -> Result<usize> {
    match (a.horizontal_dim(), b.horizontal_dim()) {
        (Some(x), Some(y)) => same_dim(x, y).map(|_| x),
        (Some(x), None) | (None, Some(x)) => Ok(x),
        (None, None) => invalid("both objects are horoballs centered at infinity"),
    }
}

/// Complex-distance data for the geodesic `(p, q)` against the axis `(0, ∞)`.
/// Returns the length and the foot on `(p, q)` in normalised coordinates.
fn axis_vs_geodesic(p: &[f64], q: &[f64]) -> (f64, UhsPoint, f64) {
    let m = p.len();
    let pp = norm2(p).sqrt();
    let e1 = scaled(p, 1.0 / pp);
    let q1 = dot(q, &e1);
    let q_perp = axpy(q, -q1, &e1);
    let q2 = norm2(&q_perp).sqrt();
    let e2 = if q2 > 0.0 { scaled(&q_perp, 1.0 / q2) } else { vec![0.0; m] };
    let qc = Complex64::new(q1, q2);
    let qq = qc.norm();
    let lambda = 1.0 / (pp * qq).sqrt();
    let theta = 0.5 * qc.arg();
    let w = Complex64::from_polar((pp / qq).sqrt(), -theta);
    let one = Complex64::new(1.0, 0.0);
    let delta = ((one + w) / (one - w)).ln();
    let half = 0.5 * delta;
    let (ch, sh) = (half.cosh(), half.sinh());
    // the loxodromic (ch, sh; sh, ch) applied to (0, 1)
    let den = ch.norm_sqr() + sh.norm_sqr();
    let z = (sh * ch.conj() + ch * sh.conj()) / den;
    let det = (ch * ch - sh * sh).norm();
    let r = det / den;
    let z = Complex64::from_polar(1.0, theta) * z;
    let horizontal = axpy(&scaled(&e1, z.re / lambda), z.im / lambda, &e2);
    let foot = UhsPoint {
        horizontal,
        height: r / lambda,
    };
    (delta.re.abs(), foot, 1.0 / lambda)
}

fn separation(a: &GeomObject, b: &GeomObject) -> Result<Separation> {
    if a == b {
        return invalid("identical objects");
    }
    let m = common_dim(a, b)?;
    if a.rank() > b.rank() {
        let s = separation(b, a)?;
        return Ok(Separation {
            signed: s.signed,
            feet: s.feet.map(|(x, y)| (y, x)),
        });
    }
    use GeomObject as G;
    match (a, b) {
        (G::Point(x), G::Point(y)) => {
            let d = dist(x, y)?;
            Ok(Separation {
                signed: d,
                feet: Some((x.clone(), y.clone())),
            })
        }
        (G::Point(x), G::Horoball(h)) => {
            h.center.check_dim(m)?;
            let f = normalize_horoball(h, m);
            let px = f.point(x);
            let signed = -px.height.ln();
            let feet = (px.height < 1.0).then(|| {
                let foot = UhsPoint {
                    horizontal: px.horizontal.clone(),
                    height: 1.0,
                };
                (x.clone(), f.inverse().point(&foot))
            });
            Ok(Separation { signed, feet })
        }
        (G::Point(x), G::Geodesic(g)) => {
            g.start.check_dim(m)?;
            g.end.check_dim(m)?;
            let f = normalize_geodesic(&g.start, &g.end, m);
            let px = f.point(x);
            let u = norm2(&px.horizontal).sqrt();
            let signed = (u / px.height).asinh();
            let feet = (signed > 0.0).then(|| {
                let foot = UhsPoint {
                    horizontal: vec![0.0; m],
                    height: norm2(&px.full()).sqrt(),
                };
                (x.clone(), f.inverse().point(&foot))
            });
            Ok(Separation { signed, feet })
        }
        (G::Horoball(h1), G::Horoball(h2)) => {
            h1.center.check_dim(m)?;
            h2.center.check_dim(m)?;
            if h1.center == h2.center {
                return invalid("concentric horoballs have no common perpendicular");
            }
            let f = normalize_horoball(h1, m);
            let img = f.horoball(h2);
            let BoundaryPoint::Finite(c) = &img.center else {
                return Err(Error::Internal("normalised center at infinity".into()));
            };
            let signed = -img.size.ln();
            let feet = (img.size < 1.0).then(|| {
                let inv = f.inverse();
                let top = UhsPoint { horizontal: c.clone(), height: 1.0 };
                let bottom = UhsPoint { horizontal: c.clone(), height: img.size };
                (inv.point(&top), inv.point(&bottom))
            });
            Ok(Separation { signed, feet })
        }
        (G::Horoball(h), G::Geodesic(g)) => {
            h.center.check_dim(m)?;
            g.start.check_dim(m)?;
            g.end.check_dim(m)?;
            let f = normalize_horoball(h, m);
            let img = f.geodesic(g);
            let Some((c, r)) = img.center_radius() else {
                return invalid("geodesic ends at the horoball center");
            };
            let signed = -r.ln();
            let feet = (r < 1.0).then(|| {
                let inv = f.inverse();
                let top = UhsPoint { horizontal: c.clone(), height: 1.0 };
                let apex = UhsPoint { horizontal: c.clone(), height: r };
                (inv.point(&top), inv.point(&apex))
            });
            Ok(Separation { signed, feet })
        }
        (G::Geodesic(g1), G::Geodesic(g2)) => {
            for e in [&g1.start, &g1.end, &g2.start, &g2.end] {
                e.check_dim(m)?;
            }
            if *g1 == g2.reversed() {
                return invalid("identical geodesics");
            }
            let f = normalize_geodesic(&g1.start, &g1.end, m);
            let img = f.geodesic(g2);
            let (p, q) = match (&img.start, &img.end) {
                (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q))
                    if norm2(p) > 0.0 && norm2(q) > 0.0 =>
                {
                    (p.clone(), q.clone())
                }
                // a shared endpoint: asymptotic geodesics
                _ => {
                    return Ok(Separation {
                        signed: 0.0,
                        feet: None,
                    })
                }
            };
            let (len, foot_b, h_a) = axis_vs_geodesic(&p, &q);
            let feet = (len > 1e-14).then(|| {
                let inv = f.inverse();
                let foot_a = UhsPoint {
                    horizontal: vec![0.0; m],
                    height: h_a,
                };
                (inv.point(&foot_a), inv.point(&foot_b))
            });
            Ok(Separation {
                signed: if len > 1e-14 { len } else { 0.0 },
                feet,
            })
        }
        _ => unreachable!("arguments ordered by rank"),
    }
}

/// Signed distance between two points, geodesics or horoballs. Positive values
/// are genuine distances; nonpositive values measure overlap: for a horoball
/// normalised to `{height ≥ 1}` the value is `−ln` of the apex height of the
/// other set (or of the point), and intersecting geodesics give `0`.
pub fn dist_between(a: &GeomObject, b: &GeomObject) -> Result<f64> {
    separation(a, b).map(|s| s.signed)
}

/// The common perpendicular between two disjoint sets, or the geodesic
/// segment between points.
pub fn common_perpendicular(a: &GeomObject, b: &GeomObject) -> Result<Perpendicular> {
    let s = separation(a, b)?;
    match s.feet {
        Some((foot_a, foot_b)) if s.signed > 0.0 => Ok(Perpendicular {
            foot_a,
            foot_b,
            length: s.signed,
        }),
        _ => Err(Error::NoPerpendicular(format!(
            "signed distance {} is not positive",
            s.signed
        ))),
    }
}

/// Endpoints `(v₋, v₊)` of the geodesic tangent to `v`.
fn endpoints(v: &UnitTangent) -> (BoundaryPoint, BoundaryPoint) {
    let m = v.base.horizontal.len();
    let h = v.base.height;
    let horiz = &v.direction[..m];
    let beta = v.direction[m];
    let alpha = norm2(horiz).sqrt();
    if alpha <= 1e-15 * h {
        let foot = BoundaryPoint::Finite(v.base.horizontal.clone());
        return if beta > 0.0 {
            (foot, BoundaryPoint::Infinity)
        } else {
            (BoundaryPoint::Infinity, foot)
        };
    }
    let e = scaled(horiz, 1.0 / alpha);
    let kappa = h * beta / alpha;
    let c = axpy(&v.base.horizontal, kappa, &e);
    let r = kappa.hypot(h);
    (
        BoundaryPoint::Finite(axpy(&c, -r, &e)),
        BoundaryPoint::Finite(axpy(&c, r, &e)),
    )
}

/// Hopf coordinates `(v₋, v₊, t)`; `t` is the signed distance along the
/// geodesic from the orthogonal projection of `x₀ = (0, 1)` to the base point.
pub fn hopf(v: &UnitTangent) -> (BoundaryPoint, BoundaryPoint, f64) {
    let m = v.base.horizontal.len();
    let (minus, plus) = endpoints(v);
    let f = normalize_geodesic(&minus, &plus, m);
    let base = f.point(&v.base);
    let x0 = f.point(&UhsPoint {
        horizontal: vec![0.0; m],
        height: 1.0,
    });
    let proj = norm2(&x0.full()).sqrt();
    (minus, plus, (base.height / proj).ln())
}

/// Geodesic flow for time `t`.
pub fn geodesic_flow(v: &UnitTangent, t: f64) -> UnitTangent {
    let m = v.base.horizontal.len();
    let (minus, plus) = endpoints(v);
    let f = normalize_geodesic(&minus, &plus, m);
    let h = f.point(&v.base).height * t.exp();
    let mut dir = vec![0.0; m];
    dir.push(h);
    let moved = UnitTangent {
        base: UhsPoint {
            horizontal: vec![0.0; m],
            height: h,
        },
        direction: dir,
    };
    f.inverse().tangent(&moved)
}
