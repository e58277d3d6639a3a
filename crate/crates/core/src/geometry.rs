//! Strip domains `cl(Ω₀) \ Ω₁` given as a pair of epigraphs, and the
//! geometric predicates everything else is built on.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};

/// Absolute tolerance for boundary classification.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Default slack for the finite-window slope-agreement proxy.
pub const DEFAULT_SLOPE_TOL: f64 = 0.05;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn cross(&self, other: &Point) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    /// `(1 − t)·self + t·other`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x1 + t * (other.x1 - self.x1),
            self.x2 + t * (other.x2 - self.x2),
        )
    }

    /// Unit vector at angle `theta`.
    pub fn direction(theta: f64) -> Point {
        Point::new(theta.cos(), theta.sin())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        Point::new(self * rhs.x1, self * rhs.x2)
    }
}

/// A point of the fixed boundary, parameterized by its abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub s: f64,
    pub point: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    Interior,
    FixedBoundary,
    FreeBoundary,
    Outside,
}

/// Result of [`StripDomain::segment_in_domain`]; `witness` is the segment
/// parameter where the obstacle margin is smallest when the test fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCheck {
    pub inside: bool,
    pub witness: Option<f64>,
}

/// A fixed-boundary chord through a point: `x = alpha·lower + (1 − alpha)·upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub lower: BoundaryPoint,
    pub upper: BoundaryPoint,
    pub alpha: f64,
}

/// `{ Φ₀(x₁) ≤ x₂ ≤ Φ₁(x₁) }`, computationally truncated to `s_min ≤ x₁ ≤ s_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripDomain {
    pub lower: Curve,
    pub upper: Curve,
    pub window: (f64, f64),
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
}

fn default_tol() -> f64 {
    BOUNDARY_TOL
}

fn default_slope_tol() -> f64 {
    DEFAULT_SLOPE_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: u8,
    pub s: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub strict_convexity: bool,
    pub upper_curvature_available: bool,
    pub slope_agreement: bool,
    pub ordered: bool,
    pub slope_gaps: Vec<(f64, f64)>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.strict_convexity && self.upper_curvature_available && self.slope_agreement && self.ordered
    }
}

impl StripDomain {
    pub fn new(lower: Curve, upper: Curve, window: (f64, f64)) -> Result<Self> {
        let (a, b) = window;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("window [{a}, {b}] is empty or unbounded")));
        }
        for c in [&lower, &upper] {
            let (lo, hi) = c.domain_interval();
            if a < lo || b > hi || (a == lo && lo.is_finite() && c.eval(a).is_infinite()) {
                return Err(Error::InvalidInput(format!(
                    "window [{a}, {b}] leaves the curve domain ({lo}, {hi})"
                )));
            }
        }
        Ok(StripDomain {
            lower,
            upper,
            window,
            tol: BOUNDARY_TOL,
            slope_tol: DEFAULT_SLOPE_TOL,
        })
    }

    /// The parabolic strip `x₁² ≤ x₂ ≤ x₁² + ε²` of the BMO ball, truncated at `|x₁| ≤ half_width`.
    pub fn parabolic(eps: f64, half_width: f64) -> Result<Self> {
        if !(eps > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidInput("parabolic strip needs eps > 0 and L > 0".into()));
        }
        StripDomain::new(Curve::parabola(0.0), Curve::parabola(eps * eps), (-half_width, half_width))
    }

    pub fn fixed(&self, s: f64) -> f64 {
        self.lower.eval(s)
    }

    pub fn free(&self, s: f64) -> f64 {
        self.upper.eval(s)
    }

    pub fn boundary_point(&self, s: f64) -> BoundaryPoint {
        BoundaryPoint {
            s,
            point: Point::new(s, self.lower.eval(s)),
        }
    }

    pub fn in_window(&self, s: f64) -> bool {
        s >= self.window.0 && s <= self.window.1
    }

    fn in_curve_domain(&self, s: f64) -> bool {
        let (lo0, hi0) = self.lower.domain_interval();
        let (lo1, hi1) = self.upper.domain_interval();
        s > lo0.max(lo1) && s < hi0.min(hi1)
    }

    pub fn classify_point(&self, p: Point) -> PointClass {
        if !p.is_finite() || !self.in_curve_domain(p.x1) {
            return PointClass::Outside;
        }
        let below = p.x2 - self.lower.eval(p.x1);
        let above = self.upper.eval(p.x1) - p.x2;
        if below.abs() <= self.tol {
            PointClass::FixedBoundary
        } else if above.abs() <= self.tol {
            PointClass::FreeBoundary
        } else if below > 0.0 && above > 0.0 {
            PointClass::Interior
        } else {
            PointClass::Outside
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.classify_point(p) != PointClass::Outside
    }

    /// Whether `[a, b]` stays in `cl Ω₀` and avoids the open obstacle `Ω₁` (touching allowed).
    pub fn segment_in_domain(&self, a: Point, b: Point) -> SegmentCheck {
        if !self.contains_closed_omega0(a) {
            return SegmentCheck { inside: false, witness: Some(0.0) };
        }
        if !self.contains_closed_omega0(b) {
            return SegmentCheck { inside: false, witness: Some(1.0) };
        }
        let (t, gap) = self.min_obstacle_gap(a, b);
        SegmentCheck {
            inside: gap >= -self.tol,
            witness: (gap < -self.tol).then_some(t),
        }
    }

    fn contains_closed_omega0(&self, p: Point) -> bool {
        p.is_finite() && self.in_curve_domain(p.x1) && p.x2 - self.lower.eval(p.x1) >= -self.tol
    }

    /// Minimizes the convex function `g(t) = Φ₁(x₁(t)) − x₂(t)` over `t ∈ [0, 1]`
    /// by bisection on its (monotone) derivative.
    fn min_obstacle_gap(&self, a: Point, b: Point) -> (f64, f64) {
        let d = b - a;
        let g = |t: f64| {
            let p = a.lerp(&b, t);
            self.upper.eval(p.x1) - p.x2
        };
        let dg = |t: f64| self.upper.slope(a.x1 + t * d.x1) * d.x1 - d.x2;
        let t = if d.x1 == 0.0 || dg(0.0) >= 0.0 {
            if d.x1 == 0.0 {
                // g is affine in t along a vertical segment
                if g(0.0) <= g(1.0) { 0.0 } else { 1.0 }
            } else {
                0.0
            }
        } else if dg(1.0) <= 0.0 {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dg(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        (t, g(t))
    }

    /// Whether the convex hull of `vertices` lies in the domain.
    pub fn hull_in_domain(&self, vertices: &[Point]) -> bool {
        if vertices.is_empty() {
            return false;
        }
        if vertices.iter().any(|v| !self.contains_closed_omega0(*v)) {
            return false;
        }
        let hull = convex_hull(vertices);
        match hull.len() {
            1 => self.contains(hull[0]),
            2 => self.segment_in_domain(hull[0], hull[1]).inside,
            n => (0..n).all(|i| self.segment_in_domain(hull[i], hull[(i + 1) % n]).inside),
        }
    }

    /// A chord through `x` with both endpoints on the fixed boundary.
    ///
    /// The chord is parallel to the free-boundary tangent at `x₁`, so it lies below
    /// `Φ₁` everywhere; at a free-boundary point it is the tangent chord itself.
    pub fn fixed_chord(&self, x: Point) -> Result<Chord> {
        match self.classify_point(x) {
            PointClass::Outside => Err(Error::Outside(x)),
            PointClass::FixedBoundary => {
                let b = self.boundary_point(x.x1);
                Ok(Chord { lower: b, upper: b, alpha: 0.5 })
            }
            _ => {
                let m = self.upper.slope(x.x1);
                let h = |s: f64| self.lower.eval(s) - x.x2 - m * (s - x.x1);
                let left = self.root_outward(&h, x.x1, -1.0)?;
                let right = self.root_outward(&h, x.x1, 1.0)?;
                let alpha = (right - x.x1) / (right - left);
                Ok(Chord {
                    lower: self.boundary_point(left),
                    upper: self.boundary_point(right),
                    alpha,
                })
            }
        }
    }

    /// First sign change of a convex `h` with `h(s0) < 0`, searching from `s0` in direction `sign`.
    fn root_outward(&self, h: &dyn Fn(f64) -> f64, s0: f64, sign: f64) -> Result<f64> {
        let (lo_dom, hi_dom) = self.lower.domain_interval();
        let mut inner = s0;
        let mut step = 1e-3_f64.max(1e-3 * s0.abs());
        let mut outer = s0 + sign * step;
        let mut iterations = 0;
        loop {
            if sign < 0.0 && outer <= lo_dom {
                outer = 0.5 * (inner + lo_dom);
            } else if sign > 0.0 && outer >= hi_dom {
                outer = 0.5 * (inner + hi_dom);
            }
            if h(outer) >= 0.0 {
                break;
            }
            inner = outer;
            step *= 2.0;
            outer = inner + sign * step;
            iterations += 1;
            if iterations > 2000 {
                return Err(Error::NoConvergence(format!(
                    "no fixed-boundary crossing from s = {s0} in direction {sign}"
                )));
            }
        }
        let (mut a, mut b) = (inner, outer);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if h(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// The extension `Φ₁ ↦ Φ₁ + δ` (a wider strip with the same fixed boundary).
    pub fn extension(&self, delta: f64) -> Result<StripDomain> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidInput(format!("extension needs δ > 0, got {delta}")));
        }
        Ok(StripDomain {
            upper: self.upper.shifted(delta),
            ..self.clone()
        })
    }

    /// Largest `t ≥ 0` such that `x + τ·v` stays admissible for every `τ ∈ [0, t]`:
    /// inside `cl Ω₀`, outside `Ω₁` and, when `windowed`, inside the truncation window.
    pub fn ray_extent(&self, x: Point, v: Point, windowed: bool) -> f64 {
        let mut limit = f64::INFINITY;
        let (s_lo, s_hi) = if windowed {
            self.window
        } else {
            let (a0, b0) = self.lower.domain_interval();
            let (a1, b1) = self.upper.domain_interval();
            (a0.max(a1), b0.min(b1))
        };
        if v.x1 > 0.0 && s_hi.is_finite() {
            limit = limit.min(((s_hi - x.x1) / v.x1).max(0.0));
        } else if v.x1 < 0.0 && s_lo.is_finite() {
            limit = limit.min(((s_lo - x.x1) / v.x1).max(0.0));
        }
        if !windowed && limit.is_finite() {
            // open curve domains: stay strictly inside
            limit *= 1.0 - 1e-12;
        }
        let slack = 1e-11 * (1.0 + x.x2.abs());

        // fixed boundary: h concave, admissible set is an interval around 0
        let h = |t: f64| x.x2 + t * v.x2 - self.lower.eval(x.x1 + t * v.x1);
        let h_thr = h(0.0).min(-slack);
        let mut hi = 1.0_f64.min(limit);
        while h(hi) >= h_thr && hi < limit {
            hi = (2.0 * hi).min(limit);
            if hi > 1e9 {
                break;
            }
        }
        let lower_cut = if h(hi) >= h_thr {
            hi
        } else {
            bisect_last(|t| h(t) >= h_thr, 0.0, hi)
        };
        limit = limit.min(lower_cut);
        if limit <= 0.0 {
            return 0.0;
        }

        // free boundary: g convex, first dip below threshold on [0, limit]
        let g = |t: f64| self.upper.eval(x.x1 + t * v.x1) - x.x2 - t * v.x2;
        let dg = |t: f64| self.upper.slope(x.x1 + t * v.x1) * v.x1 - v.x2;
        let g_thr = g(0.0).min(-slack);
        let t_min = if dg(0.0) >= 0.0 {
            0.0
        } else if dg(limit) <= 0.0 {
            limit
        } else {
            bisect_last(|t| dg(t) < 0.0, 0.0, limit)
        };
        if g(t_min) >= g_thr {
            return limit;
        }
        bisect_last(|t| g(t) >= g_thr, 0.0, t_min)
    }

    /// Approximates `Δ(x)` from the direction scan described on [`delta_diagnostic`].
    pub fn delta_diagnostic(&self, ext: &StripDomain, x: Point, k_directions: usize) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Outside(x));
        }
        let golden = PI * (3.0 - 5.0_f64.sqrt());
        let mut best = 1.0_f64;
        for i in 0..k_directions {
            let v = Point::direction(i as f64 * golden);
            let Some(to_obstacle) = ext.distance_to_obstacle(x, v) else {
                continue;
            };
            let far = self.far_side(x, -1.0 * v);
            if to_obstacle > 0.0 {
                best = best.max(far / to_obstacle);
            }
        }
        Ok(best)
    }

    /// Distance from `x` along `v` to `cl Ω₁`, if reached inside the window.
    fn distance_to_obstacle(&self, x: Point, v: Point) -> Option<f64> {
        let mut limit = f64::INFINITY;
        if v.x1 > 0.0 {
            limit = (self.window.1 - x.x1) / v.x1;
        } else if v.x1 < 0.0 {
            limit = (self.window.0 - x.x1) / v.x1;
        }
        if !limit.is_finite() {
            limit = 1e6;
        }
        let g = |t: f64| self.upper.eval(x.x1 + t * v.x1) - x.x2 - t * v.x2;
        let dg = |t: f64| self.upper.slope(x.x1 + t * v.x1) * v.x1 - v.x2;
        let t_min = if dg(0.0) >= 0.0 {
            0.0
        } else if dg(limit) <= 0.0 {
            limit
        } else {
            bisect_last(|t| dg(t) < 0.0, 0.0, limit)
        };
        if g(t_min) > 0.0 {
            return None;
        }
        if g(0.0) <= 0.0 {
            return Some(0.0);
        }
        Some(bisect_last(|t| g(t) > 0.0, 0.0, t_min))
    }

    /// Distance from `x` along `v` to the farthest point of `Ω` in the window.
    fn far_side(&self, x: Point, v: Point) -> f64 {
        let mut limit = if v.x1 > 0.0 {
            (self.window.1 - x.x1) / v.x1
        } else if v.x1 < 0.0 {
            (self.window.0 - x.x1) / v.x1
        } else {
            f64::INFINITY
        };
        let h = |t: f64| x.x2 + t * v.x2 - self.lower.eval(x.x1 + t * v.x1);
        let mut hi = 1.0_f64.min(limit);
        while h(hi) >= 0.0 && hi < limit && hi < 1e6 {
            hi = (2.0 * hi).min(limit);
        }
        if h(hi) < 0.0 {
            limit = bisect_last(|t| h(t) >= 0.0, 0.0, hi);
        } else {
            limit = hi;
        }
        let g = |t: f64| self.upper.eval(x.x1 + t * v.x1) - x.x2 - t * v.x2;
        if g(limit) >= 0.0 {
            return limit;
        }
        // the far end sits inside Ω₁; back off to where the ray entered it
        let dg = |t: f64| self.upper.slope(x.x1 + t * v.x1) * v.x1 - v.x2;
        let t_min = if dg(0.0) >= 0.0 {
            0.0
        } else if dg(limit) <= 0.0 {
            limit
        } else {
            bisect_last(|t| dg(t) < 0.0, 0.0, limit)
        };
        bisect_last(|t| g(t) >= 0.0, 0.0, t_min)
    }

    /// Checks the structural conditions on `samples` equispaced abscissae of the window.
    pub fn validate_conditions(&self, samples: usize) -> ValidationReport {
        let samples = samples.max(2);
        let (a, b) = self.window;
        let mut violations = Vec::new();
        let mut strict = true;
        let mut curv_ok = true;
        let mut ordered = true;
        for i in 0..samples {
            let s = a + (b - a) * i as f64 / (samples - 1) as f64;
            for (which, c) in [(0u8, &self.lower), (1u8, &self.upper)] {
                let k = c.curvature(s);
                if !k.is_finite() {
                    if which == 1 {
                        curv_ok = false;
                        violations.push(Violation {
                            condition: 2,
                            s,
                            detail: format!("free-boundary curvature not finite ({k})"),
                        });
                    }
                } else if k <= 0.0 {
                    strict = false;
                    violations.push(Violation {
                        condition: 1,
                        s,
                        detail: format!("curve {which} has curvature {k:e} ≤ 0"),
                    });
                }
            }
            let gap = self.upper.eval(s) - self.lower.eval(s);
            if !(gap > 0.0) {
                ordered = false;
                violations.push(Violation {
                    condition: 0,
                    s,
                    detail: format!("Φ₁ − Φ₀ = {gap:e} is not positive"),
                });
            }
        }
        let mut slope_ok = true;
        let mut slope_gaps = Vec::new();
        for edge in [a, b] {
            // cusp edges sit on the boundary of a half-line curve domain, where both slopes blow up
            let (lo, hi) = self.lower.domain_interval();
            let near_cusp = (lo.is_finite() && edge == a && lo >= 0.0 && edge < 1.0)
                || (hi.is_finite() && edge == b);
            let gap = (self.lower.slope(edge) - self.upper.slope(edge)).abs();
            slope_gaps.push((edge, gap));
            if near_cusp {
                continue;
            }
            if !(gap <= self.slope_tol) {
                slope_ok = false;
                violations.push(Violation {
                    condition: 3,
                    s: edge,
                    detail: format!("slope gap {gap:e} exceeds {}", self.slope_tol),
                });
            }
        }
        ValidationReport {
            strict_convexity: strict,
            upper_curvature_available: curv_ok,
            slope_agreement: slope_ok,
            ordered,
            slope_gaps,
            violations,
        }
    }
}

/// Largest point of `[lo, hi]` where `pred` still holds, assuming `pred(lo)` and
/// that `pred` switches from true to false exactly once.
pub(crate) fn bisect_last(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Andrew's monotone chain; collinear points are dropped, duplicates collapse.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x1.total_cmp(&b.x1).then(a.x2.total_cmp(&b.x2)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(&(b - o));
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip() -> StripDomain {
        StripDomain::parabolic(1.0, 4.0).unwrap()
    }

    #[test]
    fn classify_examples() {
        let d = strip();
        assert_eq!(d.classify_point(Point::new(0.0, 0.5)), PointClass::Interior);
        assert_eq!(d.classify_point(Point::new(2.0, 4.0)), PointClass::FixedBoundary);
        assert_eq!(d.classify_point(Point::new(0.0, 2.0)), PointClass::Outside);
        assert_eq!(d.classify_point(Point::new(1.0, 2.0)), PointClass::FreeBoundary);
        assert_eq!(d.classify_point(Point::new(1.0, 0.5)), PointClass::Outside);
    }

    #[test]
    fn segment_examples() {
        let d = strip();
        let touching = d.segment_in_domain(Point::new(-1.0, 1.0), Point::new(1.0, 1.0));
        assert!(touching.inside);
        let arch = d.segment_in_domain(Point::new(-2.0, 4.0), Point::new(2.0, 4.0));
        assert!(!arch.inside);
        assert!((arch.witness.unwrap() - 0.5).abs() < 1e-9);
        let p = Point::new(0.3, 0.5);
        assert!(d.segment_in_domain(p, p).inside);
    }

    #[test]
    fn segment_margin_matches_closed_form() {
        // g(t) = (2t − 1)² for the chord from (−1, 1) to (1, 1)
        let d = strip();
        let (t, g) = d.min_obstacle_gap(Point::new(-1.0, 1.0), Point::new(1.0, 1.0));
        assert!((t - 0.5).abs() < 1e-9);
        assert!(g.abs() < 1e-15);
    }

    #[test]
    fn hull_examples() {
        let d = strip();
        assert!(d.hull_in_domain(&[Point::new(-1.0, 1.0), Point::new(1.0, 1.0), Point::new(0.0, 0.0)]));
        assert!(!d.hull_in_domain(&[Point::new(-2.0, 4.0), Point::new(2.0, 4.0), Point::new(0.0, 0.0)]));
        assert!(d.hull_in_domain(&[Point::new(0.1, 0.5)]));
        assert!(!d.hull_in_domain(&[Point::new(0.0, 3.0)]));
    }

    #[test]
    fn fixed_chord_examples() {
        let d = strip();
        let c = d.fixed_chord(Point::new(0.0, 1.0)).unwrap();
        assert!((c.lower.s + 1.0).abs() < 1e-12 && (c.upper.s - 1.0).abs() < 1e-12);
        assert!((c.alpha - 0.5).abs() < 1e-12);

        let c = d.fixed_chord(Point::new(2.0, 4.0)).unwrap();
        assert_eq!(c.lower, c.upper);

        let x = Point::new(0.0, 0.5);
        let c = d.fixed_chord(x).unwrap();
        assert!(d.segment_in_domain(c.lower.point, c.upper.point).inside);
        let back = c.alpha * c.lower.point + (1.0 - c.alpha) * c.upper.point;
        assert!(back.dist(&x) < 1e-12);

        assert!(d.fixed_chord(Point::new(0.0, 2.0)).is_err());
    }

    #[test]
    fn extension_examples() {
        let d = strip();
        let e = d.extension(0.21).unwrap();
        let target = StripDomain::parabolic(1.1, 4.0).unwrap();
        for s in [-3.0, 0.0, 1.5] {
            assert!((e.free(s) - target.free(s)).abs() < 1e-12);
        }
        assert!(d.extension(0.0).is_err());
        let twice = d.extension(0.1).unwrap().extension(0.2).unwrap();
        assert!((twice.free(0.7) - d.free(0.7) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn validation_examples() {
        assert!(strip().validate_conditions(101).passed());

        let bad = StripDomain::new(
            Curve::parabola(0.0),
            Curve::Quadratic { a: 2.0, b: 0.0, c: 1.0 },
            (-4.0, 4.0),
        )
        .unwrap();
        let r = bad.validate_conditions(101);
        assert!(!r.slope_agreement);
        assert!(r.slope_gaps.iter().all(|(_, g)| (g - 8.0).abs() < 1e-12));
        assert!(r.strict_convexity);

        let flat = StripDomain::new(
            Curve::Quadratic { a: 0.0, b: 0.5, c: 0.0 },
            Curve::Quadratic { a: 0.0, b: 0.5, c: 1.0 },
            (-1.0, 1.0),
        )
        .unwrap();
        let r = flat.validate_conditions(11);
        assert!(!r.strict_convexity);
        assert!(r.violations.iter().any(|v| v.condition == 1));
    }

    #[test]
    fn delta_diagnostic_behaviour() {
        let d = strip();
        let e = d.extension(0.2).unwrap();
        let x = Point::new(0.0, 0.5);
        let coarse = d.delta_diagnostic(&e, x, 16).unwrap();
        let fine = d.delta_diagnostic(&e, x, 64).unwrap();
        assert!(coarse >= 1.0 && fine >= coarse);
        assert!(d.delta_diagnostic(&e, Point::new(0.0, 5.0), 8).is_err());
        // near the fixed boundary the obstacle is far away in every direction
        let deep = d.delta_diagnostic(&e, Point::new(0.0, 1e-3), 64).unwrap();
        assert!(deep >= 1.0);
    }

    #[test]
    fn ray_extent_on_tangent_chord() {
        let d = strip();
        let x = Point::new(0.0, 1.0);
        let right = d.ray_extent(x, Point::new(1.0, 0.0), true);
        let left = d.ray_extent(x, Point::new(-1.0, 0.0), true);
        assert!((right - 1.0).abs() < 1e-9 && (left - 1.0).abs() < 1e-9);
        // a non-tangent direction at a free-boundary point is blocked on one side
        let v = Point::direction(0.3);
        assert!(d.ray_extent(x, v, true) < 1e-6);
        // window cut
        let y = Point::new(3.9, 15.5);
        assert!(d.ray_extent(y, (1.0 / 65f64.sqrt()) * Point::new(1.0, 8.0), true) <= 0.1 * 65f64.sqrt() + 1e-12);
    }

    #[test]
    fn hull_of_collinear_points_is_a_segment() {
        let h = convex_hull(&[Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)]);
        assert_eq!(h.len(), 2);
    }
}
