//! The projective transform `(x₁, x₂) ↦ (1/x₁, x₂/x₁)` on points, domains and step
//! functions, and the perturbation/extension primitives built from separating lines.

use serde::{Deserialize, Serialize};

use crate::classes::StepFunction;
use crate::error::{Error, Result};
use crate::geometry::{Point, StripDomain};
use crate::solver::BellmanField;

pub const DEFAULT_LINE_MARGIN: f64 = 0.1;

pub fn projective_point(p: Point) -> Result<Point> {
    if !(p.x1 > 0.0) {
        return Err(Error::InvalidInput(format!("projective transform needs x₁ > 0, got {}", p.x1)));
    }
    Ok(Point::new(1.0 / p.x1, p.x2 / p.x1))
}

/// `G_pr(y) = G(x)/x₁` for `y = pr(x)`.
pub fn projective_function_value(g_at_x: f64, x: Point) -> Result<f64> {
    projective_point(x)?;
    Ok(g_at_x / x.x1)
}

/// A source domain `Φ ≤ x₂ ≤ Ψ` on `x₁ > 0` and its image `Φ_pr ≤ y₂ ≤ Ψ_pr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePair {
    pub source: StripDomain,
    pub image: StripDomain,
}

impl ProjectivePair {
    pub fn new(source: StripDomain) -> Result<Self> {
        let (a, b) = source.window;
        if !(a > 0.0) {
            return Err(Error::InvalidInput(format!("source window must lie in x₁ > 0, got [{a}, {b}]")));
        }
        let image = StripDomain {
            lower: source.lower.projective(),
            upper: source.upper.projective(),
            window: (1.0 / b, 1.0 / a),
            ..source.clone()
        };
        Ok(ProjectivePair { source, image })
    }

    /// The Muckenhoupt-type source form `t² ≤ x₂ ≤ Q·t²` on `[a, b]`.
    pub fn quadratic_cusp(q: f64, window: (f64, f64)) -> Result<Self> {
        use crate::curve::Curve;
        if !(q > 1.0) {
            return Err(Error::InvalidInput(format!("need Q > 1, got {q}")));
        }
        let source = StripDomain::new(
            Curve::HalfLinePower { coef: 1.0, exponent: 2.0 },
            Curve::HalfLinePower { coef: q, exponent: 2.0 },
            window,
        )?;
        ProjectivePair::new(source)
    }
}

/// Time change of a positive step function: piece `i` keeps its order, gets length
/// `ℓᵢ·sᵢ/⟨φ₁⟩` and value `1/sᵢ`.
pub fn projective_step_function(phi: &StepFunction) -> Result<StepFunction> {
    if phi.values().iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidInput("projective transform needs positive values".into()));
    }
    let atoms = phi.atoms();
    let mean: f64 = atoms.iter().map(|(s, l)| s * l).sum();
    let mut bp = Vec::with_capacity(atoms.len() + 1);
    bp.push(0.0);
    let mut acc = 0.0;
    for (s, l) in &atoms[..atoms.len() - 1] {
        acc += l * s;
        bp.push(acc / mean);
    }
    bp.push(1.0);
    StepFunction::new(bp, atoms.iter().map(|(s, _)| 1.0 / s).collect())
}

/// The line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    /// Signed distance, positive above the line.
    pub fn signed_distance(&self, p: Point) -> f64 {
        (p.x2 - self.slope * p.x1 - self.intercept) / (1.0 + self.slope * self.slope).sqrt()
    }

    fn unit_normal(&self) -> Point {
        let n = (1.0 + self.slope * self.slope).sqrt();
        Point::new(-self.slope / n, 1.0 / n)
    }
}

/// Two non-parallel lines below the fixed boundary over the window.
pub fn separating_lines(d: &StripDomain) -> Result<(Line, Line)> {
    separating_lines_with_margin(d, DEFAULT_LINE_MARGIN)
}

pub fn separating_lines_with_margin(d: &StripDomain, margin: f64) -> Result<(Line, Line)> {
    let (a, b) = d.window;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("separating lines need a bounded window".into()));
    }
    let (lo, hi) = (d.lower.slope(a), d.lower.slope(b));
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!("degenerate slope range [{lo}, {hi}]")));
    }
    let c = 0.5 * (lo + hi);
    let w = (0.25 * (hi - lo)).min(1.0);
    let line = |slope: f64| {
        // Φ₀(s) − slope·s is convex with minimizer where Φ₀' = slope
        let s = crate::geometry::bisect_last(|s| d.lower.slope(s) <= slope, a, b);
        Line { slope, intercept: d.fixed(s) - slope * s - margin }
    };
    Ok((line(c - w), line(c + w)))
}

/// `E_δ(x) = (δ/2)(2 − e^{−dist(x,ℓ₁)} − e^{−dist(x,ℓ₂)})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EDelta {
    pub delta: f64,
    pub lines: (Line, Line),
}

impl EDelta {
    pub fn new(d: &StripDomain, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("δ must be positive, got {delta}")));
        }
        Ok(EDelta { delta, lines: separating_lines(d)? })
    }

    pub fn eval(&self, x: Point) -> f64 {
        let (d1, d2) = (self.lines.0.signed_distance(x), self.lines.1.signed_distance(x));
        0.5 * self.delta * (2.0 - (-d1).exp() - (-d2).exp())
    }

    pub fn gradient(&self, x: Point) -> Point {
        let term = |l: &Line| (0.5 * self.delta * (-l.signed_distance(x)).exp()) * l.unit_normal();
        term(&self.lines.0) + term(&self.lines.1)
    }

    /// `E(mid) − ½(E(y) + E(z))` in a cancellation-free form (distances are affine
    /// along a segment that stays on one side of both lines).
    pub fn midpoint_margin(&self, y: Point, z: Point) -> f64 {
        let term = |l: &Line| {
            let (a, b) = (l.signed_distance(y), l.signed_distance(z));
            let h = 0.25 * (a - b);
            (-0.5 * (a + b)).exp() * 2.0 * h.sinh().powi(2)
        };
        0.5 * self.delta * (term(&self.lines.0) + term(&self.lines.1))
    }
}

pub fn e_delta(d: &StripDomain, delta: f64, x: Point) -> Result<f64> {
    Ok(EDelta::new(d, delta)?.eval(x))
}

/// `L(z) = intercept + slope·z`, anchored at a free-boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportingLine {
    pub slope: [f64; 2],
    pub intercept: f64,
    pub anchor: Point,
}

impl SupportingLine {
    pub fn eval(&self, z: Point) -> f64 {
        self.intercept + self.slope[0] * z.x1 + self.slope[1] * z.x2
    }
}

/// Lines through the free-boundary row of `field + E_δ` (`perturbation = None` for the
/// bare field), with finite-difference gradients: centered along the row, one-sided
/// at window edges and towards the interior.
pub fn supporting_lines(field: &BellmanField, perturbation: Option<&EDelta>) -> Vec<SupportingLine> {
    let mesh = field.mesh();
    let (n_s, n_t) = (mesh.n_s(), mesh.n_theta());
    let top = n_t - 1;
    let pts = field.points();
    let at = |i: usize, j: usize| pts[i * n_t + j];
    let g = |i: usize, j: usize| {
        field.node(i, j) + perturbation.map_or(0.0, |e| e.eval(at(i, j)))
    };
    (0..n_s)
        .map(|i| {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n_s - 1));
            let t = at(r, top) - at(l, top);
            let dt = g(r, top) - g(l, top);
            let e = at(i, top - 1) - at(i, top);
            let de = g(i, top - 1) - g(i, top);
            let det = t.cross(&e);
            let grad = Point::new((dt * e.x2 - de * t.x2) / det, (t.x1 * de - e.x1 * dt) / det);
            let anchor = at(i, top);
            SupportingLine {
                slope: [grad.x1, grad.x2],
                intercept: g(i, top) - grad.dot(&anchor),
                anchor,
            }
        })
        .collect()
}

/// `min L_x(z)` over anchors `x` that see `z` inside `dext`.
pub fn inf_of_lines_extension(dext: &StripDomain, lines: &[SupportingLine], z: Point) -> Result<f64> {
    lines
        .iter()
        .filter(|l| l.anchor == z || dext.segment_in_domain(l.anchor, z).inside)
        .map(|l| l.eval(z))
        .reduce(f64::min)
        .ok_or(Error::NoVisibleAnchor(z))
}
