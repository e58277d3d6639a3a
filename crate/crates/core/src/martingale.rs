//! Finite binary Ω-martingales: validation, expectations, Bellman traces and the
//! two conversions between class functions and martingales.

use serde::{Deserialize, Serialize};

use crate::classes::{average, StepFunction};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointClass, StripDomain};
use crate::solver::BellmanField;

/// Tolerance of the martingale property `parent = Σ pᵢ·childᵢ / p`.
pub const MARTINGALE_TOL: f64 = 1e-10;

/// Probability bookkeeping tolerance.
pub const PROB_TOL: f64 = 1e-12;

pub const DEFAULT_DEPTH_CAP: usize = 40;

/// Subintervals shorter than this are not split further.
pub const LENGTH_FLOOR: f64 = 1e-6;

/// Regions a martingale may live in.
pub trait Region {
    fn hull_ok(&self, vertices: &[Point]) -> bool;
    fn on_fixed_boundary(&self, p: Point) -> bool;
}

impl Region for StripDomain {
    fn hull_ok(&self, vertices: &[Point]) -> bool {
        self.hull_in_domain(vertices)
    }

    fn on_fixed_boundary(&self, p: Point) -> bool {
        self.classify_point(p) == PointClass::FixedBoundary
    }
}

/// Where a leaf came from when the tree was built from a step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub start: f64,
    pub end: f64,
    pub piece: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleNode {
    pub position: Point,
    pub prob: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<MartingaleNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

impl MartingaleNode {
    pub fn leaf(position: Point, prob: f64) -> Self {
        MartingaleNode { position, prob, children: Vec::new(), origin: None }
    }

    pub fn split(position: Point, prob: f64, children: Vec<MartingaleNode>) -> Self {
        MartingaleNode { position, prob, children, origin: None }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn depth(&self) -> usize {
        self.children.iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a MartingaleNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.leaves(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleTree {
    pub root: MartingaleNode,
    pub depth: usize,
}

impl MartingaleTree {
    pub fn new(root: MartingaleNode) -> Self {
        let depth = root.depth();
        MartingaleTree { root, depth }
    }

    pub fn constant(position: Point) -> Self {
        MartingaleTree::new(MartingaleNode::leaf(position, 1.0))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&MartingaleNode> {
        let mut out = Vec::new();
        self.root.leaves(&mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        fn count(n: &MartingaleNode) -> usize {
            1 + n.children.iter().map(count).sum::<usize>()
        }
        count(&self.root)
    }

    /// Leaf atoms `(s, mass)` with fragments of the same source piece merged.
    pub fn terminal_atoms(&self) -> Vec<(f64, f64)> {
        self.merged_leaves().into_iter().map(|(s, _, m)| (s, m)).collect()
    }

    fn merged_leaves(&self) -> Vec<(f64, Option<Origin>, f64)> {
        let mut merged: Vec<(f64, Option<Origin>, f64)> = Vec::new();
        for leaf in self.leaves() {
            let s = leaf.position.x1;
            if let (Some((ls, Some(lo), lm)), Some(o)) = (merged.last_mut(), leaf.origin) {
                if lo.piece == o.piece && lo.end == o.start && *ls == s {
                    lo.end = o.end;
                    *lm = lo.end - lo.start;
                    continue;
                }
            }
            let mass = leaf.origin.map_or(leaf.prob, |o| o.end - o.start);
            merged.push((s, leaf.origin, mass));
        }
        merged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeViolation {
    /// Child indices from the root.
    pub path: Vec<usize>,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TreeReport {
    pub nodes: usize,
    pub violations: Vec<TreeViolation>,
}

impl TreeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate<R: Region + ?Sized>(m: &MartingaleTree, region: &R) -> TreeReport {
    let mut report = TreeReport::default();
    if (m.root.prob - 1.0).abs() > PROB_TOL {
        report.violations.push(TreeViolation {
            path: Vec::new(),
            kind: format!("root probability {}", m.root.prob),
        });
    }
    let mut path = Vec::new();
    validate_node(&m.root, region, &mut path, &mut report);
    report
}

fn validate_node<R: Region + ?Sized>(
    n: &MartingaleNode,
    region: &R,
    path: &mut Vec<usize>,
    report: &mut TreeReport,
) {
    report.nodes += 1;
    let mut fail = |kind: String, path: &[usize]| {
        report.violations.push(TreeViolation { path: path.to_vec(), kind })
    };
    if !(n.prob > 0.0 && n.prob <= 1.0 + PROB_TOL) {
        fail(format!("probability {} outside (0, 1]", n.prob), path);
    }
    if n.is_leaf() {
        if !region.on_fixed_boundary(n.position) {
            fail(format!("leaf ({}, {}) off the fixed boundary", n.position.x1, n.position.x2), path);
        }
        return;
    }
    let total: f64 = n.children.iter().map(|c| c.prob).sum();
    if (total - n.prob).abs() > PROB_TOL {
        fail(format!("children carry {total}, node carries {}", n.prob), path);
    }
    let mean = n
        .children
        .iter()
        .fold(Point::new(0.0, 0.0), |acc, c| acc + (c.prob / total) * c.position);
    let scale = 1.0 + n.position.norm();
    if mean.dist(&n.position) > MARTINGALE_TOL * scale {
        fail(format!("martingale defect {:e}", mean.dist(&n.position)), path);
    }
    let mut hull = vec![n.position];
    hull.extend(n.children.iter().map(|c| c.position));
    if !region.hull_ok(&hull) {
        fail("hull leaves the domain".into(), path);
    }
    for (k, c) in n.children.iter().enumerate() {
        path.push(k);
        validate_node(c, region, path, report);
        path.pop();
    }
}

/// Depth-1 tree along the fixed chord through `x` (depth 0 on the fixed boundary).
pub fn simple_from_point(d: &StripDomain, x: Point) -> Result<MartingaleTree> {
    match d.classify_point(x) {
        PointClass::Outside => Err(Error::Outside(x)),
        PointClass::FixedBoundary => Ok(MartingaleTree::constant(x)),
        _ => {
            let chord = d.fixed_chord(x)?;
            Ok(MartingaleTree::new(MartingaleNode::split(
                x,
                1.0,
                vec![
                    MartingaleNode::leaf(chord.lower.point, chord.alpha),
                    MartingaleNode::leaf(chord.upper.point, 1.0 - chord.alpha),
                ],
            )))
        }
    }
}

/// `Σ_leaves prob · f(s_leaf)`.
pub fn expectation(m: &MartingaleTree, f: impl Fn(f64) -> f64) -> f64 {
    m.leaves().iter().map(|l| l.prob * f(l.position.x1)).sum()
}

/// `(E G(M₀), …, E G(M_depth))`; stopped branches keep their leaf value.
pub fn bellman_trace(m: &MartingaleTree, g: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut trace = vec![0.0; m.depth + 1];
    fn walk(n: &MartingaleNode, level: usize, g: &dyn Fn(Point) -> f64, trace: &mut [f64]) {
        let v = n.prob * g(n.position);
        if n.is_leaf() {
            for t in &mut trace[level..] {
                *t += v;
            }
        } else {
            trace[level] += v;
            for c in &n.children {
                walk(c, level + 1, g, trace);
            }
        }
    }
    walk(&m.root, 0, &g, &mut trace);
    trace
}

/// Builds a martingale with terminal distribution `μ_φ` by admissible binary splits in `dext`.
pub fn from_function(
    phi: &StepFunction,
    d: &StripDomain,
    dext: &StripDomain,
    depth_cap: usize,
    t_grid: usize,
) -> Result<MartingaleTree> {
    let root = build(phi, d, dext, (0.0, 1.0), 0, depth_cap, t_grid.max(2))?;
    Ok(MartingaleTree::new(root))
}

fn build(
    phi: &StepFunction,
    d: &StripDomain,
    dext: &StripDomain,
    (a, b): (f64, f64),
    depth: usize,
    depth_cap: usize,
    t_grid: usize,
) -> Result<MartingaleNode> {
    let bp = phi.breakpoints();
    let first = bp.partition_point(|&t| t <= a) - 1;
    let inner: Vec<f64> = bp[first + 1..].iter().copied().take_while(|&t| t < b).collect();
    if inner.is_empty() {
        let s = phi.values()[first];
        let mut leaf = MartingaleNode::leaf(d.boundary_point(s).point, b - a);
        leaf.origin = Some(Origin { start: a, end: b, piece: first });
        return Ok(leaf);
    }
    if depth >= depth_cap || b - a < LENGTH_FLOOR {
        return Err(Error::DepthExceeded { a, b, depth });
    }
    let x = average(phi, (a, b), d)?;
    let admissible = |t: f64| {
        let left = average(phi, (a, t), d);
        let right = average(phi, (t, b), d);
        match (left, right) {
            (Ok(l), Ok(r)) => dext.segment_in_domain(l, r).inside,
            _ => false,
        }
    };
    let mid = 0.5 * (a + b);
    let by_balance = |ts: &mut Vec<f64>| ts.sort_by(|p, q| (p - mid).abs().total_cmp(&(q - mid).abs()).then(p.total_cmp(q)));
    let mut aligned = inner;
    by_balance(&mut aligned);
    let t = match aligned.into_iter().find(|&t| admissible(t)) {
        Some(t) => t,
        None => {
            let mut grid: Vec<f64> = (1..t_grid)
                .map(|k| a + (b - a) * k as f64 / t_grid as f64)
                .filter(|&t| t > a && t < b)
                .collect();
            by_balance(&mut grid);
            grid.into_iter()
                .find(|&t| admissible(t))
                .ok_or(Error::ResolutionInsufficient { a, b, t_grid })?
        }
    };
    let (left, right) = rayon::join(
        || build(phi, d, dext, (a, t), depth + 1, depth_cap, t_grid),
        || build(phi, d, dext, (t, b), depth + 1, depth_cap, t_grid),
    );
    Ok(MartingaleNode {
        position: x,
        prob: b - a,
        children: vec![left?, right?],
        origin: None,
    })
}

/// Lays the terminal atoms out as a non-decreasing step function.
pub fn to_step_function(m: &MartingaleTree) -> Result<StepFunction> {
    let merged = m.merged_leaves();
    let sorted = merged.windows(2).all(|w| w[0].0 <= w[1].0);
    if sorted {
        // leaves that tile [0, 1] in order keep their exact piece ends
        let mut bp = vec![0.0];
        for (_, o, _) in &merged {
            match o {
                Some(o) if o.start == *bp.last().unwrap() => bp.push(o.end),
                _ => break,
            }
        }
        if bp.len() == merged.len() + 1 && bp.last() == Some(&1.0) {
            return StepFunction::new(bp, merged.iter().map(|a| a.0).collect());
        }
    }
    StepFunction::from_sorted_layout(merged.into_iter().map(|(s, _, m)| (s, m)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPrincipleReport {
    pub field_min: f64,
    pub boundary_min: f64,
    /// `field_min − boundary_min`; non-negative up to tolerance for a locally concave field.
    pub gap: f64,
}

/// Samples of the fixed boundary the field draws on: the window row plus the
/// stretch beyond it reached by the chords of the window columns.
const BOUNDARY_SAMPLES: usize = 4097;

pub fn minimal_principle_check(field: &BellmanField) -> MinimalPrincipleReport {
    let d = field.domain();
    let field_min = field.values().iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = d.window;
    for p in field.points() {
        if let Ok(c) = d.fixed_chord(*p) {
            lo = lo.min(c.lower.s);
            hi = hi.max(c.upper.s);
        }
    }
    let f = field.boundary_fn();
    let sampled = (0..BOUNDARY_SAMPLES)
        .map(|k| f.eval(lo + (hi - lo) * k as f64 / (BOUNDARY_SAMPLES - 1) as f64))
        .filter(|v| v.is_finite());
    let boundary_min = field.boundary_data().iter().copied().chain(sampled).fold(f64::INFINITY, f64::min);
    MinimalPrincipleReport { field_min, boundary_min, gap: field_min - boundary_min }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip() -> StripDomain {
        StripDomain::parabolic(1.0, 4.0).unwrap()
    }

    fn apex() -> MartingaleTree {
        MartingaleTree::new(MartingaleNode::split(
            Point::new(0.0, 1.0),
            1.0,
            vec![
                MartingaleNode::leaf(Point::new(-1.0, 1.0), 0.5),
                MartingaleNode::leaf(Point::new(1.0, 1.0), 0.5),
            ],
        ))
    }

    #[test]
    fn validate_examples() {
        let d = strip();
        assert!(validate(&MartingaleTree::constant(Point::new(2.0, 4.0)), &d).passed());
        assert!(validate(&apex(), &d).passed());
        let bad = MartingaleTree::new(MartingaleNode::split(
            Point::new(0.0, 4.0),
            1.0,
            vec![
                MartingaleNode::leaf(Point::new(-2.0, 4.0), 0.5),
                MartingaleNode::leaf(Point::new(2.0, 4.0), 0.5),
            ],
        ));
        let r = validate(&bad, &d);
        assert!(!r.passed());
        assert_eq!(r.violations[0].path, Vec::<usize>::new());
    }

    #[test]
    fn simple_from_point_examples() {
        let d = strip();
        let t = simple_from_point(&d, Point::new(1.0, 1.0)).unwrap();
        assert_eq!(t.depth, 0);
        let t = simple_from_point(&d, Point::new(0.0, 1.0)).unwrap();
        assert_eq!(t.depth, 1);
        let l = t.leaves();
        assert!((l[0].position.x1 + 1.0).abs() < 1e-9 && (l[1].position.x1 - 1.0).abs() < 1e-9);
        assert!((l[0].prob - 0.5).abs() < 1e-9);
        for x in [Point::new(0.3, 0.5), Point::new(-2.0, 4.5), Point::new(3.9, 16.0)] {
            assert!(validate(&simple_from_point(&d, x).unwrap(), &d).passed());
        }
    }

    #[test]
    fn expectation_examples() {
        let t = apex();
        assert_eq!(expectation(&t, |_| 2.5), 2.5);
        assert_eq!(expectation(&t, |s| s * s), 1.0);
        let d = strip();
        let t = simple_from_point(&d, Point::new(0.7, 0.9)).unwrap();
        let affine = |s: f64| 1.0 - 2.0 * s + 0.5 * s * s;
        assert!((expectation(&t, affine) - (1.0 - 1.4 + 0.45)).abs() < 1e-10);
    }

    #[test]
    fn bellman_trace_examples() {
        let t = apex();
        let tr = bellman_trace(&t, |p| 3.0 * p.x1 - p.x2);
        assert_eq!(tr.len(), 2);
        assert!((tr[0] - tr[1]).abs() < 1e-15);
        assert_eq!(bellman_trace(&MartingaleTree::constant(Point::new(0.0, 0.0)), |_| 1.0), vec![1.0]);
        // a stopped branch keeps contributing at deeper levels
        let uneven = MartingaleTree::new(MartingaleNode::split(
            Point::new(0.0, 1.0),
            1.0,
            vec![MartingaleNode::leaf(Point::new(-1.0, 1.0), 0.5), apex_shifted()],
        ));
        let tr = bellman_trace(&uneven, |_| 1.0);
        assert_eq!(tr, vec![1.0, 1.0, 1.0]);
    }

    fn apex_shifted() -> MartingaleNode {
        MartingaleNode::split(
            Point::new(1.0, 1.0),
            0.5,
            vec![
                MartingaleNode::leaf(Point::new(1.0, 1.0), 0.25),
                MartingaleNode::leaf(Point::new(1.0, 1.0), 0.25),
            ],
        )
    }

    #[test]
    fn from_function_examples() {
        let d = strip();
        let ext = d.extension(0.2).unwrap();
        let c = StepFunction::constant(0.4);
        assert_eq!(from_function(&c, &d, &ext, 40, 256).unwrap().depth, 0);
        let phi = StepFunction::uniform(vec![-1.0, 1.0]).unwrap();
        let t = from_function(&phi, &d, &ext, 40, 256).unwrap();
        assert_eq!(t.depth, 1);
        assert_eq!(t.root.position, Point::new(0.0, 1.0));
        assert!(validate(&t, &ext).passed());
        assert_eq!(to_step_function(&t).unwrap(), phi);
    }

    #[test]
    fn round_trip_matches_rearrangement() {
        let d = strip();
        let ext = d.extension(0.2).unwrap();
        let phi = StepFunction::new(vec![0.0, 0.2, 0.45, 0.7, 1.0], vec![0.5, -0.3, 0.9, -0.3]).unwrap();
        assert!(crate::classes::membership(&phi, &d, 128).member);
        let t = from_function(&phi, &d, &ext, 40, 256).unwrap();
        assert!(validate(&t, &ext).passed());
        assert_eq!(to_step_function(&t).unwrap(), crate::classes::rearrange(&phi));
    }

    #[test]
    fn to_step_function_examples() {
        let s = to_step_function(&apex()).unwrap();
        assert_eq!(s.values(), &[-1.0, 1.0]);
        assert_eq!(s.breakpoints(), &[0.0, 0.5, 1.0]);
        let c = to_step_function(&MartingaleTree::constant(Point::new(2.0, 4.0))).unwrap();
        assert_eq!(c, StepFunction::constant(2.0));
    }
}
