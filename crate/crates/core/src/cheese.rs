//! Cheese domains: a strictly convex outer set with separated disk holes removed,
//! and the tangent-chord martingale that carries any start point to the outer
//! boundary.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Point};
use crate::martingale::{MartingaleNode, MartingaleTree, Region};

/// Relative tolerance for "on the circle" and for tangency in segment checks.
pub const CHEESE_TOL: f64 = 1e-9;

const FIRST_SPLIT_DIRECTIONS: usize = 180;
const ELLIPSE_SAMPLES: usize = 4096;
const MIN_PARAMETER: f64 = 1e-12;
const PRINCIPLE_SEED: u64 = 0x00C4_EE5E;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        Disk { center, radius }
    }
}

/// Axis-aligned ellipse; equal semi-axes give a disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterSet {
    pub center: Point,
    pub semi_axes: (f64, f64),
}

impl OuterSet {
    pub fn disk(center: Point, radius: f64) -> Self {
        OuterSet { center, semi_axes: (radius, radius) }
    }

    pub fn is_disk(&self) -> bool {
        self.semi_axes.0 == self.semi_axes.1
    }

    /// `(q₁/a)² + (q₂/b)²` for `q = p − center`; 1 on the boundary.
    fn level(&self, p: Point) -> f64 {
        let q = p - self.center;
        (q.x1 / self.semi_axes.0).powi(2) + (q.x2 / self.semi_axes.1).powi(2)
    }

    fn contains(&self, p: Point) -> bool {
        self.level(p) <= 1.0 + CHEESE_TOL
    }

    fn on_boundary(&self, p: Point) -> bool {
        (self.level(p).sqrt() - 1.0).abs() <= CHEESE_TOL
    }

    fn boundary_point(&self, angle: f64) -> Point {
        self.center + Point::new(self.semi_axes.0 * angle.cos(), self.semi_axes.1 * angle.sin())
    }

    /// Exit parameter of the ray `p + t·v` from a point inside.
    fn exit(&self, p: Point, v: Point) -> f64 {
        let (a, b) = self.semi_axes;
        let u = Point::new((p.x1 - self.center.x1) / a, (p.x2 - self.center.x2) / b);
        let w = Point::new(v.x1 / a, v.x2 / b);
        let qa = w.norm_sq();
        let qb = 2.0 * u.dot(&w);
        let qc = (u.norm_sq() - 1.0).min(0.0);
        let root = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let q = -0.5 * (qb + qb.signum() * root);
        if q == 0.0 {
            return 0.0;
        }
        (q / qa).max(qc / q)
    }

    fn snap(&self, p: Point) -> Point {
        if !self.is_disk() {
            return p;
        }
        let q = p - self.center;
        self.center + (self.semi_axes.0 / q.norm()) * q
    }

    /// Distance from an inside point to the boundary curve.
    fn boundary_distance(&self, p: Point) -> f64 {
        if self.is_disk() {
            return self.semi_axes.0 - p.dist(&self.center);
        }
        let n = ELLIPSE_SAMPLES;
        let step = std::f64::consts::TAU / n as f64;
        let dist = |t: f64| self.boundary_point(t).dist(&p);
        let k = (0..n).min_by(|&i, &j| dist(i as f64 * step).total_cmp(&dist(j as f64 * step))).unwrap_or(0);
        let (mut lo, mut hi) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if dist(m1) < dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        dist(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheeseDomain {
    pub outer: OuterSet,
    pub holes: Vec<Disk>,
    pub min_separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Site {
    Interior,
    Outer,
    Hole(usize),
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheeseReport {
    pub valid: bool,
    pub worst_separation: f64,
    pub issues: Vec<String>,
}

impl CheeseDomain {
    pub fn new(outer: OuterSet, holes: Vec<Disk>, min_separation: f64) -> Self {
        CheeseDomain { outer, holes, min_separation }
    }

    pub fn classify(&self, p: Point) -> Site {
        if !p.is_finite() || !self.outer.contains(p) {
            return Site::Outside;
        }
        if self.outer.on_boundary(p) {
            return Site::Outer;
        }
        for (j, h) in self.holes.iter().enumerate() {
            let d = p.dist(&h.center);
            if (d - h.radius).abs() <= CHEESE_TOL * h.radius.max(1.0) {
                return Site::Hole(j);
            }
            if d < h.radius {
                return Site::Outside;
            }
        }
        Site::Interior
    }

    pub fn contains(&self, p: Point) -> bool {
        self.classify(p) != Site::Outside
    }

    /// Rejection sample from the cheese.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let (a, b) = self.outer.semi_axes;
        loop {
            let p = self.outer.center + Point::new(rng.gen_range(-a..a), rng.gen_range(-b..b));
            if self.outer.level(p) < 1.0 && self.classify(p) == Site::Interior {
                return p;
            }
        }
    }

    /// `n` reproducible interior starts.
    pub fn sample_starts(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample_point(&mut rng)).collect()
    }

    /// First boundary hit of the ray `p + t·v`, ignoring hole `skip`.
    fn first_hit(&self, p: Point, v: Point, skip: Option<usize>) -> (f64, Site) {
        let mut best = (self.outer.exit(p, v), Site::Outer);
        for (j, h) in self.holes.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let q = p - h.center;
            let b = q.dot(&v);
            let c = q.norm_sq() - h.radius * h.radius;
            let disc = b * b - c;
            if disc <= 0.0 {
                continue;
            }
            let t = -b - disc.sqrt();
            if t > MIN_PARAMETER && t < best.0 {
                best = (t, Site::Hole(j));
            }
        }
        best
    }

    fn snap(&self, p: Point, site: Site) -> Point {
        match site {
            Site::Outer => self.outer.snap(p),
            Site::Hole(j) => {
                let h = self.holes[j];
                let q = p - h.center;
                h.center + (h.radius / q.norm()) * q
            }
            _ => p,
        }
    }

    /// Chord through `x` along unit `v`, ending at the first boundary hit each way.
    fn chord(&self, x: Point, v: Point, skip: Option<usize>) -> Split {
        let (t1, s1) = self.first_hit(x, -1.0 * v, skip);
        let (t2, s2) = self.first_hit(x, v, skip);
        let y = self.snap(x - t1 * v, s1);
        let z = self.snap(x + t2 * v, s2);
        Split { y, z, alpha: t2 / (t1 + t2), sites: (s1, s2), t: (t1, t2) }
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    y: Point,
    z: Point,
    alpha: f64,
    sites: (Site, Site),
    t: (f64, f64),
}

pub fn validate_cheese(c: &CheeseDomain) -> CheeseReport {
    let mut issues = Vec::new();
    let mut worst = f64::INFINITY;
    let (a, b) = c.outer.semi_axes;
    if !(a > 0.0 && b > 0.0) {
        issues.push(format!("outer semi-axes ({a}, {b}) must be positive"));
    }
    if !(c.min_separation > 0.0) {
        issues.push(format!("min_separation {} must be positive", c.min_separation));
    }
    for (j, h) in c.holes.iter().enumerate() {
        if !(h.radius > 0.0) {
            issues.push(format!("hole {j} has radius {}", h.radius));
            continue;
        }
        let gap = if c.outer.level(h.center) < 1.0 {
            c.outer.boundary_distance(h.center) - h.radius
        } else {
            -h.radius
        };
        worst = worst.min(gap);
        if gap <= 0.0 {
            issues.push(format!("hole {j} is not strictly inside the outer set (gap {gap})"));
        } else if gap < c.min_separation {
            issues.push(format!("hole {j} is {gap} from the outer boundary"));
        }
        for (i, g) in c.holes.iter().enumerate().take(j) {
            let gap = h.center.dist(&g.center) - h.radius - g.radius;
            worst = worst.min(gap);
            if gap <= 0.0 {
                issues.push(format!("holes {i} and {j} overlap (gap {gap})"));
            } else if gap < c.min_separation {
                issues.push(format!("holes {i} and {j} are {gap} apart"));
            }
        }
    }
    CheeseReport { valid: issues.is_empty(), worst_separation: worst, issues }
}

fn segment_point_distance(a: Point, b: Point, p: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return a.dist(&p);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a.lerp(&b, t).dist(&p)
}

/// The closed segment `[a, b]` stays in the cheese; tangency to a hole counts as inside.
pub fn segment_in_cheese(c: &CheeseDomain, a: Point, b: Point) -> bool {
    if !c.outer.contains(a) || !c.outer.contains(b) {
        return false;
    }
    c.holes
        .iter()
        .all(|h| segment_point_distance(a, b, h.center) >= h.radius * (1.0 - CHEESE_TOL))
}

/// Tangent chord through a point `x` of a hole boundary, returned as `(y, z, α)`
/// with `x = α·y + (1 − α)·z`.
pub fn free_split(c: &CheeseDomain, x: Point) -> Result<(Point, Point, f64)> {
    let report = validate_cheese(c);
    if !report.valid {
        return Err(Error::Validation(report.issues.join("; ")));
    }
    match c.classify(x) {
        Site::Hole(j) => {
            let s = tangent_split(c, x, j);
            Ok((s.y, s.z, s.alpha))
        }
        _ => Err(Error::InvalidInput(format!("({}, {}) is not on a hole boundary", x.x1, x.x2))),
    }
}

// On a strictly convex hole the tangent line is the only one through x that
// avoids the hole interior on both sides, so no rotation search is needed.
fn tangent_split(c: &CheeseDomain, x: Point, j: usize) -> Split {
    let n = x - c.holes[j].center;
    let v = (1.0 / n.norm()) * Point::new(-n.x2, n.x1);
    c.chord(x, v, Some(j))
}

fn longest_split(c: &CheeseDomain, x: Point) -> Split {
    (0..FIRST_SPLIT_DIRECTIONS)
        .map(|k| c.chord(x, Point::direction(std::f64::consts::PI * k as f64 / FIRST_SPLIT_DIRECTIONS as f64), None))
        .max_by(|a, b| (a.t.0 + a.t.1).total_cmp(&(b.t.0 + b.t.1)))
        .expect("at least one direction")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheeseRun {
    pub tree: MartingaleTree,
    /// `E(−|M_n|²)` for `n = 0..=steps`.
    pub trace: Vec<f64>,
    /// Mass on hole boundaries (or in the interior) after each step, starting at step 0.
    pub free_mass: Vec<f64>,
    pub residual: f64,
    pub steps: usize,
    pub shortest_side: f64,
}

struct ArenaNode {
    position: Point,
    prob: f64,
    site: Site,
    children: Vec<usize>,
}

fn lyapunov(p: Point) -> f64 {
    -p.norm_sq()
}

pub fn simulate_to_boundary(c: &CheeseDomain, x0: Point, max_steps: usize, mass_tol: f64) -> Result<CheeseRun> {
    let report = validate_cheese(c);
    if !report.valid {
        return Err(Error::Validation(report.issues.join("; ")));
    }
    let site = c.classify(x0);
    if site == Site::Outside {
        return Err(Error::Outside(x0));
    }
    let mut arena = vec![ArenaNode { position: x0, prob: 1.0, site, children: Vec::new() }];
    let mut frontier: Vec<usize> = if site == Site::Outer { Vec::new() } else { vec![0] };
    let mut frozen_g = if site == Site::Outer { lyapunov(x0) } else { 0.0 };
    let mass = |arena: &[ArenaNode], ids: &[usize]| ids.iter().map(|&i| arena[i].prob).sum::<f64>() + 0.0;
    let mut trace = vec![lyapunov(x0)];
    let mut free_mass = vec![mass(&arena, &frontier)];
    let mut shortest = f64::INFINITY;
    let mut steps = 0;
    while mass(&arena, &frontier) >= mass_tol && !frontier.is_empty() {
        if steps == max_steps {
            return Err(Error::MaxStepsExceeded { steps, residual: mass(&arena, &frontier) });
        }
        let mut next = Vec::new();
        for &i in &frontier {
            let (x, p) = (arena[i].position, arena[i].prob);
            let split = match arena[i].site {
                Site::Hole(j) => tangent_split(c, x, j),
                _ => longest_split(c, x),
            };
            shortest = shortest.min(split.t.0).min(split.t.1);
            for (pos, w, s) in [(split.y, split.alpha, split.sites.0), (split.z, 1.0 - split.alpha, split.sites.1)] {
                let id = arena.len();
                arena.push(ArenaNode { position: pos, prob: p * w, site: s, children: Vec::new() });
                arena[i].children.push(id);
                if s == Site::Outer {
                    frozen_g += p * w * lyapunov(pos);
                } else {
                    next.push(id);
                }
            }
        }
        frontier = next;
        steps += 1;
        let live: f64 = frontier.iter().map(|&i| arena[i].prob * lyapunov(arena[i].position)).sum();
        trace.push(frozen_g + live);
        free_mass.push(mass(&arena, &frontier));
    }
    fn build(arena: &[ArenaNode], i: usize) -> MartingaleNode {
        let n = &arena[i];
        let children = n.children.iter().map(|&k| build(arena, k)).collect();
        MartingaleNode::split(n.position, n.prob, children)
    }
    let residual = mass(&arena, &frontier);
    Ok(CheeseRun {
        tree: MartingaleTree::new(build(&arena, 0)),
        trace,
        free_mass,
        residual,
        steps,
        shortest_side: shortest,
    })
}

impl Region for CheeseDomain {
    fn hull_ok(&self, vertices: &[Point]) -> bool {
        if !vertices.iter().all(|&p| self.outer.contains(p)) {
            return false;
        }
        let hull = convex_hull(vertices);
        match hull.len() {
            0 => true,
            1 => self.contains(hull[0]),
            2 => segment_in_cheese(self, hull[0], hull[1]),
            n => {
                // Thin hulls of nearly collinear points are treated as their longest edge.
                let (mut ia, mut ib, mut far) = (0, 0, 0.0);
                for i in 0..n {
                    for k in i + 1..n {
                        let d = hull[i].dist(&hull[k]);
                        if d > far {
                            (ia, ib, far) = (i, k, d);
                        }
                    }
                }
                let width = hull
                    .iter()
                    .map(|&p| segment_point_distance(hull[ia], hull[ib], p))
                    .fold(0.0, f64::max);
                if width <= CHEESE_TOL * far.max(1.0) {
                    return segment_in_cheese(self, hull[ia], hull[ib]);
                }
                let edges_ok = (0..n).all(|i| segment_in_cheese(self, hull[i], hull[(i + 1) % n]));
                let centers_out = self.holes.iter().all(|h| {
                    !(0..n).all(|i| (hull[(i + 1) % n] - hull[i]).cross(&(h.center - hull[i])) > 0.0)
                });
                edges_ok && centers_out
            }
        }
    }

    fn on_fixed_boundary(&self, p: Point) -> bool {
        self.classify(p) == Site::Outer
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheeseSample {
    pub start: Point,
    pub bound: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheesePrincipleReport {
    pub samples: Vec<CheeseSample>,
    pub boundary_min: f64,
    pub worst_bound: f64,
    pub passed: bool,
}

/// Lower bounds `E f(M_∞)` from simulated martingales at `n_mc` random starts.
/// Unresolved mass is charged at the sampled boundary minimum.
pub fn minimal_principle_cheese(
    c: &CheeseDomain,
    f: &(dyn Fn(Point) -> f64 + Sync),
    n_mc: usize,
    tol: f64,
) -> Result<CheesePrincipleReport> {
    let report = validate_cheese(c);
    if !report.valid {
        return Err(Error::Validation(report.issues.join("; ")));
    }
    let boundary_min = (0..ELLIPSE_SAMPLES)
        .map(|k| f(c.outer.boundary_point(std::f64::consts::TAU * k as f64 / ELLIPSE_SAMPLES as f64)))
        .fold(f64::INFINITY, f64::min);
    let starts = c.sample_starts(n_mc, PRINCIPLE_SEED);
    let samples = starts
        .par_iter()
        .map(|&x| {
            let run = simulate_to_boundary(c, x, 500, 1e-12)?;
            let resolved: f64 = run
                .tree
                .leaves()
                .iter()
                .filter(|l| c.classify(l.position) == Site::Outer)
                .map(|l| l.prob * f(l.position))
                .sum();
            Ok(CheeseSample { start: x, bound: resolved + run.residual * boundary_min, residual: run.residual })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_bound = samples.iter().map(|s| s.bound).fold(f64::INFINITY, f64::min);
    let passed = samples.iter().all(|s| s.bound >= boundary_min - tol);
    Ok(CheesePrincipleReport { samples, boundary_min, worst_bound, passed })
}
