//! Value iteration for the martingale Bellman function on an `(s, θ)` mesh, with
//! local-concavity verification and greedy strategy extraction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryFn;
use crate::error::{Error, Result};
use crate::geometry::{Point, PointClass, StripDomain};
use crate::martingale::{expectation, simple_from_point, MartingaleNode, MartingaleTree};

/// Chords shorter than this on either side of the point are skipped.
pub const MIN_EXTENT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k_directions: usize,
    pub m_endpoints: usize,
    /// Absolute sweep tolerance; `None` means `1e−7 · range(f)` on the boundary row.
    #[serde(default)]
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { k_directions: 64, m_endpoints: 16, tol: None, max_iter: 500 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_directions == 0 || self.m_endpoints == 0 || self.max_iter == 0 {
            return Err(Error::InvalidInput("solver counts must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidInput(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Endpoint fractions per side: `1, ½, ¼, …`, `⌈√m⌉` of them.
    fn fractions(&self) -> Vec<f64> {
        let n = (self.m_endpoints as f64).sqrt().ceil() as usize;
        (0..n.max(1)).map(|k| 0.5f64.powi(k as i32)).collect()
    }
}

/// Uniform samples of the window in `s` and of `[0, 1]` in `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMesh {
    pub s_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
}

impl DomainMesh {
    pub fn new(d: &StripDomain, n_s: usize, n_theta: usize) -> Result<Self> {
        if n_s < 2 || n_theta < 2 {
            return Err(Error::InvalidInput(format!("mesh {n_s}×{n_theta} too small")));
        }
        let (a, b) = d.window;
        let s_grid = (0..n_s)
            .map(|i| if i == n_s - 1 { b } else { a + (b - a) * i as f64 / (n_s - 1) as f64 })
            .collect();
        let theta_grid = (0..n_theta)
            .map(|j| if j == n_theta - 1 { 1.0 } else { j as f64 / (n_theta - 1) as f64 })
            .collect();
        Ok(DomainMesh { s_grid, theta_grid })
    }

    pub fn n_s(&self) -> usize {
        self.s_grid.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_grid.len()
    }

    pub fn len(&self) -> usize {
        self.n_s() * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, d: &StripDomain, i: usize, j: usize) -> Point {
        let s = self.s_grid[i];
        let lo = d.fixed(s);
        let theta = self.theta_grid[j];
        let x2 = if j == 0 { lo } else if j == self.n_theta() - 1 { d.free(s) } else { lo + theta * (d.free(s) - lo) };
        Point::new(s, x2)
    }
}

/// The value-iteration state on a mesh; `values[i·n_θ + j]` belongs to `(s_i, θ_j)`.
#[derive(Debug, Clone)]
pub struct BellmanField {
    domain: StripDomain,
    f: BoundaryFn,
    mesh: DomainMesh,
    points: Vec<Point>,
    values: Vec<f64>,
    boundary_data: Vec<f64>,
    cell_defects: Vec<f64>,
    pub iterations: usize,
    pub last_sweep_delta: f64,
    pub interp_error_bound: f64,
}

impl BellmanField {
    pub fn domain(&self) -> &StripDomain {
        &self.domain
    }

    pub fn boundary_fn(&self) -> &BoundaryFn {
        &self.f
    }

    pub fn mesh(&self) -> &DomainMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundary_data(&self) -> &[f64] {
        &self.boundary_data
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.mesh.n_theta() + j]
    }

    /// Piecewise-linear interpolation on the two triangles of the `(s, θ)` cell
    /// containing `p`, with barycentric weights taken in the plane; exact for affine data.
    pub fn value_at(&self, p: Point) -> f64 {
        interpolate(&self.domain, &self.mesh, &self.points, &self.values, p)
    }

    /// Interpolation error estimate over the cells around `p` (one cell of padding).
    pub fn local_error_bound(&self, p: Point) -> f64 {
        let (i, j) = locate(&self.domain, &self.mesh, p);
        let (n_s, n_t) = (self.mesh.n_s() - 1, self.mesh.n_theta() - 1);
        let mut worst = 0.0f64;
        for a in i.saturating_sub(1)..(i + 2).min(n_s) {
            for b in j.saturating_sub(1)..(j + 2).min(n_t) {
                worst = worst.max(self.cell_defects[a * n_t + b]);
            }
        }
        worst.max(self.rounding_floor())
    }

    fn rounding_floor(&self) -> f64 {
        64.0 * f64::EPSILON * self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn recompute_bound(&mut self) {
        self.cell_defects = cell_defects(&self.mesh, &self.points, &self.values);
        let worst = self.cell_defects.iter().copied().fold(0.0, f64::max);
        self.interp_error_bound = worst.max(self.rounding_floor());
    }
}

/// Cell `(i, j)` of the `(s, θ)` mesh containing `p`, with local coordinates.
fn locate_frac(d: &StripDomain, mesh: &DomainMesh, p: Point) -> (usize, usize, f64, f64) {
    let (n_s, n_t) = (mesh.n_s(), mesh.n_theta());
    let (s0, s1) = (mesh.s_grid[0], mesh.s_grid[n_s - 1]);
    let s = p.x1.clamp(s0, s1);
    let u = (s - s0) / (s1 - s0) * (n_s - 1) as f64;
    let i = (u.floor() as usize).min(n_s - 2);
    let lo = d.fixed(s);
    let theta = ((p.x2 - lo) / (d.free(s) - lo)).clamp(0.0, 1.0);
    let w = theta * (n_t - 1) as f64;
    let j = (w.floor() as usize).min(n_t - 2);
    (i, j, u - i as f64, w - j as f64)
}

fn locate(d: &StripDomain, mesh: &DomainMesh, p: Point) -> (usize, usize) {
    let (i, j, _, _) = locate_frac(d, mesh, p);
    (i, j)
}

fn interpolate(d: &StripDomain, mesh: &DomainMesh, points: &[Point], values: &[f64], p: Point) -> f64 {
    let n_t = mesh.n_theta();
    let (i, j, fu, fw) = locate_frac(d, mesh, p);
    let idx = |a: usize, b: usize| a * n_t + b;
    let tri = if fu + fw <= 1.0 {
        [idx(i, j), idx(i + 1, j), idx(i, j + 1)]
    } else {
        [idx(i + 1, j + 1), idx(i, j + 1), idx(i + 1, j)]
    };
    let (a, b, c) = (points[tri[0]], points[tri[1]], points[tri[2]]);
    let det = (b - a).cross(&(c - a));
    let lb = (p - a).cross(&(c - a)) / det;
    let lc = (b - a).cross(&(p - a)) / det;
    let va = values[tri[0]];
    va + lb * (values[tri[1]] - va) + lc * (values[tri[2]] - va)
}

/// Per cell, the defect of the fourth corner against the plane through the other three.
fn cell_defects(mesh: &DomainMesh, points: &[Point], values: &[f64]) -> Vec<f64> {
    let (n_s, n_t) = (mesh.n_s(), mesh.n_theta());
    let mut out = Vec::with_capacity((n_s - 1) * (n_t - 1));
    for i in 0..n_s - 1 {
        for j in 0..n_t - 1 {
            let k = [i * n_t + j, (i + 1) * n_t + j, i * n_t + j + 1, (i + 1) * n_t + j + 1];
            let (a, b, c, p) = (points[k[0]], points[k[1]], points[k[2]], points[k[3]]);
            let det = (b - a).cross(&(c - a));
            let lb = (p - a).cross(&(c - a)) / det;
            let lc = (b - a).cross(&(p - a)) / det;
            let va = values[k[0]];
            let plane = va + lb * (values[k[1]] - va) + lc * (values[k[2]] - va);
            out.push((plane - values[k[3]]).abs());
        }
    }
    out
}

/// A chord direction through a mesh point and its admissible extents on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Stencil {
    v: Point,
    forward: f64,
    backward: f64,
}

/// Per-point chord stencils for one domain, mesh and configuration; reusable across data `f`.
#[derive(Debug, Clone)]
pub struct ChordTable {
    domain: StripDomain,
    mesh: DomainMesh,
    cfg: SolverConfig,
    points: Vec<Point>,
    stencils: Vec<Vec<Stencil>>,
    fractions: Vec<f64>,
}

impl ChordTable {
    pub fn new(d: &StripDomain, mesh: &DomainMesh, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n_t = mesh.n_theta();
        let points: Vec<Point> = (0..mesh.len()).map(|k| mesh.point(d, k / n_t, k % n_t)).collect();
        let stencils = points
            .par_iter()
            .enumerate()
            .map(|(k, &x)| if k % n_t == 0 { Vec::new() } else { stencils_at(d, x, cfg.k_directions) })
            .collect();
        Ok(ChordTable {
            domain: d.clone(),
            mesh: mesh.clone(),
            cfg: cfg.clone(),
            points,
            stencils,
            fractions: cfg.fractions(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }
}

/// Uniform directions over `[0, π)`, both tangent directions from `x` to the free
/// boundary and the free-boundary slope at `x₁`.
fn chord_directions(d: &StripDomain, x: Point, k: usize) -> Vec<Point> {
    let mut dirs: Vec<Point> = (0..k).map(|i| Point::direction(PI * i as f64 / k as f64)).collect();
    for sign in [-1.0, 1.0] {
        if let Some(u) = tangent_point(d, x, sign) {
            let v = Point::new(u, d.free(u)) - x;
            if v.norm() > 0.0 {
                dirs.push((1.0 / v.norm()) * v);
            }
        }
    }
    let level = Point::new(1.0, d.upper.slope(x.x1));
    dirs.push((1.0 / level.norm()) * level);
    dirs
}

fn stencils_at(d: &StripDomain, x: Point, k: usize) -> Vec<Stencil> {
    chord_directions(d, x, k)
        .into_iter()
        .filter_map(|v| {
            let forward = d.ray_extent(x, v, true);
            let backward = d.ray_extent(x, -1.0 * v, true);
            (forward >= MIN_EXTENT && backward >= MIN_EXTENT).then_some(Stencil { v, forward, backward })
        })
        .collect()
}

/// Touching point `u` of the tangent from `x` to the free boundary on the side `sign`.
fn tangent_point(d: &StripDomain, x: Point, sign: f64) -> Option<f64> {
    let t = |u: f64| d.free(u) - x.x2 - d.upper.slope(u) * (u - x.x1);
    if t(x.x1) <= d.tol {
        return None;
    }
    let (lo, hi) = d.upper.domain_interval();
    let width = d.window.1 - d.window.0;
    let bound = if sign > 0.0 { hi.min(d.window.1 + width) } else { lo.max(d.window.0 - width) };
    let mut inner = x.x1;
    let mut step = 1e-3 * (1.0 + x.x1.abs());
    let outer = loop {
        let mut outer = inner + sign * step;
        if (outer - bound) * sign >= 0.0 {
            outer = 0.5 * (inner + bound);
            if (outer - inner).abs() < 1e-12 {
                return None;
            }
        }
        if t(outer) <= 0.0 {
            break outer;
        }
        inner = outer;
        step *= 2.0;
    };
    let (mut a, mut b) = (inner, outer);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if t(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Best chord value `α·V(y) + (1 − α)·V(z)` over a stencil set; ties go to the shorter chord.
fn best_chord(
    x: Point,
    stencils: &[Stencil],
    fractions: &[f64],
    value: &dyn Fn(Point) -> f64,
) -> Option<(f64, Point, Point, f64)> {
    let mut best: Option<(f64, Point, Point, f64, f64)> = None;
    let mut vy = vec![0.0; fractions.len()];
    let mut vz = vec![0.0; fractions.len()];
    for st in stencils {
        for (k, &a) in fractions.iter().enumerate() {
            vy[k] = value(x + (a * st.forward) * st.v);
            vz[k] = value(x + (-a * st.backward) * st.v);
        }
        for (ka, &a) in fractions.iter().enumerate() {
            for (kb, &b) in fractions.iter().enumerate() {
                let (ly, lz) = (a * st.forward, b * st.backward);
                let wy = lz / (ly + lz);
                let val = wy * vy[ka] + (1.0 - wy) * vz[kb];
                let len = ly + lz;
                let better = match best {
                    None => true,
                    Some((bv, .., blen)) => val > bv || (val == bv && len < blen),
                };
                if better {
                    best = Some((val, x + ly * st.v, x + (-lz) * st.v, wy, len));
                }
            }
        }
    }
    best.map(|(v, y, z, w, _)| (v, y, z, w))
}

pub fn initialize(d: &StripDomain, f: &BoundaryFn, mesh: &DomainMesh) -> Result<BellmanField> {
    let n_t = mesh.n_theta();
    let points: Vec<Point> = (0..mesh.len()).map(|k| mesh.point(d, k / n_t, k % n_t)).collect();
    let boundary_data: Vec<f64> = mesh.s_grid.iter().map(|&s| f.eval(s)).collect();
    if let Some(bad) = boundary_data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("f is not finite at s = {}", mesh.s_grid[bad])));
    }
    let values = points
        .par_iter()
        .enumerate()
        .map(|(k, &x)| {
            if k % n_t == 0 {
                return Ok(boundary_data[k / n_t]);
            }
            let c = d.fixed_chord(x)?;
            Ok(c.alpha * f.eval(c.lower.s) + (1.0 - c.alpha) * f.eval(c.upper.s))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut field = BellmanField {
        domain: d.clone(),
        f: f.clone(),
        mesh: mesh.clone(),
        points,
        values,
        boundary_data,
        cell_defects: Vec::new(),
        iterations: 0,
        last_sweep_delta: f64::INFINITY,
        interp_error_bound: 0.0,
    };
    field.recompute_bound();
    Ok(field)
}

/// One double-buffered value-iteration step; returns the largest pointwise increase.
pub fn sweep(field: &BellmanField, table: &ChordTable) -> (BellmanField, f64) {
    let n_t = field.mesh.n_theta();
    let value = |p: Point| field.value_at(p);
    let next: Vec<f64> = (0..field.values.len())
        .into_par_iter()
        .map(|k| {
            let old = field.values[k];
            if k % n_t == 0 {
                return old;
            }
            match best_chord(table.points[k], &table.stencils[k], &table.fractions, &value) {
                Some((v, ..)) if v > old => v,
                _ => old,
            }
        })
        .collect();
    let delta = next
        .iter()
        .zip(&field.values)
        .map(|(a, b)| a - b)
        .fold(0.0, f64::max);
    let mut out = BellmanField {
        values: next,
        iterations: field.iterations + 1,
        last_sweep_delta: delta,
        ..field.clone()
    };
    out.recompute_bound();
    (out, delta)
}

pub fn solve(d: &StripDomain, f: &BoundaryFn, mesh: &DomainMesh, cfg: &SolverConfig) -> Result<BellmanField> {
    let table = ChordTable::new(d, mesh, cfg)?;
    solve_with(&table, f)
}

/// Solves on a prepared chord table.
pub fn solve_with(table: &ChordTable, f: &BoundaryFn) -> Result<BellmanField> {
    let mut field = initialize(&table.domain, f, &table.mesh)?;
    let (lo, hi) = field
        .boundary_data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let rounding = 64.0 * f64::EPSILON * lo.abs().max(hi.abs());
    let tol = table.cfg.tol.unwrap_or(1e-7 * (hi - lo)).max(rounding);
    for _ in 0..table.cfg.max_iter {
        let (next, delta) = sweep(&field, table);
        field = next;
        if delta <= tol {
            return Ok(field);
        }
    }
    Err(Error::NotConverged {
        iterations: field.iterations,
        delta: field.last_sweep_delta,
        field: Box::new(field),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub segments: usize,
    pub violations: usize,
    /// Largest `½V(y) + ½V(z) − V(mid)` seen (negative when every sample is strictly concave).
    pub worst: f64,
    pub worst_segment: Option<(Point, Point)>,
    pub tol_c: f64,
}

impl ConcavityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Midpoint concavity of the interpolated field on random admissible segments.
pub fn verify_local_concavity(field: &BellmanField, n_segments: usize, seed: u64, tol_c: f64) -> ConcavityReport {
    let d = &field.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments: Vec<(Point, Point)> = std::iter::from_fn(|| {
        let s = rng.gen_range(d.window.0..=d.window.1);
        let theta: f64 = rng.gen_range(0.0..=1.0);
        let x = Point::new(s, d.fixed(s) + theta * (d.free(s) - d.fixed(s)));
        let v = Point::direction(rng.gen_range(0.0..PI));
        Some((x, v, rng.gen_range(0.0..=1.0f64), rng.gen_range(0.0..=1.0f64)))
    })
    .filter_map(|(x, v, a, b)| {
        let y = x + (a * d.ray_extent(x, v, true)) * v;
        let z = x + (-b * d.ray_extent(x, -1.0 * v, true)) * v;
        (y.dist(&z) > MIN_EXTENT && d.segment_in_domain(y, z).inside).then_some((y, z))
    })
    .take(n_segments)
    .collect();
    let defects: Vec<f64> = segments
        .par_iter()
        .map(|&(y, z)| 0.5 * (field.value_at(y) + field.value_at(z)) - field.value_at(y.lerp(&z, 0.5)))
        .collect();
    let (mut worst, mut worst_segment, mut violations) = (f64::NEG_INFINITY, None, 0);
    for (defect, seg) in defects.iter().zip(&segments) {
        if *defect > tol_c {
            violations += 1;
        }
        if *defect > worst {
            worst = *defect;
            worst_segment = Some(*seg);
        }
    }
    ConcavityReport { segments: segments.len(), violations, worst, worst_segment, tol_c }
}

/// Limits for [`extract_strategy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyLimits {
    pub max_depth: usize,
    /// Nodes lighter than this are finished along their fixed chord.
    pub mass_floor: f64,
}

impl Default for StrategyLimits {
    fn default() -> Self {
        StrategyLimits { max_depth: 400, mass_floor: 1e-5 }
    }
}

/// Greedy martingale from `x`: each node splits along the field's best chord through
/// it; deep or light nodes finish along their fixed chord.
pub fn extract_strategy(field: &BellmanField, x: Point, cfg: &SolverConfig, limits: StrategyLimits) -> Result<MartingaleTree> {
    let d = &field.domain;
    if d.classify_point(x) == PointClass::Outside {
        return Err(Error::Outside(x));
    }
    let fractions = cfg.fractions();
    let root = grow(field, x, 1.0, 0, cfg.k_directions, &fractions, limits)?;
    Ok(MartingaleTree::new(root))
}

fn grow(
    field: &BellmanField,
    x: Point,
    prob: f64,
    depth: usize,
    k: usize,
    fractions: &[f64],
    limits: StrategyLimits,
) -> Result<MartingaleNode> {
    let d = &field.domain;
    match d.classify_point(x) {
        PointClass::FixedBoundary => return Ok(MartingaleNode::leaf(x, prob)),
        PointClass::Outside => return Err(Error::Outside(x)),
        _ => {}
    }
    let finish = || -> Result<MartingaleNode> {
        let c = d.fixed_chord(x)?;
        Ok(MartingaleNode::split(
            x,
            prob,
            vec![
                MartingaleNode::leaf(c.lower.point, prob * c.alpha),
                MartingaleNode::leaf(c.upper.point, prob - prob * c.alpha),
            ],
        ))
    };
    if depth >= limits.max_depth || prob < limits.mass_floor {
        return finish();
    }
    let c = d.fixed_chord(x)?;
    let f = &field.f;
    let fixed_value = c.alpha * f.eval(c.lower.s) + (1.0 - c.alpha) * f.eval(c.upper.s);
    let stencils = stencils_at(d, x, k);
    let value = |p: Point| field.value_at(p);
    match best_chord(x, &stencils, fractions, &value) {
        Some((v, y, z, wy)) if v > fixed_value + field.rounding_floor() => {
            let py = prob * wy;
            let (left, right) = (
                grow(field, y, py, depth + 1, k, fractions, limits)?,
                grow(field, z, prob - py, depth + 1, k, fractions, limits)?,
            );
            Ok(MartingaleNode::split(x, prob, vec![left, right]))
        }
        _ => finish(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub probe: Point,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub rel_gap: f64,
}

/// Brackets the Bellman function at each probe: greedy and one-split martingales from
/// below, the field plus its local interpolation bound from above.
pub fn duality_gap(
    field: &BellmanField,
    probes: &[Point],
    cfg: &SolverConfig,
    limits: StrategyLimits,
) -> Result<Vec<GapReport>> {
    let d = &field.domain;
    let f = |s: f64| field.f.eval(s);
    probes
        .iter()
        .map(|&x| {
            let (lower, upper) = if d.classify_point(x) == PointClass::FixedBoundary {
                (f(x.x1), f(x.x1))
            } else {
                let greedy = extract_strategy(field, x, cfg, limits)?;
                let simple = simple_from_point(d, x)?;
                let lower = expectation(&greedy, f).max(expectation(&simple, f));
                (lower, field.value_at(x) + field.local_error_bound(x))
            };
            let gap = upper - lower;
            let rel_gap = if upper.abs() > 1e-12 { gap / upper.abs() } else { gap };
            Ok(GapReport { probe: x, lower, upper, gap, rel_gap })
        })
        .collect()
}

/// `n_s × n_θ` probes at `θ = k/n_θ` over the middle three quarters of the window.
pub fn probe_grid(d: &StripDomain, n_s: usize, n_theta: usize) -> Vec<Point> {
    let (a, b) = d.window;
    let (mid, half) = (0.5 * (a + b), 0.375 * (b - a));
    let mut out = Vec::with_capacity(n_s * n_theta);
    for i in 0..n_s {
        let s = if n_s == 1 { mid } else { mid - half + 2.0 * half * i as f64 / (n_s - 1) as f64 };
        let (lo, hi) = (d.fixed(s), d.free(s));
        for k in 1..=n_theta {
            let theta = k as f64 / n_theta as f64;
            out.push(Point::new(s, if k == n_theta { hi } else { lo + theta * (hi - lo) }));
        }
    }
    out
}

/// `L(y) = c0 + c1·y₁ + c2·y₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFn {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AffineFn {
    pub fn eval(&self, y: Point) -> f64 {
        self.c0 + self.c1 * y.x1 + self.c2 * y.x2
    }
}

pub const MAJORANT_SAMPLES: usize = 2001;

/// An affine `L` with `|y| ≤ L(y)` on the fixed boundary over the window.
pub fn abs_majorant(d: &StripDomain) -> AffineFn {
    let c0 = boundary_samples(d)
        .map(|y| y.norm() - y.x2)
        .fold(f64::NEG_INFINITY, f64::max);
    AffineFn { c0: c0 + 1e-12 * (1.0 + c0.abs()), c1: 0.0, c2: 1.0 }
}

/// Warns when `|f|` exceeds `multiple · L` somewhere on the sampled boundary.
pub fn majorant_guard(d: &StripDomain, f: &BoundaryFn, multiple: f64) -> Option<String> {
    let l = abs_majorant(d);
    boundary_samples(d)
        .find(|y| f.eval(y.x1).abs() > multiple * l.eval(*y))
        .map(|y| format!("|f({})| = {} exceeds {multiple}·L = {}", y.x1, f.eval(y.x1).abs(), multiple * l.eval(y)))
}

fn boundary_samples(d: &StripDomain) -> impl Iterator<Item = Point> + '_ {
    let (a, b) = d.window;
    (0..MAJORANT_SAMPLES).map(move |i| {
        let s = a + (b - a) * i as f64 / (MAJORANT_SAMPLES - 1) as f64;
        d.boundary_point(s).point
    })
}
