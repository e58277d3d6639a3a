//! Exhaustive depth-limited split-tree search on the parabolic strip `x₁² ≤ x₂ ≤ x₁² + 1`.
//!
//! Nodes live on the integer lattice `(X, Y) = (4·x₁, 16·x₂)` with
//! `X ∈ [−4q, 4q]` and `Y − X² ∈ [0, 16]`; leaves are the 33 fixed-boundary
//! candidates `x₁ ∈ {−4, −3.75, …, 4}`. A split of `x` is any pair of lattice
//! points `y`, `z` collinear with `x` (exact integer cross product), with `x`
//! strictly between them and `[y, z]` below the upper parabola (checked in
//! closed form). `value(depth)` is the best `E f(M_∞)` over all such trees of
//! depth at most `depth`. Independent of the crate's mesh, interpolation and
//! chord search.

#![allow(dead_code)]

use std::collections::HashMap;

/// Depth-6 value at (0, 1) for `f = min(e^s, e^4)` on the 33×17 lattice, frozen when
/// the oracle was first run.
pub const FROZEN_DEPTH6: f64 = 2.542588815632;

pub struct LatticeOracle {
    half: i64,
    theta_steps: i64,
    points: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    splits: Vec<Vec<(usize, usize, f64)>>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

impl LatticeOracle {
    /// `half` lattice steps of 1/4 on each side of zero; `theta_steps` vertical levels of 1/16.
    pub fn new(half: i64, theta_steps: i64) -> Self {
        let mut points = Vec::new();
        for i in -half..=half {
            for j in 0..=theta_steps {
                points.push((i, i * i + j * 16 / theta_steps));
            }
        }
        let index = points.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        let mut o = LatticeOracle { half, theta_steps, points, index, splits: Vec::new() };
        o.splits = (0..o.points.len()).map(|k| o.enumerate_splits(k)).collect();
        o
    }

    fn admissible(&self, a: (i64, i64), b: (i64, i64)) -> bool {
        // q(t) = Y(t) − X(t)² is concave; the segment is admissible iff max q ≤ 16
        let (dx, dy) = ((b.0 - a.0) as f64, (b.1 - a.1) as f64);
        let (xa, ya) = (a.0 as f64, a.1 as f64);
        let q = |t: f64| ya + t * dy - (xa + t * dx).powi(2);
        let t = if dx == 0.0 { 0.0 } else { ((dy - 2.0 * xa * dx) / (2.0 * dx * dx)).clamp(0.0, 1.0) };
        q(t).max(q(0.0)).max(q(1.0)) <= 16.0 + 1e-9
    }

    fn enumerate_splits(&self, k: usize) -> Vec<(usize, usize, f64)> {
        let x = self.points[k];
        let mut by_dir: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (m, p) in self.points.iter().enumerate() {
            if m == k {
                continue;
            }
            let (dx, dy) = (p.0 - x.0, p.1 - x.1);
            let g = gcd(dx, dy);
            by_dir.entry((dx / g, dy / g)).or_default().push(m);
        }
        let mut out = Vec::new();
        for (dir, ys) in &by_dir {
            if (dir.0, dir.1) < (0, 0) {
                continue;
            }
            let Some(zs) = by_dir.get(&(-dir.0, -dir.1)) else { continue };
            for &y in ys {
                for &z in zs {
                    let (py, pz) = (self.points[y], self.points[z]);
                    if !self.admissible(py, pz) {
                        continue;
                    }
                    let dy = (((py.0 - x.0) as f64).powi(2) + ((py.1 - x.1) as f64).powi(2)).sqrt();
                    let dz = (((pz.0 - x.0) as f64).powi(2) + ((pz.1 - x.1) as f64).powi(2)).sqrt();
                    out.push((y, z, dz / (dy + dz)));
                }
            }
        }
        out
    }

    /// Best expectation from `(x1, x2)` over trees of depth ≤ `depth`; `f` acts on `s = x₁`.
    pub fn value(&self, f: impl Fn(f64) -> f64, x1: f64, x2: f64, depth: usize) -> f64 {
        let mut v: Vec<f64> = self
            .points
            .iter()
            .map(|&(i, y)| if y == i * i { f(i as f64 / 4.0) } else { f64::NEG_INFINITY })
            .collect();
        for _ in 0..depth {
            let next: Vec<f64> = (0..self.points.len())
                .map(|k| {
                    self.splits[k]
                        .iter()
                        .map(|&(y, z, a)| a * v[y] + (1.0 - a) * v[z])
                        .fold(v[k], f64::max)
                })
                .collect();
            v = next;
        }
        let key = ((x1 * 4.0).round() as i64, (x2 * 16.0).round() as i64);
        v[self.index[&key]]
    }
}
