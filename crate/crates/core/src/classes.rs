//! Step-function representatives of the class `A_Ω`, their characteristics, and
//! the operations that act on distributions: rearrangement and concatenation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryFn;
use crate::error::{Error, Result};
use crate::geometry::{Point, StripDomain};

/// Tolerance on the obstacle margin for class membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Per-arc sample count used for the sup in [`maximal_flat`].
pub const ARC_SAMPLES: usize = 64;

/// A piecewise-constant map `[0, 1] → ∂_fixed Ω`; piece `i` takes the boundary
/// point with parameter `values[i]` on `[breakpoints[i], breakpoints[i + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// `breakpoints` runs from 0 to 1 inclusive, one more entry than `values`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput("breakpoints must start at 0 and end at 1".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "breakpoints not strictly increasing at {} → {}",
                w[0], w[1]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value".into()));
        }
        Ok(StepFunction { breakpoints, values })
    }

    /// From right piece ends `t_1 < … < t_n = 1` (the CSV layout).
    pub fn from_pieces(ends: &[f64], values: Vec<f64>) -> Result<Self> {
        let mut breakpoints = Vec::with_capacity(ends.len() + 1);
        breakpoints.push(0.0);
        breakpoints.extend_from_slice(ends);
        StepFunction::new(breakpoints, values)
    }

    pub fn constant(s: f64) -> Self {
        StepFunction { breakpoints: vec![0.0, 1.0], values: vec![s] }
    }

    /// Equal-length pieces.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let mut bp: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        if let Some(last) = bp.last_mut() {
            *last = 1.0;
        }
        StepFunction::new(bp, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    /// `(value, length)` for each piece, left to right.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.values.iter().copied().zip(self.lengths()).collect()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.values[k.saturating_sub(1).min(self.values.len() - 1)]
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// The distribution `μ_φ`, equal values merged; masses accumulate left to right.
    pub fn distribution(&self) -> BoundaryMeasure {
        BoundaryMeasure::from_atoms(self.atoms())
    }

    /// Lays atoms out as a non-decreasing step function (stable in the input order).
    pub(crate) fn from_sorted_layout(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        atoms.retain(|a| a.1 > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::with_capacity(atoms.len() + 1);
        breakpoints.push(0.0);
        let mut acc = 0.0;
        for (_, m) in &atoms[..atoms.len().saturating_sub(1)] {
            acc += m;
            breakpoints.push(acc);
        }
        breakpoints.push(1.0);
        StepFunction::new(breakpoints, atoms.into_iter().map(|a| a.0).collect())
    }
}

/// Atoms `(s, mass)` on the fixed boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl BoundaryMeasure {
    /// Merges equal parameters, summing masses in input order; output sorted by `s`.
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Self {
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| atoms[i].0.total_cmp(&atoms[j].0).then(i.cmp(&j)));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for i in order {
            let (s, m) = atoms[i];
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 += m,
                _ => merged.push((s, m)),
            }
        }
        BoundaryMeasure { atoms: merged }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub member: bool,
    pub worst_interval: (f64, f64),
    pub margin: f64,
    pub resolution: f64,
}

/// Prefix integrals of two moment functions of a step function.
struct Moments {
    breakpoints: Vec<f64>,
    cum: Vec<[f64; 2]>,
    vals: Vec<[f64; 2]>,
}

impl Moments {
    fn new(phi: &StepFunction, g: impl Fn(f64) -> [f64; 2]) -> Self {
        let vals: Vec<[f64; 2]> = phi.values.iter().map(|&s| g(s)).collect();
        let mut cum = Vec::with_capacity(vals.len() + 1);
        let mut acc = [0.0; 2];
        cum.push(acc);
        for (v, len) in vals.iter().zip(phi.lengths()) {
            acc = [acc[0] + v[0] * len, acc[1] + v[1] * len];
            cum.push(acc);
        }
        Moments { breakpoints: phi.breakpoints.clone(), cum, vals }
    }

    fn at(&self, t: f64) -> [f64; 2] {
        let n = self.vals.len();
        let i = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1).min(n - 1);
        if t == self.breakpoints[i] {
            return self.cum[i];
        }
        let dt = t - self.breakpoints[i];
        [self.cum[i][0] + dt * self.vals[i][0], self.cum[i][1] + dt * self.vals[i][1]]
    }

    fn average(&self, a: f64, b: f64) -> [f64; 2] {
        let (pa, pb) = (self.at(a), self.at(b));
        let len = b - a;
        [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len]
    }
}

/// Maximizes `objective(⟨g⟩_[a,b])` over subintervals: all pairs of breakpoints and
/// `grid` uniform points, then a local refinement around the best coarse cells.
fn scan_intervals(
    moments: &Moments,
    grid: usize,
    objective: &(dyn Fn([f64; 2]) -> f64 + Sync),
) -> (f64, (f64, f64)) {
    let mut cand: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    cand.extend_from_slice(&moments.breakpoints);
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let prefix: Vec<[f64; 2]> = cand.iter().map(|&t| moments.at(t)).collect();
    let n = cand.len();

    let rows: Vec<(f64, usize, usize)> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, i, i + 1);
            for j in i + 1..n {
                let len = cand[j] - cand[i];
                let avg = [
                    (prefix[j][0] - prefix[i][0]) / len,
                    (prefix[j][1] - prefix[i][1]) / len,
                ];
                let v = objective(avg);
                if v > best.0 {
                    best = (v, i, j);
                }
            }
            best
        })
        .collect();
    let mut ranked = rows.clone();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let (mut best_v, bi, bj) = ranked[0];
    let mut best_ab = (cand[bi], cand[bj]);

    let eval = |a: f64, b: f64| {
        if b - a <= 1e-14 {
            f64::NEG_INFINITY
        } else {
            objective(moments.average(a, b))
        }
    };
    for &(_, i, j) in ranked.iter().take(4) {
        let a_box = (cand[i.saturating_sub(1)], cand[(i + 1).min(n - 1)]);
        let b_box = (cand[j.saturating_sub(1)], cand[(j + 1).min(n - 1)]);
        let (mut a, mut b) = (cand[i], cand[j]);
        let mut v = eval(a, b);
        const FINE: usize = 24;
        for p in 0..=FINE {
            for q in 0..=FINE {
                let ta = a_box.0 + (a_box.1 - a_box.0) * p as f64 / FINE as f64;
                let tb = b_box.0 + (b_box.1 - b_box.0) * q as f64 / FINE as f64;
                let w = eval(ta, tb);
                if w > v {
                    (v, a, b) = (w, ta, tb);
                }
            }
        }
        for _ in 0..4 {
            let (ta, wa) = golden_max(|x| eval(x, b), a_box.0, a_box.1.min(b));
            if wa > v {
                (v, a) = (wa, ta);
            }
            let (tb, wb) = golden_max(|x| eval(a, x), b_box.0.max(a), b_box.1);
            if wb > v {
                (v, b) = (wb, tb);
            }
        }
        if v > best_v {
            best_v = v;
            best_ab = (a, b);
        }
    }
    (best_v, best_ab)
}

fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for t in [lo, hi] {
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Exact average of the lifted function `(φ₁, Φ₀(φ₁))` over `[a, b]`.
pub fn average(phi: &StepFunction, interval: (f64, f64), d: &StripDomain) -> Result<Point> {
    let (a, b) = interval;
    if !(a >= 0.0 && b <= 1.0 && a < b) {
        return Err(Error::InvalidInput(format!("empty or out-of-range interval [{a}, {b}]")));
    }
    let mut m = [0.0; 2];
    for (&s, w) in phi.values.iter().zip(phi.breakpoints.windows(2)) {
        let lo = w[0].max(a);
        let hi = w[1].min(b);
        if hi > lo {
            let len = hi - lo;
            m[0] += len * s;
            m[1] += len * d.fixed(s);
        }
    }
    let len = b - a;
    Ok(Point::new(m[0] / len, m[1] / len))
}

pub fn membership(phi: &StepFunction, d: &StripDomain, grid: usize) -> ClassReport {
    let moments = Moments::new(phi, |s| [s, d.fixed(s)]);
    let (neg_margin, worst) = scan_intervals(&moments, grid.max(phi.len() + 1), &|m| {
        -(d.free(m[0]) - m[1])
    });
    let margin = -neg_margin;
    ClassReport {
        member: margin >= -MEMBERSHIP_TOL,
        worst_interval: worst,
        margin,
        resolution: 1.0 / grid as f64,
    }
}

/// `sup_J (⟨φ₁²⟩_J − ⟨φ₁⟩_J²)^{1/2}` over sampled subintervals.
pub fn bmo_norm(phi: &StepFunction, grid: usize) -> f64 {
    let c = functional_average(phi, |s| s);
    let moments = Moments::new(phi, |s| [s - c, (s - c) * (s - c)]);
    let (var, _) = scan_intervals(&moments, grid.max(phi.len() + 1), &|m| m[1] - m[0] * m[0]);
    var.max(0.0).sqrt()
}

/// `sup_J ⟨ψ^{p₁}⟩_J^{1/p₁} ⟨ψ^{p₂}⟩_J^{−1/p₂}` over sampled subintervals.
pub fn ap_characteristic(psi: &StepFunction, p1: f64, p2: f64, grid: usize) -> Result<f64> {
    if psi.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("A_p characteristic needs positive values".into()));
    }
    if p1 == 0.0 || p2 == 0.0 {
        return Err(Error::InvalidInput("exponents must be nonzero".into()));
    }
    let moments = Moments::new(psi, |s| [s.powf(p1), s.powf(p2)]);
    let (v, _) = scan_intervals(&moments, grid.max(psi.len() + 1), &|m| {
        m[0].powf(1.0 / p1) * m[1].powf(-1.0 / p2)
    });
    Ok(v)
}

/// The non-decreasing rearrangement `φ*`.
pub fn rearrange(phi: &StepFunction) -> StepFunction {
    if phi.is_monotone() {
        return phi.clone();
    }
    StepFunction::from_sorted_layout(phi.atoms()).expect("rearrangement of a valid step function")
}

/// The non-decreasing step function with distribution `Σ αₖ μ_{φₖ}`.
pub fn concatenate(phis: &[StepFunction], alpha: &[f64]) -> Result<StepFunction> {
    if phis.is_empty() || phis.len() != alpha.len() {
        return Err(Error::InvalidInput(format!(
            "{} functions for {} weights",
            phis.len(),
            alpha.len()
        )));
    }
    if alpha.iter().any(|&a| !(a >= 0.0)) || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("weights must be non-negative and sum to 1".into()));
    }
    if let [(phi, _)] = phis.iter().zip(alpha).filter(|(_, &a)| a > 0.0).collect::<Vec<_>>()[..] {
        return Ok(rearrange(phi));
    }
    let atoms = phis
        .iter()
        .zip(alpha)
        .flat_map(|(phi, &a)| phi.atoms().into_iter().map(move |(s, m)| (s, a * m)))
        .collect();
    StepFunction::from_sorted_layout(atoms)
}

/// `⟨f(φ)⟩_{[0,1]} = Σ |piece|·f(s_i)`.
pub fn functional_average(phi: &StepFunction, f: impl Fn(f64) -> f64) -> f64 {
    phi.atoms().into_iter().map(|(s, m)| m * f(s)).sum()
}

/// Increasing fixed-boundary parameters `a_k` such that each chord `[A_{k−1}, A_k]`
/// touches the free boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSequence {
    pub points: Vec<f64>,
}

pub fn tangent_sequence(d: &StripDomain, a0: f64) -> Result<TangentSequence> {
    if !d.in_window(a0) {
        return Err(Error::InvalidInput(format!("a0 = {a0} outside the window")));
    }
    let mut right = Vec::new();
    let mut a = a0;
    while let Some(next) = tangent_step(d, a, 1.0)? {
        right.push(next);
        a = next;
    }
    let mut left = Vec::new();
    let mut a = a0;
    while let Some(prev) = tangent_step(d, a, -1.0)? {
        left.push(prev);
        a = prev;
    }
    left.reverse();
    left.push(a0);
    left.extend(right);
    Ok(TangentSequence { points: left })
}

/// Next sequence point from `a` in direction `sign`, or `None` past the window.
fn tangent_step(d: &StripDomain, a: f64, sign: f64) -> Result<Option<f64>> {
    let base = d.boundary_point(a).point;
    // tangency: Φ₁(u) − Φ₀(a) − Φ₁'(u)(u − a) = 0, decreasing in |u − a|
    let tangency = |u: f64| d.free(u) - base.x2 - d.upper.slope(u) * (u - a);
    let u = match outward_root(&tangency, a, sign, d) {
        Some(u) => u,
        None => return Ok(None),
    };
    let slope = d.upper.slope(u);
    let line = |s: f64| d.free(u) + slope * (s - u);
    let crossing = |s: f64| -(d.fixed(s) - line(s));
    let Some(next) = outward_root(&crossing, u, sign, d) else {
        return Ok(None);
    };
    if !d.in_window(next) {
        return Ok(None);
    }
    if (next - a) * sign <= 0.0 {
        return Err(Error::NoConvergence(format!("tangent step from {a} did not advance")));
    }
    Ok(Some(next))
}

/// Root of `h` (positive at `start`) in direction `sign`, bracketed inside the curve domain
/// and at most one window width past the window.
fn outward_root(h: &dyn Fn(f64) -> f64, start: f64, sign: f64, d: &StripDomain) -> Option<f64> {
    let (lo, hi) = d.lower.domain_interval();
    let width = d.window.1 - d.window.0;
    let bound = if sign > 0.0 {
        hi.min(d.window.1 + width)
    } else {
        lo.max(d.window.0 - width)
    };
    let mut inner = start;
    let mut step = 1e-3 * (1.0 + start.abs());
    loop {
        let mut outer = inner + sign * step;
        if (outer - bound) * sign >= 0.0 {
            outer = 0.5 * (inner + bound);
            if (outer - inner).abs() < 1e-12 {
                return None;
            }
        }
        if h(outer) <= 0.0 {
            let (mut a, mut b) = (inner, outer);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if h(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        inner = outer;
        step *= 2.0;
    }
}

/// Piecewise-constant function of the boundary parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStep {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl BoundaryStep {
    pub fn eval(&self, s: f64) -> f64 {
        if s < self.breaks[0] || s > *self.breaks.last().unwrap() {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&b| b <= s).saturating_sub(1);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// `f♭ = Σ_k sup_{𝔄_k}|f| · χ_{𝔄_k}` with arcs `𝔄_k = [A_{k−1}, A_{k+1}]`.
pub fn maximal_flat(f: impl Fn(f64) -> f64, seq: &TangentSequence) -> BoundaryStep {
    maximal_flat_with(f, seq, ARC_SAMPLES)
}

pub fn maximal_flat_with(f: impl Fn(f64) -> f64, seq: &TangentSequence, samples: usize) -> BoundaryStep {
    let pts = &seq.points;
    let pieces = pts.len().saturating_sub(1);
    let mut values = vec![0.0; pieces];
    let samples = samples.max(2);
    for k in 1..pts.len().saturating_sub(1) {
        let (lo, hi) = (pts[k - 1], pts[k + 1]);
        let sup = (0..samples)
            .map(|i| f(lo + (hi - lo) * i as f64 / (samples - 1) as f64).abs())
            .fold(0.0, f64::max);
        // arc k covers pieces k − 1 and k
        values[k - 1] += sup;
        values[k] += sup;
    }
    BoundaryStep { breaks: pts.clone(), values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summability {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub verdict: Summability,
    /// `(k, term, partial sum over |j| ≤ |k|)` for `k = 0..=k_max`.
    pub partial_sums: Vec<(i64, f64, f64)>,
}

/// Ratio bound a tail must stay under to be classified convergent.
pub const RATIO_BOUND: f64 = 0.9;

/// Screens `Σ_k e^{−|k|/ε} sup_{[k−2,k+2]}|f|` by the ratio trend over the last quarter of each tail.
pub fn summability_gate(f: &BoundaryFn, eps: f64, k_max: usize) -> Result<SummabilityReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let term = |k: i64| {
        let sup = (0..=ARC_SAMPLES)
            .map(|i| f.eval(k as f64 - 2.0 + 4.0 * i as f64 / ARC_SAMPLES as f64).abs())
            .fold(0.0, f64::max);
        (-(k.unsigned_abs() as f64) / eps).exp() * sup
    };
    let k_max = k_max.max(4) as i64;
    let mut partial_sums = Vec::new();
    let mut acc = term(0);
    partial_sums.push((0, term(0), acc));
    let mut tails = [Vec::new(), Vec::new()];
    for k in 1..=k_max {
        let (tp, tn) = (term(k), term(-k));
        tails[0].push(tp);
        tails[1].push(tn);
        acc += tp + tn;
        partial_sums.push((k, tp + tn, acc));
    }
    let classify = |terms: &[f64]| {
        let start = terms.len() - terms.len() / 4 - 1;
        let ratios: Vec<f64> = terms[start..]
            .windows(2)
            .map(|w| if w[0] == 0.0 { if w[1] == 0.0 { 0.0 } else { f64::INFINITY } } else { w[1] / w[0] })
            .collect();
        if terms.iter().any(|t| !t.is_finite()) || ratios.iter().all(|&r| r >= 1.0) {
            Summability::Diverges
        } else if ratios.iter().all(|&r| r <= RATIO_BOUND) {
            Summability::Converges
        } else {
            Summability::Inconclusive
        }
    };
    let verdicts = [classify(&tails[0]), classify(&tails[1])];
    let verdict = if verdicts.contains(&Summability::Diverges) {
        Summability::Diverges
    } else if verdicts.iter().all(|v| *v == Summability::Converges) {
        Summability::Converges
    } else {
        Summability::Inconclusive
    };
    Ok(SummabilityReport { verdict, partial_sums })
}
