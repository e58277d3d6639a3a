//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bellman_strip::cheese::{simulate_to_boundary, validate_cheese, CheeseDomain, Disk, OuterSet};
use bellman_strip::classes::{
    ap_characteristic, average, bmo_norm, functional_average, membership, rearrange, summability_gate, StepFunction,
    Summability,
};
use bellman_strip::martingale::{
    bellman_trace, from_function, minimal_principle_check, simple_from_point, to_step_function, validate,
};
use bellman_strip::solver::{
    duality_gap, extract_strategy, probe_grid, solve_with, verify_local_concavity, BellmanField, ChordTable,
    DomainMesh, SolverConfig, StrategyLimits,
};
use bellman_strip::transforms::{projective_point, projective_step_function, EDelta, ProjectivePair};
use bellman_strip::{BoundaryFn, Point, StripDomain};

use support::gen;
use support::oracle::{LatticeOracle, FROZEN_DEPTH6};

const GRID: usize = 512;

struct Ledger {
    failed: usize,
}

impl Ledger {
    fn record(&mut self, id: &str, ok: bool, took: Duration, limit: Option<Duration>, detail: String) {
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = ok && in_time;
        if !pass {
            self.failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        let late = if in_time { "" } else { " [over time]" };
        println!(
            "{} criterion {id:<3} {detail} ({:.1}s{budget}){late}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
}

fn strip() -> StripDomain {
    StripDomain::parabolic(1.0, 4.0).unwrap()
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn affine_exactness(table: &ChordTable, started: Instant, ledger: &mut Ledger) -> Vec<BellmanField> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut fields = Vec::new();
    let (mut worst, mut sweeps, mut errors) = (0.0f64, 0usize, Vec::new());
    for _ in 0..20 {
        let c: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let f = BoundaryFn::Polynomial { coeffs: c.to_vec() };
        match solve_with(table, &f) {
            Ok(field) => {
                sweeps = sweeps.max(field.iterations);
                for (p, v) in field.points().iter().zip(field.values()) {
                    worst = worst.max((v - (c[0] + c[1] * p.x1 + c[2] * p.x2)).abs());
                }
                fields.push(field);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    let ok = errors.is_empty() && sweeps <= 2 && worst <= 1e-9;
    ledger.record(
        "1",
        ok,
        started.elapsed(),
        secs(30),
        format!("affine exactness: 20 solves, max sweeps {sweeps}, max |field − L| {worst:.2e}, errors {}", errors.len()),
    );
    fields
}

fn coordinate_identity(table: &ChordTable, ledger: &mut Ledger) -> Option<BellmanField> {
    let t = Instant::now();
    let field = match solve_with(table, &BoundaryFn::square()) {
        Ok(f) => f,
        Err(e) => {
            ledger.record("2", false, t.elapsed(), secs(60), format!("coordinate identity: {e}"));
            return None;
        }
    };
    let bound = 3.0 * field.interp_error_bound;
    let worst = field.points().iter().zip(field.values()).map(|(p, v)| (v - p.x2).abs()).fold(0.0, f64::max);
    ledger.record(
        "2",
        worst <= bound,
        t.elapsed(),
        secs(60),
        format!("coordinate identity: max |field − x₂| {worst:.2e} vs 3×bound {bound:.2e}"),
    );
    Some(field)
}

fn duality(table: &ChordTable, ledger: &mut Ledger) -> Option<BellmanField> {
    let t = Instant::now();
    let limit = secs(600);
    let field = match solve_with(table, &BoundaryFn::capped_exp(4.0)) {
        Ok(f) => f,
        Err(e) => {
            ledger.record("3", false, t.elapsed(), limit, format!("duality: solve failed: {e}"));
            return None;
        }
    };
    let tol_c = 3.0 * field.interp_error_bound;
    let conc = verify_local_concavity(&field, 100_000, 7, tol_c);
    ledger.record(
        "3a",
        conc.passed(),
        t.elapsed(),
        limit,
        format!(
            "local concavity: {} / {} violations at tol_c {tol_c:.3} ({} sweeps)",
            conc.violations, conc.segments, field.iterations
        ),
    );
    let d = field.domain().clone();
    let gaps = duality_gap(&field, &probe_grid(&d, 5, 5), table.config(), StrategyLimits::default());
    let (ok, detail) = match &gaps {
        Ok(g) => {
            let worst = g.iter().map(|r| r.rel_gap).fold(0.0, f64::max);
            (g.len() == 25 && worst <= 0.02, format!("duality gap: max relative gap {:.3}% over {} probes", 100.0 * worst, g.len()))
        }
        Err(e) => (false, format!("duality gap: {e}")),
    };
    ledger.record("3b", ok, t.elapsed(), limit, detail);
    let oracle = LatticeOracle::new(16, 16).value(|s| s.exp().min(4f64.exp()), 0.0, 1.0, 6);
    let v = field.value_at(Point::new(0.0, 1.0));
    let rel = (v - oracle).abs() / oracle.abs();
    let same = (oracle - FROZEN_DEPTH6).abs() < 1e-11;
    ledger.record(
        "3c",
        same && rel <= 0.02,
        t.elapsed(),
        limit,
        format!("oracle at (0,1): field {v:.6}, depth-6 oracle {oracle:.6} (frozen match {same}), relative difference {:.2}%", 100.0 * rel),
    );
    Some(field)
}

fn bmo_member<R: Rng>(rng: &mut R, cap: f64) -> StepFunction {
    let phi = gen::step(rng, 16, |r| r.gen_range(-1.5..1.5));
    let n = bmo_norm(&phi, GRID);
    if n > cap { gen::scaled(&phi, 0.999 * cap / n) } else { phi }
}

fn rearrangement(ledger: &mut Ledger) {
    let t = Instant::now();
    let d = strip();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut lost, mut sampled) = (f64::NEG_INFINITY, 0usize, 0usize);
    for _ in 0..1000 {
        let phi = bmo_member(&mut rng, 1.0);
        let n = bmo_norm(&phi, GRID);
        if n > 1.0 {
            continue;
        }
        sampled += 1;
        let r = rearrange(&phi);
        worst = worst.max(bmo_norm(&r, GRID) - n);
        if membership(&phi, &d, GRID).member && !membership(&r, &d, GRID).member {
            lost += 1;
        }
    }
    ledger.record(
        "4",
        sampled == 1000 && worst <= 1e-9 && lost == 0,
        t.elapsed(),
        secs(60),
        format!("rearrangement: {sampled} functions, max bmo increase {worst:.2e}, membership lost {lost}"),
    );
}

fn positive_step<R: Rng>(rng: &mut R) -> StepFunction {
    gen::step(rng, 16, |r| r.gen_range(-2.0f64..2.0).exp())
}

fn a2_rearrangement(ledger: &mut Ledger) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::NEG_INFINITY;
    let mut errors = 0;
    for _ in 0..500 {
        let psi = positive_step(&mut rng);
        match (ap_characteristic(&rearrange(&psi), 1.0, -1.0, GRID), ap_characteristic(&psi, 1.0, -1.0, GRID)) {
            (Ok(a), Ok(b)) => worst = worst.max(a - b),
            _ => errors += 1,
        }
    }
    ledger.record(
        "5",
        errors == 0 && worst <= 1e-9,
        t.elapsed(),
        secs(60),
        format!("A₂ rearrangement: 500 functions, max characteristic increase {worst:.2e}"),
    );
}

fn round_trip(ledger: &mut Ledger) {
    let t = Instant::now();
    let d = strip();
    let dext = d.extension(0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut done, mut unresolved, mut invalid, mut mismatched, mut max_depth) = (0, 0, 0, 0, 0);
    while done < 500 {
        let phi = bmo_member(&mut rng, 0.95);
        if !membership(&phi, &d, GRID).member {
            continue;
        }
        done += 1;
        match from_function(&phi, &d, &dext, 40, 256) {
            Ok(tree) => {
                max_depth = max_depth.max(tree.depth);
                if !validate(&tree, &dext).passed() {
                    invalid += 1;
                }
                if to_step_function(&tree).ok() != Some(rearrange(&phi)) {
                    mismatched += 1;
                }
            }
            Err(_) => unresolved += 1,
        }
    }
    ledger.record(
        "6",
        unresolved == 0 && invalid == 0 && mismatched == 0 && max_depth <= 40,
        t.elapsed(),
        secs(120),
        format!(
            "function→martingale→function: 500 members, unresolved {unresolved}, invalid trees {invalid}, multiset mismatches {mismatched}, max depth {max_depth}"
        ),
    );
}

fn bellman_induction(field: Option<&BellmanField>, cfg: &SolverConfig, ledger: &mut Ledger) {
    let t = Instant::now();
    let Some(field) = field else {
        ledger.record("7", false, t.elapsed(), secs(60), "Bellman induction: no converged field".into());
        return;
    };
    let d = field.domain();
    let tol = field.interp_error_bound;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let limits = StrategyLimits { max_depth: 30, mass_floor: 1e-3 };
    let (mut worst, mut invalid, mut errors) = (f64::NEG_INFINITY, 0, 0);
    for k in 0..200 {
        let s = rng.gen_range(-3.5..3.5);
        let x = Point::new(s, s * s + rng.gen_range(0.05..1.0));
        let tree = if k % 2 == 0 { simple_from_point(d, x) } else { extract_strategy(field, x, cfg, limits) };
        let Ok(tree) = tree else {
            errors += 1;
            continue;
        };
        if !validate(&tree, d).passed() {
            invalid += 1;
        }
        let trace = bellman_trace(&tree, |p| field.value_at(p));
        worst = trace.windows(2).map(|w| w[1] - w[0]).fold(worst, f64::max);
    }
    ledger.record(
        "7",
        errors == 0 && invalid == 0 && worst <= tol,
        t.elapsed(),
        secs(60),
        format!("Bellman induction: 200 martingales, max trace increase {worst:.2e} vs tol_trace {tol:.3}, invalid {invalid}"),
    );
}

fn minimal_principle(fields: &[&BellmanField], ledger: &mut Ledger) {
    let t = Instant::now();
    let worst = fields.iter().map(|f| minimal_principle_check(f).gap).fold(f64::INFINITY, f64::min);
    ledger.record(
        "8",
        fields.len() == 22 && worst >= -1e-6,
        t.elapsed(),
        None,
        format!("minimal principle: {} fields, min(field) − min(f) ≥ {worst:.2e}", fields.len()),
    );
}

fn projective(ledger: &mut Ledger) {
    let t = Instant::now();
    let pair = ProjectivePair::quadratic_cusp(3.0, (0.1, 10.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut inv, mut comm, mut ident) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let phi = positive_step(&mut rng);
        let pr = projective_step_function(&phi).unwrap();
        let back = projective_step_function(&pr).unwrap();
        for (a, b) in phi.breakpoints().iter().zip(back.breakpoints()).chain(phi.values().iter().zip(back.values())) {
            inv = inv.max((a - b).abs() / (1.0 + a.abs()));
        }
        let (bp, bq) = (phi.breakpoints(), pr.breakpoints());
        for i in 0..bp.len() {
            for j in i + 1..bp.len() {
                let x = projective_point(average(&phi, (bp[i], bp[j]), &pair.source).unwrap()).unwrap();
                let y = average(&pr, (bq[i], bq[j]), &pair.image).unwrap();
                comm = comm.max(x.dist(&y) / (1.0 + y.norm()));
            }
        }
        let norm = functional_average(&pr, |y| y);
        for f in [|s: f64| s, |s: f64| s * s] {
            let lhs = functional_average(&phi, f);
            let rhs = functional_average(&pr, |y| y * f(1.0 / y)) / norm;
            ident = ident.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
        }
    }
    ledger.record(
        "9",
        inv <= 1e-11 && comm <= 1e-11 && ident <= 1e-10,
        t.elapsed(),
        secs(60),
        format!("projective identities: involution {inv:.1e}, average commutation {comm:.1e}, change of variables {ident:.1e}"),
    );
}

fn e_delta_properties(ledger: &mut Ledger) {
    let t = Instant::now();
    let d = strip();
    let delta = 0.2;
    let e = EDelta::new(&d, delta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sample = |rng: &mut ChaCha8Rng| {
        let s = rng.gen_range(-4.0..4.0);
        Point::new(s, s * s + rng.gen_range(0.0..1.0))
    };
    let (mut range_bad, mut concave_bad, mut min_margin) = (0, 0, f64::INFINITY);
    for _ in 0..10_000 {
        let v = e.eval(sample(&mut rng));
        if !(v > 0.0 && v < delta) {
            range_bad += 1;
        }
    }
    for _ in 0..10_000 {
        let (y, z) = (sample(&mut rng), sample(&mut rng));
        let m = e.midpoint_margin(y, z);
        min_margin = min_margin.min(m);
        if !(m > 0.0) {
            concave_bad += 1;
        }
    }
    ledger.record(
        "10",
        range_bad == 0 && concave_bad == 0,
        t.elapsed(),
        secs(30),
        format!("E_δ: range failures {range_bad}/10000, concavity failures {concave_bad}/10000, min margin {min_margin:.2e}"),
    );
}

fn cheese(ledger: &mut Ledger) {
    let t = Instant::now();
    let outer = OuterSet::disk(Point::new(0.0, 0.0), 2.0);
    let geometries = [
        CheeseDomain::new(outer, vec![Disk::new(Point::new(0.0, 0.0), 0.5)], 0.2),
        CheeseDomain::new(
            outer,
            vec![Disk::new(Point::new(0.0, 0.0), 0.5), Disk::new(Point::new(1.1, 0.0), 0.3)],
            0.2,
        ),
    ];
    let (mut runs, mut unresolved, mut increasing, mut invalid, mut steps) = (0, 0, 0, 0, 0);
    for (g, c) in geometries.iter().enumerate() {
        assert!(validate_cheese(c).valid);
        for x in c.sample_starts(10_000, 11 + g as u64) {
            runs += 1;
            match simulate_to_boundary(c, x, 500, 1e-3) {
                Ok(run) => {
                    steps = steps.max(run.steps);
                    if !(run.residual < 1e-3) {
                        unresolved += 1;
                    }
                    if run.trace.windows(2).any(|w| w[1] > w[0]) {
                        increasing += 1;
                    }
                    if validate(&run.tree, c).violations.iter().any(|v| !v.kind.starts_with("leaf")) {
                        invalid += 1;
                    }
                }
                Err(_) => unresolved += 1,
            }
        }
    }
    ledger.record(
        "11",
        unresolved == 0 && increasing == 0 && invalid == 0,
        t.elapsed(),
        secs(120),
        format!(
            "cheese connectivity: {runs} runs over 2 geometries, unresolved {unresolved}, increasing traces {increasing}, invalid splits {invalid}, max steps {steps}"
        ),
    );
}

fn summability(ledger: &mut Ledger) {
    let t = Instant::now();
    let verdict = |rate: f64| {
        summability_gate(&BoundaryFn::Exp { rate, scale: 1.0, cap: None }, 1.0, 50).map(|r| r.verdict)
    };
    let (slow, fast) = (verdict(0.5), verdict(2.0));
    let ok = matches!(slow, Ok(Summability::Converges)) && matches!(fast, Ok(Summability::Diverges));
    ledger.record("12", ok, t.elapsed(), None, format!("summability gate: e^(t/2) {slow:?}, e^(2t) {fast:?}"));
}

fn main() -> ExitCode {
    let mut ledger = Ledger { failed: 0 };
    let d = strip();
    let mesh = DomainMesh::new(&d, 161, 41).unwrap();
    let cfg = SolverConfig::default();
    let started = Instant::now();
    let table = ChordTable::new(&d, &mesh, &cfg).unwrap();

    let affine = affine_exactness(&table, started, &mut ledger);
    let square = coordinate_identity(&table, &mut ledger);
    let capped = duality(&table, &mut ledger);
    rearrangement(&mut ledger);
    a2_rearrangement(&mut ledger);
    round_trip(&mut ledger);
    bellman_induction(capped.as_ref(), &cfg, &mut ledger);
    let fields: Vec<&BellmanField> = affine.iter().chain(square.as_ref()).chain(capped.as_ref()).collect();
    minimal_principle(&fields, &mut ledger);
    projective(&mut ledger);
    e_delta_properties(&mut ledger);
    cheese(&mut ledger);
    summability(&mut ledger);

    println!("acceptance: {} line(s) failed", ledger.failed);
    if ledger.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
