use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use bellman_strip::cheese::{simulate_to_boundary, CheeseDomain, Disk, OuterSet};
use bellman_strip::classes::{bmo_norm, membership, rearrange as rearranged};
use bellman_strip::io::{
    curves_spec_toml, export_field_csv, ingest_step_function_csv, parse_domain_spec, parse_field_csv,
    parse_tree_json, tree_json, write_step_function_csv, RunManifest,
};
use bellman_strip::martingale::{expectation, from_function, minimal_principle_check, to_step_function, validate};
use bellman_strip::solver::{
    duality_gap, probe_grid, solve as solve_field, verify_local_concavity, BellmanField, DomainMesh, SolverConfig,
    StrategyLimits,
};
use bellman_strip::transforms::{projective_step_function, ProjectivePair};
use bellman_strip::{BoundaryFn, DomainSpec, Error, Point, PointClass, StripDomain};

use crate::{CheeseArgs, ClassArgs, ExportArgs, GenArgs, RearrangeArgs, SolveArgs, TransformArgs, VerifyArgs};

const MAX_LISTED_VIOLATIONS: usize = 20;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Io(_)) => 4,
            Failure::Core(
                Error::NotConverged { .. }
                | Error::MaxStepsExceeded { .. }
                | Error::NoConvergence(_)
                | Error::DepthExceeded { .. }
                | Error::ResolutionInsufficient { .. },
            ) => 3,
            _ => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

pub fn parse_point(s: &str) -> Result<Point, String> {
    let xs: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match xs[..] {
        [a, b] => Ok(Point::new(a, b)),
        _ => Err(format!("expected x1,x2, got `{s}`")),
    }
}

pub fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    let xs: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match xs[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(format!("expected x1,x2,r, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(std::fs::read_to_string(path)?)
}

fn strip_of(spec: &DomainSpec) -> Result<&StripDomain, Failure> {
    spec.solver_domain()
        .ok_or_else(|| Failure::Check("a strip domain is required here, not a cheese domain".into()))
}

fn write_json(path: &Path, v: Value) -> Outcome {
    std::fs::write(path, serde_json::to_string_pretty(&v).expect("serializable") + "\n")?;
    Ok(())
}

fn path_value(p: &Path) -> Value {
    p.display().to_string().into()
}

struct SolvePlan {
    args: SolveArgs,
    domain_text: String,
    cfg: SolverConfig,
}

fn plan(a: &SolveArgs) -> Result<SolvePlan, Failure> {
    if let Some(m) = &a.manifest {
        let m = RunManifest::from_json(&read(m)?)?;
        let mut args = a.clone();
        args.function = m.function_spec.clone();
        args.seed = m.seed;
        if let Some((n_s, n_t)) = m.mesh {
            (args.n_s, args.n_theta) = (n_s, n_t);
        }
        let p = &m.parameters;
        let get_u = |k: &str, d: usize| p.get(k).and_then(Value::as_u64).map_or(d, |v| v as usize);
        let get_f = |k: &str, d: f64| p.get(k).and_then(Value::as_f64).unwrap_or(d);
        args.segments = get_u("segments", args.segments);
        args.probes_s = get_u("probes_s", args.probes_s);
        args.probes_theta = get_u("probes_theta", args.probes_theta);
        args.tol_c_mult = get_f("tol_c_mult", args.tol_c_mult);
        args.max_rel_gap = get_f("max_rel_gap", args.max_rel_gap);
        args.max_depth = get_u("max_depth", args.max_depth);
        args.mass_floor = get_f("mass_floor", args.mass_floor);
        let cfg = m.solver_config.clone().ok_or_else(|| Failure::Check("manifest has no solver_config".into()))?;
        return Ok(SolvePlan { args, domain_text: m.domain_spec, cfg });
    }
    let domain = a.domain.as_ref().expect("clap enforces --domain or --manifest");
    let cfg = SolverConfig {
        k_directions: a.k_directions,
        m_endpoints: a.m_endpoints,
        tol: a.tol,
        max_iter: a.max_iter,
    };
    Ok(SolvePlan { args: a.clone(), domain_text: read(domain)?, cfg })
}

fn manifest_for(p: &SolvePlan) -> RunManifest {
    let a = &p.args;
    let mut m = RunManifest::new("solve", a.seed);
    m.domain_spec = p.domain_text.clone();
    m.function_spec = a.function.clone();
    m.solver_config = Some(p.cfg.clone());
    m.mesh = Some((a.n_s, a.n_theta));
    for (k, v) in [
        ("segments", json!(a.segments)),
        ("tol_c_mult", json!(a.tol_c_mult)),
        ("probes_s", json!(a.probes_s)),
        ("probes_theta", json!(a.probes_theta)),
        ("max_rel_gap", json!(a.max_rel_gap)),
        ("max_depth", json!(a.max_depth)),
        ("mass_floor", json!(a.mass_floor)),
    ] {
        m.parameters.insert(k.into(), v);
    }
    m
}

/// Solves and writes the field CSV; a non-converged field is still written.
fn solve_and_export(p: &SolvePlan, field_path: &Path, m: &mut RunManifest) -> Result<BellmanField, Failure> {
    let spec = parse_domain_spec(&p.domain_text)?;
    let d = strip_of(&spec)?;
    let f = BoundaryFn::parse(&p.args.function)?;
    let mesh = DomainMesh::new(d, p.args.n_s, p.args.n_theta)?;
    p.cfg.validate()?;
    let t0 = Instant::now();
    let result = solve_field(d, &f, &mesh, &p.cfg);
    m.timings.insert("solve_s".into(), t0.elapsed().as_secs_f64());
    m.outputs.insert("field".into(), field_path.display().to_string());
    match result {
        Ok(field) => {
            export_field_csv(&field, field_path)?;
            Ok(field)
        }
        Err(Error::NotConverged { iterations, delta, field }) => {
            export_field_csv(&field, field_path)?;
            Err(Failure::Core(Error::NotConverged { iterations, delta, field }))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn solve(a: &SolveArgs, out: &Path, report: &mut Map<String, Value>) -> Outcome {
    let p = plan(a)?;
    let mut m = manifest_for(&p);
    let field_path = out.join("field.csv");
    let manifest_path = out.join("manifest.json");
    report.insert("manifest".into(), path_value(&manifest_path));
    let field = match solve_and_export(&p, &field_path, &mut m) {
        Ok(field) => field,
        Err(e) => {
            write_json(&manifest_path, json!(m))?;
            return Err(e);
        }
    };
    let a = &p.args;
    let mut problems = Vec::new();
    let d = field.domain().clone();
    if let Some(w) = bellman_strip::solver::majorant_guard(&d, field.boundary_fn(), 1e6) {
        report.insert("majorant_warning".into(), w.into());
    }
    m.summary.insert("iterations".into(), json!(field.iterations));
    m.summary.insert("final_delta".into(), json!(field.last_sweep_delta));
    m.summary.insert("interp_error_bound".into(), json!(field.interp_error_bound));

    let t0 = Instant::now();
    let tol_c = a.tol_c_mult * field.interp_error_bound;
    let conc = verify_local_concavity(&field, a.segments, a.seed, tol_c);
    m.timings.insert("concavity_s".into(), t0.elapsed().as_secs_f64());
    let conc_path = out.join("concavity.json");
    write_json(&conc_path, json!(conc))?;
    m.outputs.insert("concavity".into(), conc_path.display().to_string());
    m.summary.insert("concavity_violations".into(), json!(conc.violations));
    if !conc.passed() {
        problems.push(format!("{} concavity violations (worst {:e})", conc.violations, conc.worst));
    }

    let t0 = Instant::now();
    let probes = probe_grid(&d, a.probes_s, a.probes_theta);
    let gaps = duality_gap(&field, &probes, &p.cfg, StrategyLimits { max_depth: a.max_depth, mass_floor: a.mass_floor })?;
    m.timings.insert("duality_s".into(), t0.elapsed().as_secs_f64());
    let gap_path = out.join("duality.json");
    write_json(&gap_path, json!(gaps))?;
    m.outputs.insert("duality".into(), gap_path.display().to_string());
    let worst_gap = gaps.iter().map(|g| g.rel_gap).fold(0.0, f64::max);
    m.summary.insert("max_rel_gap".into(), json!(worst_gap));
    if worst_gap > a.max_rel_gap {
        problems.push(format!("relative duality gap {worst_gap:e} exceeds {}", a.max_rel_gap));
    }

    let mp = minimal_principle_check(&field);
    m.summary.insert("minimal_principle_gap".into(), json!(mp.gap));
    if mp.gap < -1e-6 {
        problems.push(format!("field minimum {} below boundary minimum {}", mp.field_min, mp.boundary_min));
    }
    write_json(&manifest_path, json!(m))?;
    report.insert("summary".into(), json!(m.summary));
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(problems.join("; ")))
    }
}

pub fn verify(a: &VerifyArgs, report: &mut Map<String, Value>) -> Outcome {
    let spec = parse_domain_spec(&read(&a.domain)?)?;
    if let Some(t) = &a.tree {
        let tree = parse_tree_json(&read(t)?)?;
        let r = match &spec {
            DomainSpec::Cheese(c) => validate(&tree, c),
            other => validate(&tree, strip_of(other)?),
        };
        report.insert("nodes".into(), json!(r.nodes));
        report.insert("depth".into(), json!(tree.depth));
        report.insert("violations".into(), json!(r.violations.len()));
        report.insert(
            "first_violations".into(),
            json!(r.violations.iter().take(MAX_LISTED_VIOLATIONS).collect::<Vec<_>>()),
        );
        if let Some(fs) = &a.function {
            let f = BoundaryFn::parse(fs)?;
            report.insert("expectation".into(), json!(expectation(&tree, |s| f.eval(s))));
        }
        return if r.passed() {
            Ok(())
        } else {
            Err(Failure::Check(format!("{} tree violations", r.violations.len())))
        };
    }
    let Some(field) = &a.field else {
        return Err(Failure::Check("give --tree or --field".into()));
    };
    let d = strip_of(&spec)?;
    let f = BoundaryFn::parse(a.function.as_deref().expect("clap requires --function"))?;
    let rows = parse_field_csv(&read(field)?)?;
    let outside = rows.iter().filter(|r| d.classify_point(Point::new(r.x1, r.x2)) == PointClass::Outside).count();
    let dirichlet = rows.iter().filter(|r| r.theta == 0.0 && r.value != f.eval(r.s)).count();
    let field_min = rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let boundary_min = rows.iter().filter(|r| r.theta == 0.0).map(|r| r.value).fold(f64::INFINITY, f64::min);
    for (k, v) in [
        ("rows", json!(rows.len())),
        ("points_outside", json!(outside)),
        ("dirichlet_mismatches", json!(dirichlet)),
        ("field_min", json!(field_min)),
        ("boundary_min", json!(boundary_min)),
    ] {
        report.insert(k.into(), v);
    }
    let mut problems = Vec::new();
    if rows.is_empty() {
        problems.push("no rows".to_string());
    }
    if outside > 0 {
        problems.push(format!("{outside} points outside the domain"));
    }
    if dirichlet > 0 {
        problems.push(format!("{dirichlet} boundary values differ from f"));
    }
    if field_min < boundary_min - a.tol {
        problems.push(format!("field minimum {field_min} below boundary minimum {boundary_min}"));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(problems.join("; ")))
    }
}

pub fn rearrange(a: &RearrangeArgs, out: &Path, report: &mut Map<String, Value>) -> Outcome {
    let phi = ingest_step_function_csv(&a.input)?;
    let r = rearranged(&phi);
    let path = a.output.clone().unwrap_or_else(|| out.join("rearranged.csv"));
    write_step_function_csv(&r, &path)?;
    report.insert("pieces_in".into(), json!(phi.len()));
    report.insert("pieces_out".into(), json!(r.len()));
    report.insert("output".into(), path_value(&path));
    Ok(())
}

pub fn genmartingale(a: &GenArgs, out: &Path, report: &mut Map<String, Value>) -> Outcome {
    let spec = parse_domain_spec(&read(&a.domain)?)?;
    let d = strip_of(&spec)?;
    let dext = d.extension(a.delta)?;
    let phi = ingest_step_function_csv(&a.input)?;
    let tree = from_function(&phi, d, &dext, a.depth_cap, a.t_grid)?;
    let tree_path = out.join("tree.json");
    std::fs::write(&tree_path, tree_json(&tree)? + "\n")?;
    let terminal = to_step_function(&tree)?;
    let dist_path = out.join("terminal.csv");
    write_step_function_csv(&terminal, &dist_path)?;
    let r = validate(&tree, &dext);
    report.insert("tree".into(), path_value(&tree_path));
    report.insert("terminal".into(), path_value(&dist_path));
    report.insert("depth".into(), json!(tree.depth));
    report.insert("nodes".into(), json!(r.nodes));
    report.insert("violations".into(), json!(r.violations.len()));
    report.insert("matches_rearrangement".into(), json!(terminal == rearranged(&phi)));
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} tree violations", r.violations.len())))
    }
}

pub fn transform(a: &TransformArgs, out: &Path, report: &mut Map<String, Value>) -> Outcome {
    let pair = match parse_domain_spec(&read(&a.domain)?)? {
        DomainSpec::Projective(p) => p,
        DomainSpec::Strip(d) => ProjectivePair::new(d)?,
        DomainSpec::Cheese(_) => return Err(Failure::Check("cheese domains have no projective form".into())),
    };
    let spec_path = out.join("image_domain.toml");
    std::fs::write(&spec_path, curves_spec_toml(&pair.image)?)?;
    report.insert("image_domain".into(), path_value(&spec_path));
    report.insert("image_window".into(), json!([pair.image.window.0, pair.image.window.1]));
    if let Some(input) = &a.input {
        let phi = ingest_step_function_csv(input)?;
        let image = projective_step_function(&phi)?;
        let path = out.join("transformed.csv");
        write_step_function_csv(&image, &path)?;
        report.insert("transformed".into(), path_value(&path));
    }
    let v = pair.image.validate_conditions(bellman_strip::io::VALIDATION_SAMPLES);
    report.insert("image_conditions".into(), json!(v));
    if v.passed() {
        Ok(())
    } else {
        Err(Failure::Check("image domain fails the strip conditions".into()))
    }
}

fn cheese_of(a: &CheeseArgs) -> Result<CheeseDomain, Failure> {
    if let Some(path) = &a.domain {
        return match parse_domain_spec(&read(path)?)? {
            DomainSpec::Cheese(c) => Ok(c),
            _ => Err(Failure::Check("expected kind = \"cheese\"".into())),
        };
    }
    let holes = a.holes.iter().map(|&(x, y, r)| Disk::new(Point::new(x, y), r)).collect();
    let c = CheeseDomain::new(OuterSet::disk(Point::new(0.0, 0.0), a.radius), holes, a.min_separation);
    let r = bellman_strip::cheese::validate_cheese(&c);
    if !r.valid {
        return Err(Error::Validation(r.issues.join("; ")).into());
    }
    Ok(c)
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()))
}

pub fn cheese_sim(a: &CheeseArgs, out: &Path, report: &mut Map<String, Value>) -> Outcome {
    use std::fmt::Write as _;
    let c = cheese_of(a)?;
    if let Some(x0) = a.start {
        let run = simulate_to_boundary(&c, x0, a.max_steps, a.mass_tol)?;
        let mut csv = String::from("step,lyapunov,free_mass\n");
        for (n, (g, m)) in run.trace.iter().zip(&run.free_mass).enumerate() {
            let _ = writeln!(csv, "{n},{},{}", bellman_strip::io::fmt17(*g), bellman_strip::io::fmt17(*m));
        }
        let trace_path = out.join("trace.csv");
        std::fs::write(&trace_path, csv)?;
        let tree_path = out.join("tree.json");
        std::fs::write(&tree_path, tree_json(&run.tree)? + "\n")?;
        let ok = monotone(&run.trace);
        for (k, v) in [
            ("trace", path_value(&trace_path)),
            ("tree", path_value(&tree_path)),
            ("steps", json!(run.steps)),
            ("residual", json!(run.residual)),
            ("shortest_side", json!(run.shortest_side)),
            ("monotone", json!(ok)),
        ] {
            report.insert(k.into(), v);
        }
        return if ok { Ok(()) } else { Err(Failure::Check("Lyapunov trace increases".into())) };
    }
    let Some(n) = a.random else {
        return Err(Failure::Check("give --start x1,x2 or --random N".into()));
    };
    let mut csv = String::from("run,x1,x2,steps,residual,monotone\n");
    let (mut unresolved, mut increasing, mut max_steps) = (0usize, 0usize, 0usize);
    for (k, x) in c.sample_starts(n, a.seed).into_iter().enumerate() {
        match simulate_to_boundary(&c, x, a.max_steps, a.mass_tol) {
            Ok(run) => {
                let ok = monotone(&run.trace);
                increasing += usize::from(!ok);
                max_steps = max_steps.max(run.steps);
                let _ = writeln!(csv, "{k},{},{},{},{},{ok}", x.x1, x.x2, run.steps, run.residual);
            }
            Err(Error::MaxStepsExceeded { steps, residual }) => {
                unresolved += 1;
                let _ = writeln!(csv, "{k},{},{},{steps},{residual},false", x.x1, x.x2);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let runs_path = out.join("runs.csv");
    std::fs::write(&runs_path, csv)?;
    for (k, v) in [
        ("runs", path_value(&runs_path)),
        ("starts", json!(n)),
        ("seed", json!(a.seed)),
        ("unresolved", json!(unresolved)),
        ("non_monotone", json!(increasing)),
        ("max_steps_used", json!(max_steps)),
    ] {
        report.insert(k.into(), v);
    }
    if unresolved > 0 {
        return Err(Error::MaxStepsExceeded { steps: a.max_steps, residual: f64::NAN }.into());
    }
    if increasing > 0 {
        return Err(Failure::Check(format!("{increasing} runs with increasing Lyapunov trace")));
    }
    Ok(())
}

pub fn check_class(a: &ClassArgs, report: &mut Map<String, Value>) -> Outcome {
    let spec = parse_domain_spec(&read(&a.domain)?)?;
    let d = strip_of(&spec)?;
    let phi = ingest_step_function_csv(&a.input)?;
    let r = membership(&phi, d, a.grid);
    report.insert("membership".into(), json!(r));
    report.insert("bmo_norm".into(), json!(bmo_norm(&phi, a.grid)));
    if r.member {
        Ok(())
    } else {
        Err(Failure::Check(format!("not a member: interval {:?}, margin {:e}", r.worst_interval, r.margin)))
    }
}

pub fn export(a: &ExportArgs, out: &Path, report: &mut Map<String, Value>) -> Outcome {
    if let Some(t) = &a.tree {
        let tree = parse_tree_json(&read(t)?)?;
        let dist = to_step_function(&tree)?;
        let path = a.output.clone().unwrap_or_else(|| out.join("terminal.csv"));
        write_step_function_csv(&dist, &path)?;
        report.insert("output".into(), path_value(&path));
        return Ok(());
    }
    let manifest: PathBuf = a.manifest.clone().expect("clap enforces --tree or --manifest");
    let args = SolveArgs {
        domain: None,
        manifest: Some(manifest),
        function: String::new(),
        n_s: 0,
        n_theta: 0,
        k_directions: 0,
        m_endpoints: 0,
        max_iter: 0,
        tol: None,
        segments: 0,
        tol_c_mult: 0.0,
        probes_s: 0,
        probes_theta: 0,
        max_rel_gap: 0.0,
        max_depth: 0,
        mass_floor: 0.0,
        seed: 0,
    };
    let p = plan(&args)?;
    let path = a.output.clone().unwrap_or_else(|| out.join("field.csv"));
    let mut m = manifest_for(&p);
    let field = solve_and_export(&p, &path, &mut m)?;
    report.insert("output".into(), path_value(&path));
    report.insert("iterations".into(), json!(field.iterations));
    Ok(())
}
