//! Domain spec documents, CSV and JSON formats, and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cheese::{validate_cheese, CheeseDomain, Disk, OuterSet};
use crate::classes::StepFunction;
use crate::curve::{Curve, Tabulated};
use crate::error::{Error, Result};
use crate::geometry::{Point, StripDomain};
use crate::martingale::MartingaleTree;
use crate::solver::{BellmanField, SolverConfig};
use crate::transforms::ProjectivePair;

pub const FIELD_HEADER: &str = "s,theta,x1,x2,value";
pub const STEP_HEADER: &str = "t_break,s_value";
pub const VALIDATION_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Strip(StripDomain),
    Projective(ProjectivePair),
    Cheese(CheeseDomain),
}

impl DomainSpec {
    /// The strip the solver works on: the strip itself, or the image of a projective pair.
    pub fn solver_domain(&self) -> Option<&StripDomain> {
        match self {
            DomainSpec::Strip(d) => Some(d),
            DomainSpec::Projective(p) => Some(&p.image),
            DomainSpec::Cheese(_) => None,
        }
    }
}

fn parse_err(field: &str, message: impl Into<String>) -> Error {
    Error::Parse { field: field.into(), message: message.into() }
}

fn num(t: &toml::Table, key: &str) -> Result<f64> {
    match t.get(key) {
        Some(toml::Value::Float(x)) => Ok(*x),
        Some(toml::Value::Integer(i)) => Ok(*i as f64),
        Some(other) => Err(parse_err(key, format!("expected a number, found {}", other.type_str()))),
        None => Err(parse_err(key, "missing")),
    }
}

fn num_or(t: &toml::Table, key: &str, default: f64) -> Result<f64> {
    if t.contains_key(key) {
        num(t, key)
    } else {
        Ok(default)
    }
}

fn positive(t: &toml::Table, key: &str) -> Result<f64> {
    let x = num(t, key)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(parse_err(key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn num_array(t: &toml::Table, key: &str) -> Result<Vec<f64>> {
    let arr = t
        .get(key)
        .ok_or_else(|| parse_err(key, "missing"))?
        .as_array()
        .ok_or_else(|| parse_err(key, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| match v {
            toml::Value::Float(x) => Ok(*x),
            toml::Value::Integer(x) => Ok(*x as f64),
            _ => Err(parse_err(key, format!("entry {i} is not a number"))),
        })
        .collect()
}

fn window(t: &toml::Table, default: Option<(f64, f64)>) -> Result<(f64, f64)> {
    if t.contains_key("window") {
        match num_array(t, "window")?[..] {
            [a, b] => Ok((a, b)),
            _ => Err(parse_err("window", "expected [a, b]")),
        }
    } else if t.contains_key("L") {
        let l = positive(t, "L")?;
        Ok((-l, l))
    } else {
        default.ok_or_else(|| parse_err("L", "missing truncation (L or window)"))
    }
}

fn curve(t: &toml::Table, key: &str) -> Result<Curve> {
    let v = t.get(key).ok_or_else(|| parse_err(key, "missing"))?.clone();
    v.try_into::<Curve>().map_err(|e| parse_err(key, e.to_string()))
}

fn checked_strip(mut d: StripDomain, t: &toml::Table) -> Result<StripDomain> {
    d.slope_tol = num_or(t, "slope_tol", d.slope_tol)?;
    d.tol = num_or(t, "tol", d.tol)?;
    let report = d.validate_conditions(VALIDATION_SAMPLES);
    if !report.passed() {
        let detail: Vec<String> = report.violations.iter().map(|v| format!("({}) at s={}: {}", v.condition, v.s, v.detail)).collect();
        return Err(Error::Validation(format!("domain conditions fail: {}", detail.join("; "))));
    }
    Ok(d)
}

/// Parses a TOML domain document. `kind` selects `parabolic`, `power_pair`,
/// `tabulated`, `appendixA`, `curves` (explicit `phi`/`psi` tables) or `cheese`; strips are checked with
/// `validate_conditions` before they are returned.
pub fn parse_domain_spec(text: &str) -> Result<DomainSpec> {
    let t: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_err("document", e.to_string()))?;
    let kind = t
        .get("kind")
        .ok_or_else(|| parse_err("kind", "missing"))?
        .as_str()
        .ok_or_else(|| parse_err("kind", "expected a string"))?;
    match kind {
        "parabolic" => {
            let eps = positive(&t, "eps")?;
            let (a, b) = window(&t, None)?;
            let d = StripDomain::new(Curve::parabola(0.0), Curve::parabola(eps * eps), (a, b))?;
            checked_strip(d, &t).map(DomainSpec::Strip)
        }
        "power_pair" => {
            let p = positive(&t, "exponent")?;
            let gap = positive(&t, "gap")?;
            let coef = num_or(&t, "coef", 1.0)?;
            let d = StripDomain::new(
                Curve::Power { coef, exponent: p, shift: 0.0 },
                Curve::Power { coef, exponent: p, shift: gap },
                window(&t, None)?,
            )?;
            checked_strip(d, &t).map(DomainSpec::Strip)
        }
        "tabulated" => {
            let s = num_array(&t, "s")?;
            let lower = Tabulated::new(s.clone(), num_array(&t, "lower")?)
                .map_err(|e| parse_err("lower", e.to_string()))?;
            let upper = Tabulated::new(s.clone(), num_array(&t, "upper")?)
                .map_err(|e| parse_err("upper", e.to_string()))?;
            let w = window(&t, Some((s[0], s[s.len() - 1])))?;
            let d = StripDomain::new(Curve::Tabulated(lower), Curve::Tabulated(upper), w)?;
            checked_strip(d, &t).map(DomainSpec::Strip)
        }
        "appendixA" => {
            let w = match window(&t, None) {
                Ok(w) => w,
                Err(_) => return Err(parse_err("window", "appendixA needs window = [a, b] with a > 0")),
            };
            let pair = if t.contains_key("q") {
                ProjectivePair::quadratic_cusp(num(&t, "q")?, w)?
            } else {
                ProjectivePair::new(StripDomain::new(curve(&t, "phi")?, curve(&t, "psi")?, w)?)?
            };
            // The source form is a cusp, so only the image is held to the strip conditions.
            let image = checked_strip(pair.image.clone(), &t)?;
            Ok(DomainSpec::Projective(ProjectivePair { source: pair.source, image }))
        }
        "curves" => {
            let d = StripDomain::new(curve(&t, "phi")?, curve(&t, "psi")?, window(&t, None)?)?;
            checked_strip(d, &t).map(DomainSpec::Strip)
        }
        "cheese" => {
            let center = match num_array(&t, "center") {
                Ok(c) if c.len() == 2 => Point::new(c[0], c[1]),
                Ok(_) => return Err(parse_err("center", "expected [x1, x2]")),
                Err(_) => Point::new(0.0, 0.0),
            };
            let outer = if t.contains_key("semi_axes") {
                match num_array(&t, "semi_axes")?[..] {
                    [a, b] => OuterSet { center, semi_axes: (a, b) },
                    _ => return Err(parse_err("semi_axes", "expected [a, b]")),
                }
            } else {
                OuterSet::disk(center, positive(&t, "radius")?)
            };
            let holes = match t.get("holes") {
                None => Vec::new(),
                Some(v) => v
                    .as_array()
                    .ok_or_else(|| parse_err("holes", "expected an array of [x1, x2, r]"))?
                    .iter()
                    .enumerate()
                    .map(|(i, h)| {
                        let xs: Vec<f64> = h
                            .as_array()
                            .map(|a| a.iter().filter_map(|x| x.as_float().or(x.as_integer().map(|i| i as f64))).collect())
                            .unwrap_or_default();
                        match xs[..] {
                            [x, y, r] => Ok(Disk::new(Point::new(x, y), r)),
                            _ => Err(parse_err("holes", format!("entry {i} is not [x1, x2, r]"))),
                        }
                    })
                    .collect::<Result<_>>()?,
            };
            let c = CheeseDomain::new(outer, holes, positive(&t, "min_separation")?);
            let report = validate_cheese(&c);
            if !report.valid {
                return Err(Error::Validation(report.issues.join("; ")));
            }
            Ok(DomainSpec::Cheese(c))
        }
        other => Err(parse_err("kind", format!("unknown kind `{other}`"))),
    }
}

/// A `kind = "curves"` document that parses back to `d`.
pub fn curves_spec_toml(d: &StripDomain) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        kind: &'static str,
        window: [f64; 2],
        slope_tol: f64,
        tol: f64,
        phi: &'a Curve,
        psi: &'a Curve,
    }
    let doc = Doc { kind: "curves", window: [d.window.0, d.window.1], slope_tol: d.slope_tol, tol: d.tol, phi: &d.lower, psi: &d.upper };
    toml::to_string(&doc).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Round-trip-exact decimal with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn is_data_line(line: &str) -> bool {
    let l = line.trim();
    !l.is_empty() && !l.starts_with('#')
}

pub fn parse_step_function_csv(text: &str) -> Result<StepFunction> {
    let mut ends = Vec::new();
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| is_data_line(l)) {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if ends.is_empty() && cols.first().is_some_and(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let field = format!("line {}", n + 1);
        if cols.len() != 2 {
            return Err(parse_err(&field, format!("expected 2 columns, found {}", cols.len())));
        }
        let t: f64 = cols[0].parse().map_err(|_| parse_err(&field, format!("bad t_break `{}`", cols[0])))?;
        let s: f64 = cols[1].parse().map_err(|_| parse_err(&field, format!("bad s_value `{}`", cols[1])))?;
        ends.push(t);
        values.push(s);
    }
    if ends.is_empty() {
        return Err(parse_err("rows", "no data rows"));
    }
    if ends.windows(2).any(|w| !(w[1] > w[0])) || !(ends[0] > 0.0) {
        return Err(Error::Validation("t_break values must increase strictly from above 0".into()));
    }
    if ends[ends.len() - 1] != 1.0 {
        return Err(Error::Validation(format!("last t_break is {}, expected 1", ends[ends.len() - 1])));
    }
    StepFunction::from_pieces(&ends, values).map_err(|e| Error::Validation(e.to_string()))
}

pub fn ingest_step_function_csv(path: &Path) -> Result<StepFunction> {
    parse_step_function_csv(&std::fs::read_to_string(path)?)
}

pub fn step_function_csv(phi: &StepFunction) -> String {
    let mut out = format!("{STEP_HEADER}\n");
    for (t, s) in phi.breakpoints()[1..].iter().zip(phi.values()) {
        let _ = writeln!(out, "{},{}", fmt17(*t), fmt17(*s));
    }
    out
}

pub fn write_step_function_csv(phi: &StepFunction, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, step_function_csv(phi))?)
}

/// Field rows `s,theta,x1,x2,value`, θ outer and s inner.
pub fn field_csv(field: &BellmanField) -> String {
    let mesh = field.mesh();
    let mut out = String::with_capacity(96 * (mesh.len() + 1));
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for j in 0..mesh.n_theta() {
        for i in 0..mesh.n_s() {
            let p = field.points()[i * mesh.n_theta() + j];
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(mesh.s_grid[i]),
                fmt17(mesh.theta_grid[j]),
                fmt17(p.x1),
                fmt17(p.x2),
                fmt17(field.node(i, j))
            );
        }
    }
    out
}

pub fn export_field_csv(field: &BellmanField, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, field_csv(field))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub s: f64,
    pub theta: f64,
    pub x1: f64,
    pub x2: f64,
    pub value: f64,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| is_data_line(l));
    match lines.next() {
        Some((_, h)) if h.trim() == FIELD_HEADER => {}
        _ => return Err(parse_err("header", format!("expected `{FIELD_HEADER}`"))),
    }
    lines
        .map(|(n, line)| {
            let xs: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(&format!("line {}", n + 1), e.to_string()))?;
            match xs[..] {
                [s, theta, x1, x2, value] => Ok(FieldRow { s, theta, x1, x2, value }),
                _ => Err(parse_err(&format!("line {}", n + 1), "expected 5 columns")),
            }
        })
        .collect()
}

pub fn tree_json(m: &MartingaleTree) -> Result<String> {
    serde_json::to_string_pretty(m).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn parse_tree_json(text: &str) -> Result<MartingaleTree> {
    let m: MartingaleTree = serde_json::from_str(text).map_err(|e| parse_err("tree", e.to_string()))?;
    Ok(MartingaleTree::new(m.root))
}

/// Everything needed to replay a run, plus what it produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub domain_spec: String,
    pub function_spec: String,
    pub solver_config: Option<SolverConfig>,
    pub mesh: Option<(usize, usize)>,
    pub rng: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub outputs: BTreeMap<String, String>,
    pub timings: BTreeMap<String, f64>,
    pub versions: BTreeMap<String, String>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string());
        RunManifest { command: command.into(), rng: "ChaCha8".into(), seed, versions, ..Default::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_err("manifest", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryFn;
    use crate::solver::{initialize, DomainMesh};

    #[test]
    fn parabolic_spec() {
        let d = parse_domain_spec("kind = \"parabolic\"\neps = 1\nL = 4\n").unwrap();
        assert_eq!(d, DomainSpec::Strip(StripDomain::parabolic(1.0, 4.0).unwrap()));
    }

    #[test]
    fn appendix_a_spec() {
        let text = "kind = \"appendixA\"\nwindow = [0.1, 4.0]\n[phi]\ntype = \"half_line_power\"\ncoef = 1.0\nexponent = 2.0\n[psi]\ntype = \"half_line_power\"\ncoef = 3.0\nexponent = 2.0\n";
        let DomainSpec::Projective(p) = parse_domain_spec(text).unwrap() else { panic!("expected a pair") };
        assert_eq!(p, ProjectivePair::quadratic_cusp(3.0, (0.1, 4.0)).unwrap());
        let short = parse_domain_spec("kind = \"appendixA\"\nq = 3\nwindow = [0.1, 4.0]\n").unwrap();
        assert_eq!(short, DomainSpec::Projective(p.clone()));
        let image = parse_domain_spec(&curves_spec_toml(&p.image).unwrap()).unwrap();
        assert_eq!(image, DomainSpec::Strip(p.image));
    }

    #[test]
    fn malformed_eps_names_the_field() {
        for text in ["kind = \"parabolic\"\neps = \"one\"\nL = 4\n", "kind = \"parabolic\"\neps = -1\nL = 4\n"] {
            match parse_domain_spec(text) {
                Err(Error::Parse { field, .. }) => assert_eq!(field, "eps"),
                other => panic!("{other:?}"),
            }
        }
        assert!(matches!(parse_domain_spec("kind = parabolic"), Err(Error::Parse { .. })));
    }

    #[test]
    fn other_kinds() {
        let pp = parse_domain_spec("kind = \"power_pair\"\nexponent = 2\ngap = 1\nL = 3\n").unwrap();
        assert!(matches!(pp, DomainSpec::Strip(_)));
        let s: Vec<String> = (-8..=8).map(|k| format!("{}", k as f64 * 0.5)).collect();
        let lo: Vec<String> = (-8..=8).map(|k| format!("{}", (k as f64 * 0.5).powi(2))).collect();
        let hi: Vec<String> = (-8..=8).map(|k| format!("{}", (k as f64 * 0.5).powi(2) + 1.0)).collect();
        let text = format!(
            "kind = \"tabulated\"\ns = [{}]\nlower = [{}]\nupper = [{}]\nwindow = [-3.0, 3.0]\n",
            s.join(","),
            lo.join(","),
            hi.join(",")
        );
        assert!(matches!(parse_domain_spec(&text).unwrap(), DomainSpec::Strip(_)));
        let cheese = "kind = \"cheese\"\nradius = 2\nholes = [[0, 0, 0.5], [1.1, 0, 0.3]]\nmin_separation = 0.2\n";
        let DomainSpec::Cheese(c) = parse_domain_spec(cheese).unwrap() else { panic!() };
        assert_eq!(c.holes.len(), 2);
        let bad = "kind = \"cheese\"\nradius = 2\nholes = [[1.5, 0, 0.5]]\nmin_separation = 0.2\n";
        assert!(matches!(parse_domain_spec(bad), Err(Error::Validation(_))));
    }

    #[test]
    fn step_csv_examples() {
        let phi = parse_step_function_csv("0.5,-1\n1,1\n").unwrap();
        assert_eq!(phi, StepFunction::from_pieces(&[0.5, 1.0], vec![-1.0, 1.0]).unwrap());
        assert!(matches!(parse_step_function_csv("t_break,s_value\n0.6,1\n0.5,2\n1,3\n"), Err(Error::Validation(_))));
        assert!(parse_step_function_csv("").is_err());
        assert!(parse_step_function_csv("t_break,s_value\n").is_err());
        let back = parse_step_function_csv(&step_function_csv(&phi)).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn field_csv_round_trip() {
        let d = StripDomain::parabolic(1.0, 4.0).unwrap();
        let mesh = DomainMesh::new(&d, 2, 2).unwrap();
        let field = initialize(&d, &BoundaryFn::capped_exp(4.0), &mesh).unwrap();
        let text = field_csv(&field);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "s,theta,x1,x2,value");
        let rows = parse_field_csv(&text).unwrap();
        assert_eq!(rows[1].s, 4.0);
        assert_eq!(rows[1].theta, 0.0);
        for (k, r) in rows.iter().enumerate() {
            let (i, j) = (k % 2, k / 2);
            assert_eq!(r.value, field.node(i, j));
        }
    }

    #[test]
    fn manifest_and_tree_round_trip() {
        let m = RunManifest::new("solve", 7);
        assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
        let tree = MartingaleTree::constant(Point::new(1.0, 1.0));
        assert_eq!(parse_tree_json(&tree_json(&tree).unwrap()).unwrap(), tree);
    }
}
