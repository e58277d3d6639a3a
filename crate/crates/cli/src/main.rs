use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "bellman-strip", version, about = "Bellman functions on strip and cheese domains")]
struct Cli {
    /// Directory for reports and artifacts.
    #[arg(long, global = true, env = "BELLMAN_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the field, verify concavity, duality gap and minimal principle.
    Solve(SolveArgs),
    /// Validate a martingale tree or a field CSV against a domain.
    Verify(VerifyArgs),
    /// Non-decreasing rearrangement of a step function.
    Rearrange(RearrangeArgs),
    /// Build the martingale generated by a step function.
    Genmartingale(GenArgs),
    /// Projective image of a domain and of a step function.
    Transform(TransformArgs),
    /// Simulate the tangent-chord martingale in a cheese domain.
    CheeseSim(CheeseArgs),
    /// Class membership of a step function.
    CheckClass(ClassArgs),
    /// Convert a tree to its terminal step function, or regenerate a field from a manifest.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Domain spec document (TOML).
    #[arg(long, required_unless_present = "manifest")]
    pub domain: Option<PathBuf>,
    /// Replay a previous run from its manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Boundary function, e.g. `exp:1:cap=4`, `square`, `poly:0,1,1`.
    #[arg(long, default_value = "exp:1:cap=4")]
    pub function: String,
    #[arg(long, default_value_t = 161)]
    pub n_s: usize,
    #[arg(long, default_value_t = 41)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 64)]
    pub k_directions: usize,
    #[arg(long, default_value_t = 16)]
    pub m_endpoints: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random segments for the concavity check.
    #[arg(long, default_value_t = 100_000)]
    pub segments: usize,
    /// Concavity tolerance as a multiple of the interpolation bound.
    #[arg(long, default_value_t = 3.0)]
    pub tol_c_mult: f64,
    #[arg(long, default_value_t = 5)]
    pub probes_s: usize,
    #[arg(long, default_value_t = 5)]
    pub probes_theta: usize,
    /// Largest acceptable relative duality gap.
    #[arg(long, default_value_t = 0.02)]
    pub max_rel_gap: f64,
    /// Depth cap of the greedy martingales used for the lower bound.
    #[arg(long, default_value_t = 400)]
    pub max_depth: usize,
    /// Greedy nodes lighter than this finish along their fixed chord.
    #[arg(long, default_value_t = 1e-5)]
    pub mass_floor: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Martingale tree (JSON).
    #[arg(long, conflicts_with = "field")]
    pub tree: Option<PathBuf>,
    /// Field CSV written by `solve`.
    #[arg(long, requires = "function")]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub function: Option<String>,
    /// Minimal-principle tolerance for fields.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct RearrangeArgs {
    /// Step-function CSV (`t_break,s_value`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Width of the extension the splits may use.
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, default_value_t = 40)]
    pub depth_cap: usize,
    #[arg(long, default_value_t = 256)]
    pub t_grid: usize,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    /// Source-form domain spec (`appendixA`, or any strip with a positive window).
    #[arg(long)]
    pub domain: PathBuf,
    /// Positive step function to transform.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheeseArgs {
    /// Cheese spec document; overrides the geometry flags.
    #[arg(long)]
    pub domain: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    /// Hole as `x1,x2,r`; repeatable.
    #[arg(long = "hole", value_parser = commands::parse_triple)]
    pub holes: Vec<(f64, f64, f64)>,
    #[arg(long, default_value_t = 0.2)]
    pub min_separation: f64,
    /// Start point `x1,x2`.
    #[arg(long, value_parser = commands::parse_point, conflicts_with = "random")]
    pub start: Option<bellman_strip::Point>,
    /// Number of random starts instead of a single one.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub mass_tol: f64,
}

#[derive(Args, Debug)]
pub struct ClassArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Tree to export as its terminal step function.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    pub tree: Option<PathBuf>,
    /// Manifest of a `solve` run whose field CSV should be regenerated.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Solve(_) => "solve",
        Command::Verify(_) => "verify",
        Command::Rearrange(_) => "rearrange",
        Command::Genmartingale(_) => "genmartingale",
        Command::Transform(_) => "transform",
        Command::CheeseSim(_) => "cheese-sim",
        Command::CheckClass(_) => "check-class",
        Command::Export(_) => "export",
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!("error: cannot create {}: {e}", cli.out_dir.display());
        return ExitCode::from(4);
    }
    let mut report = serde_json::Map::new();
    let out = &cli.out_dir;
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a, out, &mut report),
        Command::Verify(a) => commands::verify(&a, &mut report),
        Command::Rearrange(a) => commands::rearrange(&a, out, &mut report),
        Command::Genmartingale(a) => commands::genmartingale(&a, out, &mut report),
        Command::Transform(a) => commands::transform(&a, out, &mut report),
        Command::CheeseSim(a) => commands::cheese_sim(&a, out, &mut report),
        Command::CheckClass(a) => commands::check_class(&a, &mut report),
        Command::Export(a) => commands::export(&a, out, &mut report),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(f) => f.exit_code(),
    };
    report.insert("command".into(), name.into());
    report.insert("exit_code".into(), code.into());
    if let Err(f) = &result {
        eprintln!("error: {f}");
        report.insert("error".into(), f.to_string().into());
    }
    let path = out.join(format!("{name}_report.json"));
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(report)).expect("report serializes");
    if let Err(e) = std::fs::write(&path, text + "\n") {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(4);
    }
    println!("{} -> {}", if code == 0 { "ok" } else { "failed" }, path.display());
    ExitCode::from(code)
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}
