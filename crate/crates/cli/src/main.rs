use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use hqc_core::gatelib::{gate_matrix, load_matrix, GateSpec};
use hqc_core::loops::{path_to_tsv, write_atomic, LOOP_FORMAT_VERSION};
use hqc_core::optimizer::{landscape_between_minima, synthesize, SynthesisConfig};
use hqc_core::{
    frob_dist, holonomy, load_loop, save_loop, AnalyticConnection, ComplexMatrix, EvaluationRule,
    FormatError, GateError, GateMatrix, HolonomyConfig, LoopError, LoopMetadata, OptimError,
    System,
};

mod verify;

const EXIT_FAILURE: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

#[derive(Parser, Debug)]
#[command(
    name = "hqc",
    version,
    about = "Holonomies of polygonal loops and loop synthesis for one- and two-qubit gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the holonomy of a loop file and its unitarity defect.
    Evaluate(EvaluateArgs),
    /// Search for a loop whose holonomy is a target gate.
    Synthesize(SynthesizeArgs),
    /// Run the analytic oracle suite.
    Verify(VerifyArgs),
    /// Write the discretized coordinate trace of a loop as TSV.
    ExportPath(ExportArgs),
    /// List the named gates.
    Gates,
    /// Tabulate the objective on a plane through two minima.
    Landscape(LandscapeArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct Discretization {
    /// Sub-segments per edge.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
    steps: u32,
    /// Evaluation rule: midpoint or left.
    #[arg(long, default_value = "midpoint", value_parser = parse_rule)]
    rule: EvaluationRule,
}

impl Discretization {
    fn config(self) -> HolonomyConfig {
        HolonomyConfig {
            steps_per_edge: self.steps as usize,
            rule: self.rule,
        }
    }
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long = "loop")]
    loop_file: PathBuf,
    #[command(flatten)]
    disc: Discretization,
    /// Report the objective against this gate instead of the one named in the file.
    #[arg(long)]
    gate: Option<String>,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    gate: Option<String>,
    /// Target matrix file: one row per line, re/im pairs.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// one or two; inferred from the target when omitted.
    #[arg(long, value_parser = parse_system)]
    system: Option<System>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restart budget (default 100 for one qubit, 400 for two).
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long = "target-f", default_value_t = 1e-8)]
    target_f: f64,
    /// Nelder-Mead iteration cap per restart.
    #[arg(long)]
    iterations: Option<u64>,
    #[command(flatten)]
    disc: Discretization,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    disc: Discretization,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long = "loop")]
    loop_file: PathBuf,
    #[command(flatten)]
    disc: Discretization,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LandscapeArgs {
    #[arg(long)]
    gate: String,
    #[arg(long)]
    min1: PathBuf,
    #[arg(long)]
    min2: PathBuf,
    /// Points per axis; must be 1 more than a multiple of 4.
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
    steps: u32,
    #[arg(long)]
    out: PathBuf,
}

fn parse_rule(s: &str) -> Result<EvaluationRule, String> {
    EvaluationRule::from_name(s).ok_or_else(|| format!("unknown rule {s:?} (midpoint or left)"))
}

fn parse_system(s: &str) -> Result<System, String> {
    System::from_tag(s).ok_or_else(|| format!("unknown system {s:?} (one or two)"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => evaluate(a),
        Command::Synthesize(a) => synthesize_cmd(a),
        Command::Verify(a) => Ok(verify::run(a.disc.config())),
        Command::ExportPath(a) => export_path(a),
        Command::Gates => {
            print_gates();
            Ok(0)
        }
        Command::Landscape(a) => landscape(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|j| {
                let z = m[(i, j)];
                format!("{:+.11e}{:+.11e}i", z.re, z.im)
            })
            .collect();
        s.push_str(&row.join("  "));
        s.push('\n');
    }
    s
}

fn resolve_gate(name: &str, system: System) -> Result<GateMatrix, CliError> {
    let spec = GateSpec::parse(name, system)?;
    if spec.system() != system {
        return Err(CliError::Usage(format!(
            "gate {spec} acts on a {} system, not {system}",
            spec.system()
        )));
    }
    Ok(gate_matrix(&spec)?)
}

fn evaluate(a: EvaluateArgs) -> Result<u8, CliError> {
    let (l, meta) = load_loop(&a.loop_file)?;
    let cfg = a.disc.config();
    let u = holonomy(&l, &AnalyticConnection::new(l.system()), cfg)?;
    println!(
        "holonomy of {} ({} loop, k = {}, {} steps/edge, {} rule):",
        a.loop_file.display(),
        l.system(),
        l.k(),
        cfg.steps_per_edge,
        cfg.rule.name()
    );
    print!("{}", format_matrix(u.matrix()));
    println!("unitarity defect: {:.3e}", u.matrix().unitarity_defect());
    let gate = a
        .gate
        .or_else(|| meta.gate.clone().filter(|g| g != "custom"));
    if let Some(name) = gate {
        let target = resolve_gate(&name, l.system())?;
        let f = frob_dist(target.matrix(), u.matrix()).expect("same dimension");
        println!("objective against {name}: {f:.17e}");
        if let Some(stored) = meta.f_final {
            println!("stored f_final: {stored:.17e}");
        }
    }
    Ok(0)
}

fn synthesize_cmd(a: SynthesizeArgs) -> Result<u8, CliError> {
    let (target, name, system) = match (&a.gate, &a.matrix) {
        (Some(g), _) => {
            let system = match a.system {
                Some(s) => s,
                None => GateSpec::parse(g, System::OneQubit)?.system(),
            };
            (
                resolve_gate(g, system)?,
                GateSpec::parse(g, system)?.name(),
                system,
            )
        }
        (None, Some(path)) => {
            let m = load_matrix(path)?;
            let system = if m.dim() == 2 {
                System::OneQubit
            } else {
                System::TwoQubit
            };
            if a.system.is_some_and(|s| s != system) {
                return Err(CliError::Usage(format!(
                    "{} holds a {}x{} matrix, which does not fit --system {}",
                    path.display(),
                    m.dim(),
                    m.dim(),
                    a.system.unwrap()
                )));
            }
            (m, "custom".to_string(), system)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --gate or --matrix is required".into(),
            ))
        }
    };
    let mut cfg = SynthesisConfig::new(system, a.k);
    cfg.seed = a.seed;
    cfg.target_f = a.target_f;
    cfg.steps_per_edge = a.disc.steps as usize;
    cfg.rule = a.disc.rule;
    if let Some(r) = a.restarts {
        cfg.max_restarts = r;
    }
    if let Some(it) = a.iterations {
        cfg.max_iterations_per_start = it;
    }
    let r = synthesize(&target, &cfg)?;
    let meta = LoopMetadata {
        gate: Some(name.clone()),
        f_final: Some(r.f_final),
        f_refined: Some(r.f_refined),
        seed: Some(r.seed),
        steps_per_edge: Some(cfg.steps_per_edge),
        rule: Some(cfg.rule.name().to_string()),
        restarts_used: Some(r.restarts_used),
        iterations: Some(r.iterations),
    };
    save_loop(&r.best_loop, &meta, &a.out)?;
    println!("gate:          {name}");
    println!(
        "system:        {system}, k = {}, dimension {}",
        cfg.k,
        cfg.dimension()
    );
    println!("f_final:       {:.6e}", r.f_final);
    println!(
        "f_refined:     {:.6e} ({}x steps)",
        r.f_refined,
        hqc_core::optimizer::REFINEMENT_FACTOR
    );
    println!(
        "converged:     {} (target {:.1e})",
        r.converged, cfg.target_f
    );
    println!(
        "restarts used: {} of {} (best: #{})",
        r.restarts_used, cfg.max_restarts, r.best_restart
    );
    println!(
        "iterations:    {} ({} evaluations)",
        r.iterations, r.evaluations
    );
    println!("seed:          {}", r.seed);
    println!("wall time:     {:.2?}", r.wall_time);
    println!("loop written:  {} ({LOOP_FORMAT_VERSION})", a.out.display());
    Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn export_path(a: ExportArgs) -> Result<u8, CliError> {
    let (l, _) = load_loop(&a.loop_file)?;
    let cfg = a.disc.config();
    let path = l.discretize(cfg.steps_per_edge, cfg.rule);
    let tsv = path_to_tsv(l.system(), &path);
    write_atomic(&a.out, tsv.as_bytes())?;
    println!("{} rows written to {}", path.len(), a.out.display());
    Ok(0)
}

fn load_minimum(p: &Path) -> Result<(hqc_core::PolygonalLoop, LoopMetadata), CliError> {
    Ok(load_loop(p)?)
}

fn landscape(a: LandscapeArgs) -> Result<u8, CliError> {
    let (m1, meta1) = load_minimum(&a.min1)?;
    let (m2, meta2) = load_minimum(&a.min2)?;
    if m1.system() != m2.system() || m1.k() != m2.k() {
        return Err(CliError::Usage(format!(
            "minima differ in shape: {} k={} vs {} k={}",
            m1.system(),
            m1.k(),
            m2.system(),
            m2.k()
        )));
    }
    if m1.basepoint() != m2.basepoint() {
        return Err(CliError::Usage("minima have different basepoints".into()));
    }
    let target = resolve_gate(&a.gate, m1.system())?;
    let mut cfg = SynthesisConfig::new(m1.system(), m1.k());
    cfg.steps_per_edge = a.steps as usize;
    let section =
        landscape_between_minima(&target, &cfg, &m1.flatten(), &m2.flatten(), a.grid, a.seed)?;
    write_atomic(&a.out, section.to_tsv().as_bytes())?;
    let (i0, i1, j0) = ((a.grid - 1) / 4, 3 * (a.grid - 1) / 4, (a.grid - 1) / 2);
    println!(
        "{}x{} section written to {}",
        a.grid,
        a.grid,
        a.out.display()
    );
    for (label, i, meta) in [("min1", i0, &meta1), ("min2", i1, &meta2)] {
        let stored = meta
            .f_final
            .map(|f| format!(" (stored {f:.3e})"))
            .unwrap_or_default();
        println!("f at {label}: {:.3e}{stored}", section.values[i][j0]);
    }
    Ok(0)
}

fn print_gates() {
    let rows: [(&str, &str, &str, &str); 12] = [
        ("identity", "one|two", "I", "empty loop"),
        (
            "hadamard",
            "one",
            "(σx + σz)/√2",
            "σy(π/4) then σz(π/2), phase-corrected",
        ),
        ("pi8", "one", "diag(1, e^{iπ/8})", "(θ2, φ2) rectangle"),
        (
            "phase(δ)",
            "one",
            "e^{iδ} I",
            "(θ2, φ2) and (θ1, φ1) rectangles",
        ),
        ("sigma-y(β)", "one", "exp(iβσy)", "(θ1, θ2) rectangle"),
        ("sigma-z(α)", "one", "exp(iασz)", "(θ1, θ2, φ1) loop"),
        (
            "su2(δ, a, b, c)",
            "one",
            "e^{iδ} exp(iaσz) exp(ibσy) exp(icσz)",
            "synthesis only",
        ),
        ("cnot", "two", "control a, target b", "synthesis only"),
        ("swap", "two", "|ab⟩ → |ba⟩", "synthesis only"),
        (
            "controlled-phase(Θ)",
            "two",
            "exp(iΘ|11⟩⟨11|)",
            "(θ2a, ξ) rectangle",
        ),
        ("qft2", "two", "F[j,k] = i^{jk}/2", "synthesis only"),
        (
            "--matrix FILE",
            "one|two",
            "any unitary (2x2 or 4x4)",
            "synthesis only",
        ),
    ];
    println!("{:<22} {:<8} {:<40} loop", "gate", "system", "matrix");
    for (name, sys, m, l) in rows {
        println!("{name:<22} {sys:<8} {m:<40} {l}");
    }
    println!("\nAngles are in radians and accept pi multiples, e.g. su2(1, pi/7, 1/3, 1).");
}
