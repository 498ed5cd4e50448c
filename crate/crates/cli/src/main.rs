//! `ramify`: build near-optimal transport-network plans, sweep scaling laws,
//! render networks to SVG, run verification suites, and evaluate the
//! lower-bound certificates.
//!
//! Exit codes: 0 success, 1 verification failure, 2 admissibility or usage
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ramify_core::bounds::{
    convex_program_dual, dual_gap_scan, sample_feasible_grid, w1_atom_lower_bound,
    AtomBoundInstance, ConvexProgramInstance,
};
use ramify_core::render::render_network;
use ramify_core::sweep::{rows_to_csv, run_sweep, run_sweep_serial, EpsGrid, SweepConfig};
use ramify_core::verify;
use ramify_core::{excess_energy, instantiate, plan, ModelParams, Regime, DEFAULT_CELL_BUDGET};

#[derive(Parser)]
#[command(
    name = "ramify",
    version,
    about = "Hierarchical transport-network laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction schedule and dump it as JSON.
    Plan(PlanArgs),
    /// Sweep an epsilon grid, emit CSV rows and scaling-law fits.
    Sweep(SweepArgs),
    /// Instantiate a plan and render the network as SVG.
    Render(RenderArgs),
    /// Run verification suites and emit a JSON verdict.
    Verify(VerifyArgs),
    /// Evaluate lower-bound certificates.
    Bound(BoundArgs),
}

#[derive(Args)]
struct ModelFlags {
    /// Transport model: up (urban planning) or bt (branched transport).
    #[arg(long)]
    model: String,
    /// Ambient dimension (>= 2).
    #[arg(long)]
    n: usize,
    /// Off-network cost a > 1 (urban planning only).
    #[arg(long)]
    a: Option<f64>,
    /// Side length of the boundary hyperfaces.
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    /// Uniform boundary density.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Force a construction regime instead of auto-selection.
    #[arg(long)]
    regime: Option<String>,
}

impl ModelFlags {
    fn params(&self, eps: f64) -> Result<ModelParams, String> {
        match self.model.as_str() {
            "up" => {
                let a = self.a.ok_or("--model up requires --a")?;
                ModelParams::new(
                    ramify_core::Model::UrbanPlanning { a },
                    eps,
                    self.n,
                    self.ell,
                    self.density,
                )
                .map_err(|e| e.to_string())
            }
            "bt" => {
                if self.a.is_some() {
                    eprintln!("warning: --a is ignored for the branched transport model");
                }
                ModelParams::new(
                    ramify_core::Model::BranchedTransport,
                    eps,
                    self.n,
                    self.ell,
                    self.density,
                )
                .map_err(|e| e.to_string())
            }
            other => Err(format!("unknown model '{other}', expected up or bt")),
        }
    }

    fn regime(&self) -> Result<Option<Regime>, String> {
        match &self.regime {
            None => Ok(None),
            Some(s) => Regime::parse(s)
                .map(Some)
                .ok_or_else(|| format!("unknown regime '{s}'")),
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// Ramification parameter.
    #[arg(long)]
    eps: f64,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the analytic energy report in the dump.
    #[arg(long, default_value_t = false)]
    energy: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Transport model: up or bt.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Geometric epsilon grid as start:stop:points, e.g. 1e-3:1e-7:17.
    #[arg(long, value_name = "START:STOP:POINTS")]
    eps_grid: Option<String>,
    /// Off-network cost values (repeatable; urban planning only).
    #[arg(long)]
    a: Vec<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with a sweep configuration; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fit JSON destination (stdout after the CSV when --out is set, stderr
    /// otherwise).
    #[arg(long)]
    fit_out: Option<PathBuf>,
    /// Output format for --out: csv (default) or json (full outcome).
    #[arg(long, default_value = "csv")]
    format: String,
    /// Evaluate points serially instead of in parallel.
    #[arg(long, default_value_t = false)]
    serial: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    eps: f64,
    /// In-plane tail layers to instantiate beyond the schedule (branched
    /// transport only).
    #[arg(long, default_value_t = 0)]
    max_layers: u32,
    /// Cell budget for instantiation.
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    budget: u64,
    /// SVG destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run: cells, dualpath, scaling, duality, w1, conservation,
    /// oracle, or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Write the JSON verdict here as well as stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(subcommand)]
    which: BoundCommand,
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Wasserstein atom lower bound.
    W1 {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Density cap of the absolutely continuous side.
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// Total atom mass.
        #[arg(long)]
        mass: f64,
        /// Number of atoms.
        #[arg(long, default_value_t = 1)]
        atoms: usize,
        /// Separation between the two supporting planes.
        #[arg(long)]
        sep: f64,
    },
    /// Closed-form dual of the entropy-constrained convex program.
    Dual {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        entropy: f64,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Scan random feasible primal measures against the dual bound.
    Gap {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        entropy: f64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        atoms_per: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_plan(args: &PlanArgs) -> Result<(), String> {
    let params = args.model.params(args.eps)?;
    let regime = args.model.regime()?;
    let plan = plan(&params, regime).map_err(|e| e.to_string())?;
    let json = if args.energy {
        let report = excess_energy(&plan);
        serde_json::json!({ "plan": plan, "energy": report })
    } else {
        serde_json::to_value(&plan).expect("plan serialises")
    };
    let mut text = serde_json::to_string_pretty(&json).expect("plan serialises");
    text.push('\n');
    write_or_print(&args.out, &text)
}

fn parse_grid(spec: &str) -> Result<EpsGrid, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("bad grid '{spec}', expected start:stop:points"));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad grid start '{}'", parts[0]))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad grid stop '{}'", parts[1]))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad grid points '{}'", parts[2]))?;
    EpsGrid::new(start, stop, points).map_err(|e| e.to_string())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), String> {
    let mut cfg: SweepConfig = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => SweepConfig {
            model: String::new(),
            n: 0,
            ell: 1.0,
            a: Vec::new(),
            grid: EpsGrid {
                start: 0.0,
                stop: 0.0,
                points: 0,
            },
            regime: None,
            seed: 0,
        },
    };
    // flags win over the config file
    if let Some(model) = &args.model {
        cfg.model = model.clone();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(grid) = &args.eps_grid {
        cfg.grid = parse_grid(grid)?;
    }
    if !args.a.is_empty() {
        cfg.a = args.a.clone();
    }
    if let Some(ell) = args.ell {
        cfg.ell = ell;
    }
    if let Some(regime) = &args.regime {
        cfg.regime =
            Some(Regime::parse(regime).ok_or_else(|| format!("unknown regime '{regime}'"))?);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.model.is_empty() || cfg.n == 0 || cfg.grid.points == 0 {
        return Err("sweep needs --model, --n and --eps-grid (or a --config file)".into());
    }
    if cfg.model == "bt" && !cfg.a.is_empty() {
        eprintln!("warning: --a is ignored for the branched transport model");
        cfg.a.clear();
    }

    let outcome = if args.serial {
        run_sweep_serial(&cfg)
    } else {
        run_sweep(&cfg)
    }
    .map_err(|e| e.to_string())?;
    for s in &outcome.skipped {
        eprintln!("skipped eps={:e} a={}: {}", s.eps, s.a, s.reason);
    }

    match args.format.as_str() {
        "csv" => {
            let csv = rows_to_csv(&outcome.rows);
            write_or_print(&args.out, &csv)?;
            let fits = serde_json::json!({
                "log_convention": outcome.log_convention,
                "fits": outcome.fits,
            });
            let mut text = serde_json::to_string_pretty(&fits).expect("fits serialise");
            text.push('\n');
            match (&args.fit_out, &args.out) {
                (Some(path), _) => write_or_print(&Some(path.clone()), &text)?,
                (None, Some(_)) => print!("{text}"),
                (None, None) => eprint!("{text}"),
            }
        }
        "json" => {
            let mut text = serde_json::to_string_pretty(&outcome).expect("outcome serialises");
            text.push('\n');
            write_or_print(&args.out, &text)?;
        }
        other => return Err(format!("unknown format '{other}', expected csv or json")),
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<(), String> {
    let params = args.model.params(args.eps)?;
    let regime = args.model.regime()?;
    let plan = plan(&params, regime).map_err(|e| e.to_string())?;
    let inst = instantiate(&plan, args.max_layers, args.budget).map_err(|e| e.to_string())?;
    let mut notes = vec![format!(
        "model {} n={} eps={:e} regime={} K={}",
        params.model.tag(),
        params.n,
        params.epsilon,
        plan.regime.tag(),
        plan.k
    )];
    if inst.truncated_tail > 0.0 {
        notes.push(format!(
            "tail truncated after {} in-plane layers; untruncated remainder energy {:e}",
            args.max_layers, inst.truncated_tail
        ));
    }
    let svg = render_network(&inst.network, params.ell, &notes).map_err(|e| e.to_string())?;
    std::fs::write(&args.out, svg).map_err(|e| format!("{}: {e}", args.out.display()))?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, String> {
    let reports = verify::run_suite(&args.suite).ok_or_else(|| {
        format!(
            "unknown suite '{}', expected one of {:?}",
            args.suite,
            verify::suite_names()
        )
    })?;
    let passed = reports.iter().all(|r| r.passed);
    for report in &reports {
        for check in &report.checks {
            eprintln!(
                "[{}] {} / {}: {}",
                if check.passed { "PASS" } else { "FAIL" },
                report.suite,
                check.name,
                check.detail
            );
        }
    }
    let verdict = serde_json::json!({ "passed": passed, "suites": reports });
    let mut text = serde_json::to_string_pretty(&verdict).expect("verdict serialises");
    text.push('\n');
    print!("{text}");
    if let Some(path) = &args.out {
        std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(passed)
}

fn cmd_bound(args: &BoundArgs) -> Result<(), String> {
    let json = match &args.which {
        BoundCommand::W1 {
            n,
            density,
            mass,
            atoms,
            sep,
        } => {
            let inst = AtomBoundInstance::new(*density, *mass, *atoms, *sep, *n)
                .map_err(|e| e.to_string())?;
            let bound = w1_atom_lower_bound(&inst);
            serde_json::json!({ "instance": inst, "bound": bound })
        }
        BoundCommand::Dual { mass, entropy, n } => {
            let inst =
                ConvexProgramInstance::new(*mass, *entropy, *n, None).map_err(|e| e.to_string())?;
            let dual = convex_program_dual(&inst);
            serde_json::json!({ "instance": inst, "dual": dual })
        }
        BoundCommand::Gap {
            mass,
            entropy,
            n,
            samples,
            atoms_per,
            seed,
        } => {
            let grid = sample_feasible_grid(*mass, *entropy, *samples, *atoms_per, *seed);
            let report = dual_gap_scan(*mass, *entropy, *n, &grid).map_err(|e| e.to_string())?;
            let note = if report.evaluated == 0 {
                Some("no samples")
            } else {
                None
            };
            serde_json::json!({ "report": report, "note": note })
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json).expect("bound serialises")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Render(args) => cmd_render(args),
        Command::Verify(args) => {
            return match cmd_verify(args) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
            };
        }
        Command::Bound(args) => cmd_bound(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
