use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shellhier::report::emit_report;
use shellhier::study::{run_config, Command, Overrides, StudyConfig};

#[derive(Parser)]
#[command(name = "shellhier", version, about = "Thin-shell energy scaling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Group,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON study configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid nodes per direction.
    #[arg(long)]
    grid: Option<usize>,
    /// Gauss points per cell and direction.
    #[arg(long)]
    quad: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the resolved configuration and summary as JSON.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Group {
    Surface {
        #[command(subcommand)]
        action: Show,
    },
    Material {
        #[command(subcommand)]
        action: Check,
    },
    Energy {
        #[command(subcommand)]
        action: Eval,
    },
    Isometry {
        #[command(subcommand)]
        action: Solve,
    },
    /// Hierarchy order for an energy exponent beta, or a force exponent alpha.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    Match {
        #[command(subcommand)]
        action: Run,
    },
    Scaling {
        #[command(subcommand)]
        action: Run,
    },
    Equipartition {
        #[command(subcommand)]
        action: Run,
    },
}

#[derive(Subcommand)]
enum Show {
    Show(Common),
}
#[derive(Subcommand)]
enum Check {
    Check(Common),
}
#[derive(Subcommand)]
enum Eval {
    Eval(Common),
}
#[derive(Subcommand)]
enum Solve {
    Solve(Common),
}
#[derive(Subcommand)]
enum Run {
    Run(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, common, beta, alpha) = match cli.command {
        Group::Surface { action: Show::Show(c) } => (Command::SurfaceShow, c, None, None),
        Group::Material { action: Check::Check(c) } => (Command::MaterialCheck, c, None, None),
        Group::Energy { action: Eval::Eval(c) } => (Command::EnergyEval, c, None, None),
        Group::Isometry { action: Solve::Solve(c) } => (Command::IsometrySolve, c, None, None),
        Group::Classify { beta, alpha, common } => (Command::Classify, common, beta, alpha),
        Group::Match { action: Run::Run(c) } => (Command::MatchRun, c, None, None),
        Group::Scaling { action: Run::Run(c) } => (Command::ScalingRun, c, None, None),
        Group::Equipartition { action: Run::Run(c) } => (Command::EquipartitionRun, c, None, None),
    };
    ExitCode::from(execute(command, common, beta, alpha))
}

fn execute(command: Command, c: Common, beta: Option<String>, alpha: Option<String>) -> u8 {
    let config = match &c.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match StudyConfig::from_json(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return 1;
                }
            },
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return 1;
            }
        },
        None if command == Command::Classify => StudyConfig::default(),
        None => {
            eprintln!("`shellhier {}` needs --config <path>", command.words());
            return 1;
        }
    };
    let overrides = Overrides { grid: c.grid, quad: c.quad, seed: c.seed, out: c.out.clone(), beta, alpha };
    let config = config.resolve(&overrides);
    if c.verbose {
        match serde_json::to_string_pretty(&config) {
            Ok(s) => eprintln!("{s}"),
            Err(e) => eprintln!("{e}"),
        }
    }
    let out = run_config(command, &config);
    if out.failure.is_some() {
        eprintln!("{}", out.summary);
    } else {
        println!("{}", out.summary);
    }

    // classify without a config or --out is a pure query
    let dir = config.output.dir.clone().or_else(|| c.config.is_some().then(|| PathBuf::from("shellhier-out")));
    if let Some(dir) = dir {
        match emit_report(&out, &dir) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("cannot write report: {e}");
                return 1;
            }
        }
    }
    match &out.failure {
        None => 0,
        Some(e) if e.is_solver_failure() => 2,
        Some(_) => 1,
    }
}
