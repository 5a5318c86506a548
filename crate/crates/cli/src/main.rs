//! `hlma`: eddy-current levitation and electrostatic pull-in simulation
//! for hybrid levitation micro-actuators.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hlma_cli::commands::{self, ModelChoice};
use hlma_cli::{CommandOutcome, RunOptions};
use hlma_core::geometry::MeshRule;

#[derive(Parser)]
#[command(
    name = "hlma",
    version,
    about = "Eddy-current levitation and electrostatic pull-in simulation for hybrid levitation micro-actuators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the disc mesh and export element centers.
    Mesh {
        #[command(flatten)]
        common: Common,
    },
    /// Solve the induced eddy currents at rest and export current maps.
    Eddy {
        #[command(flatten)]
        common: Common,
    },
    /// Trace equilibrium curves and extract pull-in parameters.
    Pullin {
        #[command(flatten)]
        common: Common,
        /// Which model(s) to run.
        #[arg(long, value_enum, default_value_t = ModelArg::All)]
        model: ModelArg,
        /// Number of curve samples (>= 5).
        #[arg(long, default_value_t = commands::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Export the coil field map and the gradient of |B|^2.
    Field {
        #[command(flatten)]
        common: Common,
    },
    /// Compare the models against the embedded measurement dataset.
    Validate {
        #[command(flatten)]
        opts: OutputArgs,
        /// Also run the mesh-refinement check (grid 51 vs 71).
        #[arg(long)]
        convergence: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario description (JSON).
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the mesh resolution.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Override the element selection rule.
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
    /// Reduced fidelity (grid 31) for quick runs; validation tolerances
    /// widen accordingly.
    #[arg(long)]
    fast: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    #[value(name = "center-inside")]
    CenterInside,
    #[value(name = "fully-inside")]
    FullyInside,
}

impl From<RuleArg> for MeshRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::CenterInside => MeshRule::CenterInside,
            RuleArg::FullyInside => MeshRule::FullyInside,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "quasi-fem")]
    QuasiFem,
    Analytical,
    Simplified,
    All,
}

impl From<ModelArg> for ModelChoice {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::QuasiFem => ModelChoice::QuasiFem,
            ModelArg::Analytical => ModelChoice::Analytical,
            ModelArg::Simplified => ModelChoice::Simplified,
            ModelArg::All => ModelChoice::All,
        }
    }
}

impl OutputArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            out_dir: self.out.clone(),
            grid_n: self.grid_n,
            rule: self.rule.map(Into::into),
            fast: self.fast,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<CommandOutcome> {
    match cli.cmd {
        Cmd::Mesh { common } => {
            let scenario = commands::load_scenario(&common.scenario)?;
            commands::cmd_mesh(&scenario, &common.output.options())
        }
        Cmd::Eddy { common } => {
            let scenario = commands::load_scenario(&common.scenario)?;
            commands::cmd_eddy(&scenario, &common.output.options())
        }
        Cmd::Pullin {
            common,
            model,
            samples,
        } => {
            let scenario = commands::load_scenario(&common.scenario)?;
            commands::cmd_pullin(&scenario, &common.output.options(), model.into(), samples)
        }
        Cmd::Field { common } => {
            let scenario = commands::load_scenario(&common.scenario)?;
            commands::cmd_field(&scenario, &common.output.options())
        }
        Cmd::Validate { opts, convergence } => {
            commands::cmd_validate(&opts.options(), convergence)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems are input errors (exit 3); --help and
            // --version print normally.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(CommandOutcome::Success) => ExitCode::SUCCESS,
        Ok(CommandOutcome::ValidationFailed) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            let is_input = err
                .downcast_ref::<hlma_core::Error>()
                .map(|e| matches!(e, hlma_core::Error::Input(_) | hlma_core::Error::Geometry(_)))
                .unwrap_or(false)
                || err.downcast_ref::<std::io::Error>().is_some();
            if is_input {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
