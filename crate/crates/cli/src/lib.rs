//! Command implementations behind the `hlma` binary: scenario-driven
//! meshing, eddy-current maps, field maps, pull-in curves, and the
//! validation report against the embedded measurement dataset.
//!
//! Commands return [`CommandOutcome`] so the binary can map validation
//! failures and input errors onto distinct exit codes. All file outputs
//! use fixed float formatting and fixed iteration order; apart from the
//! `runtime_s` field of result JSON they are byte-identical across runs.

pub mod commands;
pub mod dataset;
pub mod report;

use std::path::PathBuf;

use hlma_core::geometry::MeshRule;

/// Tool version recorded in every output's metadata.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandOutcome {
    Success,
    /// A validation tolerance was violated (exit code 2).
    ValidationFailed,
}

/// Common options shared by the scenario-driven commands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Output directory for CSV/JSON artifacts.
    pub out_dir: PathBuf,
    /// Override the scenario's grid resolution.
    pub grid_n: Option<usize>,
    /// Override the scenario's mesh rule.
    pub rule: Option<MeshRule>,
    /// Fast mode: force grid_n = 31 (tolerances widen accordingly).
    pub fast: bool,
}

impl RunOptions {
    pub fn effective_grid_n(&self, scenario_grid: usize) -> usize {
        if self.fast {
            31
        } else {
            self.grid_n.unwrap_or(scenario_grid)
        }
    }

    pub fn effective_rule(&self, scenario_rule: MeshRule) -> MeshRule {
        self.rule.unwrap_or(scenario_rule)
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            grid_n: None,
            rule: None,
            fast: false,
        }
    }
}
