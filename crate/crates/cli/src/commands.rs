//! The five subcommands: mesh, eddy, pullin, field, validate.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use hlma_core::eddy::{self, EddySystem, ImpedanceMode};
use hlma_core::geometry::Pose;
use hlma_core::levforce::loop_field;
use hlma_core::pullin::{
    dimensionalize, pullin_of, ActuatorScenario, AnalyticalModel, ModelTag, PullInModel,
    QuasiFemModel, SimplifiedModel,
};

use crate::dataset;
use crate::report::{ConvergenceReport, ModelComparison, ScenarioReport, ValidationReport};
use crate::{CommandOutcome, RunOptions, TOOL_VERSION};

/// Default number of curve samples; matches the equilibrium-curve
/// resolution the reference results were produced with.
pub const DEFAULT_SAMPLES: usize = 15;

/// Quasi-FEM validation tolerance at full fidelity (grid >= 51).
pub const QUASIFEM_TOLERANCE: f64 = 0.10;
/// Quasi-FEM validation tolerance at reduced fidelity (--fast). The
/// coarse mesh underestimates the force sum slightly, so the gate widens.
pub const QUASIFEM_TOLERANCE_FAST: f64 = 0.15;
/// Analytical-model tolerance (mesh independent).
pub const ANALYTICAL_TOLERANCE: f64 = 0.05;
/// Allowed sqrt(beta_p) change between grid 51 and 71.
pub const CONVERGENCE_TOLERANCE: f64 = 0.015;

/// Metadata block embedded in every command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool_version: String,
    pub scenario_hash: String,
    pub grid_n: usize,
    pub rule: String,
    pub sign_convention: String,
    pub impedance_mode: String,
}

impl Metadata {
    fn new(scenario: &ActuatorScenario, grid_n: usize, rule: hlma_core::geometry::MeshRule) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            scenario_hash: scenario.fingerprint(),
            grid_n,
            rule: rule.to_string(),
            sign_convention: EddySystem::SIGN_CONVENTION.to_string(),
            impedance_mode: ImpedanceMode::Ideal.label(),
        }
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<ActuatorScenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    Ok(ActuatorScenario::from_json(&text)?)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(dir, name, &text)
}

/// Mesh export: element index, body-frame center, grid cell.
pub fn cmd_mesh(scenario: &ActuatorScenario, opts: &RunOptions) -> Result<CommandOutcome> {
    let grid_n = opts.effective_grid_n(scenario.mesh.grid_n);
    let rule = opts.effective_rule(scenario.mesh.rule);
    let mesh = scenario.build_mesh_with(grid_n, rule)?;

    let mut csv = String::from("s,x1_m,x2_m,row,col\n");
    for (s, (&[x1, x2], &(row, col))) in
        mesh.elements.iter().zip(mesh.grid_index.iter()).enumerate()
    {
        writeln!(csv, "{s},{x1:.9e},{x2:.9e},{row},{col}").unwrap();
    }
    write_out(&opts.out_dir, "mesh.csv", &csv)?;
    write_json(&opts.out_dir, "mesh_meta.json", &Metadata::new(scenario, grid_n, rule))?;

    println!(
        "mesh: n = {} elements, R_e = {:.6e} m, epsilon = {:.4}",
        mesh.len(),
        mesh.r_e,
        mesh.epsilon()
    );
    if mesh.ring_geometry()?.exceeds_recommended_epsilon() {
        println!(
            "warning: epsilon = {:.4} exceeds the recommended 0.1; the ring self-inductance formula degrades",
            mesh.epsilon()
        );
    }
    Ok(CommandOutcome::Success)
}

/// Eddy-current solve at the rest pose; exports the per-element current
/// grid and the gradient-magnitude (surface current density) map.
pub fn cmd_eddy(scenario: &ActuatorScenario, opts: &RunOptions) -> Result<CommandOutcome> {
    let grid_n = opts.effective_grid_n(scenario.mesh.grid_n);
    let rule = opts.effective_rule(scenario.mesh.rule);
    let mesh = scenario.build_mesh_with(grid_n, rule)?;
    let coils = scenario.build_coils()?;
    let pose = Pose::level(scenario.levitation.height_m);

    let sys = EddySystem::assemble(&mesh, &coils, &pose, ImpedanceMode::Ideal)?;
    let sol = sys.solve(&coils.currents())?;
    let (grid, magnitude) = eddy::current_maps(&sol, &mesh);

    let grid_csv = |map: &eddy::GridMap| -> String {
        let mut csv = String::from("row,col,value\n");
        for row in 0..map.grid_n {
            for col in 0..map.grid_n {
                if let Some(v) = map.get(row, col) {
                    writeln!(csv, "{row},{col},{v:.12e}").unwrap();
                }
            }
        }
        csv
    };
    write_out(&opts.out_dir, "eddy_grid.csv", &grid_csv(&grid))?;
    write_out(&opts.out_dir, "eddy_magnitude.csv", &grid_csv(&magnitude))?;

    #[derive(Serialize)]
    struct EddyMeta {
        #[serde(flatten)]
        meta: Metadata,
        n: usize,
        residual: f64,
    }
    write_json(
        &opts.out_dir,
        "eddy_meta.json",
        &EddyMeta {
            meta: Metadata::new(scenario, grid_n, rule),
            n: mesh.len(),
            residual: sol.residual,
        },
    )?;

    println!(
        "eddy: n = {}, residual = {:.3e}, currents in [{:.4e}, {:.4e}]",
        mesh.len(),
        sol.residual,
        sol.currents.iter().cloned().fold(f64::INFINITY, f64::min),
        sol.currents.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(CommandOutcome::Success)
}

/// Which pull-in models to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    QuasiFem,
    Analytical,
    Simplified,
    All,
}

impl ModelChoice {
    fn tags(&self) -> Vec<ModelTag> {
        match self {
            ModelChoice::QuasiFem => vec![ModelTag::QuasiFem],
            ModelChoice::Analytical => vec![ModelTag::Analytical],
            ModelChoice::Simplified => vec![ModelTag::Simplified],
            ModelChoice::All => vec![ModelTag::QuasiFem, ModelTag::Analytical, ModelTag::Simplified],
        }
    }
}

#[derive(Serialize)]
struct PullInJson {
    model: String,
    lambda_p: f64,
    beta_p: f64,
    sqrt_beta_p: f64,
    #[serde(rename = "U_p_V")]
    u_p_v: f64,
    q_p_m: f64,
    /// Calibration constant; null for the simplified model.
    eta0: Option<f64>,
    runtime_s: f64,
    #[serde(flatten)]
    meta: Metadata,
}

/// Trace the equilibrium curve(s), extract the pull-in point(s), and
/// export curve CSV plus result JSON per model.
pub fn cmd_pullin(
    scenario: &ActuatorScenario,
    opts: &RunOptions,
    choice: ModelChoice,
    samples: usize,
) -> Result<CommandOutcome> {
    let grid_n = opts.effective_grid_n(scenario.mesh.grid_n);
    let rule = opts.effective_rule(scenario.mesh.rule);
    for tag in choice.tags() {
        let started = Instant::now();
        let model: Box<dyn PullInModel> = match tag {
            ModelTag::QuasiFem => {
                Box::new(QuasiFemModel::with_fidelity(scenario, grid_n, rule, None)?)
            }
            ModelTag::Analytical => Box::new(AnalyticalModel::new(scenario.xi(), scenario.kappa())?),
            ModelTag::Simplified => Box::new(SimplifiedModel::new(scenario.xi(), scenario.kappa())?),
        };
        let (curve, result) = pullin_of(model.as_ref(), samples)?;
        let dim = dimensionalize(&result, scenario);
        let runtime_s = started.elapsed().as_secs_f64();

        let u_norm = scenario.voltage_scale();
        let h = scenario.electrodes.spacing_h_m;
        let mut csv = String::from("lambda_abs,beta,sqrt_beta,U_volts,q3_m\n");
        for &(lambda, beta) in &curve.samples {
            let sqrt_beta = beta.max(0.0).sqrt();
            writeln!(
                csv,
                "{:.12e},{beta:.12e},{sqrt_beta:.12e},{:.12e},{:.12e}",
                lambda.abs(),
                u_norm * sqrt_beta,
                lambda * h
            )
            .unwrap();
        }
        write_out(&opts.out_dir, &format!("{tag}_curve.csv"), &csv)?;
        write_json(
            &opts.out_dir,
            &format!("{tag}_result.json"),
            &PullInJson {
                model: tag.to_string(),
                lambda_p: result.lambda_p,
                beta_p: result.beta_p,
                sqrt_beta_p: result.sqrt_beta_p,
                u_p_v: dim.u_p_volts,
                q_p_m: dim.q_p_m,
                eta0: result.eta0,
                runtime_s,
                meta: Metadata::new(scenario, grid_n, rule),
            },
        )?;
        if !curve.skipped.is_empty() {
            println!(
                "{tag}: skipped {} curve samples ({})",
                curve.skipped.len(),
                curve.skipped[0].1
            );
        }
        println!(
            "{tag}: |lambda_p| = {:.4}, sqrt(beta_p) = {:.5}, U_p = {:.2} V, q_p = {:.2} um ({runtime_s:.1} s)",
            result.lambda_p,
            result.sqrt_beta_p,
            dim.u_p_volts,
            dim.q_p_m * 1e6
        );
    }
    Ok(CommandOutcome::Success)
}

/// Field map of the coil set on an (r, z) grid around the levitation
/// region, with the gradient of |B|^2.
pub fn cmd_field(scenario: &ActuatorScenario, opts: &RunOptions) -> Result<CommandOutcome> {
    let coils = scenario.build_coils()?;
    let h_l = scenario.levitation.height_m;
    let r_max = coils
        .filaments
        .iter()
        .map(|f| f.radius)
        .fold(scenario.disc.radius_m, f64::max)
        * 1.25;
    let nr = 49;
    let nz = 25;
    let rs: Vec<f64> = (0..nr).map(|i| r_max * i as f64 / (nr - 1) as f64).collect();
    let zs: Vec<f64> = (0..nz)
        .map(|i| h_l * (0.2 + 1.6 * i as f64 / (nz - 1) as f64))
        .collect();
    let samples = loop_field(&coils, &rs, &zs)?;

    let mut csv = String::from("r_m,z_m,B_r,B_z,gradmag_r,gradmag_z\n");
    for s in &samples {
        writeln!(
            csv,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            s.r_m, s.z_m, s.b_r, s.b_z, s.grad_b2_r, s.grad_b2_z
        )
        .unwrap();
    }
    write_out(&opts.out_dir, "field.csv", &csv)?;
    write_json(
        &opts.out_dir,
        "field_meta.json",
        &Metadata::new(scenario, scenario.mesh.grid_n, scenario.mesh.rule),
    )?;
    println!("field: {} samples on {nr} x {nz} grid", samples.len());
    Ok(CommandOutcome::Success)
}

/// Run the quasi-FEM and analytical models over the embedded experiment
/// dataset and compare against the reference predictions. Nonzero exit
/// when any tolerance is violated.
pub fn cmd_validate(opts: &RunOptions, convergence: bool) -> Result<CommandOutcome> {
    let grid_n = if opts.fast {
        31
    } else {
        opts.grid_n.unwrap_or(71)
    };
    let rule = opts.rule.unwrap_or(hlma_core::geometry::MeshRule::CenterInside);
    let qf_tol = if grid_n >= 51 {
        QUASIFEM_TOLERANCE
    } else {
        QUASIFEM_TOLERANCE_FAST
    };

    let records = dataset::records();
    // All validation scenarios share the lattice pattern and epsilon, so
    // the element matrix is factorized once and reused.
    let mut shared_core: Option<std::sync::Arc<hlma_core::eddy::ElementCore>> = None;

    let mut scenarios = Vec::new();
    let mut all_ok = true;
    for rec in &records {
        let scenario = rec.scenario(grid_n, rule);
        let qf = QuasiFemModel::with_fidelity(&scenario, grid_n, rule, shared_core.as_ref())?;
        shared_core.get_or_insert_with(|| qf.core().clone());
        let (_, qf_result) = pullin_of(&qf, DEFAULT_SAMPLES)?;
        let qf_dim = dimensionalize(&qf_result, &scenario);

        let an = AnalyticalModel::new(scenario.xi(), scenario.kappa())?;
        let (_, an_result) = pullin_of(&an, DEFAULT_SAMPLES)?;
        let an_dim = dimensionalize(&an_result, &scenario);

        let quasifem = ModelComparison::new(
            qf_dim.q_p_m,
            rec.quasifem_displacement_m,
            qf_dim.u_p_volts,
            rec.quasifem_voltage_v,
            qf_tol,
        );
        let analytical = ModelComparison::new(
            an_dim.q_p_m,
            rec.analytical_displacement_m,
            an_dim.u_p_volts,
            rec.analytical_voltage_v,
            ANALYTICAL_TOLERANCE,
        );
        all_ok &= quasifem.within_tolerance && analytical.within_tolerance;
        scenarios.push(ScenarioReport {
            label: rec.label.to_string(),
            xi: rec.xi(),
            kappa: rec.kappa(),
            measured_displacement_um: rec.measured_displacement_m * 1e6,
            measured_voltage_v: rec.measured_voltage_v,
            quasifem,
            analytical,
        });
    }

    let convergence_report = if convergence {
        // Mesh-refinement check on the 2.8 mm reference scenario,
        // always at grid 51 vs 71 regardless of --fast.
        let rec = &records[1];
        let mut sqrt_betas = [0.0; 2];
        let grids = [51usize, 71];
        for (slot, &g) in sqrt_betas.iter_mut().zip(&grids) {
            let scenario = rec.scenario(g, rule);
            let qf = QuasiFemModel::with_fidelity(&scenario, g, rule, None)?;
            let (_, result) = pullin_of(&qf, DEFAULT_SAMPLES)?;
            *slot = result.sqrt_beta_p;
        }
        let change = (sqrt_betas[1] - sqrt_betas[0]) / sqrt_betas[1];
        let ok = change.abs() <= CONVERGENCE_TOLERANCE;
        all_ok &= ok;
        Some(ConvergenceReport {
            label: rec.label.to_string(),
            grid_coarse: grids[0],
            grid_fine: grids[1],
            sqrt_beta_coarse: sqrt_betas[0],
            sqrt_beta_fine: sqrt_betas[1],
            relative_change: change,
            tolerance: CONVERGENCE_TOLERANCE,
            within_tolerance: ok,
        })
    } else {
        None
    };

    let report = ValidationReport {
        tool_version: TOOL_VERSION.to_string(),
        grid_n,
        rule: rule.to_string(),
        sign_convention: EddySystem::SIGN_CONVENTION.to_string(),
        quasifem_tolerance: qf_tol,
        analytical_tolerance: ANALYTICAL_TOLERANCE,
        scenarios,
        convergence: convergence_report,
        all_within_tolerance: all_ok,
    };
    write_json(&opts.out_dir, "validation_report.json", &report)?;
    print!("{}", report.render_text());

    Ok(if all_ok {
        CommandOutcome::Success
    } else {
        CommandOutcome::ValidationFailed
    })
}
