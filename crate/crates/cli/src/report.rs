//! Validation report structures and rendering.

use serde::Serialize;

/// Comparison of one model against its reference prediction.
#[derive(Debug, Clone, Serialize)]
pub struct ModelComparison {
    /// Pull-in displacement (um).
    pub displacement_um: f64,
    pub reference_displacement_um: f64,
    pub displacement_deviation: f64,
    /// Pull-in voltage (V).
    pub voltage_v: f64,
    pub reference_voltage_v: f64,
    pub voltage_deviation: f64,
    /// Tolerance both deviations are held to.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

impl ModelComparison {
    pub fn new(
        displacement_m: f64,
        reference_displacement_m: f64,
        voltage_v: f64,
        reference_voltage_v: f64,
        tolerance: f64,
    ) -> Self {
        let displacement_um = displacement_m * 1e6;
        let reference_displacement_um = reference_displacement_m * 1e6;
        let displacement_deviation =
            (displacement_um - reference_displacement_um) / reference_displacement_um;
        let voltage_deviation = (voltage_v - reference_voltage_v) / reference_voltage_v;
        let within_tolerance =
            displacement_deviation.abs() <= tolerance && voltage_deviation.abs() <= tolerance;
        Self {
            displacement_um,
            reference_displacement_um,
            displacement_deviation,
            voltage_v,
            reference_voltage_v,
            voltage_deviation,
            tolerance,
            within_tolerance,
        }
    }
}

/// One validation scenario (one measured column of the dataset).
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub label: String,
    pub xi: f64,
    pub kappa: f64,
    pub measured_displacement_um: f64,
    pub measured_voltage_v: f64,
    pub quasifem: ModelComparison,
    pub analytical: ModelComparison,
}

/// Mesh-refinement check on the reference scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub label: String,
    pub grid_coarse: usize,
    pub grid_fine: usize,
    pub sqrt_beta_coarse: f64,
    pub sqrt_beta_fine: f64,
    pub relative_change: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// The full validation report.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub tool_version: String,
    pub grid_n: usize,
    pub rule: String,
    pub sign_convention: String,
    pub quasifem_tolerance: f64,
    pub analytical_tolerance: f64,
    pub scenarios: Vec<ScenarioReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    pub all_within_tolerance: bool,
}

impl ValidationReport {
    /// Plain-text table for the terminal.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let pct = |v: f64| format!("{:+.1}%", v * 100.0);
        out.push_str(&format!(
            "validation report (grid_n = {}, rule = {}, quasi-fem tol {:.0}%, analytical tol {:.0}%)\n",
            self.grid_n,
            self.rule,
            self.quasifem_tolerance * 100.0,
            self.analytical_tolerance * 100.0
        ));
        out.push_str(&format!(
            "{:<16} {:>10} {:>10} | {:>9} {:>9} {:>7} | {:>9} {:>9} {:>7} | {}\n",
            "scenario",
            "meas q_p",
            "meas U_p",
            "qfem q_p",
            "qfem U_p",
            "dev",
            "anal q_p",
            "anal U_p",
            "dev",
            "status"
        ));
        for s in &self.scenarios {
            let worst_q = s
                .quasifem
                .displacement_deviation
                .abs()
                .max(s.quasifem.voltage_deviation.abs());
            let worst_a = s
                .analytical
                .displacement_deviation
                .abs()
                .max(s.analytical.voltage_deviation.abs());
            out.push_str(&format!(
                "{:<16} {:>8.1}um {:>9.1}V | {:>7.1}um {:>8.2}V {:>7} | {:>7.1}um {:>8.2}V {:>7} | {}\n",
                s.label,
                s.measured_displacement_um,
                s.measured_voltage_v,
                s.quasifem.displacement_um,
                s.quasifem.voltage_v,
                pct(worst_q),
                s.analytical.displacement_um,
                s.analytical.voltage_v,
                pct(worst_a),
                if s.quasifem.within_tolerance && s.analytical.within_tolerance {
                    "ok"
                } else {
                    "FAIL"
                }
            ));
        }
        if let Some(c) = &self.convergence {
            out.push_str(&format!(
                "convergence {}: sqrt(beta_p) {:.5} (grid {}) -> {:.5} (grid {}), change {:+.2}% (tol {:.1}%): {}\n",
                c.label,
                c.sqrt_beta_coarse,
                c.grid_coarse,
                c.sqrt_beta_fine,
                c.grid_fine,
                c.relative_change * 100.0,
                c.tolerance * 100.0,
                if c.within_tolerance { "ok" } else { "FAIL" }
            ));
        }
        out.push_str(if self.all_within_tolerance {
            "validation: all scenarios within tolerance\n"
        } else {
            "validation: TOLERANCE VIOLATED\n"
        });
        out
    }
}
