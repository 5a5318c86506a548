//! Embedded measurement dataset: four pull-in experiments on the
//! two-coil prototype (levitation coil 2000 um / 20 windings,
//! stabilization coil 3800 um / 12 windings, 25 um pitch, electrode
//! area 8.0e-7 m^2), together with the reference model predictions the
//! validation report compares against.

use hlma_core::pullin::ActuatorScenario;
use hlma_core::scenario::{CoilSpec, DiscSpec, ElectrodeSpec, LevitationSpec, MeshSpec};
use hlma_core::geometry::MeshRule;

/// One measured pull-in experiment plus the reference predictions.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    /// Short label used in reports.
    pub label: &'static str,
    /// Disc diameter (m).
    pub disc_diameter_m: f64,
    /// Disc mass (kg).
    pub disc_mass_kg: f64,
    /// Levitation height h_l (m).
    pub levitation_height_m: f64,
    /// Electrode spacing h (m).
    pub spacing_h_m: f64,
    /// Measured pull-in displacement (m) and voltage (V).
    pub measured_displacement_m: f64,
    pub measured_voltage_v: f64,
    /// Reference single-circuit (analytical) model prediction.
    pub analytical_displacement_m: f64,
    pub analytical_voltage_v: f64,
    /// Reference filament-mesh (quasi-FEM) prediction.
    pub quasifem_displacement_m: f64,
    pub quasifem_voltage_v: f64,
}

/// Electrode area shared by all experiments (m^2).
pub const ELECTRODE_AREA_M2: f64 = 8.0e-7;

/// The four validation experiments.
pub fn records() -> Vec<ExperimentRecord> {
    vec![
        ExperimentRecord {
            label: "disc-2.4mm",
            disc_diameter_m: 2.4e-3,
            disc_mass_kg: 0.2e-6,
            levitation_height_m: 180.0e-6,
            spacing_h_m: 100.0e-6,
            measured_displacement_m: 35.0e-6,
            measured_voltage_v: 38.0,
            analytical_displacement_m: 40.0e-6,
            analytical_voltage_v: 43.0,
            quasifem_displacement_m: 40.0e-6,
            quasifem_voltage_v: 37.0,
        },
        ExperimentRecord {
            label: "disc-2.8mm",
            disc_diameter_m: 2.8e-3,
            disc_mass_kg: 0.3e-6,
            levitation_height_m: 200.0e-6,
            spacing_h_m: 119.0e-6,
            measured_displacement_m: 43.0e-6,
            measured_voltage_v: 60.8,
            analytical_displacement_m: 49.0e-6,
            analytical_voltage_v: 69.0,
            quasifem_displacement_m: 48.0e-6,
            quasifem_voltage_v: 60.76,
        },
        ExperimentRecord {
            label: "disc-3.2mm-h64",
            disc_diameter_m: 3.2e-3,
            disc_mass_kg: 0.7e-6,
            levitation_height_m: 144.0e-6,
            spacing_h_m: 64.0e-6,
            measured_displacement_m: 18.0e-6,
            measured_voltage_v: 32.0,
            analytical_displacement_m: 24.0e-6,
            analytical_voltage_v: 44.0,
            quasifem_displacement_m: 22.0e-6,
            quasifem_voltage_v: 33.0,
        },
        ExperimentRecord {
            label: "disc-3.2mm-h107",
            disc_diameter_m: 3.2e-3,
            disc_mass_kg: 0.7e-6,
            levitation_height_m: 187.0e-6,
            spacing_h_m: 107.0e-6,
            measured_displacement_m: 36.0e-6,
            measured_voltage_v: 65.0,
            analytical_displacement_m: 42.0e-6,
            analytical_voltage_v: 88.0,
            quasifem_displacement_m: 37.0e-6,
            quasifem_voltage_v: 69.0,
        },
    ]
}

impl ExperimentRecord {
    /// Scenario for this experiment at the given mesh fidelity.
    pub fn scenario(&self, grid_n: usize, rule: MeshRule) -> ActuatorScenario {
        ActuatorScenario {
            disc: DiscSpec {
                radius_m: 0.5 * self.disc_diameter_m,
                mass_kg: self.disc_mass_kg,
                thickness_m: None,
            },
            mesh: MeshSpec { grid_n, rule },
            coils: two_coil_prototype(),
            electrodes: ElectrodeSpec {
                area_m2: ELECTRODE_AREA_M2,
                spacing_h_m: self.spacing_h_m,
            },
            levitation: LevitationSpec {
                height_m: self.levitation_height_m,
            },
        }
    }

    /// xi = h_l / (2 R_l) with R_l = 1 mm.
    pub fn xi(&self) -> f64 {
        self.levitation_height_m / 2.0e-3
    }

    /// kappa = h / h_l.
    pub fn kappa(&self) -> f64 {
        self.spacing_h_m / self.levitation_height_m
    }
}

/// The prototype's coil stack.
pub fn two_coil_prototype() -> Vec<CoilSpec> {
    vec![
        CoilSpec {
            diameter_m: 2.0e-3,
            windings: 20,
            pitch_m: 25.0e-6,
            z_top_m: 0.0,
            current_rel: 1.0,
        },
        CoilSpec {
            diameter_m: 3.8e-3,
            windings: 12,
            pitch_m: 25.0e-6,
            z_top_m: 0.0,
            current_rel: -1.0,
        },
    ]
}

/// The preliminary planar-coil design used for the dimensionless
/// model-comparison study: two single-filament coils of radii 1.0 and
/// 1.9 mm, disc levitated at 250 um, electrodes 10 um below.
pub fn preliminary_design(disc_radius_m: f64, grid_n: usize) -> ActuatorScenario {
    ActuatorScenario {
        disc: DiscSpec {
            radius_m: disc_radius_m,
            mass_kg: 1.0e-6, // pull-in here is analyzed dimensionlessly
            thickness_m: None,
        },
        mesh: MeshSpec {
            grid_n,
            rule: MeshRule::CenterInside,
        },
        coils: vec![
            CoilSpec {
                diameter_m: 2.0e-3,
                windings: 1,
                pitch_m: 0.0,
                z_top_m: 0.0,
                current_rel: 1.0,
            },
            CoilSpec {
                diameter_m: 3.8e-3,
                windings: 1,
                pitch_m: 0.0,
                z_top_m: 0.0,
                current_rel: -1.0,
            },
        ],
        electrodes: ElectrodeSpec {
            area_m2: ELECTRODE_AREA_M2,
            spacing_h_m: 10.0e-6,
        },
        levitation: LevitationSpec { height_m: 250.0e-6 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_groups_match_reference_table() {
        let recs = records();
        let expect = [(0.09, 0.55), (0.10, 0.60), (0.072, 0.44), (0.0935, 0.57)];
        for (r, (xi, kappa)) in recs.iter().zip(expect) {
            assert!(
                (r.xi() - xi).abs() / xi < 5e-3,
                "{}: xi {} vs {xi}",
                r.label,
                r.xi()
            );
            assert!(
                (r.kappa() - kappa).abs() / kappa < 2e-2,
                "{}: kappa {} vs {kappa}",
                r.label,
                r.kappa()
            );
        }
    }

    #[test]
    fn preliminary_design_groups() {
        let s = preliminary_design(1.55e-3, 71);
        assert!((s.xi() - 0.125).abs() < 1e-12);
        assert!((s.kappa() - 0.04).abs() < 1e-12);
    }
}
