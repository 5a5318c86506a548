//! Actuator scenario: the JSON description of one device configuration
//! shared by the command line, the validation dataset, and the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_solenoid, mesh_disc, CoilSystem, Mesh, MeshRule};
use crate::{EPSILON_0, STANDARD_GRAVITY};

/// Full device description: disc, mesh fidelity, coil stack, electrodes
/// and levitation height.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ActuatorScenario {
    pub disc: DiscSpec,
    pub mesh: MeshSpec,
    pub coils: Vec<CoilSpec>,
    pub electrodes: ElectrodeSpec,
    pub levitation: LevitationSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscSpec {
    /// Disc radius (m).
    pub radius_m: f64,
    /// Disc mass (kg).
    pub mass_kg: f64,
    /// Conducting layer thickness (m). Defaults to 0.2 R_e so that the
    /// cross-section ratio is the recommended 0.1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Grid resolution across the disc diameter (odd).
    pub grid_n: usize,
    /// Element selection rule.
    pub rule: MeshRule,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoilSpec {
    pub diameter_m: f64,
    pub windings: usize,
    pub pitch_m: f64,
    pub z_top_m: f64,
    /// Dimensionless current relative to the first coil's amplitude.
    pub current_rel: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeSpec {
    /// Electrode area A_e (m^2).
    pub area_m2: f64,
    /// Gap h between the electrode surface and the disc center of mass
    /// at rest (m).
    pub spacing_h_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LevitationSpec {
    /// Levitation height h_l above the top coil winding (m).
    pub height_m: f64,
}

impl ActuatorScenario {
    /// Parse and validate a scenario from JSON, reporting schema errors
    /// with the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: ActuatorScenario = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Input(format!("scenario {}: {}", e.path(), e.inner())))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Input(format!("scenario {name}: must be positive, got {v}")));
            }
            Ok(())
        };
        check("disc.radius_m", self.disc.radius_m)?;
        check("disc.mass_kg", self.disc.mass_kg)?;
        if let Some(th) = self.disc.thickness_m {
            check("disc.thickness_m", th)?;
        }
        if self.coils.is_empty() {
            return Err(Error::Input("scenario coils: at least one coil required".into()));
        }
        for (i, c) in self.coils.iter().enumerate() {
            check(&format!("coils[{i}].diameter_m"), c.diameter_m)?;
            if c.windings == 0 {
                return Err(Error::Input(format!(
                    "scenario coils[{i}].windings: must be >= 1"
                )));
            }
            if c.pitch_m < 0.0 {
                return Err(Error::Input(format!(
                    "scenario coils[{i}].pitch_m: must be >= 0"
                )));
            }
        }
        check("electrodes.area_m2", self.electrodes.area_m2)?;
        check("electrodes.spacing_h_m", self.electrodes.spacing_h_m)?;
        check("levitation.height_m", self.levitation.height_m)?;
        Ok(())
    }

    /// Element radius for a given grid resolution.
    pub fn element_radius(&self, grid_n: usize) -> f64 {
        self.disc.radius_m / grid_n as f64
    }

    /// Layer thickness: explicit, or 0.2 R_e so that epsilon = 0.1.
    pub fn layer_thickness(&self, grid_n: usize) -> f64 {
        self.disc
            .thickness_m
            .unwrap_or(0.2 * self.element_radius(grid_n))
    }

    /// Build the disc mesh at the scenario's fidelity.
    pub fn build_mesh(&self) -> Result<Mesh> {
        self.build_mesh_with(self.mesh.grid_n, self.mesh.rule)
    }

    /// Build the disc mesh with overridden fidelity (the --grid-n and
    /// --rule command-line flags).
    pub fn build_mesh_with(&self, grid_n: usize, rule: MeshRule) -> Result<Mesh> {
        mesh_disc(
            self.disc.radius_m,
            grid_n,
            self.layer_thickness(grid_n),
            rule,
        )
    }

    /// Build the coil filament stacks.
    pub fn build_coils(&self) -> Result<CoilSystem> {
        let mut filaments = Vec::new();
        for c in &self.coils {
            filaments.extend(build_solenoid(
                c.diameter_m,
                c.windings,
                c.pitch_m,
                c.z_top_m,
                c.current_rel,
            )?);
        }
        CoilSystem::new(filaments)
    }

    /// Radius of the levitation coil (the first coil listed).
    pub fn levitation_coil_radius(&self) -> f64 {
        0.5 * self.coils[0].diameter_m
    }

    /// kappa = h / h_l.
    pub fn kappa(&self) -> f64 {
        self.electrodes.spacing_h_m / self.levitation.height_m
    }

    /// xi = h_l / (2 R_l).
    pub fn xi(&self) -> f64 {
        self.levitation.height_m / (2.0 * self.levitation_coil_radius())
    }

    /// A0 = epsilon_0 A_e.
    pub fn a0(&self) -> f64 {
        EPSILON_0 * self.electrodes.area_m2
    }

    /// Voltage scale sqrt(4 m g h^2 / A0) that maps sqrt(beta) to volts.
    pub fn voltage_scale(&self) -> f64 {
        let h = self.electrodes.spacing_h_m;
        (4.0 * self.disc.mass_kg * STANDARD_GRAVITY * h * h / self.a0()).sqrt()
    }

    /// FNV-1a hash of the canonical JSON form, recorded in output
    /// metadata so runs are traceable to their inputs.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("scenario serializes");
        let mut hash: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            hash ^= u64::from(*b);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}
