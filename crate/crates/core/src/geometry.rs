//! Coil filament stacks, the disc mesh, and rigid-body kinematics
//! connecting element positions to coil frames.
//!
//! The levitated disc is meshed by equal circular elements on a square
//! lattice with spacing 2 R_e, so neighboring elements touch at exactly
//! one point. Coils are represented by stacks of coaxial circular
//! filaments. All orientations are zero in this artifact: the disc stays
//! parallel to the coil planes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filament::{RelativePlacement, RingGeometry};

/// One circular current loop: a coil winding or an eddy-current circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filament {
    /// Loop radius (m).
    pub radius: f64,
    /// Center position in the fixed frame (m).
    pub position: [f64; 3],
    /// Bryan angles of the loop plane (rad); zero throughout.
    pub angles: [f64; 3],
    /// Dimensionless current relative to the reference coil current.
    pub current: f64,
}

impl Filament {
    pub fn new(radius: f64, position: [f64; 3], current: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Geometry(format!(
                "filament radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            radius,
            position,
            angles: [0.0; 3],
            current,
        })
    }
}

/// The full excitation coil set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSystem {
    /// Ordered filaments; the first defines the reference radius and the
    /// current normalization.
    pub filaments: Vec<Filament>,
    /// Amplitude of the reference coil current (A); only needed when
    /// dimensional forces or voltages per ampere are requested.
    pub reference_current: Option<f64>,
    /// Excitation angular frequency (rad/s); only needed in resistive
    /// impedance mode.
    pub frequency: Option<f64>,
}

impl CoilSystem {
    pub fn new(filaments: Vec<Filament>) -> Result<Self> {
        if filaments.is_empty() {
            return Err(Error::Geometry(
                "coil system needs at least one filament".into(),
            ));
        }
        Ok(Self {
            filaments,
            reference_current: None,
            frequency: None,
        })
    }

    /// Radius of the first (reference) filament.
    pub fn reference_radius(&self) -> f64 {
        self.filaments[0].radius
    }

    pub fn len(&self) -> usize {
        self.filaments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filaments.is_empty()
    }

    /// Dimensionless current vector, one entry per filament.
    pub fn currents(&self) -> Vec<f64> {
        self.filaments.iter().map(|f| f.current).collect()
    }
}

/// Element selection rule for the disc mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeshRule {
    /// Keep an element if its center lies within the disc radius.
    #[serde(rename = "center-inside")]
    CenterInside,
    /// Keep an element only if its full circle lies within the disc.
    #[serde(rename = "fully-inside")]
    FullyInside,
}

impl std::fmt::Display for MeshRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshRule::CenterInside => write!(f, "center-inside"),
            MeshRule::FullyInside => write!(f, "fully-inside"),
        }
    }
}

/// Disc discretization: element centers in the body frame plus the map
/// back onto the square grid used for current-distribution plots.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Element centers (x1, x2) in the body frame (m); x3 = 0 for the
    /// plane disc. Numbered row by row, left to right, top row first.
    pub elements: Vec<[f64; 2]>,
    /// Integer lattice coordinates (i, j) of each element, so that the
    /// center is (2 i R_e, 2 j R_e). Exact pair distances derive from
    /// these without floating-point noise.
    pub lattice: Vec<(i32, i32)>,
    /// Per-element (row, col) on the grid_n x grid_n plot grid.
    pub grid_index: Vec<(usize, usize)>,
    /// Shared element radius (m).
    pub r_e: f64,
    /// Conducting layer thickness (m).
    pub th: f64,
    /// Grid resolution across the disc diameter (odd).
    pub grid_n: usize,
    /// Selection rule the mesh was built with.
    pub rule: MeshRule,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Cross-section ratio epsilon = th / (2 R_e).
    pub fn epsilon(&self) -> f64 {
        self.th / (2.0 * self.r_e)
    }

    /// Ring geometry shared by every element.
    pub fn ring_geometry(&self) -> Result<RingGeometry> {
        RingGeometry::new(self.r_e, self.th)
    }
}

/// Rigid-body pose of the disc: translation of the center of mass in the
/// fixed frame plus Bryan angles (zero in this artifact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub translation: [f64; 3],
    pub angles: [f64; 3],
}

impl Pose {
    /// Level pose at height `z` above the fixed-frame origin.
    pub fn level(z: f64) -> Self {
        Self {
            translation: [0.0, 0.0, z],
            angles: [0.0; 3],
        }
    }

    pub fn is_level(&self) -> bool {
        self.angles == [0.0; 3]
    }
}

/// Stack of coaxial filaments approximating a solenoid winding: filament
/// `j` (1-based) sits at z = z_top - (j - 1) * pitch, all with the same
/// radius and dimensionless current.
pub fn build_solenoid(
    diameter: f64,
    windings: usize,
    pitch: f64,
    z_top: f64,
    current: f64,
) -> Result<Vec<Filament>> {
    if !(diameter > 0.0) {
        return Err(Error::Geometry(format!(
            "coil diameter must be positive, got {diameter}"
        )));
    }
    if windings < 1 {
        return Err(Error::Geometry("coil needs at least one winding".into()));
    }
    if pitch < 0.0 {
        return Err(Error::Geometry(format!("pitch must be >= 0, got {pitch}")));
    }
    (0..windings)
        .map(|j| {
            Filament::new(
                0.5 * diameter,
                [0.0, 0.0, z_top - j as f64 * pitch],
                current,
            )
        })
        .collect()
}

/// Mesh a disc of radius `disc_radius` by circular elements on a square
/// lattice: R_e = disc_radius / grid_n, centers at (2 i R_e, 2 j R_e),
/// elements kept per `rule`.
pub fn mesh_disc(disc_radius: f64, grid_n: usize, th: f64, rule: MeshRule) -> Result<Mesh> {
    if !(disc_radius > 0.0) {
        return Err(Error::Geometry(format!(
            "disc radius must be positive, got {disc_radius}"
        )));
    }
    if grid_n < 3 || grid_n.is_multiple_of(2) {
        return Err(Error::Geometry(format!(
            "grid_n must be an odd integer >= 3, got {grid_n}"
        )));
    }
    let r_e = disc_radius / grid_n as f64;
    // Validates th > 0 and epsilon < 1.
    RingGeometry::new(r_e, th)?;

    let half = (grid_n as i64 - 1) / 2;
    // Selection in exact integer arithmetic:
    //   center-inside: 2 sqrt(i^2 + j^2) <= grid_n
    //   fully-inside:  2 sqrt(i^2 + j^2) + 1 <= grid_n
    let bound = match rule {
        MeshRule::CenterInside => (grid_n as i64) * (grid_n as i64),
        MeshRule::FullyInside => (grid_n as i64 - 1) * (grid_n as i64 - 1),
    };

    let mut elements = Vec::new();
    let mut lattice = Vec::new();
    let mut grid_index = Vec::new();
    for row in 0..grid_n {
        let j = half - row as i64; // top row has the largest x2
        for col in 0..grid_n {
            let i = col as i64 - half;
            if 4 * (i * i + j * j) <= bound {
                elements.push([2.0 * i as f64 * r_e, 2.0 * j as f64 * r_e]);
                lattice.push((i as i32, j as i32));
                grid_index.push((row, col));
            }
        }
    }

    Ok(Mesh {
        elements,
        lattice,
        grid_index,
        r_e,
        th,
        grid_n,
        rule,
    })
}

/// Placement of mesh element `s` relative to coil filament `j` at the
/// given pose: r = r_cm + rho_s - r_cj, normalized by R_e, with
/// nu = R_e / R_cj. All direction-cosine matrices are the identity
/// because every angle is zero; a tilted pose is rejected.
pub fn relative_placement(
    element: [f64; 2],
    coil: &Filament,
    pose: &Pose,
    r_e: f64,
) -> Result<RelativePlacement> {
    if !pose.is_level() {
        return Err(Error::Geometry(
            "pose angles must be zero for the parallel-plane kinematics".into(),
        ));
    }
    if coil.angles != [0.0; 3] {
        return Err(Error::Geometry(
            "coil filaments must be coaxial with the vertical axis".into(),
        ));
    }
    let r = [
        pose.translation[0] + element[0] - coil.position[0],
        pose.translation[1] + element[1] - coil.position[1],
        pose.translation[2] - coil.position[2],
    ];
    RelativePlacement::new(r[0] / r_e, r[1] / r_e, r[2] / r_e, r_e / coil.radius)
}
