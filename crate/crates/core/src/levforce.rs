//! Ponderomotive forces on the levitated disc and coil field maps.
//!
//! Forces come from the frozen-current derivative of the element-coil
//! interaction energy: the element currents are solved at a pose and
//! held fixed while the coupling matrix is differentiated. The axial
//! component uses the analytic derivative of the coupling integral; the
//! lateral components and torques fall back to central differences.
//!
//! Everything here is dimensionless. The interaction energy is
//! sum_sj Ibar_s Ibar_cj sqrt(Rbar_cj) Mbar_sj / chi, forces are its
//! derivatives with respect to the normalized coordinates, and the
//! vertical force function `fm` is its derivative with respect to the
//! electrode-gap fraction lambda. Multiplying by mu0 I_c1^2 sqrt(R_c1
//! R_e) chi / R_e (and the 1/2 time-average factor for amplitude
//! phasors) restores newtons; `dimensional_force` does exactly that.

use std::sync::Arc;

use crate::eddy::{self, EddySolution, EddySystem, ElementCore, ImpedanceMode};
use crate::ellint::complete_elliptic;
use crate::error::{Error, Result};
use crate::geometry::{CoilSystem, Mesh, Pose};
use crate::MU_0;

/// Central-difference step for the lateral force components, in units
/// of R_e.
const TRANSLATION_STEP: f64 = 1e-4;
/// Central-difference step for the torque components (rad).
const ANGLE_STEP: f64 = 1e-5;

/// Dimensionless parameters of the actuator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    /// kappa = h / h_l: electrode gap over levitation height.
    pub kappa: f64,
    /// xi = h_l / (2 R_l): levitation height over coil diameter.
    pub xi: f64,
    /// chi = h_l / R_e: levitation height over element radius.
    pub chi: f64,
}

impl DimensionlessGroups {
    pub fn new(h: f64, h_l: f64, r_lev: f64, r_e: f64) -> Result<Self> {
        if !(h > 0.0 && h_l > 0.0 && r_lev > 0.0 && r_e > 0.0) {
            return Err(Error::Input(
                "dimensionless groups need positive h, h_l, R_l, R_e".into(),
            ));
        }
        Ok(Self {
            kappa: h / h_l,
            xi: h_l / (2.0 * r_lev),
            chi: h_l / r_e,
        })
    }
}

/// Force and torque components about the three axes (dimensionless; see
/// the module docs for the scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedForce {
    pub force: [f64; 3],
    pub torque: [f64; 3],
}

/// Evaluator bundling the mesh, coils, and the factorized element
/// system so the vertical force function can be swept over lambda.
#[derive(Debug)]
pub struct LevitationForces {
    mesh: Mesh,
    coils: CoilSystem,
    base: EddySystem,
    coil_currents: Vec<f64>,
    groups: DimensionlessGroups,
    h_l: f64,
    h: f64,
}

impl LevitationForces {
    pub fn new(
        mesh: Mesh,
        coils: CoilSystem,
        h_l: f64,
        h: f64,
        impedance: ImpedanceMode,
    ) -> Result<Self> {
        let core = eddy::assemble_core(&mesh)?;
        Self::with_core(&core, mesh, coils, h_l, h, impedance)
    }

    /// Reuse a previously assembled (and possibly factorized) element
    /// core; the lattice pattern and epsilon must match the mesh.
    pub fn with_core(
        core: &Arc<ElementCore>,
        mesh: Mesh,
        coils: CoilSystem,
        h_l: f64,
        h: f64,
        impedance: ImpedanceMode,
    ) -> Result<Self> {
        let groups = DimensionlessGroups::new(h, h_l, coils.reference_radius(), mesh.r_e)?;
        let base = EddySystem::assemble_shared(core, &mesh, &coils, &Pose::level(h_l), impedance)?;
        let coil_currents = coils.currents();
        Ok(Self {
            mesh,
            coils,
            base,
            coil_currents,
            groups,
            h_l,
            h,
        })
    }

    pub fn groups(&self) -> &DimensionlessGroups {
        &self.groups
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coils(&self) -> &CoilSystem {
        &self.coils
    }

    pub fn core(&self) -> &Arc<ElementCore> {
        self.base.core()
    }

    /// Disc pose at electrode-gap fraction lambda: q3 = h_l + lambda h.
    pub fn pose_at(&self, lambda: f64) -> Pose {
        Pose::level(self.h_l + lambda * self.h)
    }

    /// Assemble and solve the eddy system at lambda.
    pub fn solve_at(&self, lambda: f64) -> Result<(EddySystem, EddySolution)> {
        let sys = self
            .base
            .at_pose(&self.mesh, &self.coils, &self.pose_at(lambda))?;
        let sol = sys.solve(&self.coil_currents)?;
        Ok((sys, sol))
    }

    /// Dimensionless vertical magnetic force function F_m(lambda):
    /// the frozen-current derivative of the interaction energy with
    /// respect to lambda, with the currents re-solved at this lambda.
    ///
    /// Signs follow the equilibrium relation 1 + eta0 F_m(0) = 0 with
    /// eta0 > 0: the currents enter with the drive orientation (the
    /// negative of the solver's Lenz convention), making F_m negative
    /// when the coils lift the disc.
    ///
    /// In resistive mode only the in-phase (real) current component
    /// contributes; the quadrature component time-averages against the
    /// drive to zero.
    pub fn fm(&self, lambda: f64) -> Result<f64> {
        let (sys, sol) = self.solve_at(lambda)?;
        let c = sys.coupling_matrices();
        let mut partial: Vec<f64> = (0..c.n)
            .map(|s| {
                let row = &c.dmc_dx3[s * c.n_coils..(s + 1) * c.n_coils];
                let mut acc = 0.0;
                for (j, &d) in row.iter().enumerate() {
                    acc += d * self.coil_currents[j];
                }
                sol.currents[s] * acc
            })
            .collect();
        let sum = pairwise_sum(&mut partial);
        // dx3/dlambda = kappa chi and eta_sj carries 1/chi; the leftover
        // sqrt(R_e/R_c1) converts the stored per-mu0-R_e couplings to the
        // sqrt(Rbar_cj) weights. The leading minus flips the solver's
        // Lenz currents to the drive orientation.
        let scale = (self.mesh.r_e / self.coils.reference_radius()).sqrt();
        Ok(-self.groups.kappa * scale * sum)
    }
}

/// Deterministic pairwise tree sum: the same value regardless of how the
/// partials were produced in parallel.
fn pairwise_sum(values: &mut [f64]) -> f64 {
    let mut len = values.len();
    if len == 0 {
        return 0.0;
    }
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            values[i] = values[2 * i] + values[2 * i + 1];
        }
        if len % 2 == 1 {
            values[half] = values[len - 1];
            len = half + 1;
        } else {
            len = half;
        }
    }
    values[0]
}

/// Element-coil interaction energy (dimensionless):
/// sum_sj Ibar_s Ibar_cj sqrt(Rbar_cj) Mbar_sj / chi,
/// evaluated with the element currents exactly as passed (frozen).
/// This is the cross term of the stored field energy; the element-element
/// and coil-coil terms do not move with the pose.
pub fn stored_interaction_energy(
    mesh: &Mesh,
    coils: &CoilSystem,
    pose: &Pose,
    sol: &EddySolution,
    groups: &DimensionlessGroups,
) -> Result<f64> {
    let c = eddy::coupling(mesh, coils, pose)?;
    Ok(energy_from_coupling(&c, coils, &sol.currents, mesh.r_e, groups))
}

fn energy_from_coupling(
    c: &eddy::Coupling,
    coils: &CoilSystem,
    currents: &[f64],
    r_e: f64,
    groups: &DimensionlessGroups,
) -> f64 {
    let ic = coils.currents();
    let mut partial: Vec<f64> = (0..c.n)
        .map(|s| {
            let row = &c.mc[s * c.n_coils..(s + 1) * c.n_coils];
            let mut acc = 0.0;
            for (j, &m) in row.iter().enumerate() {
                acc += m * ic[j];
            }
            currents[s] * acc
        })
        .collect();
    let scale = (r_e / coils.reference_radius()).sqrt() / groups.chi;
    scale * pairwise_sum(&mut partial)
}

/// Generalized forces and torques on the disc at a pose, with the
/// element currents frozen at `sol`:
///   F_l = I^T (dMc/dq_l) I_c,  T_l = I^T (dMc/dphi_l) I_c.
/// F3 uses the analytic axial derivative; F1, F2 and the torques come
/// from central differences of the coupling matrix. All components share
/// the normalization of `stored_interaction_energy` differentiated with
/// respect to q_l / R_e (forces) and phi_l (torques).
pub fn generalized_force(
    mesh: &Mesh,
    coils: &CoilSystem,
    pose: &Pose,
    sol: &EddySolution,
    groups: &DimensionlessGroups,
) -> Result<GeneralizedForce> {
    if !pose.is_level() {
        return Err(Error::Geometry(
            "pose angles must be zero for the parallel-plane kinematics".into(),
        ));
    }
    let c = eddy::coupling(mesh, coils, pose)?;
    let ic = coils.currents();
    let scale = (mesh.r_e / coils.reference_radius()).sqrt() / groups.chi;

    // Analytic axial component.
    let mut partial: Vec<f64> = (0..c.n)
        .map(|s| {
            let row = &c.dmc_dx3[s * c.n_coils..(s + 1) * c.n_coils];
            let mut acc = 0.0;
            for (j, &d) in row.iter().enumerate() {
                acc += d * ic[j];
            }
            sol.currents[s] * acc
        })
        .collect();
    let f3 = scale * pairwise_sum(&mut partial);

    // Lateral components by central differences in the pose translation.
    let dq = TRANSLATION_STEP * mesh.r_e;
    let mut force = [0.0, 0.0, f3];
    for (l, f_slot) in force.iter_mut().enumerate().take(2) {
        let mut plus = *pose;
        let mut minus = *pose;
        plus.translation[l] += dq;
        minus.translation[l] -= dq;
        let e_plus = stored_interaction_energy(mesh, coils, &plus, sol, groups)?;
        let e_minus = stored_interaction_energy(mesh, coils, &minus, sol, groups)?;
        // d/d(q_l/R_e) = R_e d/dq_l.
        *f_slot = (e_plus - e_minus) / (2.0 * dq) * mesh.r_e;
    }

    // Torques by central differences in the Bryan angles: the rotation
    // moves the element centers; the element orientations contribute
    // only at second order and stay untouched.
    let mut torque = [0.0; 3];
    for (axis, t_slot) in torque.iter_mut().enumerate() {
        let e_plus = energy_rotated(mesh, coils, pose, sol, groups, axis, ANGLE_STEP)?;
        let e_minus = energy_rotated(mesh, coils, pose, sol, groups, axis, -ANGLE_STEP)?;
        *t_slot = (e_plus - e_minus) / (2.0 * ANGLE_STEP);
    }

    Ok(GeneralizedForce { force, torque })
}

/// Interaction energy with the disc rotated by `angle` about body axis
/// `axis`, currents frozen.
fn energy_rotated(
    mesh: &Mesh,
    coils: &CoilSystem,
    pose: &Pose,
    sol: &EddySolution,
    groups: &DimensionlessGroups,
    axis: usize,
    angle: f64,
) -> Result<f64> {
    let (sin_a, cos_a) = angle.sin_cos();
    let positions: Vec<[f64; 3]> = mesh
        .elements
        .iter()
        .map(|&[x1, x2]| match axis {
            0 => [x1, x2 * cos_a, x2 * sin_a],
            1 => [x1 * cos_a, x2, -x1 * sin_a],
            _ => [x1 * cos_a - x2 * sin_a, x1 * sin_a + x2 * cos_a, 0.0],
        })
        .collect();
    let c = eddy::coupling_general(&positions, mesh.r_e, coils, pose)?;
    Ok(energy_from_coupling(&c, coils, &sol.currents, mesh.r_e, groups))
}

/// Dimensional vertical force (N) from a dimensionless component, for a
/// reference coil current amplitude `i_c1` (A). The 1/2 comes from time
/// averaging amplitude phasors.
pub fn dimensional_force(f_hat: f64, i_c1: f64, r_c1: f64, r_e: f64, chi: f64) -> f64 {
    0.5 * MU_0 * i_c1 * i_c1 * (r_c1 * r_e).sqrt() * chi / r_e * f_hat
}

/// Magnetic field of the coil set at one (r, z) sample, per unit
/// reference current, plus the local gradient of |B|^2.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub r_m: f64,
    pub z_m: f64,
    /// Radial flux density (T/A).
    pub b_r: f64,
    /// Axial flux density (T/A).
    pub b_z: f64,
    /// Gradient of |B|^2 along r (T^2/A^2/m).
    pub grad_b2_r: f64,
    /// Gradient of |B|^2 along z (T^2/A^2/m).
    pub grad_b2_z: f64,
}

/// Field of one circular loop of radius `a` carrying unit current,
/// evaluated at radial distance `rho` and axial offset `z` from the loop
/// plane. Standard closed form through K and E.
fn loop_b(a: f64, rho: f64, z: f64) -> Result<(f64, f64)> {
    let q = (a + rho) * (a + rho) + z * z;
    let m = 4.0 * a * rho / q;
    let pair = complete_elliptic(m.sqrt()).map_err(|_| {
        Error::SingularGeometry(format!(
            "field sample lies on a coil filament (rho = {rho:e}, z = {z:e})"
        ))
    })?;
    let s = pair.e / (1.0 - m);
    let a0 = 2.0 / q.sqrt();
    let hz = a0 * (s / q * (a * a - rho * rho - z * z) + pair.k);
    let hr = if rho == 0.0 {
        0.0
    } else {
        (z / rho) * a0 * (s / q * (a * a + rho * rho + z * z) - pair.k)
    };
    let b_scale = MU_0 / (4.0 * std::f64::consts::PI);
    Ok((b_scale * hr, b_scale * hz))
}

/// Superposed field of all coil filaments (weighted by their
/// dimensionless currents) on the r x z sample grid, with the gradient
/// of |B|^2 by central differences on that grid (one-sided at the grid
/// edges). Samples are ordered z-major: for each z, all r in order.
pub fn loop_field(coils: &CoilSystem, rs: &[f64], zs: &[f64]) -> Result<Vec<FieldSample>> {
    if rs.is_empty() || zs.is_empty() {
        return Err(Error::Input("field map needs at least one r and one z sample".into()));
    }
    let nr = rs.len();
    let nz = zs.len();
    let mut b = vec![(0.0_f64, 0.0_f64); nr * nz];
    for (iz, &z) in zs.iter().enumerate() {
        for (ir, &r) in rs.iter().enumerate() {
            let mut br = 0.0;
            let mut bz = 0.0;
            for fil in &coils.filaments {
                let (fr, fz) = loop_b(fil.radius, r, z - fil.position[2])?;
                br += fil.current * fr;
                bz += fil.current * fz;
            }
            b[iz * nr + ir] = (br, bz);
        }
    }

    let b2 = |idx: usize| -> f64 {
        let (br, bz) = b[idx];
        br * br + bz * bz
    };

    let mut out = Vec::with_capacity(nr * nz);
    for iz in 0..nz {
        for ir in 0..nr {
            let idx = iz * nr + ir;
            let grad_r = if nr == 1 {
                0.0
            } else if ir == 0 {
                (b2(idx + 1) - b2(idx)) / (rs[1] - rs[0])
            } else if ir == nr - 1 {
                (b2(idx) - b2(idx - 1)) / (rs[nr - 1] - rs[nr - 2])
            } else {
                (b2(idx + 1) - b2(idx - 1)) / (rs[ir + 1] - rs[ir - 1])
            };
            let grad_z = if nz == 1 {
                0.0
            } else if iz == 0 {
                (b2(idx + nr) - b2(idx)) / (zs[1] - zs[0])
            } else if iz == nz - 1 {
                (b2(idx) - b2(idx - nr)) / (zs[nz - 1] - zs[nz - 2])
            } else {
                (b2(idx + nr) - b2(idx - nr)) / (zs[iz + 1] - zs[iz - 1])
            };
            let (br, bz) = b[idx];
            out.push(FieldSample {
                r_m: rs[ir],
                z_m: zs[iz],
                b_r: br,
                b_z: bz,
                grad_b2_r: grad_r,
                grad_b2_z: grad_z,
            });
        }
    }
    Ok(out)
}
