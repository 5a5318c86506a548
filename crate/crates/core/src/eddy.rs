//! Assembly and solution of the eddy-current circuit system.
//!
//! Every mesh element is an inductive circuit; the element currents
//! solve  [L° + R/(jf)] I_k + sum_s L_ks I_s = - sum_j M_kj I_cj,
//! written here with every inductance divided by mu0 R_e so the solve is
//! well conditioned and the unknowns come out as currents relative to
//! the reference coil amplitude. With the minus sign kept on the right
//! hand side the solved currents carry the physical (Lenz) orientation:
//! negative under a positively driven levitation coil.
//!
//! The element-element matrix depends only on the lattice pattern and
//! the cross-section ratio, not on the pose, so it is assembled and
//! factorized once and shared across displacement sweeps.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filament::{self, RelativePlacement};
use crate::geometry::{CoilSystem, Mesh, MeshRule, Pose};
use crate::linalg::{CholeskyFactor, ComplexLdlt, PackedSym};

/// Electrical model of the mesh elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpedanceMode {
    /// Perfectly conducting elements (R = 0); currents are real.
    Ideal,
    /// Series resistance per element at a given excitation frequency;
    /// adds R/(jf) to the diagonal and makes the currents complex.
    Resistive {
        resistance_ohm: f64,
        frequency_rad_s: f64,
    },
}

impl ImpedanceMode {
    pub fn label(&self) -> String {
        match self {
            ImpedanceMode::Ideal => "ideal".to_string(),
            ImpedanceMode::Resistive {
                resistance_ohm,
                frequency_rad_s,
            } => format!("resistive(R={resistance_ohm:e} ohm, f={frequency_rad_s:e} rad/s)"),
        }
    }
}

/// Pose-independent part of the system: the element-element inductance
/// matrix and its factorization, shared across poses and scenarios with
/// the same lattice pattern and cross-section ratio.
#[derive(Debug)]
pub struct ElementCore {
    n: usize,
    epsilon: f64,
    grid_n: usize,
    rule: MeshRule,
    lattice: Vec<(i32, i32)>,
    l: PackedSym,
    chol: OnceLock<std::result::Result<CholeskyFactor, Error>>,
}

impl ElementCore {
    /// Whether this core describes the same dimensionless element system
    /// as `mesh`: identical lattice pattern and cross-section ratio.
    /// Meshes of different disc radii share a core as long as grid and
    /// rule agree, which is what makes multi-scenario sweeps cheap.
    /// Epsilon is compared to 1e-12 relative; the default thickness rule
    /// reproduces 0.1 only to rounding.
    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.grid_n == mesh.grid_n
            && self.rule == mesh.rule
            && self.n == mesh.len()
            && (self.epsilon - mesh.epsilon()).abs() <= 1e-12 * self.epsilon
            && self.lattice == mesh.lattice
    }

    fn factor(&self) -> Result<&CholeskyFactor> {
        self.chol
            .get_or_init(|| self.l.cholesky())
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Element-element inductance (dimensionless, per mu0 R_e).
    pub fn l_entry(&self, k: usize, s: usize) -> f64 {
        self.l.get(k, s)
    }

    /// Energy form I^T L I of the element system.
    pub fn energy_form(&self, currents: &[f64]) -> f64 {
        self.l.quadratic_form(currents)
    }
}

/// Element-coil coupling matrices at one pose: the couplings themselves
/// and their derivatives with respect to the axial offset x3 (both per
/// mu0 R_e, i.e. the raw coupling integral times sqrt(R_cj / R_e)).
#[derive(Debug, Clone)]
pub struct Coupling {
    pub n: usize,
    pub n_coils: usize,
    /// Row-major n x N couplings.
    pub mc: Vec<f64>,
    /// Row-major n x N axial derivatives d/dx3.
    pub dmc_dx3: Vec<f64>,
}

impl Coupling {
    /// b = Mc * i_c.
    pub fn rhs(&self, coil_currents: &[f64]) -> Vec<f64> {
        assert_eq!(coil_currents.len(), self.n_coils);
        self.mc
            .chunks_exact(self.n_coils)
            .map(|row| row.iter().zip(coil_currents).map(|(m, ic)| m * ic).sum())
            .collect()
    }
}

/// The assembled linear system at one pose.
#[derive(Debug)]
pub struct EddySystem {
    core: Arc<ElementCore>,
    coupling: Coupling,
    pose: Pose,
    impedance: ImpedanceMode,
    /// Element radius (m); sets the scale of the resistive diagonal.
    r_e: f64,
    ldlt: OnceLock<std::result::Result<ComplexLdlt, Error>>,
}

/// Solved element currents.
#[derive(Debug, Clone)]
pub struct EddySolution {
    /// Dimensionless current amplitude per element (real part in
    /// resistive mode), Lenz sign convention.
    pub currents: Vec<f64>,
    /// Imaginary parts in resistive mode; empty in ideal mode.
    pub currents_imag: Vec<f64>,
    /// Relative residual of the linear system.
    pub residual: f64,
}

/// Grid view of a per-element quantity; cells outside the disc are None.
#[derive(Debug, Clone)]
pub struct GridMap {
    pub grid_n: usize,
    pub values: Vec<Option<f64>>,
}

impl GridMap {
    fn empty(grid_n: usize) -> Self {
        Self {
            grid_n,
            values: vec![None; grid_n * grid_n],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.grid_n + col]
    }

    fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.grid_n + col] = Some(v);
    }
}

/// Compute the element-coil coupling matrices at a pose. Couplings are
/// memoized on the exact (lateral distance, axial offset, radius ratio)
/// triple; for the coaxial coil stacks every lattice ring collapses onto
/// one integral, which is what makes displacement sweeps cheap.
pub fn coupling(mesh: &Mesh, coils: &CoilSystem, pose: &Pose) -> Result<Coupling> {
    let positions: Vec<[f64; 3]> = mesh
        .elements
        .iter()
        .map(|&[x1, x2]| [x1, x2, 0.0])
        .collect();
    coupling_general(&positions, mesh.r_e, coils, pose)
}

/// Coupling matrices for arbitrary element positions in the body frame
/// (used by the torque finite differences, where rotated elements leave
/// the disc plane).
pub(crate) fn coupling_general(
    positions: &[[f64; 3]],
    r_e: f64,
    coils: &CoilSystem,
    pose: &Pose,
) -> Result<Coupling> {
    if !pose.is_level() {
        return Err(Error::Geometry(
            "pose angles must be zero for the parallel-plane kinematics".into(),
        ));
    }
    let n = positions.len();
    let n_coils = coils.len();

    // Deterministic key list: s-major, coil-minor.
    let mut key_index: HashMap<(u64, u64, u64), usize> = HashMap::new();
    let mut pair_key: Vec<usize> = Vec::with_capacity(n * n_coils);
    let mut placements: Vec<RelativePlacement> = Vec::new();

    for rho in positions.iter().take(n) {
        for fil in &coils.filaments {
            if fil.angles != [0.0; 3] {
                return Err(Error::Geometry(
                    "coil filaments must be coaxial with the vertical axis".into(),
                ));
            }
            let r1 = pose.translation[0] + rho[0] - fil.position[0];
            let r2 = pose.translation[1] + rho[1] - fil.position[1];
            let r3 = pose.translation[2] + rho[2] - fil.position[2];
            let lat = (r1 / r_e).hypot(r2 / r_e);
            let x3 = r3 / r_e;
            let nu = r_e / fil.radius;
            let key = (lat.to_bits(), x3.to_bits(), nu.to_bits());
            let idx = *key_index.entry(key).or_insert_with(|| {
                placements.push(RelativePlacement::new(lat, 0.0, x3, nu).unwrap());
                placements.len() - 1
            });
            pair_key.push(idx);
        }
    }

    let values: Vec<Result<(f64, f64)>> = placements
        .par_iter()
        .map(filament::mutual_kz_pair)
        .collect();
    let mut resolved = Vec::with_capacity(values.len());
    for v in values {
        resolved.push(v?);
    }

    let mut mc = Vec::with_capacity(n * n_coils);
    let mut dmc = Vec::with_capacity(n * n_coils);
    for s in 0..n {
        for (j, fil) in coils.filaments.iter().enumerate() {
            let (m_bar, d_bar) = resolved[pair_key[s * n_coils + j]];
            // Per mu0 R_e: multiply the coupling integral by
            // sqrt(R_cj / R_e) = 1/sqrt(nu).
            let scale = (fil.radius / r_e).sqrt();
            mc.push(m_bar * scale);
            dmc.push(d_bar * scale);
        }
    }

    Ok(Coupling {
        n,
        n_coils,
        mc,
        dmc_dx3: dmc,
    })
}

/// Assemble the pose-independent element system: ring self-inductance on
/// the diagonal, pairwise coupling integrals off the diagonal, memoized
/// on the exact integer lattice distance.
pub fn assemble_core(mesh: &Mesh) -> Result<Arc<ElementCore>> {
    let n = mesh.len();
    if n == 0 {
        return Err(Error::Geometry("mesh has no elements".into()));
    }
    let eps = mesh.epsilon();
    let diag = filament::self_inductance_norm(eps)?;

    // Occurring squared lattice distances.
    let mut occurs: Vec<bool> = Vec::new();
    for k in 0..n {
        let (ik, jk) = mesh.lattice[k];
        for s in 0..k {
            let (is, js) = mesh.lattice[s];
            let di = (ik - is) as i64;
            let dj = (jk - js) as i64;
            let d2 = (di * di + dj * dj) as usize;
            if d2 >= occurs.len() {
                occurs.resize(d2 + 1, false);
            }
            occurs[d2] = true;
        }
    }

    let keys: Vec<usize> = (1..occurs.len()).filter(|&d| occurs[d]).collect();
    let values: Vec<Result<f64>> = keys
        .par_iter()
        .map(|&d2| {
            let lat = 2.0 * (d2 as f64).sqrt();
            let p = RelativePlacement::new(lat, 0.0, 0.0, 1.0)?;
            filament::mutual_kz(&p)
        })
        .collect();
    let mut table = vec![0.0; occurs.len()];
    for (&d2, v) in keys.iter().zip(values) {
        table[d2] = v?;
    }

    let mut l = PackedSym::zeroed(n);
    for k in 0..n {
        let (ik, jk) = mesh.lattice[k];
        let base = k * (k + 1) / 2;
        for s in 0..k {
            let (is, js) = mesh.lattice[s];
            let di = (ik - is) as i64;
            let dj = (jk - js) as i64;
            l.data[base + s] = table[(di * di + dj * dj) as usize];
        }
        l.data[base + k] = diag;
    }

    Ok(Arc::new(ElementCore {
        n,
        epsilon: eps,
        grid_n: mesh.grid_n,
        rule: mesh.rule,
        lattice: mesh.lattice.clone(),
        l,
        chol: OnceLock::new(),
    }))
}

impl EddySystem {
    /// Assemble the full system at a pose.
    pub fn assemble(
        mesh: &Mesh,
        coils: &CoilSystem,
        pose: &Pose,
        impedance: ImpedanceMode,
    ) -> Result<Self> {
        let core = assemble_core(mesh)?;
        Self::assemble_shared(&core, mesh, coils, pose, impedance)
    }

    /// Assemble at a pose, reusing an element core built earlier (same
    /// lattice pattern and epsilon; checked).
    pub fn assemble_shared(
        core: &Arc<ElementCore>,
        mesh: &Mesh,
        coils: &CoilSystem,
        pose: &Pose,
        impedance: ImpedanceMode,
    ) -> Result<Self> {
        if !core.matches(mesh) {
            return Err(Error::Geometry(
                "element core does not match the mesh it is reused for".into(),
            ));
        }
        let coupling = coupling(mesh, coils, pose)?;
        Ok(Self {
            core: Arc::clone(core),
            coupling,
            pose: *pose,
            impedance,
            r_e: mesh.r_e,
            ldlt: OnceLock::new(),
        })
    }

    /// Re-assemble at a new pose, sharing the element matrix and its
    /// factorization.
    pub fn at_pose(&self, mesh: &Mesh, coils: &CoilSystem, pose: &Pose) -> Result<Self> {
        Self::assemble_shared(&self.core, mesh, coils, pose, self.impedance)
    }

    pub fn n(&self) -> usize {
        self.core.n
    }

    pub fn n_coils(&self) -> usize {
        self.coupling.n_coils
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn impedance(&self) -> &ImpedanceMode {
        &self.impedance
    }

    pub fn core(&self) -> &Arc<ElementCore> {
        &self.core
    }

    pub fn coupling_matrices(&self) -> &Coupling {
        &self.coupling
    }

    /// The sign convention baked into `solve`, recorded in output
    /// metadata.
    pub const SIGN_CONVENTION: &'static str = "I = -L^-1 Mc Ic (induced currents oppose drive)";

    /// Solve for the element currents driven by the dimensionless coil
    /// currents `i_c`.
    pub fn solve(&self, i_c: &[f64]) -> Result<EddySolution> {
        if i_c.len() != self.coupling.n_coils {
            return Err(Error::Input(format!(
                "expected {} coil currents, got {}",
                self.coupling.n_coils,
                i_c.len()
            )));
        }
        let b = self.coupling.rhs(i_c);
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();

        match self.impedance {
            ImpedanceMode::Ideal => {
                let factor = self.core.factor()?;
                let mut x = b.iter().map(|v| -v).collect::<Vec<f64>>();
                factor.solve_in_place(&mut x);

                // Residual ||L x + b|| / ||b||.
                let mut lx = vec![0.0; self.core.n];
                self.core.l.matvec(&x, &mut lx);
                let resid = lx
                    .iter()
                    .zip(&b)
                    .map(|(p, q)| (p + q) * (p + q))
                    .sum::<f64>()
                    .sqrt();
                let residual = if b_norm > 0.0 { resid / b_norm } else { 0.0 };

                Ok(EddySolution {
                    currents: x,
                    currents_imag: Vec::new(),
                    residual,
                })
            }
            ImpedanceMode::Resistive {
                resistance_ohm,
                frequency_rad_s,
            } => {
                if !(frequency_rad_s > 0.0) || resistance_ohm < 0.0 {
                    return Err(Error::Input(
                        "resistive mode needs R >= 0 and frequency > 0".into(),
                    ));
                }
                // R/(jf) = -j R/f, normalized by mu0 R_e like every other
                // inductance in the system.
                let shift = -resistance_ohm / (frequency_rad_s * crate::MU_0 * self.r_e);
                let f = self
                    .ldlt
                    .get_or_init(|| ComplexLdlt::factor(&self.core.l, shift))
                    .as_ref()
                    .map_err(|e| e.clone())?;
                let mut x: Vec<Complex64> =
                    b.iter().map(|v| Complex64::new(-v, 0.0)).collect();
                f.solve_in_place(&mut x);

                let xr: Vec<f64> = x.iter().map(|c| c.re).collect();
                let xi: Vec<f64> = x.iter().map(|c| c.im).collect();
                let mut lr = vec![0.0; self.core.n];
                let mut li = vec![0.0; self.core.n];
                self.core.l.matvec(&xr, &mut lr);
                self.core.l.matvec(&xi, &mut li);
                let mut resid = 0.0;
                for s in 0..self.core.n {
                    let re = lr[s] - shift * xi[s] + b[s];
                    let im = li[s] + shift * xr[s];
                    resid += re * re + im * im;
                }
                let residual = if b_norm > 0.0 {
                    resid.sqrt() / b_norm
                } else {
                    0.0
                };

                Ok(EddySolution {
                    currents: xr,
                    currents_imag: xi,
                    residual,
                })
            }
        }
    }

    /// Element radius the dimensionless scaling is based on (m).
    pub fn r_e(&self) -> f64 {
        self.r_e
    }
}

/// Element currents placed back on the plot grid, plus the magnitude of
/// the two-axis numerical gradient of that grid (central differences in
/// the interior, one-sided at the disc boundary, absent cells excluded).
/// The gradient magnitude is the surface-current-density pattern of the
/// stream-function interpretation.
pub fn current_maps(sol: &EddySolution, mesh: &Mesh) -> (GridMap, GridMap) {
    let g = mesh.grid_n;
    let mut grid = GridMap::empty(g);
    for (s, &(row, col)) in mesh.grid_index.iter().enumerate() {
        grid.set(row, col, sol.currents[s]);
    }

    let mut magnitude = GridMap::empty(g);
    for row in 0..g {
        for col in 0..g {
            if grid.get(row, col).is_none() {
                continue;
            }
            let axis = |a: Option<f64>, b: Option<f64>, center: f64| -> Option<f64> {
                match (a, b) {
                    (Some(lo), Some(hi)) => Some(0.5 * (hi - lo)),
                    (Some(lo), None) => Some(center - lo),
                    (None, Some(hi)) => Some(hi - center),
                    (None, None) => None,
                }
            };
            let center = grid.get(row, col).unwrap();
            let up = if row > 0 { grid.get(row - 1, col) } else { None };
            let down = if row + 1 < g { grid.get(row + 1, col) } else { None };
            let left = if col > 0 { grid.get(row, col - 1) } else { None };
            let right = if col + 1 < g { grid.get(row, col + 1) } else { None };
            let g_row = axis(up, down, center);
            let g_col = axis(left, right, center);
            if g_row.is_none() && g_col.is_none() {
                continue; // isolated element: no gradient defined
            }
            let gr = g_row.unwrap_or(0.0);
            let gc = g_col.unwrap_or(0.0);
            magnitude.set(row, col, gr.hypot(gc));
        }
    }
    (grid, magnitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filament::{mutual_kz, mutual_kz_pair};
    use crate::geometry::{build_solenoid, mesh_disc, Filament};

    fn single_element_mesh(r_e: f64) -> Mesh {
        Mesh {
            elements: vec![[0.0, 0.0]],
            lattice: vec![(0, 0)],
            grid_index: vec![(0, 0)],
            r_e,
            th: 0.2 * r_e,
            grid_n: 1,
            rule: MeshRule::CenterInside,
        }
    }

    fn two_coil_system() -> CoilSystem {
        // Levitation and stabilization solenoids of the experimental
        // prototype: 2000/3800 um diameters, 20/12 windings, 25 um pitch,
        // +1/-1 currents.
        let mut fils = build_solenoid(2.0e-3, 20, 25.0e-6, 0.0, 1.0).unwrap();
        fils.extend(build_solenoid(3.8e-3, 12, 25.0e-6, 0.0, -1.0).unwrap());
        CoilSystem::new(fils).unwrap()
    }

    #[test]
    fn single_element_closed_form() {
        // One element over one equal-radius loop: I = -Mbar ic / Lbar.
        let r_e = 5.0e-5;
        let mesh = single_element_mesh(r_e);
        let coil = Filament::new(r_e, [0.0, 0.0, -2.0 * r_e], 1.0).unwrap();
        let coils = CoilSystem::new(vec![coil]).unwrap();
        let pose = Pose::level(0.0);

        let sys = EddySystem::assemble(&mesh, &coils, &pose, ImpedanceMode::Ideal).unwrap();
        let sol = sys.solve(&[1.0]).unwrap();

        let m_bar = mutual_kz(&RelativePlacement::coaxial(2.0, 1.0).unwrap()).unwrap();
        let l_bar = filament::self_inductance_norm(0.1).unwrap();
        let expect = -m_bar / l_bar;
        assert!(
            ((sol.currents[0] - expect) / expect).abs() < 1e-12,
            "I = {}, expected {expect}",
            sol.currents[0]
        );
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn touching_neighbor_coupling_in_matrix() {
        let mesh = mesh_disc(3.0e-4, 3, 2.0e-5, MeshRule::CenterInside).unwrap();
        let core = assemble_core(&mesh).unwrap();
        // Elements 0 and 1 of the 9-element mesh are lattice neighbors.
        let (i0, j0) = mesh.lattice[0];
        let neighbor = mesh
            .lattice
            .iter()
            .position(|&(i, j)| (i - i0).abs() + (j - j0).abs() == 1)
            .unwrap();
        let expect = mutual_kz(&RelativePlacement::new(2.0, 0.0, 0.0, 1.0).unwrap()).unwrap();
        let got = core.l_entry(0, neighbor);
        assert!(
            ((got - expect) / expect).abs() < 1e-12,
            "matrix {got} vs kernel {expect}"
        );
    }

    #[test]
    fn element_matrix_shared_across_poses() {
        let mesh = mesh_disc(1.4e-3, 9, 3.0e-5, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let sys_a = EddySystem::assemble(
            &mesh,
            &coils,
            &Pose::level(2.0e-4),
            ImpedanceMode::Ideal,
        )
        .unwrap();
        let sys_b = sys_a
            .at_pose(&mesh, &coils, &Pose::level(1.6e-4))
            .unwrap();
        assert!(Arc::ptr_eq(sys_a.core(), sys_b.core()));
        // Couplings do change with the pose.
        assert_ne!(
            sys_a.coupling_matrices().mc[0],
            sys_b.coupling_matrices().mc[0]
        );
    }

    #[test]
    fn coupling_entries_match_direct_integrals() {
        let mesh = mesh_disc(1.4e-3, 5, 5.0e-5, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let pose = Pose::level(2.0e-4);
        let c = coupling(&mesh, &coils, &pose).unwrap();
        for &s in &[0usize, 3, mesh.len() - 1] {
            for &j in &[0usize, 5, coils.len() - 1] {
                let p = crate::geometry::relative_placement(
                    mesh.elements[s],
                    &coils.filaments[j],
                    &pose,
                    mesh.r_e,
                )
                .unwrap();
                let (m, d) = mutual_kz_pair(&p).unwrap();
                let scale = (coils.filaments[j].radius / mesh.r_e).sqrt();
                let got_m = c.mc[s * c.n_coils + j];
                let got_d = c.dmc_dx3[s * c.n_coils + j];
                assert!(((got_m - m * scale) / (m * scale)).abs() < 1e-12);
                assert!(((got_d - d * scale) / (d * scale)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_residual_energy_and_symmetry() {
        let mesh = mesh_disc(1.4e-3, 15, 1.0e-5, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let pose = Pose::level(2.0e-4);
        let sys = EddySystem::assemble(&mesh, &coils, &pose, ImpedanceMode::Ideal).unwrap();
        let sol = sys.solve(&coils.currents()).unwrap();

        assert!(sol.residual < 1e-10, "residual {}", sol.residual);
        let energy = sys.core().energy_form(&sol.currents);
        assert!(energy > 0.0, "element system energy form must be positive");

        // Same-orbit elements under the lattice dihedral symmetry carry
        // the same current for the coaxial excitation.
        let index: std::collections::HashMap<(i32, i32), usize> = mesh
            .lattice
            .iter()
            .enumerate()
            .map(|(s, &c)| (c, s))
            .collect();
        for (s, &(i, j)) in mesh.lattice.iter().enumerate() {
            for img in [(-i, j), (i, -j), (j, i), (-j, -i)] {
                let t = index[&img];
                let a = sol.currents[s];
                let b = sol.currents[t];
                assert!(
                    (a - b).abs() <= 1e-8 * a.abs().max(1e-300),
                    "orbit mismatch at ({i},{j}): {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn sign_pattern_negative_inside_positive_outside() {
        // 2.8 mm disc levitated at 200 um over the two-coil drive:
        // induced currents are negative under the levitation coil
        // (radius 1 mm) and positive toward the disc edge.
        let mesh = mesh_disc(1.4e-3, 21, 1.0e-5, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let pose = Pose::level(2.0e-4);
        let sys = EddySystem::assemble(&mesh, &coils, &pose, ImpedanceMode::Ideal).unwrap();
        let sol = sys.solve(&coils.currents()).unwrap();

        for (s, &[x1, x2]) in mesh.elements.iter().enumerate() {
            let r = x1.hypot(x2);
            if r <= 0.85e-3 {
                assert!(
                    sol.currents[s] < 0.0,
                    "element {s} at r = {r:e} should be negative, got {}",
                    sol.currents[s]
                );
            } else if r >= 1.15e-3 {
                assert!(
                    sol.currents[s] > 0.0,
                    "element {s} at r = {r:e} should be positive, got {}",
                    sol.currents[s]
                );
            }
        }
    }

    #[test]
    fn magnitude_map_peaks_at_coil_ring_and_disc_edge() {
        // 2.8 mm disc over the two-coil drive: the surface-current
        // pattern concentrates along the disc edge and on the ring at
        // the levitation-coil radius (1 mm), with a valley between.
        let r_disc = 1.4e-3;
        let mesh = mesh_disc(r_disc, 31, 0.2 * r_disc / 31.0, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let sys = EddySystem::assemble(&mesh, &coils, &Pose::level(2.0e-4), ImpedanceMode::Ideal)
            .unwrap();
        let sol = sys.solve(&coils.currents()).unwrap();
        let (_, mag) = current_maps(&sol, &mesh);

        let ring_mean = |lo: f64, hi: f64| -> f64 {
            let mut sum = 0.0;
            let mut count = 0;
            for (s, &(row, col)) in mesh.grid_index.iter().enumerate() {
                let r = mesh.elements[s][0].hypot(mesh.elements[s][1]);
                if r >= lo && r < hi {
                    sum += mag.get(row, col).unwrap();
                    count += 1;
                }
            }
            sum / count as f64
        };
        let center = ring_mean(0.0, 0.2e-3);
        let coil_ring = ring_mean(0.9e-3, 1.05e-3);
        let valley = ring_mean(1.2e-3, 1.32e-3);
        let edge = ring_mean(1.32e-3, 1.4e-3);
        assert!(
            coil_ring > 5.0 * center,
            "coil ring {coil_ring:e} must dominate the center {center:e}"
        );
        assert!(
            coil_ring > 2.0 * valley,
            "coil ring {coil_ring:e} must dominate the valley {valley:e}"
        );
        assert!(edge > valley, "edge {edge:e} must rise above the valley {valley:e}");
    }

    #[test]
    fn resistive_mode_small_resistance_matches_ideal() {
        let mesh = mesh_disc(1.0e-3, 7, 2.0e-5, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let pose = Pose::level(2.0e-4);
        let ideal = EddySystem::assemble(&mesh, &coils, &pose, ImpedanceMode::Ideal)
            .unwrap()
            .solve(&coils.currents())
            .unwrap();
        // 10 MHz drive with a tiny series resistance.
        let resist = EddySystem::assemble(
            &mesh,
            &coils,
            &pose,
            ImpedanceMode::Resistive {
                resistance_ohm: 1.0e-9,
                frequency_rad_s: 2.0 * std::f64::consts::PI * 1.0e7,
            },
        )
        .unwrap()
        .solve(&coils.currents())
        .unwrap();

        assert!(resist.residual < 1e-10);
        for s in 0..mesh.len() {
            let rel = (resist.currents[s] - ideal.currents[s]).abs()
                / ideal.currents[s].abs().max(1e-12);
            assert!(rel < 1e-6, "element {s}: ideal vs resistive {rel}");
            assert!(resist.currents_imag[s].abs() < ideal.currents[s].abs() * 1e-3);
        }
    }

    #[test]
    fn maps_uniform_field_and_degenerate_mesh() {
        let mesh = mesh_disc(1.0e-3, 7, 2.0e-5, MeshRule::CenterInside).unwrap();
        let uniform = EddySolution {
            currents: vec![3.5; mesh.len()],
            currents_imag: Vec::new(),
            residual: 0.0,
        };
        let (grid, magnitude) = current_maps(&uniform, &mesh);
        for (s, &(row, col)) in mesh.grid_index.iter().enumerate() {
            let _ = s;
            assert_eq!(grid.get(row, col), Some(3.5));
            assert_eq!(magnitude.get(row, col), Some(0.0));
        }

        let single = single_element_mesh(5.0e-5);
        let sol = EddySolution {
            currents: vec![1.0],
            currents_imag: Vec::new(),
            residual: 0.0,
        };
        let (g1, m1) = current_maps(&sol, &single);
        assert_eq!(g1.get(0, 0), Some(1.0));
        assert_eq!(m1.get(0, 0), None, "no neighbors, no gradient");
    }

    #[test]
    fn solve_rejects_wrong_current_count() {
        let mesh = mesh_disc(1.0e-3, 5, 4.0e-5, MeshRule::CenterInside).unwrap();
        let coils = two_coil_system();
        let sys = EddySystem::assemble(
            &mesh,
            &coils,
            &Pose::level(2.0e-4),
            ImpedanceMode::Ideal,
        )
        .unwrap();
        assert!(matches!(sys.solve(&[1.0]), Err(Error::Input(_))));
    }
}
