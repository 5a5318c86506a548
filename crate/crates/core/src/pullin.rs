//! Static pull-in analysis: equilibrium curves beta(lambda), the pull-in
//! point at the curve maximum, and dimensionalization back to volts and
//! meters.
//!
//! beta = A0 U^2 / (4 m g h^2) is the squared electrode voltage and
//! lambda = q3 / h the displacement toward the electrodes (negative on
//! the physical branch; results report |lambda_p|). Three models of
//! decreasing fidelity produce the curve:
//!
//! * quasi-FEM: the magnetic force comes from the full filament-mesh
//!   eddy solve, re-solved at every lambda;
//! * analytical: the induced current is approximated by one circuit at
//!   the levitation-coil radius, giving a closed elliptic form;
//! * simplified: the small-kappa linearization of the analytical model,
//!   with the pull-in point at exactly lambda = -1/3.
//!
//! All three calibrate their force scale at the unperturbed equilibrium
//! (lambda = 0, beta = 0), which removes the coil current amplitude from
//! the problem.

use std::sync::Arc;

use crate::eddy::{ElementCore, ImpedanceMode};
use crate::ellint::{phi_bracket, psi_kernel};
use crate::error::{Error, Result};
use crate::levforce::LevitationForces;
pub use crate::scenario::ActuatorScenario;

/// Relative width of the golden-section bracket at which the pull-in
/// point is accepted.
const REFINE_TOL: f64 = 1e-4;
/// Default lower end of the sampled displacement range.
const LAMBDA_MIN: f64 = -0.9;

/// Which pull-in model produced a curve or result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    QuasiFem,
    Analytical,
    Simplified,
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelTag::QuasiFem => write!(f, "quasi-fem"),
            ModelTag::Analytical => write!(f, "analytical"),
            ModelTag::Simplified => write!(f, "simplified"),
        }
    }
}

/// A sampled equilibrium curve. `samples` hold (lambda, beta) pairs in
/// ascending lambda; samples where the model failed are recorded in
/// `skipped` with the reason.
#[derive(Debug, Clone)]
pub struct PullInCurve {
    pub model: ModelTag,
    pub samples: Vec<(f64, f64)>,
    pub skipped: Vec<(f64, String)>,
}

/// Pull-in point extracted from an equilibrium curve.
#[derive(Debug, Clone)]
pub struct PullInResult {
    pub model: ModelTag,
    /// |lambda_p|: pull-in displacement as a fraction of the gap.
    pub lambda_p: f64,
    /// beta at the curve maximum.
    pub beta_p: f64,
    pub sqrt_beta_p: f64,
    /// Calibration constant of the model that produced the curve, when
    /// the model has one (quasi-FEM eta0 or analytical eta).
    pub eta0: Option<f64>,
}

/// Dimensional pull-in parameters.
#[derive(Debug, Clone, Copy)]
pub struct DimensionalPullIn {
    /// Pull-in voltage (V).
    pub u_p_volts: f64,
    /// Pull-in displacement (m).
    pub q_p_m: f64,
    /// Voltage normalization sqrt(4 m g h^2 / A0) (V).
    pub u_norm_volts: f64,
}

/// A static pull-in model: beta as a function of lambda on (-1, 0].
pub trait PullInModel {
    fn tag(&self) -> ModelTag;
    fn beta(&self, lambda: f64) -> Result<f64>;
    /// Calibration constant, when the model defines one.
    fn calibration(&self) -> Option<f64> {
        None
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(-1.0 < lambda && lambda <= 0.0) {
        return Err(Error::Input(format!(
            "lambda = {lambda} outside the physical range (-1, 0]"
        )));
    }
    Ok(())
}

/// Simplified closed-form model:
/// beta = -[ln(4/xi) - 1] / [ln(4/xi) - 2] kappa lambda (1 + lambda)^2.
/// Valid for ln(4/xi) > 2, i.e. xi < 4/e^2.
#[derive(Debug, Clone, Copy)]
pub struct SimplifiedModel {
    pub xi: f64,
    pub kappa: f64,
    factor: f64,
}

impl SimplifiedModel {
    pub fn new(xi: f64, kappa: f64) -> Result<Self> {
        if !(xi > 0.0 && kappa > 0.0) {
            return Err(Error::Input("xi and kappa must be positive".into()));
        }
        let ln_term = (4.0 / xi).ln();
        if ln_term <= 2.0 {
            return Err(Error::ModelValidity(format!(
                "simplified model needs ln(4/xi) > 2 (xi < 4/e^2), got xi = {xi}"
            )));
        }
        Ok(Self {
            xi,
            kappa,
            factor: (ln_term - 1.0) / (ln_term - 2.0),
        })
    }

    /// Closed-form pull-in point: lambda_p = -1/3,
    /// beta_p = factor * kappa * 4/27.
    pub fn closed_form_pullin(&self) -> (f64, f64) {
        (1.0 / 3.0, self.factor * self.kappa * 4.0 / 27.0)
    }
}

impl PullInModel for SimplifiedModel {
    fn tag(&self) -> ModelTag {
        ModelTag::Simplified
    }

    fn beta(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(-self.factor * self.kappa * lambda * (1.0 + lambda) * (1.0 + lambda))
    }
}

/// Analytical single-circuit model: the eddy current is reduced to one
/// circuit at the levitation-coil radius and the force becomes a closed
/// elliptic expression with modulus k^2 = 1 / (1 + xi^2 (1 + kappa
/// lambda)^2). The force scale eta is fixed at equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticalModel {
    pub xi: f64,
    pub kappa: f64,
    /// Force term at lambda = 0; eta = 1 / g0.
    g0: f64,
}

impl AnalyticalModel {
    pub fn new(xi: f64, kappa: f64) -> Result<Self> {
        if !(xi > 0.0 && kappa > 0.0) {
            return Err(Error::Input("xi and kappa must be positive".into()));
        }
        let g0 = Self::force_term(0.0, xi, kappa)?;
        if g0 == 0.0 {
            return Err(Error::ModelValidity(
                "degenerate geometry: no magnetic force at equilibrium".into(),
            ));
        }
        Ok(Self { xi, kappa, g0 })
    }

    /// Magnetic force term of the dimensionless vertical model:
    /// [(2/k - k) K - (2/k) E] (2/k^2) [(2 - k^2)/(2(1 - k^2)) E - K]
    /// kappa xi^2 (1 + kappa lambda) / (1 + xi^2 (1 + kappa lambda)^2)^(3/2),
    /// evaluated through the cancellation-free kernels
    /// 4 (Psi(k)/k) phi_bracket(k).
    fn force_term(lambda: f64, xi: f64, kappa: f64) -> Result<f64> {
        let stretch = 1.0 + kappa * lambda;
        let denom = 1.0 + xi * xi * stretch * stretch;
        let k = (1.0 / denom).sqrt();
        let psi_over_k = psi_kernel(k)? / k;
        let phi = phi_bracket(k)?;
        Ok(4.0 * psi_over_k * phi * kappa * xi * xi * stretch / denom.powf(1.5))
    }

    /// The calibration constant eta = 1 / force_term(0).
    pub fn eta(&self) -> f64 {
        1.0 / self.g0
    }
}

impl PullInModel for AnalyticalModel {
    fn tag(&self) -> ModelTag {
        ModelTag::Analytical
    }

    fn beta(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let g = Self::force_term(lambda, self.xi, self.kappa)?;
        Ok((1.0 + lambda) * (1.0 + lambda) * (g / self.g0 - 1.0))
    }

    fn calibration(&self) -> Option<f64> {
        Some(self.eta())
    }
}

/// Quasi-FEM model: beta = -(1 + lambda)^2 (1 + eta0 F_m(lambda)) with
/// the magnetic force summed over every element-winding pair and the
/// eddy currents re-solved at each lambda. eta0 = -1/F_m(0) is computed
/// once per scenario.
pub struct QuasiFemModel {
    forces: LevitationForces,
    eta0: f64,
}

impl QuasiFemModel {
    pub fn new(scenario: &ActuatorScenario) -> Result<Self> {
        let mesh = scenario.build_mesh()?;
        let core = crate::eddy::assemble_core(&mesh)?;
        Self::with_parts(scenario, scenario.mesh.grid_n, scenario.mesh.rule, &core)
    }

    /// Build at explicit fidelity, reusing a matching element core when
    /// one is supplied (the core depends only on the lattice pattern and
    /// epsilon, so scenarios sharing a grid share the factorization).
    pub fn with_fidelity(
        scenario: &ActuatorScenario,
        grid_n: usize,
        rule: crate::geometry::MeshRule,
        core: Option<&Arc<ElementCore>>,
    ) -> Result<Self> {
        match core {
            Some(c) => Self::with_parts(scenario, grid_n, rule, c),
            None => {
                let mesh = scenario.build_mesh_with(grid_n, rule)?;
                let core = crate::eddy::assemble_core(&mesh)?;
                Self::with_parts(scenario, grid_n, rule, &core)
            }
        }
    }

    fn with_parts(
        scenario: &ActuatorScenario,
        grid_n: usize,
        rule: crate::geometry::MeshRule,
        core: &Arc<ElementCore>,
    ) -> Result<Self> {
        let mesh = scenario.build_mesh_with(grid_n, rule)?;
        let coils = scenario.build_coils()?;
        let forces = LevitationForces::with_core(
            core,
            mesh,
            coils,
            scenario.levitation.height_m,
            scenario.electrodes.spacing_h_m,
            ImpedanceMode::Ideal,
        )?;
        let fm0 = forces.fm(0.0)?;
        if fm0 == 0.0 {
            return Err(Error::ModelValidity(
                "no magnetic force at equilibrium; cannot calibrate".into(),
            ));
        }
        Ok(Self {
            forces,
            eta0: -1.0 / fm0,
        })
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn forces(&self) -> &LevitationForces {
        &self.forces
    }

    /// The dimensionless magnetic force sum at lambda.
    pub fn fm(&self, lambda: f64) -> Result<f64> {
        self.forces.fm(lambda)
    }

    pub fn core(&self) -> &Arc<ElementCore> {
        self.forces.core()
    }
}

impl PullInModel for QuasiFemModel {
    fn tag(&self) -> ModelTag {
        ModelTag::QuasiFem
    }

    fn beta(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let fm = self.forces.fm(lambda)?;
        Ok(-(1.0 + lambda) * (1.0 + lambda) * (1.0 + self.eta0 * fm))
    }

    fn calibration(&self) -> Option<f64> {
        Some(self.eta0)
    }
}

/// One-shot evaluation of the simplified model.
pub fn beta_simplified(lambda: f64, xi: f64, kappa: f64) -> Result<f64> {
    SimplifiedModel::new(xi, kappa)?.beta(lambda)
}

/// One-shot evaluation of the analytical model.
pub fn beta_analytical(lambda: f64, xi: f64, kappa: f64) -> Result<f64> {
    AnalyticalModel::new(xi, kappa)?.beta(lambda)
}

/// Sample the equilibrium curve on a uniform lambda grid over
/// [LAMBDA_MIN, 0]. Samples where the model errors are flagged and
/// skipped rather than aborting the sweep.
pub fn trace_curve(model: &dyn PullInModel, n_samples: usize) -> Result<PullInCurve> {
    if n_samples < 5 {
        return Err(Error::Input(format!(
            "n_samples must be >= 5, got {n_samples}"
        )));
    }
    let mut samples = Vec::with_capacity(n_samples);
    let mut skipped = Vec::new();
    for i in 0..n_samples {
        // Ascending lambda: LAMBDA_MIN up to 0.
        let lambda = LAMBDA_MIN * (n_samples - 1 - i) as f64 / (n_samples - 1) as f64;
        match model.beta(lambda) {
            Ok(beta) => samples.push((lambda, beta)),
            Err(e) => skipped.push((lambda, e.to_string())),
        }
    }
    if samples.is_empty() {
        return Err(Error::NoPullIn("every curve sample failed".into()));
    }
    Ok(PullInCurve {
        model: model.tag(),
        samples,
        skipped,
    })
}

/// Locate the pull-in point: the interior maximum of the sampled curve,
/// refined by golden-section search to |delta lambda| <= 1e-4.
pub fn find_pullin(model: &dyn PullInModel, curve: &PullInCurve) -> Result<PullInResult> {
    let s = &curve.samples;
    if s.len() < 3 {
        return Err(Error::NoPullIn("curve has fewer than three valid samples".into()));
    }
    let mut best = 0usize;
    for (i, &(_, beta)) in s.iter().enumerate() {
        if beta > s[best].1 {
            best = i;
        }
    }
    if best == 0 || best == s.len() - 1 || s[best].1 <= 0.0 {
        return Err(Error::NoPullIn(
            "equilibrium curve has no interior maximum (no fold on the sampled branch)".into(),
        ));
    }
    if s[best].1 == s[best - 1].1 && s[best].1 == s[best + 1].1 {
        return Err(Error::NoPullIn("equilibrium curve is flat around its maximum".into()));
    }

    let (mut a, mut b) = (s[best - 1].0, s[best + 1].0);
    // Golden-section search for the maximum of beta on [a, b].
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = model.beta(x1)?;
    let mut f2 = model.beta(x2)?;
    while (b - a).abs() > REFINE_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = model.beta(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = model.beta(x1)?;
        }
    }
    let lambda_p = 0.5 * (a + b);
    let beta_p = model.beta(lambda_p)?;

    Ok(PullInResult {
        model: curve.model,
        lambda_p: lambda_p.abs(),
        beta_p,
        sqrt_beta_p: beta_p.max(0.0).sqrt(),
        eta0: model.calibration(),
    })
}

/// Convenience: trace the curve and extract the pull-in point.
pub fn pullin_of(model: &dyn PullInModel, n_samples: usize) -> Result<(PullInCurve, PullInResult)> {
    let curve = trace_curve(model, n_samples)?;
    let result = find_pullin(model, &curve)?;
    Ok((curve, result))
}

/// Map a dimensionless pull-in point to volts and meters:
/// U_p = sqrt(4 m g h^2 beta_p / A0), q_p = lambda_p h.
pub fn dimensionalize(result: &PullInResult, scenario: &ActuatorScenario) -> DimensionalPullIn {
    let u_norm = scenario.voltage_scale();
    DimensionalPullIn {
        u_p_volts: u_norm * result.sqrt_beta_p,
        q_p_m: result.lambda_p * scenario.electrodes.spacing_h_m,
        u_norm_volts: u_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn simplified_matches_closed_form() {
        // xi = 0.125, kappa = 0.04: shape factor (ln 32 - 1)/(ln 32 - 2).
        let m = SimplifiedModel::new(0.125, 0.04).unwrap();
        let ln32 = 32.0_f64.ln();
        let factor = (ln32 - 1.0) / (ln32 - 2.0);
        assert!((m.factor - factor).abs() < 1e-14);
        assert_eq!(m.beta(0.0).unwrap(), 0.0);
        let beta_third = m.beta(-1.0 / 3.0).unwrap();
        assert!(
            (beta_third - factor * 0.04 * 4.0 / 27.0).abs() < 1e-15,
            "beta(-1/3) = {beta_third}"
        );
        // ~0.00997 for this geometry.
        assert!((beta_third - 0.00997).abs() < 5e-6);
        assert!(m.beta(-1.0 + 1e-12).unwrap().abs() < 1e-10);
    }

    #[test]
    fn simplified_validity_bound() {
        // ln(4/xi) <= 2 <=> xi >= 4/e^2 = 0.5413.
        assert!(matches!(
            SimplifiedModel::new(0.6, 0.1),
            Err(Error::ModelValidity(_))
        ));
        assert!(SimplifiedModel::new(0.5, 0.1).is_ok());
    }

    #[test]
    fn simplified_pullin_exact_for_random_parameters() {
        let mut state = 17u64;
        for _ in 0..100 {
            let xi = 0.02 + 0.5 * lcg(&mut state);
            let kappa = 0.01 + 0.8 * lcg(&mut state);
            let Ok(m) = SimplifiedModel::new(xi, kappa) else {
                continue;
            };
            let curve = trace_curve(&m, 15).unwrap();
            let res = find_pullin(&m, &curve).unwrap();
            let (lambda_exact, beta_exact) = m.closed_form_pullin();
            assert!(
                (res.lambda_p - lambda_exact).abs() <= REFINE_TOL,
                "xi {xi} kappa {kappa}: lambda_p {}",
                res.lambda_p
            );
            assert!(
                (res.beta_p - beta_exact).abs() <= 1e-10 + 1e-7 * beta_exact,
                "xi {xi} kappa {kappa}: beta_p {} vs {beta_exact}",
                res.beta_p
            );
        }
    }

    #[test]
    fn analytical_calibration_and_table_values() {
        // Preliminary design: xi = 0.125, kappa = 0.04.
        let m = AnalyticalModel::new(0.125, 0.04).unwrap();
        assert_eq!(m.beta(0.0).unwrap(), 0.0);
        // Positive beta on the physical branch.
        assert!(m.beta(-0.2).unwrap() > 0.0);
        let (curve, res) = pullin_of(&m, 15).unwrap();
        assert_eq!(curve.model, ModelTag::Analytical);
        // Pull-in near |lambda| = 0.34 with sqrt(beta) near 0.102.
        assert!((res.lambda_p - 0.34).abs() < 0.005, "lambda_p {}", res.lambda_p);
        assert!(
            (res.sqrt_beta_p - 0.102).abs() < 0.001,
            "sqrt_beta_p {}",
            res.sqrt_beta_p
        );
    }

    #[test]
    fn analytical_close_to_simplified_at_small_kappa() {
        // kappa = 0.04. Pointwise, the linearization tracks the full
        // elliptic form to within ~5% over the pre-pull-in branch
        // (direct numerical comparison puts the worst case at 5.1%);
        // the pull-in voltages agree well within 5%.
        let xi = 0.125;
        let kappa = 0.04;
        let full = AnalyticalModel::new(xi, kappa).unwrap();
        let lin = SimplifiedModel::new(xi, kappa).unwrap();
        for i in 1..=25 {
            let lambda = -0.5 * i as f64 / 25.0;
            let a = full.beta(lambda).unwrap();
            let s = lin.beta(lambda).unwrap();
            assert!(
                ((a - s) / a).abs() < 0.06,
                "lambda {lambda}: analytical {a} vs simplified {s}"
            );
        }
        let res_full = pullin_of(&full, 15).unwrap().1;
        let res_lin = pullin_of(&lin, 15).unwrap().1;
        let dv = (res_full.sqrt_beta_p - res_lin.sqrt_beta_p).abs() / res_full.sqrt_beta_p;
        assert!(dv < 0.05, "pull-in voltage deviation {dv}");
    }

    #[test]
    fn slope_vanishes_at_refined_pullin_point() {
        // The refined maximum is a stationary point: the curve slope
        // there is bounded by curvature times the bracket width.
        let models: [&dyn PullInModel; 2] = [
            &SimplifiedModel::new(0.125, 0.04).unwrap(),
            &AnalyticalModel::new(0.1, 0.595).unwrap(),
        ];
        for model in models {
            let (_, res) = pullin_of(model, 15).unwrap();
            let lp = -res.lambda_p;
            let d = 1e-6;
            let slope = (model.beta(lp + d).unwrap() - model.beta(lp - d).unwrap()) / (2.0 * d);
            // Scale: |beta''| is O(10 beta_p) for these curves, and the
            // bracket is 1e-4 wide.
            assert!(
                slope.abs() <= 20.0 * res.beta_p * REFINE_TOL,
                "{}: slope {slope:e} at lambda_p {lp}",
                model.tag()
            );
        }
    }

    #[test]
    fn failing_samples_are_flagged_and_skipped() {
        // A model that errors on the deep end of the sweep: the failed
        // samples land in `skipped` and the pull-in extraction still
        // works on the surviving branch.
        struct Partial(SimplifiedModel);
        impl PullInModel for Partial {
            fn tag(&self) -> ModelTag {
                ModelTag::Simplified
            }
            fn beta(&self, lambda: f64) -> Result<f64> {
                if lambda < -0.6 {
                    return Err(Error::SingularGeometry("synthetic failure".into()));
                }
                self.0.beta(lambda)
            }
        }
        let m = Partial(SimplifiedModel::new(0.125, 0.04).unwrap());
        let curve = trace_curve(&m, 15).unwrap();
        assert!(!curve.skipped.is_empty());
        assert!(curve.samples.len() + curve.skipped.len() == 15);
        assert!(curve.skipped.iter().all(|(l, _)| *l < -0.6));
        let res = find_pullin(&m, &curve).unwrap();
        assert!((res.lambda_p - 1.0 / 3.0).abs() <= 1e-4);
    }

    #[test]
    fn curve_tracing_and_degenerate_curves() {
        let m = SimplifiedModel::new(0.125, 0.04).unwrap();
        assert!(matches!(trace_curve(&m, 4), Err(Error::Input(_))));
        let c5 = pullin_of(&m, 5).unwrap().1;
        let c15 = pullin_of(&m, 15).unwrap().1;
        assert!((c5.lambda_p - c15.lambda_p).abs() <= 2.0 * REFINE_TOL);

        // A flat curve has no interior maximum.
        struct Flat;
        impl PullInModel for Flat {
            fn tag(&self) -> ModelTag {
                ModelTag::Simplified
            }
            fn beta(&self, _: f64) -> Result<f64> {
                Ok(1.0)
            }
        }
        let flat_curve = trace_curve(&Flat, 9).unwrap();
        assert!(matches!(
            find_pullin(&Flat, &flat_curve),
            Err(Error::NoPullIn(_))
        ));
    }

    #[test]
    fn dimensionalization_identities() {
        let res = PullInResult {
            model: ModelTag::Simplified,
            lambda_p: 1.0 / 3.0,
            beta_p: 0.0,
            sqrt_beta_p: 0.0,
            eta0: None,
        };
        let scenario = ActuatorScenario::from_json(
            r#"{
                "disc": {"radius_m": 1.2e-3, "mass_kg": 2.0e-7},
                "mesh": {"grid_n": 31, "rule": "center-inside"},
                "coils": [{"diameter_m": 2.0e-3, "windings": 1, "pitch_m": 0.0, "z_top_m": 0.0, "current_rel": 1.0}],
                "electrodes": {"area_m2": 8.0e-7, "spacing_h_m": 1.0e-4},
                "levitation": {"height_m": 1.8e-4}
            }"#,
        )
        .unwrap();
        let dim = dimensionalize(&res, &scenario);
        assert_eq!(dim.u_p_volts, 0.0);
        assert!((dim.q_p_m - 1.0e-4 / 3.0).abs() < 1e-18);
        assert!((dim.u_norm_volts - 105.3).abs() < 0.05);
    }
}
