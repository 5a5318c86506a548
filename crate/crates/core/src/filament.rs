//! Self- and mutual-inductance kernels for circular filaments.
//!
//! Two coupling routes are provided. `mutual_maxwell_coaxial` is the
//! closed elliptic form for two equal coaxial loops. `mutual_kz` is the
//! general single line integral for a circular filament displaced both
//! laterally and axially from a circular element, valid as long as the
//! filament planes stay parallel (no angular misalignment). The two
//! routes agree on their common domain, which the tests exploit as a
//! cross-check.
//!
//! All couplings are returned dimensionless; `dimensional_mutual` maps
//! them back to henries via mu0 sqrt(R_cj R_e).

use crate::ellint::{self, psi_kernel};
use crate::error::{Error, Result};
use crate::MU_0;

/// Relative change between successive doublings at which the periodic
/// quadrature is accepted. The trapezoid rule converges spectrally on
/// these integrands, so the true error is typically far below this.
const QUAD_REL_TOL: f64 = 1e-11;
/// Initial number of nodes on the angular grid.
const QUAD_N0: usize = 64;
/// Hard cap on nodes; hitting it means near-touching geometry.
const QUAD_N_MAX: usize = 1 << 14;

/// Circular ring of circular cross-section: one mesh element of the
/// conducting layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingGeometry {
    /// Element radius (m).
    pub r_e: f64,
    /// Thickness of the meshed layer (m).
    pub th: f64,
}

impl RingGeometry {
    pub fn new(r_e: f64, th: f64) -> Result<Self> {
        if !(r_e > 0.0) || !(th > 0.0) {
            return Err(Error::Geometry(format!(
                "ring radius and thickness must be positive (R_e = {r_e}, th = {th})"
            )));
        }
        let g = Self { r_e, th };
        if g.epsilon() >= 1.0 {
            return Err(Error::Geometry(format!(
                "cross-section ratio epsilon = {} must be < 1",
                g.epsilon()
            )));
        }
        Ok(g)
    }

    /// Cross-section ratio th / (2 R_e).
    pub fn epsilon(&self) -> f64 {
        self.th / (2.0 * self.r_e)
    }

    /// The self-inductance formula degrades above epsilon = 0.1; callers
    /// that care surface this as a warning.
    pub fn exceeds_recommended_epsilon(&self) -> bool {
        self.epsilon() > 0.1
    }
}

/// Placement of a circular filament of radius `R_cj` relative to a
/// circular element of radius `R_e`, coordinates normalized by `R_e`.
///
/// `x1`, `x2` are the lateral offsets of the element center in the
/// filament frame, `x3` the axial offset, `nu = R_e / R_cj`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePlacement {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub nu: f64,
}

impl RelativePlacement {
    pub fn new(x1: f64, x2: f64, x3: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Geometry(format!(
                "radius ratio nu = {nu} must be positive"
            )));
        }
        if !(x1.is_finite() && x2.is_finite() && x3.is_finite()) {
            return Err(Error::Geometry(format!(
                "placement coordinates must be finite ({x1}, {x2}, {x3})"
            )));
        }
        Ok(Self { x1, x2, x3, nu })
    }

    /// Coaxial placement at axial offset `x3`.
    pub fn coaxial(x3: f64, nu: f64) -> Result<Self> {
        Self::new(0.0, 0.0, x3, nu)
    }

    fn lateral_distance(&self) -> f64 {
        self.x1.hypot(self.x2)
    }
}

/// Self-inductance (H) of a circular ring of circular cross-section:
/// L = mu0 R_e [ ln(8/eps) - 7/4 + eps^2/8 (ln(8/eps) + 1/3) ].
pub fn self_inductance_ring(g: &RingGeometry) -> Result<f64> {
    Ok(MU_0 * g.r_e * self_inductance_norm(g.epsilon())?)
}

/// The same self-inductance normalized by mu0 R_e; this is what enters
/// the dimensionless system diagonal.
pub fn self_inductance_norm(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Geometry(format!(
            "cross-section ratio epsilon = {eps} must lie in (0, 1)"
        )));
    }
    let ln_term = (8.0 / eps).ln();
    Ok(ln_term - 1.75 + eps * eps / 8.0 * (ln_term + 1.0 / 3.0))
}

/// Mutual inductance (H) of two coaxial loops of equal radius `r_l`
/// separated axially by `s`:
/// k^2 = 4 R^2 / (4 R^2 + s^2), M = mu0 R [ (2/k - k) K - (2/k) E ].
///
/// Evaluated as 2 mu0 R Psi(k)/k, which is the same expression without
/// the K - E cancellation in the far field.
pub fn mutual_maxwell_coaxial(r_l: f64, s: f64) -> Result<f64> {
    if !(r_l > 0.0) {
        return Err(Error::Geometry(format!(
            "loop radius must be positive, got {r_l}"
        )));
    }
    if s < 0.0 {
        return Err(Error::Geometry(format!(
            "axial separation must be >= 0, got {s}"
        )));
    }
    if s == 0.0 {
        return Err(Error::SingularGeometry(
            "coincident coaxial loops (s = 0) have divergent K".into(),
        ));
    }
    let k = (4.0 * r_l * r_l / (4.0 * r_l * r_l + s * s)).sqrt();
    Ok(2.0 * MU_0 * r_l * psi_kernel(k)? / k)
}

/// Dimensional mutual inductance (H) from the dimensionless coupling:
/// M = mu0 sqrt(R_cj R_e) Mbar.
pub fn dimensional_mutual(m_bar: f64, r_e: f64, r_cj: f64) -> f64 {
    MU_0 * (r_e * r_cj).sqrt() * m_bar
}

/// Dimensionless mutual inductance between a circular element and a
/// parallel circular filament:
///
/// Mbar = (1/pi) integral_0^2pi (1 + x1 cos p + x2 sin p) / rho^1.5
///        * Psi(k)/k dp,
///
/// with rho^2 = 1 + 2 (x1 cos p + x2 sin p) + x1^2 + x2^2 and
/// k^2 = 4 nu rho / ((nu rho + 1)^2 + nu^2 x3^2).
pub fn mutual_kz(p: &RelativePlacement) -> Result<f64> {
    Ok(mutual_kz_pair(p)?.0)
}

/// Axial derivative dMbar/dx3 of the coupling integral, via
/// Phi(k) = phi_bracket(k) dk/dx3 and
/// dk/dx3 = -nu^2 x3 sqrt(4 nu rho) / ((1 + nu rho)^2 + nu^2 x3^2)^(3/2).
///
/// Odd in x3; exactly zero in the coplanar configuration.
pub fn dmutual_kz_dx3(p: &RelativePlacement) -> Result<f64> {
    Ok(mutual_kz_pair(p)?.1)
}

/// Both the coupling integral and its axial derivative from one adaptive
/// quadrature pass. This is the building block the system assembly and
/// the force sums batch over.
///
/// The integral depends on the lateral offset only through its length,
/// so the placement is first rotated onto the x1 axis. Coplanar
/// configurations are classified before integrating: tangent circles
/// (lattice neighbors touch at one point) carry an integrable
/// logarithmic singularity and go through a double-exponential
/// quadrature; intersecting circles are rejected.
pub fn mutual_kz_pair(p: &RelativePlacement) -> Result<(f64, f64)> {
    let lat = p.lateral_distance();
    let rc = 1.0 / p.nu; // filament radius in units of R_e
    let span_min = (lat - 1.0).abs();
    let span_max = lat + 1.0;
    let class_tol = 1e-8 * span_max;

    if p.x3 == 0.0 {
        if lat == 0.0 && (rc - 1.0).abs() <= class_tol {
            return Err(Error::SingularGeometry(
                "coincident filaments (zero offset, equal radii)".into(),
            ));
        }
        let outer = (rc - span_max).abs() <= class_tol;
        let inner = (rc - span_min).abs() <= class_tol;
        if outer || inner {
            // Tangent circles: dMbar/dx3 vanishes identically at x3 = 0.
            return Ok((tangent_coupling(lat, p.nu, inner), 0.0));
        }
        if rc > span_min && rc < span_max {
            return Err(Error::SingularGeometry(format!(
                "coplanar circles intersect (lateral {lat:.6}, radius ratio {:.6})",
                p.nu
            )));
        }
    }

    let mut n = QUAD_N0;
    let (mut sum_m, mut sum_d, mut abs_m, mut abs_d) = angular_sum(lat, p.x3, p.nu, n, 1)?;

    loop {
        // Refine with the midpoints only; the previous nodes are reused.
        let (odd_m, odd_d, odd_abs_m, odd_abs_d) = angular_sum(lat, p.x3, p.nu, 2 * n, 2)?;
        let prev_m = sum_m / n as f64;
        let prev_d = sum_d / n as f64;
        sum_m += odd_m;
        sum_d += odd_d;
        abs_m += odd_abs_m;
        abs_d += odd_abs_d;
        n *= 2;

        let cur_m = sum_m / n as f64;
        let cur_d = sum_d / n as f64;
        // Large lateral offsets make the integrand oscillate with heavy
        // cancellation; the value can sit orders of magnitude below the
        // absolute integrand, where rounding noise caps the attainable
        // relative accuracy. The floor tracks that noise level.
        let floor_m = 1e-14 * abs_m / n as f64;
        let floor_d = 1e-14 * abs_d / n as f64;
        let ok_m = (cur_m - prev_m).abs() <= QUAD_REL_TOL * cur_m.abs() + floor_m;
        let ok_d = (cur_d - prev_d).abs() <= QUAD_REL_TOL * cur_d.abs() + floor_d;
        if ok_m && ok_d {
            // (1/pi) * (2 pi / n) * sum = 2 sum / n.
            return Ok((2.0 * sum_m / n as f64, 2.0 * sum_d / n as f64));
        }
        if n >= QUAD_N_MAX {
            return Err(Error::SingularGeometry(format!(
                "coupling quadrature did not converge at {n} nodes \
                 (lateral {lat:.6}, axial {:.6}, nu {:.6}): near-touching filaments",
                p.x3, p.nu
            )));
        }
    }
}

/// Coupling of coplanar circles tangent at one point, where the modulus
/// reaches 1 at the tangency angle and the integrand carries an
/// integrable log singularity.
///
/// The angle is measured from the tangency point (phi = 0 for outer
/// tangency, phi = pi for inner), giving the cancellation-free forms
///   rho^2 = (lat + 1)^2 - 4 lat sin^2(d/2)   (outer)
///   rho^2 = (lat - 1)^2 + 4 lat sin^2(d/2)   (inner)
/// and k'^2 = (1 - nu rho)^2 / (1 + nu rho)^2 evaluated through
/// nu^2 rho^2 - 1 directly. tanh-sinh nodes then resolve the endpoint
/// singularity to near machine precision.
fn tangent_coupling(lat: f64, nu: f64, inner: bool) -> f64 {
    let nu2 = nu * nu;
    // nu^2 rho^2 - 1 at the tangency point; zero for exact tangency,
    // kept as an offset so near-tangent inputs remain correct.
    let base = if inner { (lat - 1.0) * (lat - 1.0) } else { (lat + 1.0) * (lat + 1.0) };
    let offset = nu2 * base - 1.0;

    let integrand = |delta: f64| -> f64 {
        let s2 = {
            let s = (0.5 * delta).sin();
            4.0 * lat * s * s
        };
        let (rho2, q) = if inner {
            ((lat - 1.0) * (lat - 1.0) + s2, offset + nu2 * s2)
        } else {
            ((lat + 1.0) * (lat + 1.0) - s2, offset - nu2 * s2)
        };
        let rho = rho2.sqrt();
        let u = nu * rho;
        let one_plus_u = 1.0 + u;
        // q = u^2 - 1, so k'^2 = (1 - u)^2/(1 + u)^2 without cancellation.
        let kp2 = (q / (one_plus_u * one_plus_u)).powi(2).max(f64::MIN_POSITIVE);
        let k2 = (4.0 * u / (one_plus_u * one_plus_u)).min(1.0);
        let kernel = crate::ellint::psi_over_k_near_one(k2.sqrt(), kp2.min(1.0));
        // t = lat cos(phi): phi = delta (outer) or pi - delta (inner).
        let t = if inner { -lat * delta.cos() } else { lat * delta.cos() };
        (1.0 + t) / (rho2 * rho).sqrt() * kernel
    };

    // Mbar = (1/pi) * 2 * int_0^pi f(delta) d delta by symmetry.
    (2.0 / std::f64::consts::PI) * tanh_sinh(integrand, 0.0, std::f64::consts::PI)
}

/// Double-exponential (tanh-sinh) quadrature on (a, b), tolerant of
/// integrable endpoint singularities.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    const U_MAX: f64 = 4.0;

    let sum_at = |h: f64| -> f64 {
        let mut sum = 0.0;
        let mut j = 0usize;
        loop {
            let u = j as f64 * h;
            if u > U_MAX {
                break;
            }
            let s = FRAC_PI_2 * u.sinh();
            let w = FRAC_PI_2 * u.cosh() / (s.cosh() * s.cosh());
            let t = s.tanh();
            let contrib = if j == 0 {
                w * f(center)
            } else {
                w * (f(center + half * t) + f(center - half * t))
            };
            sum += contrib;
            j += 1;
        }
        sum * h * half
    };

    let mut h = 0.5;
    let mut prev = sum_at(h);
    for _ in 0..6 {
        h *= 0.5;
        let cur = sum_at(h);
        if (cur - prev).abs() <= 1e-13 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Sum of the two integrands over the angular grid of `n` nodes in the
/// rotated frame where the lateral offset lies on the x1 axis, taking
/// every node when `stride` is 1 or only the odd (midpoint) nodes when
/// `stride` is 2.
fn angular_sum(
    lat: f64,
    x3: f64,
    nu: f64,
    n: usize,
    stride: usize,
) -> Result<(f64, f64, f64, f64)> {
    let start = if stride == 2 { 1 } else { 0 };
    let dphi = 2.0 * std::f64::consts::PI / n as f64;
    let lat2 = lat * lat;
    let x3sq = x3 * x3;

    let mut sum_m = 0.0;
    let mut sum_d = 0.0;
    let mut abs_m = 0.0;
    let mut abs_d = 0.0;

    let mut i = start;
    while i < n {
        let phi = i as f64 * dphi;
        let t = lat * phi.cos();
        let rho2 = 1.0 + 2.0 * t + lat2;
        if rho2 < 1e-18 {
            // The element circle crosses the filament axis here; both the
            // geometric prefactor and the kernel vanish in that limit, so
            // the node contributes nothing.
            i += stride;
            continue;
        }
        let rho = rho2.sqrt();
        let nu_rho = nu * rho;
        let denom = (nu_rho + 1.0) * (nu_rho + 1.0) + nu * nu * x3sq;
        let k = (4.0 * nu_rho / denom).sqrt();

        let (psi_over_k, phi_br) = ellint::kernel_pair(k).map_err(|_| {
            Error::SingularGeometry(format!(
                "touching or intersecting filaments (k -> 1 at angle {phi:.4})"
            ))
        })?;

        let front = (1.0 + t) / (rho2 * rho).sqrt();
        let fm = front * psi_over_k;
        sum_m += fm;
        abs_m += fm.abs();

        if x3 != 0.0 {
            let dk_dx3 = -nu * nu * x3 * (4.0 * nu_rho).sqrt() / (denom * denom.sqrt());
            let fd = front * phi_br * dk_dx3;
            sum_d += fd;
            abs_d += fd.abs();
        }
        i += stride;
    }
    Ok((sum_m, sum_d, abs_m, abs_d))
}
