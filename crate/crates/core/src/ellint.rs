//! Complete elliptic integrals of the first and second kind plus the
//! composite kernels used by the filament inductance integrals.
//!
//! The modulus convention is fixed crate-wide: every function here takes
//! the modulus `k`, not the parameter `m = k^2`. Callers that start from
//! a `k^2` expression must take the square root first.

use crate::error::{Error, Result};

/// Largest admissible `k^2`. Above this the first-kind integral is within
/// noise of its logarithmic blow-up and upstream geometry is effectively
/// touching, so we refuse to evaluate.
const K2_MAX: f64 = 1.0 - 1e-12;

/// AGM termination: relative gap between the arithmetic and geometric
/// iterates. Convergence is quadratic, so the iteration cap is only a
/// guard against non-finite input sneaking through.
const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 40;

/// Below this modulus the kernels `psi_kernel` and `phi_bracket` switch
/// from the K/E difference form to power series: the difference form
/// cancels to O(k^4) and loses all relative accuracy as k -> 0.
const SERIES_SWITCH: f64 = 0.5;

/// Complete elliptic integrals K(k) and E(k) evaluated together.
///
/// For k in [0, 1): K >= pi/2, E <= pi/2, K(0) = E(0) = pi/2; K grows
/// without bound as k -> 1 while E(1) = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPair {
    /// First kind, K(k).
    pub k: f64,
    /// Second kind, E(k).
    pub e: f64,
}

fn check_modulus(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!("modulus out of range: k = {k}")));
    }
    if k * k > K2_MAX {
        return Err(Error::Domain(format!(
            "modulus out of range: k = {k} (k^2 > 1 - 1e-12)"
        )));
    }
    Ok(())
}

/// Both complete elliptic integrals by the arithmetic-geometric mean.
///
/// K = pi / (2 agm(1, k')) and E = K (1 - sum 2^(n-1) c_n^2) with
/// c_0 = k, c_n = (a_(n-1) - b_(n-1))/2. Quadratic convergence gives
/// full f64 accuracy in at most ~8 iterations for any admissible k.
pub fn complete_elliptic(k: f64) -> Result<EllipticPair> {
    check_modulus(k)?;

    let mut a = 1.0_f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut c2_sum = 0.5 * k * k; // 2^(-1) c_0^2
    let mut pow2 = 0.5;

    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        let cn = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        c2_sum += pow2 * cn * cn;
    }

    let big_k = std::f64::consts::FRAC_PI_2 / a;
    let big_e = big_k * (1.0 - c2_sum);
    Ok(EllipticPair { k: big_k, e: big_e })
}

/// Squared double-factorial ratio ((2n-1)!!/(2n)!!)^2, iterated.
///
/// These are the squared Maclaurin coefficients shared by K and E.
struct DoubleFactorialRatioSq {
    value: f64,
    n: usize,
}

impl DoubleFactorialRatioSq {
    fn new() -> Self {
        Self { value: 1.0, n: 0 }
    }

    /// Advance to the next n and return ((2n-1)!!/(2n)!!)^2.
    fn next(&mut self) -> f64 {
        self.n += 1;
        let r = (2 * self.n - 1) as f64 / (2 * self.n) as f64;
        self.value *= r * r;
        self.value
    }
}

/// Kernel Psi(k) = (1 - k^2/2) K(k) - E(k).
///
/// Nonnegative, zero at k = 0, strictly increasing on (0, 1); behaves as
/// pi k^4 / 32 for small k, which is why small moduli are evaluated by
/// series rather than by the cancelling difference.
pub fn psi_kernel(k: f64) -> Result<f64> {
    check_modulus(k)?;
    if k <= SERIES_SWITCH {
        return Ok(psi_series(k));
    }
    let pair = complete_elliptic(k)?;
    Ok((1.0 - 0.5 * k * k) * pair.k - pair.e)
}

/// Psi(k) = (pi/2) sum_(n>=2) a_(n-1) (n-1)/(2n) k^(2n),
/// a_m = ((2m-1)!!/(2m)!!)^2.
fn psi_series(k: f64) -> f64 {
    let k2 = k * k;
    let mut coeff = DoubleFactorialRatioSq::new();
    let mut k_pow = k2 * k2; // k^(2n) at n = 2
    let mut sum = 0.0;
    for n in 2..60usize {
        let a_nm1 = coeff.next();
        let term = a_nm1 * (n as f64 - 1.0) / (2.0 * n as f64) * k_pow;
        sum += term;
        if term < 1e-18 * sum.max(f64::MIN_POSITIVE) {
            break;
        }
        k_pow *= k2;
    }
    std::f64::consts::FRAC_PI_2 * sum
}

/// Derivative kernel d/dk [ Psi(k) / k ], equal to
/// (1/k^2) [ (2 - k^2) / (2 (1 - k^2)) E(k) - K(k) ].
///
/// This is the modulus-dependent factor that multiplies dk/dx3 in the
/// axial derivative of the filament coupling integral.
pub fn phi_bracket(k: f64) -> Result<f64> {
    check_modulus(k)?;
    if k <= SERIES_SWITCH {
        return Ok(phi_series(k));
    }
    let pair = complete_elliptic(k)?;
    let k2 = k * k;
    let one_minus_k2 = (1.0 - k) * (1.0 + k);
    Ok(((2.0 - k2) / (2.0 * one_minus_k2) * pair.e - pair.k) / k2)
}

/// Psi(k)/k and phi_bracket(k) from a single K/E evaluation.
///
/// The filament coupling integrals need both kernels at every quadrature
/// node; evaluating them together halves the AGM work.
pub(crate) fn kernel_pair(k: f64) -> Result<(f64, f64)> {
    check_modulus(k)?;
    if k <= SERIES_SWITCH {
        let psi_over_k = if k == 0.0 { 0.0 } else { psi_series(k) / k };
        return Ok((psi_over_k, phi_series(k)));
    }
    let pair = complete_elliptic(k)?;
    let k2 = k * k;
    let one_minus_k2 = (1.0 - k) * (1.0 + k);
    let psi_over_k = ((1.0 - 0.5 * k2) * pair.k - pair.e) / k;
    let phi = ((2.0 - k2) / (2.0 * one_minus_k2) * pair.e - pair.k) / k2;
    Ok((psi_over_k, phi))
}

/// Psi(k)/k for the full open interval 0 <= k < 1, without the modulus
/// policy guard. Used by the tangent-circle quadrature, whose nodes
/// approach k = 1 double-exponentially: K blows up only logarithmically
/// there, so the kernel stays finite and is evaluated through the
/// standard k' -> 0 expansions once the AGM would lose accuracy.
///
/// The caller supplies the complementary parameter `kp2 = 1 - k^2`
/// computed by a cancellation-free route; near tangency `k` itself
/// rounds to 1.0 and carries no information.
pub(crate) fn psi_over_k_near_one(k: f64, kp2: f64) -> f64 {
    debug_assert!(k >= 0.0 && kp2 > 0.0 && kp2 <= 1.0);
    if k <= SERIES_SWITCH {
        return if k == 0.0 { 0.0 } else { psi_series(k) / k };
    }
    if kp2 > 1e-8 {
        // AGM is accurate well past the public-domain cutoff.
        let mut a = 1.0_f64;
        let mut b = kp2.sqrt();
        let mut c2_sum = 0.5 * (1.0 - kp2);
        let mut pow2 = 0.5;
        for _ in 0..AGM_MAX_ITER {
            if (a - b).abs() <= AGM_TOL * a {
                break;
            }
            let an = 0.5 * (a + b);
            let cn = 0.5 * (a - b);
            b = (a * b).sqrt();
            a = an;
            pow2 *= 2.0;
            c2_sum += pow2 * cn * cn;
        }
        let big_k = std::f64::consts::FRAC_PI_2 / a;
        let big_e = big_k * (1.0 - c2_sum);
        (0.5 * (1.0 + kp2) * big_k - big_e) / k
    } else {
        // K = ln(4/k') + (k'^2/4)(ln(4/k') - 1) + O(k'^4 ln k'),
        // E = 1 + (k'^2/2)(ln(4/k') - 1/2) + O(k'^4 ln k').
        // ln(16/kp2) formed from the difference of logs: kp2 can be
        // subnormal at tanh-sinh tail nodes and 16/kp2 would overflow.
        let ln4kp = 0.5 * (16.0_f64.ln() - kp2.ln());
        let big_k = ln4kp + 0.25 * kp2 * (ln4kp - 1.0);
        let big_e = 1.0 + 0.5 * kp2 * (ln4kp - 0.5);
        (0.5 * (1.0 + kp2) * big_k - big_e) / k
    }
}

/// d(Psi/k)/dk = (pi/2) sum_(n>=2) a_(n-1) (n-1)(2n-1)/(2n) k^(2n-2).
fn phi_series(k: f64) -> f64 {
    let k2 = k * k;
    let mut coeff = DoubleFactorialRatioSq::new();
    let mut k_pow = k2; // k^(2n-2) at n = 2
    let mut sum = 0.0;
    for n in 2..60usize {
        let a_nm1 = coeff.next();
        let nf = n as f64;
        let term = a_nm1 * (nf - 1.0) * (2.0 * nf - 1.0) / (2.0 * nf) * k_pow;
        sum += term;
        if term < 1e-18 * sum.max(f64::MIN_POSITIVE) {
            break;
        }
        k_pow *= k2;
    }
    std::f64::consts::FRAC_PI_2 * sum
}
