//! Scalar special functions used by the distribution kernels.

use crate::error::{Error, Result};
use crate::math;

/// Power-law exponent `alpha > 1`.
///
/// A bulk or tail shape `xi > 0` maps onto an exponent via `alpha = 1/xi + 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 1.0 && alpha.is_finite() {
            Ok(Exponent(alpha))
        } else {
            Err(Error::Domain("exponent must be finite and greater than 1"))
        }
    }

    /// Exponent implied by a positive shape parameter.
    pub fn from_shape(xi: f64) -> Result<Self> {
        if xi > 0.0 && xi.is_finite() {
            Ok(Exponent(1.0 / xi + 1.0))
        } else {
            Err(Error::Domain("shape must be finite and positive"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Inverse of [`Exponent::from_shape`].
    pub fn shape(self) -> f64 {
        1.0 / (self.0 - 1.0)
    }
}

// B_{2j} for j = 1..=15.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

const ZETA_REL_TOL: f64 = 1e-16;

/// Hurwitz zeta function `ζ(s, q) = Σ_{i≥0} (q + i)^{-s}` for real `s > 1`, `q > 0`.
///
/// Sums terms directly until either the remainder is negligible or the shift
/// `a = q + N` is large enough for the Euler-Maclaurin tail expansion to converge
/// below 1e-13, then closes with that expansion.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain("hurwitz_zeta requires s > 1"));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain("hurwitz_zeta requires q > 0"));
    }

    // Bernoulli terms shrink by roughly ((s + 2j) / (2πa))^2 per step; require the
    // shift to dominate the largest rising factorial we may use.
    let a_min = f64::max(10.0, (s + 2.0 * BERNOULLI_EVEN.len() as f64) / core::f64::consts::PI);
    let n_direct = if q >= a_min { 0 } else { math::ceil(a_min - q) as u64 };

    let mut sum = 0.0;
    for k in 0..n_direct {
        let a = q + k as f64;
        let term = math::powf(a, -s);
        sum += term;
        // Remainder after this term is at most ∫_a^∞ x^{-s} dx.
        let remainder = math::powf(a, 1.0 - s) / (s - 1.0);
        if remainder <= ZETA_REL_TOL * sum {
            return Ok(sum);
        }
    }

    let a = q + n_direct as f64;
    let a_pow = math::powf(a, -s);
    let mut total = sum + a * a_pow / (s - 1.0) + 0.5 * a_pow;

    // T_j = B_{2j}/(2j)! · s(s+1)…(s+2j-2) · a^{-s-2j+1}
    let inv_a2 = 1.0 / (a * a);
    let mut rising = s * a_pow / a; // s · a^{-s-1}
    let mut factorial = 2.0; // (2j)!
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / factorial * rising;
        total += term;
        if math::abs(term) <= ZETA_REL_TOL * math::abs(total) {
            break;
        }
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (s + two_j - 1.0) * (s + two_j) * inv_a2;
        factorial *= (two_j + 1.0) * (two_j + 2.0);
    }
    Ok(total)
}

/// `Σ_{k=1}^{u} k^{-alpha}`, summed exactly (smallest terms first).
pub fn partial_power_sum(alpha: f64, u: u64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Domain("partial_power_sum requires alpha > 1"));
    }
    if u == 0 {
        return Err(Error::Domain("partial_power_sum requires u >= 1"));
    }
    Ok(power_sum_range(alpha, 1, u))
}

/// `Σ_{k=lo}^{hi} k^{-alpha}` with no validation; zero for an empty range.
pub(crate) fn power_sum_range(alpha: f64, lo: u64, hi: u64) -> f64 {
    let mut sum = 0.0;
    let mut k = hi;
    while k >= lo && k > 0 {
        sum += math::powf(k as f64, -alpha);
        k -= 1;
    }
    sum
}

/// `ln(e^{log_a} - e^{log_b})` without cancellation. `log_b = -∞` is allowed.
pub fn log_diff_exp(log_a: f64, log_b: f64) -> Result<f64> {
    if !(log_a > log_b) {
        return Err(Error::Domain("log_diff_exp requires log_a > log_b"));
    }
    if log_b == f64::NEG_INFINITY {
        return Ok(log_a);
    }
    Ok(log_a + math::ln_1m_exp(log_b - log_a))
}

/// `ln Σ e^{x_i}`; `-∞` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| math::exp(x - max)).sum();
    max + math::ln(s)
}
