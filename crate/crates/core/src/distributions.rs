//! Discrete extreme value mixture distributions.
//!
//! The PMF on `x = 1, 2, …` is
//!
//! ```text
//! p(x) = (1 - φ_u) · (H(x) - H(x-1)) / H(u)     x <= u
//! p(x) = φ_u · (G_u(x) - G_u(x-1))              x >  u
//! ```
//!
//! where `H` is a geometric or discrete power-law bulk and `G_u` is the
//! generalised Pareto CDF above `u` with scale `σ_u = σ + ξ₂u`. Everything is
//! evaluated in log space.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::math;
use crate::special::{hurwitz_zeta, power_sum_range};

/// Below this `|ξ₂|` the tail uses the exponential limit.
pub const XI_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BulkKind {
    Geometric,
    PowerLaw,
}

/// One of the four model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MixtureSpec {
    pub bulk: BulkKind,
    /// `true` derives `φ_u` from density continuity at `u`.
    pub constrained: bool,
}

impl MixtureSpec {
    pub fn new(bulk: BulkKind, constrained: bool) -> Self {
        MixtureSpec { bulk, constrained }
    }
}

/// Mixture parameters `(ξ₁, ξ₂, σ, u)` together with the resolved `φ_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamVector {
    /// Bulk shape: geometric `p = 1 - exp(-1/ξ₁)`, power law `α₁ = 1/ξ₁ + 1`.
    pub xi1: f64,
    /// Tail shape.
    pub xi2: f64,
    /// Threshold-independent tail scale.
    pub sigma: f64,
    /// Threshold.
    pub u: u64,
    /// Exceedance probability `Pr(X > u)`.
    pub phi_u: f64,
}

impl ParamVector {
    pub fn new(xi1: f64, xi2: f64, sigma: f64, u: u64, phi_u: f64) -> Result<Self> {
        let p = ParamVector { xi1, xi2, sigma, u, phi_u };
        p.validate()?;
        Ok(p)
    }

    /// Resolves `φ_u` from the continuity constraint.
    pub fn constrained(bulk: BulkKind, xi1: f64, xi2: f64, sigma: f64, u: u64) -> Result<Self> {
        let phi_u = constrained_phi(bulk, xi1, xi2, sigma, u)?;
        Self::new(xi1, xi2, sigma, u, phi_u)
    }

    pub fn validate(&self) -> Result<()> {
        check_shape_scale(self.xi1, self.xi2, self.sigma, self.u)?;
        if !(self.phi_u > 0.0 && self.phi_u < 1.0) {
            return Err(Error::Domain("phi_u must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `σ_u = σ + ξ₂u`
    pub fn sigma_u(&self) -> f64 {
        self.sigma + self.xi2 * self.u as f64
    }
}

fn check_shape_scale(xi1: f64, xi2: f64, sigma: f64, u: u64) -> Result<()> {
    if !(xi1 > 0.0) || !xi1.is_finite() {
        return Err(Error::Domain("xi1 must be positive and finite"));
    }
    if !xi2.is_finite() {
        return Err(Error::Domain("xi2 must be finite"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain("sigma must be positive and finite"));
    }
    if u == 0 {
        return Err(Error::Domain("threshold u must be at least 1"));
    }
    if !(sigma + xi2 * u as f64 > 0.0) {
        return Err(Error::Domain("sigma + xi2 * u must be positive"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tail

/// `ln Pr(Z - u > y | Z > u)` for the GPD with shape `xi` and scale `sigma_u`.
#[inline]
pub(crate) fn gpd_log_survival(y: f64, xi: f64, sigma_u: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if math::abs(xi) < XI_EPSILON {
        return -y / sigma_u;
    }
    let t = xi * y / sigma_u;
    if t <= -1.0 {
        return f64::NEG_INFINITY;
    }
    -math::ln_1p(t) / xi
}

/// `(ln S(y-1), ln S(y-1) - ln S(y))` for the conditional GPD survival `S`.
/// The gap is computed directly rather than by subtracting nearby logs, and is
/// `+∞` when the upper endpoint falls inside `(y-1, y]`.
#[inline]
fn igpd_log_step(y: f64, xi: f64, sigma_u: f64) -> (f64, f64) {
    let prev = gpd_log_survival(y - 1.0, xi, sigma_u);
    if prev == f64::NEG_INFINITY {
        return (prev, f64::INFINITY);
    }
    let gap = if math::abs(xi) < XI_EPSILON {
        1.0 / sigma_u
    } else {
        let step = xi / (sigma_u + xi * (y - 1.0));
        if step <= -1.0 {
            // the rest of the mass lands on this integer
            f64::INFINITY
        } else {
            math::ln_1p(step) / xi
        }
    };
    (prev, gap)
}

/// `ln[G_u(u+y) - G_u(u+y-1)]` for integer offset `y >= 1`, not scaled by `φ_u`.
#[inline]
pub(crate) fn igpd_log_mass(y: f64, xi: f64, sigma_u: f64) -> f64 {
    let (prev, gap) = igpd_log_step(y, xi, sigma_u);
    if prev == f64::NEG_INFINITY {
        return prev;
    }
    prev + math::ln_1m_exp(-gap)
}

/// `G_u(x) = 1 - [1 + ξ₂(x-u)/σ_u]₊^{-1/ξ₂}` with `σ_u = σ + ξ₂u`.
pub fn gpd_conditional_cdf(x: f64, u: u64, xi2: f64, sigma: f64) -> Result<f64> {
    let sigma_u = sigma + xi2 * u as f64;
    if !(sigma_u > 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain("tail scale sigma + xi2 * u must be positive"));
    }
    if !(x >= u as f64) {
        return Err(Error::Domain("gpd_conditional_cdf requires x >= u"));
    }
    let ls = gpd_log_survival(x - u as f64, xi2, sigma_u);
    Ok(-math::exp_m1(ls))
}

/// Continuous GPD density conditional on `Z > u`, in the location/scale form
/// with location `mu` and scale `sigma0`.
pub fn gpd_conditional_density(z: f64, u: f64, mu: f64, sigma0: f64, xi: f64) -> f64 {
    let scale = sigma0 + xi * (u - mu);
    if !(scale > 0.0) || z < u {
        return 0.0;
    }
    if math::abs(xi) < XI_EPSILON {
        return math::exp(-(z - u) / scale) / scale;
    }
    let t = 1.0 + xi * (z - u) / scale;
    if t <= 0.0 {
        return 0.0;
    }
    math::powf(t, -1.0 / xi - 1.0) / scale
}

/// Pareto density `(α-1)/u · (z/u)^{-α}` for `z > u`.
pub fn pareto_density(z: f64, u: f64, alpha: f64) -> f64 {
    if z <= u {
        return 0.0;
    }
    (alpha - 1.0) / u * math::powf(z / u, -alpha)
}

/// `ln[G_u(x) - G_u(x-1)]` for integer `x > u`; `-∞` past a finite upper endpoint.
pub fn igpd_log_pmf(x: u64, params: &ParamVector) -> Result<f64> {
    if x <= params.u {
        return Err(Error::Domain("igpd_log_pmf requires x > u"));
    }
    let sigma_u = params.sigma_u();
    if !(sigma_u > 0.0) {
        return Err(Error::Domain("tail scale sigma + xi2 * u must be positive"));
    }
    Ok(igpd_log_mass((x - params.u) as f64, params.xi2, sigma_u))
}

// ---------------------------------------------------------------------------
// Bulk

/// Truncated bulk on `1..=u` with its normaliser resolved.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bulk {
    kind: BulkKind,
    xi1: f64,
    u: u64,
    /// `ln H(u)`
    log_norm: f64,
    /// geometric: `ln p`; power law: `α`
    aux: f64,
}

impl Bulk {
    pub(crate) fn new(kind: BulkKind, xi1: f64, u: u64) -> Self {
        match kind {
            BulkKind::Geometric => Bulk {
                kind,
                xi1,
                u,
                log_norm: math::ln_1m_exp(-(u as f64) / xi1),
                aux: math::ln_1m_exp(-1.0 / xi1),
            },
            BulkKind::PowerLaw => {
                let alpha = 1.0 / xi1 + 1.0;
                Bulk { kind, xi1, u, log_norm: math::ln(power_sum_range(alpha, 1, u)), aux: alpha }
            }
        }
    }

    /// `ln[H(x) - H(x-1)]`, unnormalised.
    #[inline]
    pub(crate) fn log_mass(&self, x: u64) -> f64 {
        match self.kind {
            BulkKind::Geometric => self.aux - (x - 1) as f64 / self.xi1,
            BulkKind::PowerLaw => -self.aux * math::ln(x as f64),
        }
    }

    #[inline]
    pub(crate) fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// `ln[(H(u) - H(x-1)) / H(u)]` for `1 <= x <= u`.
    pub(crate) fn log_upper(&self, x: u64) -> f64 {
        match self.kind {
            BulkKind::Geometric => {
                -((x - 1) as f64) / self.xi1 + math::ln_1m_exp(-((self.u - x + 1) as f64) / self.xi1)
                    - self.log_norm
            }
            BulkKind::PowerLaw => math::ln(power_sum_range(self.aux, x, self.u)) - self.log_norm,
        }
    }

    /// Sum of `count · ln[H(x)-H(x-1)]` over observations at or below `u`.
    pub(crate) fn log_mass_sum(&self, n_bulk: f64, sum_x: f64, sum_ln_x: f64) -> f64 {
        match self.kind {
            BulkKind::Geometric => n_bulk * self.aux - (sum_x - n_bulk) / self.xi1,
            BulkKind::PowerLaw => -self.aux * sum_ln_x,
        }
    }
}

/// `ln[(H(x) - H(x-1)) / H(u)]` for `1 <= x <= u`.
pub fn bulk_log_pmf(x: u64, bulk: BulkKind, params: &ParamVector) -> Result<f64> {
    if !(params.xi1 > 0.0) || params.u == 0 {
        return Err(Error::Domain("bulk requires xi1 > 0 and u >= 1"));
    }
    if x == 0 || x > params.u {
        return Err(Error::Domain("bulk_log_pmf requires 1 <= x <= u"));
    }
    let b = Bulk::new(bulk, params.xi1, params.u);
    Ok(b.log_mass(x) - b.log_norm())
}

/// Exceedance probability that makes the underlying density continuous at `u`.
///
/// Equates the bulk mass rate at the threshold, `(1-φ)·h(u)/H(u)`, with the tail
/// density just above it, `φ/σ_u`, giving `φ = h(u)σ_u / (H(u) + h(u)σ_u)`. The
/// result is not clipped to any prior support.
pub fn constrained_phi(bulk: BulkKind, xi1: f64, xi2: f64, sigma: f64, u: u64) -> Result<f64> {
    check_shape_scale(xi1, xi2, sigma, u)?;
    let b = Bulk::new(bulk, xi1, u);
    Ok(constrained_phi_from(&b, sigma + xi2 * u as f64))
}

#[inline]
pub(crate) fn constrained_phi_from(bulk: &Bulk, sigma_u: f64) -> f64 {
    let log_ratio = bulk.log_mass(bulk.u) - bulk.log_norm() + math::ln(sigma_u);
    1.0 / (1.0 + math::exp(-log_ratio))
}

// ---------------------------------------------------------------------------
// Mixture

fn check_phi(phi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::Domain("phi_u must lie in [0, 1]"));
    }
    Ok(())
}

/// Mixture PMF with parameters validated once and the bulk normaliser cached,
/// for evaluating many points.
#[derive(Debug, Clone)]
pub struct MixturePmf {
    bulk: Bulk,
    u: u64,
    xi2: f64,
    sigma_u: f64,
    log_phi: f64,
    log_1m_phi: f64,
}

impl MixturePmf {
    /// `params.phi_u` must already be resolved; any value in `[0, 1]` is accepted.
    pub fn new(spec: &MixtureSpec, params: &ParamVector) -> Result<Self> {
        check_shape_scale(params.xi1, params.xi2, params.sigma, params.u)?;
        check_phi(params.phi_u)?;
        Ok(MixturePmf {
            bulk: Bulk::new(spec.bulk, params.xi1, params.u),
            u: params.u,
            xi2: params.xi2,
            sigma_u: params.sigma_u(),
            log_phi: math::ln(params.phi_u),
            log_1m_phi: math::ln_1p(-params.phi_u),
        })
    }

    /// `ln p(x)`; `x = 0` has no mass.
    #[inline]
    pub fn log_pmf(&self, x: u64) -> f64 {
        if x == 0 {
            f64::NEG_INFINITY
        } else if x <= self.u {
            self.log_1m_phi + self.bulk.log_mass(x) - self.bulk.log_norm()
        } else {
            self.log_phi + igpd_log_mass((x - self.u) as f64, self.xi2, self.sigma_u)
        }
    }

    /// `p(x)`, computed in linear space where that saves a logarithm.
    #[inline]
    pub fn pmf(&self, x: u64) -> f64 {
        if x <= self.u {
            return math::exp(self.log_pmf(x));
        }
        let (prev, gap) = igpd_log_step((x - self.u) as f64, self.xi2, self.sigma_u);
        math::exp(self.log_phi + prev) * math::one_m_exp_neg(gap)
    }
}

/// Log-PMF of the mixture. `params.phi_u` must already be resolved.
pub fn mixture_log_pmf(x: u64, spec: &MixtureSpec, params: &ParamVector) -> Result<f64> {
    if x == 0 {
        return Err(Error::Domain("mixture support starts at 1"));
    }
    Ok(MixturePmf::new(spec, params)?.log_pmf(x))
}

/// `ln Pr(X >= x)`.
pub fn mixture_log_survival(x: u64, spec: &MixtureSpec, params: &ParamVector) -> Result<f64> {
    if x == 0 {
        return Err(Error::Domain("mixture support starts at 1"));
    }
    check_shape_scale(params.xi1, params.xi2, params.sigma, params.u)?;
    check_phi(params.phi_u)?;
    Ok(SurvivalCurve::new(spec.bulk, params).log_survival(x))
}

/// Survival function with the bulk's suffix sums precomputed, so each
/// `log_survival(x)` is `O(1)`.
#[derive(Debug, Clone)]
pub struct SurvivalCurve {
    u: u64,
    xi2: f64,
    sigma_u: f64,
    log_phi: f64,
    log_1m_phi: f64,
    /// `ln[(H(u) - H(x-1))/H(u)]` for `x = 1..=u` (index `x-1`).
    log_upper: Vec<f64>,
}

impl SurvivalCurve {
    /// Parameters are assumed valid.
    pub fn new(bulk: BulkKind, params: &ParamVector) -> Self {
        let b = Bulk::new(bulk, params.xi1, params.u);
        let u = params.u;
        let log_upper = match bulk {
            BulkKind::Geometric => (1..=u).map(|x| b.log_upper(x)).collect(),
            BulkKind::PowerLaw => {
                // suffix sums of k^{-α}, accumulated from the small end
                let mut out = alloc::vec![0.0; u as usize];
                let mut acc = 0.0;
                for x in (1..=u).rev() {
                    acc += math::exp(b.log_mass(x));
                    out[(x - 1) as usize] = math::ln(acc) - b.log_norm();
                }
                out
            }
        };
        SurvivalCurve {
            u,
            xi2: params.xi2,
            sigma_u: params.sigma_u(),
            log_phi: math::ln(params.phi_u),
            log_1m_phi: math::ln_1p(-params.phi_u),
            log_upper,
        }
    }

    pub fn log_survival(&self, x: u64) -> f64 {
        if x <= 1 {
            0.0
        } else if x <= self.u {
            math::ln_add_exp(self.log_phi, self.log_1m_phi + self.log_upper[(x - 1) as usize])
        } else {
            self.log_phi + gpd_log_survival((x - 1 - self.u) as f64, self.xi2, self.sigma_u)
        }
    }

    pub fn survival(&self, x: u64) -> f64 {
        math::exp(self.log_survival(x))
    }
}

/// Discrete power law `x^{-α} / ζ(α, u0)` on `x >= u0`, with the normaliser
/// computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePowerLaw {
    alpha: f64,
    u0: u64,
    log_zeta: f64,
}

impl DiscretePowerLaw {
    pub fn new(alpha: f64, u0: u64) -> Result<Self> {
        if u0 == 0 {
            return Err(Error::Domain("discrete power law requires u0 >= 1"));
        }
        let z = hurwitz_zeta(alpha, u0 as f64)?;
        Ok(DiscretePowerLaw { alpha, u0, log_zeta: math::ln(z) })
    }

    /// `ln p(x)`; `-∞` below `u0`.
    pub fn log_pmf(&self, x: u64) -> f64 {
        if x < self.u0 {
            return f64::NEG_INFINITY;
        }
        -self.alpha * math::ln(x as f64) - self.log_zeta
    }
}

pub fn discrete_power_law_log_pmf(x: u64, alpha: f64, u0: u64) -> Result<f64> {
    let law = DiscretePowerLaw::new(alpha, u0)?;
    if x < u0 {
        return Err(Error::Domain("discrete power law requires x >= u0"));
    }
    Ok(law.log_pmf(x))
}

// ---------------------------------------------------------------------------
// Simulation

/// Draws `n` observations from the mixture.
///
/// Bulk draws use the inverse CDF over `1..=u`; tail draws take `⌈Z⌉` for `Z`
/// drawn from the continuous GPD above `u`.
pub fn sample_mixture<R: Rng + ?Sized>(
    spec: &MixtureSpec,
    params: &ParamVector,
    n: usize,
    rng: &mut R,
) -> Result<Vec<u64>> {
    check_shape_scale(params.xi1, params.xi2, params.sigma, params.u)?;
    check_phi(params.phi_u)?;
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1"));
    }
    let u = params.u;
    let sigma_u = params.sigma_u();
    let xi2 = params.xi2;

    // cumulative bulk masses for the power law
    let cdf: Vec<f64> = match spec.bulk {
        BulkKind::Geometric => Vec::new(),
        BulkKind::PowerLaw => {
            let alpha = 1.0 / params.xi1 + 1.0;
            let mut acc = 0.0;
            (1..=u)
                .map(|k| {
                    acc += math::powf(k as f64, -alpha);
                    acc
                })
                .collect()
        }
    };
    let geo_norm = -math::exp_m1(-(u as f64) / params.xi1);

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w: f64 = rng.random();
        let v: f64 = rng.random();
        if w < params.phi_u {
            // 1 - v lies in (0, 1]
            let e = -math::ln(1.0 - v);
            let y = if math::abs(xi2) < XI_EPSILON {
                sigma_u * e
            } else {
                sigma_u * math::exp_m1(xi2 * e) / xi2
            };
            let step = math::ceil(y).max(1.0);
            let x = if step >= (u64::MAX - u) as f64 { u64::MAX } else { u + step as u64 };
            out.push(x);
        } else {
            let x = match spec.bulk {
                BulkKind::Geometric => {
                    let z = -params.xi1 * math::ln_1p(-v * geo_norm);
                    (math::ceil(z) as u64).clamp(1, u)
                }
                BulkKind::PowerLaw => {
                    let target = v * cdf[cdf.len() - 1];
                    (cdf.partition_point(|&c| c <= target) as u64 + 1).min(u)
                }
            };
            out.push(x);
        }
    }
    Ok(out)
}

/// [`sample_mixture`] driven by a seeded xoshiro256++ stream.
pub fn sample_mixture_seeded(
    spec: &MixtureSpec,
    params: &ParamVector,
    n: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    sample_mixture(spec, params, n, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = core::f64::consts::LN_2;

    fn geo() -> MixtureSpec {
        MixtureSpec::new(BulkKind::Geometric, false)
    }

    fn pow() -> MixtureSpec {
        MixtureSpec::new(BulkKind::PowerLaw, false)
    }

    #[test]
    fn gpd_cdf_examples() {
        assert_eq!(gpd_conditional_cdf(3.0, 3, 0.5, 1.0).unwrap(), 0.0);
        let v = gpd_conditional_cdf(2.0, 1, 0.5, 1.0).unwrap();
        assert!((v - 0.4375).abs() < 1e-15);
        let v = gpd_conditional_cdf(5.0, 3, 0.0, 2.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        // beyond the upper endpoint u + σ_u/|ξ₂| = 1 + 3 = 4
        assert_eq!(gpd_conditional_cdf(4.5, 1, -0.5, 2.0).unwrap(), 1.0);
        assert!(gpd_conditional_cdf(0.5, 1, 0.5, 1.0).is_err());
        assert!(gpd_conditional_cdf(2.0, 4, -0.5, 1.0).is_err());
    }

    #[test]
    fn igpd_examples() {
        let p = ParamVector::new(1.0, 0.5, 1.0, 1, 0.3).unwrap();
        assert!((igpd_log_pmf(2, &p).unwrap() - 0.4375f64.ln()).abs() < 1e-14);
        let p = ParamVector::new(1.0, -0.5, 2.0, 1, 0.3).unwrap();
        assert_eq!(igpd_log_pmf(6, &p).unwrap(), f64::NEG_INFINITY);
        // endpoint at 4 exactly: x = 4 carries the final interval, x = 5 nothing
        assert!(igpd_log_pmf(4, &p).unwrap().is_finite());
        assert_eq!(igpd_log_pmf(5, &p).unwrap(), f64::NEG_INFINITY);
        let total: f64 = (2..=4).map(|x| igpd_log_pmf(x, &p).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(igpd_log_pmf(1, &p).is_err());
    }

    #[test]
    fn igpd_telescopes_to_one() {
        let p = ParamVector::new(1.0, 0.2, 3.0, 4, 0.3).unwrap();
        let n = 200_000u64;
        let sum: f64 = (5..=4 + n).map(|x| igpd_log_pmf(x, &p).unwrap().exp()).sum();
        let rest = gpd_log_survival(n as f64, 0.2, p.sigma_u()).exp();
        assert!((sum + rest - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bulk_examples() {
        let p = ParamVector::new(2.0, 0.1, 1.0, 1, 0.3).unwrap();
        assert_eq!(bulk_log_pmf(1, BulkKind::PowerLaw, &p).unwrap(), 0.0);
        let p = ParamVector::new(1.0 / LN2, 0.1, 1.0, 2, 0.3).unwrap();
        let v = bulk_log_pmf(1, BulkKind::Geometric, &p).unwrap();
        assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-14);
        let p = ParamVector::new(1.0, 0.1, 1.0, 3, 0.3).unwrap();
        let v = bulk_log_pmf(2, BulkKind::PowerLaw, &p).unwrap();
        assert!((v - (0.25f64 / (1.0 + 0.25 + 1.0 / 9.0)).ln()).abs() < 1e-14);
        assert!(bulk_log_pmf(4, BulkKind::PowerLaw, &p).is_err());
        assert!(bulk_log_pmf(0, BulkKind::PowerLaw, &p).is_err());
        for kind in [BulkKind::Geometric, BulkKind::PowerLaw] {
            let p = ParamVector::new(0.7, 0.1, 1.0, 25, 0.3).unwrap();
            let s: f64 = (1..=25).map(|x| bulk_log_pmf(x, kind, &p).unwrap().exp()).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constrained_phi_examples() {
        let phi = constrained_phi(BulkKind::Geometric, 1.0 / LN2, 0.5, 1.0, 2).unwrap();
        assert!((phi - 0.4).abs() < 1e-14);
        // h(u)σ_u = H(u): power law u = 1 has h = H = 1, so σ_u = 1 balances.
        let phi = constrained_phi(BulkKind::PowerLaw, 0.8, 0.25, 0.75, 1).unwrap();
        assert!((phi - 0.5).abs() < 1e-15);
        assert!(constrained_phi(BulkKind::PowerLaw, 0.8, -1.0, 0.75, 1).is_err());
    }

    #[test]
    fn constrained_phi_increases_with_sigma() {
        for kind in [BulkKind::Geometric, BulkKind::PowerLaw] {
            for u in [1u64, 5, 40] {
                let mut last = 0.0;
                for i in 1..200 {
                    let sigma = i as f64 * 0.25;
                    let phi = constrained_phi(kind, 1.3, 0.2, sigma, u).unwrap();
                    assert!(phi > last && phi < 1.0);
                    last = phi;
                }
            }
        }
    }

    #[test]
    fn mixture_single_atom_bulk() {
        let p = ParamVector::new(1.0, 0.3, 1.0, 1, 0.3).unwrap();
        let v = mixture_log_pmf(1, &pow(), &p).unwrap();
        assert!((v - 0.7f64.ln()).abs() < 1e-15);
        assert!(mixture_log_pmf(0, &pow(), &p).is_err());
    }

    #[test]
    fn survival_examples() {
        let p = ParamVector::new(1.5, 0.3, 2.0, 6, 0.2).unwrap();
        for spec in [geo(), pow()] {
            assert_eq!(mixture_log_survival(1, &spec, &p).unwrap(), 0.0);
            let v = mixture_log_survival(7, &spec, &p).unwrap();
            assert!((v - 0.2f64.ln()).abs() < 1e-15);
            assert!(mixture_log_survival(0, &spec, &p).is_err());
        }
    }

    #[test]
    fn survival_matches_direct_sum() {
        let p = ParamVector::new(0.9, -0.2, 5.0, 8, 0.35).unwrap();
        for spec in [geo(), pow()] {
            // support ends at u + σ_u/0.2 = 8 + 16.5/... finite, so sum exactly
            for x in 1..40u64 {
                let direct: f64 =
                    (x..200).map(|k| mixture_log_pmf(k, &spec, &p).unwrap().exp()).sum();
                let s = mixture_log_survival(x, &spec, &p).unwrap().exp();
                assert!((direct - s).abs() < 1e-13, "x={x}");
            }
        }
    }

    #[test]
    fn pareto_reduction_spot() {
        // σ₀ = ξμ collapses the conditional GPD onto a Pareto with α = 1/ξ + 1
        let (xi, mu, u, z) = (0.5, 2.0, 3.0, 7.5);
        let g = gpd_conditional_density(z, u, mu, xi * mu, xi);
        let pa = pareto_density(z, u, 1.0 / xi + 1.0);
        assert!((g - pa).abs() < 1e-15);
    }

    #[test]
    fn discrete_power_law_examples() {
        let v = discrete_power_law_log_pmf(1, 2.0, 1).unwrap();
        assert!((v + 1.6449340668482264f64.ln()).abs() < 1e-13);
        let a = discrete_power_law_log_pmf(7, 2.3, 3).unwrap();
        let b = discrete_power_law_log_pmf(14, 2.3, 3).unwrap();
        assert!((a - b - 2.3 * LN2).abs() < 1e-12);
        assert!(discrete_power_law_log_pmf(2, 2.0, 3).is_err());
        assert!(discrete_power_law_log_pmf(5, 1.0, 3).is_err());
    }

    #[test]
    fn sample_degenerate_all_ones() {
        let p = ParamVector { xi1: 1.0, xi2: 0.3, sigma: 1.0, u: 1, phi_u: 0.0 };
        let draws = sample_mixture_seeded(&pow(), &p, 1000, 3).unwrap();
        assert!(draws.iter().all(|&x| x == 1));
    }

    #[test]
    fn sample_is_deterministic() {
        let p = ParamVector::new(2.0, 0.3, 2.0, 15, 0.1).unwrap();
        let a = sample_mixture_seeded(&geo(), &p, 500, 11).unwrap();
        let b = sample_mixture_seeded(&geo(), &p, 500, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_mixture_seeded(&geo(), &p, 500, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_respects_negative_endpoint() {
        let p = ParamVector::new(2.0, -0.5, 2.0, 1, 0.5).unwrap();
        let draws = sample_mixture_seeded(&geo(), &p, 20_000, 5).unwrap();
        assert!(draws.iter().all(|&x| (1..=4).contains(&x)));
    }
}
