//! Log-likelihood over frequency tables, component-wise maximum likelihood at a
//! fixed threshold, and the profile likelihood of the threshold.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::distributions::{constrained_phi_from, igpd_log_mass, Bulk, BulkKind, MixtureSpec, ParamVector};
use crate::error::{Error, Result, Side};
use crate::math;
use crate::optim::{golden_section_max, nelder_mead_min, NelderMeadOptions};
use crate::table::FrequencyTable;

/// Search range for `ln ξ₁`.
pub const LOG_XI1_RANGE: (f64, f64) = (-9.210_340_371_976_182, 9.210_340_371_976_182);
const XI1_TOL: f64 = 1e-10;
const TAIL_RESTARTS: usize = 5;
const OPT_F_TOL: f64 = 1e-10;

/// Bulk and tail contributions of a log-likelihood, before `φ_u` is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Parts {
    pub n_bulk: u64,
    pub n_tail: u64,
    /// `Σ_{x<=u} c·ln[(H(x)-H(x-1))/H(u)]`
    pub bulk: f64,
    /// `Σ_{x>u} c·ln[G_u(x)-G_u(x-1)]`
    pub tail: f64,
}

impl Parts {
    /// Adds the `(1-φ)^{n-n_u} φ^{n_u}` factor, treating `0·ln 0` as 0.
    #[inline]
    pub fn with_phi(&self, phi: f64) -> f64 {
        let mut ll = self.bulk + self.tail;
        if self.n_bulk > 0 {
            ll += self.n_bulk as f64 * math::ln_1p(-phi);
        }
        if self.n_tail > 0 {
            ll += self.n_tail as f64 * math::ln(phi);
        }
        ll
    }
}

/// Bulk contribution at `(ξ₁, u)`.
pub(crate) fn bulk_part(table: &FrequencyTable, bulk: &Bulk, u: u64) -> f64 {
    let n_bulk = table.count_at_most(u);
    if n_bulk == 0 {
        return 0.0;
    }
    let nb = n_bulk as f64;
    bulk.log_mass_sum(nb, table.sum_at_most(u), table.sum_ln_at_most(u)) - nb * bulk.log_norm()
}

/// Tail contribution at `(ξ₂, σ_u, u)`; `-∞` if `σ_u <= 0` or an observation
/// falls beyond the upper endpoint.
pub(crate) fn tail_part(table: &FrequencyTable, xi2: f64, sigma_u: f64, u: u64) -> f64 {
    if !(sigma_u > 0.0) {
        return f64::NEG_INFINITY;
    }
    let start = table.split_index(u);
    let values = &table.values()[start..];
    let counts = &table.counts()[start..];
    let mut ll = 0.0;
    for (&v, &c) in values.iter().zip(counts) {
        let lm = igpd_log_mass((v - u) as f64, xi2, sigma_u);
        if lm == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        ll += c as f64 * lm;
    }
    ll
}

pub(crate) fn parts(table: &FrequencyTable, kind: BulkKind, xi1: f64, xi2: f64, sigma: f64, u: u64) -> (Parts, Bulk) {
    let bulk = Bulk::new(kind, xi1, u);
    let n_bulk = table.count_at_most(u);
    let p = Parts {
        n_bulk,
        n_tail: table.n() - n_bulk,
        bulk: bulk_part(table, &bulk, u),
        tail: tail_part(table, xi2, sigma + xi2 * u as f64, u),
    };
    (p, bulk)
}

fn structurally_valid(xi1: f64, xi2: f64, sigma: f64, u: u64) -> bool {
    xi1 > 0.0 && xi1.is_finite() && xi2.is_finite() && sigma > 0.0 && sigma.is_finite() && u >= 1
}

/// `Σ count · ln p(value)` using `params.phi_u` as given.
///
/// Costs `O(unique values above u)` plus `O(u)` for a power-law normaliser.
/// Invalid parameters, `σ_u <= 0`, or an observation with zero mass give `-∞`.
pub fn log_likelihood(table: &FrequencyTable, spec: &MixtureSpec, params: &ParamVector) -> f64 {
    if !structurally_valid(params.xi1, params.xi2, params.sigma, params.u)
        || !(0.0..=1.0).contains(&params.phi_u)
    {
        return f64::NEG_INFINITY;
    }
    let (p, _) = parts(table, spec.bulk, params.xi1, params.xi2, params.sigma, params.u);
    p.with_phi(params.phi_u)
}

/// Resolves `φ_u` for the given constraint mode: the continuity value when
/// constrained, the empirical exceedance proportion otherwise.
pub fn resolve_phi(
    table: &FrequencyTable,
    spec: &MixtureSpec,
    xi1: f64,
    xi2: f64,
    sigma: f64,
    u: u64,
) -> Result<ParamVector> {
    if spec.constrained {
        ParamVector::constrained(spec.bulk, xi1, xi2, sigma, u)
    } else {
        let p = ParamVector { xi1, xi2, sigma, u, phi_u: mle_exceedance(table, u) };
        Ok(p)
    }
}

/// `φ̂_u = n_u / n` with `n_u = #{x_i > u}`.
pub fn mle_exceedance(table: &FrequencyTable, u: u64) -> f64 {
    table.count_exceeding(u) as f64 / table.n() as f64
}

/// Bulk maximum likelihood at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkFit {
    pub xi1: f64,
    /// Bulk contribution to the log-likelihood at `xi1`.
    pub loglik: f64,
    /// `false` when the bulk likelihood is flat or maximised on the search boundary.
    pub identifiable: bool,
}

/// Tail maximum likelihood at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub xi2: f64,
    pub sigma: f64,
    /// Tail contribution to the log-likelihood.
    pub loglik: f64,
    /// `false` with fewer than two distinct exceedance values.
    pub identifiable: bool,
}

/// Maximises the bulk product over `ξ₁` by golden-section search on `ln ξ₁`.
pub fn fit_bulk(table: &FrequencyTable, kind: BulkKind, u: u64) -> Result<BulkFit> {
    if u == 0 {
        return Err(Error::Domain("threshold u must be at least 1"));
    }
    if table.count_at_most(u) == 0 {
        return Err(Error::DegenerateSide { side: Side::Bulk, u });
    }
    let objective = |log_xi1: f64| {
        let b = Bulk::new(kind, math::exp(log_xi1), u);
        bulk_part(table, &b, u)
    };
    let (lx, ll) = golden_section_max(objective, LOG_XI1_RANGE.0, LOG_XI1_RANGE.1, XI1_TOL);
    let on_edge = lx - LOG_XI1_RANGE.0 < 1e-6 || LOG_XI1_RANGE.1 - lx < 1e-6;
    // u = 1 leaves a single-atom bulk whose likelihood is flat in ξ₁
    Ok(BulkFit { xi1: math::exp(lx), loglik: ll, identifiable: !on_edge && u > 1 })
}

/// Maximises the tail product over `(ξ₂, ln σ)` with Nelder-Mead from a
/// moment-based start plus seeded random restarts.
pub fn fit_tail(table: &FrequencyTable, u: u64) -> Result<TailFit> {
    if u == 0 {
        return Err(Error::Domain("threshold u must be at least 1"));
    }
    let start = table.split_index(u);
    let n_tail = table.count_exceeding(u);
    if n_tail == 0 {
        return Err(Error::DegenerateSide { side: Side::Tail, u });
    }
    let unique_tail = table.unique_len() - start;
    let uf = u as f64;

    let objective = |p: &[f64]| {
        let (xi2, sigma) = (p[0], math::exp(p[1]));
        -tail_part(table, xi2, sigma + xi2 * uf, u)
    };

    // exponential start: mean excess over the threshold
    let sum_excess: f64 = table.values()[start..]
        .iter()
        .zip(&table.counts()[start..])
        .map(|(&v, &c)| c as f64 * (v - u) as f64)
        .sum();
    let mean_excess = sum_excess / n_tail as f64;
    let sigma0 = (mean_excess - 0.5).max(0.25);

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x7a11_u64 ^ u.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let opts = NelderMeadOptions { f_tol: OPT_F_TOL, max_evals: 4000 };

    let mut starts: Vec<[f64; 2]> = Vec::with_capacity(TAIL_RESTARTS + 1);
    starts.push([0.0, math::ln(sigma0)]);
    for _ in 0..TAIL_RESTARTS {
        let xi2: f64 = rng.random_range(-0.3..1.5);
        let ls: f64 = math::ln(sigma0) + rng.random_range(-2.0..2.0);
        starts.push([xi2, ls]);
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        if !objective(s).is_finite() {
            continue;
        }
        let (x, _) = nelder_mead_min(objective, s, &[0.1, 0.3], opts);
        // polish from the converged point
        let (x, fx) = nelder_mead_min(objective, &x, &[0.02, 0.05], opts);
        if best.as_ref().map_or(true, |b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.ok_or(Error::DegenerateSide { side: Side::Tail, u })?;
    Ok(TailFit { xi2: x[0], sigma: math::exp(x[1]), loglik: -fx, identifiable: unique_tail >= 2 })
}

/// Maximum likelihood fit at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentFit {
    pub params: ParamVector,
    pub loglik: f64,
    pub bulk_identifiable: bool,
    pub tail_identifiable: bool,
}

/// Fits bulk and tail separately at threshold `u`.
///
/// Unconstrained: `φ̂_u = n_u/n` and the log-likelihood is evaluated at the
/// component MLEs. Constrained: the component MLEs seed a joint Nelder-Mead
/// refinement over `(ln ξ₁, ξ₂, ln σ)` with `φ_u` from the continuity constraint.
pub fn mle_components(table: &FrequencyTable, spec: &MixtureSpec, u: u64) -> Result<ComponentFit> {
    let bulk = fit_bulk(table, spec.bulk, u)?;
    let tail = fit_tail(table, u)?;

    if !spec.constrained {
        let phi = mle_exceedance(table, u);
        let params = ParamVector { xi1: bulk.xi1, xi2: tail.xi2, sigma: tail.sigma, u, phi_u: phi };
        let (p, _) = parts(table, spec.bulk, params.xi1, params.xi2, params.sigma, u);
        return Ok(ComponentFit {
            params,
            loglik: p.with_phi(phi),
            bulk_identifiable: bulk.identifiable,
            tail_identifiable: tail.identifiable,
        });
    }

    let constrained_ll = |p: &[f64]| -> f64 {
        let (xi1, xi2, sigma) = (math::exp(p[0]), p[1], math::exp(p[2]));
        if !(LOG_XI1_RANGE.0..=LOG_XI1_RANGE.1).contains(&p[0]) {
            return f64::NEG_INFINITY;
        }
        let sigma_u = sigma + xi2 * u as f64;
        if !(sigma_u > 0.0) {
            return f64::NEG_INFINITY;
        }
        let (parts, b) = parts(table, spec.bulk, xi1, xi2, sigma, u);
        parts.with_phi(constrained_phi_from(&b, sigma_u))
    };
    let x0 = [math::ln(bulk.xi1), tail.xi2, math::ln(tail.sigma)];
    let opts = NelderMeadOptions { f_tol: OPT_F_TOL, max_evals: 6000 };
    let (x, _) = nelder_mead_min(|p| -constrained_ll(p), &x0, &[0.2, 0.1, 0.3], opts);
    let (x, fx) = nelder_mead_min(|p| -constrained_ll(p), &x, &[0.02, 0.02, 0.05], opts);
    let (xi1, xi2, sigma) = (math::exp(x[0]), x[1], math::exp(x[2]));
    let params = ParamVector::constrained(spec.bulk, xi1, xi2, sigma, u)?;
    Ok(ComponentFit {
        params,
        loglik: -fx,
        bulk_identifiable: bulk.identifiable,
        tail_identifiable: tail.identifiable,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub u: u64,
    /// Empirical exceedance proportion at `u`.
    pub phi_hat: f64,
    pub loglik: f64,
    pub params: ParamVector,
}

/// Profile log-likelihood over the admissible thresholds, sorted by `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProfile {
    pub points: Vec<ProfilePoint>,
    /// Index into `points` of the maximum.
    pub best: usize,
}

impl ThresholdProfile {
    pub fn argmax(&self) -> &ProfilePoint {
        &self.points[self.best]
    }
}

/// Thresholds `u` whose empirical exceedance proportion lies in `[lo, hi]`.
pub fn candidate_thresholds(table: &FrequencyTable, phi_bounds: (f64, f64)) -> Vec<u64> {
    let (lo, hi) = phi_bounds;
    (1..=table.max_value())
        .filter(|&u| {
            let phi = mle_exceedance(table, u);
            phi >= lo && phi <= hi
        })
        .collect()
}

/// Runs [`mle_components`] at every threshold whose `φ̂_u` lies in
/// `phi_bounds`. Thresholds where one side of the data is empty are skipped.
pub fn profile_threshold(
    table: &FrequencyTable,
    spec: &MixtureSpec,
    phi_bounds: (f64, f64),
) -> Result<ThresholdProfile> {
    let candidates = candidate_thresholds(table, phi_bounds);
    let no_candidates = Error::NoCandidates { lo: phi_bounds.0, hi: phi_bounds.1 };
    let mut points = Vec::with_capacity(candidates.len());
    for u in candidates {
        match mle_components(table, spec, u) {
            Ok(fit) => points.push(ProfilePoint {
                u,
                phi_hat: mle_exceedance(table, u),
                loglik: fit.loglik,
                params: fit.params,
            }),
            Err(Error::DegenerateSide { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(no_candidates);
    }
    let best = points
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if p.loglik > points[b].loglik { i } else { b });
    Ok(ThresholdProfile { points, best })
}
