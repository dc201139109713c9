//! Summaries of posterior traces: model splits, survival bands, goodness of
//! fit, exponent summaries and data diagnostics.

use alloc::vec::Vec;

use crate::distributions::{BulkKind, SurvivalCurve};
use crate::error::{Error, Result};
use crate::sampler::{Model, Trace, TraceRow};
use crate::table::FrequencyTable;
use crate::math;

/// Splits a trace by model indicator into `(constrained, unconstrained)`,
/// preserving row order.
pub fn split_by_model(trace: &Trace) -> (Trace, Trace) {
    let (m1, m0): (Vec<TraceRow>, Vec<TraceRow>) =
        trace.rows.iter().partition(|r| r.model == Model::Constrained);
    (Trace::new(m1), Trace::new(m0))
}

/// `α = 1/ξ + 1`
pub fn alpha_from_xi(xi: f64) -> f64 {
    1.0 / xi + 1.0
}

/// `ξ = 1/(α - 1)`
pub fn xi_from_alpha(alpha: f64) -> f64 {
    1.0 / (alpha - 1.0)
}

/// Sample quantile by linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = math::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, standard deviation and central interval of one scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator; 0 for one draw).
    pub sd: f64,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Summarises draws with a central `level` interval. NaNs are dropped.
pub fn summarize(draws: &[f64], level: f64) -> Result<Summary> {
    let mut v: Vec<f64> = draws.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return Err(Error::EmptyTrace);
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        math::sqrt(v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    let a = (1.0 - level) / 2.0;
    Ok(Summary {
        mean,
        sd,
        median: quantile_sorted(&v, 0.5),
        lo: quantile_sorted(&v, a),
        hi: quantile_sorted(&v, 1.0 - a),
        n,
    })
}

/// Per-parameter summaries of one model's draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummaries {
    pub xi1: Summary,
    pub xi2: Summary,
    pub sigma: Summary,
    pub u: Summary,
    pub phi_u: Summary,
}

pub fn summarize_params(trace: &Trace, level: f64) -> Result<ParamSummaries> {
    let col = |f: fn(&TraceRow) -> f64| -> Result<Summary> {
        let v: Vec<f64> = trace.rows.iter().map(f).collect();
        summarize(&v, level)
    };
    Ok(ParamSummaries {
        xi1: col(|r| r.xi1)?,
        xi2: col(|r| r.xi2)?,
        sigma: col(|r| r.sigma)?,
        u: col(|r| r.u as f64)?,
        phi_u: col(|r| r.phi_u)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalBandRow {
    pub x: u64,
    /// Empirical `Pr(X >= x)`.
    pub emp_surv: f64,
    pub lo: f64,
    pub med: f64,
    pub hi: f64,
}

/// Pointwise posterior band of the survival function `Pr(X >= x)` for every
/// integer `x` from 1 to the largest observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalBand {
    pub level: f64,
    pub rows: Vec<SurvivalBandRow>,
}

/// Evaluates the survival function of every trace row at `x = 1..=max(data)`
/// and reports pointwise median and central `level` quantiles.
pub fn survival_band(trace: &Trace, table: &FrequencyTable, bulk: BulkKind, level: f64) -> Result<SurvivalBand> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config("band level must lie in (0, 1)"));
    }
    let k = table.max_value() as usize;
    let m = trace.len();
    // column-major: all draws for one x are contiguous
    let mut grid = alloc::vec![0.0; k * m];
    for (j, row) in trace.rows.iter().enumerate() {
        let curve = SurvivalCurve::new(bulk, &row.params());
        for i in 0..k {
            grid[i * m + j] = curve.survival(i as u64 + 1);
        }
    }
    let a = (1.0 - level) / 2.0;
    let rows = (0..k)
        .map(|i| {
            let x = i as u64 + 1;
            let col = &mut grid[i * m..(i + 1) * m];
            col.sort_by(f64::total_cmp);
            SurvivalBandRow {
                x,
                emp_surv: table.empirical_survival(x),
                lo: quantile_sorted(col, a),
                med: quantile_sorted(col, 0.5),
                hi: quantile_sorted(col, 1.0 - a),
            }
        })
        .collect();
    Ok(SurvivalBand { level, rows })
}

/// Row with the largest log posterior; an approximation of the joint mode.
pub fn posterior_mode(trace: &Trace) -> Result<&TraceRow> {
    trace
        .rows
        .iter()
        .filter(|r| !r.log_post.is_nan())
        .max_by(|a, b| a.log_post.total_cmp(&b.log_post))
        .ok_or(Error::EmptyTrace)
}

/// Kolmogorov-Smirnov distance between the empirical and fitted survival
/// functions over `x = 1..=max(data)`, at the given parameters.
/// Returns `(statistic, smallest x at which it is attained)`.
pub fn ks_at(table: &FrequencyTable, bulk: BulkKind, row: &TraceRow) -> (f64, u64) {
    let curve = SurvivalCurve::new(bulk, &row.params());
    let mut best = (0.0, 1);
    for x in 1..=table.max_value() {
        let d = math::abs(table.empirical_survival(x) - curve.survival(x));
        if d > best.0 {
            best = (d, x);
        }
    }
    best
}

/// KS statistic at the posterior mode of `trace`.
pub fn ks_statistic(trace: &Trace, table: &FrequencyTable, bulk: BulkKind) -> Result<(f64, u64)> {
    Ok(ks_at(table, bulk, posterior_mode(trace)?))
}

/// Posterior summaries of the implied power-law exponents `α = 1/ξ + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPosterior {
    /// Bulk exponent `α₁ = 1/ξ₁ + 1` (power-law bulk only).
    pub alpha1: Option<Summary>,
    /// Tail exponent `α₂ = 1/ξ₂ + 1` over draws with `ξ₂ > 0`.
    pub alpha2: Option<Summary>,
    /// Draws with `ξ₂ <= 0`, for which `α₂` is undefined.
    pub nonpositive_xi2: usize,
}

pub fn exponent_posterior(trace: &Trace, bulk: BulkKind, level: f64) -> Result<ExponentPosterior> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let alpha1 = match bulk {
        BulkKind::PowerLaw => {
            let v: Vec<f64> = trace.rows.iter().map(|r| alpha_from_xi(r.xi1)).collect();
            Some(summarize(&v, level)?)
        }
        BulkKind::Geometric => None,
    };
    let a2: Vec<f64> = trace.rows.iter().filter(|r| r.xi2 > 0.0).map(|r| alpha_from_xi(r.xi2)).collect();
    let nonpositive_xi2 = trace.len() - a2.len();
    let alpha2 = if a2.is_empty() { None } else { Some(summarize(&a2, level)?) };
    Ok(ExponentPosterior { alpha1, alpha2, nonpositive_xi2 })
}

/// Cheap descriptive checks on a data set before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataDiagnostics {
    pub n: u64,
    pub zero_count: u64,
    /// Share of all observations (zeros included) that are zero.
    pub zero_proportion: f64,
    /// Share of positive observations equal to 1 or 2.
    pub proportion_le_2: f64,
    pub unique_values: usize,
    pub max_value: u64,
    /// Thresholds `u` whose empirical `φ̂_u` falls in `[phi_lo, phi_hi]`.
    pub admissible_thresholds: usize,
    /// Distinct values `φ̂_u = n_u/n` achievable inside `[phi_lo, phi_hi]`.
    pub unique_phi: usize,
}

pub fn data_diagnostics(table: &FrequencyTable, phi_bounds: (f64, f64)) -> DataDiagnostics {
    let n = table.n();
    let z = table.zero_count();
    let candidates = crate::likelihood::candidate_thresholds(table, phi_bounds);
    let mut n_u: Vec<u64> = candidates.iter().map(|&u| table.count_exceeding(u)).collect();
    n_u.dedup();
    DataDiagnostics {
        n,
        zero_count: z,
        zero_proportion: z as f64 / (n + z) as f64,
        proportion_le_2: table.count_at_most(2) as f64 / n as f64,
        unique_values: table.unique_len(),
        max_value: table.max_value(),
        admissible_thresholds: candidates.len(),
        unique_phi: n_u.len(),
    }
}
