//! Metropolis-within-Gibbs sampling of `(ξ₁, ξ₂, σ, u)` together with the
//! model indicator `M` (1 = continuity-constrained `φ_u`, 0 = empirical `φ_u`).
//!
//! One sweep updates, in order:
//!
//! 1. `ln ξ₁` by a Gaussian random walk;
//! 2. `(ξ₂, ln σ)` jointly by a correlated Gaussian random walk;
//! 3. `u` by an integer walk uniform on `±{1, …, u_step}`;
//! 4. `M` by a deterministic flip accepted with the posterior-odds ratio.
//!
//! Proposal scales adapt toward 25% acceptance during burn-in only.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::distributions::{constrained_phi_from, Bulk, BulkKind, MixtureSpec, ParamVector};
use crate::error::{Error, Result};
use crate::likelihood::{bulk_part, mle_exceedance, profile_threshold, tail_part, Parts};
use crate::math;
use crate::table::FrequencyTable;

/// Model indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    /// `M = 0`: `φ_u` is the empirical exceedance proportion.
    Unconstrained,
    /// `M = 1`: `φ_u` follows from density continuity at `u`.
    Constrained,
}

impl Model {
    pub fn indicator(self) -> u8 {
        match self {
            Model::Unconstrained => 0,
            Model::Constrained => 1,
        }
    }

    pub fn from_indicator(m: u8) -> Option<Self> {
        match m {
            0 => Some(Model::Unconstrained),
            1 => Some(Model::Constrained),
            _ => None,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Model::Unconstrained => Model::Constrained,
            Model::Constrained => Model::Unconstrained,
        }
    }

    pub fn is_constrained(self) -> bool {
        self == Model::Constrained
    }

    pub fn spec(self, bulk: BulkKind) -> MixtureSpec {
        MixtureSpec::new(bulk, self.is_constrained())
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={}", self.indicator())
    }
}

/// How the second Gamma hyperparameter on `σ` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaPrior {
    /// `σ ~ Gamma(shape, scale)`, mean `shape·scale`.
    Scale,
    /// `σ ~ Gamma(shape, rate)`, mean `shape/rate`.
    Rate,
}

/// Independent priors on `ξ₁, ξ₂, σ, φ_u` plus the prior probability of `M = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub xi1_lo: f64,
    pub xi1_hi: f64,
    pub xi2_mean: f64,
    pub xi2_sd: f64,
    pub sigma_shape: f64,
    pub sigma_scale: f64,
    pub sigma_param: SigmaPrior,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub prior_m1: f64,
}

impl Default for PriorSpec {
    /// `ξ₁ ~ U(0, 100)`, `ξ₂ ~ N(0, 30²)`, `σ ~ Gamma(1, 0.01)`,
    /// `φ_u ~ U(0.005, 0.4)`, equal model probabilities.
    fn default() -> Self {
        PriorSpec {
            xi1_lo: 0.0,
            xi1_hi: 100.0,
            xi2_mean: 0.0,
            xi2_sd: 30.0,
            sigma_shape: 1.0,
            sigma_scale: 0.01,
            sigma_param: SigmaPrior::Scale,
            phi_lo: 0.005,
            phi_hi: 0.4,
            prior_m1: 0.5,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi1_lo >= 0.0 && self.xi1_hi > self.xi1_lo) {
            return Err(Error::Config("need 0 <= xi1_lo < xi1_hi"));
        }
        if !(self.xi2_sd > 0.0) || !self.xi2_mean.is_finite() {
            return Err(Error::Config("need xi2_sd > 0 and finite xi2_mean"));
        }
        if !(self.sigma_shape > 0.0 && self.sigma_scale > 0.0) {
            return Err(Error::Config("need positive sigma_shape and sigma_scale"));
        }
        if !(self.phi_lo >= 0.0 && self.phi_hi > self.phi_lo && self.phi_hi <= 1.0) {
            return Err(Error::Config("need 0 <= phi_lo < phi_hi <= 1"));
        }
        if !(0.0..=1.0).contains(&self.prior_m1) {
            return Err(Error::Config("prior_m1 must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Gamma scale after resolving the scale/rate reading.
    pub fn sigma_gamma_scale(&self) -> f64 {
        match self.sigma_param {
            SigmaPrior::Scale => self.sigma_scale,
            SigmaPrior::Rate => 1.0 / self.sigma_scale,
        }
    }

    /// Sum of the log prior densities; `-∞` outside the support.
    pub fn log_density(&self, xi1: f64, xi2: f64, sigma: f64, phi: f64) -> f64 {
        if !(xi1 > self.xi1_lo && xi1 < self.xi1_hi) || !(sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        if !(phi >= self.phi_lo && phi <= self.phi_hi) {
            return f64::NEG_INFINITY;
        }
        let z = (xi2 - self.xi2_mean) / self.xi2_sd;
        let scale = self.sigma_gamma_scale();
        let a = self.sigma_shape;
        -math::ln(self.xi1_hi - self.xi1_lo) - 0.5 * z * z
            - math::ln(self.xi2_sd * math::sqrt(2.0 * core::f64::consts::PI))
            + (a - 1.0) * math::ln(sigma)
            - sigma / scale
            - math::ln_gamma(a)
            - a * math::ln(scale)
            - math::ln(self.phi_hi - self.phi_lo)
    }

    fn log_model_prior(&self, m: Model) -> f64 {
        match m {
            Model::Constrained => math::ln(self.prior_m1),
            Model::Unconstrained => math::ln_1p(-self.prior_m1),
        }
    }
}

/// Random-walk step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalScales {
    pub log_xi1: f64,
    pub xi2: f64,
    pub log_sigma: f64,
}

impl Default for ProposalScales {
    fn default() -> Self {
        ProposalScales { log_xi1: 0.1, xi2: 0.05, log_sigma: 0.1 }
    }
}

/// Which sweep blocks run. Disabling blocks freezes those coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blocks {
    pub xi1: bool,
    pub tail: bool,
    pub u: bool,
    pub model: bool,
}

impl Default for Blocks {
    fn default() -> Self {
        Blocks { xi1: true, tail: true, u: true, model: true }
    }
}

/// Explicit starting point, bypassing profile-likelihood initialisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub model: Model,
    pub xi1: f64,
    pub xi2: f64,
    pub sigma: f64,
    pub u: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    /// Total sweeps, burn-in included.
    pub iterations: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub scales: ProposalScales,
    pub adapt: bool,
    pub u_step: u64,
    /// Relative jitter applied to the profile-likelihood start.
    pub init_jitter: f64,
    pub blocks: Blocks,
    pub init: Option<InitialState>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            iterations: 2_020_000,
            burn_in: 20_000,
            thin: 100,
            seed: 1,
            scales: ProposalScales::default(),
            adapt: true,
            u_step: 2,
            init_jitter: 0.1,
            blocks: Blocks::default(),
            init: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(Error::Config("need 0 <= burn_in < iterations"));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1"));
        }
        if self.u_step == 0 {
            return Err(Error::Config("u_step must be at least 1"));
        }
        let s = self.scales;
        if !(s.log_xi1 >= 0.0 && s.xi2 >= 0.0 && s.log_sigma >= 0.0) {
            return Err(Error::Config("proposal scales must be nonnegative"));
        }
        Ok(())
    }

    /// Rows kept after burn-in and thinning.
    pub fn kept_rows(&self) -> u64 {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// One retained posterior draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// Zero-based sweep index.
    pub iter: u64,
    pub model: Model,
    pub xi1: f64,
    pub xi2: f64,
    pub sigma: f64,
    pub u: u64,
    pub phi_u: f64,
    /// Unnormalised log posterior under `model`, model prior excluded.
    pub log_post: f64,
}

impl TraceRow {
    pub fn params(&self) -> ParamVector {
        ParamVector { xi1: self.xi1, xi2: self.xi2, sigma: self.sigma, u: self.u, phi_u: self.phi_u }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(rows: Vec<TraceRow>) -> Self {
        Trace { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, m: Model) -> usize {
        self.rows.iter().filter(|r| r.model == m).count()
    }

    /// Appends another chain's rows.
    pub fn extend(&mut self, other: Trace) {
        self.rows.extend(other.rows);
    }
}

// ---------------------------------------------------------------------------
// Posterior evaluation

/// Data, bulk family and priors of one sampling problem.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub table: &'a FrequencyTable,
    pub bulk: BulkKind,
    pub priors: PriorSpec,
}

/// Posterior value at a point plus what later blocks can reuse.
#[derive(Debug, Clone, Copy)]
struct Eval {
    log_post: f64,
    phi: f64,
    parts: Parts,
    bulk: Bulk,
}

impl<'a> Target<'a> {
    pub fn new(table: &'a FrequencyTable, bulk: BulkKind, priors: PriorSpec) -> Result<Self> {
        priors.validate()?;
        Ok(Target { table, bulk, priors })
    }

    fn phi(&self, m: Model, bulk: &Bulk, sigma_u: f64, u: u64) -> f64 {
        match m {
            Model::Constrained => constrained_phi_from(bulk, sigma_u),
            Model::Unconstrained => mle_exceedance(self.table, u),
        }
    }

    fn finish(&self, m: Model, xi1: f64, xi2: f64, sigma: f64, u: u64, parts: Parts, bulk: Bulk) -> Eval {
        let phi = self.phi(m, &bulk, sigma + xi2 * u as f64, u);
        let prior = self.priors.log_density(xi1, xi2, sigma, phi);
        let log_post = if prior == f64::NEG_INFINITY || parts.tail == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            parts.with_phi(phi) + prior
        };
        Eval { log_post, phi, parts, bulk }
    }

    fn in_support(&self, xi1: f64, xi2: f64, sigma: f64, u: u64) -> bool {
        let p = &self.priors;
        xi1 > p.xi1_lo && xi1 < p.xi1_hi && sigma > 0.0 && xi2.is_finite() && u >= 1
            && sigma + xi2 * u as f64 > 0.0
    }

    fn evaluate(&self, m: Model, xi1: f64, xi2: f64, sigma: f64, u: u64) -> Option<Eval> {
        if !self.in_support(xi1, xi2, sigma, u) {
            return None;
        }
        let bulk = Bulk::new(self.bulk, xi1, u);
        let n_bulk = self.table.count_at_most(u);
        let parts = Parts {
            n_bulk,
            n_tail: self.table.n() - n_bulk,
            bulk: bulk_part(self.table, &bulk, u),
            tail: tail_part(self.table, xi2, sigma + xi2 * u as f64, u),
        };
        Some(self.finish(m, xi1, xi2, sigma, u, parts, bulk))
    }

    /// Unnormalised log posterior of `(ξ₁, ξ₂, σ, u)` under model `m`, with
    /// `φ_u` resolved by the model. Model prior excluded.
    pub fn log_posterior(&self, m: Model, xi1: f64, xi2: f64, sigma: f64, u: u64) -> f64 {
        self.evaluate(m, xi1, xi2, sigma, u).map_or(f64::NEG_INFINITY, |e| e.log_post)
    }
}

/// Log posterior `ln L_M + ln π(ξ₁) + ln π(ξ₂) + ln π(σ) + ln π(φ_u)` with the
/// model given by `spec.constrained`. `params.phi_u` is ignored and re-resolved.
pub fn log_posterior(table: &FrequencyTable, spec: &MixtureSpec, params: &ParamVector, priors: &PriorSpec) -> f64 {
    let target = Target { table, bulk: spec.bulk, priors: *priors };
    let m = if spec.constrained { Model::Constrained } else { Model::Unconstrained };
    target.log_posterior(m, params.xi1, params.xi2, params.sigma, params.u)
}

// ---------------------------------------------------------------------------
// Chain state and sweeps

/// Current position of a chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainState {
    pub model: Model,
    pub xi1: f64,
    pub xi2: f64,
    pub sigma: f64,
    pub u: u64,
    pub phi_u: f64,
    pub log_post: f64,
    parts: Parts,
    bulk: Bulk,
}

impl ChainState {
    /// Builds a state, failing unless its log posterior is finite.
    pub fn new(target: &Target<'_>, init: InitialState) -> Result<Self> {
        let e = target
            .evaluate(init.model, init.xi1, init.xi2, init.sigma, init.u)
            .filter(|e| e.log_post.is_finite())
            .ok_or(Error::Initialization)?;
        Ok(Self::from_eval(init.model, init.xi1, init.xi2, init.sigma, init.u, e))
    }

    fn from_eval(model: Model, xi1: f64, xi2: f64, sigma: f64, u: u64, e: Eval) -> Self {
        ChainState { model, xi1, xi2, sigma, u, phi_u: e.phi, log_post: e.log_post, parts: e.parts, bulk: e.bulk }
    }

    fn row(&self, iter: u64) -> TraceRow {
        TraceRow {
            iter,
            model: self.model,
            xi1: self.xi1,
            xi2: self.xi2,
            sigma: self.sigma,
            u: self.u,
            phi_u: self.phi_u,
            log_post: self.log_post,
        }
    }
}

/// Tunable proposal parameters carried across sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub log_xi1: f64,
    /// Lower-triangular factor of the `(ξ₂, ln σ)` step covariance.
    pub tail_chol: [[f64; 2]; 2],
    /// Multiplier on `tail_chol`.
    pub tail_mult: f64,
    pub u_step: u64,
}

impl Proposal {
    pub fn from_config(config: &McmcConfig) -> Self {
        let s = config.scales;
        Proposal {
            log_xi1: s.log_xi1,
            tail_chol: [[s.xi2, 0.0], [0.0, s.log_sigma]],
            tail_mult: 1.0,
            u_step: config.u_step,
        }
    }
}

/// Which blocks accepted in one sweep (`None` if the block did not run).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub xi1: Option<bool>,
    pub tail: Option<bool>,
    pub u: Option<bool>,
    pub model: Option<bool>,
}

#[inline]
fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    let v: f64 = rng.random();
    math::ln(v) < log_ratio
}

/// Metropolis step on the model indicator. With equal log posteriors the
/// stationary law of the indicator is the model prior.
pub fn model_flip<R: Rng + ?Sized>(
    current: Model,
    log_post_current: f64,
    log_post_other: f64,
    prior_m1: f64,
    rng: &mut R,
) -> Model {
    let other = current.other();
    let lp = |m: Model| match m {
        Model::Constrained => math::ln(prior_m1),
        Model::Unconstrained => math::ln_1p(-prior_m1),
    };
    if log_post_other == f64::NEG_INFINITY || lp(other) == f64::NEG_INFINITY {
        return current;
    }
    let ratio = log_post_other + lp(other) - log_post_current - lp(current);
    if accept(ratio, rng) {
        other
    } else {
        current
    }
}

/// One Metropolis-within-Gibbs sweep. Each block is accepted or rejected by its
/// own Metropolis-Hastings ratio, including the Jacobians of the log-scale walks.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    target: &Target<'_>,
    proposal: &Proposal,
    blocks: &Blocks,
    rng: &mut R,
) -> SweepOutcome {
    let mut out = SweepOutcome::default();
    let m = state.model;

    // (a) ln ξ₁
    if blocks.xi1 {
        let z: f64 = StandardNormal.sample(rng);
        let lx = math::ln(state.xi1) + proposal.log_xi1 * z;
        let xi1 = math::exp(lx);
        let mut ok = false;
        if target.in_support(xi1, state.xi2, state.sigma, state.u) {
            let bulk = Bulk::new(target.bulk, xi1, state.u);
            let parts = Parts { bulk: bulk_part(target.table, &bulk, state.u), ..state.parts };
            let e = target.finish(m, xi1, state.xi2, state.sigma, state.u, parts, bulk);
            let ratio = e.log_post - state.log_post + lx - math::ln(state.xi1);
            if accept(ratio, rng) {
                *state = ChainState::from_eval(m, xi1, state.xi2, state.sigma, state.u, e);
                ok = true;
            }
        }
        out.xi1 = Some(ok);
    }

    // (b) (ξ₂, ln σ)
    if blocks.tail {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let l = &proposal.tail_chol;
        let k = proposal.tail_mult;
        let xi2 = state.xi2 + k * l[0][0] * z1;
        let ls = math::ln(state.sigma) + k * (l[1][0] * z1 + l[1][1] * z2);
        let sigma = math::exp(ls);
        let mut ok = false;
        if target.in_support(state.xi1, xi2, sigma, state.u) {
            let tail = tail_part(target.table, xi2, sigma + xi2 * state.u as f64, state.u);
            let parts = Parts { tail, ..state.parts };
            let e = target.finish(m, state.xi1, xi2, sigma, state.u, parts, state.bulk);
            let ratio = e.log_post - state.log_post + ls - math::ln(state.sigma);
            if accept(ratio, rng) {
                *state = ChainState::from_eval(m, state.xi1, xi2, sigma, state.u, e);
                ok = true;
            }
        }
        out.tail = Some(ok);
    }

    // (c) u
    if blocks.u {
        let step = rng.random_range(1..=proposal.u_step);
        let up: bool = rng.random();
        let u = if up { state.u.checked_add(step) } else { state.u.checked_sub(step) };
        let mut ok = false;
        if let Some(u) = u.filter(|&u| u >= 1) {
            if let Some(e) = target.evaluate(m, state.xi1, state.xi2, state.sigma, u) {
                if accept(e.log_post - state.log_post, rng) {
                    *state = ChainState::from_eval(m, state.xi1, state.xi2, state.sigma, u, e);
                    ok = true;
                }
            }
        }
        out.u = Some(ok);
    }

    // (d) M
    if blocks.model {
        let other = m.other();
        let e = target.finish(other, state.xi1, state.xi2, state.sigma, state.u, state.parts, state.bulk);
        let next = model_flip(m, state.log_post, e.log_post, target.priors.prior_m1, rng);
        let flipped = next != m;
        if flipped {
            *state = ChainState::from_eval(other, state.xi1, state.xi2, state.sigma, state.u, e);
        }
        out.model = Some(flipped);
    }
    out
}

// ---------------------------------------------------------------------------
// Chains

/// Independent stream for chain `index`: the seeded generator advanced by
/// `index` jumps of 2^128 steps.
pub fn chain_rng(seed: u64, index: usize) -> Xoshiro256PlusPlus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

/// Post-burn-in acceptance rates per block (`NaN` when the block never ran).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceRates {
    pub xi1: f64,
    pub tail: f64,
    pub u: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub trace: Trace,
    pub acceptance: AcceptanceRates,
    /// Proposal in force after burn-in.
    pub proposal: Proposal,
    pub initial: InitialState,
}

#[derive(Default)]
struct Tally {
    tries: [u64; 4],
    hits: [u64; 4],
}

impl Tally {
    fn add(&mut self, o: &SweepOutcome) {
        for (i, b) in [o.xi1, o.tail, o.u, o.model].iter().enumerate() {
            if let Some(acc) = b {
                self.tries[i] += 1;
                self.hits[i] += *acc as u64;
            }
        }
    }

    fn rate(&self, i: usize) -> f64 {
        if self.tries[i] == 0 {
            f64::NAN
        } else {
            self.hits[i] as f64 / self.tries[i] as f64
        }
    }
}

const ADAPT_BATCH: u64 = 50;
const TARGET_ACCEPT: f64 = 0.25;

/// Running moments of `(ξ₂, ln σ)` for the tail proposal covariance.
#[derive(Default)]
struct Moments {
    n: f64,
    mean: [f64; 2],
    m2: [[f64; 2]; 2],
}

impl Moments {
    fn push(&mut self, x: [f64; 2]) {
        self.n += 1.0;
        let d = [x[0] - self.mean[0], x[1] - self.mean[1]];
        self.mean[0] += d[0] / self.n;
        self.mean[1] += d[1] / self.n;
        let d2 = [x[0] - self.mean[0], x[1] - self.mean[1]];
        for i in 0..2 {
            for j in 0..2 {
                self.m2[i][j] += d[i] * d2[j];
            }
        }
    }

    fn chol(&self) -> Option<[[f64; 2]; 2]> {
        if self.n < 100.0 {
            return None;
        }
        let c = |i: usize, j: usize| self.m2[i][j] / (self.n - 1.0);
        let a = c(0, 0) + 1e-12;
        let b = c(1, 0);
        let d = c(1, 1) + 1e-12;
        let l00 = math::sqrt(a);
        let l10 = b / l00;
        let r = d - l10 * l10;
        if !(l00 > 0.0 && r > 0.0) {
            return None;
        }
        Some([[l00, 0.0], [l10, math::sqrt(r)]])
    }
}

/// Picks a starting state: the explicit one in `config.init`, otherwise the
/// unconstrained profile-likelihood argmax with relative jitter.
pub fn initial_state<R: Rng + ?Sized>(
    target: &Target<'_>,
    config: &McmcConfig,
    rng: &mut R,
) -> Result<ChainState> {
    if let Some(init) = config.init {
        return ChainState::new(target, init);
    }
    let priors = &target.priors;
    let spec = MixtureSpec::new(target.bulk, false);
    let profile = profile_threshold(target.table, &spec, (priors.phi_lo, priors.phi_hi))
        .map_err(|_| Error::Initialization)?;
    let best = profile.argmax().params;

    let mut models = [Model::Constrained, Model::Unconstrained];
    if priors.prior_m1 < 0.5 {
        models.swap(0, 1);
    }
    let allowed = |m: Model| match m {
        Model::Constrained => priors.prior_m1 > 0.0,
        Model::Unconstrained => priors.prior_m1 < 1.0,
    };
    let xi1_start = best.xi1.clamp(priors.xi1_lo + 1e-6, priors.xi1_hi - 1e-6);
    let j = config.init_jitter;
    for attempt in 0..200 {
        let jitter = |rng: &mut R| if attempt < 199 { 1.0 + j * rng.random_range(-1.0..1.0) } else { 1.0 };
        let xi1 = xi1_start * jitter(rng);
        let xi2 = best.xi2 * jitter(rng);
        let sigma = best.sigma * jitter(rng);
        for &m in models.iter().filter(|&&m| allowed(m)) {
            let init = InitialState { model: m, xi1, xi2, sigma, u: best.u };
            if let Ok(s) = ChainState::new(target, init) {
                return Ok(s);
            }
        }
    }
    Err(Error::Initialization)
}

/// Runs one chain with the stream [`chain_rng`]`(config.seed, 0)`.
pub fn run_chain(
    table: &FrequencyTable,
    bulk: BulkKind,
    priors: &PriorSpec,
    config: &McmcConfig,
) -> Result<ChainOutput> {
    let mut rng = chain_rng(config.seed, 0);
    run_chain_with_rng(table, bulk, priors, config, &mut rng)
}

/// Runs one chain on a caller-supplied stream. Deterministic given the stream.
pub fn run_chain_with_rng<R: Rng + ?Sized>(
    table: &FrequencyTable,
    bulk: BulkKind,
    priors: &PriorSpec,
    config: &McmcConfig,
    rng: &mut R,
) -> Result<ChainOutput> {
    config.validate()?;
    let target = Target::new(table, bulk, *priors)?;
    let mut state = initial_state(&target, config, rng)?;
    let initial = InitialState { model: state.model, xi1: state.xi1, xi2: state.xi2, sigma: state.sigma, u: state.u };

    let mut proposal = Proposal::from_config(config);
    let mut rows = Vec::with_capacity(config.kept_rows() as usize);
    let mut batch = Tally::default();
    let mut kept = Tally::default();
    let mut moments = Moments::default();
    let mut batches = 0u64;

    for iter in 0..config.iterations {
        let outcome = gibbs_sweep(&mut state, &target, &proposal, &config.blocks, rng);
        let burning = iter < config.burn_in;

        if burning {
            if config.adapt {
                batch.add(&outcome);
                if iter >= config.burn_in / 4 {
                    moments.push([state.xi2, math::ln(state.sigma)]);
                }
                if (iter + 1) % ADAPT_BATCH == 0 {
                    batches += 1;
                    let gain = f64::min(1.0, 5.0 / math::sqrt(batches as f64));
                    if batch.tries[0] > 0 {
                        proposal.log_xi1 *= math::exp(gain * (batch.rate(0) - TARGET_ACCEPT));
                    }
                    if batch.tries[1] > 0 {
                        proposal.tail_mult *= math::exp(gain * (batch.rate(1) - TARGET_ACCEPT));
                    }
                    if batches % 10 == 0 {
                        if let Some(l) = moments.chol() {
                            // hand the overall size back to the multiplier
                            let cur = math::sqrt(
                                proposal.tail_chol[0][0] * proposal.tail_chol[0][0]
                                    + proposal.tail_chol[1][1] * proposal.tail_chol[1][1],
                            );
                            let new = math::sqrt(l[0][0] * l[0][0] + l[1][1] * l[1][1]);
                            if new > 0.0 {
                                proposal.tail_mult *= cur / new;
                                proposal.tail_chol = l;
                            }
                        }
                    }
                    batch = Tally::default();
                }
            }
            continue;
        }

        kept.add(&outcome);
        if (iter - config.burn_in + 1) % config.thin == 0 {
            rows.push(state.row(iter));
        }
    }

    Ok(ChainOutput {
        trace: Trace::new(rows),
        acceptance: AcceptanceRates { xi1: kept.rate(0), tail: kept.rate(1), u: kept.rate(2), model: kept.rate(3) },
        proposal,
        initial,
    })
}

/// `B₀₁ = [π̂(M=0|x) / π̂(M=1|x)] / [π(M=0) / π(M=1)]` from model occupancy.
///
/// If one model is never visited, returns [`Error::DegenerateTrace`] carrying
/// the one-sided bound obtained by crediting that model with a single visit.
pub fn bayes_factor(trace: &Trace, priors: &PriorSpec) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let p1 = priors.prior_m1;
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::Config("Bayes factor needs 0 < prior_m1 < 1"));
    }
    let prior_odds = (1.0 - p1) / p1;
    let n0 = trace.count(Model::Unconstrained) as f64;
    let n1 = trace.count(Model::Constrained) as f64;
    if n1 == 0.0 {
        return Err(Error::DegenerateTrace { unvisited: Model::Constrained, bound: n0 / prior_odds });
    }
    if n0 == 0.0 {
        return Err(Error::DegenerateTrace { unvisited: Model::Unconstrained, bound: 1.0 / n1 / prior_odds });
    }
    Ok(n0 / n1 / prior_odds)
}

/// Log prior odds helper for callers that combine per-model posteriors.
pub fn log_model_prior(priors: &PriorSpec, m: Model) -> f64 {
    priors.log_model_prior(m)
}
