use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use tailmix_core::distributions::sample_mixture_seeded;
use tailmix_core::posterior::{split_by_model, summarize_params, survival_band};
use tailmix_core::sampler::{
    log_posterior, model_flip, run_chain, Blocks, InitialState, McmcConfig, Model, PriorSpec, SigmaPrior,
};
use tailmix_core::{BulkKind, FrequencyTable, MixtureSpec, ParamVector};

/// Asymptotic standard error of the occupancy fraction of state 1 in a
/// two-state chain with switch probabilities `a` (1→2) and `b` (2→1).
fn two_state_se(a: f64, b: f64, sweeps: f64) -> f64 {
    let p1 = b / (a + b);
    let lambda = 1.0 - a - b;
    (p1 * (1.0 - p1) * (1.0 + lambda) / (1.0 - lambda) / sweeps).sqrt()
}

#[test]
fn frozen_two_point_threshold_matches_enumeration() {
    let t = FrequencyTable::from_counts([(1, 50), (2, 30), (3, 15), (4, 5)]).unwrap();
    // φ̂ = 0.5 at u = 1, 0.2 at u = 2 and 0.05 at u = 3, so only u ∈ {1, 2} is admissible
    let priors = PriorSpec { phi_lo: 0.1, phi_hi: 0.6, ..PriorSpec::default() };
    let (xi1, xi2, sigma) = (0.9, 0.2, 0.6);
    let spec = MixtureSpec::new(BulkKind::Geometric, false);
    let lp = |u: u64| log_posterior(&t, &spec, &ParamVector { xi1, xi2, sigma, u, phi_u: 0.0 }, &priors);
    assert_eq!(lp(3), f64::NEG_INFINITY);
    let (l1, l2) = (lp(1), lp(2));
    let p1 = 1.0 / (1.0 + (l2 - l1).exp());
    assert!(p1 > 0.05 && p1 < 0.95, "test posterior too lopsided: {p1}");

    let sweeps = 100_000u64;
    let config = McmcConfig {
        iterations: sweeps,
        burn_in: 0,
        thin: 1,
        seed: 12,
        adapt: false,
        u_step: 1,
        blocks: Blocks { xi1: false, tail: false, u: true, model: false },
        init: Some(InitialState { model: Model::Unconstrained, xi1, xi2, sigma, u: 1 }),
        ..McmcConfig::default()
    };
    let out = run_chain(&t, BulkKind::Geometric, &priors, &config).unwrap();
    assert_eq!(out.trace.len() as u64, sweeps);
    let occ = out.trace.rows.iter().filter(|r| r.u == 1).count() as f64 / sweeps as f64;

    // each move proposes the other state with probability 1/2
    let a = 0.5 * (l2 - l1).exp().min(1.0);
    let b = 0.5 * (l1 - l2).exp().min(1.0);
    let se = two_state_se(a, b, sweeps as f64);
    assert!((occ - p1).abs() <= 3.0 * se, "occupancy {occ} vs exact {p1} (se {se})");
}

#[test]
fn model_flip_with_equal_posteriors_recovers_the_prior() {
    let prior_m1 = 0.3;
    let steps = 100_000;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(77);
    let mut m = Model::Unconstrained;
    let mut ones = 0usize;
    for _ in 0..steps {
        m = model_flip(m, -12.5, -12.5, prior_m1, &mut rng);
        ones += m.is_constrained() as usize;
    }
    let occ = ones as f64 / steps as f64;
    // M=0 → 1 is accepted with probability 0.3/0.7 and 1 → 0 always
    let se = two_state_se(1.0, prior_m1 / (1.0 - prior_m1), steps as f64);
    assert!((occ - prior_m1).abs() <= 3.0 * se, "{occ} (se {se})");
}

fn synthetic(n: usize, seed: u64) -> FrequencyTable {
    let spec = MixtureSpec::new(BulkKind::Geometric, true);
    let p = ParamVector::constrained(BulkKind::Geometric, 2.0, 0.3, 2.0, 8).unwrap();
    FrequencyTable::from_values(sample_mixture_seeded(&spec, &p, n, seed).unwrap()).unwrap()
}

#[test]
fn trace_rows_respect_supports_and_the_phi_grid() {
    let t = synthetic(3_000, 4);
    let priors = PriorSpec { sigma_param: SigmaPrior::Rate, ..PriorSpec::default() };
    let config = McmcConfig { iterations: 30_000, burn_in: 5_000, thin: 5, seed: 3, ..McmcConfig::default() };
    let out = run_chain(&t, BulkKind::Geometric, &priors, &config).unwrap();
    assert_eq!(out.trace.len(), 5_000);
    let n = t.n() as f64;
    let lo = (priors.phi_lo * n).ceil();
    let hi = (priors.phi_hi * n).floor();
    for r in &out.trace.rows {
        assert!(r.log_post.is_finite());
        assert!(r.params().validate().is_ok() || r.phi_u == 0.0);
        assert!(r.phi_u >= priors.phi_lo && r.phi_u <= priors.phi_hi);
        assert!(r.sigma + r.xi2 * r.u as f64 > 0.0);
        if r.model == Model::Unconstrained {
            let k = r.phi_u * n;
            assert!((k - k.round()).abs() < 1e-9, "φ = {} is off the n_u/n grid", r.phi_u);
            assert!(k.round() >= lo && k.round() <= hi);
        }
    }
    let (m1, m0) = split_by_model(&out.trace);
    assert!(!m1.is_empty() && !m0.is_empty(), "chain never switched models");
}

#[test]
fn chain_recovers_simulation_truth() {
    let spec = MixtureSpec::new(BulkKind::Geometric, true);
    let truth = ParamVector::constrained(BulkKind::Geometric, 2.0, 0.3, 2.0, 15).unwrap();
    let t = FrequencyTable::from_values(sample_mixture_seeded(&spec, &truth, 50_000, 31).unwrap()).unwrap();
    // the truth has φ ≈ 0.0023, below the default prior's lower bound
    let priors = PriorSpec { phi_lo: 0.0005, sigma_param: SigmaPrior::Rate, ..PriorSpec::default() };
    let config = McmcConfig { iterations: 120_000, burn_in: 20_000, thin: 100, seed: 8, ..McmcConfig::default() };
    let out = run_chain(&t, BulkKind::Geometric, &priors, &config).unwrap();
    assert_eq!(out.trace.len(), 1000);
    let s = summarize_params(&out.trace, 0.99).unwrap();
    assert!((s.xi1.mean - 2.0).abs() <= 3.0 * s.xi1.sd, "{:?}", s.xi1);
    assert!((s.xi2.mean - 0.3).abs() <= 3.0 * s.xi2.sd, "{:?}", s.xi2);
    for rate in [out.acceptance.xi1, out.acceptance.tail] {
        assert!(rate > 0.1 && rate < 0.5, "post-burn-in acceptance {rate}");
    }
}

#[test]
fn survival_band_covers_synthetic_data_and_converges() {
    let t = synthetic(5_000, 19);
    let priors = PriorSpec { sigma_param: SigmaPrior::Rate, ..PriorSpec::default() };
    let run = |iters: u64, seed: u64| {
        let config = McmcConfig { iterations: iters + 5_000, burn_in: 5_000, thin: 10, seed, ..McmcConfig::default() };
        run_chain(&t, BulkKind::Geometric, &priors, &config).unwrap().trace
    };

    let long = run(100_000, 1);
    let band = survival_band(&long, &t, BulkKind::Geometric, 0.99).unwrap();
    let observed: Vec<_> = band.rows.iter().filter(|r| t.values().binary_search(&r.x).is_ok()).collect();
    let inside = observed.iter().filter(|r| r.emp_surv >= r.lo && r.emp_surv <= r.hi).count();
    assert!(inside as f64 >= 0.95 * observed.len() as f64, "{inside} of {}", observed.len());
    for r in &band.rows {
        assert!(0.0 <= r.lo && r.lo <= r.med && r.med <= r.hi && r.hi <= 1.0);
    }
    assert!(band.rows.windows(2).all(|w| w[1].emp_surv <= w[0].emp_surv));

    // Monte Carlo error in the band edges falls as the trace grows tenfold
    let edge_gap = |a: &tailmix_core::Trace, b: &tailmix_core::Trace| {
        let ba = survival_band(a, &t, BulkKind::Geometric, 0.9).unwrap();
        let bb = survival_band(b, &t, BulkKind::Geometric, 0.9).unwrap();
        ba.rows.iter().zip(&bb.rows).map(|(x, y)| (x.lo - y.lo).abs() + (x.hi - y.hi).abs()).sum::<f64>()
    };
    let short_gap = edge_gap(&run(10_000, 2), &run(10_000, 3));
    let long_gap = edge_gap(&run(100_000, 4), &run(100_000, 5));
    assert!(long_gap < short_gap, "{long_gap} vs {short_gap}");
}
