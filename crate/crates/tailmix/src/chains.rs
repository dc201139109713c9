use std::thread;

use tailmix_core::sampler::{chain_rng, run_chain_with_rng, ChainOutput};
use tailmix_core::{BulkKind, FrequencyTable, McmcConfig, PriorSpec, Result, Trace};

/// Runs `chains` independent chains on their own threads. Chain `i` draws from
/// `chain_rng(config.seed, i)`, so the result does not depend on scheduling
/// and chain 0 reproduces [`tailmix_core::sampler::run_chain`].
pub fn run_chains(
    table: &FrequencyTable,
    bulk: BulkKind,
    priors: &PriorSpec,
    config: &McmcConfig,
    chains: usize,
) -> Result<Vec<ChainOutput>> {
    thread::scope(|s| {
        let handles: Vec<_> = (0..chains)
            .map(|i| {
                s.spawn(move || {
                    let mut rng = chain_rng(config.seed, i);
                    run_chain_with_rng(table, bulk, priors, config, &mut rng)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    })
}

/// Concatenates the traces in chain order.
pub fn pooled_trace(outputs: &[ChainOutput]) -> Trace {
    let mut t = Trace::new(Vec::new());
    for o in outputs {
        t.extend(o.trace.clone());
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use tailmix_core::sampler::run_chain;
    use tailmix_core::SigmaPrior;

    #[test]
    fn first_chain_matches_the_serial_runner() {
        let t = FrequencyTable::from_counts([(1, 40), (2, 25), (3, 12), (4, 8), (6, 5), (9, 4), (15, 3), (40, 2)]).unwrap();
        let priors = PriorSpec { sigma_param: SigmaPrior::Rate, ..PriorSpec::default() };
        let config = McmcConfig { iterations: 3_000, burn_in: 1_000, thin: 10, seed: 5, ..McmcConfig::default() };
        let outs = run_chains(&t, BulkKind::Geometric, &priors, &config, 3).unwrap();
        let serial = run_chain(&t, BulkKind::Geometric, &priors, &config).unwrap();
        assert_eq!(outs[0], serial);
        assert_ne!(outs[0].trace, outs[1].trace);
        assert_eq!(pooled_trace(&outs).len(), 600);
    }
}
