//! Multi-threaded drivers for bootstrap and Monte-Carlo loops.
//!
//! Each replicate draws from its own indexed stream and results are
//! gathered in index order, so output never depends on the thread count.

use airborne_core::bootstrap::ResidualBootstrap;
use airborne_core::simulate::{estimate_replication, summarize, SimulationError};
use airborne_core::{BiasReport, BootstrapError, BootstrapResult, SyntheticConfig};
use rayon::prelude::*;

/// Runs `f` on a dedicated pool of `threads` workers, or on rayon's global
/// pool when `threads` is `None`.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, rayon::ThreadPoolBuildError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
        None => Ok(f()),
    }
}

// The first failure by index wins, whatever order threads finish in.
fn first_error<T, E>(results: Vec<Result<T, E>>) -> Result<Vec<T>, E> {
    results.into_iter().collect()
}

pub fn run_bootstrap(boot: &ResidualBootstrap) -> Result<BootstrapResult, BootstrapError> {
    let results: Vec<_> = (0..boot.config().replications())
        .into_par_iter()
        .map(|b| boot.replicate(b))
        .collect();
    boot.summarize(first_error(results)?)
}

pub fn monte_carlo(
    cfg: &SyntheticConfig,
    replications: usize,
) -> Result<BiasReport, SimulationError> {
    cfg.validate()?;
    if replications == 0 {
        return Err(SimulationError::InvalidConfig(
            "at least one replication is required",
        ));
    }
    let results: Vec<_> = (0..replications as u64)
        .into_par_iter()
        .map(|r| estimate_replication(cfg, r))
        .collect();
    Ok(summarize(cfg, &first_error(results)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use airborne_core::simulate::generate;
    use airborne_core::{BootstrapConfig, DemingConfig};

    #[test]
    fn bootstrap_is_thread_count_invariant() {
        let data = generate(&SyntheticConfig::default()).unwrap();
        let boot = ResidualBootstrap::new(
            &data.g,
            &data.e1,
            None,
            DemingConfig::new(1.0).unwrap(),
            BootstrapConfig::new(500, 42, 0.95).unwrap(),
        )
        .unwrap();
        let serial = boot.run().unwrap();
        for threads in [1, 2, 4, 7] {
            assert_eq!(
                with_threads(Some(threads), || run_bootstrap(&boot))
                    .unwrap()
                    .unwrap(),
                serial
            );
        }
    }

    #[test]
    fn monte_carlo_matches_serial() {
        let cfg = SyntheticConfig {
            t: 100,
            ..SyntheticConfig::default()
        };
        let serial = airborne_core::simulate::monte_carlo(&cfg, 40).unwrap();
        assert_eq!(
            with_threads(Some(3), || monte_carlo(&cfg, 40))
                .unwrap()
                .unwrap(),
            serial
        );
    }
}
