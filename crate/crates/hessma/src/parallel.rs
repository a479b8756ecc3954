use std::sync::Once;

use hessma_core::ma_measure::{SlopeOracleConfig, SlopeSampler};
use hessma_core::{Partition, PartitionMeasure, PeriodicFunction, Result};
use rayon::prelude::*;

static INIT: Once = Once::new();

/// Size the global thread pool from `HESSMA_THREADS` (unset or invalid
/// leaves rayon's default).
pub fn init_threads() {
    INIT.call_once(|| {
        if let Some(n) = std::env::var("HESSMA_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    });
}

/// Slope-sampling oracle with batches spread over the thread pool. Counts
/// are merged exactly, so the result matches the serial driver bit for bit.
pub fn slopes_parallel<F: PeriodicFunction + Sync + ?Sized>(
    u: &F,
    partition: &Partition,
    cfg: &SlopeOracleConfig,
) -> Result<PartitionMeasure> {
    if cfg.samples == 0 || cfg.batch_size == 0 {
        return hessma_core::ma_measure::ma_oracle_slopes(u, partition, cfg);
    }
    let sampler = SlopeSampler::new(u, partition, cfg.grid, cfg.seed)?;
    let counts = (0..cfg.batches())
        .into_par_iter()
        .map(|b| sampler.run_batch(b, cfg.batch_len(b)))
        .reduce(
            || vec![0u64; partition.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(sampler.finish(&counts))
}
