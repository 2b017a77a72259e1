//! Parallel sweep execution.
//!
//! Trials are independent and addressed by (point, trial) substreams, and
//! reduction is a sum of per-trial counts, so the curve is identical for any
//! worker count — including the sequential reference path in `dmt_core`.

use std::io::Write as _;
use std::time::Instant;

use dmt_core::analysis::{outage_point_from_counts, outage_trial, AnalysisError, OutageCurve};
use dmt_core::model::SystemConfig;
use rayon::prelude::*;

/// Runs the configured sweep on a dedicated thread pool of `workers` threads.
pub fn sweep_parallel(
    config: &SystemConfig,
    workers: usize,
    progress: bool,
) -> Result<OutageCurve, AnalysisError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    let total_points = config.snr_grid_db().len();
    let mut points = Vec::with_capacity(total_points);
    for (index, &snr_db) in config.snr_grid_db().iter().enumerate() {
        let started = Instant::now();
        let (outages, discarded) = pool.install(|| {
            (0..config.trials_per_point())
                .into_par_iter()
                .map(|trial| {
                    outage_trial(config, index, trial)
                        .map(|o| (o.in_outage as u64, o.discarded as u64))
                })
                .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
        })?;
        let point = outage_point_from_counts(config, index, outages, discarded)?;
        if progress {
            let _ = writeln!(
                std::io::stderr(),
                "point {}/{}: {} dB, p_out = {:.3e} ({} trials, {:.1}s)",
                index + 1,
                total_points,
                snr_db,
                point.p_out,
                point.trials,
                started.elapsed().as_secs_f64()
            );
        }
        points.push(point);
    }
    Ok(OutageCurve {
        config: config.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmt_core::analysis::sweep_curve;
    use dmt_core::model::{ConfigBuilder, RateMode};

    #[test]
    fn parallel_matches_sequential_reference() {
        let cfg = ConfigBuilder::new(2, 4, vec![15.0, 20.0], RateMode::Fixed { bits: 5.0 })
            .interferers(2, 0.5)
            .trials(4_000)
            .seed(3)
            .build()
            .unwrap();
        let sequential = sweep_curve(&cfg).unwrap();
        let one = sweep_parallel(&cfg, 1, false).unwrap();
        let eight = sweep_parallel(&cfg, 8, false).unwrap();
        assert_eq!(sequential, one);
        assert_eq!(sequential, eight);
    }
}
