//! Monte Carlo outage estimation, empirical diversity-slope regression, and
//! the closed-form diversity-multiplexing-interference tradeoff.
//!
//! Outage counting is organized so that a point's result is a sum of
//! independent per-trial outcomes addressed by (point, trial): any execution
//! order, including parallel ones, reduces to the same counts and therefore
//! the same curve. Trials whose factorization degenerates are discarded and
//! replaced from the next substream, with the discard count reported.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::model::{
    sample_realization_indexed, substream_id, target_rate, SystemConfig, MAX_ATTEMPTS,
};
use crate::numerics::{sample_cn01, RngStream};
use crate::receiver;

/// Two-sided 95% normal quantile used by the Wilson interval.
pub const WILSON_Z95: f64 = 1.959963984540054;

/// A run is invalid when more than this fraction of trials is discarded.
pub const MAX_DISCARD_FRACTION: f64 = 1e-4;

/// Minimum outage events for a point to enter the slope fit.
pub const MIN_FIT_EVENTS: u64 = 50;

/// Default outage-probability window for slope fits: below 1e-4 the Monte
/// Carlo cost explodes, above 1e-1 the asymptotic slope has not set in.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (1e-4, 1e-1);

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    /// Discarded-trial fraction exceeded [`MAX_DISCARD_FRACTION`].
    RunInvalid { discarded: u64, trials: u64 },
    /// Fewer than 3 points qualified for the slope fit.
    InsufficientPoints { found: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::RunInvalid { discarded, trials } => write!(
                f,
                "run invalid: {discarded} discarded draws over {trials} trials exceeds fraction {MAX_DISCARD_FRACTION:e}"
            ),
            AnalysisError::InsufficientPoints { found } => {
                write!(f, "slope fit needs >= 3 qualifying points, found {found}")
            }
        }
    }
}

impl core::error::Error for AnalysisError {}

/// Outage estimate at one grid SNR, with a Wilson 95% interval.
#[derive(Clone, Debug, PartialEq)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub snr_linear: f64,
    pub target_rate_bits: f64,
    pub trials: u64,
    pub outages: u64,
    pub p_out: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Degenerate draws that were discarded and replaced.
    pub discarded: u64,
}

/// Outage estimates over the configured SNR grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OutageCurve {
    pub config: SystemConfig,
    pub points: Vec<OutagePoint>,
}

/// Empirical diversity order from a weighted log-log fit, paired with the
/// closed-form value.
#[derive(Clone, Debug, PartialEq)]
pub struct DmtEstimate {
    /// Sign-flipped regression slope d̂.
    pub slope: f64,
    pub stderr: f64,
    pub points_used: usize,
    pub theoretical_d: f64,
    pub fit_range: (f64, f64),
}

/// Wilson score interval for a binomial proportion at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    debug_assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = WILSON_Z95;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let radius = z * math::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    (
        ((center - radius) / denom).max(0.0),
        ((center + radius) / denom).min(1.0),
    )
}

/// Outcome of one Monte Carlo trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub in_outage: bool,
    /// Degenerate draws discarded before this trial produced a value.
    pub discarded: u32,
}

/// Runs a single trial: sample the realization for (point, trial), evaluate
/// the mutual information, and compare against the target rate. Degenerate
/// realizations are replaced from the attempt-indexed substream.
pub fn outage_trial(
    config: &SystemConfig,
    point: usize,
    trial: u64,
) -> Result<TrialOutcome, AnalysisError> {
    let snr_linear = math::pow(10.0, config.snr_grid_db()[point] / 10.0);
    let rate = target_rate(config, snr_linear);
    for attempt in 0..=MAX_ATTEMPTS {
        let real = sample_realization_indexed(config, point, trial, attempt);
        match receiver::mutual_information(&real) {
            Ok(mi) => {
                return Ok(TrialOutcome {
                    in_outage: mi <= rate,
                    discarded: attempt,
                })
            }
            Err(_) => continue,
        }
    }
    Err(AnalysisError::RunInvalid {
        discarded: MAX_ATTEMPTS as u64 + 1,
        trials: 1,
    })
}

/// Builds an [`OutagePoint`] from reduced trial counts, enforcing the
/// discard-fraction invariant.
pub fn outage_point_from_counts(
    config: &SystemConfig,
    point: usize,
    outages: u64,
    discarded: u64,
) -> Result<OutagePoint, AnalysisError> {
    let trials = config.trials_per_point();
    if discarded as f64 > MAX_DISCARD_FRACTION * trials as f64 {
        return Err(AnalysisError::RunInvalid { discarded, trials });
    }
    let snr_db = config.snr_grid_db()[point];
    let snr_linear = math::pow(10.0, snr_db / 10.0);
    let (ci_low, ci_high) = wilson_interval(outages, trials);
    Ok(OutagePoint {
        snr_db,
        snr_linear,
        target_rate_bits: target_rate(config, snr_linear),
        trials,
        outages,
        p_out: outages as f64 / trials as f64,
        ci_low,
        ci_high,
        discarded,
    })
}

/// Monte Carlo outage probability at one grid SNR (sequential reference
/// implementation; trials reduce by index so parallel drivers reproduce it
/// exactly).
pub fn estimate_outage(config: &SystemConfig, snr_db: f64) -> Result<OutagePoint, AnalysisError> {
    let point = config
        .point_index(snr_db)
        .expect("snr_db must come from the configured grid");
    let mut outages = 0u64;
    let mut discarded = 0u64;
    for trial in 0..config.trials_per_point() {
        let outcome = outage_trial(config, point, trial)?;
        outages += outcome.in_outage as u64;
        discarded += outcome.discarded as u64;
    }
    outage_point_from_counts(config, point, outages, discarded)
}

/// Outage curve over the full SNR grid (sequential).
pub fn sweep_curve(config: &SystemConfig) -> Result<OutageCurve, AnalysisError> {
    let points = config
        .snr_grid_db()
        .iter()
        .map(|&snr_db| estimate_outage(config, snr_db))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OutageCurve {
        config: config.clone(),
        points,
    })
}

/// Closed-form diversity order for the MMSE receiver under inter-cell
/// interference: (N - M + 1)·(1 - ξ - r/M)⁺.
pub fn dmt_theoretical(m: usize, n: usize, r: f64, xi: f64) -> f64 {
    assert!(m >= 1 && n >= m, "requires N >= M >= 1");
    assert!(r >= 0.0 && (0.0..1.0).contains(&xi));
    (n - m + 1) as f64 * (1.0 - xi - r / m as f64).max(0.0)
}

/// Point-to-point MMSE diversity order (N - M + 1)·(1 - r/M)⁺; the ξ = 0
/// special case of [`dmt_theoretical`].
pub fn dmt_p2p(m: usize, n: usize, r: f64) -> f64 {
    dmt_theoretical(m, n, r, 0.0)
}

/// The three equivalent readings of the tradeoff: direct evaluation,
/// diversity degraded by (N - M + 1)ξ, and multiplexing shifted by Mξ. All
/// coincide whenever no clamp is active.
pub fn dmt_decomposition_check(m: usize, n: usize, r: f64, xi: f64) -> (f64, f64, f64) {
    (
        dmt_theoretical(m, n, r, xi),
        dmt_p2p(m, n, r) - (n - m + 1) as f64 * xi,
        dmt_p2p(m, n, r + m as f64 * xi),
    )
}

/// Maximum-likelihood tradeoff (M - r)(N - r) at integer multiplexing gains,
/// for comparison tables.
pub fn ml_dmt_reference(m: usize, n: usize, r: usize) -> f64 {
    assert!(r <= m.min(n), "requires 0 <= r <= min(M, N)");
    ((m - r) * (n - r)) as f64
}

/// ML tradeoff at real multiplexing gain via the standard piecewise-linear
/// interpolation between the integer points of [`ml_dmt_reference`].
pub fn ml_dmt_interpolated(m: usize, n: usize, r: f64) -> f64 {
    assert!(r >= 0.0);
    let rmax = m.min(n);
    if r >= rmax as f64 {
        return 0.0;
    }
    let k = r as usize; // floor; r < rmax so k + 1 <= rmax
    let frac = r - k as f64;
    let d0 = ml_dmt_reference(m, n, k);
    let d1 = ml_dmt_reference(m, n, k + 1);
    d0 + frac * (d1 - d0)
}

/// Weighted least-squares fit of log₁₀ p_out against log₁₀ SNR over the
/// points inside the outage window with at least [`MIN_FIT_EVENTS`] events.
///
/// Weights are inverse squared Wilson half-widths in the log domain, and the
/// standard error is scaled by the residual variance, so exact power-law
/// input reports a vanishing stderr.
pub fn estimate_slope(
    curve: &OutageCurve,
    window: (f64, f64),
) -> Result<DmtEstimate, AnalysisError> {
    let (p_min, p_max) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for pt in &curve.points {
        if pt.p_out < p_min || pt.p_out > p_max || pt.outages < MIN_FIT_EVENTS {
            continue;
        }
        let half_width = 0.5 * (math::log10(pt.ci_high) - math::log10(pt.ci_low));
        xs.push(math::log10(pt.snr_linear));
        ys.push(math::log10(pt.p_out));
        ws.push(1.0 / (half_width * half_width));
    }
    let used = xs.len();
    if used < 3 {
        return Err(AnalysisError::InsufficientPoints { found: used });
    }

    let wsum: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(x, w)| w * (x - xbar) * (x - xbar))
        .sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let chi2: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| {
            let r = y - (intercept + slope * x);
            w * r * r
        })
        .sum();
    let dof = (used - 2) as f64;
    let stderr = math::sqrt((chi2 / dof.max(1.0)) / sxx);

    let config = &curve.config;
    Ok(DmtEstimate {
        slope: -slope,
        stderr,
        points_used: used,
        theoretical_d: dmt_theoretical(
            config.m(),
            config.n(),
            config.rate_mode().multiplexing_gain(),
            config.xi(),
        ),
        fit_range: window,
    })
}

/// Ordinary log-log regression of the empirical CDF over the smallest
/// `quantile` fraction of samples; returns the fitted exponent and its
/// standard error. Used to check the small-λ tail order of the smallest
/// Gram eigenvalue.
pub fn fit_cdf_tail_exponent(samples: &[f64], quantile: f64) -> Option<(f64, f64)> {
    assert!(quantile > 0.0 && quantile <= 1.0);
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| *v > 0.0).collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = samples.len() as f64;
    let k_max = (libm::ceil(n * quantile) as usize).min(sorted.len());
    if k_max < 3 {
        return None;
    }
    let xs: Vec<f64> = sorted[..k_max].iter().map(|&v| math::log10(v)).collect();
    let ys: Vec<f64> = (1..=k_max).map(|k| math::log10(k as f64 / n)).collect();
    let nf = k_max as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let chi2: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = math::sqrt(chi2 / (nf - 2.0) / sxx);
    Some((slope, stderr))
}

/// Samples the smallest eigenvalue of C over `count` no-interference trials;
/// the building block for the tail-exponent checks.
pub fn sample_lambda_min_tail(
    m: usize,
    n: usize,
    seed: u64,
    count: u64,
) -> Result<Vec<f64>, AnalysisError> {
    use crate::numerics::hermitian_eigenvalues;
    let mut out = Vec::with_capacity(count as usize);
    let mut discarded = 0u64;
    for trial in 0..count {
        let mut value = None;
        for attempt in 0..=MAX_ATTEMPTS {
            let h = sample_cn01(RngStream::new(seed, substream_id(0, trial, attempt)), n, m);
            // C ∝ HᴴH; the tail exponent is scale-invariant.
            match hermitian_eigenvalues(&h.gram()) {
                Ok(eigs) => {
                    value = Some(eigs[eigs.len() - 1].max(0.0));
                    break;
                }
                Err(_) => discarded += 1,
            }
        }
        match value {
            Some(v) => out.push(v),
            None => {
                return Err(AnalysisError::RunInvalid {
                    discarded,
                    trials: count,
                })
            }
        }
    }
    if discarded as f64 > MAX_DISCARD_FRACTION * count as f64 {
        return Err(AnalysisError::RunInvalid {
            discarded,
            trials: count,
        });
    }
    Ok(out)
}
