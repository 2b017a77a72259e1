//! Statistical oracles with frozen seeds: sampler moments, the closed-form
//! scalar Rayleigh outage curve, and the small-eigenvalue tail order.

use dmt_core::analysis::{estimate_outage, fit_cdf_tail_exponent, sample_lambda_min_tail};
use dmt_core::model::{ConfigBuilder, RateMode};
use dmt_core::numerics::{Cn01Sampler, RngStream};

#[test]
fn sampler_moments_match_cn01() {
    let draws = 1_000_000usize;
    let mut sampler = Cn01Sampler::new(RngStream::new(0, 0));
    let mut sum_re = 0.0;
    let mut sum_im = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let z = sampler.next_entry();
        sum_re += z.re;
        sum_im += z.im;
        sum_sq += z.norm_sqr();
    }
    let n = draws as f64;
    let mean_re = sum_re / n;
    let mean_im = sum_im / n;
    let mean_sq = sum_sq / n;
    assert!(mean_re.abs() <= 0.01, "mean re {mean_re}");
    assert!(mean_im.abs() <= 0.01, "mean im {mean_im}");
    assert!((mean_sq - 1.0).abs() <= 0.01, "mean |z|^2 {mean_sq}");
}

#[test]
fn scalar_rayleigh_outage_matches_closed_form() {
    // M = N = 1, no interference: outage iff |h|^2 < (2^R - 1)/SNR with
    // |h|^2 ~ Exp(1), so p_out = 1 - exp(-(2^R - 1)/SNR).
    let rate_bits = 2.0;
    let grid: Vec<f64> = vec![5.0, 10.0, 15.0, 20.0, 25.0];
    let cfg = ConfigBuilder::new(1, 1, grid.clone(), RateMode::Fixed { bits: rate_bits })
        .trials(100_000)
        .build()
        .unwrap();
    for &snr_db in &grid {
        let pt = estimate_outage(&cfg, snr_db).unwrap();
        let analytic = 1.0 - (-(2.0f64.powf(rate_bits) - 1.0) / pt.snr_linear).exp();
        assert!(
            pt.ci_low <= analytic && analytic <= pt.ci_high,
            "snr {snr_db} dB: analytic {analytic:.5} outside CI [{:.5}, {:.5}] (p_out {:.5})",
            pt.ci_low,
            pt.ci_high,
            pt.p_out
        );
    }
}

#[test]
fn outage_non_increasing_in_snr() {
    // At fixed rate, higher SNR cannot raise the outage probability beyond
    // confidence-interval overlap.
    let cfg = ConfigBuilder::new(
        2,
        4,
        vec![12.0, 16.0, 20.0, 24.0, 28.0],
        RateMode::Fixed { bits: 5.0 },
    )
    .interferers(2, 0.5)
    .trials(20_000)
    .build()
    .unwrap();
    let curve = dmt_core::analysis::sweep_curve(&cfg).unwrap();
    for pair in curve.points.windows(2) {
        let (lo_snr, hi_snr) = (&pair[0], &pair[1]);
        assert!(
            hi_snr.p_out <= lo_snr.p_out || hi_snr.ci_low <= lo_snr.ci_high,
            "p_out rose from {:.4e} to {:.4e} between {} and {} dB with disjoint CIs",
            lo_snr.p_out,
            hi_snr.p_out,
            lo_snr.snr_db,
            hi_snr.snr_db
        );
    }
}

#[test]
fn lambda_min_tail_exponent_is_n_minus_m_plus_one() {
    // With no interference C ∝ HᴴH, and the CDF of the smallest eigenvalue
    // opens with order N - M + 1 for small λ.
    let (m, n) = (2usize, 4usize);
    let samples = sample_lambda_min_tail(m, n, 0, 1_000_000).unwrap();
    let (exponent, stderr) = fit_cdf_tail_exponent(&samples, 0.01).unwrap();
    let expected = (n - m + 1) as f64;
    assert!(
        (exponent - expected).abs() <= 0.3,
        "tail exponent {exponent:.3} ± {stderr:.3} vs {expected}"
    );
}
