//! Linear MMSE receiver: per-stream SINR, mutual information, and the
//! analytic bound quantities for one channel realization.
//!
//! Everything is driven by the whitened Gram matrix
//! C = Hᴴ(RQRᴴ + (M/INR)·I)⁻¹H and the diagonal of (I + (SNR/INR)·C)⁻¹; the
//! i-th diagonal entry d_i gives the stream SINR as ρ_i = 1/d_i - 1 and the
//! mutual information as -Σ log₂ d_i. With no interferers INR is pinned to 1,
//! so (SNR/INR)·C reduces to (SNR/M)·HᴴH and the same code path covers the
//! point-to-point case.

use alloc::vec::Vec;

use crate::math;
use crate::model::ChannelRealization;
use crate::numerics::{hermitian_eigenvalues, Complex64, ComplexMatrix, NumericsError};

/// Per-realization receiver output: stream SINRs, mutual information, the
/// Jensen sandwich bounds, the log-det upper bound, and the smallest
/// eigenvalue of the whitened Gram matrix that governs the outage tail.
#[derive(Clone, Debug, PartialEq)]
pub struct MmseEvaluation {
    /// Per-stream SINRs ρ_i, linear scale.
    pub sinr: Vec<f64>,
    pub mutual_info_bits: f64,
    pub jensen_lower_bits: f64,
    pub jensen_upper_bits: f64,
    pub logdet_upper_bits: f64,
    /// Smallest eigenvalue λ_M of C, clamped at zero.
    pub lambda_min: f64,
}

/// Interference-plus-noise whitening matrix W = RQRᴴ + (M/INR)·I.
fn whitening_matrix(real: &ChannelRealization) -> ComplexMatrix {
    let n = real.n();
    let mut w = scaled_interference_gram(real, 1.0).unwrap_or_else(|| ComplexMatrix::zeros(n, n));
    w.add_real_diag(real.m() as f64 / real.inr_linear);
    w
}

/// scale·R·Q·Rᴴ, built exactly Hermitian; `None` with no interferers.
fn scaled_interference_gram(real: &ChannelRealization, scale: f64) -> Option<ComplexMatrix> {
    let r = real.r_stack.as_ref()?;
    let n = r.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &q) in real.q_diag.iter().enumerate() {
                acc += r[(i, k)] * r[(j, k)].conj() * q;
            }
            acc *= scale;
            if i == j {
                out[(i, i)] = Complex64::new(acc.re, 0.0);
            } else {
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
    }
    Some(out)
}

/// Whitened Gram matrix C = Hᴴ(RQRᴴ + (M/INR)·I)⁻¹H, an M×M Hermitian PSD
/// matrix.
///
/// Computed as XᴴX with X = L⁻¹H from the Cholesky factor of the whitening
/// matrix, which keeps the result exactly Hermitian.
pub fn whitened_gram(real: &ChannelRealization) -> Result<ComplexMatrix, NumericsError> {
    let w = whitening_matrix(real);
    let l = w.cholesky()?;
    let x = ComplexMatrix::solve_lower(&l, &real.h);
    let c = x.gram();
    debug_assert!(c.is_finite());
    Ok(c)
}

/// MMSE filter G = √(M/SNR)·Hᴴ(HHᴴ + (INR/SNR)·RQRᴴ + (M/SNR)·I)⁻¹ (M×N).
pub fn mmse_filter(real: &ChannelRealization) -> Result<ComplexMatrix, NumericsError> {
    let m = real.m() as f64;
    let snr = real.snr_linear;
    let hh = real.h.conj_transpose().gram();
    let mut s = match scaled_interference_gram(real, real.inr_linear / snr) {
        Some(rq) => hh.add(&rq),
        None => hh,
    };
    s.add_real_diag(m / snr);
    let l = s.cholesky()?;
    let x = ComplexMatrix::cholesky_solve(&l, &real.h);
    let g = x.conj_transpose().scale(math::sqrt(m / snr));
    debug_assert!(g.is_finite());
    Ok(g)
}

/// Diagonal of (I + (SNR/INR)·C)⁻¹ plus log₂ det(I + (SNR/INR)·C) from one
/// factorization.
fn inverse_diagonal(real: &ChannelRealization) -> Result<(Vec<f64>, f64), NumericsError> {
    let c = whitened_gram(real)?;
    diag_from_gram(&c, real.snr_linear / real.inr_linear)
}

fn diag_from_gram(c: &ComplexMatrix, snr_over_inr: f64) -> Result<(Vec<f64>, f64), NumericsError> {
    let m = c.rows();
    let mut b = c.scale(snr_over_inr);
    b.add_real_diag(1.0);
    let l = b.cholesky()?;
    let inv = ComplexMatrix::cholesky_solve(&l, &ComplexMatrix::identity(m));
    let diag = (0..m).map(|i| inv[(i, i)].re).collect();
    let logdet_bits = 2.0 * (0..m).map(|i| math::log2(l[(i, i)].re)).sum::<f64>();
    Ok((diag, logdet_bits))
}

fn sinr_from_diag(diag: &[f64]) -> Vec<f64> {
    // B ⪰ I forces d_i ≤ 1; clamp the rounding-level negatives.
    diag.iter().map(|&d| (1.0 / d - 1.0).max(0.0)).collect()
}

/// Per-stream SINRs ρ_i = 1/[(I + (SNR/INR)·C)⁻¹]_ii - 1.
pub fn sinr_per_stream(real: &ChannelRealization) -> Result<Vec<f64>, NumericsError> {
    let (diag, _) = inverse_diagonal(real)?;
    Ok(sinr_from_diag(&diag))
}

/// Mutual information of the transmit-receive pair under the MMSE receiver,
/// in bits per channel use: -Σ log₂ [(I + (SNR/INR)·C)⁻¹]_ii.
pub fn mutual_information(real: &ChannelRealization) -> Result<f64, NumericsError> {
    let (diag, _) = inverse_diagonal(real)?;
    let mi = mutual_info_from_diag(&diag);
    debug_assert!(
        {
            let via_sinr: f64 = sinr_from_diag(&diag)
                .iter()
                .map(|&rho| math::log2(1.0 + rho))
                .sum();
            (via_sinr - mi).abs() <= 1e-8 * mi.abs().max(1e-300)
        },
        "SINR and inverse-diagonal routes disagree"
    );
    Ok(mi)
}

fn mutual_info_from_diag(diag: &[f64]) -> f64 {
    -diag.iter().map(|&d| math::log2(d)).sum::<f64>()
}

/// Both computation routes of the mutual information: via the stream SINRs
/// (Σ log₂(1 + ρ_i)) and via the inverse diagonal (-Σ log₂ d_i). They must
/// agree to rounding; the verify suite checks this on random ensembles.
pub fn mutual_information_routes(real: &ChannelRealization) -> Result<(f64, f64), NumericsError> {
    let (diag, _) = inverse_diagonal(real)?;
    let via_sinr = sinr_from_diag(&diag)
        .iter()
        .map(|&rho| math::log2(1.0 + rho))
        .sum::<f64>();
    Ok((via_sinr, mutual_info_from_diag(&diag)))
}

/// Jensen lower bound -M·log₂((1/M)·Tr[(I + (SNR/INR)·C)⁻¹]), in bits.
pub fn jensen_lower(real: &ChannelRealization) -> Result<f64, NumericsError> {
    let (diag, _) = inverse_diagonal(real)?;
    Ok(jensen_lower_from_diag(&diag))
}

fn jensen_lower_from_diag(diag: &[f64]) -> f64 {
    let m = diag.len() as f64;
    -m * math::log2(diag.iter().sum::<f64>() / m)
}

/// Jensen upper bound M·log₂((1/M)·Σ_i 1/d_i), in bits.
pub fn jensen_upper(real: &ChannelRealization) -> Result<f64, NumericsError> {
    let (diag, _) = inverse_diagonal(real)?;
    Ok(jensen_upper_from_diag(&diag))
}

fn jensen_upper_from_diag(diag: &[f64]) -> f64 {
    let m = diag.len() as f64;
    m * math::log2(diag.iter().map(|&d| 1.0 / d).sum::<f64>() / m)
}

/// Smallest eigenvalue λ_M of the whitened Gram matrix, clamped at zero.
pub fn lambda_min(real: &ChannelRealization) -> Result<f64, NumericsError> {
    let c = whitened_gram(real)?;
    let eigs = hermitian_eigenvalues(&c)?;
    Ok(eigs[eigs.len() - 1].max(0.0))
}

/// Full receiver evaluation in one pass over a shared factorization, so the
/// sandwich and domination properties can be checked on identical inputs.
pub fn evaluate(real: &ChannelRealization) -> Result<MmseEvaluation, NumericsError> {
    let c = whitened_gram(real)?;
    let (diag, logdet_upper_bits) = diag_from_gram(&c, real.snr_linear / real.inr_linear)?;
    let eigs = hermitian_eigenvalues(&c)?;
    Ok(MmseEvaluation {
        sinr: sinr_from_diag(&diag),
        mutual_info_bits: mutual_info_from_diag(&diag),
        jensen_lower_bits: jensen_lower_from_diag(&diag),
        jensen_upper_bits: jensen_upper_from_diag(&diag),
        logdet_upper_bits,
        lambda_min: eigs[eigs.len() - 1].max(0.0),
    })
}

/// Direct post-filter SINR: signal power over interference-plus-noise power
/// from the full covariance of Gy.
///
/// Independent reference path for the Woodbury-form SINRs; used by tests and
/// the verify suite only (it inverts an N×N covariance per call).
pub fn sinr_direct(real: &ChannelRealization) -> Result<Vec<f64>, NumericsError> {
    let g = mmse_filter(real)?;
    let snr_over_m = real.snr_linear / real.m() as f64;
    let gh = g.mul(&real.h);

    // Cov(y) = (SNR/M)·HHᴴ + (INR/M)·RQRᴴ + I.
    let hh = real.h.conj_transpose().gram().scale(snr_over_m);
    let mut cov_y = match scaled_interference_gram(real, real.inr_linear / real.m() as f64) {
        Some(rq) => hh.add(&rq),
        None => hh,
    };
    cov_y.add_real_diag(1.0);

    let total = g.mul(&cov_y).mul(&g.conj_transpose());
    let mut out = Vec::with_capacity(real.m());
    for i in 0..real.m() {
        let signal = snr_over_m * gh[(i, i)].norm_sqr();
        let denom = total[(i, i)].re - signal;
        out.push(signal / denom);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_realization, ChannelRealization, ConfigBuilder, RateMode};
    use crate::numerics::{sample_cn01, Cn01Sampler, RngStream};
    use alloc::vec;

    fn realization(
        m: usize,
        n: usize,
        interferers: usize,
        xi: f64,
        snr_db: f64,
        trial: u64,
    ) -> ChannelRealization {
        let mut b = ConfigBuilder::new(m, n, vec![snr_db], RateMode::Fixed { bits: 5.0 });
        if interferers > 0 {
            b = b.interferers(interferers, xi);
        }
        sample_realization(&b.build().unwrap(), snr_db, trial)
    }

    fn scalar_realization(snr_linear: f64, h: Complex64) -> ChannelRealization {
        let mut hm = ComplexMatrix::zeros(1, 1);
        hm[(0, 0)] = h;
        ChannelRealization {
            h: hm,
            r_stack: None,
            q_diag: vec![],
            snr_linear,
            inr_linear: 1.0,
        }
    }

    fn identity_channel(m: usize, snr_linear: f64) -> ChannelRealization {
        ChannelRealization {
            h: ComplexMatrix::identity(m),
            r_stack: None,
            q_diag: vec![],
            snr_linear,
            inr_linear: 1.0,
        }
    }

    fn zero_channel(m: usize, n: usize, snr_linear: f64) -> ChannelRealization {
        ChannelRealization {
            h: ComplexMatrix::zeros(n, m),
            r_stack: None,
            q_diag: vec![],
            snr_linear,
            inr_linear: 1.0,
        }
    }

    #[test]
    fn scalar_sinr_is_matched_filter_snr() {
        let h = Complex64::new(0.6, -0.3);
        let snr = 50.0;
        let real = scalar_realization(snr, h);
        let rho = sinr_per_stream(&real).unwrap();
        let expected = snr * h.norm_sqr();
        assert!(
            (rho[0] - expected).abs() <= 1e-10 * expected,
            "rho {} vs {}",
            rho[0],
            expected
        );
        let mi = mutual_information(&real).unwrap();
        assert!((mi - math::log2(1.0 + expected)).abs() < 1e-10);
    }

    #[test]
    fn scalar_mmse_filter_closed_form() {
        let h = Complex64::new(0.8, 0.5);
        let snr = 25.0;
        let real = scalar_realization(snr, h);
        let g = mmse_filter(&real).unwrap();
        let expected = math::sqrt(1.0 / snr) * h.conj() / (h.norm_sqr() + 1.0 / snr);
        assert!((g[(0, 0)] - expected).norm() < 1e-12);
    }

    #[test]
    fn identity_channel_symmetric_streams() {
        let m = 3;
        let snr = 90.0;
        let real = identity_channel(m, snr);
        let rho = sinr_per_stream(&real).unwrap();
        for &r in &rho {
            assert!((r - snr / m as f64).abs() < 1e-9, "rho {r}");
        }
        let mi = mutual_information(&real).unwrap();
        let expected = m as f64 * math::log2(1.0 + snr / m as f64);
        assert!((mi - expected).abs() < 1e-9);
        // Equal diagonal entries: both Jensen bounds collapse onto I_mmse.
        let eval = evaluate(&real).unwrap();
        assert!((eval.jensen_lower_bits - mi).abs() < 1e-10);
        assert!((eval.jensen_upper_bits - mi).abs() < 1e-10);
    }

    #[test]
    fn zero_channel_collapses() {
        let real = zero_channel(2, 4, 100.0);
        let c = whitened_gram(&real).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        let g = mmse_filter(&real).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let eval = evaluate(&real).unwrap();
        assert_eq!(eval.mutual_info_bits, 0.0);
        assert_eq!(eval.jensen_lower_bits, 0.0);
        assert_eq!(eval.jensen_upper_bits, 0.0);
        assert_eq!(eval.lambda_min, 0.0);
        assert!(eval.sinr.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn gram_is_hermitian_psd_on_random_realizations() {
        for trial in 0..20 {
            let real = realization(2, 4, 2, 0.5, 20.0, trial);
            let c = whitened_gram(&real).unwrap();
            assert_eq!(c.hermitian_residual(), 0.0);
            let eigs = hermitian_eigenvalues(&c).unwrap();
            assert!(eigs.iter().all(|&v| v >= 0.0), "eigs {eigs:?}");
        }
    }

    #[test]
    fn woodbury_matches_direct_oracle() {
        for trial in 0..50 {
            let real = realization(2, 4, 2, 0.5, 20.0, trial);
            let fast = sinr_per_stream(&real).unwrap();
            let direct = sinr_direct(&real).unwrap();
            for (a, b) in fast.iter().zip(&direct) {
                assert!(
                    (a - b).abs() <= 1e-8 * b.abs().max(1e-300),
                    "trial {trial}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn sandwich_and_logdet_domination() {
        for trial in 0..50 {
            let real = realization(3, 5, 3, 0.4, 15.0, trial);
            let eval = evaluate(&real).unwrap();
            assert!(eval.jensen_lower_bits <= eval.mutual_info_bits + 1e-10);
            assert!(eval.mutual_info_bits <= eval.jensen_upper_bits + 1e-10);
            assert!(eval.mutual_info_bits <= eval.logdet_upper_bits + 1e-10);
        }
    }

    #[test]
    fn both_mutual_info_routes_agree() {
        for trial in 0..50 {
            let real = realization(2, 4, 3, 0.5, 25.0, trial);
            let (via_sinr, via_diag) = mutual_information_routes(&real).unwrap();
            assert!(
                (via_sinr - via_diag).abs() <= 1e-8 * via_diag.abs().max(1e-300),
                "{via_sinr} vs {via_diag}"
            );
        }
    }

    #[test]
    fn mutual_information_monotone_in_snr() {
        let base = realization(2, 4, 2, 0.5, 20.0, 3);
        let mut last = -1.0;
        for snr in [10.0, 31.6, 100.0, 316.0, 1000.0] {
            let real = ChannelRealization {
                snr_linear: snr,
                ..base.clone()
            };
            let mi = mutual_information(&real).unwrap();
            assert!(mi >= last, "I({snr}) = {mi} < {last}");
            last = mi;
        }
    }

    #[test]
    fn lambda_min_diagonal_case() {
        // C = diag(3, 0.2) arises from H = diag(sqrt(3), sqrt(0.2)) with
        // M = N = 2 and INR pinned to 1: C = HᴴH/M... use M-scaled entries.
        let m = 2.0;
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(math::sqrt(3.0 * m), 0.0);
        h[(1, 1)] = Complex64::new(math::sqrt(0.2 * m), 0.0);
        let real = ChannelRealization {
            h,
            r_stack: None,
            q_diag: vec![],
            snr_linear: 10.0,
            inr_linear: 1.0,
        };
        let lm = lambda_min(&real).unwrap();
        assert!((lm - 0.2).abs() < 1e-12, "lambda_min {lm}");
    }

    #[test]
    fn mmse_filter_minimizes_empirical_mse() {
        // Perturbing G in random directions must increase the empirical MSE
        // estimated over a common set of signal/noise draws.
        let real = realization(2, 4, 2, 0.5, 15.0, 7);
        let g = mmse_filter(&real).unwrap();
        let draws = 10_000usize;
        let k_cols = real.r_stack.as_ref().unwrap().cols();

        let mut xs = Vec::with_capacity(draws);
        let mut ys = Vec::with_capacity(draws);
        let mut sampler = Cn01Sampler::new(RngStream::new(99, 0));
        let a_scale = math::sqrt(real.snr_linear / real.m() as f64);
        let b_scale = math::sqrt(real.inr_linear / real.m() as f64);
        for _ in 0..draws {
            let mut x = ComplexMatrix::zeros(real.m(), 1);
            sampler.fill(&mut x);
            let mut z = ComplexMatrix::zeros(k_cols, 1);
            sampler.fill(&mut z);
            for (i, q) in real.q_diag.iter().enumerate() {
                z[(i, 0)] *= math::sqrt(*q);
            }
            let mut noise = ComplexMatrix::zeros(real.n(), 1);
            sampler.fill(&mut noise);
            let y = real
                .h
                .mul(&x)
                .scale(a_scale)
                .add(&real.r_stack.as_ref().unwrap().mul(&z).scale(b_scale))
                .add(&noise);
            xs.push(x);
            ys.push(y);
        }

        let mse = |filter: &ComplexMatrix| -> f64 {
            let mut acc = 0.0;
            for (x, y) in xs.iter().zip(&ys) {
                let err = x.sub(&filter.mul(y));
                let f = err.frobenius_norm();
                acc += f * f;
            }
            acc / draws as f64
        };

        let base = mse(&g);
        let delta = 0.05;
        for dir_seed in 0..20 {
            let d = sample_cn01(RngStream::new(1234, dir_seed), real.m(), real.n());
            let d = d.scale(1.0 / d.frobenius_norm());
            for sign in [1.0, -1.0] {
                let perturbed = g.add(&d.scale(sign * delta));
                let m = mse(&perturbed);
                assert!(
                    m > base,
                    "perturbation {dir_seed} (sign {sign}) lowered MSE: {m} <= {base}"
                );
            }
        }
    }
}
