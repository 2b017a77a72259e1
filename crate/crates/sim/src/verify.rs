//! The verify command: per-realization property checks with measured
//! tolerances, reported one line per property.

use dmt_core::analysis::{
    dmt_decomposition_check, dmt_p2p, dmt_theoretical, fit_cdf_tail_exponent, ml_dmt_reference,
    sample_lambda_min_tail,
};
use dmt_core::model::{sample_realization_indexed, ChannelRealization, SystemConfig};
use dmt_core::numerics::{Complex64, ComplexMatrix};
use dmt_core::receiver;

use crate::config::VerifyParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            status: Status::Pass,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            status: Status::Fail,
            detail,
        }
    }

    fn skip(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            status: Status::Skip,
            detail,
        }
    }
}

/// SNR grid indices sampled by the ensemble checks: first, middle, and last
/// grid point.
fn ensemble_points(config: &SystemConfig) -> Vec<usize> {
    let len = config.snr_grid_db().len();
    let mut points = vec![0, len / 2, len - 1];
    points.dedup();
    points
}

fn ensemble(config: &SystemConfig, realizations: u64) -> Vec<ChannelRealization> {
    let points = ensemble_points(config);
    (0..realizations)
        .map(|i| {
            let point = points[(i % points.len() as u64) as usize];
            sample_realization_indexed(config, point, i / points.len() as u64, 0)
        })
        .collect()
}

pub fn run_all(config: &SystemConfig, params: &VerifyParams) -> Vec<CheckResult> {
    let ensemble = ensemble(config, params.realizations);
    vec![
        check_closed_forms(),
        check_decomposition(config),
        check_woodbury(&ensemble, params),
        check_routes(&ensemble, params),
        check_sandwich(config, &ensemble, params),
        check_logdet(&ensemble, params),
        check_snr_monotonicity(&ensemble),
        check_interference_dominance(&ensemble, params),
        check_lambda_tail(config, params),
    ]
}

fn check_closed_forms() -> CheckResult {
    let name = "dmt_closed_forms";
    let cases = [
        (dmt_theoretical(2, 4, 0.0, 0.5), 1.5),
        (dmt_theoretical(2, 4, 1.0, 0.0), 1.5),
        (dmt_p2p(2, 4, 0.0), 3.0),
        (ml_dmt_reference(2, 4, 0), 8.0),
    ];
    for (got, want) in cases {
        if got != want {
            return CheckResult::fail(name, format!("expected {want}, got {got}"));
        }
    }
    CheckResult::pass(name, "4 closed-form values exact".to_string())
}

fn check_decomposition(config: &SystemConfig) -> CheckResult {
    let name = "dmt_decomposition_identity";
    let (m, n) = (config.m(), config.n());
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let xi = 0.9 * j as f64 / 10.0;
            let r = m as f64 * (1.0 - xi) * i as f64 / 10.0;
            let (a, b, c) = dmt_decomposition_check(m, n, r, xi);
            worst = worst.max((a - b).abs()).max((a - c).abs());
        }
    }
    if worst <= 1e-12 {
        CheckResult::pass(
            name,
            format!("max deviation {worst:.1e} on 10x10 grid (tol 1e-12)"),
        )
    } else {
        CheckResult::fail(name, format!("max deviation {worst:.1e} exceeds 1e-12"))
    }
}

fn check_woodbury(ensemble: &[ChannelRealization], params: &VerifyParams) -> CheckResult {
    let name = "woodbury_sinr";
    let mut worst = 0.0f64;
    let mut discarded = 0u64;
    for real in ensemble {
        let (fast, direct) = match (receiver::sinr_per_stream(real), receiver::sinr_direct(real)) {
            (Ok(f), Ok(d)) => (f, d),
            _ => {
                discarded += 1;
                continue;
            }
        };
        for (a, d) in fast.iter().zip(&direct) {
            worst = worst.max((a - d).abs() / d.abs().max(1e-300));
        }
    }
    let detail = format!(
        "max rel err {worst:.2e} over {} realizations (tol {:e}, discarded {discarded})",
        ensemble.len(),
        params.woodbury_tol
    );
    if worst <= params.woodbury_tol {
        CheckResult::pass(name, detail)
    } else {
        CheckResult::fail(name, detail)
    }
}

fn check_routes(ensemble: &[ChannelRealization], params: &VerifyParams) -> CheckResult {
    let name = "mutual_info_routes";
    let mut worst = 0.0f64;
    for real in ensemble {
        if let Ok((via_sinr, via_diag)) = receiver::mutual_information_routes(real) {
            worst = worst.max((via_sinr - via_diag).abs() / via_diag.abs().max(1e-300));
        }
    }
    let detail = format!(
        "max rel err {worst:.2e} over {} realizations (tol {:e})",
        ensemble.len(),
        params.routes_tol
    );
    if worst <= params.routes_tol {
        CheckResult::pass(name, detail)
    } else {
        CheckResult::fail(name, detail)
    }
}

fn check_sandwich(
    config: &SystemConfig,
    ensemble: &[ChannelRealization],
    params: &VerifyParams,
) -> CheckResult {
    let name = "jensen_sandwich";
    let slack = params.sandwich_slack;
    let mut worst = f64::NEG_INFINITY;
    for real in ensemble {
        if let Ok(eval) = receiver::evaluate(real) {
            worst = worst.max(eval.jensen_lower_bits - eval.mutual_info_bits);
            worst = worst.max(eval.mutual_info_bits - eval.jensen_upper_bits);
        }
    }
    // Equality case: H with ones on the diagonal makes all diagonal entries
    // of the inverse equal, collapsing both bounds onto I_mmse.
    let ident = ChannelRealization {
        h: ComplexMatrix::from_fn(config.n(), config.m(), |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        }),
        r_stack: None,
        q_diag: Vec::new(),
        snr_linear: 100.0,
        inr_linear: 1.0,
    };
    let eval = receiver::evaluate(&ident).expect("identity channel is well conditioned");
    let eq_gap = (eval.jensen_lower_bits - eval.mutual_info_bits)
        .abs()
        .max((eval.jensen_upper_bits - eval.mutual_info_bits).abs());
    let detail =
        format!("max violation {worst:.2e}, identity-channel gap {eq_gap:.2e} (slack {slack:e})");
    if worst <= slack && eq_gap <= slack {
        CheckResult::pass(name, detail)
    } else {
        CheckResult::fail(name, detail)
    }
}

fn check_logdet(ensemble: &[ChannelRealization], params: &VerifyParams) -> CheckResult {
    let name = "logdet_domination";
    let mut worst = f64::NEG_INFINITY;
    for real in ensemble {
        if let Ok(eval) = receiver::evaluate(real) {
            worst = worst.max(eval.mutual_info_bits - eval.logdet_upper_bits);
        }
    }
    let detail = format!(
        "max violation {worst:.2e} over {} realizations (slack {:e})",
        ensemble.len(),
        params.sandwich_slack
    );
    if worst <= params.sandwich_slack {
        CheckResult::pass(name, detail)
    } else {
        CheckResult::fail(name, detail)
    }
}

fn check_snr_monotonicity(ensemble: &[ChannelRealization]) -> CheckResult {
    let name = "snr_monotonicity";
    let subset = ensemble.iter().take(50);
    let mut worst = 0.0f64;
    for real in subset {
        let mut last = f64::NEG_INFINITY;
        for step in 0..5 {
            let scaled = ChannelRealization {
                snr_linear: real.snr_linear * 10f64.powi(step),
                ..real.clone()
            };
            match receiver::mutual_information(&scaled) {
                Ok(mi) => {
                    worst = worst.max(last - mi);
                    last = mi;
                }
                Err(_) => break,
            }
        }
    }
    let detail = format!("max decrease {worst:.2e} over 5-point SNR ladders");
    if worst <= 1e-10 {
        CheckResult::pass(name, detail)
    } else {
        CheckResult::fail(name, detail)
    }
}

/// With the same desired channel, adding interference can only reduce the
/// mutual information (the whitened Gram matrix shrinks in the PSD order).
fn check_interference_dominance(
    ensemble: &[ChannelRealization],
    params: &VerifyParams,
) -> CheckResult {
    let name = "interference_reduces_rate";
    if ensemble.iter().all(|r| r.r_stack.is_none()) {
        return CheckResult::skip(name, "no interferers configured".to_string());
    }
    let mut worst = f64::NEG_INFINITY;
    for real in ensemble.iter().filter(|r| r.r_stack.is_some()) {
        let clean = ChannelRealization {
            h: real.h.clone(),
            r_stack: None,
            q_diag: Vec::new(),
            snr_linear: real.snr_linear,
            inr_linear: 1.0,
        };
        if let (Ok(with), Ok(without)) = (
            receiver::mutual_information(real),
            receiver::mutual_information(&clean),
        ) {
            worst = worst.max(with - without);
        }
    }
    let detail = format!(
        "max I(with) - I(without) = {worst:.2e} (slack {:e})",
        params.sandwich_slack
    );
    if worst <= params.sandwich_slack {
        CheckResult::pass(name, detail)
    } else {
        CheckResult::fail(name, detail)
    }
}

fn check_lambda_tail(config: &SystemConfig, params: &VerifyParams) -> CheckResult {
    let name = "lambda_min_tail_exponent";
    let expected = (config.n() - config.m() + 1) as f64;
    let samples = match sample_lambda_min_tail(
        config.m(),
        config.n(),
        config.seed() ^ 0x7a11_5eed,
        params.tail_samples,
    ) {
        Ok(s) => s,
        Err(e) => return CheckResult::fail(name, format!("sampling failed: {e}")),
    };
    match fit_cdf_tail_exponent(&samples, 0.01) {
        Some((exponent, stderr)) => {
            let detail = format!(
                "exponent {exponent:.3} +/- {stderr:.3} vs N-M+1 = {expected} (tol {}, {} samples)",
                params.tail_tol, params.tail_samples
            );
            if (exponent - expected).abs() <= params.tail_tol {
                CheckResult::pass(name, detail)
            } else {
                CheckResult::fail(name, detail)
            }
        }
        None => CheckResult::fail(name, "tail fit had too few positive samples".to_string()),
    }
}
