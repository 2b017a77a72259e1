//! Deterministic text output: CSV tables and the sweep summary.
//!
//! Every file starts with a `#` comment header echoing the artifact version,
//! the command, and the fully resolved configuration, so a result can always
//! be traced back to its inputs. Floats are printed with 17 significant
//! digits; two runs with the same seed produce byte-identical files.

use std::fmt::Write as _;

use dmt_core::analysis::{AnalysisError, DmtEstimate, OutageCurve};

/// Full-precision decimal form: 17 significant digits round-trip f64 exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(command: &str, echo: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dmt-sim v{}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# command: {command}");
    for (key, value) in echo {
        let _ = writeln!(out, "# {key} = {value}");
    }
    out
}

pub fn outage_csv(echo: &[(String, String)], curve: &OutageCurve) -> String {
    let mut out = header("sweep", echo);
    out.push_str("snr_db,target_rate_bits,trials,outages,p_out,ci_low,ci_high,discarded\n");
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt17(p.snr_db),
            fmt17(p.target_rate_bits),
            p.trials,
            p.outages,
            fmt17(p.p_out),
            fmt17(p.ci_low),
            fmt17(p.ci_high),
            p.discarded
        );
    }
    out
}

pub fn surface_csv(echo: &[(String, String)], rows: &[(f64, f64, f64, f64, f64)]) -> String {
    let mut out = header("dmt-surface", echo);
    out.push_str("r,xi,d_mmse,d_p2p,d_ml\n");
    for &(r, xi, d_mmse, d_p2p, d_ml) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt17(r),
            fmt17(xi),
            fmt17(d_mmse),
            fmt17(d_p2p),
            fmt17(d_ml)
        );
    }
    out
}

pub fn summary_txt(
    echo: &[(String, String)],
    curve: &OutageCurve,
    fit: &Result<DmtEstimate, AnalysisError>,
) -> String {
    let mut out = header("sweep", echo);
    let _ = writeln!(out, "points: {}", curve.points.len());
    match fit {
        Ok(est) => {
            let _ = writeln!(
                out,
                "fit window: p_out in [{:e}, {:e}]",
                est.fit_range.0, est.fit_range.1
            );
            let _ = writeln!(out, "points used: {}", est.points_used);
            let _ = writeln!(
                out,
                "d_hat = {} +/- {}",
                fmt17(est.slope),
                fmt17(est.stderr)
            );
            let _ = writeln!(out, "d_theory = {}", fmt17(est.theoretical_d));
        }
        Err(e) => {
            let _ = writeln!(out, "slope fit: InsufficientPoints ({e})");
        }
    }
    out
}
