use std::fmt::Write as _;

use super::summary::{AblationSummary, Distribution, Exp1Summary, SpecificitySummary, Summary};
use super::ExperimentReport;

fn opt(v: Option<f64>, prec: usize) -> String {
    match v {
        Some(x) => format!("{x:.prec$}"),
        None => "-".into(),
    }
}

fn sci(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3e}"),
        None => "-".into(),
    }
}

pub(super) fn render_report(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let cfg = &report.config;
    let _ = writeln!(s, "experiment: {}", cfg.experiment);
    for note in &cfg.notes {
        let _ = writeln!(s, "note: {note}");
    }
    let _ = writeln!(s, "records: {}", report.records.len());
    s.push('\n');
    match &report.summary {
        Summary::Exp1(e) => exp1(&mut s, e),
        Summary::Specificity(sp) => specificity(&mut s, sp),
        Summary::Ablation(a) => ablation(&mut s, a),
    }
    s
}

fn exp1(s: &mut String, e: &Exp1Summary) {
    let _ = writeln!(s, "MSIQ between each image and its rescaled copy (native sizes)");
    let _ = writeln!(
        s,
        "{:<10} {:<10} {:>5} {:>11} {:>11} {:>11} {:>11}",
        "interp", "metric", "n", "mean", "median", "min", "max"
    );
    for row in &e.msiq {
        let d = row.stats.as_ref();
        let f = |g: fn(&Distribution) -> f64| sci(d.map(g));
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>5} {:>11} {:>11} {:>11} {:>11}",
            row.interpolator.name(),
            row.metric.name(),
            d.map_or(0, |d| d.count),
            f(|d| d.mean),
            f(|d| d.median),
            f(|d| d.min),
            f(|d| d.max)
        );
    }
    s.push('\n');
    let _ = writeln!(s, "PSNR/SSIM after forcing the copy back to the original size");
    let _ = writeln!(
        s,
        "{:<10} {:>6} {:>9} {:>12} {:>12} {:>12} {:>12}",
        "scaling", "groups", "inf_psnr", "dPSNR_med", "dPSNR_max", "dSSIM_med", "dSSIM_max"
    );
    for row in &e.forced {
        let p = row.psnr_spread.as_ref();
        let q = row.ssim_spread.as_ref();
        let _ = writeln!(
            s,
            "{:<10} {:>6} {:>9} {:>12} {:>12} {:>12} {:>12}",
            row.interpolator.name(),
            row.groups,
            row.inf_psnr,
            opt(p.map(|d| d.median), 3),
            opt(p.map(|d| d.max), 3),
            opt(q.map(|d| d.median), 5),
            opt(q.map(|d| d.max), 5)
        );
    }
    let _ = writeln!(
        s,
        "median finite PSNR spread: {} dB; median SSIM spread: {}; infinite PSNR cases: {}",
        opt(e.median_psnr_spread, 3),
        opt(e.median_ssim_spread, 5),
        e.inf_psnr
    );
}

fn specificity(s: &mut String, sp: &SpecificitySummary) {
    let _ = writeln!(s, "Tracking (mean signed Spearman rho, geometric trajectories)");
    let _ = writeln!(s, "{:<10} {:>9} {:>6} {:>10}", "metric", "rho", "n", "undefined");
    for t in &sp.tracking {
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:>6} {:>10}",
            t.metric.name(),
            opt(t.mean_rho, 4),
            t.trajectories,
            t.undefined
        );
    }
    s.push('\n');
    let _ = writeln!(s, "Geometric specificity (R_M = mean geometric dM / mean JPEG dM)");
    let _ = writeln!(
        s,
        "{:<10} {:<10} {:>11} {:>11} {:>11} {:>11} {:>11} {:>6} {:>10}",
        "metric", "row", "R_M", "min kind", "geo dM", "jpeg dM", "unit mean", "units", "undefined"
    );
    for r in &sp.specificity {
        let value = if r.unstable { "unstable".to_string() } else { opt(r.r, 2) };
        let _ = writeln!(
            s,
            "{:<10} {:<10} {:>11} {:>11} {:>11} {:>11} {:>11} {:>6} {:>10}",
            r.metric.name(),
            format!("R_M({:.2})", r.lambda),
            value,
            opt(r.min_kind_r, 2),
            sci(r.mean_geometric_delta),
            sci(r.mean_jpeg_delta),
            opt(r.unit_mean_r, 2),
            r.units,
            r.undefined
        );
    }
    if !sp.stability.is_empty() {
        s.push('\n');
        let _ = writeln!(s, "Per-method mean increment (stability across super-resolution methods)");
        for r in &sp.stability {
            let methods: Vec<String> = r
                .per_method
                .iter()
                .map(|m| format!("{}={:.3e}", m.method, m.mean_delta))
                .collect();
            let _ = writeln!(
                s,
                "{:<10} {:<12} lambda={:.2} spread={:>7}  {}",
                r.metric.name(),
                r.degradation.name(),
                r.lambda,
                r.relative_spread
                    .map(|x| format!("{:.1}%", 100.0 * x))
                    .unwrap_or_else(|| "-".into()),
                methods.join(" ")
            );
        }
    }
}

fn ablation(s: &mut String, a: &AblationSummary) {
    let _ = writeln!(s, "Moment-order ablation");
    let _ = writeln!(
        s,
        "{:>3} {:>4} {:>4} {:>12} {:>12} {:>12}",
        "N", "NaN", "Inf", "mean|nu|", "rho(PSNR)", "rho(SSIM)"
    );
    for r in &a.rows {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(
            s,
            "{:>3} {:>4} {:>4} {:>12.6} {:>12} {:>12}",
            r.order,
            yn(r.nan),
            yn(r.inf),
            r.mean_abs_nu,
            opt(r.rho_psnr, 6),
            opt(r.rho_ssim, 6)
        );
    }
}
