//! Human-readable reports and flat CSV rows.

use std::fmt::Write;

use serde::Serialize;

use ffcomp_core::metrics::{Comparison, DelayEstimate, MetricsReport};
use ffcomp_core::pca::PcaReport;

use crate::config::CompensatorSection;
use crate::csvio::{fmt_f64, header, Table};

/// PCA summary laid out like a feature / eigenvalue / contribution table.
pub fn pca_text(report: &PcaReport, standardized: bool, samples: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# PCA feature analysis");
    let _ = writeln!(s, "# samples: {samples}");
    let _ = writeln!(s, "# matrix: {}", if standardized { "correlation" } else { "covariance" });
    let _ = writeln!(s, "# channels are simulated analogues of vehicle sensor signals");
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<4} {:<18} {:>14} {:>9} {:>12}", "rank", "feature", "eigenvalue", "Cr (%)", "cum. (%)");
    let mut cum = 0.0;
    for (k, ((name, ev), cr)) in report
        .dominant_features
        .iter()
        .zip(&report.eigenvalues)
        .zip(&report.contribution_rates)
        .enumerate()
    {
        cum += cr;
        let _ = writeln!(
            s,
            "{:<4} {:<18} {:>14.3} {:>9.2} {:>12.2}",
            k + 1,
            name,
            ev,
            cr * 100.0,
            cum * 100.0
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "components used: {} (cumulative {:.2} %)",
        report.components_used,
        report.cumulative_rate * 100.0
    );
    let _ = writeln!(s, "selected features: {}", report.selected.join(", "));
    let _ = writeln!(s);
    let _ = writeln!(s, "# eigenvectors (columns in rank order)");
    let _ = write!(s, "{:<18}", "feature");
    for k in 0..report.n() {
        let _ = write!(s, " {:>9}", format!("pc{}", k + 1));
    }
    let _ = writeln!(s);
    for (i, name) in report.feature_names.iter().enumerate() {
        let _ = write!(s, "{name:<18}");
        for k in 0..report.n() {
            let _ = write!(s, " {:>9.4}", report.eigenvector(k)[i]);
        }
        let _ = writeln!(s);
    }
    s
}

pub fn pca_table(report: &PcaReport) -> Table {
    let mut t = Table::new(vec![
        "rank".into(),
        "feature".into(),
        "eigenvalue".into(),
        header("contribution_rate", "%"),
    ]);
    for (k, ((name, ev), cr)) in report
        .dominant_features
        .iter()
        .zip(&report.eigenvalues)
        .zip(&report.contribution_rates)
        .enumerate()
    {
        t.rows
            .push(vec![(k + 1).to_string(), name.clone(), fmt_f64(*ev), fmt_f64(cr * 100.0)]);
    }
    t
}

pub fn delay_table(est: &DelayEstimate) -> Table {
    let mut t = Table::new(vec![header("shift", "s"), header("rmse", "deg")]);
    for (shift, r) in &est.curve {
        t.push_numbers(&[*shift, *r]);
    }
    t
}

pub fn delay_text(est: &DelayEstimate) -> String {
    let mut s = String::new();
    let base = est.rmse_at(0.0);
    let _ = writeln!(s, "delay = {:.2} s", est.delay);
    let _ = writeln!(s, "rmse at delay = {:.6} deg", est.min_rmse());
    if let Some(b) = base {
        let _ = writeln!(s, "rmse at 0 s = {b:.6} deg");
        if b > 0.0 {
            let _ = writeln!(s, "ratio = {:.4}", est.min_rmse() / b);
        }
    }
    s
}

#[derive(Serialize)]
struct MetricsToml<'a> {
    run: &'a str,
    steps: usize,
    duration_s: f64,
    rmse_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay_estimate_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ce: Option<f64>,
    max_lateral_error_m: f64,
    oscillation_deg_per_step: f64,
    oscillation_measured_deg_per_step: f64,
    terminated: &'a str,
}

#[derive(Serialize)]
struct ImprovementToml {
    max_lateral_error_pct: f64,
    oscillation_pct: f64,
    oscillation_measured_pct: f64,
    rmse_pct: f64,
}

fn compensator_header(comp: Option<(&CompensatorSection, f64)>) -> String {
    match comp {
        Some((c, period)) if c.enabled => format!(
            "# compensator: kp = {}, ki = {}, kd = {}, w0 = {} deg/s, T = {} s, u1_limit = {} deg\n",
            c.kp, c.ki, c.kd, c.w0, period, c.u1_limit
        ),
        _ => "# compensator: off\n".into(),
    }
}

fn metrics_entry<'a>(run: &'a str, m: &MetricsReport, terminated: &'a str) -> MetricsToml<'a> {
    MetricsToml {
        run,
        steps: m.steps,
        duration_s: m.duration,
        rmse_deg: m.rmse,
        delay_estimate_s: m.delay_estimate,
        cc: m.cc,
        ce: m.ce,
        max_lateral_error_m: m.max_lateral_error,
        oscillation_deg_per_step: m.oscillation,
        oscillation_measured_deg_per_step: m.oscillation_measured,
        terminated,
    }
}

/// One run's metrics as TOML, with the compensator settings in the header.
pub fn metrics_toml(run: &str, m: &MetricsReport, terminated: &str, comp: Option<(&CompensatorSection, f64)>) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        metrics: MetricsToml<'a>,
    }
    let mut s = compensator_header(comp);
    s.push_str(&toml::to_string(&Doc {
        metrics: metrics_entry(run, m, terminated),
    }).expect("metrics serialise"));
    s
}

pub fn comparison_toml(c: &Comparison, terminated: [&str; 2], comp: &CompensatorSection, period: f64) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        baseline: MetricsToml<'a>,
        compensated: MetricsToml<'a>,
        improvement: ImprovementToml,
    }
    let mut s = compensator_header(Some((comp, period)));
    s.push_str("# improvement = 100 * (baseline - compensated) / baseline\n");
    s.push_str(
        &toml::to_string(&Doc {
            baseline: metrics_entry("baseline", &c.baseline, terminated[0]),
            compensated: metrics_entry("compensated", &c.compensated, terminated[1]),
            improvement: ImprovementToml {
                max_lateral_error_pct: c.max_lateral_error_improvement_pct,
                oscillation_pct: c.oscillation_improvement_pct,
                oscillation_measured_pct: c.oscillation_measured_improvement_pct,
                rmse_pct: c.rmse_improvement_pct,
            },
        })
        .expect("metrics serialise"),
    );
    s
}

pub fn metrics_table() -> Table {
    Table::new(vec![
        "run".into(),
        "steps".into(),
        header("duration", "s"),
        header("rmse", "deg"),
        header("delay_estimate", "s"),
        "cc".into(),
        "ce".into(),
        header("max_lateral_error", "m"),
        header("oscillation", "deg/step"),
        header("oscillation_measured", "deg/step"),
        "terminated".into(),
    ])
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn push_metrics_row(t: &mut Table, run: &str, m: &MetricsReport, terminated: &str) {
    t.rows.push(vec![
        run.into(),
        m.steps.to_string(),
        fmt_f64(m.duration),
        fmt_f64(m.rmse),
        opt(m.delay_estimate),
        opt(m.cc),
        opt(m.ce),
        fmt_f64(m.max_lateral_error),
        fmt_f64(m.oscillation),
        fmt_f64(m.oscillation_measured),
        terminated.into(),
    ]);
}

/// Held-out accuracy of one predictor configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub model: String,
    pub taps: usize,
    pub restarts: usize,
    pub training_samples: usize,
    pub test_samples: usize,
    pub cc: Option<f64>,
    pub ce: Option<f64>,
}

pub fn accuracy_text(rows: &[AccuracyRow], horizon: usize, features: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# held-out prediction accuracy, horizon {horizon} steps");
    let _ = writeln!(s, "# features: {}", features.join(", "));
    let _ = writeln!(
        s,
        "{:<8} {:>4} {:>8} {:>9} {:>7} {:>8} {:>8}",
        "model", "taps", "restarts", "train", "test", "CC", "CE"
    );
    let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into());
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:>4} {:>8} {:>9} {:>7} {:>8} {:>8}",
            r.model,
            r.taps,
            r.restarts,
            r.training_samples,
            r.test_samples,
            f(r.cc),
            f(r.ce)
        );
    }
    s
}

pub fn accuracy_table(rows: &[AccuracyRow]) -> Table {
    let mut t = Table::new(
        ["model", "taps", "restarts", "training_samples", "test_samples", "cc", "ce"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for r in rows {
        t.rows.push(vec![
            r.model.clone(),
            r.taps.to_string(),
            r.restarts.to_string(),
            r.training_samples.to_string(),
            r.test_samples.to_string(),
            opt(r.cc),
            opt(r.ce),
        ]);
    }
    t
}
