//! Experiment stages and the end-to-end pipeline.

use std::path::Path;

use rayon::prelude::*;

use ffcomp_core::log::Channel;
use ffcomp_core::metrics::{
    coefficient_of_efficiency, correlation_coefficient, identify_delay, Comparison, DelayEstimate, DelayGrid,
    MetricsReport,
};
use ffcomp_core::pca::{analyze, DataMatrix, PcaReport};
use ffcomp_core::sim::{calibrate_disturbance, run, RunOutcome, Scenario, Termination};
use ffcomp_core::tdnn::{build_raw_dataset, fit_normalization, train, Ensemble, TappedDataset, TdnnModel};
use ffcomp_core::tracking::{double_lane_change_path, slalom_path};
use ffcomp_core::SampleLog;

use crate::config::ExperimentConfig;
use crate::csvio::{self, header, write_text, Table};
use crate::error::{Error, Result, StageExt};
use crate::model_io;
use crate::report::{self, AccuracyRow};

pub fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::PathEnd => "path_end",
        Termination::OffPath { .. } => "off_path",
        Termination::Timeout => "timeout",
    }
}

/// Errors with [`Error::Diverged`] if the run left the path.
pub fn check_diverged(out: &RunOutcome) -> Result<()> {
    match out.termination {
        Termination::OffPath { distance } => Err(Error::Diverged {
            t: out.log.duration(),
            distance,
        }),
        _ => Ok(()),
    }
}

/// Uncompensated scenario for the configured path and speed, with the
/// disturbance calibrated if requested.
pub fn scenario(cfg: &ExperimentConfig) -> Result<Scenario> {
    let path = cfg.scenario.path.build(&cfg.base_dir)?;
    let mut s = Scenario::new(cfg.plant(), cfg.tracker(path, cfg.scenario.speed_kmh));
    if let Some(d) = cfg.scenario.max_duration {
        s.max_duration = d;
    }
    s.validate()?;
    if cfg.scenario.calibrate_disturbance {
        calibrate_disturbance(&mut s)?;
    }
    Ok(s)
}

pub fn delay_grid(cfg: &ExperimentConfig) -> DelayGrid {
    DelayGrid {
        max: cfg.delay.grid_max,
        step: cfg.delay.grid_step,
    }
}

pub fn identify(cfg: &ExperimentConfig, log: &SampleLog) -> Result<DelayEstimate> {
    Ok(identify_delay(
        log.channel(Channel::U),
        log.channel(Channel::ThetaMeasured),
        log.period(),
        delay_grid(cfg),
    )?)
}

/// Prediction horizon in steps: configured, or the identified delay rounded
/// to whole periods, at least one.
pub fn horizon_steps(cfg: &ExperimentConfig, delay: f64) -> usize {
    cfg.training
        .horizon_steps
        .unwrap_or_else(|| ((delay / cfg.plant.period).round() as usize).max(1))
}

/// Uncompensated runs over varied speeds and paths until the tapped dataset
/// reaches `collection.target_samples` rows.
pub fn collect(cfg: &ExperimentConfig, sigma: f64) -> Result<Vec<SampleLog>> {
    let c = &cfg.collection;
    let rows_per_log = |log: &SampleLog| {
        log.len()
            .saturating_sub(cfg.training.taps - 1 + cfg.training.horizon_steps.unwrap_or(1))
    };
    let mut logs = Vec::new();
    let mut rows = 0;
    let mut i = 0usize;
    while rows < c.target_samples {
        if i >= 1000 {
            return Err(Error::Config("collection cannot reach target_samples".into()));
        }
        let speed = c.speeds_kmh[i % c.speeds_kmh.len()];
        let path = if c.lane_change_every > 0 && i % c.lane_change_every == c.lane_change_every - 1 {
            double_lane_change_path()
        } else {
            slalom_path(
                c.slalom_amplitudes[i % c.slalom_amplitudes.len()],
                c.slalom_wavelengths[i % c.slalom_wavelengths.len()],
                c.slalom_length,
            )
        };
        let mut plant = cfg.plant();
        plant.disturbance_sigma = sigma;
        plant.seed = cfg.seed.wrapping_add(100 + i as u64);
        let out = run(&Scenario::new(plant, cfg.tracker(path, speed)))?;
        check_diverged(&out)?;
        rows += rows_per_log(&out.log);
        logs.push(out.log);
        i += 1;
    }
    Ok(logs)
}

pub fn pca_data(cfg: &ExperimentConfig, logs: &[SampleLog]) -> Result<DataMatrix> {
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); cfg.pca.channels.len()];
    for log in logs {
        for (col, name) in cols.iter_mut().zip(&cfg.pca.channels) {
            let ch = log
                .channel_by_name(name)
                .ok_or_else(|| Error::Config(format!("unknown PCA channel `{name}`")))?;
            col.extend_from_slice(ch);
        }
    }
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    Ok(DataMatrix::from_columns(&refs, cfg.pca.channels.clone())?)
}

pub fn pca(cfg: &ExperimentConfig, logs: &[SampleLog]) -> Result<PcaReport> {
    Ok(analyze(&pca_data(cfg, logs)?, &cfg.pca.options)?)
}

/// Tapped rows from every log, concatenated in log order.
pub fn dataset(logs: &[SampleLog], features: &[String], taps: usize, horizon: usize) -> Result<TappedDataset> {
    let mut all = TappedDataset::default();
    for log in logs {
        let d = build_raw_dataset(log, features, taps, horizon)?;
        if all.is_empty() {
            all = d;
        } else {
            all.extend(&d);
        }
    }
    Ok(all)
}

/// Keeps only the current-sample column of each feature.
pub fn current_sample_only(raw: &TappedDataset, features: usize, taps: usize) -> TappedDataset {
    let mut out = TappedDataset {
        width: features,
        inputs: Vec::with_capacity(raw.len() * features),
        targets: raw.targets.clone(),
    };
    for i in 0..raw.len() {
        let row = raw.row(i);
        out.inputs.extend((0..features).map(|f| row[f * taps]));
    }
    out
}

/// `restarts` independently seeded networks trained on `train_raw`.
pub fn train_ensemble(
    cfg: &ExperimentConfig,
    features: &[String],
    taps: usize,
    horizon: usize,
    restarts: usize,
    train_raw: &TappedDataset,
) -> Result<Ensemble> {
    let norm = fit_normalization(train_raw, features.len(), taps)?;
    let data = train_raw.normalized(&norm, taps);
    let models = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.seed.wrapping_mul(1000).wrapping_add(r as u64);
            let mut model = TdnnModel::new(features.to_vec(), taps, horizon, seed)?;
            model.norm = norm.clone();
            train(&model, &data, &cfg.training.optimizer(seed)).map(|(best, _)| best)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Ensemble::new(models)?)
}

pub struct Trained {
    pub tdnn: Ensemble,
    pub bp: Ensemble,
    pub small: Ensemble,
    pub rows: Vec<AccuracyRow>,
    /// Held-out targets and the TDNN / BP / reduced-data predictions.
    pub test_targets: Vec<f64>,
    pub test_predictions: [Vec<f64>; 3],
}

fn accuracy(targets: &[f64], predicted: &[f64]) -> (Option<f64>, Option<f64>) {
    (
        correlation_coefficient(targets, predicted).ok(),
        coefficient_of_efficiency(targets, predicted).ok(),
    )
}

/// Trains the TDNN ensemble, the single-tap baseline and the reduced-data
/// ensemble, and scores all three on the same held-out rows.
pub fn train_all(cfg: &ExperimentConfig, logs: &[SampleLog], features: &[String], horizon: usize) -> Result<Trained> {
    let taps = cfg.training.taps;
    let nf = features.len();
    let raw = dataset(logs, features, taps, horizon)?;
    let n_test = ((raw.len() as f64 * cfg.training.holdout_fraction).round() as usize).clamp(1, raw.len() - 1);
    let (train_raw, test_raw) = raw.split_at(raw.len() - n_test);
    let small_n = cfg.training.small_samples.min(train_raw.len());
    let (small_raw, _) = train_raw.split_at(small_n);
    let bp_train = current_sample_only(&train_raw, nf, taps);
    let bp_test = current_sample_only(&test_raw, nf, taps);

    let restarts = cfg.training.restarts;
    let tdnn = train_ensemble(cfg, features, taps, horizon, restarts, &train_raw)?;
    let bp = train_ensemble(cfg, features, 1, horizon, 1, &bp_train)?;
    let small = train_ensemble(cfg, features, taps, horizon, restarts, &small_raw)?;

    let preds = [
        tdnn.predict_all(&test_raw)?,
        bp.predict_all(&bp_test)?,
        small.predict_all(&test_raw)?,
    ];
    let specs = [("TDNN", taps, restarts, train_raw.len()), ("BP", 1, 1, bp_train.len()), ("TDNN", taps, restarts, small_n)];
    let rows = specs
        .iter()
        .zip(&preds)
        .map(|((name, m, r, n), p)| {
            let (cc, ce) = accuracy(&test_raw.targets, p);
            AccuracyRow {
                model: name.to_string(),
                taps: *m,
                restarts: *r,
                training_samples: *n,
                test_samples: test_raw.len(),
                cc,
                ce,
            }
        })
        .collect();
    Ok(Trained {
        tdnn,
        bp,
        small,
        rows,
        test_targets: test_raw.targets.clone(),
        test_predictions: preds,
    })
}

pub fn compensated(cfg: &ExperimentConfig, base: &Scenario, predictor: Ensemble) -> Scenario {
    Scenario {
        compensator: Some(cfg.compensator.to_config(cfg.plant.period)),
        predictor: Some(predictor),
        ..base.clone()
    }
}

pub struct Evaluation {
    pub baseline: RunOutcome,
    pub compensated: RunOutcome,
    pub comparison: Comparison,
}

/// Runs `base` with and without compensation and compares them.
pub fn evaluate(cfg: &ExperimentConfig, base: &Scenario, predictor: Ensemble) -> Result<Evaluation> {
    let horizon = predictor.horizon_steps();
    let baseline = run(&base.without_compensation())?;
    let comp = run(&compensated(cfg, base, predictor))?;
    let grid = delay_grid(cfg);
    let comparison = Comparison::new(
        MetricsReport::from_log(&baseline.log, None, grid)?,
        MetricsReport::from_log(&comp.log, Some(horizon), grid)?,
    );
    Ok(Evaluation {
        baseline,
        compensated: comp,
        comparison,
    })
}

/// Everything the pipeline produces, kept in memory for callers.
pub struct PipelineResult {
    pub sigma: f64,
    pub delay: DelayEstimate,
    pub horizon: usize,
    pub pca: PcaReport,
    pub features: Vec<String>,
    pub collected_samples: usize,
    pub trained: Trained,
    pub evaluation: Evaluation,
}

pub fn stage_pipeline(cfg: &ExperimentConfig) -> Result<PipelineResult> {
    let base = scenario(cfg).stage("calibration")?;
    let sigma = base.plant.disturbance_sigma;
    let collection_run = run(&base).stage("data collection")?;
    check_diverged(&collection_run).stage("data collection")?;
    let delay = identify(cfg, &collection_run.log).stage("delay identification")?;
    let horizon = horizon_steps(cfg, delay.delay);
    let logs = collect(cfg, sigma).stage("data collection")?;
    let pca = pca(cfg, &logs).stage("pca")?;
    let features = cfg.training.features.clone().unwrap_or_else(|| pca.selected.clone());
    let trained = train_all(cfg, &logs, &features, horizon).stage("training")?;
    let evaluation = if cfg.compensator.enabled {
        evaluate(cfg, &base, trained.tdnn.clone()).stage("evaluation")?
    } else {
        let baseline = run(&base).stage("evaluation")?;
        let m = MetricsReport::from_log(&baseline.log, None, delay_grid(cfg)).stage("evaluation")?;
        Evaluation {
            compensated: baseline.clone(),
            baseline,
            comparison: Comparison::new(m.clone(), m),
        }
    };
    Ok(PipelineResult {
        sigma,
        delay,
        horizon,
        pca,
        features,
        collected_samples: logs.iter().map(|l| l.len()).sum(),
        trained,
        evaluation,
    })
}

/// Runs the pipeline and writes every artifact under `out`.
pub fn pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineResult> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let res = stage_pipeline(cfg)?;
    write_pipeline(cfg, &res, out).stage("output")?;
    check_diverged(&res.evaluation.compensated).stage("evaluation")?;
    Ok(res)
}

pub fn write_models(dir: &Path, prefix: &str, ens: &Ensemble) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, m) in ens.models().iter().enumerate() {
        model_io::save(&dir.join(format!("{prefix}_{i:02}.json")), m)?;
    }
    Ok(())
}

pub fn write_pipeline(cfg: &ExperimentConfig, res: &PipelineResult, out: &Path) -> Result<()> {
    let ev = &res.evaluation;
    write_text(&out.join("config.toml"), &cfg.to_toml())?;
    csvio::write_path(&out.join("path.csv"), &cfg.scenario.path.build(&cfg.base_dir)?)?;

    report::delay_table(&res.delay).write(&out.join("delay_curve.csv"))?;
    let mut delay_txt = report::delay_text(&res.delay);
    delay_txt.push_str(&format!(
        "horizon = {} steps\ndisturbance sigma = {} deg\n",
        res.horizon, res.sigma
    ));
    write_text(&out.join("delay.txt"), &delay_txt)?;

    write_text(
        &out.join("pca_report.txt"),
        &report::pca_text(&res.pca, cfg.pca.options.standardize, res.collected_samples),
    )?;
    report::pca_table(&res.pca).write(&out.join("pca_contributions.csv"))?;

    let t = &res.trained;
    write_text(
        &out.join("accuracy.txt"),
        &report::accuracy_text(&t.rows, res.horizon, &res.features),
    )?;
    report::accuracy_table(&t.rows).write(&out.join("accuracy.csv"))?;
    let mut pred = Table::new(vec![
        "index".into(),
        header("e_measured", "deg"),
        header("tdnn", "deg"),
        header("bp", "deg"),
        header("tdnn_small", "deg"),
    ]);
    for i in 0..t.test_targets.len() {
        pred.push_numbers(&[
            i as f64,
            t.test_targets[i],
            t.test_predictions[0][i],
            t.test_predictions[1][i],
            t.test_predictions[2][i],
        ]);
    }
    pred.write(&out.join("predictions.csv"))?;
    let models = out.join("models");
    write_models(&models, "tdnn", &t.tdnn)?;
    write_models(&models, "bp", &t.bp)?;
    write_models(&models, "tdnn_small", &t.small)?;

    csvio::write_log(&out.join("baseline.csv"), &ev.baseline.log)?;
    csvio::write_log(&out.join("compensated.csv"), &ev.compensated.log)?;
    let term = [
        termination_name(&ev.baseline.termination),
        termination_name(&ev.compensated.termination),
    ];
    write_text(
        &out.join("metrics.toml"),
        &report::comparison_toml(&ev.comparison, term, &cfg.compensator, cfg.plant.period),
    )?;
    let mut mt = report::metrics_table();
    report::push_metrics_row(&mut mt, "baseline", &ev.comparison.baseline, term[0]);
    report::push_metrics_row(&mut mt, "compensated", &ev.comparison.compensated, term[1]);
    mt.write(&out.join("metrics.csv"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bp_rows_are_current_taps() {
        let raw = TappedDataset {
            width: 6,
            inputs: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            targets: vec![9.0],
        };
        let bp = current_sample_only(&raw, 2, 3);
        assert_eq!(bp.inputs, vec![1.0, 4.0]);
        assert_eq!(bp.targets, vec![9.0]);
    }

    #[test]
    fn horizon_from_delay() {
        let cfg = ExperimentConfig::default();
        assert_eq!(horizon_steps(&cfg, 0.2), 4);
        assert_eq!(horizon_steps(&cfg, 0.0), 1);
    }
}
