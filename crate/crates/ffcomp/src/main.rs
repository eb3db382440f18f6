use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ffcomp::config::ExperimentConfig;
use ffcomp::csvio::{self, write_text};
use ffcomp::error::{Error, Result, StageExt, EXIT_OK};
use ffcomp::model_io;
use ffcomp::pipeline::{self, check_diverged, termination_name};
use ffcomp::report;
use ffcomp_core::metrics::MetricsReport;
use ffcomp_core::sim::run;
use ffcomp_core::tdnn::Ensemble;
use ffcomp_core::SampleLog;

#[derive(Parser)]
#[command(name = "ffcomp", version, about = "Learned feedforward compensation of steering actuator delay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Disable the compensator regardless of the config.
    #[arg(long)]
    no_compensator: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop scenario and log it.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Identify the actuator delay from a log (or a fresh uncompensated run).
    Delay {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        log: Option<PathBuf>,
    },
    /// Principal component analysis of logged channels.
    Pca {
        #[command(flatten)]
        common: Common,
        /// Logs to analyse; collection runs are simulated when omitted.
        #[arg(long, value_name = "CSV")]
        log: Vec<PathBuf>,
    },
    /// Train the predictor ensemble and baselines.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training logs; collection runs are simulated when omitted.
        #[arg(long, value_name = "CSV")]
        log: Vec<PathBuf>,
    },
    /// Compare compensated and uncompensated runs with saved models.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Model files; defaults to `predictor.models` from the config.
        #[arg(long, value_name = "JSON")]
        model: Vec<PathBuf>,
    },
    /// Calibrate, identify delay, select features, train and evaluate.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p, c.seed)?,
        None => {
            let mut cfg = ExperimentConfig::default();
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            cfg
        }
    };
    if c.no_compensator {
        cfg.compensator.enabled = false;
    }
    Ok(cfg)
}

fn out_dir(c: &Common) -> Result<&Path> {
    std::fs::create_dir_all(&c.out).map_err(|e| Error::io(&c.out, e))?;
    Ok(&c.out)
}

fn load_ensemble(paths: &[PathBuf]) -> Result<Ensemble> {
    let models = paths.iter().map(|p| model_io::load(p)).collect::<Result<Vec<_>>>()?;
    Ok(Ensemble::new(models)?)
}

fn configured_models(cfg: &ExperimentConfig) -> Vec<PathBuf> {
    cfg.predictor.models.iter().map(|m| cfg.resolve(m)).collect()
}

fn read_logs(paths: &[PathBuf]) -> Result<Vec<SampleLog>> {
    paths.iter().map(|p| csvio::read_log(p)).collect()
}

fn simulate(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let out = out_dir(c)?;
    let base = pipeline::scenario(&cfg).stage("calibration")?;
    let models = configured_models(&cfg);
    let (scenario, horizon) = if cfg.compensator.enabled && !models.is_empty() {
        let ens = load_ensemble(&models).stage("predictor")?;
        let h = ens.horizon_steps();
        (pipeline::compensated(&cfg, &base, ens), Some(h))
    } else {
        if cfg.compensator.enabled {
            eprintln!("no predictor models configured; running uncompensated");
        }
        (base, None)
    };
    let res = run(&scenario).stage("simulation")?;
    csvio::write_log(&out.join("log.csv"), &res.log)?;
    csvio::write_path(&out.join("path.csv"), &scenario.tracker.path)?;
    let m = MetricsReport::from_log(&res.log, horizon, pipeline::delay_grid(&cfg)).stage("metrics")?;
    let term = termination_name(&res.termination);
    let comp = scenario.compensated().then_some((&cfg.compensator, cfg.plant.period));
    write_text(&out.join("metrics.toml"), &report::metrics_toml("simulate", &m, term, comp))?;
    let mut t = report::metrics_table();
    report::push_metrics_row(&mut t, "simulate", &m, term);
    t.write(&out.join("metrics.csv"))?;
    println!(
        "{} steps, max lateral error {:.4} m, oscillation {:.4} deg/step, {term}",
        m.steps, m.max_lateral_error, m.oscillation
    );
    check_diverged(&res).stage("simulation")
}

fn delay(c: &Common, log: Option<&Path>) -> Result<()> {
    let cfg = load_config(c)?;
    let out = out_dir(c)?;
    let log = match log {
        Some(p) => csvio::read_log(p)?,
        None => {
            let s = pipeline::scenario(&cfg).stage("calibration")?;
            let res = run(&s).stage("simulation")?;
            check_diverged(&res).stage("simulation")?;
            res.log
        }
    };
    let est = pipeline::identify(&cfg, &log).stage("delay identification")?;
    report::delay_table(&est).write(&out.join("delay_curve.csv"))?;
    let text = report::delay_text(&est);
    write_text(&out.join("delay.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn collected_or_read(cfg: &ExperimentConfig, logs: &[PathBuf]) -> Result<Vec<SampleLog>> {
    if logs.is_empty() {
        let s = pipeline::scenario(cfg).stage("calibration")?;
        pipeline::collect(cfg, s.plant.disturbance_sigma).stage("data collection")
    } else {
        read_logs(logs)
    }
}

fn pca(c: &Common, logs: &[PathBuf]) -> Result<()> {
    let cfg = load_config(c)?;
    let out = out_dir(c)?;
    let logs = collected_or_read(&cfg, logs)?;
    let rep = pipeline::pca(&cfg, &logs).stage("pca")?;
    let n = logs.iter().map(|l| l.len()).sum();
    let text = report::pca_text(&rep, cfg.pca.options.standardize, n);
    write_text(&out.join("pca_report.txt"), &text)?;
    report::pca_table(&rep).write(&out.join("pca_contributions.csv"))?;
    print!("{text}");
    Ok(())
}

fn train(c: &Common, logs: &[PathBuf]) -> Result<()> {
    let cfg = load_config(c)?;
    let out = out_dir(c)?;
    let logs = collected_or_read(&cfg, logs)?;
    let horizon = match cfg.training.horizon_steps {
        Some(h) => h,
        None => {
            let est = pipeline::identify(&cfg, &logs[0]).stage("delay identification")?;
            pipeline::horizon_steps(&cfg, est.delay)
        }
    };
    let features = match &cfg.training.features {
        Some(f) => f.clone(),
        None => pipeline::pca(&cfg, &logs).stage("pca")?.selected,
    };
    let t = pipeline::train_all(&cfg, &logs, &features, horizon).stage("training")?;
    let models = out.join("models");
    pipeline::write_models(&models, "tdnn", &t.tdnn)?;
    pipeline::write_models(&models, "bp", &t.bp)?;
    pipeline::write_models(&models, "tdnn_small", &t.small)?;
    let text = report::accuracy_text(&t.rows, horizon, &features);
    write_text(&out.join("accuracy.txt"), &text)?;
    report::accuracy_table(&t.rows).write(&out.join("accuracy.csv"))?;
    print!("{text}");
    Ok(())
}

fn evaluate(c: &Common, models: &[PathBuf]) -> Result<()> {
    let cfg = load_config(c)?;
    let out = out_dir(c)?;
    let models = if models.is_empty() { configured_models(&cfg) } else { models.to_vec() };
    if models.is_empty() {
        return Err(Error::Config("evaluate needs --model or predictor.models".into()));
    }
    let ens = load_ensemble(&models).stage("predictor")?;
    let base = pipeline::scenario(&cfg).stage("calibration")?;
    if !cfg.compensator.enabled {
        let res = run(&base).stage("simulation")?;
        csvio::write_log(&out.join("baseline.csv"), &res.log)?;
        let m = MetricsReport::from_log(&res.log, None, pipeline::delay_grid(&cfg)).stage("metrics")?;
        let term = termination_name(&res.termination);
        write_text(&out.join("metrics.toml"), &report::metrics_toml("baseline", &m, term, None))?;
        println!("max lateral error {:.4} m, oscillation {:.4} deg/step", m.max_lateral_error, m.oscillation);
        return check_diverged(&res).stage("simulation");
    }
    let ev = pipeline::evaluate(&cfg, &base, ens).stage("evaluation")?;
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
    let mut t = report::metrics_table();
    report::push_metrics_row(&mut t, "baseline", &ev.comparison.baseline, term[0]);
    report::push_metrics_row(&mut t, "compensated", &ev.comparison.compensated, term[1]);
    t.write(&out.join("metrics.csv"))?;
    print_comparison(&ev.comparison);
    check_diverged(&ev.compensated).stage("evaluation")
}

fn print_comparison(c: &ffcomp_core::metrics::Comparison) {
    println!(
        "max lateral error {:.4} -> {:.4} m ({:.1} %)",
        c.baseline.max_lateral_error, c.compensated.max_lateral_error, c.max_lateral_error_improvement_pct
    );
    println!(
        "oscillation {:.4} -> {:.4} deg/step ({:.1} %)",
        c.baseline.oscillation, c.compensated.oscillation, c.oscillation_improvement_pct
    );
}

fn run_pipeline(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let out = out_dir(c)?;
    let res = pipeline::pipeline(&cfg, out)?;
    print!("{}", report::delay_text(&res.delay));
    println!("selected features: {}", res.pca.selected.join(", "));
    print!("{}", report::accuracy_text(&res.trained.rows, res.horizon, &res.features));
    print_comparison(&res.evaluation.comparison);
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common } => simulate(common),
        Command::Delay { common, log } => delay(common, log.as_deref()),
        Command::Pca { common, log } => pca(common, log),
        Command::Train { common, log } => train(common, log),
        Command::Evaluate { common, model } => evaluate(common, model),
        Command::Pipeline { common } => run_pipeline(common),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
