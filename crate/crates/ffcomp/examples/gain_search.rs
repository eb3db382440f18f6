//! Grid search over compensator gains on the default scenario.
//!
//! Trains the default ensemble once, then runs the compensated double lane
//! change for every (kp, ki, kd) on the grid and prints the runs sorted by
//! max lateral error.
//!
//! `cargo run --release -p ffcomp --example gain_search`

use ffcomp::pipeline;
use ffcomp::ExperimentConfig;
use ffcomp_core::metrics::{Comparison, MetricsReport};
use ffcomp_core::sim::run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let base = pipeline::scenario(&cfg)?;
    let est = pipeline::identify(&cfg, &run(&base)?.log)?;
    let horizon = pipeline::horizon_steps(&cfg, est.delay);
    let logs = pipeline::collect(&cfg, base.plant.disturbance_sigma)?;
    let features = pipeline::pca(&cfg, &logs)?.selected;
    let trained = pipeline::train_all(&cfg, &logs, &features, horizon)?;
    let grid = pipeline::delay_grid(&cfg);
    let baseline = MetricsReport::from_log(&run(&base)?.log, None, grid)?;

    let mut results = Vec::new();
    for kp in [0.2, 0.4, 0.5, 0.6, 0.8, 1.0] {
        for ki in [0.0, 0.1, 0.2, 0.5] {
            for kd in [0.0, 0.02, 0.05, 0.1] {
                let mut c = cfg.clone();
                c.compensator.kp = kp;
                c.compensator.ki = ki;
                c.compensator.kd = kd;
                let out = run(&pipeline::compensated(&c, &base, trained.tdnn.clone()))?;
                let m = MetricsReport::from_log(&out.log, Some(horizon), grid)?;
                let cmp = Comparison::new(baseline.clone(), m);
                results.push((kp, ki, kd, cmp, pipeline::termination_name(&out.termination)));
            }
        }
    }
    results.sort_by(|a, b| {
        a.3.compensated
            .max_lateral_error
            .total_cmp(&b.3.compensated.max_lateral_error)
    });
    println!("kp    ki    kd     lateral[m]  lat%    osc%    end");
    for (kp, ki, kd, c, end) in &results {
        println!(
            "{kp:<5} {ki:<5} {kd:<6} {:>10.4} {:>7.1} {:>7.1}  {end}",
            c.compensated.max_lateral_error, c.max_lateral_error_improvement_pct, c.oscillation_improvement_pct
        );
    }
    Ok(())
}
