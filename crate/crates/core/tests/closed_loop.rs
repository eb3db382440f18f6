use ffcomp_core::log::Channel;
use ffcomp_core::metrics::{lateral_error, rms};
use ffcomp_core::plant::{vehicle_step, ActuatorState, PlantConfig, VehicleState};
use ffcomp_core::sim::{calibrate_disturbance, run, Scenario, Termination};
use ffcomp_core::tdnn::{build_raw_dataset, DEFAULT_FEATURES};
use ffcomp_core::tracking::{double_lane_change_path, slalom_path, ReferencePath};
use ffcomp_core::{kmh_to_mps, TrackerConfig};

fn dlc(delay: f64, sigma: f64, seed: u64) -> Scenario {
    Scenario::new(
        PlantConfig {
            actuator_delay: delay,
            disturbance_sigma: sigma,
            seed,
            ..Default::default()
        },
        TrackerConfig {
            lookahead: 4.0,
            speed: kmh_to_mps(30.0),
            path: double_lane_change_path(),
        },
    )
}

fn max_lateral(s: &Scenario) -> f64 {
    let out = run(s).unwrap();
    assert_eq!(out.termination, Termination::PathEnd);
    out.log
        .channel(Channel::LateralError)
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
}

#[test]
fn delay_free_baseline_tracks_closely() {
    let m = max_lateral(&dlc(0.0, 0.0, 1));
    assert!(m < 0.3, "{m}");
}

#[test]
fn delay_degrades_tracking() {
    let free = max_lateral(&dlc(0.0, 0.0, 1));
    let mut delayed = dlc(0.2, 0.0, 1);
    calibrate_disturbance(&mut delayed).unwrap();
    assert!(delayed.plant.disturbance_sigma > 0.0);
    assert!(max_lateral(&delayed) > free);
}

#[test]
fn error_free_plant_gives_zero_targets() {
    let out = run(&dlc(0.0, 0.0, 1)).unwrap();
    let names: Vec<String> = DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect();
    let d = build_raw_dataset(&out.log, &names, 6, 4).unwrap();
    assert!(d.targets.iter().all(|t| *t == 0.0));
}

#[test]
fn runs_are_deterministic() {
    let mut s = dlc(0.2, 0.0, 42);
    calibrate_disturbance(&mut s).unwrap();
    let a = run(&s).unwrap();
    let b = run(&s).unwrap();
    for c in Channel::ALL {
        let (x, y) = (a.log.channel(c), b.log.channel(c));
        assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
    s.plant.seed = 43;
    let c = run(&s).unwrap();
    assert_ne!(a.log.channel(Channel::ThetaMeasured), c.log.channel(Channel::ThetaMeasured));
}

#[test]
fn log_time_base_is_uniform() {
    let out = run(&dlc(0.2, 1.0, 3)).unwrap();
    let t = out.log.channel(Channel::T);
    for (k, v) in t.iter().enumerate() {
        assert_eq!(*v, k as f64 * 0.05);
    }
    assert_eq!(out.log.duration(), out.log.len() as f64 * 0.05);
}

fn final_position(period: f64) -> (f64, f64) {
    let cfg = PlantConfig {
        actuator_delay: 0.0,
        period,
        ..Default::default()
    };
    let mut st = VehicleState::at_rest_heading_east(8.0);
    let steps = (10.0 / period).round() as usize;
    for k in 0..steps {
        let t = k as f64 * period;
        st = vehicle_step(&st, 90.0 * (0.8 * t).sin(), &cfg);
    }
    (st.x, st.y)
}

#[test]
fn halving_the_period_barely_moves_the_endpoint() {
    let (x1, y1) = final_position(0.05);
    let (x2, y2) = final_position(0.025);
    let moved = ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
    let scale = (x2 * x2 + y2 * y2).sqrt();
    assert!(moved / scale < 0.01, "{moved} over {scale}");
}

#[test]
fn calibrated_disturbance_splits_error_by_weights() {
    let base = PlantConfig::default();
    let command: Vec<f64> = (0..4000).map(|k| 60.0 * (k as f64 * 0.05 * 1.3).sin()).collect();
    let d = base.delay_steps();
    let delay_part: Vec<f64> = (d..command.len()).map(|k| command[k - d] - command[k]).collect();
    let cfg = PlantConfig {
        disturbance_sigma: base.calibrated_sigma(rms(&delay_part)),
        seed: 5,
        ..base
    };
    let mut act = ActuatorState::new(&cfg);
    let out: Vec<f64> = command.iter().map(|c| act.step(*c, &cfg)).collect();
    let noise_part: Vec<f64> = (d..command.len()).map(|k| out[k] - command[k - d]).collect();
    let (rd, rn) = (rms(&delay_part), rms(&noise_part));
    let share = rd / (rd + rn);
    assert!((share - 0.713).abs() < 0.05, "delay share {share}");
}

#[test]
fn lateral_error_matches_brute_force_search() {
    let path = slalom_path(3.0, 40.0, 120.0);
    let rows = path.to_rows();
    // densify every segment and extend the first and last segments as rays
    let mut dense = Vec::new();
    for w in rows.windows(2) {
        for k in 0..100 {
            let f = k as f64 / 100.0;
            dense.push((w[0].1 + f * (w[1].1 - w[0].1), w[0].2 + f * (w[1].2 - w[0].2)));
        }
    }
    let ray = |a: (f64, f64, f64), b: (f64, f64, f64), out: &mut Vec<(f64, f64)>| {
        let (dx, dy) = (b.1 - a.1, b.2 - a.2);
        let len = (dx * dx + dy * dy).sqrt();
        for k in 0..=6000 {
            let d = k as f64 * 0.01;
            out.push((b.1 + dx / len * d, b.2 + dy / len * d));
        }
    };
    ray(rows[rows.len() - 2], rows[rows.len() - 1], &mut dense);
    ray(rows[1], rows[0], &mut dense);

    let points: Vec<(f64, f64)> = (0..60)
        .map(|i| {
            let x = -20.0 + i as f64 * 3.0;
            (x, 4.0 * (i as f64 * 1.7).sin())
        })
        .collect();
    let le = lateral_error(&points, &path).unwrap();
    for (p, e) in points.iter().zip(&le.series) {
        let brute = dense
            .iter()
            .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!((e.abs() - brute).abs() < 1e-3, "{p:?}: {e} vs {brute}");
    }
    assert!(le.extrapolated.iter().any(|&i| points[i].0 < 0.0));
    assert!(le.extrapolated.iter().any(|&i| points[i].0 > path.total_length() - 1.0));
}

#[test]
fn straight_path_offsets_are_exact() {
    let p = ReferencePath::from_xy(&[(0.0, 0.0), (100.0, 0.0)], 0.25).unwrap();
    let le = lateral_error(&[(10.0, 0.5), (120.0, -2.0)], &p).unwrap();
    assert_eq!(le.series, vec![0.5, -2.0]);
    assert_eq!(le.extrapolated, vec![1]);
}
