//! In-memory closed-loop driver: tracker, optional predictor + compensator,
//! delayed actuator and bicycle model, logged every period.

use crate::compensator::{compose_command, CompensatorConfig, CompensatorError, CompensatorState};
use crate::log::{Sample, SampleLog};
use crate::metrics::rms;
use crate::plant::{vehicle_step, ActuatorState, PlantConfig, PlantError, VehicleState};
use crate::tdnn::{tapped_row, Ensemble, TdnnError};
use crate::tracking::{desired_yaw_rate, nominal_steering, TrackerConfig, TrackingError};

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Tracking(#[from] TrackingError),
    #[error(transparent)]
    Compensator(#[from] CompensatorError),
    #[error(transparent)]
    Predictor(#[from] TdnnError),
    #[error("compensator period {compensator} s differs from plant period {plant} s")]
    PeriodMismatch { compensator: f64, plant: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plant: PlantConfig,
    pub tracker: TrackerConfig,
    pub compensator: Option<CompensatorConfig>,
    pub predictor: Option<Ensemble>,
    /// Hard stop (s) in case the path end is never reached.
    pub max_duration: f64,
}

impl Scenario {
    /// Uncompensated run over `tracker.path` with a time limit of three times
    /// the nominal traversal time.
    pub fn new(plant: PlantConfig, tracker: TrackerConfig) -> Self {
        let max_duration = 3.0 * tracker.path.total_length() / tracker.speed.max(0.1) + 10.0;
        Self {
            plant,
            tracker,
            compensator: None,
            predictor: None,
            max_duration,
        }
    }

    pub fn compensated(&self) -> bool {
        self.compensator.is_some() && self.predictor.is_some()
    }

    pub fn without_compensation(&self) -> Self {
        Self {
            compensator: None,
            predictor: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.plant.validate()?;
        self.tracker.validate()?;
        if let Some(c) = &self.compensator {
            c.validate()?;
            if (c.period - self.plant.period).abs() > 1e-12 {
                return Err(SimError::PeriodMismatch {
                    compensator: c.period,
                    plant: self.plant.period,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    PathEnd,
    OffPath { distance: f64 },
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub log: SampleLog,
    pub termination: Termination,
}

impl RunOutcome {
    pub fn diverged(&self) -> bool {
        !matches!(self.termination, Termination::PathEnd)
    }
}

pub fn run(scenario: &Scenario) -> Result<RunOutcome, SimError> {
    scenario.validate()?;
    let plant = &scenario.plant;
    let tracker = &scenario.tracker;
    let t = plant.period;
    let max_steps = libm::ceil(scenario.max_duration / t) as usize;
    let total = tracker.path.total_length();

    let mut state = VehicleState::at_rest_heading_east(tracker.speed);
    let mut actuator = ActuatorState::new(plant);
    let mut comp_state = CompensatorState::new();
    let active = match (&scenario.compensator, &scenario.predictor) {
        (Some(c), Some(p)) => Some((c, p)),
        _ => None,
    };
    let feature_channels: Vec<&str> = active
        .map(|(_, p)| p.feature_names().iter().map(|s| s.as_str()).collect())
        .unwrap_or_default();
    let mut tap_buf = Vec::new();

    let mut log = SampleLog::new(t);
    let mut termination = Termination::Timeout;
    for k in 0..max_steps {
        let proj = tracker.path.project(state.x, state.y);
        if proj.s >= total {
            termination = Termination::PathEnd;
            break;
        }
        let (v_d, w_d) = match desired_yaw_rate(&state, tracker) {
            Ok(p) => p,
            Err(TrackingError::OffPath { distance }) => {
                termination = Termination::OffPath { distance };
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let u_track = nominal_steering(v_d, w_d, plant)?;
        let theta_preview = actuator.preview(u_track, plant);
        let gamma_desired = w_d.to_degrees();

        // Channels decided later in the step carry their uncompensated values
        // while the predictor reads the current row.
        let mut sample = Sample {
            t: k as f64 * t,
            x: state.x,
            y: state.y,
            psi: state.psi,
            v: state.v * 3.6,
            gamma_desired,
            gamma_measured: state.gamma.to_degrees(),
            u_track,
            u1: 0.0,
            u: u_track,
            theta_measured: theta_preview,
            e_instant: u_track - theta_preview,
            e_hat: 0.0,
            lateral_error: proj.offset,
        };

        let mut u1 = 0.0;
        if let Some((cfg, predictor)) = active {
            if log.len() + 1 >= predictor.taps() {
                log.push(sample);
                let columns: Vec<&[f64]> = feature_channels
                    .iter()
                    .map(|n| log.channel_by_name(n).ok_or_else(|| TdnnError::MissingChannel((*n).into())))
                    .collect::<Result<_, _>>()?;
                tapped_row(&columns, predictor.taps(), log.len() - 1, &mut tap_buf);
                log.pop();
                let e_hat = predictor.predict(&tap_buf)?;
                sample.e_hat = e_hat;
                u1 = comp_state.compensate(e_hat, gamma_desired, cfg)?;
            }
        }
        let u = compose_command(u_track, u1, plant.steering_limit_deg());
        let theta = actuator.step(u, plant);
        state = vehicle_step(&state, theta, plant);

        sample.u1 = u1;
        sample.u = u;
        sample.theta_measured = theta;
        sample.e_instant = u - theta;
        sample.gamma_measured = state.gamma.to_degrees();
        log.push(sample);
    }
    Ok(RunOutcome { log, termination })
}

/// RMS of the delay-induced steering error on a disturbance-free,
/// uncompensated copy of `scenario`.
pub fn delay_error_rms(scenario: &Scenario) -> Result<f64, SimError> {
    let mut clean = scenario.without_compensation();
    clean.plant.disturbance_sigma = 0.0;
    let out = run(&clean)?;
    Ok(rms(out.log.channel(crate::log::Channel::EInstant)))
}

/// Sets the disturbance std so that disturbance and delay error split the
/// steering error by `w2 : w1`. Returns the chosen sigma (deg).
pub fn calibrate_disturbance(scenario: &mut Scenario) -> Result<f64, SimError> {
    let sigma = scenario.plant.calibrated_sigma(delay_error_rms(scenario)?);
    scenario.plant.disturbance_sigma = sigma;
    Ok(sigma)
}
