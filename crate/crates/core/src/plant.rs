//! Kinematic bicycle vehicle driven through a steering actuator with a pure
//! transport delay and additive Gaussian disturbance.

use alloc::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// Front-wheel angle limit (rad).
pub const MAX_FRONT_WHEEL_ANGLE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PlantError {
    #[error("sampling period must be positive, got {0}")]
    BadPeriod(f64),
    #[error("actuator delay {delay} s is not a non-negative multiple of the period {period} s")]
    BadDelay { delay: f64, period: f64 },
    #[error("disturbance weights must lie in [0, 1] and sum to 1 (w1 = {w1}, w2 = {w2})")]
    BadWeights { w1: f64, w2: f64 },
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PlantConfig {
    /// Wheelbase (m).
    pub wheelbase: f64,
    /// Steering-wheel angle over front-wheel angle.
    pub steering_ratio: f64,
    /// Pure actuator delay (s). Must be a multiple of `period`.
    pub actuator_delay: f64,
    /// Std of the additive steering-wheel disturbance (deg).
    pub disturbance_sigma: f64,
    /// Share of steering error attributed to the delay.
    pub w1: f64,
    /// Share of steering error attributed to random disturbance.
    pub w2: f64,
    /// Sampling period (s).
    pub period: f64,
    pub seed: u64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            wheelbase: 2.85,
            steering_ratio: 16.0,
            actuator_delay: 0.2,
            disturbance_sigma: 0.0,
            w1: 0.713,
            w2: 0.287,
            period: 0.05,
            seed: 0,
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(PlantError::BadPeriod(self.period));
        }
        if !(self.wheelbase > 0.0 && self.wheelbase.is_finite()) {
            return Err(PlantError::NonPositive("wheelbase"));
        }
        if !(self.steering_ratio > 0.0 && self.steering_ratio.is_finite()) {
            return Err(PlantError::NonPositive("steering_ratio"));
        }
        if !(self.disturbance_sigma >= 0.0 && self.disturbance_sigma.is_finite()) {
            return Err(PlantError::NonPositive("disturbance_sigma"));
        }
        let steps = self.actuator_delay / self.period;
        if !(self.actuator_delay >= 0.0) || libm::fabs(steps - libm::round(steps)) > 1e-9 {
            return Err(PlantError::BadDelay {
                delay: self.actuator_delay,
                period: self.period,
            });
        }
        let in_unit = |w: f64| (0.0..=1.0).contains(&w);
        if !in_unit(self.w1) || !in_unit(self.w2) || libm::fabs(self.w1 + self.w2 - 1.0) > 1e-9 {
            return Err(PlantError::BadWeights {
                w1: self.w1,
                w2: self.w2,
            });
        }
        Ok(())
    }

    /// Actuator delay in samples.
    pub fn delay_steps(&self) -> usize {
        libm::round(self.actuator_delay / self.period) as usize
    }

    /// Steering-wheel angle (deg) equivalent to the front-wheel limit.
    pub fn steering_limit_deg(&self) -> f64 {
        MAX_FRONT_WHEEL_ANGLE.to_degrees() * self.steering_ratio
    }

    pub fn clamp_steering(&self, deg: f64) -> f64 {
        let limit = self.steering_limit_deg();
        deg.clamp(-limit, limit)
    }

    /// Disturbance std that makes RMS(disturbance) / RMS(delay error) equal
    /// `w2 / w1`, given the RMS delay-induced error of a reference run.
    pub fn calibrated_sigma(&self, delay_error_rms: f64) -> f64 {
        if self.w1 == 0.0 {
            return 0.0;
        }
        delay_error_rms * self.w2 / self.w1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    /// East position (m).
    pub x: f64,
    /// North position (m).
    pub y: f64,
    /// Heading (rad).
    pub psi: f64,
    /// Longitudinal speed (m/s).
    pub v: f64,
    /// Yaw rate (rad/s).
    pub gamma: f64,
    /// Front-wheel angle (rad).
    pub delta_f: f64,
}

impl VehicleState {
    pub fn at_rest_heading_east(v: f64) -> Self {
        Self {
            v: v.max(0.0),
            ..Self::default()
        }
    }
}

/// Transport-delay FIFO plus the disturbance generator.
#[derive(Debug, Clone)]
pub struct ActuatorState {
    delay_buffer: VecDeque<f64>,
    rng: ChaCha8Rng,
    pending_noise: Option<f64>,
    sigma: f64,
}

impl ActuatorState {
    pub fn new(cfg: &PlantConfig) -> Self {
        let n = cfg.delay_steps();
        let mut delay_buffer = VecDeque::with_capacity(n + 1);
        delay_buffer.extend(core::iter::repeat(0.0).take(n));
        Self {
            delay_buffer,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            pending_noise: None,
            sigma: cfg.disturbance_sigma,
        }
    }

    pub fn delay_len(&self) -> usize {
        self.delay_buffer.len()
    }

    fn noise(&mut self) -> f64 {
        match self.pending_noise {
            Some(n) => n,
            None => {
                // One normal draw per step regardless of sigma keeps the stream
                // aligned across configurations.
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let n = self.sigma * z;
                self.pending_noise = Some(n);
                n
            }
        }
    }

    /// Output this step would produce for `command`, without consuming the
    /// step. With a non-zero delay the result does not depend on `command`.
    pub fn preview(&mut self, command: f64, cfg: &PlantConfig) -> f64 {
        let noise = self.noise();
        let base = self.delay_buffer.front().copied().unwrap_or(command);
        cfg.clamp_steering(base + noise)
    }

    /// Advances one period: returns the measured steering-wheel angle (deg)
    /// and queues `command`.
    pub fn step(&mut self, command: f64, cfg: &PlantConfig) -> f64 {
        let noise = self.noise();
        self.pending_noise = None;
        let base = if self.delay_buffer.is_empty() {
            command
        } else {
            self.delay_buffer.push_back(command);
            self.delay_buffer.pop_front().unwrap_or(command)
        };
        cfg.clamp_steering(base + noise)
    }
}

/// One actuator period. See [`ActuatorState::step`].
pub fn actuator_step(state: &mut ActuatorState, command: f64, cfg: &PlantConfig) -> f64 {
    state.step(command, cfg)
}

/// Explicit Euler step of the kinematic bicycle under the measured
/// steering-wheel angle (deg). Speed is held constant.
pub fn vehicle_step(state: &VehicleState, measured_steer: f64, cfg: &PlantConfig) -> VehicleState {
    let delta_f = (measured_steer.to_radians() / cfg.steering_ratio)
        .clamp(-MAX_FRONT_WHEEL_ANGLE, MAX_FRONT_WHEEL_ANGLE);
    let v = state.v.max(0.0);
    let gamma = v * libm::tan(delta_f) / cfg.wheelbase;
    let t = cfg.period;
    VehicleState {
        x: state.x + t * v * libm::cos(state.psi),
        y: state.y + t * v * libm::sin(state.psi),
        psi: state.psi + t * gamma,
        v,
        gamma,
        delta_f,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn cfg(delay: f64, sigma: f64) -> PlantConfig {
        PlantConfig {
            actuator_delay: delay,
            disturbance_sigma: sigma,
            seed: 11,
            ..PlantConfig::default()
        }
    }

    #[test]
    fn impulse_is_delayed_four_samples() {
        let c = cfg(0.2, 0.0);
        let mut act = ActuatorState::new(&c);
        let out: Vec<f64> = (0..12)
            .map(|k| act.step(if k == 3 { 10.0 } else { 0.0 }, &c))
            .collect();
        for (k, o) in out.iter().enumerate() {
            let expect = if k == 7 { 10.0 } else { 0.0 };
            assert_eq!(*o, expect, "step {k}");
        }
    }

    #[test]
    fn zero_delay_is_identity() {
        let c = cfg(0.0, 0.0);
        let mut act = ActuatorState::new(&c);
        for k in 0..50 {
            let u = libm::sin(k as f64 * 0.3) * 40.0;
            assert_eq!(act.step(u, &c), u);
        }
    }

    #[test]
    fn preview_matches_step() {
        let c = cfg(0.2, 1.5);
        let mut a = ActuatorState::new(&c);
        let mut b = ActuatorState::new(&c);
        for k in 0..40 {
            let u = k as f64;
            let p = a.preview(-99.0, &c);
            assert_eq!(p, a.step(u, &c));
            let _ = b.step(u, &c);
        }
        assert_eq!(a.step(1.0, &c), b.step(1.0, &c));
    }

    #[test]
    fn output_is_clamped() {
        let c = cfg(0.0, 0.0);
        let mut act = ActuatorState::new(&c);
        let out = act.step(1.0e4, &c);
        assert!((out - c.steering_limit_deg()).abs() < 1e-12);
    }

    #[test]
    fn rejects_fractional_delay() {
        assert!(matches!(
            cfg(0.07, 0.0).validate(),
            Err(PlantError::BadDelay { .. })
        ));
        let bad = PlantConfig {
            w1: 0.5,
            w2: 0.4,
            ..PlantConfig::default()
        };
        assert!(matches!(bad.validate(), Err(PlantError::BadWeights { .. })));
        assert!(PlantConfig::default().validate().is_ok());
    }

    #[test]
    fn straight_line_motion() {
        let c = cfg(0.0, 0.0);
        let mut s = VehicleState::at_rest_heading_east(30.0 / 3.6);
        for _ in 0..20 {
            s = vehicle_step(&s, 0.0, &c);
        }
        assert!((s.x - 30.0 / 3.6).abs() < 1e-12);
        assert_eq!(s.y, 0.0);
        assert_eq!(s.psi, 0.0);
    }

    #[test]
    fn zero_speed_is_fixed_point() {
        let c = cfg(0.0, 0.0);
        let s0 = VehicleState {
            x: 3.0,
            y: -1.0,
            psi: 0.4,
            ..VehicleState::default()
        };
        let s1 = vehicle_step(&s0, 120.0, &c);
        assert_eq!((s1.x, s1.y, s1.psi, s1.gamma), (s0.x, s0.y, s0.psi, 0.0));
    }

    #[test]
    fn front_wheel_angle_clamped() {
        let c = cfg(0.0, 0.0);
        let s = vehicle_step(&VehicleState::at_rest_heading_east(5.0), 1.0e5, &c);
        assert_eq!(s.delta_f, MAX_FRONT_WHEEL_ANGLE);
        let s = vehicle_step(&s, -1.0e5, &c);
        assert_eq!(s.delta_f, -MAX_FRONT_WHEEL_ANGLE);
    }

    #[test]
    fn constant_steer_traces_bicycle_circle() {
        // Analytic radius L / tan(delta_f); Euler at T = 0.05 s lands within a
        // few centimetres over one lap.
        let c = cfg(0.0, 0.0);
        let delta = 0.1;
        let radius = c.wheelbase / libm::tan(delta);
        let steer = delta.to_degrees() * c.steering_ratio;
        let v = 30.0 / 3.6;
        let mut s = VehicleState::at_rest_heading_east(v);
        let lap_steps = (2.0 * core::f64::consts::PI * radius / v / c.period) as usize;
        let (cx, cy) = (0.0, radius);
        let mut worst: f64 = 0.0;
        for _ in 0..lap_steps {
            s = vehicle_step(&s, steer, &c);
            let r = libm::hypot(s.x - cx, s.y - cy);
            worst = worst.max((r - radius).abs());
        }
        assert!((radius - 28.40).abs() < 0.01);
        assert!(worst < 0.05 * radius, "radius drift {worst}");
    }
}
