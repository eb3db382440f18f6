//! Switching PI/PD feedforward compensator.
//!
//! The predicted steering error `e_hat` goes through a PI law while the
//! desired yaw rate is inside the straight-driving threshold and through a PD
//! law otherwise:
//!
//! ```text
//! |gamma| <= w0:  u1 = kp * e + ki * I,   I += T * e   (I reset when e changes sign)
//! |gamma| >  w0:  u1 = kp * e + kd * (e - e_prev) / T
//! ```
//!
//! The discrete operators are the backward-Euler integrator `Tz/(z-1)` and the
//! backward difference `(z-1)/(Tz)`. The output is limited to `u1_limit`; the
//! integrator is not advanced on a step whose output saturates.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CompensatorError {
    #[error("predicted error or yaw rate is not finite")]
    NonFiniteInput,
    #[error("invalid compensator config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CompensatorConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Yaw-rate threshold separating straight from curved driving (deg/s).
    pub w0: f64,
    /// Sampling period (s).
    pub period: f64,
    /// Output magnitude cap (deg).
    pub u1_limit: f64,
}

impl Default for CompensatorConfig {
    fn default() -> Self {
        Self {
            kp: 0.6,
            ki: 0.1,
            kd: 0.0,
            w0: 2.0,
            period: 0.05,
            u1_limit: 90.0,
        }
    }
}

impl CompensatorConfig {
    pub fn validate(&self) -> Result<(), CompensatorError> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(CompensatorError::InvalidConfig("period must be positive"));
        }
        if !(self.w0 > 0.0) {
            return Err(CompensatorError::InvalidConfig("w0 must be positive"));
        }
        if !(self.kp >= 0.0 && self.ki >= 0.0 && self.kd >= 0.0) {
            return Err(CompensatorError::InvalidConfig("gains must be non-negative"));
        }
        if !(self.u1_limit > 0.0) {
            return Err(CompensatorError::InvalidConfig("u1_limit must be positive"));
        }
        Ok(())
    }

    /// Mode for a desired yaw rate (deg/s). The boundary belongs to PI.
    pub fn mode_for(&self, gamma: f64) -> Mode {
        if gamma.abs() <= self.w0 {
            Mode::Pi
        } else {
            Mode::Pd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Pi,
    Pd,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompensatorState {
    /// Accumulated error (deg*s).
    pub integrator: f64,
    pub prev_error: f64,
    pub prev_error_sign: i8,
    pub mode: Mode,
}

impl CompensatorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// One control period. `gamma` is the desired yaw rate in deg/s.
    pub fn compensate(&mut self, e_hat: f64, gamma: f64, cfg: &CompensatorConfig) -> Result<f64, CompensatorError> {
        if !e_hat.is_finite() || !gamma.is_finite() {
            return Err(CompensatorError::NonFiniteInput);
        }
        let mode = cfg.mode_for(gamma);
        let s = sign(e_hat);
        let raw = match mode {
            Mode::Pi => {
                if s != 0 && self.prev_error_sign != 0 && s != self.prev_error_sign {
                    self.integrator = 0.0;
                }
                let advanced = self.integrator + cfg.period * e_hat;
                let raw = cfg.kp * e_hat + cfg.ki * advanced;
                if raw.abs() <= cfg.u1_limit {
                    self.integrator = advanced;
                }
                raw
            }
            Mode::Pd => cfg.kp * e_hat + cfg.kd * (e_hat - self.prev_error) / cfg.period,
        };
        self.prev_error = e_hat;
        self.prev_error_sign = s;
        self.mode = mode;
        Ok(raw.clamp(-cfg.u1_limit, cfg.u1_limit))
    }
}

/// Adds the compensator output to the tracker command and applies the
/// steering-wheel limit.
pub fn compose_command(u_track: f64, u1: f64, steering_limit: f64) -> f64 {
    (u_track + u1).clamp(-steering_limit, steering_limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(kp: f64, ki: f64, kd: f64) -> CompensatorConfig {
        CompensatorConfig {
            kp,
            ki,
            kd,
            ..CompensatorConfig::default()
        }
    }

    #[test]
    fn zero_error_zero_output() {
        let cfg = CompensatorConfig::default();
        let mut st = CompensatorState::new();
        for k in 0..50 {
            let g = if k % 2 == 0 { 0.0 } else { 10.0 };
            assert_eq!(st.compensate(0.0, g, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn pi_backward_euler() {
        let cfg = gains(0.5, 0.1, 0.0);
        let mut st = CompensatorState::new();
        let a = st.compensate(1.0, 0.0, &cfg).unwrap();
        let b = st.compensate(1.0, 0.0, &cfg).unwrap();
        assert!((a - 0.505).abs() < 1e-12);
        assert!((b - 0.510).abs() < 1e-12);
    }

    #[test]
    fn pi_sign_change_resets_integrator() {
        let cfg = gains(0.5, 0.1, 0.0);
        let mut st = CompensatorState::new();
        st.compensate(0.5, 0.0, &cfg).unwrap();
        let u = st.compensate(-0.2, 0.0, &cfg).unwrap();
        assert!((u + 0.101).abs() < 1e-12);
    }

    #[test]
    fn pd_backward_difference() {
        let cfg = gains(0.5, 0.0, 0.02);
        let mut st = CompensatorState::new();
        assert_eq!(st.compensate(0.0, 5.0, &cfg).unwrap(), 0.0);
        let u = st.compensate(1.0, 5.0, &cfg).unwrap();
        assert!((u - 0.9).abs() < 1e-12);
        assert_eq!(st.mode, Mode::Pd);
    }

    #[test]
    fn boundary_is_pi() {
        let cfg = CompensatorConfig::default();
        assert_eq!(cfg.mode_for(2.0), Mode::Pi);
        assert_eq!(cfg.mode_for(-2.0), Mode::Pi);
        assert_eq!(cfg.mode_for(2.0000001), Mode::Pd);
    }

    #[test]
    fn pd_freezes_integrator() {
        let cfg = gains(0.5, 0.1, 0.02);
        let mut st = CompensatorState::new();
        st.compensate(1.0, 0.0, &cfg).unwrap();
        let i = st.integrator;
        st.compensate(3.0, 9.0, &cfg).unwrap();
        assert_eq!(st.integrator, i);
    }

    #[test]
    fn saturation_stops_integration() {
        let cfg = CompensatorConfig {
            u1_limit: 1.0,
            ..gains(0.5, 10.0, 0.0)
        };
        let mut st = CompensatorState::new();
        for _ in 0..20 {
            let u = st.compensate(1.9, 0.0, &cfg).unwrap();
            assert!(u <= 1.0);
        }
        // 0.5*1.9 = 0.95; one step of integration (10*0.05*1.9 = 0.95) saturates
        assert_eq!(st.integrator, 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        let mut st = CompensatorState::new();
        let cfg = CompensatorConfig::default();
        assert!(st.compensate(f64::NAN, 0.0, &cfg).is_err());
        assert!(st.compensate(1.0, f64::INFINITY, &cfg).is_err());
    }

    #[test]
    fn compose() {
        assert_eq!(compose_command(42.0, 0.0, 360.0), 42.0);
        assert_eq!(compose_command(360.0, 5.0, 360.0), 360.0);
        assert_eq!(compose_command(100.0, -12.5, 360.0), 87.5);
    }
}
