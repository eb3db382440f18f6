//! Evaluation quantities: RMSE, delay identification by shifted RMSE,
//! correlation coefficient, coefficient of efficiency, lateral tracking error
//! and the steering oscillation index.

use alloc::vec::Vec;

use crate::log::{Channel, SampleLog};
use crate::tracking::ReferencePath;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("series needs more than {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series is empty")]
    Empty,
    #[error("invalid delay grid")]
    BadGrid,
}

fn same_len(a: &[f64], b: &[f64]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    same_len(a, b)?;
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(ss / a.len() as f64))
}

/// Root mean square of a single series.
pub fn rms(a: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    libm::sqrt(a.iter().map(|x| x * x).sum::<f64>() / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGrid {
    /// Largest shift tried (s).
    pub max: f64,
    pub step: f64,
}

impl Default for DelayGrid {
    fn default() -> Self {
        Self { max: 0.40, step: 0.02 }
    }
}

impl DelayGrid {
    pub fn shifts(&self) -> Vec<f64> {
        let n = libm::round(self.max / self.step) as usize;
        (0..=n).map(|i| i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayEstimate {
    /// Shift with the smallest RMSE (s).
    pub delay: f64,
    /// `(shift, rmse)` over the grid.
    pub curve: Vec<(f64, f64)>,
}

impl DelayEstimate {
    pub fn rmse_at(&self, shift: f64) -> Option<f64> {
        self.curve
            .iter()
            .find(|(s, _)| (s - shift).abs() < 1e-9)
            .map(|&(_, r)| r)
    }

    pub fn min_rmse(&self) -> f64 {
        self.rmse_at(self.delay).unwrap_or(f64::NAN)
    }
}

/// RMSE between `measured` and `command` translated right by `shift`
/// samples. Fractional shifts interpolate the command linearly. Only the
/// overlap is compared.
pub fn shifted_rmse(command: &[f64], measured: &[f64], shift: f64) -> f64 {
    let whole = libm::floor(shift) as usize;
    let frac = shift - whole as f64;
    let start = libm::ceil(shift) as usize;
    let mut ss = 0.0;
    let mut count = 0usize;
    for i in start..measured.len() {
        let j = i - whole;
        let c = if frac == 0.0 {
            command[j]
        } else {
            (1.0 - frac) * command[j] + frac * command[j - 1]
        };
        ss += (measured[i] - c) * (measured[i] - c);
        count += 1;
    }
    libm::sqrt(ss / count as f64)
}

/// Scans translations of `command` over `grid` and returns the one that best
/// explains `measured`. Ties go to the smaller shift.
pub fn identify_delay(
    command: &[f64],
    measured: &[f64],
    period: f64,
    grid: DelayGrid,
) -> Result<DelayEstimate, MetricsError> {
    same_len(command, measured)?;
    if !(grid.step > 0.0 && grid.max >= 0.0 && period > 0.0) {
        return Err(MetricsError::BadGrid);
    }
    let needed = libm::ceil(grid.max / period) as usize + 10;
    if command.len() <= needed {
        return Err(MetricsError::SeriesTooShort {
            needed,
            got: command.len(),
        });
    }
    let mut curve = Vec::new();
    let mut best = (0.0, f64::INFINITY);
    for dt in grid.shifts() {
        let mut samples = dt / period;
        let rounded = libm::round(samples);
        if (samples - rounded).abs() < 1e-9 {
            samples = rounded;
        }
        let r = shifted_rmse(command, measured, samples);
        if r < best.1 {
            best = (dt, r);
        }
        curve.push((dt, r));
    }
    Ok(DelayEstimate { delay: best.0, curve })
}

fn centered_sums(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (sab, saa, sbb)
}

/// Pearson correlation between measured and predicted error series.
pub fn correlation_coefficient(measured: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    same_len(measured, predicted)?;
    let (sab, saa, sbb) = centered_sums(measured, predicted);
    if saa == 0.0 || sbb == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    Ok((sab / (libm::sqrt(saa) * libm::sqrt(sbb))).clamp(-1.0, 1.0))
}

/// Nash-Sutcliffe coefficient of efficiency.
pub fn coefficient_of_efficiency(measured: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    same_len(measured, predicted)?;
    let m = mean(measured);
    let denom: f64 = measured.iter().map(|x| (x - m) * (x - m)).sum();
    if denom == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    let num: f64 = measured
        .iter()
        .zip(predicted)
        .map(|(g, p)| (p - g) * (p - g))
        .sum();
    Ok(1.0 - num / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LateralError {
    /// Signed offset per point, positive left of the path (m).
    pub series: Vec<f64>,
    pub max_abs: f64,
    /// Indices whose foot point fell on a path extension.
    pub extrapolated: Vec<usize>,
}

/// Signed perpendicular distance of each position to the path.
pub fn lateral_error(trajectory: &[(f64, f64)], path: &ReferencePath) -> Result<LateralError, MetricsError> {
    if trajectory.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut series = Vec::with_capacity(trajectory.len());
    let mut extrapolated = Vec::new();
    for (i, &(x, y)) in trajectory.iter().enumerate() {
        let p = path.project(x, y);
        if p.extrapolated {
            extrapolated.push(i);
        }
        series.push(p.offset);
    }
    let max_abs = series.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(LateralError {
        series,
        max_abs,
        extrapolated,
    })
}

/// Mean absolute first difference (units per step).
pub fn oscillation_index(steer: &[f64]) -> Result<f64, MetricsError> {
    if steer.len() < 2 {
        return Err(MetricsError::SeriesTooShort {
            needed: 1,
            got: steer.len(),
        });
    }
    let total: f64 = steer.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(total / (steer.len() - 1) as f64)
}

/// Relative reduction of `after` versus `before`, in percent.
pub fn improvement_pct(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        return 0.0;
    }
    100.0 * (before - after) / before
}

/// Evaluation of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub steps: usize,
    pub duration: f64,
    /// RMSE between plant input `u` and measured steering-wheel angle (deg).
    pub rmse: f64,
    /// Shifted-RMSE delay estimate (s), when the log is long enough.
    pub delay_estimate: Option<f64>,
    /// Prediction accuracy of `e_hat(t)` against `e_instant(t + horizon)`,
    /// over the steps where the predictor ran.
    pub cc: Option<f64>,
    pub ce: Option<f64>,
    /// Largest absolute lateral offset from the path (m).
    pub max_lateral_error: f64,
    /// Oscillation index of the commanded steering-wheel angle `u` (deg/step).
    pub oscillation: f64,
    /// Oscillation index of the measured steering-wheel angle (deg/step).
    pub oscillation_measured: f64,
}

impl MetricsReport {
    /// `horizon` is the predictor horizon in steps, if one ran.
    pub fn from_log(log: &SampleLog, horizon: Option<usize>, grid: DelayGrid) -> Result<Self, MetricsError> {
        if log.len() < 2 {
            return Err(MetricsError::SeriesTooShort {
                needed: 1,
                got: log.len(),
            });
        }
        let u = log.channel(Channel::U);
        let theta = log.channel(Channel::ThetaMeasured);
        let delay_estimate = identify_delay(u, theta, log.period(), grid).ok().map(|d| d.delay);
        let (cc, ce) = match horizon {
            Some(h) => {
                let (measured, predicted) = prediction_pairs(log, h);
                (
                    correlation_coefficient(&measured, &predicted).ok(),
                    coefficient_of_efficiency(&measured, &predicted).ok(),
                )
            }
            None => (None, None),
        };
        Ok(Self {
            steps: log.len(),
            duration: log.duration(),
            rmse: rmse(u, theta)?,
            delay_estimate,
            cc,
            ce,
            max_lateral_error: log
                .channel(Channel::LateralError)
                .iter()
                .fold(0.0f64, |m, e| m.max(e.abs())),
            oscillation: oscillation_index(u)?,
            oscillation_measured: oscillation_index(theta)?,
        })
    }
}

/// `(e_instant(t + h), e_hat(t))` pairs over steps where a prediction was made
/// (non-zero `e_hat`).
pub fn prediction_pairs(log: &SampleLog, horizon: usize) -> (Vec<f64>, Vec<f64>) {
    let e = log.channel(Channel::EInstant);
    let e_hat = log.channel(Channel::EHat);
    let mut measured = Vec::new();
    let mut predicted = Vec::new();
    for t in 0..log.len().saturating_sub(horizon) {
        if e_hat[t] != 0.0 {
            measured.push(e[t + horizon]);
            predicted.push(e_hat[t]);
        }
    }
    (measured, predicted)
}

/// Compensated run against its uncompensated baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline: MetricsReport,
    pub compensated: MetricsReport,
    pub max_lateral_error_improvement_pct: f64,
    pub oscillation_improvement_pct: f64,
    pub oscillation_measured_improvement_pct: f64,
    pub rmse_improvement_pct: f64,
}

impl Comparison {
    pub fn new(baseline: MetricsReport, compensated: MetricsReport) -> Self {
        Self {
            max_lateral_error_improvement_pct: improvement_pct(baseline.max_lateral_error, compensated.max_lateral_error),
            oscillation_improvement_pct: improvement_pct(baseline.oscillation, compensated.oscillation),
            oscillation_measured_improvement_pct: improvement_pct(
                baseline.oscillation_measured,
                compensated.oscillation_measured,
            ),
            rmse_improvement_pct: improvement_pct(baseline.rmse, compensated.rmse),
            baseline,
            compensated,
        }
    }
}
