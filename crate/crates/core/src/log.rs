//! Per-step record of a closed-loop run.

use alloc::vec::Vec;

/// Logged channels, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    T,
    X,
    Y,
    Psi,
    V,
    GammaDesired,
    GammaMeasured,
    UTrack,
    U1,
    U,
    ThetaMeasured,
    EInstant,
    EHat,
    LateralError,
}

impl Channel {
    pub const ALL: [Channel; 14] = [
        Channel::T,
        Channel::X,
        Channel::Y,
        Channel::Psi,
        Channel::V,
        Channel::GammaDesired,
        Channel::GammaMeasured,
        Channel::UTrack,
        Channel::U1,
        Channel::U,
        Channel::ThetaMeasured,
        Channel::EInstant,
        Channel::EHat,
        Channel::LateralError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::T => "t",
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Psi => "psi",
            Channel::V => "v",
            Channel::GammaDesired => "gamma_desired",
            Channel::GammaMeasured => "gamma_measured",
            Channel::UTrack => "u_track",
            Channel::U1 => "u1",
            Channel::U => "u",
            Channel::ThetaMeasured => "theta_measured",
            Channel::EInstant => "e_instant",
            Channel::EHat => "e_hat",
            Channel::LateralError => "lateral_error",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Channel::T => "s",
            Channel::X | Channel::Y | Channel::LateralError => "m",
            Channel::Psi => "rad",
            Channel::V => "km/h",
            Channel::GammaDesired | Channel::GammaMeasured => "deg/s",
            Channel::UTrack
            | Channel::U1
            | Channel::U
            | Channel::ThetaMeasured
            | Channel::EInstant
            | Channel::EHat => "deg",
        }
    }

    pub fn from_name(name: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One row of a [`SampleLog`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub gamma_desired: f64,
    pub gamma_measured: f64,
    pub u_track: f64,
    pub u1: f64,
    pub u: f64,
    pub theta_measured: f64,
    pub e_instant: f64,
    pub e_hat: f64,
    pub lateral_error: f64,
}

impl Sample {
    pub fn to_array(&self) -> [f64; 14] {
        [
            self.t,
            self.x,
            self.y,
            self.psi,
            self.v,
            self.gamma_desired,
            self.gamma_measured,
            self.u_track,
            self.u1,
            self.u,
            self.theta_measured,
            self.e_instant,
            self.e_hat,
            self.lateral_error,
        ]
    }

    pub fn from_array(a: [f64; 14]) -> Self {
        Self {
            t: a[0],
            x: a[1],
            y: a[2],
            psi: a[3],
            v: a[4],
            gamma_desired: a[5],
            gamma_measured: a[6],
            u_track: a[7],
            u1: a[8],
            u: a[9],
            theta_measured: a[10],
            e_instant: a[11],
            e_hat: a[12],
            lateral_error: a[13],
        }
    }
}

/// Column store of samples on a uniform time base.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLog {
    period: f64,
    columns: [Vec<f64>; 14],
}

impl SampleLog {
    pub fn new(period: f64) -> Self {
        Self {
            period,
            columns: Default::default(),
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Simulated duration covered by the log (s).
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.period
    }

    pub fn push(&mut self, sample: Sample) {
        for (col, v) in self.columns.iter_mut().zip(sample.to_array()) {
            col.push(v);
        }
    }

    pub fn channel(&self, c: Channel) -> &[f64] {
        &self.columns[c.index()]
    }

    pub fn channel_by_name(&self, name: &str) -> Option<&[f64]> {
        Channel::from_name(name).map(|c| self.channel(c))
    }

    pub fn row(&self, i: usize) -> Sample {
        let mut a = [0.0; 14];
        for (dst, col) in a.iter_mut().zip(&self.columns) {
            *dst = col[i];
        }
        Sample::from_array(a)
    }

    pub fn rows(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(|i| self.row(i))
    }
}

impl SampleLog {
    /// Removes the last row.
    pub fn pop(&mut self) -> Option<Sample> {
        if self.is_empty() {
            return None;
        }
        let mut a = [0.0; 14];
        for (dst, col) in a.iter_mut().zip(self.columns.iter_mut()) {
            *dst = col.pop().unwrap_or_default();
        }
        Some(Sample::from_array(a))
    }

    /// Rows `start..end` as a new log.
    pub fn slice(&self, start: usize, end: usize) -> SampleLog {
        let mut out = SampleLog::new(self.period);
        for (dst, src) in out.columns.iter_mut().zip(&self.columns) {
            dst.extend_from_slice(&src[start..end]);
        }
        out
    }
}
