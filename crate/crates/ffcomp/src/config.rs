//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ffcomp_core::compensator::CompensatorConfig;
use ffcomp_core::log::Channel;
use ffcomp_core::pca::PcaOptions;
use ffcomp_core::plant::PlantConfig;
use ffcomp_core::tdnn::{TrainingConfig, DEFAULT_FEATURES};
use ffcomp_core::tracking::{double_lane_change_path, slalom_path, ReferencePath, TrackerConfig};

use crate::csvio;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    DoubleLaneChange,
    Slalom {
        amplitude: f64,
        wavelength: f64,
        length: f64,
    },
    /// `s,x,y` or `x,y` rows; relative paths resolve against the config file.
    Csv { file: PathBuf },
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec::DoubleLaneChange
    }
}

impl PathSpec {
    pub fn build(&self, base: &Path) -> Result<ReferencePath> {
        match self {
            PathSpec::DoubleLaneChange => Ok(double_lane_change_path()),
            PathSpec::Slalom {
                amplitude,
                wavelength,
                length,
            } => {
                if !(*wavelength > 0.0 && *length > 0.0 && amplitude.is_finite()) {
                    return Err(Error::Config("slalom needs positive wavelength and length".into()));
                }
                Ok(slalom_path(*amplitude, *wavelength, *length))
            }
            PathSpec::Csv { file } => csvio::read_path(&base.join(file)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub path: PathSpec,
    pub speed_kmh: f64,
    /// Preview distance at `speed_kmh` (m).
    pub lookahead: f64,
    /// Hard time limit (s); defaults to three traversal times.
    pub max_duration: Option<f64>,
    /// Set the disturbance std from an uncompensated calibration run.
    pub calibrate_disturbance: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            path: PathSpec::DoubleLaneChange,
            speed_kmh: 30.0,
            lookahead: 4.0,
            max_duration: None,
            calibrate_disturbance: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompensatorSection {
    pub enabled: bool,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Yaw-rate threshold (deg/s).
    pub w0: f64,
    /// Output cap (deg).
    pub u1_limit: f64,
}

impl Default for CompensatorSection {
    fn default() -> Self {
        let c = CompensatorConfig::default();
        Self {
            enabled: true,
            kp: c.kp,
            ki: c.ki,
            kd: c.kd,
            w0: c.w0,
            u1_limit: c.u1_limit,
        }
    }
}

impl CompensatorSection {
    pub fn to_config(&self, period: f64) -> CompensatorConfig {
        CompensatorConfig {
            kp: self.kp,
            ki: self.ki,
            kd: self.kd,
            w0: self.w0,
            period,
            u1_limit: self.u1_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorSection {
    /// Model files forming the ensemble. Relative paths resolve against the
    /// config file.
    pub models: Vec<PathBuf>,
}

/// Uncompensated runs whose logs train the predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectionSection {
    /// Keep adding runs until the dataset has at least this many rows.
    pub target_samples: usize,
    pub speeds_kmh: Vec<f64>,
    pub slalom_amplitudes: Vec<f64>,
    pub slalom_wavelengths: Vec<f64>,
    pub slalom_length: f64,
    /// Every n-th run uses the double lane change instead of a slalom.
    pub lane_change_every: usize,
}

impl Default for CollectionSection {
    fn default() -> Self {
        Self {
            target_samples: 6000,
            speeds_kmh: vec![20.0, 25.0, 30.0, 35.0, 40.0],
            slalom_amplitudes: vec![2.0, 3.5, 2.5, 3.0],
            slalom_wavelengths: vec![40.0, 60.0, 50.0, 70.0, 45.0],
            slalom_length: 300.0,
            lane_change_every: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Trailing fraction of the training rows used for checkpoint selection.
    pub validation_fraction: f64,
    pub taps: usize,
    /// Horizon in steps; derived from the identified delay when absent.
    pub horizon_steps: Option<usize>,
    /// Input channels; the PCA selection is used when absent.
    pub features: Option<Vec<String>>,
    pub restarts: usize,
    /// Trailing fraction of collected rows kept out of training for CC/CE.
    pub holdout_fraction: f64,
    /// Training-set size of the reduced-data comparison.
    pub small_samples: usize,
}

impl TrainingSection {
    pub fn optimizer(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            validation_fraction: self.validation_fraction,
            seed,
        }
    }
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            batch_size: t.batch_size,
            validation_fraction: t.validation_fraction,
            taps: 6,
            horizon_steps: None,
            features: None,
            restarts: 10,
            holdout_fraction: 0.2,
            small_samples: 425,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaSection {
    #[serde(flatten)]
    pub options: PcaOptions,
    pub channels: Vec<String>,
}

impl Default for PcaSection {
    fn default() -> Self {
        Self {
            options: PcaOptions::default(),
            channels: [
                "theta_measured",
                "u_track",
                "v",
                "gamma_measured",
                "gamma_desired",
                "psi",
                "lateral_error",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelaySection {
    pub grid_max: f64,
    pub grid_step: f64,
}

impl Default for DelaySection {
    fn default() -> Self {
        Self {
            grid_max: 0.40,
            grid_step: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scenario: ScenarioSection,
    pub plant: PlantConfig,
    pub compensator: CompensatorSection,
    pub predictor: PredictorSection,
    pub collection: CollectionSection,
    pub training: TrainingSection,
    pub pca: PcaSection,
    pub delay: DelaySection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            scenario: ScenarioSection::default(),
            plant: PlantConfig::default(),
            compensator: CompensatorSection::default(),
            predictor: PredictorSection::default(),
            collection: CollectionSection::default(),
            training: TrainingSection::default(),
            pca: PcaSection::default(),
            delay: DelaySection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. The file must set `seed` unless `seed` overrides
    /// it.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        match seed {
            Some(s) => cfg.seed = s,
            None => {
                let table: toml::Table = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
                if !table.contains_key("seed") {
                    return Err(Error::Config(format!("{}: `seed` is required", path.display())));
                }
            }
        }
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for m in &cfg.predictor.models {
            let p = cfg.base_dir.join(m);
            if !p.is_file() {
                return Err(Error::Config(format!("predictor model {} does not exist", p.display())));
            }
        }
        if let PathSpec::Csv { file } = &cfg.scenario.path {
            let p = cfg.base_dir.join(file);
            if !p.is_file() {
                return Err(Error::Config(format!("path file {} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.compensator
            .to_config(self.plant.period)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.training
            .optimizer(0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.scenario.speed_kmh > 0.36) {
            return Err(Error::Config("speed_kmh must exceed 0.36 km/h".into()));
        }
        if !(self.scenario.lookahead > 0.0) {
            return Err(Error::Config("lookahead must be positive".into()));
        }
        if self.training.taps == 0 || self.training.restarts == 0 {
            return Err(Error::Config("taps and restarts must be at least 1".into()));
        }
        if self.training.horizon_steps == Some(0) {
            return Err(Error::Config("horizon_steps must be at least 1".into()));
        }
        if !(self.training.holdout_fraction > 0.0 && self.training.holdout_fraction < 1.0) {
            return Err(Error::Config("holdout_fraction must be in (0, 1)".into()));
        }
        if self.collection.speeds_kmh.is_empty()
            || self.collection.speeds_kmh.iter().any(|v| !(*v > 0.36))
            || self.collection.slalom_amplitudes.is_empty()
            || self.collection.slalom_wavelengths.iter().any(|w| !(*w > 0.0))
            || self.collection.slalom_wavelengths.is_empty()
        {
            return Err(Error::Config("collection needs positive speeds, amplitudes and wavelengths".into()));
        }
        if self.pca.channels.is_empty() {
            return Err(Error::Config("pca.channels is empty".into()));
        }
        let features = self.training.features.iter().flatten();
        for name in self.pca.channels.iter().chain(features) {
            if Channel::from_name(name).is_none() {
                return Err(Error::Config(format!("unknown channel `{name}`")));
            }
        }
        Ok(())
    }

    /// Plant config with the experiment seed applied (`plant.seed` is
    /// ignored).
    pub fn plant(&self) -> PlantConfig {
        PlantConfig {
            seed: self.seed,
            ..self.plant
        }
    }

    pub fn tracker(&self, path: ReferencePath, speed_kmh: f64) -> TrackerConfig {
        TrackerConfig {
            // keep the preview time constant across speeds
            lookahead: self.scenario.lookahead * speed_kmh / self.scenario.speed_kmh,
            speed: ffcomp_core::kmh_to_mps(speed_kmh),
            path,
        }
    }

    pub fn default_features() -> Vec<String> {
        DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 3\n[plant]\nactuator_delay = 0.1\n[scenario.path]\nkind = \"slalom\"\namplitude = 2.0\nwavelength = 50.0\nlength = 150.0\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.plant.actuator_delay, 0.1);
        assert_eq!(cfg.plant.wheelbase, 2.85);
        assert!(matches!(cfg.scenario.path, PathSpec::Slalom { .. }));
    }

    #[test]
    fn load_requires_seed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[plant]\nactuator_delay = 0.1\n").unwrap();
        assert!(matches!(ExperimentConfig::load(&p, None), Err(Error::Config(_))));
        assert_eq!(ExperimentConfig::load(&p, Some(5)).unwrap().seed, 5);
        std::fs::write(&p, "seed = 9\n").unwrap();
        let cfg = ExperimentConfig::load(&p, None).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.base_dir, dir.path());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(
            ExperimentConfig::from_toml("[pca]\nchannels = [\"nope\"]\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml("[plant]\nactuator_delay = 0.07\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml("[compensator]\nw0 = 0.0\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(ExperimentConfig::from_toml("bogus = 1\n"), Err(Error::Config(_))));
    }
}
