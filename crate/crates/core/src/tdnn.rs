//! Tapped-delay-line feedforward network that predicts the steering error a
//! fixed horizon ahead.
//!
//! Each input row stacks, for every feature, the current sample and the
//! previous `taps - 1` samples (feature-major order). Two hidden tansig layers
//! of 8 and 6 units feed a linear output unit. Training minimises
//! `(1/2N) * sum (y - y_hat)^2` by mini-batch gradient descent with exact
//! back-propagated gradients. A model with one tap is the plain feedforward
//! baseline.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::log::{Channel, SampleLog};

pub const HIDDEN_LAYERS: [usize; 2] = [8, 6];

/// Default input channels: tracker command, measured steering-wheel angle and
/// longitudinal speed.
pub const DEFAULT_FEATURES: [&str; 3] = ["u_track", "theta_measured", "v"];

/// Channel predicted by the network (`u - theta_measured`).
pub const TARGET_CHANNEL: Channel = Channel::EInstant;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TdnnError {
    #[error("log has no channel named {0:?}")]
    MissingChannel(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("training diverged at epoch {0}")]
    Diverged(usize),
    #[error("models in an ensemble must share features, taps and horizon")]
    ArchMismatch,
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("input has {got} values, model expects {expected}")]
    InputWidth { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
}

/// Hyperbolic-tangent sigmoid `2 / (1 + exp(-2x)) - 1`.
pub fn tansig(x: f64) -> f64 {
    // exp(-2x) overflows for very negative x; the function is odd.
    if x < 0.0 {
        return -tansig(-x);
    }
    if x > 20.0 {
        return 1.0 - 2.0 * libm::exp(-2.0 * x);
    }
    2.0 / (1.0 + libm::exp(-2.0 * x)) - 1.0
}

/// Per-feature z-score statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(features: usize) -> Self {
        Self {
            mean: vec![0.0; features],
            std: vec![1.0; features],
        }
    }

    pub fn normalize(&self, feature: usize, x: f64) -> f64 {
        (x - self.mean[feature]) / self.std[feature]
    }

    pub fn denormalize(&self, feature: usize, z: f64) -> f64 {
        z * self.std[feature] + self.mean[feature]
    }

    /// Normalises a feature-major tapped row in place.
    pub fn apply(&self, row: &mut [f64], taps: usize) {
        for (i, v) in row.iter_mut().enumerate() {
            *v = self.normalize(i / taps, *v);
        }
    }
}

/// Fully connected layer, weights row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (o, dst) in out.iter_mut().enumerate() {
            let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *dst = self.biases[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdnnModel {
    pub feature_names: Vec<String>,
    pub taps: usize,
    pub horizon_steps: usize,
    /// Input -> 8 -> 6 -> 1.
    pub layers: Vec<Layer>,
    pub norm: Normalization,
    pub seed: u64,
}

impl TdnnModel {
    /// Randomly initialised model: weights and biases uniform in
    /// `(-0.5, 0.5) / sqrt(fan_in)`. Normalisation starts as the identity.
    pub fn new(feature_names: Vec<String>, taps: usize, horizon_steps: usize, seed: u64) -> Result<Self, TdnnError> {
        if feature_names.is_empty() {
            return Err(TdnnError::InvalidModel("no features"));
        }
        if taps == 0 {
            return Err(TdnnError::InvalidModel("taps must be at least 1"));
        }
        if horizon_steps == 0 {
            return Err(TdnnError::InvalidModel("horizon must be at least 1 step"));
        }
        let dims = Self::dims_for(feature_names.len() * taps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Uniform::new(-0.5, 0.5).expect("valid range");
        let layers = dims
            .windows(2)
            .map(|d| {
                let scale = 1.0 / libm::sqrt(d[0] as f64);
                let mut l = Layer::zeros(d[0], d[1]);
                l.weights.iter_mut().for_each(|w| *w = unit.sample(&mut rng) * scale);
                l.biases.iter_mut().for_each(|b| *b = unit.sample(&mut rng) * scale);
                l
            })
            .collect();
        Ok(Self {
            norm: Normalization::identity(feature_names.len()),
            feature_names,
            taps,
            horizon_steps,
            layers,
            seed,
        })
    }

    fn dims_for(input: usize) -> [usize; 4] {
        [input, HIDDEN_LAYERS[0], HIDDEN_LAYERS[1], 1]
    }

    pub fn layer_dims(&self) -> [usize; 4] {
        Self::dims_for(self.input_len())
    }

    pub fn input_len(&self) -> usize {
        self.feature_names.len() * self.taps
    }

    /// Checks layer shapes and normalisation against the declared features.
    pub fn validate(&self) -> Result<(), TdnnError> {
        let dims = self.layer_dims();
        if self.taps == 0 || self.horizon_steps == 0 {
            return Err(TdnnError::InvalidModel("taps and horizon must be at least 1"));
        }
        if self.layers.len() != 3 {
            return Err(TdnnError::InvalidModel("expected three weight layers"));
        }
        for (l, d) in self.layers.iter().zip(dims.windows(2)) {
            if l.inputs != d[0] || l.outputs != d[1] || l.weights.len() != d[0] * d[1] || l.biases.len() != d[1] {
                return Err(TdnnError::InvalidModel("layer shape does not match architecture"));
            }
        }
        let nf = self.feature_names.len();
        if self.norm.mean.len() != nf || self.norm.std.len() != nf {
            return Err(TdnnError::InvalidModel("normalisation does not match features"));
        }
        if self.norm.std.iter().any(|s| !(*s > 0.0)) {
            return Err(TdnnError::InvalidModel("normalisation std must be positive"));
        }
        Ok(())
    }

    pub fn same_architecture(&self, other: &TdnnModel) -> bool {
        self.feature_names == other.feature_names
            && self.taps == other.taps
            && self.horizon_steps == other.horizon_steps
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut rest = params;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.weights.len());
            l.weights.copy_from_slice(w);
            let (b, r) = r.split_at(l.biases.len());
            l.biases.copy_from_slice(b);
            rest = r;
        }
    }

    /// Network output for an already normalised input row.
    pub fn forward(&self, input: &[f64]) -> f64 {
        let mut a = input.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; l.outputs];
            l.affine(&a, &mut z);
            if i != last {
                z.iter_mut().for_each(|v| *v = tansig(*v));
            }
            a = z;
        }
        a[0]
    }

    /// Normalises a raw tapped row and runs the network.
    pub fn predict(&self, raw: &[f64]) -> Result<f64, TdnnError> {
        if raw.len() != self.input_len() {
            return Err(TdnnError::InputWidth {
                expected: self.input_len(),
                got: raw.len(),
            });
        }
        let mut row = raw.to_vec();
        self.norm.apply(&mut row, self.taps);
        Ok(self.forward(&row))
    }

    /// Loss `(1/2n) sum (y - y_hat)^2` over `rows` and its gradient, flattened
    /// like [`TdnnModel::params`].
    pub fn loss_and_gradient(&self, data: &TappedDataset, rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grad: Vec<Layer> = self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect();
        let n = rows.len().max(1) as f64;
        let mut loss = 0.0;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        for &r in rows {
            acts.clear();
            acts.push(data.row(r).to_vec());
            for (i, l) in self.layers.iter().enumerate() {
                let mut z = vec![0.0; l.outputs];
                l.affine(&acts[i], &mut z);
                if i + 1 != self.layers.len() {
                    z.iter_mut().for_each(|v| *v = tansig(*v));
                }
                acts.push(z);
            }
            let y_hat = acts[self.layers.len()][0];
            let err = y_hat - data.targets[r];
            loss += 0.5 * err * err;

            let mut delta = vec![err / n];
            for i in (0..self.layers.len()).rev() {
                let l = &self.layers[i];
                let g = &mut grad[i];
                let input = &acts[i];
                for o in 0..l.outputs {
                    g.biases[o] += delta[o];
                    let row = &mut g.weights[o * l.inputs..(o + 1) * l.inputs];
                    for (gw, x) in row.iter_mut().zip(input) {
                        *gw += delta[o] * x;
                    }
                }
                if i == 0 {
                    break;
                }
                // input of layer i is a tansig output: derivative 1 - a^2
                let mut next = vec![0.0; l.inputs];
                for (j, nj) in next.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (o, d) in delta.iter().enumerate() {
                        s += l.weights[o * l.inputs + j] * d;
                    }
                    *nj = s * (1.0 - input[j] * input[j]);
                }
                delta = next;
            }
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for g in grad {
            flat.extend(g.weights);
            flat.extend(g.biases);
        }
        (loss / n, flat)
    }

    pub fn loss(&self, data: &TappedDataset, rows: &[usize]) -> f64 {
        let n = rows.len().max(1) as f64;
        rows.iter()
            .map(|&r| {
                let e = self.forward(data.row(r)) - data.targets[r];
                0.5 * e * e
            })
            .sum::<f64>()
            / n
    }
}

/// Tapped input rows and targets, row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TappedDataset {
    pub width: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl TappedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.width..(i + 1) * self.width]
    }

    /// Appends another dataset of the same width.
    pub fn extend(&mut self, other: &TappedDataset) {
        if self.width == 0 {
            self.width = other.width;
        }
        assert_eq!(self.width, other.width, "dataset width mismatch");
        self.inputs.extend_from_slice(&other.inputs);
        self.targets.extend_from_slice(&other.targets);
    }

    /// First `n` rows and the remainder.
    pub fn split_at(&self, n: usize) -> (TappedDataset, TappedDataset) {
        let n = n.min(self.len());
        (
            TappedDataset {
                width: self.width,
                inputs: self.inputs[..n * self.width].to_vec(),
                targets: self.targets[..n].to_vec(),
            },
            TappedDataset {
                width: self.width,
                inputs: self.inputs[n * self.width..].to_vec(),
                targets: self.targets[n..].to_vec(),
            },
        )
    }

    pub fn normalized(&self, norm: &Normalization, taps: usize) -> TappedDataset {
        let mut out = self.clone();
        for row in out.inputs.chunks_exact_mut(self.width) {
            norm.apply(row, taps);
        }
        out
    }
}

fn feature_columns<'a>(log: &'a SampleLog, names: &[String]) -> Result<Vec<&'a [f64]>, TdnnError> {
    names
        .iter()
        .map(|n| log.channel_by_name(n).ok_or_else(|| TdnnError::MissingChannel(n.clone())))
        .collect()
}

/// Fills `out` with the feature-major tapped row ending at sample `t`.
pub fn tapped_row(columns: &[&[f64]], taps: usize, t: usize, out: &mut Vec<f64>) {
    out.clear();
    for col in columns {
        for k in 0..taps {
            out.push(col[t - k]);
        }
    }
}

/// Unnormalised tapped rows with targets `e(t + horizon)`.
pub fn build_raw_dataset(log: &SampleLog, feature_names: &[String], taps: usize, horizon: usize) -> Result<TappedDataset, TdnnError> {
    let columns = feature_columns(log, feature_names)?;
    let needed = taps + horizon;
    if log.len() < needed {
        return Err(TdnnError::InsufficientData {
            needed,
            got: log.len(),
        });
    }
    let target = log.channel(TARGET_CHANNEL);
    let width = feature_names.len() * taps;
    let n = log.len() - (taps - 1) - horizon;
    let mut data = TappedDataset {
        width,
        inputs: Vec::with_capacity(n * width),
        targets: Vec::with_capacity(n),
    };
    let mut row = Vec::with_capacity(width);
    for t in (taps - 1)..(taps - 1 + n) {
        tapped_row(&columns, taps, t, &mut row);
        data.inputs.extend_from_slice(&row);
        data.targets.push(target[t + horizon]);
    }
    Ok(data)
}

/// Normalised tapped rows for `model` from a single log.
pub fn build_dataset(log: &SampleLog, model: &TdnnModel) -> Result<TappedDataset, TdnnError> {
    let raw = build_raw_dataset(log, &model.feature_names, model.taps, model.horizon_steps)?;
    Ok(raw.normalized(&model.norm, model.taps))
}

/// Mean and std of each feature over the current-sample column of raw rows.
pub fn fit_normalization(raw: &TappedDataset, feature_count: usize, taps: usize) -> Result<Normalization, TdnnError> {
    if raw.is_empty() || raw.width != feature_count * taps {
        return Err(TdnnError::InsufficientData { needed: 1, got: raw.len() });
    }
    let nf = feature_count;
    let n = raw.len() as f64;
    let mut mean = vec![0.0; nf];
    let mut var = vec![0.0; nf];
    for i in 0..raw.len() {
        let row = raw.row(i);
        for f in 0..nf {
            mean[f] += row[f * taps];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    for i in 0..raw.len() {
        let row = raw.row(i);
        for f in 0..nf {
            let d = row[f * taps] - mean[f];
            var[f] += d * d;
        }
    }
    // A constant feature (e.g. speed within one constant-speed run) is only
    // centred.
    let std: Vec<f64> = var
        .iter()
        .map(|v| libm::sqrt(v / n))
        .map(|s| if s > 1e-12 { s } else { 1.0 })
        .collect();
    Ok(Normalization { mean, std })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Trailing fraction of rows held out for checkpoint selection.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 500,
            batch_size: 32,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TdnnError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TdnnError::InvalidConfig("learning rate must be positive"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(TdnnError::InvalidConfig("validation fraction must be in (0, 1)"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(TdnnError::InvalidConfig("batch size and epochs must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingReport {
    /// Training-split loss after each epoch; entry 0 is before training.
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    pub best_epoch: usize,
}

impl TrainingReport {
    pub fn best_validation_loss(&self) -> f64 {
        self.validation_loss[self.best_epoch]
    }
}

pub const MIN_TRAINING_ROWS: usize = 50;

/// Mini-batch gradient descent on normalised `data`. Returns the parameters
/// with the lowest validation loss seen.
pub fn train(model: &TdnnModel, data: &TappedDataset, cfg: &TrainingConfig) -> Result<(TdnnModel, TrainingReport), TdnnError> {
    cfg.validate()?;
    if data.len() < MIN_TRAINING_ROWS {
        return Err(TdnnError::InsufficientData {
            needed: MIN_TRAINING_ROWS,
            got: data.len(),
        });
    }
    if data.width != model.input_len() {
        return Err(TdnnError::InputWidth {
            expected: model.input_len(),
            got: data.width,
        });
    }
    let n_val = ((data.len() as f64 * cfg.validation_fraction) as usize).clamp(1, data.len() - 1);
    let n_train = data.len() - n_val;
    let mut order: Vec<usize> = (0..n_train).collect();
    let train_rows = order.clone();
    let val_rows: Vec<usize> = (n_train..data.len()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = model.clone();
    let mut params = current.params();
    let mut best = current.clone();
    let mut report = TrainingReport {
        train_loss: vec![current.loss(data, &train_rows)],
        validation_loss: vec![current.loss(data, &val_rows)],
        best_epoch: 0,
    };

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (_, grad) = current.loss_and_gradient(data, batch);
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
            current.set_params(&params);
        }
        let tl = current.loss(data, &train_rows);
        let vl = current.loss(data, &val_rows);
        if !tl.is_finite() || !vl.is_finite() {
            return Err(TdnnError::Diverged(epoch));
        }
        report.train_loss.push(tl);
        report.validation_loss.push(vl);
        if vl < report.validation_loss[report.best_epoch] {
            report.best_epoch = epoch;
            best = current.clone();
        }
    }
    Ok((best, report))
}

fn check_ensemble(models: &[TdnnModel]) -> Result<&TdnnModel, TdnnError> {
    let first = models.first().ok_or(TdnnError::EmptyEnsemble)?;
    if models.iter().any(|m| !m.same_architecture(first)) {
        return Err(TdnnError::ArchMismatch);
    }
    Ok(first)
}

/// Mean of the members' predictions for a raw tapped row.
pub fn ensemble_predict(models: &[TdnnModel], raw: &[f64]) -> Result<f64, TdnnError> {
    check_ensemble(models)?;
    let mut sum = 0.0;
    for m in models {
        sum += m.predict(raw)?;
    }
    Ok(sum / models.len() as f64)
}

/// Validated group of models sharing one architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    models: Vec<TdnnModel>,
}

impl Ensemble {
    pub fn new(models: Vec<TdnnModel>) -> Result<Self, TdnnError> {
        check_ensemble(&models)?;
        for m in &models {
            m.validate()?;
        }
        Ok(Self { models })
    }

    pub fn models(&self) -> &[TdnnModel] {
        &self.models
    }

    pub fn taps(&self) -> usize {
        self.models[0].taps
    }

    pub fn horizon_steps(&self) -> usize {
        self.models[0].horizon_steps
    }

    pub fn feature_names(&self) -> &[String] {
        &self.models[0].feature_names
    }

    pub fn predict(&self, raw: &[f64]) -> Result<f64, TdnnError> {
        ensemble_predict(&self.models, raw)
    }

    /// Predictions for every row of a raw dataset.
    pub fn predict_all(&self, raw: &TappedDataset) -> Result<Vec<f64>, TdnnError> {
        (0..raw.len()).map(|i| self.predict(raw.row(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names() -> Vec<String> {
        DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tansig_values() {
        assert_eq!(tansig(0.0), 0.0);
        assert!((tansig(1.0) - 0.761594).abs() < 1e-6);
        assert!((tansig(1.0) - libm::tanh(1.0)).abs() < 1e-15);
        assert_eq!(tansig(400.0), 1.0);
        assert_eq!(tansig(-400.0), -1.0);
        for x in [0.1, 0.7, 3.0, 19.9, 20.1, 35.0] {
            assert_eq!(tansig(-x), -tansig(x));
            assert!((tansig(x) - libm::tanh(x)).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn zero_and_constant_networks() {
        let mut m = TdnnModel::new(names(), 4, 4, 1).unwrap();
        let zeros = vec![0.0; m.param_count()];
        m.set_params(&zeros);
        assert_eq!(m.forward(&[0.3; 12]), 0.0);
        m.layers[2].biases[0] = 2.5;
        assert_eq!(m.forward(&[0.3; 12]), 2.5);
        assert_eq!(m.forward(&[-7.0; 12]), 2.5);
    }

    #[test]
    fn architecture_shape() {
        let m = TdnnModel::new(names(), 6, 4, 3).unwrap();
        assert_eq!(m.layer_dims(), [18, 8, 6, 1]);
        assert_eq!(m.param_count(), 18 * 8 + 8 + 8 * 6 + 6 + 6 + 1);
        assert!(m.validate().is_ok());
        assert!(TdnnModel::new(names(), 0, 4, 3).is_err());
        assert!(TdnnModel::new(names(), 2, 0, 3).is_err());
    }

    #[test]
    fn init_bounds() {
        let m = TdnnModel::new(names(), 6, 4, 3).unwrap();
        for l in &m.layers {
            let bound = 0.5 / libm::sqrt(l.inputs as f64);
            assert!(l.weights.iter().chain(&l.biases).all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn normalization_round_trip() {
        let n = Normalization {
            mean: vec![3.0, -1.5],
            std: vec![0.25, 7.0],
        };
        for x in [-10.0, 0.0, 1.0e-3, 4.2e2] {
            for f in 0..2 {
                assert!((n.denormalize(f, n.normalize(f, x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn ensemble_errors() {
        let a = TdnnModel::new(names(), 3, 4, 1).unwrap();
        let b = TdnnModel::new(names(), 4, 4, 1).unwrap();
        assert_eq!(ensemble_predict(&[], &[0.0; 9]), Err(TdnnError::EmptyEnsemble));
        assert_eq!(ensemble_predict(&[a.clone(), b], &[0.0; 9]), Err(TdnnError::ArchMismatch));
        let single = ensemble_predict(core::slice::from_ref(&a), &[0.1; 9]).unwrap();
        assert_eq!(single, a.predict(&[0.1; 9]).unwrap());
    }

    #[test]
    fn training_rejects_small_data() {
        let m = TdnnModel::new(names(), 1, 1, 1).unwrap();
        let d = TappedDataset {
            width: 3,
            inputs: vec![0.0; 30],
            targets: vec![0.0; 10],
        };
        assert!(matches!(
            train(&m, &d, &TrainingConfig::default()),
            Err(TdnnError::InsufficientData { .. })
        ));
    }
}
