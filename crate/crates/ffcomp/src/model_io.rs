//! Versioned JSON model files. Floats are written in shortest round-trip form
//! and parsed back exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use ffcomp_core::tdnn::{Layer, Normalization, TdnnModel};

use crate::csvio::write_text;
use crate::error::{Error, Result};

pub const FORMAT: &str = "ffcomp-tdnn";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    inputs: usize,
    outputs: usize,
    /// Row-major, one row per output unit.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    /// Units per layer, input first.
    architecture: Vec<usize>,
    hidden_activation: String,
    feature_names: Vec<String>,
    taps: usize,
    horizon_steps: usize,
    norm_mean: Vec<f64>,
    norm_std: Vec<f64>,
    seed: u64,
    layers: Vec<LayerFile>,
}

pub fn to_json(model: &TdnnModel) -> String {
    let file = ModelFile {
        format: FORMAT.into(),
        version: VERSION,
        architecture: model.layer_dims().to_vec(),
        hidden_activation: "tansig".into(),
        feature_names: model.feature_names.clone(),
        taps: model.taps,
        horizon_steps: model.horizon_steps,
        norm_mean: model.norm.mean.clone(),
        norm_std: model.norm.std.clone(),
        seed: model.seed,
        layers: model
            .layers
            .iter()
            .map(|l| LayerFile {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: l.weights.clone(),
                biases: l.biases.clone(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serialises");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> std::result::Result<TdnnModel, String> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if file.format != FORMAT {
        return Err(format!("unexpected format `{}`", file.format));
    }
    if file.version != VERSION {
        return Err(format!("unsupported version {}", file.version));
    }
    if file.hidden_activation != "tansig" {
        return Err(format!("unsupported activation `{}`", file.hidden_activation));
    }
    let model = TdnnModel {
        feature_names: file.feature_names,
        taps: file.taps,
        horizon_steps: file.horizon_steps,
        layers: file
            .layers
            .into_iter()
            .map(|l| Layer {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: l.weights,
                biases: l.biases,
            })
            .collect(),
        norm: Normalization {
            mean: file.norm_mean,
            std: file.norm_std,
        },
        seed: file.seed,
    };
    if model.taps == 0 || model.feature_names.is_empty() {
        return Err("model needs at least one feature and one tap".into());
    }
    if file.architecture != model.layer_dims() {
        return Err(format!(
            "architecture {:?} does not match features x taps ({:?})",
            file.architecture,
            model.layer_dims()
        ));
    }
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

pub fn save(path: &Path, model: &TdnnModel) -> Result<()> {
    write_text(path, &to_json(model))
}

pub fn load(path: &Path) -> Result<TdnnModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text).map_err(|m| Error::format(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ffcomp_core::tdnn::DEFAULT_FEATURES;

    fn model() -> TdnnModel {
        let names = DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect();
        let mut m = TdnnModel::new(names, 4, 4, 11).unwrap();
        m.norm = Normalization {
            mean: vec![0.1, -2.0 / 3.0, 30.000000000000004],
            std: vec![1.0 / 7.0, 5e-300, 1e12],
        };
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let back = from_json(&to_json(&m)).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.params().iter().zip(m.params()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_wrong_dimensions() {
        let m = model();
        let text = to_json(&m).replacen("\"taps\": 4", "\"taps\": 5", 1);
        assert!(from_json(&text).unwrap_err().contains("architecture"));
        let mut short = m.clone();
        short.layers[1].biases.pop();
        assert!(from_json(&to_json(&short)).is_err());
    }

    #[test]
    fn rejects_other_versions() {
        let text = to_json(&model()).replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(from_json(&text).unwrap_err().contains("version"));
    }
}
