//! Trained GP-PHS models stored as TOML: hyperparameters, conditioning data and the
//! settings of the error bound. Floats are written in shortest round-trip form, so a saved
//! model reloads to the same posterior bit for bit.

use std::path::Path;

use gpphs_core::gp::{BoundScale, GpHyperparams, GpPhsModel, StructureEstimate};
use gpphs_core::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: u32,
    hyper: HyperSection,
    bound: BoundSection,
    data: DataSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperSection {
    signal_std: f64,
    lengthscales: Vec<f64>,
    noise_variance: Vec<f64>,
    structure: StructureSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum StructureSection {
    /// Unconstrained (pre-softplus) parameters.
    Microactuator { damping_raw: f64, resistance_raw: f64 },
    /// Row-major matrices.
    Fixed {
        interconnection: Vec<Vec<f64>>,
        dissipation: Vec<Vec<f64>>,
        input: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundSection {
    beta: Vec<f64>,
    risk: f64,
    scale: String,
    reference: Vec<f64>,
    jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataSection {
    states: Vec<Vec<f64>>,
    /// Stacked `xdot - G u` per sample.
    targets: Vec<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err("ragged matrix".into());
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn document(model: &GpPhsModel) -> ModelDocument {
    let h = model.hyper();
    let structure = match &h.structure {
        StructureEstimate::Microactuator {
            damping_raw,
            resistance_raw,
        } => StructureSection::Microactuator {
            damping_raw: *damping_raw,
            resistance_raw: *resistance_raw,
        },
        StructureEstimate::Fixed { j, r, g } => StructureSection::Fixed {
            interconnection: rows(j),
            dissipation: rows(r),
            input: rows(g),
        },
    };
    ModelDocument {
        format: FORMAT_VERSION,
        hyper: HyperSection {
            signal_std: h.signal_std,
            lengthscales: h.lengthscales.iter().copied().collect(),
            noise_variance: h.noise_var.iter().copied().collect(),
            structure,
        },
        bound: BoundSection {
            beta: model.beta().iter().copied().collect(),
            risk: model.risk(),
            scale: match model.bound_scale() {
                BoundScale::Variance => "variance",
                BoundScale::StdDev => "stddev",
            }
            .into(),
            reference: model.reference().iter().copied().collect(),
            jitter: model.base_jitter(),
        },
        data: DataSection {
            states: model.train_states().iter().map(|x| x.iter().copied().collect()).collect(),
            targets: model.targets().iter().copied().collect(),
        },
    }
}

pub fn model_to_string(model: &GpPhsModel) -> String {
    toml::to_string(&document(model)).expect("model serializes")
}

pub fn model_from_str(text: &str) -> Result<GpPhsModel, String> {
    let doc: ModelDocument = toml::from_str(text).map_err(|e| e.to_string())?;
    if doc.format != FORMAT_VERSION {
        return Err(format!("unsupported model format {}", doc.format));
    }
    let structure = match doc.hyper.structure {
        StructureSection::Microactuator {
            damping_raw,
            resistance_raw,
        } => StructureEstimate::Microactuator {
            damping_raw,
            resistance_raw,
        },
        StructureSection::Fixed {
            interconnection,
            dissipation,
            input,
        } => StructureEstimate::fixed(matrix(&interconnection)?, matrix(&dissipation)?, matrix(&input)?).map_err(|e| e.to_string())?,
    };
    let hyper = GpHyperparams::new(
        doc.hyper.signal_std,
        DVector::from_vec(doc.hyper.lengthscales),
        DVector::from_vec(doc.hyper.noise_variance),
        structure,
    )
    .map_err(|e| e.to_string())?;
    let scale = match doc.bound.scale.as_str() {
        "variance" => BoundScale::Variance,
        "stddev" => BoundScale::StdDev,
        s => return Err(format!("unknown bound scale `{s}`")),
    };
    let states = doc.data.states.into_iter().map(DVector::from_vec).collect();
    GpPhsModel::new(hyper, states, DVector::from_vec(doc.data.targets), doc.bound.jitter)
        .and_then(|m| m.with_beta(DVector::from_vec(doc.bound.beta)))
        .and_then(|m| m.with_risk(doc.bound.risk))
        .and_then(|m| m.with_reference(DVector::from_vec(doc.bound.reference)))
        .map(|m| m.with_bound_scale(scale))
        .map_err(|e| e.to_string())
}

pub fn save_model(path: &Path, model: &GpPhsModel) -> Result<(), LabError> {
    std::fs::write(path, model_to_string(model)).map_err(|e| LabError::artifact(path, e))
}

pub fn load_model(path: &Path) -> Result<GpPhsModel, LabError> {
    if !path.is_file() {
        return Err(LabError::artifact(path, "missing artifact"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| LabError::artifact(path, e))?;
    model_from_str(&text).map_err(|e| LabError::artifact(path, e))
}
