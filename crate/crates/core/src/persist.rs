//! Model files.
//!
//! A model is stored as one JSON document:
//!
//! ```text
//! {
//!   "format": "spars-model",
//!   "format_version": 1,
//!   "lag": L, "hidden": m, "block_count": N,
//!   "normalization": { "scale": .., "offset": .. },
//!   "ar": { "coefficients": {shape, data}, "delta": .., "fit_residual": .. },
//!   "blocks": [ { "w_ir": {shape, data}, ..., "b_a": .. }, ... ],
//!   "mix": {shape, data},
//!   "fit_report": { ... }
//! }
//! ```
//!
//! Every array is `{"shape": [rows, cols], "data": [...]}` in row-major
//! order. Floats are written with shortest round-trip formatting, so loading a
//! saved model reproduces every parameter bit for bit. The document carries no
//! timestamps: equal models give byte-identical files.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gru::{GruParams, Normalization};
use crate::linear::ArCoefficients;
use crate::model::{FitReport, SparsModel};

pub const FORMAT_NAME: &str = "spars-model";
pub const FORMAT_VERSION: u32 = 1;

/// Row-major array with an explicit shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Array {
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl Array {
    fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            shape: [m.nrows(), m.ncols()],
            data: m.transpose().as_slice().to_vec(),
        }
    }

    fn from_vector(v: &[f64]) -> Self {
        Self {
            shape: [v.len(), 1],
            data: v.to_vec(),
        }
    }

    fn to_matrix(&self, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        if self.shape != [rows, cols] || self.data.len() != rows * cols {
            return Err(Error::Malformed(format!(
                "`{name}` has shape {:?} with {} entries, expected [{rows}, {cols}]",
                self.shape,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(rows, cols, &self.data))
    }

    fn to_vector(&self, name: &str, len: usize) -> Result<DVector<f64>> {
        let m = self.to_matrix(name, len, 1)?;
        Ok(DVector::from_column_slice(m.as_slice()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArRecord {
    coefficients: Array,
    delta: f64,
    fit_residual: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRecord {
    w_ir: Array,
    w_iz: Array,
    w_in: Array,
    w_hr: Array,
    w_hz: Array,
    w_hn: Array,
    b_r: Array,
    b_z: Array,
    b_n: Array,
    w_a: Array,
    b_a: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormRecord {
    scale: f64,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    format_version: u32,
    lag: usize,
    hidden: usize,
    block_count: usize,
    normalization: NormRecord,
    ar: ArRecord,
    blocks: Vec<BlockRecord>,
    mix: Array,
    fit_report: FitReport,
}

fn block_record(p: &GruParams) -> BlockRecord {
    BlockRecord {
        w_ir: Array::from_matrix(&p.w_ir),
        w_iz: Array::from_matrix(&p.w_iz),
        w_in: Array::from_matrix(&p.w_in),
        w_hr: Array::from_matrix(&p.w_hr),
        w_hz: Array::from_matrix(&p.w_hz),
        w_hn: Array::from_matrix(&p.w_hn),
        b_r: Array::from_vector(p.b_r.as_slice()),
        b_z: Array::from_vector(p.b_z.as_slice()),
        b_n: Array::from_vector(p.b_n.as_slice()),
        w_a: Array::from_vector(p.w_a.as_slice()),
        b_a: p.b_a,
    }
}

fn block_params(r: &BlockRecord, m: usize, l: usize) -> Result<GruParams> {
    Ok(GruParams {
        w_ir: r.w_ir.to_matrix("w_ir", m, l)?,
        w_iz: r.w_iz.to_matrix("w_iz", m, l)?,
        w_in: r.w_in.to_matrix("w_in", m, l)?,
        w_hr: r.w_hr.to_matrix("w_hr", m, m)?,
        w_hz: r.w_hz.to_matrix("w_hz", m, m)?,
        w_hn: r.w_hn.to_matrix("w_hn", m, m)?,
        b_r: r.b_r.to_vector("b_r", m)?,
        b_z: r.b_z.to_vector("b_z", m)?,
        b_n: r.b_n.to_vector("b_n", m)?,
        w_a: r.w_a.to_vector("w_a", m)?,
        b_a: r.b_a,
    })
}

/// Serialises a model to its JSON text.
pub fn to_json(model: &SparsModel) -> String {
    let file = ModelFile {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION,
        lag: model.lag(),
        hidden: model.hidden(),
        block_count: model.gru_blocks.len(),
        normalization: NormRecord {
            scale: model.normalization.scale,
            offset: model.normalization.offset,
        },
        ar: ArRecord {
            coefficients: Array::from_vector(model.ar.coefficients()),
            delta: model.ar.delta(),
            fit_residual: model.ar.fit_residual(),
        },
        blocks: model.gru_blocks.iter().map(block_record).collect(),
        mix: Array::from_vector(&model.mix),
        fit_report: model.fit_report.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model records always serialise");
    s.push('\n');
    s
}

/// Parses a model from JSON text.
pub fn from_json(text: &str) -> Result<SparsModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(FORMAT_NAME) => {}
        _ => return Err(Error::Malformed(format!("missing `format: \"{FORMAT_NAME}\"`"))),
    }
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Malformed("missing integer `format_version`".into()))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(Error::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::Malformed(e.to_string()))?;

    let (l, m) = (file.lag, file.hidden);
    if l == 0 {
        return Err(Error::Malformed("lag must be >= 1".into()));
    }
    if file.blocks.len() != file.block_count {
        return Err(Error::Malformed(format!(
            "block_count = {} but {} blocks stored",
            file.block_count,
            file.blocks.len()
        )));
    }
    let c = file.ar.coefficients.to_vector("ar.coefficients", l)?;
    let ar = ArCoefficients::new(c.as_slice().to_vec())
        .map_err(|e| Error::Malformed(e.to_string()))?
        .with_fit(file.ar.delta, file.ar.fit_residual);
    let blocks = file
        .blocks
        .iter()
        .map(|b| block_params(b, m, l))
        .collect::<Result<Vec<_>>>()?;
    let mix = file.mix.to_vector("mix", file.block_count + 1)?;
    let norm = Normalization {
        scale: file.normalization.scale,
        offset: file.normalization.offset,
    };
    let mut model = SparsModel::new(ar, blocks, mix.as_slice().to_vec(), norm)
        .map_err(|e| Error::Malformed(e.to_string()))?;
    model.fit_report = file.fit_report;
    Ok(model)
}

pub fn save_model(model: &SparsModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SparsModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
