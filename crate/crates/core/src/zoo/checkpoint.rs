//! JSON checkpoints. Numbers are written with round-trip precision, so a
//! save/load cycle is bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Dims, ModelInstance, ModelVariant, ZooError};
use crate::autodiff::{ParamSet, Tensor};

pub const CHECKPOINT_MAGIC: &str = "HDDN";
pub const CHECKPOINT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct NamedWeight {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    magic: String,
    version: u64,
    variant: ModelVariant,
    dims: Dims,
    lambda: f64,
    criterion: f64,
    weights: Vec<NamedWeight>,
}

pub fn write_checkpoint(model: &ModelInstance, mut out: impl Write) -> Result<(), ZooError> {
    let doc = Document {
        magic: CHECKPOINT_MAGIC.into(),
        version: CHECKPOINT_VERSION,
        variant: model.variant,
        dims: model.dims.clone(),
        lambda: model.lambda,
        criterion: model.criterion,
        weights: model
            .params()
            .iter()
            .map(|(_, name, t)| NamedWeight {
                name: name.to_string(),
                rows: t.rows(),
                cols: t.cols(),
                data: t.as_slice().to_vec(),
            })
            .collect(),
    };
    serde_json::to_writer(&mut out, &doc).map_err(|e| ZooError::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_checkpoint(mut input: impl Read) -> Result<ModelInstance, ZooError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| ZooError::CorruptPayload(e.to_string()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        // A file that does not even start like a JSON object is not ours.
        if text.trim_start().starts_with('{') {
            ZooError::CorruptPayload(e.to_string())
        } else {
            ZooError::BadMagic
        }
    })?;
    if value.get("magic").and_then(Value::as_str) != Some(CHECKPOINT_MAGIC) {
        return Err(ZooError::BadMagic);
    }
    match value.get("version").and_then(Value::as_u64) {
        Some(CHECKPOINT_VERSION) => {}
        Some(found) => return Err(ZooError::VersionMismatch { found }),
        None => return Err(ZooError::CorruptPayload("missing version".into())),
    }
    let doc: Document =
        serde_json::from_value(value).map_err(|e| ZooError::CorruptPayload(e.to_string()))?;
    if !(doc.criterion > 0.0) {
        return Err(ZooError::CorruptPayload(format!(
            "criterion {}",
            doc.criterion
        )));
    }
    let mut params = ParamSet::new();
    for w in doc.weights {
        let t = Tensor::from_vec(w.rows, w.cols, w.data)
            .map_err(|e| ZooError::CorruptPayload(format!("{}: {e}", w.name)))?;
        params.add(w.name, t);
    }
    ModelInstance::from_parts(doc.variant, doc.dims, doc.lambda, doc.criterion, params)
}

pub fn save_checkpoint(model: &ModelInstance, path: impl AsRef<Path>) -> Result<(), ZooError> {
    let mut buf = Vec::new();
    write_checkpoint(model, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelInstance, ZooError> {
    read_checkpoint(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::build_model;

    fn bytes(m: &ModelInstance) -> Vec<u8> {
        let mut v = Vec::new();
        write_checkpoint(m, &mut v).unwrap();
        v
    }

    #[test]
    fn round_trip_is_exact() {
        for variant in ModelVariant::ALL {
            let m = build_model(variant, &Dims::toy(), 11).unwrap();
            let back = read_checkpoint(bytes(&m).as_slice()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn truncated_is_corrupt() {
        let m = build_model(ModelVariant::Hddn, &Dims::toy(), 0).unwrap();
        let b = bytes(&m);
        let cut = &b[..b.len() / 2];
        assert!(matches!(
            read_checkpoint(cut),
            Err(ZooError::CorruptPayload(_))
        ));
    }

    #[test]
    fn magic_and_version() {
        assert!(matches!(
            read_checkpoint(&b"hello"[..]),
            Err(ZooError::BadMagic)
        ));
        assert!(matches!(
            read_checkpoint(&br#"{"magic":"XXXX","version":1}"#[..]),
            Err(ZooError::BadMagic)
        ));
        let m = build_model(ModelVariant::Hddn, &Dims::toy(), 0).unwrap();
        let text = String::from_utf8(bytes(&m))
            .unwrap()
            .replace("\"version\":1", "\"version\":2");
        assert!(matches!(
            read_checkpoint(text.as_bytes()),
            Err(ZooError::VersionMismatch { found: 2 })
        ));
    }

    #[test]
    fn layout_mismatch_is_corrupt() {
        let m = build_model(ModelVariant::Hddn, &Dims::toy(), 0).unwrap();
        let text = String::from_utf8(bytes(&m))
            .unwrap()
            .replace("\"variant\":\"HDDN\"", "\"variant\":\"CDN\"");
        assert!(matches!(
            read_checkpoint(text.as_bytes()),
            Err(ZooError::CorruptPayload(_))
        ));
    }
}
