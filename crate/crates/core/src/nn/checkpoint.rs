//! JSON checkpoints holding the network configuration, the scaler fitted at
//! training time, and every parameter.

use serde::{Deserialize, Serialize};

use super::{DenseParams, LstmLayerParams, LstmNetwork, NetworkConfig, ParamSet};
use crate::error::{Error, Result};
use crate::ingest::ScalerParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    config: NetworkConfig,
    scaler: ScalerParams,
    layers: Vec<LstmLayerParams>,
    dense: DenseParams,
}

pub fn save_checkpoint(net: &LstmNetwork, scaler: &ScalerParams) -> Result<Vec<u8>> {
    let doc = Checkpoint {
        format_version: FORMAT_VERSION,
        config: net.config.clone(),
        scaler: *scaler,
        layers: net.params.layers.clone(),
        dense: net.params.dense.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<(LstmNetwork, ScalerParams)> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CorruptCheckpoint("missing format_version".into()))?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version as u32,
            expected: FORMAT_VERSION,
        });
    }
    let doc: Checkpoint =
        serde_json::from_value(value).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    doc.scaler
        .validate()
        .map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    let params = ParamSet {
        layers: doc.layers,
        dense: doc.dense,
    };
    let net = LstmNetwork::from_params(doc.config, params)
        .map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    Ok((net, doc.scaler))
}
