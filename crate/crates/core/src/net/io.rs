//! Weights file: a text header followed by little-endian `f32` tensors.
//!
//! ```text
//! STACKGUIDE-WEIGHTS 1
//! config {"input_size":256,...}
//! stage adaptive
//! tensors 42
//! stem.weight 16x24
//! ...
//! data
//! <f32 LE values, tensors in header order>
//! ```

use std::fs;
use std::path::Path;

use super::model::{ModelWeights, TrainingStage};
use super::scalar::Real;
use super::NetConfig;
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &str = "STACKGUIDE-WEIGHTS 1";

pub fn encode_weights<T: Real>(w: &ModelWeights<T>) -> Vec<u8> {
    let mut header = String::new();
    header.push_str(WEIGHTS_MAGIC);
    header.push('\n');
    header.push_str("config ");
    header.push_str(&serde_json::to_string(&w.config).expect("config serializes"));
    header.push('\n');
    header.push_str(&format!("stage {}\n", w.stage.as_str()));
    header.push_str(&format!("tensors {}\n", w.tensors().len()));
    for t in w.tensors() {
        let dims: Vec<String> = t.shape.iter().map(|d| d.to_string()).collect();
        header.push_str(&format!("{} {}\n", t.name, dims.join("x")));
    }
    header.push_str("data\n");
    let mut out = header.into_bytes();
    out.reserve(w.data.len() * 4);
    for v in &w.data {
        out.extend_from_slice(&(v.f64() as f32).to_le_bytes());
    }
    out
}

pub fn decode_weights(bytes: &[u8]) -> Result<ModelWeights<f32>> {
    let bad = |m: &str| Error::WeightsFormat(m.to_string());
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("header is not UTF-8"))?;
        pos += end + 1;
        Ok(line)
    };
    if next_line()? != WEIGHTS_MAGIC {
        return Err(bad("bad magic"));
    }
    let config: NetConfig = next_line()?
        .strip_prefix("config ")
        .ok_or_else(|| bad("missing config"))
        .and_then(|j| serde_json::from_str(j).map_err(|e| Error::WeightsFormat(format!("config: {e}"))))?;
    let stage = next_line()?
        .strip_prefix("stage ")
        .and_then(TrainingStage::parse)
        .ok_or_else(|| bad("missing stage"))?;
    let count: usize = next_line()?
        .strip_prefix("tensors ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("missing tensor count"))?;
    let mut declared = Vec::with_capacity(count);
    for _ in 0..count {
        declared.push(next_line()?.to_string());
    }
    if next_line()? != "data" {
        return Err(bad("missing data marker"));
    }
    let body = &bytes[pos..];
    if body.len() % 4 != 0 {
        return Err(bad("data length is not a multiple of 4"));
    }
    let data: Vec<f32> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let w = ModelWeights::from_parts(config, stage, data)?;
    if declared.len() != w.tensors().len() {
        return Err(bad("tensor count does not match the configuration"));
    }
    for (line, t) in declared.iter().zip(w.tensors()) {
        let dims: Vec<String> = t.shape.iter().map(|d| d.to_string()).collect();
        if *line != format!("{} {}", t.name, dims.join("x")) {
            return Err(Error::WeightsFormat(format!("tensor {line:?} does not match {}", t.name)));
        }
    }
    if !w.all_finite() {
        return Err(bad("non-finite parameter"));
    }
    Ok(w)
}

pub fn write_weights<T: Real>(path: &Path, w: &ModelWeights<T>) -> Result<()> {
    fs::write(path, encode_weights(w)).map_err(|e| Error::write_failure(path, e))
}

pub fn read_weights(path: &Path) -> Result<ModelWeights<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::WeightsFormat(format!("{}: {e}", path.display())))?;
    decode_weights(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_exact_round_trip() {
        let w = ModelWeights::<f32>::init(&NetConfig::reduced(), 11).unwrap();
        let bytes = encode_weights(&w);
        let back = decode_weights(&bytes).unwrap();
        assert_eq!(back, w);
        assert_eq!(encode_weights(&back), bytes);
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let w = ModelWeights::<f32>::init(&NetConfig::reduced(), 11).unwrap();
        let bytes = encode_weights(&w);
        assert!(decode_weights(&bytes[..bytes.len() - 3]).is_err());
        assert!(decode_weights(&bytes[1..]).is_err());
        let mut cfg = NetConfig::reduced();
        cfg.stage_widths = vec![4, 16];
        let other = ModelWeights::<f32>::init(&cfg, 1).unwrap();
        let mut spliced = encode_weights(&other);
        let split = spliced.windows(5).position(|w| w == b"data\n").unwrap() + 5;
        spliced.truncate(split);
        spliced.extend_from_slice(&bytes[bytes.windows(5).position(|w| w == b"data\n").unwrap() + 5..]);
        assert!(decode_weights(&spliced).is_err());
    }
}
