//! Binary checkpoint container.
//!
//! ```text
//! magic   8 bytes  "GAPINNCK"
//! version u32 LE
//! hlen    u32 LE   length of the JSON header
//! header  hlen bytes (spec, layout, seed, epoch, parameter count)
//! payload n × f64 LE
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::{LayerShape, MlpSpec, ParamVector};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"GAPINNCK";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub spec: MlpSpec,
    pub params: ParamVector,
    pub seed: u64,
    pub epoch: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    spec: MlpSpec,
    layout: Vec<LayerShape>,
    seed: u64,
    epoch: usize,
    n_params: usize,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            spec: self.spec.clone(),
            layout: self.params.layout.clone(),
            seed: self.seed,
            epoch: self.epoch,
            n_params: self.params.len(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(16 + json.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &self.params.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Parse { line: 0, msg: format!("checkpoint: {m}") };
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("missing magic header"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let hlen = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = &bytes[16..];
        if body.len() < hlen {
            return Err(bad("truncated header"));
        }
        let header: Header =
            serde_json::from_slice(&body[..hlen]).map_err(|e| bad(&e.to_string()))?;
        let payload = &body[hlen..];
        if payload.len() != 8 * header.n_params {
            return Err(bad("payload length does not match the parameter count"));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let params = ParamVector { layout: header.layout, values };
        params.check_against(&header.spec)?;
        Ok(Self { spec: header.spec, params, seed: header.seed, epoch: header.epoch })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}
