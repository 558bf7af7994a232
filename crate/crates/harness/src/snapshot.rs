//! Binary field snapshots.
//!
//! Layout: a little-endian `u64` header length, the JSON header, then the
//! payload of little-endian `f64` physical values, one `n²` block per field
//! in header order, each block row-major with `x₂` fastest.

use std::fs;
use std::path::Path;

use nsm_core::{Field3, Grid, MhdState, NsmState};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const FORMAT_VERSION: u32 = 1;

const NSM_FIELDS: [&str; 9] = ["u1", "u2", "u3", "b1", "b2", "b3", "e1", "e2", "e3"];
const MHD_FIELDS: [&str; 6] = ["u1", "u2", "u3", "b1", "b2", "b3"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub format_version: u32,
    pub n: usize,
    pub t: f64,
    /// Absent for MHD states.
    pub eps: Option<f64>,
    pub system: String,
    pub fields: Vec<String>,
    pub byte_order: String,
    /// CRC-32 of the payload bytes.
    pub checksum: u32,
    pub payload_len: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub data: Vec<f64>,
}

/// Min, max and RMS of one stored field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStats {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub rms: f64,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Snapshot(msg.into())
}

fn encode(data: &[f64]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

impl Snapshot {
    fn build(system: &str, t: f64, eps: Option<f64>, names: &[&str], parts: &[&Field3]) -> Self {
        let n = parts[0].grid().n();
        let mut data = Vec::with_capacity(names.len() * n * n);
        for f in parts {
            for c in f.to_physical() {
                data.extend_from_slice(&c);
            }
        }
        let bytes = encode(&data);
        Self {
            header: SnapshotHeader {
                format_version: FORMAT_VERSION,
                n,
                t,
                eps,
                system: system.into(),
                fields: names.iter().map(|s| s.to_string()).collect(),
                byte_order: "little".into(),
                checksum: crc32fast::hash(&bytes),
                payload_len: bytes.len() as u64,
            },
            data,
        }
    }

    pub fn from_nsm(s: &NsmState) -> Self {
        Self::build("nsm", s.t, Some(s.eps), &NSM_FIELDS, &[&s.u, &s.b, &s.e])
    }

    pub fn from_mhd(s: &MhdState) -> Self {
        Self::build("mhd", s.t, None, &MHD_FIELDS, &[&s.u, &s.b])
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header)?;
        let mut out = Vec::with_capacity(8 + header.len() + 8 * self.data.len());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&encode(&self.data));
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(bad("file too short for a header length"));
        }
        let hlen = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let hend = 8usize
            .checked_add(usize::try_from(hlen).map_err(|_| bad("header length overflows"))?)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| bad(format!("header length {hlen} exceeds file size")))?;
        let header: SnapshotHeader = serde_json::from_slice(&bytes[8..hend])
            .map_err(|e| bad(format!("invalid header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {}", header.format_version)));
        }
        if header.byte_order != "little" {
            return Err(bad(format!("unsupported byte order `{}`", header.byte_order)));
        }
        let payload = &bytes[hend..];
        let expected = header.fields.len() as u64 * (header.n * header.n) as u64 * 8;
        if header.payload_len != expected || payload.len() as u64 != expected {
            return Err(bad(format!(
                "payload has {} bytes, header says {}, fields need {expected}",
                payload.len(),
                header.payload_len
            )));
        }
        let sum = crc32fast::hash(payload);
        if sum != header.checksum {
            return Err(bad(format!(
                "checksum mismatch: stored {:08x}, computed {sum:08x}",
                header.checksum
            )));
        }
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { header, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Physical values of one stored field.
    pub fn field(&self, name: &str) -> Option<&[f64]> {
        let nn = self.header.n * self.header.n;
        let i = self.header.fields.iter().position(|f| f == name)?;
        Some(&self.data[i * nn..(i + 1) * nn])
    }

    /// The vector field stored as `{prefix}1`, `{prefix}2`, `{prefix}3`.
    pub fn vector(&self, prefix: &str) -> Result<Field3> {
        let g = Grid::new(self.header.n).map_err(|e| bad(e.to_string()))?;
        let get = |i: usize| {
            self.field(&format!("{prefix}{i}"))
                .map(<[f64]>::to_vec)
                .ok_or_else(|| bad(format!("missing field {prefix}{i}")))
        };
        Ok(Field3::from_physical(&g, &[get(1)?, get(2)?, get(3)?])?)
    }

    /// Reloads an NSM snapshot with viscosity `nu`.
    pub fn to_nsm_state(&self, nu: f64) -> Result<NsmState> {
        let eps = self.header.eps.ok_or_else(|| bad("snapshot has no eps"))?;
        let mut s = NsmState::with_viscosity(self.vector("u")?, self.vector("b")?, self.vector("e")?, eps, nu)?;
        s.t = self.header.t;
        Ok(s)
    }

    /// Reloads an MHD snapshot.
    pub fn to_mhd_state(&self, nu: f64, mu: f64) -> Result<MhdState> {
        let mut s = MhdState::new(self.vector("u")?, self.vector("b")?, nu, mu)?;
        s.t = self.header.t;
        Ok(s)
    }

    pub fn stats(&self) -> Vec<FieldStats> {
        self.header
            .fields
            .iter()
            .map(|name| {
                let v = self.field(name).unwrap_or(&[]);
                let (min, max) = v
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                let rms = (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt();
                FieldStats {
                    name: name.clone(),
                    min,
                    max,
                    rms,
                }
            })
            .collect()
    }
}
