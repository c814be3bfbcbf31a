//! Binary bundle container.
//!
//! ```text
//! magic            8 bytes   "DPSKBNDL"
//! metadata_len     u32 LE
//! metadata         UTF-8 JSON (format_version, d, k, epsilon, delta, sigma,
//!                  matrix_seed, row_sensitivity, attribute_names, calibration)
//! projection       d * k f64 LE, row-major
//! sketch_count     u64 LE
//! sketches         repeated: id_len u32 LE, id UTF-8, k f64 LE
//! ```
//!
//! The noise seed is never written.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sketch::{Calibration, NoiseParams, PerturbedSketch, PrivacyBudget, ProjectionMatrix, PublishedBundle};

pub const BUNDLE_MAGIC: &[u8; 8] = b"DPSKBNDL";
pub const BUNDLE_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMetadata {
    pub format_version: u64,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma: f64,
    pub matrix_seed: u64,
    pub row_sensitivity: f64,
    pub attribute_names: Vec<String>,
    pub calibration: Calibration,
}

impl BundleMetadata {
    pub fn of(bundle: &PublishedBundle) -> Self {
        Self {
            format_version: BUNDLE_FORMAT_VERSION,
            d: bundle.d(),
            k: bundle.k(),
            epsilon: bundle.budget.epsilon(),
            delta: bundle.budget.delta(),
            sigma: bundle.noise.sigma(),
            matrix_seed: bundle.projection.seed(),
            row_sensitivity: bundle.projection.row_sensitivity(),
            attribute_names: bundle.attribute_names.clone(),
            calibration: bundle.calibration,
        }
    }
}

pub fn write_bundle<W: Write>(bundle: &PublishedBundle, mut out: W) -> Result<()> {
    bundle.validate()?;
    let meta = serde_json::to_vec(&BundleMetadata::of(bundle))?;
    let meta_len = u32::try_from(meta.len()).map_err(|_| Error::Format("bundle metadata too large".into()))?;
    out.write_all(BUNDLE_MAGIC)?;
    out.write_all(&meta_len.to_le_bytes())?;
    out.write_all(&meta)?;
    for v in bundle.projection.entries() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&(bundle.sketches.len() as u64).to_le_bytes())?;
    for s in &bundle.sketches {
        let id = s.user_id.as_bytes();
        let id_len =
            u32::try_from(id.len()).map_err(|_| Error::Format(format!("user id too long: {} bytes", id.len())))?;
        out.write_all(&id_len.to_le_bytes())?;
        out.write_all(id)?;
        for v in &s.values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn bundle_to_bytes(bundle: &PublishedBundle) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_bundle(bundle, &mut buf)?;
    Ok(buf)
}

/// Bounds-checked cursor over the container bytes.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("bundle truncated while reading {what}")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format(format!("{what} size overflows")))?;
        Ok(self
            .take(len, what)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn bundle_from_bytes(bytes: &[u8]) -> Result<PublishedBundle> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8, "magic")? != BUNDLE_MAGIC {
        return Err(Error::Format("not a sketch bundle (bad magic)".into()));
    }
    let meta_len = cur.u32("metadata length")? as usize;
    let meta_bytes = cur.take(meta_len, "metadata")?;

    // Check the version before interpreting any other field.
    let raw: serde_json::Value = serde_json::from_slice(meta_bytes)?;
    let version = raw
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Format("metadata lacks format_version".into()))?;
    if version != BUNDLE_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let meta: BundleMetadata = serde_json::from_value(raw)?;

    let entries = cur.f64s(
        meta.d
            .checked_mul(meta.k)
            .ok_or_else(|| Error::Format("projection size overflows".into()))?,
        "projection",
    )?;
    let projection = ProjectionMatrix::from_parts(meta.d, meta.k, entries, meta.matrix_seed, meta.row_sensitivity)?;
    let budget = PrivacyBudget::new(meta.epsilon, meta.delta)?;
    let noise = NoiseParams::new(meta.sigma)?;

    let count = cur.u64("sketch count")?;
    let mut sketches = Vec::new();
    for _ in 0..count {
        let id_len = cur.u32("user id length")? as usize;
        let user_id = std::str::from_utf8(cur.take(id_len, "user id")?)
            .map_err(|_| Error::Format("user id is not valid UTF-8".into()))?
            .to_string();
        let values = cur.f64s(meta.k, "sketch")?;
        sketches.push(PerturbedSketch { user_id, values });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after bundle",
            bytes.len() - cur.pos
        )));
    }
    let bundle = PublishedBundle {
        attribute_names: meta.attribute_names,
        projection,
        sketches,
        noise,
        budget,
        calibration: meta.calibration,
        created_with_seed: None,
    };
    bundle.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(bundle)
}

pub fn read_bundle<R: Read>(mut input: R) -> Result<PublishedBundle> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    bundle_from_bytes(&bytes)
}
