//! The on-disk index encoding.
//!
//! ```text
//! magic "TXRI" | major u16 | minor u16
//! manifest_len u32 | manifest JSON (UTF-8)
//! dim u32 | precision u8 | entry_count u32
//! per entry: unit_id_len u16 + bytes | doc_id_len u16 + bytes | rows u32 | payload byte offset u64
//! payload_len u64 | payload (little-endian f32 or f16 values)
//! crc32 u32 of the payload bytes
//! ```
//!
//! All integers little-endian. The payload section's byte length is exactly
//! the index's reported storage size.

use crate::embed::Precision;
use crate::index::{IndexEntry, IndexError, IndexManifest, VectorIndex};

const MAGIC: &[u8; 4] = b"TXRI";
const MAJOR: u16 = 1;
const MINOR: u16 = 0;

fn precision_tag(p: Precision) -> u8 {
    match p {
        Precision::F32 => 0,
        Precision::F16 => 1,
    }
}

pub fn encode(index: &VectorIndex) -> Vec<u8> {
    let manifest = serde_json::to_vec(index.manifest()).expect("manifest serializes");
    let precision = index.precision();
    let bytes_per_value = precision.bytes_per_value();
    let dim = index.dim();

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MAJOR.to_le_bytes());
    out.extend_from_slice(&MINOR.to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(&manifest);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.push(precision_tag(precision));
    out.extend_from_slice(&(index.len() as u32).to_le_bytes());

    let mut offset = 0u64;
    for entry in index.entries() {
        let unit_id = entry.unit_id.as_bytes();
        let doc_id = entry.doc_id.as_bytes();
        let unit_len: u16 = unit_id.len().try_into().expect("unit id fits u16 length");
        let doc_len: u16 = doc_id.len().try_into().expect("doc id fits u16 length");
        out.extend_from_slice(&unit_len.to_le_bytes());
        out.extend_from_slice(unit_id);
        out.extend_from_slice(&doc_len.to_le_bytes());
        out.extend_from_slice(doc_id);
        out.extend_from_slice(&(entry.rows as u32).to_le_bytes());
        out.extend_from_slice(&offset.to_le_bytes());
        offset += (entry.rows * dim * bytes_per_value) as u64;
    }

    out.extend_from_slice(&offset.to_le_bytes());
    let payload_start = out.len();
    match precision {
        Precision::F32 => {
            for (_, rows) in index.iter_units() {
                for value in rows {
                    out.extend_from_slice(&value.to_le_bytes());
                }
            }
        }
        Precision::F16 => {
            for (_, rows) in index.iter_units() {
                for value in rows {
                    out.extend_from_slice(&half::f16::from_f32(*value).to_le_bytes());
                }
            }
        }
    }
    let crc = crc32fast::hash(&out[payload_start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], IndexError> {
        if self.pos + n > self.bytes.len() {
            return Err(IndexError::ChecksumMismatch {
                detail: format!("file truncated reading {what} at byte {}", self.pos),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8, IndexError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, IndexError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, len: usize, what: &str) -> Result<String, IndexError> {
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| IndexError::ChecksumMismatch {
            detail: format!("{what} is not valid UTF-8"),
        })
    }
}

fn corrupt(detail: impl Into<String>) -> IndexError {
    IndexError::ChecksumMismatch {
        detail: detail.into(),
    }
}

pub fn decode(bytes: &[u8]) -> Result<VectorIndex, IndexError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(IndexError::BadMagic);
    }
    let mut reader = Reader { bytes, pos: 4 };

    let major = reader.u16("version")?;
    let _minor = reader.u16("version")?;
    if major > MAJOR {
        return Err(IndexError::FormatVersionMismatch {
            found: major,
            supported: MAJOR,
        });
    }

    let manifest_len = reader.u32("manifest length")? as usize;
    let manifest_bytes = reader.take(manifest_len, "manifest")?;
    let manifest: IndexManifest = serde_json::from_slice(manifest_bytes)
        .map_err(|e| corrupt(format!("manifest does not parse: {e}")))?;

    let dim = reader.u32("dimension")? as usize;
    if dim != manifest.provider.dimension {
        return Err(corrupt(format!(
            "header dimension {dim} disagrees with manifest {}",
            manifest.provider.dimension
        )));
    }
    let precision_tag_read = reader.u8("precision")?;
    if precision_tag_read != precision_tag(manifest.precision) {
        return Err(corrupt("header precision disagrees with manifest"));
    }
    let bytes_per_value = manifest.precision.bytes_per_value();

    let entry_count = reader.u32("entry count")? as usize;
    let mut entries = Vec::with_capacity(entry_count);
    let mut expected_offset = 0u64;
    for i in 0..entry_count {
        let unit_len = reader.u16("unit id length")? as usize;
        let unit_id = reader.string(unit_len, "unit id")?;
        let doc_len = reader.u16("doc id length")? as usize;
        let doc_id = reader.string(doc_len, "doc id")?;
        let rows = reader.u32("row count")? as usize;
        let offset = reader.u64("payload offset")?;
        if offset != expected_offset {
            return Err(corrupt(format!(
                "entry {i} payload offset {offset} out of sequence (expected {expected_offset})"
            )));
        }
        expected_offset += (rows * dim * bytes_per_value) as u64;
        entries.push(IndexEntry {
            doc_id,
            unit_id,
            rows,
        });
    }

    let payload_len = reader.u64("payload length")? as usize;
    if payload_len as u64 != expected_offset {
        return Err(corrupt(format!(
            "payload length {payload_len} disagrees with entry table total {expected_offset}"
        )));
    }
    let payload_bytes = reader.take(payload_len, "payload")?;
    let stored_crc = reader.u32("checksum")?;
    let computed_crc = crc32fast::hash(payload_bytes);
    if stored_crc != computed_crc {
        return Err(corrupt(format!(
            "payload CRC32 {computed_crc:08x} does not match stored {stored_crc:08x}"
        )));
    }
    if reader.pos != bytes.len() {
        return Err(corrupt(format!(
            "{} trailing bytes after checksum",
            bytes.len() - reader.pos
        )));
    }

    let payload: Vec<f32> = match manifest.precision {
        Precision::F32 => payload_bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect(),
        Precision::F16 => payload_bytes
            .chunks_exact(2)
            .map(|b| half::f16::from_le_bytes(b.try_into().unwrap()).to_f32())
            .collect(),
    };

    Ok(VectorIndex::from_parts(manifest, dim, entries, payload))
}
