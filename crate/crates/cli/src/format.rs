//! Bit-exact binary field format.
//!
//! Layout: magic `LPRW`, format version as u16 little-endian (currently 1),
//! `n` as u32 LE, seed as u64 LE, walk length as u64 LE, covered flag byte,
//! then `n²` u64 LE first-hit times in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use latewalk_core::walk::FirstHitField;

pub const MAGIC: &[u8; 4] = b"LPRW";
pub const VERSION: u16 = 1;

#[derive(Debug)]
pub enum FormatError {
    Io(std::io::Error),
    BadMagic,
    UnsupportedVersion(u16),
    Truncated,
    /// Trailing bytes after the declared payload.
    Oversized,
}

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormatError::Io(e) => write!(f, "io error: {e}"),
            FormatError::BadMagic => f.write_str("not a field file (bad magic)"),
            FormatError::UnsupportedVersion(v) => {
                write!(
                    f,
                    "unsupported field format version {v} (reader supports {VERSION})"
                )
            }
            FormatError::Truncated => f.write_str("field file truncated"),
            FormatError::Oversized => f.write_str("field file has trailing bytes"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e)
    }
}

pub fn encode_field(field: &FirstHitField) -> Vec<u8> {
    let sites = field.hits.len();
    let mut buf = Vec::with_capacity(27 + 8 * sites);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&field.n.to_le_bytes());
    buf.extend_from_slice(&field.seed.to_le_bytes());
    buf.extend_from_slice(&field.walk_length.to_le_bytes());
    buf.push(u8::from(field.covered));
    for &h in &field.hits {
        buf.extend_from_slice(&h.to_le_bytes());
    }
    buf
}

pub fn decode_field(bytes: &[u8]) -> Result<FirstHitField, FormatError> {
    if bytes.len() < 4 {
        return Err(FormatError::Truncated);
    }
    if &bytes[0..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < 27 {
        return Err(FormatError::Truncated);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
    let seed = u64::from_le_bytes(bytes[10..18].try_into().unwrap());
    let walk_length = u64::from_le_bytes(bytes[18..26].try_into().unwrap());
    let covered = bytes[26] != 0;
    let sites = n as usize * n as usize;
    let expected = 27 + 8 * sites;
    if bytes.len() < expected {
        return Err(FormatError::Truncated);
    }
    if bytes.len() > expected {
        return Err(FormatError::Oversized);
    }
    let mut hits = Vec::with_capacity(sites);
    for chunk in bytes[27..].chunks_exact(8) {
        hits.push(u64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(FirstHitField {
        n,
        seed,
        hits,
        walk_length,
        covered,
    })
}

pub fn write_field(path: &Path, field: &FirstHitField) -> Result<(), FormatError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FirstHitField, FormatError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use latewalk_core::walk::{run_to_cover, WalkConfig};

    #[test]
    fn round_trip_preserves_every_bit() {
        let field = run_to_cover(&WalkConfig::new(9, 31), &mut []).unwrap();
        let bytes = encode_field(&field);
        let back = decode_field(&bytes).unwrap();
        assert_eq!(back, field);
        assert_eq!(encode_field(&back), bytes);
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let field = run_to_cover(&WalkConfig::new(4, 2), &mut []).unwrap();
        let mut bytes = encode_field(&field);
        bytes[0] = b'X';
        assert!(matches!(decode_field(&bytes), Err(FormatError::BadMagic)));
    }

    #[test]
    fn future_version_is_rejected_explicitly() {
        let field = run_to_cover(&WalkConfig::new(4, 2), &mut []).unwrap();
        let mut bytes = encode_field(&field);
        bytes[4] = 2;
        assert!(matches!(
            decode_field(&bytes),
            Err(FormatError::UnsupportedVersion(2))
        ));
    }

    #[test]
    fn truncation_and_padding_are_rejected() {
        let field = run_to_cover(&WalkConfig::new(4, 2), &mut []).unwrap();
        let bytes = encode_field(&field);
        assert!(matches!(
            decode_field(&bytes[..bytes.len() - 1]),
            Err(FormatError::Truncated)
        ));
        let mut padded = bytes.clone();
        padded.push(0);
        assert!(matches!(decode_field(&padded), Err(FormatError::Oversized)));
    }
}
