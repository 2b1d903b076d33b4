//! Binary `.f32` raster export: an 8-byte header (width then height as
//! little-endian u32) followed by row-major little-endian f32 samples.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn encode_f32_raster(width: u32, height: u32, values: &[f64]) -> Vec<u8> {
    debug_assert_eq!(values.len(), width as usize * height as usize);
    let mut out = Vec::with_capacity(8 + values.len() * 4);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn write_f32_raster(path: impl AsRef<Path>, width: u32, height: u32, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_f32_raster(width, height, values)).map_err(|e| Error::io(path, e))
}

pub fn decode_f32_raster(bytes: &[u8]) -> Result<(u32, u32, Vec<f32>)> {
    if bytes.len() < 8 {
        return Err(Error::MalformedHeader {
            detail: "f32 raster shorter than its 8-byte header".into(),
        });
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let expected = width as usize * height as usize;
    let body = &bytes[8..];
    if body.len() < expected * 4 {
        return Err(Error::TruncatedPayload {
            expected,
            found: body.len() / 4,
        });
    }
    let values = body[..expected * 4]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((width, height, values))
}

pub fn read_f32_raster(path: impl AsRef<Path>) -> Result<(u32, u32, Vec<f32>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_f32_raster(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_payload_round_trip() {
        let values = vec![0.0, 1.5, -2.25, 1e10, 3.125, -0.5];
        let bytes = encode_f32_raster(3, 2, &values);
        assert_eq!(bytes.len(), 8 + 6 * 4);
        assert_eq!(&bytes[0..4], &3u32.to_le_bytes());
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        let (w, h, back) = decode_f32_raster(&bytes).unwrap();
        assert_eq!((w, h), (3, 2));
        let expected: Vec<f32> = values.iter().map(|&v| v as f32).collect();
        assert_eq!(back, expected);
    }

    #[test]
    fn truncation_detected() {
        let bytes = encode_f32_raster(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            decode_f32_raster(&bytes[..bytes.len() - 5]),
            Err(Error::TruncatedPayload { .. })
        ));
        assert!(matches!(
            decode_f32_raster(&bytes[..4]),
            Err(Error::MalformedHeader { .. })
        ));
    }
}
