//! 8-bit grayscale images and portable graymap (PGM) I/O.
//!
//! Input accepts both ASCII (`P2`) and binary (`P5`) graymaps with maxval
//! 255; output is always binary `P5`, so save/load round trips are
//! byte-exact. Color netpbm files are rejected rather than converted.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit grayscale raster. Pixels are stored row-major, top row first;
/// `get(x, y)` addresses column `x` and row `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::BadDimensions {
                width: width as u64,
                height: height as u64,
            });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: pixels.len(),
            });
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Image::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn same_dimensions(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn dimension_mismatch(&self, other_w: u32, other_h: u32) -> Error {
        Error::DimensionMismatch {
            left_width: self.width,
            left_height: self.height,
            right_width: other_w,
            right_height: other_h,
        }
    }
}

/// Per-pixel signed differences between two images of equal size. Every
/// delta is in {-1, 0, +1}; larger differences are rejected by [`diff`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffMap {
    width: u32,
    height: u32,
    deltas: Vec<i8>,
}

impl DiffMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn deltas(&self) -> &[i8] {
        &self.deltas
    }

    pub fn change_count(&self) -> usize {
        self.deltas.iter().filter(|&&d| d != 0).count()
    }

    /// Change-location rendering: mid-gray where nothing changed,
    /// near-black for -1 and near-white for +1 (128 + 127 * delta).
    pub fn render(&self) -> Image {
        let pixels = self
            .deltas
            .iter()
            .map(|&d| (128i16 + 127i16 * d as i16) as u8)
            .collect();
        Image {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Stego minus cover, pixel by pixel.
pub fn diff(cover: &Image, stego: &Image) -> Result<DiffMap> {
    if !cover.same_dimensions(stego) {
        return Err(cover.dimension_mismatch(stego.width, stego.height));
    }
    let mut deltas = Vec::with_capacity(cover.pixels.len());
    for (index, (&c, &s)) in cover.pixels.iter().zip(stego.pixels.iter()).enumerate() {
        let delta = s as i32 - c as i32;
        if delta.abs() > 1 {
            return Err(Error::NonUnitChange { index, delta });
        }
        deltas.push(delta as i8);
    }
    Ok(DiffMap {
        width: cover.width,
        height: cover.height,
        deltas,
    })
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_p5(img)).map_err(|e| Error::io(path, e))
}

/// Serialize as a binary P5 graymap, maxval 255.
pub fn encode_p5(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Parse a P2 or P5 graymap. Header comments (`#` to end of line) are
/// skipped; maxval must be exactly 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader {
            detail: "file shorter than a magic number".into(),
        });
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => {
            return Err(Error::UnsupportedFormat {
                magic: String::from_utf8_lossy(magic).into_owned(),
            })
        }
    };

    let mut cursor = Cursor {
        bytes,
        pos: 2,
    };
    let width = cursor.read_header_number("width")?;
    let height = cursor.read_header_number("height")?;
    let maxval = cursor.read_header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::BadDimensions { width, height });
    }
    if width > u32::MAX as u64 || height > u32::MAX as u64 || width * height > (1u64 << 31) {
        return Err(Error::MalformedHeader {
            detail: format!("implausible dimensions {width}x{height}"),
        });
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval { maxval });
    }
    let expected = (width * height) as usize;

    let pixels = if binary {
        // Exactly one whitespace byte separates the maxval from the payload.
        cursor.expect_single_whitespace()?;
        let body = &cursor.bytes[cursor.pos.min(cursor.bytes.len())..];
        if body.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: body.len(),
            });
        }
        body[..expected].to_vec()
    } else {
        let mut samples = Vec::with_capacity(expected);
        while samples.len() < expected {
            match cursor.read_ascii_sample()? {
                Some(v) => {
                    if v > 255 {
                        return Err(Error::SampleOutOfRange { value: v });
                    }
                    samples.push(v as u8);
                }
                None => {
                    return Err(Error::TruncatedPayload {
                        expected,
                        found: samples.len(),
                    })
                }
            }
        }
        samples
    };

    Image::new(width as u32, height as u32, pixels)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn read_header_number(&mut self, what: &str) -> Result<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedHeader {
                detail: format!("expected unsigned integer for {what}"),
            });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<u64>().map_err(|_| Error::MalformedHeader {
            detail: format!("{what} {text:?} does not fit an unsigned integer"),
        })
    }

    fn expect_single_whitespace(&mut self) -> Result<()> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::MalformedHeader {
                detail: "missing whitespace between maxval and binary payload".into(),
            }),
        }
    }

    /// Next whitespace-separated unsigned integer, or None at end of input.
    fn read_ascii_sample(&mut self) -> Result<Option<u64>> {
        self.skip_whitespace_and_comments();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedHeader {
                detail: format!("unexpected byte {:?} in ASCII payload", self.bytes[self.pos] as char),
            });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match text.parse::<u64>() {
            Ok(v) => Ok(Some(v)),
            Err(_) => Err(Error::SampleOutOfRange { value: u64::MAX }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_binary_p5() {
        let img = decode_pgm(b"P5\n2 2\n255\n\x00\xff\x80\x07").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 255, 128, 7]);
    }

    #[test]
    fn decodes_ascii_p2() {
        let img = decode_pgm(b"P2 1 1 255 42").unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[42]);
    }

    #[test]
    fn skips_header_comments() {
        let img = decode_pgm(b"P2\n# a comment\n2 1\n# another\n255\n3 4").unwrap();
        assert_eq!(img.pixels(), &[3, 4]);
    }

    #[test]
    fn rejects_large_maxval() {
        let err = decode_pgm(b"P5\n1 1\n65535\n\x00\x00").unwrap_err();
        assert!(matches!(err, Error::UnsupportedMaxval { maxval: 65535 }));
        assert!(err.to_string().contains("unsupported maxval"));
    }

    #[test]
    fn rejects_color_and_bitmap_magics() {
        for magic in [&b"P3"[..], b"P6", b"P1", b"P4", b"P7"] {
            let mut data = magic.to_vec();
            data.extend_from_slice(b"\n1 1\n255\n\x00");
            assert!(matches!(
                decode_pgm(&data),
                Err(Error::UnsupportedFormat { .. })
            ));
        }
    }

    #[test]
    fn rejects_zero_dimensions() {
        assert!(matches!(
            decode_pgm(b"P5\n0 4\n255\n"),
            Err(Error::BadDimensions { .. })
        ));
    }

    #[test]
    fn rejects_truncated_payload() {
        assert!(matches!(
            decode_pgm(b"P5\n2 2\n255\n\x01\x02"),
            Err(Error::TruncatedPayload {
                expected: 4,
                found: 2
            })
        ));
        assert!(matches!(
            decode_pgm(b"P2\n2 2\n255\n1 2 3"),
            Err(Error::TruncatedPayload {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn rejects_ascii_sample_out_of_range() {
        assert!(matches!(
            decode_pgm(b"P2\n1 1\n255\n300"),
            Err(Error::SampleOutOfRange { value: 300 })
        ));
    }

    #[test]
    fn rejects_garbage_header() {
        assert!(matches!(
            decode_pgm(b"P5\nabc def\n255\n"),
            Err(Error::MalformedHeader { .. })
        ));
    }

    #[test]
    fn p5_encoding_is_compact() {
        let img = Image::new(1, 1, vec![0]).unwrap();
        let bytes = encode_p5(&img);
        assert!(bytes.starts_with(b"P5"));
        assert!(bytes.len() <= 15);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = Image::new(3, 2, vec![0, 1, 2, 253, 254, 255]).unwrap();
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
        // And the bytes themselves are canonical P5.
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(raw, encode_p5(&img));
    }

    #[test]
    fn load_missing_file_is_io_error() {
        assert!(matches!(
            load_image("/nonexistent/path/x.pgm"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn save_to_unwritable_path_is_io_error() {
        let img = Image::new(1, 1, vec![7]).unwrap();
        assert!(matches!(
            save_image(&img, "/nonexistent-dir/x.pgm"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn diff_identical_images_is_zero() {
        let img = Image::new(2, 2, vec![9, 9, 9, 9]).unwrap();
        let d = diff(&img, &img).unwrap();
        assert!(d.deltas().iter().all(|&x| x == 0));
        assert_eq!(d.change_count(), 0);
    }

    #[test]
    fn diff_reports_signed_unit_changes() {
        let cover = Image::new(2, 1, vec![10, 20]).unwrap();
        let stego = Image::new(2, 1, vec![11, 19]).unwrap();
        let d = diff(&cover, &stego).unwrap();
        assert_eq!(d.deltas(), &[1, -1]);
    }

    #[test]
    fn diff_rejects_large_changes_and_mismatched_sizes() {
        let cover = Image::new(1, 1, vec![10]).unwrap();
        let stego = Image::new(1, 1, vec![13]).unwrap();
        assert!(matches!(
            diff(&cover, &stego),
            Err(Error::NonUnitChange { index: 0, delta: 3 })
        ));

        let other = Image::new(2, 1, vec![10, 10]).unwrap();
        assert!(matches!(
            diff(&cover, &other),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diffmap_render_uses_mid_gray() {
        let cover = Image::new(3, 1, vec![5, 5, 255]).unwrap();
        let stego = Image::new(3, 1, vec![6, 5, 254]).unwrap();
        let rendered = diff(&cover, &stego).unwrap().render();
        assert_eq!(rendered.pixels(), &[255, 128, 1]);
    }
}
