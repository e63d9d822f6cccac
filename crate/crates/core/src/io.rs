//! PGM and PNG grayscale input, PGM output.
//!
//! Intensities are normalised to `[0, 1]` by the format's maximum value on the
//! way in. Label images use evenly spaced gray levels: class `k` of `C` is
//! written as `floor(k * 255 / (C - 1))`.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::clustering::HardLabeling;
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Raw integer samples with their maximum value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGray {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub samples: Vec<u32>,
}

impl RawGray {
    pub fn to_image(&self) -> Result<GrayImage> {
        let m = self.maxval as f64;
        GrayImage::new(
            self.width,
            self.height,
            self.samples.iter().map(|&s| s as f64 / m).collect(),
        )
    }
}

fn pgm_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        format: "PGM",
        offset: offset as u64,
        message: message.into(),
    }
}

struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if start >= self.data.len() {
                pgm_err(start, format!("unexpected end of file reading {what}"))
            } else {
                pgm_err(start, format!("expected a number for {what}"))
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| pgm_err(start, format!("{what} does not fit in 32 bits")))
    }
}

/// Parses a P2 or P5 PGM.
pub fn parse_pgm(data: &[u8]) -> Result<RawGray> {
    if data.len() < 2 {
        return Err(pgm_err(0, "file too short for a magic number"));
    }
    let binary = match &data[..2] {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(pgm_err(0, "magic number is not P2 or P5")),
    };
    let mut t = Tokens { data, pos: 2 };
    let width = t.number("width")? as usize;
    let height = t.number("height")? as usize;
    let maxval_at = t.pos;
    let maxval = t.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(pgm_err(2, format!("image size {width}x{height} is empty")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(pgm_err(
            maxval_at,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let count = width * height;
    let mut samples = Vec::with_capacity(count);
    if binary {
        if t.pos >= data.len() || !data[t.pos].is_ascii_whitespace() {
            return Err(pgm_err(t.pos, "expected one whitespace byte before raster"));
        }
        let start = t.pos + 1;
        let bytes = if maxval < 256 { 1 } else { 2 };
        let need = count * bytes;
        if data.len() < start + need {
            return Err(pgm_err(
                data.len(),
                format!(
                    "raster truncated: need {need} bytes, found {}",
                    data.len().saturating_sub(start)
                ),
            ));
        }
        for (i, chunk) in data[start..start + need].chunks_exact(bytes).enumerate() {
            let v = if bytes == 1 {
                chunk[0] as u32
            } else {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            };
            if v > maxval {
                return Err(pgm_err(
                    start + i * bytes,
                    format!("sample {v} exceeds maxval {maxval}"),
                ));
            }
            samples.push(v);
        }
    } else {
        for _ in 0..count {
            t.skip_space_and_comments();
            let at = t.pos;
            let v = t.number("sample")?;
            if v > maxval {
                return Err(pgm_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v);
        }
    }
    Ok(RawGray {
        width,
        height,
        maxval,
        samples,
    })
}

fn parse_png(data: &[u8]) -> Result<RawGray> {
    let png_err = |e: png::DecodingError| Error::Format {
        format: "PNG",
        offset: 0,
        message: e.to_string(),
    };
    let mut reader = png::Decoder::new(Cursor::new(data))
        .read_info()
        .map_err(png_err)?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::Format {
            format: "PNG",
            offset: 0,
            message: format!("color type {:?} is not grayscale", info.color_type),
        });
    }
    let depth = info.bit_depth;
    if !matches!(depth, png::BitDepth::Eight | png::BitDepth::Sixteen) {
        return Err(Error::Format {
            format: "PNG",
            offset: 0,
            message: format!("bit depth {depth:?} is not 8 or 16"),
        });
    }
    let size = reader.output_buffer_size().ok_or_else(|| Error::Format {
        format: "PNG",
        offset: 0,
        message: "image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    let line = frame.line_size;
    let mut samples = Vec::with_capacity(width * height);
    for row in buf[..frame.buffer_size()].chunks_exact(line) {
        match depth {
            png::BitDepth::Eight => samples.extend(row[..width].iter().map(|&b| b as u32)),
            _ => samples.extend(
                row[..2 * width]
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as u32),
            ),
        }
    }
    let maxval = if depth == png::BitDepth::Eight {
        255
    } else {
        65535
    };
    Ok(RawGray {
        width,
        height,
        maxval,
        samples,
    })
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes PGM or PNG bytes, chosen by signature.
pub fn decode_raw(data: &[u8]) -> Result<RawGray> {
    if data.starts_with(PNG_SIGNATURE) {
        parse_png(data)
    } else if data.starts_with(b"P") {
        parse_pgm(data)
    } else {
        Err(Error::Format {
            format: "image",
            offset: 0,
            message: "neither a PGM nor a PNG signature".into(),
        })
    }
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<RawGray> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw(&data)
}

/// Reads a grayscale image normalised to `[0, 1]`.
pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    read_raw(path)?.to_image()
}

/// Binary PGM bytes; `maxval` selects 8-bit (`<= 255`) or 16-bit samples.
pub fn encode_pgm(width: usize, height: usize, maxval: u32, samples: &[u32]) -> Vec<u8> {
    assert_eq!(samples.len(), width * height);
    assert!((1..=65535).contains(&maxval));
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    if maxval < 256 {
        out.extend(samples.iter().map(|&s| s.min(maxval) as u8));
    } else {
        for &s in samples {
            out.extend((s.min(maxval) as u16).to_be_bytes());
        }
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// PGM bytes of `[0, 1]` intensities (clamped) with the given maxval.
pub fn encode_image(img: &GrayImage, maxval: u32) -> Vec<u8> {
    let m = maxval as f64;
    let samples: Vec<u32> = img
        .pixels()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * m).round() as u32)
        .collect();
    encode_pgm(img.width(), img.height(), maxval, &samples)
}

pub fn write_image(img: &GrayImage, path: impl AsRef<Path>, maxval: u32) -> Result<()> {
    write_bytes(path.as_ref(), &encode_image(img, maxval))
}

/// 8-bit PGM of an arbitrary-range band, stretched min..max to 0..255.
pub fn encode_visualization(img: &GrayImage) -> Vec<u8> {
    let (lo, hi) = img.min_max();
    let span = hi - lo;
    let scaled = img.map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 });
    encode_image(&scaled, 255)
}

pub fn write_visualization(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_visualization(img))
}

/// Gray level of class `k` among `classes`.
pub fn class_level(k: usize, classes: usize) -> u32 {
    if classes <= 1 {
        0
    } else {
        (k * 255 / (classes - 1)) as u32
    }
}

pub fn encode_labels(lab: &HardLabeling) -> Vec<u8> {
    let samples: Vec<u32> = lab
        .labels()
        .iter()
        .map(|&k| class_level(k, lab.classes()))
        .collect();
    encode_pgm(lab.width(), lab.height(), 255, &samples)
}

pub fn write_mask(lab: &HardLabeling, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_labels(lab))
}

pub fn write_binary_mask(
    mask: &[bool],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_mask(&HardLabeling::from_mask(width, height, mask)?, path)
}

/// Maps gray levels back to the nearest of `classes` evenly spaced levels.
pub fn labels_from_raw(raw: &RawGray, classes: usize) -> Result<HardLabeling> {
    if classes == 0 {
        return Err(Error::Config("need at least one class".into()));
    }
    let top = (classes - 1) as f64;
    let labels = raw
        .samples
        .iter()
        .map(|&s| ((s as f64 / raw.maxval as f64) * top).round() as usize)
        .collect();
    HardLabeling::new(raw.width, raw.height, classes, labels)
}

pub fn read_labels(path: impl AsRef<Path>, classes: usize) -> Result<HardLabeling> {
    labels_from_raw(&read_raw(path)?, classes)
}
