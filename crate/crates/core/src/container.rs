//! Flat binary container for pyramids, feature fields and scalar fields.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                                              |
//! |--------|------|----------------------------------------------------|
//! | 0      | 4    | magic `WSEG`                                       |
//! | 4      | 1    | version (1)                                        |
//! | 5      | 1    | kind: 0 feature field, 1 pyramid, 2 scalar field   |
//! | 6      | 2    | reserved, zero                                     |
//! | 8      | 4    | width (pixels of the source image)                 |
//! | 12     | 4    | height                                             |
//! | 16     | 4    | levels `K`                                         |
//! | 20     | 4    | `D`: feature length, band count `1 + 3K`, or 1     |
//! | 24     | ...  | payload, `f64` little-endian                       |
//!
//! Feature fields store `D` values per pixel in row-major pixel order, then
//! `D` mask bytes (0/1). Pyramids store bands in [`WaveletPyramid::bands`]
//! order, each row-major. Scalar fields store one value per pixel.

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureField;
use crate::image::GrayImage;
use crate::wavelet::{DetailBands, WaveletPyramid};

pub const MAGIC: &[u8; 4] = b"WSEG";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    FeatureField = 0,
    Pyramid = 1,
    Scalar = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub kind: Kind,
    pub width: u32,
    pub height: u32,
    pub levels: u32,
    pub dim: u32,
}

fn header_bytes(h: &Header) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(h.kind as u8);
    out.extend_from_slice(&[0, 0]);
    for v in [h.width, h.height, h.levels, h.dim] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn push_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn bad(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        format: "container",
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn parse_header(data: &[u8]) -> Result<Header> {
    if data.len() < HEADER_LEN {
        return Err(bad(data.len(), "header truncated"));
    }
    if &data[..4] != MAGIC {
        return Err(bad(0, "bad magic"));
    }
    if data[4] != VERSION {
        return Err(bad(4, format!("unsupported version {}", data[4])));
    }
    let kind = match data[5] {
        0 => Kind::FeatureField,
        1 => Kind::Pyramid,
        2 => Kind::Scalar,
        k => return Err(bad(5, format!("unknown kind {k}"))),
    };
    let word = |i: usize| u32::from_le_bytes(data[i..i + 4].try_into().expect("4 bytes"));
    Ok(Header {
        kind,
        width: word(8),
        height: word(12),
        levels: word(16),
        dim: word(20),
    })
}

fn read_f64s(data: &[u8], offset: usize, count: usize) -> Result<Vec<f64>> {
    let end = offset + 8 * count;
    if data.len() < end {
        return Err(bad(
            data.len(),
            format!("payload truncated, need {end} bytes"),
        ));
    }
    Ok(data[offset..end]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect())
}

pub fn encode_feature_field(ff: &FeatureField) -> Vec<u8> {
    let mut out = header_bytes(&Header {
        kind: Kind::FeatureField,
        width: ff.width() as u32,
        height: ff.height() as u32,
        levels: ff.levels() as u32,
        dim: ff.dim() as u32,
    });
    push_f64s(&mut out, ff.data());
    out.extend(ff.lowfreq_mask().iter().map(|&m| m as u8));
    out
}

pub fn decode_feature_field(data: &[u8]) -> Result<FeatureField> {
    let h = parse_header(data)?;
    if h.kind != Kind::FeatureField {
        return Err(bad(5, "not a feature field"));
    }
    let (w, ht, d) = (h.width as usize, h.height as usize, h.dim as usize);
    let values = read_f64s(data, HEADER_LEN, w * ht * d)?;
    let mask_at = HEADER_LEN + 8 * values.len();
    if data.len() < mask_at + d {
        return Err(bad(data.len(), "mask truncated"));
    }
    let mask = data[mask_at..mask_at + d].iter().map(|&b| b != 0).collect();
    FeatureField::new(w, ht, d, h.levels as usize, values, mask)
}

pub fn encode_pyramid(pyr: &WaveletPyramid) -> Vec<u8> {
    let (w, h) = pyr.image_size();
    let mut out = header_bytes(&Header {
        kind: Kind::Pyramid,
        width: w as u32,
        height: h as u32,
        levels: pyr.levels() as u32,
        dim: (1 + 3 * pyr.levels()) as u32,
    });
    for (_, band) in pyr.bands() {
        push_f64s(&mut out, band.pixels());
    }
    out
}

pub fn decode_pyramid(data: &[u8]) -> Result<WaveletPyramid> {
    let h = parse_header(data)?;
    if h.kind != Kind::Pyramid || h.levels == 0 {
        return Err(bad(5, "not a pyramid"));
    }
    let k = h.levels as usize;
    let (w, ht) = (h.width as usize, h.height as usize);
    if w % (1 << k) != 0 || ht % (1 << k) != 0 {
        return Err(bad(8, "image size not divisible by 2^K"));
    }
    let mut offset = HEADER_LEN;
    let mut take = |bw: usize, bh: usize| -> Result<GrayImage> {
        let v = read_f64s(data, offset, bw * bh)?;
        offset += 8 * v.len();
        GrayImage::new(bw, bh, v)
    };
    let approx = take(w >> k, ht >> k)?;
    let mut details = Vec::with_capacity(k);
    for level in (1..=k).rev() {
        let (bw, bh) = (w >> level, ht >> level);
        details.push(DetailBands {
            hl: take(bw, bh)?,
            lh: take(bw, bh)?,
            hh: take(bw, bh)?,
        });
    }
    details.reverse();
    WaveletPyramid::new(approx, details)
}

pub fn encode_scalar(img: &GrayImage) -> Vec<u8> {
    let mut out = header_bytes(&Header {
        kind: Kind::Scalar,
        width: img.width() as u32,
        height: img.height() as u32,
        levels: 0,
        dim: 1,
    });
    push_f64s(&mut out, img.pixels());
    out
}

pub fn decode_scalar(data: &[u8]) -> Result<GrayImage> {
    let h = parse_header(data)?;
    if h.kind != Kind::Scalar {
        return Err(bad(5, "not a scalar field"));
    }
    let (w, ht) = (h.width as usize, h.height as usize);
    GrayImage::new(w, ht, read_f64s(data, HEADER_LEN, w * ht)?)
}

pub fn write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
