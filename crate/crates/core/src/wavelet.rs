//! Separable 2-D periodic wavelet transform.
//!
//! Rows are filtered first, then columns. Sub-band names give the row
//! (horizontal) filter first: `HL` is high-pass along rows and low-pass
//! along columns, `LH` the reverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterPair;
use crate::image::GrayImage;

/// The four outputs of one analysis step.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBands {
    pub ll: GrayImage,
    pub hl: GrayImage,
    pub lh: GrayImage,
    pub hh: GrayImage,
}

/// Detail bands of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub hl: GrayImage,
    pub lh: GrayImage,
    pub hh: GrayImage,
}

/// `details[k - 1]` holds level `k`; `approx` is `LL_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    approx: GrayImage,
    details: Vec<DetailBands>,
}

impl WaveletPyramid {
    pub fn new(approx: GrayImage, details: Vec<DetailBands>) -> Result<Self> {
        if details.is_empty() {
            return Err(Error::Dimension("pyramid needs at least one level".into()));
        }
        let levels = details.len();
        let (w, h) = (approx.width(), approx.height());
        for (i, d) in details.iter().enumerate() {
            let scale = 1usize << (levels - 1 - i);
            let (ew, eh) = (w * scale, h * scale);
            for band in [&d.hl, &d.lh, &d.hh] {
                if band.width() != ew || band.height() != eh {
                    return Err(Error::Dimension(format!(
                        "level {} band is {}x{}, expected {ew}x{eh}",
                        i + 1,
                        band.width(),
                        band.height()
                    )));
                }
            }
        }
        Ok(Self { approx, details })
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// `LL_K`.
    pub fn approx(&self) -> &GrayImage {
        &self.approx
    }

    /// Detail bands of level `k` (1-based, `1..=K`).
    pub fn level(&self, k: usize) -> &DetailBands {
        &self.details[k - 1]
    }

    pub fn details(&self) -> &[DetailBands] {
        &self.details
    }

    /// Size of the image this pyramid reconstructs to.
    pub fn image_size(&self) -> (usize, usize) {
        let s = 1usize << self.levels();
        (self.approx.width() * s, self.approx.height() * s)
    }

    pub fn coefficient_count(&self) -> usize {
        self.approx.len()
            + self
                .details
                .iter()
                .map(|d| d.hl.len() + d.lh.len() + d.hh.len())
                .sum::<usize>()
    }

    /// Bands in storage order: `LL_K`, then `HL_k, LH_k, HH_k` for
    /// `k = K, K-1, ..., 1`.
    pub fn bands(&self) -> Vec<(String, &GrayImage)> {
        let k = self.levels();
        let mut out = vec![(format!("LL{k}"), &self.approx)];
        for level in (1..=k).rev() {
            let d = self.level(level);
            out.push((format!("HL{level}"), &d.hl));
            out.push((format!("LH{level}"), &d.lh));
            out.push((format!("HH{level}"), &d.hh));
        }
        out
    }
}

pub(crate) fn check_divisible(width: usize, height: usize, levels: usize) -> Result<()> {
    let block = 1usize << levels;
    if !width.is_multiple_of(block) || !height.is_multiple_of(block) {
        return Err(Error::Dimension(format!(
            "{width}x{height} image is not divisible by 2^{levels} = {block}"
        )));
    }
    Ok(())
}

/// Filters every row, returning the low and high halves side by side as
/// two images of half width.
fn analyze_rows(img: &GrayImage, pair: &FilterPair) -> (GrayImage, GrayImage) {
    let (w, h) = (img.width(), img.height());
    let mut lo = Vec::with_capacity(w / 2 * h);
    let mut hi = Vec::with_capacity(w / 2 * h);
    for row in img.pixels().chunks_exact(w) {
        let (l, hh) = pair.analyze(row);
        lo.extend(l);
        hi.extend(hh);
    }
    (
        GrayImage::new(w / 2, h, lo).expect("row analysis keeps shape"),
        GrayImage::new(w / 2, h, hi).expect("row analysis keeps shape"),
    )
}

fn analyze_cols(img: &GrayImage, pair: &FilterPair) -> (GrayImage, GrayImage) {
    let (w, h) = (img.width(), img.height());
    let mut lo = GrayImage::zeros(w, h / 2);
    let mut hi = GrayImage::zeros(w, h / 2);
    let mut col = vec![0.0; h];
    for c in 0..w {
        for (r, v) in col.iter_mut().enumerate() {
            *v = img.get(r, c);
        }
        let (l, hh) = pair.analyze(&col);
        for r in 0..h / 2 {
            lo.set(r, c, l[r]);
            hi.set(r, c, hh[r]);
        }
    }
    (lo, hi)
}

fn synthesize_cols(lo: &GrayImage, hi: &GrayImage, pair: &FilterPair) -> GrayImage {
    let (w, h) = (lo.width(), lo.height());
    let mut out = GrayImage::zeros(w, 2 * h);
    let mut l = vec![0.0; h];
    let mut hh = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            l[r] = lo.get(r, c);
            hh[r] = hi.get(r, c);
        }
        for (r, v) in pair.synthesize(&l, &hh).into_iter().enumerate() {
            out.set(r, c, v);
        }
    }
    out
}

fn synthesize_rows(lo: &GrayImage, hi: &GrayImage, pair: &FilterPair) -> GrayImage {
    let (w, h) = (lo.width(), lo.height());
    let mut px = Vec::with_capacity(2 * w * h);
    for (l, hh) in lo.pixels().chunks_exact(w).zip(hi.pixels().chunks_exact(w)) {
        px.extend(pair.synthesize(l, hh));
    }
    GrayImage::new(2 * w, h, px).expect("row synthesis keeps shape")
}

/// One level of 2-D analysis.
pub fn dwt2_single_level(img: &GrayImage, pair: &FilterPair) -> Result<SubBands> {
    check_divisible(img.width(), img.height(), 1)?;
    let (row_lo, row_hi) = analyze_rows(img, pair);
    let (ll, lh) = analyze_cols(&row_lo, pair);
    let (hl, hh) = analyze_cols(&row_hi, pair);
    Ok(SubBands { ll, hl, lh, hh })
}

/// Inverse of [`dwt2_single_level`].
pub fn idwt2_single_level(bands: &SubBands, pair: &FilterPair) -> Result<GrayImage> {
    let (w, h) = (bands.ll.width(), bands.ll.height());
    for b in [&bands.hl, &bands.lh, &bands.hh] {
        if b.width() != w || b.height() != h {
            return Err(Error::Dimension(format!(
                "sub-band sizes disagree: {}x{} vs {w}x{h}",
                b.width(),
                b.height()
            )));
        }
    }
    let row_lo = synthesize_cols(&bands.ll, &bands.lh, pair);
    let row_hi = synthesize_cols(&bands.hl, &bands.hh, pair);
    Ok(synthesize_rows(&row_lo, &row_hi, pair))
}

/// `K`-level decomposition, recursing on the `LL` band.
pub fn wavedec2(img: &GrayImage, pair: &FilterPair, levels: usize) -> Result<WaveletPyramid> {
    if levels == 0 {
        return Err(Error::Config(
            "decomposition needs at least one level".into(),
        ));
    }
    check_divisible(img.width(), img.height(), levels)?;
    let mut details = Vec::with_capacity(levels);
    let mut current = img.clone();
    for _ in 0..levels {
        let SubBands { ll, hl, lh, hh } = dwt2_single_level(&current, pair)?;
        details.push(DetailBands { hl, lh, hh });
        current = ll;
    }
    WaveletPyramid::new(current, details)
}

pub fn waverec2(pyr: &WaveletPyramid, pair: &FilterPair) -> Result<GrayImage> {
    let mut current = pyr.approx().clone();
    for k in (1..=pyr.levels()).rev() {
        let d = pyr.level(k);
        current = idwt2_single_level(
            &SubBands {
                ll: current,
                hl: d.hl.clone(),
                lh: d.lh.clone(),
                hh: d.hh.clone(),
            },
            pair,
        )?;
    }
    Ok(current)
}

/// Round-trip error after the best circular delay and gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundTripError {
    pub max_error: f64,
    pub gain: f64,
    /// `(rows, cols)` by which the reconstruction lags the original.
    pub delay: (usize, usize),
}

/// Fits `reconstructed ≈ gain * roll(original, delay)` over every circular
/// delay and reports the smallest max-abs residual.
pub fn compensated_error(
    original: &GrayImage,
    reconstructed: &GrayImage,
) -> Result<RoundTripError> {
    let (w, h) = (original.width(), original.height());
    if (reconstructed.width(), reconstructed.height()) != (w, h) {
        return Err(Error::Dimension(format!(
            "reconstruction is {}x{}, original {w}x{h}",
            reconstructed.width(),
            reconstructed.height()
        )));
    }
    let energy: f64 = original.pixels().iter().map(|v| v * v).sum();
    let mut best = RoundTripError {
        max_error: f64::INFINITY,
        gain: 0.0,
        delay: (0, 0),
    };
    if energy == 0.0 {
        best.max_error = reconstructed
            .pixels()
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()));
        return Ok(best);
    }
    for dr in 0..h {
        for dc in 0..w {
            let shifted = original.roll(dr, dc);
            let y = reconstructed.pixels();
            let x = shifted.pixels();
            let gain = y.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / energy;
            let err = y
                .iter()
                .zip(x)
                .fold(0.0, |m: f64, (a, b)| m.max((a - gain * b).abs()));
            if err < best.max_error {
                best = RoundTripError {
                    max_error: err,
                    gain,
                    delay: (dr, dc),
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bio2() -> FilterPair {
        FilterPair::builtin("bio2").unwrap()
    }

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |r, c| ((r * 7 + c * 3) % 11) as f64 / 11.0)
    }

    #[test]
    fn odd_dimension_rejected() {
        let img = GrayImage::zeros(3, 4);
        assert!(matches!(
            dwt2_single_level(&img, &bio2()),
            Err(Error::Dimension(_))
        ));
        let img = GrayImage::zeros(8, 12);
        assert!(matches!(
            wavedec2(&img, &bio2(), 3),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn two_by_two_gives_unit_bands() {
        let b = dwt2_single_level(&ramp(2, 2), &bio2()).unwrap();
        for band in [&b.ll, &b.hl, &b.lh, &b.hh] {
            assert_eq!((band.width(), band.height()), (1, 1));
        }
    }

    #[test]
    fn constant_image_has_only_ll() {
        let c = 0.6;
        for name in ["o1-corrected", "bio1", "bio2", "canonical"] {
            let pair = FilterPair::builtin(name).unwrap();
            let b = dwt2_single_level(&GrayImage::filled(8, 8, c), &pair).unwrap();
            let s: f64 = pair.h0().iter().sum();
            for band in [&b.hl, &b.lh, &b.hh] {
                assert!(band.pixels().iter().all(|v| v.abs() <= 5e-3 * c), "{name}");
            }
            for &v in b.ll.pixels() {
                assert!((v - s * s * c).abs() < 1e-12);
                assert!((v - 2.0 * c).abs() < 5e-3 * c, "{name}");
            }
        }
    }

    #[test]
    fn shapes_and_critical_sampling() {
        let p = wavedec2(&ramp(8, 8), &bio2(), 1).unwrap();
        assert_eq!(p.approx().width(), 4);
        assert_eq!(p.level(1).hh.height(), 4);
        let p = wavedec2(&ramp(8, 8), &bio2(), 3).unwrap();
        assert_eq!((p.approx().width(), p.approx().height()), (1, 1));
        assert_eq!(p.coefficient_count(), 64);
        let p = wavedec2(&ramp(32, 16), &bio2(), 2).unwrap();
        assert_eq!(p.coefficient_count(), 512);
        assert_eq!(p.image_size(), (32, 16));
    }

    #[test]
    fn zero_in_zero_out() {
        let p = wavedec2(&GrayImage::zeros(16, 16), &bio2(), 3).unwrap();
        assert!(p
            .bands()
            .iter()
            .all(|(_, b)| b.pixels().iter().all(|&v| v == 0.0)));
        let back = waverec2(&p, &bio2()).unwrap();
        assert!(back.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_level_round_trip() {
        let pair = FilterPair::builtin("canonical").unwrap();
        let img = ramp(16, 8);
        let back = idwt2_single_level(&dwt2_single_level(&img, &pair).unwrap(), &pair).unwrap();
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_pyramid_rejected() {
        let d = DetailBands {
            hl: GrayImage::zeros(2, 2),
            lh: GrayImage::zeros(2, 2),
            hh: GrayImage::zeros(2, 3),
        };
        assert!(WaveletPyramid::new(GrayImage::zeros(2, 2), vec![d]).is_err());
    }

    #[test]
    fn compensated_error_finds_delay_and_gain() {
        let x = GrayImage::from_fn(8, 8, |r, c| ((r * 5 + c * 3) % 7) as f64 - 3.0);
        let y = x.roll(2, 5).map(|v| 0.5 * v);
        let e = compensated_error(&x, &y).unwrap();
        assert_eq!(e.delay, (2, 5));
        assert!((e.gain - 0.5).abs() < 1e-12);
        assert!(e.max_error < 1e-12);
    }
}
