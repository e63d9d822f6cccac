//! Per-pixel wavelet-tree feature vectors.
//!
//! For pixel `(r, c)` the image is circularly shifted so that `(r, c)` sits at
//! the origin, decomposed to `K` levels, and the spatial-orientation tree
//! rooted at `(0, 0)` is flattened into a vector of length `4^K`:
//!
//! ```text
//! LL_K[0,0], HL_K[0,0], LH_K[0,0], HH_K[0,0],
//! then for k = K-1 down to 1: the top-left 2^(K-k) square of HL_k, LH_k, HH_k
//! (each block row-major)
//! ```
//!
//! [`feature_field`] computes the same numbers with an undecimated transform
//! in one pass; [`feature_field_reference`] is the literal per-pixel version.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterPair;
use crate::image::GrayImage;
use crate::wavelet::{check_divisible, wavedec2, WaveletPyramid};

/// Number of components in a `levels`-deep tree.
pub fn tree_dim(levels: usize) -> usize {
    1usize << (2 * levels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureField {
    width: usize,
    height: usize,
    dim: usize,
    levels: usize,
    data: Vec<f64>,
    lowfreq_mask: Vec<bool>,
}

impl FeatureField {
    pub fn new(
        width: usize,
        height: usize,
        dim: usize,
        levels: usize,
        data: Vec<f64>,
        lowfreq_mask: Vec<bool>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || dim == 0 {
            return Err(Error::Dimension(
                "feature field sides and dim must be positive".into(),
            ));
        }
        if data.len() != width * height * dim || lowfreq_mask.len() != dim {
            return Err(Error::Dimension(format!(
                "feature field {width}x{height}x{dim} got {} values and {} mask entries",
                data.len(),
                lowfreq_mask.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("feature field has non-finite entries".into()));
        }
        Ok(Self {
            width,
            height,
            dim,
            levels,
            data,
            lowfreq_mask,
        })
    }

    /// One-component field holding the raw intensities. No component is
    /// marked low-frequency, so weighting leaves it untouched.
    pub fn from_intensity(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            dim: 1,
            levels: 0,
            data: img.pixels().to_vec(),
            lowfreq_mask: vec![false],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Decomposition depth; 0 for intensity-only fields.
    pub fn levels(&self) -> usize {
        self.levels
    }
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
    pub fn lowfreq_mask(&self) -> &[bool] {
        &self.lowfreq_mask
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn vector(&self, pixel: usize) -> &[f64] {
        &self.data[pixel * self.dim..(pixel + 1) * self.dim]
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> &[f64] {
        self.vector(row * self.width + col)
    }

    pub fn vectors(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// Circular shift of the field: the vector at `(0, 0)` moves to `(dr, dc)`.
    pub fn roll(&self, dr: usize, dc: usize) -> Self {
        let (w, h, d) = (self.width, self.height, self.dim);
        let mut data = vec![0.0; self.data.len()];
        for r in 0..h {
            for c in 0..w {
                let dst = ((r + dr) % h) * w + (c + dc) % w;
                data[dst * d..(dst + 1) * d].copy_from_slice(self.at(r, c));
            }
        }
        Self {
            data,
            ..self.clone()
        }
    }

    /// Single component as an image.
    pub fn component(&self, index: usize) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |r, c| self.at(r, c)[index])
    }
}

/// Flattens the tree rooted at `(0, 0)`.
pub fn extract_first_tree(pyr: &WaveletPyramid) -> Vec<f64> {
    let levels = pyr.levels();
    let mut out = Vec::with_capacity(tree_dim(levels));
    let top = pyr.level(levels);
    out.push(pyr.approx().get(0, 0));
    out.push(top.hl.get(0, 0));
    out.push(top.lh.get(0, 0));
    out.push(top.hh.get(0, 0));
    for k in (1..levels).rev() {
        let side = 1usize << (levels - k);
        let d = pyr.level(k);
        for band in [&d.hl, &d.lh, &d.hh] {
            for r in 0..side {
                for c in 0..side {
                    out.push(band.get(r, c));
                }
            }
        }
    }
    out
}

/// Components from the four level-`K` bands come first in the tree.
fn tree_mask(levels: usize) -> Vec<bool> {
    let mut mask = vec![false; tree_dim(levels)];
    mask[..4].iter_mut().for_each(|m| *m = true);
    mask
}

/// Literal construction: one full decomposition per pixel.
pub fn feature_field_reference(
    img: &GrayImage,
    pair: &FilterPair,
    levels: usize,
) -> Result<FeatureField> {
    check_levels(img, levels)?;
    let (w, h) = (img.width(), img.height());
    let vectors: Result<Vec<Vec<f64>>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let shifted = img.roll_to_origin(i / w, i % w);
            Ok(extract_first_tree(&wavedec2(&shifted, pair, levels)?))
        })
        .collect();
    let data = vectors?.concat();
    FeatureField::new(w, h, tree_dim(levels), levels, data, tree_mask(levels))
}

fn check_levels(img: &GrayImage, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::Config(
            "wavelet features need at least one level; use FeatureField::from_intensity".into(),
        ));
    }
    check_divisible(img.width(), img.height(), levels)
}

/// Undecimated bands of one level, all at full image resolution.
struct Undecimated {
    ll: GrayImage,
    hl: GrayImage,
    lh: GrayImage,
    hh: GrayImage,
}

/// `out[t] = sum_m taps[m] * x[t + dilation * (origin - m)]` along rows.
fn filter_rows(img: &GrayImage, taps: &[f64], origin: usize, dilation: usize) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut px = vec![0.0; w * h];
    px.par_chunks_mut(w).enumerate().for_each(|(r, out)| {
        let row = &img.pixels()[r * w..(r + 1) * w];
        for (t, o) in out.iter_mut().enumerate() {
            let base = t as isize + (dilation * origin) as isize;
            let mut acc = 0.0;
            for (m, &tap) in taps.iter().enumerate() {
                acc += tap * row[(base - (dilation * m) as isize).rem_euclid(w as isize) as usize];
            }
            *o = acc;
        }
    });
    GrayImage::new(w, h, px).expect("shape preserved")
}

fn filter_cols(img: &GrayImage, taps: &[f64], origin: usize, dilation: usize) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut px = vec![0.0; w * h];
    px.par_chunks_mut(w).enumerate().for_each(|(t, out)| {
        let base = t as isize + (dilation * origin) as isize;
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (m, &tap) in taps.iter().enumerate() {
                let r = (base - (dilation * m) as isize).rem_euclid(h as isize) as usize;
                acc += tap * img.get(r, c);
            }
            *o = acc;
        }
    });
    GrayImage::new(w, h, px).expect("shape preserved")
}

fn undecimated_level(input: &GrayImage, pair: &FilterPair, dilation: usize) -> Undecimated {
    let o = pair.analysis_origin();
    let row_lo = filter_rows(input, pair.h0(), o, dilation);
    let row_hi = filter_rows(input, pair.h1(), o, dilation);
    Undecimated {
        ll: filter_cols(&row_lo, pair.h0(), o, dilation),
        lh: filter_cols(&row_lo, pair.h1(), o, dilation),
        hl: filter_cols(&row_hi, pair.h0(), o, dilation),
        hh: filter_cols(&row_hi, pair.h1(), o, dilation),
    }
}

/// Feature vectors for every pixel via an undecimated transform.
///
/// Level-`k` coefficient `(i, j)` of the image shifted by `(r, c)` equals the
/// undecimated level-`k` band at `(r + 2^k i, c + 2^k j)`, computed with the
/// same taps in the same order, so the result agrees with
/// [`feature_field_reference`] to rounding (in practice bit for bit).
pub fn feature_field(img: &GrayImage, pair: &FilterPair, levels: usize) -> Result<FeatureField> {
    check_levels(img, levels)?;
    let (w, h) = (img.width(), img.height());
    let dim = tree_dim(levels);

    let mut bands = Vec::with_capacity(levels);
    let mut current = img.clone();
    for k in 1..=levels {
        let level = undecimated_level(&current, pair, 1 << (k - 1));
        current = level.ll.clone();
        bands.push(level);
    }

    let mut data = vec![0.0; w * h * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, out)| {
        let (r, c) = (i / w, i % w);
        let top = &bands[levels - 1];
        out[0] = top.ll.get(r, c);
        out[1] = top.hl.get(r, c);
        out[2] = top.lh.get(r, c);
        out[3] = top.hh.get(r, c);
        let mut pos = 4;
        for k in (1..levels).rev() {
            let side = 1usize << (levels - k);
            let step = 1usize << k;
            let b = &bands[k - 1];
            for band in [&b.hl, &b.lh, &b.hh] {
                for a in 0..side {
                    let rr = (r + step * a) % h;
                    for bb in 0..side {
                        out[pos] = band.get(rr, (c + step * bb) % w);
                        pos += 1;
                    }
                }
            }
        }
    });
    FeatureField::new(w, h, dim, levels, data, tree_mask(levels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingMode {
    /// `sign(x) * |x|^w`
    #[default]
    SignedPower,
    /// `w * x`
    ScalarScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightingConfig {
    pub w: f64,
    pub mode: WeightingMode,
}

impl Default for WeightingConfig {
    fn default() -> Self {
        Self {
            w: 1.0,
            mode: WeightingMode::SignedPower,
        }
    }
}

impl WeightingConfig {
    pub fn new(w: f64, mode: WeightingMode) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Config(format!(
                "weighting parameter must be > 0, got {w}"
            )));
        }
        Ok(Self { w, mode })
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self.mode {
            WeightingMode::SignedPower => {
                let m = x.abs().powf(self.w);
                if x < 0.0 {
                    -m
                } else {
                    m
                }
            }
            WeightingMode::ScalarScale => self.w * x,
        }
    }
}

/// Reweights the low-frequency components. `w == 1` returns an exact copy.
pub fn apply_weighting(ff: &FeatureField, cfg: &WeightingConfig) -> Result<FeatureField> {
    if !(cfg.w > 0.0 && cfg.w.is_finite()) {
        return Err(Error::Config(format!(
            "weighting parameter must be > 0, got {}",
            cfg.w
        )));
    }
    let mut out = ff.clone();
    if cfg.w == 1.0 {
        return Ok(out);
    }
    let dim = ff.dim;
    let mask = &ff.lowfreq_mask;
    out.data.par_chunks_mut(dim).for_each(|v| {
        for (x, &low) in v.iter_mut().zip(mask) {
            if low {
                *x = cfg.apply(*x);
            }
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |r, c| {
            let x = ((r * 131 + c * 71 + r * c * 17) % 97) as f64;
            x / 97.0
        })
    }

    #[test]
    fn dims() {
        assert_eq!(tree_dim(1), 4);
        assert_eq!(tree_dim(3), 64);
        let pair = FilterPair::builtin("bio2").unwrap();
        let ff = feature_field(&noise(8, 8), &pair, 3).unwrap();
        assert_eq!(ff.dim(), 64);
        assert_eq!(ff.lowfreq_mask().iter().filter(|&&m| m).count(), 4);
        let ff = feature_field(&noise(8, 8), &pair, 1).unwrap();
        assert_eq!(ff.dim(), 4);
        assert!(ff.lowfreq_mask().iter().all(|&m| m));
    }

    #[test]
    fn origin_pixel_is_plain_tree() {
        let pair = FilterPair::builtin("bio1").unwrap();
        let img = noise(16, 8);
        let ff = feature_field(&img, &pair, 3).unwrap();
        let tree = extract_first_tree(&wavedec2(&img, &pair, 3).unwrap());
        assert_eq!(ff.at(0, 0), &tree[..]);
    }

    #[test]
    fn constant_image_constant_features() {
        let pair = FilterPair::builtin("canonical").unwrap();
        let ff = feature_field(&GrayImage::filled(16, 16, 0.5), &pair, 3).unwrap();
        let first = ff.vector(0).to_vec();
        assert!(ff.vectors().all(|v| v == &first[..]));
        assert!((first[0] - 4.0).abs() < 1e-12);
        assert!(first[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_image_zero_tree() {
        let pair = FilterPair::builtin("o1").unwrap();
        let tree = extract_first_tree(&wavedec2(&GrayImage::zeros(8, 8), &pair, 3).unwrap());
        assert_eq!(tree, vec![0.0; 64]);
    }

    #[test]
    fn levels_zero_rejected() {
        let pair = FilterPair::builtin("bio2").unwrap();
        assert!(feature_field(&noise(8, 8), &pair, 0).is_err());
        assert!(matches!(
            feature_field(&noise(12, 8), &pair, 3),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn weighting_examples() {
        let mask = vec![true, false];
        let ff = FeatureField::new(1, 1, 2, 1, vec![-3.0, 4.0], mask.clone()).unwrap();
        let p = apply_weighting(
            &ff,
            &WeightingConfig::new(2.0, WeightingMode::SignedPower).unwrap(),
        )
        .unwrap();
        assert_eq!(p.vector(0), &[-9.0, 4.0]);
        let ff = FeatureField::new(1, 1, 2, 1, vec![4.0, 4.0], mask).unwrap();
        let s = apply_weighting(
            &ff,
            &WeightingConfig::new(0.5, WeightingMode::ScalarScale).unwrap(),
        )
        .unwrap();
        assert_eq!(s.vector(0), &[2.0, 4.0]);
        for mode in [WeightingMode::SignedPower, WeightingMode::ScalarScale] {
            let id = apply_weighting(&ff, &WeightingConfig::new(1.0, mode).unwrap()).unwrap();
            assert_eq!(id, ff);
        }
        assert!(WeightingConfig::new(0.0, WeightingMode::SignedPower).is_err());
    }

    #[test]
    fn intensity_field_ignores_weighting() {
        let img = noise(4, 4);
        let ff = FeatureField::from_intensity(&img);
        let cfg = WeightingConfig::new(3.0, WeightingMode::SignedPower).unwrap();
        assert_eq!(apply_weighting(&ff, &cfg).unwrap(), ff);
    }
}
