//! Feature preparation shared by the segmentation front-ends.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{apply_weighting, feature_field, tree_dim, FeatureField, WeightingConfig};
use crate::filterbank::FilterPair;
use crate::image::GrayImage;

/// Which pixel a wavelet tree is attributed to.
///
/// Component `i` of the first tree of the image shifted by `(r, c)` is a
/// filter response whose support midpoint sits at `(r, c) + offset_i`, see
/// [`component_offsets`]. The offsets differ between components (level-`k`
/// blocks fan out over `2^k` pixel strides, and even-length filters add a
/// half-sample lag per stage). `Centered` moves every component plane by its
/// own offset, rounded half down, so each vector holds responses centred on
/// its pixel. `Corner` keeps the literal per-shift trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeAnchor {
    Corner,
    #[default]
    Centered,
}

/// `(row, col)` support midpoint of each tree component relative to the
/// shift that produced it, in tree order.
pub fn component_offsets(pair: &FilterPair, levels: usize) -> Vec<(f64, f64)> {
    let o = pair.analysis_origin() as f64;
    let lo = o - (pair.h0().len() as f64 - 1.0) / 2.0;
    let hi = o - (pair.h1().len() as f64 - 1.0) / 2.0;
    // low chain through k levels; level-k high-pass after k - 1 low stages
    let low = |k: usize| ((1usize << k) - 1) as f64 * lo;
    let high = |k: usize| low(k - 1) + (1usize << (k - 1)) as f64 * hi;

    let mut out = Vec::with_capacity(tree_dim(levels));
    let top = levels;
    out.push((low(top), low(top)));
    out.push((low(top), high(top)));
    out.push((high(top), low(top)));
    out.push((high(top), high(top)));
    for k in (1..levels).rev() {
        let side = 1usize << (levels - k);
        let step = (1usize << k) as f64;
        for (row, col) in [(low(k), high(k)), (high(k), low(k)), (high(k), high(k))] {
            for a in 0..side {
                for b in 0..side {
                    out.push((row + step * a as f64, col + step * b as f64));
                }
            }
        }
    }
    out
}

fn round_half_down(x: f64) -> isize {
    (x - 0.5).ceil() as isize
}

/// Moves each component plane so its responses sit on the pixels they are
/// centred on.
pub fn center_trees(ff: &FeatureField, pair: &FilterPair) -> Result<FeatureField> {
    let (w, h, d) = (ff.width(), ff.height(), ff.dim());
    if d != tree_dim(ff.levels()) || ff.levels() == 0 {
        return Err(Error::Dimension(format!(
            "field of dimension {d} is not a {}-level tree field",
            ff.levels()
        )));
    }
    let shifts: Vec<(usize, usize)> = component_offsets(pair, ff.levels())
        .into_iter()
        .map(|(r, c)| {
            (
                round_half_down(r).rem_euclid(h as isize) as usize,
                round_half_down(c).rem_euclid(w as isize) as usize,
            )
        })
        .collect();
    let src = ff.data();
    let mut data = vec![0.0; src.len()];
    data.par_chunks_mut(d).enumerate().for_each(|(j, out)| {
        let (r, c) = (j / w, j % w);
        for (i, (o, &(dr, dc))) in out.iter_mut().zip(&shifts).enumerate() {
            // the response centred on (r, c) came from the shift (r, c) - offset
            let sr = (r + h - dr) % h;
            let sc = (c + w - dc) % w;
            *o = src[(sr * w + sc) * d + i];
        }
    });
    FeatureField::new(w, h, d, ff.levels(), data, ff.lowfreq_mask().to_vec())
}

impl std::str::FromStr for TreeAnchor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corner" => Ok(Self::Corner),
            "centered" | "center" => Ok(Self::Centered),
            other => Err(Error::Config(format!("unknown tree anchor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// 0 selects raw intensities.
    pub levels: usize,
    pub weighting: WeightingConfig,
    pub anchor: TreeAnchor,
}

impl FeatureSpec {
    pub fn intensity() -> Self {
        Self {
            levels: 0,
            weighting: WeightingConfig::default(),
            anchor: TreeAnchor::default(),
        }
    }

    pub fn wavelet(levels: usize, weighting: WeightingConfig) -> Self {
        Self {
            levels,
            weighting,
            anchor: TreeAnchor::default(),
        }
    }
}

/// Image → (anchored) wavelet feature field → weighting.
pub fn build_features(
    img: &GrayImage,
    pair: &FilterPair,
    spec: &FeatureSpec,
) -> Result<FeatureField> {
    if spec.levels == 0 {
        return Ok(FeatureField::from_intensity(img));
    }
    let ff = feature_field(img, pair, spec.levels)?;
    let ff = match spec.anchor {
        TreeAnchor::Corner => ff,
        TreeAnchor::Centered => center_trees(&ff, pair)?,
    };
    apply_weighting(&ff, &spec.weighting)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_follow_filter_geometry() {
        let pair = FilterPair::builtin("bio1").unwrap();
        let o = pair.analysis_origin() as f64;
        let lo = o - (pair.h0().len() as f64 - 1.0) / 2.0;
        let hi = o - (pair.h1().len() as f64 - 1.0) / 2.0;
        let off = component_offsets(&pair, 3);
        assert_eq!(off.len(), 64);
        assert_eq!(off[0], (7.0 * lo, 7.0 * lo));
        // first HL_1 entry, then the last HH_1 entry three strides further on
        assert_eq!(off[16], (lo, hi));
        assert_eq!(off[63], (hi + 6.0, hi + 6.0));
        // the level-1 row block of HL_1 is centred where LL_3 is
        let mean_row = off[16..32].iter().map(|p| p.0).sum::<f64>() / 16.0;
        assert_eq!(mean_row, off[0].0);
    }

    #[test]
    fn odd_filter_coarse_band_is_centred() {
        let pair = FilterPair::builtin("bio2").unwrap();
        let off = component_offsets(&pair, 3);
        assert_eq!(off[0], (0.0, 0.0));
        assert_eq!(off[1], (0.0, 4.0));
    }

    #[test]
    fn centring_impulse_peaks_at_impulse() {
        let img = GrayImage::from_fn(32, 32, |r, c| if (r, c) == (16, 16) { 1.0 } else { 0.0 });
        for name in ["bio1", "bio2"] {
            let pair = FilterPair::builtin(name).unwrap();
            let spec = FeatureSpec::wavelet(2, WeightingConfig::default());
            let ff = build_features(&img, &pair, &spec).unwrap();
            let ll = ff.component(0);
            let mut best = (0, 0, f64::MIN);
            for r in 0..32 {
                for c in 0..32 {
                    if ll.get(r, c) > best.2 {
                        best = (r, c, ll.get(r, c));
                    }
                }
            }
            assert!(
                best.0.abs_diff(16) <= 1 && best.1.abs_diff(16) <= 1,
                "{name}: {best:?}"
            );
        }
    }

    #[test]
    fn corner_anchor_is_literal() {
        let img = GrayImage::from_fn(16, 16, |r, c| ((r * 3 + c * 5) % 7) as f64);
        let pair = FilterPair::builtin("bio1").unwrap();
        let mut spec = FeatureSpec::wavelet(2, WeightingConfig::default());
        spec.anchor = TreeAnchor::Corner;
        let got = build_features(&img, &pair, &spec).unwrap();
        assert_eq!(got, feature_field(&img, &pair, 2).unwrap());
    }

    #[test]
    fn centring_preserves_component_values() {
        let img = GrayImage::from_fn(16, 16, |r, c| ((r * 7 + c * 3) % 11) as f64);
        let pair = FilterPair::builtin("bio2").unwrap();
        let raw = feature_field(&img, &pair, 2).unwrap();
        let centred = center_trees(&raw, &pair).unwrap();
        for i in 0..raw.dim() {
            let mut a = raw.component(i).pixels().to_vec();
            let mut b = centred.component(i).pixels().to_vec();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
    }
}
