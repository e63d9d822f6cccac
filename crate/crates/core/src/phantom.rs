//! Synthetic test images with ground truth, and Otsu binarisation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::HardLabeling;
use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhantomKind {
    /// Non-overlapping bright disks on a dark background.
    Minefield {
        mines: usize,
        radius: f64,
        background: f64,
        foreground: f64,
    },
    /// One centred bright disk.
    Disk {
        radius: f64,
        background: f64,
        foreground: f64,
    },
    /// A smooth low-contrast blob below a horizontal band of vertical stripes.
    Composite {
        background: f64,
        /// Peak height of the blob above the background.
        blob_contrast: f64,
        blob_radius: f64,
        /// Width of the blob's soft edge (logistic scale, pixels).
        blob_softness: f64,
        /// Mean level of the band relative to the background.
        texture_offset: f64,
        /// Stripe amplitude around the band mean.
        texture_amplitude: f64,
        texture_period: f64,
        /// Band rows as fractions of the height, `[start, end)`.
        band_start: f64,
        band_end: f64,
    },
}

impl PhantomKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Minefield { .. } => "minefield",
            Self::Disk { .. } => "disk",
            Self::Composite { .. } => "composite",
        }
    }

    pub fn default_minefield() -> Self {
        Self::Minefield {
            mines: 5,
            radius: 6.0,
            background: 0.3,
            foreground: 0.7,
        }
    }

    pub fn default_disk() -> Self {
        Self::Disk {
            radius: 16.0,
            background: 0.2,
            foreground: 0.8,
        }
    }

    pub fn default_composite() -> Self {
        Self::Composite {
            background: 0.4,
            blob_contrast: 0.4,
            blob_radius: 12.0,
            blob_softness: 1.5,
            texture_offset: -0.25,
            texture_amplitude: 0.1,
            texture_period: 2.0,
            band_start: 0.125,
            band_end: 0.375,
        }
    }

    pub fn default_for(name: &str) -> Result<Self> {
        match name {
            "minefield" => Ok(Self::default_minefield()),
            "disk" => Ok(Self::default_disk()),
            "composite" => Ok(Self::default_composite()),
            other => Err(Error::Config(format!("unknown phantom kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    #[serde(flatten)]
    pub kind: PhantomKind,
    pub width: usize,
    pub height: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub image: GrayImage,
    pub truth: HardLabeling,
    /// Region name per truth label.
    pub regions: Vec<&'static str>,
}

impl LabeledImage {
    /// Truth mask of the named region.
    pub fn region_mask(&self, name: &str) -> Option<Vec<bool>> {
        let k = self.regions.iter().position(|&r| r == name)?;
        Some(self.truth.mask_of(k))
    }
}

fn inside(r: usize, c: usize, cy: f64, cx: f64, radius: f64) -> bool {
    let (dy, dx) = (r as f64 - cy, c as f64 - cx);
    dy * dy + dx * dx <= radius * radius
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<LabeledImage> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(Error::Dimension("phantom sides must be positive".into()));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::Config(format!(
            "noise sigma must be >= 0, got {}",
            spec.noise_sigma
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let (clean, labels, regions) = match spec.kind {
        PhantomKind::Minefield {
            mines,
            radius,
            background,
            foreground,
        } => {
            if !(radius > 0.0) || 2.0 * radius + 1.0 > w.min(h) as f64 {
                return Err(Error::Config(format!(
                    "mine radius {radius} does not fit {w}x{h}"
                )));
            }
            let centers = place_disks(&mut rng, w, h, mines, radius)?;
            let labels: Vec<usize> = (0..w * h)
                .map(|i| {
                    let (r, c) = (i / w, i % w);
                    centers.iter().any(|&(cy, cx)| inside(r, c, cy, cx, radius)) as usize
                })
                .collect();
            let img = GrayImage::from_fn(w, h, |r, c| {
                if labels[r * w + c] == 1 {
                    foreground
                } else {
                    background
                }
            });
            (img, labels, vec!["background", "mine"])
        }
        PhantomKind::Disk {
            radius,
            background,
            foreground,
        } => {
            if !(radius > 0.0) {
                return Err(Error::Config("disk radius must be positive".into()));
            }
            let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
            let labels: Vec<usize> = (0..w * h)
                .map(|i| inside(i / w, i % w, cy, cx, radius) as usize)
                .collect();
            let img = GrayImage::from_fn(w, h, |r, c| {
                if labels[r * w + c] == 1 {
                    foreground
                } else {
                    background
                }
            });
            (img, labels, vec!["background", "disk"])
        }
        PhantomKind::Composite {
            background,
            blob_contrast,
            blob_radius,
            blob_softness,
            texture_offset,
            texture_amplitude,
            texture_period,
            band_start,
            band_end,
        } => {
            if !(0.0..band_end).contains(&band_start) || band_end > 1.0 || !(texture_period > 0.0) {
                return Err(Error::Config("invalid composite band layout".into()));
            }
            if !(blob_radius > 0.0 && blob_softness > 0.0) {
                return Err(Error::Config("invalid composite blob".into()));
            }
            let (r0, r1) = (
                (band_start * h as f64).round() as usize,
                (band_end * h as f64).round() as usize,
            );
            // blob centred in the part of the image below the band
            let cy = (r1 as f64 + h as f64) / 2.0;
            let cx = w as f64 / 2.0;
            if cy - blob_radius < r1 as f64 {
                return Err(Error::Config(
                    "composite blob overlaps the textured band".into(),
                ));
            }
            let mut labels = vec![0usize; w * h];
            let img = GrayImage::from_fn(w, h, |r, c| {
                let i = r * w + c;
                if (r0..r1).contains(&r) {
                    labels[i] = 1;
                    let phase = 2.0 * std::f64::consts::PI * c as f64 / texture_period;
                    // cos keeps period-2 stripes at full amplitude
                    background + texture_offset + texture_amplitude * phase.cos()
                } else {
                    let d = (r as f64 - cy).hypot(c as f64 - cx);
                    let profile = 1.0 / (1.0 + ((d - blob_radius) / blob_softness).exp());
                    if d <= blob_radius {
                        labels[i] = 2;
                    }
                    background + blob_contrast * profile
                }
            });
            (img, labels, vec!["background", "texture", "blob"])
        }
    };

    let image = if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        let noisy = clean
            .pixels()
            .iter()
            .map(|&v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
            .collect();
        GrayImage::new(w, h, noisy)?
    } else {
        clean.map(|v| v.clamp(0.0, 1.0))
    };
    let truth = HardLabeling::new(w, h, regions.len(), labels)?;
    Ok(LabeledImage {
        image,
        truth,
        regions,
    })
}

/// Disk centres keep the whole disk inside the image and a one-pixel gap
/// between disks.
fn place_disks(
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
    n: usize,
    radius: f64,
) -> Result<Vec<(f64, f64)>> {
    let attempts = 10 * n;
    let lo = radius.ceil();
    let (hi_y, hi_x) = (
        h as f64 - 1.0 - radius.ceil(),
        w as f64 - 1.0 - radius.ceil(),
    );
    let min_gap = 2.0 * radius + 1.0;
    let mut centers: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut tries = 0;
    while centers.len() < n {
        if tries >= attempts {
            return Err(Error::Placement {
                requested: n,
                attempts,
            });
        }
        tries += 1;
        let cy = rng.random_range(lo..=hi_y).round();
        let cx = rng.random_range(lo..=hi_x).round();
        if centers
            .iter()
            .all(|&(y, x)| (y - cy).hypot(x - cx) >= min_gap)
        {
            centers.push((cy, cx));
        }
    }
    Ok(centers)
}

/// Index of the last bin of the lower class, maximising between-class
/// variance; the lowest index wins ties. `None` when fewer than two bins are
/// occupied.
pub fn otsu_threshold_from_histogram(hist: &[u64]) -> Option<usize> {
    if hist.iter().filter(|&&n| n > 0).count() < 2 {
        return None;
    }
    let total: f64 = hist.iter().map(|&n| n as f64).sum();
    let weighted: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &n)| i as f64 * n as f64)
        .sum();
    let (mut w0, mut s0) = (0.0, 0.0);
    let mut best = (None, f64::NEG_INFINITY);
    for (k, &n) in hist.iter().enumerate().take(hist.len() - 1) {
        w0 += n as f64;
        s0 += k as f64 * n as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = s0 / w0 - (weighted - s0) / w1;
        let between = w0 * w1 * diff * diff;
        if between > best.1 {
            best = (Some(k), between);
        }
    }
    best.0
}

#[inline]
fn bin_of(v: f64, bins: usize) -> usize {
    ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)
}

/// Otsu binarisation of a `[0, 1]` image.
///
/// Returns the foreground mask and the threshold, which is the upper edge of
/// the last background bin: foreground pixels are those with
/// `intensity >= threshold`.
pub fn otsu_binarize(img: &GrayImage, bins: usize) -> Result<(Vec<bool>, f64)> {
    if bins < 2 {
        return Err(Error::Config(format!(
            "Otsu needs at least 2 bins, got {bins}"
        )));
    }
    let mut hist = vec![0u64; bins];
    for &v in img.pixels() {
        hist[bin_of(v, bins)] += 1;
    }
    let k = otsu_threshold_from_histogram(&hist).ok_or(Error::ConstantImage)?;
    let mask = img.pixels().iter().map(|&v| bin_of(v, bins) > k).collect();
    Ok((mask, (k + 1) as f64 / bins as f64))
}
