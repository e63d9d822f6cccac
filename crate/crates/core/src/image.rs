//! Dense row-major real-valued rasters.
//!
//! [`GrayImage`] doubles as the matrix type for wavelet sub-bands and
//! level-set functions; all of them are plain `height × width` grids.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image sides must be positive, got {width}x{height}"
            )));
        }
        if width * height != pixels.len() {
            return Err(Error::Dimension(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("pixel {i} is not finite")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image sides must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image sides must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    /// Periodic lookup; any integer coordinate is wrapped into the grid.
    #[inline]
    pub fn get_wrapped(&self, row: isize, col: isize) -> f64 {
        let r = row.rem_euclid(self.height as isize) as usize;
        let c = col.rem_euclid(self.width as isize) as usize;
        self.get(r, c)
    }

    /// Circular shift such that pixel `(dr, dc)` of `self` lands at `(0, 0)`.
    pub fn roll_to_origin(&self, dr: usize, dc: usize) -> Self {
        Self::from_fn(self.width, self.height, |r, c| {
            self.get((r + dr) % self.height, (c + dc) % self.width)
        })
    }

    /// Circular shift such that pixel `(0, 0)` of `self` lands at `(dr, dc)`.
    pub fn roll(&self, dr: usize, dc: usize) -> Self {
        let h = self.height;
        let w = self.width;
        self.roll_to_origin((h - dr % h) % h, (w - dc % w) % w)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copies the `h × w` block whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Self> {
        if row + height > self.height || col + width > self.width || width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "crop {width}x{height}+{col}+{row} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Self::from_fn(width, height, |r, c| {
            self.get(row + r, col + c)
        }))
    }

    /// Symmetric (edge-including mirror) padding; out-of-range indices
    /// reflect as `-1 -> 0`, `n -> n-1`.
    pub fn pad_symmetric(&self, top: usize, bottom: usize, left: usize, right: usize) -> Self {
        let w = self.width + left + right;
        let h = self.height + top + bottom;
        Self::from_fn(w, h, |r, c| {
            let sr = symmetric_index(r as isize - top as isize, self.height);
            let sc = symmetric_index(c as isize - left as isize, self.width);
            self.get(sr, sc)
        })
    }
}

fn symmetric_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}
