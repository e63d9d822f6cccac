//! Two-phase active contours without edges on feature fields.
//!
//! The level set `phi` splits the image into foreground (`phi >= 0`) and
//! background. Each iteration recomputes the smoothed region means and takes
//! one explicit gradient step
//!
//! ```text
//! phi += dt * delta_eps(phi) * (mu * kappa - l1 * |F - m1|^2 + l2 * |F - m2|^2)
//! ```
//!
//! where `kappa` is the curvature of the level lines. With a one-component
//! field holding pixel intensities this is the classic scalar scheme.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::squared_distance;
use crate::error::{Error, Result};
use crate::features::FeatureField;
use crate::image::GrayImage;

/// Gradient-magnitude regulariser inside the curvature.
pub const CURVATURE_ETA: f64 = 1e-8;
const DEGENERATE_WEIGHT: f64 = 1e-12;

/// `0.5 * (1 + (2/pi) * atan(z / eps))`
#[inline]
pub fn regularized_heaviside(z: f64, eps: f64) -> f64 {
    0.5 * (1.0 + (2.0 / PI) * (z / eps).atan())
}

/// Derivative of [`regularized_heaviside`]: `(1/pi) * eps / (eps^2 + z^2)`.
#[inline]
pub fn regularized_delta(z: f64, eps: f64) -> f64 {
    (1.0 / PI) * eps / (eps * eps + z * z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    phi: GrayImage,
}

impl LevelSet {
    pub fn new(phi: GrayImage) -> Self {
        Self { phi }
    }

    pub fn phi(&self) -> &GrayImage {
        &self.phi
    }

    pub fn into_phi(self) -> GrayImage {
        self.phi
    }

    pub fn width(&self) -> usize {
        self.phi.width()
    }

    pub fn height(&self) -> usize {
        self.phi.height()
    }

    /// Foreground is `phi >= 0`.
    pub fn mask(&self) -> Vec<bool> {
        self.phi.pixels().iter().map(|&v| v >= 0.0).collect()
    }

    pub fn foreground_area(&self) -> usize {
        self.phi.pixels().iter().filter(|&&v| v >= 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Circle,
    Checkerboard,
}

impl std::str::FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Self::Circle),
            "checkerboard" => Ok(Self::Checkerboard),
            other => Err(Error::Config(format!("unknown init kind `{other}`"))),
        }
    }
}

/// Initial level sets.
///
/// `Circle` is the signed distance to a circle centred on pixel
/// `(height / 2, width / 2)`, positive inside; `radius` defaults to a third
/// of the shorter side. `Checkerboard` is `sin(pi r / 5) * sin(pi c / 5)`
/// (period 10 px); `radius` is ignored.
pub fn init_levelset(
    width: usize,
    height: usize,
    kind: InitKind,
    radius: Option<f64>,
) -> Result<LevelSet> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension("level set sides must be positive".into()));
    }
    let phi = match kind {
        InitKind::Circle => {
            let r0 = radius.unwrap_or(width.min(height) as f64 / 3.0);
            if !(r0 > 0.0) {
                return Err(Error::Config(format!(
                    "circle radius must be positive, got {r0}"
                )));
            }
            let (cy, cx) = ((height / 2) as f64, (width / 2) as f64);
            GrayImage::from_fn(width, height, |r, c| {
                r0 - (r as f64 - cy).hypot(c as f64 - cx)
            })
        }
        InitKind::Checkerboard => GrayImage::from_fn(width, height, |r, c| {
            (PI * r as f64 / 5.0).sin() * (PI * c as f64 / 5.0).sin()
        }),
    };
    Ok(LevelSet::new(phi))
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * n - 2 - i
    } else {
        i
    };
    j.clamp(0, n - 1) as usize
}

/// Central-difference gradient with mirrored borders.
fn gradient(phi: &GrayImage) -> (GrayImage, GrayImage) {
    let (w, h) = (phi.width(), phi.height());
    let at = |r: isize, c: isize| phi.get(reflect(r, h), reflect(c, w));
    let gx = GrayImage::from_fn(w, h, |r, c| {
        let (r, c) = (r as isize, c as isize);
        (at(r, c + 1) - at(r, c - 1)) / 2.0
    });
    let gy = GrayImage::from_fn(w, h, |r, c| {
        let (r, c) = (r as isize, c as isize);
        (at(r + 1, c) - at(r - 1, c)) / 2.0
    });
    (gx, gy)
}

/// `div(grad phi / |grad phi|)` with `|grad phi| = sqrt(phi_x^2 + phi_y^2 + eta)`.
pub fn curvature(phi: &GrayImage) -> GrayImage {
    let (w, h) = (phi.width(), phi.height());
    let (gx, gy) = gradient(phi);
    let mut nx = gx.clone();
    let mut ny = gy.clone();
    for ((x, y), (px, py)) in nx
        .pixels_mut()
        .iter_mut()
        .zip(ny.pixels_mut().iter_mut())
        .zip(gx.pixels().iter().zip(gy.pixels()))
    {
        let norm = (px * px + py * py + CURVATURE_ETA).sqrt();
        *x = px / norm;
        *y = py / norm;
    }
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
        let ri = r as isize;
        for (c, o) in row.iter_mut().enumerate() {
            let ci = c as isize;
            let dx = (nx.get(r, reflect(ci + 1, w)) - nx.get(r, reflect(ci - 1, w))) / 2.0;
            let dy = (ny.get(reflect(ri + 1, h), c) - ny.get(reflect(ri - 1, h), c)) / 2.0;
            *o = dx + dy;
        }
    });
    GrayImage::new(w, h, out).expect("shape preserved")
}

/// Heaviside-weighted means inside (`m1`) and outside (`m2`) the contour.
pub fn region_means(ff: &FeatureField, phi: &LevelSet, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_shape(ff, phi)?;
    let dim = ff.dim();
    let mut s1 = vec![0.0; dim];
    let mut s2 = vec![0.0; dim];
    let (mut w1, mut w2) = (0.0, 0.0);
    for (v, &p) in ff.vectors().zip(phi.phi().pixels()) {
        let hv = regularized_heaviside(p, eps);
        let hc = 1.0 - hv;
        w1 += hv;
        w2 += hc;
        for ((a, b), x) in s1.iter_mut().zip(s2.iter_mut()).zip(v) {
            *a += hv * x;
            *b += hc * x;
        }
    }
    if w1 < DEGENERATE_WEIGHT {
        return Err(Error::DegenerateRegion(format!(
            "foreground weight {w1:e} is empty"
        )));
    }
    if w2 < DEGENERATE_WEIGHT {
        return Err(Error::DegenerateRegion(format!(
            "background weight {w2:e} is empty"
        )));
    }
    s1.iter_mut().for_each(|a| *a /= w1);
    s2.iter_mut().for_each(|b| *b /= w2);
    Ok((s1, s2))
}

/// Plain means over a hard partition, or `None` if either side is empty.
pub fn mask_means(ff: &FeatureField, mask: &[bool]) -> Option<(Vec<f64>, Vec<f64>)> {
    let dim = ff.dim();
    let mut s1 = vec![0.0; dim];
    let mut s2 = vec![0.0; dim];
    let (mut n1, mut n2) = (0usize, 0usize);
    for (v, &inside) in ff.vectors().zip(mask) {
        let (s, n) = if inside {
            (&mut s1, &mut n1)
        } else {
            (&mut s2, &mut n2)
        };
        *n += 1;
        for (a, x) in s.iter_mut().zip(v) {
            *a += x;
        }
    }
    if n1 == 0 || n2 == 0 {
        return None;
    }
    s1.iter_mut().for_each(|a| *a /= n1 as f64);
    s2.iter_mut().for_each(|b| *b /= n2 as f64);
    Some((s1, s2))
}

fn check_shape(ff: &FeatureField, phi: &LevelSet) -> Result<()> {
    if ff.width() != phi.width() || ff.height() != phi.height() {
        return Err(Error::Dimension(format!(
            "feature field is {}x{} but level set is {}x{}",
            ff.width(),
            ff.height(),
            phi.width(),
            phi.height()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcweParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Length weight; `None` picks `0.1 * max_j |F_j - mean(F)|^2`.
    pub mu: Option<f64>,
    pub eps: f64,
    /// Time step; `None` picks `0.45 * eps / (mu + max |data force| + 1e-12)`
    /// from the initial contour.
    pub dt: Option<f64>,
    pub max_iter: usize,
    /// Stop once fewer than this fraction of pixels change sign ...
    pub stop_tol: f64,
    /// ... for this many consecutive iterations.
    pub patience: usize,
}

impl Default for AcweParams {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            mu: None,
            eps: 1.0,
            dt: None,
            max_iter: 1000,
            stop_tol: 1e-4,
            patience: 20,
        }
    }
}

impl AcweParams {
    fn validate(&self) -> Result<()> {
        let ok = self.lambda1 >= 0.0
            && self.lambda2 >= 0.0
            && self.mu.is_none_or(|m| m >= 0.0 && m.is_finite())
            && self.eps > 0.0
            && self.dt.is_none_or(|t| t > 0.0 && t.is_finite())
            && self.stop_tol >= 0.0
            && self.patience >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid active contour parameters {self:?}"
            )))
        }
    }
}

/// `0.1 * max_j |F_j - mean(F)|^2`
pub fn default_mu(ff: &FeatureField) -> f64 {
    let dim = ff.dim();
    let n = ff.pixel_count() as f64;
    let mut mean = vec![0.0; dim];
    for v in ff.vectors() {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    0.1 * ff
        .vectors()
        .map(|v| squared_distance(v, &mean))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcweResult {
    pub phi: LevelSet,
    pub mask: Vec<bool>,
    /// Means over the final mask. The smoothed means that drive the
    /// evolution stay biased by the Heaviside tails, so they are only
    /// reported when one side of the mask is empty.
    pub mean_inside: Vec<f64>,
    pub mean_outside: Vec<f64>,
    /// Energy of the level set before each iteration, plus the final one.
    pub energy_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub mu: f64,
    pub dt: f64,
}

/// Smoothed energy: data terms weighted by `H_eps(phi)` plus
/// `mu * sum delta_eps(phi) |grad phi|`.
pub fn energy(
    ff: &FeatureField,
    phi: &LevelSet,
    m1: &[f64],
    m2: &[f64],
    p: &AcweParams,
    mu: f64,
) -> f64 {
    let (gx, gy) = gradient(phi.phi());
    let mut e = 0.0;
    for (j, (v, &z)) in ff.vectors().zip(phi.phi().pixels()).enumerate() {
        let hv = regularized_heaviside(z, p.eps);
        let grad = (gx.pixels()[j].powi(2) + gy.pixels()[j].powi(2)).sqrt();
        e += p.lambda1 * squared_distance(v, m1) * hv
            + p.lambda2 * squared_distance(v, m2) * (1.0 - hv)
            + mu * regularized_delta(z, p.eps) * grad;
    }
    e
}

fn data_force(v: &[f64], m1: &[f64], m2: &[f64], p: &AcweParams) -> f64 {
    -p.lambda1 * squared_distance(v, m1) + p.lambda2 * squared_distance(v, m2)
}

pub fn acwe_w(ff: &FeatureField, init: &LevelSet, params: &AcweParams) -> Result<AcweResult> {
    acwe_w_observed(ff, init, params, |_, _| {})
}

/// [`acwe_w`] with a callback after every update of `phi`.
pub fn acwe_w_observed(
    ff: &FeatureField,
    init: &LevelSet,
    params: &AcweParams,
    mut observe: impl FnMut(usize, &LevelSet),
) -> Result<AcweResult> {
    params.validate()?;
    check_shape(ff, init)?;
    if init.phi().pixels().iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("initial level set is not finite".into()));
    }
    let n = ff.pixel_count();
    let eps = params.eps;
    let mu = params.mu.unwrap_or_else(|| default_mu(ff));

    let mut phi = init.clone();
    let (mut m1, mut m2) = region_means(ff, &phi, eps)?;
    let dt = match params.dt {
        Some(dt) => dt,
        None => {
            let max_force = ff
                .vectors()
                .map(|v| data_force(v, &m1, &m2, params).abs())
                .fold(0.0, f64::max);
            0.45 * eps / (mu + max_force + 1e-12)
        }
    };

    let mut trace = Vec::with_capacity(params.max_iter.min(4096) + 1);
    let mut iterations = 0;
    let mut converged = false;
    let mut quiet = 0;

    for it in 1..=params.max_iter {
        trace.push(energy(ff, &phi, &m1, &m2, params, mu));
        let kappa = curvature(phi.phi());
        let old = phi.phi().pixels();
        let mut next = vec![0.0; n];
        next.par_iter_mut().enumerate().for_each(|(j, out)| {
            let z = old[j];
            let force = mu * kappa.pixels()[j] + data_force(ff.vector(j), &m1, &m2, params);
            *out = z + dt * regularized_delta(z, eps) * force;
        });
        let changed = old
            .iter()
            .zip(&next)
            .filter(|(a, b)| (**a >= 0.0) != (**b >= 0.0))
            .count();
        phi = LevelSet::new(GrayImage::new(ff.width(), ff.height(), next)?);
        iterations = it;
        observe(it, &phi);
        (m1, m2) = region_means(ff, &phi, eps)?;

        if (changed as f64) < params.stop_tol * n as f64 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= params.patience {
            converged = true;
            break;
        }
    }
    trace.push(energy(ff, &phi, &m1, &m2, params, mu));
    let mask = phi.mask();
    if let Some(sharp) = mask_means(ff, &mask) {
        (m1, m2) = sharp;
    }

    Ok(AcweResult {
        mask,
        phi,
        mean_inside: m1,
        mean_outside: m2,
        energy_trace: trace,
        iterations,
        converged,
        mu,
        dt,
    })
}

/// Classic scalar scheme on raw intensities.
pub fn acwe_intensity(img: &GrayImage, init: &LevelSet, params: &AcweParams) -> Result<AcweResult> {
    acwe_w(&FeatureField::from_intensity(img), init, params)
}
