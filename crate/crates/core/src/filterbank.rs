//! Two-channel filter banks.
//!
//! A [`FilterPair`] is specified by its analysis low-pass `h0` and synthesis
//! low-pass `f0`. The high-pass filters are derived by modulation:
//!
//! ```text
//! h1[n] = (-1)^n       * f0[n]
//! f1[n] = (-1)^(n + 1) * h0[n]
//! ```
//!
//! so that `H1(z) = F0(-z)` and `F1(z) = -H0(-z)`, which cancels aliasing for
//! any low-pass pair. For an orthogonal pair (`f0` the reversal of `h0`) this
//! is the usual alternating flip of `h0`.
//!
//! Filters are applied as periodic convolutions. Analysis keeps
//! `c[n] = sum_m h[m] x[2n + a - m]` and synthesis scatters
//! `y[2n + m - s] += c[n] f[m]`, where `a` is the analysis origin and `s` the
//! synthesis origin. With `a + s = (len(h0) + len(f0) - 2) / 2` the round
//! trip has zero delay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for pairs printed at four decimal places.
pub const ROUNDED_TOLERANCE: f64 = 5e-3;
/// Tolerance for pairs given to full double precision.
pub const EXACT_TOLERANCE: f64 = 1e-10;

const VALIDATION_SEED: u64 = 0x5EED_F11E;
const VALIDATION_LENGTH: usize = 64;

/// 8/8 orthogonal analysis low-pass, as printed.
const O1_H0: [f64; 8] = [
    0.2304, 0.7148, 0.6309, -0.0280, -0.1870, 0.0308, -0.0329, -0.0106,
];
const O1_F0: [f64; 8] = [
    -0.0106, 0.0329, 0.0308, -0.1870, -0.0280, 0.6309, 0.7148, 0.2304,
];
const BIO1_H0: [f64; 6] = [-0.1291, 0.0477, 0.7885, 0.7885, 0.0477, -0.1291];
const BIO1_F0: [f64; 10] = [
    0.0189, 0.0070, -0.0672, 0.1334, 0.6151, 0.6151, 0.1334, -0.0672, 0.0070, 0.0189,
];
const BIO2_H0: [f64; 9] = [
    -0.0161, -0.0424, 0.0680, 0.3960, 0.6033, 0.3960, 0.0680, -0.0424, -0.0161,
];
const BIO2_F0: [f64; 7] = [0.1513, -0.3980, 0.2022, 1.5032, 0.2022, -0.3980, 0.1513];

/// Daubechies 8-tap scaling filter to double precision.
const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

/// Names accepted by [`FilterPair::builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["o1", "o1-corrected", "bio1", "bio2", "canonical"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub max_error: f64,
    pub gain: f64,
    pub delay: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    name: String,
    h0: Vec<f64>,
    f0: Vec<f64>,
    h1: Vec<f64>,
    f1: Vec<f64>,
    analysis_origin: usize,
    synthesis_origin: usize,
    tolerance: f64,
    validation: ValidationReport,
}

/// On-disk form of a user-supplied pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterSpec {
    pub name: String,
    pub h0: Vec<f64>,
    pub f0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl FilterPair {
    /// Builds a pair from its low-pass filters, derives the high-pass
    /// filters, and runs the reconstruction check. A pair that fails the
    /// check is still returned; inspect [`FilterPair::validation`].
    pub fn new(
        name: impl Into<String>,
        h0: Vec<f64>,
        f0: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        let name = name.into();
        for (label, taps) in [("h0", &h0), ("f0", &f0)] {
            if taps.len() < 2 {
                return Err(Error::Config(format!(
                    "filter `{name}`: {label} needs at least 2 taps, got {}",
                    taps.len()
                )));
            }
            if taps.iter().any(|t| !t.is_finite()) {
                return Err(Error::Config(format!(
                    "filter `{name}`: {label} has a non-finite tap"
                )));
            }
        }
        if !(h0.len() + f0.len()).is_multiple_of(2) {
            return Err(Error::Config(format!(
                "filter `{name}`: lengths {} and {} have different parity, so the \
                 reconstruction delay is not an integer",
                h0.len(),
                f0.len()
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Config(format!(
                "filter `{name}`: tolerance must be positive"
            )));
        }
        let (h1, f1) = derive_highpass(&h0, &f0);
        let analysis_origin = h0.len() / 2;
        let synthesis_origin = (h0.len() + f0.len() - 2) / 2 - analysis_origin;
        let mut pair = Self {
            name,
            h0,
            f0,
            h1,
            f1,
            analysis_origin,
            synthesis_origin,
            tolerance,
            validation: ValidationReport {
                max_error: f64::NAN,
                gain: f64::NAN,
                delay: 0,
                passed: false,
            },
        };
        let length = VALIDATION_LENGTH.max(2 * pair.max_len());
        pair.validation = check_perfect_reconstruction(&pair, length + length % 2, tolerance)?;
        Ok(pair)
    }

    /// Looks up one of the [`BUILTIN_NAMES`].
    ///
    /// `o1`, `bio1` and `bio2` carry the four-decimal coefficients verbatim.
    /// `o1-corrected` flips the sign of the seventh `h0` tap to `+0.0329`,
    /// which matches both the printed `f0` and the canonical filter.
    /// `canonical` is the double-precision Daubechies 8-tap pair.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "o1" => Self::new(name, O1_H0.to_vec(), O1_F0.to_vec(), ROUNDED_TOLERANCE),
            "o1-corrected" => {
                let mut h0 = O1_H0.to_vec();
                h0[6] = -h0[6];
                Self::new(name, h0, O1_F0.to_vec(), ROUNDED_TOLERANCE)
            }
            "bio1" => Self::new(name, BIO1_H0.to_vec(), BIO1_F0.to_vec(), ROUNDED_TOLERANCE),
            "bio2" => Self::new(name, BIO2_H0.to_vec(), BIO2_F0.to_vec(), ROUNDED_TOLERANCE),
            "canonical" => {
                let f0 = DB4.iter().rev().copied().collect();
                Self::new(name, DB4.to_vec(), f0, EXACT_TOLERANCE)
            }
            other => Err(Error::Name(other.to_string())),
        }
    }

    pub fn from_spec(spec: FilterSpec) -> Result<Self> {
        let tol = spec.tolerance.unwrap_or(ROUNDED_TOLERANCE);
        Self::new(spec.name, spec.h0, spec.f0, tol)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FilterSpec = serde_json::from_str(text).map_err(|e| Error::Format {
            format: "filter JSON",
            offset: 0,
            message: e.to_string(),
        })?;
        Self::from_spec(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn h0(&self) -> &[f64] {
        &self.h0
    }
    pub fn f0(&self) -> &[f64] {
        &self.f0
    }
    pub fn h1(&self) -> &[f64] {
        &self.h1
    }
    pub fn f1(&self) -> &[f64] {
        &self.f1
    }
    pub fn analysis_origin(&self) -> usize {
        self.analysis_origin
    }
    pub fn synthesis_origin(&self) -> usize {
        self.synthesis_origin
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }
    pub fn is_validated(&self) -> bool {
        self.validation.passed
    }

    pub fn max_len(&self) -> usize {
        self.h0.len().max(self.f0.len())
    }

    /// One level of periodic analysis on a 1-D signal of even length.
    /// Returns `(low, high)`, each half as long.
    pub fn analyze(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let half = x.len() / 2;
        let mut lo = vec![0.0; half];
        let mut hi = vec![0.0; half];
        for n in 0..half {
            lo[n] = self.analysis_tap(x, &self.h0, n);
            hi[n] = self.analysis_tap(x, &self.h1, n);
        }
        (lo, hi)
    }

    /// `sum_m taps[m] * x[2n + origin - m]`, periodic.
    #[inline]
    pub(crate) fn analysis_tap(&self, x: &[f64], taps: &[f64], n: usize) -> f64 {
        let len = x.len() as isize;
        let base = (2 * n + self.analysis_origin) as isize;
        let mut acc = 0.0;
        for (m, &t) in taps.iter().enumerate() {
            acc += t * x[(base - m as isize).rem_euclid(len) as usize];
        }
        acc
    }

    /// Inverse of [`FilterPair::analyze`].
    pub fn synthesize(&self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        assert_eq!(lo.len(), hi.len(), "sub-band lengths differ");
        let len = 2 * lo.len();
        let mut y = vec![0.0; len];
        self.scatter(&mut y, lo, &self.f0);
        self.scatter(&mut y, hi, &self.f1);
        y
    }

    fn scatter(&self, y: &mut [f64], coeffs: &[f64], taps: &[f64]) {
        let len = y.len() as isize;
        for (n, &c) in coeffs.iter().enumerate() {
            let base = 2 * n as isize - self.synthesis_origin as isize;
            for (m, &t) in taps.iter().enumerate() {
                y[(base + m as isize).rem_euclid(len) as usize] += c * t;
            }
        }
    }
}

/// Modulated high-pass filters `(h1, f1)` for the low-pass pair `(h0, f0)`.
pub fn derive_highpass(h0: &[f64], f0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let h1 = f0.iter().enumerate().map(|(n, &v)| sign(n) * v).collect();
    let f1 = h0.iter().enumerate().map(|(n, &v)| -sign(n) * v).collect();
    (h1, f1)
}

/// Runs one periodic analysis/synthesis round trip on a fixed pseudorandom
/// signal and fits `y ≈ gain * roll(x, delay)`.
///
/// A pair whose best-fitting gain is (numerically) zero never passes.
pub fn check_perfect_reconstruction(
    pair: &FilterPair,
    signal_length: usize,
    tolerance: f64,
) -> Result<ValidationReport> {
    if !signal_length.is_multiple_of(2) || signal_length < 2 * pair.max_len() {
        return Err(Error::Config(format!(
            "validation signal length {signal_length} must be even and at least {}",
            2 * pair.max_len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let x: Vec<f64> = (0..signal_length)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let (lo, hi) = pair.analyze(&x);
    let y = pair.synthesize(&lo, &hi);

    let energy: f64 = x.iter().map(|v| v * v).sum();
    let mut best = ValidationReport {
        max_error: f64::INFINITY,
        gain: 0.0,
        delay: 0,
        passed: false,
    };
    for delay in 0..signal_length {
        let shifted = |t: usize| x[(t + signal_length - delay) % signal_length];
        let gain = (0..signal_length).map(|t| y[t] * shifted(t)).sum::<f64>() / energy;
        let max_error = (0..signal_length)
            .map(|t| (y[t] - gain * shifted(t)).abs())
            .fold(0.0, f64::max);
        if max_error < best.max_error {
            best = ValidationReport {
                max_error,
                gain,
                delay,
                passed: false,
            };
        }
    }
    best.passed = best.max_error <= tolerance && best.gain.abs() > 1e-6 && best.gain.is_finite();
    Ok(best)
}
