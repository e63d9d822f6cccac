//! K-means and fuzzy C-means over feature fields.
//!
//! Both minimise a sum of squared Euclidean distances between pixel feature
//! vectors and class centroids: hard K-means with one-hot memberships, FCM
//! with memberships `u` on the simplex raised to the fuzzifier `q`. An
//! intensity-only field (`dim == 1`) gives the conventional algorithms.
//!
//! Seeding is k-means++ driven by `ChaCha8Rng::seed_from_u64(seed)`:
//!
//! 1. the first centroid is pixel `rng.random_range(0..n)`;
//! 2. each further centroid is drawn with probability proportional to the
//!    squared distance to the nearest chosen centroid: `r = rng.random::<f64>()
//!    * total` and the first pixel whose running sum exceeds `r` wins. When all
//!    distances are zero a uniform `rng.random_range(0..n)` is used instead.
//!
//! Cross-pixel sums always run in pixel order so results do not depend on the
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureField;

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardLabeling {
    width: usize,
    height: usize,
    classes: usize,
    labels: Vec<usize>,
}

impl HardLabeling {
    pub fn new(width: usize, height: usize, classes: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} labeling needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        if classes == 0 {
            return Err(Error::Config("labeling needs at least one class".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::Config(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        Ok(Self {
            width,
            height,
            classes,
            labels,
        })
    }

    /// Two-class labeling from a mask (`true` is class 1).
    pub fn from_mask(width: usize, height: usize, mask: &[bool]) -> Result<Self> {
        Self::new(width, height, 2, mask.iter().map(|&m| m as usize).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn classes(&self) -> usize {
        self.classes
    }
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Pixels carrying class `k`.
    pub fn mask_of(&self, k: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == k).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftMembership {
    classes: usize,
    q: f64,
    values: Vec<f64>,
}

impl SoftMembership {
    pub fn new(classes: usize, q: f64, values: Vec<f64>) -> Result<Self> {
        if classes == 0 || !values.len().is_multiple_of(classes) {
            return Err(Error::Dimension(format!(
                "{} membership values do not split into {classes} classes",
                values.len()
            )));
        }
        Ok(Self { classes, q, values })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn pixel_count(&self) -> usize {
        self.values.len() / self.classes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn row(&self, pixel: usize) -> &[f64] {
        &self.values[pixel * self.classes..(pixel + 1) * self.classes]
    }

    /// Largest `|sum_k u_jk - 1|` over pixels.
    pub fn max_normalization_error(&self) -> f64 {
        self.values
            .chunks_exact(self.classes)
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroids {
    dim: usize,
    data: Vec<f64>,
}

impl Centroids {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "{} centroid values do not split into vectors of length {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("centroids must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("centroids have mixed lengths".into()));
        }
        Self::new(dim, vectors.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn classes(&self) -> usize {
        self.data.len() / self.dim
    }
    #[inline]
    pub fn get(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }
    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }
    pub fn to_vectors(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labeling: HardLabeling,
    /// Present for FCM only.
    pub membership: Option<SoftMembership>,
    pub centroids: Centroids,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl ClusterResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub classes: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl KMeansParams {
    pub fn new(classes: usize, seed: u64) -> Self {
        Self {
            classes,
            max_iter: 300,
            tol: 1e-6,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmParams {
    pub classes: usize,
    pub q: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl FcmParams {
    pub fn new(classes: usize, seed: u64) -> Self {
        Self {
            classes,
            q: 2.0,
            max_iter: 300,
            tol: 1e-6,
            seed,
        }
    }
}

fn check_centroids(ff: &FeatureField, cen: &Centroids) -> Result<()> {
    if cen.dim() != ff.dim() {
        return Err(Error::Dimension(format!(
            "centroid dim {} does not match feature dim {}",
            cen.dim(),
            ff.dim()
        )));
    }
    Ok(())
}

fn check_classes(ff: &FeatureField, classes: usize) -> Result<()> {
    if classes == 0 {
        return Err(Error::Config("need at least one class".into()));
    }
    if classes > ff.pixel_count() {
        return Err(Error::Config(format!(
            "{classes} classes exceed the {} pixels available",
            ff.pixel_count()
        )));
    }
    Ok(())
}

fn nearest(v: &[f64], cen: &Centroids) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in cen.iter().enumerate() {
        let d = squared_distance(v, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// k-means++ seeding; see the module docs for the exact draw sequence.
pub fn kmeans_plus_plus(ff: &FeatureField, classes: usize, seed: u64) -> Result<Centroids> {
    check_classes(ff, classes)?;
    let n = ff.pixel_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = ff
        .vectors()
        .map(|v| squared_distance(v, ff.vector(first)))
        .collect();
    while chosen.len() < classes {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = None;
            for (j, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    cum += d;
                    pick = Some(j);
                    if cum > r {
                        break;
                    }
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        let c = ff.vector(next);
        for (j, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(ff.vector(j), c));
        }
    }
    let data = chosen.iter().flat_map(|&j| ff.vector(j).to_vec()).collect();
    Centroids::new(ff.dim(), data)
}

/// Nearest-centroid assignment; ties go to the lowest class index.
pub fn assign_hard(ff: &FeatureField, cen: &Centroids) -> Result<HardLabeling> {
    check_centroids(ff, cen)?;
    let labels: Vec<usize> = (0..ff.pixel_count())
        .into_par_iter()
        .map(|j| nearest(ff.vector(j), cen).0)
        .collect();
    HardLabeling::new(ff.width(), ff.height(), cen.classes(), labels)
}

fn class_means(ff: &FeatureField, lab: &HardLabeling) -> (Vec<f64>, Vec<usize>) {
    let dim = ff.dim();
    let mut sums = vec![0.0; lab.classes() * dim];
    let mut counts = vec![0usize; lab.classes()];
    for (v, &l) in ff.vectors().zip(lab.labels()) {
        counts[l] += 1;
        for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(v) {
            *s += x;
        }
    }
    for (k, &n) in counts.iter().enumerate() {
        if n > 0 {
            for s in &mut sums[k * dim..(k + 1) * dim] {
                *s /= n as f64;
            }
        }
    }
    (sums, counts)
}

/// Class means. An empty class takes over the pixel farthest from its own
/// centroid (among classes with more than one member), which updates `lab`.
pub fn update_centroids(ff: &FeatureField, lab: &mut HardLabeling) -> Result<Centroids> {
    if lab.labels().len() != ff.pixel_count() {
        return Err(Error::Dimension(
            "labeling and feature field sizes differ".into(),
        ));
    }
    let dim = ff.dim();
    loop {
        let (means, counts) = class_means(ff, lab);
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return Centroids::new(dim, means);
        };
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (j, (v, &l)) in ff.vectors().zip(lab.labels()).enumerate() {
            if counts[l] < 2 {
                continue;
            }
            let d = squared_distance(v, &means[l * dim..(l + 1) * dim]);
            if d > far_d {
                far_d = d;
                far = Some(j);
            }
        }
        let Some(j) = far else {
            return Err(Error::Config("too few pixels to fill every class".into()));
        };
        lab.labels[j] = empty;
    }
}

/// `sum_j ||F_j - C_{z_j}||^2`
pub fn kmeans_objective(ff: &FeatureField, lab: &HardLabeling, cen: &Centroids) -> f64 {
    ff.vectors()
        .zip(lab.labels())
        .map(|(v, &l)| squared_distance(v, cen.get(l)))
        .sum()
}

pub fn kmeans_w(ff: &FeatureField, params: &KMeansParams) -> Result<ClusterResult> {
    kmeans_w_observed(ff, params, |_, _, _| {})
}

/// [`kmeans_w`] with a callback after every centroid update.
pub fn kmeans_w_observed(
    ff: &FeatureField,
    params: &KMeansParams,
    mut observe: impl FnMut(usize, &HardLabeling, &Centroids),
) -> Result<ClusterResult> {
    check_classes(ff, params.classes)?;
    let mut cen = kmeans_plus_plus(ff, params.classes, params.seed)?;
    let mut previous: Option<HardLabeling> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=params.max_iter {
        let mut lab = assign_hard(ff, &cen)?;
        if previous.as_ref() == Some(&lab) {
            converged = true;
            break;
        }
        cen = update_centroids(ff, &mut lab)?;
        let objective = kmeans_objective(ff, &lab, &cen);
        iterations = it;
        observe(it, &lab, &cen);
        let settled = trace
            .last()
            .is_some_and(|&prev| prev - objective < params.tol);
        trace.push(objective);
        previous = Some(lab);
        if settled {
            converged = true;
            break;
        }
    }

    let labeling = match previous {
        Some(lab) => lab,
        None => assign_hard(ff, &cen)?,
    };
    Ok(ClusterResult {
        labeling,
        membership: None,
        centroids: cen,
        objective_trace: trace,
        iterations,
        converged,
        seed: params.seed,
    })
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::Config(format!("fuzzifier q must be > 1, got {q}")));
    }
    Ok(())
}

/// Membership of one pixel given its squared distances to every centroid.
fn membership_row(d2: &[f64], q: f64, out: &mut [f64]) {
    let zeros = d2.iter().filter(|&&d| d == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        for (u, &d) in out.iter_mut().zip(d2) {
            *u = if d == 0.0 { share } else { 0.0 };
        }
        return;
    }
    let exponent = 1.0 / (q - 1.0);
    for (k, u) in out.iter_mut().enumerate() {
        let mut denom = 0.0;
        for &dl in d2 {
            denom += (d2[k] / dl).powf(exponent);
        }
        *u = 1.0 / denom;
    }
}

/// `u_jk = 1 / sum_l (||F_j - C_k|| / ||F_j - C_l||)^(2 / (q - 1))`.
/// A pixel sitting on one or more centroids splits its membership equally
/// among them.
pub fn fcm_membership_update(ff: &FeatureField, cen: &Centroids, q: f64) -> Result<SoftMembership> {
    check_q(q)?;
    check_centroids(ff, cen)?;
    let c = cen.classes();
    let mut values = vec![0.0; ff.pixel_count() * c];
    values.par_chunks_mut(c).enumerate().for_each(|(j, out)| {
        let v = ff.vector(j);
        let d2: Vec<f64> = cen.iter().map(|ck| squared_distance(v, ck)).collect();
        membership_row(&d2, q, out);
    });
    SoftMembership::new(c, q, values)
}

/// `C_k = sum_j u_jk^q F_j / sum_j u_jk^q`. A class with zero total weight is
/// re-seeded at the pixel farthest from its nearest valid centroid.
pub fn fcm_centroid_update(ff: &FeatureField, u: &SoftMembership, q: f64) -> Result<Centroids> {
    check_q(q)?;
    if u.pixel_count() != ff.pixel_count() {
        return Err(Error::Dimension(
            "membership and feature field sizes differ".into(),
        ));
    }
    let (c, dim) = (u.classes(), ff.dim());
    let mut sums = vec![0.0; c * dim];
    let mut weights = vec![0.0; c];
    for (j, v) in ff.vectors().enumerate() {
        for (k, &ujk) in u.row(j).iter().enumerate() {
            let w = ujk.powf(q);
            weights[k] += w;
            for (s, x) in sums[k * dim..(k + 1) * dim].iter_mut().zip(v) {
                *s += w * x;
            }
        }
    }
    let mut valid = vec![true; c];
    for k in 0..c {
        if weights[k] > 0.0 {
            for s in &mut sums[k * dim..(k + 1) * dim] {
                *s /= weights[k];
            }
        } else {
            valid[k] = false;
        }
    }
    while let Some(k) = valid.iter().position(|&ok| !ok) {
        let mut far = 0;
        let mut far_d = f64::NEG_INFINITY;
        for (j, v) in ff.vectors().enumerate() {
            let d = (0..c)
                .filter(|&l| valid[l])
                .map(|l| squared_distance(v, &sums[l * dim..(l + 1) * dim]))
                .fold(f64::INFINITY, f64::min);
            if d > far_d {
                far_d = d;
                far = j;
            }
        }
        sums[k * dim..(k + 1) * dim].copy_from_slice(ff.vector(far));
        valid[k] = true;
    }
    Centroids::new(dim, sums)
}

/// `sum_j sum_k u_jk^q ||F_j - C_k||^2`
pub fn fcm_objective(ff: &FeatureField, u: &SoftMembership, cen: &Centroids) -> f64 {
    let q = u.q();
    ff.vectors()
        .enumerate()
        .map(|(j, v)| {
            u.row(j)
                .iter()
                .zip(cen.iter())
                .map(|(&ujk, ck)| ujk.powf(q) * squared_distance(v, ck))
                .sum::<f64>()
        })
        .sum()
}

/// Per-pixel argmax, ties to the lowest class.
pub fn defuzzify(u: &SoftMembership, width: usize, height: usize) -> Result<HardLabeling> {
    let labels = u
        .values()
        .chunks_exact(u.classes())
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    HardLabeling::new(width, height, u.classes(), labels)
}

pub fn fcm_w(ff: &FeatureField, params: &FcmParams) -> Result<ClusterResult> {
    fcm_w_observed(ff, params, |_, _, _| {})
}

/// [`fcm_w`] with a callback after every membership update (including the
/// initial one, reported as iteration 0).
pub fn fcm_w_observed(
    ff: &FeatureField,
    params: &FcmParams,
    mut observe: impl FnMut(usize, &SoftMembership, &Centroids),
) -> Result<ClusterResult> {
    check_q(params.q)?;
    check_classes(ff, params.classes)?;
    let mut cen = kmeans_plus_plus(ff, params.classes, params.seed)?;
    let mut u = fcm_membership_update(ff, &cen, params.q)?;
    observe(0, &u, &cen);
    let mut trace = vec![fcm_objective(ff, &u, &cen)];
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=params.max_iter {
        cen = fcm_centroid_update(ff, &u, params.q)?;
        let next = fcm_membership_update(ff, &cen, params.q)?;
        let delta = next
            .values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        u = next;
        iterations = it;
        observe(it, &u, &cen);
        trace.push(fcm_objective(ff, &u, &cen));
        if delta < params.tol {
            converged = true;
            break;
        }
    }

    let labeling = defuzzify(&u, ff.width(), ff.height())?;
    Ok(ClusterResult {
        labeling,
        membership: Some(u),
        centroids: cen,
        objective_trace: trace,
        iterations,
        converged,
        seed: params.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_field(values: &[f64]) -> FeatureField {
        FeatureField::new(values.len(), 1, 1, 0, values.to_vec(), vec![false]).unwrap()
    }

    fn cents(v: &[f64]) -> Centroids {
        Centroids::new(1, v.to_vec()).unwrap()
    }

    #[test]
    fn assign_nearest_and_ties() {
        let lab = assign_hard(&scalar_field(&[2.0, 5.0, 9.0]), &cents(&[0.0, 10.0])).unwrap();
        assert_eq!(lab.labels(), &[0, 0, 1]);
    }

    #[test]
    fn centroid_means() {
        let ff = scalar_field(&[0.0, 10.0, 7.0]);
        let mut lab = HardLabeling::new(3, 1, 2, vec![0, 0, 1]).unwrap();
        let c = update_centroids(&ff, &mut lab).unwrap();
        assert_eq!(c.get(0), &[5.0]);
        assert_eq!(c.get(1), &[7.0]);
    }

    #[test]
    fn empty_class_steals_farthest() {
        let ff = scalar_field(&[0.0, 1.0, 9.0]);
        let mut lab = HardLabeling::new(3, 1, 2, vec![0, 0, 0]).unwrap();
        let c = update_centroids(&ff, &mut lab).unwrap();
        assert_eq!(lab.labels(), &[0, 0, 1]);
        assert_eq!(c.get(0), &[0.5]);
        assert_eq!(c.get(1), &[9.0]);
    }

    #[test]
    fn identical_points_still_fill_classes() {
        let ff = scalar_field(&[3.0; 4]);
        let r = kmeans_w(&ff, &KMeansParams::new(2, 1)).unwrap();
        assert_eq!(r.labeling.counts().iter().filter(|&&n| n > 0).count(), 2);
        assert_eq!(r.final_objective(), 0.0);
    }

    #[test]
    fn separable_kmeans() {
        let ff = scalar_field(&[0.0, 0.0, 10.0, 10.0]);
        for seed in 0..10 {
            let r = kmeans_w(&ff, &KMeansParams::new(2, seed)).unwrap();
            let mut c: Vec<f64> = r.centroids.iter().map(|v| v[0]).collect();
            c.sort_by(f64::total_cmp);
            assert_eq!(c, vec![0.0, 10.0]);
            assert_eq!(r.final_objective(), 0.0);
            assert!(r.converged);
        }
    }

    #[test]
    fn single_class_is_global_mean() {
        let ff = scalar_field(&[1.0, 2.0, 6.0]);
        let r = kmeans_w(&ff, &KMeansParams::new(1, 3)).unwrap();
        assert_eq!(r.centroids.get(0), &[3.0]);
        assert_eq!(r.iterations, 1);
        let f = fcm_w(&ff, &FcmParams::new(1, 3)).unwrap();
        assert!(f.membership.unwrap().values().iter().all(|&u| u == 1.0));
    }

    #[test]
    fn too_many_classes() {
        let ff = scalar_field(&[1.0, 2.0]);
        assert!(matches!(
            kmeans_w(&ff, &KMeansParams::new(3, 0)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            fcm_w(&ff, &FcmParams::new(0, 0)),
            Err(Error::Config(_))
        ));
        let mut p = FcmParams::new(2, 0);
        p.q = 1.0;
        assert!(fcm_w(&ff, &p).is_err());
    }

    #[test]
    fn membership_singularity_and_symmetry() {
        let u =
            fcm_membership_update(&scalar_field(&[5.0]), &cents(&[0.0, 5.0, 9.0]), 2.0).unwrap();
        assert_eq!(u.row(0), &[0.0, 1.0, 0.0]);
        let u =
            fcm_membership_update(&scalar_field(&[5.0]), &cents(&[5.0, 5.0, 9.0]), 2.0).unwrap();
        assert_eq!(u.row(0), &[0.5, 0.5, 0.0]);
        let u = fcm_membership_update(&scalar_field(&[5.0]), &cents(&[3.0, 7.0]), 2.0).unwrap();
        assert_eq!(u.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn centroid_update_special_cases() {
        let ff = scalar_field(&[0.0, 2.0, 10.0]);
        let hard = SoftMembership::new(2, 2.0, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        let c = fcm_centroid_update(&ff, &hard, 2.0).unwrap();
        assert_eq!(c.to_vectors(), vec![vec![1.0], vec![10.0]]);
        let uniform = SoftMembership::new(2, 2.0, vec![0.5; 6]).unwrap();
        let c = fcm_centroid_update(&ff, &uniform, 2.0).unwrap();
        assert_abs_diff_eq!(c.get(0)[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.get(1)[0], 4.0, epsilon = 1e-12);
        // zero column re-seeds at the farthest pixel
        let zero = SoftMembership::new(2, 2.0, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let c = fcm_centroid_update(&ff, &zero, 2.0).unwrap();
        assert_eq!(c.get(1), &[10.0]);
    }

    #[test]
    fn defuzzify_rules() {
        let u = SoftMembership::new(2, 2.0, vec![0.2, 0.8, 0.5, 0.5]).unwrap();
        let lab = defuzzify(&u, 2, 1).unwrap();
        assert_eq!(lab.labels(), &[1, 0]);
        let onehot: Vec<f64> = lab
            .labels()
            .iter()
            .flat_map(|&l| (0..2).map(move |k| (k == l) as u8 as f64))
            .collect();
        let again = defuzzify(&SoftMembership::new(2, 2.0, onehot).unwrap(), 2, 1).unwrap();
        assert_eq!(again, lab);
    }

    #[test]
    fn fcm_matches_kmeans_on_separable_data() {
        let ff = scalar_field(&[0.0, 0.0, 10.0, 10.0]);
        let f = fcm_w(&ff, &FcmParams::new(2, 7)).unwrap();
        let k = kmeans_w(&ff, &KMeansParams::new(2, 7)).unwrap();
        let (a, b) = (f.labeling.labels(), k.labeling.labels());
        let same = a == b;
        let swapped = a.iter().zip(b).all(|(x, y)| *x == 1 - *y);
        assert!(same || swapped);
        assert!(f.converged);
    }

    #[test]
    fn seeding_is_deterministic() {
        let ff = scalar_field(&[0.1, 0.4, 0.35, 0.9, 0.8, 0.2]);
        assert_eq!(
            kmeans_plus_plus(&ff, 3, 11).unwrap(),
            kmeans_plus_plus(&ff, 3, 11).unwrap()
        );
    }
}
