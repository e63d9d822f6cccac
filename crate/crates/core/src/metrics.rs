//! Overlap metrics and permutation-matched misclassification.

use serde::{Deserialize, Serialize};

use crate::clustering::HardLabeling;
use crate::error::{Error, Result};

/// Largest class count for which every permutation is tried.
pub const EXHAUSTIVE_LIMIT: usize = 6;

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("masks have {a} and {b} pixels")));
    }
    Ok(())
}

fn overlap(a: &[bool], b: &[bool]) -> (usize, usize, usize) {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let na = a.iter().filter(|&&x| x).count();
    let nb = b.iter().filter(|&&x| x).count();
    (inter, na, nb)
}

/// `2|a ∩ b| / (|a| + |b|)`; two empty masks score 1.
pub fn dice(a: &[bool], b: &[bool]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let (inter, na, nb) = overlap(a, b);
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (na + nb) as f64)
}

/// `|a ∩ b| / |a ∪ b|`; two empty masks score 1.
pub fn iou(a: &[bool], b: &[bool]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let (inter, na, nb) = overlap(a, b);
    let union = na + nb - inter;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean of `per_class_dice`.
    pub dice: f64,
    /// Mean per-class IoU.
    pub iou: f64,
    pub misclassification_rate: f64,
    /// `permutation[p]` is the truth class matched to predicted class `p`.
    pub permutation: Vec<usize>,
    /// Dice of each truth class against the predicted class mapped onto it.
    pub per_class_dice: Vec<f64>,
}

fn confusion(labels: &[usize], truth: &[usize], classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; classes]; classes];
    for (&p, &t) in labels.iter().zip(truth) {
        m[p][t] += 1;
    }
    m
}

fn matched(conf: &[Vec<u64>], perm: &[usize]) -> u64 {
    perm.iter().enumerate().map(|(p, &t)| conf[p][t]).sum()
}

/// Heap's algorithm over `0..n`, visiting the identity first.
fn best_permutation_exhaustive(conf: &[Vec<u64>]) -> Vec<usize> {
    let n = conf.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_score = matched(conf, &perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let s = matched(conf, &perm);
            if s > best_score {
                best_score = s;
                best = perm.clone();
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn best_permutation_greedy(conf: &[Vec<u64>]) -> Vec<usize> {
    let n = conf.len();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for _ in 0..n {
        let mut pick = (0, 0, 0u64);
        let mut found = false;
        for p in (0..n).filter(|&p| perm[p] == usize::MAX) {
            for t in (0..n).filter(|&t| !used[t]) {
                if !found || conf[p][t] > pick.2 {
                    pick = (p, t, conf[p][t]);
                    found = true;
                }
            }
        }
        perm[pick.0] = pick.1;
        used[pick.1] = true;
    }
    perm
}

/// Error rate after the class matching that minimises it (exhaustive up to
/// [`EXHAUSTIVE_LIMIT`] classes, greedy beyond).
pub fn misclassification(
    labels: &HardLabeling,
    truth: &HardLabeling,
    classes: usize,
) -> Result<EvalReport> {
    check_len(labels.labels().len(), truth.labels().len())?;
    if labels.width() != truth.width() || labels.height() != truth.height() {
        return Err(Error::Dimension(format!(
            "prediction is {}x{} but truth is {}x{}",
            labels.width(),
            labels.height(),
            truth.width(),
            truth.height()
        )));
    }
    let c = classes.max(labels.classes()).max(truth.classes());
    let conf = confusion(labels.labels(), truth.labels(), c);
    let perm = if c <= EXHAUSTIVE_LIMIT {
        best_permutation_exhaustive(&conf)
    } else {
        best_permutation_greedy(&conf)
    };
    let n = labels.labels().len() as f64;
    let rate = 1.0 - matched(&conf, &perm) as f64 / n;

    let mapped: Vec<usize> = labels.labels().iter().map(|&p| perm[p]).collect();
    let mut per_class_dice = Vec::with_capacity(truth.classes());
    let mut ious = Vec::with_capacity(truth.classes());
    for k in 0..truth.classes() {
        let pred: Vec<bool> = mapped.iter().map(|&m| m == k).collect();
        let tru = truth.mask_of(k);
        per_class_dice.push(dice(&pred, &tru)?);
        ious.push(iou(&pred, &tru)?);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(EvalReport {
        dice: mean(&per_class_dice),
        iou: mean(&ious),
        misclassification_rate: rate,
        permutation: perm,
        per_class_dice,
    })
}
