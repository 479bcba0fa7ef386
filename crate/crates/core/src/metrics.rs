//! Discrimination and calibration metrics for confidence scores.
//!
//! Labels are `true` for a correct answer; a higher score means more confident.

use std::fmt;

use crate::{Error, Result};

pub const DEFAULT_ECE_BINS: usize = 10;

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scored instances".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores"));
    }
    Ok(())
}

fn check_probabilities(scores: &[f64]) -> Result<()> {
    match scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        Some(s) => Err(Error::InvalidArgument(format!("score {s} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Area under the ROC curve, ties credited one half.
///
/// Computed from average ranks (Mann-Whitney U) in `O(N log N)`.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based ranks of positives, tied groups sharing their mean rank.
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        let positives = order[i..=j].iter().filter(|&&k| labels[k]).count();
        pos_rank_sum += mean_rank * positives as f64;
        i = j + 1;
    }
    let n_pos = n_pos as f64;
    let u = pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg as f64))
}

/// Average precision. Tied scores form one group whose precision is
/// evaluated after the whole group is admitted.
pub fn aupr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return Err(Error::InvalidArgument("average precision needs at least one positive".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut ap = 0.0;
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let hits = order[i..=j].iter().filter(|&&k| labels[k]).count();
        tp += hits;
        seen += j - i + 1;
        if hits > 0 {
            ap += (hits as f64 / n_pos as f64) * (tp as f64 / seen as f64);
        }
        i = j + 1;
    }
    Ok(ap)
}

/// Mean squared error between probabilities and 0/1 outcomes.
pub fn brier(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    check_probabilities(scores)?;
    let sum: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &l)| (s - f64::from(u8::from(l))).powi(2))
        .sum();
    Ok(sum / scores.len() as f64)
}

/// Expected calibration error over `bins` equal-width bins on `[0, 1]`,
/// the last bin closed on the right.
pub fn ece(scores: &[f64], labels: &[bool], bins: usize) -> Result<f64> {
    if bins < 1 {
        return Err(Error::InvalidArgument("ECE needs at least one bin".into()));
    }
    check_lengths(scores, labels)?;
    check_probabilities(scores)?;

    let mut count = vec![0usize; bins];
    let mut confidence = vec![0.0f64; bins];
    let mut positives = vec![0usize; bins];
    for (&s, &l) in scores.iter().zip(labels) {
        let b = ((s * bins as f64) as usize).min(bins - 1);
        count[b] += 1;
        confidence[b] += s;
        positives[b] += usize::from(l);
    }
    let n = scores.len() as f64;
    Ok((0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| {
            let nb = count[b] as f64;
            (nb / n) * (positives[b] as f64 / nb - confidence[b] / nb).abs()
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub auroc: f64,
    pub aupr: f64,
    pub brier: f64,
    pub ece: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub ece_bins: usize,
}

impl EvalReport {
    pub fn compute(scores: &[f64], labels: &[bool], ece_bins: usize) -> Result<Self> {
        let n_pos = labels.iter().filter(|&&l| l).count();
        Ok(EvalReport {
            auroc: auroc(scores, labels)?,
            aupr: aupr(scores, labels)?,
            brier: brier(scores, labels)?,
            ece: ece(scores, labels, ece_bins)?,
            n_pos,
            n_neg: labels.len() - n_pos,
            ece_bins,
        })
    }

    pub const CSV_HEADER: &'static str = "variant,dataset,auroc,aupr,brier,ece";

    /// One `variant,dataset,auroc,aupr,brier,ece` row for plotting exports.
    pub fn csv_row(&self, variant: &str, dataset: &str) -> String {
        format!(
            "{variant},{dataset},{},{},{},{}",
            self.auroc, self.aupr, self.brier, self.ece
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "auroc = {:.6}", self.auroc)?;
        writeln!(f, "aupr = {:.6}", self.aupr)?;
        writeln!(f, "brier = {:.6}", self.brier)?;
        writeln!(f, "ece = {:.6}", self.ece)?;
        writeln!(f, "ece_bins = {}", self.ece_bins)?;
        writeln!(f, "n_pos = {}", self.n_pos)?;
        write!(f, "n_neg = {}", self.n_neg)
    }
}
