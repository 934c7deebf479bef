//! Stratified splits, k-fold cross-validation, confusion matrices,
//! precision/recall/F1 reports and precision-recall curves.
//!
//! Zero-denominator precision or recall counts as 0.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Train/test indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub warnings: Vec<String>,
}

fn members_by_class(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (i, &y) in labels.iter().enumerate() {
        out[y].push(i);
    }
    out
}

/// Per class with `n >= 2`: `max(1, round(n * fraction))` test rows, capped
/// at `n - 1`, picked by a partial Fisher-Yates shuffle of the class's
/// indices. Singleton classes stay in train with a warning.
pub fn stratified_split(labels: &[usize], test_fraction: f64, seed: u64) -> Result<Split> {
    if labels.is_empty() {
        return Err(Error::Empty("cannot split an empty dataset".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test fraction must be in (0, 1)"));
    }
    let mut rng = seeded(seed);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
        warnings: Vec::new(),
    };
    for (c, mut m) in members_by_class(labels).into_iter().enumerate() {
        let n = m.len();
        if n == 0 {
            continue;
        }
        if n == 1 {
            split
                .warnings
                .push(format!("class {c} has a single sample; kept in train"));
            split.train.push(m[0]);
            continue;
        }
        let take = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        for i in 0..take {
            let j = rng.gen_range(i..n);
            m.swap(i, j);
        }
        split.test.extend_from_slice(&m[..take]);
        split.train.extend_from_slice(&m[take..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// K folds. Each class is shuffled and dealt round-robin; the dealing
/// position carries over from one class to the next so overall fold sizes
/// also differ by at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<(Vec<Split>, Vec<String>)> {
    if k < 2 {
        return Err(Error::invalid("k-fold needs k >= 2"));
    }
    if k > labels.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the dataset size {}",
            labels.len()
        )));
    }
    let mut rng = seeded(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut warnings = Vec::new();
    let mut next = 0;
    for (c, mut m) in members_by_class(labels).into_iter().enumerate() {
        if m.is_empty() {
            continue;
        }
        if m.len() < k {
            warnings.push(format!(
                "class {c} has {} samples for {k} folds; it is missing from some test folds",
                m.len()
            ));
        }
        m.shuffle(&mut rng);
        for i in m {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    let splits = (0..k)
        .map(|f| {
            let mut test = folds[f].clone();
            test.sort_unstable();
            let mut train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            train.sort_unstable();
            Split {
                train,
                test,
                warnings: Vec::new(),
            }
        })
        .collect();
    Ok((splits, warnings))
}

/// `counts[i][j]`: true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(y_true: &[usize], y_pred: &[usize], labels: &[String]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::DimensionMismatch {
                expected: y_true.len(),
                found: y_pred.len(),
            });
        }
        let k = labels.len();
        let mut counts = vec![vec![0u64; k]; k];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= k || p >= k {
                return Err(Error::invalid(format!("label {} out of range for {k} classes", t.max(p))));
            }
            counts[t][p] += 1;
        }
        Ok(Self {
            labels: labels.to_vec(),
            counts,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Adds another matrix with the same label order.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.labels != self.labels {
            return Err(Error::invalid("cannot merge confusion matrices with different labels"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(())
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], labels: &[String]) -> Result<ConfusionMatrix> {
    ConfusionMatrix::new(y_true, y_pred, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub true_positives: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `trace / total`. For a restricted report: correct predictions among
    /// the kept classes' samples over their total support.
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted means of the per-class values.
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Harmonic mean of `macro_precision` and `macro_recall`. Reported for
    /// comparison only; it is not the macro F1.
    pub f1_of_macro_pr: f64,
    /// Support-weighted means.
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn summarize(per_class: Vec<ClassMetrics>, accuracy: f64) -> MetricsReport {
    let n = per_class.len().max(1) as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / n;
    let support: u64 = per_class.iter().map(|c| c.support).sum();
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        if support == 0 {
            0.0
        } else {
            per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / support as f64
        }
    };
    let macro_precision = mean(|c| c.precision);
    let macro_recall = mean(|c| c.recall);
    MetricsReport {
        accuracy,
        macro_precision,
        macro_recall,
        macro_f1: mean(|c| c.f1),
        f1_of_macro_pr: f1_score(macro_precision, macro_recall),
        weighted_precision: weighted(|c| c.precision),
        weighted_recall: weighted(|c| c.recall),
        weighted_f1: weighted(|c| c.f1),
        per_class,
    }
}

/// One-vs-rest metrics for every class plus macro and weighted averages.
pub fn metrics_report(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no samples".into()));
    }
    let k = cm.num_classes();
    let per_class = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let row: u64 = cm.counts[c].iter().sum();
            let col: u64 = (0..k).map(|i| cm.counts[i][c]).sum();
            let precision = ratio(tp, col);
            let recall = ratio(tp, row);
            ClassMetrics {
                label: cm.labels[c].clone(),
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: row,
                true_positives: tp,
            }
        })
        .collect();
    Ok(summarize(per_class, ratio(cm.trace(), total)))
}

/// The report restricted to `rare`, with every average recomputed over the
/// kept classes.
pub fn rare_class_report(report: &MetricsReport, rare: &[String]) -> Result<MetricsReport> {
    if rare.is_empty() {
        return Err(Error::Empty("rare-class set is empty".into()));
    }
    for r in rare {
        if !report.per_class.iter().any(|c| c.label == *r) {
            return Err(Error::UnknownLabel(r.clone()));
        }
    }
    let kept: Vec<ClassMetrics> = report
        .per_class
        .iter()
        .filter(|c| rare.contains(&c.label))
        .cloned()
        .collect();
    let tp: u64 = kept.iter().map(|c| c.true_positives).sum();
    let support: u64 = kept.iter().map(|c| c.support).sum();
    Ok(summarize(kept, ratio(tp, support)))
}

/// `(recall, precision)` at each distinct score taken as a threshold
/// (`score >= t` is positive), highest threshold first.
pub fn pr_curve(scores: &[f64], positive: &[bool]) -> Result<Vec<(f64, f64)>> {
    if scores.len() != positive.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: positive.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("NaN score".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count() as u64;
    if n_pos == 0 {
        return Err(Error::invalid("PR curve needs at least one positive sample"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((ratio(tp, n_pos), ratio(tp, tp + fp)));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|c| format!("c{c}")).collect()
    }

    fn count(idx: &[usize], labels: &[usize], c: usize) -> usize {
        idx.iter().filter(|&&i| labels[i] == c).count()
    }

    #[test]
    fn split_rounding_rule() {
        let labels: Vec<usize> = [vec![0; 8], vec![1; 2]].concat();
        let s = stratified_split(&labels, 0.2, 7).unwrap();
        assert_eq!((count(&s.test, &labels, 0), count(&s.test, &labels, 1)), (2, 1));
        assert_eq!((count(&s.train, &labels, 0), count(&s.train, &labels, 1)), (6, 1));

        let labels: Vec<usize> = (0..300).map(|i| i % 3).collect();
        let s = stratified_split(&labels, 0.2, 1).unwrap();
        for c in 0..3 {
            assert_eq!(count(&s.test, &labels, c), 20);
        }
    }

    #[test]
    fn singleton_class_stays_in_train() {
        let s = stratified_split(&[0, 0, 0, 1], 0.3, 0).unwrap();
        assert!(s.train.contains(&3));
        assert_eq!(s.warnings.len(), 1);
        assert!(stratified_split(&[], 0.2, 0).is_err());
        assert!(stratified_split(&[0, 1], 1.0, 0).is_err());
    }

    #[test]
    fn kfold_partitions() {
        let (folds, w) = stratified_kfold(&[0; 10], 5, 3).unwrap();
        assert!(w.is_empty());
        assert!(folds.iter().all(|f| f.test.len() == 2 && f.train.len() == 8));
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(stratified_kfold(&[0, 1], 3, 0).is_err());
        let (_, w) = stratified_kfold(&[0, 0, 0, 1], 3, 0).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn confusion_and_metrics() {
        let cm = confusion_matrix(&[0, 1], &[0, 0], &names(2)).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0], vec![1, 0]]);
        assert!(confusion_matrix(&[0], &[0, 1], &names(2)).is_err());

        // Class 0: TP 3, FP 1.
        let cm = confusion_matrix(&[0, 0, 0, 1, 1], &[0, 0, 0, 0, 1], &names(2)).unwrap();
        let r = metrics_report(&cm).unwrap();
        assert_eq!(r.per_class[0].precision, 0.75);
        assert_eq!(r.per_class[1].precision, 1.0);
        assert_eq!(r.per_class[1].recall, 0.5);
        assert_eq!(r.accuracy, 0.8);
        assert_eq!(f1_score(0.5, 0.5), 0.5);
        assert_eq!(f1_score(0.0, 0.0), 0.0);

        let cm = confusion_matrix(&[0, 1, 2], &[0, 0, 0], &names(3)).unwrap();
        let r = metrics_report(&cm).unwrap();
        assert_eq!(r.per_class[1].precision, 0.0);
        assert_eq!(r.per_class[2].f1, 0.0);
    }

    #[test]
    fn harmonic_mean_of_macro_pr_differs_from_macro_f1() {
        // Published macro P/R pair whose reported F1 is 0.358.
        let f = f1_score(0.421, 0.356);
        assert!((f - 0.3858).abs() < 5e-5, "{f}");
        assert!((f - 0.358).abs() > 0.02);
    }

    #[test]
    fn rare_report_restricts_macro() {
        let y: Vec<usize> = vec![0, 0, 0, 1, 1, 2, 2, 2, 2];
        let p: Vec<usize> = vec![0, 1, 0, 1, 2, 2, 2, 0, 1];
        let r = metrics_report(&confusion_matrix(&y, &p, &names(3)).unwrap()).unwrap();
        let all = rare_class_report(&r, &names(3)).unwrap();
        assert_eq!(all.macro_f1, r.macro_f1);
        assert_eq!(all.macro_precision, r.macro_precision);
        let one = rare_class_report(&r, &["c1".to_string()]).unwrap();
        assert_eq!(one.macro_recall, r.per_class[1].recall);
        assert_eq!(one.macro_f1, r.per_class[1].f1);
        assert!(rare_class_report(&r, &[]).is_err());
        assert!(rare_class_report(&r, &["zz".to_string()]).is_err());
    }

    #[test]
    fn pr_curve_edges() {
        let c = pr_curve(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert!(c.contains(&(1.0, 1.0)));
        let c = pr_curve(&[0.5; 4], &[true, false, false, false]).unwrap();
        assert_eq!(c, vec![(1.0, 0.25)]);
        assert!(pr_curve(&[0.1], &[false]).is_err());
    }
}
