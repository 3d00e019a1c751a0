//! Binary classification metrics (positive class `+1`) and the paired
//! comparison measures between two methods.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsRecord {
    pub acc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl MetricsRecord {
    /// Looks a metric up by name: `acc`, `precision`, `recall`, `f1`, `auc`.
    pub fn get(&self, name: &str) -> Result<f64> {
        match name {
            "acc" => Ok(self.acc),
            "precision" | "pr" => Ok(self.precision),
            "recall" | "rc" => Ok(self.recall),
            "f1" => Ok(self.f1),
            "auc" => Ok(self.auc),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

pub const METRIC_NAMES: [&str; 5] = ["acc", "precision", "recall", "f1", "auc"];

pub fn confusion(truth: &[i8], predicted: &[i8]) -> Result<Confusion> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    let mut c = Confusion::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t > 0, p > 0) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, precision, recall and F1 from counts. Zero denominators give 0.
/// `auc` is left at 0.
pub fn basic_metrics(c: Confusion) -> Result<MetricsRecord> {
    if c.total() == 0 {
        return Err(Error::EmptyInput);
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsRecord {
        acc: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
        auc: 0.0,
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        fn_: c.fn_,
    })
}

/// Area under the ROC curve via the Mann-Whitney statistic; tied scores
/// get average ranks, i.e. half credit per tied positive/negative pair.
pub fn auc(truth: &[i8], scores: &[f64]) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: scores.len(),
        });
    }
    let n_pos = truth.iter().filter(|&&y| y > 0).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if truth[k] > 0 {
                pos_rank_sum += rank;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    let u = pos_rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

/// All metrics for one evaluation: labels from `predicted`, AUC from `scores`.
pub fn evaluate(truth: &[i8], predicted: &[i8], scores: &[f64]) -> Result<MetricsRecord> {
    let mut m = basic_metrics(confusion(truth, predicted)?)?;
    m.auc = auc(truth, scores)?;
    Ok(m)
}

/// `100 * (f1_oksvm - f1_svm)`
pub fn f1_diff(f1_oksvm: f64, f1_svm: f64) -> f64 {
    100.0 * (f1_oksvm - f1_svm)
}

/// `+1`, `-1` or `0` by the sign of a paired difference.
pub fn win_loss(diff: f64) -> i8 {
    if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    }
}

/// `100 * mean(win_loss(d))`; draws count zero.
pub fn wins_losses_ratio(diffs: &[f64]) -> Result<f64> {
    if diffs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: i64 = diffs.iter().map(|&d| i64::from(win_loss(d))).sum();
    Ok(100.0 * sum as f64 / diffs.len() as f64)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_cases() {
        let y = vec![1i8; 50];
        let c = confusion(&y, &y).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (50, 0, 0, 0));

        let truth = [1, 1, -1, -1];
        let c = confusion(&truth, &[1, -1, -1, 1]).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 1, 1, 1));

        let good = confusion(&truth, &truth).unwrap();
        let flipped = confusion(&truth, &[-1, -1, 1, 1]).unwrap();
        assert_eq!((flipped.tp, flipped.fn_), (good.fn_, good.tp));
        assert_eq!((flipped.tn, flipped.fp), (good.fp, good.tn));

        assert!(confusion(&[1], &[1, 1]).is_err());
    }

    #[test]
    fn basic_metric_values() {
        let m = basic_metrics(Confusion {
            tp: 1,
            fp: 1,
            tn: 1,
            fn_: 1,
        })
        .unwrap();
        assert_eq!((m.acc, m.precision, m.recall, m.f1), (0.5, 0.5, 0.5, 0.5));

        let m = basic_metrics(Confusion {
            tp: 0,
            fp: 0,
            tn: 5,
            fn_: 3,
        })
        .unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));

        let m = basic_metrics(Confusion {
            tp: 90,
            fp: 10,
            tn: 0,
            fn_: 30,
        })
        .unwrap();
        assert!((m.precision - 0.9).abs() < 1e-15);
        assert!((m.recall - 0.75).abs() < 1e-15);
        assert!((m.f1 - 0.818_181_818_181_818_2).abs() < 1e-12);
        assert!((m.f1 - 0.8182).abs() < 5e-5);

        assert!(matches!(basic_metrics(Confusion::default()), Err(Error::EmptyInput)));
    }

    #[test]
    fn auc_cases() {
        assert_eq!(auc(&[1, 1, -1, -1], &[2.0, 1.5, 0.3, -1.0]).unwrap(), 1.0);
        assert_eq!(auc(&[1, -1, 1, -1], &[0.2; 4]).unwrap(), 0.5);
        assert_eq!(auc(&[1, -1, 1, -1], &[0.9, 0.8, 0.3, 0.1]).unwrap(), 0.75);
        assert!(matches!(auc(&[1, 1], &[0.1, 0.2]), Err(Error::SingleClass)));
    }

    #[test]
    fn comparison_measures() {
        assert_eq!(f1_diff(0.7, 0.7), 0.0);
        assert!((f1_diff(0.5, 0.5072) + 0.72).abs() < 1e-12);
        assert!((f1_diff(1.0, 0.9) - 10.0).abs() < 1e-12);

        let mut diffs = vec![1.0; 56];
        diffs.extend(vec![-1.0; 36]);
        diffs.extend(vec![0.0; 8]);
        assert_eq!(wins_losses_ratio(&diffs).unwrap(), 20.0);
        assert_eq!(wins_losses_ratio(&[0.3, -0.3]).unwrap(), 0.0);
        assert_eq!(wins_losses_ratio(&[0.1; 7]).unwrap(), 100.0);
        assert!(wins_losses_ratio(&[]).is_err());
    }

    #[test]
    fn metric_lookup() {
        let m = basic_metrics(Confusion {
            tp: 3,
            fp: 1,
            tn: 2,
            fn_: 0,
        })
        .unwrap();
        assert_eq!(m.get("acc").unwrap(), m.acc);
        assert!(matches!(m.get("bogus"), Err(Error::UnknownMetric(_))));
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    fn labels_strategy() -> impl Strategy<Value = Vec<i8>> {
        prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), 2..60)
    }

    proptest! {
        #[test]
        fn auc_invariant_under_monotone_transform(
            truth in labels_strategy(),
            seed in prop::collection::vec(-5.0f64..5.0, 60),
        ) {
            prop_assume!(truth.iter().any(|&y| y > 0) && truth.iter().any(|&y| y < 0));
            let scores: Vec<f64> = seed[..truth.len()].iter().map(|v| (v * 4.0).round() / 4.0).collect();
            let transformed: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + 1.0).collect();
            prop_assert_eq!(auc(&truth, &scores).unwrap(), auc(&truth, &transformed).unwrap());
        }

        #[test]
        fn auc_matches_pair_enumeration(truth in labels_strategy(), seed in prop::collection::vec(0u8..5, 60)) {
            prop_assume!(truth.iter().any(|&y| y > 0) && truth.iter().any(|&y| y < 0));
            let scores: Vec<f64> = seed[..truth.len()].iter().map(|&v| f64::from(v)).collect();
            let (mut credit, mut pairs) = (0.0, 0.0);
            for i in 0..truth.len() {
                for j in 0..truth.len() {
                    if truth[i] > 0 && truth[j] < 0 {
                        pairs += 1.0;
                        credit += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                    }
                }
            }
            prop_assert!((auc(&truth, &scores).unwrap() - credit / pairs).abs() < 1e-12);
        }

        #[test]
        fn f1_diff_antisymmetric(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assert_eq!(f1_diff(a, b), -f1_diff(b, a));
        }

        #[test]
        fn wlr_bounds_and_flip(diffs in prop::collection::vec(-1.0f64..1.0, 1..50)) {
            let w = wins_losses_ratio(&diffs).unwrap();
            prop_assert!((-100.0..=100.0).contains(&w));
            let flipped: Vec<f64> = diffs.iter().map(|d| -d).collect();
            prop_assert_eq!(w + wins_losses_ratio(&flipped).unwrap(), 0.0);
        }

        #[test]
        fn basic_metrics_match_naive_counts(truth in labels_strategy(), flips in prop::collection::vec(prop::bool::ANY, 60)) {
            let pred: Vec<i8> = truth.iter().zip(&flips).map(|(&t, &f)| if f { -t } else { t }).collect();
            let m = basic_metrics(confusion(&truth, &pred).unwrap()).unwrap();
            let n = truth.len() as f64;
            let correct = truth.iter().zip(&pred).filter(|(a, b)| a == b).count() as f64;
            prop_assert!((m.acc - correct / n).abs() < 1e-15);
            let tp = truth.iter().zip(&pred).filter(|(a, b)| **a > 0 && **b > 0).count();
            let pp = pred.iter().filter(|&&p| p > 0).count();
            let ap = truth.iter().filter(|&&t| t > 0).count();
            let p = if pp == 0 { 0.0 } else { tp as f64 / pp as f64 };
            let r = if ap == 0 { 0.0 } else { tp as f64 / ap as f64 };
            prop_assert_eq!(m.precision, p);
            prop_assert_eq!(m.recall, r);
            prop_assert!((0.0..=1.0).contains(&m.f1));
        }
    }
}
