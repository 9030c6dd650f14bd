//! Precision/recall/F metrics, k-fold plans, and the filter comparison pipeline.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::noise::{detect_noise, detect_noise_baseline, filter_dataset, NoiseConfig};
use crate::tree::{build_tree, TreeConfig};

/// Counts indexed `[actual][predicted]` over `labels`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn with_labels<S: AsRef<str>>(labels: &[String], predicted: &[S], actual: &[S]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::LengthMismatch {
                predicted: predicted.len(),
                actual: actual.len(),
            });
        }
        if predicted.is_empty() {
            return Err(Error::EmptyPredictions);
        }
        let index = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let mut counts = vec![vec![0; labels.len()]; labels.len()];
        for (p, a) in predicted.iter().zip(actual) {
            counts[index(a.as_ref())?][index(p.as_ref())?] += 1;
        }
        Ok(ConfusionMatrix {
            labels: labels.to_vec(),
            counts,
        })
    }

    fn label_idx(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total())
    }

    fn tp(&self, i: usize) -> u64 {
        self.counts[i][i]
    }

    fn predicted_as(&self, i: usize) -> u64 {
        self.counts.iter().map(|row| row[i]).sum()
    }

    /// Number of instances whose actual label is `labels[i]`.
    fn support(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }
}

/// Matrix over the labels seen in `actual` then `predicted`, in first-appearance order.
pub fn confusion<S: AsRef<str>>(predicted: &[S], actual: &[S]) -> Result<ConfusionMatrix> {
    let mut labels: Vec<String> = Vec::new();
    for l in actual.iter().chain(predicted) {
        if !labels.iter().any(|x| x == l.as_ref()) {
            labels.push(l.as_ref().to_string());
        }
    }
    ConfusionMatrix::with_labels(&labels, predicted, actual)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Metrics {
    fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len().max(1) as f64;
        Metrics {
            precision: items.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: items.iter().map(|m| m.recall).sum::<f64>() / n,
            f_measure: items.iter().map(|m| m.f_measure).sum::<f64>() / n,
        }
    }
}

/// One-vs-rest precision, recall and F for `label`. Zero denominators yield 0.
pub fn precision_recall_f(matrix: &ConfusionMatrix, label: &str) -> Result<Metrics> {
    let i = matrix.label_idx(label)?;
    Ok(class_metrics(matrix, i))
}

fn class_metrics(matrix: &ConfusionMatrix, i: usize) -> Metrics {
    let tp = matrix.tp(i);
    let precision = ratio(tp, matrix.predicted_as(i));
    let recall = ratio(tp, matrix.support(i));
    Metrics {
        precision,
        recall,
        f_measure: f_measure(precision, recall),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    #[default]
    Weighted,
    Macro,
    Micro,
}

impl Averaging {
    pub const ALL: [Averaging; 3] = [Averaging::Weighted, Averaging::Macro, Averaging::Micro];
}

/// Collapses per-class metrics into one triple.
///
/// Macro averages over the labels that occur as actual or predicted;
/// labels absent from both carry no information about the classifier.
pub fn aggregate(matrix: &ConfusionMatrix, averaging: Averaging) -> Metrics {
    let n = matrix.labels.len();
    match averaging {
        Averaging::Micro => {
            let tp = matrix.trace();
            let total = matrix.total();
            // every miss is one FP and one FN when each instance has one label
            let p = ratio(tp, total);
            Metrics {
                precision: p,
                recall: p,
                f_measure: f_measure(p, p),
            }
        }
        Averaging::Macro => {
            let present: Vec<Metrics> = (0..n)
                .filter(|&i| matrix.support(i) > 0 || matrix.predicted_as(i) > 0)
                .map(|i| class_metrics(matrix, i))
                .collect();
            Metrics::mean(&present)
        }
        Averaging::Weighted => {
            let total = matrix.total() as f64;
            let mut out = Metrics {
                precision: 0.0,
                recall: 0.0,
                f_measure: 0.0,
            };
            if total == 0.0 {
                return out;
            }
            for i in 0..n {
                let w = matrix.support(i) as f64 / total;
                let m = class_metrics(matrix, i);
                out.precision += w * m.precision;
                out.recall += w * m.recall;
                out.f_measure += w * m.f_measure;
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Row id -> fold index in `0..k`.
    pub assignments: BTreeMap<usize, usize>,
}

impl FoldPlan {
    /// Ids assigned to `fold`, ascending.
    pub fn fold_ids(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded assignment of rows to `k` folds.
///
/// Rows are shuffled (within each class when stratified), laid end to end
/// with classes in schema order, and dealt round-robin. Fold sizes then
/// differ by at most one overall and, when stratified, per class.
pub fn kfold_plan(dataset: &Dataset, k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    let n = dataset.len();
    if k < 2 || k > n {
        return Err(Error::FoldCount { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order: Vec<usize> = if stratified {
        let labels = dataset.schema().class_labels();
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
        for row in dataset.rows() {
            let c = dataset.schema().label_index(&row.label).unwrap_or(0);
            by_class[c].push(row.id);
        }
        by_class
            .into_iter()
            .flat_map(|mut ids| {
                ids.shuffle(&mut rng);
                ids
            })
            .collect()
    } else {
        let mut ids: Vec<usize> = dataset.ids().collect();
        ids.shuffle(&mut rng);
        ids
    };
    let assignments = order.into_iter().enumerate().map(|(pos, id)| (id, pos % k)).collect();
    Ok(FoldPlan {
        k,
        seed,
        stratified,
        assignments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    None,
    Baseline,
    Dynamic,
}

impl FilterMode {
    pub const ALL: [FilterMode; 3] = [FilterMode::None, FilterMode::Baseline, FilterMode::Dynamic];

    pub fn display_name(self) -> &'static str {
        match self {
            FilterMode::None => "no filter",
            FilterMode::Baseline => "NBC (all misclassified)",
            FilterMode::Dynamic => "dynamic threshold",
        }
    }

    /// Noise ids this filter would remove from `dataset`.
    pub fn noise_ids(self, dataset: &Dataset, noise: NoiseConfig) -> Result<Vec<usize>> {
        match self {
            FilterMode::None => Ok(Vec::new()),
            FilterMode::Baseline => Ok(detect_noise_baseline(dataset, noise)?.noise_ids),
            FilterMode::Dynamic => Ok(detect_noise(dataset, noise)?.noise_ids),
        }
    }

    fn apply(self, dataset: &Dataset, noise: NoiseConfig) -> Result<(Dataset, Vec<usize>)> {
        let report = match self {
            FilterMode::None => return Ok((dataset.clone(), Vec::new())),
            FilterMode::Baseline => detect_noise_baseline(dataset, noise)?,
            FilterMode::Dynamic => detect_noise(dataset, noise)?,
        };
        let filtered = filter_dataset(dataset, &report)?;
        Ok((filtered, report.noise_ids))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseScope {
    /// Filter each fold's training partition only.
    #[default]
    PerFold,
    /// Filter the whole dataset once, then cross-validate on what remains.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineConfig {
    pub noise: NoiseConfig,
    pub tree: TreeConfig,
    pub averaging: Averaging,
    pub scope: NoiseScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub confusion: ConfusionMatrix,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub by_scheme: BTreeMap<Averaging, Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_ids: Vec<usize>,
    pub train_size: usize,
    /// Ids removed by the filter before training.
    pub noise_ids: Vec<usize>,
    pub metrics: Option<FoldMetrics>,
    /// Why the fold produced no metrics, if it did not.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub per_fold: Vec<FoldResult>,
    /// Mean over evaluated folds under the configured averaging.
    pub averaged: Metrics,
    pub averaged_by_scheme: BTreeMap<Averaging, Metrics>,
    pub noise_removed_counts: Vec<usize>,
}

impl MethodResult {
    pub fn evaluated_folds(&self) -> usize {
        self.per_fold.iter().filter(|f| f.metrics.is_some()).count()
    }
}

/// Cross-validates a tree trained on filtered data for one filter mode.
pub fn run_pipeline(
    dataset: &Dataset,
    filter: FilterMode,
    plan: &FoldPlan,
    config: &PipelineConfig,
) -> Result<MethodResult> {
    if plan.assignments.len() != dataset.len() || dataset.ids().any(|id| !plan.assignments.contains_key(&id)) {
        return Err(Error::Schema("fold plan does not cover this dataset".into()));
    }

    let (global_pool, global_noise) = match config.scope {
        NoiseScope::Global => {
            let (filtered, removed) = filter.apply(dataset, config.noise)?;
            (Some(filtered), removed)
        }
        NoiseScope::PerFold => (None, Vec::new()),
    };
    let pool = global_pool.as_ref().unwrap_or(dataset);
    let labels = dataset.schema().class_labels();

    let mut per_fold = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let in_fold = |id: usize| plan.assignments[&id] == fold;
        let test = pool.retain_rows(|r| in_fold(r.id));
        let train = pool.retain_rows(|r| !in_fold(r.id));

        let (train, noise_ids) = match config.scope {
            NoiseScope::PerFold if !train.is_empty() => filter.apply(&train, config.noise)?,
            NoiseScope::PerFold => (train, Vec::new()),
            NoiseScope::Global => (train, global_noise.clone()),
        };
        let test_ids: Vec<usize> = test.ids().collect();

        let skipped = if train.is_empty() {
            Some("training set is empty after filtering".to_string())
        } else if test.is_empty() {
            Some("test fold is empty".to_string())
        } else {
            None
        };
        if let Some(reason) = &skipped {
            log::warn!("fold {fold} ({filter:?}) skipped: {reason}");
            per_fold.push(FoldResult {
                fold,
                test_ids,
                train_size: train.len(),
                noise_ids,
                metrics: None,
                skipped,
            });
            continue;
        }

        let tree = build_tree(&train, config.tree)?;
        let predicted: Vec<&str> = test.rows().iter().map(|r| tree.predict(&r.instance)).collect();
        let actual: Vec<&str> = test.rows().iter().map(|r| r.label.as_str()).collect();
        let confusion = ConfusionMatrix::with_labels(labels, &predicted, &actual)?;
        let by_scheme: BTreeMap<Averaging, Metrics> = Averaging::ALL
            .iter()
            .map(|&a| (a, aggregate(&confusion, a)))
            .collect();
        let chosen = by_scheme[&config.averaging];
        log::debug!(
            "fold {fold} ({filter:?}): train {} removed {} f {:.4}",
            train.len(),
            noise_ids.len(),
            chosen.f_measure
        );
        per_fold.push(FoldResult {
            fold,
            test_ids,
            train_size: train.len(),
            noise_ids,
            metrics: Some(FoldMetrics {
                confusion,
                precision: chosen.precision,
                recall: chosen.recall,
                f_measure: chosen.f_measure,
                by_scheme,
            }),
            skipped: None,
        });
    }

    let averaged_by_scheme: BTreeMap<Averaging, Metrics> = Averaging::ALL
        .iter()
        .map(|&a| {
            let folds: Vec<Metrics> = per_fold
                .iter()
                .filter_map(|f| f.metrics.as_ref().map(|m| m.by_scheme[&a]))
                .collect();
            (a, Metrics::mean(&folds))
        })
        .collect();
    let noise_removed_counts = per_fold.iter().map(|f| f.noise_ids.len()).collect();

    Ok(MethodResult {
        averaged: averaged_by_scheme[&config.averaging],
        averaged_by_scheme,
        per_fold,
        noise_removed_counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub folds: usize,
    pub seed: u64,
    pub stratified: bool,
    pub pipeline: PipelineConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            folds: 10,
            seed: 42,
            stratified: true,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub folds: usize,
    pub seed: u64,
    pub stratified: bool,
    pub averaging: Averaging,
    pub noise_scope: NoiseScope,
    pub per_method: BTreeMap<FilterMode, MethodResult>,
}

/// Runs every filter mode over one shared fold plan.
pub fn compare(dataset: &Dataset, config: &CompareConfig) -> Result<ComparisonReport> {
    let plan = kfold_plan(dataset, config.folds, config.seed, config.stratified)?;
    let per_method = FilterMode::ALL
        .iter()
        .map(|&mode| Ok((mode, run_pipeline(dataset, mode, &plan, &config.pipeline)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(ComparisonReport {
        folds: config.folds,
        seed: config.seed,
        stratified: config.stratified,
        averaging: config.pipeline.averaging,
        noise_scope: config.pipeline.scope,
        per_method,
    })
}

impl ComparisonReport {
    /// A Precision / Recall / F-measure table with one row per method.
    pub fn to_markdown(&self, dataset_name: &str) -> String {
        let mut out = String::new();
        out.push_str("| Dataset/Method | Precision | Recall | F-measure |\n");
        out.push_str("|---|---|---|---|\n");
        for (mode, result) in &self.per_method {
            let m = result.averaged;
            let _ = writeln!(
                out,
                "| {dataset_name} / {} | {:.2} | {:.2} | {:.2} |",
                mode.display_name(),
                m.precision,
                m.recall,
                m.f_measure
            );
        }
        out
    }
}

/// Ids that appear in both lists.
pub fn shared_ids(a: &[usize], b: &[usize]) -> Vec<usize> {
    let set: HashSet<usize> = a.iter().copied().collect();
    b.iter().copied().filter(|id| set.contains(id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::table1;

    const EPS: f64 = 1e-12;

    fn two_class() -> ConfusionMatrix {
        // 8 A correct, 2 A called B, 2 B called A, 8 B correct
        let mut actual = vec!["A"; 10];
        actual.extend(vec!["B"; 10]);
        let mut predicted = vec!["A"; 8];
        predicted.extend(["B", "B", "A", "A"]);
        predicted.extend(vec!["B"; 8]);
        confusion(&predicted, &actual).unwrap()
    }

    #[test]
    fn diagonal_confusion() {
        let labels = ["a", "b", "a", "c", "b"];
        let m = confusion(&labels, &labels).unwrap();
        assert_eq!(m.trace(), 5);
        assert_eq!(m.total(), 5);
        for a in Averaging::ALL {
            let agg = aggregate(&m, a);
            assert_eq!((agg.precision, agg.recall, agg.f_measure), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(
            confusion(&["a"], &["a", "b"]),
            Err(Error::LengthMismatch { .. })
        ));
        let empty: [&str; 0] = [];
        assert!(matches!(confusion(&empty, &empty), Err(Error::EmptyPredictions)));
    }

    #[test]
    fn per_class_counts() {
        let actual: Vec<&str> = [vec!["A"; 10], vec!["B"; 2]].concat();
        let predicted: Vec<&str> = [vec!["A"; 8], vec!["B"; 2], vec!["A"; 2]].concat();
        let m = confusion(&predicted, &actual).unwrap();
        let a = m.label_idx("A").unwrap();
        assert_eq!(m.tp(a), 8);
        assert_eq!(m.predicted_as(a) - m.tp(a), 2);
        assert_eq!(m.support(a) - m.tp(a), 2);
        let r = precision_recall_f(&m, "A").unwrap();
        assert!((r.precision - 0.8).abs() < EPS);
        assert!((r.recall - 0.8).abs() < EPS);
        assert!((r.f_measure - 0.8).abs() < EPS);
        assert!(precision_recall_f(&m, "Z").is_err());
    }

    #[test]
    fn f_measure_examples() {
        let f = f_measure(0.91, 0.30);
        assert!((f - 0.45).abs() < 0.005, "{f}");
        assert_eq!(f_measure(0.0, 0.0), 0.0);
    }

    #[test]
    fn zero_denominators() {
        let labels = vec!["A".to_string(), "B".to_string()];
        let m = ConfusionMatrix::with_labels(&labels, &["A", "A"], &["A", "B"]).unwrap();
        let b = precision_recall_f(&m, "B").unwrap();
        assert_eq!((b.precision, b.recall, b.f_measure), (0.0, 0.0, 0.0));
    }

    #[test]
    fn symmetric_two_class_aggregates() {
        let m = two_class();
        for a in Averaging::ALL {
            let agg = aggregate(&m, a);
            assert!((agg.precision - 0.8).abs() < EPS);
            assert!((agg.recall - 0.8).abs() < EPS);
            assert!((agg.f_measure - 0.8).abs() < EPS);
        }
    }

    #[test]
    fn single_class_aggregate() {
        let m = confusion(&["A", "A", "A"], &["A", "A", "A"]).unwrap();
        let direct = precision_recall_f(&m, "A").unwrap();
        for a in Averaging::ALL {
            assert_eq!(aggregate(&m, a), direct);
        }
    }

    #[test]
    fn kfold_exact_division() {
        let schema = crate::dataset::AttributeSchema::new(
            vec![crate::dataset::Attribute::new("A")],
            "C",
            ["x", "y"],
        )
        .unwrap();
        let rows = (0..100)
            .map(|i| crate::dataset::UncheckedRow::new([format!("v{}", i % 3)], if i % 4 == 0 { "x" } else { "y" }))
            .collect();
        let ds = crate::dataset::validate_dataset(schema, rows).unwrap();
        for stratified in [false, true] {
            let plan = kfold_plan(&ds, 10, 5, stratified).unwrap();
            assert_eq!(plan.fold_sizes(), vec![10; 10]);
            let mut all: Vec<usize> = (0..10).flat_map(|f| plan.fold_ids(f)).collect();
            all.sort();
            assert_eq!(all, (0..100).collect::<Vec<_>>());
            assert_eq!(plan, kfold_plan(&ds, 10, 5, stratified).unwrap());
        }
        assert_ne!(
            kfold_plan(&ds, 10, 5, false).unwrap(),
            kfold_plan(&ds, 10, 6, false).unwrap()
        );
    }

    #[test]
    fn kfold_stratified_table1() {
        let ds = table1();
        let plan = kfold_plan(&ds, 3, 11, true).unwrap();
        for f in 0..3 {
            let ids = plan.fold_ids(f);
            let rejects = ids.iter().filter(|&&id| ds.row(id).unwrap().label == "Reject").count();
            let accepts = ids.len() - rejects;
            assert!((1..=2).contains(&rejects), "fold {f}: {rejects} rejects");
            assert!((1..=2).contains(&accepts), "fold {f}: {accepts} accepts");
        }
        assert!(matches!(kfold_plan(&ds, 10, 1, true), Err(Error::FoldCount { k: 10, n: 9 })));
        assert!(kfold_plan(&ds, 1, 1, true).is_err());
    }

    #[test]
    fn leave_one_out_on_table1() {
        let ds = table1();
        let plan = kfold_plan(&ds, ds.len(), 3, false).unwrap();
        for mode in FilterMode::ALL {
            let r = run_pipeline(&ds, mode, &plan, &PipelineConfig::default()).unwrap();
            assert_eq!(r.per_fold.len(), 9);
            for f in &r.per_fold {
                assert!(shared_ids(&f.test_ids, &f.noise_ids).is_empty());
            }
        }
    }

    #[test]
    fn compare_shares_plan_and_round_trips() {
        let ds = table1();
        let config = CompareConfig {
            folds: 3,
            ..CompareConfig::default()
        };
        let report = compare(&ds, &config).unwrap();
        let folds: Vec<Vec<Vec<usize>>> = report
            .per_method
            .values()
            .map(|m| m.per_fold.iter().map(|f| f.test_ids.clone()).collect())
            .collect();
        assert_eq!(folds.len(), 3);
        assert!(folds.windows(2).all(|w| w[0] == w[1]));

        let json = serde_json::to_string(&report).unwrap();
        let back: ComparisonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);

        let md = report.to_markdown("table1");
        assert!(md.starts_with("| Dataset/Method | Precision | Recall | F-measure |"));
        assert_eq!(md.lines().count(), 5);
    }

    #[test]
    fn global_scope_removes_once() {
        let ds = table1();
        let plan = kfold_plan(&ds, 3, 1, true).unwrap();
        let config = PipelineConfig {
            scope: NoiseScope::Global,
            ..PipelineConfig::default()
        };
        let r = run_pipeline(&ds, FilterMode::Dynamic, &plan, &config).unwrap();
        for f in &r.per_fold {
            assert_eq!(f.noise_ids, [3, 8]);
            assert!(!f.test_ids.contains(&3) && !f.test_ids.contains(&8));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn micro_equals_accuracy_and_weighted_f_bounded(
                pairs in prop::collection::vec((0..4usize, 0..4usize), 1..80)
            ) {
                let names = ["a", "b", "c", "d"];
                let predicted: Vec<&str> = pairs.iter().map(|p| names[p.0]).collect();
                let actual: Vec<&str> = pairs.iter().map(|p| names[p.1]).collect();
                let m = confusion(&predicted, &actual).unwrap();
                let micro = aggregate(&m, Averaging::Micro);
                prop_assert!((micro.precision - m.accuracy()).abs() < 1e-12);
                prop_assert!((micro.recall - m.accuracy()).abs() < 1e-12);

                let per_class: Vec<f64> = m.labels.iter()
                    .filter(|l| actual.contains(&l.as_str()))
                    .map(|l| precision_recall_f(&m, l).unwrap().f_measure)
                    .collect();
                let w = aggregate(&m, Averaging::Weighted);
                let lo = per_class.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = per_class.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(w.f_measure >= lo - 1e-12 && w.f_measure <= hi + 1e-12);
                for a in Averaging::ALL {
                    let g = aggregate(&m, a);
                    for v in [g.precision, g.recall, g.f_measure] {
                        prop_assert!((0.0..=1.0).contains(&v));
                    }
                }
            }

            #[test]
            fn fold_sizes_balanced(n in 2usize..120, k in 2usize..12, seed in any::<u64>(), stratified in any::<bool>()) {
                prop_assume!(k <= n);
                let schema = crate::dataset::AttributeSchema::new(
                    vec![crate::dataset::Attribute::new("A")], "C", ["x", "y", "z"]).unwrap();
                let rows = (0..n).map(|i| crate::dataset::UncheckedRow::new(["v"], ["x", "y", "z"][(i * i) % 3])).collect();
                let ds = crate::dataset::validate_dataset(schema, rows).unwrap();
                let plan = kfold_plan(&ds, k, seed, stratified).unwrap();
                prop_assert_eq!(plan.assignments.len(), n);
                let sizes = plan.fold_sizes();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                if stratified {
                    for label in ["x", "y", "z"] {
                        let mut per = vec![0usize; k];
                        for (id, f) in &plan.assignments {
                            if ds.row(*id).unwrap().label == label { per[*f] += 1; }
                        }
                        prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
                    }
                }
            }
        }
    }
}
