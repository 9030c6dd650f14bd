//! Naive-Bayes noise detection with a dynamic threshold.
//!
//! The training set is classified by a model fitted on itself. Rows whose
//! prediction matches their label are *pure*; the rest are *misclassified*.
//! The smallest score among pure rows becomes the noise threshold, and only
//! misclassified rows scoring strictly below it are reported as noise. The
//! baseline detector instead reports every misclassified row.
//!
//! A row's score is the likelihood of its recorded label (or, with
//! [`ScoreKind::Posterior`], likelihood times prior).

use std::collections::HashSet;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nbc::{NaiveBayesModel, SmoothingPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    #[default]
    Likelihood,
    Posterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseConfig {
    pub policy: SmoothingPolicy,
    pub score: ScoreKind,
}

impl From<SmoothingPolicy> for NoiseConfig {
    fn from(policy: SmoothingPolicy) -> Self {
        NoiseConfig {
            policy,
            score: ScoreKind::Likelihood,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMethod {
    DynamicThreshold,
    AllMisclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureEntry {
    pub id: usize,
    pub likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisEntry {
    pub id: usize,
    pub likelihood: f64,
    pub predicted: String,
    pub actual: String,
}

/// Pure and misclassified rows, each sorted by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassificationPartition {
    pub pure: Vec<PureEntry>,
    pub mis: Vec<MisEntry>,
}

impl ClassificationPartition {
    pub fn pure_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.pure.iter().map(|e| e.id)
    }

    pub fn mis_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.mis.iter().map(|e| e.id)
    }
}

/// Pure rows sharing one bit-identical score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodGroup {
    pub probability: f64,
    #[serde(rename = "ids")]
    pub member_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub method: NoiseMethod,
    /// `None` for the baseline and when no row was purely classified.
    pub threshold: Option<f64>,
    /// Sorted ascending.
    pub noise_ids: Vec<usize>,
    pub partition: ClassificationPartition,
    pub pure_groups: Vec<LikelihoodGroup>,
    pub warning: Option<String>,
}

impl Serialize for NoiseReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("NoiseReport", 5)?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("threshold", &self.threshold)?;
        s.serialize_field("noise_ids", &self.noise_ids)?;
        s.serialize_field("pure_groups", &self.pure_groups)?;
        s.serialize_field("mis", &self.partition.mis)?;
        s.end()
    }
}

/// The JSON shape of a [`NoiseReport`], for consumers reading it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReportDocument {
    pub method: NoiseMethod,
    pub threshold: Option<f64>,
    pub noise_ids: Vec<usize>,
    pub pure_groups: Vec<LikelihoodGroup>,
    pub mis: Vec<MisEntry>,
}

/// Classifies every row of `dataset` with `model` (normally fitted on it).
pub fn partition_by_classification(
    model: &NaiveBayesModel,
    dataset: &Dataset,
    config: impl Into<NoiseConfig>,
) -> Result<ClassificationPartition> {
    let config = config.into();
    if model.schema() != dataset.schema() {
        return Err(Error::Schema(
            "model and dataset were built from different schemas".into(),
        ));
    }
    let labels = dataset.schema().class_labels();
    let mut partition = ClassificationPartition::default();

    for row in dataset.rows() {
        let (predicted, lik) = model.classify(&row.instance, config.policy)?;
        let actual = dataset
            .schema()
            .label_index(&row.label)
            .ok_or_else(|| Error::UnknownLabel(row.label.clone()))?;
        let mut score = lik.values[actual];
        if config.score == ScoreKind::Posterior {
            score *= model.prior(&row.label)?;
        }
        if predicted == actual {
            partition.pure.push(PureEntry {
                id: row.id,
                likelihood: score,
            });
        } else {
            partition.mis.push(MisEntry {
                id: row.id,
                likelihood: score,
                predicted: labels[predicted].clone(),
                actual: row.label.clone(),
            });
        }
    }
    partition.pure.sort_by_key(|e| e.id);
    partition.mis.sort_by_key(|e| e.id);
    Ok(partition)
}

/// Smallest score among the purely classified rows.
pub fn compute_threshold(partition: &ClassificationPartition) -> Result<f64> {
    partition
        .pure
        .iter()
        .map(|e| e.likelihood)
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptyPure)
}

/// Groups pure rows by exact score, highest score first.
pub fn group_pure_likelihoods(partition: &ClassificationPartition) -> Vec<LikelihoodGroup> {
    let mut entries: Vec<&PureEntry> = partition.pure.iter().collect();
    entries.sort_by(|a, b| b.likelihood.total_cmp(&a.likelihood).then(a.id.cmp(&b.id)));

    let mut groups: Vec<LikelihoodGroup> = Vec::new();
    for e in entries {
        match groups.last_mut() {
            Some(g) if g.probability.to_bits() == e.likelihood.to_bits() => g.member_ids.push(e.id),
            _ => groups.push(LikelihoodGroup {
                probability: e.likelihood,
                member_ids: vec![e.id],
            }),
        }
    }
    groups
}

fn classify_dataset(
    dataset: &Dataset,
    config: NoiseConfig,
) -> Result<(ClassificationPartition, Vec<LikelihoodGroup>)> {
    let model = NaiveBayesModel::fit(dataset)?;
    let partition = partition_by_classification(&model, dataset, config)?;
    let groups = group_pure_likelihoods(&partition);
    Ok((partition, groups))
}

/// Flags misclassified rows whose score is strictly below the noise threshold.
pub fn detect_noise(dataset: &Dataset, config: impl Into<NoiseConfig>) -> Result<NoiseReport> {
    let (partition, pure_groups) = classify_dataset(dataset, config.into())?;

    let (threshold, noise_ids, warning) = match compute_threshold(&partition) {
        Ok(t) => {
            let ids = partition
                .mis
                .iter()
                .filter(|e| e.likelihood < t)
                .map(|e| e.id)
                .collect();
            (Some(t), ids, None)
        }
        Err(Error::EmptyPure) => {
            let msg = "no purely classified rows; nothing flagged as noise".to_string();
            log::warn!("{msg}");
            (None, Vec::new(), Some(msg))
        }
        Err(e) => return Err(e),
    };

    Ok(NoiseReport {
        method: NoiseMethod::DynamicThreshold,
        threshold,
        noise_ids,
        partition,
        pure_groups,
        warning,
    })
}

/// Flags every misclassified row.
pub fn detect_noise_baseline(dataset: &Dataset, config: impl Into<NoiseConfig>) -> Result<NoiseReport> {
    let (partition, pure_groups) = classify_dataset(dataset, config.into())?;
    let noise_ids = partition.mis_ids().collect();
    Ok(NoiseReport {
        method: NoiseMethod::AllMisclassified,
        threshold: None,
        noise_ids,
        partition,
        pure_groups,
        warning: None,
    })
}

/// Drops the reported noise rows, keeping order and ids.
pub fn filter_dataset(dataset: &Dataset, report: &NoiseReport) -> Result<Dataset> {
    let present: HashSet<usize> = dataset.ids().collect();
    if let Some(&id) = report.noise_ids.iter().find(|id| !present.contains(id)) {
        return Err(Error::UnknownId(id));
    }
    let noise: HashSet<usize> = report.noise_ids.iter().copied().collect();
    Ok(dataset.retain_rows(|r| !noise.contains(&r.id)))
}
