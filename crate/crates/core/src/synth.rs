//! Rule-based synthetic datasets with controlled label noise.
//!
//! Attribute values are drawn uniformly and labelled by a first-match rule
//! table, so the clean labels are known exactly. [`inject_noise`] then flips
//! a fixed number of labels and records which ones, giving an oracle for
//! noise detectors.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{validate_dataset, Attribute, AttributeSchema, Dataset, UncheckedRow};
use crate::error::{Error, Result};
use crate::eval::f_measure;
use crate::noise::NoiseReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(rename = "match")]
    pub conditions: BTreeMap<String, String>,
    pub label: String,
}

fn default_class_attribute() -> String {
    "Class".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub attributes: Vec<AttributeSpec>,
    pub rules: Vec<Rule>,
    /// Catch-all label for rows no rule matches.
    pub default_label: String,
    pub n: usize,
    pub seed: u64,
    /// Full label set; defaults to the rule labels then the default label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default = "default_class_attribute")]
    pub class_attribute: String,
}

impl GeneratorConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: GeneratorConfig =
            serde_json::from_str(text).map_err(|e| Error::Generator(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn class_labels(&self) -> Vec<String> {
        if let Some(labels) = &self.labels {
            return labels.clone();
        }
        let mut labels: Vec<String> = Vec::new();
        for l in self.rules.iter().map(|r| &r.label).chain([&self.default_label]) {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
        labels
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Generator(m));
        if self.n < 1 {
            return bad("n must be at least 1".into());
        }
        if self.attributes.is_empty() {
            return bad("at least one attribute is required".into());
        }
        for a in &self.attributes {
            let distinct: HashSet<&String> = a.values.iter().collect();
            if a.values.is_empty() || distinct.len() != a.values.len() {
                return bad(format!("attribute `{}` needs distinct, non-empty values", a.name));
            }
        }
        if self.default_label.is_empty() {
            return bad("a catch-all default_label is required".into());
        }
        let labels = self.class_labels();
        for rule in &self.rules {
            if !labels.contains(&rule.label) {
                return bad(format!("rule label `{}` is not a class label", rule.label));
            }
            for (attr, value) in &rule.conditions {
                let Some(spec) = self.attributes.iter().find(|a| &a.name == attr) else {
                    return bad(format!("rule refers to unknown attribute `{attr}`"));
                };
                if !spec.values.contains(value) {
                    return bad(format!("rule value `{value}` is not a value of `{attr}`"));
                }
            }
        }
        if !labels.contains(&self.default_label) {
            return bad(format!("default label `{}` is not a class label", self.default_label));
        }
        self.schema().map(|_| ())
    }

    fn schema(&self) -> Result<AttributeSchema> {
        AttributeSchema::new(
            self.attributes.iter().map(|a| Attribute::new(a.name.clone())).collect(),
            self.class_attribute.clone(),
            self.class_labels(),
        )
        .map_err(|e| Error::Generator(e.to_string()))
    }

    /// Label the rule table assigns to `values` (aligned with `attributes`).
    pub fn label_for(&self, values: &[String]) -> &str {
        let matches = |rule: &Rule| {
            rule.conditions.iter().all(|(attr, want)| {
                self.attributes
                    .iter()
                    .position(|a| &a.name == attr)
                    .is_some_and(|i| &values[i] == want)
            })
        };
        self.rules
            .iter()
            .find(|r| matches(r))
            .map_or(self.default_label.as_str(), |r| r.label.as_str())
    }
}

/// Draws `config.n` rows uniformly over attribute values and labels them by rule.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rows = (0..config.n)
        .map(|_| {
            let values: Vec<String> = config
                .attributes
                .iter()
                .map(|a| a.values[rng.gen_range(0..a.values.len())].clone())
                .collect();
            let label = config.label_for(&values).to_string();
            UncheckedRow::new(values, label)
        })
        .collect();
    validate_dataset(config.schema()?, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseInjection {
    pub rate: f64,
    pub seed: u64,
    pub flipped_ids: BTreeSet<usize>,
    pub original_labels: BTreeMap<usize, String>,
}

/// Number of rows flipped at `rate`: `floor(rate * n)`, tolerant of decimal
/// representation error (0.29 * 100 flips 29 rows, not 28).
pub fn flip_count(rate: f64, n: usize) -> usize {
    (rate * n as f64 + 1e-9).floor() as usize
}

/// Flips `flip_count(rate, N)` distinct rows to a different, uniformly chosen label.
pub fn inject_noise(dataset: &Dataset, rate: f64, seed: u64) -> Result<(Dataset, NoiseInjection)> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Injection(format!("rate {rate} is outside [0, 1]")));
    }
    let labels = dataset.schema().class_labels();
    let flips = flip_count(rate, dataset.len());
    if flips > 0 && labels.len() < 2 {
        return Err(Error::Injection("label noise needs at least two class labels".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = dataset.rows().to_vec();
    let mut injection = NoiseInjection {
        rate,
        seed,
        flipped_ids: BTreeSet::new(),
        original_labels: BTreeMap::new(),
    };
    let mut positions = sample(&mut rng, rows.len(), flips).into_vec();
    positions.sort_unstable();
    for pos in positions {
        let row = &mut rows[pos];
        let others: Vec<&String> = labels.iter().filter(|l| **l != row.label).collect();
        let new_label = others[rng.gen_range(0..others.len())].clone();
        injection.flipped_ids.insert(row.id);
        injection
            .original_labels
            .insert(row.id, std::mem::replace(&mut row.label, new_label));
    }
    Ok((dataset.with_rows(rows), injection))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScores {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

/// Scores a detector's noise ids against the injected flips.
pub fn evaluate_detection(report: &NoiseReport, injection: &NoiseInjection) -> Result<DetectionScores> {
    let known: HashSet<usize> = report
        .partition
        .pure_ids()
        .chain(report.partition.mis_ids())
        .collect();
    if let Some(id) = injection.flipped_ids.iter().find(|id| !known.contains(id)) {
        return Err(Error::IdMismatch(format!("flipped id {id} is not in the report")));
    }
    if let Some(id) = report.noise_ids.iter().find(|id| !known.contains(id)) {
        return Err(Error::IdMismatch(format!("noise id {id} is not in the report")));
    }

    let flagged: HashSet<usize> = report.noise_ids.iter().copied().collect();
    let tp = flagged.iter().filter(|id| injection.flipped_ids.contains(id)).count();
    let fp = flagged.len() - tp;
    let fn_ = injection.flipped_ids.len() - tp;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok(DetectionScores {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        f_measure: f_measure(precision, recall),
    })
}
