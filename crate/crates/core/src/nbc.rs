//! Count-based categorical naive Bayes.
//!
//! The model keeps exact integer counts from a single pass over the
//! training rows. Probabilities are derived on demand in `f64`, so callers
//! that need exact ratios can read the counts directly.
//!
//! Conditional smoothing uses the Laplace estimator
//! `(count + k) / (class_count + cardinality * k)` where `cardinality` is
//! the number of distinct values of the attribute. Under
//! [`SmoothingMode::LaplaceOnZero`] the smoothed factors are used only for
//! instances whose raw likelihood has a zero count for some class, and then
//! for every class of that instance so the scores stay comparable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{distinct_values, AttributeSchema, Dataset, Instance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingMode {
    None,
    #[default]
    LaplaceOnZero,
    LaplaceAlways,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPolicy {
    pub mode: SmoothingMode,
    pub k: f64,
}

impl SmoothingPolicy {
    pub fn new(mode: SmoothingMode, k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::SmoothingConstant(k));
        }
        Ok(SmoothingPolicy { mode, k })
    }

    pub fn none() -> Self {
        SmoothingPolicy {
            mode: SmoothingMode::None,
            k: 1.0,
        }
    }

    pub fn laplace_always() -> Self {
        SmoothingPolicy {
            mode: SmoothingMode::LaplaceAlways,
            k: 1.0,
        }
    }
}

impl Default for SmoothingPolicy {
    fn default() -> Self {
        SmoothingPolicy {
            mode: SmoothingMode::LaplaceOnZero,
            k: 1.0,
        }
    }
}

/// Laplace (add-k) estimate `(count + k) / (group_total + cardinality * k)`.
pub fn laplace(count: u64, group_total: u64, cardinality: usize, k: f64) -> Result<f64> {
    if cardinality < 1 {
        return Err(Error::Cardinality(cardinality));
    }
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::SmoothingConstant(k));
    }
    debug_assert!(count <= group_total);
    Ok((count as f64 + k) / (group_total as f64 + cardinality as f64 * k))
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    schema: AttributeSchema,
    /// Indexed by schema label order.
    class_count: Vec<u64>,
    total: u64,
    /// Per attribute: value token -> dense value index.
    value_index: Vec<BTreeMap<String, usize>>,
    /// `cond_count[attribute][value][label]`.
    cond_count: Vec<Vec<Vec<u64>>>,
}

/// Per-class likelihoods of one instance, in schema label order.
#[derive(Debug, Clone, PartialEq)]
pub struct Likelihoods {
    pub values: Vec<f64>,
    /// Whether the Laplace estimator produced these values.
    pub smoothed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    /// Posterior scores `P(X|C) * P(C)` in schema label order.
    pub scores: Vec<(String, f64)>,
}

impl NaiveBayesModel {
    /// Counts classes and (attribute, value, class) triples in one pass.
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        dataset.ensure_non_empty()?;
        let schema = dataset.schema().clone();
        let labels = schema.class_labels().len();

        let mut value_index = Vec::with_capacity(schema.attribute_count());
        for attr in schema.attributes() {
            let values = distinct_values(dataset, &attr.name)?;
            value_index.push(
                values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| (v, i))
                    .collect::<BTreeMap<_, _>>(),
            );
        }
        let mut cond_count: Vec<Vec<Vec<u64>>> = value_index
            .iter()
            .map(|vals| vec![vec![0; labels]; vals.len()])
            .collect();
        let mut class_count = vec![0u64; labels];

        for row in dataset.rows() {
            let label = schema
                .label_index(&row.label)
                .ok_or_else(|| Error::UnknownLabel(row.label.clone()))?;
            class_count[label] += 1;
            for (a, value) in row.instance.values().iter().enumerate() {
                let v = value_index[a][value];
                cond_count[a][v][label] += 1;
            }
        }

        Ok(NaiveBayesModel {
            schema,
            class_count,
            total: dataset.len() as u64,
            value_index,
            cond_count,
        })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn label_idx(&self, label: &str) -> Result<usize> {
        self.schema
            .label_index(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn attr_idx(&self, attribute: &str) -> Result<usize> {
        self.schema
            .attribute_index(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))
    }

    pub fn class_count(&self, label: &str) -> Result<u64> {
        Ok(self.class_count[self.label_idx(label)?])
    }

    /// Training count of `value` within `label`; unseen values count 0.
    pub fn cond_count(&self, attribute: &str, value: &str, label: &str) -> Result<u64> {
        let a = self.attr_idx(attribute)?;
        let c = self.label_idx(label)?;
        Ok(self.count_at(a, value, c))
    }

    fn count_at(&self, attribute: usize, value: &str, label: usize) -> u64 {
        self.value_index[attribute]
            .get(value)
            .map_or(0, |&v| self.cond_count[attribute][v][label])
    }

    pub fn value_cardinality(&self, attribute: &str) -> Result<usize> {
        Ok(self.value_index[self.attr_idx(attribute)?].len())
    }

    /// Values known to the model for `attribute`, sorted.
    pub fn values(&self, attribute: &str) -> Result<impl Iterator<Item = &str>> {
        Ok(self.value_index[self.attr_idx(attribute)?]
            .keys()
            .map(String::as_str))
    }

    /// `(class_count, total)` for `label`.
    pub fn prior_ratio(&self, label: &str) -> Result<(u64, u64)> {
        Ok((self.class_count(label)?, self.total))
    }

    pub fn prior(&self, label: &str) -> Result<f64> {
        let (n, d) = self.prior_ratio(label)?;
        Ok(ratio(n, d))
    }

    /// Unsmoothed `(cond_count, class_count)`.
    pub fn conditional_ratio(&self, attribute: &str, value: &str, label: &str) -> Result<(u64, u64)> {
        Ok((
            self.cond_count(attribute, value, label)?,
            self.class_count(label)?,
        ))
    }

    /// `P(value | label)` for one attribute.
    ///
    /// [`SmoothingMode::LaplaceOnZero`] decides smoothing per instance, so in
    /// isolation it yields the raw ratio; use [`Self::likelihoods`] for the
    /// instance-level rule.
    pub fn conditional(
        &self,
        attribute: &str,
        value: &str,
        label: &str,
        policy: SmoothingPolicy,
    ) -> Result<f64> {
        let a = self.attr_idx(attribute)?;
        let c = self.label_idx(label)?;
        self.factor(a, value, c, policy.mode == SmoothingMode::LaplaceAlways, policy.k)
    }

    fn factor(&self, attribute: usize, value: &str, label: usize, smoothed: bool, k: f64) -> Result<f64> {
        let count = self.count_at(attribute, value, label);
        let group = self.class_count[label];
        if smoothed {
            laplace(count, group, self.value_index[attribute].len(), k)
        } else {
            Ok(ratio(count, group))
        }
    }

    fn check_instance(&self, instance: &Instance) -> Result<()> {
        if instance.len() != self.schema.attribute_count() {
            return Err(Error::SchemaViolation {
                row: 0,
                field: "values".into(),
                reason: format!(
                    "expected {} values, found {}",
                    self.schema.attribute_count(),
                    instance.len()
                ),
            });
        }
        Ok(())
    }

    fn product(&self, instance: &Instance, label: usize, smoothed: bool, k: f64) -> Result<f64> {
        let mut p = 1.0;
        for (a, value) in instance.values().iter().enumerate() {
            p *= self.factor(a, value, label, smoothed, k)?;
        }
        Ok(p)
    }

    /// `P(X | C)` for every class in schema order.
    ///
    /// Classes absent from the training data take no part in the zero test
    /// of [`SmoothingMode::LaplaceOnZero`].
    pub fn likelihoods(&self, instance: &Instance, policy: SmoothingPolicy) -> Result<Likelihoods> {
        self.check_instance(instance)?;
        let smoothed = match policy.mode {
            SmoothingMode::None => false,
            SmoothingMode::LaplaceAlways => true,
            SmoothingMode::LaplaceOnZero => self.has_zero_count(instance),
        };
        let values = (0..self.class_count.len())
            .map(|c| self.product(instance, c, smoothed, policy.k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Likelihoods { values, smoothed })
    }

    /// Exact integer test: some observed class has a zero count for some value.
    fn has_zero_count(&self, instance: &Instance) -> bool {
        self.class_count
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .any(|(c, _)| {
                instance
                    .values()
                    .iter()
                    .enumerate()
                    .any(|(a, v)| self.count_at(a, v, c) == 0)
            })
    }

    pub fn likelihood(&self, instance: &Instance, label: &str, policy: SmoothingPolicy) -> Result<f64> {
        let c = self.label_idx(label)?;
        Ok(self.likelihoods(instance, policy)?.values[c])
    }

    pub fn posterior_score(&self, instance: &Instance, label: &str, policy: SmoothingPolicy) -> Result<f64> {
        Ok(self.likelihood(instance, label, policy)? * self.prior(label)?)
    }

    /// Posterior scores for every class, in schema order.
    pub fn posterior_scores(&self, instance: &Instance, policy: SmoothingPolicy) -> Result<Vec<f64>> {
        let lik = self.likelihoods(instance, policy)?;
        Ok(lik
            .values
            .iter()
            .zip(&self.class_count)
            .map(|(l, &n)| l * ratio(n, self.total))
            .collect())
    }

    /// Maximum-posterior label. Ties go to the earliest schema label; labels
    /// with no training rows are never predicted.
    pub fn predict(&self, instance: &Instance, policy: SmoothingPolicy) -> Result<Prediction> {
        let scores = self.posterior_scores(instance, policy)?;
        let best = argmax_observed(&scores, &self.class_count);
        let labels = self.schema.class_labels();
        Ok(Prediction {
            label: labels[best].clone(),
            scores: labels.iter().cloned().zip(scores).collect(),
        })
    }

    /// Index of the predicted label for `instance` together with its likelihoods.
    pub(crate) fn classify(&self, instance: &Instance, policy: SmoothingPolicy) -> Result<(usize, Likelihoods)> {
        let lik = self.likelihoods(instance, policy)?;
        let scores: Vec<f64> = lik
            .values
            .iter()
            .zip(&self.class_count)
            .map(|(l, &n)| l * ratio(n, self.total))
            .collect();
        Ok((argmax_observed(&scores, &self.class_count), lik))
    }
}

fn argmax_observed(scores: &[f64], class_count: &[u64]) -> usize {
    let mut best: Option<usize> = None;
    for (c, &s) in scores.iter().enumerate() {
        if class_count[c] == 0 {
            continue;
        }
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(c),
        }
    }
    best.expect("fitted model has at least one observed class")
}
