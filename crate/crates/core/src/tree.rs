//! C4.5-style decision tree over categorical attributes.
//!
//! Multiway splits, one child per observed value. No pruning; `min_split`
//! is the only stopping knob besides purity and attribute exhaustion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSchema, Dataset, Instance, LabeledInstance};
use crate::error::{Error, Result};

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitCriterion {
    #[default]
    GainRatio,
    InfoGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub min_split: usize,
    pub split_criterion: SplitCriterion,
}

impl TreeConfig {
    pub fn new(min_split: usize, split_criterion: SplitCriterion) -> Result<Self> {
        if min_split < 1 {
            return Err(Error::Schema("min_split must be at least 1".into()));
        }
        Ok(TreeConfig {
            min_split,
            split_criterion,
        })
    }
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_split: 2,
            split_criterion: SplitCriterion::GainRatio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Internal {
        attribute: String,
        #[serde(rename = "majority")]
        majority_label: String,
        children: BTreeMap<String, TreeNode>,
    },
    Leaf {
        label: String,
        support: usize,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { children, .. } => {
                1 + children.values().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { children, .. } => children.values().map(TreeNode::leaf_count).sum(),
        }
    }
}

/// A trained tree together with the schema it reads instances against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub schema: AttributeSchema,
    pub root: TreeNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitScores {
    pub info_gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
}

impl SplitScores {
    pub fn score(&self, criterion: SplitCriterion) -> f64 {
        match criterion {
            SplitCriterion::GainRatio => self.gain_ratio,
            SplitCriterion::InfoGain => self.info_gain,
        }
    }
}

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroCounts);
    }
    let total = total as f64;
    Ok(class_counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

fn label_counts(schema: &AttributeSchema, rows: &[&LabeledInstance]) -> Vec<usize> {
    let mut counts = vec![0; schema.class_labels().len()];
    for r in rows {
        if let Some(i) = schema.label_index(&r.label) {
            counts[i] += 1;
        }
    }
    counts
}

fn partition_rows<'a>(
    rows: &[&'a LabeledInstance],
    attribute: usize,
) -> BTreeMap<&'a str, Vec<&'a LabeledInstance>> {
    let mut parts: BTreeMap<&str, Vec<&LabeledInstance>> = BTreeMap::new();
    for &r in rows {
        parts.entry(r.instance.value(attribute)).or_default().push(r);
    }
    parts
}

fn scores_for(schema: &AttributeSchema, rows: &[&LabeledInstance], attribute: usize) -> SplitScores {
    let n = rows.len() as f64;
    let parent = entropy(&label_counts(schema, rows)).unwrap_or(0.0);
    let parts = partition_rows(rows, attribute);

    let mut remainder = 0.0;
    let mut sizes = Vec::with_capacity(parts.len());
    for subset in parts.values() {
        let w = subset.len() as f64 / n;
        remainder += w * entropy(&label_counts(schema, subset)).unwrap_or(0.0);
        sizes.push(subset.len());
    }
    let info_gain = (parent - remainder).max(0.0);
    let split_info = entropy(&sizes).unwrap_or(0.0);
    let gain_ratio = if split_info > 0.0 {
        info_gain / split_info
    } else {
        0.0
    };
    SplitScores {
        info_gain,
        split_info,
        gain_ratio,
    }
}

/// Information gain, split information and gain ratio of splitting on `attribute`.
pub fn split_scores(dataset: &Dataset, attribute: &str) -> Result<SplitScores> {
    dataset.ensure_non_empty()?;
    let index = dataset
        .schema()
        .attribute_index(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    let rows: Vec<&LabeledInstance> = dataset.rows().iter().collect();
    Ok(scores_for(dataset.schema(), &rows, index))
}

fn majority(schema: &AttributeSchema, counts: &[usize]) -> String {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    schema.class_labels()[best].clone()
}

struct Builder<'a> {
    schema: &'a AttributeSchema,
    config: TreeConfig,
}

impl Builder<'_> {
    fn grow(&self, rows: &[&LabeledInstance], used: &mut Vec<bool>) -> TreeNode {
        let counts = label_counts(self.schema, rows);
        let majority_label = majority(self.schema, &counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;

        if pure || rows.len() < self.config.min_split {
            return self.leaf(majority_label, rows.len());
        }

        let mut best: Option<(usize, f64)> = None;
        for attribute in (0..self.schema.attribute_count()).filter(|&a| !used[a]) {
            let first = rows[0].instance.value(attribute);
            if rows.iter().all(|r| r.instance.value(attribute) == first) {
                continue;
            }
            let score = scores_for(self.schema, rows, attribute).score(self.config.split_criterion);
            if best.is_none_or(|(_, b)| score > b + TIE_EPS) {
                best = Some((attribute, score));
            }
        }
        let Some((attribute, _)) = best else {
            return self.leaf(majority_label, rows.len());
        };

        used[attribute] = true;
        let children = partition_rows(rows, attribute)
            .into_iter()
            .map(|(value, subset)| (value.to_string(), self.grow(&subset, used)))
            .collect();
        used[attribute] = false;

        TreeNode::Internal {
            attribute: self.schema.attributes()[attribute].name.clone(),
            majority_label,
            children,
        }
    }

    fn leaf(&self, label: String, support: usize) -> TreeNode {
        TreeNode::Leaf { label, support }
    }
}

/// Grows a tree greedily, choosing the best-scoring attribute at each node.
///
/// Ties between attributes go to the lowest schema index; label ties at
/// leaves go to the earliest schema label.
pub fn build_tree(dataset: &Dataset, config: TreeConfig) -> Result<DecisionTree> {
    dataset.ensure_non_empty()?;
    let schema = dataset.schema();
    let rows: Vec<&LabeledInstance> = dataset.rows().iter().collect();
    let builder = Builder { schema, config };
    let mut used = vec![false; schema.attribute_count()];
    let root = builder.grow(&rows, &mut used);
    Ok(DecisionTree {
        schema: schema.clone(),
        root,
    })
}

/// Walks the tree; an unseen value stops at that node's majority label.
pub fn predict_tree<'t>(tree: &'t DecisionTree, instance: &Instance) -> &'t str {
    let mut node = &tree.root;
    loop {
        match node {
            TreeNode::Leaf { label, .. } => return label,
            TreeNode::Internal {
                attribute,
                majority_label,
                children,
            } => {
                let value = tree
                    .schema
                    .attribute_index(attribute)
                    .and_then(|i| instance.values().get(i));
                match value.and_then(|v| children.get(v)) {
                    Some(child) => node = child,
                    None => return majority_label,
                }
            }
        }
    }
}

impl DecisionTree {
    pub fn predict(&self, instance: &Instance) -> &str {
        predict_tree(self, instance)
    }

    /// Fraction of `dataset` rows predicted correctly.
    pub fn accuracy(&self, dataset: &Dataset) -> f64 {
        if dataset.is_empty() {
            return 0.0;
        }
        let hits = dataset
            .rows()
            .iter()
            .filter(|r| self.predict(&r.instance) == r.label)
            .count();
        hits as f64 / dataset.len() as f64
    }
}
