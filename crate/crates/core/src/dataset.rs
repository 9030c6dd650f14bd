//! Schema-validated categorical datasets.
//!
//! Every attribute value is an opaque text token. Numeric or temporal
//! columns must be discretized before they reach this module (see
//! [`crate::ingest`]).

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A feature attribute with an optional closed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    /// Values the attribute may take even if they never occur in the data.
    /// When present, observed values must belong to this set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_values: Option<BTreeSet<String>>,
}

impl Attribute {
    pub fn new(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            declared_values: None,
        }
    }

    pub fn with_values<I, S>(name: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Attribute {
            name: name.into(),
            declared_values: Some(values.into_iter().map(Into::into).collect()),
        }
    }
}

/// Feature attributes plus the class attribute and its ordered labels.
///
/// Label order is significant: it breaks every argmax tie in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    class_attribute: String,
    class_labels: Vec<String>,
}

impl AttributeSchema {
    pub fn new<L, S>(
        attributes: Vec<Attribute>,
        class_attribute: impl Into<String>,
        class_labels: L,
    ) -> Result<Self>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let class_attribute = class_attribute.into();
        let class_labels: Vec<String> = class_labels.into_iter().map(Into::into).collect();

        let mut seen = HashSet::new();
        for attr in &attributes {
            if attr.name.is_empty() {
                return Err(Error::Schema("attribute names must be non-empty".into()));
            }
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute `{}`", attr.name)));
            }
        }
        if class_attribute.is_empty() {
            return Err(Error::Schema("class attribute name must be non-empty".into()));
        }
        if seen.contains(class_attribute.as_str()) {
            return Err(Error::Schema(format!(
                "class attribute `{class_attribute}` is also a feature attribute"
            )));
        }
        if class_labels.is_empty() {
            return Err(Error::Schema("at least one class label is required".into()));
        }
        let mut labels = HashSet::new();
        for label in &class_labels {
            if label.is_empty() {
                return Err(Error::Schema("class labels must be non-empty".into()));
            }
            if !labels.insert(label.as_str()) {
                return Err(Error::Schema(format!("duplicate class label `{label}`")));
            }
        }

        Ok(AttributeSchema {
            attributes,
            class_attribute,
            class_labels,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn class_attribute(&self) -> &str {
        &self.class_attribute
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == label)
    }
}

/// One categorical feature vector, aligned with the schema's attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    values: Vec<String>,
}

impl Instance {
    pub fn new<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Instance {
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn value(&self, attribute: usize) -> &str {
        &self.values[attribute]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks arity and non-emptiness against `schema`, reporting `row` on failure.
    pub fn check(&self, schema: &AttributeSchema, row: usize) -> Result<()> {
        if self.values.len() != schema.attribute_count() {
            return Err(Error::SchemaViolation {
                row,
                field: "values".into(),
                reason: format!(
                    "expected {} values, found {}",
                    schema.attribute_count(),
                    self.values.len()
                ),
            });
        }
        for (value, attr) in self.values.iter().zip(schema.attributes()) {
            if value.is_empty() {
                return Err(Error::SchemaViolation {
                    row,
                    field: attr.name.clone(),
                    reason: "missing value".into(),
                });
            }
            if let Some(declared) = &attr.declared_values {
                if !declared.contains(value) {
                    return Err(Error::SchemaViolation {
                        row,
                        field: attr.name.clone(),
                        reason: format!("value `{value}` is not declared"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub id: usize,
    pub instance: Instance,
    pub label: String,
}

/// A row that has not been checked against a schema yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncheckedRow {
    pub id: Option<usize>,
    pub values: Vec<String>,
    pub label: String,
}

impl UncheckedRow {
    pub fn new<I, S>(values: I, label: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        UncheckedRow {
            id: None,
            values: values.into_iter().map(Into::into).collect(),
            label: label.into(),
        }
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = Some(id);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    schema: AttributeSchema,
    rows: Vec<LabeledInstance>,
}

/// Validates `rows` against `schema`.
///
/// Ids are kept when every row carries one and reassigned `0..N` in input
/// order when none does. Mixing the two is a schema violation.
pub fn validate_dataset(schema: AttributeSchema, rows: Vec<UncheckedRow>) -> Result<Dataset> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let explicit_ids = rows[0].id.is_some();
    let mut seen_ids = HashSet::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());

    for (index, row) in rows.into_iter().enumerate() {
        let id = match (explicit_ids, row.id) {
            (true, Some(id)) => id,
            (false, None) => index,
            _ => {
                return Err(Error::SchemaViolation {
                    row: index,
                    field: "id".into(),
                    reason: "either every row or no row must carry an id".into(),
                })
            }
        };
        if !seen_ids.insert(id) {
            return Err(Error::SchemaViolation {
                row: index,
                field: "id".into(),
                reason: format!("duplicate id {id}"),
            });
        }
        let instance = Instance { values: row.values };
        instance.check(&schema, index)?;
        if schema.label_index(&row.label).is_none() {
            return Err(Error::SchemaViolation {
                row: index,
                field: schema.class_attribute().to_string(),
                reason: format!("label `{}` is not a class label", row.label),
            });
        }
        out.push(LabeledInstance {
            id,
            instance,
            label: row.label,
        });
    }

    Ok(Dataset { schema, rows: out })
}

impl Dataset {
    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[LabeledInstance] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.id)
    }

    pub fn row(&self, id: usize) -> Option<&LabeledInstance> {
        self.rows.iter().find(|r| r.id == id)
    }

    /// Rows for which `keep` holds, in order, with ids and schema retained.
    ///
    /// The result may be empty; training operations reject empty datasets.
    pub fn retain_rows(&self, mut keep: impl FnMut(&LabeledInstance) -> bool) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    /// Same rows with labels replaced; used by noise injection.
    pub(crate) fn with_rows(&self, rows: Vec<LabeledInstance>) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows,
        }
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.rows.is_empty() {
            Err(Error::EmptyRows)
        } else {
            Ok(())
        }
    }

    /// Per-label row counts in schema label order.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.schema.class_labels().len()];
        for row in &self.rows {
            if let Some(i) = self.schema.label_index(&row.label) {
                counts[i] += 1;
            }
        }
        counts
    }
}

/// Values observed for `attribute`, together with any declared values.
pub fn distinct_values(dataset: &Dataset, attribute: &str) -> Result<BTreeSet<String>> {
    let index = dataset
        .schema
        .attribute_index(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    let mut values: BTreeSet<String> = dataset
        .rows
        .iter()
        .map(|r| r.instance.value(index).to_string())
        .collect();
    if let Some(declared) = &dataset.schema.attributes[index].declared_values {
        values.extend(declared.iter().cloned());
    }
    Ok(values)
}
