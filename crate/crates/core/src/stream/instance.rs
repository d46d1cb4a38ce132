use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label or sensitive-group value, always normalised to `0` or `1`.
pub type Bit = u8;

/// Positive outcome label.
pub const POSITIVE: Bit = 1;
/// Privileged sensitive-group value.
pub const PRIVILEGED: Bit = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    /// Values are category indices in `0..arity`, stored as `f64`.
    Categorical {
        arity: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>, arity: usize) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Categorical { arity },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }
}

/// Describes the feature layout shared by every instance of one stream.
///
/// The label is kept out of the feature vector. The sensitive attribute is
/// both stored on the instance and mirrored as a binary categorical feature
/// at `sensitive_position`, whose category index equals the sensitive bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSchema {
    attributes: Vec<Attribute>,
    sensitive_position: usize,
    pub label_name: String,
    pub positive_label: String,
    pub privileged_value: String,
}

impl StreamSchema {
    pub fn new(
        attributes: Vec<Attribute>,
        sensitive_position: usize,
        label_name: impl Into<String>,
        positive_label: impl Into<String>,
        privileged_value: impl Into<String>,
    ) -> Result<Self> {
        let sensitive = attributes.get(sensitive_position).ok_or_else(|| {
            Error::InvalidSchema(format!(
                "sensitive position {sensitive_position} outside {} attributes",
                attributes.len()
            ))
        })?;
        if sensitive.kind != (AttributeKind::Categorical { arity: 2 }) {
            return Err(Error::InvalidSchema(format!(
                "sensitive attribute `{}` must be binary categorical",
                sensitive.name
            )));
        }
        let label_name = label_name.into();
        if attributes.iter().any(|a| a.name == label_name) {
            return Err(Error::InvalidSchema(format!(
                "label `{label_name}` must not appear among the features"
            )));
        }
        Ok(StreamSchema {
            attributes,
            sensitive_position,
            label_name,
            positive_label: positive_label.into(),
            privileged_value: privileged_value.into(),
        })
    }

    /// Schema with `n_numeric` numeric features followed by the sensitive feature.
    pub fn numeric_with_sensitive(n_numeric: usize) -> Self {
        let mut attributes: Vec<Attribute> = (0..n_numeric).map(|i| Attribute::numeric(format!("x{i}"))).collect();
        attributes.push(Attribute::categorical("s", 2));
        StreamSchema::new(attributes, n_numeric, "y", "1", "1").expect("valid by construction")
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn sensitive_position(&self) -> usize {
        self.sensitive_position
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if instance.features.len() != self.attributes.len() {
            let position = instance.features.len().min(self.attributes.len());
            let attribute = self
                .attributes
                .get(position)
                .map(|a| a.name.clone())
                .unwrap_or_else(|| format!("<extra feature {position}>"));
            return Err(Error::SchemaMismatch {
                attribute,
                position,
                reason: format!(
                    "expected {} features, got {}",
                    self.attributes.len(),
                    instance.features.len()
                ),
            });
        }
        if instance.label > 1 || instance.sensitive > 1 {
            return Err(Error::SchemaMismatch {
                attribute: self.label_name.clone(),
                position: self.sensitive_position,
                reason: format!(
                    "label {} / sensitive {} must be 0 or 1",
                    instance.label, instance.sensitive
                ),
            });
        }
        for (position, (attr, &value)) in self.attributes.iter().zip(&instance.features).enumerate() {
            let bad = |reason: String| Error::SchemaMismatch {
                attribute: attr.name.clone(),
                position,
                reason,
            };
            match attr.kind {
                AttributeKind::Numeric if !value.is_finite() => {
                    return Err(bad(format!("non-finite numeric value {value}")));
                }
                AttributeKind::Categorical { arity }
                    if value < 0.0 || value.fract() != 0.0 || value as usize >= arity =>
                {
                    return Err(bad(format!("category index {value} not below arity {arity}")));
                }
                _ => {}
            }
        }
        if instance.features[self.sensitive_position] != f64::from(instance.sensitive) {
            return Err(Error::SchemaMismatch {
                attribute: self.attributes[self.sensitive_position].name.clone(),
                position: self.sensitive_position,
                reason: "mirrored sensitive feature disagrees with the sensitive bit".into(),
            });
        }
        Ok(())
    }
}

/// One labelled stream sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: Bit,
    pub sensitive: Bit,
    pub is_synthetic: bool,
}

impl Instance {
    pub fn new(features: Vec<f64>, label: Bit, sensitive: Bit) -> Self {
        Instance {
            features,
            label,
            sensitive,
            is_synthetic: false,
        }
    }

    /// Copy with the sensitive bit switched, both on the instance and at the
    /// mirrored feature position.
    pub fn counterfactual(&self, schema: &StreamSchema) -> Instance {
        let mut flipped = self.clone();
        flipped.sensitive = 1 - self.sensitive;
        flipped.features[schema.sensitive_position()] = f64::from(flipped.sensitive);
        flipped
    }
}
