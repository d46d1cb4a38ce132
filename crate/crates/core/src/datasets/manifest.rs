use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSpec {
    pub column: String,
    /// Tokens mapped to the positive label; everything else is negative.
    pub positive: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitiveSpec {
    pub column: String,
    pub privileged: String,
}

fn default_delimiter() -> String {
    ",".into()
}

fn default_missing() -> String {
    "?".into()
}

/// Declarative description of a CSV dataset.
///
/// Paths are resolved against the directory holding the manifest file. Rows
/// spread over several files are concatenated in the listed order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub paths: Vec<PathBuf>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default)]
    pub header: bool,
    #[serde(default = "default_missing")]
    pub missing: String,
    /// Lines starting with this single character are skipped.
    #[serde(default)]
    pub comment_prefix: Option<String>,
    pub label: LabelSpec,
    pub sensitive: SensitiveSpec,
    /// Columns read but not turned into features.
    #[serde(default)]
    pub drop: Vec<String>,
    pub columns: Vec<ColumnSpec>,
}

impl DatasetManifest {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let manifest: DatasetManifest = toml::from_str(text).map_err(|source| Error::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Reads a manifest and resolves its paths against the manifest's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest = DatasetManifest::from_toml(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut manifest.paths {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(manifest)
    }

    /// Points every data file at `dir`, keeping file names.
    pub fn rebase(mut self, dir: impl AsRef<Path>) -> Self {
        for p in &mut self.paths {
            if let Some(file) = p.file_name() {
                *p = dir.as_ref().join(file);
            }
        }
        self
    }

    pub fn delimiter_byte(&self) -> Result<u8> {
        single_byte(&self.delimiter, "delimiter")
    }

    pub fn comment_byte(&self) -> Result<Option<u8>> {
        self.comment_prefix
            .as_deref()
            .map(|c| single_byte(c, "comment_prefix"))
            .transpose()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Columns that become features, in file order.
    pub fn feature_columns(&self) -> impl Iterator<Item = (usize, &ColumnSpec)> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.name != self.label.column && !self.drop.contains(&c.name))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidManifest(format!("{}: {m}", self.name)));
        if self.paths.is_empty() {
            return fail("no data paths".into());
        }
        let mut seen = HashSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return fail(format!("column `{}` declared twice", c.name));
            }
        }
        for (role, name) in [("label", &self.label.column), ("sensitive", &self.sensitive.column)] {
            if self.column_index(name).is_none() {
                return fail(format!("{role} column `{name}` is not declared"));
            }
        }
        if self.label.column == self.sensitive.column {
            return fail("label and sensitive columns must differ".into());
        }
        if self.label.positive.is_empty() {
            return fail("label needs at least one positive value".into());
        }
        for d in &self.drop {
            if self.column_index(d).is_none() {
                return fail(format!("dropped column `{d}` is not declared"));
            }
            if *d == self.sensitive.column {
                return fail("the sensitive column cannot be dropped".into());
            }
        }
        let sensitive = &self.columns[self.column_index(&self.sensitive.column).unwrap_or_default()];
        if sensitive.kind != ColumnKind::Categorical {
            return fail(format!("sensitive column `{}` must be categorical", sensitive.name));
        }
        if self.feature_columns().count() < 2 {
            return fail("need at least one feature besides the sensitive attribute".into());
        }
        self.delimiter_byte()?;
        self.comment_byte()?;
        Ok(())
    }
}

fn single_byte(s: &str, what: &str) -> Result<u8> {
    match s.as_bytes() {
        [b] => Ok(*b),
        _ => Err(Error::InvalidManifest(format!(
            "{what} must be a single byte, got {s:?}"
        ))),
    }
}
