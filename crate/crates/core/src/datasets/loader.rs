use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::manifest::{ColumnKind, DatasetManifest};
use crate::error::{Error, Result};
use crate::stream::{Attribute, Bit, Instance, StreamSchema};

/// Malformed rows beyond this share of all rows abort the load.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

/// Counts and encodings produced by [`load_dataset`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub dataset: String,
    pub files: Vec<PathBuf>,
    pub rows_read: usize,
    pub instances: usize,
    pub dropped_missing_label: usize,
    pub dropped_missing_sensitive: usize,
    pub malformed: usize,
    pub imputed_numeric: usize,
    pub positives: usize,
    pub privileged: usize,
    /// Category tokens per categorical feature; position is the encoded index.
    pub index_maps: BTreeMap<String, Vec<String>>,
}

impl LoadReport {
    pub fn positive_fraction(&self) -> f64 {
        self.positives as f64 / self.instances as f64
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub schema: StreamSchema,
    pub instances: Vec<Instance>,
    pub report: LoadReport,
}

impl LoadedDataset {
    /// Maps an encoded instance back to its feature tokens. Numerics print in
    /// shortest round-trip form.
    pub fn decode(&self, x: &Instance) -> Vec<String> {
        self.schema
            .attributes()
            .iter()
            .zip(&x.features)
            .map(|(a, &v)| match self.report.index_maps.get(&a.name) {
                Some(tokens) if !a.is_numeric() => tokens[v as usize].clone(),
                _ => v.to_string(),
            })
            .collect()
    }
}

enum Feature {
    Numeric {
        sum: f64,
        count: usize,
    },
    Categorical {
        index: HashMap<String, usize>,
        tokens: Vec<String>,
    },
    Sensitive,
}

enum Cell {
    Value(f64),
    Missing,
    NewCategory(String),
}

/// Loads every data file of `manifest` into one stream in file order.
///
/// Categorical tokens are indexed by first appearance, except the sensitive
/// column, whose index is its bit (1 = privileged). Missing numerics take the
/// mean of earlier rows; missing categoricals are an ordinary category.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<LoadedDataset> {
    manifest.validate()?;
    let n_columns = manifest.columns.len();
    let label_col = manifest.column_index(&manifest.label.column).unwrap_or_default();
    let sensitive_col = manifest.column_index(&manifest.sensitive.column).unwrap_or_default();
    let feature_cols: Vec<usize> = manifest.feature_columns().map(|(i, _)| i).collect();
    let mut features: Vec<Feature> = feature_cols
        .iter()
        .map(|&c| match manifest.columns[c].kind {
            _ if c == sensitive_col => Feature::Sensitive,
            ColumnKind::Numeric => Feature::Numeric { sum: 0.0, count: 0 },
            ColumnKind::Categorical => Feature::Categorical {
                index: HashMap::new(),
                tokens: Vec::new(),
            },
        })
        .collect();
    let mut unprivileged_token: Option<String> = None;

    let mut report = LoadReport {
        dataset: manifest.name.clone(),
        files: manifest.paths.clone(),
        rows_read: 0,
        instances: 0,
        dropped_missing_label: 0,
        dropped_missing_sensitive: 0,
        malformed: 0,
        imputed_numeric: 0,
        positives: 0,
        privileged: 0,
        index_maps: BTreeMap::new(),
    };
    let mut first_problem: Option<String> = None;
    let mut instances = Vec::new();
    let mut cells: Vec<Cell> = Vec::with_capacity(feature_cols.len());

    for path in &manifest.paths {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(manifest.delimiter_byte()?)
            .has_headers(manifest.header)
            .comment(manifest.comment_byte()?)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(std::io::BufReader::new(file));
        if manifest.header {
            let header = reader.headers()?;
            let declared: Vec<&str> = manifest.columns.iter().map(|c| c.name.as_str()).collect();
            if header.iter().collect::<Vec<_>>() != declared {
                return Err(Error::InvalidManifest(format!(
                    "{}: header of {} does not match the declared columns",
                    manifest.name,
                    path.display()
                )));
            }
        }
        for record in reader.records() {
            let record = record?;
            report.rows_read += 1;
            let line = record.position().map_or(0, |p| p.line());
            let mut malformed = |reason: String| {
                report.malformed += 1;
                tracing::debug!(file = %path.display(), line, %reason, "dropping malformed row");
                first_problem.get_or_insert_with(|| format!("{}:{line}: {reason}", path.display()));
            };
            if record.len() != n_columns {
                malformed(format!("expected {n_columns} fields, found {}", record.len()));
                continue;
            }
            let label_token = &record[label_col];
            if label_token == manifest.missing {
                report.dropped_missing_label += 1;
                continue;
            }
            let sensitive_token = &record[sensitive_col];
            if sensitive_token == manifest.missing {
                report.dropped_missing_sensitive += 1;
                continue;
            }
            let sensitive: Bit = u8::from(sensitive_token == manifest.sensitive.privileged);
            if sensitive == 0 {
                match &unprivileged_token {
                    None => unprivileged_token = Some(sensitive_token.to_string()),
                    Some(t) if t != sensitive_token => {
                        return Err(Error::InvalidManifest(format!(
                            "{}: sensitive column `{}` has values `{t}` and `{sensitive_token}` besides the privileged `{}`",
                            manifest.name, manifest.sensitive.column, manifest.sensitive.privileged
                        )));
                    }
                    Some(_) => {}
                }
            }
            let label: Bit = u8::from(manifest.label.positive.iter().any(|p| p == label_token));

            // Parse the whole row before committing any encoder state.
            cells.clear();
            let mut bad = None;
            for (slot, &c) in feature_cols.iter().enumerate() {
                let token = &record[c];
                let cell = match &features[slot] {
                    Feature::Sensitive => Cell::Value(f64::from(sensitive)),
                    _ if token == manifest.missing && matches!(features[slot], Feature::Numeric { .. }) => {
                        Cell::Missing
                    }
                    Feature::Numeric { .. } => match token.parse::<f64>() {
                        Ok(v) if v.is_finite() => Cell::Value(v),
                        _ => {
                            bad = Some(format!(
                                "column `{}`: `{token}` is not a number",
                                manifest.columns[c].name
                            ));
                            break;
                        }
                    },
                    Feature::Categorical { index, .. } => match index.get(token) {
                        Some(&i) => Cell::Value(i as f64),
                        None => Cell::NewCategory(token.to_string()),
                    },
                };
                cells.push(cell);
            }
            if let Some(reason) = bad {
                malformed(reason);
                continue;
            }

            let mut values = Vec::with_capacity(cells.len());
            for (slot, cell) in cells.drain(..).enumerate() {
                let v = match (&mut features[slot], cell) {
                    (Feature::Numeric { sum, count }, Cell::Value(v)) => {
                        *sum += v;
                        *count += 1;
                        v
                    }
                    (Feature::Numeric { sum, count }, Cell::Missing) => {
                        report.imputed_numeric += 1;
                        if *count == 0 {
                            0.0
                        } else {
                            *sum / *count as f64
                        }
                    }
                    (Feature::Categorical { index, tokens }, Cell::NewCategory(t)) => {
                        let i = tokens.len();
                        index.insert(t.clone(), i);
                        tokens.push(t);
                        i as f64
                    }
                    (_, Cell::Value(v)) => v,
                    (_, _) => unreachable!("cell kinds follow feature kinds"),
                };
                values.push(v);
            }
            report.positives += usize::from(label);
            report.privileged += usize::from(sensitive);
            instances.push(Instance::new(values, label, sensitive));
        }
    }

    let total = report.rows_read;
    if report.malformed as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(Error::TooManyMalformed {
            path: manifest.paths[0].clone(),
            malformed: report.malformed,
            total,
            first: first_problem.unwrap_or_default(),
        });
    }
    if report.malformed > 0 {
        tracing::warn!(
            dataset = %manifest.name,
            malformed = report.malformed,
            first = first_problem.as_deref().unwrap_or(""),
            "dropped malformed rows"
        );
    }
    if instances.is_empty() {
        return Err(Error::InvalidManifest(format!(
            "{}: no instances loaded",
            manifest.name
        )));
    }

    let mut attributes = Vec::with_capacity(feature_cols.len());
    let mut sensitive_position = 0;
    for (slot, (&c, feature)) in feature_cols.iter().zip(features).enumerate() {
        let name = manifest.columns[c].name.clone();
        match feature {
            Feature::Numeric { .. } => attributes.push(Attribute::numeric(name)),
            Feature::Categorical { tokens, .. } => {
                attributes.push(Attribute::categorical(name.clone(), tokens.len().max(1)));
                report.index_maps.insert(name, tokens);
            }
            Feature::Sensitive => {
                sensitive_position = slot;
                attributes.push(Attribute::categorical(name.clone(), 2));
                report.index_maps.insert(
                    name,
                    vec![
                        unprivileged_token.clone().unwrap_or_default(),
                        manifest.sensitive.privileged.clone(),
                    ],
                );
            }
        }
    }
    report.instances = instances.len();
    let schema = StreamSchema::new(
        attributes,
        sensitive_position,
        manifest.label.column.clone(),
        manifest.label.positive[0].clone(),
        manifest.sensitive.privileged.clone(),
    )?;
    Ok(LoadedDataset {
        schema,
        instances,
        report,
    })
}
