//! Sleep Health & Lifestyle ingestion: CSV validation, cleaning, encoding,
//! interaction features and the stratified train/test split.
//!
//! Column layout of an encoded [`DataTable`] is fixed so that selection
//! indices stay stable across runs:
//!
//! 1. base columns in [`BASE_COLUMNS`] order,
//! 2. one one-hot column per (post-cleaning) occupation, sorted by name,
//! 3. the eight engineered columns in [`ENGINEERED_COLUMNS`] order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::rng;

pub const NUM_CLASSES: usize = 3;

/// Header names of the source file, in file order.
pub const CSV_COLUMNS: [&str; 13] = [
    "Person ID",
    "Gender",
    "Age",
    "Occupation",
    "Sleep Duration",
    "Quality of Sleep",
    "Physical Activity Level",
    "Stress Level",
    "BMI Category",
    "Blood Pressure",
    "Heart Rate",
    "Daily Steps",
    "Sleep Disorder",
];

pub const BASE_COLUMNS: [&str; 11] = [
    "Gender",
    "Age",
    "Sleep Duration",
    "Quality of Sleep",
    "Physical Activity Level",
    "Stress Level",
    "BMI Category",
    "Heart Rate",
    "Daily Steps",
    "Systolic BP",
    "Diastolic BP",
];

pub const ENGINEERED_COLUMNS: [&str; 8] = [
    "stress_sleep_interaction",
    "sleep_heart_ratio",
    "sleep_steps_ratio",
    "sleep_stress_ratio",
    "bmi_activity",
    "pulse_pressure",
    "log_steps",
    "sqrt_sleep",
];

pub const OCCUPATION_PREFIX: &str = "Occupation_";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("malformed blood pressure `{0}`")]
    MalformedBloodPressure(String),
    #[error("unknown category `{value}` in column `{column}`")]
    UnknownCategory { column: String, value: String },
    #[error("non-positive denominator in `{0}`")]
    DivisionDomain(String),
    #[error("class {class} too small for stratified split: {reason}")]
    ClassTooSmall { class: usize, reason: String },
    #[error("invalid train fraction {0}")]
    InvalidFraction(f64),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SleepDisorder {
    Insomnia,
    None,
    SleepApnea,
}

impl SleepDisorder {
    pub const ALL: [SleepDisorder; 3] = [Self::Insomnia, Self::None, Self::SleepApnea];

    pub fn label(self) -> usize {
        match self {
            Self::Insomnia => 0,
            Self::None => 1,
            Self::SleepApnea => 2,
        }
    }

    pub fn from_label(label: usize) -> Option<Self> {
        Self::ALL.get(label).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Insomnia => "Insomnia",
            Self::None => "None",
            Self::SleepApnea => "Sleep Apnea",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "Insomnia" => Some(Self::Insomnia),
            "None" => Some(Self::None),
            "Sleep Apnea" => Some(Self::SleepApnea),
            _ => None,
        }
    }
}

impl fmt::Display for SleepDisorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One validated row of the source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub person_id: i64,
    pub gender: String,
    pub age: u32,
    pub occupation: String,
    pub sleep_duration: f64,
    pub quality_of_sleep: u32,
    pub physical_activity: f64,
    pub stress_level: u32,
    pub bmi_category: String,
    pub blood_pressure: String,
    pub heart_rate: f64,
    pub daily_steps: f64,
    pub sleep_disorder: SleepDisorder,
}

/// A record after cleaning: identifier dropped, rare occupations folded,
/// BMI spelling normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanRecord {
    pub gender: String,
    pub age: u32,
    pub occupation: String,
    pub sleep_duration: f64,
    pub quality_of_sleep: u32,
    pub physical_activity: f64,
    pub stress_level: u32,
    pub bmi_category: String,
    pub blood_pressure: String,
    pub heart_rate: f64,
    pub daily_steps: f64,
    pub sleep_disorder: SleepDisorder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Binary,
    Onehot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
}

/// Numeric sample matrix with per-column metadata and integer class labels
/// (0 = Insomnia, 1 = None, 2 = Sleep Apnea).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub columns: Vec<ColumnMeta>,
    pub x: Matrix,
    pub labels: Vec<usize>,
}

impl DataTable {
    pub fn new(columns: Vec<ColumnMeta>, x: Matrix, labels: Vec<usize>) -> Self {
        assert_eq!(columns.len(), x.cols(), "column metadata mismatch");
        assert_eq!(labels.len(), x.rows(), "label count mismatch");
        Self { columns, x, labels }
    }

    /// Table with generic numeric column names `f0..fN`.
    pub fn from_matrix(x: Matrix, labels: Vec<usize>) -> Self {
        let columns = (0..x.cols())
            .map(|j| ColumnMeta {
                name: format!("f{j}"),
                kind: ColumnKind::Numeric,
            })
            .collect();
        Self::new(columns, x, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.cols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            x: self.x.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
            x: self.x.select_columns(cols),
            labels: self.labels.clone(),
        }
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        class_counts(&self.labels)
    }

    /// Writes the table as CSV with a trailing `label` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.column_names();
        header.push("label".into());
        w.write_record(&header).map_err(io_err)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.labels[i].to_string());
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(|e| DatasetError::Io(e.to_string()))
    }
}

pub fn class_counts(labels: &[usize]) -> [usize; NUM_CLASSES] {
    let mut c = [0; NUM_CLASSES];
    for &l in labels {
        c[l] += 1;
    }
    c
}

fn io_err(e: csv::Error) -> DatasetError {
    DatasetError::Io(e.to_string())
}

/// Category maps used by [`encode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub bmi_midpoints: BTreeMap<String, f64>,
    pub rare_occupation_threshold: usize,
    pub gender_map: BTreeMap<String, f64>,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        // WHO band midpoints.
        let bmi_midpoints = [
            ("Underweight", 17.0),
            ("Normal", 21.7),
            ("Overweight", 27.5),
            ("Obese", 32.5),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let gender_map = [("Female", 0.0), ("Male", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            bmi_midpoints,
            rare_occupation_threshold: 5,
            gender_map,
        }
    }
}

/// Reads and validates the CSV at `path`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<RawRecord>, DatasetError> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| DatasetError::Io(e.to_string()))?;
    read_csv(file)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<RawRecord>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(io_err(e)),
    };
    if headers.iter().all(|h| h.trim().is_empty()) {
        return Err(DatasetError::EmptyFile);
    }
    let norm = |s: &str| s.trim().to_ascii_lowercase();
    let mut positions = [0usize; 13];
    for (slot, name) in positions.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| norm(h) == norm(name))
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // Header is line 1.
        let line = i + 2;
        let row = row.map_err(|e| DatasetError::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let field = |k: usize| -> Result<&str, DatasetError> {
            row.get(positions[k])
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| DatasetError::MalformedRow {
                    line,
                    reason: format!("missing value for `{}`", CSV_COLUMNS[k]),
                })
        };
        records.push(parse_row(line, &field)?);
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    Ok(records)
}

fn parse_row<'a>(
    line: usize,
    field: &dyn Fn(usize) -> Result<&'a str, DatasetError>,
) -> Result<RawRecord, DatasetError> {
    let bad = |reason: String| DatasetError::MalformedRow { line, reason };
    fn num<T: std::str::FromStr>(s: &str, col: &str, line: usize) -> Result<T, DatasetError> {
        s.parse().map_err(|_| DatasetError::MalformedRow {
            line,
            reason: format!("`{col}` is not a number: `{s}`"),
        })
    }
    let score = |k: usize| -> Result<u32, DatasetError> {
        let v: u32 = num(field(k)?, CSV_COLUMNS[k], line)?;
        if !(1..=10).contains(&v) {
            return Err(bad(format!("`{}` out of 1..=10: {v}", CSV_COLUMNS[k])));
        }
        Ok(v)
    };
    let positive = |k: usize| -> Result<f64, DatasetError> {
        let v: f64 = num(field(k)?, CSV_COLUMNS[k], line)?;
        if !v.is_finite() || v < 0.0 {
            return Err(bad(format!(
                "`{}` must be non-negative: {v}",
                CSV_COLUMNS[k]
            )));
        }
        Ok(v)
    };

    let blood_pressure = field(9)?.to_string();
    parse_blood_pressure(&blood_pressure).map_err(|e| bad(e.to_string()))?;
    let disorder_text = field(12)?;
    let sleep_disorder = SleepDisorder::parse(disorder_text)
        .ok_or_else(|| bad(format!("unknown sleep disorder `{disorder_text}`")))?;

    Ok(RawRecord {
        person_id: num(field(0)?, CSV_COLUMNS[0], line)?,
        gender: field(1)?.to_string(),
        age: num(field(2)?, CSV_COLUMNS[2], line)?,
        occupation: field(3)?.to_string(),
        sleep_duration: positive(4)?,
        quality_of_sleep: score(5)?,
        physical_activity: positive(6)?,
        stress_level: score(7)?,
        bmi_category: field(8)?.to_string(),
        blood_pressure,
        heart_rate: positive(10)?,
        daily_steps: positive(11)?,
        sleep_disorder,
    })
}

/// Parses `"SYS/DIA"` into `(systolic, diastolic)`; requires `SYS > DIA > 0`.
pub fn parse_blood_pressure(text: &str) -> Result<(u32, u32), DatasetError> {
    let err = || DatasetError::MalformedBloodPressure(text.to_string());
    let (s, d) = text.trim().split_once('/').ok_or_else(err)?;
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !digits(s) || !digits(d) {
        return Err(err());
    }
    let sys: u32 = s.parse().map_err(|_| err())?;
    let dia: u32 = d.parse().map_err(|_| err())?;
    if dia == 0 || sys <= dia {
        return Err(err());
    }
    Ok((sys, dia))
}

/// Canonical spelling for BMI labels; the source file mixes two spellings
/// of the normal band.
pub fn normalize_bmi(label: &str) -> String {
    match label.trim() {
        "Normal Weight" => "Normal".to_string(),
        other => other.to_string(),
    }
}

/// Drops the identifier, folds occupations seen fewer than
/// `spec.rare_occupation_threshold` times into `"Other"` and normalizes BMI
/// labels.
pub fn clean(records: &[RawRecord], spec: &EncodingSpec) -> Vec<CleanRecord> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *freq.entry(r.occupation.as_str()).or_default() += 1;
    }
    records
        .iter()
        .map(|r| {
            let occupation = if freq[r.occupation.as_str()] < spec.rare_occupation_threshold {
                "Other".to_string()
            } else {
                r.occupation.clone()
            };
            CleanRecord {
                gender: r.gender.clone(),
                age: r.age,
                occupation,
                sleep_duration: r.sleep_duration,
                quality_of_sleep: r.quality_of_sleep,
                physical_activity: r.physical_activity,
                stress_level: r.stress_level,
                bmi_category: normalize_bmi(&r.bmi_category),
                blood_pressure: r.blood_pressure.clone(),
                heart_rate: r.heart_rate,
                daily_steps: r.daily_steps,
                sleep_disorder: r.sleep_disorder,
            }
        })
        .collect()
}

/// Encodes cleaned records into the base + one-hot layout (no engineered
/// columns; see [`engineer_features`]).
pub fn encode(records: &[CleanRecord], spec: &EncodingSpec) -> Result<DataTable, DatasetError> {
    let occupations: Vec<String> = records
        .iter()
        .map(|r| r.occupation.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut columns: Vec<ColumnMeta> = BASE_COLUMNS
        .iter()
        .map(|&name| ColumnMeta {
            name: name.to_string(),
            kind: if name == "Gender" {
                ColumnKind::Binary
            } else {
                ColumnKind::Numeric
            },
        })
        .collect();
    columns.extend(occupations.iter().map(|o| ColumnMeta {
        name: format!("{OCCUPATION_PREFIX}{o}"),
        kind: ColumnKind::Onehot,
    }));

    let mut x = Matrix::zeros(records.len(), columns.len());
    let mut labels = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let gender =
            *spec
                .gender_map
                .get(r.gender.trim())
                .ok_or_else(|| DatasetError::UnknownCategory {
                    column: "Gender".into(),
                    value: r.gender.clone(),
                })?;
        let bmi = *spec
            .bmi_midpoints
            .get(r.bmi_category.trim())
            .ok_or_else(|| DatasetError::UnknownCategory {
                column: "BMI Category".into(),
                value: r.bmi_category.clone(),
            })?;
        let (sys, dia) = parse_blood_pressure(&r.blood_pressure)?;
        let base = [
            gender,
            f64::from(r.age),
            r.sleep_duration,
            f64::from(r.quality_of_sleep),
            r.physical_activity,
            f64::from(r.stress_level),
            bmi,
            r.heart_rate,
            r.daily_steps,
            f64::from(sys),
            f64::from(dia),
        ];
        let row = x.row_mut(i);
        row[..base.len()].copy_from_slice(&base);
        let occ = occupations
            .binary_search(&r.occupation)
            .expect("occupation collected above");
        row[base.len() + occ] = 1.0;
        labels.push(r.sleep_disorder.label());
    }
    Ok(DataTable::new(columns, x, labels))
}

/// Appends the eight interaction features, computed on raw (unscaled)
/// values.
pub fn engineer_features(table: &DataTable) -> Result<DataTable, DatasetError> {
    let col = |name: &str| {
        table
            .column_index(name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let stress = col("Stress Level")?;
    let quality = col("Quality of Sleep")?;
    let sleep = col("Sleep Duration")?;
    let heart = col("Heart Rate")?;
    let steps = col("Daily Steps")?;
    let bmi = col("BMI Category")?;
    let activity = col("Physical Activity Level")?;
    let sys = col("Systolic BP")?;
    let dia = col("Diastolic BP")?;

    let n = table.n_rows();
    let width = table.n_cols() + ENGINEERED_COLUMNS.len();
    let mut x = Matrix::zeros(n, width);
    for i in 0..n {
        let r = table.x.row(i);
        for (name, j) in [
            ("Quality of Sleep", quality),
            ("Heart Rate", heart),
            ("Daily Steps", steps),
            ("Stress Level", stress),
        ] {
            if r[j] <= 0.0 {
                return Err(DatasetError::DivisionDomain(name.to_string()));
            }
        }
        if r[sleep] < 0.0 {
            return Err(DatasetError::MalformedRow {
                line: i + 2,
                reason: "negative sleep duration".into(),
            });
        }
        let engineered = [
            r[stress] / r[quality],
            r[sleep] / r[heart],
            r[sleep] / r[steps],
            r[sleep] / r[stress],
            r[bmi] * r[activity],
            r[sys] - r[dia],
            r[steps].ln(),
            r[sleep].sqrt(),
        ];
        let out = x.row_mut(i);
        out[..r.len()].copy_from_slice(r);
        out[r.len()..].copy_from_slice(&engineered);
    }
    let mut columns = table.columns.clone();
    columns.extend(ENGINEERED_COLUMNS.iter().map(|&name| ColumnMeta {
        name: name.to_string(),
        kind: ColumnKind::Numeric,
    }));
    Ok(DataTable::new(columns, x, table.labels.clone()))
}

/// `load_csv → clean → encode → engineer_features`.
pub fn prepare(path: impl AsRef<Path>, spec: &EncodingSpec) -> Result<DataTable, DatasetError> {
    let raw = load_csv(path)?;
    let cleaned = clean(&raw, spec);
    engineer_features(&encode(&cleaned, spec)?)
}

/// Per-class train quotas: `class_count × fraction`, floored, with the
/// leftover rows handed out by largest fractional remainder (ties go to the
/// lower class index) so the total equals `round(n × fraction)`.
pub fn split_quotas(counts: &[usize], train_fraction: f64) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let target = (total as f64 * train_fraction).round() as usize;
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * train_fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().take(target.saturating_sub(assigned)) {
        quotas[c] += 1;
    }
    quotas
}

/// Row indices of a stratified split. Both index lists are ascending.
pub fn stratified_split_indices(
    labels: &[usize],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 && n < 2 {
            return Err(DatasetError::ClassTooSmall {
                class: c,
                reason: format!("{n} member(s), need at least 2"),
            });
        }
    }
    let quotas = split_quotas(&counts, train_fraction);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if quotas[c] == 0 || quotas[c] == members.len() {
            return Err(DatasetError::ClassTooSmall {
                class: c,
                reason: format!(
                    "{} of {} rows assigned to train leaves a partition empty",
                    quotas[c],
                    members.len()
                ),
            });
        }
        let mut r = rng::derived(seed, c as u64);
        members.shuffle(&mut r);
        train.extend_from_slice(&members[..quotas[c]]);
        test.extend_from_slice(&members[quotas[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    table: &DataTable,
    train_fraction: f64,
    seed: u64,
) -> Result<(DataTable, DataTable), DatasetError> {
    let (train, test) = stratified_split_indices(&table.labels, train_fraction, seed)?;
    Ok((table.subset(&train), table.subset(&test)))
}
