//! Synthetic classification datasets and a plain CSV loader.
//!
//! Two generator regimes:
//!
//! * [`gen_blobs`]: few classes, dense Gaussian clusters. Every input
//!   coordinate carries signal and noise.
//! * [`gen_sparse_manyclass`]: many classes with few samples each; each class
//!   lives on its own small subset of input coordinates and every other
//!   coordinate holds weak background noise (or exact zeros), so per-sample
//!   gradients of most first-layer weights are near zero.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::tensor::Tensor;

/// Distance of blob centres from the origin.
pub const BLOB_SCALE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `[n, d]`
    pub features: Tensor,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub split: Split,
}

impl Dataset {
    pub fn new(features: Tensor, labels: Vec<usize>, classes: usize, split: Split) -> Result<Self> {
        let rows = match features.shape() {
            &[n, _] => n,
            s => return Err(Error::invalid(format!("features must be [n, d], got {s:?}"))),
        };
        if rows != labels.len() {
            return Err(Error::invalid(format!("{rows} feature rows but {} labels", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::invalid(format!("label {bad} outside [0, {classes})")));
        }
        Ok(Dataset {
            features,
            labels,
            classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.shape()[1]
    }

    pub fn sample(&self, i: usize) -> Tensor {
        Tensor::from_vec(self.features.row(i).to_vec())
    }

    /// Samples per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

fn check_counts(k: usize, per_class: usize, min_per_class: usize, d: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 classes, got {k}")));
    }
    if per_class < min_per_class {
        return Err(Error::invalid(format!(
            "need at least {min_per_class} samples per class, got {per_class}"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    Ok(())
}

/// Class centres: simplex vertices `BLOB_SCALE · e_c` when `k <= d`, otherwise
/// points on the coordinate axes at radius `BLOB_SCALE · (1 + c / d)`.
pub fn blob_centres(k: usize, d: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|c| {
            let mut centre = vec![0.0; d];
            centre[c % d] = BLOB_SCALE * (1 + c / d) as f64;
            centre
        })
        .collect()
}

fn draw_split(
    centres: &[Vec<f64>],
    per_class: usize,
    noise: impl Fn(usize, &mut RngStream) -> Vec<f64>,
    split: Split,
    stream: &mut RngStream,
) -> Result<Dataset> {
    let k = centres.len();
    let d = centres[0].len();
    let mut data = Vec::with_capacity(k * per_class * d);
    let mut labels = Vec::with_capacity(k * per_class);
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_class {
            let eps = noise(c, stream);
            data.extend(centre.iter().zip(&eps).map(|(m, e)| m + e));
            labels.push(c);
        }
    }
    Dataset::new(Tensor::new(vec![k * per_class, d], data)?, labels, k, split)
}

/// Isotropic Gaussian clusters with standard deviation `spread`.
pub fn gen_blobs(
    k: usize,
    per_class: usize,
    d: usize,
    spread: f64,
    stream: &mut RngStream,
) -> Result<(Dataset, Dataset)> {
    check_counts(k, per_class, 2, d)?;
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::invalid(format!("spread must be >= 0, got {spread}")));
    }
    let centres = blob_centres(k, d);
    let noise = |_: usize, s: &mut RngStream| (0..d).map(|_| spread * s.next_normal()).collect();
    let train = draw_split(&centres, per_class, noise, Split::Train, stream)?;
    let test = draw_split(&centres, per_class, noise, Split::Test, stream)?;
    Ok((train, test))
}

/// Many classes, each supported on `active_dims` randomly chosen coordinates.
///
/// A class's centre has entries `±signal` on its own coordinates and zero
/// elsewhere. Samples add `noise`-scaled Gaussian noise on the class's
/// coordinates and `background`-scaled noise on the remaining
/// `d - active_dims` coordinates, which are exactly zero when `background`
/// is zero.
#[allow(clippy::too_many_arguments)]
pub fn gen_sparse_manyclass(
    k: usize,
    per_class: usize,
    d: usize,
    active_dims: usize,
    signal: f64,
    noise: f64,
    background: f64,
    stream: &mut RngStream,
) -> Result<(Dataset, Dataset)> {
    check_counts(k, per_class, 1, d)?;
    if active_dims == 0 || active_dims > d {
        return Err(Error::invalid(format!("active_dims must be in [1, {d}], got {active_dims}")));
    }
    let scale_ok = |v: f64| v >= 0.0 && v.is_finite();
    if !(scale_ok(noise) && scale_ok(background) && signal.is_finite()) {
        return Err(Error::invalid("signal must be finite, noise and background >= 0"));
    }
    let supports: Vec<Vec<usize>> = (0..k).map(|_| stream.sample_indices(d, active_dims)).collect();
    let centres: Vec<Vec<f64>> = supports
        .iter()
        .map(|support| {
            let mut centre = vec![0.0; d];
            for &j in support {
                centre[j] = if stream.next_u64() & 1 == 0 { signal } else { -signal };
            }
            centre
        })
        .collect();
    let masks: Vec<Vec<bool>> = supports
        .iter()
        .map(|support| {
            let mut mask = vec![false; d];
            support.iter().for_each(|&j| mask[j] = true);
            mask
        })
        .collect();
    let sample_noise = |c: usize, s: &mut RngStream| {
        masks[c]
            .iter()
            .map(|&active| {
                if active {
                    noise * s.next_normal()
                } else if background > 0.0 {
                    background * s.next_normal()
                } else {
                    0.0
                }
            })
            .collect()
    };
    let train = draw_split(&centres, per_class, sample_noise, Split::Train, stream)?;
    let test = draw_split(&centres, per_class, sample_noise, Split::Test, stream)?;
    Ok((train, test))
}

/// Column selection for [`load_tabular`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabularSchema {
    /// Feature column names; empty means every column except the label.
    pub feature_columns: Vec<String>,
    /// Label column name; `None` means the last column.
    pub label_column: Option<String>,
    pub split: Option<Split>,
}

/// Reads a CSV file: a header line, then one sample per line with numeric
/// features and a non-negative integer label. The class count is
/// `max(label) + 1`.
pub fn load_tabular(path: &Path, schema: &TabularSchema) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let parse_err = |line: usize, column: Option<usize>, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, None, "missing header".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| parse_err(1, None, format!("no column named `{name}`")))
    };
    let label_idx = match &schema.label_column {
        Some(name) => find(name)?,
        None => names.len() - 1,
    };
    let feature_idx: Vec<usize> = if schema.feature_columns.is_empty() {
        (0..names.len()).filter(|&i| i != label_idx).collect()
    } else {
        schema.feature_columns.iter().map(|n| find(n)).collect::<Result<_>>()?
    };
    if feature_idx.is_empty() {
        return Err(parse_err(1, None, "no feature columns".into()));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != names.len() {
            return Err(parse_err(
                line_no,
                None,
                format!("expected {} fields, found {}", names.len(), cells.len()),
            ));
        }
        for &j in &feature_idx {
            let v: f64 = cells[j].parse().map_err(|_| {
                parse_err(
                    line_no,
                    Some(j + 1),
                    format!("non-numeric value `{}` in column `{}`", cells[j], names[j]),
                )
            })?;
            data.push(v);
        }
        let label: usize = cells[label_idx].parse().map_err(|_| {
            parse_err(
                line_no,
                Some(label_idx + 1),
                format!("unknown label symbol `{}`", cells[label_idx]),
            )
        })?;
        labels.push(label);
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let features = Tensor::new(vec![labels.len(), feature_idx.len()], data)?;
    Dataset::new(features, labels, classes, schema.split.unwrap_or(Split::Train))
}

/// Writes `dataset` in the format [`load_tabular`] reads, with columns
/// `x0..x{d-1},label`. Values use shortest round-trip formatting.
pub fn save_tabular(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",label\n");
    for (i, &label) in dataset.labels.iter().enumerate() {
        for v in dataset.features.row(i) {
            out.push_str(&format!("{v:?},"));
        }
        out.push_str(&format!("{label}\n"));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
