//! Flat `key = value` configuration for sweeps.
//!
//! One assignment per line, `#` starts a comment. Keys mirror [`SweepSpec`]
//! field names, with dots for nested fields:
//!
//! ```text
//! alphas = -0.30:0.10:0.02     # lo:hi:step, or a comma list
//! seeds = 0,1,2,3,4
//! epochs = 30
//! batch_size = 8
//! model.hidden = 64,64
//! model.activation = relu
//! model.loss = softmax_ce
//! data.generator = sparse_manyclass
//! data.classes = 20
//! optimizer.eta = 0.1
//! optimizer.weight_decay = 5e-4
//! ```
//!
//! `alpha` and `seed` are shorthands for a one-element `alphas` / `seeds`.
//! Unknown keys are rejected.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optim::DecayMode;
use crate::sweep::{alpha_range, DataSpec, SweepSpec};

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "alphas",
    "alpha",
    "seeds",
    "seed",
    "epochs",
    "batch_size",
    "model.hidden",
    "model.activation",
    "model.loss",
    "data.generator",
    "data.classes",
    "data.per_class",
    "data.dim",
    "data.spread",
    "data.active_dims",
    "data.signal",
    "data.noise",
    "data.background",
    "data.train_path",
    "data.test_path",
    "optimizer.eta",
    "optimizer.beta1",
    "optimizer.beta2",
    "optimizer.epsilon",
    "optimizer.weight_decay",
    "optimizer.decay_mode",
    "optimizer.clip_threshold",
    "optimizer.v_floor",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidValue {
        key: key.to_string(),
        message: format!("cannot parse `{value}`"),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_alphas(key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts[..] {
        [lo, hi, step] => alpha_range(parse(key, lo)?, parse(key, hi)?, parse(key, step)?).map_err(|e| {
            Error::InvalidValue {
                key: key.to_string(),
                message: e.to_string(),
            }
        }),
        [_] => parse_list(key, value),
        _ => Err(Error::InvalidValue {
            key: key.to_string(),
            message: "expected lo:hi:step or a comma list".into(),
        }),
    }
}

#[derive(Debug, Default, Clone)]
struct DataFields {
    generator: Option<String>,
    classes: Option<usize>,
    per_class: Option<usize>,
    dim: Option<usize>,
    spread: Option<f64>,
    active_dims: Option<usize>,
    signal: Option<f64>,
    noise: Option<f64>,
    background: Option<f64>,
    train_path: Option<String>,
    test_path: Option<String>,
}

/// Accumulates assignments on top of [`SweepSpec::default`].
#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    spec: SweepSpec,
    data: DataFields,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        Self::new(SweepSpec::default())
    }
}

impl ConfigBuilder {
    pub fn new(base: SweepSpec) -> Self {
        ConfigBuilder {
            spec: base,
            data: DataFields::default(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let s = &mut self.spec;
        match key {
            "alphas" => s.alphas = parse_alphas(key, value)?,
            "alpha" => s.alphas = vec![parse(key, value)?],
            "seeds" => s.seeds = parse_list(key, value)?,
            "seed" => s.seeds = vec![parse(key, value)?],
            "epochs" => s.epochs = parse(key, value)?,
            "batch_size" => s.batch_size = parse(key, value)?,
            "model.hidden" => {
                s.model.hidden = if value.is_empty() || value == "none" {
                    vec![]
                } else {
                    parse_list(key, value)?
                }
            }
            "model.activation" => s.model.activation = parse(key, value)?,
            "model.loss" => s.model.loss = parse(key, value)?,
            "data.generator" => self.data.generator = Some(value.to_string()),
            "data.classes" => self.data.classes = Some(parse(key, value)?),
            "data.per_class" => self.data.per_class = Some(parse(key, value)?),
            "data.dim" => self.data.dim = Some(parse(key, value)?),
            "data.spread" => self.data.spread = Some(parse(key, value)?),
            "data.active_dims" => self.data.active_dims = Some(parse(key, value)?),
            "data.signal" => self.data.signal = Some(parse(key, value)?),
            "data.noise" => self.data.noise = Some(parse(key, value)?),
            "data.background" => self.data.background = Some(parse(key, value)?),
            "data.train_path" => self.data.train_path = Some(value.to_string()),
            "data.test_path" => self.data.test_path = Some(value.to_string()),
            "optimizer.eta" => s.optimizer.eta = parse(key, value)?,
            "optimizer.beta1" => s.optimizer.beta1 = parse(key, value)?,
            "optimizer.beta2" => s.optimizer.beta2 = parse(key, value)?,
            "optimizer.epsilon" => s.optimizer.epsilon = parse(key, value)?,
            "optimizer.weight_decay" => s.optimizer.weight_decay = parse(key, value)?,
            "optimizer.decay_mode" => s.optimizer.decay_mode = value.parse::<DecayMode>()?,
            "optimizer.clip_threshold" => {
                s.optimizer.clip_threshold = match value {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "optimizer.v_floor" => s.optimizer.v_floor = parse(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` text (as given to `--set`).
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::InvalidValue {
            key: assignment.trim().to_string(),
            message: "expected key=value".into(),
        })?;
        self.set(key.trim(), value)
    }

    /// Applies every assignment in a config document.
    pub fn apply_document(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                column: None,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    fn resolve_data(&self) -> Result<DataSpec> {
        let d = &self.data;
        let base = &self.spec.data;
        let generator = d
            .generator
            .clone()
            .unwrap_or_else(|| base.generator_name().to_string());
        let (b_classes, b_per_class, b_dim) = match *base {
            DataSpec::Blobs {
                classes,
                per_class,
                dim,
                ..
            }
            | DataSpec::SparseManyclass {
                classes,
                per_class,
                dim,
                ..
            } => (classes, per_class, dim),
            DataSpec::Files { .. } => (20, 20, 64),
        };
        let classes = d.classes.unwrap_or(b_classes);
        let per_class = d.per_class.unwrap_or(b_per_class);
        let dim = d.dim.unwrap_or(b_dim);
        Ok(match generator.as_str() {
            "blobs" => DataSpec::Blobs {
                classes,
                per_class,
                dim,
                spread: d.spread.unwrap_or(match *base {
                    DataSpec::Blobs { spread, .. } => spread,
                    _ => 1.0,
                }),
            },
            "sparse_manyclass" => {
                let (active, signal, noise, background) = match *base {
                    DataSpec::SparseManyclass {
                        active_dims,
                        signal,
                        noise,
                        background,
                        ..
                    } => (active_dims, signal, noise, background),
                    _ => (8, 1.0, 1.0, 0.0),
                };
                DataSpec::SparseManyclass {
                    classes,
                    per_class,
                    dim,
                    active_dims: d.active_dims.unwrap_or(active),
                    signal: d.signal.unwrap_or(signal),
                    noise: d.noise.unwrap_or(noise),
                    background: d.background.unwrap_or(background),
                }
            }
            "files" => {
                let (bt, bs) = match base {
                    DataSpec::Files { train_path, test_path } => (Some(train_path.clone()), Some(test_path.clone())),
                    _ => (None, None),
                };
                let missing = |k: &str| Error::InvalidValue {
                    key: k.to_string(),
                    message: "required when data.generator = files".into(),
                };
                DataSpec::Files {
                    train_path: d.train_path.clone().map(Into::into).or(bt).ok_or_else(|| missing("data.train_path"))?,
                    test_path: d.test_path.clone().map(Into::into).or(bs).ok_or_else(|| missing("data.test_path"))?,
                }
            }
            other => {
                return Err(Error::InvalidValue {
                    key: "data.generator".into(),
                    message: format!("unknown generator `{other}` (blobs, sparse_manyclass, files)"),
                })
            }
        })
    }

    pub fn build(&self) -> Result<SweepSpec> {
        let mut spec = self.spec.clone();
        spec.data = self.resolve_data()?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Reads a config file and applies `overrides` (each `key=value`) on top.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut builder = ConfigBuilder::default();
    builder.apply_document(&text, path)?;
    for o in overrides {
        builder.set_assignment(o)?;
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Activation;

    #[test]
    fn parses_document_and_overrides() {
        let text = "# tiny\nalphas = -0.1, 0, 0.1\nseeds = 3,4\nepochs = 2\nmodel.hidden = 8\nmodel.activation = sigmoid\n\
                    data.generator = blobs\ndata.classes = 3\ndata.spread = 0.25\noptimizer.eta = 0.05 # inline\n";
        let mut b = ConfigBuilder::default();
        b.apply_document(text, Path::new("t.cfg")).unwrap();
        b.set_assignment("alpha=-0.08").unwrap();
        let spec = b.build().unwrap();
        assert_eq!(spec.alphas, vec![-0.08]);
        assert_eq!(spec.seeds, vec![3, 4]);
        assert_eq!(spec.model.hidden, vec![8]);
        assert_eq!(spec.model.activation, Activation::Sigmoid);
        assert_eq!(spec.optimizer.eta, 0.05);
        match spec.data {
            DataSpec::Blobs { classes, spread, dim, .. } => {
                assert_eq!(classes, 3);
                assert_eq!(spread, 0.25);
                assert_eq!(dim, 64);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_syntax() {
        let mut b = ConfigBuilder::default();
        b.set("alphas", "-0.3:0.1:0.02").unwrap();
        assert_eq!(b.build().unwrap().alphas.len(), 21);
    }

    #[test]
    fn unknown_key_named() {
        let mut b = ConfigBuilder::default();
        let err = b.set_assignment("foo=1").unwrap_err();
        assert!(matches!(&err, Error::UnknownKey(k) if k == "foo"));
        assert!(err.to_string().contains("foo"));
    }

    #[test]
    fn bad_values_rejected() {
        let mut b = ConfigBuilder::default();
        assert!(b.set("epochs", "many").is_err());
        assert!(b.set("optimizer.decay_mode", "sideways").is_err());
        assert!(b.set_assignment("epochs").is_err());
        b.set("data.generator", "imagenet").unwrap();
        assert!(b.build().is_err());
        let mut b = ConfigBuilder::default();
        b.set("data.generator", "files").unwrap();
        assert!(b.build().is_err());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut b = ConfigBuilder::default();
        let err = b.apply_document("epochs = 3\njunk\n", Path::new("c.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn every_documented_key_is_accepted() {
        let sample = |k: &str| match k {
            "alphas" => "0,0.1",
            "model.hidden" => "4,4",
            "model.activation" => "relu",
            "model.loss" => "mse",
            "data.generator" => "blobs",
            "data.train_path" | "data.test_path" => "x.csv",
            "optimizer.decay_mode" => "decoupled",
            "seeds" | "seed" | "epochs" | "batch_size" | "data.classes" | "data.per_class" | "data.dim"
            | "data.active_dims" => "3",
            _ => "0.5",
        };
        for key in KEYS {
            let mut b = ConfigBuilder::default();
            b.set(key, sample(key)).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }
}
