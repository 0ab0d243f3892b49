//! Alpha sweeps: train one small network per `(alpha, seed)` cell, persist a
//! record per run, and aggregate test error per alpha.
//!
//! Every random draw in a run comes from streams derived from the run's seed,
//! so a cell's record does not depend on grid order, worker count, or which
//! other cells ran before it. Data, initialization and shuffling are shared
//! across alphas for a given seed.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, Split, TabularSchema};
use crate::error::{Error, Result};
use crate::net::{self, Activation, Loss, Network, NetworkSpec};
use crate::optim::{Smes, SmesConfig};
use crate::rng::RngStream;
use crate::tensor::Tensor;

const STREAM_DATA: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

/// Hidden layers of the classifier. Input and output widths come from the data;
/// the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub loss: Loss,
}

impl ModelSpec {
    pub fn network_spec(&self, inputs: usize, classes: usize) -> NetworkSpec {
        let mut sizes = vec![inputs];
        sizes.extend(&self.hidden);
        sizes.push(classes);
        let mut activations = vec![self.activation; self.hidden.len()];
        activations.push(Activation::Identity);
        NetworkSpec {
            sizes,
            activations,
            loss: self.loss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum DataSpec {
    Blobs {
        classes: usize,
        per_class: usize,
        dim: usize,
        spread: f64,
    },
    SparseManyclass {
        classes: usize,
        per_class: usize,
        dim: usize,
        active_dims: usize,
        signal: f64,
        noise: f64,
        #[serde(default)]
        background: f64,
    },
    Files {
        train_path: PathBuf,
        test_path: PathBuf,
    },
}

impl DataSpec {
    pub fn generator_name(&self) -> &'static str {
        match self {
            DataSpec::Blobs { .. } => "blobs",
            DataSpec::SparseManyclass { .. } => "sparse_manyclass",
            DataSpec::Files { .. } => "files",
        }
    }

    /// Train and test splits for `seed`.
    pub fn materialize(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        let mut stream = RngStream::derived(seed, &[STREAM_DATA]);
        match self {
            &DataSpec::Blobs {
                classes,
                per_class,
                dim,
                spread,
            } => data::gen_blobs(classes, per_class, dim, spread, &mut stream),
            &DataSpec::SparseManyclass {
                classes,
                per_class,
                dim,
                active_dims,
                signal,
                noise,
                background,
            } => data::gen_sparse_manyclass(classes, per_class, dim, active_dims, signal, noise, background, &mut stream),
            DataSpec::Files { train_path, test_path } => {
                let train = data::load_tabular(
                    train_path,
                    &TabularSchema {
                        split: Some(Split::Train),
                        ..TabularSchema::default()
                    },
                )?;
                let mut test = data::load_tabular(
                    test_path,
                    &TabularSchema {
                        split: Some(Split::Test),
                        ..TabularSchema::default()
                    },
                )?;
                if train.dim() != test.dim() {
                    return Err(Error::invalid(format!(
                        "train has {} features but test has {}",
                        train.dim(),
                        test.dim()
                    )));
                }
                let classes = train.classes.max(test.classes);
                let mut train = train;
                train.classes = classes;
                test.classes = classes;
                Ok((train, test))
            }
        }
    }
}

/// Declarative sweep definition. `optimizer.alpha` is ignored; the grid wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub model: ModelSpec,
    pub data: DataSpec,
    pub optimizer: SmesConfig,
}

/// `lo, lo + step, ..., hi`, rounded to 9 decimals so that printed grid
/// points read like their intended values.
pub fn alpha_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(format!("bad alpha range {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| {
            let v = ((lo + i as f64 * step) * 1e9).round() / 1e9;
            if v == 0.0 {
                0.0
            } else {
                v
            }
        })
        .collect())
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            alphas: alpha_range(-0.30, 0.10, 0.02).expect("static range"),
            seeds: (0..5).collect(),
            epochs: 30,
            batch_size: 8,
            model: ModelSpec {
                hidden: vec![64, 64],
                activation: Activation::Relu,
                loss: Loss::SoftmaxCrossEntropy,
            },
            data: DataSpec::SparseManyclass {
                classes: 20,
                per_class: 20,
                dim: 64,
                active_dims: 8,
                signal: 1.0,
                noise: 1.0,
                background: 0.0,
            },
            optimizer: SmesConfig::sgd(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::invalid("alpha grid is empty"));
        }
        if self.alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("alpha grid contains a non-finite value"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seed list is empty"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be >= 1"));
        }
        if self.model.hidden.contains(&0) {
            return Err(Error::invalid("hidden layer sizes must be >= 1"));
        }
        self.optimizer.validate()
    }

    /// Cells in canonical order: alpha-major, then seed.
    pub fn cells(&self) -> Vec<RunConfig> {
        self.alphas
            .iter()
            .flat_map(|&alpha| self.seeds.iter().map(move |&seed| (alpha, seed)))
            .map(|(alpha, seed)| self.resolve(alpha, seed))
            .collect()
    }

    pub fn resolve(&self, alpha: f64, seed: u64) -> RunConfig {
        RunConfig {
            alpha,
            seed,
            epochs: self.epochs,
            batch_size: self.batch_size,
            model: self.model.clone(),
            data: self.data.clone(),
            optimizer: self.optimizer.clone().with_alpha(alpha),
            lr_schedule: "constant".to_string(),
        }
    }
}

/// Fully resolved configuration of one run; stored verbatim in its record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub model: ModelSpec,
    pub data: DataSpec,
    pub optimizer: SmesConfig,
    pub lr_schedule: String,
}

/// One persisted run.
///
/// Per-epoch series have one entry per completed epoch: `epochs` entries for
/// a finished run, `diverged_at_epoch` entries for a diverged one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub alpha: f64,
    pub seed: u64,
    pub train_loss: Vec<f64>,
    pub train_err_pct: Vec<f64>,
    pub test_err_pct: Vec<f64>,
    /// Mean per-layer gradient norm over the first batch of each epoch.
    pub grad_norms: Vec<Vec<f64>>,
    /// `None` when the run diverged or failed.
    pub final_test_err_pct: Option<f64>,
    /// Zero-based epoch in which a non-finite value appeared.
    pub diverged_at_epoch: Option<usize>,
    /// Set when the run could not start (bad data path, invalid config).
    pub failure: Option<String>,
    pub wall_time_secs: f64,
    pub config: RunConfig,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.final_test_err_pct.is_some()
    }

    pub fn diverged(&self) -> bool {
        self.diverged_at_epoch.is_some()
    }

    fn cell_key(&self) -> (u64, u64) {
        (self.alpha.to_bits(), self.seed)
    }

    /// Checks series lengths and metric ranges.
    pub fn validate(&self) -> Result<()> {
        let expected = match (self.diverged_at_epoch, &self.failure) {
            (_, Some(_)) => 0,
            (Some(e), None) => e,
            (None, None) => self.config.epochs,
        };
        let lens = [
            self.train_loss.len(),
            self.train_err_pct.len(),
            self.test_err_pct.len(),
            self.grad_norms.len(),
        ];
        if lens.iter().any(|&l| l != expected) {
            return Err(Error::invalid(format!(
                "series lengths {lens:?} do not match {expected} epochs"
            )));
        }
        let in_range = |v: &f64| (0.0..=100.0).contains(v);
        if !self.train_err_pct.iter().chain(&self.test_err_pct).all(in_range)
            || !self.final_test_err_pct.as_ref().is_none_or(in_range)
        {
            return Err(Error::invalid("error percentage outside [0, 100]"));
        }
        Ok(())
    }

    fn failed(config: &RunConfig, message: String) -> Self {
        RunRecord {
            alpha: config.alpha,
            seed: config.seed,
            train_loss: vec![],
            train_err_pct: vec![],
            test_err_pct: vec![],
            grad_norms: vec![],
            final_test_err_pct: None,
            diverged_at_epoch: None,
            failure: Some(message),
            wall_time_secs: 0.0,
            config: config.clone(),
        }
    }
}

fn error_pct(net: &Network, data: &Dataset) -> Option<f64> {
    let mut wrong = 0usize;
    for i in 0..data.len() {
        let out = net.predict(&data.sample(i)).ok()?;
        if !out.is_finite() {
            return None;
        }
        if net::argmax(&out) != data.labels[i] {
            wrong += 1;
        }
    }
    Some(100.0 * wrong as f64 / data.len().max(1) as f64)
}

fn target_for(loss: Loss, label: usize, classes: usize) -> Tensor {
    match loss {
        Loss::SoftmaxCrossEntropy | Loss::MeanSquaredError => net::one_hot(label, classes),
    }
}

/// Trains one network. Divergence is recorded, not returned as an error.
pub fn train_one(config: &RunConfig) -> Result<RunRecord> {
    let started = Instant::now();
    config.optimizer.validate()?;
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::invalid("epochs and batch_size must be >= 1"));
    }
    let (train, test) = config.data.materialize(config.seed)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid("empty dataset split"));
    }
    let spec = config.model.network_spec(train.dim(), train.classes);
    let mut network = net::init_network(&spec, &mut RngStream::derived(config.seed, &[STREAM_INIT]))?;
    let mut shuffle = RngStream::derived(config.seed, &[STREAM_SHUFFLE]);
    let mut optimizer = Smes::new(config.optimizer.clone(), network.parameters())?;

    let mut record = RunRecord {
        alpha: config.alpha,
        seed: config.seed,
        train_loss: Vec::with_capacity(config.epochs),
        train_err_pct: Vec::with_capacity(config.epochs),
        test_err_pct: Vec::with_capacity(config.epochs),
        grad_norms: Vec::with_capacity(config.epochs),
        final_test_err_pct: None,
        diverged_at_epoch: None,
        failure: None,
        wall_time_secs: 0.0,
        config: config.clone(),
    };

    let layers = network.layers.len();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grads: Vec<Tensor> = network.gradients().into_iter().map(|g| Tensor::zeros(g.shape())).collect();

    'epochs: for epoch in 0..config.epochs {
        shuffle.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut norms = vec![0.0; layers];
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            for g in &mut grads {
                g.fill(0.0);
            }
            for &i in batch {
                network.forward(&train.sample(i))?;
                let report = network.backward(&target_for(spec.loss, train.labels[i], train.classes))?;
                if !report.loss.is_finite() {
                    record.diverged_at_epoch = Some(epoch);
                    break 'epochs;
                }
                loss_sum += report.loss;
                if batch_index == 0 {
                    for (acc, n) in norms.iter_mut().zip(&report.layer_norms) {
                        *acc += n / batch.len() as f64;
                    }
                }
                for (acc, g) in grads.iter_mut().zip(network.gradients()) {
                    acc.add_scaled_assign(g, 1.0 / batch.len() as f64)?;
                }
            }
            match optimizer.step(network.parameters_mut(), &grads) {
                Ok(()) => {}
                Err(Error::NonFiniteGradient { .. } | Error::NonFiniteParameter { .. }) => {
                    record.diverged_at_epoch = Some(epoch);
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }
        let train_loss = loss_sum / train.len() as f64;
        let (Some(train_err), Some(test_err)) = (error_pct(&network, &train), error_pct(&network, &test)) else {
            record.diverged_at_epoch = Some(epoch);
            break;
        };
        if !train_loss.is_finite() || norms.iter().any(|n| !n.is_finite()) {
            record.diverged_at_epoch = Some(epoch);
            break;
        }
        record.train_loss.push(train_loss);
        record.train_err_pct.push(train_err);
        record.test_err_pct.push(test_err);
        record.grad_norms.push(norms);
    }
    network.clear_cache();
    if record.diverged_at_epoch.is_none() {
        record.final_test_err_pct = record.test_err_pct.last().copied();
    }
    record.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(record)
}

/// Writes records as JSON lines, replacing `path`.
pub fn write_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        writeln!(out, "{}", record_line(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn record_line(record: &RunRecord) -> String {
    serde_json::to_string(record).expect("records contain only finite floats")
}

/// Appends one record and flushes it to disk.
pub fn append_record(record: &RunRecord, path: &Path) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(format!("{}\n", record_line(record)).as_bytes())?;
    file.sync_data()?;
    Ok(())
}

fn parse_lines(bytes: &[u8], tolerate_partial_tail: bool) -> Result<(Vec<RunRecord>, usize)> {
    let mut records = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            if tolerate_partial_tail {
                break;
            }
            return Err(Error::CorruptRecord {
                offset: offset as u64,
                message: "truncated record (no terminating newline)".into(),
            });
        };
        let line = &rest[..end];
        let record: RunRecord = serde_json::from_slice(line).map_err(|e| Error::CorruptRecord {
            offset: offset as u64,
            message: e.to_string(),
        })?;
        record.validate().map_err(|e| Error::CorruptRecord {
            offset: offset as u64,
            message: e.to_string(),
        })?;
        records.push(record);
        offset += end + 1;
    }
    Ok((records, offset))
}

/// Reads a record file. Any malformed or unterminated line is an error that
/// carries the byte offset where that line starts.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let bytes = fs::read(path)?;
    Ok(parse_lines(&bytes, false)?.0)
}

/// Reads the complete records of a possibly interrupted file and truncates an
/// unterminated trailing line, so that appending can resume.
pub fn recover_records(path: &Path) -> Result<Vec<RunRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let bytes = fs::read(path)?;
    let (records, valid) = parse_lines(&bytes, true)?;
    if valid < bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(valid as u64)?;
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub alpha: f64,
    /// Mean final test error over completed runs; NaN when none completed.
    pub mean_test_err: f64,
    /// Sample standard deviation (n - 1); 0 for a single run.
    pub std_test_err: f64,
    /// Completed (non-diverged) runs contributing to the mean.
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    /// One row per grid point, ascending alpha.
    pub rows: Vec<SummaryRow>,
    /// Alpha with the smallest mean test error; ties go to the smaller alpha.
    pub argmin_alpha: Option<f64>,
}

pub fn summarize(records: &[RunRecord]) -> SweepSummary {
    let mut groups: BTreeMap<OrderedAlpha, Vec<f64>> = BTreeMap::new();
    for r in records {
        let entry = groups.entry(OrderedAlpha(r.alpha)).or_default();
        if let Some(e) = r.final_test_err_pct {
            entry.push(e);
        }
    }
    let rows: Vec<SummaryRow> = groups
        .into_iter()
        .map(|(OrderedAlpha(alpha), errs)| {
            let n = errs.len();
            let mean = if n == 0 { f64::NAN } else { errs.iter().sum::<f64>() / n as f64 };
            let std = if n < 2 {
                if n == 0 {
                    f64::NAN
                } else {
                    0.0
                }
            } else {
                (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            SummaryRow {
                alpha,
                mean_test_err: mean,
                std_test_err: std,
                n_seeds: n,
            }
        })
        .collect();
    let mut argmin: Option<&SummaryRow> = None;
    for row in rows.iter().filter(|r| r.n_seeds > 0) {
        if argmin.is_none_or(|best| row.mean_test_err < best.mean_test_err) {
            argmin = Some(row);
        }
    }
    SweepSummary {
        argmin_alpha: argmin.map(|r| r.alpha),
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedAlpha(f64);

impl Eq for OrderedAlpha {}

impl PartialOrd for OrderedAlpha {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedAlpha {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub const SUMMARY_HEADER: &str = "alpha,mean_test_err,std_test_err,n_seeds";

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:?}")
    }
}

pub fn summary_csv(summary: &SweepSummary) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in &summary.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(row.alpha),
            fmt_f64(row.mean_test_err),
            fmt_f64(row.std_test_err),
            row.n_seeds
        ));
    }
    out
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SUMMARY_HEADER) {
        return Err(Error::invalid("summary table has an unexpected header"));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            let bad = || Error::invalid(format!("bad summary row `{l}`"));
            if cells.len() != 4 {
                return Err(bad());
            }
            Ok(SummaryRow {
                alpha: cells[0].parse().map_err(|_| bad())?,
                mean_test_err: cells[1].parse().map_err(|_| bad())?,
                std_test_err: cells[2].parse().map_err(|_| bad())?,
                n_seeds: cells[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 or 1 runs serially.
    pub jobs: usize,
    /// Append each finished record here, in canonical cell order.
    pub records_path: Option<PathBuf>,
    /// Skip cells already present in `records_path`.
    pub resume: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// All records of the grid in canonical cell order, including resumed ones.
    pub records: Vec<RunRecord>,
    pub summary: SweepSummary,
    /// Cells that were already on disk and not recomputed.
    pub resumed: usize,
}

impl SweepOutcome {
    pub fn diverged(&self) -> usize {
        self.records.iter().filter(|r| r.diverged()).count()
    }

    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.failure.is_some()).count()
    }
}

fn run_cell(config: &RunConfig) -> RunRecord {
    train_one(config).unwrap_or_else(|e| RunRecord::failed(config, e.to_string()))
}

/// Runs every `(alpha, seed)` cell. Records are written by a single writer in
/// canonical order as soon as all earlier cells have finished.
pub fn run_sweep(spec: &SweepSpec, options: &SweepOptions) -> Result<SweepOutcome> {
    spec.validate()?;
    let cells = spec.cells();

    let mut done: BTreeMap<usize, RunRecord> = BTreeMap::new();
    let mut resumed = 0;
    if let (true, Some(path)) = (options.resume, &options.records_path) {
        let existing = recover_records(path)?;
        let keys: HashSet<(u64, u64)> = existing.iter().map(RunRecord::cell_key).collect();
        let mut by_key: BTreeMap<(u64, u64), RunRecord> =
            existing.into_iter().map(|r| (r.cell_key(), r)).collect();
        for (i, cell) in cells.iter().enumerate() {
            let key = (cell.alpha.to_bits(), cell.seed);
            if keys.contains(&key) {
                if let Some(r) = by_key.remove(&key) {
                    if r.config != *cell {
                        return Err(Error::invalid(format!(
                            "{} holds a record for alpha {} seed {} with a different configuration; start fresh",
                            path.display(),
                            cell.alpha,
                            cell.seed
                        )));
                    }
                    done.insert(i, r);
                    resumed += 1;
                }
            }
        }
    } else if let Some(path) = &options.records_path {
        File::create(path)?;
    }

    let pending: Vec<usize> = (0..cells.len()).filter(|i| !done.contains_key(i)).collect();
    let jobs = options.jobs.max(1).min(pending.len().max(1));
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();

    let mut write_error = None;
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            let tx = tx.clone();
            let (cells, pending, next) = (&cells, &pending, &next);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&cell) = pending.get(k) else { break };
                if tx.send((cell, run_cell(&cells[cell]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut buffered: BTreeMap<usize, RunRecord> = BTreeMap::new();
        let mut cursor = 0;
        for (cell, record) in rx {
            buffered.insert(cell, record);
            while cursor < pending.len() {
                let Some(record) = buffered.remove(&pending[cursor]) else { break };
                if let (Some(path), None) = (&options.records_path, &write_error) {
                    if let Err(e) = append_record(&record, path) {
                        write_error = Some(e);
                    }
                }
                done.insert(pending[cursor], record);
                cursor += 1;
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }

    let records: Vec<RunRecord> = done.into_values().collect();
    let summary = summarize(&records);
    Ok(SweepOutcome {
        records,
        summary,
        resumed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        SweepSpec {
            alphas: vec![0.0],
            seeds: vec![1],
            epochs: 2,
            batch_size: 8,
            model: ModelSpec {
                hidden: vec![8],
                activation: Activation::Relu,
                loss: Loss::SoftmaxCrossEntropy,
            },
            data: DataSpec::Blobs {
                classes: 3,
                per_class: 10,
                dim: 4,
                spread: 0.5,
            },
            optimizer: SmesConfig::sgd(),
        }
    }

    fn fake_record(alpha: f64, seed: u64, err: Option<f64>) -> RunRecord {
        let spec = tiny_spec();
        let config = spec.resolve(alpha, seed);
        let epochs = config.epochs;
        let (n, diverged) = match err {
            Some(_) => (epochs, None),
            None => (1, Some(1)),
        };
        RunRecord {
            alpha,
            seed,
            train_loss: vec![0.5; n],
            train_err_pct: vec![10.0; n],
            test_err_pct: vec![err.unwrap_or(50.0); n],
            grad_norms: vec![vec![0.1, 0.2]; n],
            final_test_err_pct: err,
            diverged_at_epoch: diverged,
            failure: None,
            wall_time_secs: 0.25,
            config,
        }
    }

    #[test]
    fn alpha_range_default_grid() {
        let g = alpha_range(-0.30, 0.10, 0.02).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -0.3);
        assert_eq!(g[11], -0.08);
        assert_eq!(g[15], 0.0);
        assert_eq!(g[20], 0.1);
        assert!(alpha_range(0.1, -0.1, 0.01).is_err());
    }

    #[test]
    fn smoke_single_epoch() {
        let mut spec = tiny_spec();
        spec.epochs = 1;
        let r = train_one(&spec.resolve(0.0, 1)).unwrap();
        assert_eq!(r.train_loss.len(), 1);
        assert_eq!(r.grad_norms[0].len(), 2);
        assert!(r.is_complete());
        r.validate().unwrap();
    }

    #[test]
    fn train_one_deterministic() {
        let spec = tiny_spec();
        let mut a = train_one(&spec.resolve(-0.1, 3)).unwrap();
        let mut b = train_one(&spec.resolve(-0.1, 3)).unwrap();
        a.wall_time_secs = 0.0;
        b.wall_time_secs = 0.0;
        assert_eq!(record_line(&a), record_line(&b));
    }

    #[test]
    fn learns_easy_blobs() {
        let mut spec = tiny_spec();
        spec.epochs = 20;
        let r = train_one(&spec.resolve(0.0, 0)).unwrap();
        assert!(r.final_test_err_pct.unwrap() < 10.0, "{r:?}");
        assert!(r.train_loss.last().unwrap() < &r.train_loss[0]);
    }

    #[test]
    fn failed_run_recorded_in_sweep() {
        let mut spec = tiny_spec();
        spec.data = DataSpec::Files {
            train_path: "/nonexistent/train.csv".into(),
            test_path: "/nonexistent/test.csv".into(),
        };
        let out = run_sweep(&spec, &SweepOptions::default()).unwrap();
        assert_eq!(out.failed(), 1);
        assert!(out.summary.argmin_alpha.is_none());
    }

    #[test]
    fn summary_statistics_and_ties() {
        let records = vec![
            fake_record(0.1, 0, Some(10.0)),
            fake_record(0.1, 1, Some(20.0)),
            fake_record(-0.1, 0, Some(15.0)),
            fake_record(-0.1, 1, Some(15.0)),
            fake_record(0.0, 0, None),
        ];
        let s = summarize(&records);
        assert_eq!(s.rows.len(), 3);
        assert_eq!(s.rows[0].alpha, -0.1);
        assert_eq!(s.rows[0].std_test_err, 0.0);
        assert_eq!(s.rows[2].mean_test_err, 15.0);
        assert!((s.rows[2].std_test_err - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.rows[1].n_seeds, 0);
        assert!(s.rows[1].mean_test_err.is_nan());
        // -0.1 and 0.1 tie at 15; the smaller alpha wins.
        assert_eq!(s.argmin_alpha, Some(-0.1));
    }

    #[test]
    fn summary_csv_round_trip() {
        let records = vec![fake_record(0.1, 0, Some(10.0)), fake_record(-0.08, 0, None)];
        let s = summarize(&records);
        let text = summary_csv(&s);
        assert!(text.starts_with("alpha,mean_test_err,std_test_err,n_seeds\n"));
        let rows = parse_summary_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].alpha, -0.08);
        assert!(rows[0].mean_test_err.is_nan());
        assert_eq!(rows[1], s.rows[1]);
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_records(&[], &path).unwrap();
        assert!(read_records(&path).unwrap().is_empty());

        let records: Vec<RunRecord> = (0..10)
            .map(|i| {
                let mut r = fake_record(-0.3 + 0.04 * i as f64, i, if i % 3 == 0 { None } else { Some(1.0 / 3.0 + i as f64) });
                r.train_loss = r.train_loss.iter().map(|v| v * std::f64::consts::PI / (i + 1) as f64).collect();
                r.wall_time_secs = 1e-7 * i as f64;
                r
            })
            .collect();
        write_records(&records, &path).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
    }

    #[test]
    fn truncated_file_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let records = vec![fake_record(0.0, 0, Some(5.0)), fake_record(0.0, 1, Some(6.0))];
        write_records(&records, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let first_len = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        match read_records(&path) {
            Err(Error::CorruptRecord { offset, .. }) => assert_eq!(offset, first_len as u64),
            other => panic!("expected corruption error, got {other:?}"),
        }
        let recovered = recover_records(&path).unwrap();
        assert_eq!(recovered, records[..1]);
        assert_eq!(fs::read(&path).unwrap().len(), first_len);
    }

    #[test]
    fn garbage_line_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let good = record_line(&fake_record(0.0, 0, Some(5.0)));
        fs::write(&path, format!("{good}\n{{not json}}\n")).unwrap();
        match read_records(&path) {
            Err(Error::CorruptRecord { offset, .. }) => assert_eq!(offset, good.len() as u64 + 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_sweep_equals_train_one() {
        let spec = tiny_spec();
        let out = run_sweep(&spec, &SweepOptions::default()).unwrap();
        let mut direct = train_one(&spec.resolve(0.0, 1)).unwrap();
        let mut swept = out.records[0].clone();
        direct.wall_time_secs = 0.0;
        swept.wall_time_secs = 0.0;
        assert_eq!(swept, direct);
        assert_eq!(out.summary.rows.len(), 1);
    }

    #[test]
    fn grid_order_does_not_change_records() {
        let mut spec = tiny_spec();
        spec.alphas = vec![-0.2, 0.0, 0.1];
        spec.seeds = vec![4, 5];
        let a = run_sweep(&spec, &SweepOptions { jobs: 3, ..Default::default() }).unwrap();
        spec.alphas.reverse();
        spec.seeds.reverse();
        let b = run_sweep(&spec, &SweepOptions::default()).unwrap();
        let strip = |mut r: RunRecord| {
            r.wall_time_secs = 0.0;
            ((r.alpha.to_bits(), r.seed), record_line(&r))
        };
        let ma: BTreeMap<_, _> = a.records.into_iter().map(strip).collect();
        let mb: BTreeMap<_, _> = b.records.into_iter().map(strip).collect();
        assert_eq!(ma, mb);
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = tiny_spec();
        spec.alphas.clear();
        assert!(run_sweep(&spec, &SweepOptions::default()).is_err());
        let mut spec = tiny_spec();
        spec.epochs = 0;
        assert!(spec.validate().is_err());
    }
}
