//! Parsing Accuracy and the benchmark harness.
//!
//! A line counts as correctly parsed when the set of lines sharing its
//! predicted group is exactly the set of lines sharing its true group.
//! Labels are never compared, only the partitions they induce.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::DatasetConfig;
use crate::error::{Error, Result};
use crate::parser::{ParseOutput, Parser};
use crate::preprocess::read_lines;

/// A total assignment of lines to groups, with labels normalized to dense
/// integers in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grouping {
    labels: Vec<u32>,
}

impl Grouping {
    pub fn from_labels<T: Hash + Eq>(labels: impl IntoIterator<Item = T>) -> Grouping {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Grouping { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

/// Fraction of lines whose predicted group equals their true group as a set.
/// Two empty groupings score 1.
pub fn parsing_accuracy(predicted: &Grouping, truth: &Grouping) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::GroupingLength {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Ok(1.0);
    }

    // A predicted group is correct iff all of its lines carry one true
    // label and that true group has the same size.
    let pred_sizes = predicted.sizes();
    let truth_sizes = truth.sizes();
    let mut truth_of_group: Vec<Option<u32>> = vec![None; pred_sizes.len()];
    let mut pure = vec![true; pred_sizes.len()];
    for (&p, &t) in predicted.labels.iter().zip(&truth.labels) {
        let slot = &mut truth_of_group[p as usize];
        match slot {
            None => *slot = Some(t),
            Some(seen) if *seen != t => pure[p as usize] = false,
            Some(_) => {}
        }
    }
    let correct: usize = (0..pred_sizes.len())
        .filter(|&g| pure[g])
        .filter_map(|g| truth_of_group[g].map(|t| (g, t)))
        .filter(|&(g, t)| truth_sizes[t as usize] == pred_sizes[g])
        .map(|(g, _)| pred_sizes[g])
        .sum();
    Ok(correct as f64 / predicted.len() as f64)
}

/// Annotated ground truth for one sample.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub grouping: Grouping,
    pub event_ids: Vec<String>,
    /// Per-line template text, when the file has an `EventTemplate` column.
    pub templates: Option<Vec<String>>,
}

/// Reads a structured CSV with `LineId` and `EventId` columns (and
/// optionally `EventTemplate`). Line IDs must run 1, 2, 3, ... in order.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let bad = |message: String| Error::GroundTruth {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(io::BufReader::new(file));
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let line_col = column("LineId").ok_or_else(|| bad("missing LineId column".into()))?;
    let event_col = column("EventId").ok_or_else(|| bad("missing EventId column".into()))?;
    let template_col = column("EventTemplate");

    let mut event_ids = Vec::new();
    let mut templates = template_col.map(|_| Vec::new());
    let mut seen = std::collections::HashSet::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let raw_id = row.get(line_col).unwrap_or("").trim();
        let line_id: usize = raw_id
            .parse()
            .map_err(|_| bad(format!("row {row_no}: LineId `{raw_id}` is not an integer")))?;
        if !seen.insert(line_id) {
            return Err(bad(format!("row {row_no}: duplicate LineId {line_id}")));
        }
        if line_id != row_no {
            return Err(bad(format!(
                "row {row_no}: LineId {line_id} breaks the contiguous sequence (expected {row_no})"
            )));
        }
        event_ids.push(row.get(event_col).unwrap_or("").to_string());
        if let (Some(out), Some(col)) = (templates.as_mut(), template_col) {
            out.push(row.get(col).unwrap_or("").to_string());
        }
    }
    Ok(GroundTruth {
        grouping: Grouping::from_labels(event_ids.iter()),
        event_ids,
        templates,
    })
}

/// Raw sample and annotation paths for a dataset in a loghub-style corpus.
#[derive(Debug, Clone)]
pub struct DatasetFiles {
    pub log: PathBuf,
    pub truth: PathBuf,
}

impl DatasetFiles {
    /// Looks for `<corpus>/<name>/<name>_2k.log` (falling back to
    /// `<corpus>/<name>_2k.log`) and its `_structured.csv` companion.
    pub fn locate(corpus: &Path, name: &str) -> std::result::Result<DatasetFiles, String> {
        let file = format!("{name}_2k.log");
        let log = [corpus.join(name).join(&file), corpus.join(&file)]
            .into_iter()
            .find(|p| p.is_file())
            .ok_or_else(|| format!("missing raw sample {file}"))?;
        let truth = log.with_file_name(format!("{file}_structured.csv"));
        if !truth.is_file() {
            return Err(format!("missing ground truth {}", truth.display()));
        }
        Ok(DatasetFiles { log, truth })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetResult {
    pub name: String,
    pub threshold: f64,
    pub accuracy: f64,
    pub templates_found: usize,
    pub templates_truth: usize,
    pub seconds: f64,
    pub lines: usize,
    /// Lines whose final template text equals the annotated template, when
    /// annotations carry text. Informational only.
    pub template_text_matches: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetRow {
    Done(DatasetResult),
    Skipped { name: String, threshold: f64, reason: String },
}

impl DatasetRow {
    pub fn name(&self) -> &str {
        match self {
            DatasetRow::Done(r) => &r.name,
            DatasetRow::Skipped { name, .. } => name,
        }
    }

    pub fn result(&self) -> Option<&DatasetResult> {
        match self {
            DatasetRow::Done(r) => Some(r),
            DatasetRow::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<DatasetRow>,
}

pub const REPORT_COLUMNS: [&str; 6] = [
    "dataset",
    "threshold",
    "parsing_accuracy",
    "templates_found",
    "templates_truth",
    "seconds",
];

impl BenchmarkReport {
    pub fn completed(&self) -> impl Iterator<Item = &DatasetResult> {
        self.rows.iter().filter_map(DatasetRow::result)
    }

    pub fn get(&self, name: &str) -> Option<&DatasetRow> {
        self.rows.iter().find(|r| r.name() == name)
    }

    pub fn accuracy(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(DatasetRow::result).map(|r| r.accuracy)
    }

    pub fn mean_accuracy(&self) -> Option<f64> {
        let pa: Vec<f64> = self.completed().map(|r| r.accuracy).collect();
        (!pa.is_empty()).then(|| pa.iter().sum::<f64>() / pa.len() as f64)
    }

    /// Population variance of the per-dataset accuracies.
    pub fn accuracy_variance(&self) -> Option<f64> {
        let mean = self.mean_accuracy()?;
        let pa: Vec<f64> = self.completed().map(|r| r.accuracy).collect();
        Some(pa.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / pa.len() as f64)
    }

    /// One row per dataset; skipped datasets leave the measured columns empty.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(REPORT_COLUMNS)?;
        for row in &self.rows {
            match row {
                DatasetRow::Done(r) => w.write_record([
                    r.name.clone(),
                    r.threshold.to_string(),
                    format!("{:.6}", r.accuracy),
                    r.templates_found.to_string(),
                    r.templates_truth.to_string(),
                    format!("{:.6}", r.seconds),
                ])?,
                DatasetRow::Skipped { name, threshold, .. } => w.write_record([
                    name.clone(),
                    threshold.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?,
            }
        }
        w.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>9} {:>9} {:>7} {:>7} {:>9} {:>10}",
            "Dataset", "T", "PA", "found", "truth", "seconds", "text-eq"
        );
        for row in &self.rows {
            match row {
                DatasetRow::Done(r) => {
                    let text_eq = r
                        .template_text_matches
                        .map(|m| format!("{m}/{}", r.lines))
                        .unwrap_or_else(|| "-".into());
                    let _ = writeln!(
                        out,
                        "{:<14} {:>9.2} {:>9.3} {:>7} {:>7} {:>9.3} {:>10}",
                        r.name, r.threshold, r.accuracy, r.templates_found, r.templates_truth, r.seconds, text_eq
                    );
                }
                DatasetRow::Skipped { name, reason, .. } => {
                    let _ = writeln!(out, "{name:<14} skipped: {reason}");
                }
            }
        }
        if let (Some(mean), Some(var)) = (self.mean_accuracy(), self.accuracy_variance()) {
            let _ = writeln!(out, "{:<14} {:>9} {:>9.3}", "Average", "", mean);
            let _ = writeln!(out, "{:<14} {:>9} {:>9.5}", "Variance", "", var);
        }
        out
    }
}

/// A loaded benchmark sample: raw lines plus annotations.
#[derive(Debug, Clone)]
pub struct Sample {
    pub lines: Vec<String>,
    pub truth: GroundTruth,
}

impl Sample {
    pub fn load(files: &DatasetFiles) -> Result<Sample> {
        let lines = read_lines(&files.log)?;
        let truth = load_ground_truth(&files.truth)?;
        if lines.len() != truth.grouping.len() {
            return Err(Error::GroundTruth {
                path: files.truth.clone(),
                message: format!(
                    "{} annotated lines but {} raw lines in {}",
                    truth.grouping.len(),
                    lines.len(),
                    files.log.display()
                ),
            });
        }
        Ok(Sample { lines, truth })
    }

    /// Parses the sample with `config` and scores the result.
    pub fn evaluate(&self, config: &DatasetConfig) -> Result<(DatasetResult, ParseOutput)> {
        let start = Instant::now();
        let mut parser = Parser::new(config.clone())?;
        for line in &self.lines {
            parser.try_parse_line(line)?;
        }
        let output = parser.finalize();
        let seconds = start.elapsed().as_secs_f64();

        let predicted = Grouping::from_labels(output.event_ids());
        let accuracy = parsing_accuracy(&predicted, &self.truth.grouping)?;
        let template_text_matches = self.truth.templates.as_ref().map(|truth| {
            output
                .records
                .iter()
                .zip(truth)
                .filter(|(r, t)| r.template == **t)
                .count()
        });
        Ok((
            DatasetResult {
                name: config.name.clone(),
                threshold: config.threshold,
                accuracy,
                templates_found: output.templates.len(),
                templates_truth: self.truth.grouping.group_count(),
                seconds,
                lines: self.lines.len(),
                template_text_matches,
            },
            output,
        ))
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkOptions {
    /// Applied to every dataset instead of its configured threshold.
    pub threshold: Option<f64>,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn effective(config: &DatasetConfig, threshold: Option<f64>) -> DatasetConfig {
    let mut config = config.clone();
    if let Some(t) = threshold {
        config.threshold = t;
    }
    config
}

/// Parses and scores every dataset found under `corpus`. Datasets with
/// missing or malformed files are reported as skipped; the rest still run.
pub fn benchmark(datasets: &[DatasetConfig], corpus: &Path, options: &BenchmarkOptions) -> BenchmarkReport {
    let rows = with_pool(options.workers, || {
        datasets
            .par_iter()
            .map(|config| {
                let config = effective(config, options.threshold);
                let skipped = |reason: String| DatasetRow::Skipped {
                    name: config.name.clone(),
                    threshold: config.threshold,
                    reason,
                };
                let files = match DatasetFiles::locate(corpus, &config.name) {
                    Ok(f) => f,
                    Err(reason) => return skipped(reason),
                };
                match Sample::load(&files).and_then(|s| s.evaluate(&config)) {
                    Ok((result, _)) => DatasetRow::Done(result),
                    Err(e) => skipped(e.to_string()),
                }
            })
            .collect()
    });
    BenchmarkReport { rows }
}

/// Coarse threshold grid plus a fine pass around the best coarse value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub coarse: Vec<f64>,
    pub fine_step: f64,
    pub fine_radius: f64,
}

impl Default for SweepGrid {
    /// 0.05, 0.10, ..., 0.95, then 0.01 steps within ±0.04 of the best.
    fn default() -> Self {
        SweepGrid {
            coarse: (1..=19).map(|i| i as f64 * 0.05).map(round2).collect(),
            fine_step: 0.01,
            fine_radius: 0.04,
        }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl SweepGrid {
    /// Parses `start:end:step` or a comma-separated list for the coarse grid.
    pub fn parse(spec: &str) -> Result<SweepGrid> {
        let bad = || Error::Config(format!("bad sweep grid `{spec}`"));
        let coarse: Vec<f64> = if spec.contains(':') {
            let parts: Vec<f64> = spec
                .split(':')
                .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let [start, end, step] = parts[..] else {
                return Err(bad());
            };
            if step <= 0.0 || end < start {
                return Err(bad());
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| round2(start + i as f64 * step)).collect()
        } else {
            spec.split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        if coarse.is_empty() {
            return Err(bad());
        }
        for &t in &coarse {
            crate::config::check_threshold(t)?;
        }
        Ok(SweepGrid {
            coarse,
            ..SweepGrid::default()
        })
    }

    fn fine_around(&self, center: f64) -> Vec<f64> {
        if self.fine_step <= 0.0 {
            return Vec::new();
        }
        let n = (self.fine_radius / self.fine_step + 1e-9).floor() as i64;
        (-n..=n)
            .map(|k| round2(center + k as f64 * self.fine_step))
            .filter(|t| (0.0..=1.0).contains(t))
            .collect()
    }
}

/// Accuracy at every evaluated threshold for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    /// Best row per dataset.
    pub best: BenchmarkReport,
    pub curves: Vec<SweepCurve>,
}

impl SweepReport {
    pub fn write_curves_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["dataset", "threshold", "parsing_accuracy"])?;
        for c in &self.curves {
            for (t, pa) in &c.points {
                w.write_record([c.name.clone(), t.to_string(), format!("{pa:.6}")])?;
            }
        }
        w.flush().map_err(|e| Error::io("<sweep>", e))?;
        Ok(())
    }
}

fn best_of(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    // Highest accuracy; among equals, the smallest threshold.
    points.iter().copied().fold(None, |best, (t, pa)| match best {
        Some((bt, bpa)) if bpa > pa || (bpa == pa && bt <= t) => Some((bt, bpa)),
        _ => Some((t, pa)),
    })
}

/// Per-dataset threshold tuning over `grid`.
pub fn sweep(datasets: &[DatasetConfig], corpus: &Path, grid: &SweepGrid, workers: usize) -> SweepReport {
    let results: Vec<(DatasetRow, Option<SweepCurve>)> = with_pool(workers, || {
        datasets
            .par_iter()
            .map(|config| {
                let skipped = |reason: String| {
                    (
                        DatasetRow::Skipped {
                            name: config.name.clone(),
                            threshold: config.threshold,
                            reason,
                        },
                        None,
                    )
                };
                let sample = match DatasetFiles::locate(corpus, &config.name)
                    .and_then(|f| Sample::load(&f).map_err(|e| e.to_string()))
                {
                    Ok(s) => s,
                    Err(reason) => return skipped(reason),
                };
                let run = |thresholds: &[f64]| -> Result<Vec<(f64, DatasetResult)>> {
                    thresholds
                        .par_iter()
                        .map(|&t| sample.evaluate(&effective(config, Some(t))).map(|(r, _)| (t, r)))
                        .collect()
                };
                let mut evaluated: Vec<(f64, DatasetResult)> = match run(&grid.coarse) {
                    Ok(v) => v,
                    Err(e) => return skipped(e.to_string()),
                };
                let coarse_points: Vec<(f64, f64)> = evaluated.iter().map(|(t, r)| (*t, r.accuracy)).collect();
                let Some((center, _)) = best_of(&coarse_points) else {
                    return skipped("empty sweep grid".into());
                };
                let fine: Vec<f64> = grid
                    .fine_around(center)
                    .into_iter()
                    .filter(|t| !evaluated.iter().any(|(s, _)| s == t))
                    .collect();
                match run(&fine) {
                    Ok(v) => evaluated.extend(v),
                    Err(e) => return skipped(e.to_string()),
                }
                evaluated.sort_by(|a, b| a.0.total_cmp(&b.0));
                let points: Vec<(f64, f64)> = evaluated.iter().map(|(t, r)| (*t, r.accuracy)).collect();
                let (best_t, _) = best_of(&points).expect("non-empty");
                let best = evaluated
                    .iter()
                    .find(|(t, _)| *t == best_t)
                    .map(|(_, r)| r.clone())
                    .expect("best threshold evaluated");
                (
                    DatasetRow::Done(best),
                    Some(SweepCurve {
                        name: config.name.clone(),
                        points,
                    }),
                )
            })
            .collect()
    });
    let mut report = SweepReport::default();
    for (row, curve) in results {
        report.best.rows.push(row);
        report.curves.extend(curve);
    }
    report
}
