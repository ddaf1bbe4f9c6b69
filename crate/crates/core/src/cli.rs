//! Command-line front end: `parse`, `benchmark` and `sweep` modes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser as ClapParser, ValueEnum};

use crate::config::{self, DatasetConfig};
use crate::error::{Error, Result};
use crate::eval::{self, BenchmarkOptions, SweepGrid};
use crate::parser::{ParseOutput, Parser};
use crate::preprocess::read_lines;

/// Environment variable consulted when `--input` is absent.
pub const CORPUS_ENV: &str = "LOGSTRUCT_CORPUS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Structure one log file.
    Parse,
    /// Score every configured dataset against its ground truth.
    Benchmark,
    /// Tune the similarity threshold per dataset.
    Sweep,
}

#[derive(Debug, Clone, ClapParser)]
#[command(name = "logstruct", version, about = "Structure raw logs into event templates")]
pub struct RunOptions {
    #[arg(long, value_enum, default_value = "parse")]
    pub mode: Mode,

    /// Log file (parse) or corpus root (benchmark, sweep).
    #[arg(long, env = CORPUS_ENV)]
    pub input: Option<PathBuf>,

    /// Dataset config file, or (benchmark, sweep) a directory of them.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Override the configured similarity threshold.
    #[arg(long, value_parser = parse_threshold)]
    pub threshold: Option<f64>,

    /// Fail on lines that do not match the header format.
    #[arg(long)]
    pub strict_headers: bool,

    /// Also write the inverted index as `<name>_index.csv`.
    #[arg(long)]
    pub dump_index: bool,

    /// Worker threads for benchmark and sweep (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,

    /// Coarse sweep grid, `start:end:step` or a comma list.
    #[arg(long)]
    pub sweep_grid: Option<String>,
}

fn parse_threshold(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    config::check_threshold(t).map_err(|e| e.to_string())?;
    Ok(t)
}

/// Runs the selected mode, returning the process exit code.
pub fn run(options: &RunOptions) -> i32 {
    let result = match options.mode {
        Mode::Parse => run_parse(options),
        Mode::Benchmark => run_benchmark(options),
        Mode::Sweep => run_sweep(options),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn required_input(options: &RunOptions) -> Result<&Path> {
    options
        .input
        .as_deref()
        .ok_or_else(|| Error::Config(format!("--input is required (or set {CORPUS_ENV})")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn run_parse(options: &RunOptions) -> Result<()> {
    let input = required_input(options)?;
    let mut config = match &options.config {
        Some(path) => DatasetConfig::load(path)?,
        None => DatasetConfig::fallback(
            input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "default".into()),
        ),
    };
    if let Some(t) = options.threshold {
        config.threshold = t;
    }
    let name = config.name.clone();
    let lines = read_lines(input)?;

    let start = Instant::now();
    let mut parser = Parser::new(config)?.strict_headers(options.strict_headers);
    for line in &lines {
        parser.try_parse_line(line)?;
    }
    let output = parser.finalize();
    let seconds = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&options.out).map_err(|e| Error::io(&options.out, e))?;
    let structured = options.out.join(format!("{name}_structured.csv"));
    let w = create(&structured)?;
    let w = write_structured(&output, w)?;
    finish(w, &structured)?;

    let templates = options.out.join(format!("{name}_templates.csv"));
    let w = write_templates(&output, create(&templates)?)?;
    finish(w, &templates)?;

    if options.dump_index {
        let path = options.out.join(format!("{name}_index.csv"));
        let mut w = create(&path)?;
        parser.index().dump_csv(&mut w)?;
        finish(w, &path)?;
    }

    println!(
        "{name}: {} lines, {} templates, {seconds:.3}s",
        output.records.len(),
        output.templates.len()
    );
    Ok(())
}

/// `LineId,Content,EventId,EventTemplate`, one row per input line.
pub fn write_structured<W: io::Write>(output: &ParseOutput, writer: W) -> Result<W> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["LineId", "Content", "EventId", "EventTemplate"])?;
    for r in &output.records {
        w.write_record([
            r.line_id.to_string().as_str(),
            &r.content,
            &r.event_id.to_string(),
            &r.template,
        ])?;
    }
    w.into_inner().map_err(|e| Error::io("<structured>", e.into_error()))
}

/// `EventId,EventTemplate,Occurrences`, in ID order.
pub fn write_templates<W: io::Write>(output: &ParseOutput, writer: W) -> Result<W> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["EventId", "EventTemplate", "Occurrences"])?;
    for t in &output.templates {
        w.write_record([
            t.event_id.to_string().as_str(),
            &t.template,
            &t.occurrences.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::io("<templates>", e.into_error()))
}

fn dataset_configs(options: &RunOptions) -> Result<Vec<DatasetConfig>> {
    let path = options
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config (file or directory) is required".into()))?;
    let configs = if path.is_dir() {
        config::load_dir(path)?
    } else {
        vec![DatasetConfig::load(path)?]
    };
    if configs.is_empty() {
        return Err(Error::Config(format!("no *.toml configs in {}", path.display())));
    }
    Ok(configs)
}

pub fn run_benchmark(options: &RunOptions) -> Result<()> {
    let corpus = required_input(options)?;
    let configs = dataset_configs(options)?;
    let report = eval::benchmark(
        &configs,
        corpus,
        &BenchmarkOptions {
            threshold: options.threshold,
            workers: options.workers,
        },
    );

    std::fs::create_dir_all(&options.out).map_err(|e| Error::io(&options.out, e))?;
    let path = options.out.join("benchmark_report.csv");
    let mut w = create(&path)?;
    report.write_csv(&mut w)?;
    finish(w, &path)?;

    print!("{}", report.render_table());
    Ok(())
}

pub fn run_sweep(options: &RunOptions) -> Result<()> {
    let corpus = required_input(options)?;
    let configs = dataset_configs(options)?;
    let grid = match &options.sweep_grid {
        Some(spec) => SweepGrid::parse(spec)?,
        None => SweepGrid::default(),
    };
    let report = eval::sweep(&configs, corpus, &grid, options.workers);

    std::fs::create_dir_all(&options.out).map_err(|e| Error::io(&options.out, e))?;
    let path = options.out.join("sweep_report.csv");
    let mut w = create(&path)?;
    report.best.write_csv(&mut w)?;
    finish(w, &path)?;

    let path = options.out.join("sweep_curves.csv");
    let mut w = create(&path)?;
    report.write_curves_csv(&mut w)?;
    finish(w, &path)?;

    // Tuned configs, ready to ship.
    let tuned = options.out.join("tuned");
    std::fs::create_dir_all(&tuned).map_err(|e| Error::io(&tuned, e))?;
    for config in &configs {
        if let Some(best) = report.best.get(&config.name).and_then(|r| r.result()) {
            let mut c = config.clone();
            c.threshold = best.threshold;
            let path = tuned.join(format!("{}.toml", c.name));
            std::fs::write(&path, c.to_toml()).map_err(|e| Error::io(&path, e))?;
        }
    }

    print!("{}", report.best.render_table());
    Ok(())
}
