//! Seeded synthetic log corpora in loghub layout, for tests that need raw
//! samples plus annotations without the public benchmark files.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use logstruct::DatasetConfig;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FORMAT: &str = "<Date> <Time> <Level> <Component>: <Content>";
pub const REGEXES: [&str; 2] = [r"blk_-?\d+", r"(\d+\.){3}\d+(:\d+)?"];

/// Event shapes. `{ip}`, `{blk}`, `{n}`, `{hex}`, `{path}` are filled per line;
/// the annotated template replaces each slot with `<*>`.
pub const EVENTS: &[(&str, &str)] = &[
    ("dfs.DataNode", "Receiving block {blk} src: /{ip} dest: /{ip}"),
    ("dfs.DataNode", "PacketResponder {n} for block {blk} terminating"),
    ("dfs.FSNamesystem", "BLOCK* NameSystem.addStoredBlock: blockMap updated: {ip} is added to {blk} size {n}"),
    ("dfs.DataNode", "Verification succeeded for {blk}"),
    ("sshd", "Connection closed by {ip} [preauth]"),
    ("sshd", "Received disconnect from {ip}: 11: Bye Bye [preauth]"),
    ("httpd", "workerEnv.init() ok {path}"),
    ("httpd", "mod_jk child workerEnv in error state {n}"),
    ("httpd", "jk2_init() Found child {n} in scoreboard slot {n}"),
    ("scheduler", "Dispatching batch {hex} to worker pool"),
    ("scheduler", "Worker pool drained after {n} ms"),
    ("cache", "Evicted {n} entries from region {path}"),
    ("kernel", "Out of memory: Kill process {n} score {n} or sacrifice child"),
    ("net", "Link state changed to up on interface {ip}"),
];

fn fill(rng: &mut ChaCha8Rng, shape: &str) -> (String, String) {
    let mut line = String::new();
    let mut template = String::new();
    let mut rest = shape;
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}').expect("closed slot") + open;
        line.push_str(&rest[..open]);
        template.push_str(&rest[..open]);
        let value = match &rest[open + 1..close] {
            "ip" => format!(
                "10.{}.{}.{}:{}",
                rng.gen_range(0..255),
                rng.gen_range(0..255),
                rng.gen_range(1..255),
                rng.gen_range(1024..65535)
            ),
            "blk" => format!("blk_{}{}", if rng.gen_bool(0.5) { "-" } else { "" }, rng.gen::<u32>()),
            "n" => rng.gen_range(0..100_000).to_string(),
            "hex" => format!("{:08x}", rng.gen::<u32>()),
            "path" => format!(
                "/{}/{}",
                ["etc", "var", "opt", "srv"][rng.gen_range(0..4)],
                ["conf", "cache", "data", "run", "log"][rng.gen_range(0..5)]
            ),
            other => panic!("unknown slot {other}"),
        };
        line.push_str(&value);
        template.push_str("<*>");
        rest = &rest[close + 1..];
    }
    line.push_str(rest);
    template.push_str(rest);
    (line, template)
}

/// A generated sample with per-line event labels.
pub struct Synthetic {
    pub lines: Vec<String>,
    pub events: Vec<usize>,
    pub templates: Vec<String>,
}

/// `n` lines drawn from `EVENTS` (or its first `event_count` shapes),
/// deterministic in `seed`.
pub fn generate(seed: u64, n: usize, event_count: usize) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = &EVENTS[..event_count.min(EVENTS.len())];
    let levels = ["INFO", "WARN", "ERROR"];
    let mut out = Synthetic {
        lines: Vec::with_capacity(n),
        events: Vec::with_capacity(n),
        templates: Vec::with_capacity(n),
    };
    for i in 0..n {
        let event = rng.gen_range(0..shapes.len());
        let (component, shape) = shapes[event];
        let (content, template) = fill(&mut rng, shape);
        let line = format!(
            "2024-03-{:02} {:02}:{:02}:{:02} {} {}: {}",
            1 + i % 28,
            rng.gen_range(0..24),
            rng.gen_range(0..60),
            rng.gen_range(0..60),
            levels[rng.gen_range(0..levels.len())],
            component,
            content
        );
        out.lines.push(line);
        out.events.push(event);
        out.templates.push(template);
    }
    out
}

impl Synthetic {
    pub fn shuffled(mut self, seed: u64) -> Synthetic {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..self.lines.len()).collect();
        order.shuffle(&mut rng);
        self.lines = order.iter().map(|&i| self.lines[i].clone()).collect();
        self.events = order.iter().map(|&i| self.events[i]).collect();
        self.templates = order.iter().map(|&i| self.templates[i].clone()).collect();
        self
    }

    pub fn raw(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    pub fn structured_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["LineId", "EventId", "EventTemplate"]).unwrap();
        for (i, (e, t)) in self.events.iter().zip(&self.templates).enumerate() {
            w.write_record([(i + 1).to_string(), format!("E{}", e + 1), t.clone()])
                .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Writes `<root>/<name>/<name>_2k.log` and its `_structured.csv`.
    pub fn write_dataset(&self, root: &Path, name: &str) -> PathBuf {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).unwrap();
        let log = dir.join(format!("{name}_2k.log"));
        std::fs::write(&log, self.raw()).unwrap();
        std::fs::write(dir.join(format!("{name}_2k.log_structured.csv")), self.structured_csv()).unwrap();
        log
    }
}

pub fn config(name: &str, threshold: f64) -> DatasetConfig {
    DatasetConfig::new(name, FORMAT, REGEXES, threshold)
}

pub fn write_config(dir: &Path, config: &DatasetConfig) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join(format!("{}.toml", config.name));
    let mut text = String::new();
    let _ = write!(text, "{}", config.to_toml());
    std::fs::write(&path, text).unwrap();
    path
}
