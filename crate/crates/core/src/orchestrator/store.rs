// SPDX-License-Identifier: Apache-2.0

//! Run directory layout and checkpointing.
//!
//! ```text
//! run.json        configuration and problem
//! nodes.jsonl     one node per line, appended as nodes are evaluated
//! tree.json       search tree snapshot (MCTS)
//! chains.jsonl    idea and chain transcript (IGR)
//! usage.jsonl     one line per model call
//! testbench.v     the testbench every candidate ran against
//! candidates/     per-candidate scratch directories
//! scaling.csv     score against node index
//! summary.json    final summary
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use super::report::{RunMeta, RunSummary};
use crate::domain::Node;
use crate::llm::{LanguageModel, MeteredModel, UsageRecord};

pub const RUN_JSON: &str = "run.json";
pub const NODES_JSONL: &str = "nodes.jsonl";
pub const TREE_JSON: &str = "tree.json";
pub const CHAINS_JSONL: &str = "chains.jsonl";
pub const USAGE_JSONL: &str = "usage.jsonl";
pub const TESTBENCH_V: &str = "testbench.v";
pub const CANDIDATES_DIR: &str = "candidates";
pub const SCALING_CSV: &str = "scaling.csv";
pub const SUMMARY_JSON: &str = "summary.json";

pub type Metered = MeteredModel<Arc<dyn LanguageModel>>;

/// Receives every node as soon as it is archived.
pub trait RunSink {
    fn record(&mut self, node: &Node, events: &[Value], snapshot: Option<&Value>) -> io::Result<()>;
}

/// Keeps nothing.
pub struct NoSink;

impl RunSink for NoSink {
    fn record(&mut self, _: &Node, _: &[Value], _: Option<&Value>) -> io::Result<()> {
        Ok(())
    }
}

/// What a previous run left behind.
#[derive(Debug, Default)]
pub struct Checkpoint {
    pub nodes: Vec<Node>,
    pub events: Vec<Value>,
    pub usage: Vec<UsageRecord>,
}

pub struct RunDir {
    path: PathBuf,
    metered: Option<Arc<Metered>>,
    /// Records of `metered` already written.
    flushed: usize,
    /// Calls made by earlier sessions of this run.
    seq_offset: usize,
}

fn with_path<T>(path: &Path, r: io::Result<T>) -> io::Result<T> {
    r.map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn append_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> io::Result<()> {
    let mut f = with_path(path, OpenOptions::new().create(true).append(true).open(path))?;
    for l in lines {
        with_path(path, writeln!(f, "{l}"))?;
    }
    with_path(path, f.flush())
}

fn to_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

/// Reads a JSONL file. A malformed last line is dropped as the remains of
/// an interrupted write; malformed lines elsewhere are errors.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return with_path(path, Err(e)),
    };
    let lines: Vec<String> = with_path(path, BufReader::new(f).lines().collect())?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(e) if i + 1 == lines.len() => {
                log::warn!("{}:{}: dropping incomplete last line ({e})", path.display(), i + 1);
            }
            Err(e) => {
                return Err(io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1)))
            }
        }
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    with_path(path, fs::write(path, s))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> io::Result<T> {
    let s = with_path(path, fs::read_to_string(path))?;
    serde_json::from_str(&s).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
}

impl RunDir {
    /// Opens `path` for a new run, or for continuing one when `resume` is
    /// set. A fresh run refuses a directory that already holds nodes.
    pub fn open(path: &Path, resume: bool) -> io::Result<(RunDir, Checkpoint)> {
        with_path(path, fs::create_dir_all(path))?;
        let nodes_path = path.join(NODES_JSONL);
        let existing = nodes_path.is_file() && fs::metadata(&nodes_path).map(|m| m.len() > 0).unwrap_or(false);
        let mut checkpoint = Checkpoint::default();
        if existing && !resume {
            return Err(io::Error::new(
                io::ErrorKind::AlreadyExists,
                format!("{} already holds a run; pass --resume to continue it", path.display()),
            ));
        }
        if resume {
            checkpoint.nodes = read_jsonl(&nodes_path)?;
            checkpoint.events = read_jsonl(&path.join(CHAINS_JSONL))?;
            checkpoint.usage = read_jsonl(&path.join(USAGE_JSONL))?;
            // Rewrite so a dropped partial line does not linger.
            let tmp: Vec<String> = checkpoint.nodes.iter().map(to_line).collect();
            with_path(&nodes_path, fs::write(&nodes_path, tmp.iter().map(|l| format!("{l}\n")).collect::<String>()))?;
        } else {
            for f in [NODES_JSONL, CHAINS_JSONL, USAGE_JSONL, TREE_JSON, SCALING_CSV, SUMMARY_JSON] {
                let p = path.join(f);
                if p.exists() {
                    with_path(&p, fs::remove_file(&p))?;
                }
            }
        }
        let seq_offset = checkpoint.usage.len();
        Ok((RunDir { path: path.to_path_buf(), metered: None, flushed: 0, seq_offset }, checkpoint))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn candidates_dir(&self) -> PathBuf {
        self.path.join(CANDIDATES_DIR)
    }

    /// Model whose call records are copied into `usage.jsonl`.
    pub fn attach_usage(&mut self, metered: Arc<Metered>) {
        self.flushed = metered.records().len();
        self.metered = Some(metered);
    }

    pub fn write_meta(&self, meta: &RunMeta) -> io::Result<()> {
        write_json(&self.path.join(RUN_JSON), meta)
    }

    pub fn write_testbench(&self, source: &str) -> io::Result<()> {
        let p = self.path.join(TESTBENCH_V);
        with_path(&p, fs::write(&p, source))
    }

    pub fn flush_usage(&mut self) -> io::Result<()> {
        let Some(m) = &self.metered else { return Ok(()) };
        let records = m.records();
        if records.len() <= self.flushed {
            return Ok(());
        }
        let offset = self.seq_offset;
        let lines = records[self.flushed..].iter().map(|r| to_line(&UsageRecord { seq: r.seq + offset, ..r.clone() }));
        append_lines(&self.path.join(USAGE_JSONL), lines)?;
        self.flushed = records.len();
        Ok(())
    }

    pub fn write_final(&mut self, summary: &RunSummary, scaling_csv: &str) -> io::Result<()> {
        self.flush_usage()?;
        let p = self.path.join(SCALING_CSV);
        with_path(&p, fs::write(&p, scaling_csv))?;
        write_json(&self.path.join(SUMMARY_JSON), summary)
    }
}

impl RunSink for RunDir {
    fn record(&mut self, node: &Node, events: &[Value], snapshot: Option<&Value>) -> io::Result<()> {
        append_lines(&self.path.join(NODES_JSONL), [to_line(node)])?;
        if !events.is_empty() {
            append_lines(&self.path.join(CHAINS_JSONL), events.iter().map(to_line))?;
        }
        if let Some(s) = snapshot {
            write_json(&self.path.join(TREE_JSON), s)?;
        }
        self.flush_usage()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Feedback, NodeId, TokenUsage};

    fn node(i: u64) -> Node {
        Node {
            id: NodeId(i),
            code: format!("bits = {i}"),
            score: 0.5,
            feedback: Feedback::error("e"),
            parent_id: None,
            depth: 0,
            created_at_node_index: i as usize,
            template_id: "t".into(),
            chain: None,
            tokens: TokenUsage::default(),
        }
    }

    #[test]
    fn checkpoint_round_trip_drops_torn_line() {
        let d = tempfile::tempdir().unwrap();
        let (mut dir, cp) = RunDir::open(d.path(), false).unwrap();
        assert!(cp.nodes.is_empty());
        dir.record(&node(1), &[serde_json::json!({"event": "x"})], None).unwrap();
        dir.record(&node(2), &[], None).unwrap();
        let p = d.path().join(NODES_JSONL);
        let mut f = OpenOptions::new().append(true).open(&p).unwrap();
        write!(f, "{{\"id\": 3, \"co").unwrap();

        assert!(RunDir::open(d.path(), false).is_err());
        let (_, cp) = RunDir::open(d.path(), true).unwrap();
        assert_eq!(cp.nodes, vec![node(1), node(2)]);
        assert_eq!(cp.events.len(), 1);
        assert_eq!(read_jsonl::<Node>(&p).unwrap().len(), 2);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("x.jsonl");
        fs::write(&p, "{}\nnot json\n{}\n").unwrap();
        assert!(read_jsonl::<Value>(&p).is_err());
    }
}
