//! Call-log aggregation and graph snapshot I/O.
//!
//! File formats (UTF-8, LF line endings):
//!
//! * event log: `timestamp,caller,callee`. The header line is optional and
//!   the timestamp may be empty; aggregation ignores it.
//! * graph snapshot: optional provenance lines `# key: value`, then the
//!   header `src,dst,weight` and one row per arc. `src` and `dst` are dense
//!   ids when a sidecar `<stem>.vertices.csv` (`external_id,dense_id`)
//!   sits next to the snapshot; without a sidecar they are external ids and
//!   are remapped on load.
//!
//! External ids are ordered numerically when both parse as integers and
//! lexically otherwise, and dense ids are assigned in that order. The
//! resulting graph therefore does not depend on input line order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedDigraph};

pub const EVENTS_HEADER: [&str; 3] = ["timestamp", "caller", "callee"];
pub const GRAPH_HEADER: [&str; 3] = ["src", "dst", "weight"];
pub const VERTICES_HEADER: [&str; 2] = ["external_id", "dense_id"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEvent {
    pub caller: String,
    pub callee: String,
    pub timestamp: Option<i64>,
}

impl CallEvent {
    pub fn new(caller: impl Into<String>, callee: impl Into<String>) -> Self {
        CallEvent {
            caller: caller.into(),
            callee: callee.into(),
            timestamp: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestStats {
    pub events_read: u64,
    pub self_calls_dropped: u64,
    pub malformed_lines: u64,
    pub vertices: u64,
    pub arcs: u64,
}

/// Ordering used to assign dense ids to external ids.
pub fn external_id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Streaming event-to-arc aggregation. Memory grows with distinct callers
/// and arcs, not with events.
#[derive(Debug, Default, Clone)]
pub struct EventAggregator {
    ids: HashMap<Box<str>, u32>,
    labels: Vec<Box<str>>,
    counts: HashMap<(u32, u32), u64>,
    stats: IngestStats,
}

impl EventAggregator {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, id: &str) -> u32 {
        if let Some(&i) = self.ids.get(id) {
            return i;
        }
        let i = self.labels.len() as u32;
        self.labels.push(id.into());
        self.ids.insert(id.into(), i);
        i
    }

    /// Counts one call. Self-calls are dropped and tallied.
    pub fn push(&mut self, caller: &str, callee: &str) {
        self.stats.events_read += 1;
        if caller == callee {
            self.stats.self_calls_dropped += 1;
            return;
        }
        let s = self.intern(caller);
        let t = self.intern(callee);
        *self.counts.entry((s, t)).or_insert(0) += 1;
    }

    pub fn push_event(&mut self, e: &CallEvent) {
        self.push(&e.caller, &e.callee);
    }

    /// Tallies a line that could not be parsed.
    pub fn push_malformed(&mut self) {
        self.stats.events_read += 1;
        self.stats.malformed_lines += 1;
    }

    /// Folds another partial aggregation into this one.
    pub fn merge(&mut self, other: EventAggregator) {
        let remap: Vec<u32> = other.labels.iter().map(|l| self.intern(l)).collect();
        for ((s, t), c) in other.counts {
            *self
                .counts
                .entry((remap[s as usize], remap[t as usize]))
                .or_insert(0) += c;
        }
        self.stats.events_read += other.stats.events_read;
        self.stats.self_calls_dropped += other.stats.self_calls_dropped;
        self.stats.malformed_lines += other.stats.malformed_lines;
    }

    pub fn finish(self) -> (WeightedDigraph, IngestStats) {
        let mut order: Vec<u32> = (0..self.labels.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            external_id_order(&self.labels[a as usize], &self.labels[b as usize])
        });
        let mut dense = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            dense[old as usize] = new as u32;
        }
        let mut builder = GraphBuilder::with_capacity(order.len(), self.counts.len());
        for (&(s, t), &c) in &self.counts {
            builder
                .add_arc(dense[s as usize], dense[t as usize], c as f64)
                .expect("interned ids are in range");
        }
        let labels: Vec<String> = order
            .iter()
            .map(|&old| self.labels[old as usize].to_string())
            .collect();
        let graph = builder
            .finish()
            .0
            .with_labels(labels)
            .expect("one label per vertex");
        let mut stats = self.stats;
        stats.vertices = graph.vertex_count() as u64;
        stats.arcs = graph.arc_count() as u64;
        (graph, stats)
    }
}

/// Aggregates parsed events into a call-count graph.
pub fn aggregate_events<'a, I>(events: I) -> (WeightedDigraph, IngestStats)
where
    I: IntoIterator<Item = &'a CallEvent>,
{
    let mut agg = EventAggregator::new();
    for e in events {
        agg.push_event(e);
    }
    agg.finish()
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn record_line(rec: &csv::ByteRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads an event log into `agg`. Malformed lines are counted and skipped,
/// or abort the read in strict mode.
pub fn read_events_into<R: Read>(
    agg: &mut EventAggregator,
    reader: R,
    source: &Path,
    strict: bool,
) -> Result<()> {
    let mut rdr = csv_reader(reader);
    let mut rec = csv::ByteRecord::new();
    let mut first = true;
    loop {
        match rdr.read_byte_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                if strict {
                    return Err(Error::parse(source, 0, e.to_string()));
                }
                agg.push_malformed();
                continue;
            }
        }
        if first {
            first = false;
            if rec.len() == 3
                && rec
                    .iter()
                    .zip(EVENTS_HEADER)
                    .all(|(f, h)| f == h.as_bytes())
            {
                continue;
            }
        }
        match parse_event(&rec) {
            Ok((caller, callee)) => agg.push(caller, callee),
            Err(msg) => {
                if strict {
                    return Err(Error::parse(source, record_line(&rec), msg));
                }
                agg.push_malformed();
            }
        }
    }
    Ok(())
}

fn parse_event(rec: &csv::ByteRecord) -> std::result::Result<(&str, &str), String> {
    if rec.len() != 3 {
        return Err(format!("expected 3 fields, found {}", rec.len()));
    }
    let field = |i: usize| std::str::from_utf8(&rec[i]).map_err(|_| "invalid UTF-8".to_string());
    let ts = field(0)?.trim();
    if !ts.is_empty() && ts.parse::<i64>().is_err() {
        return Err(format!("bad timestamp {ts:?}"));
    }
    let caller = field(1)?.trim();
    let callee = field(2)?.trim();
    if caller.is_empty() || callee.is_empty() {
        return Err("empty caller or callee".into());
    }
    Ok((caller, callee))
}

/// Aggregates one or more event logs. Files are read in parallel and the
/// partial counts merged; the result is the same for any file order.
pub fn read_events(paths: &[PathBuf], strict: bool) -> Result<(WeightedDigraph, IngestStats)> {
    let parts: Vec<EventAggregator> = paths
        .par_iter()
        .map(|p| {
            let mut agg = EventAggregator::new();
            read_events_into(&mut agg, BufReader::new(open(p)?), p, strict)?;
            Ok(agg)
        })
        .collect::<Result<_>>()?;
    let mut total = EventAggregator::new();
    for part in parts {
        total.merge(part);
    }
    Ok(total.finish())
}

/// Ordered `key: value` pairs written as `#` lines above a snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance(pub Vec<(String, String)>);

impl Provenance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Refuse duplicate rows and self-loops instead of merging or dropping
    /// them.
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub rows: u64,
    pub duplicates_merged: u64,
    pub self_loops_dropped: u64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub graph: WeightedDigraph,
    pub provenance: Provenance,
    pub stats: LoadStats,
}

/// `graph.csv` -> `graph.vertices.csv`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("vertices.csv")
}

pub fn load_edge_list(path: &Path) -> Result<WeightedDigraph> {
    Ok(load_snapshot(path, LoadOptions::default())?.graph)
}

pub fn load_snapshot(path: &Path, opts: LoadOptions) -> Result<Snapshot> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    let provenance = Provenance(
        text.lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| {
                let (k, v) = l[1..].split_once(':')?;
                Some((k.trim().to_string(), v.trim().to_string()))
            })
            .collect(),
    );

    let side = sidecar_path(path);
    let dense_labels = if side.exists() {
        Some(load_sidecar(&side)?)
    } else {
        None
    };

    let mut rows: Vec<(String, String, f64)> = Vec::new();
    let mut rdr = csv_reader(text.as_bytes());
    let mut rec = csv::StringRecord::new();
    let mut saw_header = false;
    while rdr.read_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        if !saw_header {
            if rec.iter().ne(GRAPH_HEADER) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected header {:?}", GRAPH_HEADER.join(",")),
                ));
            }
            saw_header = true;
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let weight: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad weight {:?}", &rec[2])))?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::parse(
                path,
                line,
                format!("non-positive weight {weight}"),
            ));
        }
        rows.push((rec[0].trim().to_string(), rec[1].trim().to_string(), weight));
    }
    if !saw_header {
        return Err(Error::parse(path, 0, "missing header"));
    }

    type Resolve = Box<dyn Fn(&str) -> Option<u32>>;
    let (n, labels, index): (usize, Vec<String>, Resolve) = match dense_labels {
        Some(labels) => {
            let n = labels.len();
            (
                n,
                labels,
                Box::new(move |s: &str| s.parse::<u32>().ok().filter(|&i| (i as usize) < n)),
            )
        }
        None => {
            let mut ids: Vec<&str> = rows
                .iter()
                .flat_map(|(s, t, _)| [s.as_str(), t.as_str()])
                .collect();
            ids.sort_unstable_by(|a, b| external_id_order(a, b));
            ids.dedup();
            let map: HashMap<String, u32> = ids
                .iter()
                .enumerate()
                .map(|(i, s)| (s.to_string(), i as u32))
                .collect();
            let labels = ids.iter().map(|s| s.to_string()).collect();
            (
                map.len(),
                labels,
                Box::new(move |s: &str| map.get(s).copied()),
            )
        }
    };

    let mut builder = GraphBuilder::with_capacity(n, rows.len());
    let mut stats = LoadStats {
        rows: rows.len() as u64,
        ..LoadStats::default()
    };
    for (s, t, w) in &rows {
        let (Some(si), Some(ti)) = (index(s), index(t)) else {
            return Err(Error::Integrity(format!(
                "{}: arc {s} -> {t} references a vertex missing from {}",
                path.display(),
                sidecar_path(path).display()
            )));
        };
        builder.add_arc(si, ti, *w)?;
    }
    let (graph, build) = builder.finish();
    stats.duplicates_merged = build.duplicates_merged;
    stats.self_loops_dropped = build.self_loops_dropped;
    if build.duplicates_merged > 0 {
        if opts.strict {
            return Err(Error::Integrity(format!(
                "{}: {} duplicate (src, dst) rows",
                path.display(),
                build.duplicates_merged
            )));
        }
        log::warn!(
            "{}: merged {} duplicate rows",
            path.display(),
            build.duplicates_merged
        );
    }
    if build.self_loops_dropped > 0 {
        if opts.strict {
            return Err(Error::Integrity(format!(
                "{}: {} self-loop rows",
                path.display(),
                build.self_loops_dropped
            )));
        }
        log::warn!(
            "{}: dropped {} self-loops",
            path.display(),
            build.self_loops_dropped
        );
    }
    Ok(Snapshot {
        graph: graph.with_labels(labels)?,
        provenance,
        stats,
    })
}

fn load_sidecar(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv_reader(BufReader::new(open(path)?));
    let mut rec = csv::StringRecord::new();
    let mut pairs: Vec<(u32, String)> = Vec::new();
    let mut saw_header = false;
    while rdr.read_record(&mut rec)? {
        let line = rec.position().map_or(0, |p| p.line());
        if !saw_header {
            if rec.iter().ne(VERTICES_HEADER) {
                return Err(Error::parse(
                    path,
                    line,
                    "expected header external_id,dense_id",
                ));
            }
            saw_header = true;
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::parse(path, line, "expected 2 fields"));
        }
        let dense: u32 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad dense id {:?}", &rec[1])))?;
        pairs.push((dense, rec[0].to_string()));
    }
    if !saw_header {
        return Err(Error::parse(path, 0, "missing header"));
    }
    pairs.sort_unstable_by_key(|p| p.0);
    if pairs.iter().enumerate().any(|(i, p)| p.0 as usize != i) {
        return Err(Error::Integrity(format!(
            "{}: dense ids are not a permutation of 0..{}",
            path.display(),
            pairs.len()
        )));
    }
    Ok(pairs.into_iter().map(|p| p.1).collect())
}

fn sanitize(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Writes the snapshot at `path` and its id sidecar next to it.
pub fn save_snapshot(g: &WeightedDigraph, path: &Path, provenance: &Provenance) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (k, v) in &provenance.0 {
        writeln!(out, "# {}: {}", sanitize(k).replace(':', "_"), sanitize(v))
            .map_err(|e| Error::io(path, e))?;
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        w.write_record(GRAPH_HEADER)?;
        for a in g.arcs() {
            // f64 Display is the shortest string that parses back to the same bits
            w.write_record([
                a.source.0.to_string(),
                a.target.0.to_string(),
                a.weight.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;

    let side = sidecar_path(path);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&side)?;
    w.write_record(VERTICES_HEADER)?;
    for v in g.vertices() {
        w.write_record([g.label(v).as_ref(), v.0.to_string().as_str()])?;
    }
    w.flush().map_err(|e| Error::io(&side, e))?;
    Ok(())
}
