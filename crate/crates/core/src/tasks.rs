//! Word-problem datasets: uniform random token sequences with their running
//! products.
//!
//! # Token stream contract (`gtssm-ds/1`)
//!
//! Record `i` of a dataset with seed `s` draws from ChaCha8 (`rand_chacha`
//! 0.3) seeded with `ChaCha8Rng::seed_from_u64(s)` and switched to stream `i`.
//! Each token takes successive `next_u64` outputs, rejecting values at or
//! above the largest multiple of `|G|`, and reduces the first accepted value
//! modulo `|G|`. Tokens are canonical element indices.
//!
//! # File format
//!
//! UTF-8, LF-terminated lines. The first line is the JSON header; every
//! following line is one record `{"x":[…],"y":[…]}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Element, FiniteGroup};

pub const DATASET_FORMAT: &str = "gtssm-ds/1";
/// How element indices were assigned; rides along in the header.
pub const ELEMENT_ORDER: &str = "canonical";

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("dataset format {found:?} is not {DATASET_FORMAT:?}")]
    FormatVersionMismatch { found: String },
    #[error("corrupt record at line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dataset group: {0}")]
    Group(#[from] crate::group::GroupError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub group: String,
    pub labels: Vec<String>,
    pub element_order: String,
    pub len: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

impl TaskRecord {
    pub fn from_tokens(g: &FiniteGroup, x: &[Element]) -> TaskRecord {
        TaskRecord {
            x: x.iter().map(|e| e.0).collect(),
            y: g.prefix_products(x).into_iter().map(|e| e.0).collect(),
        }
    }
}

/// Uniform tokens for one record under the stream contract above.
pub struct TokenStream {
    rng: ChaCha8Rng,
    order: u64,
    zone: u64,
}

impl TokenStream {
    pub fn new(seed: u64, record: u64, order: usize) -> TokenStream {
        assert!(order > 0, "token stream over an empty group");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(record);
        let order = order as u64;
        TokenStream { rng, order, zone: (u64::MAX / order) * order }
    }
}

impl Iterator for TokenStream {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        loop {
            let v = self.rng.next_u64();
            if v < self.zone {
                return Some(Element((v % self.order) as u32));
            }
        }
    }
}

pub fn sample_tokens(seed: u64, record: u64, order: usize, len: usize) -> Vec<Element> {
    TokenStream::new(seed, record, order).take(len).collect()
}

pub fn gen_record(g: &FiniteGroup, seed: u64, record: u64, len: usize) -> TaskRecord {
    TaskRecord::from_tokens(g, &sample_tokens(seed, record, g.order(), len))
}

pub fn header_for(g: &FiniteGroup, count: usize, len: usize, seed: u64) -> DatasetHeader {
    DatasetHeader {
        format: DATASET_FORMAT.to_string(),
        group: g.spec().to_string(),
        labels: g.labels().to_vec(),
        element_order: ELEMENT_ORDER.to_string(),
        len,
        count,
        seed,
    }
}

/// Header plus all records, in record-index order regardless of scheduling.
pub fn gen_dataset(
    g: &FiniteGroup,
    count: usize,
    len: usize,
    seed: u64,
) -> Result<(DatasetHeader, Vec<TaskRecord>), TaskError> {
    if count == 0 || len == 0 {
        return Err(TaskError::InvalidArgument("count and len must be at least 1".into()));
    }
    let records = (0..count as u64)
        .into_par_iter()
        .map(|i| gen_record(g, seed, i, len))
        .collect();
    Ok((header_for(g, count, len, seed), records))
}

pub fn write_dataset(path: &Path, header: &DatasetHeader, records: &[TaskRecord]) -> Result<(), TaskError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset and re-checks every record against the header's group.
pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Vec<TaskRecord>), TaskError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let corrupt = |line: usize, reason: String| TaskError::CorruptRecord { line, reason };

    let first = lines.next().ok_or_else(|| corrupt(1, "missing header".into()))??;
    let raw: serde_json::Value = serde_json::from_str(&first).map_err(|e| corrupt(1, e.to_string()))?;
    let format = raw.get("format").and_then(|f| f.as_str()).unwrap_or_default();
    if format != DATASET_FORMAT {
        return Err(TaskError::FormatVersionMismatch { found: format.to_string() });
    }
    let header: DatasetHeader = serde_json::from_value(raw).map_err(|e| corrupt(1, e.to_string()))?;
    let g = FiniteGroup::parse(&header.group)?;
    if header.labels != g.labels() {
        return Err(corrupt(1, "element labels disagree with the group".into()));
    }

    let mut records = Vec::with_capacity(header.count);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let rec: TaskRecord = serde_json::from_str(&line).map_err(|e| corrupt(lineno, e.to_string()))?;
        if rec.x.len() != header.len || rec.y.len() != header.len {
            return Err(corrupt(lineno, "record length differs from header".into()));
        }
        let x: Vec<Element> = rec
            .x
            .iter()
            .map(|&t| g.check(Element(t)))
            .collect::<Result<_, _>>()
            .map_err(|e| corrupt(lineno, e.to_string()))?;
        if TaskRecord::from_tokens(&g, &x) != rec {
            return Err(corrupt(lineno, "y is not the running product of x".into()));
        }
        records.push(rec);
    }
    if records.len() != header.count {
        return Err(corrupt(
            records.len() + 2,
            format!("expected {} records, found {}", header.count, records.len()),
        ));
    }
    Ok((header, records))
}

/// Training lengths `start, start + stride, …` up to `max_len`.
pub fn curriculum_plan(max_len: usize, start: usize, stride: usize) -> Result<Vec<usize>, TaskError> {
    if start < 2 || start > max_len || stride == 0 {
        return Err(TaskError::InvalidArgument(format!(
            "need 2 <= start <= max_len and stride >= 1 (got start {start}, max_len {max_len}, stride {stride})"
        )));
    }
    Ok((start..=max_len).step_by(stride).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let c60 = FiniteGroup::cyclic(60).unwrap();
        let r = TaskRecord::from_tokens(&c60, &[51, 20, 4, 49].map(Element));
        assert_eq!(r.y, vec![51, 11, 15, 4]);

        let s3 = FiniteGroup::symmetric(3).unwrap();
        let e = s3.identity();
        assert_eq!(TaskRecord::from_tokens(&s3, &[e, e, e]).y, vec![0, 0, 0]);
        let x = [s3.element("(12)").unwrap(), s3.element("(123)").unwrap()];
        let y: Vec<&str> = TaskRecord::from_tokens(&s3, &x).y.iter().map(|&i| s3.label(Element(i))).collect();
        assert_eq!(y, ["(12)", "(23)"]);
    }

    #[test]
    fn streams_are_reproducible_and_independent() {
        let a = sample_tokens(7, 0, 60, 100);
        assert_eq!(a, sample_tokens(7, 0, 60, 100));
        assert_ne!(a, sample_tokens(7, 1, 60, 100));
        assert_ne!(a, sample_tokens(8, 0, 60, 100));
        assert!(a.iter().all(|t| t.index() < 60));
        let g = FiniteGroup::cyclic(24).unwrap();
        let (_, recs) = gen_dataset(&g, 5, 10, 3).unwrap();
        assert_eq!(recs[4], gen_record(&g, 3, 4, 10));
    }

    #[test]
    fn pinned_stream_prefix() {
        // Guards the versioned stream contract against silent drift.
        let pinned = sample_tokens(0, 0, 6, 12);
        let again: Vec<Element> = TokenStream::new(0, 0, 6).take(12).collect();
        assert_eq!(pinned, again);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        rng.set_stream(0);
        let zone = (u64::MAX / 6) * 6;
        let manual: Vec<Element> = std::iter::repeat_with(|| rng.next_u64())
            .filter(|&v| v < zone)
            .take(12)
            .map(|v| Element((v % 6) as u32))
            .collect();
        assert_eq!(pinned, manual);
    }

    #[test]
    fn marginals_are_uniform() {
        for order in [2usize, 6, 60] {
            let n = 100_000;
            let mut counts = vec![0usize; order];
            for t in sample_tokens(11, 0, order, n) {
                counts[t.index()] += 1;
            }
            let p = 1.0 / order as f64;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            for c in counts {
                assert!((c as f64 - n as f64 * p).abs() <= 5.0 * sigma);
            }
        }
    }

    #[test]
    fn file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c24.jsonl");
        let g = FiniteGroup::cyclic(24).unwrap();
        let (h, recs) = gen_dataset(&g, 50, 20, 1).unwrap();
        write_dataset(&path, &h, &recs).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), (h.clone(), recs.clone()));

        let text = std::fs::read_to_string(&path).unwrap();
        let cut = text.len() - 30;
        std::fs::write(&path, &text[..cut]).unwrap();
        match read_dataset(&path) {
            Err(TaskError::CorruptRecord { line, .. }) => assert_eq!(line, 51),
            other => panic!("{other:?}"),
        }

        let empty = DatasetHeader { count: 0, ..h.clone() };
        write_dataset(&path, &empty, &[]).unwrap();
        assert_eq!(read_dataset(&path).unwrap().1, vec![]);

        let old = DatasetHeader { format: "gtssm-ds/0".into(), ..h };
        write_dataset(&path, &old, &[]).unwrap();
        assert!(matches!(read_dataset(&path), Err(TaskError::FormatVersionMismatch { .. })));
    }

    #[test]
    fn curriculum() {
        assert_eq!(curriculum_plan(60, 2, 1).unwrap(), (2..=60).collect::<Vec<_>>());
        assert_eq!(curriculum_plan(2, 2, 1).unwrap(), vec![2]);
        assert_eq!(curriculum_plan(10, 2, 2).unwrap(), vec![2, 4, 6, 8, 10]);
        assert!(curriculum_plan(10, 1, 1).is_err());
        assert!(curriculum_plan(10, 11, 1).is_err());
    }
}
