//! Line-delimited JSON records: datasets, listings, chats, reply pairs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use listingqa_core::datapipe::{ChatLog, GroundTruth, Listing, QAExample, ReplyPair};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Records decoded before the first bad line, and that line's error.
#[derive(Debug)]
pub struct Partial<T> {
    pub records: Vec<T>,
    pub error: Option<Error>,
}

impl<T> Partial<T> {
    pub fn into_result(self) -> Result<Vec<T>> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.records),
        }
    }
}

/// Decode one record per non-blank line, stopping at the first failure.
/// `check` sees each decoded record and may reject it.
pub fn parse_records<T, R, F>(reader: R, source_name: &str, mut check: F) -> Partial<T>
where
    T: DeserializeOwned,
    R: Read,
    F: FnMut(&T) -> std::result::Result<(), String>,
{
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                let error = Error::Parse { source_name: source_name.into(), line: line_no, message: e.to_string() };
                return Partial { records, error: Some(error) };
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let record: T = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                let error = Error::Parse { source_name: source_name.into(), line: line_no, message: e.to_string() };
                return Partial { records, error: Some(error) };
            }
        };
        if let Err(message) = check(&record) {
            let error = Error::Validation { source_name: source_name.into(), line: line_no, message };
            return Partial { records, error: Some(error) };
        }
        records.push(record);
    }
    Partial { records, error: None }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    parse_records(open(path)?, &path.display().to_string(), |_| Ok(())).into_result()
}

pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records_to(&mut out, records).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records_to<T: Serialize, W: Write>(out: &mut W, records: &[T]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn check_example(ex: &QAExample) -> std::result::Result<(), String> {
    ex.validate().map_err(|e| e.to_string())
}

/// Parse QA examples, rejecting labels beyond the candidate count.
pub fn parse_dataset<R: Read>(reader: R, source_name: &str) -> Partial<QAExample> {
    parse_records(reader, source_name, check_example)
}

pub fn read_dataset(path: &Path) -> Result<Vec<QAExample>> {
    parse_dataset(open(path)?, &path.display().to_string()).into_result()
}

pub fn write_dataset(path: &Path, examples: &[QAExample]) -> Result<()> {
    write_records(path, examples)
}

pub fn read_listings(path: &Path) -> Result<Vec<Listing>> {
    read_records(path)
}

pub fn read_chats(path: &Path) -> Result<Vec<ChatLog>> {
    parse_records(open(path)?, &path.display().to_string(), |c: &ChatLog| c.validate().map_err(|e| e.to_string()))
        .into_result()
}

pub fn read_pairs(path: &Path) -> Result<Vec<ReplyPair>> {
    read_records(path)
}

pub fn read_truths(path: &Path) -> Result<Vec<GroundTruth>> {
    read_records(path)
}
