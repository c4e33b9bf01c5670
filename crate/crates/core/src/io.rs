//! Sequence file format.
//!
//! ```text
//! # capacity=1000
//! id,size,arrival,departure
//! 0,412,1,7
//! ```
//!
//! The capacity comment is required and may appear on any line; other `#`
//! lines are ignored.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::model::{Capacity, Job, JobSequence};
use crate::{Error, Result};

const HEADER: [&str; 4] = ["id", "size", "arrival", "departure"];

pub fn write_sequence<W: Write>(mut out: W, seq: &JobSequence) -> Result<()> {
    writeln!(out, "# capacity={}", seq.capacity().get())?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(HEADER)?;
    for job in seq.jobs() {
        w.serialize(job)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sequence_to_string(seq: &JobSequence) -> String {
    let mut buf = Vec::new();
    write_sequence(&mut buf, seq).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_sequence<R: Read>(mut input: R) -> Result<JobSequence> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_sequence(&text)
}

pub fn parse_sequence(text: &str) -> Result<JobSequence> {
    let mut capacity = None;
    for line in text.lines() {
        let Some(comment) = line.trim().strip_prefix('#') else {
            continue;
        };
        if let Some(value) = comment.trim().strip_prefix("capacity=") {
            let e: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad capacity '{}'", value.trim())))?;
            capacity = Some(Capacity::new(e)?);
        }
    }
    let capacity = capacity.ok_or_else(|| Error::Parse("missing '# capacity=E' line".into()))?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Parse(format!(
            "expected header '{}', found '{}'",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let jobs = reader
        .deserialize::<Job>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    JobSequence::new(jobs, capacity)
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<JobSequence> {
    parse_sequence(&fs::read_to_string(path)?)
}

pub fn save_sequence(path: impl AsRef<Path>, seq: &JobSequence) -> Result<()> {
    fs::write(path, sequence_to_string(seq))?;
    Ok(())
}
