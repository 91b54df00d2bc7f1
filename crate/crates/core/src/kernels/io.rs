//! Kernel file formats.
//!
//! Binary layout, all little-endian: eight `u64` header words
//! `[magic, version, n, kind, digest, 0, 0, 0]` followed by `n * n` `f64`
//! entries in row-major order. CSV: `n` lines of `n` comma-separated values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{KernelKind, KernelMatrix};
use crate::digest::Digest;
use crate::error::{Error, Result};

pub const MAGIC: u64 = u64::from_le_bytes(*b"QKGRAM\0\0");
pub const VERSION: u64 = 1;
const HEADER_WORDS: usize = 8;

pub fn write_binary<W: Write>(k: &KernelMatrix, mut out: W) -> Result<()> {
    let n = k.n();
    let header = [MAGIC, VERSION, n as u64, k.kind().code(), k.digest().0, 0, 0, 0];
    for word in header {
        out.write_all(&word.to_le_bytes())?;
    }
    for i in 0..n {
        for j in 0..n {
            out.write_all(&k.get(i, j).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<KernelMatrix> {
    let mut word = [0u8; 8];
    let mut header = [0u64; HEADER_WORDS];
    for h in header.iter_mut() {
        input
            .read_exact(&mut word)
            .map_err(|_| Error::Format("truncated header".into()))?;
        *h = u64::from_le_bytes(word);
    }
    if header[0] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    if header[1] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", header[1])));
    }
    let n = usize::try_from(header[2]).map_err(|_| Error::Format("size overflow".into()))?;
    let kind = KernelKind::from_code(header[3])
        .ok_or_else(|| Error::Format(format!("unknown kernel kind code {}", header[3])))?;
    let count = n
        .checked_mul(n)
        .ok_or_else(|| Error::Format(format!("size {n} overflows")))?;
    // capacity grows with the data actually read, not with the claimed size
    let mut values = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        input
            .read_exact(&mut word)
            .map_err(|_| Error::Format("truncated entries".into()))?;
        values.push(f64::from_le_bytes(word));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after entries".into()));
    }
    KernelMatrix::from_entries(DMatrix::from_row_slice(n, n, &values), kind, Digest(header[4]))
}

pub fn write_csv<W: Write>(k: &KernelMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..k.n() {
        w.write_record((0..k.n()).map(|j| k.get(i, j).to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV kernel; the kind and digest are not stored in CSV and must be supplied.
pub fn read_csv<R: Read>(input: R, kind: KernelKind, digest: Digest) -> Result<KernelMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut values = Vec::new();
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        for field in record.iter() {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {rows}: {e}")))?,
            );
        }
        rows += 1;
    }
    if values.len() != rows * rows {
        return Err(Error::Format(format!(
            "{} values do not form a {rows} x {rows} matrix",
            values.len()
        )));
    }
    KernelMatrix::from_entries(DMatrix::from_row_slice(rows, rows, &values), kind, digest)
}

impl KernelMatrix {
    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        write_binary(self, BufWriter::new(File::create(path)?))
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        read_binary(BufReader::new(File::open(path)?))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_csv(self, BufWriter::new(File::create(path)?))
    }
}
