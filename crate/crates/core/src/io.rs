//! Field serialization.
//!
//! Binary layout (all little-endian): three `u64` header words `d`, `N` and
//! the component count `c`, followed by `c · N^d` `f64` values, components
//! concatenated, each in row-major order with axis 0 slowest.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField};

const HEADER_WORDS: usize = 3;

/// Writes `bytes` to `path`, tagging failures with the path.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Output { path: path.to_path_buf(), source })
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Output { path: path.to_path_buf(), source })
}

pub fn encode_fields(fields: &[&ScalarField]) -> Result<Vec<u8>> {
    let first = fields.first().ok_or_else(|| Error::InvalidArgument("no fields to encode".into()))?;
    let grid = *first.grid();
    let mut out = Vec::with_capacity(8 * (HEADER_WORDS + fields.len() * grid.len()));
    for word in [grid.d(), grid.n(), fields.len()] {
        out.extend_from_slice(&(word as u64).to_le_bytes());
    }
    for f in fields {
        f.check_grid(&grid)?;
        for v in f.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_fields<W: Write>(mut out: W, fields: &[&ScalarField]) -> Result<()> {
    out.write_all(&encode_fields(fields)?)?;
    Ok(())
}

pub fn decode_fields(bytes: &[u8]) -> Result<(GridSpec, Vec<ScalarField>)> {
    let word = |i: usize| -> Result<u64> {
        bytes
            .get(8 * i..8 * i + 8)
            .map(|b| u64::from_le_bytes(b.try_into().expect("slice of length 8")))
            .ok_or_else(|| Error::Format("truncated header".into()))
    };
    let (d, n, c) = (word(0)? as usize, word(1)? as usize, word(2)? as usize);
    let grid = GridSpec::new(d, n).map_err(|e| Error::Format(e.to_string()))?;
    let expected = 8 * (HEADER_WORDS + c * grid.len());
    if bytes.len() != expected {
        return Err(Error::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let values: Vec<f64> = bytes[8 * HEADER_WORDS..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of length 8")))
        .collect();
    let fields = values
        .chunks_exact(grid.len())
        .map(|chunk| ScalarField::from_values(grid, chunk.to_vec()).map_err(|e| Error::Format(e.to_string())))
        .collect::<Result<_>>()?;
    Ok((grid, fields))
}

pub fn read_fields<R: Read>(mut input: R) -> Result<(GridSpec, Vec<ScalarField>)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode_fields(&bytes)
}

/// CSV with node coordinates `x0..x{d-1}` followed by one column per field.
pub fn fields_csv(names: &[&str], fields: &[&ScalarField]) -> Result<String> {
    if names.len() != fields.len() || fields.is_empty() {
        return Err(Error::InvalidArgument("one column name per field required".into()));
    }
    let grid = *fields[0].grid();
    for f in fields {
        f.check_grid(&grid)?;
    }
    let mut out = String::new();
    let coords: Vec<String> = (0..grid.d()).map(|a| format!("x{a}")).collect();
    out.push_str(&coords.join(","));
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for node in 0..grid.len() {
        let x = grid.coordinates(node);
        let mut row: Vec<String> = x[..grid.d()].iter().map(|v| v.to_string()).collect();
        row.extend(fields.iter().map(|f| f.values()[node].to_string()));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
