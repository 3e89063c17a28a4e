//! Flat binary and CSV files for sample batches.
//!
//! Binary layout: a 32-byte header (`magic[8]`, `version: u32`, reserved
//! `u32`, `count: u64`, `seed: u64`) followed by `count` little-endian `f64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::io::fmt_sig;

pub const MAGIC: [u8; 8] = *b"LEVYSMPL";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_binary<W: Write>(mut out: W, seed: u64, values: &[f64]) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(&MAGIC);
    header[8..12].copy_from_slice(&VERSION.to_le_bytes());
    header[16..24].copy_from_slice(&(values.len() as u64).to_le_bytes());
    header[24..32].copy_from_slice(&seed.to_le_bytes());
    out.write_all(&header)?;
    let mut body = Vec::with_capacity(8 * values.len());
    for v in values {
        body.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&body)?;
    Ok(())
}

/// Reads a binary batch, returning `(seed, values)`.
pub fn read_binary<R: Read>(mut input: R) -> Result<(u64, Vec<f64>)> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if header[..8] != MAGIC {
        return Err(Error::Serialization("not a sample batch file (bad magic)".into()));
    }
    let word = |r: std::ops::Range<usize>| -> [u8; 8] { header[r].try_into().expect("fixed width") };
    let version = u32::from_le_bytes(header[8..12].try_into().expect("fixed width"));
    if version != VERSION {
        return Err(Error::Serialization(format!("unsupported batch version {version}")));
    }
    let count = u64::from_le_bytes(word(16..24)) as usize;
    let seed = u64::from_le_bytes(word(24..32));
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 8 * count {
        return Err(Error::Serialization(format!("header says {count} values, body holds {} bytes", body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((seed, values))
}

pub fn write_csv<W: Write>(mut out: W, values: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(16 * values.len() + 8);
    text.push_str("index,value\n");
    for (i, v) in values.iter().enumerate() {
        text.push_str(&format!("{i},{}\n", fmt_sig(*v)));
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let values = vec![0.5, -1e-300, f64::MAX, 3.25];
        let mut buf = Vec::new();
        write_binary(&mut buf, 42, &values).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 32);
        assert_eq!(&buf[..8], b"LEVYSMPL");
        let (seed, back) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(back, values);
    }

    #[test]
    fn truncated_body_is_rejected() {
        let mut buf = Vec::new();
        write_binary(&mut buf, 1, &[1.0, 2.0]).unwrap();
        buf.pop();
        assert!(read_binary(buf.as_slice()).is_err());
    }
}
