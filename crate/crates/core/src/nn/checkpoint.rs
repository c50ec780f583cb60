//! Binary checkpoint format for [`ParameterBundle`]s.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic     4 bytes  "QTCK"
//! version   u32      1
//! tag_len   u32      followed by tag_len bytes of UTF-8 (model label or free text)
//! n_blocks  u32
//! per block:
//!   name_len u32, name UTF-8
//!   ndim     u32, then ndim x u64 dimensions
//!   values   prod(dims) x f64
//! ```

use std::io::{Read, Write};

use super::params::{ParamBlock, ParameterBundle};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QTCK";
pub const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, tag: &str, bundle: &ParameterBundle) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    write_str(&mut w, tag)?;
    w.write_all(&(bundle.blocks.len() as u32).to_le_bytes())?;
    for block in &bundle.blocks {
        let expected: usize = block.shape.iter().product();
        if expected != block.values.len() {
            return Err(Error::Internal(format!(
                "block {} has shape {:?} but {} values",
                block.name,
                block.shape,
                block.values.len()
            )));
        }
        write_str(&mut w, &block.name)?;
        w.write_all(&(block.shape.len() as u32).to_le_bytes())?;
        for &d in &block.shape {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in &block.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(String, ParameterBundle)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let tag = read_str(&mut r)?;
    let n_blocks = read_u32(&mut r)? as usize;
    let mut blocks = Vec::with_capacity(n_blocks.min(1024));
    for _ in 0..n_blocks {
        let name = read_str(&mut r)?;
        let ndim = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(ndim.min(8));
        for _ in 0..ndim {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            shape.push(u64::from_le_bytes(b) as usize);
        }
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len.min(1 << 20));
        for _ in 0..len {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            values.push(f64::from_le_bytes(b));
        }
        blocks.push(ParamBlock { name, shape, values });
    }
    Ok((tag, ParameterBundle { blocks }))
}

fn corrupt(msg: &str) -> Error {
    Error::Usage(format!("invalid checkpoint: {msg}"))
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| corrupt("non UTF-8 string"))
}
