//! Versioned binary parameter container: `NN v1` magic, a manifest of
//! named buffers, then little-endian 64-bit reals.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const PARAMS_MAGIC: &[u8] = b"NN v1\n";

pub fn save_params<W: Write>(mut w: W, buffers: &[(&str, &[f64])]) -> Result<()> {
    w.write_all(PARAMS_MAGIC)?;
    w.write_all(&(buffers.len() as u32).to_le_bytes())?;
    for (name, values) in buffers {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
        w.write_all(&(values.len() as u64).to_le_bytes())?;
        for v in *values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load_params<R: Read>(mut r: R) -> Result<Vec<(String, Vec<f64>)>> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Data("truncated parameter file".into()))?;
    if magic != PARAMS_MAGIC {
        return Err(Error::Data("bad parameter container magic".into()));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)
        .map_err(|_| Error::Data("truncated parameter file".into()))?;
    let count = u32::from_le_bytes(u32buf) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut u32buf)
            .map_err(|_| Error::Data("truncated parameter file".into()))?;
        let name_len = u32::from_le_bytes(u32buf) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)
            .map_err(|_| Error::Data("truncated parameter file".into()))?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::Data("non-UTF8 buffer name".into()))?;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)
            .map_err(|_| Error::Data("truncated parameter file".into()))?;
        let len = u64::from_le_bytes(u64buf) as usize;
        let mut values = Vec::with_capacity(len);
        let mut f64buf = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut f64buf)
                .map_err(|_| Error::Data("truncated parameter file".into()))?;
            values.push(f64::from_le_bytes(f64buf));
        }
        out.push((name, values));
    }
    Ok(out)
}

/// Pull one named buffer of an expected length out of a loaded manifest.
pub fn take_buffer(
    buffers: &[(String, Vec<f64>)],
    name: &str,
    expected_len: usize,
) -> Result<Vec<f64>> {
    let (_, values) = buffers
        .iter()
        .find(|(n, _)| n == name)
        .ok_or_else(|| Error::Data(format!("parameter container missing buffer `{name}`")))?;
    if values.len() != expected_len {
        return Err(Error::Data(format!(
            "buffer `{name}` has {} values, expected {expected_len}",
            values.len()
        )));
    }
    Ok(values.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bit_exact() {
        let a = vec![1.5, -2.25, f64::MIN_POSITIVE, 1e300];
        let b = vec![0.0; 7];
        let mut buf = Vec::new();
        save_params(&mut buf, &[("conv.w", &a), ("conv.b", &b)]).unwrap();
        let loaded = load_params(buf.as_slice()).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0], ("conv.w".to_string(), a));
        assert_eq!(loaded[1], ("conv.b".to_string(), b));
    }

    #[test]
    fn truncation_detected() {
        let mut buf = Vec::new();
        save_params(&mut buf, &[("w", &[1.0, 2.0, 3.0][..])]).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(load_params(buf.as_slice()).is_err());
    }
}
