//! Binary trajectory files: a 32-byte header followed by `n * m` little-endian `f64`.
//!
//! Header layout: magic `HYPXTRJ\0`, version `u32`, flags `u32`, `n: u64`, `m: u64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"HYPXTRJ\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

/// `n` rows of `m` values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl Trajectory {
    pub fn new(m: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 || !data.len().is_multiple_of(m) {
            return Err(Error::Data(format!("{} values do not split into rows of {m}", data.len())));
        }
        Ok(Self { n: data.len() / m, m, data })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }
}

pub fn write_trajectory<W: Write>(w: &mut W, t: &Trajectory) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(&MAGIC);
    header[8..12].copy_from_slice(&VERSION.to_le_bytes());
    header[16..24].copy_from_slice(&(t.n as u64).to_le_bytes());
    header[24..32].copy_from_slice(&(t.m as u64).to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(t.data.len() * 8);
    for v in &t.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: &mut R) -> Result<Trajectory> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Data(format!("trajectory header: {e}")))?;
    if header[..8] != MAGIC {
        return Err(Error::Data("not a trajectory file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Data(format!("unsupported trajectory version {version}")));
    }
    let n = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let m = u64::from_le_bytes(header[24..32].try_into().unwrap()) as usize;
    let len = n
        .checked_mul(m)
        .and_then(|k| k.checked_mul(8))
        .ok_or_else(|| Error::Data("trajectory size overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len {
        return Err(Error::Data(format!(
            "trajectory body has {} bytes, header says {len}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Trajectory { n, m, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = Trajectory::new(2, vec![0.1, 0.2, f64::INFINITY, -0.0, 1e-300, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &t).unwrap();
        assert_eq!(buf.len(), 32 + 48);
        assert_eq!(&buf[..8], b"HYPXTRJ\0");
        let back = read_trajectory(&mut buf.as_slice()).unwrap();
        assert_eq!(back.n, 3);
        assert_eq!(back.row(1)[0], f64::INFINITY);
        assert_eq!(
            back.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            t.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejects_corrupt_files() {
        let t = Trajectory::new(1, vec![1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &t).unwrap();
        assert!(read_trajectory(&mut &buf[..buf.len() - 1]).is_err());
        buf[0] = b'X';
        assert!(matches!(read_trajectory(&mut buf.as_slice()), Err(Error::Data(_))));
        assert!(read_trajectory(&mut &b"short"[..]).is_err());
    }
}
