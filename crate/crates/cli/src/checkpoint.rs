//! Binary checkpoints.
//!
//! Layout, all little-endian: magic `CNQG`, `u32` format version, `u32`
//! dimension `N`, `N` x `u64` points per axis, `N` x `f64` box lengths,
//! `f64` alpha, nu, eps, t, then the field as row-major `f64` values.

use std::io::{Read, Write};
use std::path::Path;

use cnqg_core::{Grid, PhysicalField};

use crate::error::{CliError, CliResult};

pub const MAGIC: [u8; 4] = *b"CNQG";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub alpha: f64,
    pub nu: f64,
    pub eps: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

impl Checkpoint {
    pub fn new(field: &PhysicalField<f64>, alpha: f64, nu: f64, eps: f64, t: f64) -> Self {
        Self {
            points: field.grid().points().to_vec(),
            lengths: field.grid().lengths().to_vec(),
            alpha,
            nu,
            eps,
            t,
            values: field.values().to_vec(),
        }
    }

    pub fn field(&self) -> CliResult<PhysicalField<f64>> {
        let grid = Grid::new(&self.points, &self.lengths)?;
        Ok(PhysicalField::from_values(&grid, 1, self.values.clone())?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(12 + 16 * n + 32 + 8 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        for &m in &self.points {
            out.extend_from_slice(&(m as u64).to_le_bytes());
        }
        for x in self
            .lengths
            .iter()
            .chain([&self.alpha, &self.nu, &self.eps, &self.t])
            .chain(&self.values)
        {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    /// Parses a checkpoint; `origin` names the source in error messages.
    pub fn from_bytes(bytes: &[u8], origin: &Path) -> CliResult<Self> {
        let mut cursor = Cursor { bytes, pos: 0, origin };
        if cursor.take(4)? != MAGIC {
            return Err(CliError::format(origin, "not a checkpoint (bad magic)"));
        }
        let version = cursor.u32()?;
        if version != VERSION {
            return Err(CliError::format(origin, format!("unsupported format version {version}")));
        }
        let n = cursor.u32()? as usize;
        if !(1..=3).contains(&n) {
            return Err(CliError::format(origin, format!("invalid dimension {n}")));
        }
        let points = (0..n)
            .map(|_| cursor.u64().map(|m| m as usize))
            .collect::<CliResult<Vec<_>>>()?;
        let lengths = (0..n).map(|_| cursor.f64()).collect::<CliResult<Vec<_>>>()?;
        let alpha = cursor.f64()?;
        let nu = cursor.f64()?;
        let eps = cursor.f64()?;
        let t = cursor.f64()?;
        let count = points
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| CliError::format(origin, "point count overflows"))?;
        let remaining = bytes.len() - cursor.pos;
        if remaining != 8 * count {
            return Err(CliError::format(
                origin,
                format!("payload holds {remaining} bytes, expected {} for {count} values", 8 * count),
            ));
        }
        let values = (0..count).map(|_| cursor.f64()).collect::<CliResult<Vec<_>>>()?;
        Ok(Self {
            points,
            lengths,
            alpha,
            nu,
            eps,
            t,
            values,
        })
    }

    pub fn read_from(mut r: impl Read, origin: &Path) -> CliResult<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| CliError::io(origin, e))?;
        Self::from_bytes(&bytes, origin)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> CliResult<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(CliError::format(self.origin, "truncated header"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn write_file(path: &Path, ck: &Checkpoint) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    ck.write_to(&mut w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> CliResult<Checkpoint> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Checkpoint::read_from(std::io::BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let grid = Grid::<f64>::new(&[8, 12], &[2.0, 1.5]).unwrap();
        let field = PhysicalField::from_fn(&grid, |x| (x[0] * 1.3).sin() - x[1] / 7.0);
        Checkpoint::new(&field, 1.5, 0.05, 0.0, 0.125)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let ck = sample();
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes, Path::new("mem")).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..4], b"CNQG");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 12 + 2 * 8 + 2 * 8 + 4 * 8 + 96 * 8);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes();
        let origin = Path::new("mem");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad, origin).is_err());
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 8], origin).is_err());
        let mut longer = bytes.clone();
        longer.extend_from_slice(&0f64.to_le_bytes());
        assert!(Checkpoint::from_bytes(&longer, origin).is_err());
        assert!(Checkpoint::from_bytes(&bytes[..10], origin).is_err());
    }
}
