//! Sample batches and their on-disk formats.
//!
//! CSV: header `x1,…,xn`, one draw per row, shortest round-trip decimal.
//! Binary: 32-byte header (`b"KLSB"`, `u32` version, `u64` dim, `u64` count,
//! `u64` seed) followed by row-major little-endian `f64` values.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamSnapshot};

const MAGIC: &[u8; 4] = b"KLSB";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub burn_in: usize,
    pub thinning: usize,
    /// Effective sample size from the autocorrelation of the monitored statistic.
    pub ess: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub stream: StreamSnapshot,
    /// Streams consumed by component samplers, in order.
    pub sub_streams: Vec<StreamSnapshot>,
    /// True for MCMC output.
    pub approximate: bool,
    pub mcmc: Option<McmcDiagnostics>,
}

impl Provenance {
    pub fn exact(generator: impl Into<String>, rng: &RngStream) -> Self {
        Self {
            generator: generator.into(),
            stream: rng.snapshot(),
            sub_streams: Vec::new(),
            approximate: false,
            mcmc: None,
        }
    }
}

/// `count` draws in `ℝ^dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    data: Vec<f64>,
    pub provenance: Provenance,
}

impl SampleBatch {
    pub fn new(dim: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Format(format!("{} values do not form rows of width {dim}", data.len())));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite value at row {}", i / dim)));
        }
        Ok(Self { dim, data, provenance })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Columns `range` as a new batch.
    pub fn columns(&self, range: std::ops::Range<usize>) -> SampleBatch {
        let dim = range.len();
        let data = self.rows().flat_map(|r| r[range.clone()].iter().copied()).collect();
        SampleBatch { dim, data, provenance: self.provenance.clone() }
    }

    pub fn map_rows<M: FnMut(&[f64], &mut [f64])>(&self, out_dim: usize, mut f: M) -> Result<SampleBatch> {
        let mut data = vec![0.0; self.count() * out_dim];
        for (r, o) in self.rows().zip(data.chunks_exact_mut(out_dim)) {
            f(r, o);
        }
        SampleBatch::new(out_dim, data, self.provenance.clone())
    }

    pub fn scaled(&self, lambda: f64) -> SampleBatch {
        SampleBatch {
            dim: self.dim,
            data: self.data.iter().map(|v| v * lambda).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Concatenate batches of equal dimension; provenance of the first part,
    /// with the others' streams appended as sub-streams.
    pub fn concat(parts: Vec<SampleBatch>) -> Result<SampleBatch> {
        let mut iter = parts.into_iter();
        let mut first = iter
            .next()
            .ok_or_else(|| Error::Format("cannot concatenate zero batches".into()))?;
        for part in iter {
            if part.dim != first.dim {
                return Err(Error::DimensionMismatch { expected: first.dim, got: part.dim });
            }
            first.data.extend_from_slice(&part.data);
            first.provenance.sub_streams.push(part.provenance.stream);
            first.provenance.approximate |= part.provenance.approximate;
        }
        Ok(first)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((1..=self.dim).map(|i| format!("x{i}")))?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<SampleBatch> {
        let mut r = csv::Reader::from_reader(reader);
        let dim = r.headers()?.len();
        let mut data = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: rec.len() });
            }
            for field in rec.iter() {
                data.push(field.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string()))?);
            }
        }
        SampleBatch::new(dim, data, imported(0))
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.count() as u64).to_le_bytes())?;
        w.write_all(&self.provenance.stream.seed.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<SampleBatch> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let word = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());
        let (dim, count, seed) = (word(8) as usize, word(16) as usize, word(24));
        let mut bytes = vec![0u8; dim * count * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        SampleBatch::new(dim, data, imported(seed))
    }
}

fn imported(seed: u64) -> Provenance {
    Provenance {
        generator: "imported".into(),
        stream: StreamSnapshot { seed, stream_id: 0, counter: 0 },
        sub_streams: Vec::new(),
        approximate: false,
        mcmc: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn batch(dim: usize, data: Vec<f64>) -> SampleBatch {
        SampleBatch::new(dim, data, Provenance::exact("test", &RngStream::new(9, 1))).unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        let p = Provenance::exact("t", &RngStream::new(0, 0));
        assert!(SampleBatch::new(2, vec![1.0, 2.0, 3.0], p.clone()).is_err());
        assert!(SampleBatch::new(1, vec![f64::NAN], p.clone()).is_err());
        assert!(SampleBatch::new(1, vec![f64::INFINITY], p).is_err());
    }

    #[test]
    fn csv_header_and_columns() {
        let b = batch(3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("x1,x2,x3\n1,2,3\n"));
        assert_eq!(b.column(2), vec![3.0, 6.5]);
        assert_eq!(b.columns(1..3).row(1), &[5.0, 6.5]);
    }

    #[test]
    fn binary_header_layout() {
        let b = batch(2, vec![1.0, -2.0]);
        let mut out = Vec::new();
        b.write_binary(&mut out).unwrap();
        assert_eq!(out.len(), 32 + 16);
        assert_eq!(&out[0..4], b"KLSB");
        assert_eq!(u64::from_le_bytes(out[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(out[16..24].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(out[24..32].try_into().unwrap()), 9);
    }

    proptest! {
        #[test]
        fn formats_round_trip(dim in 1usize..5, values in prop::collection::vec(-1e300f64..1e300, 1..40)) {
            let rows = values.len() / dim;
            prop_assume!(rows > 0);
            let b = batch(dim, values[..rows * dim].to_vec());
            let mut csv_bytes = Vec::new();
            b.write_csv(&mut csv_bytes).unwrap();
            let from_csv = SampleBatch::read_csv(&csv_bytes[..]).unwrap();
            prop_assert_eq!(from_csv.data(), b.data());
            let mut bin = Vec::new();
            b.write_binary(&mut bin).unwrap();
            let back = SampleBatch::read_binary(&bin[..]).unwrap();
            prop_assert_eq!(back.data(), b.data());
            prop_assert_eq!(back.provenance.stream.seed, 9);
        }
    }
}
