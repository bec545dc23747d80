//! Synthetic observation signals and the sample covariance estimator.
//!
//! The observation model is `y = H(L) x + w` with white standard-normal
//! excitation `x` and Gaussian noise `w ~ N(0, noise_var I)`. Sample `l`
//! draws from its own counter-derived substream (first the `n` excitation
//! values, then the `n` noise values), so batches are reproducible for a
//! fixed seed no matter how generation is scheduled.

use std::io::{BufRead, Read, Write};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::filters::{FilterMatrix, GraphFilter};
use crate::seeding;

/// Provenance of a generated batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMeta {
    pub filter: GraphFilter,
    pub noise_var: f64,
    pub seed: u64,
}

/// A batch of `m` observed signals of length `n`, stored as the columns of
/// an `n x m` matrix. Batches read back from files carry no meta.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBatch {
    data: Array2<f64>,
    pub meta: Option<BatchMeta>,
}

impl SignalBatch {
    pub fn new(data: Array2<f64>, meta: Option<BatchMeta>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::DimensionMismatch(
                "a signal batch needs at least one sample of positive length".into(),
            ));
        }
        Ok(Self { data, meta })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn m(&self) -> usize {
        self.data.ncols()
    }

    /// Samples as columns of an `n x m` matrix.
    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn sample(&self, l: usize) -> Array1<f64> {
        self.data.column(l).to_owned()
    }

    /// CSV: one sample per row, full-precision round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        let mut line = String::new();
        for l in 0..m {
            line.clear();
            for i in 0..n {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", self.data[[i, l]]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad float {tok:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected {} values, found {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty signal file".into(),
            });
        }
        let (m, n) = (rows.len(), rows[0].len());
        let mut data = Array2::<f64>::zeros((n, m));
        for (l, row) in rows.iter().enumerate() {
            for (i, &x) in row.iter().enumerate() {
                data[[i, l]] = x;
            }
        }
        Self::new(data, None)
    }

    /// Binary format: 8-byte header of `n` then `m` as little-endian u32,
    /// followed by the `n x m` sample matrix in column-major f64
    /// little-endian order (one sample after another).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        w.write_all(&(n as u32).to_le_bytes())?;
        w.write_all(&(m as u32).to_le_bytes())?;
        for l in 0..m {
            for i in 0..n {
                w.write_all(&self.data[[i, l]].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 8];
        r.read_exact(&mut header)?;
        let n = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
        let m = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        if n == 0 || m == 0 {
            return Err(Error::Parse {
                line: 0,
                msg: format!("binary header declares an empty {n} x {m} batch"),
            });
        }
        let mut buf = vec![0u8; 8 * n * m];
        r.read_exact(&mut buf)?;
        let mut data = Array2::<f64>::zeros((n, m));
        for l in 0..m {
            for i in 0..n {
                let off = 8 * (l * n + i);
                data[[i, l]] = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
            }
        }
        Self::new(data, None)
    }
}

/// Draw `m` observations `y = H x + w` from the filter matrix.
pub fn sample_observations(
    fm: &FilterMatrix,
    filter: &GraphFilter,
    m: usize,
    noise_var: f64,
    seed: u64,
) -> Result<SignalBatch> {
    if m == 0 {
        return Err(Error::DimensionMismatch("need at least one sample".into()));
    }
    if noise_var < 0.0 {
        return Err(Error::Config(format!("noise_var must be >= 0, got {noise_var}")));
    }
    let n = fm.n();
    let noise_std = noise_var.sqrt();
    let mut excitation = Array2::<f64>::zeros((n, m));
    let mut noise = Array2::<f64>::zeros((n, m));
    for l in 0..m {
        let mut rng = seeding::rng_from(seeding::derive(seed, l as u64));
        for i in 0..n {
            excitation[[i, l]] = rng.sample::<f64, _>(StandardNormal);
        }
        for i in 0..n {
            noise[[i, l]] = noise_std * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let data = fm.matrix.dot(&excitation) + noise;
    SignalBatch::new(
        data,
        Some(BatchMeta {
            filter: filter.clone(),
            noise_var,
            seed,
        }),
    )
}

/// Uncentered sample covariance estimate with its sample count.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: Array2<f64>,
    pub m: usize,
}

/// `Sigma_hat = (1/m) sum_l y_l y_l^T`, symmetrized against rounding.
pub fn sample_covariance(batch: &SignalBatch) -> CovarianceEstimate {
    let m = batch.m();
    let y = batch.data();
    let mut sigma = y.dot(&y.t());
    sigma.mapv_inplace(|x| x / m as f64);
    let sym = 0.5 * (&sigma + &sigma.t());
    CovarianceEstimate { matrix: sym, m }
}
