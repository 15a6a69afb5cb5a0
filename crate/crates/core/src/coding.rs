//! Fractional and cyclic repetition encoding matrices.
//!
//! Rows are data partitions `D_0..D_{n-1}`, columns are workers `W_0..W_{n-1}`.
//! `B[(i, j)] == 1` iff worker `j` computes the partial gradient of partition `i`.
//! Both schemes assign every partition to exactly `s` workers and every worker
//! to exactly `s` partitions.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Frc,
    Crc,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Frc => "frc",
            Scheme::Crc => "crc",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frc" => Ok(Scheme::Frc),
            "crc" => Ok(Scheme::Crc),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Binary `n x n` assignment matrix of an `(s-1)`-tolerant repetition code.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingMatrix {
    scheme: Scheme,
    s: usize,
    entries: DMatrix<f64>,
}

impl EncodingMatrix {
    pub fn build(scheme: Scheme, n: usize, s: usize) -> Result<Self> {
        match scheme {
            Scheme::Frc => build_frc(n, s),
            Scheme::Crc => build_crc(n, s),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn is_assigned(&self, partition: usize, worker: usize) -> bool {
        self.entries[(partition, worker)] != 0.0
    }

    /// Workers holding `partition`, in increasing order.
    pub fn assigned_workers(&self, partition: usize) -> Result<Vec<usize>> {
        let n = self.n();
        if partition >= n {
            return Err(Error::IndexOutOfRange { index: partition, len: n });
        }
        Ok((0..n).filter(|&j| self.is_assigned(partition, j)).collect())
    }

    /// Partitions computed by `worker`, in increasing order.
    pub fn assigned_partitions(&self, worker: usize) -> Result<Vec<usize>> {
        let n = self.n();
        if worker >= n {
            return Err(Error::IndexOutOfRange { index: worker, len: n });
        }
        Ok((0..n).filter(|&i| self.is_assigned(i, worker)).collect())
    }

    /// Columns of `B` belonging to `workers`, in the given order.
    pub fn nonstraggler_submatrix(&self, workers: &[usize]) -> Result<NonStragglerMatrix> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &w in workers {
            if w >= n {
                return Err(Error::IndexOutOfRange { index: w, len: n });
            }
            if std::mem::replace(&mut seen[w], true) {
                return Err(Error::DuplicateIndex(w));
            }
        }
        let entries = DMatrix::from_fn(n, workers.len(), |i, k| self.entries[(i, workers[k])]);
        Ok(NonStragglerMatrix { workers: workers.to_vec(), entries })
    }

    /// Dense CSV, one line per partition.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// FRC: `n/s` all-ones diagonal blocks of size `s x s`.
pub fn build_frc(n: usize, s: usize) -> Result<EncodingMatrix> {
    check_range(n, s)?;
    if !n.is_multiple_of(s) {
        return Err(Error::NotDivisible { n, s });
    }
    let entries = DMatrix::from_fn(n, n, |i, j| if i / s == j / s { 1.0 } else { 0.0 });
    Ok(EncodingMatrix { scheme: Scheme::Frc, s, entries })
}

/// CRC: column `j` holds ones at rows `j, j+1, .., j+s-1 (mod n)`.
pub fn build_crc(n: usize, s: usize) -> Result<EncodingMatrix> {
    check_range(n, s)?;
    let entries = DMatrix::from_fn(n, n, |i, j| if (i + n - j) % n < s { 1.0 } else { 0.0 });
    Ok(EncodingMatrix { scheme: Scheme::Crc, s, entries })
}

fn check_range(n: usize, s: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if s == 0 || s > n {
        return Err(Error::ReplicationOutOfRange { n, s });
    }
    Ok(())
}

/// Columns of an encoding matrix that belong to the workers that returned.
#[derive(Clone, Debug, PartialEq)]
pub struct NonStragglerMatrix {
    workers: Vec<usize>,
    entries: DMatrix<f64>,
}

impl NonStragglerMatrix {
    /// Wraps an arbitrary `n x r` matrix; `workers` defaults to `0..r`.
    pub fn from_matrix(entries: DMatrix<f64>) -> Self {
        let workers = (0..entries.ncols()).collect();
        NonStragglerMatrix { workers, entries }
    }

    pub fn workers(&self) -> &[usize] {
        &self.workers
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn r(&self) -> usize {
        self.entries.ncols()
    }

    /// Partitions touched by at least one surviving column.
    pub fn accessed(&self) -> Vec<bool> {
        self.entries.row_iter().map(|row| row.iter().any(|&v| v != 0.0)).collect()
    }
}
