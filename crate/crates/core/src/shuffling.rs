//! Per-iteration reassignment of encoding-matrix columns to workers.
//!
//! Partitions live in shared storage, so shuffling only changes which column
//! of `B` each worker evaluates. Nothing is physically moved.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coding::EncodingMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShuffleStrategy {
    #[default]
    None,
    #[serde(rename = "random")]
    UniformRandom,
    Cyclic,
}

impl fmt::Display for ShuffleStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShuffleStrategy::None => "none",
            ShuffleStrategy::UniformRandom => "random",
            ShuffleStrategy::Cyclic => "cyclic",
        })
    }
}

impl FromStr for ShuffleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ShuffleStrategy::None),
            "random" => Ok(ShuffleStrategy::UniformRandom),
            "cyclic" => Ok(ShuffleStrategy::Cyclic),
            other => Err(Error::InvalidParameter(format!("unknown shuffle strategy {other:?}"))),
        }
    }
}

/// Worker `j` evaluates column `column_of(j)` of the encoding matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { mapping: (0..n).collect() }
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &c in &mapping {
            if c >= n {
                return Err(Error::IndexOutOfRange { index: c, len: n });
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::DuplicateIndex(c));
            }
        }
        Ok(Permutation { mapping })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn column_of(&self, worker: usize) -> usize {
        self.mapping[worker]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.mapping.len()];
        for (j, &c) in self.mapping.iter().enumerate() {
            inv[c] = j;
        }
        Permutation { mapping: inv }
    }

    /// Columns of `B` evaluated by the given workers, in worker order.
    pub fn columns_for(&self, workers: &[usize]) -> Vec<usize> {
        workers.iter().map(|&w| self.mapping[w]).collect()
    }
}

/// Permutation in force during `iteration` (1-based).
///
/// `Cyclic` rotates by one column per iteration; `UniformRandom` draws a fresh
/// uniform permutation from `rng`, which is left untouched by the other strategies.
pub fn next_permutation<R: Rng + ?Sized>(
    strategy: ShuffleStrategy,
    n: usize,
    iteration: usize,
    rng: &mut R,
) -> Permutation {
    match strategy {
        ShuffleStrategy::None => Permutation::identity(n),
        ShuffleStrategy::Cyclic => {
            let shift = iteration % n.max(1);
            Permutation { mapping: (0..n).map(|j| (j + shift) % n).collect() }
        }
        ShuffleStrategy::UniformRandom => {
            let mut mapping: Vec<usize> = (0..n).collect();
            mapping.shuffle(rng);
            Permutation { mapping }
        }
    }
}

/// Column `j` of the result is column `perm(j)` of `B`.
pub fn apply_permutation(b: &EncodingMatrix, perm: &Permutation) -> Result<DMatrix<f64>> {
    let n = b.n();
    if perm.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| b.entries()[(i, perm.column_of(j))]))
}
