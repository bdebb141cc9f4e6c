//! Discrete information-theoretic primitives.
//!
//! All public quantities are reported in bits. Channels are row-stochastic
//! tables `p(output | input)`; rows index inputs (actions or action
//! sequences), columns index outputs (sensor symbols).

mod capacity;

pub use capacity::{blahut_arimoto, BlahutArimoto, CapacityResult};
pub(crate) use capacity::iterate as ba_iterate;

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` used by every validating constructor.
pub const SUM_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_distribution(entries: &[f64]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some((i, &v)) = entries
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v >= 0.0) || !v.is_finite())
    {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} is {v}, expected a finite non-negative value"
        )));
    }
    let sum: f64 = entries.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {sum}, expected 1 within {SUM_TOLERANCE:e}"
        )));
    }
    Ok(())
}

/// A validated probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_distribution(&entries)?;
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over an empty set");
        Self(vec![1.0 / n as f64; n])
    }

    /// A point mass on `index`.
    pub fn point(n: usize, index: usize) -> Self {
        assert!(index < n);
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    /// Wraps entries that are already known to be a distribution.
    pub(crate) fn from_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(check_distribution(&entries).is_ok());
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A conditional distribution `p(output | input)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    n_inputs: usize,
    n_outputs: usize,
    data: Vec<f64>,
}

impl DiscreteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_inputs = rows.len();
        if n_inputs == 0 {
            return Err(Error::InvalidDistribution("channel has no inputs".into()));
        }
        let n_outputs = rows[0].len();
        let mut data = Vec::with_capacity(n_inputs * n_outputs);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_outputs {
                return Err(Error::DimensionMismatch {
                    expected: n_outputs,
                    actual: row.len(),
                });
            }
            check_distribution(&row).map_err(|e| {
                Error::InvalidDistribution(format!("row {i}: {e}"))
            })?;
            data.extend(row);
        }
        Ok(Self {
            n_inputs,
            n_outputs,
            data,
        })
    }

    /// Builds a dense channel from sparse `(column, probability)` rows.
    ///
    /// Repeated columns within a row are summed.
    pub fn from_sparse_rows(rows: &[Vec<(usize, f64)>], n_outputs: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDistribution("channel has no inputs".into()));
        }
        let mut data = vec![0.0; rows.len() * n_outputs];
        for (i, row) in rows.iter().enumerate() {
            let dense = &mut data[i * n_outputs..(i + 1) * n_outputs];
            for &(col, p) in row {
                if col >= n_outputs {
                    return Err(Error::DimensionMismatch {
                        expected: n_outputs,
                        actual: col + 1,
                    });
                }
                dense[col] += p;
            }
            check_distribution(dense)
                .map_err(|e| Error::InvalidDistribution(format!("row {i}: {e}")))?;
        }
        Ok(Self {
            n_inputs: rows.len(),
            n_outputs,
            data,
        })
    }

    /// The identity channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            n_inputs: n,
            n_outputs: n,
            data,
        }
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        Self::new(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])
    }

    /// Parses one row per line, comma-separated probabilities, no header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|e| {
                        Error::InvalidDistribution(format!(
                            "row {line}: cannot parse `{field}`: {e}"
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.data[input * self.n_outputs..(input + 1) * self.n_outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_outputs)
    }

    /// Keeps only the listed inputs, in the given order.
    pub fn select_rows(&self, inputs: &[usize]) -> Self {
        let mut data = Vec::with_capacity(inputs.len() * self.n_outputs);
        for &i in inputs {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n_inputs: inputs.len(),
            n_outputs: self.n_outputs,
            data,
        }
    }

    /// Output marginal `q(s) = Σ_a p(a) p(s|a)`.
    pub fn output_marginal(&self, input: &ProbabilityVector) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.marginal_unchecked(input.as_slice()))
    }

    pub(crate) fn marginal_unchecked(&self, input: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.n_outputs];
        for (p, row) in input.iter().zip(self.rows()) {
            if *p == 0.0 {
                continue;
            }
            for (qs, w) in q.iter_mut().zip(row) {
                *qs += p * w;
            }
        }
        q
    }

    /// Collapses bit-identical rows.
    ///
    /// Returns the reduced channel and, for every original input, the index of
    /// its representative row. Capacity is unchanged by the reduction.
    pub fn dedup_rows(&self) -> (Self, Vec<usize>) {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut keep = Vec::new();
        let mut group = Vec::with_capacity(self.n_inputs);
        for (i, row) in self.rows().enumerate() {
            let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
            let next = keep.len();
            let g = *seen.entry(key).or_insert_with(|| {
                keep.push(i);
                next
            });
            group.push(g);
        }
        (self.select_rows(&keep), group)
    }

    fn check_input(&self, input: &ProbabilityVector) -> Result<()> {
        if input.len() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs,
                actual: input.len(),
            });
        }
        Ok(())
    }
}

/// `-Σ p log₂ p` over a slice with `0 log 0 = 0`; no validation.
pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}

/// Shannon entropy in bits.
pub fn entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(p.as_slice())
}

/// `H(S|A) = Σ_a p(a) H(p(·|a))` in bits.
pub fn conditional_entropy(input: &ProbabilityVector, channel: &DiscreteChannel) -> Result<f64> {
    channel.check_input(input)?;
    Ok(input
        .as_slice()
        .iter()
        .zip(channel.rows())
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, row)| p * entropy_bits(row))
        .sum())
}

/// `I(A;S) = H(S) - H(S|A)` in bits, clamped at zero.
pub fn mutual_information(input: &ProbabilityVector, channel: &DiscreteChannel) -> Result<f64> {
    let q = channel.output_marginal(input)?;
    let h_cond = conditional_entropy(input, channel)?;
    Ok((entropy_bits(&q) - h_cond).max(0.0))
}
