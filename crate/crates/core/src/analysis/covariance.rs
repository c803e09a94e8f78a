use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::sampler::FieldSampleBatch;

/// Unbiased sample covariance of the batch columns.
pub fn empirical_covariance(batch: &FieldSampleBatch) -> Result<DMatrix<f64>> {
    let mut acc = CovarianceAccumulator::new(batch.n());
    acc.push_block(&batch.weights);
    acc.finish()
}

/// Streaming sample covariance over blocks of columns.
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    count: usize,
    sum: DVector<f64>,
    sum_outer: DMatrix<f64>,
}

impl CovarianceAccumulator {
    pub fn new(n: usize) -> Self {
        CovarianceAccumulator {
            count: 0,
            sum: DVector::zeros(n),
            sum_outer: DMatrix::zeros(n, n),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push_block(&mut self, block: &DMatrix<f64>) {
        assert_eq!(block.nrows(), self.sum.len(), "block height must match accumulator size");
        self.sum_outer.gemm(1.0, block, &block.transpose(), 1.0);
        for col in block.column_iter() {
            self.sum += col;
        }
        self.count += block.ncols();
    }

    pub fn mean(&self) -> DVector<f64> {
        &self.sum / self.count.max(1) as f64
    }

    pub fn finish(&self) -> Result<DMatrix<f64>> {
        if self.count < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.count,
            });
        }
        let n = self.count as f64;
        let mean = self.mean();
        Ok((&self.sum_outer - n * &mean * mean.transpose()) / (n - 1.0))
    }
}

/// Standard error of each entry of a sample covariance of `n_samples`
/// Gaussian vectors with covariance `sigma`:
/// `sqrt((sigma_ii sigma_jj + sigma_ij^2) / n_samples)`.
pub fn covariance_standard_errors(sigma: &DMatrix<f64>, n_samples: usize) -> DMatrix<f64> {
    let n = n_samples as f64;
    DMatrix::from_fn(sigma.nrows(), sigma.ncols(), |i, j| {
        ((sigma[(i, i)] * sigma[(j, j)] + sigma[(i, j)].powi(2)) / n).sqrt()
    })
}

/// Sample covariance averaged over groups of vertex pairs, without forming
/// the full matrix. Each pair `(i, j)` belongs to one bin.
#[derive(Debug, Clone)]
pub struct LagCovarianceAccumulator {
    pairs: Vec<(usize, usize)>,
    bins: Vec<usize>,
    n_bins: usize,
    count: usize,
    vertex_sum: Vec<f64>,
    pair_sum: Vec<f64>,
    scratch: Vec<f64>,
}

impl LagCovarianceAccumulator {
    pub fn new(n: usize, pairs: Vec<(usize, usize)>, bins: Vec<usize>) -> Result<Self> {
        if pairs.len() != bins.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                got: bins.len(),
            });
        }
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| *i >= n || *j >= n) {
            return Err(Error::invalid(format!("pair ({i}, {j}) outside 0..{n}")));
        }
        let n_bins = bins.iter().map(|b| b + 1).max().unwrap_or(0);
        Ok(LagCovarianceAccumulator {
            pair_sum: vec![0.0; pairs.len()],
            pairs,
            bins,
            n_bins,
            count: 0,
            vertex_sum: vec![0.0; n],
            scratch: Vec::new(),
        })
    }

    pub fn push_block(&mut self, block: &DMatrix<f64>) {
        let (n, width) = block.shape();
        assert_eq!(n, self.vertex_sum.len(), "block height must match accumulator size");
        // row-major copy so each vertex's samples are contiguous
        self.scratch.clear();
        self.scratch.extend(block.transpose().iter());
        for (i, s) in self.vertex_sum.iter_mut().enumerate() {
            *s += self.scratch[i * width..(i + 1) * width].iter().sum::<f64>();
        }
        let rows = &self.scratch;
        for (acc, &(i, j)) in self.pair_sum.iter_mut().zip(&self.pairs) {
            let (a, b) = (&rows[i * width..(i + 1) * width], &rows[j * width..(j + 1) * width]);
            *acc += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        self.count += width;
    }

    /// Per-bin mean of the unbiased pair covariances, and the number of
    /// pairs in each bin.
    pub fn finish(&self) -> Result<(Vec<f64>, Vec<usize>)> {
        if self.count < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.count,
            });
        }
        let n = self.count as f64;
        let mut total = vec![0.0; self.n_bins];
        let mut members = vec![0usize; self.n_bins];
        for ((&(i, j), &s), &b) in self.pairs.iter().zip(&self.pair_sum).zip(&self.bins) {
            let (mi, mj) = (self.vertex_sum[i] / n, self.vertex_sum[j] / n);
            total[b] += (s - n * mi * mj) / (n - 1.0);
            members[b] += 1;
        }
        let means = total
            .iter()
            .zip(&members)
            .map(|(t, &m)| if m > 0 { t / m as f64 } else { f64::NAN })
            .collect();
        Ok((means, members))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test against the standard normal, with the
/// asymptotic Kolmogorov distribution for the p-value.
pub fn ks_statistic(samples: &[f64]) -> KsResult {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    KsResult {
        statistic: d,
        p_value: p.clamp(0.0, 1.0),
    }
}
