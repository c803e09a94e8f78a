//! Gaussian weight vectors with covariance `D^{-1/2} gamma^2(S) D^{-1/2}`.
//!
//! # Random streams
//!
//! Sample `i` of a batch with seed `s` draws its `n` standard normals from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, using the ziggurat
//! sampler of `rand_distr::StandardNormal`. A sample therefore depends only
//! on `(s, i, n)`: batches are identical whatever the block size or the
//! number of worker threads, and a prefix of a batch equals the smaller
//! batch.

pub(crate) mod dense;
mod export;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::LumpedMass;
use crate::mesh::Mesh;
use crate::sparse::SymmetricSparseMatrix;
use crate::spectral::{
    chebyshev_fit, choose_order, gershgorin_bound, ChebyshevExpansion, ChebyshevOperator,
    OrderChoice, SpectralFunction, SpectralInterval,
};

pub use dense::{dense_oracle, sample_dense, DenseOracle, MassMode};
pub use export::{read_binary, write_binary, write_csv, BinarySidecar};

/// Samples per block in the blocked recurrence.
const BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub tol: f64,
    pub use_dirichlet: bool,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize, tol: f64) -> Self {
        SamplerConfig {
            seed,
            n_samples,
            tol,
            use_dirichlet: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be >= 1"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::invalid(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub seed: u64,
    /// Chebyshev order, `None` for the dense sampler.
    pub order: Option<usize>,
    pub interval: Option<SpectralInterval>,
    pub mesh_hash: Option<u64>,
}

/// `n x n_samples` weights, one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSampleBatch {
    pub weights: DMatrix<f64>,
    pub meta: BatchMeta,
}

impl FieldSampleBatch {
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.weights.ncols()
    }

    pub fn with_mesh(mut self, mesh: &Mesh) -> Self {
        self.meta.mesh_hash = Some(mesh.fingerprint());
        self
    }
}

/// The `n` standard normals of sample `index`.
pub fn standard_normals(seed: u64, index: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    StandardNormal.sample_iter(&mut rng).take(n).collect()
}

/// Chebyshev sampler for one matrix, mass and spectral function.
#[derive(Debug, Clone)]
pub struct ChebyshevSampler<'a> {
    s: &'a SymmetricSparseMatrix,
    inv_sqrt: &'a [f64],
    expansion: ChebyshevExpansion,
    choice: OrderChoice,
}

impl<'a> ChebyshevSampler<'a> {
    /// Steps 1-2 of the algorithm: enclose the spectrum of `S` and fit
    /// `gamma` there with an order chosen for `tol`.
    pub fn new(
        s: &'a SymmetricSparseMatrix,
        lumped: &'a LumpedMass,
        gamma: &SpectralFunction,
        tol: f64,
    ) -> Result<Self> {
        if lumped.n() != s.n() {
            return Err(Error::DimensionMismatch {
                expected: s.n(),
                got: lumped.n(),
            });
        }
        let interval = gershgorin_bound(s).widened();
        let choice = choose_order(gamma, interval, tol)?;
        let expansion = chebyshev_fit(gamma, interval, choice.order)?;
        Ok(ChebyshevSampler {
            s,
            inv_sqrt: &lumped.inv_sqrt,
            expansion,
            choice,
        })
    }

    pub fn expansion(&self) -> &ChebyshevExpansion {
        &self.expansion
    }

    pub fn order_choice(&self) -> &OrderChoice {
        &self.choice
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    /// Samples `start..start + count` as an `n x count` matrix.
    pub fn sample_range(&self, seed: u64, start: usize, count: usize) -> Result<DMatrix<f64>> {
        let op = ChebyshevOperator::new(self.s, &self.expansion)?;
        let n = self.n();
        let mut eps = vec![0.0; n * count];
        for b in 0..count {
            let e = standard_normals(seed, (start + b) as u64, n);
            for (i, v) in e.into_iter().enumerate() {
                eps[i * count + b] = v;
            }
        }
        let u = op.apply_block(&eps, count);
        let mut z = DMatrix::zeros(n, count);
        for i in 0..n {
            for b in 0..count {
                z[(i, b)] = self.inv_sqrt[i] * u[i * count + b];
            }
        }
        if let Some(bad) = z.column_iter().position(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFiniteSample { sample: start + bad });
        }
        Ok(z)
    }

    /// Streams the batch through `visit` in sample order, one block at a
    /// time. Blocks are computed in parallel; the visiting order is fixed.
    pub fn for_each_block(
        &self,
        seed: u64,
        n_samples: usize,
        mut visit: impl FnMut(usize, &DMatrix<f64>),
    ) -> Result<()> {
        let group = BLOCK * rayon::current_num_threads().max(1);
        let mut start = 0;
        while start < n_samples {
            let end = (start + group).min(n_samples);
            let blocks: Vec<(usize, usize)> = (start..end)
                .step_by(BLOCK)
                .map(|b| (b, BLOCK.min(end - b)))
                .collect();
            let results: Vec<Result<DMatrix<f64>>> = blocks
                .par_iter()
                .map(|&(b, count)| self.sample_range(seed, b, count))
                .collect();
            for ((b, _), block) in blocks.into_iter().zip(results) {
                visit(b, &block?);
            }
            start = end;
        }
        Ok(())
    }

    pub fn sample(&self, cfg: &SamplerConfig) -> Result<FieldSampleBatch> {
        cfg.validate()?;
        let mut weights = DMatrix::zeros(self.n(), cfg.n_samples);
        self.for_each_block(cfg.seed, cfg.n_samples, |start, block| {
            weights
                .columns_mut(start, block.ncols())
                .copy_from(block);
        })?;
        Ok(FieldSampleBatch {
            weights,
            meta: BatchMeta {
                seed: cfg.seed,
                order: Some(self.expansion.order()),
                interval: Some(self.expansion.interval()),
                mesh_hash: None,
            },
        })
    }
}

/// Draws `cfg.n_samples` weight vectors `z = D^{-1/2} P(S) eps`.
pub fn sample_weights(
    s: &SymmetricSparseMatrix,
    lumped: &LumpedMass,
    gamma: &SpectralFunction,
    cfg: &SamplerConfig,
) -> Result<FieldSampleBatch> {
    cfg.validate()?;
    ChebyshevSampler::new(s, lumped, gamma, cfg.tol)?.sample(cfg)
}

/// `Z(x) = sum_i z_i psi_i(x)` at each point; `z` holds one weight per mesh
/// vertex.
pub fn evaluate_field(mesh: &Mesh, z: &[f64], points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if z.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: z.len(),
        });
    }
    points
        .iter()
        .map(|p| {
            let (e, bary) = mesh.locate(p)?;
            Ok(mesh.element(e).iter().zip(&bary).map(|(&i, w)| w * z[i]).sum())
        })
        .collect()
}
