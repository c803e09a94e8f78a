use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{standard_normals, BatchMeta, FieldSampleBatch, SamplerConfig};
use crate::error::{Error, Result};
use crate::fem::LumpedMass;
use crate::sparse::SymmetricSparseMatrix;
use crate::spectral::SpectralFunction;

/// Largest system the dense oracle will factor.
pub const DENSE_LIMIT: usize = 2000;

/// Which mass matrix plays the role of `M` in `S = M^{-1/2} G M^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassMode {
    /// The consistent mass `C`, square root by eigendecomposition.
    Exact,
    /// The row-sum lumped mass `D`.
    Lumped,
}

/// Exact weight covariance `M^{-1/2} gamma^2(S) M^{-1/2}` by dense
/// eigendecomposition.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    pub mode: MassMode,
    pub sigma_z: DMatrix<f64>,
    /// Eigenvalues of `S`, ascending.
    pub eigenvalues: DVector<f64>,
    /// Matching orthonormal eigenvectors, one per column.
    pub eigenvectors: DMatrix<f64>,
    pub inv_sqrt_mass: DMatrix<f64>,
    pub gamma_values: DVector<f64>,
    /// `R = M^{-1/2} U diag(gamma)`, so `sigma_z = R R^T`.
    pub factor: DMatrix<f64>,
}

impl DenseOracle {
    pub fn n(&self) -> usize {
        self.sigma_z.nrows()
    }

    /// `gamma(S) v`.
    pub fn apply_gamma(&self, v: &[f64]) -> Vec<f64> {
        let u = &self.eigenvectors;
        let mut w = u.tr_mul(&DVector::from_column_slice(v));
        w.component_mul_assign(&self.gamma_values);
        (u * w).as_slice().to_vec()
    }
}

/// Sorted eigendecomposition of a symmetric matrix.
pub(crate) fn sorted_eigen(a: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
    );
    (values, vectors)
}

fn check_size(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::DenseGuard { n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

/// Symmetric inverse square root of an SPD matrix.
pub(crate) fn inv_sqrt_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, vectors) = sorted_eigen(a.clone());
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::Indefinite { min_eig: min });
    }
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] / values[j].sqrt()
    });
    Ok(&scaled * vectors.transpose())
}

pub fn dense_oracle(
    c: &SymmetricSparseMatrix,
    g: &SymmetricSparseMatrix,
    lumped: &LumpedMass,
    gamma: &SpectralFunction,
    mode: MassMode,
) -> Result<DenseOracle> {
    let n = g.n();
    check_size(n)?;
    for got in [c.n(), lumped.n()] {
        if got != n {
            return Err(Error::DimensionMismatch { expected: n, got });
        }
    }
    let inv_sqrt_mass = match mode {
        MassMode::Exact => inv_sqrt_spd(&c.to_dense())?,
        MassMode::Lumped => DMatrix::from_diagonal(&DVector::from_column_slice(&lumped.inv_sqrt)),
    };
    let s = &inv_sqrt_mass * g.to_dense() * &inv_sqrt_mass;
    let s = (&s + s.transpose()) * 0.5;
    let (eigenvalues, eigenvectors) = sorted_eigen(s);
    let gamma_values = eigenvalues.map(|l| gamma.eval(l));
    if let Some(&bad) = eigenvalues.iter().zip(gamma_values.iter()).find(|(_, g)| !g.is_finite()).map(|(l, _)| l) {
        return Err(Error::NonFiniteSpectral { lambda: bad });
    }
    let mut factor = &inv_sqrt_mass * &eigenvectors;
    for (j, gv) in gamma_values.iter().enumerate() {
        factor.column_mut(j).scale_mut(*gv);
    }
    let sigma_z = &factor * factor.transpose();
    Ok(DenseOracle {
        mode,
        sigma_z,
        eigenvalues,
        eigenvectors,
        inv_sqrt_mass,
        gamma_values,
        factor,
    })
}

/// Reference sampler `z = R eps`, drawing from the same per-sample streams
/// as the Chebyshev sampler.
pub fn sample_dense(oracle: &DenseOracle, cfg: &SamplerConfig) -> Result<FieldSampleBatch> {
    cfg.validate()?;
    let n = oracle.n();
    let mut eps = DMatrix::zeros(n, cfg.n_samples);
    for k in 0..cfg.n_samples {
        eps.column_mut(k)
            .copy_from_slice(&standard_normals(cfg.seed, k as u64, n));
    }
    Ok(FieldSampleBatch {
        weights: &oracle.factor * eps,
        meta: BatchMeta {
            seed: cfg.seed,
            order: None,
            interval: None,
            mesh_hash: None,
        },
    })
}
