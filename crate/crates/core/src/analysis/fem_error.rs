use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::triangle_rule;
use super::{tail_sums, AnalyticSpectrum, ConvergenceReport, TailSums, TAIL_CUTOFF};
use crate::error::{Error, Result};
use crate::fem::{Discretization, OperatorCoeffs};
use crate::mesh::Mesh;
use crate::sampler::dense::{inv_sqrt_spd, sorted_eigen, DENSE_LIMIT};
use crate::sampler::MassMode;
use crate::spectral::SpectralFunction;

/// Points per direction of the collapsed triangle rule used for loads in 2D.
const TRIANGLE_POINTS: usize = 8;
/// Relative gap below which analytic eigenvalues form one cluster.
const CLUSTER_TOL: f64 = 1e-8;
/// Number of low modes in the eigenvalue error.
const LOW_MODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FemErrorOptions {
    pub mass_mode: MassMode,
    /// Analytic modes summed for the truncation term.
    pub tail_modes: usize,
}

impl Default for FemErrorOptions {
    fn default() -> Self {
        FemErrorOptions {
            mass_mode: MassMode::Lumped,
            tail_modes: TAIL_CUTOFF,
        }
    }
}

/// Discrete eigenpairs of `S` with each eigenvector mapped to nodal
/// coefficients `M^{-1/2} v` of a function in the finite element space.
#[derive(Debug, Clone)]
pub struct DiscreteEigenpairs {
    pub eigenvalues: Vec<f64>,
    /// Column `k` holds the coefficients of `e_{k,h}` over the dofs.
    pub coefficients: DMatrix<f64>,
}

pub fn discrete_eigenpairs(disc: &Discretization, mode: MassMode) -> Result<DiscreteEigenpairs> {
    let n = disc.n();
    if n > DENSE_LIMIT {
        return Err(Error::DenseGuard { n, limit: DENSE_LIMIT });
    }
    let inv_sqrt = match mode {
        MassMode::Exact => inv_sqrt_spd(&disc.mass.to_dense())?,
        MassMode::Lumped => DMatrix::from_diagonal(&DVector::from_column_slice(&disc.lumped.inv_sqrt)),
    };
    let s = &inv_sqrt * disc.stiffness.to_dense() * &inv_sqrt;
    let (values, vectors) = sorted_eigen((&s + s.transpose()) * 0.5);
    Ok(DiscreteEigenpairs {
        eigenvalues: values.iter().cloned().collect(),
        coefficients: inv_sqrt * vectors,
    })
}

/// Error terms at one mesh level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemErrorLevel {
    pub h: f64,
    pub n_dofs: usize,
    /// `E ||Z - Z_h||^2`.
    pub total: f64,
    /// `sum_{j > N_h} gamma(lambda_j)^2`.
    pub truncation: f64,
    /// `sum_{j <= N_h} ||gamma(lambda_j) e_j - gamma(lambda_{j,h}) e_{j,h}||^2`.
    pub discretization: f64,
    /// `sum_{j <= N_h} (gamma(lambda_j) - gamma(lambda_{j,h}))^2`.
    pub eigenvalue_part: f64,
    /// `sum_{j <= N_h} gamma(lambda_j)^2 ||e_j - e_{j,h}||^2`.
    pub eigenvector_part: f64,
    /// `max_{j <= 5} |lambda_{j,h} - lambda_j|`.
    pub low_eigenvalue_error: f64,
    /// Clusters of repeated analytic eigenvalues matched by overlap.
    pub ambiguous_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemErrorStudy {
    pub levels: Vec<FemErrorLevel>,
    pub total: ConvergenceReport,
    pub eigenvalue_error: ConvergenceReport,
    pub eigenvalue_part: ConvergenceReport,
    pub eigenvector_part: ConvergenceReport,
}

/// Checks that `mesh` is a flat mesh of `[0, pi]^d`, `d` 1 or 2.
fn box_dimension(mesh: &Mesh) -> Result<usize> {
    let d = mesh.dim();
    if !(d == 1 || d == 2) || mesh.embed_dim() != d {
        return Err(Error::invalid("FEM error study needs a flat interval or rectangle mesh"));
    }
    for k in 0..d {
        let (lo, hi) = mesh
            .vertices()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v[k]), b.max(v[k])));
        if lo.abs() > 1e-9 || (hi - PI).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "FEM error study needs the domain [0, pi]^{d}, axis {k} spans [{lo}, {hi}]"
            )));
        }
    }
    Ok(d)
}

/// `(e_j, psi_i)` for the first `n_modes` analytic modes (columns) and all
/// dofs (rows).
fn analytic_loads(mesh: &Mesh, dofs: &[usize], spectrum: &AnalyticSpectrum, n_modes: usize) -> DMatrix<f64> {
    let mut dof_of = vec![usize::MAX; mesh.n_vertices()];
    for (k, &v) in dofs.iter().enumerate() {
        dof_of[v] = k;
    }
    let mut loads = DMatrix::zeros(dofs.len(), n_modes);
    let norm = 2.0 / PI;
    match mesh.dim() {
        1 => {
            let c = norm.sqrt();
            for el in mesh.elements() {
                let (ia, ib) = if mesh.vertex(el[0])[0] <= mesh.vertex(el[1])[0] {
                    (el[0], el[1])
                } else {
                    (el[1], el[0])
                };
                let (a, b) = (mesh.vertex(ia)[0], mesh.vertex(ib)[0]);
                let h = b - a;
                for j in 0..n_modes {
                    let k = spectrum.multi_index(j).expect("box spectrum")[0] as f64;
                    let (sa, sb, ca, cb) = ((k * a).sin(), (k * b).sin(), (k * a).cos(), (k * b).cos());
                    // int_a^b sin(kx) (b - x)/h and int_a^b sin(kx) (x - a)/h
                    let left = (h * ca / k - (sb - sa) / (k * k)) / h;
                    let right = (-h * cb / k + (sb - sa) / (k * k)) / h;
                    if dof_of[ia] != usize::MAX {
                        loads[(dof_of[ia], j)] += c * left;
                    }
                    if dof_of[ib] != usize::MAX {
                        loads[(dof_of[ib], j)] += c * right;
                    }
                }
            }
        }
        _ => {
            let rule = triangle_rule(TRIANGLE_POINTS);
            for (e, el) in mesh.elements().enumerate() {
                let area = mesh.geometry(e).volume;
                let p: Vec<&[f64; 3]> = el.iter().map(|&i| mesh.vertex(i)).collect();
                let points: Vec<([f64; 2], [f64; 3], f64)> = rule
                    .iter()
                    .map(|(l, w)| {
                        let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
                        let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
                        ([x, y], *l, w * area)
                    })
                    .collect();
                for j in 0..n_modes {
                    let idx = spectrum.multi_index(j).expect("box spectrum");
                    let (kx, ky) = (idx[0] as f64, idx[1] as f64);
                    let mut acc = [0.0; 3];
                    for (x, l, w) in &points {
                        let f = w * norm * (kx * x[0]).sin() * (ky * x[1]).sin();
                        for a in 0..3 {
                            acc[a] += f * l[a];
                        }
                    }
                    for a in 0..3 {
                        let d = dof_of[el[a]];
                        if d != usize::MAX {
                            loads[(d, j)] += acc[a];
                        }
                    }
                }
            }
        }
    }
    loads
}

/// Error terms at one level from precomputed discrete eigenpairs.
///
/// Analytic and discrete modes are paired by index; inside a cluster of
/// repeated analytic eigenvalues the pairing maximizes `|(e_j, e_{k,h})|`
/// greedily. Each discrete eigenfunction takes the sign that makes its inner
/// product with its partner nonnegative.
pub fn fem_level_error(
    mesh: &Mesh,
    disc: &Discretization,
    pairs: &DiscreteEigenpairs,
    gamma: &SpectralFunction,
    spectrum: &AnalyticSpectrum,
    tails: &TailSums,
) -> Result<FemErrorLevel> {
    let n = disc.n();
    if pairs.eigenvalues.len() != n || pairs.coefficients.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pairs.eigenvalues.len(),
        });
    }
    if spectrum.len() < n || spectrum.dim() != Some(mesh.dim()) {
        return Err(Error::invalid(format!(
            "analytic spectrum must be a {}D box spectrum with at least {n} modes",
            mesh.dim()
        )));
    }
    let loads = analytic_loads(mesh, &disc.dofs, spectrum, n);
    // (e_j, e_{k,h}) for every analytic j and discrete k would be n^2 work
    // per column; only cluster blocks are needed
    let mut partner = vec![0usize; n];
    let mut inner = vec![0.0; n];
    let mut ambiguous = 0;
    for cluster in spectrum.clusters(CLUSTER_TOL) {
        if cluster.start >= n {
            break;
        }
        let range = cluster.start..cluster.end.min(n);
        if range.len() > 1 {
            ambiguous += 1;
        }
        let mut overlaps: Vec<(f64, usize, usize)> = Vec::new();
        for j in range.clone() {
            for k in range.clone() {
                let o = loads.column(j).dot(&pairs.coefficients.column(k));
                overlaps.push((o, j, k));
            }
        }
        // largest |overlap| first, ties by index for determinism
        overlaps.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut used_j = vec![false; range.len()];
        let mut used_k = vec![false; range.len()];
        for (o, j, k) in overlaps {
            let (jj, kk) = (j - range.start, k - range.start);
            if !used_j[jj] && !used_k[kk] {
                used_j[jj] = true;
                used_k[kk] = true;
                partner[j] = k;
                inner[j] = o.abs();
            }
        }
    }

    let mut c_coef = DVector::zeros(n);
    let (mut discretization, mut eigenvalue_part, mut eigenvector_part) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let k = partner[j];
        let coef = pairs.coefficients.column(k);
        disc.mass.matvec(coef.as_slice(), c_coef.as_mut_slice());
        let norm2 = coef.dot(&c_coef);
        let g = gamma.eval(spectrum.eigenvalues()[j]);
        let gh = gamma.eval(pairs.eigenvalues[k]);
        if !gh.is_finite() {
            return Err(Error::NonFiniteSpectral {
                lambda: pairs.eigenvalues[k],
            });
        }
        discretization += g * g + gh * gh * norm2 - 2.0 * g * gh * inner[j];
        eigenvalue_part += (g - gh).powi(2);
        eigenvector_part += g * g * (1.0 + norm2 - 2.0 * inner[j]);
    }
    let truncation = tails.tail(n);
    let low_eigenvalue_error = (0..LOW_MODES.min(n))
        .map(|j| (pairs.eigenvalues[j] - spectrum.eigenvalues()[j]).abs())
        .fold(0.0, f64::max);
    Ok(FemErrorLevel {
        h: mesh.stats().h,
        n_dofs: n,
        total: discretization + truncation,
        truncation,
        discretization,
        eigenvalue_part,
        eigenvector_part,
        low_eigenvalue_error,
        ambiguous_clusters: ambiguous,
    })
}

/// Deterministic error `E ||Z - Z_h||^2` of the Laplacian field on a family
/// of Dirichlet meshes of `[0, pi]^d`, with its components and slopes
/// against `h`.
pub fn fem_spectral_error(meshes: &[Mesh], gamma: &SpectralFunction, opts: &FemErrorOptions) -> Result<FemErrorStudy> {
    if meshes.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 refinement levels, got {}", meshes.len())));
    }
    let d = box_dimension(&meshes[0])?;
    for m in &meshes[1..] {
        if box_dimension(m)? != d {
            return Err(Error::invalid("all refinement levels must share one dimension"));
        }
    }
    let discs: Vec<Discretization> = meshes
        .iter()
        .map(|m| Discretization::new(m, &OperatorCoeffs::laplacian(), true))
        .collect::<Result<_>>()?;
    let max_dofs = discs.iter().map(|d| d.n()).max().unwrap_or(0);
    let spectrum = AnalyticSpectrum::dirichlet_box(d, opts.tail_modes.max(max_dofs + 1))?;
    let tails = tail_sums(gamma, &spectrum)?;
    let levels: Vec<FemErrorLevel> = meshes
        .par_iter()
        .zip(discs.par_iter())
        .map(|(mesh, disc)| {
            let pairs = discrete_eigenpairs(disc, opts.mass_mode)?;
            fem_level_error(mesh, disc, &pairs, gamma, &spectrum, &tails)
        })
        .collect::<Result<_>>()?;

    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let series = |label: &str, f: fn(&FemErrorLevel) -> f64| {
        ConvergenceReport::new(label, "h", h.clone(), levels.iter().map(f).collect())
    };
    Ok(FemErrorStudy {
        total: series("total error", |l| l.total)?,
        eigenvalue_error: series("max low-mode eigenvalue error", |l| l.low_eigenvalue_error)?
            .with_reference("P1 eigenvalue rate", 2.0),
        eigenvalue_part: series("eigenvalue component", |l| l.eigenvalue_part)?,
        eigenvector_part: series("eigenvector component", |l| l.eigenvector_part)?,
        levels,
    })
}
