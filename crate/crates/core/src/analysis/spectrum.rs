use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectrumKind {
    /// Dirichlet Laplacian on `[0, pi]^dim`, `dim` 1 or 2.
    DirichletBox { dim: usize },
    /// Eigenvalues `j^growth` with no eigenfunctions attached.
    PowerLaw { growth: f64 },
}

/// Sorted eigenvalues of a reference operator, with the multi-index of each
/// mode for the box.
#[derive(Debug, Clone)]
pub struct AnalyticSpectrum {
    kind: SpectrumKind,
    eigenvalues: Vec<f64>,
    indices: Vec<[u32; 2]>,
}

impl AnalyticSpectrum {
    /// The `n_modes` smallest eigenvalues `sum_k j_k^2` of the Dirichlet
    /// Laplacian on `[0, pi]^dim`, ordered by value and then by multi-index.
    pub fn dirichlet_box(dim: usize, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("spectrum needs at least one mode"));
        }
        let (eigenvalues, indices) = match dim {
            1 => (
                (1..=n_modes).map(|j| (j * j) as f64).collect(),
                (1..=n_modes).map(|j| [j as u32, 0]).collect(),
            ),
            2 => {
                // about pi R / 4 lattice points lie under the circle of radius^2 R
                let mut bound = (4.0 * n_modes as f64 / PI * 1.1 + 50.0).ceil() as u64;
                let mut modes = loop {
                    let jmax = (bound as f64).sqrt() as u64;
                    let mut modes: Vec<(u64, u32, u32)> = Vec::new();
                    for j in 1..=jmax {
                        for k in 1..=jmax {
                            let l = j * j + k * k;
                            if l <= bound {
                                modes.push((l, j as u32, k as u32));
                            }
                        }
                    }
                    if modes.len() >= n_modes {
                        break modes;
                    }
                    bound *= 2;
                };
                modes.sort_unstable();
                modes.truncate(n_modes);
                (
                    modes.iter().map(|m| m.0 as f64).collect(),
                    modes.iter().map(|m| [m.1, m.2]).collect(),
                )
            }
            _ => return Err(Error::invalid(format!("box spectrum supports dim 1 or 2, got {dim}"))),
        };
        Ok(AnalyticSpectrum {
            kind: SpectrumKind::DirichletBox { dim },
            eigenvalues,
            indices,
        })
    }

    /// `lambda_j = j^growth`, `j = 1..=n_modes`.
    pub fn power_law(growth: f64, n_modes: usize) -> Result<Self> {
        if !(growth > 0.0) || n_modes == 0 {
            return Err(Error::invalid("power-law spectrum needs growth > 0 and n_modes >= 1"));
        }
        Ok(AnalyticSpectrum {
            kind: SpectrumKind::PowerLaw { growth },
            eigenvalues: (1..=n_modes).map(|j| (j as f64).powf(growth)).collect(),
            indices: Vec::new(),
        })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Spatial dimension of the box, `None` for a synthetic spectrum.
    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            SpectrumKind::DirichletBox { dim } => Some(dim),
            SpectrumKind::PowerLaw { .. } => None,
        }
    }

    /// Growth exponent `alpha` of the ordered eigenvalues, `lambda_j ~ j^alpha`:
    /// `2 / dim` for the box.
    pub fn growth_exponent(&self) -> f64 {
        match self.kind {
            SpectrumKind::DirichletBox { dim } => 2.0 / dim as f64,
            SpectrumKind::PowerLaw { growth } => growth,
        }
    }

    /// Multi-index of mode `j` (0-based); unused components are 0.
    pub fn multi_index(&self, j: usize) -> Option<[u32; 2]> {
        self.indices.get(j).copied()
    }

    /// `e_j(x) = sqrt(2/pi)^d prod_k sin(j_k x_k)` for mode `j` (0-based).
    pub fn eigenfunction(&self, j: usize, x: &[f64]) -> f64 {
        let dim = self.dim().expect("synthetic spectra carry no eigenfunctions");
        let idx = self.indices[j];
        let norm = (2.0 / PI).sqrt();
        (0..dim).map(|k| norm * (idx[k] as f64 * x[k]).sin()).product()
    }

    /// Ranges `start..end` of modes whose eigenvalues agree to relative
    /// `rel_tol`.
    pub fn clusters(&self, rel_tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for j in 1..=self.len() {
            if j == self.len()
                || (self.eigenvalues[j] - self.eigenvalues[start]).abs()
                    > rel_tol * self.eigenvalues[start].abs()
            {
                out.push(start..j);
                start = j;
            }
        }
        out
    }
}
