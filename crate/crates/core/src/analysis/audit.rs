use serde::{Deserialize, Serialize};

use super::{discrete_eigenpairs, fit_loglog, AnalyticSpectrum};
use crate::fem::{Discretization, OperatorCoeffs};
use crate::mesh::Mesh;
use crate::sampler::MassMode;
use crate::spectral::SpectralFunction;

/// Slack allowed below zero in `lambda_{j,h} - lambda_j`.
const MIN_MAX_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct AuditParams {
    /// Dirichlet mesh family on `[0, pi]^d` for the dof count and min-max
    /// checks; may be empty.
    pub meshes: Vec<Mesh>,
    /// Leading modes used to fit the eigenvalue growth.
    pub growth_fit_modes: usize,
    /// Meshes with more dofs are skipped by the min-max check.
    pub min_max_max_dofs: usize,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            meshes: Vec::new(),
            growth_fit_modes: 10_000,
            min_max_max_dofs: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxCheck {
    pub h: f64,
    pub n_dofs: usize,
    /// `min_j (lambda_{j,h} - lambda_j)` with the consistent mass.
    pub min_gap: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Least-squares `alpha` in `lambda_j ~ j^alpha`.
    pub fitted_growth: Option<f64>,
    /// `d / 2`, the growth exponent quoted with Weyl's law.
    pub growth_half_dim: Option<f64>,
    /// `2 / d`, the growth of the ordered box spectrum.
    pub growth_ordered: Option<f64>,
    /// Set when the fitted growth is not within 5% of `d / 2`.
    pub growth_discrepancy: bool,
    pub beta: Option<f64>,
    /// `max |gamma(lambda_j)| lambda_j^beta` over the middle and the last
    /// decade of the spectrum.
    pub tail_products: Option<(f64, f64)>,
    /// Whether the product stays bounded: last decade at most 1.5x the middle.
    pub tail_bounded: Option<bool>,
    /// `d~` in `N_h ~ h^{-d~}`.
    pub fitted_dof_exponent: Option<f64>,
    pub min_max: Vec<MinMaxCheck>,
    pub notes: Vec<String>,
}

/// Empirical check of the growth, decay, dimension and eigenvalue ordering
/// assumptions. Never fails; problems are reported in `notes`.
pub fn assumption_audit(spectrum: &AnalyticSpectrum, gamma: &SpectralFunction, params: &AuditParams) -> AuditReport {
    let mut notes = Vec::new();
    let lambdas = spectrum.eigenvalues();
    let fit_n = params.growth_fit_modes.min(lambdas.len());
    let js: Vec<f64> = (1..=fit_n).map(|j| j as f64).collect();
    let fitted_growth = fit_loglog(&js, &lambdas[..fit_n]).map(|f| f.slope);
    let growth_half_dim = spectrum.dim().map(|d| d as f64 / 2.0);
    let growth_ordered = spectrum.dim().map(|d| 2.0 / d as f64);
    let growth_discrepancy = match (fitted_growth, growth_half_dim) {
        (Some(a), Some(w)) => (a - w).abs() > 0.05 * w,
        _ => false,
    };
    if growth_discrepancy {
        notes.push(format!(
            "fitted eigenvalue growth {:.4} differs from d/2 = {:.4}",
            fitted_growth.unwrap_or(f64::NAN),
            growth_half_dim.unwrap_or(f64::NAN)
        ));
    }

    let (tail_products, tail_bounded) = match gamma.beta {
        Some(beta) if lambdas.len() >= 100 => {
            let n = lambdas.len();
            let sup = |r: std::ops::Range<usize>| {
                lambdas[r]
                    .iter()
                    .map(|&l| gamma.eval(l).abs() * l.powf(beta))
                    .fold(0.0, f64::max)
            };
            let (mid, last) = (sup(n / 100..n / 10), sup(n / 10..n));
            (Some((mid, last)), Some(last.is_finite() && last <= 1.5 * mid))
        }
        Some(_) => {
            notes.push("spectrum too short for the decay check".into());
            (None, None)
        }
        None => (None, None),
    };

    let mut hs = Vec::new();
    let mut dofs = Vec::new();
    let mut min_max = Vec::new();
    for mesh in &params.meshes {
        let disc = match Discretization::new(mesh, &OperatorCoeffs::laplacian(), true) {
            Ok(d) => d,
            Err(e) => {
                notes.push(format!("mesh skipped: {e}"));
                continue;
            }
        };
        let h = mesh.stats().h;
        hs.push(h);
        dofs.push(disc.n() as f64);
        if disc.n() > params.min_max_max_dofs {
            continue;
        }
        match discrete_eigenpairs(&disc, MassMode::Exact) {
            Ok(pairs) => {
                let min_gap = pairs
                    .eigenvalues
                    .iter()
                    .zip(lambdas)
                    .map(|(lh, l)| lh - l)
                    .fold(f64::INFINITY, f64::min);
                min_max.push(MinMaxCheck {
                    h,
                    n_dofs: disc.n(),
                    min_gap,
                    holds: min_gap >= -MIN_MAX_SLACK,
                });
            }
            Err(e) => notes.push(format!("min-max check skipped at h = {h}: {e}")),
        }
    }
    let fitted_dof_exponent = fit_loglog(&hs, &dofs).map(|f| -f.slope);

    AuditReport {
        fitted_growth,
        growth_half_dim,
        growth_ordered,
        growth_discrepancy,
        beta: gamma.beta,
        tail_products,
        tail_bounded,
        fitted_dof_exponent,
        min_max,
        notes,
    }
}
