//! Error measurement: sample covariances, spectral truncation tails and the
//! deterministic finite element error against analytic eigenpairs.

mod audit;
mod covariance;
mod fem_error;
mod quadrature;
mod spectrum;
mod truncation;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub use audit::{assumption_audit, AuditParams, AuditReport, MinMaxCheck};
pub use covariance::{
    covariance_standard_errors, empirical_covariance, ks_statistic, CovarianceAccumulator,
    KsResult, LagCovarianceAccumulator,
};
pub use fem_error::{
    discrete_eigenpairs, fem_level_error, fem_spectral_error, DiscreteEigenpairs, FemErrorLevel,
    FemErrorOptions, FemErrorStudy,
};
pub use quadrature::gauss_legendre;
pub use spectrum::{AnalyticSpectrum, SpectrumKind};
pub use truncation::{tail_sums, truncation_tail, TailSums, TAIL_CUTOFF};

/// A reference decay exponent for a convergence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceExponent {
    pub label: String,
    pub exponent: f64,
}

/// Errors against a refinement parameter with a least-squares log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub label: String,
    /// Name of the abscissa, `h` or `N`.
    pub x_label: String,
    pub x: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when fewer than two errors are positive.
    pub slope: Option<f64>,
    /// 95% confidence half-width of the slope.
    pub slope_half_width: Option<f64>,
    /// Root mean square of the log-log residuals.
    pub residual_rms: Option<f64>,
    pub references: Vec<ReferenceExponent>,
}

impl ConvergenceReport {
    pub fn new(label: impl Into<String>, x_label: impl Into<String>, x: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        if x.len() != errors.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: errors.len(),
            });
        }
        if let Some(bad) = errors.iter().chain(&x).find(|v| !v.is_finite()) {
            return Err(Error::Analysis(format!("non-finite value {bad} in convergence data")));
        }
        let fit = fit_loglog(&x, &errors);
        Ok(ConvergenceReport {
            label: label.into(),
            x_label: x_label.into(),
            slope: fit.map(|f| f.slope),
            slope_half_width: fit.and_then(|f| f.half_width),
            residual_rms: fit.map(|f| f.residual_rms),
            x,
            errors,
            references: Vec::new(),
        })
    }

    pub fn with_reference(mut self, label: impl Into<String>, exponent: f64) -> Self {
        self.references.push(ReferenceExponent {
            label: label.into(),
            exponent,
        });
        self
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Two columns, `x` and error, with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},error\n", self.x_label);
        for (x, e) in self.x.iter().zip(&self.errors) {
            out.push_str(&format!("{x:e},{e:e}\n"));
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        for (ext, body) in [("json", self.to_json()?), ("csv", self.to_csv())] {
            let path = dir.join(format!("{stem}.{ext}"));
            std::fs::File::create(&path)
                .and_then(|mut f| f.write_all(body.as_bytes()))
                .map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub half_width: Option<f64>,
    pub residual_rms: f64,
}

/// Ordinary least squares of `log y` on `log x` over the points with
/// `x, y > 0`.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let half_width = (n > 2).then(|| {
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
        t * se
    });
    Some(LogLogFit {
        slope,
        intercept,
        half_width,
        residual_rms: (rss / nf).sqrt(),
    })
}
