use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The scalar map `gamma` applied to the spectrum of the operator.
///
/// `beta` is the decay exponent (`|gamma(l)| = O(l^-beta)`) and `deriv_a`
/// the derivative decay exponent (`|gamma'(l)| <= C l^-a`) when known. A
/// negative `beta` describes growth, which is how SPDE symbols are tagged.
#[derive(Clone)]
pub struct SpectralFunction {
    eval: ScalarFn,
    symbol: Option<ScalarFn>,
    pub beta: Option<f64>,
    pub deriv_a: Option<f64>,
    pub label: String,
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction")
            .field("label", &self.label)
            .field("beta", &self.beta)
            .field("deriv_a", &self.deriv_a)
            .finish()
    }
}

impl SpectralFunction {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SpectralFunction {
            eval: Arc::new(f),
            symbol: None,
            beta: None,
            deriv_a: None,
            label: label.into(),
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_deriv_a(mut self, a: f64) -> Self {
        self.deriv_a = Some(a);
        self
    }

    #[inline]
    pub fn eval(&self, lambda: f64) -> f64 {
        (self.eval)(lambda)
    }

    /// For functions built by [`from_spde_symbol`], the symbol `g`.
    pub fn symbol(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.symbol.as_deref()
    }

    /// `gamma = c`; `c = 1` is white noise.
    pub fn constant(c: f64) -> Self {
        let mut f = Self::new(format!("const({c})"), move |_| c);
        f.deriv_a = Some(0.0);
        f
    }

    /// `gamma(l) = scale * l^-exponent`.
    pub fn power(scale: f64, exponent: f64) -> Self {
        Self::new(format!("{scale}*l^-{exponent}"), move |l: f64| scale * l.powf(-exponent))
            .with_beta(exponent)
            .with_deriv_a(exponent + 1.0)
    }

    /// `gamma(l) = sum_k coeffs[k] l^k`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let label = format!("poly{coeffs:?}");
        Self::new(label, move |l| coeffs.iter().rev().fold(0.0, |acc, c| acc * l + c))
    }

    /// `c * gamma`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        SpectralFunction {
            eval: Arc::new(move |l| c * inner(l)),
            symbol: None,
            beta: self.beta,
            deriv_a: self.deriv_a,
            label: format!("{c}*{}", self.label),
        }
    }
}

/// Square root of the Matern spectral density as a function of `l = |w|^2`:
/// `f(l) = sigma2 * c_norm * (kappa^2 + l)^-(nu + d/2)`.
///
/// `c_norm = Gamma(nu + d/2) (4 pi)^{d/2} kappa^{2 nu} / Gamma(nu)` makes the
/// field `gamma(-Laplacian) W` on `R^d` have pointwise variance `sigma2`.
pub fn matern_spectral(kappa: f64, nu: f64, d: usize, sigma2: f64) -> Result<SpectralFunction> {
    if !(kappa > 0.0 && nu > 0.0 && sigma2 > 0.0) || ![kappa, nu, sigma2].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid(format!(
            "Matern parameters must be positive (kappa={kappa}, nu={nu}, sigma2={sigma2})"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("Matern dimension must be >= 1"));
    }
    let df = d as f64;
    let exponent = nu + df / 2.0;
    let c_norm = matern_normalization(kappa, nu, d);
    let amplitude = (sigma2 * c_norm).sqrt();
    let kappa2 = kappa * kappa;
    let beta = exponent / 2.0;
    let f = SpectralFunction::new(
        format!("matern(kappa={kappa},nu={nu},d={d},sigma2={sigma2})"),
        move |l: f64| amplitude * (kappa2 + l).powf(-beta),
    );
    Ok(f.with_beta(beta).with_deriv_a(beta + 1.0))
}

/// `Gamma(nu + d/2) (4 pi)^{d/2} kappa^{2 nu} / Gamma(nu)`.
pub fn matern_normalization(kappa: f64, nu: f64, d: usize) -> f64 {
    let df = d as f64;
    (ln_gamma(nu + df / 2.0) - ln_gamma(nu) + (df / 2.0) * (4.0 * std::f64::consts::PI).ln()
        + 2.0 * nu * kappa.ln())
    .exp()
}

/// `gamma = 1 / g` for an SPDE symbol `g`.
///
/// Zero crossings of `g` are detected when the function is sampled at
/// Chebyshev nodes (see [`super::chebyshev_fit`]).
pub fn from_spde_symbol(g: &SpectralFunction) -> SpectralFunction {
    let inner = g.eval.clone();
    SpectralFunction {
        eval: Arc::new(move |l| 1.0 / inner(l)),
        symbol: Some(g.eval.clone()),
        beta: g.beta.map(|b| -b),
        deriv_a: g.beta.map(|b| 1.0 - b),
        label: format!("1/({})", g.label),
    }
}

/// The symbol `g(l) = (kappa^2 + l)^{alpha/2}`.
pub fn fractional_symbol(kappa: f64, alpha: f64) -> SpectralFunction {
    let kappa2 = kappa * kappa;
    SpectralFunction::new(format!("(kappa^2+l)^({alpha}/2), kappa={kappa}"), move |l: f64| {
        (kappa2 + l).powf(alpha / 2.0)
    })
    .with_beta(-alpha / 2.0)
}
