use super::{AnalyticSpectrum, ConvergenceReport};
use crate::error::{Error, Result};
use crate::spectral::SpectralFunction;

/// Number of analytic modes summed explicitly.
pub const TAIL_CUTOFF: usize = 1_000_000;

/// Tail sums `T(N) = sum_{j > N} gamma(lambda_j)^2` over a spectrum, with the
/// part beyond the last mode estimated from the decay of the last terms.
#[derive(Debug, Clone)]
pub struct TailSums {
    /// `suffix[n]` is the explicit sum over modes `n + 1 ..= len`.
    suffix: Vec<f64>,
    /// Estimate of the sum beyond the last mode.
    pub remainder: f64,
    /// Spread between two remainder estimates from different blocks.
    pub remainder_spread: f64,
}

impl TailSums {
    /// `T(n)`, including the remainder estimate.
    pub fn tail(&self, n: usize) -> f64 {
        self.suffix[n.min(self.suffix.len() - 1)] + self.remainder
    }

    pub fn n_modes(&self) -> usize {
        self.suffix.len() - 1
    }
}

pub fn tail_sums(gamma: &SpectralFunction, spectrum: &AnalyticSpectrum) -> Result<TailSums> {
    let terms: Vec<f64> = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| {
            let g = gamma.eval(l);
            if g.is_finite() {
                Ok(g * g)
            } else {
                Err(Error::NonFiniteSpectral { lambda: l })
            }
        })
        .collect::<Result<_>>()?;
    let c = terms.len();
    let mut suffix = vec![0.0; c + 1];
    for j in (0..c).rev() {
        suffix[j] = suffix[j + 1] + terms[j];
    }
    // dyadic blocks (c/8, c/4], (c/4, c/2], (c/2, c]; for terms ~ j^-p the
    // block ratio is r = 2^(1-p) and the tail past c is about B2 r / (1 - r)
    let block = |lo: usize, hi: usize| suffix[lo] - suffix[hi];
    let (b0, b1, b2) = (block(c / 8, c / 4), block(c / 4, c / 2), block(c / 2, c));
    let (remainder, remainder_spread) = if b2 == 0.0 {
        (0.0, 0.0)
    } else if c < 64 || b1 == 0.0 || b0 == 0.0 {
        return Err(Error::NonConvergentTail { cutoff: c });
    } else {
        let estimate = |r: f64| -> Result<f64> {
            if r >= 1.0 {
                Err(Error::NonConvergentTail { cutoff: c })
            } else {
                Ok(b2 * r / (1.0 - r))
            }
        };
        let near = estimate(b2 / b1)?;
        let far = estimate(b1 / b0)?;
        (near, (near - far).abs())
    };
    Ok(TailSums {
        suffix,
        remainder,
        remainder_spread,
    })
}

/// `T(N)` at each requested `N` with the log-log slope against `N`.
///
/// References: `-(2 alpha beta - 1)` with `alpha` the growth exponent of the
/// ordered spectrum and, for the box, also with `alpha = d/2`.
pub fn truncation_tail(
    gamma: &SpectralFunction,
    spectrum: &AnalyticSpectrum,
    ns: &[usize],
) -> Result<ConvergenceReport> {
    if ns.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 truncation levels, got {}", ns.len())));
    }
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n >= spectrum.len()) {
        return Err(Error::invalid(format!(
            "truncation level {n} must lie in 1..{}",
            spectrum.len()
        )));
    }
    let sums = tail_sums(gamma, spectrum)?;
    let values: Vec<f64> = ns.iter().map(|&n| sums.tail(n)).collect();
    let smallest = values.iter().cloned().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    if smallest.is_finite() && sums.remainder_spread > 1e-6 * smallest {
        return Err(Error::NonConvergentTail {
            cutoff: spectrum.len(),
        });
    }
    let mut report = ConvergenceReport::new(
        format!("truncation tail of {}", gamma.label),
        "N",
        ns.iter().map(|&n| n as f64).collect(),
        values,
    )?;
    if let Some(beta) = gamma.beta {
        let alpha = spectrum.growth_exponent();
        report = report.with_reference(format!("alpha = {alpha} (ordered spectrum)"), -(2.0 * alpha * beta - 1.0));
        if let Some(d) = spectrum.dim() {
            let half = d as f64 / 2.0;
            report = report.with_reference(format!("alpha = d/2 = {half}"), -(2.0 * half * beta - 1.0));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NS: [usize; 6] = [10, 20, 40, 80, 160, 320];

    #[test]
    fn harmonic_tail() {
        // lambda_j = j, gamma = 1/lambda: T(N) = sum_{j>N} j^-2 ~ 1/N
        let s = AnalyticSpectrum::power_law(1.0, TAIL_CUTOFF).unwrap();
        let r = truncation_tail(&SpectralFunction::power(1.0, 1.0), &s, &NS).unwrap();
        assert!((r.slope.unwrap() + 1.0).abs() < 0.02, "{:?}", r.slope);
        // trigamma(11) = sum_{j>10} j^-2
        assert!((r.errors[0] - 0.095_166_335_681_685_6).abs() < 1e-11);
        assert_eq!(r.references[0].exponent, -1.0);
    }

    #[test]
    fn p_series_in_one_dimension() {
        let s = AnalyticSpectrum::dirichlet_box(1, TAIL_CUTOFF).unwrap();
        let r = truncation_tail(&SpectralFunction::power(1.0, 1.0), &s, &NS).unwrap();
        assert!((r.slope.unwrap() + 3.0).abs() < 0.15 * 3.0);
        assert_eq!(r.references[0].exponent, -3.0);
        assert_eq!(r.references[1].exponent, 0.0);
    }

    #[test]
    fn compact_support_gives_zero_tail() {
        let s = AnalyticSpectrum::dirichlet_box(1, 10_000).unwrap();
        let g = SpectralFunction::new("bump", |l: f64| if l <= 100.0 { 1.0 } else { 0.0 });
        let r = truncation_tail(&g, &s, &[10, 20, 40, 80]).unwrap();
        assert_eq!(r.errors, vec![0.0; 4]);
        assert_eq!(r.slope, None);
        let sums = tail_sums(&g, &s).unwrap();
        assert_eq!(sums.tail(9), 1.0);
    }

    #[test]
    fn remainder_matches_known_tail() {
        // sum_{j > 1000} j^-2 = 1/1000 - 1/(2 1000^2) + ...; the block
        // estimate is good to O(1/c) relative
        let s = AnalyticSpectrum::power_law(1.0, 1000).unwrap();
        let sums = tail_sums(&SpectralFunction::power(1.0, 1.0), &s).unwrap();
        assert!((sums.remainder - 9.995e-4).abs() < 5e-3 * 9.995e-4);
    }

    #[test]
    fn slow_tails_are_rejected() {
        let s = AnalyticSpectrum::power_law(1.0, 100_000).unwrap();
        let g = SpectralFunction::power(1.0, 0.5);
        assert!(matches!(
            truncation_tail(&g, &s, &[10, 20, 40, 80]),
            Err(Error::NonConvergentTail { .. })
        ));
        assert!(truncation_tail(&g, &s, &[10, 20, 40]).is_err());
        assert!(truncation_tail(&g, &s, &[10, 20, 40, 100_000]).is_err());
    }
}
