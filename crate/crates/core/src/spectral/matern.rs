use statrs::function::gamma::ln_gamma;

/// Modified Bessel function of the second kind `K_nu(x)`, `x > 0`, from
/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`.
///
/// The trapezoidal rule converges geometrically for this integrand; the
/// factor `exp(-x)` is pulled out so the sum stays in range for large `x`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k needs x > 0");
    let step = 0.01;
    let mut sum = 0.5; // t = 0 term, halved
    let mut k = 1;
    loop {
        let t = step * k as f64;
        let term = (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-18 * sum || k > 1_000_000 {
            break;
        }
        k += 1;
    }
    sum * step * (-x).exp()
}

/// Matern correlation `2^{1-nu} / Gamma(nu) (kappa r)^nu K_nu(kappa r)`.
pub fn matern_correlation(r: f64, kappa: f64, nu: f64) -> f64 {
    let x = kappa * r.abs();
    if x == 0.0 {
        return 1.0;
    }
    let log_pref = (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) + nu * x.ln();
    log_pref.exp() * bessel_k(nu, x)
}

pub fn matern_covariance(r: f64, kappa: f64, nu: f64, sigma2: f64) -> f64 {
    sigma2 * matern_correlation(r, kappa, nu)
}

/// Distance at which the Matern correlation falls to 0.05.
pub fn practical_range(kappa: f64, nu: f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0 / kappa);
    while matern_correlation(b, kappa, nu) > 0.05 {
        b *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if matern_correlation(m, kappa, nu) > 0.05 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-14 * b {
            break;
        }
    }
    0.5 * (a + b)
}
