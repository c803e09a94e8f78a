/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Points and weights on a triangle from a collapsed tensor Gauss rule of
/// `q x q` points. Points are given as barycentric pairs `(l1, l2)`; the
/// weights sum to one (multiply by the area).
pub(crate) fn triangle_rule(q: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre(q);
    let mut out = Vec::with_capacity(q * q);
    for (xi, wi) in x.iter().zip(&w) {
        let u = 0.5 * (xi + 1.0);
        for (xj, wj) in x.iter().zip(&w) {
            let v = 0.5 * (xj + 1.0);
            // (u, v) in the square -> (u, (1 - u) v) in the triangle
            let l1 = u;
            let l2 = (1.0 - u) * v;
            out.push(([1.0 - l1 - l2, l1, l2], 0.5 * wi * wj * (1.0 - u)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn two_point_rule() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15 && (x[0] + x[1]).abs() < 1e-15);
        assert!(w.iter().all(|w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn triangle_moments() {
        // int over reference triangle of l1^a l2^b = a! b! / (a + b + 2)!, area 1/2
        let rule = triangle_rule(6);
        let area_fraction: f64 = rule.iter().map(|r| r.1).sum();
        assert!((area_fraction - 1.0).abs() < 1e-14);
        let m: f64 = rule.iter().map(|(l, w)| w * l[1] * l[1] * l[2]).sum();
        // 2! 1! / 5! = 1/60, divided by area 1/2
        assert!((m - 2.0 / 60.0).abs() < 1e-14);
    }
}
