//! Shifted Chebyshev expansions of spectral functions and their action on
//! sparse symmetric matrices.
//!
//! Convention: `P(l) = c_0 / 2 + sum_{k>=1} c_k T_k(t)` with
//! `t = (2 l - lo - hi) / (hi - lo)`. The coefficients come from the DCT-II
//! of `gamma` sampled at the `K + 1` Chebyshev-Gauss nodes, so `P`
//! interpolates `gamma` at those nodes.

use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{gershgorin_bound, SpectralFunction, SpectralInterval};
use crate::error::{Error, Result};
use crate::sparse::SymmetricSparseMatrix;

/// Orders below this use the direct O(K^2) transform.
const FFT_THRESHOLD: usize = 64;

/// Largest order tried by [`choose_order`].
pub const MAX_ORDER: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevExpansion {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl ChebyshevExpansion {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn interval(&self) -> SpectralInterval {
        SpectralInterval {
            lo: self.lo,
            hi: self.hi,
        }
    }

    fn to_unit(&self, lambda: f64) -> f64 {
        (2.0 * lambda - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation at `lambda`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let t = self.to_unit(lambda);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + 0.5 * self.coeffs[0]
    }

    /// Term-by-term summation with `T_k(t) = cos(k acos t)`; `t` clamped to
    /// `[-1, 1]`.
    pub fn eval_direct(&self, lambda: f64) -> f64 {
        let theta = self.to_unit(lambda).clamp(-1.0, 1.0).acos();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let w = if k == 0 { 0.5 } else { 1.0 };
                w * c * (k as f64 * theta).cos()
            })
            .sum()
    }

    /// `|c_K|`, the magnitude of the last retained coefficient.
    pub fn tail_magnitude(&self) -> f64 {
        self.coeffs.last().map_or(0.0, |c| c.abs())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Chebyshev coefficients of `gamma` on `interval` up to order `k`.
pub fn chebyshev_fit(
    gamma: &SpectralFunction,
    interval: SpectralInterval,
    k: usize,
) -> Result<ChebyshevExpansion> {
    let SpectralInterval { lo, hi } = interval;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    let n = k + 1;
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let nodes: Vec<f64> = (0..n)
        .map(|j| mid + half * (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
        .collect();
    if let Some(g) = gamma.symbol() {
        let signs: Vec<f64> = nodes.iter().map(|&l| g(l)).collect();
        let positive = signs[0] > 0.0;
        if signs.iter().any(|&s| s == 0.0 || !s.is_finite() || (s > 0.0) != positive) {
            return Err(Error::SymbolZeroCrossing { lo, hi });
        }
    }
    let values: Vec<f64> = nodes.iter().map(|&l| gamma.eval(l)).collect();
    if let Some((j, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteSpectral { lambda: nodes[j] });
    }
    let mut coeffs = if n < FFT_THRESHOLD + 1 {
        dct2_direct(&values)
    } else {
        dct2_fft(&values)
    };
    let scale = 2.0 / n as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    Ok(ChebyshevExpansion { lo, hi, coeffs })
}

/// `y_k = sum_j x_j cos(pi k (2j + 1) / (2N))`.
pub(crate) fn dct2_direct(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    v * (std::f64::consts::PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64).cos()
                })
                .sum()
        })
        .collect()
}

/// Same transform through one complex FFT of length `N` (Makhoul's
/// even/odd reordering).
pub(crate) fn dct2_fft(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut v = vec![Complex::new(0.0, 0.0); n];
    for j in 0..n.div_ceil(2) {
        v[j].re = x[2 * j];
    }
    for j in 0..n / 2 {
        v[n - 1 - j].re = x[2 * j + 1];
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut v);
    (0..n)
        .map(|k| {
            let phase = -std::f64::consts::PI * k as f64 / (2 * n) as f64;
            (Complex::from_polar(1.0, phase) * v[k]).re
        })
        .collect()
}

/// Outcome of [`choose_order`], with the full search path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderChoice {
    pub order: usize,
    /// Sup-error on the dense grid at the chosen order.
    pub achieved: f64,
    /// `tol * max(1, max |gamma|)`.
    pub target: f64,
    /// `(K, sup-error)` for every order tried.
    pub path: Vec<(usize, f64)>,
}

/// Smallest `K` in `16, 32, ..., 2^15` whose expansion meets
/// `max |gamma - P_K| <= tol * max(1, max |gamma|)` on a uniform grid of
/// `10 (K + 1)` points.
pub fn choose_order(
    gamma: &SpectralFunction,
    interval: SpectralInterval,
    tol: f64,
) -> Result<OrderChoice> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance {tol} must be positive and finite")));
    }
    let mut path = Vec::new();
    let mut k = 16;
    loop {
        let exp = chebyshev_fit(gamma, interval, k)?;
        let m = 10 * (k + 1);
        let (mut err, mut sup): (f64, f64) = (0.0, 0.0);
        for i in 0..m {
            let l = interval.lo + (interval.hi - interval.lo) * i as f64 / (m - 1) as f64;
            let g = gamma.eval(l);
            if !g.is_finite() {
                return Err(Error::NonFiniteSpectral { lambda: l });
            }
            sup = sup.max(g.abs());
            err = err.max((g - exp.eval(l)).abs());
        }
        let target = tol * sup.max(1.0);
        path.push((k, err));
        if err <= target {
            return Ok(OrderChoice {
                order: k,
                achieved: err,
                target,
                path,
            });
        }
        if k >= MAX_ORDER {
            return Err(Error::OrderCapReached {
                cap: MAX_ORDER,
                achieved: err,
                target,
            });
        }
        k *= 2;
    }
}

/// A validated pairing of a matrix with an expansion whose interval encloses
/// the Gershgorin bound of the matrix.
#[derive(Debug, Clone, Copy)]
pub struct ChebyshevOperator<'a> {
    s: &'a SymmetricSparseMatrix,
    exp: &'a ChebyshevExpansion,
}

impl<'a> ChebyshevOperator<'a> {
    pub fn new(s: &'a SymmetricSparseMatrix, exp: &'a ChebyshevExpansion) -> Result<Self> {
        let g = gershgorin_bound(s);
        let slack = 1e-12 * exp.hi.abs().max(exp.lo.abs()).max(1.0);
        if g.lo < exp.lo - slack || g.hi > exp.hi + slack {
            return Err(Error::IntervalMismatch {
                lo: exp.lo,
                hi: exp.hi,
                spec_lo: g.lo,
                spec_hi: g.hi,
            });
        }
        Ok(ChebyshevOperator { s, exp })
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn order(&self) -> usize {
        self.exp.order()
    }

    /// `P(S) v` by the three-term recurrence; exactly `K` products with `S`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.s.n() {
            return Err(Error::DimensionMismatch {
                expected: self.s.n(),
                got: v.len(),
            });
        }
        Ok(self.apply_block(v, 1))
    }

    /// `P(S) X` for `width` row-interleaved vectors (see
    /// [`SymmetricSparseMatrix::matvec_block`]).
    pub fn apply_block(&self, x: &[f64], width: usize) -> Vec<f64> {
        let c = &self.exp.coeffs;
        let len = x.len();
        debug_assert_eq!(len, self.s.n() * width);
        let alpha = 2.0 / (self.exp.hi - self.exp.lo);
        let beta = -(self.exp.hi + self.exp.lo) / (self.exp.hi - self.exp.lo);

        let mut out: Vec<f64> = x.iter().map(|v| 0.5 * c[0] * v).collect();
        if c.len() == 1 {
            return out;
        }
        let mut prev = x.to_vec();
        let mut cur = vec![0.0; len];
        self.s.matvec_block(&prev, &mut cur, width);
        for (t, &p) in cur.iter_mut().zip(&prev) {
            *t = alpha * *t + beta * p;
        }
        axpy(c[1], &cur, &mut out);

        let mut next = vec![0.0; len];
        for &ck in &c[2..] {
            self.s.matvec_block(&cur, &mut next, width);
            for ((t, &u), &p) in next.iter_mut().zip(&cur).zip(&prev) {
                *t = 2.0 * (alpha * *t + beta * u) - p;
            }
            axpy(ck, &next, &mut out);
            // rotate: prev <- cur <- next
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        out
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    if a == 0.0 {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `P(S) v` for an expansion `P` whose interval encloses the spectrum of `S`.
pub fn apply_chebyshev(
    s: &SymmetricSparseMatrix,
    exp: &ChebyshevExpansion,
    v: &[f64],
) -> Result<Vec<f64>> {
    ChebyshevOperator::new(s, exp)?.apply(v)
}
