use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use sfield::fem::{Discretization, OperatorCoeffs};
use sfield::mesh::{build_icosphere_mesh, build_interval_mesh, build_rectangle_mesh};
use sfield::sampler::{ChebyshevSampler, SamplerConfig};
use sfield::sparse::SymmetricSparseMatrix;
use sfield::spectral::{
    chebyshev_fit, choose_order, gershgorin_bound, matern_spectral, ChebyshevExpansion, ChebyshevOperator,
    SpectralInterval,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn rect_s(nx: usize, ny: usize) -> SymmetricSparseMatrix {
    let mesh = build_rectangle_mesh(PI, 2.0, nx, ny).unwrap();
    Discretization::new(&mesh, &OperatorCoeffs::laplacian(), true).unwrap().s
}

fn fit_for(s: &SymmetricSparseMatrix, kappa: f64) -> ChebyshevExpansion {
    let gamma = matern_spectral(kappa, 1.0, 2, 1.0).unwrap();
    let interval = gershgorin_bound(s).widened();
    let k = choose_order(&gamma, interval, 1e-8).unwrap().order;
    chebyshev_fit(&gamma, interval, k).unwrap()
}

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

/// Random sparse symmetric matrix with a few off-diagonal couplings per row.
fn sparse_symmetric() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec((0..n, 0..n, -2.0..2.0f64), 0..3 * n),
        )
            .prop_map(move |(diag, off)| {
                let mut a = DMatrix::from_diagonal(&diag.into());
                for (i, j, v) in off {
                    if i != j {
                        a[(i, j)] += v;
                        a[(j, i)] += v;
                    }
                }
                a
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chebyshev_apply_is_linear(
        (nx, ny) in (3usize..9, 3usize..9),
        kappa in 0.5..10.0f64,
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
        seed_vectors in (vector(64), vector(64)),
    ) {
        let s = rect_s(nx, ny);
        let exp = fit_for(&s, kappa);
        let op = ChebyshevOperator::new(&s, &exp).unwrap();
        let n = s.n();
        let (u, v) = (&seed_vectors.0[..n], &seed_vectors.1[..n]);
        let combo: Vec<f64> = u.iter().zip(v).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = op.apply(&combo).unwrap();
        let (pu, pv) = (op.apply(u).unwrap(), op.apply(v).unwrap());
        let rhs: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| alpha * a + beta * b).collect();
        let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let scale = alpha.abs() * norm(&pu) + beta.abs() * norm(&pv);
        prop_assert!(norm(&diff) <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn chebyshev_apply_is_symmetric(
        (nx, ny) in (3usize..9, 3usize..9),
        kappa in 0.5..10.0f64,
        seed_vectors in (vector(64), vector(64)),
    ) {
        let s = rect_s(nx, ny);
        let exp = fit_for(&s, kappa);
        let op = ChebyshevOperator::new(&s, &exp).unwrap();
        let n = s.n();
        let (u, v) = (&seed_vectors.0[..n], &seed_vectors.1[..n]);
        let (pu, pv) = (op.apply(u).unwrap(), op.apply(v).unwrap());
        let (a, b) = (dot(u, &pv), dot(v, &pu));
        prop_assert!((a - b).abs() <= 1e-10 * (norm(u) * norm(&pv)).max(1e-300));
    }

    #[test]
    fn diagonal_matrices_map_entrywise(
        diag in prop::collection::vec(0.0..100.0f64, 1..40),
        kappa in 0.5..10.0f64,
    ) {
        let s = SymmetricSparseMatrix::from_diagonal(&diag);
        let exp = fit_for(&s, kappa);
        let op = ChebyshevOperator::new(&s, &exp).unwrap();
        let v: Vec<f64> = (0..diag.len()).map(|i| 1.0 + i as f64).collect();
        let out = op.apply(&v).unwrap();
        for ((d, x), y) in diag.iter().zip(&v).zip(&out) {
            prop_assert!((exp.eval(*d) * x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn gershgorin_encloses_the_spectrum(a in sparse_symmetric()) {
        let s = SymmetricSparseMatrix::from_dense(&a);
        let SpectralInterval { lo, hi } = gershgorin_bound(&s);
        let eig = SymmetricEigen::new(a).eigenvalues;
        let max = eig.max();
        prop_assert!(max <= hi + 1e-12 * hi.abs().max(1.0));
        // the lower end is clamped at zero for semi-definite operators
        let min = eig.min();
        prop_assert!(min >= lo - 1e-12 * lo.abs().max(1.0) || lo == 0.0);
    }

    #[test]
    fn order_search_error_never_increases(
        kappa in 0.3..20.0f64,
        nu in 0.5..3.0f64,
        hi in 10.0..1e4f64,
        log_tol in -10.0..-3.0f64,
    ) {
        let gamma = matern_spectral(kappa, nu, 2, 1.0).unwrap();
        let choice = choose_order(&gamma, SpectralInterval { lo: 0.0, hi }, 10f64.powf(log_tol)).unwrap();
        for w in choice.path.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-15, "{:?}", choice.path);
        }
        prop_assert!(choice.achieved <= choice.target);
    }

    #[test]
    fn element_measures_sum_to_domain(
        a in -5.0..5.0f64,
        len in 0.1..10.0f64,
        cells in 2usize..200,
        (lx, ly) in (0.1..10.0f64, 0.1..10.0f64),
        (nx, ny) in (2usize..30, 2usize..30),
    ) {
        let line = build_interval_mesh(a, a + len, cells).unwrap();
        prop_assert!((line.measure() - len).abs() <= 1e-12 * len);
        let rect = build_rectangle_mesh(lx, ly, nx, ny).unwrap();
        prop_assert!((rect.measure() - lx * ly).abs() <= 1e-12 * lx * ly);
        prop_assert_eq!(rect.stats().n_interior, (nx - 1) * (ny - 1));
    }

    #[test]
    fn mass_rows_partition_the_measure(
        (lx, ly) in (0.1..5.0f64, 0.1..5.0f64),
        (nx, ny) in (2usize..12, 2usize..12),
    ) {
        let mesh = build_rectangle_mesh(lx, ly, nx, ny).unwrap();
        let disc = Discretization::new(&mesh, &OperatorCoeffs::laplacian(), false).unwrap();
        let total: f64 = disc.mass.row_sums().iter().sum();
        prop_assert!((total - lx * ly).abs() <= 1e-12 * lx * ly);
        prop_assert!(disc.stiffness.row_sums().iter().all(|r| r.abs() <= 1e-10 * (1.0 + lx / ly + ly / lx)));
    }

    #[test]
    fn smaller_batches_are_prefixes(seed in any::<u64>(), short in 1usize..70, extra in 1usize..70) {
        let mesh = build_interval_mesh(0.0, PI, 12).unwrap();
        let disc = Discretization::new(&mesh, &OperatorCoeffs::laplacian(), true).unwrap();
        let gamma = matern_spectral(3.0, 1.0, 1, 1.0).unwrap();
        let sampler = ChebyshevSampler::new(&disc.s, &disc.lumped, &gamma, 1e-8).unwrap();
        let a = sampler.sample(&SamplerConfig::new(seed, short, 1e-8)).unwrap();
        let b = sampler.sample(&SamplerConfig::new(seed, short + extra, 1e-8)).unwrap();
        prop_assert_eq!(a.weights, b.weights.columns(0, short).into_owned());
    }
}

#[test]
fn sphere_area_grows_toward_the_sphere() {
    let areas: Vec<f64> = (0..5).map(|k| build_icosphere_mesh(1.0, k).unwrap().measure()).collect();
    assert!(areas.windows(2).all(|w| w[0] < w[1]));
    assert!(areas.iter().all(|&a| a <= 4.0 * PI));
    assert!((4.0 * PI - areas[4]) / (4.0 * PI) < 0.01);
}
