//! P1 finite element matrices for `L = kappa^2 Id - div(a grad)`.
//!
//! Element integrals use closed forms: the mass contribution of a simplex of
//! volume `V` is `V (1 + delta_ij) / ((d + 1)(d + 2))` and the stiffness
//! contribution is `V grad(phi_i) . a grad(phi_j)` with constant gradients.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::SymmetricSparseMatrix;

/// Diffusion coefficient `a` of the operator.
#[derive(Debug, Clone, PartialEq)]
pub enum Diffusion {
    /// `a = I`: the Laplacian (Laplace-Beltrami on surfaces).
    Identity,
    /// No second-order term; `L` reduces to `kappa^2 Id`.
    None,
    /// One tensor for every element, in the element frame.
    Constant([[f64; 2]; 2]),
    /// One tensor per element, in the element frame. The frame is global for
    /// flat meshes and the tangent frame of [`crate::mesh::SimplexGeometry`]
    /// for embedded surfaces.
    PerElement(Vec<[[f64; 2]; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorCoeffs {
    pub kappa2: f64,
    pub diffusion: Diffusion,
}

impl Default for OperatorCoeffs {
    fn default() -> Self {
        OperatorCoeffs {
            kappa2: 0.0,
            diffusion: Diffusion::Identity,
        }
    }
}

impl OperatorCoeffs {
    pub fn laplacian() -> Self {
        Self::default()
    }

    pub fn with_kappa2(kappa2: f64) -> Self {
        OperatorCoeffs {
            kappa2,
            diffusion: Diffusion::Identity,
        }
    }

    fn tensor(&self, e: usize) -> Option<[[f64; 2]; 2]> {
        match &self.diffusion {
            Diffusion::Identity => Some([[1.0, 0.0], [0.0, 1.0]]),
            Diffusion::None => None,
            Diffusion::Constant(a) => Some(*a),
            Diffusion::PerElement(v) => Some(v[e]),
        }
    }

    fn validate(&self, mesh: &Mesh) -> Result<()> {
        if !(self.kappa2 >= 0.0) || !self.kappa2.is_finite() {
            return Err(Error::invalid(format!("kappa^2 = {} must be >= 0", self.kappa2)));
        }
        if let Diffusion::PerElement(v) = &self.diffusion {
            if v.len() != mesh.n_elements() {
                return Err(Error::DimensionMismatch {
                    expected: mesh.n_elements(),
                    got: v.len(),
                });
            }
        }
        for e in 0..mesh.n_elements() {
            if let Some(a) = self.tensor(e) {
                if !is_spd(&a, mesh.dim()) {
                    return Err(Error::NotSpd { element: e });
                }
            }
            if matches!(self.diffusion, Diffusion::Identity | Diffusion::Constant(_)) {
                // one check covers every element
                break;
            }
        }
        Ok(())
    }
}

fn is_spd(a: &[[f64; 2]; 2], dim: usize) -> bool {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return false;
    }
    match dim {
        1 => a[0][0] > 0.0,
        _ => a[0][1] == a[1][0] && a[0][0] > 0.0 && a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0,
    }
}

/// Consistent P1 mass matrix `C_ij = (psi_i, psi_j)`.
pub fn assemble_mass(mesh: &Mesh) -> Result<SymmetricSparseMatrix> {
    let d = mesh.dim();
    let denom = ((d + 1) * (d + 2)) as f64;
    let mut t = Vec::with_capacity(mesh.n_elements() * (d + 1) * (d + 1));
    for (e, elem) in mesh.elements().enumerate() {
        let vol = element_volume(mesh, e)?;
        for (a, &i) in elem.iter().enumerate() {
            for (b, &j) in elem.iter().enumerate() {
                let w = if a == b { 2.0 } else { 1.0 };
                t.push((i, j, vol * w / denom));
            }
        }
    }
    Ok(SymmetricSparseMatrix::from_triplets(mesh.n_vertices(), t))
}

/// Stiffness matrix `G_ij = (a grad psi_i, grad psi_j) + kappa^2 (psi_i, psi_j)`.
pub fn assemble_stiffness(mesh: &Mesh, coeffs: &OperatorCoeffs) -> Result<SymmetricSparseMatrix> {
    coeffs.validate(mesh)?;
    let d = mesh.dim();
    let denom = ((d + 1) * (d + 2)) as f64;
    let mut t = Vec::with_capacity(mesh.n_elements() * (d + 1) * (d + 1));
    for (e, elem) in mesh.elements().enumerate() {
        let geo = mesh.geometry(e);
        let vol = element_volume(mesh, e)?;
        let tensor = coeffs.tensor(e);
        for (a, &i) in elem.iter().enumerate() {
            for (b, &j) in elem.iter().enumerate() {
                let mut v = match &tensor {
                    Some(k) => vol * geo.grad_dot(a, b, k),
                    None => 0.0,
                };
                if coeffs.kappa2 != 0.0 {
                    let w = if a == b { 2.0 } else { 1.0 };
                    v += coeffs.kappa2 * vol * w / denom;
                }
                t.push((i, j, v));
            }
        }
    }
    // Symmetrize the element contributions: grad_dot(a, b) and grad_dot(b, a)
    // may round differently for anisotropic tensors.
    let mut sym = Vec::with_capacity(t.len());
    for &(i, j, v) in &t {
        if i < j {
            sym.push((i, j, v));
            sym.push((j, i, v));
        } else if i == j {
            sym.push((i, j, v));
        }
    }
    Ok(SymmetricSparseMatrix::from_triplets(mesh.n_vertices(), sym))
}

fn element_volume(mesh: &Mesh, e: usize) -> Result<f64> {
    let vol = mesh.geometry(e).volume;
    if vol > 0.0 && vol.is_finite() {
        Ok(vol)
    } else {
        Err(Error::DegenerateElement { element: e, volume: vol })
    }
}

/// Restricts `a` to the interior vertices of `mesh` (Dirichlet elimination).
pub fn apply_dirichlet(a: &SymmetricSparseMatrix, mesh: &Mesh) -> Result<SymmetricSparseMatrix> {
    if a.n() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: a.n(),
        });
    }
    if mesh.boundary_flags().iter().all(|&b| !b) {
        return Ok(a.clone());
    }
    Ok(a.restrict(&mesh.interior_vertices()))
}

/// Row-sum lumped mass `D` and its inverse square root.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedMass {
    pub diag: Vec<f64>,
    pub inv_sqrt: Vec<f64>,
}

impl LumpedMass {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn restrict(&self, keep: &[usize]) -> Self {
        LumpedMass {
            diag: keep.iter().map(|&i| self.diag[i]).collect(),
            inv_sqrt: keep.iter().map(|&i| self.inv_sqrt[i]).collect(),
        }
    }
}

pub fn lump_mass(c: &SymmetricSparseMatrix) -> Result<LumpedMass> {
    let diag = c.row_sums();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveMass { row, value });
    }
    let inv_sqrt = diag.iter().map(|&v| 1.0 / v.sqrt()).collect();
    Ok(LumpedMass { diag, inv_sqrt })
}

/// `S = D^{-1/2} G D^{-1/2}`.
pub fn build_s(lumped: &LumpedMass, g: &SymmetricSparseMatrix) -> Result<SymmetricSparseMatrix> {
    g.scale_symmetric(&lumped.inv_sqrt)
}

/// All matrices for one mesh and operator, restricted to the free degrees of
/// freedom.
///
/// The lumped mass is formed from the full mass matrix before elimination, so
/// that `D_ii = integral of psi_i` for every retained vertex.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// Mesh vertex carried by each degree of freedom.
    pub dofs: Vec<usize>,
    pub n_vertices: usize,
    pub mass: SymmetricSparseMatrix,
    pub stiffness: SymmetricSparseMatrix,
    pub lumped: LumpedMass,
    pub s: SymmetricSparseMatrix,
}

impl Discretization {
    pub fn new(mesh: &Mesh, coeffs: &OperatorCoeffs, dirichlet: bool) -> Result<Self> {
        let c = assemble_mass(mesh)?;
        let g = assemble_stiffness(mesh, coeffs)?;
        let lumped_full = lump_mass(&c)?;
        let dofs: Vec<usize> = if dirichlet {
            mesh.interior_vertices()
        } else {
            (0..mesh.n_vertices()).collect()
        };
        if dofs.is_empty() {
            return Err(Error::invalid("no free degrees of freedom after Dirichlet elimination"));
        }
        let (mass, stiffness, lumped) = if dofs.len() == mesh.n_vertices() {
            (c, g, lumped_full)
        } else {
            (
                apply_dirichlet(&c, mesh)?,
                apply_dirichlet(&g, mesh)?,
                lumped_full.restrict(&dofs),
            )
        };
        let s = build_s(&lumped, &stiffness)?;
        Ok(Discretization {
            dofs,
            n_vertices: mesh.n_vertices(),
            mass,
            stiffness,
            lumped,
            s,
        })
    }

    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    /// Scatters dof values to all mesh vertices, zero on eliminated ones.
    pub fn extend_to_vertices(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for (&v, &x) in self.dofs.iter().zip(z) {
            out[v] = x;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_icosphere_mesh, build_interval_mesh, build_rectangle_mesh, parse_off};
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn interval_mass_entries() {
        let m = build_interval_mesh(0.0, 1.0, 5).unwrap();
        let h = 0.2;
        let c = assemble_mass(&m).unwrap();
        assert!((c.get(2, 3) - h / 6.0).abs() < 1e-15);
        assert!((c.get(2, 2) - 2.0 * h / 3.0).abs() < 1e-15);
        assert!((c.get(0, 0) - h / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mass_partition_of_unity() {
        for mesh in [
            build_interval_mesh(-1.0, 3.0, 9).unwrap(),
            build_rectangle_mesh(2.0, 1.5, 5, 4).unwrap(),
            build_icosphere_mesh(1.3, 2).unwrap(),
        ] {
            let c = assemble_mass(&mesh).unwrap();
            let total: f64 = c.row_sums().iter().sum();
            assert!((total - mesh.measure()).abs() < 1e-12 * mesh.measure());
        }
    }

    #[test]
    fn unit_triangle_element_mass() {
        let mesh = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
        let c = assemble_mass(&mesh).unwrap().to_dense();
        let expected = DMatrix::from_row_slice(3, 3, &[2., 1., 1., 1., 2., 1., 1., 1., 2.]) / 24.0;
        assert!((c - expected).amax() < 1e-16);
    }

    #[test]
    fn interval_element_stiffness() {
        let m = build_interval_mesh(0.0, 1.0, 4).unwrap();
        let g = assemble_stiffness(&m, &OperatorCoeffs::laplacian()).unwrap();
        let h = 0.25;
        assert!((g.get(0, 0) - 1.0 / h).abs() < 1e-13);
        assert!((g.get(0, 1) + 1.0 / h).abs() < 1e-13);
        assert!((g.get(1, 1) - 2.0 / h).abs() < 1e-13);
    }

    #[test]
    fn constants_in_kernel_on_closed_surface() {
        let m = build_icosphere_mesh(1.0, 2).unwrap();
        let g = assemble_stiffness(&m, &OperatorCoeffs::laplacian()).unwrap();
        let mut y = vec![0.0; m.n_vertices()];
        g.matvec(&vec![1.0; m.n_vertices()], &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn reaction_only_operator_is_mass() {
        let m = build_rectangle_mesh(1.0, 2.0, 3, 4).unwrap();
        let coeffs = OperatorCoeffs {
            kappa2: 1.0,
            diffusion: Diffusion::None,
        };
        let g = assemble_stiffness(&m, &coeffs).unwrap();
        let c = assemble_mass(&m).unwrap();
        assert!((g.to_dense() - c.to_dense()).amax() < 1e-16);
    }

    #[test]
    fn rejects_indefinite_diffusion() {
        let m = build_rectangle_mesh(1.0, 1.0, 2, 2).unwrap();
        let coeffs = OperatorCoeffs {
            kappa2: 0.0,
            diffusion: Diffusion::Constant([[1.0, 2.0], [2.0, 1.0]]),
        };
        assert!(matches!(assemble_stiffness(&m, &coeffs), Err(Error::NotSpd { .. })));
        let coeffs = OperatorCoeffs {
            kappa2: -1.0,
            diffusion: Diffusion::Identity,
        };
        assert!(assemble_stiffness(&m, &coeffs).is_err());
    }

    #[test]
    fn anisotropic_stiffness_is_symmetric_psd() {
        let m = build_rectangle_mesh(1.0, 1.0, 6, 5).unwrap();
        let tensors = (0..m.n_elements())
            .map(|e| {
                let t = e as f64 * 0.1;
                [[2.0 + t.sin(), 0.3 * t.cos()], [0.3 * t.cos(), 1.0]]
            })
            .collect();
        let g = assemble_stiffness(
            &m,
            &OperatorCoeffs {
                kappa2: 0.0,
                diffusion: Diffusion::PerElement(tensors),
            },
        )
        .unwrap();
        assert_eq!(g.asymmetry(), 0.0);
        let eig = SymmetricEigen::new(g.to_dense()).eigenvalues;
        assert!(eig.min() > -1e-12);
    }

    #[test]
    fn dirichlet_shapes() {
        let m = build_interval_mesh(0.0, 1.0, 4).unwrap();
        let c = assemble_mass(&m).unwrap();
        assert_eq!(apply_dirichlet(&c, &m).unwrap().n(), 3);
        let s = build_icosphere_mesh(1.0, 1).unwrap();
        let cs = assemble_mass(&s).unwrap();
        assert_eq!(apply_dirichlet(&cs, &s).unwrap(), cs);
        assert!(apply_dirichlet(&cs, &m).is_err());
    }

    #[test]
    fn lumped_interior_entry_and_total() {
        let m = build_interval_mesh(0.0, 2.0, 8).unwrap();
        let l = lump_mass(&assemble_mass(&m).unwrap()).unwrap();
        assert!((l.diag[3] - 0.25).abs() < 1e-15);
        assert!((l.diag.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for (d, s) in l.diag.iter().zip(&l.inv_sqrt) {
            assert!((s * s * d - 1.0).abs() < 1e-14);
        }
        let scaled = SymmetricSparseMatrix::from_diagonal(&[4.0; 3]);
        assert_eq!(lump_mass(&scaled).unwrap().inv_sqrt, vec![0.5; 3]);
        let bad = SymmetricSparseMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(lump_mass(&bad), Err(Error::NonPositiveMass { row: 1, .. })));
    }

    #[test]
    fn s_edge_cases() {
        let g = SymmetricSparseMatrix::zeros(3);
        let unit = LumpedMass {
            diag: vec![1.0; 3],
            inv_sqrt: vec![1.0; 3],
        };
        assert_eq!(build_s(&unit, &g).unwrap().nnz(), 0);
        let m = build_interval_mesh(0.0, 1.0, 2).unwrap();
        let g = assemble_stiffness(&m, &OperatorCoeffs::laplacian()).unwrap();
        assert_eq!(build_s(&unit, &g).unwrap(), g);
        let short = LumpedMass {
            diag: vec![1.0],
            inv_sqrt: vec![1.0],
        };
        assert!(build_s(&short, &g).is_err());
    }

    fn sorted_eigenvalues(a: DMatrix<f64>) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn dirichlet_laplacian_eigenvalues_on_interval() {
        let m = build_interval_mesh(0.0, PI, 100).unwrap();
        let disc = Discretization::new(&m, &OperatorCoeffs::laplacian(), true).unwrap();
        let eig = sorted_eigenvalues(disc.s.to_dense());
        let h = PI / 100.0;
        for j in 1..=5 {
            let jf = j as f64;
            let dispersion = 4.0 / (h * h) * (jf * h / 2.0).sin().powi(2);
            assert!((eig[j - 1] - dispersion).abs() < 1e-9 * dispersion);
            assert!((eig[j - 1] - jf * jf).abs() < 0.01 * jf * jf);
        }
        assert!((eig[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn s_spectrum_nonnegative() {
        for mesh in [
            build_rectangle_mesh(1.0, 1.0, 8, 8).unwrap(),
            build_icosphere_mesh(1.0, 2).unwrap(),
        ] {
            let disc = Discretization::new(&mesh, &OperatorCoeffs::laplacian(), false).unwrap();
            assert!(disc.n() <= 300);
            assert!(sorted_eigenvalues(disc.s.to_dense())[0] >= -1e-10);
        }
    }

    #[test]
    fn mass_pd_and_stiffness_psd_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = build_rectangle_mesh(1.0, 1.0, 7, 6).unwrap();
        let c = assemble_mass(&m).unwrap();
        let g = assemble_stiffness(&m, &OperatorCoeffs::laplacian()).unwrap();
        let n = m.n_vertices();
        let (mut cv, mut gv) = (vec![0.0; n], vec![0.0; n]);
        for _ in 0..50 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            c.matvec(&v, &mut cv);
            g.matvec(&v, &mut gv);
            let vv: f64 = v.iter().map(|x| x * x).sum();
            assert!(v.iter().zip(&cv).map(|(a, b)| a * b).sum::<f64>() > 0.0);
            assert!(v.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>() >= -1e-12 * vv);
        }
    }

    #[test]
    fn lumping_defect_shrinks_under_refinement() {
        // |v^T D^-1/2 C D^-1/2 v - v^T v| / |v|^2 over random v
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut last = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let m = build_interval_mesh(0.0, PI, n).unwrap();
            let disc = Discretization::new(&m, &OperatorCoeffs::laplacian(), true).unwrap();
            let k = disc.n();
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                // smooth random combination of low modes
                let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..k)
                    .map(|i| {
                        let x = m.vertex(disc.dofs[i])[0];
                        (1..=3).map(|j| a[j - 1] * (j as f64 * x).sin()).sum::<f64>()
                    })
                    .collect();
                let u: Vec<f64> = v.iter().zip(&disc.lumped.inv_sqrt).map(|(a, b)| a * b).collect();
                let mut cu = vec![0.0; k];
                disc.mass.matvec(&u, &mut cu);
                let quad: f64 = u.iter().zip(&cu).map(|(a, b)| a * b).sum();
                let vv: f64 = v.iter().map(|x| x * x).sum();
                worst = worst.max((quad - vv).abs() / vv);
            }
            assert!(worst < last, "lumping defect {worst} did not shrink below {last}");
            last = worst;
        }
    }

    #[test]
    fn square_dirichlet_eigenvalues_converge() {
        // lowest modes of -Laplacian on [0, pi]^2 are 2, 5, 5
        let exact = [2.0, 5.0, 5.0];
        let mut last = f64::INFINITY;
        for n in [6, 12, 18] {
            let m = build_rectangle_mesh(PI, PI, n, n).unwrap();
            let disc = Discretization::new(&m, &OperatorCoeffs::laplacian(), true).unwrap();
            let eig = sorted_eigenvalues(disc.s.to_dense());
            let err = exact.iter().zip(&eig).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
        assert!(last < 0.1);
    }
}
