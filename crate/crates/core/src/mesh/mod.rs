//! Simplicial meshes of intervals, planar polygons and embedded surfaces.
//!
//! A [`Mesh`] stores vertex coordinates padded to three components, a flat
//! element connectivity array with `dim + 1` indices per element, and a
//! per-vertex boundary flag. Boundary flags are derived from topology only: a
//! vertex is on the boundary iff it belongs to a facet that is shared by
//! exactly one element.

mod build;
mod geometry;
mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use build::{build_icosphere_mesh, build_interval_mesh, build_rectangle_mesh};
pub use geometry::{closest_point_on_simplex, SimplexGeometry};
pub use io::{load_mesh, parse_node_element, parse_off, MeshFormat};

/// Simplicial P1 mesh. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    embed_dim: usize,
    vertices: Vec<[f64; 3]>,
    elements: Vec<usize>,
    boundary: Vec<bool>,
}

/// Summary quantities used by the convergence analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    /// Largest edge length.
    pub h: f64,
    pub n_vertices: usize,
    pub n_elements: usize,
    pub n_interior: usize,
}

impl Mesh {
    /// Validates connectivity and geometry, then derives boundary flags.
    ///
    /// `vertices` carry `embed_dim` meaningful coordinates; unused trailing
    /// components must be zero.
    pub fn new(
        dim: usize,
        embed_dim: usize,
        vertices: Vec<[f64; 3]>,
        elements: Vec<usize>,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::invalid(format!("intrinsic dimension {dim} not in {{1, 2}}")));
        }
        if !(dim..=3).contains(&embed_dim) {
            return Err(Error::invalid(format!(
                "ambient dimension {embed_dim} must satisfy {dim} <= m <= 3"
            )));
        }
        let nv = dim + 1;
        if !elements.len().is_multiple_of(nv) {
            return Err(Error::invalid("connectivity length is not a multiple of dim + 1"));
        }
        if elements.is_empty() {
            return Err(Error::invalid("mesh has no elements"));
        }
        if let Some(bad) = vertices.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::invalid(format!("vertex {bad} has a non-finite coordinate")));
        }
        for (e, elem) in elements.chunks_exact(nv).enumerate() {
            if let Some(&index) = elem.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::DanglingIndex {
                    element: e,
                    index,
                    n_vertices: vertices.len(),
                });
            }
        }
        let mut mesh = Mesh {
            dim,
            embed_dim,
            vertices,
            elements,
            boundary: Vec::new(),
        };
        for e in 0..mesh.n_elements() {
            let geo = mesh.geometry(e);
            let scale = mesh.element_max_edge(e).powi(dim as i32);
            if !(geo.volume > 1e-12 * scale) {
                return Err(Error::DegenerateElement {
                    element: e,
                    volume: geo.volume,
                });
            }
        }
        mesh.boundary = mesh.detect_boundary()?;
        Ok(mesh)
    }

    fn detect_boundary(&self) -> Result<Vec<bool>> {
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for elem in self.elements() {
            for skip in 0..elem.len() {
                let mut facet: Vec<usize> = elem
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                facet.sort_unstable();
                *facets.entry(facet).or_insert(0) += 1;
            }
        }
        let mut boundary = vec![false; self.vertices.len()];
        for (facet, count) in facets {
            match count {
                1 => facet.iter().for_each(|&v| boundary[v] = true),
                2 => {}
                _ => return Err(Error::NonManifold { facet, count }),
            }
        }
        Ok(boundary)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64; 3] {
        &self.vertices[i]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elements[e * nv..(e + 1) * nv]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.elements.chunks_exact(self.dim + 1)
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    /// Indices of vertices that are not on the boundary, ascending.
    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&i| !self.boundary[i]).collect()
    }

    pub fn geometry(&self, e: usize) -> SimplexGeometry {
        let pts: Vec<[f64; 3]> = self.element(e).iter().map(|&i| self.vertices[i]).collect();
        SimplexGeometry::new(&pts, self.embed_dim)
    }

    fn element_max_edge(&self, e: usize) -> f64 {
        let elem = self.element(e);
        let mut h: f64 = 0.0;
        for a in 0..elem.len() {
            for b in a + 1..elem.len() {
                h = h.max(distance(&self.vertices[elem[a]], &self.vertices[elem[b]]));
            }
        }
        h
    }

    /// Sum of element volumes (length, area).
    pub fn measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.geometry(e).volume).sum()
    }

    pub fn stats(&self) -> MeshStats {
        let h = (0..self.n_elements())
            .map(|e| self.element_max_edge(e))
            .fold(0.0, f64::max);
        let n_boundary = self.boundary.iter().filter(|&&b| b).count();
        MeshStats {
            h,
            n_vertices: self.n_vertices(),
            n_elements: self.n_elements(),
            n_interior: self.n_vertices() - n_boundary,
        }
    }

    /// Stable 64-bit FNV-1a fingerprint of coordinates and connectivity.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        let mut feed = |word: u64| {
            for byte in word.to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(PRIME);
            }
        };
        feed(self.dim as u64);
        feed(self.embed_dim as u64);
        for p in &self.vertices {
            p.iter().for_each(|c| feed(c.to_bits()));
        }
        self.elements.iter().for_each(|&i| feed(i as u64));
        hash
    }

    /// Locates `point` and returns the containing element with the
    /// barycentric coordinates of the point in it.
    ///
    /// Points are accepted within `1e-9 * h` of the mesh so that vertices and
    /// edges are found despite rounding. Brute force over all elements.
    pub fn locate(&self, point: &[f64]) -> Result<(usize, Vec<f64>)> {
        let mut p = [0.0; 3];
        for (k, &c) in point.iter().take(3).enumerate() {
            p[k] = c;
        }
        let tol = 1e-9 * self.stats().h;
        let mut best = (f64::INFINITY, 0, Vec::new());
        for e in 0..self.n_elements() {
            let pts: Vec<[f64; 3]> = self.element(e).iter().map(|&i| self.vertices[i]).collect();
            let (dist, bary) = closest_point_on_simplex(&pts, &p);
            if dist < best.0 {
                best = (dist, e, bary);
                if dist <= tol {
                    break;
                }
            }
        }
        if best.0 <= tol {
            Ok((best.1, best.2))
        } else {
            Err(Error::OutsideMesh {
                point: point.to_vec(),
                distance: best.0,
            })
        }
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dangling_index() {
        let err = Mesh::new(1, 1, vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0, 2]).unwrap_err();
        assert!(matches!(err, Error::DanglingIndex { index: 2, .. }));
    }

    #[test]
    fn rejects_degenerate_triangle() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let err = Mesh::new(2, 2, v, vec![0, 1, 2]).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement { element: 0, .. }));
    }

    #[test]
    fn rejects_non_manifold_fan() {
        // three triangles on one edge
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let err = Mesh::new(2, 3, v, vec![0, 1, 2, 0, 1, 3, 0, 1, 4]).unwrap_err();
        assert!(matches!(err, Error::NonManifold { count: 3, .. }));
    }

    #[test]
    fn fingerprint_changes_with_geometry() {
        let a = build_interval_mesh(0.0, 1.0, 4).unwrap();
        let b = build_interval_mesh(0.0, 1.0, 5).unwrap();
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn locate_rejects_far_point() {
        let m = build_rectangle_mesh(1.0, 1.0, 2, 2).unwrap();
        match m.locate(&[2.0, 0.5]).unwrap_err() {
            Error::OutsideMesh { distance, .. } => assert!((distance - 1.0).abs() < 1e-12),
            e => panic!("unexpected {e}"),
        }
    }
}
