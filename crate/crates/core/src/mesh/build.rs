use std::collections::HashMap;

use super::Mesh;
use crate::error::{Error, Result};

/// Uniform partition of `[a, b]` into `n_cells` segments.
pub fn build_interval_mesh(a: f64, b: f64, n_cells: usize) -> Result<Mesh> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("interval bounds must be finite"));
    }
    if a >= b {
        return Err(Error::invalid(format!("interval [{a}, {b}] is empty")));
    }
    if n_cells < 2 {
        return Err(Error::invalid("an interval mesh needs at least 2 cells"));
    }
    let step = (b - a) / n_cells as f64;
    let vertices = (0..=n_cells)
        .map(|i| {
            // pin the right endpoint exactly
            let x = if i == n_cells { b } else { a + step * i as f64 };
            [x, 0.0, 0.0]
        })
        .collect();
    let elements = (0..n_cells).flat_map(|i| [i, i + 1]).collect();
    Mesh::new(1, 1, vertices, elements)
}

/// Structured triangulation of `[0, lx] x [0, ly]`: each of the `nx * ny`
/// cells is split along its `(0,0)-(1,1)` diagonal.
pub fn build_rectangle_mesh(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
        return Err(Error::invalid(format!("rectangle extents {lx} x {ly} must be positive")));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("a rectangle mesh needs at least 2 cells per side"));
    }
    let coord = |i: usize, n: usize, l: f64| if i == n { l } else { l * i as f64 / n as f64 };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([coord(i, nx, lx), coord(j, ny, ly), 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
        }
    }
    Mesh::new(2, 2, vertices, elements)
}

/// Icosahedron refined `subdivisions` times by edge bisection, with every
/// vertex projected onto the sphere of the given radius.
pub fn build_icosphere_mesh(radius: f64, subdivisions: usize) -> Result<Mesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!("sphere radius {radius} must be positive")));
    }
    if subdivisions > 7 {
        return Err(Error::invalid("at most 7 icosphere subdivisions are supported"));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let project = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [radius * p[0] / n, radius * p[1] / n, radius * p[2] / n]
    };
    vertices.iter_mut().for_each(|p| *p = project(*p));

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |i: usize, j: usize| {
                let key = (i.min(j), i.max(j));
                *midpoints.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[i], vertices[j]);
                    vertices.push(project([
                        0.5 * (p[0] + q[0]),
                        0.5 * (p[1] + q[1]),
                        0.5 * (p[2] + q[2]),
                    ]));
                    vertices.len() - 1
                })
            };
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            refined.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = refined;
    }
    Mesh::new(2, 3, vertices, faces.into_iter().flatten().collect())
}
