use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Legacy ASCII VTK unstructured grid with one scalar per vertex.
pub fn vtk_string(mesh: &Mesh, name: &str, values: &[f64]) -> Result<String> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    let k = mesh.dim() + 1;
    // VTK_LINE = 3, VTK_TRIANGLE = 5
    let cell_type = if mesh.dim() == 1 { 3 } else { 5 };
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} {:e}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "CELLS {} {}", mesh.n_elements(), mesh.n_elements() * (k + 1));
    for el in mesh.elements() {
        let ids: Vec<String> = el.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{k} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_elements());
    for _ in 0..mesh.n_elements() {
        let _ = writeln!(s, "{cell_type}");
    }
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default", mesh.n_vertices());
    for v in values {
        let _ = writeln!(s, "{v:e}");
    }
    Ok(s)
}

pub fn write_vtk(mesh: &Mesh, name: &str, values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, vtk_string(mesh, name, values)?).map_err(|e| Error::io(path, e))
}
