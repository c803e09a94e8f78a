/// Volume and barycentric gradients of one P1 simplex.
///
/// Gradients are expressed in the element frame: the global frame when the
/// mesh is not embedded in a higher-dimensional space, otherwise an
/// orthonormal tangent frame whose first axis follows the edge `p0 -> p1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexGeometry {
    pub dim: usize,
    pub volume: f64,
    /// Gradient of barycentric function `a`, first `dim` entries used.
    pub grads: Vec<[f64; 2]>,
}

impl SimplexGeometry {
    pub fn new(pts: &[[f64; 3]], embed_dim: usize) -> Self {
        let dim = pts.len() - 1;
        let edge = |k: usize| -> [f64; 3] {
            [
                pts[k][0] - pts[0][0],
                pts[k][1] - pts[0][1],
                pts[k][2] - pts[0][2],
            ]
        };
        // Reference gradients of the barycentric functions.
        let reference: Vec<[f64; 2]> = match dim {
            1 => vec![[-1.0, 0.0], [1.0, 0.0]],
            _ => vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        let (volume, grads) = if embed_dim == dim {
            match dim {
                1 => {
                    let len = edge(1)[0];
                    let g = reference.iter().map(|r| [r[0] / len, 0.0]).collect();
                    (len.abs(), g)
                }
                _ => {
                    let (e1, e2) = (edge(1), edge(2));
                    // E = [e1 e2]; solve E^T w = g.
                    let det = e1[0] * e2[1] - e2[0] * e1[1];
                    let g = reference
                        .iter()
                        .map(|r| {
                            [
                                (e2[1] * r[0] - e1[1] * r[1]) / det,
                                (-e2[0] * r[0] + e1[0] * r[1]) / det,
                            ]
                        })
                        .collect();
                    (det.abs() / 2.0, g)
                }
            }
        } else {
            let e1 = edge(1);
            let r11 = norm(&e1);
            match dim {
                1 => {
                    let g = reference.iter().map(|r| [r[0] / r11, 0.0]).collect();
                    (r11, g)
                }
                _ => {
                    let q1 = scale(&e1, 1.0 / r11);
                    let e2 = edge(2);
                    let r12 = dot(&q1, &e2);
                    let u = [e2[0] - r12 * q1[0], e2[1] - r12 * q1[1], e2[2] - r12 * q1[2]];
                    let r22 = norm(&u);
                    // E = QR with R upper triangular; w = R^{-T} g.
                    let g = reference
                        .iter()
                        .map(|r| {
                            let w0 = r[0] / r11;
                            [w0, (r[1] - r12 * w0) / r22]
                        })
                        .collect();
                    ((r11 * r22).abs() / 2.0, g)
                }
            }
        };
        SimplexGeometry { dim, volume, grads }
    }

    /// `grad_a . A grad_b` for a symmetric `dim x dim` tensor `A` (row-major 2x2).
    pub fn grad_dot(&self, a: usize, b: usize, tensor: &[[f64; 2]; 2]) -> f64 {
        let (ga, gb) = (&self.grads[a], &self.grads[b]);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += ga[i] * tensor[i][j] * gb[j];
            }
        }
        s
    }
}

/// Distance from `p` to the simplex `pts` (segment or triangle in 3D) and the
/// barycentric coordinates of the closest point.
pub fn closest_point_on_simplex(pts: &[[f64; 3]], p: &[f64; 3]) -> (f64, Vec<f64>) {
    let bary = match pts.len() {
        2 => {
            let ab = sub(&pts[1], &pts[0]);
            let t = (dot(&sub(p, &pts[0]), &ab) / dot(&ab, &ab)).clamp(0.0, 1.0);
            vec![1.0 - t, t]
        }
        3 => closest_on_triangle(&pts[0], &pts[1], &pts[2], p),
        n => panic!("unsupported simplex with {n} vertices"),
    };
    let mut q = [0.0; 3];
    for (w, v) in bary.iter().zip(pts) {
        for k in 0..3 {
            q[k] += w * v[k];
        }
    }
    (norm(&sub(p, &q)), bary)
}

// Region-based closest point (Ericson, Real-Time Collision Detection 5.1.5).
fn closest_on_triangle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], p: &[f64; 3]) -> Vec<f64> {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return vec![1.0, 0.0, 0.0];
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return vec![0.0, 1.0, 0.0];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return vec![1.0 - v, v, 0.0];
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return vec![0.0, 0.0, 1.0];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return vec![1.0 - w, 0.0, w];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return vec![0.0, 1.0 - w, w];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    vec![1.0 - v - w, v, w]
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn unit_triangle_gradients() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let g = SimplexGeometry::new(&pts, 2);
        assert!((g.volume - 0.5).abs() < 1e-15);
        assert_eq!(g.grads, vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn embedded_triangle_matches_planar_stiffness() {
        // Same triangle rotated into 3D must give identical grad products.
        let flat = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.5, 1.5, 0.0]];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rot = |p: &[f64; 3]| [p[0], s * p[1], s * p[1]];
        let tilted: Vec<[f64; 3]> = flat.iter().map(rot).collect();
        let a = SimplexGeometry::new(&flat, 2);
        let b = SimplexGeometry::new(&tilted, 3);
        assert!((a.volume - b.volume).abs() < 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                let (x, y) = (a.grad_dot(i, j, &IDENTITY), b.grad_dot(i, j, &IDENTITY));
                assert!((x - y).abs() < 1e-13, "{i}{j}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn closest_point_inside_and_outside() {
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let (d, bary) = closest_point_on_simplex(&tri, &[0.25, 0.25, 0.0]);
        assert!(d < 1e-15);
        assert!((bary[0] - 0.5).abs() < 1e-15);
        let (d, _) = closest_point_on_simplex(&tri, &[0.25, 0.25, 2.0]);
        assert!((d - 2.0).abs() < 1e-15);
        let (d, bary) = closest_point_on_simplex(&tri, &[-1.0, -1.0, 0.0]);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(bary, vec![1.0, 0.0, 0.0]);
    }
}
