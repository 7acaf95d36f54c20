//! Reference shape functions and element matrices for axis-aligned hexes.

use crate::mesh::{ElementFamily, REFERENCE_NODES};

/// 3-point Gauss-Legendre rule on `[-1, 1]`.
pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

fn quad_1d(offset: usize, t: f64) -> (f64, f64) {
    match offset {
        0 => (0.5 * t * (t - 1.0), t - 0.5),
        1 => (1.0 - t * t, -2.0 * t),
        _ => (0.5 * t * (t + 1.0), t + 0.5),
    }
}

fn node_ref(i: usize) -> [f64; 3] {
    let o = REFERENCE_NODES[i];
    [o[0] as f64 - 1.0, o[1] as f64 - 1.0, o[2] as f64 - 1.0]
}

/// Velocity shape function values and reference gradients at `xi`.
pub fn velocity_shape(family: ElementFamily, xi: [f64; 3]) -> Vec<(f64, [f64; 3])> {
    match family {
        ElementFamily::Q2Q1 => REFERENCE_NODES
            .iter()
            .map(|o| {
                let (a, da) = quad_1d(o[0], xi[0]);
                let (b, db) = quad_1d(o[1], xi[1]);
                let (c, dc) = quad_1d(o[2], xi[2]);
                (a * b * c, [da * b * c, a * db * c, a * b * dc])
            })
            .collect(),
        ElementFamily::Q2SQ1 => (0..20).map(|i| serendipity(i, xi)).collect(),
    }
}

fn serendipity(i: usize, xi: [f64; 3]) -> (f64, [f64; 3]) {
    let p = node_ref(i);
    let [x, y, z] = xi;
    if i < 8 {
        let (a, b, c) = (1.0 + x * p[0], 1.0 + y * p[1], 1.0 + z * p[2]);
        let s = x * p[0] + y * p[1] + z * p[2] - 2.0;
        let v = 0.125 * a * b * c * s;
        let g = [
            0.125 * p[0] * b * c * (s + a),
            0.125 * p[1] * a * c * (s + b),
            0.125 * p[2] * a * b * (s + c),
        ];
        (v, g)
    } else {
        // edge midpoint: exactly one reference coordinate is zero
        let axis = (0..3).find(|&d| p[d] == 0.0).unwrap();
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let t = [x, y, z];
        let bub = 1.0 - t[axis] * t[axis];
        let fu = 1.0 + t[u] * p[u];
        let fv = 1.0 + t[v] * p[v];
        let mut g = [0.0; 3];
        g[axis] = 0.25 * (-2.0 * t[axis]) * fu * fv;
        g[u] = 0.25 * bub * p[u] * fv;
        g[v] = 0.25 * bub * fu * p[v];
        (0.25 * bub * fu * fv, g)
    }
}

/// Trilinear pressure shape functions at `xi` (vertex order of the mesh).
pub fn pressure_shape(xi: [f64; 3]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (i, v) in out.iter_mut().enumerate() {
        let p = node_ref(i);
        *v = 0.125 * (1.0 + xi[0] * p[0]) * (1.0 + xi[1] * p[1]) * (1.0 + xi[2] * p[2]);
    }
    out
}

/// Dense element matrices of a cube element with edge `h`.
///
/// `a` is the `3k x 3k` vector-Laplacian block scaled by `viscosity`
/// (node-major, components contiguous) and `b` the `8 x 3k` divergence
/// block with entries `-int psi_a d(phi_j)/dx_c`.
pub fn element_matrices(family: ElementFamily, h: f64, viscosity: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let k = family.velocity_nodes_per_element();
    let mut a = vec![vec![0.0; 3 * k]; 3 * k];
    let mut b = vec![vec![0.0; 3 * k]; 8];
    let scale = 2.0 / h;
    let det = (0.5 * h).powi(3);
    for &(x, wx) in &GAUSS3 {
        for &(y, wy) in &GAUSS3 {
            for &(z, wz) in &GAUSS3 {
                let w = wx * wy * wz * det;
                let shape = velocity_shape(family, [x, y, z]);
                let psi = pressure_shape([x, y, z]);
                let grads: Vec<[f64; 3]> = shape
                    .iter()
                    .map(|(_, g)| [g[0] * scale, g[1] * scale, g[2] * scale])
                    .collect();
                for i in 0..k {
                    for j in 0..k {
                        let gij = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1] + grads[i][2] * grads[j][2];
                        let v = viscosity * w * gij;
                        for c in 0..3 {
                            a[3 * i + c][3 * j + c] += v;
                        }
                    }
                }
                for (pa, &ps) in psi.iter().enumerate() {
                    for j in 0..k {
                        for c in 0..3 {
                            b[pa][3 * j + c] -= w * ps * grads[j][c];
                        }
                    }
                }
            }
        }
    }
    (a, b)
}

/// The full local saddle-point matrix `[[A, B^T], [B, 0]]` of one element,
/// stored row-major. All elements of a structured mesh share it.
#[derive(Debug, Clone)]
pub struct ElementKernel {
    family: ElementFamily,
    h: f64,
    n_local: usize,
    matrix: Vec<f64>,
}

impl ElementKernel {
    pub fn new(family: ElementFamily, h: f64, viscosity: f64) -> Self {
        let (a, b) = element_matrices(family, h, viscosity);
        let nv = a.len();
        let n_local = nv + 8;
        let mut matrix = vec![0.0; n_local * n_local];
        for i in 0..nv {
            matrix[i * n_local..i * n_local + nv].copy_from_slice(&a[i]);
        }
        for (pa, row) in b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                matrix[(nv + pa) * n_local + j] = v;
                matrix[j * n_local + nv + pa] = v;
            }
        }
        Self {
            family,
            h,
            n_local,
            matrix,
        }
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of local dofs (velocity plus pressure).
    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n_local + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n_local..(i + 1) * self.n_local]
    }

    /// Load vector `int f . phi_i` for an element whose lower corner is `origin`.
    pub fn load_vector(&self, origin: [f64; 3], force: &dyn Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        let k = self.family.velocity_nodes_per_element();
        let mut out = vec![0.0; self.n_local];
        let det = (0.5 * self.h).powi(3);
        for &(x, wx) in &GAUSS3 {
            for &(y, wy) in &GAUSS3 {
                for &(z, wz) in &GAUSS3 {
                    let w = wx * wy * wz * det;
                    let pos = [
                        origin[0] + 0.5 * (x + 1.0) * self.h,
                        origin[1] + 0.5 * (y + 1.0) * self.h,
                        origin[2] + 0.5 * (z + 1.0) * self.h,
                    ];
                    let f = force(pos);
                    for (i, (phi, _)) in velocity_shape(self.family, [x, y, z]).iter().enumerate().take(k) {
                        for c in 0..3 {
                            out[3 * i + c] += w * f[c] * phi;
                        }
                    }
                }
            }
        }
        out
    }
}
