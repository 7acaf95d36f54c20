//! Structured hexahedral meshes of the unit cube.
//!
//! Nodes live on a refined lattice with `2n + 1` points per axis: even
//! lattice coordinates are mesh vertices, odd ones are mid-edge, mid-face
//! or cell-centre points. A node's geometric role follows from how many of
//! its lattice coordinates are odd.
//!
//! Local node ordering on the reference element (lattice offsets in
//! `{0, 1, 2}^3`):
//!
//! * 8 vertices: `(0,0,0) (2,0,0) (2,2,0) (0,2,0) (0,0,2) (2,0,2) (2,2,2) (0,2,2)`
//! * 12 edge midpoints: bottom ring, top ring, then the four vertical edges
//! * 6 face centres: `x-, x+, y-, y+, z-, z+`
//! * 1 cell centre
//!
//! Degrees of freedom are numbered velocity first (`3 * node + component`),
//! then pressure at the vertices in lattice order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementFamily {
    /// Taylor-Hood: 27-node triquadratic velocity, trilinear pressure.
    #[serde(rename = "q2q1")]
    Q2Q1,
    /// Serendipity variant: 20-node velocity, trilinear pressure.
    #[serde(rename = "q2s_q1")]
    Q2SQ1,
}

impl ElementFamily {
    pub fn velocity_nodes_per_element(self) -> usize {
        match self {
            ElementFamily::Q2Q1 => 27,
            ElementFamily::Q2SQ1 => 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    Vertex,
    EdgeMid,
    FaceCenter,
    CellCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Ux,
    Uy,
    Uz,
    P,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Ux, Field::Uy, Field::Uz, Field::P];

    pub fn velocity_component(self) -> Option<usize> {
        match self {
            Field::Ux => Some(0),
            Field::Uy => Some(1),
            Field::Uz => Some(2),
            Field::P => None,
        }
    }
}

/// Lattice offsets of the 27 local nodes in reference order.
pub const REFERENCE_NODES: [[usize; 3]; 27] = [
    [0, 0, 0],
    [2, 0, 0],
    [2, 2, 0],
    [0, 2, 0],
    [0, 0, 2],
    [2, 0, 2],
    [2, 2, 2],
    [0, 2, 2],
    [1, 0, 0],
    [2, 1, 0],
    [1, 2, 0],
    [0, 1, 0],
    [1, 0, 2],
    [2, 1, 2],
    [1, 2, 2],
    [0, 1, 2],
    [0, 0, 1],
    [2, 0, 1],
    [2, 2, 1],
    [0, 2, 1],
    [0, 1, 1],
    [2, 1, 1],
    [1, 0, 1],
    [1, 2, 1],
    [1, 1, 0],
    [1, 1, 2],
    [1, 1, 1],
];

#[derive(Debug, Clone)]
pub struct Element {
    /// Element position `(i, j, k)` in the `n^3` grid.
    pub index: [usize; 3],
    /// Velocity nodes in reference order (27 or 20 entries).
    pub nodes: Vec<usize>,
}

impl Element {
    pub fn vertices(&self) -> &[usize] {
        &self.nodes[..8]
    }
}

const NO_NODE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    family: ElementFamily,
    lattice_nodes: Vec<[usize; 3]>,
    node_of_lattice: Vec<usize>,
    roles: Vec<NodeRole>,
    pressure_index: Vec<usize>,
    vertex_nodes: Vec<usize>,
    n_vertices: usize,
    elements: Vec<Element>,
}

pub fn build_structured_mesh(n: usize, family: ElementFamily) -> Result<Mesh> {
    Mesh::structured(n, family)
}

impl Mesh {
    pub fn structured(n: usize, family: ElementFamily) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("mesh needs at least one element per axis"));
        }
        let dim = 2 * n + 1;
        let mut lattice_nodes = Vec::new();
        let mut node_of_lattice = vec![NO_NODE; dim * dim * dim];
        let mut roles = Vec::new();
        let mut pressure_index = Vec::new();
        let mut vertex_nodes = Vec::new();
        let mut n_vertices = 0;
        for k in 0..dim {
            for j in 0..dim {
                for i in 0..dim {
                    let odd = [i, j, k].iter().filter(|&&c| c % 2 == 1).count();
                    if family == ElementFamily::Q2SQ1 && odd > 1 {
                        continue;
                    }
                    node_of_lattice[(k * dim + j) * dim + i] = lattice_nodes.len();
                    lattice_nodes.push([i, j, k]);
                    roles.push(match odd {
                        0 => NodeRole::Vertex,
                        1 => NodeRole::EdgeMid,
                        2 => NodeRole::FaceCenter,
                        _ => NodeRole::CellCenter,
                    });
                    if odd == 0 {
                        vertex_nodes.push(lattice_nodes.len() - 1);
                        pressure_index.push(n_vertices);
                        n_vertices += 1;
                    } else {
                        pressure_index.push(NO_NODE);
                    }
                }
            }
        }
        let per_elem = family.velocity_nodes_per_element();
        let mut elements = Vec::with_capacity(n * n * n);
        for ez in 0..n {
            for ey in 0..n {
                for ex in 0..n {
                    let nodes = REFERENCE_NODES[..per_elem]
                        .iter()
                        .map(|o| {
                            let (i, j, k) = (2 * ex + o[0], 2 * ey + o[1], 2 * ez + o[2]);
                            node_of_lattice[(k * dim + j) * dim + i]
                        })
                        .collect();
                    elements.push(Element {
                        index: [ex, ey, ez],
                        nodes,
                    });
                }
            }
        }
        Ok(Self {
            n,
            family,
            lattice_nodes,
            node_of_lattice,
            roles,
            pressure_index,
            vertex_nodes,
            n_vertices,
            elements,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    /// Element edge length `h = 1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.lattice_nodes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn lattice(&self, node: usize) -> [usize; 3] {
        self.lattice_nodes[node]
    }

    pub fn node_at_lattice(&self, l: [usize; 3]) -> Option<usize> {
        let dim = 2 * self.n + 1;
        if l.iter().any(|&c| c >= dim) {
            return None;
        }
        let id = self.node_of_lattice[(l[2] * dim + l[1]) * dim + l[0]];
        (id != NO_NODE).then_some(id)
    }

    pub fn coords(&self, node: usize) -> [f64; 3] {
        let s = (2 * self.n) as f64;
        let l = self.lattice_nodes[node];
        [l[0] as f64 / s, l[1] as f64 / s, l[2] as f64 / s]
    }

    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node]
    }

    pub fn n_velocity_dofs(&self) -> usize {
        3 * self.n_nodes()
    }

    pub fn n_pressure_dofs(&self) -> usize {
        self.n_vertices
    }

    pub fn n_dofs(&self) -> usize {
        self.n_velocity_dofs() + self.n_pressure_dofs()
    }

    pub fn velocity_dof(&self, node: usize, component: usize) -> usize {
        3 * node + component
    }

    pub fn pressure_dof(&self, node: usize) -> Option<usize> {
        let p = self.pressure_index[node];
        (p != NO_NODE).then(|| self.n_velocity_dofs() + p)
    }

    pub fn dof(&self, node: usize, field: Field) -> Option<usize> {
        match field.velocity_component() {
            Some(c) => Some(self.velocity_dof(node, c)),
            None => self.pressure_dof(node),
        }
    }

    /// Inverse of the dof map: the node and field owning a global dof.
    pub fn dof_owner(&self, dof: usize) -> (usize, Field) {
        let nv = self.n_velocity_dofs();
        if dof < nv {
            (dof / 3, [Field::Ux, Field::Uy, Field::Uz][dof % 3])
        } else {
            let p = dof - nv;
            let node = self.vertex_node(p);
            (node, Field::P)
        }
    }

    /// Node carrying pressure dof number `p` (0-based among pressure dofs).
    pub fn vertex_node(&self, p: usize) -> usize {
        self.vertex_nodes[p]
    }

    /// Global dofs of an element: `3 * k` velocity dofs (node-major), then
    /// the 8 vertex pressure dofs.
    pub fn element_dofs(&self, e: &Element) -> Vec<usize> {
        let mut dofs = Vec::with_capacity(3 * e.nodes.len() + 8);
        for &v in &e.nodes {
            dofs.extend((0..3).map(|c| self.velocity_dof(v, c)));
        }
        dofs.extend(e.vertices().iter().map(|&v| self.pressure_dof(v).unwrap()));
        dofs
    }

    pub fn element_volume(&self, e: &Element) -> f64 {
        let lo = self.coords(e.nodes[0]);
        let hi = self.coords(e.nodes[6]);
        (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2])
    }

    /// Nodes whose coordinates satisfy `pred`, in increasing id order.
    pub fn boundary_nodes(&self, pred: impl Fn([f64; 3]) -> bool) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&v| pred(self.coords(v))).collect()
    }

    /// Nodes on the plane `x[axis] = value` (within `1e-12`).
    pub fn nodes_on_plane(&self, axis: usize, value: f64) -> Vec<usize> {
        self.boundary_nodes(|x| (x[axis] - value).abs() <= 1e-12)
    }

    pub fn is_on_boundary(&self, node: usize) -> bool {
        let l = self.lattice_nodes[node];
        l.iter().any(|&c| c == 0 || c == 2 * self.n)
    }
}

/// `(velocity dofs, pressure dofs, total)`.
pub fn dof_count(mesh: &Mesh) -> (usize, usize, usize) {
    (mesh.n_velocity_dofs(), mesh.n_pressure_dofs(), mesh.n_dofs())
}
