//! Regular box partitions of structured meshes and interface bookkeeping.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodeRole};
use crate::stokes::SaddleSystem;

/// `m^3` box subdomains of `(n/m)^3` elements each.
#[derive(Debug, Clone)]
pub struct Decomposition {
    m: usize,
    elements_per_box: usize,
    element_subdomain: Vec<usize>,
    sharing: Vec<Vec<usize>>,
}

pub fn partition_regular(mesh: &Mesh, m: usize) -> Result<Decomposition> {
    Decomposition::regular(mesh, m)
}

impl Decomposition {
    pub fn regular(mesh: &Mesh, m: usize) -> Result<Self> {
        let n = mesh.n();
        if m == 0 || n % m != 0 {
            return Err(Error::invalid(format!("{m} subdomains per axis do not divide n = {n}")));
        }
        let hb = n / m;
        let element_subdomain = mesh
            .elements()
            .iter()
            .map(|e| {
                let [i, j, k] = e.index;
                (k / hb * m + j / hb) * m + i / hb
            })
            .collect();
        let sharing = (0..mesh.n_nodes())
            .map(|v| {
                let l = mesh.lattice(v);
                let per_axis: Vec<Vec<usize>> = l.iter().map(|&c| boxes_touching(c, n, hb)).collect();
                let mut ids = Vec::new();
                for &bz in &per_axis[2] {
                    for &by in &per_axis[1] {
                        for &bx in &per_axis[0] {
                            ids.push((bz * m + by) * m + bx);
                        }
                    }
                }
                ids.sort_unstable();
                ids
            })
            .collect();
        Ok(Self {
            m,
            elements_per_box: hb,
            element_subdomain,
            sharing,
        })
    }

    /// Subdomains per axis.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_subdomains(&self) -> usize {
        self.m * self.m * self.m
    }

    /// Ratio `H/h` of subdomain to element size.
    pub fn h_ratio(&self) -> usize {
        self.elements_per_box
    }

    pub fn subdomain_of_element(&self, e: usize) -> usize {
        self.element_subdomain[e]
    }

    pub fn elements_of(&self, s: usize) -> Vec<usize> {
        (0..self.element_subdomain.len())
            .filter(|&e| self.element_subdomain[e] == s)
            .collect()
    }

    /// Sorted ids of the subdomains containing `node`.
    pub fn sharing(&self, node: usize) -> &[usize] {
        &self.sharing[node]
    }

    pub fn multiplicity(&self, node: usize) -> usize {
        self.sharing[node].len()
    }

    pub fn is_interface(&self, node: usize) -> bool {
        self.sharing[node].len() >= 2
    }

    pub fn interface_nodes(&self) -> Vec<usize> {
        (0..self.sharing.len()).filter(|&v| self.is_interface(v)).collect()
    }
}

fn boxes_touching(lattice: usize, n: usize, hb: usize) -> Vec<usize> {
    let mut elems = Vec::with_capacity(2);
    if lattice % 2 == 1 {
        elems.push((lattice - 1) / 2);
    } else {
        if lattice > 0 {
            elems.push(lattice / 2 - 1);
        }
        if lattice < 2 * n {
            elems.push(lattice / 2);
        }
    }
    let mut boxes: Vec<usize> = elems.into_iter().map(|e| e / hb).collect();
    boxes.dedup();
    boxes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GlobKind {
    /// Shared by exactly two subdomains.
    Face,
    /// Shared by three or more subdomains.
    Edge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Glob {
    pub kind: GlobKind,
    pub subdomains: Vec<usize>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior(usize),
    Corner,
    /// Index into [`GlobSets::globs`].
    Glob(usize),
}

/// Corners plus the remaining interface nodes grouped into globs.
#[derive(Debug, Clone)]
pub struct GlobSets {
    pub corners: Vec<usize>,
    pub globs: Vec<Glob>,
    pub node_class: Vec<NodeClass>,
}

impl GlobSets {
    pub fn faces(&self) -> impl Iterator<Item = &Glob> {
        self.globs.iter().filter(|g| g.kind == GlobKind::Face)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Glob> {
        self.globs.iter().filter(|g| g.kind == GlobKind::Edge)
    }

    pub fn is_corner(&self, node: usize) -> bool {
        self.node_class[node] == NodeClass::Corner
    }
}

/// Interface nodes grouped by exact sharing set, before corner removal.
fn sharing_classes(decomp: &Decomposition) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for v in decomp.interface_nodes() {
        classes.entry(decomp.sharing(v).to_vec()).or_default().push(v);
    }
    classes
}

fn has_three_noncollinear(points: &[[f64; 3]]) -> bool {
    for (a, p) in points.iter().enumerate() {
        for (b, q) in points.iter().enumerate().skip(a + 1) {
            for r in points.iter().skip(b + 1) {
                let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                let w = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
                let c = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
                if c.iter().any(|x| x.abs() > 1e-12) {
                    return true;
                }
            }
        }
    }
    false
}

/// Interface vertices of the subdomain-box lattice, plus extra face
/// vertices wherever two face-adjacent subdomains would otherwise share
/// fewer than three non-collinear corners.
pub fn select_corners(mesh: &Mesh, decomp: &Decomposition) -> Vec<usize> {
    let stride = 2 * decomp.h_ratio();
    let mut is_corner = vec![false; mesh.n_nodes()];
    for v in decomp.interface_nodes() {
        if mesh.lattice(v).iter().all(|&c| c % stride == 0) {
            is_corner[v] = true;
        }
    }
    for (key, nodes) in sharing_classes(decomp) {
        if key.len() != 2 {
            continue;
        }
        let shared = |is_corner: &[bool]| -> Vec<[f64; 3]> {
            (0..mesh.n_nodes())
                .filter(|&v| is_corner[v] && key.iter().all(|s| decomp.sharing(v).contains(s)))
                .map(|v| mesh.coords(v))
                .collect()
        };
        if has_three_noncollinear(&shared(&is_corner)) {
            continue;
        }
        let mut candidates: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|&v| mesh.role(v) == NodeRole::Vertex && !is_corner[v])
            .collect();
        let centroid = {
            let mut c = [0.0; 3];
            for &v in &nodes {
                let x = mesh.coords(v);
                for d in 0..3 {
                    c[d] += x[d] / nodes.len() as f64;
                }
            }
            c
        };
        let dist = |v: usize| {
            let x = mesh.coords(v);
            (0..3).map(|d| (x[d] - centroid[d]).powi(2)).sum::<f64>()
        };
        candidates.sort_by(|&a, &b| dist(b).total_cmp(&dist(a)).then(a.cmp(&b)));
        for v in candidates {
            is_corner[v] = true;
            if has_three_noncollinear(&shared(&is_corner)) {
                break;
            }
        }
    }
    (0..mesh.n_nodes()).filter(|&v| is_corner[v]).collect()
}

/// Classifies every node as interior, corner, or member of a face/edge glob.
pub fn classify_globs(mesh: &Mesh, decomp: &Decomposition) -> GlobSets {
    let corners = select_corners(mesh, decomp);
    let mut node_class: Vec<NodeClass> = (0..mesh.n_nodes())
        .map(|v| NodeClass::Interior(decomp.sharing(v)[0]))
        .collect();
    for &c in &corners {
        node_class[c] = NodeClass::Corner;
    }
    let mut globs = Vec::new();
    for (key, nodes) in sharing_classes(decomp) {
        let nodes: Vec<usize> = nodes.into_iter().filter(|&v| node_class[v] != NodeClass::Corner).collect();
        if nodes.is_empty() {
            continue;
        }
        for &v in &nodes {
            node_class[v] = NodeClass::Glob(globs.len());
        }
        globs.push(Glob {
            kind: if key.len() == 2 { GlobKind::Face } else { GlobKind::Edge },
            subdomains: key,
            nodes,
        });
    }
    GlobSets {
        corners,
        globs,
        node_class,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Interior,
    Interface,
}

/// Split of the reduced dofs into subdomain interiors (block 1) and the
/// interface (block 2).
#[derive(Debug, Clone)]
pub struct BlockSplit {
    /// Reduced indices of interior dofs, grouped by subdomain.
    pub interior: Vec<usize>,
    /// `interior[interior_offsets[s]..interior_offsets[s + 1]]` belong to subdomain `s`.
    pub interior_offsets: Vec<usize>,
    /// Reduced indices of interface dofs, increasing.
    pub interface: Vec<usize>,
    position: Vec<(Block, usize)>,
}

impl BlockSplit {
    pub fn n_subdomains(&self) -> usize {
        self.interior_offsets.len() - 1
    }

    pub fn interior_of(&self, s: usize) -> &[usize] {
        &self.interior[self.interior_offsets[s]..self.interior_offsets[s + 1]]
    }

    /// Block and position within the block of a reduced dof.
    pub fn position(&self, reduced: usize) -> (Block, usize) {
        self.position[reduced]
    }
}

pub fn split_blocks(system: &SaddleSystem, mesh: &Mesh, decomp: &Decomposition) -> BlockSplit {
    let n_sub = decomp.n_subdomains();
    let mut per_sub: Vec<Vec<usize>> = vec![Vec::new(); n_sub];
    let mut interface = Vec::new();
    for r in 0..system.n() {
        let (node, _) = mesh.dof_owner(system.global_dof(r));
        let sharing = decomp.sharing(node);
        if sharing.len() == 1 {
            per_sub[sharing[0]].push(r);
        } else {
            interface.push(r);
        }
    }
    let mut interior = Vec::with_capacity(system.n() - interface.len());
    let mut interior_offsets = vec![0];
    for dofs in &per_sub {
        interior.extend_from_slice(dofs);
        interior_offsets.push(interior.len());
    }
    let mut position = vec![(Block::Interior, 0); system.n()];
    for (k, &r) in interior.iter().enumerate() {
        position[r] = (Block::Interior, k);
    }
    for (k, &r) in interface.iter().enumerate() {
        position[r] = (Block::Interface, k);
    }
    BlockSplit {
        interior,
        interior_offsets,
        interface,
        position,
    }
}
