//! Discrete Stokes saddle-point systems on structured hex meshes.
//!
//! Dirichlet velocity values and one pinned pressure dof are eliminated:
//! their columns are moved to the right-hand side and their rows and
//! columns dropped, so the reduced matrix keeps the symmetric indefinite
//! block form `[[A, B^T], [B, 0]]`.

pub mod element;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use element::{element_matrices, pressure_shape, velocity_shape, ElementKernel};

use crate::error::{Error, Result};
use crate::mesh::{build_structured_mesh, Element, ElementFamily, Mesh};
use crate::sparse_la::SparseMatrix;

pub type BodyForce = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
pub struct StokesProblem {
    viscosity: f64,
    dirichlet: BTreeMap<(usize, usize), f64>,
    body_force: Option<BodyForce>,
    pinned_pressure_node: usize,
    pinned_pressure_value: f64,
}

impl fmt::Debug for StokesProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StokesProblem")
            .field("viscosity", &self.viscosity)
            .field("dirichlet_entries", &self.dirichlet.len())
            .field("body_force", &self.body_force.is_some())
            .field("pinned_pressure_node", &self.pinned_pressure_node)
            .finish()
    }
}

impl StokesProblem {
    pub fn new(viscosity: f64, pinned_pressure_node: usize) -> Result<Self> {
        if !(viscosity > 0.0) {
            return Err(Error::invalid(format!("viscosity must be positive, got {viscosity}")));
        }
        Ok(Self {
            viscosity,
            dirichlet: BTreeMap::new(),
            body_force: None,
            pinned_pressure_node,
            pinned_pressure_value: 0.0,
        })
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn pinned_pressure_node(&self) -> usize {
        self.pinned_pressure_node
    }

    pub fn with_body_force(mut self, f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.body_force = Some(Arc::new(f));
        self
    }

    pub fn with_pinned_value(mut self, value: f64) -> Self {
        self.pinned_pressure_value = value;
        self
    }

    /// Prescribes one velocity component at a node, replacing any earlier value.
    pub fn set_velocity(&mut self, node: usize, component: usize, value: f64) {
        assert!(component < 3);
        self.dirichlet.insert((node, component), value);
    }

    pub fn set_velocity_vector(&mut self, node: usize, value: [f64; 3]) {
        for (c, v) in value.into_iter().enumerate() {
            self.set_velocity(node, c, v);
        }
    }

    pub fn is_constrained(&self, node: usize, component: usize) -> bool {
        self.dirichlet.contains_key(&(node, component))
    }

    pub fn dirichlet_value(&self, node: usize, component: usize) -> Option<f64> {
        self.dirichlet.get(&(node, component)).copied()
    }

    pub fn n_dirichlet(&self) -> usize {
        self.dirichlet.len()
    }
}

/// Reduced saddle-point system with eliminated boundary data.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    free_of_dof: Vec<Option<usize>>,
    dof_of_free: Vec<usize>,
    fixed: Vec<f64>,
    n_free_velocity: usize,
    viscosity: f64,
}

impl SaddleSystem {
    /// Size of the reduced system.
    pub fn n(&self) -> usize {
        self.dof_of_free.len()
    }

    pub fn n_free_velocity(&self) -> usize {
        self.n_free_velocity
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn n_free_pressure(&self) -> usize {
        self.n() - self.n_free_velocity
    }

    /// Reduced index of a global dof, `None` when it was eliminated.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_of_dof[dof]
    }

    pub fn global_dof(&self, free: usize) -> usize {
        self.dof_of_free[free]
    }

    pub fn n_global_dofs(&self) -> usize {
        self.free_of_dof.len()
    }

    /// Scatters a reduced solution into a full dof vector including the
    /// prescribed values.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = self.fixed.clone();
        for (i, &d) in self.dof_of_free.iter().enumerate() {
            full[d] = reduced[i];
        }
        full
    }

    /// Restricts a full dof vector to the free dofs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dof_of_free.iter().map(|&d| full[d]).collect()
    }

    /// `||rhs - M x||_2 / ||rhs||_2` on the reduced system.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut r = self.rhs.clone();
        self.matrix.mul_acc(-1.0, x, &mut r);
        let rn = crate::linalg::norm2(&r);
        let bn = crate::linalg::norm2(&self.rhs);
        if bn == 0.0 {
            rn
        } else {
            rn / bn
        }
    }
}

/// Adds element contributions into a triplet list through a dof map.
///
/// `map` sends a global dof of the element to a row index, or `None` to
/// skip it.
pub fn assemble_elements<'a>(
    mesh: &Mesh,
    kernel: &ElementKernel,
    elements: impl IntoIterator<Item = &'a Element>,
    mut map: impl FnMut(&Element, usize) -> Option<usize>,
    triplets: &mut Vec<(usize, usize, f64)>,
) {
    let mut local: Vec<Option<usize>> = Vec::with_capacity(kernel.n_local());
    for e in elements {
        local.clear();
        local.extend(mesh.element_dofs(e).into_iter().map(|d| map(e, d)));
        for (i, ri) in local.iter().enumerate() {
            let Some(ri) = *ri else { continue };
            let row = kernel.row(i);
            for (j, rj) in local.iter().enumerate() {
                if let Some(rj) = *rj {
                    let v = row[j];
                    if v != 0.0 {
                        triplets.push((ri, rj, v));
                    }
                }
            }
        }
    }
}

pub fn assemble_system(mesh: &Mesh, problem: &StokesProblem) -> Result<SaddleSystem> {
    let pin = problem.pinned_pressure_node;
    let pin_dof = if pin < mesh.n_nodes() { mesh.pressure_dof(pin) } else { None };
    let Some(pin_dof) = pin_dof else {
        return Err(Error::invalid(format!("pinned node {pin} is not a pressure node")));
    };
    let n_dofs = mesh.n_dofs();
    let mut fixed = vec![0.0; n_dofs];
    let mut is_fixed = vec![false; n_dofs];
    for (&(node, c), &v) in &problem.dirichlet {
        if node >= mesh.n_nodes() {
            return Err(Error::invalid(format!("Dirichlet entry references missing node {node}")));
        }
        let d = mesh.velocity_dof(node, c);
        fixed[d] = v;
        is_fixed[d] = true;
    }
    fixed[pin_dof] = problem.pinned_pressure_value;
    is_fixed[pin_dof] = true;

    let mut free_of_dof = vec![None; n_dofs];
    let mut dof_of_free = Vec::new();
    for d in 0..n_dofs {
        if !is_fixed[d] {
            free_of_dof[d] = Some(dof_of_free.len());
            dof_of_free.push(d);
        }
    }
    let n_free_velocity = dof_of_free.iter().filter(|&&d| d < mesh.n_velocity_dofs()).count();
    let n = dof_of_free.len();

    let kernel = ElementKernel::new(mesh.family(), mesh.h(), problem.viscosity);
    let mut triplets = Vec::new();
    assemble_elements(mesh, &kernel, mesh.elements(), |_, d| free_of_dof[d], &mut triplets);

    let mut rhs = vec![0.0; n];
    let h = mesh.h();
    for e in mesh.elements() {
        let dofs = mesh.element_dofs(e);
        if let Some(f) = &problem.body_force {
            let origin = [e.index[0] as f64 * h, e.index[1] as f64 * h, e.index[2] as f64 * h];
            let load = kernel.load_vector(origin, f.as_ref());
            for (i, &d) in dofs.iter().enumerate() {
                if let Some(r) = free_of_dof[d] {
                    rhs[r] += load[i];
                }
            }
        }
        // lift of the prescribed values
        for (j, &dj) in dofs.iter().enumerate() {
            if !is_fixed[dj] || fixed[dj] == 0.0 {
                continue;
            }
            for (i, &di) in dofs.iter().enumerate() {
                if let Some(r) = free_of_dof[di] {
                    rhs[r] -= kernel.entry(i, j) * fixed[dj];
                }
            }
        }
    }
    let matrix = SparseMatrix::from_triplets(n, n, &triplets)?.into_symmetric()?;
    Ok(SaddleSystem {
        matrix,
        rhs,
        free_of_dof,
        dof_of_free,
        fixed,
        n_free_velocity,
        viscosity: problem.viscosity,
    })
}

/// Vertex at the centre of the unit cube; `n` must be even.
pub fn center_vertex(mesh: &Mesh) -> Result<usize> {
    let n = mesh.n();
    if n % 2 != 0 {
        return Err(Error::invalid(format!("n = {n} is odd, the cube centre is not a vertex")));
    }
    Ok(mesh.node_at_lattice([n, n, n]).expect("centre lattice point exists"))
}

pub const CAVITY_VISCOSITY: f64 = 0.01;

/// Leaky lid-driven cavity section on serendipity elements.
///
/// The lid `y = 1` moves with `u = (1, 0, 0)` on all its nodes, the walls
/// `x = 0`, `x = 1`, `y = 0` are no-slip, and the faces `z = 0`, `z = 1`
/// only block `u_z` where nothing stronger is prescribed.
pub fn define_problem_1(n: usize) -> Result<(Mesh, StokesProblem)> {
    if n % 2 != 0 {
        return Err(Error::invalid(format!("problem 1 needs even n, got {n}")));
    }
    let mesh = build_structured_mesh(n, ElementFamily::Q2SQ1)?;
    let mut problem = StokesProblem::new(CAVITY_VISCOSITY, center_vertex(&mesh)?)?;
    let top = 2 * n;
    for v in 0..mesh.n_nodes() {
        let l = mesh.lattice(v);
        if l[1] == top {
            problem.set_velocity_vector(v, [1.0, 0.0, 0.0]);
        } else if l[0] == 0 || l[0] == top || l[1] == 0 {
            problem.set_velocity_vector(v, [0.0; 3]);
        } else if l[2] == 0 || l[2] == top {
            problem.set_velocity(v, 2, 0.0);
        }
    }
    Ok((mesh, problem))
}

/// Lid velocity of the rotated-lid cavity: unit speed, turned by `pi/8`
/// about the `y` axis.
pub fn rotated_lid_velocity() -> [f64; 3] {
    let a = PI / 8.0;
    [a.cos(), 0.0, a.sin()]
}

/// Cubic cavity with a rotated lid on Taylor-Hood elements.
pub fn define_problem_2(n: usize) -> Result<(Mesh, StokesProblem)> {
    if n % 2 != 0 {
        return Err(Error::invalid(format!("problem 2 needs even n, got {n}")));
    }
    let mesh = build_structured_mesh(n, ElementFamily::Q2Q1)?;
    let mut problem = StokesProblem::new(CAVITY_VISCOSITY, center_vertex(&mesh)?)?;
    let lid = rotated_lid_velocity();
    let top = 2 * n;
    for v in 0..mesh.n_nodes() {
        let l = mesh.lattice(v);
        if l[1] == top {
            problem.set_velocity_vector(v, lid);
        } else if mesh.is_on_boundary(v) {
            problem.set_velocity_vector(v, [0.0; 3]);
        }
    }
    Ok((mesh, problem))
}
