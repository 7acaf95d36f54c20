//! BDDC preconditioner built from globally assembled matrices.
//!
//! Interface dofs are torn apart into one copy per owning subdomain
//! ("virtual" dofs), except at corners, which stay shared. The virtual
//! matrix is assembled element by element exactly like the original one.
//! Edge and face averages are kept continuous by Lagrange multipliers, so
//! the preconditioner action is
//!
//! ```text
//! v = E [Ã Cᵀ; C 0]⁻¹ [Eᵀ r; 0]
//! ```
//!
//! where `E` averages the copies with weights `1 / multiplicity`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomp::{classify_globs, Decomposition, GlobKind, GlobSets, NodeClass};
use crate::error::{check_len, Error, Result};
use crate::krylov::LinearOperator;
use crate::linalg::norm_inf;
use crate::mesh::{Field, Mesh};
use crate::sparse_la::{factor, FactorKind, Factorization, SparseMatrix};
use crate::stokes::element::ElementKernel;
use crate::stokes::{assemble_elements, SaddleSystem};

/// Which coarse degrees of freedom are enforced beyond corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraints {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "ce")]
    CE,
    #[serde(rename = "cf")]
    CF,
    #[serde(rename = "cef")]
    CEF,
}

impl Constraints {
    pub const ALL: [Constraints; 4] = [Constraints::C, Constraints::CE, Constraints::CF, Constraints::CEF];

    pub fn edges(self) -> bool {
        matches!(self, Constraints::CE | Constraints::CEF)
    }

    pub fn faces(self) -> bool {
        matches!(self, Constraints::CF | Constraints::CEF)
    }

    pub fn name(self) -> &'static str {
        match self {
            Constraints::C => "c",
            Constraints::CE => "ce",
            Constraints::CF => "cf",
            Constraints::CEF => "cef",
        }
    }
}

impl fmt::Display for Constraints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constraints {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('+', "").as_str() {
            "c" => Ok(Constraints::C),
            "ce" => Ok(Constraints::CE),
            "cf" => Ok(Constraints::CF),
            "cef" => Ok(Constraints::CEF),
            other => Err(Error::invalid(format!("unknown constraint set `{other}`"))),
        }
    }
}

/// Weighted map between reduced dofs and their virtual copies.
#[derive(Debug, Clone)]
pub struct AveragingOperator {
    copy_ptr: Vec<usize>,
    copies: Vec<usize>,
    weights: Vec<f64>,
    n_virtual: usize,
}

impl AveragingOperator {
    pub fn n_original(&self) -> usize {
        self.copy_ptr.len() - 1
    }

    pub fn n_virtual(&self) -> usize {
        self.n_virtual
    }

    pub fn copies_of(&self, r: usize) -> &[usize] {
        &self.copies[self.copy_ptr[r]..self.copy_ptr[r + 1]]
    }

    pub fn weights_of(&self, r: usize) -> &[f64] {
        &self.weights[self.copy_ptr[r]..self.copy_ptr[r + 1]]
    }

    /// `E`: weighted average of the copies of every original dof.
    pub fn average(&self, virt: &[f64]) -> Vec<f64> {
        (0..self.n_original())
            .map(|r| {
                self.copies_of(r)
                    .iter()
                    .zip(self.weights_of(r))
                    .map(|(&c, &w)| w * virt[c])
                    .sum()
            })
            .collect()
    }

    /// `Eᵀ`: scatters weighted values to every copy.
    pub fn distribute(&self, orig: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_virtual];
        for (r, &x) in orig.iter().enumerate() {
            for (&c, &w) in self.copies_of(r).iter().zip(self.weights_of(r)) {
                out[c] += w * x;
            }
        }
        out
    }

    /// `R`: copies each value unchanged to all its virtual copies.
    pub fn inject(&self, orig: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_virtual];
        for (r, &x) in orig.iter().enumerate() {
            for &c in self.copies_of(r) {
                out[c] = x;
            }
        }
        out
    }
}

/// Virtual (partially torn) saddle-point system with its factored
/// constraint augmentation.
#[derive(Debug)]
pub struct VirtualSystem {
    constraints: Constraints,
    averaging: AveragingOperator,
    /// Owning subdomain of each virtual dof, `None` for shared corner dofs.
    owner: Vec<Option<usize>>,
    /// Reduced dof each virtual dof copies.
    original: Vec<usize>,
    matrix: SparseMatrix,
    constraint_rows: SparseMatrix,
    factors: Factorization,
    interface: Vec<usize>,
}

pub fn build_virtual_system(
    system: &SaddleSystem,
    mesh: &Mesh,
    decomp: &Decomposition,
    constraints: Constraints,
) -> Result<VirtualSystem> {
    let globs = classify_globs(mesh, decomp);
    build_with_globs(system, mesh, decomp, &globs, constraints)
}

/// As [`build_virtual_system`] with a precomputed glob classification.
pub fn build_with_globs(
    system: &SaddleSystem,
    mesh: &Mesh,
    decomp: &Decomposition,
    globs: &GlobSets,
    constraints: Constraints,
) -> Result<VirtualSystem> {
    let n = system.n();
    let mut copy_ptr = Vec::with_capacity(n + 1);
    let mut copies = Vec::new();
    let mut weights = Vec::new();
    let mut owner = Vec::new();
    let mut original = Vec::new();
    let mut interface = Vec::new();
    copy_ptr.push(0);
    for r in 0..n {
        let (node, _) = mesh.dof_owner(system.global_dof(r));
        let sharing = decomp.sharing(node);
        if sharing.len() > 1 {
            interface.push(r);
        }
        match globs.node_class[node] {
            NodeClass::Interior(s) => {
                owner.push(Some(s));
                original.push(r);
                copies.push(owner.len() - 1);
                weights.push(1.0);
            }
            NodeClass::Corner => {
                owner.push(None);
                original.push(r);
                copies.push(owner.len() - 1);
                weights.push(1.0);
            }
            NodeClass::Glob(_) => {
                let w = 1.0 / sharing.len() as f64;
                for &s in sharing {
                    owner.push(Some(s));
                    original.push(r);
                    copies.push(owner.len() - 1);
                    weights.push(w);
                }
            }
        }
        copy_ptr.push(copies.len());
    }
    let n_virtual = owner.len();
    let averaging = AveragingOperator {
        copy_ptr,
        copies,
        weights,
        n_virtual,
    };

    let virt = |r: usize, s: usize, node: usize| -> usize {
        let cs = averaging.copies_of(r);
        if cs.len() == 1 {
            cs[0]
        } else {
            let k = decomp.sharing(node).binary_search(&s).expect("subdomain owns node");
            cs[k]
        }
    };

    let kernel = ElementKernel::new(mesh.family(), mesh.h(), system.viscosity());
    let mut triplets = Vec::new();
    for s in 0..decomp.n_subdomains() {
        let elements = decomp.elements_of(s);
        assemble_elements(
            mesh,
            &kernel,
            elements.iter().map(|&e| &mesh.elements()[e]),
            |_, d| {
                system.free_index(d).map(|r| {
                    let (node, _) = mesh.dof_owner(d);
                    virt(r, s, node)
                })
            },
            &mut triplets,
        );
    }
    let matrix = SparseMatrix::from_triplets(n_virtual, n_virtual, &triplets)?.into_symmetric()?;

    let mut c_trip = Vec::new();
    let mut n_rows = 0;
    for glob in &globs.globs {
        let active = match glob.kind {
            GlobKind::Edge => constraints.edges(),
            GlobKind::Face => constraints.faces(),
        };
        if !active {
            continue;
        }
        for field in Field::ALL {
            let members: Vec<(usize, usize)> = glob
                .nodes
                .iter()
                .filter_map(|&v| mesh.dof(v, field).and_then(|d| system.free_index(d)).map(|r| (v, r)))
                .collect();
            if members.is_empty() {
                continue;
            }
            let w = 1.0 / members.len() as f64;
            let first = glob.subdomains[0];
            for &other in &glob.subdomains[1..] {
                for &(v, r) in &members {
                    c_trip.push((n_rows, virt(r, other, v), w));
                    c_trip.push((n_rows, virt(r, first, v), -w));
                }
                n_rows += 1;
            }
        }
    }
    let constraint_rows = SparseMatrix::from_triplets(n_rows, n_virtual, &c_trip)?;

    let mut aug = triplets;
    for &(i, j, v) in &c_trip {
        aug.push((n_virtual + i, j, v));
        aug.push((j, n_virtual + i, v));
    }
    let total = n_virtual + n_rows;
    let augmented = SparseMatrix::from_triplets(total, total, &aug)?.into_symmetric()?;
    let factors = factor(&augmented, FactorKind::SymmetricIndefinite).map_err(|e| Error::InsufficientCoarseSpace {
        source: Box::new(e),
    })?;

    Ok(VirtualSystem {
        constraints,
        averaging,
        owner,
        original,
        matrix,
        constraint_rows,
        factors,
        interface,
    })
}

impl VirtualSystem {
    pub fn constraints(&self) -> Constraints {
        self.constraints
    }

    pub fn averaging(&self) -> &AveragingOperator {
        &self.averaging
    }

    pub fn n_virtual(&self) -> usize {
        self.averaging.n_virtual
    }

    pub fn n_constraints(&self) -> usize {
        self.constraint_rows.n_rows()
    }

    /// The virtual matrix `Ã`.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// The constraint matrix `C`.
    pub fn constraint_matrix(&self) -> &SparseMatrix {
        &self.constraint_rows
    }

    pub fn factor_nnz(&self) -> usize {
        self.factors.nnz()
    }

    /// Reduced dofs on the interface, increasing.
    pub fn interface(&self) -> &[usize] {
        &self.interface
    }

    /// Owner of a virtual dof; `None` for corners.
    pub fn owner(&self, v: usize) -> Option<usize> {
        self.owner[v]
    }

    /// The reduced dof that virtual dof `v` copies.
    pub fn original(&self, v: usize) -> usize {
        self.original[v]
    }

    /// Virtual dofs seen by subdomain `s`: its own copies plus corners it touches.
    pub fn subdomain_dofs(&self, s: usize, decomp: &Decomposition, mesh: &Mesh, system: &SaddleSystem) -> Vec<usize> {
        (0..self.n_virtual())
            .filter(|&v| match self.owner[v] {
                Some(o) => o == s,
                None => {
                    let (node, _) = mesh.dof_owner(system.global_dof(self.original[v]));
                    decomp.sharing(node).contains(&s)
                }
            })
            .collect()
    }

    /// Solves the augmented system for a virtual right-hand side; returns
    /// the virtual part of the solution.
    pub fn solve_virtual(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_virtual() + self.n_constraints()];
        x[..rhs.len()].copy_from_slice(rhs);
        self.factors.solve_in_place(&mut x);
        x.truncate(self.n_virtual());
        x
    }

    /// `max |C w|`.
    pub fn constraint_violation(&self, w: &[f64]) -> f64 {
        let mut cw = vec![0.0; self.n_constraints()];
        self.constraint_rows.mul_acc(1.0, w, &mut cw);
        norm_inf(&cw)
    }

    /// Preconditioner action on an interface residual.
    pub fn apply_bddc(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len(self.interface.len(), r.len())?;
        let mut full = vec![0.0; self.averaging.n_original()];
        for (k, &i) in self.interface.iter().enumerate() {
            full[i] = r[k];
        }
        let v = self.averaging.average(&self.solve_virtual(&self.averaging.distribute(&full)));
        Ok(self.interface.iter().map(|&i| v[i]).collect())
    }

    /// Preconditioner action on a residual of the whole reduced system.
    /// Exact when there is a single subdomain.
    pub fn apply_full(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len(self.averaging.n_original(), r.len())?;
        Ok(self.averaging.average(&self.solve_virtual(&self.averaging.distribute(r))))
    }

    pub fn interface_preconditioner(&self) -> InterfaceBddc<'_> {
        InterfaceBddc(self)
    }

    pub fn full_preconditioner(&self) -> FullBddc<'_> {
        FullBddc(self)
    }
}

/// [`VirtualSystem::apply_bddc`] as an operator.
pub struct InterfaceBddc<'a>(&'a VirtualSystem);

impl LinearOperator for InterfaceBddc<'_> {
    fn dim(&self) -> usize {
        self.0.interface.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.0.apply_bddc(x).expect("interface length"));
    }
}

/// [`VirtualSystem::apply_full`] as an operator.
pub struct FullBddc<'a>(&'a VirtualSystem);

impl LinearOperator for FullBddc<'_> {
    fn dim(&self) -> usize {
        self.0.averaging.n_original()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.0.apply_full(x).expect("reduced length"));
    }
}
