use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{check_len, Error, Result};
use crate::mesh::{Field, Mesh};

const VTK_HEXAHEDRON: u8 = 12;

/// Pressure at any velocity node: trilinear interpolation of the vertex
/// values, which at a mid-edge, mid-face or centre node is the mean of the
/// surrounding vertices.
fn nodal_pressure(mesh: &Mesh, values: &[f64], node: usize) -> f64 {
    let l = mesh.lattice(node);
    let mut choices: [Vec<usize>; 3] = Default::default();
    for d in 0..3 {
        choices[d] = if l[d] % 2 == 0 { vec![l[d]] } else { vec![l[d] - 1, l[d] + 1] };
    }
    let mut sum = 0.0;
    let mut count = 0.0;
    for &z in &choices[2] {
        for &y in &choices[1] {
            for &x in &choices[0] {
                let v = mesh.node_at_lattice([x, y, z]).expect("vertex exists");
                let d = mesh.dof(v, Field::P).expect("vertex carries pressure");
                sum += values[d];
                count += 1.0;
            }
        }
    }
    sum / count
}

/// Writes a legacy ASCII VTK unstructured grid: every velocity node is a
/// point, every element one hexahedron over its corner vertices.
pub fn write_vtk<W: Write>(mesh: &Mesh, values: &[f64], out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    let n_points = mesh.n_nodes();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "Stokes flow, {} elements per axis", mesh.n())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n_points} double")?;
    for v in 0..n_points {
        let [x, y, z] = mesh.coords(v);
        writeln!(w, "{x} {y} {z}")?;
    }
    let n_cells = mesh.elements().len();
    writeln!(w, "CELLS {n_cells} {}", 9 * n_cells)?;
    for e in mesh.elements() {
        write!(w, "8")?;
        for v in e.vertices() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {n_cells}")?;
    for _ in 0..n_cells {
        writeln!(w, "{VTK_HEXAHEDRON}")?;
    }
    writeln!(w, "POINT_DATA {n_points}")?;
    writeln!(w, "VECTORS velocity double")?;
    for v in 0..n_points {
        let d = mesh.velocity_dof(v, 0);
        writeln!(w, "{} {} {}", values[d], values[d + 1], values[d + 2])?;
    }
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in 0..n_points {
        writeln!(w, "{}", nodal_pressure(mesh, values, v))?;
    }
    w.flush()
}

/// Writes `values` (a full dof vector) on `mesh` to a VTK file.
pub fn export_vtk(mesh: &Mesh, values: &[f64], path: &Path) -> Result<()> {
    check_len(mesh.n_dofs(), values.len())?;
    let mut buf = Vec::new();
    write_vtk(mesh, values, &mut buf).map_err(|e| Error::io(path, e))?;
    super::write_atomic(path, &buf)
}
