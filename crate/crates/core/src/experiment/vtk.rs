use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::postprocess::DiscreteSolution;

use super::ExperimentError;

/// Names of the cell arrays written by [`write_vtk`], in file order.
pub const CELL_ARRAYS: [&str; 8] = ["u_x", "u_y", "u_magnitude", "p_mean", "sigma_11", "sigma_12", "sigma_21", "sigma_22"];

/// Writes the solution as a legacy ASCII VTK polygon file with cell data.
pub fn write_vtk<W: Write>(mut w: W, sol: &DiscreteSolution) -> io::Result<()> {
    let mesh = sol.mesh;
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "pseudovem {} fields", sol.case.tag)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(w, "{:.17e} {:.17e} 0", v.x, v.y)?;
    }
    let size: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    writeln!(w, "POLYGONS {} {}", mesh.n_cells(), size)?;
    for c in mesh.cells() {
        write!(w, "{}", c.len())?;
        for v in c {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_DATA {}", mesh.n_cells())?;
    let p = sol.pressure_cell_means();
    let columns: [Box<dyn Fn(usize) -> f64 + '_>; 8] = [
        Box::new(|c| sol.u.cell(c).x),
        Box::new(|c| sol.u.cell(c).y),
        Box::new(|c| sol.u.cell(c).norm()),
        Box::new(|c| p[c]),
        Box::new(|c| sol.pi_sigma[c].0[0][0]),
        Box::new(|c| sol.pi_sigma[c].0[0][1]),
        Box::new(|c| sol.pi_sigma[c].0[1][0]),
        Box::new(|c| sol.pi_sigma[c].0[1][1]),
    ];
    for (name, col) in CELL_ARRAYS.iter().zip(&columns) {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for c in 0..mesh.n_cells() {
            writeln!(w, "{:.17e}", col(c))?;
        }
    }
    w.flush()
}

/// Writes [`write_vtk`] output to `path`.
pub fn export_fields(sol: &DiscreteSolution, path: &Path) -> Result<(), ExperimentError> {
    if sol.mesh.n_cells() == 0 {
        return Err(ExperimentError::EmptyMesh);
    }
    let file = File::create(path).map_err(|e| ExperimentError::Path {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_vtk(BufWriter::new(file), sol).map_err(|e| ExperimentError::Path {
        path: path.to_path_buf(),
        source: e,
    })
}
