//! Legacy-ASCII VTK structured-grid output.
//!
//! Fields are point-sampled on a per-cell (k+2) x (k+2) lattice placed
//! strictly inside each cell, so the global point set is monotone and
//! discontinuities across cell faces stay visible. Four point arrays are
//! written: B_x, B_y, |B| and div(B).

use std::fmt::Write as _;
use std::path::Path;

use crate::basis::QuadratureRule1d;
use crate::mesh::CartesianMesh;
use crate::space::{FieldState, RtElement};
use crate::{Error, Result};

/// Render the state to a legacy VTK string; `t` is recorded in the title
/// line.
pub fn render_vtk(mesh: &CartesianMesh, state: &FieldState, t: f64) -> String {
    let k = state.k;
    let element = RtElement::new(k).expect("state degree");
    let ns = k + 2;
    // interior-offset sample lattice
    let offsets: Vec<f64> = (0..ns).map(|m| (m as f64 + 0.5) / ns as f64).collect();
    let tab = element.tabulate(&QuadratureRule1d {
        points: offsets.clone(),
        weights: vec![0.0; ns],
    });
    let npx = mesh.nx * ns;
    let npy = mesh.ny * ns;

    let mut bx = vec![0.0; npx * npy];
    let mut by = vec![0.0; npx * npy];
    let mut div = vec![0.0; npx * npy];
    let mut local = vec![0.0; element.dof_count()];
    for cj in 0..mesh.ny {
        for ci in 0..mesh.nx {
            let cell = mesh.cell_index(ci, cj);
            state.gather_cell(mesh, cell, &mut local);
            for (my, _) in offsets.iter().enumerate() {
                for (mx, _) in offsets.iter().enumerate() {
                    let gi = ci * ns + mx;
                    let gj = cj * ns + my;
                    let idx = gj * npx + gi;
                    let (vx, vy) = element.eval_tab(&local, &tab, mx, my);
                    bx[idx] = vx;
                    by[idx] = vy;
                    div[idx] = element.div_tab(&local, &tab, mx, my, mesh.dx, mesh.dy);
                }
            }
        }
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "rtdg field sample, t = {t:.12e}");
    out.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    let _ = writeln!(out, "DIMENSIONS {npx} {npy} 1");
    let _ = writeln!(out, "POINTS {} double", npx * npy);
    for gj in 0..npy {
        let (cj, my) = (gj / ns, gj % ns);
        let y = mesh.y_min + (cj as f64 + offsets[my]) * mesh.dy;
        for gi in 0..npx {
            let (ci, mx) = (gi / ns, gi % ns);
            let x = mesh.x_min + (ci as f64 + offsets[mx]) * mesh.dx;
            let _ = writeln!(out, "{x:.12e} {y:.12e} 0");
        }
    }
    let _ = writeln!(out, "POINT_DATA {}", npx * npy);
    let bmag: Vec<f64> = bx.iter().zip(&by).map(|(a, b)| a.hypot(*b)).collect();
    let scalars: [(&str, &[f64]); 4] = [("Bx", &bx), ("By", &by), ("Bmag", &bmag), ("divB", &div)];
    for (name, values) in scalars {
        let _ = writeln!(out, "SCALARS {name} double 1");
        out.push_str("LOOKUP_TABLE default\n");
        for v in values.iter() {
            let _ = writeln!(out, "{v:.12e}");
        }
    }
    out
}

/// Write the rendered VTK file.
pub fn write_vtk(mesh: &CartesianMesh, state: &FieldState, path: &Path, t: f64) -> Result<()> {
    std::fs::write(path, render_vtk(mesh, state, t)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::project;

    #[test]
    fn smallest_output_has_four_points_and_four_arrays() {
        let mesh = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        let state = FieldState::zeros(&mesh, 0);
        let text = render_vtk(&mesh, &state, 0.0);
        assert!(text.contains("DIMENSIONS 2 2 1"));
        assert!(text.contains("POINTS 4 double"));
        assert_eq!(text.matches("SCALARS").count(), 4);
        assert_eq!(text.matches("LOOKUP_TABLE default").count(), 4);
    }

    #[test]
    fn output_is_deterministic() {
        let mesh = CartesianMesh::new(-1.0, -1.0, 1.0, 1.0, 4, 3).unwrap();
        let state = project(&|x: f64, y: f64| ((x * y).sin(), (x - y).cos()), &mesh, 2).unwrap();
        let a = render_vtk(&mesh, &state, 0.25);
        let b = render_vtk(&mesh, &state, 0.25);
        assert_eq!(a, b);
    }

    #[test]
    fn sample_points_stay_inside_cells_and_increase() {
        let mesh = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 2, 2).unwrap();
        let state = FieldState::zeros(&mesh, 1);
        let text = render_vtk(&mesh, &state, 0.0);
        let mut xs = Vec::new();
        for line in text
            .lines()
            .skip_while(|l| !l.starts_with("POINTS"))
            .skip(1)
            .take(6)
        {
            let x: f64 = line.split_whitespace().next().unwrap().parse().unwrap();
            xs.push(x);
        }
        for w in xs.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(xs[0] > 0.0 && xs[5] < 1.0);
    }

    #[test]
    fn write_reports_path_on_failure() {
        let mesh = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        let state = FieldState::zeros(&mesh, 0);
        let err = write_vtk(&mesh, &state, Path::new("/nonexistent-dir/out.vtk"), 0.0).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.vtk"));
    }
}
