//! Moment projection of analytic vector fields onto RT_k.
//!
//! The projection matches face moments against P_k and cell moments against
//! the derivative test spaces, then solves the local block system
//! face-by-face and cell-by-cell. For divergence-free data given through a
//! stream function, the field is first replaced per cell by the curl of a
//! Q_{k+1,k+1} interpolant of the stream function; the replaced field is
//! itself in RT_k with continuous normal components, all projection
//! integrals become exact, and the projected divergence vanishes to roundoff.

use rayon::prelude::*;

use crate::basis::{gauss_legendre, test_space, LagrangeBasis1d, TestSpaceKind};
use crate::mass::assemble_blocks;
use crate::mesh::CartesianMesh;
use crate::space::{FieldState, RtElement};
use crate::Result;

/// An analytic vector field, optionally with a stream function and an exact
/// divergence.
///
/// When `stream` is present, `eval` must equal the curl `(d/dy S, -d/dx S)`;
/// projection then routes through the exactness-preserving pathway.
#[derive(Clone, Copy)]
pub struct AnalyticField {
    pub eval: fn(f64, f64) -> (f64, f64),
    pub stream: Option<fn(f64, f64) -> f64>,
    pub divergence: Option<fn(f64, f64) -> f64>,
}

impl AnalyticField {
    pub fn project(&self, mesh: &CartesianMesh, k: usize) -> Result<FieldState> {
        match self.stream {
            Some(s) => project_divfree(&s, mesh, k),
            None => project(&self.eval, mesh, k),
        }
    }
}

/// Interpolation nodes for the per-cell Q_{k+1,k+1} stream-function
/// interpolant: the k+2 Gauss-Lobatto points. They include the cell corners,
/// so traces on shared faces coincide from both sides.
pub fn stream_nodes(k: usize) -> Vec<f64> {
    match k {
        0 => vec![0.0, 1.0],
        1 => vec![0.0, 0.5, 1.0],
        2 => {
            let g = 0.5 / 5.0_f64.sqrt();
            vec![0.0, 0.5 - g, 0.5 + g, 1.0]
        }
        _ => panic!("unsupported degree {k}"),
    }
}

/// Project an analytic field onto RT_k by its face and cell moments,
/// integrated with (k+3)-point Gauss rules.
pub fn project<F>(field: &F, mesh: &CartesianMesh, k: usize) -> Result<FieldState>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let blocks = assemble_blocks(k)?;
    let face_test = test_space(TestSpaceKind::Face, k)?;
    let dx_test = test_space(TestSpaceKind::CellDx, k)?;
    let dy_test = test_space(TestSpaceKind::CellDy, k)?;
    let rule = gauss_legendre(k + 3)?;
    let nf = k + 1;
    let ni = k * (k + 1);
    let mut state = FieldState::zeros(mesh, k);

    // faces: M b = moments of the normal component
    let nxp = mesh.nx + 1;
    state
        .vface
        .par_chunks_mut(nf)
        .enumerate()
        .for_each(|(f, dofs)| {
            let (i, j) = (f % nxp, f / nxp);
            let (xf, y0) = mesh.vface_origin(i, j);
            let mut rhs = vec![0.0; nf];
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let bx = field(xf, y0 + s * mesh.dy).0;
                for m in 0..nf {
                    rhs[m] += w * bx * face_test.eval(m, s - 0.5, 0.0);
                }
            }
            blocks.solve_vface_rates(&mut rhs, 1.0);
            dofs.copy_from_slice(&rhs);
        });
    state
        .hface
        .par_chunks_mut(nf)
        .enumerate()
        .for_each(|(f, dofs)| {
            let (i, j) = (f % mesh.nx, f / mesh.nx);
            let (x0, yf) = mesh.hface_origin(i, j);
            let mut rhs = vec![0.0; nf];
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let by = field(x0 + s * mesh.dx, yf).1;
                for m in 0..nf {
                    rhs[m] += w * by * face_test.eval(m, s - 0.5, 0.0);
                }
            }
            blocks.solve_hface_rates(&mut rhs, 1.0);
            dofs.copy_from_slice(&rhs);
        });

    if ni == 0 {
        return Ok(state);
    }

    // cells: back-substitute the interior unknowns
    let vface = state.vface.clone();
    let hface = state.hface.clone();
    let (bx_cells, by_cells): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let (i, j) = mesh.cell_ij(cell);
            let (x0, y0) = mesh.cell_origin(cell);
            let mut mom_x = vec![0.0; ni];
            let mut mom_y = vec![0.0; ni];
            for (&xi, &wx) in rule.points.iter().zip(&rule.weights) {
                for (&eta, &wy) in rule.points.iter().zip(&rule.weights) {
                    let w = wx * wy;
                    let (bx, by) = field(x0 + xi * mesh.dx, y0 + eta * mesh.dy);
                    for m in 0..ni {
                        mom_x[m] += w * bx * dx_test.eval(m, xi - 0.5, eta - 0.5);
                        mom_y[m] += w * by * dy_test.eval(m, xi - 0.5, eta - 0.5);
                    }
                }
            }
            let left = &vface[mesh.vface_index(i, j) * nf..][..nf];
            let right = &vface[mesh.vface_index(i + 1, j) * nf..][..nf];
            let bottom = &hface[mesh.hface_index(i, j) * nf..][..nf];
            let top = &hface[mesh.hface_index(i, j + 1) * nf..][..nf];
            let mut bx = vec![0.0; ni];
            let mut by = vec![0.0; ni];
            blocks.solve_bx_interior_rates(&mom_x, 1.0, left, right, &mut bx);
            blocks.solve_by_interior_rates(&mom_y, 1.0, bottom, top, &mut by);
            (bx, by)
        })
        .unzip();
    for (cell, (bx, by)) in bx_cells.into_iter().zip(by_cells).enumerate() {
        state.bx_int[cell * ni..(cell + 1) * ni].copy_from_slice(&bx);
        state.by_int[cell * ni..(cell + 1) * ni].copy_from_slice(&by);
    }
    Ok(state)
}

/// Project the curl of a stream function, preserving zero divergence to
/// machine precision.
pub fn project_divfree<S>(stream: &S, mesh: &CartesianMesh, k: usize) -> Result<FieldState>
where
    S: Fn(f64, f64) -> f64 + Sync,
{
    let blocks = assemble_blocks(k)?;
    let face_test = test_space(TestSpaceKind::Face, k)?;
    let dx_test = test_space(TestSpaceKind::CellDx, k)?;
    let dy_test = test_space(TestSpaceKind::CellDy, k)?;
    let rule = gauss_legendre(k + 3)?;
    let interp = LagrangeBasis1d::new(stream_nodes(k));
    let np = interp.len();
    let nf = k + 1;
    let ni = k * (k + 1);
    let mut state = FieldState::zeros(mesh, k);

    // interpolant derivative values at the quadrature points
    let dl: Vec<Vec<f64>> = rule.points.iter().map(|&q| interp.deriv_all(q)).collect();
    let l: Vec<Vec<f64>> = rule.points.iter().map(|&q| interp.eval_all(q)).collect();

    // vertical faces: B_x = d/dy of the 1-D face interpolant of the stream
    // function; the trace only depends on face samples, so shared faces get
    // identical moments from either side
    let nxp = mesh.nx + 1;
    state
        .vface
        .par_chunks_mut(nf)
        .enumerate()
        .for_each(|(f, dofs)| {
            let (i, j) = (f % nxp, f / nxp);
            let (xf, y0) = mesh.vface_origin(i, j);
            let samples: Vec<f64> = interp
                .nodes
                .iter()
                .map(|&p| stream(xf, y0 + p * mesh.dy))
                .collect();
            let mut rhs = vec![0.0; nf];
            for (q, &w) in rule.weights.iter().enumerate() {
                let bx: f64 = samples.iter().zip(&dl[q]).map(|(s, d)| s * d).sum::<f64>() / mesh.dy;
                for m in 0..nf {
                    rhs[m] += w * bx * face_test.eval(m, rule.points[q] - 0.5, 0.0);
                }
            }
            blocks.solve_vface_rates(&mut rhs, 1.0);
            dofs.copy_from_slice(&rhs);
        });
    // horizontal faces: B_y = -d/dx of the face interpolant
    state
        .hface
        .par_chunks_mut(nf)
        .enumerate()
        .for_each(|(f, dofs)| {
            let (i, j) = (f % mesh.nx, f / mesh.nx);
            let (x0, yf) = mesh.hface_origin(i, j);
            let samples: Vec<f64> = interp
                .nodes
                .iter()
                .map(|&p| stream(x0 + p * mesh.dx, yf))
                .collect();
            let mut rhs = vec![0.0; nf];
            for (q, &w) in rule.weights.iter().enumerate() {
                let by: f64 =
                    -samples.iter().zip(&dl[q]).map(|(s, d)| s * d).sum::<f64>() / mesh.dx;
                for m in 0..nf {
                    rhs[m] += w * by * face_test.eval(m, rule.points[q] - 0.5, 0.0);
                }
            }
            blocks.solve_hface_rates(&mut rhs, 1.0);
            dofs.copy_from_slice(&rhs);
        });

    if ni == 0 {
        return Ok(state);
    }

    let vface = state.vface.clone();
    let hface = state.hface.clone();
    let (bx_cells, by_cells): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let (i, j) = mesh.cell_ij(cell);
            let (x0, y0) = mesh.cell_origin(cell);
            // stream samples on the tensor interpolation lattice
            let mut phi = vec![0.0; np * np];
            for (p, &sx) in interp.nodes.iter().enumerate() {
                for (r, &sy) in interp.nodes.iter().enumerate() {
                    phi[p * np + r] = stream(x0 + sx * mesh.dx, y0 + sy * mesh.dy);
                }
            }
            let mut mom_x = vec![0.0; ni];
            let mut mom_y = vec![0.0; ni];
            for (qx, &wx) in rule.weights.iter().enumerate() {
                for (qy, &wy) in rule.weights.iter().enumerate() {
                    let w = wx * wy;
                    let mut bx = 0.0;
                    let mut by = 0.0;
                    for p in 0..np {
                        for r in 0..np {
                            let s = phi[p * np + r];
                            bx += s * l[qx][p] * dl[qy][r];
                            by -= s * dl[qx][p] * l[qy][r];
                        }
                    }
                    bx /= mesh.dy;
                    by /= mesh.dx;
                    let (xi, eta) = (rule.points[qx] - 0.5, rule.points[qy] - 0.5);
                    for m in 0..ni {
                        mom_x[m] += w * bx * dx_test.eval(m, xi, eta);
                        mom_y[m] += w * by * dy_test.eval(m, xi, eta);
                    }
                }
            }
            let left = &vface[mesh.vface_index(i, j) * nf..][..nf];
            let right = &vface[mesh.vface_index(i + 1, j) * nf..][..nf];
            let bottom = &hface[mesh.hface_index(i, j) * nf..][..nf];
            let top = &hface[mesh.hface_index(i, j + 1) * nf..][..nf];
            let mut bx = vec![0.0; ni];
            let mut by = vec![0.0; ni];
            blocks.solve_bx_interior_rates(&mom_x, 1.0, left, right, &mut bx);
            blocks.solve_by_interior_rates(&mom_y, 1.0, bottom, top, &mut by);
            (bx, by)
        })
        .unzip();
    for (cell, (bx, by)) in bx_cells.into_iter().zip(by_cells).enumerate() {
        state.bx_int[cell * ni..(cell + 1) * ni].copy_from_slice(&bx);
        state.by_int[cell * ni..(cell + 1) * ni].copy_from_slice(&by);
    }
    Ok(state)
}

/// Integral over one cell of `div(B_h) * phi`, with `phi` given in centered
/// reference coordinates. Exact for polynomial `phi` of degree <= k+1.
pub fn divergence_moment<F>(mesh: &CartesianMesh, state: &FieldState, cell: usize, phi: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let element = RtElement::new(state.k).expect("state degree");
    let rule = gauss_legendre(state.k + 2).expect("rule");
    let tab = element.tabulate(&rule);
    let mut local = vec![0.0; element.dof_count()];
    state.gather_cell(mesh, cell, &mut local);
    let mut sum = 0.0;
    for qx in 0..rule.points.len() {
        for qy in 0..rule.points.len() {
            let d = element.div_tab(&local, &tab, qx, qy, mesh.dx, mesh.dy);
            sum += tab.weights[qx]
                * tab.weights[qy]
                * d
                * phi(rule.points[qx] - 0.5, rule.points[qy] - 0.5);
        }
    }
    sum * mesh.dx * mesh.dy
}
