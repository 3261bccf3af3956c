//! Semi-discrete DG residuals, local rate solves, SSP-RK3 time stepping and
//! the run loop.
//!
//! Face unknowns evolve by the 1-D face scheme
//!
//! ```text
//! d/dt (Bx, phi)_e = (Ehat, dphi/dy)_e - [Etilde phi]_e - (Mx, phi)_e
//! ```
//!
//! and interior unknowns by the standard 2-D scheme with the electric field
//! E = v_y Bx - v_x By in the volume term. One flux value is computed per
//! face quadrature point and shared verbatim between the face equation and
//! the adjacent cells' surface terms, and one vertex flux per mesh vertex;
//! together with exact mass blocks this is what makes the discrete
//! divergence moments of the assembled rates vanish identically when the
//! source is zero.

use rayon::prelude::*;

use crate::basis::{gauss_legendre, test_space, TestSpaceKind};
use crate::diagnostics::l2_div_norm;
use crate::flux::{
    complete_vertex_states, electric_field, upwind, vertex_flux, vertex_flux_compact,
};
use crate::mass::{assemble_blocks, CellMassBlocks};
use crate::mesh::CartesianMesh;
use crate::space::{EvalTable, FieldState, RtElement};
use crate::{Error, Result};

/// Problem data for the induction equation: a prescribed velocity field,
/// an optional source, and boundary data used at inflow.
pub trait Problem: Sync {
    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64);

    /// Source term M; only queried when `has_source` is true.
    fn source(&self, _x: f64, _y: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn has_source(&self) -> bool {
        false
    }

    /// Prescribed field at the domain boundary, consumed by upwind fluxes on
    /// inflow portions.
    fn boundary(&self, x: f64, y: f64, t: f64) -> (f64, f64);
}

/// Time-integration controls.
#[derive(Debug, Clone)]
pub struct TimeControls {
    pub cfl: f64,
    pub t_final: f64,
    /// Step cap when the sampled velocity maximum is (numerically) zero.
    pub dt_max: Option<f64>,
}

impl TimeControls {
    pub fn new(t_final: f64) -> Self {
        Self {
            cfl: 0.8,
            t_final,
            dt_max: None,
        }
    }
}

/// States that SSP-RK3 can advance.
pub trait RkState: Clone {
    /// a * self + b * other.
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl RkState for f64 {
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }
}

impl RkState for FieldState {
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        FieldState::lin_comb(self, a, other, b)
    }
}

/// One step of the third-order strong-stability-preserving Runge-Kutta
/// scheme in Shu-Osher form; stages evaluate the right-hand side at t, t+dt
/// and t+dt/2.
pub fn ssp_rk3_step<S, F>(u: &S, t: f64, dt: f64, mut rhs: F) -> S
where
    S: RkState,
    F: FnMut(&S, f64) -> S,
{
    let l0 = rhs(u, t);
    let u1 = u.lin_comb(1.0, &l0, dt);
    let l1 = rhs(&u1, t + dt);
    let u2 = u.lin_comb(0.75, &u1.lin_comb(1.0, &l1, dt), 0.25);
    let l2 = rhs(&u2, t + 0.5 * dt);
    u.lin_comb(1.0 / 3.0, &u2.lin_comb(1.0, &l2, dt), 2.0 / 3.0)
}

/// Moment right-hand sides of one residual evaluation, plus the flux caches
/// shared between the face and cell assemblies.
pub struct RhsBuffers {
    /// Per vertical face, k+1 moments.
    pub vface: Vec<f64>,
    pub hface: Vec<f64>,
    /// Per cell, k(k+1) interior moments per component.
    pub bx_cells: Vec<f64>,
    pub by_cells: Vec<f64>,
    /// Cached face fluxes, one per face quadrature point.
    pub e_vface: Vec<f64>,
    pub e_hface: Vec<f64>,
    /// One flux per mesh vertex.
    pub vertex: Vec<f64>,
}

/// Assembled operator for one mesh, degree and problem.
pub struct Simulation<'a, P: Problem> {
    pub mesh: &'a CartesianMesh,
    pub element: RtElement,
    pub blocks: CellMassBlocks,
    problem: &'a P,
    /// Basis values at the (k+2)-point Gauss rule.
    tab: EvalTable,
    /// Face basis values at the interval endpoints.
    phihat_at0: Vec<f64>,
    phihat_at1: Vec<f64>,
    // modal test tables at the quadrature points (m fastest-varying last)
    face_t: Vec<f64>,
    face_dt: Vec<f64>,
    face_t_lo: Vec<f64>,
    face_t_hi: Vec<f64>,
    psix_deta: Vec<f64>,
    psix_bot: Vec<f64>,
    psix_top: Vec<f64>,
    psix: Vec<f64>,
    psiy_dxi: Vec<f64>,
    psiy_left: Vec<f64>,
    psiy_right: Vec<f64>,
    psiy: Vec<f64>,
}

impl<'a, P: Problem> Simulation<'a, P> {
    pub fn new(mesh: &'a CartesianMesh, k: usize, problem: &'a P) -> Result<Self> {
        let element = RtElement::new(k)?;
        let blocks = assemble_blocks(k)?;
        let rule = gauss_legendre(k + 2)?;
        let tab = element.tabulate(&rule);
        let face_test = test_space(TestSpaceKind::Face, k)?;
        let dx_test = test_space(TestSpaceKind::CellDx, k)?;
        let dy_test = test_space(TestSpaceKind::CellDy, k)?;
        let nq = rule.points.len();
        let nf = k + 1;
        let ni = k * nf;

        let mut face_t = vec![0.0; nf * nq];
        let mut face_dt = vec![0.0; nf * nq];
        for m in 0..nf {
            for q in 0..nq {
                face_t[m * nq + q] = face_test.eval(m, rule.points[q] - 0.5, 0.0);
                face_dt[m * nq + q] = face_test.deriv_xi(m, rule.points[q] - 0.5, 0.0);
            }
        }
        let face_t_lo: Vec<f64> = (0..nf).map(|m| face_test.eval(m, -0.5, 0.0)).collect();
        let face_t_hi: Vec<f64> = (0..nf).map(|m| face_test.eval(m, 0.5, 0.0)).collect();

        let mut psix = vec![0.0; ni * nq * nq];
        let mut psix_deta = vec![0.0; ni * nq * nq];
        let mut psiy = vec![0.0; ni * nq * nq];
        let mut psiy_dxi = vec![0.0; ni * nq * nq];
        for m in 0..ni {
            for qx in 0..nq {
                for qy in 0..nq {
                    let (xi, eta) = (rule.points[qx] - 0.5, rule.points[qy] - 0.5);
                    let idx = (m * nq + qx) * nq + qy;
                    psix[idx] = dx_test.eval(m, xi, eta);
                    psix_deta[idx] = dx_test.deriv_eta(m, xi, eta);
                    psiy[idx] = dy_test.eval(m, xi, eta);
                    psiy_dxi[idx] = dy_test.deriv_xi(m, xi, eta);
                }
            }
        }
        let mut psix_bot = vec![0.0; ni * nq];
        let mut psix_top = vec![0.0; ni * nq];
        let mut psiy_left = vec![0.0; ni * nq];
        let mut psiy_right = vec![0.0; ni * nq];
        for m in 0..ni {
            for q in 0..nq {
                let s = rule.points[q] - 0.5;
                psix_bot[m * nq + q] = dx_test.eval(m, s, -0.5);
                psix_top[m * nq + q] = dx_test.eval(m, s, 0.5);
                psiy_left[m * nq + q] = dy_test.eval(m, -0.5, s);
                psiy_right[m * nq + q] = dy_test.eval(m, 0.5, s);
            }
        }

        let phihat_at0 = element.face_basis.eval_all(0.0);
        let phihat_at1 = element.face_basis.eval_all(1.0);
        Ok(Self {
            mesh,
            element,
            blocks,
            problem,
            phihat_at0,
            phihat_at1,
            tab,
            face_t,
            face_dt,
            face_t_lo,
            face_t_hi,
            psix,
            psix_deta,
            psix_bot,
            psix_top,
            psiy,
            psiy_dxi,
            psiy_left,
            psiy_right,
        })
    }

    pub fn degree(&self) -> usize {
        self.element.k
    }

    fn nq(&self) -> usize {
        self.tab.points.len()
    }

    /// Trace of B_x at a vertex endpoint of a vertical face (0 = bottom end,
    /// 1 = top end).
    fn vface_trace_end(&self, state: &FieldState, face: usize, end: usize) -> f64 {
        let basis = if end == 0 {
            &self.phihat_at0
        } else {
            &self.phihat_at1
        };
        state
            .vface_dofs(face)
            .iter()
            .zip(basis)
            .map(|(d, p)| d * p)
            .sum()
    }

    fn hface_trace_end(&self, state: &FieldState, face: usize, end: usize) -> f64 {
        let basis = if end == 0 {
            &self.phihat_at0
        } else {
            &self.phihat_at1
        };
        state
            .hface_dofs(face)
            .iter()
            .zip(basis)
            .map(|(d, p)| d * p)
            .sum()
    }

    /// B_y of a cell evaluated on its left (end = 0) or right (end = 1)
    /// side at tabulated point q along the face.
    fn by_at_vertical_side(&self, state: &FieldState, cell: usize, end: usize, q: usize) -> f64 {
        let k = self.element.k;
        let (i, j) = self.mesh.cell_ij(cell);
        let phihat_end = if end == 0 {
            &self.phihat_at0
        } else {
            &self.phihat_at1
        };
        let phi_eta = &self.tab.phi[q];
        let bottom = state.hface_dofs(self.mesh.hface_index(i, j));
        let top = state.hface_dofs(self.mesh.hface_index(i, j + 1));
        let interior = state.by_interior(cell);
        let mut by = 0.0;
        for ih in 0..=k {
            let mut coef = bottom[ih] * phi_eta[0] + top[ih] * phi_eta[k + 1];
            for je in 1..=k {
                coef += interior[(je - 1) * (k + 1) + ih] * phi_eta[je];
            }
            by += coef * phihat_end[ih];
        }
        by
    }

    /// B_x of a cell evaluated on its bottom (end = 0) or top (end = 1)
    /// side at tabulated point q along the face.
    fn bx_at_horizontal_side(&self, state: &FieldState, cell: usize, end: usize, q: usize) -> f64 {
        let k = self.element.k;
        let (i, j) = self.mesh.cell_ij(cell);
        let phihat_end = if end == 0 {
            &self.phihat_at0
        } else {
            &self.phihat_at1
        };
        let phi_xi = &self.tab.phi[q];
        let left = state.vface_dofs(self.mesh.vface_index(i, j));
        let right = state.vface_dofs(self.mesh.vface_index(i + 1, j));
        let interior = state.bx_interior(cell);
        let mut bx = 0.0;
        for jh in 0..=k {
            let mut coef = left[jh] * phi_xi[0] + right[jh] * phi_xi[k + 1];
            for ie in 1..=k {
                coef += interior[(ie - 1) * (k + 1) + jh] * phi_xi[ie];
            }
            bx += coef * phihat_end[jh];
        }
        bx
    }

    /// Unique flux per mesh vertex; boundary vertices complete their missing
    /// quadrants from prescribed data (inflow) or the interior (outflow).
    fn vertex_fluxes(&self, state: &FieldState, t: f64) -> Vec<f64> {
        let mesh = self.mesh;
        let (nx, ny) = (mesh.nx, mesh.ny);
        (0..mesh.vertex_count())
            .into_par_iter()
            .map(|vtx| {
                let (i, j) = mesh.vertex_ij(vtx);
                let (x, y) = mesh.vertex_pos(i, j);
                let v = self.problem.velocity(x, y, t);
                let bx_u = (j < ny).then(|| self.vface_trace_end(state, mesh.vface_index(i, j), 0));
                let bx_d =
                    (j > 0).then(|| self.vface_trace_end(state, mesh.vface_index(i, j - 1), 1));
                let by_l =
                    (i > 0).then(|| self.hface_trace_end(state, mesh.hface_index(i - 1, j), 1));
                let by_r = (i < nx).then(|| self.hface_trace_end(state, mesh.hface_index(i, j), 0));
                if let (Some(bx_u), Some(bx_d), Some(by_l), Some(by_r)) = (bx_u, bx_d, by_l, by_r) {
                    return vertex_flux_compact(v, bx_u, bx_d, by_l, by_r);
                }
                let quad = |bx: Option<f64>, by: Option<f64>| match (bx, by) {
                    (Some(bx), Some(by)) => Some((bx, by)),
                    _ => None,
                };
                let states = complete_vertex_states(
                    [
                        quad(bx_d, by_l),
                        quad(bx_d, by_r),
                        quad(bx_u, by_l),
                        quad(bx_u, by_r),
                    ],
                    v,
                    self.problem.boundary(x, y, t),
                    i == 0,
                    i == nx,
                    j == 0,
                    j == ny,
                );
                vertex_flux(v, states)
            })
            .collect()
    }

    /// Assemble all moment right-hand sides at time t.
    pub fn assemble_rhs(&self, state: &FieldState, t: f64) -> RhsBuffers {
        let mesh = self.mesh;
        let k = self.element.k;
        let nf = k + 1;
        let ni = k * nf;
        let nq = self.nq();
        let (nx, ny) = (mesh.nx, mesh.ny);
        let has_source = self.problem.has_source();

        let vertex = self.vertex_fluxes(state, t);

        // vertical faces: flux cache and face moments in one pass
        let mut e_vface = vec![0.0; mesh.vface_count() * nq];
        let mut vface_rhs = vec![0.0; mesh.vface_count() * nf];
        e_vface
            .par_chunks_mut(nq)
            .zip(vface_rhs.par_chunks_mut(nf))
            .enumerate()
            .for_each(|(f, (eface, rhs))| {
                let (i, j) = mesh.vface_ij(f);
                let (xf, y0) = mesh.vface_origin(i, j);
                for q in 0..nq {
                    let yq = y0 + self.tab.points[q] * mesh.dy;
                    let v = self.problem.velocity(xf, yq, t);
                    let bx: f64 = state
                        .vface_dofs(f)
                        .iter()
                        .zip(&self.tab.phihat[q])
                        .map(|(d, p)| d * p)
                        .sum();
                    let minus = if i > 0 {
                        let cell = mesh.cell_index(i - 1, j);
                        (bx, self.by_at_vertical_side(state, cell, 1, q))
                    } else {
                        self.problem.boundary(xf, yq, t)
                    };
                    let plus = if i < nx {
                        let cell = mesh.cell_index(i, j);
                        (bx, self.by_at_vertical_side(state, cell, 0, q))
                    } else {
                        self.problem.boundary(xf, yq, t)
                    };
                    let e = upwind(electric_field(v, minus), electric_field(v, plus), v.0);
                    eface[q] = e;
                    let w = self.tab.weights[q];
                    for m in 0..nf {
                        rhs[m] += w * e * self.face_dt[m * nq + q];
                    }
                    if has_source {
                        let mx = self.problem.source(xf, yq, t).0;
                        for m in 0..nf {
                            rhs[m] -= mesh.dy * w * mx * self.face_t[m * nq + q];
                        }
                    }
                }
                let e_bot = vertex[mesh.vertex_index(i, j)];
                let e_top = vertex[mesh.vertex_index(i, j + 1)];
                for m in 0..nf {
                    rhs[m] -= e_top * self.face_t_hi[m] - e_bot * self.face_t_lo[m];
                }
            });

        // horizontal faces (mirrored signs)
        let mut e_hface = vec![0.0; mesh.hface_count() * nq];
        let mut hface_rhs = vec![0.0; mesh.hface_count() * nf];
        e_hface
            .par_chunks_mut(nq)
            .zip(hface_rhs.par_chunks_mut(nf))
            .enumerate()
            .for_each(|(f, (eface, rhs))| {
                let (i, j) = mesh.hface_ij(f);
                let (x0, yf) = mesh.hface_origin(i, j);
                for q in 0..nq {
                    let xq = x0 + self.tab.points[q] * mesh.dx;
                    let v = self.problem.velocity(xq, yf, t);
                    let by: f64 = state
                        .hface_dofs(f)
                        .iter()
                        .zip(&self.tab.phihat[q])
                        .map(|(d, p)| d * p)
                        .sum();
                    let minus = if j > 0 {
                        let cell = mesh.cell_index(i, j - 1);
                        (self.bx_at_horizontal_side(state, cell, 1, q), by)
                    } else {
                        self.problem.boundary(xq, yf, t)
                    };
                    let plus = if j < ny {
                        let cell = mesh.cell_index(i, j);
                        (self.bx_at_horizontal_side(state, cell, 0, q), by)
                    } else {
                        self.problem.boundary(xq, yf, t)
                    };
                    let e = upwind(electric_field(v, minus), electric_field(v, plus), v.1);
                    eface[q] = e;
                    let w = self.tab.weights[q];
                    for m in 0..nf {
                        rhs[m] -= w * e * self.face_dt[m * nq + q];
                    }
                    if has_source {
                        let my = self.problem.source(xq, yf, t).1;
                        for m in 0..nf {
                            rhs[m] -= mesh.dx * w * my * self.face_t[m * nq + q];
                        }
                    }
                }
                let e_left = vertex[mesh.vertex_index(i, j)];
                let e_right = vertex[mesh.vertex_index(i + 1, j)];
                for m in 0..nf {
                    rhs[m] += e_right * self.face_t_hi[m] - e_left * self.face_t_lo[m];
                }
            });

        // cell interiors
        let mut bx_cells = vec![0.0; mesh.cell_count() * ni];
        let mut by_cells = vec![0.0; mesh.cell_count() * ni];
        if ni > 0 {
            bx_cells
                .par_chunks_mut(ni)
                .zip(by_cells.par_chunks_mut(ni))
                .enumerate()
                .for_each(|(cell, (rx, ry))| {
                    let (i, j) = mesh.cell_ij(cell);
                    let (x0, y0) = mesh.cell_origin(cell);
                    let mut local = [0.0; 24];
                    let local = &mut local[..self.element.dof_count()];
                    state.gather_cell(mesh, cell, local);
                    // volume term: the same E value feeds both components
                    for qx in 0..nq {
                        for qy in 0..nq {
                            let x = x0 + self.tab.points[qx] * mesh.dx;
                            let y = y0 + self.tab.points[qy] * mesh.dy;
                            let v = self.problem.velocity(x, y, t);
                            let b = self.element.eval_tab(local, &self.tab, qx, qy);
                            let e = electric_field(v, b);
                            let w = self.tab.weights[qx] * self.tab.weights[qy];
                            let idx = |m: usize| (m * nq + qx) * nq + qy;
                            for m in 0..ni {
                                rx[m] += mesh.dx * w * e * self.psix_deta[idx(m)];
                                ry[m] -= mesh.dy * w * e * self.psiy_dxi[idx(m)];
                            }
                            if has_source {
                                let (mx, my) = self.problem.source(x, y, t);
                                let wa = mesh.dx * mesh.dy * w;
                                for m in 0..ni {
                                    rx[m] -= wa * mx * self.psix[idx(m)];
                                    ry[m] -= wa * my * self.psiy[idx(m)];
                                }
                            }
                        }
                    }
                    // surface terms reuse the cached face fluxes
                    let e_bot = &e_hface[mesh.hface_index(i, j) * nq..][..nq];
                    let e_top = &e_hface[mesh.hface_index(i, j + 1) * nq..][..nq];
                    let e_left = &e_vface[mesh.vface_index(i, j) * nq..][..nq];
                    let e_right = &e_vface[mesh.vface_index(i + 1, j) * nq..][..nq];
                    for q in 0..nq {
                        let w = self.tab.weights[q];
                        for m in 0..ni {
                            rx[m] -= mesh.dx
                                * w
                                * (e_top[q] * self.psix_top[m * nq + q]
                                    - e_bot[q] * self.psix_bot[m * nq + q]);
                            ry[m] += mesh.dy
                                * w
                                * (e_right[q] * self.psiy_right[m * nq + q]
                                    - e_left[q] * self.psiy_left[m * nq + q]);
                        }
                    }
                });
        }

        RhsBuffers {
            vface: vface_rhs,
            hface: hface_rhs,
            bx_cells,
            by_cells,
            e_vface,
            e_hface,
            vertex,
        }
    }

    /// Time derivative of the state: assemble moments, then face solves
    /// followed by interior back-substitution.
    pub fn rates(&self, state: &FieldState, t: f64) -> FieldState {
        let mesh = self.mesh;
        let k = self.element.k;
        let nf = k + 1;
        let ni = k * nf;
        let mut buffers = self.assemble_rhs(state, t);
        let mut out = FieldState::zeros(mesh, k);

        buffers
            .vface
            .par_chunks_mut(nf)
            .zip(out.vface.par_chunks_mut(nf))
            .for_each(|(rhs, rates)| {
                self.blocks.solve_vface_rates(rhs, mesh.dy);
                rates.copy_from_slice(rhs);
            });
        buffers
            .hface
            .par_chunks_mut(nf)
            .zip(out.hface.par_chunks_mut(nf))
            .for_each(|(rhs, rates)| {
                self.blocks.solve_hface_rates(rhs, mesh.dx);
                rates.copy_from_slice(rhs);
            });
        if ni > 0 {
            let vface_rates = &out.vface;
            let hface_rates = &out.hface;
            let area = mesh.dx * mesh.dy;
            let bx_out: Vec<f64> = vec![0.0; mesh.cell_count() * ni];
            let by_out: Vec<f64> = vec![0.0; mesh.cell_count() * ni];
            let mut bx_out = bx_out;
            let mut by_out = by_out;
            bx_out
                .par_chunks_mut(ni)
                .zip(by_out.par_chunks_mut(ni))
                .enumerate()
                .for_each(|(cell, (bx, by))| {
                    let (i, j) = mesh.cell_ij(cell);
                    let left = &vface_rates[mesh.vface_index(i, j) * nf..][..nf];
                    let right = &vface_rates[mesh.vface_index(i + 1, j) * nf..][..nf];
                    let bottom = &hface_rates[mesh.hface_index(i, j) * nf..][..nf];
                    let top = &hface_rates[mesh.hface_index(i, j + 1) * nf..][..nf];
                    self.blocks.solve_bx_interior_rates(
                        &buffers.bx_cells[cell * ni..(cell + 1) * ni],
                        area,
                        left,
                        right,
                        bx,
                    );
                    self.blocks.solve_by_interior_rates(
                        &buffers.by_cells[cell * ni..(cell + 1) * ni],
                        area,
                        bottom,
                        top,
                        by,
                    );
                });
            out.bx_int = bx_out;
            out.by_int = by_out;
        }
        out
    }

    /// CFL time step: cfl / ((2k+1) max(|v_x|/dx + |v_y|/dy)), with the
    /// maximum sampled over all vertices and face quadrature points at time t.
    pub fn cfl_dt(&self, cfl: f64, t: f64, dt_max: Option<f64>) -> f64 {
        let mesh = self.mesh;
        let nq = self.nq();
        let speed = |x: f64, y: f64| {
            let (vx, vy) = self.problem.velocity(x, y, t);
            vx.abs() / mesh.dx + vy.abs() / mesh.dy
        };
        let vmax_vertices = (0..mesh.vertex_count())
            .into_par_iter()
            .map(|vtx| {
                let (i, j) = mesh.vertex_ij(vtx);
                let (x, y) = mesh.vertex_pos(i, j);
                speed(x, y)
            })
            .reduce(|| 0.0, f64::max);
        let vmax_vfaces = (0..mesh.vface_count())
            .into_par_iter()
            .map(|f| {
                let (i, j) = mesh.vface_ij(f);
                let (xf, y0) = mesh.vface_origin(i, j);
                (0..nq)
                    .map(|q| speed(xf, y0 + self.tab.points[q] * mesh.dy))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let vmax_hfaces = (0..mesh.hface_count())
            .into_par_iter()
            .map(|f| {
                let (i, j) = mesh.hface_ij(f);
                let (x0, yf) = mesh.hface_origin(i, j);
                (0..nq)
                    .map(|q| speed(x0 + self.tab.points[q] * mesh.dx, yf))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let vmax = vmax_vertices.max(vmax_vfaces).max(vmax_hfaces);
        let k = self.element.k as f64;
        if vmax <= f64::EPSILON {
            return dt_max.unwrap_or(f64::INFINITY);
        }
        let dt = cfl / ((2.0 * k + 1.0) * vmax);
        match dt_max {
            Some(cap) => dt.min(cap),
            None => dt,
        }
    }

    /// One SSP-RK3 step of this problem.
    pub fn step(&self, state: &FieldState, t: f64, dt: f64) -> FieldState {
        ssp_rk3_step(state, t, dt, |s, ts| self.rates(s, ts))
    }

    /// Advance from t = 0 to `controls.t_final`, landing exactly on the
    /// final time; records per-step time, step size and divergence norm.
    pub fn run(&self, initial: FieldState, controls: &TimeControls) -> Result<RunResult> {
        let mut state = initial;
        let mut t = 0.0;
        let mut records = Vec::new();
        let mut step = 0usize;
        let t_final = controls.t_final;
        while t < t_final - 1e-12 * t_final.max(1.0) {
            let mut dt = self.cfl_dt(controls.cfl, t, controls.dt_max);
            if !dt.is_finite() {
                dt = t_final - t;
            }
            dt = dt.min(t_final - t);
            state = self.step(&state, t, dt);
            step += 1;
            t += dt;
            if !state.is_finite() {
                return Err(Error::Diverged { step, t });
            }
            records.push(StepRecord {
                step,
                t,
                dt,
                div_norm: l2_div_norm(self.mesh, &state),
            });
        }
        Ok(RunResult {
            state,
            records,
            steps: step,
        })
    }
}

/// Per-step diagnostics from a run.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub div_norm: f64,
}

/// Final state and time series of a run.
pub struct RunResult {
    pub state: FieldState,
    pub records: Vec<StepRecord>,
    pub steps: usize,
}

impl RunResult {
    pub fn max_div_norm(&self) -> f64 {
        self.records.iter().map(|r| r.div_norm).fold(0.0, f64::max)
    }
}
