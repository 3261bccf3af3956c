//! The Raviart-Thomas reference element `RT_k` on [0,1]^2 and the global
//! degree-of-freedom layout.
//!
//! On the reference cell, `B_x` lives in Q_{k+1,k} and `B_y` in Q_{k,k+1}:
//!
//! ```text
//! B_x(xi, eta) = sum_ij c_ij phi_i(xi) phihat_j(eta)
//! B_y(xi, eta) = sum_ij d_ij phihat_i(xi) phi_j(eta)
//! ```
//!
//! `phihat` is the Lagrange basis on the k+1 Gauss points, `phi` the basis on
//! the extended node set {0, interior Gauss points, 1}. The nodes with
//! xi in {0,1} (resp. eta) sit exactly on the cell faces; those values are the
//! face unknowns and are stored once per mesh face, which makes the normal
//! component continuous by construction.
//!
//! Local numbering per cell: faces first in the order left, right, bottom,
//! top (k+1 values each, ordered along the face), then the interior B_x
//! values, then the interior B_y values.

use crate::basis::{gauss_legendre, LagrangeBasis1d};
use crate::mesh::CartesianMesh;
use crate::{Error, Result};

/// Degree-k Raviart-Thomas reference element.
#[derive(Debug, Clone)]
pub struct RtElement {
    pub k: usize,
    /// Lagrange basis on the k+1 Gauss points (face nodes).
    pub face_basis: LagrangeBasis1d,
    /// Lagrange basis on {0, k interior Gauss points, 1}.
    pub ext_basis: LagrangeBasis1d,
}

impl RtElement {
    pub fn new(k: usize) -> Result<Self> {
        if k > 2 {
            return Err(Error::UnsupportedDegree(k));
        }
        let face_nodes = gauss_legendre(k + 1)?.points;
        let mut ext_nodes = Vec::with_capacity(k + 2);
        ext_nodes.push(0.0);
        if k > 0 {
            ext_nodes.extend(gauss_legendre(k)?.points);
        }
        ext_nodes.push(1.0);
        Ok(Self {
            k,
            face_basis: LagrangeBasis1d::new(face_nodes),
            ext_basis: LagrangeBasis1d::new(ext_nodes),
        })
    }

    /// Total local unknowns: 2 (k+1) (k+2).
    pub fn dof_count(&self) -> usize {
        2 * (self.k + 1) * (self.k + 2)
    }

    /// Unknowns per face: k+1.
    pub fn face_dof_count(&self) -> usize {
        self.k + 1
    }

    /// Interior unknowns per component: k (k+1).
    pub fn interior_dof_count(&self) -> usize {
        self.k * (self.k + 1)
    }

    pub fn offset_left(&self) -> usize {
        0
    }

    pub fn offset_right(&self) -> usize {
        self.k + 1
    }

    pub fn offset_bottom(&self) -> usize {
        2 * (self.k + 1)
    }

    pub fn offset_top(&self) -> usize {
        3 * (self.k + 1)
    }

    pub fn offset_bx_interior(&self) -> usize {
        4 * (self.k + 1)
    }

    pub fn offset_by_interior(&self) -> usize {
        4 * (self.k + 1) + self.k * (self.k + 1)
    }

    /// B_x coefficient for extended index i, hat index j from a local vector.
    #[inline]
    fn bx_coef(&self, local: &[f64], i: usize, j: usize) -> f64 {
        let k = self.k;
        if i == 0 {
            local[self.offset_left() + j]
        } else if i == k + 1 {
            local[self.offset_right() + j]
        } else {
            local[self.offset_bx_interior() + (i - 1) * (k + 1) + j]
        }
    }

    /// B_y coefficient for hat index i, extended index j.
    #[inline]
    fn by_coef(&self, local: &[f64], i: usize, j: usize) -> f64 {
        let k = self.k;
        if j == 0 {
            local[self.offset_bottom() + i]
        } else if j == k + 1 {
            local[self.offset_top() + i]
        } else {
            local[self.offset_by_interior() + (j - 1) * (k + 1) + i]
        }
    }

    /// Evaluate (B_x, B_y) at reference coordinates.
    pub fn eval(&self, local: &[f64], xi: f64, eta: f64) -> (f64, f64) {
        debug_assert_eq!(local.len(), self.dof_count());
        let k = self.k;
        let phi_xi = self.ext_basis.eval_all(xi);
        let phihat_eta = self.face_basis.eval_all(eta);
        let phihat_xi = self.face_basis.eval_all(xi);
        let phi_eta = self.ext_basis.eval_all(eta);
        let mut bx = 0.0;
        for i in 0..=(k + 1) {
            for j in 0..=k {
                bx += self.bx_coef(local, i, j) * phi_xi[i] * phihat_eta[j];
            }
        }
        let mut by = 0.0;
        for i in 0..=k {
            for j in 0..=(k + 1) {
                by += self.by_coef(local, i, j) * phihat_xi[i] * phi_eta[j];
            }
        }
        (bx, by)
    }

    /// Physical divergence at reference coordinates, for a cell of size
    /// (dx, dy).
    pub fn eval_div(&self, local: &[f64], xi: f64, eta: f64, dx: f64, dy: f64) -> f64 {
        debug_assert_eq!(local.len(), self.dof_count());
        let k = self.k;
        let dphi_xi = self.ext_basis.deriv_all(xi);
        let phihat_eta = self.face_basis.eval_all(eta);
        let phihat_xi = self.face_basis.eval_all(xi);
        let dphi_eta = self.ext_basis.deriv_all(eta);
        let mut dbx_dxi = 0.0;
        for i in 0..=(k + 1) {
            for j in 0..=k {
                dbx_dxi += self.bx_coef(local, i, j) * dphi_xi[i] * phihat_eta[j];
            }
        }
        let mut dby_deta = 0.0;
        for i in 0..=k {
            for j in 0..=(k + 1) {
                dby_deta += self.by_coef(local, i, j) * phihat_xi[i] * dphi_eta[j];
            }
        }
        dbx_dxi / dx + dby_deta / dy
    }
}

/// Basis values tabulated at a fixed set of reference points, so inner loops
/// avoid re-evaluating Lagrange products.
#[derive(Debug, Clone)]
pub struct EvalTable {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `phi[q][i]`: extended basis i at point q.
    pub phi: Vec<Vec<f64>>,
    pub dphi: Vec<Vec<f64>>,
    /// `phihat[q][j]`: face basis j at point q.
    pub phihat: Vec<Vec<f64>>,
    pub dphihat: Vec<Vec<f64>>,
}

impl RtElement {
    pub fn tabulate(&self, rule: &crate::basis::QuadratureRule1d) -> EvalTable {
        EvalTable {
            points: rule.points.clone(),
            weights: rule.weights.clone(),
            phi: rule
                .points
                .iter()
                .map(|&x| self.ext_basis.eval_all(x))
                .collect(),
            dphi: rule
                .points
                .iter()
                .map(|&x| self.ext_basis.deriv_all(x))
                .collect(),
            phihat: rule
                .points
                .iter()
                .map(|&x| self.face_basis.eval_all(x))
                .collect(),
            dphihat: rule
                .points
                .iter()
                .map(|&x| self.face_basis.deriv_all(x))
                .collect(),
        }
    }

    /// (B_x, B_y) at tabulated point (qx, qy).
    pub fn eval_tab(&self, local: &[f64], tab: &EvalTable, qx: usize, qy: usize) -> (f64, f64) {
        let k = self.k;
        let phi_xi = &tab.phi[qx];
        let phihat_eta = &tab.phihat[qy];
        let phihat_xi = &tab.phihat[qx];
        let phi_eta = &tab.phi[qy];
        let mut bx = 0.0;
        for i in 0..=(k + 1) {
            let p = phi_xi[i];
            if p != 0.0 {
                for j in 0..=k {
                    bx += self.bx_coef(local, i, j) * p * phihat_eta[j];
                }
            }
        }
        let mut by = 0.0;
        for j in 0..=(k + 1) {
            let p = phi_eta[j];
            if p != 0.0 {
                for i in 0..=k {
                    by += self.by_coef(local, i, j) * phihat_xi[i] * p;
                }
            }
        }
        (bx, by)
    }

    /// Physical divergence at tabulated point (qx, qy).
    pub fn div_tab(
        &self,
        local: &[f64],
        tab: &EvalTable,
        qx: usize,
        qy: usize,
        dx: f64,
        dy: f64,
    ) -> f64 {
        let k = self.k;
        let mut dbx = 0.0;
        for i in 0..=(k + 1) {
            let p = tab.dphi[qx][i];
            if p != 0.0 {
                for j in 0..=k {
                    dbx += self.bx_coef(local, i, j) * p * tab.phihat[qy][j];
                }
            }
        }
        let mut dby = 0.0;
        for j in 0..=(k + 1) {
            let p = tab.dphi[qy][j];
            if p != 0.0 {
                for i in 0..=k {
                    dby += self.by_coef(local, i, j) * tab.phihat[qx][i] * p;
                }
            }
        }
        dbx / dx + dby / dy
    }
}

/// Global unknowns of an RT_k field on a Cartesian mesh.
///
/// Face values are stored once per mesh face and referenced by both adjacent
/// cells; interior values are stored per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub k: usize,
    pub nx: usize,
    pub ny: usize,
    /// B_x nodal values on vertical faces, (k+1) per face.
    pub vface: Vec<f64>,
    /// B_y nodal values on horizontal faces, (k+1) per face.
    pub hface: Vec<f64>,
    /// Interior B_x values, k(k+1) per cell.
    pub bx_int: Vec<f64>,
    /// Interior B_y values, k(k+1) per cell.
    pub by_int: Vec<f64>,
}

impl FieldState {
    pub fn zeros(mesh: &CartesianMesh, k: usize) -> Self {
        let nf = k + 1;
        let ni = k * (k + 1);
        Self {
            k,
            nx: mesh.nx,
            ny: mesh.ny,
            vface: vec![0.0; mesh.vface_count() * nf],
            hface: vec![0.0; mesh.hface_count() * nf],
            bx_int: vec![0.0; mesh.cell_count() * ni],
            by_int: vec![0.0; mesh.cell_count() * ni],
        }
    }

    pub fn dof_count(&self) -> usize {
        self.vface.len() + self.hface.len() + self.bx_int.len() + self.by_int.len()
    }

    #[inline]
    pub fn vface_dofs(&self, face: usize) -> &[f64] {
        let nf = self.k + 1;
        &self.vface[face * nf..(face + 1) * nf]
    }

    #[inline]
    pub fn vface_dofs_mut(&mut self, face: usize) -> &mut [f64] {
        let nf = self.k + 1;
        &mut self.vface[face * nf..(face + 1) * nf]
    }

    #[inline]
    pub fn hface_dofs(&self, face: usize) -> &[f64] {
        let nf = self.k + 1;
        &self.hface[face * nf..(face + 1) * nf]
    }

    #[inline]
    pub fn hface_dofs_mut(&mut self, face: usize) -> &mut [f64] {
        let nf = self.k + 1;
        &mut self.hface[face * nf..(face + 1) * nf]
    }

    #[inline]
    pub fn bx_interior(&self, cell: usize) -> &[f64] {
        let ni = self.k * (self.k + 1);
        &self.bx_int[cell * ni..(cell + 1) * ni]
    }

    #[inline]
    pub fn by_interior(&self, cell: usize) -> &[f64] {
        let ni = self.k * (self.k + 1);
        &self.by_int[cell * ni..(cell + 1) * ni]
    }

    /// Gather the local dof vector of a cell in the element numbering.
    pub fn gather_cell(&self, mesh: &CartesianMesh, cell: usize, out: &mut [f64]) {
        let nf = self.k + 1;
        let ni = self.k * (self.k + 1);
        debug_assert_eq!(out.len(), 4 * nf + 2 * ni);
        let (i, j) = mesh.cell_ij(cell);
        let left = mesh.vface_index(i, j);
        let right = mesh.vface_index(i + 1, j);
        let bottom = mesh.hface_index(i, j);
        let top = mesh.hface_index(i, j + 1);
        out[0..nf].copy_from_slice(self.vface_dofs(left));
        out[nf..2 * nf].copy_from_slice(self.vface_dofs(right));
        out[2 * nf..3 * nf].copy_from_slice(self.hface_dofs(bottom));
        out[3 * nf..4 * nf].copy_from_slice(self.hface_dofs(top));
        out[4 * nf..4 * nf + ni].copy_from_slice(self.bx_interior(cell));
        out[4 * nf + ni..].copy_from_slice(self.by_interior(cell));
    }

    /// Scatter a local dof vector back; the inverse of `gather_cell`.
    pub fn scatter_cell(&mut self, mesh: &CartesianMesh, cell: usize, local: &[f64]) {
        let nf = self.k + 1;
        let ni = self.k * (self.k + 1);
        debug_assert_eq!(local.len(), 4 * nf + 2 * ni);
        let (i, j) = mesh.cell_ij(cell);
        let left = mesh.vface_index(i, j);
        let right = mesh.vface_index(i + 1, j);
        let bottom = mesh.hface_index(i, j);
        let top = mesh.hface_index(i, j + 1);
        self.vface_dofs_mut(left).copy_from_slice(&local[0..nf]);
        self.vface_dofs_mut(right)
            .copy_from_slice(&local[nf..2 * nf]);
        self.hface_dofs_mut(bottom)
            .copy_from_slice(&local[2 * nf..3 * nf]);
        self.hface_dofs_mut(top)
            .copy_from_slice(&local[3 * nf..4 * nf]);
        let r = cell * ni..(cell + 1) * ni;
        self.bx_int[r.clone()].copy_from_slice(&local[4 * nf..4 * nf + ni]);
        self.by_int[r].copy_from_slice(&local[4 * nf + ni..]);
    }

    /// a * self + b * other, elementwise.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        let comb = |u: &[f64], v: &[f64]| -> Vec<f64> {
            u.iter().zip(v).map(|(x, y)| a * x + b * y).collect()
        };
        Self {
            k: self.k,
            nx: self.nx,
            ny: self.ny,
            vface: comb(&self.vface, &other.vface),
            hface: comb(&self.hface, &other.hface),
            bx_int: comb(&self.bx_int, &other.bx_int),
            by_int: comb(&self.by_int, &other.by_int),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.vface.iter().all(|v| v.is_finite())
            && self.hface.iter().all(|v| v.is_finite())
            && self.bx_int.iter().all(|v| v.is_finite())
            && self.by_int.iter().all(|v| v.is_finite())
    }

    /// Evaluate (B_x, B_y) at a physical point.
    pub fn eval_at(&self, mesh: &CartesianMesh, element: &RtElement, x: f64, y: f64) -> (f64, f64) {
        let (cell, xi, eta) = locate(mesh, x, y);
        let mut local = vec![0.0; element.dof_count()];
        self.gather_cell(mesh, cell, &mut local);
        element.eval(&local, xi, eta)
    }
}

/// Cell containing (x, y) and the reference coordinates within it. Points on
/// shared faces resolve to the cell on the +normal side.
pub fn locate(mesh: &CartesianMesh, x: f64, y: f64) -> (usize, f64, f64) {
    let fx = (x - mesh.x_min) / mesh.dx;
    let fy = (y - mesh.y_min) / mesh.dy;
    let i = (fx.floor() as isize).clamp(0, mesh.nx as isize - 1) as usize;
    let j = (fy.floor() as isize).clamp(0, mesh.ny as isize - 1) as usize;
    (mesh.cell_index(i, j), fx - i as f64, fy - j as f64)
}
