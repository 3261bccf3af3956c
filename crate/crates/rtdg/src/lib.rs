//! Divergence-conforming discontinuous Galerkin solver for the 2-D induction
//! equation on Cartesian meshes.
//!
//! The magnetic field is approximated in the Raviart-Thomas space `RT_k`
//! (k = 0, 1, 2), whose degrees of freedom are moments on cell faces and cell
//! interiors. Face moments are evolved by a 1-D DG scheme that couples cells
//! through upwind face fluxes and a multidimensional vertex flux; interior
//! moments follow a standard 2-D DG scheme. Because the face unknowns are
//! stored once per face, the normal component of the field is continuous by
//! construction and the scheme preserves the discrete divergence exactly.
//!
//! ```
//! use rtdg::mesh::CartesianMesh;
//! use rtdg::projection::project_divfree;
//! use rtdg::diagnostics::l2_div_norm;
//!
//! let mesh = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 8, 8).unwrap();
//! let state = project_divfree(&|x, y| (x * y).sin(), &mesh, 1).unwrap();
//! assert!(l2_div_norm(&mesh, &state) < 1e-12);
//! ```

// index-based loops mirror the tensor-product structure of the math, and the
// quadrature tables carry the full precision of their generator
#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

pub mod basis;
pub mod diagnostics;
pub mod flux;
pub mod linalg;
pub mod mass;
pub mod mesh;
pub mod projection;
pub mod scenarios;
pub mod solver;
pub mod space;
pub mod vtk;

mod book;

use thiserror::Error;

/// Errors produced by mesh construction, element setup and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("unsupported polynomial degree {0} (supported: 0, 1, 2)")]
    UnsupportedDegree(usize),
    #[error("unsupported quadrature order {0} (supported: 1..=10)")]
    UnsupportedQuadrature(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver diverged: non-finite values at step {step}, t = {t}")]
    Diverged { step: usize, t: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
