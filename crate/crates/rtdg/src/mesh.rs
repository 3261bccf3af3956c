//! Uniform Cartesian mesh with indexed cells, faces and vertices.
//!
//! Vertical faces carry a fixed +x unit normal and horizontal faces a fixed
//! +y normal, so face unknowns are single-valued; outward-normal signs are
//! applied at assembly time. All index linearizations are row-major with the
//! x index running fastest.
//!
//! Index ranges:
//! - cells: `(i, j)` with `i < nx`, `j < ny`
//! - vertical faces: `(i, j)` with `i <= nx`, `j < ny` (the line x = x_i)
//! - horizontal faces: `(i, j)` with `i < nx`, `j <= ny` (the line y = y_j)
//! - vertices: `(i, j)` with `i <= nx`, `j <= ny`

use crate::{Error, Result};

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Face orientation; the unit normal of a vertical face is +x, of a
/// horizontal face +y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// A face together with its (up to two) adjacent cells.
///
/// `minus` is the cell on the side the normal points away from (left of a
/// vertical face, below a horizontal face); `plus` the cell the normal points
/// into. `None` marks the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceRef {
    pub orientation: Orientation,
    pub i: usize,
    pub j: usize,
    pub minus: Option<usize>,
    pub plus: Option<usize>,
}

impl FaceRef {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none() || self.plus.is_none()
    }
}

/// A vertex with its up-to-four adjacent cells, tagged by quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexRef {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub down_left: Option<usize>,
    pub down_right: Option<usize>,
    pub up_left: Option<usize>,
    pub up_right: Option<usize>,
}

impl VertexRef {
    pub fn adjacent_cells(&self) -> impl Iterator<Item = usize> + '_ {
        [self.down_left, self.down_right, self.up_left, self.up_right]
            .into_iter()
            .flatten()
    }
}

/// The four faces of a cell in the global orientation convention.
#[derive(Debug, Clone, Copy)]
pub struct CellFaces {
    pub left: FaceRef,
    pub right: FaceRef,
    pub bottom: FaceRef,
    pub top: FaceRef,
}

/// Uniform Cartesian mesh over a rectangle.
#[derive(Debug, Clone)]
pub struct CartesianMesh {
    pub x_min: f64,
    pub y_min: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl CartesianMesh {
    pub fn new(
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        let extent_ok = x_max > x_min && y_max > y_min;
        if !extent_ok {
            return Err(Error::InvalidMesh(format!(
                "empty extent: [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh(format!(
                "need at least one cell per direction, got {nx} x {ny}"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            nx,
            ny,
            dx: (x_max - x_min) / nx as f64,
            dy: (y_max - y_min) / ny as f64,
        })
    }

    pub fn from_rect(domain: Rect, nx: usize, ny: usize) -> Result<Self> {
        Self::new(
            domain.x_min,
            domain.y_min,
            domain.x_max,
            domain.y_max,
            nx,
            ny,
        )
    }

    pub fn domain(&self) -> Rect {
        Rect {
            x_min: self.x_min,
            x_max: self.x_min + self.nx as f64 * self.dx,
            y_min: self.y_min,
            y_max: self.y_min + self.ny as f64 * self.dy,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn vface_count(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn hface_count(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn vertex_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    /// Lower-left corner of a cell.
    #[inline]
    pub fn cell_origin(&self, cell: usize) -> (f64, f64) {
        let (i, j) = self.cell_ij(cell);
        (
            self.x_min + i as f64 * self.dx,
            self.y_min + j as f64 * self.dy,
        )
    }

    #[inline]
    pub fn vface_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j < self.ny);
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn vface_ij(&self, f: usize) -> (usize, usize) {
        (f % (self.nx + 1), f / (self.nx + 1))
    }

    #[inline]
    pub fn hface_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j <= self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn hface_ij(&self, f: usize) -> (usize, usize) {
        (f % self.nx, f / self.nx)
    }

    #[inline]
    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j <= self.ny);
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn vertex_ij(&self, v: usize) -> (usize, usize) {
        (v % (self.nx + 1), v / (self.nx + 1))
    }

    #[inline]
    pub fn vertex_pos(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_min + i as f64 * self.dx,
            self.y_min + j as f64 * self.dy,
        )
    }

    /// x coordinate of vertical face column i, y coordinate of the bottom of
    /// row j.
    #[inline]
    pub fn vface_origin(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_min + i as f64 * self.dx,
            self.y_min + j as f64 * self.dy,
        )
    }

    #[inline]
    pub fn hface_origin(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_min + i as f64 * self.dx,
            self.y_min + j as f64 * self.dy,
        )
    }

    pub fn vface(&self, i: usize, j: usize) -> FaceRef {
        FaceRef {
            orientation: Orientation::Vertical,
            i,
            j,
            minus: (i > 0).then(|| self.cell_index(i - 1, j)),
            plus: (i < self.nx).then(|| self.cell_index(i, j)),
        }
    }

    pub fn hface(&self, i: usize, j: usize) -> FaceRef {
        FaceRef {
            orientation: Orientation::Horizontal,
            i,
            j,
            minus: (j > 0).then(|| self.cell_index(i, j - 1)),
            plus: (j < self.ny).then(|| self.cell_index(i, j)),
        }
    }

    /// The four faces of a cell.
    pub fn cell_faces(&self, cell: usize) -> Result<CellFaces> {
        if cell >= self.cell_count() {
            return Err(Error::InvalidIndex(format!(
                "cell {cell} out of range (mesh has {} cells)",
                self.cell_count()
            )));
        }
        let (i, j) = self.cell_ij(cell);
        Ok(CellFaces {
            left: self.vface(i, j),
            right: self.vface(i + 1, j),
            bottom: self.hface(i, j),
            top: self.hface(i, j + 1),
        })
    }

    /// The vertex with its quadrant-tagged adjacent cells.
    pub fn vertex_neighbors(&self, vertex: usize) -> Result<VertexRef> {
        if vertex >= self.vertex_count() {
            return Err(Error::InvalidIndex(format!(
                "vertex {vertex} out of range (mesh has {} vertices)",
                self.vertex_count()
            )));
        }
        let (i, j) = self.vertex_ij(vertex);
        let (x, y) = self.vertex_pos(i, j);
        let has_left = i > 0;
        let has_right = i < self.nx;
        let has_down = j > 0;
        let has_up = j < self.ny;
        Ok(VertexRef {
            i,
            j,
            x,
            y,
            down_left: (has_down && has_left).then(|| self.cell_index(i - 1, j - 1)),
            down_right: (has_down && has_right).then(|| self.cell_index(i, j - 1)),
            up_left: (has_up && has_left).then(|| self.cell_index(i - 1, j)),
            up_right: (has_up && has_right).then(|| self.cell_index(i, j)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_counts() {
        let m = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 8, 8).unwrap();
        assert!((m.dx - 0.125).abs() < 1e-15);
        assert!((m.dy - 0.125).abs() < 1e-15);

        let m = CartesianMesh::new(-1.0, -1.0, 1.0, 1.0, 64, 64).unwrap();
        assert!((m.dx - 0.03125).abs() < 1e-15);

        let m = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        assert_eq!(m.cell_count(), 1);
        assert_eq!(m.vface_count() + m.hface_count(), 4);
        assert_eq!(m.vertex_count(), 4);
    }

    #[test]
    fn invalid_construction_rejected() {
        assert!(CartesianMesh::new(1.0, 0.0, 0.0, 1.0, 4, 4).is_err());
        assert!(CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 0, 4).is_err());
        assert!(CartesianMesh::new(0.0, 2.0, 1.0, 2.0, 4, 4).is_err());
    }

    #[test]
    fn face_and_vertex_count_formulas() {
        for nx in 1..=32usize {
            for ny in 1..=32usize {
                let m = CartesianMesh::new(0.0, 0.0, 1.0, 2.0, nx, ny).unwrap();
                assert_eq!(m.vface_count(), (nx + 1) * ny);
                assert_eq!(m.hface_count(), nx * (ny + 1));
                assert_eq!(m.vertex_count(), (nx + 1) * (ny + 1));
            }
        }
    }

    #[test]
    fn single_cell_faces_are_boundary() {
        let m = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        let f = m.cell_faces(0).unwrap();
        for face in [f.left, f.right, f.bottom, f.top] {
            assert!(face.is_boundary());
        }
        assert!(m.cell_faces(1).is_err());
    }

    #[test]
    fn shared_face_identity() {
        // 2x1 mesh: right face of cell 0 is the left face of cell 1
        let m = CartesianMesh::new(0.0, 0.0, 2.0, 1.0, 2, 1).unwrap();
        let f0 = m.cell_faces(0).unwrap();
        let f1 = m.cell_faces(1).unwrap();
        assert_eq!(f0.right, f1.left);
        assert_eq!(f0.right.minus, Some(0));
        assert_eq!(f0.right.plus, Some(1));
    }

    #[test]
    fn interior_cell_has_interior_faces() {
        let m = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 8, 8).unwrap();
        let c = m.cell_index(3, 4);
        let f = m.cell_faces(c).unwrap();
        for face in [f.left, f.right, f.bottom, f.top] {
            assert!(!face.is_boundary());
        }
    }

    #[test]
    fn adjacency_symmetry() {
        // every interior face appears among the faces of both its cells
        let m = CartesianMesh::new(-1.0, 0.5, 2.0, 3.5, 5, 4).unwrap();
        for j in 0..m.ny {
            for i in 0..=m.nx {
                let face = m.vface(i, j);
                for cell in [face.minus, face.plus].into_iter().flatten() {
                    let cf = m.cell_faces(cell).unwrap();
                    assert!(cf.left == face || cf.right == face);
                }
            }
        }
        for j in 0..=m.ny {
            for i in 0..m.nx {
                let face = m.hface(i, j);
                for cell in [face.minus, face.plus].into_iter().flatten() {
                    let cf = m.cell_faces(cell).unwrap();
                    assert!(cf.bottom == face || cf.top == face);
                }
            }
        }
    }

    #[test]
    fn vertex_neighbor_counts() {
        let m = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 4, 3).unwrap();
        // corner
        let v = m.vertex_neighbors(m.vertex_index(0, 0)).unwrap();
        assert_eq!(v.adjacent_cells().count(), 1);
        assert_eq!(v.up_right, Some(0));
        // boundary edge (non-corner)
        let v = m.vertex_neighbors(m.vertex_index(2, 0)).unwrap();
        assert_eq!(v.adjacent_cells().count(), 2);
        // interior
        let v = m.vertex_neighbors(m.vertex_index(2, 1)).unwrap();
        assert_eq!(v.adjacent_cells().count(), 4);
        assert_eq!(v.down_left, Some(m.cell_index(1, 0)));
        assert_eq!(v.down_right, Some(m.cell_index(2, 0)));
        assert_eq!(v.up_left, Some(m.cell_index(1, 1)));
        assert_eq!(v.up_right, Some(m.cell_index(2, 1)));
        assert!(m.vertex_neighbors(m.vertex_count()).is_err());
    }

    #[test]
    fn cell_areas_sum_to_domain_area() {
        let m = CartesianMesh::new(-1.0, -2.0, 3.0, 1.0, 7, 11).unwrap();
        let total: f64 = (0..m.cell_count()).map(|_| m.dx * m.dy).sum();
        let area = m.domain().width() * m.domain().height();
        assert!(((total - area) / area).abs() < 1e-13);
    }
}
