//! Small dense matrices and LU factorization.
//!
//! The local mass systems of the scheme are at most 6x6 (interior block for
//! k = 2), so a plain row-major matrix with partial-pivoting LU is all that is
//! needed. Factorizations are computed once per degree and reused for every
//! face and cell solve.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// y += s * A x, without allocating.
    pub fn mul_vec_acc(&self, x: &[f64], s: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for i in 0..self.rows {
            let row = self.row(i);
            let dot: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            y[i] += s * dot;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    pivots: Vec<usize>,
}

impl LuFactors {
    /// Factor `a`; returns `None` when a pivot is (numerically) zero.
    pub fn new(a: &DenseMatrix) -> Option<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            // pivot search
            let mut p = col;
            let mut maxv = lu[col * n + col].abs();
            for r in (col + 1)..n {
                let v = lu[r * n + col].abs();
                if v > maxv {
                    maxv = v;
                    p = r;
                }
            }
            if maxv < 1e-300 {
                return None;
            }
            pivots[col] = p;
            if p != col {
                for j in 0..n {
                    lu.swap(col * n + j, p * n + j);
                }
            }
            let diag = lu[col * n + col];
            for r in (col + 1)..n {
                let f = lu[r * n + col] / diag;
                lu[r * n + col] = f;
                for j in (col + 1)..n {
                    lu[r * n + j] -= f * lu[col * n + j];
                }
            }
        }
        Some(Self { n, lu, pivots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // apply the row interchanges before the triangular solves; the L
        // factors are stored in the fully pivoted row order
        for i in 0..n {
            b.swap(i, self.pivots[i]);
        }
        for i in 0..n {
            let bi = b[i];
            for r in (i + 1)..n {
                b[r] -= self.lu[r * n + i] * bi;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_random_systems() {
        // fixed 4x4 with known solution
        let a = DenseMatrix::from_rows(&[
            &[4.0, 1.0, 2.0, 0.5],
            &[1.0, 3.0, 0.0, 1.0],
            &[2.0, 0.0, 5.0, 2.0],
            &[0.5, 1.0, 2.0, 4.0],
        ]);
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let b = a.mul_vec(&x_true);
        let lu = LuFactors::new(&a).unwrap();
        let x = lu.solve(&b);
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_requires_pivoting() {
        // zero on the diagonal forces a row swap
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let lu = LuFactors::new(&a).unwrap();
        let x = lu.solve(&[2.0, 3.0]);
        assert!((x[0] - 3.0).abs() < 1e-15);
        assert!((x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(LuFactors::new(&a).is_none());
    }

    #[test]
    fn lu_handles_general_pivot_sequences() {
        // non-dominant 6x6 matrices exercise multiple row interchanges
        let n = 6;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rng = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for _ in 0..20 {
            let mut a = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, rng());
                }
            }
            let want: Vec<f64> = (0..n).map(|_| rng() * 4.0).collect();
            let b = a.mul_vec(&want);
            let Some(lu) = LuFactors::new(&a) else {
                continue;
            };
            let x = lu.solve(&b);
            for (xi, wi) in x.iter().zip(&want) {
                assert!((xi - wi).abs() < 1e-10, "{xi} vs {wi}");
            }
        }
    }
}
