//! Small linear-algebra helpers not covered by nalgebra.

use nalgebra::{DMatrix, DVector};
use sprs::{CsMat, TriMat};

/// Cholesky factor of a symmetric positive *semidefinite* banded matrix.
///
/// Pivots that collapse below `tol * max_diag` are deflated: their row of the
/// factor is dropped and the matching unknown is pinned to zero during solves.
/// For a consistent right-hand side this yields an exact solution of the
/// singular system.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // row i holds columns i-bw ..= i, stored at offset i*(bw+1)
    factor: Vec<f64>,
    deflated: Vec<bool>,
}

impl BandedCholesky {
    /// `lower(i, j)` must return `G[i][j]` for `j <= i`, `i - j <= bw`.
    pub fn new(n: usize, bw: usize, lower: impl Fn(usize, usize) -> f64, tol: f64) -> Self {
        let w = bw + 1;
        let mut factor = vec![0.0; n * w];
        let mut deflated = vec![false; n];
        let max_diag = (0..n).map(|i| lower(i, i)).fold(0.0f64, f64::max);
        let floor = tol * max_diag.max(f64::MIN_POSITIVE);
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = lower(i, j);
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= factor[at(i, k)] * factor[at(j, k)];
                }
                if j < i {
                    factor[at(i, j)] = if deflated[j] { 0.0 } else { s / factor[at(j, j)] };
                } else if s <= floor {
                    deflated[i] = true;
                    factor[at(i, i)] = 0.0;
                } else {
                    factor[at(i, i)] = s.sqrt();
                }
            }
        }
        Self {
            n,
            bw,
            factor,
            deflated,
        }
    }

    pub fn from_sparse(g: &CsMat<f64>, tol: f64) -> Self {
        let n = g.rows();
        let mut bw = 0;
        let dense_rows: Vec<Vec<(usize, f64)>> = g
            .outer_iterator()
            .map(|row| row.iter().map(|(j, &v)| (j, v)).collect())
            .collect();
        for (i, row) in dense_rows.iter().enumerate() {
            for &(j, _) in row {
                bw = bw.max(i.abs_diff(j));
            }
        }
        let lookup = |i: usize, j: usize| {
            dense_rows[i]
                .iter()
                .find(|&&(c, _)| c == j)
                .map_or(0.0, |&(_, v)| v)
        };
        Self::new(n, bw, lookup, tol)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn rank_deficiency(&self) -> usize {
        self.deflated.iter().filter(|&&d| d).count()
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut z = rhs.clone();
        let z = z.as_mut_slice();
        // row i of the band as a slice over columns lo..i
        let row = |i: usize| {
            let lo = i.saturating_sub(bw);
            (lo, &self.factor[i * w + bw - (i - lo)..i * w + bw])
        };
        for i in 0..n {
            if self.deflated[i] {
                z[i] = 0.0;
                continue;
            }
            let (lo, l) = row(i);
            let s: f64 = l.iter().zip(&z[lo..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / self.factor[i * w + bw];
        }
        for i in (0..n).rev() {
            if self.deflated[i] {
                z[i] = 0.0;
                continue;
            }
            z[i] /= self.factor[i * w + bw];
            let (lo, l) = row(i);
            let zi = z[i];
            for (zk, a) in z[lo..i].iter_mut().zip(l) {
                *zk -= a * zi;
            }
        }
        DVector::from_column_slice(z)
    }
}

pub fn dense_to_sparse(m: &DMatrix<f64>) -> CsMat<f64> {
    let mut tri = TriMat::new((m.nrows(), m.ncols()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                tri.add_triplet(i, j, m[(i, j)]);
            }
        }
    }
    tri.to_csr()
}

/// `y = A x` for a CSR matrix.
pub fn sparse_mul(a: &CsMat<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(a.rows());
    for (i, row) in a.outer_iterator().enumerate() {
        y[i] = row.iter().map(|(j, &v)| v * x[j]).sum();
    }
    y
}

/// `y = Aᵀ x` for a CSR matrix.
pub fn sparse_mul_transpose(a: &CsMat<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(a.cols());
    for (i, row) in a.outer_iterator().enumerate() {
        let xi = x[i];
        for (j, &v) in row.iter() {
            y[j] += v * xi;
        }
    }
    y
}
