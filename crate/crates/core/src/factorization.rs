//! Onto decompositions `L = Z Zᵀ` of base-graph Laplacians.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{first_cycle_edge, laplacian, sorted_eigen, OrderedDigraph, KERNEL_THRESHOLD};

/// Entrywise tolerance for `Z Zᵀ = L` and `1ᵀ Z = 0`.
pub const DECOMPOSITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionSource {
    Incidence,
    Spectral,
    External,
}

/// An `N x (N-1)` matrix `Z` with `Z Zᵀ = L`, `1ᵀ Z = 0` and full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct OntoDecomposition {
    z: DMatrix<f64>,
    source: DecompositionSource,
}

impl OntoDecomposition {
    /// Node-by-edge incidence matrix of a tree: `+1` where the edge leaves
    /// the node, `-1` where it enters. Columns follow edge order.
    pub fn incidence(tree: &OrderedDigraph) -> Result<Self> {
        let n = tree.n_nodes();
        if !tree.is_connected() {
            return Err(Error::NotATree(format!(
                "{} is disconnected",
                tree.edge_string()
            )));
        }
        if let Some((i, j)) = first_cycle_edge(tree) {
            return Err(Error::NotATree(format!(
                "edge ({}, {}) closes a cycle",
                i + 1,
                j + 1
            )));
        }
        let mut z = DMatrix::zeros(n, n - 1);
        for (col, &(i, j)) in tree.edges().iter().enumerate() {
            z[(i, col)] = 1.0;
            z[(j, col)] = -1.0;
        }
        Ok(Self {
            z,
            source: DecompositionSource::Incidence,
        })
    }

    /// `Z = V diag(sqrt(λ))` over the nonzero Laplacian eigenpairs, ascending.
    pub fn spectral(g: &OrderedDigraph) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = g.n_nodes();
        if n < 2 {
            return Err(Error::InvalidDecomposition(
                "need at least two nodes".into(),
            ));
        }
        let (values, vectors) = sorted_eigen(&laplacian(g));
        let max = values[n - 1];
        let zeros = values
            .iter()
            .filter(|&&v| v.abs() < KERNEL_THRESHOLD * max)
            .count();
        if zeros != 1 {
            return Err(Error::InvalidDecomposition(format!(
                "expected a one-dimensional kernel, found {zeros} near-zero eigenvalues"
            )));
        }
        let z = DMatrix::from_fn(n, n - 1, |r, c| vectors[(r, c + 1)] * values[c + 1].sqrt());
        Ok(Self {
            z,
            source: DecompositionSource::Spectral,
        })
    }

    /// Wraps a caller-supplied matrix after checking it against `g`'s Laplacian.
    pub fn external(z: DMatrix<f64>, g: &OrderedDigraph) -> Result<Self> {
        let d = Self {
            z,
            source: DecompositionSource::External,
        };
        d.validate(g)?;
        Ok(d)
    }

    /// Checks all onto-decomposition invariants against `g`.
    pub fn validate(&self, g: &OrderedDigraph) -> Result<()> {
        let n = g.n_nodes();
        if self.z.nrows() != n || self.z.ncols() + 1 != n {
            return Err(Error::InvalidDecomposition(format!(
                "expected {}x{}, found {}x{}",
                n,
                n.saturating_sub(1),
                self.z.nrows(),
                self.z.ncols()
            )));
        }
        let residual = (&self.z * self.z.transpose() - laplacian(g)).amax();
        if residual > DECOMPOSITION_TOL {
            return Err(Error::InvalidDecomposition(format!(
                "Z Zᵀ differs from the Laplacian by {residual:e}"
            )));
        }
        let colsum = self.z.row_sum().amax();
        if colsum > DECOMPOSITION_TOL {
            return Err(Error::InvalidDecomposition(format!(
                "column sums of Z are not zero ({colsum:e})"
            )));
        }
        let (gram, _) = sorted_eigen(&self.gram());
        if gram[0] <= KERNEL_THRESHOLD * gram[gram.len() - 1] {
            return Err(Error::InvalidDecomposition("Z is rank deficient".into()));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn source(&self) -> DecompositionSource {
        self.source
    }

    pub fn n_nodes(&self) -> usize {
        self.z.nrows()
    }

    /// Number of dual variables, `N - 1`.
    pub fn n_duals(&self) -> usize {
        self.z.ncols()
    }

    /// `Zᵀ Z`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.z.transpose() * &self.z
    }

    /// Right-multiplies by an orthogonal matrix, giving another decomposition
    /// of the same Laplacian.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.n_duals() || q.ncols() != self.n_duals() {
            return Err(Error::Dimension("rotation must be (N-1)x(N-1)".into()));
        }
        let orth = (q.transpose() * q - DMatrix::identity(q.nrows(), q.ncols())).amax();
        if orth > 1e-10 {
            return Err(Error::InvalidDecomposition(format!(
                "rotation is not orthogonal ({orth:e})"
            )));
        }
        Ok(Self {
            z: &self.z * q,
            source: DecompositionSource::External,
        })
    }

    /// CSV dump: one row per node, one column per coordinate.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.n_duals()).map(|c| format!("z{c}")).collect();
        let _ = writeln!(out, "node,{}", header.join(","));
        for r in 0..self.z.nrows() {
            let row: Vec<String> = (0..self.z.ncols())
                .map(|c| format!("{:.16e}", self.z[(r, c)]))
                .collect();
            let _ = writeln!(out, "{},{}", r + 1, row.join(","));
        }
        out
    }
}

/// Orthogonal `O` with `z1 = z2 O`, built as `z2ᵀ z1 (z1ᵀ z1)⁻¹`.
pub fn align(z1: &OntoDecomposition, z2: &OntoDecomposition) -> Result<DMatrix<f64>> {
    if z1.z.shape() != z2.z.shape() {
        return Err(Error::Dimension(format!(
            "decompositions have shapes {:?} and {:?}",
            z1.z.shape(),
            z2.z.shape()
        )));
    }
    let l1 = &z1.z * z1.z.transpose();
    let l2 = &z2.z * z2.z.transpose();
    let gap = (&l1 - &l2).amax();
    if gap > 1e-8 {
        return Err(Error::InvalidDecomposition(format!(
            "decompositions factor different Laplacians (gap {gap:e})"
        )));
    }
    let gram_inv = z1
        .gram()
        .try_inverse()
        .ok_or_else(|| Error::InvalidDecomposition("Zᵀ Z is singular".into()))?;
    Ok(z2.z.transpose() * &z1.z * gram_inv)
}

/// The decomposition of the complete 3-node Laplacian with
/// `Zᵀ = [[√2, -√½, -√½], [0, √(3/2), -√(3/2)]]`.
pub fn complete3_reference() -> OntoDecomposition {
    let a = 2f64.sqrt();
    let b = 0.5f64.sqrt();
    let c = 1.5f64.sqrt();
    let z = DMatrix::from_row_slice(3, 2, &[a, 0.0, -b, c, -b, -c]);
    OntoDecomposition {
        z,
        source: DecompositionSource::External,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_connected_graphs;

    #[test]
    fn incidence_examples() {
        let path = OrderedDigraph::from_one_based(3, &[(1, 2), (2, 3)]).unwrap();
        let z = OntoDecomposition::incidence(&path).unwrap();
        assert_eq!(
            z.matrix(),
            &DMatrix::from_row_slice(3, 2, &[1., 0., -1., 1., 0., -1.])
        );
        let zzt = z.matrix() * z.matrix().transpose();
        assert_eq!(
            zzt,
            DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.])
        );
        let star = OrderedDigraph::from_one_based(3, &[(1, 3), (2, 3)]).unwrap();
        let z = OntoDecomposition::incidence(&star).unwrap();
        assert_eq!(
            z.matrix(),
            &DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., -1., -1.])
        );
    }

    #[test]
    fn incidence_rejects_non_trees() {
        let err = OntoDecomposition::incidence(&OrderedDigraph::complete(3)).unwrap_err();
        assert!(err.to_string().contains("(2, 3)"), "{err}");
        let split = OrderedDigraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let err = OntoDecomposition::incidence(&split).unwrap_err();
        assert!(err.to_string().contains("disconnected"));
    }

    #[test]
    fn spectral_complete3_and_reference() {
        let k3 = OrderedDigraph::complete(3);
        let z = OntoDecomposition::spectral(&k3).unwrap();
        z.validate(&k3).unwrap();
        complete3_reference().validate(&k3).unwrap();
    }

    #[test]
    fn spectral_single_edge() {
        // eigenpairs of [[1,-1],[-1,1]]: 0 on (1,1)/√2 and 2 on (1,-1)/√2
        let g = OrderedDigraph::path(2);
        let z = OntoDecomposition::spectral(&g).unwrap();
        assert!((z.matrix()[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((z.matrix()[(0, 0)] + z.matrix()[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn all_small_graphs_decompose() {
        for n in 2..=5 {
            for g in enumerate_connected_graphs(n).unwrap() {
                let spec = OntoDecomposition::spectral(&g).unwrap();
                spec.validate(&g).unwrap();
                // faithfulness: z_i . z_j nonzero exactly on adjacent pairs
                let gram = spec.matrix() * spec.matrix().transpose();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let nz = gram[(i, j)].abs() >= 1e-9;
                            assert_eq!(nz, g.has_edge(i, j));
                        }
                    }
                }
                if g.is_tree() {
                    OntoDecomposition::incidence(&g).unwrap().validate(&g).unwrap();
                }
            }
        }
    }

    #[test]
    fn align_examples() {
        let path = OrderedDigraph::path(3);
        let inc = OntoDecomposition::incidence(&path).unwrap();
        let o = align(&inc, &inc).unwrap();
        assert!((o - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);

        let spec = OntoDecomposition::spectral(&path).unwrap();
        let o = align(&inc, &spec).unwrap();
        assert!((o.transpose() * &o - DMatrix::<f64>::identity(2, 2)).amax() < 1e-8);
        assert!((spec.matrix() * &o - inc.matrix()).amax() < 1e-8);

        let other = OntoDecomposition::spectral(&OrderedDigraph::complete(3)).unwrap();
        assert!(align(&inc, &other).is_err());
    }

    #[test]
    fn external_rejects_wrong_matrix() {
        let z = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(OntoDecomposition::external(z, &OrderedDigraph::path(2)).is_err());
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let z = OntoDecomposition::incidence(&OrderedDigraph::path(4)).unwrap();
        let csv = z.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("node,z1,z2,z3\n"));
    }
}
