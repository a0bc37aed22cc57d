//! Maximal monotone operators, accessed only through their resolvents
//! `J_{τA} = (I + τA)⁻¹`.
//!
//! The step `τ` is a call-time argument: the solver evaluates node `i` with
//! `σ / d_i`. Any factorization an operator needs is computed eagerly at
//! construction, so every operator is immutable and `Sync`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use sprs::CsMat;

use crate::error::{Error, Result};
use crate::graph::sorted_eigen;
use crate::linalg::{dense_to_sparse, sparse_mul, sparse_mul_transpose, BandedCholesky};

pub trait Resolvent: Send + Sync {
    /// Dimension of the ambient space `H`.
    fn dim(&self) -> usize;

    /// Evaluates `J_{τA}(input)`.
    fn resolve(&self, tau: f64, input: &DVector<f64>) -> DVector<f64>;

    /// `Some((μ, c))` when `A x = μ (x - c)`.
    fn affine_form(&self) -> Option<(f64, &DVector<f64>)> {
        None
    }

    fn name(&self) -> &'static str;
}

/// Shared handle to an operator.
pub type Operator = Arc<dyn Resolvent>;

/// The zero operator; its resolvent is the identity.
#[derive(Debug, Clone)]
pub struct ZeroOperator {
    dim: usize,
}

impl ZeroOperator {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Resolvent for ZeroOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, _tau: f64, input: &DVector<f64>) -> DVector<f64> {
        input.clone()
    }

    fn name(&self) -> &'static str {
        "zero"
    }
}

// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric PSD matrix, shareable between operators.
#[derive(Debug, Clone)]
pub struct SpectralFactor {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
    vectors_t: DMatrix<f64>,
}

impl SpectralFactor {
    pub fn new(k: &DMatrix<f64>) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::InvalidOperator("matrix must be square".into()));
        }
        let scale = k.amax().max(1.0);
        let asym = (k - k.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidOperator(format!(
                "matrix is not symmetric (asymmetry {asym:e})"
            )));
        }
        let (values, vectors) = sorted_eigen(k);
        if values.first().copied().unwrap_or(0.0) < -1e-10 * scale {
            return Err(Error::InvalidOperator(format!(
                "matrix is not positive semidefinite (min eigenvalue {:e})",
                values[0]
            )));
        }
        let values = DVector::from_iterator(values.len(), values.into_iter().map(|v| v.max(0.0)));
        let vectors_t = vectors.transpose();
        Ok(Self {
            values,
            vectors,
            vectors_t,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }
}

/// Resolvent of `weight · xᵀ K x`: `J_τ(r) = (I + 2τ·weight·K)⁻¹ r`.
#[derive(Debug, Clone)]
pub struct QuadraticProx {
    factor: Arc<SpectralFactor>,
    weight: f64,
}

pub fn prox_quadratic(k: &DMatrix<f64>, weight: f64) -> Result<QuadraticProx> {
    QuadraticProx::shared(Arc::new(SpectralFactor::new(k)?), weight)
}

impl QuadraticProx {
    pub fn shared(factor: Arc<SpectralFactor>, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidOperator(format!(
                "quadratic weight must be nonnegative, got {weight}"
            )));
        }
        Ok(Self { factor, weight })
    }
}

impl Resolvent for QuadraticProx {
    fn dim(&self) -> usize {
        self.factor.values.len()
    }

    fn resolve(&self, tau: f64, input: &DVector<f64>) -> DVector<f64> {
        if self.weight == 0.0 {
            return input.clone();
        }
        let mut coeffs = &self.factor.vectors_t * input;
        let scale = 2.0 * tau * self.weight;
        for (c, &lambda) in coeffs.iter_mut().zip(self.factor.values.iter()) {
            *c /= 1.0 + scale * lambda;
        }
        &self.factor.vectors * coeffs
    }

    fn name(&self) -> &'static str {
        "quadratic"
    }
}

// ---------------------------------------------------------------------------

/// Resolvent of `max{offset - s·x, 0}`.
#[derive(Debug, Clone)]
pub struct HingeProx {
    s: DVector<f64>,
    s_norm_sq: f64,
    offset: f64,
}

pub fn prox_hinge_affine(s: DVector<f64>, offset: f64) -> Result<HingeProx> {
    let s_norm_sq = s.norm_squared();
    if s_norm_sq == 0.0 {
        return Err(Error::InvalidOperator("hinge direction must be nonzero".into()));
    }
    Ok(HingeProx {
        s,
        s_norm_sq,
        offset,
    })
}

impl Resolvent for HingeProx {
    fn dim(&self) -> usize {
        self.s.len()
    }

    fn resolve(&self, tau: f64, input: &DVector<f64>) -> DVector<f64> {
        let p = self.s.dot(input);
        let q = tau * self.s_norm_sq;
        let target = if p >= self.offset {
            p
        } else if p <= self.offset - q {
            p + q
        } else {
            self.offset
        };
        if target == p {
            return input.clone();
        }
        input + &self.s * ((target - p) / self.s_norm_sq)
    }

    fn name(&self) -> &'static str {
        "hinge"
    }
}

// ---------------------------------------------------------------------------

/// Resolvent of `Σ_i ‖x_i‖^{3/2}` over consecutive 2-blocks.
#[derive(Debug, Clone)]
pub struct PowerThreeHalvesProx {
    dim: usize,
}

pub fn prox_power_three_halves(dim: usize) -> Result<PowerThreeHalvesProx> {
    check_blocks(dim)?;
    Ok(PowerThreeHalvesProx { dim })
}

/// Magnitude after the 3/2-power prox: `u²` with `u² + (3τ/2)u - r = 0`.
pub fn three_halves_magnitude(tau: f64, r: f64) -> f64 {
    let b = 1.5 * tau;
    let u = (-b + (b * b + 4.0 * r).sqrt()) / 2.0;
    u * u
}

impl Resolvent for PowerThreeHalvesProx {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, tau: f64, input: &DVector<f64>) -> DVector<f64> {
        let mut out = input.clone();
        for block in out.as_mut_slice().chunks_exact_mut(2) {
            let r = block[0].hypot(block[1]);
            if r == 0.0 {
                continue;
            }
            let scale = three_halves_magnitude(tau, r) / r;
            block[0] *= scale;
            block[1] *= scale;
        }
        out
    }

    fn name(&self) -> &'static str {
        "power-3/2"
    }
}

/// Resolvent of `Σ_i ‖x_i‖` over consecutive 2-blocks (block soft thresholding).
#[derive(Debug, Clone)]
pub struct GroupL1Prox {
    dim: usize,
}

pub fn prox_group_l1(dim: usize) -> Result<GroupL1Prox> {
    check_blocks(dim)?;
    Ok(GroupL1Prox { dim })
}

impl Resolvent for GroupL1Prox {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, tau: f64, input: &DVector<f64>) -> DVector<f64> {
        let mut out = input.clone();
        for block in out.as_mut_slice().chunks_exact_mut(2) {
            let r = block[0].hypot(block[1]);
            let scale = if r <= tau { 0.0 } else { 1.0 - tau / r };
            block[0] *= scale;
            block[1] *= scale;
        }
        out
    }

    fn name(&self) -> &'static str {
        "group-l1"
    }
}

fn check_blocks(dim: usize) -> Result<()> {
    if dim % 2 != 0 {
        return Err(Error::InvalidOperator(format!(
            "blockwise operator needs an even dimension, got {dim}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

/// Euclidean projection onto `{x : Λx = b}`.
///
/// `ΛΛᵀ` is factored once with a semidefinite banded Cholesky, so rank
/// deficient `Λ` (a divergence with no-flux boundary, say) is supported as
/// long as `b` lies in its range.
#[derive(Debug, Clone)]
pub struct AffineProjection {
    lambda: CsMat<f64>,
    b: DVector<f64>,
    gram: BandedCholesky,
}

/// Relative residual `‖ΛJ(r) - b‖ / ‖b‖` above which `b` counts as out of range.
pub const RANGE_TOL: f64 = 1e-6;

pub fn project_affine(lambda: &DMatrix<f64>, b: DVector<f64>) -> Result<AffineProjection> {
    AffineProjection::new(dense_to_sparse(lambda), b)
}

impl AffineProjection {
    pub fn new(lambda: CsMat<f64>, b: DVector<f64>) -> Result<Self> {
        let lambda = lambda.to_csr();
        if lambda.rows() != b.len() {
            return Err(Error::Dimension(format!(
                "Λ has {} rows but b has length {}",
                lambda.rows(),
                b.len()
            )));
        }
        let lt = lambda.transpose_view().to_csr();
        let gram_mat: CsMat<f64> = &lambda * &lt;
        let gram = BandedCholesky::from_sparse(&gram_mat.to_csr(), 1e-10);
        let proj = Self { lambda, b, gram };
        let x0 = proj.resolve(1.0, &DVector::zeros(proj.dim()));
        let residual = (sparse_mul(&proj.lambda, &x0) - &proj.b).norm();
        let bnorm = proj.b.norm();
        if residual > RANGE_TOL * bnorm.max(f64::MIN_POSITIVE) && residual > 1e-12 {
            return Err(Error::InvalidOperator(format!(
                "b is not in the range of Λ (residual {residual:e}, ‖b‖ = {bnorm:e})"
            )));
        }
        Ok(proj)
    }

    pub fn lambda(&self) -> &CsMat<f64> {
        &self.lambda
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }
}

impl Resolvent for AffineProjection {
    fn dim(&self) -> usize {
        self.lambda.cols()
    }

    fn resolve(&self, _tau: f64, input: &DVector<f64>) -> DVector<f64> {
        let defect = sparse_mul(&self.lambda, input) - &self.b;
        let y = self.gram.solve(&defect);
        input - sparse_mul_transpose(&self.lambda, &y)
    }

    fn name(&self) -> &'static str {
        "affine-projection"
    }
}

/// Projection onto `{x : x_i = 0 on water blocks, ‖x_i‖ ≤ cap on bridge blocks}`.
#[derive(Debug, Clone)]
pub struct CapacityProjection {
    dim: usize,
    bridge: Vec<usize>,
    water: Vec<usize>,
    cap: f64,
}

pub fn project_capacity(
    dim: usize,
    bridge: &[usize],
    water: &[usize],
    cap: f64,
) -> Result<CapacityProjection> {
    check_blocks(dim)?;
    if !(cap > 0.0) {
        return Err(Error::InvalidOperator(format!("capacity must be positive, got {cap}")));
    }
    let blocks = dim / 2;
    let mut bridge = bridge.to_vec();
    let mut water = water.to_vec();
    bridge.sort_unstable();
    bridge.dedup();
    water.sort_unstable();
    water.dedup();
    if let Some(&b) = bridge.iter().chain(water.iter()).find(|&&b| b >= blocks) {
        return Err(Error::InvalidOperator(format!(
            "block index {b} out of range for {blocks} blocks"
        )));
    }
    if let Some(&b) = bridge.iter().find(|b| water.binary_search(b).is_ok()) {
        return Err(Error::InvalidOperator(format!(
            "block {b} is both bridge and water"
        )));
    }
    Ok(CapacityProjection {
        dim,
        bridge,
        water,
        cap,
    })
}

impl Resolvent for CapacityProjection {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, _tau: f64, input: &DVector<f64>) -> DVector<f64> {
        let mut out = input.clone();
        for &b in &self.water {
            out[2 * b] = 0.0;
            out[2 * b + 1] = 0.0;
        }
        for &b in &self.bridge {
            let r = out[2 * b].hypot(out[2 * b + 1]);
            if r > self.cap {
                let s = self.cap / r;
                out[2 * b] *= s;
                out[2 * b + 1] *= s;
            }
        }
        out
    }

    fn name(&self) -> &'static str {
        "capacity-projection"
    }
}

// ---------------------------------------------------------------------------

/// `A x = μ (x - c)`, resolvent `(r + τμc) / (1 + τμ)`.
#[derive(Debug, Clone)]
pub struct TranslatedQuadratic {
    center: DVector<f64>,
    mu: f64,
}

pub fn prox_translated_quadratic(center: DVector<f64>, mu: f64) -> Result<TranslatedQuadratic> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidOperator(format!("μ must be positive, got {mu}")));
    }
    Ok(TranslatedQuadratic { center, mu })
}

impl TranslatedQuadratic {
    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Resolvent for TranslatedQuadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn resolve(&self, tau: f64, input: &DVector<f64>) -> DVector<f64> {
        let tm = tau * self.mu;
        (input + &self.center * tm) / (1.0 + tm)
    }

    fn affine_form(&self) -> Option<(f64, &DVector<f64>)> {
        Some((self.mu, &self.center))
    }

    fn name(&self) -> &'static str {
        "translated-quadratic"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn quadratic_examples() {
        let k = DMatrix::identity(3, 3);
        let r = v(&[3.0, -6.0, 1.5]);
        assert_eq!(prox_quadratic(&k, 0.0).unwrap().resolve(1.0, &r), r);
        let j = prox_quadratic(&k, 1.0).unwrap().resolve(1.0, &r);
        assert!(close(&j, &(&r / 3.0), 1e-14));

        let k = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let op = prox_quadratic(&k, 0.7).unwrap();
        let r = v(&[1.0, -2.0]);
        let tau = 0.3;
        let j = op.resolve(tau, &r);
        let optimality = &k * &j * (2.0 * tau * 0.7) + &j - &r;
        assert!(optimality.amax() < 1e-10);

        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(prox_quadratic(&asym, 1.0).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(prox_quadratic(&indefinite, 1.0).is_err());
    }

    #[test]
    fn hinge_examples() {
        let op = prox_hinge_affine(v(&[1.0, 2.0]), 1.0).unwrap();
        let r = v(&[3.0, 1.0]);
        assert_eq!(op.resolve(0.5, &r), r);

        let scalar = prox_hinge_affine(v(&[1.0]), 1.0).unwrap();
        let j = scalar.resolve(1.0, &v(&[-1.0]));
        assert!(j[0].abs() < 1e-15);

        // grid minimisation of max{1 - z, 0} + (z + 1)^2 / 2
        let best = (0..=40000)
            .map(|k| -2.0 + k as f64 * 1e-4)
            .min_by(|a, b| {
                let f = |z: f64| (1.0 - z).max(0.0) + (z + 1.0).powi(2) / 2.0;
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert!((best - j[0]).abs() < 2e-4);

        assert!(prox_hinge_affine(v(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn three_halves_examples() {
        let op = prox_power_three_halves(4).unwrap();
        let r = v(&[0.3, -0.4, 2.0, 1.0]);
        assert!(close(&op.resolve(0.0, &r), &r, 1e-15));
        assert_eq!(op.resolve(1.0, &v(&[0.0, 0.0, 0.0, 0.0])), v(&[0.0; 4]));
        let j = op.resolve(2.0, &v(&[4.0, 0.0, 0.0, 0.0]));
        assert!((j[0] - 1.0).abs() < 1e-14 && j[1] == 0.0);
        // 1-D brute force of 2 m^{3/2} + (m - 4)^2 / 2
        let best = (0..=400000)
            .map(|k| k as f64 * 1e-5)
            .min_by(|a, b| {
                let f = |m: f64| 2.0 * m.powf(1.5) + (m - 4.0).powi(2) / 2.0;
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert!((best - 1.0).abs() < 1e-4);
        // direction is preserved
        let j = op.resolve(0.7, &r);
        let cross = j[0] * r[1] - j[1] * r[0];
        assert!(cross.abs() < 1e-15);
        assert!(prox_power_three_halves(3).is_err());
    }

    #[test]
    fn group_l1_examples() {
        let op = prox_group_l1(2).unwrap();
        assert!(close(&op.resolve(1.0, &v(&[3.0, 0.0])), &v(&[2.0, 0.0]), 1e-15));
        assert_eq!(op.resolve(1.0, &v(&[0.6, 0.8])), v(&[0.0, 0.0]));
        assert_eq!(op.resolve(0.0, &v(&[0.6, 0.8])), v(&[0.6, 0.8]));
        // 2-D grid minimisation of ‖x‖ + ‖x - (3,0)‖²/2
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for a in 0..=400 {
            for b in -100..=100 {
                let (x, y) = (a as f64 * 0.01, b as f64 * 0.01);
                let f = x.hypot(y) + ((x - 3.0).powi(2) + y * y) / 2.0;
                if f < best.0 {
                    best = (f, x, y);
                }
            }
        }
        assert!((best.1 - 2.0).abs() < 0.011 && best.2.abs() < 0.011);
    }

    #[test]
    fn affine_examples() {
        let lambda = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let op = project_affine(&lambda, v(&[0.0])).unwrap();
        assert!(close(&op.resolve(1.0, &v(&[1.0, 1.0])), &v(&[0.0, 0.0]), 1e-15));
        assert!(close(&op.resolve(1.0, &v(&[2.0, -2.0])), &v(&[2.0, -2.0]), 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lambda = DMatrix::from_fn(3, 6, |_, _| rng.random_range(-1.0..1.0));
        let b = v(&[0.5, -1.0, 2.0]);
        let op = project_affine(&lambda, b.clone()).unwrap();
        for _ in 0..20 {
            let r = DVector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
            let j = op.resolve(1.0, &r);
            assert!((&lambda * &j - &b).amax() < 1e-8);
        }

        // rank-deficient Λ: second row duplicates the first
        let lambda = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(project_affine(&lambda, v(&[1.0, 1.0])).is_ok());
        assert!(project_affine(&lambda, v(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn capacity_examples() {
        let op = project_capacity(4, &[], &[], 1.0).unwrap();
        assert_eq!(op.resolve(1.0, &v(&[5.0, 1.0, 2.0, 2.0])), v(&[5.0, 1.0, 2.0, 2.0]));
        let op = project_capacity(4, &[0], &[1], 5e-2).unwrap();
        let j = op.resolve(1.0, &v(&[0.1, 0.0, 7.0, -3.0]));
        assert!(close(&j, &v(&[0.05, 0.0, 0.0, 0.0]), 1e-15));
        assert!(project_capacity(4, &[0, 1], &[1], 1.0).is_err());
    }

    #[test]
    fn translated_quadratic_examples() {
        let c = v(&[1.0, 1.0]);
        let op = prox_translated_quadratic(c.clone(), 2.0).unwrap();
        assert_eq!(op.resolve(0.4, &c), c);
        let j = op.resolve(0.5, &v(&[0.0, 0.0]));
        assert!(close(&j, &v(&[0.5, 0.5]), 1e-15));
        // optimality: j + τ μ (j - c) = r
        let resid = &j + (&j - &c) * (0.5 * 2.0);
        assert!(resid.amax() < 1e-15);
        let halving = prox_translated_quadratic(v(&[0.0]), 1.0).unwrap();
        assert_eq!(halving.resolve(1.0, &v(&[2.0]))[0], 1.0);
        assert!(prox_translated_quadratic(c, 0.0).is_err());
    }

    #[test]
    fn projections_are_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lambda = DMatrix::from_fn(2, 6, |_, _| rng.random_range(-1.0..1.0));
        let aff = project_affine(&lambda, v(&[1.0, 2.0])).unwrap();
        let cap = project_capacity(6, &[0, 2], &[1], 0.3).unwrap();
        for _ in 0..50 {
            let r = DVector::from_fn(6, |_, _| rng.random_range(-2.0..2.0));
            let j = aff.resolve(1.0, &r);
            assert!(close(&aff.resolve(1.0, &j), &j, 1e-10));
            let j = cap.resolve(1.0, &r);
            assert!(close(&cap.resolve(1.0, &j), &j, 1e-10));
        }
    }

    #[test]
    fn subgradient_optimality_by_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tau = 0.8;
        let h = 1e-6;
        let k = {
            let b = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            &b * b.transpose()
        };
        let s = v(&[0.5, -1.0, 2.0]);
        type Case = (Box<dyn Resolvent>, Box<dyn Fn(&DVector<f64>) -> f64>);
        let kq = k.clone();
        let sq = s.clone();
        let cases: Vec<Case> = vec![
            (
                Box::new(prox_quadratic(&k, 0.6).unwrap()),
                Box::new(move |x| 0.6 * x.dot(&(&kq * x))),
            ),
            (
                Box::new(prox_hinge_affine(s.clone(), 1.0).unwrap()),
                Box::new(move |x| (1.0 - sq.dot(x)).max(0.0)),
            ),
            (
                Box::new(prox_translated_quadratic(v(&[1.0, 2.0, 3.0]), 1.5).unwrap()),
                Box::new(|x| 0.75 * (x - v(&[1.0, 2.0, 3.0])).norm_squared()),
            ),
        ];
        for (op, f) in &cases {
            for _ in 0..20 {
                let r = DVector::from_fn(3, |_, _| rng.random_range(-3.0..3.0));
                let j = op.resolve(tau, &r);
                if op.name() == "hinge" && (s.dot(&j) - 1.0).abs() < 1e-6 {
                    continue; // kink
                }
                let g = (&r - &j) / tau;
                for c in 0..3 {
                    let mut e = DVector::zeros(3);
                    e[c] = h;
                    let fd = (f(&(&j + &e)) - f(&(&j - &e))) / (2.0 * h);
                    assert!((fd - g[c]).abs() < 1e-5, "{} coordinate {c}", op.name());
                }
            }
        }
        // blockwise terms, away from zero blocks
        let p32 = prox_power_three_halves(2).unwrap();
        let gl1 = prox_group_l1(2).unwrap();
        let f32 = |x: &DVector<f64>| x.norm().powf(1.5);
        let fl1 = |x: &DVector<f64>| x.norm();
        for _ in 0..20 {
            let r = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
            for (op, f) in [
                (&p32 as &dyn Resolvent, &f32 as &dyn Fn(&DVector<f64>) -> f64),
                (&gl1, &fl1),
            ] {
                let j = op.resolve(tau, &r);
                if j.norm() < 1e-3 {
                    continue;
                }
                let g = (&r - &j) / tau;
                for c in 0..2 {
                    let mut e = DVector::zeros(2);
                    e[c] = h;
                    let fd = (f(&(&j + &e)) - f(&(&j - &e))) / (2.0 * h);
                    assert!((fd - g[c]).abs() < 1e-5, "{}", op.name());
                }
            }
        }
    }

    /// One instance of every operator in the catalogue, all on `R^6`.
    pub(crate) fn catalogue(rng: &mut ChaCha8Rng) -> Vec<Box<dyn Resolvent>> {
        let b = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let k = &b * b.transpose();
        let lambda = DMatrix::from_fn(3, 6, |_, _| rng.random_range(-1.0..1.0));
        let s = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let c = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        vec![
            Box::new(ZeroOperator::new(6)),
            Box::new(prox_quadratic(&k, 0.4).unwrap()),
            Box::new(prox_hinge_affine(s, 1.0).unwrap()),
            Box::new(prox_power_three_halves(6).unwrap()),
            Box::new(prox_group_l1(6).unwrap()),
            Box::new(project_affine(&lambda, v(&[0.3, -0.2, 1.0])).unwrap()),
            Box::new(project_capacity(6, &[0, 2], &[1], 0.5).unwrap()),
            Box::new(prox_translated_quadratic(c, 1.7).unwrap()),
        ]
    }

    #[test]
    fn firm_nonexpansiveness() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for op in catalogue(&mut rng) {
            for tau in [0.1, 1.0, 10.0] {
                for _ in 0..1000 {
                    let u = DVector::from_fn(6, |_, _| rng.random_range(-5.0..5.0));
                    let w = DVector::from_fn(6, |_, _| rng.random_range(-5.0..5.0));
                    let d = op.resolve(tau, &u) - op.resolve(tau, &w);
                    let lhs = d.norm_squared();
                    let rhs = d.dot(&(&u - &w));
                    assert!(lhs <= rhs + 1e-9, "{} at τ = {tau}: {lhs} > {rhs}", op.name());
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn firm_nonexpansive_on_arbitrary_pairs(
            seed in 0u64..1000,
            tau in 0.01f64..20.0,
            u in proptest::collection::vec(-10.0f64..10.0, 6),
            w in proptest::collection::vec(-10.0f64..10.0, 6),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (u, w) = (DVector::from_vec(u), DVector::from_vec(w));
            for op in catalogue(&mut rng) {
                let d = op.resolve(tau, &u) - op.resolve(tau, &w);
                proptest::prop_assert!(d.norm_squared() <= d.dot(&(&u - &w)) + 1e-9, "{}", op.name());
            }
        }
    }
}
