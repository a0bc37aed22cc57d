//! Centralized graph-based Douglas–Rachford iterations.
//!
//! Three engines share one set of per-node kernels:
//!
//! * [`GraphDrs`] runs the general iteration with an arbitrary onto
//!   decomposition `Z` of the base Laplacian, dual `w ∈ H^{N-1}`.
//! * [`TreeDrs`] is the tree-base specialization with one dual per base edge.
//! * [`WtildeDrs`] runs on `w̃ = Z w ∈ H^N` and needs no decomposition.
//!
//! The message-passing simulator calls the same kernels ([`node_update`],
//! [`weighted_sum`], [`relax`], [`laplacian_row`]), so the simulated and
//! centralized iterates agree bit for bit.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::factorization::{complete3_reference, OntoDecomposition};
use crate::graph::{
    algebraic_connectivity, laplacian, p_matrix, sigma_matrix, unbalance, BilevelGraph,
    DegreeProfile, OrderedDigraph,
};
use crate::operators::{Operator, Resolvent};

/// Lower clamp for user-supplied relaxation sequences; the upper is `2 - ε`.
pub const RELAXATION_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Relaxation {
    /// `θ_k = θ` for all `k`, with `θ ∈ (0, 2)`.
    Constant(f64),
    /// `θ_k` from the list, clamped to `[ε, 2 - ε]`; the last value repeats.
    Sequence(Vec<f64>),
}

impl Default for Relaxation {
    fn default() -> Self {
        Relaxation::Constant(1.0)
    }
}

impl Relaxation {
    pub fn theta(&self, k: usize) -> f64 {
        match self {
            Relaxation::Constant(t) => *t,
            Relaxation::Sequence(seq) => {
                let t = seq[k.min(seq.len() - 1)];
                t.clamp(RELAXATION_EPS, 2.0 - RELAXATION_EPS)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Relaxation::Constant(t) if !(*t > 0.0 && *t < 2.0) => Err(Error::InvalidConfig(
                format!("constant relaxation must lie in (0, 2), got {t}"),
            )),
            Relaxation::Sequence(seq) if seq.is_empty() => {
                Err(Error::InvalidConfig("relaxation sequence is empty".into()))
            }
            Relaxation::Sequence(seq) if seq.iter().any(|t| !t.is_finite()) => Err(
                Error::InvalidConfig("relaxation sequence has non-finite entries".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sigma: f64,
    pub relaxation: Relaxation,
    pub max_iter: usize,
    /// Stop once `‖Zᵀx‖² < tol`; zero disables early stopping.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            relaxation: Relaxation::default(),
            max_iter: 1000,
            tol: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn new(sigma: f64, max_iter: usize) -> Self {
        Self {
            sigma,
            max_iter,
            ..Self::default()
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.relaxation = Relaxation::Constant(theta);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be nonnegative, got {}",
                self.tol
            )));
        }
        self.relaxation.validate()
    }
}

/// Iterate after `k` completed iterations: `w = w^k`, `x = x^k`, `a = a^k`.
///
/// For [`WtildeDrs`], `w` holds the `N` variables `w̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub w: Vec<DVector<f64>>,
    pub x: Vec<DVector<f64>>,
    pub a: Vec<DVector<f64>>,
    pub k: usize,
}

impl SolverState {
    pub fn mean(&self) -> DVector<f64> {
        mean(&self.x)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.x)
    }
}

/// Diagnostics of iteration `k`, which maps `w^{k-1}` to `w^k` and produces `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// `‖T̃w^{k-1} - w^{k-1}‖² = ‖Zᵀx^k‖²`.
    pub residual_sq: f64,
    pub variance: f64,
    pub subgrad_sum_norm: f64,
    pub objective: Option<f64>,
}

// ---------------------------------------------------------------------------
// Shared kernels

/// `Σ c·v` over `terms`, accumulated in iteration order from zero.
pub fn weighted_sum<'a>(
    dim: usize,
    terms: impl IntoIterator<Item = (f64, &'a DVector<f64>)>,
) -> DVector<f64> {
    let mut acc = DVector::zeros(dim);
    for (c, v) in terms {
        acc.axpy(c, v, 1.0);
    }
    acc
}

/// Resolvent argument `(2/d) Σ x_h + (1/d) dual`.
pub fn resolvent_input(d: usize, pred_sum: &DVector<f64>, dual: &DVector<f64>) -> DVector<f64> {
    let d = d as f64;
    let mut v = pred_sum * (2.0 / d);
    v.axpy(1.0 / d, dual, 1.0);
    v
}

/// One node's resolvent evaluation. Returns `(x_i, a_i)` with
/// `a_i = d (v - x_i) / σ ∈ A_i x_i`.
pub fn node_update(
    op: &dyn Resolvent,
    sigma: f64,
    d: usize,
    pred_sum: &DVector<f64>,
    dual: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let v = resolvent_input(d, pred_sum, dual);
    let x = op.resolve(sigma / d as f64, &v);
    let a = (&v - &x) * (d as f64 / sigma);
    (x, a)
}

/// `w ← w - θ r`.
pub fn relax(w: &mut DVector<f64>, theta: f64, residual: &DVector<f64>) {
    w.axpy(-theta, residual, 1.0);
}

/// Row `i` of `L x`: `d'_i x_i - Σ_{j ∈ adj(i)} x_j`.
pub fn laplacian_row(base_degree: usize, x_i: &DVector<f64>, nbr_sum: &DVector<f64>) -> DVector<f64> {
    x_i * base_degree as f64 - nbr_sum
}

pub fn mean(x: &[DVector<f64>]) -> DVector<f64> {
    let dim = x.first().map_or(0, |v| v.len());
    weighted_sum(dim, x.iter().map(|v| (1.0, v))) / x.len() as f64
}

/// State variance `(1/N) Σ ‖x_i - x̄‖²`.
pub fn variance(x: &[DVector<f64>]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - &m).norm_squared()).sum::<f64>() / x.len() as f64
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|c| c.is_finite())
}

// ---------------------------------------------------------------------------

/// Per-node data shared by all engines.
#[derive(Clone)]
pub struct Nodes {
    bg: BilevelGraph,
    ops: Vec<Operator>,
    cfg: SolverConfig,
    dim: usize,
    degrees: DegreeProfile,
    preds: Vec<Vec<usize>>,
    base_adj: Vec<Vec<usize>>,
}

impl Nodes {
    pub fn new(bg: BilevelGraph, ops: Vec<Operator>, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n = bg.n_nodes();
        if ops.len() != n {
            return Err(Error::Dimension(format!(
                "{} operators for {} nodes",
                ops.len(),
                n
            )));
        }
        let dim = ops[0].dim();
        if let Some((i, op)) = ops.iter().enumerate().find(|(_, op)| op.dim() != dim) {
            return Err(Error::Dimension(format!(
                "operator {} has dimension {}, expected {}",
                i + 1,
                op.dim(),
                dim
            )));
        }
        let degrees = bg.degrees();
        let preds = (0..n).map(|i| bg.state().predecessors(i)).collect();
        let base_adj = (0..n).map(|i| bg.base().neighbors(i)).collect();
        Ok(Self {
            bg,
            ops,
            cfg,
            dim,
            degrees,
            preds,
            base_adj,
        })
    }

    pub fn graph(&self) -> &BilevelGraph {
        &self.bg
    }

    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn n_nodes(&self) -> usize {
        self.bg.n_nodes()
    }

    /// Dimension of `H`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees.degree[i]
    }

    pub fn base_degree(&self, i: usize) -> usize {
        self.degrees.base_degree[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn base_neighbors(&self, i: usize) -> &[usize] {
        &self.base_adj[i]
    }

    /// The x-sweep, with `dual(i)` giving node `i`'s coupling term.
    fn sweep(
        &self,
        k: usize,
        dual: impl Fn(usize) -> DVector<f64>,
    ) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        let n = self.n_nodes();
        let mut x: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        for i in 0..n {
            let pred_sum = weighted_sum(self.dim, self.preds[i].iter().map(|&h| (1.0, &x[h])));
            let (xi, ai) = node_update(
                self.ops[i].as_ref(),
                self.cfg.sigma,
                self.degree(i),
                &pred_sum,
                &dual(i),
            );
            if !all_finite(&xi) {
                return Err(Error::NonFinite { iter: k });
            }
            x.push(xi);
            a.push(ai);
        }
        Ok((x, a))
    }

    fn check_duals(&self, w: &[DVector<f64>], count: usize) -> Result<()> {
        if w.len() != count {
            return Err(Error::Dimension(format!(
                "expected {count} dual variables, got {}",
                w.len()
            )));
        }
        if let Some(v) = w.iter().find(|v| v.len() != self.dim) {
            return Err(Error::Dimension(format!(
                "dual variable has length {}, expected {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn record(&self, k: usize, residual_sq: f64, x: &[DVector<f64>], a: &[DVector<f64>]) -> TraceRecord {
        let asum = weighted_sum(self.dim, a.iter().map(|v| (1.0, v)));
        TraceRecord {
            k,
            residual_sq,
            variance: variance(x),
            subgrad_sum_norm: asum.norm(),
            objective: None,
        }
    }

    fn initial_state(&self, w: Vec<DVector<f64>>) -> SolverState {
        let n = self.n_nodes();
        SolverState {
            w,
            x: vec![DVector::zeros(self.dim); n],
            a: vec![DVector::zeros(self.dim); n],
            k: 0,
        }
    }
}

/// Common interface of the three engines.
pub trait Iteration {
    fn nodes(&self) -> &Nodes;

    /// Number of dual vectors in the state.
    fn n_duals(&self) -> usize;

    /// State with the given duals (zeros when `None`), checked for admissibility.
    fn init(&self, w0: Option<Vec<DVector<f64>>>) -> Result<SolverState>;

    /// Advances `st` by one iteration and reports its diagnostics.
    fn step(&self, st: &mut SolverState) -> Result<TraceRecord>;
}

/// Optional extras for [`run`].
#[derive(Default)]
pub struct RunOptions<'a> {
    pub w0: Option<Vec<DVector<f64>>>,
    /// Evaluated at the mean estimate `x̄` after each iteration.
    pub objective: Option<&'a (dyn Fn(&DVector<f64>) -> f64 + Sync)>,
    /// Stop as soon as the state variance drops below this value.
    pub variance_tol: Option<f64>,
}

/// Iterates until `residual² < tol`, the optional variance target, or `max_iter`.
pub fn run<I: Iteration + ?Sized>(
    engine: &I,
    opts: RunOptions<'_>,
) -> Result<(SolverState, Vec<TraceRecord>)> {
    let cfg = engine.nodes().config().clone();
    let mut st = engine.init(opts.w0)?;
    let mut trace = Vec::with_capacity(cfg.max_iter.min(100_000));
    for _ in 0..cfg.max_iter {
        let mut rec = engine.step(&mut st)?;
        if let Some(f) = opts.objective {
            rec.objective = Some(f(&st.mean()));
        }
        let done = rec.residual_sq < cfg.tol
            || opts.variance_tol.is_some_and(|t| rec.variance < t);
        trace.push(rec);
        if done {
            break;
        }
    }
    Ok((st, trace))
}

// ---------------------------------------------------------------------------

/// The general iteration with an arbitrary onto decomposition.
#[derive(Clone)]
pub struct GraphDrs {
    nodes: Nodes,
    z: OntoDecomposition,
    // node -> (column, Z_ij), nonzeros in column order
    coupling: Vec<Vec<(usize, f64)>>,
    // column -> (node, Z_ij), nonzeros in node order
    columns: Vec<Vec<(usize, f64)>>,
}

impl GraphDrs {
    pub fn new(
        bg: BilevelGraph,
        z: OntoDecomposition,
        ops: Vec<Operator>,
        cfg: SolverConfig,
    ) -> Result<Self> {
        z.validate(bg.base())?;
        let nodes = Nodes::new(bg, ops, cfg)?;
        let m = z.matrix();
        let coupling = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        let columns = (0..m.ncols())
            .map(|j| {
                (0..m.nrows())
                    .filter(|&i| m[(i, j)] != 0.0)
                    .map(|i| (i, m[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(Self {
            nodes,
            z,
            coupling,
            columns,
        })
    }

    pub fn decomposition(&self) -> &OntoDecomposition {
        &self.z
    }

    /// Subgradients from the defining linear relation
    /// `(L + Σ + P) x + σ a = Z w`, evaluated with dense matrices.
    pub fn compute_subgradients(
        &self,
        w: &[DVector<f64>],
        x: &[DVector<f64>],
    ) -> Vec<DVector<f64>> {
        let bg = self.nodes.graph();
        let op = laplacian(bg.base()) + sigma_matrix(bg.base()) + p_matrix(bg);
        let z = self.z.matrix();
        let sigma = self.nodes.config().sigma;
        let dim = self.nodes.dim();
        (0..bg.n_nodes())
            .map(|i| {
                let zw = weighted_sum(dim, (0..z.ncols()).map(|j| (z[(i, j)], &w[j])));
                let mx = weighted_sum(dim, (0..op.ncols()).map(|k| (op[(i, k)], &x[k])));
                (zw - mx) / sigma
            })
            .collect()
    }

    /// `x(w)`: one x-sweep from the given duals (no update of `w`).
    pub fn primal_from(&self, w: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        self.nodes.check_duals(w, self.n_duals())?;
        Ok(self.sweep_from(0, w)?.0)
    }

    /// `Zᵀ x`, one vector per column, accumulated over nodes in order.
    pub fn column_residuals(&self, x: &[DVector<f64>]) -> Vec<DVector<f64>> {
        self.columns
            .iter()
            .map(|col| weighted_sum(self.nodes.dim(), col.iter().map(|&(i, c)| (c, &x[i]))))
            .collect()
    }

    fn sweep_from(&self, k: usize, w: &[DVector<f64>]) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        let dim = self.nodes.dim();
        self.nodes.sweep(k, |i| {
            weighted_sum(dim, self.coupling[i].iter().map(|&(j, c)| (c, &w[j])))
        })
    }
}

impl Iteration for GraphDrs {
    fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    fn n_duals(&self) -> usize {
        self.z.n_duals()
    }

    fn init(&self, w0: Option<Vec<DVector<f64>>>) -> Result<SolverState> {
        let w = w0.unwrap_or_else(|| vec![DVector::zeros(self.nodes.dim()); self.n_duals()]);
        self.nodes.check_duals(&w, self.n_duals())?;
        Ok(self.nodes.initial_state(w))
    }

    fn step(&self, st: &mut SolverState) -> Result<TraceRecord> {
        let k = st.k + 1;
        let (x, a) = self.sweep_from(k, &st.w)?;
        let theta = self.nodes.config().relaxation.theta(st.k);
        let mut residual_sq = 0.0;
        for (wj, rj) in st.w.iter_mut().zip(self.column_residuals(&x)) {
            residual_sq += rj.norm_squared();
            relax(wj, theta, &rj);
        }
        let rec = self.nodes.record(k, residual_sq, &x, &a);
        st.x = x;
        st.a = a;
        st.k = k;
        Ok(rec)
    }
}

// ---------------------------------------------------------------------------

/// The tree-base iteration with one dual `w_(h,i)` per base edge, stored in
/// base-edge order.
#[derive(Clone)]
pub struct TreeDrs {
    nodes: Nodes,
    // node -> (edge index, ±1) in edge order: +1 on outgoing, -1 on incoming
    incident: Vec<Vec<(usize, f64)>>,
}

impl TreeDrs {
    pub fn new(bg: BilevelGraph, ops: Vec<Operator>, cfg: SolverConfig) -> Result<Self> {
        if !bg.base().is_tree() {
            // reuse the incidence constructor for a precise message
            OntoDecomposition::incidence(bg.base())?;
        }
        let n = bg.n_nodes();
        let mut incident = vec![Vec::new(); n];
        for (e, &(h, i)) in bg.base().edges().iter().enumerate() {
            incident[h].push((e, 1.0));
            incident[i].push((e, -1.0));
        }
        let nodes = Nodes::new(bg, ops, cfg)?;
        Ok(Self { nodes, incident })
    }

    /// Incident base edges of node `i` with their incidence signs.
    pub fn incident_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.incident[i]
    }
}

/// Residual of edge `(h, i)`: `x_h - x_i`, so that `w ← w - θ r` is the
/// edge update `w + θ (x_i - x_h)`.
pub fn edge_residual(dim: usize, x_h: &DVector<f64>, x_i: &DVector<f64>) -> DVector<f64> {
    weighted_sum(dim, [(1.0, x_h), (-1.0, x_i)])
}

impl Iteration for TreeDrs {
    fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    fn n_duals(&self) -> usize {
        self.nodes.graph().base().n_edges()
    }

    fn init(&self, w0: Option<Vec<DVector<f64>>>) -> Result<SolverState> {
        let w = w0.unwrap_or_else(|| vec![DVector::zeros(self.nodes.dim()); self.n_duals()]);
        self.nodes.check_duals(&w, self.n_duals())?;
        Ok(self.nodes.initial_state(w))
    }

    fn step(&self, st: &mut SolverState) -> Result<TraceRecord> {
        let k = st.k + 1;
        let dim = self.nodes.dim();
        let w = &st.w;
        let (x, a) = self.nodes.sweep(k, |i| {
            weighted_sum(dim, self.incident[i].iter().map(|&(e, c)| (c, &w[e])))
        })?;
        let theta = self.nodes.config().relaxation.theta(st.k);
        let mut residual_sq = 0.0;
        for (e, &(h, i)) in self.nodes.graph().base().edges().iter().enumerate() {
            let r = edge_residual(dim, &x[h], &x[i]);
            residual_sq += r.norm_squared();
            relax(&mut st.w[e], theta, &r);
        }
        let rec = self.nodes.record(k, residual_sq, &x, &a);
        st.x = x;
        st.a = a;
        st.k = k;
        Ok(rec)
    }
}

// ---------------------------------------------------------------------------

/// The iteration on `w̃ = Z w ∈ H^N`; requires `Σ_i w̃_i = 0`.
#[derive(Clone)]
pub struct WtildeDrs {
    nodes: Nodes,
}

/// Relative tolerance for the zero-sum condition on `w̃`.
pub const ZERO_SUM_TOL: f64 = 1e-9;

impl WtildeDrs {
    pub fn new(bg: BilevelGraph, ops: Vec<Operator>, cfg: SolverConfig) -> Result<Self> {
        Ok(Self {
            nodes: Nodes::new(bg, ops, cfg)?,
        })
    }

    /// Node `i`'s update residual `(L x)_i`, neighbours summed in label order.
    pub fn laplacian_residual(&self, i: usize, x: &[DVector<f64>]) -> DVector<f64> {
        let nbrs = self.nodes.base_neighbors(i);
        let s = weighted_sum(self.nodes.dim(), nbrs.iter().map(|&j| (1.0, &x[j])));
        laplacian_row(self.nodes.base_degree(i), &x[i], &s)
    }
}

impl Iteration for WtildeDrs {
    fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    fn n_duals(&self) -> usize {
        self.nodes.n_nodes()
    }

    fn init(&self, w0: Option<Vec<DVector<f64>>>) -> Result<SolverState> {
        let w = w0.unwrap_or_else(|| vec![DVector::zeros(self.nodes.dim()); self.n_duals()]);
        self.nodes.check_duals(&w, self.n_duals())?;
        let sum = weighted_sum(self.nodes.dim(), w.iter().map(|v| (1.0, v)));
        let scale = w.iter().map(|v| v.amax()).fold(1.0, f64::max);
        if sum.amax() > ZERO_SUM_TOL * scale {
            return Err(Error::InvalidConfig(format!(
                "w̃ must sum to zero, sum has max entry {:e}",
                sum.amax()
            )));
        }
        Ok(self.nodes.initial_state(w))
    }

    fn step(&self, st: &mut SolverState) -> Result<TraceRecord> {
        let k = st.k + 1;
        let w = &st.w;
        let (x, a) = self.nodes.sweep(k, |i| w[i].clone())?;
        let theta = self.nodes.config().relaxation.theta(st.k);
        let n = self.nodes.n_nodes();
        let updates: Vec<_> = (0..n).map(|i| self.laplacian_residual(i, &x)).collect();
        for (wi, r) in st.w.iter_mut().zip(&updates) {
            relax(wi, theta, r);
        }
        // ‖Zᵀx‖² = xᵀ L x = Σ over base edges of ‖x_i - x_j‖²
        let residual_sq = self
            .nodes
            .graph()
            .base()
            .edges()
            .iter()
            .map(|&(i, j)| (&x[i] - &x[j]).norm_squared())
            .sum();
        let rec = self.nodes.record(k, residual_sq, &x, &a);
        st.x = x;
        st.a = a;
        st.k = k;
        Ok(rec)
    }
}

// ---------------------------------------------------------------------------
// Bounds linking residual, variance and subgradients

/// Constants of the inequality chain
/// `(σ²/N²)‖Σa‖² ≤ U²·Var ≤ (U²/(λ₁N))·residual²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConstants {
    pub n: usize,
    pub sigma: f64,
    pub unbalance: f64,
    pub lambda1: f64,
}

impl ChainConstants {
    pub fn new(bg: &BilevelGraph, sigma: f64) -> Result<Self> {
        Ok(Self {
            n: bg.n_nodes(),
            sigma,
            unbalance: unbalance(bg.state()),
            lambda1: algebraic_connectivity(bg.base())?,
        })
    }

    /// The three members of the chain for one trace record.
    pub fn terms(&self, rec: &TraceRecord) -> [f64; 3] {
        let n = self.n as f64;
        let u2 = self.unbalance * self.unbalance;
        [
            self.sigma * self.sigma / (n * n) * rec.subgrad_sum_norm.powi(2),
            u2 * rec.variance,
            u2 / (self.lambda1 * n) * rec.residual_sq,
        ]
    }

    /// Variance bound alone, `Var ≤ residual² / (λ₁ N)`.
    pub fn variance_bound(&self, rec: &TraceRecord) -> f64 {
        rec.residual_sq / (self.lambda1 * self.n as f64)
    }
}

/// `lhs ≤ rhs` up to a relative slack, with an absolute floor for values that
/// are both at rounding level.
pub fn holds_with_slack(lhs: f64, rhs: f64, rel: f64) -> bool {
    const ABS_FLOOR: f64 = 1e-24;
    lhs <= rhs + rel * rhs.abs().max(lhs.abs()) + ABS_FLOOR
}

// ---------------------------------------------------------------------------
// Unreduced lifted iteration, for verification at small scale

/// Kronecker product `m ⊗ I_dim`.
fn kron_identity(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows() * dim, m.ncols() * dim);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                for d in 0..dim {
                    out[(i * dim + d, j * dim + d)] = m[(i, j)];
                }
            }
        }
    }
    out
}

/// Assembled blocks of the lifted system for affine operators.
struct Lifted {
    // M + A_lin, with A x = A_lin x - shift
    system: DMatrix<f64>,
    m: DMatrix<f64>,
    shift: DVector<f64>,
    c: DMatrix<f64>,
}

fn assemble_lifted(drs: &GraphDrs) -> Result<Lifted> {
    let nodes = drs.nodes();
    let bg = nodes.graph();
    let n = bg.n_nodes();
    let dim = nodes.dim();
    let sigma = nodes.config().sigma;
    let z = drs.decomposition().matrix();
    let l = laplacian(bg.base());
    let sp = sigma_matrix(bg.base()) + p_matrix(bg);

    let mut mu = DMatrix::zeros(n, n);
    let mut shift = DVector::zeros((2 * n - 1) * dim);
    for (i, op) in nodes.ops().iter().enumerate() {
        let (m_i, c_i) = op.affine_form().ok_or_else(|| {
            Error::InvalidOperator(format!(
                "lifted iteration needs affine operators, node {} is {}",
                i + 1,
                op.name()
            ))
        })?;
        mu[(i, i)] = sigma * m_i;
        for d in 0..dim {
            shift[i * dim + d] = sigma * m_i * c_i[d];
        }
    }

    let ident = DMatrix::<f64>::identity(n - 1, n - 1);
    let mut m_small = DMatrix::zeros(2 * n - 1, 2 * n - 1);
    m_small.view_mut((0, 0), (n, n)).copy_from(&l);
    m_small.view_mut((0, n), (n, n - 1)).copy_from(z);
    m_small.view_mut((n, 0), (n - 1, n)).copy_from(&z.transpose());
    m_small.view_mut((n, n), (n - 1, n - 1)).copy_from(&ident);

    let mut a_small = DMatrix::zeros(2 * n - 1, 2 * n - 1);
    a_small.view_mut((0, 0), (n, n)).copy_from(&(mu + sp));
    a_small.view_mut((0, n), (n, n - 1)).copy_from(&(-z));
    a_small.view_mut((n, 0), (n - 1, n)).copy_from(&z.transpose());

    let mut c_small = DMatrix::zeros(2 * n - 1, n - 1);
    c_small.view_mut((0, 0), (n, n - 1)).copy_from(z);
    c_small.view_mut((n, 0), (n - 1, n - 1)).copy_from(&ident);

    Ok(Lifted {
        system: kron_identity(&(&m_small + a_small), dim),
        m: kron_identity(&m_small, dim),
        shift,
        c: kron_identity(&c_small, dim),
    })
}

fn solve_lifted(lifted: &Lifted, rhs: DVector<f64>) -> Result<DVector<f64>> {
    lifted
        .system
        .clone()
        .lu()
        .solve(&(rhs + &lifted.shift))
        .ok_or_else(|| Error::InvalidOperator("lifted system is singular".into()))
}

/// One step `u ← u + θ((M + A)⁻¹ M u - u)` of the unreduced iteration on
/// `H^{2N-1}`, with `u` laid out as `N` primal blocks then `N - 1` dual blocks.
pub fn lifted_ppp_step(drs: &GraphDrs, u: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    let lifted = assemble_lifted(drs)?;
    if u.len() != lifted.m.nrows() {
        return Err(Error::Dimension(format!(
            "lifted vector has length {}, expected {}",
            u.len(),
            lifted.m.nrows()
        )));
    }
    let t = solve_lifted(&lifted, &lifted.m * u)?;
    let theta = drs.nodes().config().relaxation.theta(k);
    Ok(u + (t - u) * theta)
}

/// `Cᵀ u` for a lifted vector.
pub fn lifted_reduce(drs: &GraphDrs, u: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(assemble_lifted(drs)?.c.transpose() * u)
}

/// `Cᵀ(M + A)⁻¹ C w`, stacked.
pub fn lifted_reduced_resolvent(drs: &GraphDrs, w: &DVector<f64>) -> Result<DVector<f64>> {
    let lifted = assemble_lifted(drs)?;
    let t = solve_lifted(&lifted, &lifted.c * w)?;
    Ok(lifted.c.transpose() * t)
}

pub fn stack(blocks: &[DVector<f64>]) -> DVector<f64> {
    let dim = blocks.first().map_or(0, |b| b.len());
    DVector::from_iterator(blocks.len() * dim, blocks.iter().flat_map(|b| b.iter().copied()))
}

pub fn unstack(v: &DVector<f64>, dim: usize) -> Vec<DVector<f64>> {
    v.as_slice()
        .chunks_exact(dim)
        .map(DVector::from_row_slice)
        .collect()
}

// ---------------------------------------------------------------------------
// Named instances

/// Complete state graph over a star base rooted at node `N`.
pub fn make_ryu(n: usize) -> Result<(BilevelGraph, OntoDecomposition)> {
    if n < 3 {
        return Err(Error::InvalidGraph(format!("Ryu splitting needs n ≥ 3, got {n}")));
    }
    let bg = BilevelGraph::new(OrderedDigraph::complete(n), OrderedDigraph::star(n))?;
    let z = OntoDecomposition::incidence(bg.base())?;
    Ok((bg, z))
}

/// Path base with the extra state edge `(1, N)`.
pub fn make_malitsky_tam(n: usize) -> Result<(BilevelGraph, OntoDecomposition)> {
    if n < 3 {
        return Err(Error::InvalidGraph(format!(
            "Malitsky–Tam splitting needs n ≥ 3, got {n}"
        )));
    }
    let base = OrderedDigraph::path(n);
    let mut edges = base.edges().to_vec();
    edges.push((0, n - 1));
    let bg = BilevelGraph::new(OrderedDigraph::new(n, &edges)?, base)?;
    let z = OntoDecomposition::incidence(bg.base())?;
    Ok((bg, z))
}

/// Complete graph on three nodes as both state and base, with the
/// closed-form decomposition from [`complete3_reference`].
pub fn make_three_op_complete() -> Result<(BilevelGraph, OntoDecomposition)> {
    let bg = BilevelGraph::uniform(OrderedDigraph::complete(3))?;
    let z = complete3_reference();
    z.validate(bg.base())?;
    Ok((bg, z))
}

/// The two-node instance, which is classical Douglas–Rachford.
pub fn make_classical_drs() -> Result<(BilevelGraph, OntoDecomposition)> {
    let bg = BilevelGraph::uniform(OrderedDigraph::path(2))?;
    let z = OntoDecomposition::incidence(bg.base())?;
    Ok((bg, z))
}

// ---------------------------------------------------------------------------

pub const TRACE_HEADER: &str = "iter,residual_sq,variance,subgrad_sum_norm,objective";

/// Trace as CSV, 17 significant digits, empty field for a missing objective.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let obj = r.objective.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{}",
            r.k, r.residual_sq, r.variance, r.subgrad_sum_norm, obj
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_connected_graphs;
    use crate::operators::{prox_translated_quadratic, ZeroOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn quadratics(centers: &[f64], mus: &[f64]) -> Vec<Operator> {
        centers
            .iter()
            .zip(mus)
            .map(|(&c, &m)| {
                Arc::new(prox_translated_quadratic(DVector::from_element(1, c), m).unwrap())
                    as Operator
            })
            .collect()
    }

    fn vec_quadratics(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Operator> {
        (0..n)
            .map(|_| {
                let c = DVector::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
                Arc::new(prox_translated_quadratic(c, rng.random_range(0.5..2.0)).unwrap())
                    as Operator
            })
            .collect()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, 10).validate().is_err());
        assert!(SolverConfig::new(1.0, 10).with_theta(2.0).validate().is_err());
        assert!(SolverConfig::new(1.0, 10).with_theta(1.9).validate().is_ok());
        let seq = Relaxation::Sequence(vec![0.0, 1.0, 5.0]);
        assert_eq!(seq.theta(0), RELAXATION_EPS);
        assert_eq!(seq.theta(1), 1.0);
        assert_eq!(seq.theta(7), 2.0 - RELAXATION_EPS);
    }

    #[test]
    fn classical_drs_matches_hand_loop() {
        let (bg, z) = make_classical_drs().unwrap();
        let ops = quadratics(&[1.0, -3.0], &[2.0, 0.5]);
        let sigma = 0.7;
        let drs = GraphDrs::new(bg, z, ops.clone(), SolverConfig::new(sigma, 200)).unwrap();
        let mut st = drs.init(Some(vec![DVector::from_element(1, 0.3)])).unwrap();
        let mut w = 0.3f64;
        let j = |op: &Operator, t: f64, v: f64| op.resolve(t, &DVector::from_element(1, v))[0];
        for _ in 0..200 {
            drs.step(&mut st).unwrap();
            let x1 = j(&ops[0], sigma, w);
            let x2 = j(&ops[1], sigma, 2.0 * x1 - w);
            w += x2 - x1;
            assert!((st.x[0][0] - x1).abs() <= 1e-12);
            assert!((st.x[1][0] - x2).abs() <= 1e-12);
            assert!((st.w[0][0] - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_operators_solve_the_linear_row() {
        let bg = BilevelGraph::new(OrderedDigraph::complete(4), OrderedDigraph::path(4)).unwrap();
        let z = OntoDecomposition::incidence(bg.base()).unwrap();
        let ops: Vec<Operator> = (0..4).map(|_| Arc::new(ZeroOperator::new(2)) as Operator).collect();
        let drs = GraphDrs::new(bg.clone(), z.clone(), ops, SolverConfig::new(1.0, 1)).unwrap();
        let w: Vec<_> = (0..3).map(|j| DVector::from_vec(vec![j as f64, 1.0])).collect();
        let x = drs.primal_from(&w).unwrap();
        for i in 0..4 {
            let mut rhs = DVector::zeros(2);
            for h in bg.state().predecessors(i) {
                rhs += &x[h] * 2.0;
            }
            for j in 0..3 {
                rhs += &w[j] * z.matrix()[(i, j)];
            }
            let d = bg.state().degree(i) as f64;
            assert!((&x[i] * d - rhs).amax() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_leaves_duals_unchanged() {
        // w = 0 with every center at 0 gives x = 0, so Zᵀx = 0
        let bg = BilevelGraph::new(OrderedDigraph::complete(3), OrderedDigraph::path(3)).unwrap();
        let z = OntoDecomposition::spectral(bg.base()).unwrap();
        let drs = GraphDrs::new(bg, z, quadratics(&[0.0; 3], &[1.0; 3]), SolverConfig::new(1.0, 1))
            .unwrap();
        let mut st = drs.init(None).unwrap();
        let rec = drs.step(&mut st).unwrap();
        assert_eq!(rec.residual_sq, 0.0);
        assert!(st.w.iter().all(|w| w.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn subgradients_match_linear_relation_and_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bg = BilevelGraph::new(OrderedDigraph::complete(4), OrderedDigraph::star(4)).unwrap();
        let z = OntoDecomposition::spectral(bg.base()).unwrap();
        let ops = vec_quadratics(&mut rng, 4, 3);
        let drs = GraphDrs::new(bg, z, ops.clone(), SolverConfig::new(0.8, 1)).unwrap();
        let mut st = drs.init(None).unwrap();
        for _ in 0..5 {
            let w_old = st.w.clone();
            drs.step(&mut st).unwrap();
            let a = drs.compute_subgradients(&w_old, &st.x);
            for i in 0..4 {
                assert!((&a[i] - &st.a[i]).amax() < 1e-10);
                let (mu, c) = ops[i].affine_form().unwrap();
                assert!((&st.a[i] - (&st.x[i] - c) * mu).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn quadratic_consensus_reaches_mean() {
        let centers = [0.5, -1.0, 2.0, 4.5];
        let target: f64 = centers.iter().sum::<f64>() / 4.0;
        for g in enumerate_connected_graphs(4).unwrap().into_iter().step_by(5) {
            let bg = BilevelGraph::uniform(g).unwrap();
            let z = OntoDecomposition::spectral(bg.base()).unwrap();
            let drs = GraphDrs::new(
                bg,
                z,
                quadratics(&centers, &[1.0; 4]),
                SolverConfig::new(1.0, 5000).with_tol(1e-26),
            )
            .unwrap();
            let (st, _) = run(&drs, RunOptions::default()).unwrap();
            for x in &st.x {
                assert!((x[0] - target).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn run_respects_tol_and_max_iter() {
        let (bg, z) = make_ryu(3).unwrap();
        let drs = GraphDrs::new(
            bg,
            z,
            quadratics(&[1.0, 2.0, 3.0], &[1.0; 3]),
            SolverConfig::new(1.0, 37),
        )
        .unwrap();
        let (st, tr) = run(&drs, RunOptions::default()).unwrap();
        assert_eq!(tr.len(), 37);
        assert_eq!(st.k, 37);
        assert_eq!(tr.last().unwrap().k, 37);

        let drs = GraphDrs::new(
            drs.nodes().graph().clone(),
            drs.decomposition().clone(),
            drs.nodes().ops().to_vec(),
            SolverConfig::new(1.0, 10_000).with_tol(1e-12),
        )
        .unwrap();
        let (_, tr) = run(&drs, RunOptions::default()).unwrap();
        assert!(tr.len() < 10_000);
        assert!(tr.last().unwrap().residual_sq < 1e-12);
        assert!(tr[..tr.len() - 1].iter().all(|r| r.residual_sq >= 1e-12));
    }

    #[test]
    fn non_finite_is_reported_with_iteration() {
        let (bg, z) = make_classical_drs().unwrap();
        let ops = quadratics(&[f64::NAN, 0.0], &[1.0, 1.0]);
        let drs = GraphDrs::new(bg, z, ops, SolverConfig::new(1.0, 5)).unwrap();
        let err = run(&drs, RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { iter: 1 }));
    }

    #[test]
    fn tree_engine_is_bit_identical_to_incidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (bg, z) = make_malitsky_tam(5).unwrap();
        let ops = vec_quadratics(&mut rng, 5, 2);
        let cfg = SolverConfig::new(1.3, 1).with_theta(1.4);
        let general = GraphDrs::new(bg.clone(), z, ops.clone(), cfg.clone()).unwrap();
        let tree = TreeDrs::new(bg, ops, cfg).unwrap();
        let w0: Vec<_> = (0..4).map(|_| DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))).collect();
        let mut a = general.init(Some(w0.clone())).unwrap();
        let mut b = tree.init(Some(w0)).unwrap();
        for _ in 0..100 {
            general.step(&mut a).unwrap();
            tree.step(&mut b).unwrap();
            assert_eq!(a.x, b.x);
            assert_eq!(a.w, b.w);
        }
    }

    #[test]
    fn tree_engine_rejects_cyclic_base() {
        let bg = BilevelGraph::uniform(OrderedDigraph::complete(3)).unwrap();
        let ops: Vec<Operator> = (0..3).map(|_| Arc::new(ZeroOperator::new(1)) as Operator).collect();
        assert!(matches!(
            TreeDrs::new(bg, ops, SolverConfig::default()),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn wtilde_tracks_general_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bg = BilevelGraph::new(OrderedDigraph::complete(4), OrderedDigraph::complete(4)).unwrap();
        let z = OntoDecomposition::spectral(bg.base()).unwrap();
        let ops = vec_quadratics(&mut rng, 4, 2);
        let cfg = SolverConfig::new(0.9, 1);
        let general = GraphDrs::new(bg.clone(), z.clone(), ops.clone(), cfg.clone()).unwrap();
        let wt = WtildeDrs::new(bg, ops, cfg).unwrap();
        let w0: Vec<_> = (0..3).map(|_| DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))).collect();
        let zw = |w: &[DVector<f64>]| -> Vec<DVector<f64>> {
            (0..4)
                .map(|i| weighted_sum(2, (0..3).map(|j| (z.matrix()[(i, j)], &w[j]))))
                .collect()
        };
        let mut a = general.init(Some(w0.clone())).unwrap();
        let mut b = wt.init(Some(zw(&w0))).unwrap();
        for _ in 0..60 {
            let ra = general.step(&mut a).unwrap();
            let rb = wt.step(&mut b).unwrap();
            for i in 0..4 {
                assert!((&a.x[i] - &b.x[i]).amax() < 1e-10);
            }
            for (p, q) in zw(&a.w).iter().zip(&b.w) {
                assert!((p - q).amax() < 1e-10);
            }
            assert!((ra.residual_sq - rb.residual_sq).abs() < 1e-10);
            let sum = weighted_sum(2, b.w.iter().map(|v| (1.0, v)));
            assert!(sum.amax() < 1e-10);
        }
    }

    #[test]
    fn wtilde_rejects_nonzero_sum() {
        let bg = BilevelGraph::uniform(OrderedDigraph::path(2)).unwrap();
        let ops: Vec<Operator> = (0..2).map(|_| Arc::new(ZeroOperator::new(1)) as Operator).collect();
        let wt = WtildeDrs::new(bg, ops, SolverConfig::default()).unwrap();
        assert!(wt.init(Some(vec![DVector::from_element(1, 1.0); 2])).is_err());
        assert!(wt.init(None).is_ok());
    }

    #[test]
    fn lifted_iteration_reduces_to_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let bg = BilevelGraph::new(OrderedDigraph::complete(3), OrderedDigraph::path(3)).unwrap();
        let z = OntoDecomposition::incidence(bg.base()).unwrap();
        let ops = vec_quadratics(&mut rng, 3, 2);
        let drs = GraphDrs::new(bg, z, ops, SolverConfig::new(1.1, 1).with_theta(0.8)).unwrap();
        let w0: Vec<_> = (0..2).map(|_| DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))).collect();
        let mut u = DVector::zeros(5 * 2);
        u.rows_mut(6, 4).copy_from(&stack(&w0));
        let mut st = drs.init(Some(w0)).unwrap();
        for k in 0..30 {
            u = lifted_ppp_step(&drs, &u, k).unwrap();
            drs.step(&mut st).unwrap();
            let reduced = lifted_reduce(&drs, &u).unwrap();
            assert!((reduced - stack(&st.w)).norm() < 1e-9);
        }
        let w = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let image = lifted_reduced_resolvent(&drs, &w).unwrap();
        let x = drs.primal_from(&unstack(&w, 2)).unwrap();
        let expected = &w - stack(&drs.column_residuals(&x));
        assert!((image - expected).norm() < 1e-9);
    }

    #[test]
    fn lifted_rejects_non_affine() {
        let (bg, z) = make_classical_drs().unwrap();
        let ops: Vec<Operator> = (0..2).map(|_| Arc::new(ZeroOperator::new(1)) as Operator).collect();
        let drs = GraphDrs::new(bg, z, ops, SolverConfig::default()).unwrap();
        assert!(lifted_ppp_step(&drs, &DVector::zeros(3), 0).is_err());
    }

    #[test]
    fn named_instances_have_expected_edges() {
        let (bg, _) = make_ryu(4).unwrap();
        assert_eq!(bg.base().edges(), &[(0, 3), (1, 3), (2, 3)]);
        assert_eq!(bg.state().n_edges(), 6);
        let (bg, _) = make_malitsky_tam(4).unwrap();
        assert_eq!(bg.state().edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!(make_ryu(2).is_err());
        assert!(make_malitsky_tam(2).is_err());
        let (bg, z) = make_three_op_complete().unwrap();
        z.validate(bg.base()).unwrap();
    }

    #[test]
    fn slack_check() {
        assert!(holds_with_slack(1.0, 1.0, 0.0));
        assert!(holds_with_slack(1.0 + 1e-10, 1.0, 1e-8));
        assert!(!holds_with_slack(1.1, 1.0, 1e-8));
        assert!(holds_with_slack(1e-30, 0.0, 1e-8));
    }

    #[test]
    fn csv_layout() {
        let tr = vec![TraceRecord {
            k: 1,
            residual_sq: 0.5,
            variance: 0.25,
            subgrad_sum_norm: 0.0,
            objective: None,
        }];
        let csv = trace_csv(&tr);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,5.0000000000000000e-1,"));
        assert!(row.ends_with(','));
        // round trip through the text form is exact
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 0.25);
    }
}
