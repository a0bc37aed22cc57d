//! Benchmark instances: congested transport on a grid with a lake and a
//! bridge, a kernel SVM split across officials and agents, and quadratic
//! consensus for testing.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::graph::{BilevelGraph, OrderedDigraph};
use crate::linalg::sparse_mul;
use crate::operators::{
    prox_group_l1, prox_hinge_affine, prox_power_three_halves, prox_translated_quadratic,
    project_capacity, AffineProjection, Operator, QuadraticProx, SpectralFactor,
};

// ---------------------------------------------------------------------------
// Config files

/// Parsed `key = value` lines. `#` starts a comment; keys may repeat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: Vec<(usize, String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected `key = value`, found `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "empty key".into(),
                });
            }
            entries.push((idx + 1, k.to_ascii_lowercase(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        Self {
            entries: pairs
                .iter()
                .enumerate()
                .map(|(i, (k, v))| (i + 1, k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Appends `key = value`, shadowing earlier values of `key`.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.push((0, key.to_ascii_lowercase(), value.to_string()));
    }

    fn last(&self, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .rev()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.entries
            .iter()
            .filter(move |(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.last(key).map(|(_, v)| v)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.last(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse `{v}` for `{key}`"),
            }),
        }
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Keys not in `known`, reported as an error on the first offending line.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(_, k, _)| !known.contains(&k.as_str())) {
            Some((line, k, _)) => Err(Error::Parse {
                line: *line,
                msg: format!("unknown key `{k}`"),
            }),
            None => Ok(()),
        }
    }
}

fn parse_floats(line: usize, s: &str, sep: char) -> Result<Vec<f64>> {
    s.split(sep)
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse number `{t}`"),
            })
        })
        .collect()
}

fn parse_point(line: usize, s: &str) -> Result<(f64, f64)> {
    match parse_floats(line, s, ',')?.as_slice() {
        [r, c] => Ok((*r, *c)),
        _ => Err(Error::Parse {
            line,
            msg: format!("expected `row, col`, found `{s}`"),
        }),
    }
}

fn parse_range(line: usize, s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once("..").ok_or_else(|| Error::Parse {
        line,
        msg: format!("expected a range `a..b`, found `{s}`"),
    })?;
    let parse = |t: &str| {
        t.trim().parse::<usize>().map_err(|_| Error::Parse {
            line,
            msg: format!("cannot parse range bound `{t}`"),
        })
    };
    Ok((parse(a)?, parse(b)?))
}

// ---------------------------------------------------------------------------
// Congested transport

/// Half-open rectangle of grid cells, `rows.0 ≤ r < rows.1`, same for columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl Rect {
    pub fn new(rows: (usize, usize), cols: (usize, usize)) -> Self {
        Self { rows, cols }
    }

    fn parse(line: usize, s: &str) -> Result<Self> {
        let (r, c) = s.split_once(',').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `r0..r1, c0..c1`, found `{s}`"),
        })?;
        Ok(Self::new(parse_range(line, r)?, parse_range(line, c)?))
    }

    fn cells(&self, p: usize) -> Result<Vec<usize>> {
        if self.rows.0 > self.rows.1 || self.cols.0 > self.cols.1 || self.rows.1 > p || self.cols.1 > p
        {
            return Err(Error::Problem(format!(
                "rectangle {}..{}, {}..{} does not fit a {p}x{p} grid",
                self.rows.0, self.rows.1, self.cols.0, self.cols.1
            )));
        }
        Ok((self.rows.0..self.rows.1)
            .flat_map(|r| (self.cols.0..self.cols.1).map(move |c| r * p + c))
            .collect())
    }
}

/// Geometry and densities of a transport instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSpec {
    pub p: usize,
    /// Gaussian blob centers in grid coordinates `(row, col)`.
    pub mu_center: (f64, f64),
    pub nu_center: (f64, f64),
    pub blob_width: f64,
    pub water: Vec<Rect>,
    pub bridge: Vec<Rect>,
    pub cap: f64,
}

impl TransportSpec {
    /// A lake across rows `[0.43p, 0.57p)` from the left edge to `0.8p`,
    /// crossed by a bridge at columns `[0.23p, 0.31p)`; source above, sink
    /// below. Mass can cross on the bridge or go around the lake's east end.
    pub fn default_for(p: usize) -> Self {
        let f = |x: f64| ((x * p as f64).round() as usize).min(p);
        let lake_rows = (f(0.43), f(0.57));
        let bridge_cols = (f(0.23), f(0.31));
        let lake_end = f(0.8);
        Self {
            p,
            mu_center: (0.17 * p as f64, 0.23 * p as f64),
            nu_center: (0.8 * p as f64, 0.23 * p as f64),
            blob_width: 0.08 * p as f64,
            water: vec![
                Rect::new(lake_rows, (0, bridge_cols.0)),
                Rect::new(lake_rows, (bridge_cols.1, lake_end)),
            ],
            bridge: vec![Rect::new(lake_rows, bridge_cols)],
            cap: 5e-2,
        }
    }

    pub const KEYS: &'static [&'static str] = &[
        "problem", "p", "mu_center", "nu_center", "blob_width", "water", "bridge", "cap",
    ];

    pub fn from_config(cfg: &Config) -> Result<Self> {
        cfg.reject_unknown(Self::KEYS)?;
        let p = cfg.get_or("p", 35usize)?;
        let mut spec = Self::default_for(p);
        if let Some((line, v)) = cfg.last("mu_center") {
            spec.mu_center = parse_point(line, v)?;
        }
        if let Some((line, v)) = cfg.last("nu_center") {
            spec.nu_center = parse_point(line, v)?;
        }
        spec.blob_width = cfg.get_or("blob_width", spec.blob_width)?;
        spec.cap = cfg.get_or("cap", spec.cap)?;
        let water: Vec<Rect> = cfg
            .all("water")
            .map(|(l, v)| if v == "none" { Ok(None) } else { Rect::parse(l, v).map(Some) })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let bridge: Vec<Rect> = cfg
            .all("bridge")
            .map(|(l, v)| if v == "none" { Ok(None) } else { Rect::parse(l, v).map(Some) })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        if cfg.last("water").is_some() {
            spec.water = water;
        }
        if cfg.last("bridge").is_some() {
            spec.bridge = bridge;
        }
        Ok(spec)
    }
}

/// A discretized transport problem: minimize `Σ‖σ_i‖^{3/2} + Σ‖σ_i‖` subject
/// to `Λσ = ν - μ`, zero flow on water and `‖σ_i‖ ≤ cap` on the bridge.
///
/// Flows are interleaved per cell: `σ[2c]` is the flux from cell `c` to its
/// east neighbour and `σ[2c + 1]` to its south neighbour.
#[derive(Debug, Clone)]
pub struct TransportInstance {
    pub p: usize,
    pub lambda: CsMat<f64>,
    pub mu: DVector<f64>,
    pub nu: DVector<f64>,
    /// `ν - μ` with its mean removed.
    pub rhs: DVector<f64>,
    pub bridge: Vec<usize>,
    pub water: Vec<usize>,
    pub cap: f64,
}

/// Divergence `outflow - inflow` on a `p x p` grid with no flux through the
/// boundary: faces that would leave the grid get an empty column.
pub fn divergence_operator(p: usize) -> CsMat<f64> {
    let n = p * p;
    let mut tri = TriMat::new((n, 2 * n));
    for r in 0..p {
        for c in 0..p {
            let cell = r * p + c;
            if c + 1 < p {
                tri.add_triplet(cell, 2 * cell, 1.0);
                tri.add_triplet(cell + 1, 2 * cell, -1.0);
            }
            if r + 1 < p {
                tri.add_triplet(cell, 2 * cell + 1, 1.0);
                tri.add_triplet(cell + p, 2 * cell + 1, -1.0);
            }
        }
    }
    tri.to_csr()
}

fn blob(p: usize, center: (f64, f64), width: f64, water: &[bool]) -> Result<DVector<f64>> {
    let mut d = DVector::from_fn(p * p, |cell, _| {
        if water[cell] {
            return 0.0;
        }
        let (r, c) = ((cell / p) as f64, (cell % p) as f64);
        let q = ((r - center.0).powi(2) + (c - center.1).powi(2)) / (2.0 * width * width);
        (-q).exp()
    });
    let total = d.sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Problem("density has no mass off the water".into()));
    }
    d /= total;
    Ok(d)
}

pub fn build_transport(spec: &TransportSpec) -> Result<(TransportInstance, Vec<Operator>)> {
    let p = spec.p;
    if p < 2 {
        return Err(Error::Problem(format!("grid size must be at least 2, got {p}")));
    }
    if !(spec.cap > 0.0) {
        return Err(Error::Problem(format!("capacity must be positive, got {}", spec.cap)));
    }
    if !(spec.blob_width > 0.0) {
        return Err(Error::Problem("blob width must be positive".into()));
    }
    let n = p * p;
    let mut water = Vec::new();
    for r in &spec.water {
        water.extend(r.cells(p)?);
    }
    let mut bridge = Vec::new();
    for r in &spec.bridge {
        bridge.extend(r.cells(p)?);
    }
    water.sort_unstable();
    water.dedup();
    bridge.sort_unstable();
    bridge.dedup();
    if let Some(c) = bridge.iter().find(|c| water.binary_search(c).is_ok()) {
        return Err(Error::Problem(format!(
            "cell ({}, {}) is both bridge and water",
            c / p,
            c % p
        )));
    }
    let mut is_water = vec![false; n];
    for &c in &water {
        is_water[c] = true;
    }
    let mu = blob(p, spec.mu_center, spec.blob_width, &is_water)?;
    let nu = blob(p, spec.nu_center, spec.blob_width, &is_water)?;
    let mut rhs = &nu - &mu;
    let mean = rhs.mean();
    rhs.add_scalar_mut(-mean);

    let lambda = divergence_operator(p);
    let inst = TransportInstance {
        p,
        lambda: lambda.clone(),
        mu,
        nu,
        rhs: rhs.clone(),
        bridge: bridge.clone(),
        water: water.clone(),
        cap: spec.cap,
    };
    let ops: Vec<Operator> = vec![
        Arc::new(AffineProjection::new(lambda, rhs)?),
        Arc::new(prox_power_three_halves(2 * n)?),
        Arc::new(prox_group_l1(2 * n)?),
        Arc::new(project_capacity(2 * n, &bridge, &water, spec.cap)?),
    ];
    Ok((inst, ops))
}

/// Objective value and constraint violations of a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportObjective {
    /// `Σ‖σ_i‖^{3/2} + Σ‖σ_i‖`.
    pub value: f64,
    /// `‖Λσ - b‖`.
    pub divergence_residual: f64,
    /// Largest block norm on water cells.
    pub water_violation: f64,
    /// Largest excess of a bridge block norm over the capacity.
    pub bridge_violation: f64,
}

impl TransportObjective {
    pub fn feasible(&self, tol: f64) -> bool {
        self.divergence_residual <= tol && self.water_violation <= tol && self.bridge_violation <= tol
    }
}

pub fn objective_transport(inst: &TransportInstance, flow: &DVector<f64>) -> Result<TransportObjective> {
    let n = inst.p * inst.p;
    if flow.len() != 2 * n {
        return Err(Error::Dimension(format!(
            "flow has length {}, expected {}",
            flow.len(),
            2 * n
        )));
    }
    let norm = |c: usize| flow[2 * c].hypot(flow[2 * c + 1]);
    let value = (0..n).map(|c| {
        let m = norm(c);
        m.powf(1.5) + m
    });
    Ok(TransportObjective {
        value: value.sum(),
        divergence_residual: (sparse_mul(&inst.lambda, flow) - &inst.rhs).norm(),
        water_violation: inst.water.iter().map(|&c| norm(c)).fold(0.0, f64::max),
        bridge_violation: inst
            .bridge
            .iter()
            .map(|&c| (norm(c) - inst.cap).max(0.0))
            .fold(0.0, f64::max),
    })
}

pub const FLOW_HEADER: &str = "i,j,sx,sy,magnitude";

/// Flow field as CSV, one row per cell with 1-based row `i` and column `j`.
pub fn flow_csv(p: usize, flow: &DVector<f64>) -> String {
    let mut out = String::with_capacity(48 * p * p);
    out.push_str(FLOW_HEADER);
    out.push('\n');
    for r in 0..p {
        for c in 0..p {
            let cell = r * p + c;
            let (sx, sy) = (flow[2 * cell], flow[2 * cell + 1]);
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e}",
                r + 1,
                c + 1,
                sx,
                sy,
                sx.hypot(sy)
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Distributed kernel SVM

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSpec {
    pub n: usize,
    pub officials: usize,
    pub per_official: usize,
    pub gamma: f64,
    pub kernel_width: f64,
    /// Standard deviation of each cluster around `(±1, ±1)`.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SvmSpec {
    fn default() -> Self {
        Self {
            n: 50,
            officials: 5,
            per_official: 10,
            gamma: 0.1,
            kernel_width: 1.0,
            spread: 0.7,
            seed: 0,
        }
    }
}

impl SvmSpec {
    pub const KEYS: &'static [&'static str] = &[
        "problem", "n", "officials", "per_official", "gamma", "kernel_width", "spread", "seed",
    ];

    pub fn from_config(cfg: &Config) -> Result<Self> {
        cfg.reject_unknown(Self::KEYS)?;
        let d = Self::default();
        Ok(Self {
            n: cfg.get_or("n", d.n)?,
            officials: cfg.get_or("officials", d.officials)?,
            per_official: cfg.get_or("per_official", d.per_official)?,
            gamma: cfg.get_or("gamma", d.gamma)?,
            kernel_width: cfg.get_or("kernel_width", d.kernel_width)?,
            spread: cfg.get_or("spread", d.spread)?,
            seed: cfg.get_or("seed", d.seed)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SvmInstance {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<f64>,
    pub kernel: DMatrix<f64>,
    pub gamma: f64,
    pub officials: usize,
    pub per_official: usize,
    /// Official weights `d_c / Σ d_c`.
    pub weights: Vec<f64>,
}

impl SvmInstance {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Graph node of official `c` (0-based).
    pub fn official_node(&self, c: usize) -> usize {
        c * (self.per_official + 1)
    }

    /// Graph node of agent `i` under official `c`, which holds data point `c·p + i`.
    pub fn agent_node(&self, c: usize, i: usize) -> usize {
        c * (self.per_official + 1) + 1 + i
    }
}

pub fn gaussian_kernel(points: &[[f64; 2]], width: f64) -> DMatrix<f64> {
    let n = points.len();
    DMatrix::from_fn(n, n, |i, j| {
        let d2 = (points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2);
        (-d2 / (2.0 * width * width)).exp()
    })
}

/// Officials on a ring, each with a star of agents; the base drops the
/// closing edge `(1, C)` and is a tree.
pub fn svm_graph(officials: usize, per_official: usize) -> Result<BilevelGraph> {
    if officials < 2 {
        return Err(Error::Problem("need at least two officials".into()));
    }
    let block = per_official + 1;
    let n = officials * block;
    let mut edges = Vec::new();
    for c in 0..officials {
        for i in 0..per_official {
            edges.push((c * block, c * block + 1 + i));
        }
        if c + 1 < officials {
            edges.push((c * block, (c + 1) * block));
        }
    }
    let closing = (0, (officials - 1) * block);
    let base = OrderedDigraph::new(n, &edges)?;
    if !edges.contains(&closing) {
        edges.push(closing);
    }
    BilevelGraph::new(OrderedDigraph::new(n, &edges)?, base)
}

pub fn build_svm(spec: &SvmSpec) -> Result<(SvmInstance, Vec<Operator>, BilevelGraph)> {
    if spec.n != spec.officials * spec.per_official {
        return Err(Error::Problem(format!(
            "n = {} must equal officials x per_official = {} x {}",
            spec.n, spec.officials, spec.per_official
        )));
    }
    if spec.per_official == 0 {
        return Err(Error::Problem("each official needs at least one agent".into()));
    }
    if !(spec.gamma > 0.0 && spec.kernel_width > 0.0 && spec.spread >= 0.0) {
        return Err(Error::Problem("gamma and kernel width must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.spread.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Problem(e.to_string()))?;
    let mut points = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        points.push([y + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
        labels.push(y);
    }
    let kernel = gaussian_kernel(&points, spec.kernel_width);
    let bg = svm_graph(spec.officials, spec.per_official)?;
    let block = spec.per_official + 1;
    let degrees: Vec<usize> = (0..spec.officials).map(|c| bg.state().degree(c * block)).collect();
    let total: usize = degrees.iter().sum();
    let weights: Vec<f64> = degrees.iter().map(|&d| d as f64 / total as f64).collect();

    let factor = Arc::new(SpectralFactor::new(&kernel)?);
    let mut ops: Vec<Operator> = Vec::with_capacity(bg.n_nodes());
    for c in 0..spec.officials {
        ops.push(Arc::new(QuadraticProx::shared(factor.clone(), spec.gamma * weights[c])?));
        for i in 0..spec.per_official {
            let xi = c * spec.per_official + i;
            let s = kernel.row(xi).transpose() * labels[xi];
            ops.push(Arc::new(prox_hinge_affine(s, 1.0)?));
        }
    }
    let inst = SvmInstance {
        points,
        labels,
        kernel,
        gamma: spec.gamma,
        officials: spec.officials,
        per_official: spec.per_official,
        weights,
    };
    Ok((inst, ops, bg))
}

/// `Σ max{1 - y_i (k_i·α), 0} + γ αᵀKα`.
pub fn objective_svm(inst: &SvmInstance, alpha: &DVector<f64>) -> Result<f64> {
    let n = inst.n();
    if alpha.len() != n {
        return Err(Error::Dimension(format!(
            "α has length {}, expected {n}",
            alpha.len()
        )));
    }
    let ka = &inst.kernel * alpha;
    let hinge: f64 = (0..n).map(|i| (1.0 - inst.labels[i] * ka[i]).max(0.0)).sum();
    Ok(hinge + inst.gamma * alpha.dot(&ka))
}

/// The term attached to graph node `node` in the split objective.
pub fn svm_node_objective(inst: &SvmInstance, node: usize, alpha: &DVector<f64>) -> f64 {
    let block = inst.per_official + 1;
    let (c, off) = (node / block, node % block);
    if off == 0 {
        inst.gamma * inst.weights[c] * alpha.dot(&(&inst.kernel * alpha))
    } else {
        let xi = c * inst.per_official + off - 1;
        let k = inst.kernel.row(xi).transpose();
        (1.0 - inst.labels[xi] * k.dot(alpha)).max(0.0)
    }
}

// ---------------------------------------------------------------------------
// Quadratic consensus

/// `A_i x = μ_i (x - c_i)`; the solution is the `μ`-weighted mean of the centers.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    pub centers: Vec<DVector<f64>>,
    pub mu: Vec<f64>,
}

impl QuadraticSpec {
    pub const KEYS: &'static [&'static str] = &["problem", "centers", "mu", "seed", "dim"];

    /// `centers` lists one vector per node, `;`-separated with `,` between
    /// coordinates; without it, centers are drawn from `seed` for the given
    /// node count and `dim`.
    pub fn from_config(cfg: &Config, n_nodes: usize) -> Result<Self> {
        cfg.reject_unknown(Self::KEYS)?;
        let centers: Vec<DVector<f64>> = match cfg.last("centers") {
            Some((line, v)) => {
                let rows: Vec<Vec<f64>> = v
                    .split(';')
                    .map(|s| parse_floats(line, s, ','))
                    .collect::<Result<_>>()?;
                let dim = rows.first().map_or(0, Vec::len);
                if dim == 0 || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Parse {
                        line,
                        msg: "centers must all have the same nonzero length".into(),
                    });
                }
                rows.into_iter().map(DVector::from_vec).collect()
            }
            None => {
                let seed = cfg.get_or("seed", 0u64)?;
                let dim = cfg.get_or("dim", 1usize)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n_nodes)
                    .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)))
                    .collect()
            }
        };
        let mu = match cfg.last("mu") {
            Some((line, v)) => {
                let m = parse_floats(line, v, ',')?;
                match m.len() {
                    1 => vec![m[0]; centers.len()],
                    k if k == centers.len() => m,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("expected 1 or {} values for mu", centers.len()),
                        })
                    }
                }
            }
            None => vec![1.0; centers.len()],
        };
        Ok(Self { centers, mu })
    }

    pub fn operators(&self) -> Result<Vec<Operator>> {
        self.centers
            .iter()
            .zip(&self.mu)
            .map(|(c, &m)| Ok(Arc::new(prox_translated_quadratic(c.clone(), m)?) as Operator))
            .collect()
    }

    pub fn solution(&self) -> DVector<f64> {
        let total: f64 = self.mu.iter().sum();
        let dim = self.centers[0].len();
        self.centers
            .iter()
            .zip(&self.mu)
            .fold(DVector::zeros(dim), |acc, (c, &m)| acc + c * m)
            / total
    }

    /// `Σ μ_i ‖x - c_i‖² / 2`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.centers
            .iter()
            .zip(&self.mu)
            .map(|(c, &m)| 0.5 * m * (x - c).norm_squared())
            .sum()
    }
}
