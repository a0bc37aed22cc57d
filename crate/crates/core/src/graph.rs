//! Ordered directed graphs and bilevel graphs.
//!
//! Nodes are labelled `0..n` internally and every edge `(i, j)` satisfies
//! `i < j`, so the label order is a topological order. External edge-list
//! files use 1-based labels.
//!
//! A [`BilevelGraph`] pairs a connected *state* graph, which fixes the order
//! in which resolvents are evaluated, with a connected *base* subgraph whose
//! Laplacian couples the dual variables.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest node count accepted by [`enumerate_connected_graphs`].
pub const MAX_ENUMERATION_NODES: usize = 6;

/// Directed graph on `0..n` whose edges all point from lower to higher label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedDigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl OrderedDigraph {
    /// Builds a graph from 0-based edges. Edges are sorted; orientation,
    /// range, and duplicates are validated. Connectivity is not required.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut sorted = edges.to_vec();
        for &(i, j) in &sorted {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) out of range for {} nodes",
                    i + 1,
                    j + 1,
                    n
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", i + 1)));
            }
            if i > j {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) violates the topological ordering",
                    i + 1,
                    j + 1
                )));
            }
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0 + 1,
                w[0].1 + 1
            )));
        }
        Ok(Self { n, edges: sorted })
    }

    /// Same as [`OrderedDigraph::new`] with 1-based labels.
    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut zero = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i == 0 || j == 0 {
                return Err(Error::InvalidGraph("labels are 1-based".into()));
            }
            zero.push((i - 1, j - 1));
        }
        Self::new(n, &zero)
    }

    /// Builds the graph and additionally requires a connected undirected support.
    pub fn connected(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let g = Self::new(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self { n, edges }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self { n, edges }
    }

    /// Star with the last node as hub.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, n - 1)).collect();
        Self { n, edges }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let e = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&e).is_ok()
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i, j)).ok()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    /// Neighbours with a smaller label (edge `(h, i)` enters `i`), ascending.
    pub fn predecessors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, b)| b == i)
            .map(|&(a, _)| a)
            .collect()
    }

    /// Neighbours with a larger label (edge `(i, j)` leaves `i`), ascending.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(a, _)| a == i)
            .map(|&(_, b)| b)
            .collect()
    }

    /// All adjacent nodes, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut v = self.predecessors(i);
        v.extend(self.successors(i));
        v
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n);
        for &(i, j) in &self.edges {
            uf.union(i, j);
        }
        uf.components() == 1
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n && self.is_connected()
    }

    pub fn is_subgraph_of(&self, other: &OrderedDigraph) -> bool {
        self.n == other.n && self.edges.iter().all(|&(i, j)| other.has_edge(i, j))
    }

    /// Edges of `self` that are not in `other`.
    pub fn difference(&self, other: &OrderedDigraph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(i, j)| !other.has_edge(i, j))
            .collect()
    }

    /// Compact 1-based rendering such as `1-2 2-3`.
    pub fn edge_string(&self) -> String {
        self.edges
            .iter()
            .map(|&(i, j)| format!("{}-{}", i + 1, j + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for OrderedDigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G(n={}; {})", self.n, self.edge_string())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }

    fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// First edge (in edge order) that closes a cycle, if any.
pub(crate) fn first_cycle_edge(g: &OrderedDigraph) -> Option<(usize, usize)> {
    let mut uf = UnionFind::new(g.n);
    g.edges.iter().copied().find(|&(i, j)| !uf.union(i, j))
}

/// State graph plus connected base subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilevelGraph {
    state: OrderedDigraph,
    base: OrderedDigraph,
}

impl BilevelGraph {
    pub fn new(state: OrderedDigraph, base: OrderedDigraph) -> Result<Self> {
        if state.n_nodes() != base.n_nodes() {
            return Err(Error::InvalidBilevel(format!(
                "state has {} nodes but base has {}",
                state.n_nodes(),
                base.n_nodes()
            )));
        }
        if state.n_nodes() < 2 {
            return Err(Error::InvalidBilevel("at least two nodes are required".into()));
        }
        if !state.is_connected() {
            return Err(Error::InvalidBilevel("state graph is disconnected".into()));
        }
        if !base.is_connected() {
            return Err(Error::InvalidBilevel("base graph is disconnected".into()));
        }
        if let Some(&(i, j)) = base.edges().iter().find(|&&(i, j)| !state.has_edge(i, j)) {
            return Err(Error::InvalidBilevel(format!(
                "base edge ({}, {}) is not a state edge",
                i + 1,
                j + 1
            )));
        }
        Ok(Self { state, base })
    }

    /// Bilevel graph whose base equals its state graph.
    pub fn uniform(g: OrderedDigraph) -> Result<Self> {
        Self::new(g.clone(), g)
    }

    pub fn state(&self) -> &OrderedDigraph {
        &self.state
    }

    pub fn base(&self) -> &OrderedDigraph {
        &self.base
    }

    pub fn n_nodes(&self) -> usize {
        self.state.n_nodes()
    }

    /// State edges that are not base edges, `E \ E'`.
    pub fn extra_edges(&self) -> Vec<(usize, usize)> {
        self.state.difference(&self.base)
    }

    pub fn degrees(&self) -> DegreeProfile {
        DegreeProfile::new(self)
    }

    /// Parses the `STATE` / `BASE` edge-list format (1-based labels).
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            State,
            Base,
        }
        let mut section = Section::None;
        let mut seen_state = false;
        let mut seen_base = false;
        let mut state = Vec::new();
        let mut base = Vec::new();
        let mut max_label = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "STATE" => {
                    section = Section::State;
                    seen_state = true;
                    continue;
                }
                "BASE" => {
                    section = Section::Base;
                    seen_base = true;
                    continue;
                }
                _ => {}
            }
            let edge = parse_edge_line(line, lineno)?;
            max_label = max_label.max(edge.0).max(edge.1);
            match section {
                Section::State => state.push(edge),
                Section::Base => base.push(edge),
                Section::None => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "edge outside of a STATE or BASE section".into(),
                    })
                }
            }
        }
        if !seen_state {
            return Err(Error::Parse {
                line: 0,
                msg: "missing STATE section".into(),
            });
        }
        if !seen_base {
            return Err(Error::Parse {
                line: 0,
                msg: "missing BASE section".into(),
            });
        }
        let state = OrderedDigraph::from_one_based(max_label, &state)?;
        let base = OrderedDigraph::from_one_based(max_label, &base)?;
        Self::new(state, base)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("STATE\n");
        for &(i, j) in self.state.edges() {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out.push_str("BASE\n");
        for &(i, j) in self.base.edges() {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }
}

impl fmt::Display for BilevelGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "biG(n={}; E: {}; E': {})",
            self.n_nodes(),
            self.state.edge_string(),
            self.base.edge_string()
        )
    }
}

fn parse_edge_line(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected `i j`, found `{line}`"),
        });
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("`{s}` is not a node label"),
        })
    };
    let (i, j) = (parse(parts[0])?, parse(parts[1])?);
    if i == 0 || j == 0 {
        return Err(Error::Parse {
            line: lineno,
            msg: "node labels are 1-based".into(),
        });
    }
    Ok((i, j))
}

/// Per-node degrees of a bilevel graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    /// State-graph degree `d_i`.
    pub degree: Vec<usize>,
    /// Base-graph degree `d'_i`.
    pub base_degree: Vec<usize>,
    /// Number of state neighbours with a smaller label.
    pub in_degree: Vec<usize>,
    /// Number of state neighbours with a larger label.
    pub out_degree: Vec<usize>,
}

impl DegreeProfile {
    pub fn new(bg: &BilevelGraph) -> Self {
        let n = bg.n_nodes();
        let mut p = Self {
            degree: vec![0; n],
            base_degree: vec![0; n],
            in_degree: vec![0; n],
            out_degree: vec![0; n],
        };
        for &(i, j) in bg.state().edges() {
            p.degree[i] += 1;
            p.degree[j] += 1;
            p.out_degree[i] += 1;
            p.in_degree[j] += 1;
        }
        for &(i, j) in bg.base().edges() {
            p.base_degree[i] += 1;
            p.base_degree[j] += 1;
        }
        p
    }
}

/// Graph Laplacian `L = D - A` of the undirected support.
pub fn laplacian(g: &OrderedDigraph) -> DMatrix<f64> {
    let n = g.n_nodes();
    let mut l = DMatrix::zeros(n, n);
    for &(i, j) in g.edges() {
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
    }
    l
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix.
pub(crate) fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Relative threshold below which a Laplacian eigenvalue counts as zero.
pub(crate) const KERNEL_THRESHOLD: f64 = 1e-9;

/// Smallest nonzero Laplacian eigenvalue.
pub fn algebraic_connectivity(g: &OrderedDigraph) -> Result<f64> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.n_nodes() == 1 {
        return Err(Error::InvalidGraph(
            "algebraic connectivity needs at least two nodes".into(),
        ));
    }
    let (values, _) = sorted_eigen(&laplacian(g));
    let max = values.last().copied().unwrap_or(0.0);
    let zeros = values
        .iter()
        .filter(|&&v| v.abs() < KERNEL_THRESHOLD * max)
        .count();
    if zeros != 1 {
        return Err(Error::Disconnected);
    }
    Ok(values[1])
}

/// Root-mean-square of `out-degree - in-degree` over the nodes of `g`.
pub fn unbalance(g: &OrderedDigraph) -> f64 {
    let n = g.n_nodes();
    let mut diff = vec![0i64; n];
    for &(i, j) in g.edges() {
        diff[i] += 1;
        diff[j] -= 1;
    }
    let sq: i64 = diff.iter().map(|d| d * d).sum();
    (sq as f64 / n as f64).sqrt()
}

/// Skew-symmetric matrix carrying the base Laplacian below the diagonal and
/// its negation above.
pub fn sigma_matrix(base: &OrderedDigraph) -> DMatrix<f64> {
    let n = base.n_nodes();
    let mut s = DMatrix::zeros(n, n);
    for &(i, j) in base.edges() {
        // lower entry (j, i) is L_ji = -1
        s[(j, i)] = -1.0;
        s[(i, j)] = 1.0;
    }
    s
}

/// Sum over `(i, j) in E \ E'` of the matrices with `+1` at `(i,i)` and
/// `(j,j)` and `-2` at `(j,i)`.
pub fn p_matrix(bg: &BilevelGraph) -> DMatrix<f64> {
    let n = bg.n_nodes();
    let mut p = DMatrix::zeros(n, n);
    for (i, j) in bg.extra_edges() {
        p[(i, i)] += 1.0;
        p[(j, j)] += 1.0;
        p[(j, i)] -= 2.0;
    }
    p
}

/// All connected ordered digraphs on `n` labelled nodes, ordered by edge bitmask.
pub fn enumerate_connected_graphs(n: usize) -> Result<Vec<OrderedDigraph>> {
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::TooManyNodes {
            n,
            max: MAX_ENUMERATION_NODES,
        });
    }
    if n == 0 {
        return Err(Error::InvalidGraph("graph must have at least one node".into()));
    }
    let slots = OrderedDigraph::complete(n).edges;
    Ok(subsets_connected(n, &slots))
}

/// Connected spanning subgraphs of `g` (same node set, subset of edges).
pub fn connected_spanning_subgraphs(g: &OrderedDigraph) -> Vec<OrderedDigraph> {
    subsets_connected(g.n_nodes(), g.edges())
}

fn subsets_connected(n: usize, slots: &[(usize, usize)]) -> Vec<OrderedDigraph> {
    assert!(slots.len() < 32, "too many edge slots to enumerate");
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << slots.len()) {
        let edges: Vec<_> = slots
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, &e)| e)
            .collect();
        let g = OrderedDigraph { n, edges };
        if g.is_connected() {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        let c = rows[0].len();
        DMatrix::from_fn(n, c, |i, j| rows[i][j])
    }

    #[test]
    fn laplacian_examples() {
        let path = OrderedDigraph::from_one_based(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(
            laplacian(&path),
            m(&[&[1., -1., 0.], &[-1., 2., -1.], &[0., -1., 1.]])
        );
        let edge = OrderedDigraph::from_one_based(2, &[(1, 2)]).unwrap();
        assert_eq!(laplacian(&edge), m(&[&[1., -1.], &[-1., 1.]]));
        assert_eq!(
            laplacian(&OrderedDigraph::complete(3)),
            m(&[&[2., -1., -1.], &[-1., 2., -1.], &[-1., -1., 2.]])
        );
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(OrderedDigraph::from_one_based(3, &[(2, 1)]).is_err());
        assert!(OrderedDigraph::from_one_based(3, &[(1, 1)]).is_err());
        assert!(OrderedDigraph::from_one_based(3, &[(1, 2), (1, 2)]).is_err());
        assert!(OrderedDigraph::from_one_based(3, &[(1, 4)]).is_err());
        assert!(matches!(
            OrderedDigraph::connected(3, &[(0, 1)]),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn algebraic_connectivity_examples() {
        let k4 = algebraic_connectivity(&OrderedDigraph::complete(4)).unwrap();
        assert!((k4 - 4.0).abs() < 1e-10 * 4.0);
        let p4 = algebraic_connectivity(&OrderedDigraph::path(4)).unwrap();
        let expected = 2.0 - 2f64.sqrt();
        assert!((p4 - expected).abs() < 1e-10 * expected);
        let s4 = algebraic_connectivity(&OrderedDigraph::star(4)).unwrap();
        assert!((s4 - 1.0).abs() < 1e-10);
        let split = OrderedDigraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            algebraic_connectivity(&split),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn star_spectrum_by_brute_force() {
        // characteristic polynomial of the 4-star Laplacian is x (x-1)^2 (x-4)
        let l = laplacian(&OrderedDigraph::star(4));
        for lambda in [0.0, 1.0, 4.0] {
            let shifted = &l - DMatrix::<f64>::identity(4, 4) * lambda;
            assert!(shifted.determinant().abs() < 1e-9);
        }
        let shifted = &l - DMatrix::<f64>::identity(4, 4) * 2.0;
        assert!(shifted.determinant().abs() > 1e-3);
    }

    #[test]
    fn unbalance_examples() {
        let seq = OrderedDigraph::path(3);
        assert!((unbalance(&seq) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(unbalance(&OrderedDigraph::path(2)), 1.0);
        // 1->2, 1->3, 2->4, 3->4 : node 1 out 2, node 4 in 2, nodes 2,3 balanced
        let g = OrderedDigraph::from_one_based(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        assert!((unbalance(&g) - (8.0f64 / 4.0).sqrt()).abs() < 1e-15);
        // node 1: out 2; node 2: in 1 out 1; node 3: in 2
        let k3 = OrderedDigraph::complete(3);
        assert!((unbalance(&k3) - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unbalance_zero_when_degrees_symmetric() {
        // node 1 of an ordered graph is always a source, so only the
        // single-node graph is balanced everywhere
        let g = OrderedDigraph::from_one_based(1, &[]).unwrap();
        assert_eq!(unbalance(&g), 0.0);
    }

    #[test]
    fn sigma_and_p_examples() {
        let edge = OrderedDigraph::path(2);
        assert_eq!(sigma_matrix(&edge), m(&[&[0., 1.], &[-1., 0.]]));
        let state = OrderedDigraph::from_one_based(3, &[(1, 2), (1, 3), (2, 3)]).unwrap();
        let base = OrderedDigraph::from_one_based(3, &[(1, 2), (2, 3)]).unwrap();
        let bg = BilevelGraph::new(state, base.clone()).unwrap();
        assert_eq!(
            p_matrix(&bg),
            m(&[&[1., 0., 0.], &[0., 0., 0.], &[-2., 0., 1.]])
        );
        let s = sigma_matrix(&base);
        assert_eq!(s[(0, 2)], 0.0);
        assert_eq!(s[(2, 0)], 0.0);
        assert_eq!(&s + s.transpose(), DMatrix::zeros(3, 3));
        let uniform = BilevelGraph::uniform(base).unwrap();
        assert_eq!(p_matrix(&uniform), DMatrix::zeros(3, 3));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_connected_graphs(2).unwrap().len(), 1);
        assert_eq!(enumerate_connected_graphs(3).unwrap().len(), 4);
        assert_eq!(enumerate_connected_graphs(4).unwrap().len(), 38);
        assert!(matches!(
            enumerate_connected_graphs(7),
            Err(Error::TooManyNodes { .. })
        ));
    }

    #[test]
    fn enumeration_matches_independent_brute_force() {
        // count connected graphs on 3 nodes by reachability from node 0
        let slots = [(0usize, 1usize), (0, 2), (1, 2)];
        let mut count = 0;
        for mask in 0..8u32 {
            let mut reach = [true, false, false];
            for _ in 0..3 {
                for (k, &(a, b)) in slots.iter().enumerate() {
                    if mask & (1 << k) != 0 && (reach[a] || reach[b]) {
                        reach[a] = true;
                        reach[b] = true;
                    }
                }
            }
            if reach.iter().all(|&r| r) {
                count += 1;
            }
        }
        assert_eq!(count, enumerate_connected_graphs(3).unwrap().len());
    }

    #[test]
    fn bilevel_validation() {
        let state = OrderedDigraph::path(3);
        let base = OrderedDigraph::from_one_based(3, &[(1, 3), (2, 3)]).unwrap();
        assert!(BilevelGraph::new(state.clone(), base).is_err());
        let disconnected = OrderedDigraph::new(3, &[(0, 1)]).unwrap();
        assert!(BilevelGraph::new(state.clone(), disconnected).is_err());
        assert!(BilevelGraph::new(state, OrderedDigraph::path(4)).is_err());
    }

    #[test]
    fn degree_profile_invariants() {
        let state = OrderedDigraph::complete(4);
        let base = OrderedDigraph::star(4);
        let bg = BilevelGraph::new(state, base).unwrap();
        let d = bg.degrees();
        for i in 0..4 {
            assert_eq!(d.degree[i], d.in_degree[i] + d.out_degree[i]);
            assert!(d.base_degree[i] <= d.degree[i]);
        }
        assert_eq!(d.base_degree, vec![1, 1, 1, 3]);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "# demo\nSTATE\n1 2\n2 3\n1 3\nBASE\n1 2\n2 3\n";
        let bg = BilevelGraph::parse(text).unwrap();
        assert_eq!(bg.state().n_edges(), 3);
        assert_eq!(BilevelGraph::parse(&bg.to_edge_list()).unwrap(), bg);

        let err = BilevelGraph::parse("STATE\n1 2\n").unwrap_err();
        assert!(err.to_string().contains("BASE"));
        let err = BilevelGraph::parse("STATE\n1 x\nBASE\n1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(BilevelGraph::parse("STATE\n2 1\nBASE\n").is_err());
    }

    #[test]
    fn cycle_detection() {
        let tri = OrderedDigraph::complete(3);
        assert_eq!(first_cycle_edge(&tri), Some((1, 2)));
        assert_eq!(first_cycle_edge(&OrderedDigraph::path(4)), None);
    }
}
