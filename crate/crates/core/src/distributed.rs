//! Deterministic message-passing simulation of the two distributed protocols.
//!
//! Agents hold only their own operator, their own duals and values received
//! over reliable FIFO channels. Every send is checked against a protocol table
//! whose entries must follow graph adjacencies, and every receive fails loudly
//! if the expected message is missing. The arithmetic goes through the solver
//! kernels, so iterates match the centralized engines exactly.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::BilevelGraph;
use crate::operators::Operator;
use crate::solver::{
    edge_residual, laplacian_row, node_update, relax, Iteration, SolverConfig, TreeDrs,
    WtildeDrs,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    X,
    W,
    Wtilde,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::X => "x",
            MessageKind::W => "w",
            MessageKind::Wtilde => "wtilde",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub kind: MessageKind,
    pub round: usize,
    pub payload: DVector<f64>,
}

/// One logged send. Round 0 is the initialization exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub round: usize,
    pub from: usize,
    pub to: usize,
    pub kind: MessageKind,
    pub len: usize,
}

/// A permitted `(from, to, kind)` send.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SendRule {
    pub from: usize,
    pub to: usize,
    pub kind: MessageKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Tree,
    General,
}

/// The send list a protocol may use.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTable {
    pub rules: Vec<SendRule>,
}

impl ProtocolTable {
    /// Sends of the tree protocol: `x_i` along state edges `(i, j)` and
    /// `w_(h,i)` back along base edges `(h, i)`.
    pub fn tree(bg: &BilevelGraph) -> Self {
        let mut rules = Vec::new();
        for &(i, j) in bg.state().edges() {
            rules.push(SendRule { from: i, to: j, kind: MessageKind::X });
        }
        for &(h, i) in bg.base().edges() {
            rules.push(SendRule { from: i, to: h, kind: MessageKind::W });
        }
        Self { rules }
    }

    /// Sends of the general protocol: `x_i` along state edges `(i, j)` and
    /// back along base edges `(h, i)`.
    pub fn general(bg: &BilevelGraph) -> Self {
        let mut rules = Vec::new();
        for &(i, j) in bg.state().edges() {
            rules.push(SendRule { from: i, to: j, kind: MessageKind::X });
        }
        for &(h, i) in bg.base().edges() {
            rules.push(SendRule { from: i, to: h, kind: MessageKind::X });
        }
        Self { rules }
    }
}

/// Reliable in-order channels between agents plus the message log.
#[derive(Debug, Clone)]
pub struct NetworkSim {
    n: usize,
    allowed: HashMap<(usize, usize), Vec<MessageKind>>,
    channels: HashMap<(usize, usize), VecDeque<Message>>,
    log: Vec<LogEntry>,
    round: usize,
}

impl NetworkSim {
    /// Rejects any rule that does not follow an adjacency: `x` messages need
    /// a state edge, `w` messages a base edge, in either direction.
    pub fn new(bg: &BilevelGraph, table: &ProtocolTable) -> Result<Self> {
        let n = bg.n_nodes();
        let mut allowed: HashMap<(usize, usize), Vec<MessageKind>> = HashMap::new();
        for r in &table.rules {
            if r.from >= n || r.to >= n {
                return Err(Error::Protocol {
                    agent: r.from + 1,
                    round: 0,
                    detail: format!("rule {} -> {} names an unknown agent", r.from + 1, r.to + 1),
                });
            }
            let adjacent = match r.kind {
                MessageKind::X => bg.state().has_edge(r.from, r.to),
                MessageKind::W | MessageKind::Wtilde => bg.base().has_edge(r.from, r.to),
            };
            if !adjacent {
                return Err(Error::Protocol {
                    agent: r.from + 1,
                    round: 0,
                    detail: format!(
                        "rule sends {} to non-adjacent agent {}",
                        r.kind,
                        r.to + 1
                    ),
                });
            }
            allowed.entry((r.from, r.to)).or_default().push(r.kind);
        }
        Ok(Self {
            n,
            allowed,
            channels: HashMap::new(),
            log: Vec::new(),
            round: 0,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn set_round(&mut self, round: usize) {
        self.round = round;
    }

    pub fn send(
        &mut self,
        from: usize,
        to: usize,
        kind: MessageKind,
        payload: &DVector<f64>,
    ) -> Result<()> {
        let ok = self
            .allowed
            .get(&(from, to))
            .is_some_and(|kinds| kinds.contains(&kind));
        if !ok {
            return Err(Error::Protocol {
                agent: from + 1,
                round: self.round,
                detail: format!("send of {kind} to agent {} is not in the protocol", to + 1),
            });
        }
        self.log.push(LogEntry {
            round: self.round,
            from,
            to,
            kind,
            len: payload.len(),
        });
        self.channels.entry((from, to)).or_default().push_back(Message {
            from,
            to,
            kind,
            round: self.round,
            payload: payload.clone(),
        });
        Ok(())
    }

    /// Pops the oldest message on `from -> to`, which must have the given kind.
    pub fn recv(&mut self, to: usize, from: usize, kind: MessageKind) -> Result<DVector<f64>> {
        let queue = self.channels.get_mut(&(from, to));
        match queue.and_then(|q| q.front().map(|m| m.kind).map(|k| (k, q))) {
            Some((k, q)) if k == kind => Ok(q.pop_front().expect("front exists").payload),
            Some((k, _)) => Err(Error::Protocol {
                agent: to + 1,
                round: self.round,
                detail: format!(
                    "expected {kind} from agent {}, next message is {k}",
                    from + 1
                ),
            }),
            None => Err(Error::Protocol {
                agent: to + 1,
                round: self.round,
                detail: format!("missing {kind} message from agent {}", from + 1),
            }),
        }
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn into_log(self) -> Vec<LogEntry> {
        self.log
    }
}

/// An agent's private state.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: usize,
    /// Owned duals: `(base edge index, other endpoint, value)` for the tree
    /// protocol, a single `(usize::MAX, id, w̃_i)` for the general one.
    pub duals: Vec<(usize, usize, DVector<f64>)>,
    pub x: Option<DVector<f64>>,
}

/// Result of a simulated run.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub protocol: Protocol,
    pub agents: Vec<Agent>,
    /// `x` of every agent after each round.
    pub history: Vec<Vec<DVector<f64>>>,
    pub log: Vec<LogEntry>,
}

struct LocalView {
    op: Operator,
    degree: usize,
    base_degree: usize,
    state_preds: Vec<usize>,
    state_succs: Vec<usize>,
    base_preds: Vec<usize>,
    base_succs: Vec<usize>,
    // (edge index, other endpoint, sign): +1 outgoing, -1 incoming
    incident: Vec<(usize, usize, f64)>,
}

fn local_views(bg: &BilevelGraph, ops: &[Operator]) -> Result<Vec<LocalView>> {
    let n = bg.n_nodes();
    if ops.len() != n {
        return Err(Error::Dimension(format!("{} operators for {} agents", ops.len(), n)));
    }
    let deg = bg.degrees();
    let mut views: Vec<LocalView> = (0..n)
        .map(|i| LocalView {
            op: ops[i].clone(),
            degree: deg.degree[i],
            base_degree: deg.base_degree[i],
            state_preds: bg.state().predecessors(i),
            state_succs: bg.state().successors(i),
            base_preds: bg.base().predecessors(i),
            base_succs: bg.base().successors(i),
            incident: Vec::new(),
        })
        .collect();
    for (e, &(h, i)) in bg.base().edges().iter().enumerate() {
        views[h].incident.push((e, i, 1.0));
        views[i].incident.push((e, h, -1.0));
    }
    Ok(views)
}

fn accumulate(dim: usize, terms: &[(f64, &DVector<f64>)]) -> DVector<f64> {
    crate::solver::weighted_sum(dim, terms.iter().copied())
}

fn check_finite(x: &DVector<f64>, round: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { iter: round })
    }
}

/// Tree-base protocol: agent `i` owns `w_(h,i)` for every base edge `(h, i)`.
pub fn run_tree_protocol(
    bg: &BilevelGraph,
    ops: &[Operator],
    cfg: &SolverConfig,
    rounds: usize,
    w0: Option<Vec<DVector<f64>>>,
) -> Result<SimOutcome> {
    cfg.validate()?;
    if !bg.base().is_tree() {
        crate::factorization::OntoDecomposition::incidence(bg.base())?;
    }
    let views = local_views(bg, ops)?;
    let n = bg.n_nodes();
    let dim = ops[0].dim();
    let edges = bg.base().edges();
    let w0 = w0.unwrap_or_else(|| vec![DVector::zeros(dim); edges.len()]);
    if w0.len() != edges.len() || w0.iter().any(|w| w.len() != dim) {
        return Err(Error::Dimension("initial duals do not match the base edges".into()));
    }
    let mut agents: Vec<Agent> = (0..n)
        .map(|i| Agent {
            id: i,
            duals: views[i]
                .incident
                .iter()
                .filter(|&&(_, _, s)| s < 0.0)
                .map(|&(e, h, _)| (e, h, w0[e].clone()))
                .collect(),
            x: None,
        })
        .collect();

    let mut net = NetworkSim::new(bg, &ProtocolTable::tree(bg))?;
    for agent in &agents {
        for (_, h, w) in &agent.duals {
            net.send(agent.id, *h, MessageKind::W, w)?;
        }
    }

    let mut history = Vec::with_capacity(rounds);
    for k in 1..=rounds {
        net.set_round(k);
        let theta = cfg.relaxation.theta(k - 1);
        for i in 0..n {
            let view = &views[i];
            let mut outgoing_w = HashMap::new();
            for &j in &view.base_succs {
                outgoing_w.insert(j, net.recv(i, j, MessageKind::W)?);
            }
            let mut xs = HashMap::new();
            for &h in &view.state_preds {
                xs.insert(h, net.recv(i, h, MessageKind::X)?);
            }
            let agent = &mut agents[i];
            let pred_terms: Vec<_> = view.state_preds.iter().map(|h| (1.0, &xs[h])).collect();
            let pred_sum = accumulate(dim, &pred_terms);
            let dual_terms: Vec<_> = view
                .incident
                .iter()
                .map(|&(e, other, s)| {
                    let w = if s > 0.0 {
                        &outgoing_w[&other]
                    } else {
                        &agent.duals.iter().find(|d| d.0 == e).expect("owned edge").2
                    };
                    (s, w)
                })
                .collect();
            let dual = accumulate(dim, &dual_terms);
            let (xi, _) = node_update(view.op.as_ref(), cfg.sigma, view.degree, &pred_sum, &dual);
            check_finite(&xi, k)?;
            for (_, h, w) in agent.duals.iter_mut() {
                let r = edge_residual(dim, &xs[h], &xi);
                relax(w, theta, &r);
            }
            for &j in &view.state_succs {
                net.send(i, j, MessageKind::X, &xi)?;
            }
            for (_, h, w) in &agent.duals {
                net.send(i, *h, MessageKind::W, w)?;
            }
            agent.x = Some(xi);
        }
        history.push(agents.iter().map(|a| a.x.clone().expect("computed")).collect());
    }
    Ok(SimOutcome {
        protocol: Protocol::Tree,
        agents,
        history,
        log: net.into_log(),
    })
}

/// General-base protocol with one `w̃_i` per agent, initialized to zero.
pub fn run_general_protocol(
    bg: &BilevelGraph,
    ops: &[Operator],
    cfg: &SolverConfig,
    rounds: usize,
) -> Result<SimOutcome> {
    cfg.validate()?;
    let views = local_views(bg, ops)?;
    let n = bg.n_nodes();
    let dim = ops[0].dim();
    let mut agents: Vec<Agent> = (0..n)
        .map(|i| Agent {
            id: i,
            duals: vec![(usize::MAX, i, DVector::zeros(dim))],
            x: None,
        })
        .collect();
    let mut net = NetworkSim::new(bg, &ProtocolTable::general(bg))?;
    let mut history = Vec::with_capacity(rounds);
    for k in 1..=rounds {
        net.set_round(k);
        let theta = cfg.relaxation.theta(k - 1);
        let mut received: Vec<HashMap<usize, DVector<f64>>> = vec![HashMap::new(); n];
        // phase 1: estimates along the state graph and back along base edges
        for i in 0..n {
            let view = &views[i];
            for &h in &view.state_preds {
                let v = net.recv(i, h, MessageKind::X)?;
                received[i].insert(h, v);
            }
            let pred_terms: Vec<_> =
                view.state_preds.iter().map(|h| (1.0, &received[i][h])).collect();
            let pred_sum = accumulate(dim, &pred_terms);
            let wt = &agents[i].duals[0].2;
            let (xi, _) = node_update(view.op.as_ref(), cfg.sigma, view.degree, &pred_sum, wt);
            check_finite(&xi, k)?;
            for &j in &view.state_succs {
                net.send(i, j, MessageKind::X, &xi)?;
            }
            for &h in &view.base_preds {
                net.send(i, h, MessageKind::X, &xi)?;
            }
            agents[i].x = Some(xi);
        }
        // phase 2: estimates of base successors, then the dual update
        for i in 0..n {
            let view = &views[i];
            for &j in &view.base_succs {
                let v = net.recv(i, j, MessageKind::X)?;
                received[i].insert(j, v);
            }
            let mut nbrs: Vec<usize> = view.base_preds.iter().chain(&view.base_succs).copied().collect();
            nbrs.sort_unstable();
            let terms: Vec<_> = nbrs.iter().map(|j| (1.0, &received[i][j])).collect();
            let nbr_sum = accumulate(dim, &terms);
            let agent = &mut agents[i];
            let r = laplacian_row(view.base_degree, agent.x.as_ref().expect("phase 1"), &nbr_sum);
            relax(&mut agent.duals[0].2, theta, &r);
        }
        history.push(agents.iter().map(|a| a.x.clone().expect("computed")).collect());
    }
    Ok(SimOutcome {
        protocol: Protocol::General,
        agents,
        history,
        log: net.into_log(),
    })
}

/// Aggregate message counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageStats {
    pub total: usize,
    pub per_round: BTreeMap<usize, usize>,
    pub per_edge: BTreeMap<(usize, usize), usize>,
    pub per_kind: BTreeMap<MessageKind, usize>,
    pub payload_bytes: usize,
}

pub fn message_stats(log: &[LogEntry]) -> MessageStats {
    let mut s = MessageStats::default();
    for e in log {
        s.total += 1;
        *s.per_round.entry(e.round).or_default() += 1;
        *s.per_edge.entry((e.from, e.to)).or_default() += 1;
        *s.per_kind.entry(e.kind).or_default() += 1;
        s.payload_bytes += e.len * std::mem::size_of::<f64>();
    }
    s
}

/// Messages per iteration round predicted from the send lists; the same for
/// both protocols.
pub fn expected_messages_per_round(bg: &BilevelGraph) -> usize {
    bg.state().n_edges() + bg.base().n_edges()
}

pub const LOG_HEADER: &str = "round,from,to,kind";

/// Log as CSV with 1-based agent labels.
pub fn log_csv(log: &[LogEntry]) -> String {
    let mut out = String::with_capacity(24 * (log.len() + 1));
    out.push_str(LOG_HEADER);
    out.push('\n');
    for e in log {
        let _ = writeln!(out, "{},{},{},{}", e.round, e.from + 1, e.to + 1, e.kind);
    }
    out
}

/// Largest entrywise gap between simulated and centralized `x` histories.
pub fn max_deviation(a: &[Vec<DVector<f64>>], b: &[Vec<DVector<f64>>]) -> f64 {
    assert_eq!(a.len(), b.len(), "histories differ in length");
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb))
        .map(|(p, q)| (p - q).amax())
        .fold(0.0, f64::max)
}

/// Centralized `x` history of the engine matching `protocol`.
pub fn centralized_history(
    protocol: Protocol,
    bg: &BilevelGraph,
    ops: &[Operator],
    cfg: &SolverConfig,
    rounds: usize,
) -> Result<Vec<Vec<DVector<f64>>>> {
    let mut cfg = cfg.clone();
    cfg.max_iter = rounds;
    cfg.tol = 0.0;
    fn collect<I: Iteration>(engine: &I, rounds: usize) -> Result<Vec<Vec<DVector<f64>>>> {
        let mut st = engine.init(None)?;
        let mut out = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            engine.step(&mut st)?;
            out.push(st.x.clone());
        }
        Ok(out)
    }
    match protocol {
        Protocol::Tree => collect(&TreeDrs::new(bg.clone(), ops.to_vec(), cfg)?, rounds),
        Protocol::General => collect(&WtildeDrs::new(bg.clone(), ops.to_vec(), cfg)?, rounds),
    }
}

/// Summary comparing a simulation with its centralized counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub protocol: Protocol,
    pub rounds: usize,
    pub max_deviation: f64,
    pub messages: usize,
    pub messages_per_round: usize,
    pub init_messages: usize,
    pub final_variance: f64,
}

pub fn equivalence_report(
    outcome: &SimOutcome,
    bg: &BilevelGraph,
    ops: &[Operator],
    cfg: &SolverConfig,
) -> Result<EquivalenceReport> {
    let rounds = outcome.history.len();
    let central = centralized_history(outcome.protocol, bg, ops, cfg, rounds)?;
    let stats = message_stats(&outcome.log);
    let last = outcome.history.last().cloned().unwrap_or_default();
    Ok(EquivalenceReport {
        protocol: outcome.protocol,
        rounds,
        max_deviation: max_deviation(&outcome.history, &central),
        messages: stats.total,
        messages_per_round: stats.per_round.get(&1).copied().unwrap_or(0),
        init_messages: stats.per_round.get(&0).copied().unwrap_or(0),
        final_variance: if last.is_empty() { 0.0 } else { crate::solver::variance(&last) },
    })
}

impl EquivalenceReport {
    pub fn to_csv(&self) -> String {
        format!(
            "protocol,rounds,max_deviation,messages,messages_per_round,init_messages,final_variance\n{},{},{:.16e},{},{},{},{:.16e}\n",
            match self.protocol {
                Protocol::Tree => "tree",
                Protocol::General => "general",
            },
            self.rounds,
            self.max_deviation,
            self.messages,
            self.messages_per_round,
            self.init_messages,
            self.final_variance
        )
    }
}
