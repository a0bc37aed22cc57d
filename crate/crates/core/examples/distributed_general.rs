//! Message passing for an arbitrary base graph. Agents track the Laplacian
//! combination of the duals and only ever exchange primal estimates.

use std::sync::Arc;

use nalgebra::DVector;

use graph_drs::distributed::{equivalence_report, message_stats, run_general_protocol};
use graph_drs::graph::{BilevelGraph, OrderedDigraph};
use graph_drs::operators::{prox_translated_quadratic, Operator};
use graph_drs::solver::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a cycle base inside the complete graph on five agents
    let base = OrderedDigraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])?;
    let bg = BilevelGraph::new(OrderedDigraph::complete(5), base)?;
    let ops: Vec<Operator> = (0..5)
        .map(|i| Arc::new(prox_translated_quadratic(DVector::from_vec(vec![i as f64, -(i as f64)]), 1.0).unwrap()) as Operator)
        .collect();
    let cfg = SolverConfig::new(0.8, 300);
    let outcome = run_general_protocol(&bg, &ops, &cfg, 300)?;
    let stats = message_stats(&outcome.log);
    let report = equivalence_report(&outcome, &bg, &ops, &cfg)?;

    println!("messages per round {}, payload bytes {}", stats.per_round[&1], stats.payload_bytes);
    for ((from, to), count) in stats.per_edge.iter().take(6) {
        println!("  {} -> {}: {count}", from + 1, to + 1);
    }
    let last = outcome.history.last().unwrap();
    println!("agent 1 estimate {:?}, solution (2, -2)", last[0].as_slice());
    print!("{}", report.to_csv());
    Ok(())
}
