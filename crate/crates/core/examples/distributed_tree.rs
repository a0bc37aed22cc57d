//! Message passing over a tree base: each agent owns the duals of the base
//! edges where it is the head.

use std::sync::Arc;

use nalgebra::DVector;

use graph_drs::distributed::{
    equivalence_report, expected_messages_per_round, log_csv, message_stats, run_tree_protocol,
};
use graph_drs::operators::{prox_translated_quadratic, Operator};
use graph_drs::solver::{make_malitsky_tam, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (bg, _) = make_malitsky_tam(5)?;
    let ops: Vec<Operator> = (0..5)
        .map(|i| Arc::new(prox_translated_quadratic(DVector::from_element(1, i as f64), 1.0).unwrap()) as Operator)
        .collect();
    let cfg = SolverConfig::new(1.0, 200);
    let outcome = run_tree_protocol(&bg, &ops, &cfg, 200, None)?;
    let stats = message_stats(&outcome.log);
    let report = equivalence_report(&outcome, &bg, &ops, &cfg)?;

    println!("first messages:");
    for line in log_csv(&outcome.log).lines().take(10) {
        println!("  {line}");
    }
    println!("total messages {}, per round {} (|E| + |E'| = {})", stats.total, stats.per_round[&1], expected_messages_per_round(&bg));
    println!("messages per kind {:?}", stats.per_kind);
    for a in &outcome.agents {
        println!("agent {} owns {} duals, x = {:.8}", a.id + 1, a.duals.len(), a.x.as_ref().map_or(f64::NAN, |x| x[0]));
    }
    print!("{}", report.to_csv());
    Ok(())
}
