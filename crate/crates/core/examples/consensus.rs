//! Quadratic consensus on every connected 4-node graph, checking the
//! residual, variance and subgradient bounds along the way.

use std::sync::Arc;

use nalgebra::DVector;

use graph_drs::factorization::OntoDecomposition;
use graph_drs::graph::{enumerate_connected_graphs, BilevelGraph};
use graph_drs::operators::{prox_translated_quadratic, Operator};
use graph_drs::solver::{holds_with_slack, run, ChainConstants, GraphDrs, RunOptions, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let centers = [[1.0, 0.0], [0.0, 2.0], [-1.0, 1.0], [3.0, -1.0]];
    let ops: Vec<Operator> = centers
        .iter()
        .map(|c| Arc::new(prox_translated_quadratic(DVector::from_row_slice(c), 1.0).unwrap()) as Operator)
        .collect();
    let target = DVector::from_vec(vec![0.75, 0.5]);

    println!("{:<28} {:>6} {:>10} {:>6}", "state = base", "iters", "error", "bounds");
    for g in enumerate_connected_graphs(4)? {
        let bg = BilevelGraph::uniform(g.clone())?;
        let chain = ChainConstants::new(&bg, 1.0)?;
        let z = OntoDecomposition::spectral(bg.base())?;
        let drs = GraphDrs::new(bg, z, ops.clone(), SolverConfig::new(1.0, 5000).with_tol(1e-22))?;
        let (st, trace) = run(&drs, RunOptions::default())?;
        let ok = trace.iter().all(|r| {
            let [a, b, c] = chain.terms(r);
            holds_with_slack(a, b, 1e-8) && holds_with_slack(b, c, 1e-8)
        });
        println!(
            "{:<28} {:>6} {:>10.2e} {:>6}",
            g.edge_string(),
            trace.len(),
            (st.mean() - &target).norm(),
            if ok { "ok" } else { "broken" }
        );
    }
    Ok(())
}
