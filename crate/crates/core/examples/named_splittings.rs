//! Known splittings as bilevel graphs: Ryu, Malitsky-Tam and the complete
//! three-operator graph, all on the same quadratic instance.

use std::sync::Arc;

use nalgebra::DVector;

use graph_drs::graph::{algebraic_connectivity, unbalance};
use graph_drs::operators::{prox_translated_quadratic, Operator};
use graph_drs::solver::{
    make_malitsky_tam, make_ryu, make_three_op_complete, run, GraphDrs, RunOptions, SolverConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let centers = [-1.0, 0.5, 3.0];
    let ops: Vec<Operator> = centers
        .iter()
        .map(|&c| Arc::new(prox_translated_quadratic(DVector::from_element(1, c), 1.0).unwrap()) as Operator)
        .collect();
    let instances = [
        ("Ryu", make_ryu(3)?),
        ("Malitsky-Tam", make_malitsky_tam(3)?),
        ("complete base", make_three_op_complete()?),
    ];
    println!("{:<14} {:>8} {:>6} {:>6} {:>12}", "splitting", "λ₁", "U", "iters", "x̄");
    for (name, (bg, z)) in instances {
        let (l1, u) = (algebraic_connectivity(bg.base())?, unbalance(bg.state()));
        let drs = GraphDrs::new(bg, z, ops.clone(), SolverConfig::new(1.0, 10_000).with_tol(1e-24))?;
        let (st, trace) = run(&drs, RunOptions::default())?;
        println!("{name:<14} {l1:>8.4} {u:>6.3} {:>6} {:>12.9}", trace.len(), st.mean()[0]);
    }
    println!("solution: {:.9}", centers.iter().sum::<f64>() / 3.0);
    Ok(())
}
