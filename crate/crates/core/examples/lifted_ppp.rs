//! The unreduced preconditioned proximal point iteration on H^{2N-1} and its
//! reduction to the N - 1 dual variables.

use std::sync::Arc;

use nalgebra::DVector;

use graph_drs::factorization::OntoDecomposition;
use graph_drs::graph::{BilevelGraph, OrderedDigraph};
use graph_drs::operators::{prox_translated_quadratic, Operator};
use graph_drs::solver::{lifted_ppp_step, lifted_reduce, stack, GraphDrs, Iteration, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4;
    let bg = BilevelGraph::new(OrderedDigraph::complete(n), OrderedDigraph::path(n))?;
    let z = OntoDecomposition::spectral(bg.base())?;
    let ops: Vec<Operator> = (0..n)
        .map(|i| Arc::new(prox_translated_quadratic(DVector::from_element(2, i as f64), 0.5 + i as f64).unwrap()) as Operator)
        .collect();
    let drs = GraphDrs::new(bg, z, ops, SolverConfig::new(1.5, 30).with_theta(1.2))?;

    let mut u = DVector::zeros((2 * n - 1) * 2);
    let mut st = drs.init(None)?;
    println!("{:>4} {:>14} {:>14}", "k", "‖Cᵀu - w‖", "‖w‖");
    for k in 0..30 {
        u = lifted_ppp_step(&drs, &u, k)?;
        drs.step(&mut st)?;
        let w = stack(&st.w);
        if k % 5 == 4 {
            println!("{:>4} {:>14.3e} {:>14.6}", k + 1, (lifted_reduce(&drs, &u)? - &w).norm(), w.norm());
        }
    }
    Ok(())
}
