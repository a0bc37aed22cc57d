//! Plugging in a user-defined resolvent: projection onto a box, combined with
//! two quadratics.

use std::sync::Arc;

use nalgebra::DVector;

use graph_drs::factorization::OntoDecomposition;
use graph_drs::graph::{BilevelGraph, OrderedDigraph};
use graph_drs::operators::{prox_translated_quadratic, Operator, Resolvent};
use graph_drs::solver::{run, GraphDrs, RunOptions, SolverConfig};

struct BoxProjection {
    lo: f64,
    hi: f64,
    dim: usize,
}

impl Resolvent for BoxProjection {
    fn dim(&self) -> usize {
        self.dim
    }

    fn resolve(&self, _tau: f64, input: &DVector<f64>) -> DVector<f64> {
        input.map(|v| v.clamp(self.lo, self.hi))
    }

    fn name(&self) -> &'static str {
        "box"
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ops: Vec<Operator> = vec![
        Arc::new(BoxProjection { lo: 0.0, hi: 1.0, dim: 2 }),
        Arc::new(prox_translated_quadratic(DVector::from_vec(vec![3.0, -1.0]), 1.0)?),
        Arc::new(prox_translated_quadratic(DVector::from_vec(vec![1.0, 0.5]), 2.0)?),
    ];
    let bg = BilevelGraph::uniform(OrderedDigraph::path(3))?;
    let z = OntoDecomposition::incidence(bg.base())?;
    let drs = GraphDrs::new(bg, z, ops, SolverConfig::new(1.0, 2000).with_tol(1e-24))?;
    let (st, trace) = run(&drs, RunOptions::default())?;
    // unconstrained minimizer (5/3, 0) clipped to the box
    println!("{} iterations, x̄ = {:?}, expected [1, 0]", trace.len(), st.mean().as_slice());
    Ok(())
}
