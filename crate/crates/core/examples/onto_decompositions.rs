//! Onto decompositions of a base Laplacian: tree incidence, spectral and a
//! rotated copy. The primal iterates coincide for all of them.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use graph_drs::factorization::{align, OntoDecomposition};
use graph_drs::graph::{BilevelGraph, OrderedDigraph};
use graph_drs::operators::{prox_translated_quadratic, Operator};
use graph_drs::solver::{GraphDrs, Iteration, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = OrderedDigraph::star(4);
    let bg = BilevelGraph::new(OrderedDigraph::complete(4), base.clone())?;
    let incidence = OntoDecomposition::incidence(&base)?;
    let spectral = OntoDecomposition::spectral(&base)?;
    let angle = 0.7f64;
    let q = DMatrix::from_row_slice(3, 3, &[
        angle.cos(), -angle.sin(), 0.0,
        angle.sin(), angle.cos(), 0.0,
        0.0, 0.0, 1.0,
    ]);
    let rotated = spectral.rotated(&q)?;

    println!("incidence:\n{}", incidence.to_csv());
    println!("spectral:\n{}", spectral.to_csv());
    println!("aligning orthogonal matrix:{}", align(&incidence, &spectral)?);

    let ops: Vec<Operator> = (0..4)
        .map(|i| Arc::new(prox_translated_quadratic(DVector::from_element(1, i as f64), 1.0).unwrap()) as Operator)
        .collect();
    let engines = [incidence, spectral, rotated]
        .into_iter()
        .map(|z| GraphDrs::new(bg.clone(), z, ops.clone(), SolverConfig::new(1.0, 50)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut states = engines.iter().map(|e| e.init(None)).collect::<Result<Vec<_>, _>>()?;
    let mut gap = 0.0f64;
    for _ in 0..50 {
        for (e, s) in engines.iter().zip(states.iter_mut()) {
            e.step(s)?;
        }
        for s in &states[1..] {
            for (a, b) in s.x.iter().zip(&states[0].x) {
                gap = gap.max((a - b).amax());
            }
        }
    }
    println!("largest primal gap over 50 iterations: {gap:e}");
    Ok(())
}
