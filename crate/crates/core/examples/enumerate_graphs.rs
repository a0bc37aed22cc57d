//! Census of connected ordered graphs on four nodes, grouped by algebraic
//! connectivity.

use std::collections::BTreeMap;

use graph_drs::graph::{algebraic_connectivity, enumerate_connected_graphs, unbalance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graphs = enumerate_connected_graphs(4)?;
    println!("{} connected graphs on 4 nodes", graphs.len());

    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for g in &graphs {
        let l1 = algebraic_connectivity(g)?;
        classes
            .entry(format!("{l1:.4}"))
            .or_default()
            .push(format!("{} (U = {:.3})", g.edge_string(), unbalance(g)));
    }
    for (l1, members) in &classes {
        println!("\nλ₁ = {l1}: {} graphs", members.len());
        for m in members {
            println!("  {m}");
        }
    }
    Ok(())
}
