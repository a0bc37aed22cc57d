//! Kernel SVM split between five officials on a ring, each with ten agents
//! holding one data point. Sweeps the step size.

use graph_drs::cli::{logspace, svm_sweep};
use graph_drs::problems::{build_svm, objective_svm, SvmSpec};
use graph_drs::solver::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SvmSpec::default();
    let (inst, ops, bg) = build_svm(&spec)?;
    println!(
        "{} nodes, {} state edges, {} base edges (tree: {})",
        bg.n_nodes(),
        bg.state().n_edges(),
        bg.base().n_edges(),
        bg.base().is_tree()
    );
    let runs = svm_sweep(&inst, &ops, &bg, &logspace(1e-2, 1e1, 10), &SolverConfig::new(1.0, 1000).with_tol(0.0))?;
    println!("{:>8} {:>12} {:>12}", "σ", "objective", "variance");
    for r in &runs {
        let last = r.trace.last().unwrap();
        println!("{:>8.4} {:>12.5} {:>12.3e}", r.sigma, last.objective.unwrap(), last.variance);
    }
    // training accuracy of the best run's mean estimate
    let best = runs
        .iter()
        .min_by(|a, b| a.trace.last().unwrap().objective.unwrap().total_cmp(&b.trace.last().unwrap().objective.unwrap()))
        .unwrap();
    let cfg = SolverConfig::new(best.sigma, 1000).with_tol(0.0);
    let drs = graph_drs::solver::TreeDrs::new(bg, ops, cfg)?;
    let (st, _) = graph_drs::solver::run(&drs, Default::default())?;
    let alpha = st.mean();
    let scores = &inst.kernel * &alpha;
    let correct = scores.iter().zip(&inst.labels).filter(|(s, y)| *s * *y > 0.0).count();
    println!(
        "best σ {:.4}: objective {:.5}, training accuracy {correct}/{}",
        best.sigma,
        objective_svm(&inst, &alpha)?,
        inst.n()
    );
    Ok(())
}
