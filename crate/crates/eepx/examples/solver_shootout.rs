//! The three indicator solvers side by side.
//!
//! Runs K-means, the projective semi-NMF multiplicative scheme, and the
//! simplified exact-penalty method on the same top-r eigenvectors, first
//! from the exact covariance (the infinite-sample limit, where all three
//! must be exact) and then from a finite sample.
//!
//! Run with: `cargo run --release --example solver_shootout`

use eepx::eep::generate_planted_eep;
use eepx::filters::{build_filter_matrix, exact_covariance, GraphFilter};
use eepx::pipeline::{extract_from_covariance, GroundTruth};
use eepx::signals::{sample_covariance, sample_observations};
use eepx::solvers::{SolverConfig, SolverKind};

fn main() {
    let cross = vec![vec![0, 2, 0], vec![2, 0, 2], vec![0, 1, 0]];
    let inst = generate_planted_eep(&[24, 24, 48], &cross, 0.5, 5).unwrap();
    let filter = GraphFilter::heat(10.0 / inst.graph.max_degree() as f64).unwrap();
    let fm = build_filter_matrix(&filter, &inst.graph).unwrap();
    let truth = GroundTruth::from_instance(&inst).unwrap();
    let noise_var = 0.1;

    let kinds = [SolverKind::KMeans, SolverKind::Psnmf, SolverKind::Penalty];

    println!("exact covariance (m -> infinity):");
    let sigma = exact_covariance(&fm, noise_var);
    println!("{:>28} {:>12} {:>8} {:>12}", "solver", "objective", "iters", "matched_acc");
    for kind in kinds {
        let cfg = SolverConfig::new(kind).with_seed(2);
        let out = extract_from_covariance(&sigma, 3, &cfg, None, Some(&truth)).unwrap();
        let rep = out.report.unwrap();
        println!(
            "{:>28} {:>12.2e} {:>8} {:>12.4}",
            out.solver.solver_id, out.solver.objective, out.solver.iterations, rep.matched_accuracy
        );
    }

    println!("\nsample covariance (m = 400):");
    let batch = sample_observations(&fm, &filter, 400, noise_var, 9).unwrap();
    let est = sample_covariance(&batch);
    println!("{:>28} {:>12} {:>8} {:>12}", "solver", "objective", "iters", "matched_acc");
    for kind in kinds {
        let cfg = SolverConfig::new(kind).with_seed(2);
        let out = extract_from_covariance(&est.matrix, 3, &cfg, None, Some(&truth)).unwrap();
        let rep = out.report.unwrap();
        println!(
            "{:>28} {:>12.2e} {:>8} {:>12.4}",
            out.solver.solver_id, out.solver.objective, out.solver.iterations, rep.matched_accuracy
        );
    }
}
