//! Reduced-scale benchmark run.
//!
//! Runs the full benchmark harness (fresh planted instance per trial,
//! strong and weak filters, all three solvers) on a smaller graph than the
//! 378-vertex protocol, then prints the aggregate table and writes the CSV
//! outputs (trials.csv, aggregate.csv, curves_*.csv) to ./bench_small_out.
//!
//! Run with: `cargo run --release --example benchmark_small`

use std::path::Path;

use eepx::pipeline::{run_benchmark, write_benchmark_csv, ExperimentConfig, FilterSpec};

fn main() {
    let mut cfg = ExperimentConfig::three_class_default(vec![
        FilterSpec::heat_per_dmax(10.0),
        FilterSpec::iir_per_dmax(0.5),
    ]);
    cfg.sizes = vec![30, 30, 30];
    cfg.m_list = vec![50, 150, 500];
    cfg.trials = 10;
    cfg.seed = 1;

    let run = run_benchmark(&cfg).unwrap();
    println!(
        "{:>28} {:>22} {:>6} {:>10} {:>8} {:>8}",
        "solver", "filter", "m", "mean F_c", "gamma", "acc"
    );
    for row in &run.table.rows {
        println!(
            "{:>28} {:>22} {:>6} {:>10.3e} {:>8.4} {:>8.4}",
            row.solver, row.filter, row.m, row.mean_f_c, row.mean_gamma, row.mean_matched_acc
        );
    }
    if !run.failures.is_empty() {
        println!("failed trials: {:?}", run.failures);
    }

    let out = Path::new("bench_small_out");
    write_benchmark_csv(&cfg, &run, out).unwrap();
    println!("CSV tables written to {}", out.display());
}
