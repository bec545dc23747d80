//! Sampling graphs with a planted exact EEP.
//!
//! Every vertex of cell i gets exactly cross[i][j] neighbors in cell j
//! (a random biregular graph per cell pair), while intra-cell edges are
//! Bernoulli(p_intra). The planted partition is an EEP by construction,
//! whatever the intra-cell randomness does.
//!
//! Run with: `cargo run --example planted_eep`

use eepx::eep::{generate_planted_eep, is_eep};

fn main() {
    // Unbalanced pair: handshake 4 * 2 = 8 * 1.
    let inst = generate_planted_eep(&[4, 8], &[vec![0, 2], vec![1, 0]], 0.5, 7).unwrap();
    println!(
        "two-cell instance: n = {}, edges = {}, EEP: {}",
        inst.graph.n(),
        inst.graph.edges().len(),
        is_eep(&inst.graph, &inst.truth)
    );
    for (k, cell) in inst.truth.cells().iter().enumerate() {
        let degrees: Vec<usize> = cell
            .iter()
            .map(|&u| {
                inst.truth
                    .cells()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, other)| inst.graph.neighbor_count_in(u, other))
                    .sum()
            })
            .collect();
        println!("  cell {k}: cross-degrees {degrees:?} (constant by construction)");
    }

    // The 378-vertex three-class chain used by the benchmark protocol.
    let cross = vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]];
    let big = generate_planted_eep(&[126, 126, 126], &cross, 0.3, 42).unwrap();
    println!(
        "three-class chain: n = {}, max degree = {}, EEP: {}",
        big.graph.n(),
        big.graph.max_degree(),
        is_eep(&big.graph, &big.truth)
    );
    println!("quotient Laplacian:");
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| format!("{:2}", big.quotient.laplacian()[[i, j]])).collect();
        println!("  [{}]", row.join(", "));
    }

    // Infeasible requests are rejected before any sampling happens.
    let err = generate_planted_eep(&[4, 8], &[vec![0, 2], vec![2, 0]], 0.5, 7).unwrap_err();
    println!("infeasible handshake rejected: {err}");
}
