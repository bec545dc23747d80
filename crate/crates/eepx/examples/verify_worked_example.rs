//! Exact EEP verification on the hand-built 11-vertex graph.
//!
//! Builds the demonstration graph with its three-cell partition, checks the
//! EEP condition by integer neighbor counting, prints the quotient
//! Laplacian, and recovers the cells from the indicator matrix. Also shows
//! what a failed check looks like, witness included.
//!
//! Run with: `cargo run --example verify_worked_example`

use eepx::eep::{demo_instance, eep_witness, is_eep, quotient};
use eepx::graph::Graph;
use eepx::partition::{partition_from_indicator, Partition};

fn main() {
    let inst = demo_instance();
    println!(
        "graph: n = {}, {} edges; partition cells {:?}",
        inst.graph.n(),
        inst.graph.edges().len(),
        inst.truth.cell_sizes()
    );
    assert!(is_eep(&inst.graph, &inst.truth));
    println!("EEP check: yes");

    println!("quotient Laplacian:");
    let lq = inst.quotient.laplacian();
    for i in 0..inst.quotient.r() {
        let row: Vec<String> = (0..inst.quotient.r()).map(|j| format!("{:2}", lq[[i, j]])).collect();
        println!("  [{}]", row.join(", "));
    }

    // The commutation identity L H = H L_q holds exactly in integer
    // arithmetic.
    let h = inst.indicator();
    let lhs = inst.graph.laplacian().dot(h.binary());
    let rhs = h.binary().dot(lq);
    assert_eq!(lhs, rhs);
    println!("commutation L*H == H*Lq: exact");

    // Recover the cells back from the indicator matrix (1-indexed print).
    let recovered = partition_from_indicator(h.binary()).unwrap();
    for (k, cell) in recovered.cells().iter().enumerate() {
        let verts: Vec<usize> = cell.iter().map(|&v| v + 1).collect();
        println!("C_{} = {:?}", k + 1, verts);
    }

    // A non-example: splitting a path 1-2-3 as {1},{2,3} fails, and the
    // checker names the offending vertices.
    let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let bad = Partition::new(vec![vec![0], vec![1, 2]], 3).unwrap();
    let witness = eep_witness(&path, &bad).expect("not an EEP");
    println!("path split is not an EEP: {witness}");
    assert!(quotient(&path, &bad).is_err());
}
