//! Graph filters and their low-pass strength.
//!
//! Builds the heat kernel exp(-sigma L) and the IIR response
//! (I + alpha L)^{-1} on a planted graph and prints the low-pass ratio
//! eta_r for the parameter scalings used by the benchmark: sigma = 10/D_max
//! (strong, eta ~ 0) and alpha = 0.5/D_max (weak, eta ~ 1).
//!
//! Run with: `cargo run --example low_pass_filters`

use eepx::eep::generate_planted_eep;
use eepx::filters::{build_filter_matrix, low_pass_ratio, GraphFilter};

fn main() {
    let cross = vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]];
    let inst = generate_planted_eep(&[40, 40, 40], &cross, 0.5, 3).unwrap();
    let dmax = inst.graph.max_degree() as f64;
    println!("n = {}, D_max = {dmax}", inst.graph.n());

    let strong = GraphFilter::heat(10.0 / dmax).unwrap();
    let weak = GraphFilter::iir(0.5 / dmax).unwrap();
    let fm = build_filter_matrix(&strong, &inst.graph).unwrap();
    let eigs = &fm.laplacian_eigenvalues;
    println!(
        "lowest Laplacian eigenvalues: {:?}",
        eigs.iter().take(5).map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
    );

    let r = 3;
    for (name, filter) in [("strong heat", &strong), ("weak iir", &weak)] {
        let rep = low_pass_ratio(filter, eigs, r).unwrap();
        println!(
            "{name:12} {} -> eta_{r} = {:.4} (low pass: {})",
            filter.describe(),
            rep.eta,
            rep.is_low_pass
        );
    }

    // Closed forms from the generating functions match the generic ratio.
    let heat_closed = (-(10.0 / dmax) * (eigs[r] - eigs[r - 1])).exp();
    let iir_closed = (1.0 + (0.5 / dmax) * eigs[r - 1]) / (1.0 + (0.5 / dmax) * eigs[r]);
    println!("closed forms: heat {heat_closed:.4}, iir {iir_closed:.4}");

    // An identity filter is not low pass (eta = 1), and a polynomial that
    // kills the constant eigenvector has no defined ratio at all.
    let identity = GraphFilter::poly(vec![1.0]).unwrap();
    let rep = low_pass_ratio(&identity, eigs, r).unwrap();
    println!("identity filter: eta = {}, low pass: {}", rep.eta, rep.is_low_pass);
    let ramp = GraphFilter::poly(vec![0.0, 1.0]).unwrap();
    println!(
        "ramp filter h(mu) = mu on an exact spectrum: {:?}",
        low_pass_ratio(&ramp, &[0.0, 1.0, 3.0, 20.0], r).unwrap_err().to_string()
    );
}
