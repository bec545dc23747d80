//! Projective semi-NMF: multiplicative Lagrangian updates on the split
//! kernel.
//!
//! With the linear kernel `K = P P^T` split entrywise into nonnegative
//! parts `K = K+ - K-`, the update
//!
//! ```text
//! H <- H .* (K+ H + H H^T K- H) ./ (K- H + H H^T K+ H)
//! ```
//!
//! keeps iterates entrywise nonnegative. It cannot restore zero entries to
//! positive values, so an all-zero row stops the iteration immediately; the
//! row-argmax postprocessing then restores a feasible indicator either way.

use ndarray::Array2;
use rand::Rng;

use crate::error::Result;
use crate::seeding;

use super::{row_argmax_postprocess, ProblemInstance, SolverDiagnostics, SolverResult};

/// Entrywise split `K = K+ - K-` of the kernel `K = P P^T` into
/// nonnegative parts with disjoint supports.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    pub k_plus: Array2<f64>,
    pub k_minus: Array2<f64>,
}

/// `K+_ij = (|K_ij| + K_ij) / 2`, `K-_ij = (|K_ij| - K_ij) / 2` for the
/// linear kernel `K = p_hat p_hat^T`.
pub fn kernel_split(p_hat: &Array2<f64>) -> KernelSplit {
    let k = p_hat.dot(&p_hat.t());
    let k_plus = k.mapv(|x| 0.5 * (x.abs() + x));
    let k_minus = k.mapv(|x| 0.5 * (x.abs() - x));
    KernelSplit { k_plus, k_minus }
}

const DENOM_FLOOR: f64 = 1e-15;

/// One multiplicative update step. Exposed to the tests for the fixed-point
/// check.
fn update_step(split: &KernelSplit, h: &Array2<f64>) -> Array2<f64> {
    let kp_h = split.k_plus.dot(h);
    let km_h = split.k_minus.dot(h);
    // H (H^T X) grouped right-to-left keeps the cost at O(n r^2).
    let numer = &kp_h + &h.dot(&h.t().dot(&km_h));
    let denom = &km_h + &h.dot(&h.t().dot(&kp_h));
    let mut next = h.clone();
    ndarray::Zip::from(&mut next)
        .and(&numer)
        .and(&denom)
        .for_each(|v, &num, &den| {
            *v *= num / den.max(DENOM_FLOOR);
        });
    next
}

/// Solve the indicator model by the multiplicative scheme, starting from a
/// seeded Uniform(0,1) matrix with unit-norm columns.
pub fn solve_psnmf(inst: &ProblemInstance, max_iter: usize, tol: f64, seed: u64) -> Result<SolverResult> {
    let (n, r) = (inst.n(), inst.r());
    let split = kernel_split(inst.p_hat());

    let mut rng = seeding::rng_from(seeding::derive(seed, 0x70736e));
    let mut h = Array2::<f64>::from_shape_fn((n, r), |_| rng.random::<f64>());
    for mut col in h.columns_mut() {
        let norm = col.mapv(|x| x * x).sum().sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|x| x / norm);
        }
    }

    let mut diagnostics = SolverDiagnostics::default();
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let next = update_step(&split, &h);
        debug_assert!(
            next.iter().all(|&x| x >= 0.0),
            "multiplicative update produced a negative entry"
        );
        let diff = (&next - &h).mapv(|x| x * x).sum().sqrt();
        let scale = h.mapv(|x| x * x).sum().sqrt().max(1e-300);
        let rel = diff / scale;
        diagnostics.trace.push(rel);
        h = next;
        // Corrective stop: a row of zeros can never recover.
        if let Some(i) = (0..n).find(|&i| (0..r).all(|k| h[[i, k]] == 0.0)) {
            diagnostics
                .notes
                .push(format!("stopped early: row {i} became all zeros at iteration {iterations}"));
            break;
        }
        if rel <= tol {
            diagnostics.converged = true;
            break;
        }
    }

    let gram = h.t().dot(&h);
    let mut orth = 0.0f64;
    for a in 0..r {
        for b in 0..r {
            let want = if a == b { 1.0 } else { 0.0 };
            orth += (gram[[a, b]] - want) * (gram[[a, b]] - want);
        }
    }
    diagnostics
        .notes
        .push(format!("final iterate orthogonality residual {:.3e}", orth.sqrt()));

    let h_hat = row_argmax_postprocess(&h)?;
    SolverResult::assemble(
        h_hat,
        inst.p_hat(),
        iterations,
        super::SolverKind::Psnmf.id(),
        diagnostics,
    )
}
