//! Simplified exact-penalty method for the nonnegative-orthogonality model.
//!
//! The input is first shifted entrywise by its minimum, `P_bar = P - a 1`,
//! which makes it nonnegative without changing which indicator minimizes
//! the objective. The solver then minimizes
//!
//! ```text
//! f(H) = ||P_bar - H H^T P_bar||_F^2 + rho * sum_ij max(0, -H_ij)^2
//! ```
//!
//! over the Stiefel manifold `H^T H = I_r` by projected gradient descent
//! with a QR retraction, increasing `rho` along a schedule, and finishes
//! with the shared row-argmax postprocessing. This is a from-scratch
//! reimplementation of the exact-penalty idea with the same input shift and
//! postprocessing contract as published penalty solvers, not a reproduction
//! of any of them; results are labeled "exact-penalty (simplified)".

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::seeding;

use super::{
    cluster_rows, feasible_short_circuit, row_argmax_postprocess, ProblemInstance,
    SolverDiagnostics, SolverResult,
};

/// Thin QR orthonormalization (modified Gram-Schmidt, run twice for
/// stability). The R diagonal stays positive, so the Q factor is unique.
fn qr_orthonormalize(a: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, r) = (a.nrows(), a.ncols());
    let mut q = a.clone();
    for _pass in 0..2 {
        for j in 0..r {
            for i in 0..j {
                let proj: f64 = (0..n).map(|row| q[[row, i]] * q[[row, j]]).sum();
                for row in 0..n {
                    q[[row, j]] -= proj * q[[row, i]];
                }
            }
            let norm: f64 = (0..n).map(|row| q[[row, j]] * q[[row, j]]).sum::<f64>().sqrt();
            if norm < 1e-250 {
                return Err(Error::Solver(
                    "QR retraction hit a rank-deficient step".into(),
                ));
            }
            for row in 0..n {
                q[[row, j]] /= norm;
            }
        }
    }
    Ok(q)
}

fn smooth_objective(p_bar: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let coeff = h.t().dot(p_bar);
    let diff = p_bar - &h.dot(&coeff);
    diff.mapv(|x| x * x).sum()
}

fn penalty_term(h: &Array2<f64>) -> f64 {
    h.iter().map(|&x| x.min(0.0) * x.min(0.0)).sum()
}

/// Euclidean gradient of the penalized objective with `M = P_bar P_bar^T`:
/// `-4 M H + 2 H (H^T M H) + 2 (M H)(H^T H) + 2 rho min(0, H)`.
fn gradient(m_h: &Array2<f64>, h: &Array2<f64>, rho: f64) -> Array2<f64> {
    let htmh = h.t().dot(m_h);
    let hth = h.t().dot(h);
    let mut g = -4.0 * m_h + 2.0 * h.dot(&htmh) + 2.0 * m_h.dot(&hth);
    ndarray::Zip::from(&mut g).and(h).for_each(|gv, &hv| {
        *gv += 2.0 * rho * hv.min(0.0);
    });
    g
}

/// Project onto the tangent space of the Stiefel manifold at `h`:
/// `G - H sym(H^T G)`.
fn tangent_project(h: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
    let htg = h.t().dot(g);
    let sym = 0.5 * (&htg + &htg.t());
    g - &h.dot(&sym)
}

/// Minimize the penalized objective over `H^T H = I_r`.
pub fn solve_exact_penalty(
    inst: &ProblemInstance,
    rho_schedule: &[f64],
    max_outer: usize,
    max_inner: usize,
    tol: f64,
    seed: u64,
) -> Result<SolverResult> {
    if rho_schedule.is_empty() {
        return Err(Error::Solver("empty rho schedule".into()));
    }
    if rho_schedule.iter().any(|&r| !r.is_finite() || r < 0.0) {
        return Err(Error::Solver("rho schedule must be finite and nonnegative".into()));
    }
    if let Some(ind) = feasible_short_circuit(inst.p_hat()) {
        return SolverResult::assemble(
            ind,
            inst.p_hat(),
            0,
            super::SolverKind::Penalty.id(),
            SolverDiagnostics {
                converged: true,
                notes: vec!["input was already a feasible indicator; penalty 0".into()],
                ..Default::default()
            },
        );
    }

    // Shift to a nonnegative P_bar; the shift is uniform across entries, so
    // the restriction of the objective to indicator matrices keeps the same
    // minimizers.
    let a = inst.p_hat().iter().cloned().fold(f64::INFINITY, f64::min);
    let p_bar = inst.p_hat().mapv(|x| x - a);
    let m = p_bar.dot(&p_bar.t());

    // Rounding initialization: a cheap seeded clustering of the rows of
    // P_bar gives a feasible starting point on the manifold.
    let (outcome, _) = cluster_rows(&p_bar, inst.r(), 2, 10, seeding::derive(seed, 0x6570))?;
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); inst.r()];
    for (i, &a) in outcome.assignments.iter().enumerate() {
        cells[a].push(i);
    }
    let init = crate::partition::Partition::new(cells, inst.n())?;
    let mut h = crate::partition::IndicatorMatrix::from_partition(&init)
        .normalized()
        .clone();

    let mut diagnostics = SolverDiagnostics::default();
    let mut iterations = 0usize;
    let outer_count = max_outer.min(rho_schedule.len());
    let mut step = 0.1;
    for &rho in rho_schedule.iter().take(outer_count) {
        let mut current = smooth_objective(&p_bar, &h) + rho * penalty_term(&h);
        let mut flat_streak = 0usize;
        let mut inner = 0usize;
        while inner < max_inner {
            inner += 1;
            iterations += 1;
            let m_h = m.dot(&h);
            let g = gradient(&m_h, &h, rho);
            let g_t = tangent_project(&h, &g);
            let trial = qr_orthonormalize(&(&h - &(step * &g_t)))?;
            let value = smooth_objective(&p_bar, &trial) + rho * penalty_term(&trial);
            diagnostics.trace.push(value);
            if value < current - 1e-15 * (1.0 + current.abs()) {
                let rel = (current - value) / (1.0 + current.abs());
                h = trial;
                current = value;
                flat_streak = 0;
                if rel <= tol {
                    break;
                }
            } else {
                // Non-decreasing step: keep the old iterate and track the
                // streak; five in a row halve the step size.
                flat_streak += 1;
                if flat_streak >= 5 {
                    step *= 0.5;
                    flat_streak = 0;
                    if step < 1e-12 {
                        diagnostics.stalled = true;
                        diagnostics
                            .notes
                            .push(format!("stalled at rho = {rho}: step size below 1e-12"));
                        break;
                    }
                }
            }
        }
        if diagnostics.stalled {
            break;
        }
    }
    diagnostics.converged = !diagnostics.stalled;

    // Negative entries the penalty could not fully squeeze out are clamped
    // before rounding.
    let clamped = h.mapv(|x| x.max(0.0));
    let h_hat = row_argmax_postprocess(&clamped)?;
    SolverResult::assemble(
        h_hat,
        inst.p_hat(),
        iterations,
        super::SolverKind::Penalty.id(),
        diagnostics,
    )
}
