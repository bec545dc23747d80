//! K-means on the rows of the eigenvector matrix: k-means++ seeding,
//! Lloyd iterations, and a Hartigan-style single-point refinement pass
//! that escapes Lloyd-stable local minima (which show up routinely on
//! instances with a handful of points).

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::seeding;

use super::{feasible_short_circuit, ProblemInstance, SolverDiagnostics, SolverResult};

/// Best clustering found over the restarts.
#[derive(Debug, Clone)]
pub struct KMeansOutcome {
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sq_dist(points: &Array2<f64>, i: usize, center: &[f64]) -> f64 {
    let d = points.ncols();
    let mut acc = 0.0;
    for c in 0..d {
        let diff = points[[i, c]] - center[c];
        acc += diff * diff;
    }
    acc
}

/// k-means++ seeding: first center uniform, later centers drawn with
/// probability proportional to the squared distance to the nearest chosen
/// center.
fn kmeanspp_init(points: &Array2<f64>, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centers.push(points.row(first).to_vec());
    let mut dist2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let idx = if total <= 0.0 {
            // All points coincide with a center; any choice works.
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let center = points.row(idx).to_vec();
        for (i, slot) in dist2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points, i, &center));
        }
        centers.push(center);
    }
    centers
}

fn assign_all(points: &Array2<f64>, centers: &[Vec<f64>], out: &mut [usize]) {
    for (i, slot) in out.iter_mut().enumerate().take(points.nrows()) {
        let mut best = 0usize;
        let mut best_d = sq_dist(points, i, &centers[0]);
        for (k, c) in centers.iter().enumerate().skip(1) {
            let d = sq_dist(points, i, c);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        *slot = best;
    }
}

fn update_centers(points: &Array2<f64>, assignments: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let d = points.ncols();
    let mut centers = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        for c in 0..d {
            centers[a][c] += points[[i, c]];
        }
    }
    for (center, &count) in centers.iter_mut().zip(counts.iter()) {
        if count > 0 {
            for v in center.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    (centers, counts)
}

/// Move the point farthest from its center into each empty cluster, never
/// draining a cluster below one point. Ties go to the lowest point index.
fn repair_empty(
    points: &Array2<f64>,
    centers: &mut [Vec<f64>],
    assignments: &mut [usize],
    counts: &mut [usize],
) {
    let k = centers.len();
    for empty in 0..k {
        while counts[empty] == 0 {
            let mut chosen: Option<(usize, f64)> = None;
            for i in 0..points.nrows() {
                if counts[assignments[i]] < 2 {
                    continue;
                }
                let d = sq_dist(points, i, &centers[assignments[i]]);
                if chosen.is_none_or(|(_, best)| d > best) {
                    chosen = Some((i, d));
                }
            }
            let Some((i, _)) = chosen else { break };
            counts[assignments[i]] -= 1;
            assignments[i] = empty;
            counts[empty] += 1;
            centers[empty] = points.row(i).to_vec();
        }
    }
}

fn wcss(points: &Array2<f64>, centers: &[Vec<f64>], assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| sq_dist(points, i, &centers[a]))
        .sum()
}

/// Single-point moves with exact cost deltas: transferring `x` from cluster
/// A (size a) to B (size b) changes the within-cluster cost by
/// `b/(b+1) ||x - mu_B||^2 - a/(a-1) ||x - mu_A||^2`. Scans points in order
/// and applies the best strictly improving move per point until a full pass
/// makes none; never empties a cluster.
fn hartigan_polish(points: &Array2<f64>, assignments: &mut [usize], k: usize) {
    let (n, d) = (points.nrows(), points.ncols());
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        for c in 0..d {
            sums[a][c] += points[[i, c]];
        }
    }
    let mean_dist2 = |sums: &[Vec<f64>], counts: &[usize], cluster: usize, i: usize| -> f64 {
        let inv = 1.0 / counts[cluster] as f64;
        (0..d)
            .map(|c| {
                let diff = points[[i, c]] - sums[cluster][c] * inv;
                diff * diff
            })
            .sum()
    };
    for _pass in 0..100 {
        let mut moved = false;
        for i in 0..n {
            let from = assignments[i];
            if counts[from] < 2 {
                continue;
            }
            let a = counts[from] as f64;
            let removal_gain = a / (a - 1.0) * mean_dist2(&sums, &counts, from, i);
            let mut best: Option<(usize, f64)> = None;
            for to in 0..k {
                if to == from {
                    continue;
                }
                let b = counts[to] as f64;
                let delta = b / (b + 1.0) * mean_dist2(&sums, &counts, to, i) - removal_gain;
                if delta < -1e-15 && best.is_none_or(|(_, d0)| delta < d0) {
                    best = Some((to, delta));
                }
            }
            if let Some((to, _)) = best {
                counts[from] -= 1;
                counts[to] += 1;
                for c in 0..d {
                    sums[from][c] -= points[[i, c]];
                    sums[to][c] += points[[i, c]];
                }
                assignments[i] = to;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

fn lloyd(points: &Array2<f64>, k: usize, max_iter: usize, rng: &mut impl Rng) -> KMeansOutcome {
    let n = points.nrows();
    let init_centers = kmeanspp_init(points, k, rng);
    let mut assignments = vec![0usize; n];
    assign_all(points, &init_centers, &mut assignments);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        let (mut new_centers, mut counts) = update_centers(points, &assignments, k);
        repair_empty(points, &mut new_centers, &mut assignments, &mut counts);
        let mut next = vec![0usize; n];
        assign_all(points, &new_centers, &mut next);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
    }
    // A final repair guards against empty clusters from the last
    // reassignment step.
    let (mut final_centers, mut counts) = update_centers(points, &assignments, k);
    repair_empty(points, &mut final_centers, &mut assignments, &mut counts);
    hartigan_polish(points, &mut assignments, k);
    let (final_centers, _) = update_centers(points, &assignments, k);
    let cost = wcss(points, &final_centers, &assignments);
    KMeansOutcome {
        assignments,
        wcss: cost,
        iterations,
        converged,
    }
}

/// Cluster the rows of `points` into `k` groups, keeping the best of
/// `restarts` seeded runs by within-cluster cost. Returns the winner and
/// the number of restarts that hit `max_iter` without converging.
pub fn cluster_rows(
    points: &Array2<f64>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<(KMeansOutcome, usize)> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::Solver(format!(
            "k-means needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if restarts == 0 {
        return Err(Error::Solver("k-means needs at least one restart".into()));
    }
    let mut best: Option<KMeansOutcome> = None;
    let mut failed = 0usize;
    for restart in 0..restarts {
        let mut rng = seeding::rng_from(seeding::derive_path(seed, &[0x6b6d, restart as u64]));
        let outcome = lloyd(points, k, max_iter, &mut rng);
        if !outcome.converged {
            failed += 1;
        }
        if best.as_ref().is_none_or(|b| outcome.wcss < b.wcss) {
            best = Some(outcome);
        }
    }
    Ok((best.expect("at least one restart ran"), failed))
}

/// Solve the indicator model by k-means on the rows of `P`.
pub fn solve_kmeans(
    inst: &ProblemInstance,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<SolverResult> {
    if let Some(ind) = feasible_short_circuit(inst.p_hat()) {
        return SolverResult::assemble(
            ind,
            inst.p_hat(),
            0,
            super::SolverKind::KMeans.id(),
            SolverDiagnostics {
                converged: true,
                notes: vec!["input was already a feasible indicator".into()],
                ..Default::default()
            },
        );
    }
    let (outcome, failed) = cluster_rows(inst.p_hat(), inst.r(), restarts, max_iter, seed)?;
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); inst.r()];
    for (i, &a) in outcome.assignments.iter().enumerate() {
        cells[a].push(i);
    }
    let partition = Partition::new(cells, inst.n())?;
    let h_hat = crate::partition::IndicatorMatrix::from_partition(&partition);
    let mut diagnostics = SolverDiagnostics {
        converged: outcome.converged,
        trace: vec![outcome.wcss],
        ..Default::default()
    };
    if failed > 0 {
        diagnostics
            .notes
            .push(format!("{failed} of {restarts} restarts did not converge in {max_iter} iterations"));
    }
    SolverResult::assemble(
        h_hat,
        inst.p_hat(),
        outcome.iterations,
        super::SolverKind::KMeans.id(),
        diagnostics,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eep::demo_instance;
    use crate::partition::enumerate_partitions;
    use crate::spectral::{structural_basis, structural_residual};
    use ndarray::array;

    #[test]
    fn one_dimensional_two_well_separated_pairs() {
        let points = array![[0.0], [0.1], [10.0], [10.1]];
        let (outcome, _) = cluster_rows(&points, 2, 20, 100, 4).unwrap();
        assert_eq!(outcome.assignments[0], outcome.assignments[1]);
        assert_eq!(outcome.assignments[2], outcome.assignments[3]);
        assert_ne!(outcome.assignments[0], outcome.assignments[2]);
        // Matches the brute-force optimum of the clustering cost.
        let mut best = f64::INFINITY;
        for p in enumerate_partitions(4, 2) {
            best = best.min(structural_residual(&points, &p));
        }
        assert!((outcome.wcss - best).abs() <= 1e-12);
    }

    #[test]
    fn rows_constant_per_cell_recover_the_planted_partition() {
        let inst = demo_instance();
        let (basis, _) = structural_basis(&inst.graph, &inst.truth).unwrap();
        let pi = ProblemInstance::new(basis).unwrap();
        let result = solve_kmeans(&pi, 10, 100, 7).unwrap();
        let found = crate::partition::partition_from_indicator(result.h_hat.binary()).unwrap();
        assert!(found.same_up_to_labels(&inst.truth));
        assert!(result.objective <= 1e-18);
    }

    #[test]
    fn r_equals_n_gives_singletons_with_zero_objective() {
        let p_hat = Array2::<f64>::eye(4);
        let pi = ProblemInstance::new(p_hat).unwrap();
        let result = solve_kmeans(&pi, 5, 50, 1).unwrap();
        assert_eq!(result.h_hat.r(), 4);
        assert!(result.objective <= 1e-18);
    }

    #[test]
    fn empty_cluster_repair_keeps_k_cells() {
        // Three identical points, k = 2: repair must still emit two cells.
        let points = array![[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]];
        let (outcome, _) = cluster_rows(&points, 2, 3, 10, 2).unwrap();
        let mut counts = [0usize; 2];
        for &a in &outcome.assignments {
            counts[a] += 1;
        }
        assert!(counts[0] > 0 && counts[1] > 0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let points = array![[0.0, 1.0], [0.2, 0.8], [5.0, 5.0], [5.1, 4.9], [9.0, 0.0]];
        let (a, _) = cluster_rows(&points, 3, 8, 100, 11).unwrap();
        let (b, _) = cluster_rows(&points, 3, 8, 100, 11).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.wcss, b.wcss);
    }
}
