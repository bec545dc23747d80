//! External equitable partitions: verification, quotient graphs, and a
//! planted-EEP random graph generator.
//!
//! A partition is an EEP when, for every pair of distinct cells `C_i`, `C_j`,
//! all vertices of `C_i` have the same number of neighbors in `C_j`. The
//! common counts `b_ij` form the quotient adjacency matrix, and the quotient
//! Laplacian satisfies the commutation identity `L H = H L_q` with the binary
//! indicator `H`.

use std::collections::HashMap;
use std::fmt;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{IndicatorMatrix, Partition};
use crate::seeding;

/// Counterexample to the EEP condition: two vertices of the same cell with
/// different neighbor counts in another cell. Indices are 0-based; `Display`
/// renders them 1-based to match the text formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EepWitness {
    pub from_cell: usize,
    pub to_cell: usize,
    pub vertex_a: usize,
    pub vertex_b: usize,
    pub count_a: usize,
    pub count_b: usize,
}

impl fmt::Display for EepWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vertices {} and {} of cell {} have {} and {} neighbors in cell {}",
            self.vertex_a + 1,
            self.vertex_b + 1,
            self.from_cell + 1,
            self.count_a,
            self.count_b,
            self.to_cell + 1
        )
    }
}

/// Exact EEP check by integer neighbor counting. Returns the witness of the
/// first violated cell pair, or `None` when the partition is an EEP.
pub fn eep_witness(g: &Graph, p: &Partition) -> Option<EepWitness> {
    let cells = p.cells();
    for (i, cell_i) in cells.iter().enumerate() {
        for (j, cell_j) in cells.iter().enumerate() {
            if i == j {
                continue;
            }
            let first = cell_i[0];
            let want = g.neighbor_count_in(first, cell_j);
            for &u in &cell_i[1..] {
                let got = g.neighbor_count_in(u, cell_j);
                if got != want {
                    return Some(EepWitness {
                        from_cell: i,
                        to_cell: j,
                        vertex_a: first,
                        vertex_b: u,
                        count_a: want,
                        count_b: got,
                    });
                }
            }
        }
    }
    None
}

/// Whether `p` is an external equitable partition of `g`.
pub fn is_eep(g: &Graph, p: &Partition) -> bool {
    eep_witness(g, p).is_none()
}

/// Quotient of a graph by an EEP. The adjacency holds the cross-cell
/// counts `b_ij`; the Laplacian is `D_q - A_q` and is asymmetric in general.
/// All entries are exact integers stored as floats.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientGraph {
    adjacency: Array2<f64>,
    laplacian: Array2<f64>,
}

impl QuotientGraph {
    fn from_counts(b: &Array2<f64>) -> Self {
        let r = b.nrows();
        let mut laplacian = b.mapv(|x| if x == 0.0 { 0.0 } else { -x });
        for i in 0..r {
            laplacian[[i, i]] = b.row(i).sum();
        }
        Self {
            adjacency: b.clone(),
            laplacian,
        }
    }

    pub fn r(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    pub fn laplacian(&self) -> &Array2<f64> {
        &self.laplacian
    }
}

/// Build the quotient graph of `p`, failing with a witness when `p` is not
/// an EEP of `g`.
pub fn quotient(g: &Graph, p: &Partition) -> Result<QuotientGraph> {
    if p.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} vertices, graph has {}",
            p.n(),
            g.n()
        )));
    }
    if let Some(w) = eep_witness(g, p) {
        return Err(Error::NotAnEep(w));
    }
    let r = p.r();
    let mut b = Array2::<f64>::zeros((r, r));
    for (i, cell_i) in p.cells().iter().enumerate() {
        for (j, cell_j) in p.cells().iter().enumerate() {
            if i != j {
                b[[i, j]] = g.neighbor_count_in(cell_i[0], cell_j) as f64;
            }
        }
    }
    Ok(QuotientGraph::from_counts(&b))
}

/// A sampled graph together with its planted EEP and quotient.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub graph: Graph,
    pub truth: Partition,
    pub quotient: QuotientGraph,
}

impl PlantedInstance {
    pub fn indicator(&self) -> IndicatorMatrix {
        IndicatorMatrix::from_partition(&self.truth)
    }
}

/// Hand-built 11-vertex demonstration graph with a three-cell EEP
/// `{1,2}, {3,4,5}, {6..11}` (1-indexed). Its quotient Laplacian is
/// `[[3,-3,0],[-2,4,-2],[0,-1,1]]`.
pub fn demo_instance() -> PlantedInstance {
    let edges_1idx = [
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 3),
        (2, 4),
        (2, 5),
        (4, 5),
        (3, 6),
        (3, 7),
        (4, 8),
        (4, 9),
        (5, 10),
        (5, 11),
        (6, 7),
    ];
    let edges: Vec<(usize, usize)> = edges_1idx.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
    let graph = Graph::from_edges(11, &edges).expect("demo graph is valid");
    let truth = Partition::new(
        vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7, 8, 9, 10]],
        11,
    )
    .expect("demo partition is valid");
    let quotient = quotient(&graph, &truth).expect("demo partition is an EEP");
    PlantedInstance {
        graph,
        truth,
        quotient,
    }
}

fn check_feasible(sizes: &[usize], cross: &[Vec<u64>]) -> Result<()> {
    let r = sizes.len();
    if r == 0 {
        return Err(Error::InfeasibleModel("no cells requested".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::InfeasibleModel("cell sizes must be positive".into()));
    }
    if cross.len() != r || cross.iter().any(|row| row.len() != r) {
        return Err(Error::InfeasibleModel(format!(
            "cross-count matrix must be {r} x {r}"
        )));
    }
    for i in 0..r {
        if cross[i][i] != 0 {
            return Err(Error::InfeasibleModel(format!(
                "cross-count diagonal entry ({i}, {i}) must be zero; intra-cell edges are governed by p_intra"
            )));
        }
        for j in 0..r {
            if i == j {
                continue;
            }
            if cross[i][j] as usize > sizes[j] {
                return Err(Error::InfeasibleModel(format!(
                    "b[{i}][{j}] = {} exceeds |C_{j}| = {}",
                    cross[i][j], sizes[j]
                )));
            }
            let lhs = sizes[i] as u64 * cross[i][j];
            let rhs = sizes[j] as u64 * cross[j][i];
            if lhs != rhs {
                return Err(Error::InfeasibleModel(format!(
                    "handshake violated between cells {i} and {j}: {} * {} != {} * {}",
                    sizes[i], cross[i][j], sizes[j], cross[j][i]
                )));
            }
        }
    }
    Ok(())
}

/// Sample a biregular bipartite edge set: every left vertex gets `d_left`
/// right neighbors, every right vertex `d_right` left neighbors. Uses a
/// configuration-model stub pairing with swap repair of duplicate pairs.
fn sample_biregular(
    left: &[usize],
    right: &[usize],
    d_left: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(usize, usize)>> {
    let e = left.len() * d_left;
    // Complete join: pairing cannot avoid duplicates, but the edge set is
    // forced anyway.
    if d_left == right.len() {
        let mut out = Vec::with_capacity(e);
        for &u in left {
            for &v in right {
                out.push((u, v));
            }
        }
        return Ok(out);
    }
    let left_stubs: Vec<usize> = left
        .iter()
        .flat_map(|&u| std::iter::repeat_n(u, d_left))
        .collect();
    let d_right = e / right.len();
    let mut right_stubs: Vec<usize> = right
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, d_right))
        .collect();
    right_stubs.shuffle(rng);

    let mut pairs: Vec<(usize, usize)> = left_stubs
        .iter()
        .zip(right_stubs.iter())
        .map(|(&u, &v)| (u, v))
        .collect();
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for &p in &pairs {
        *counts.entry(p).or_insert(0) += 1;
    }
    let mut attempts = 0usize;
    let max_attempts = 10_000 * e.max(1);
    loop {
        let dup = pairs.iter().position(|p| counts[p] > 1);
        let Some(k) = dup else {
            return Ok(pairs);
        };
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InfeasibleModel(
                "failed to sample a simple biregular cross-cell graph; counts too dense".into(),
            ));
        }
        let l = rng.random_range(0..pairs.len());
        if l == k {
            continue;
        }
        let (uk, vk) = pairs[k];
        let (ul, vl) = pairs[l];
        let a = (uk, vl);
        let b = (ul, vk);
        // Swap right endpoints when that does not introduce new duplicates.
        if counts.get(&a).copied().unwrap_or(0) == 0 && counts.get(&b).copied().unwrap_or(0) == 0 {
            *counts.get_mut(&(uk, vk)).unwrap() -= 1;
            *counts.get_mut(&(ul, vl)).unwrap() -= 1;
            *counts.entry(a).or_insert(0) += 1;
            *counts.entry(b).or_insert(0) += 1;
            pairs[k] = a;
            pairs[l] = b;
        }
    }
}

/// Sample a graph with a planted exact EEP.
///
/// Cell `k` receives `sizes[k]` consecutive vertices. Between cells `i != j`
/// the edges form a random biregular graph in which every vertex of `C_i` has
/// exactly `cross[i][j]` neighbors in `C_j`; inside each cell, edges are
/// sampled independently with probability `p_intra`. The planted partition is
/// an EEP by construction since cross-cell degrees are constant per cell and
/// intra-cell edges never enter the EEP condition.
///
/// Feasibility (`sizes[i] * cross[i][j] == sizes[j] * cross[j][i]`,
/// `cross[i][j] <= sizes[j]`, zero diagonal) is rejected before sampling.
pub fn generate_planted_eep(
    sizes: &[usize],
    cross: &[Vec<u64>],
    p_intra: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    check_feasible(sizes, cross)?;
    if !(0.0..=1.0).contains(&p_intra) {
        return Err(Error::InfeasibleModel(format!(
            "p_intra = {p_intra} is not a probability"
        )));
    }
    let r = sizes.len();
    let n: usize = sizes.iter().sum();
    let mut offsets = vec![0usize; r];
    for k in 1..r {
        offsets[k] = offsets[k - 1] + sizes[k - 1];
    }
    let members: Vec<Vec<usize>> = (0..r)
        .map(|k| (offsets[k]..offsets[k] + sizes[k]).collect())
        .collect();

    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            if cross[i][j] == 0 {
                continue;
            }
            let mut rng = seeding::rng_from(seeding::derive_path(seed, &[1, i as u64, j as u64]));
            edges.extend(sample_biregular(
                &members[i],
                &members[j],
                cross[i][j] as usize,
                &mut rng,
            )?);
        }
    }
    for (k, cell) in members.iter().enumerate() {
        let mut rng = seeding::rng_from(seeding::derive_path(seed, &[2, k as u64]));
        for a in 0..cell.len() {
            for b in (a + 1)..cell.len() {
                if rng.random::<f64>() < p_intra {
                    edges.push((cell[a], cell[b]));
                }
            }
        }
    }

    let graph = Graph::from_edges(n, &edges)?;
    let truth = Partition::new(members, n)?;
    let mut b = Array2::<f64>::zeros((r, r));
    for i in 0..r {
        for j in 0..r {
            if i != j {
                b[[i, j]] = cross[i][j] as f64;
            }
        }
    }
    debug_assert!(is_eep(&graph, &truth));
    Ok(PlantedInstance {
        graph,
        truth,
        quotient: QuotientGraph::from_counts(&b),
    })
}
