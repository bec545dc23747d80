//! Vertex partitions and their indicator-matrix encodings.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Ordered partition of `{0, .., n-1}` into disjoint nonempty cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    n: usize,
}

impl Partition {
    /// Validate and normalize: cells must be disjoint, nonempty, and cover
    /// all `n` vertices. Vertices within a cell are sorted ascending.
    pub fn new(cells: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidPartition("no cells".into()));
        }
        let mut owner = vec![usize::MAX; n];
        for (k, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {k} is empty")));
            }
            for &v in cell {
                if v >= n {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {v} out of range for n = {n}"
                    )));
                }
                if owner[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {v} appears in cells {} and {k}",
                        owner[v]
                    )));
                }
                owner[v] = k;
            }
        }
        if let Some(v) = owner.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidPartition(format!("vertex {v} not covered")));
        }
        let mut cells = cells;
        for cell in &mut cells {
            cell.sort_unstable();
        }
        Ok(Self { cells, n })
    }

    /// Single cell holding every vertex (the trivial partition).
    pub fn trivial(n: usize) -> Self {
        Self {
            cells: vec![(0..n).collect()],
            n,
        }
    }

    /// One singleton cell per vertex.
    pub fn singletons(n: usize) -> Self {
        Self {
            cells: (0..n).map(|v| vec![v]).collect(),
            n,
        }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells `r`.
    pub fn r(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.len()).collect()
    }

    /// Map vertex -> cell index.
    pub fn cell_of(&self) -> Vec<usize> {
        let mut owner = vec![0usize; self.n];
        for (k, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                owner[v] = k;
            }
        }
        owner
    }

    /// Equality up to relabeling of the cells.
    pub fn same_up_to_labels(&self, other: &Partition) -> bool {
        if self.n != other.n || self.r() != other.r() {
            return false;
        }
        let mut a: Vec<&Vec<usize>> = self.cells.iter().collect();
        let mut b: Vec<&Vec<usize>> = other.cells.iter().collect();
        a.sort();
        b.sort();
        a == b
    }

    /// JSON list-of-lists with 1-indexed vertices.
    pub fn to_json(&self) -> Result<String> {
        let one_indexed: Vec<Vec<usize>> = self
            .cells
            .iter()
            .map(|c| c.iter().map(|&v| v + 1).collect())
            .collect();
        Ok(serde_json::to_string(&one_indexed)?)
    }

    /// Parse the JSON list-of-lists format (1-indexed vertices).
    pub fn from_json(text: &str, n: usize) -> Result<Self> {
        let one_indexed: Vec<Vec<usize>> = serde_json::from_str(text)?;
        let cells: Vec<Vec<usize>> = one_indexed
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| {
                        if v == 0 {
                            Err(Error::InvalidPartition(
                                "vertices are 1-indexed; found index 0".into(),
                            ))
                        } else {
                            Ok(v - 1)
                        }
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Self::new(cells, n)
    }
}

/// Binary and normalized indicator matrices of a partition.
///
/// `binary` is the n x r 0/1 matrix with exactly one 1 per row; `normalized`
/// rescales column k by `1/sqrt(|C_k|)`, so that the normalized matrix has
/// orthonormal columns and its projector fixes the all-ones vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix {
    binary: Array2<f64>,
    normalized: Array2<f64>,
}

impl IndicatorMatrix {
    pub fn from_partition(p: &Partition) -> Self {
        let (n, r) = (p.n(), p.r());
        let mut binary = Array2::<f64>::zeros((n, r));
        let mut normalized = Array2::<f64>::zeros((n, r));
        for (k, cell) in p.cells().iter().enumerate() {
            let scale = 1.0 / (cell.len() as f64).sqrt();
            for &v in cell {
                binary[[v, k]] = 1.0;
                normalized[[v, k]] = scale;
            }
        }
        Self { binary, normalized }
    }

    pub fn binary(&self) -> &Array2<f64> {
        &self.binary
    }

    pub fn normalized(&self) -> &Array2<f64> {
        &self.normalized
    }

    pub fn n(&self) -> usize {
        self.binary.nrows()
    }

    pub fn r(&self) -> usize {
        self.binary.ncols()
    }

    /// Structural feasibility: one 1 per row of `binary`, no empty column,
    /// nonnegative `normalized` with one nonzero per row, and the two
    /// tolerance identities `H^T H = I` and `H H^T 1 = 1` (1e-12).
    pub fn validate(&self) -> Result<()> {
        let (n, r) = (self.n(), self.r());
        let mut col_counts = vec![0usize; r];
        for i in 0..n {
            let mut ones = 0;
            #[allow(clippy::needless_range_loop)]
            for k in 0..r {
                let b = self.binary[[i, k]];
                if b != 0.0 && b != 1.0 {
                    return Err(Error::InvalidIndicator(format!(
                        "binary entry ({i}, {k}) = {b} is not 0/1"
                    )));
                }
                if b == 1.0 {
                    ones += 1;
                    col_counts[k] += 1;
                }
                if self.normalized[[i, k]] < 0.0 {
                    return Err(Error::InvalidIndicator(format!(
                        "normalized entry ({i}, {k}) is negative"
                    )));
                }
                if (b == 0.0) != (self.normalized[[i, k]] == 0.0) {
                    return Err(Error::InvalidIndicator(format!(
                        "support mismatch at ({i}, {k})"
                    )));
                }
            }
            if ones != 1 {
                return Err(Error::InvalidIndicator(format!(
                    "row {i} has {ones} nonzeros, expected exactly 1"
                )));
            }
        }
        if let Some(k) = col_counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidIndicator(format!("column {k} is empty")));
        }
        // H^T H = I_r within 1e-12.
        let h = &self.normalized;
        let gram = h.t().dot(h);
        for a in 0..r {
            for b in 0..r {
                let want = if a == b { 1.0 } else { 0.0 };
                if (gram[[a, b]] - want).abs() > 1e-12 {
                    return Err(Error::InvalidIndicator(format!(
                        "H^T H deviates from identity at ({a}, {b}) by {:.3e}",
                        (gram[[a, b]] - want).abs()
                    )));
                }
            }
        }
        // H H^T 1 = 1 within 1e-12.
        let ones = ndarray::Array1::<f64>::ones(n);
        let projected = h.dot(&h.t().dot(&ones));
        for i in 0..n {
            if (projected[i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidIndicator(format!(
                    "H H^T 1 deviates from 1 at row {i} by {:.3e}",
                    (projected[i] - 1.0).abs()
                )));
            }
        }
        Ok(())
    }
}

/// Enumerate every partition of `{0, .., n-1}` into exactly `r` nonempty
/// cells, in restricted-growth-string order. Brute-force oracle for small
/// `n`; the count is the Stirling number S(n, r).
pub fn enumerate_partitions(n: usize, r: usize) -> Vec<Partition> {
    assert!(n <= 12, "enumeration is exponential; n = {n} is too large");
    let mut out = Vec::new();
    if r == 0 || r > n {
        return out;
    }
    // rgs[i] = cell of vertex i, with rgs[i] <= 1 + max(rgs[..i]).
    let mut rgs = vec![0usize; n];
    fn rec(rgs: &mut Vec<usize>, i: usize, max_used: usize, n: usize, r: usize, out: &mut Vec<Partition>) {
        if i == n {
            if max_used + 1 == r {
                let mut cells = vec![Vec::new(); r];
                for (v, &k) in rgs.iter().enumerate() {
                    cells[k].push(v);
                }
                out.push(Partition::new(cells, n).expect("enumeration yields valid partitions"));
            }
            return;
        }
        let cap = (max_used + 1).min(r - 1);
        for k in 0..=cap {
            rgs[i] = k;
            rec(rgs, i + 1, max_used.max(k), n, r, out);
        }
    }
    rec(&mut rgs, 1, 0, n, r, &mut out);
    out
}

/// Recover the partition encoded by a matrix with exactly one nonzero per
/// row: cell k collects the rows whose nonzero sits in column k.
pub fn partition_from_indicator(h: &Array2<f64>) -> Result<Partition> {
    let (n, r) = (h.nrows(), h.ncols());
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); r];
    for i in 0..n {
        let nonzeros: Vec<usize> = (0..r).filter(|&k| h[[i, k]] != 0.0).collect();
        match nonzeros.as_slice() {
            [k] => cells[*k].push(i),
            [] => {
                return Err(Error::InvalidIndicator(format!("row {i} is all zeros")));
            }
            many => {
                return Err(Error::InvalidIndicator(format!(
                    "row {i} has {} nonzeros, expected exactly 1",
                    many.len()
                )));
            }
        }
    }
    // Empty columns are a coverage defect of the input matrix.
    Partition::new(cells, n)
}
