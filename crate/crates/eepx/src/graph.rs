//! Undirected simple graphs with dense adjacency storage.
//!
//! Vertices are 0-indexed internally; the text and JSON interchange formats
//! use 1-indexed vertices.

use std::io::{BufRead, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Undirected simple graph on `n` vertices.
///
/// The adjacency matrix is symmetric, binary, with zero diagonal. The
/// Laplacian `L = D - A` therefore has zero row sums and is positive
/// semidefinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Array2<u8>,
}

impl Graph {
    /// Build a graph from an edge list (0-indexed). Duplicate edges collapse;
    /// self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut adjacency = Array2::<u8>::zeros((n, n));
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            adjacency[[u, v]] = 1;
            adjacency[[v, u]] = 1;
        }
        Ok(Self { n, adjacency })
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Read-only adjacency matrix.
    pub fn adjacency(&self) -> &Array2<u8> {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[[u, v]] == 1
    }

    /// Edge list with `u < v`, lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.adjacency[[u, v]] == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency.row(u).iter().map(|&a| a as usize).sum()
    }

    /// Highest vertex degree (`D_max`).
    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Neighbors of `u` in ascending order.
    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        self.adjacency
            .row(u)
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == 1)
            .map(|(v, _)| v)
            .collect()
    }

    /// Number of neighbors of `u` inside the vertex set `cell`.
    pub fn neighbor_count_in(&self, u: usize, cell: &[usize]) -> usize {
        cell.iter().filter(|&&v| self.adjacency[[u, v]] == 1).count()
    }

    /// Combinatorial Laplacian `L = D - A` as a dense float matrix. Entries
    /// are exact small integers.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = Array2::<f64>::zeros((self.n, self.n));
        for u in 0..self.n {
            let mut deg = 0.0;
            for v in 0..self.n {
                if self.adjacency[[u, v]] == 1 {
                    l[[u, v]] = -1.0;
                    deg += 1.0;
                }
            }
            l[[u, u]] = deg;
        }
        l
    }

    /// Parse the "u v" per line edge-list format (1-indexed). Blank lines and
    /// `#` comments are skipped. The vertex count is the largest index seen,
    /// unless `n` is given.
    pub fn parse_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_seen = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let err = |msg: &str| Error::Parse {
                line: lineno + 1,
                msg: msg.into(),
            };
            let u: usize = it
                .next()
                .ok_or_else(|| err("missing first endpoint"))?
                .parse()
                .map_err(|_| err("first endpoint is not an integer"))?;
            let v: usize = it
                .next()
                .ok_or_else(|| err("missing second endpoint"))?
                .parse()
                .map_err(|_| err("second endpoint is not an integer"))?;
            if it.next().is_some() {
                return Err(err("trailing tokens after edge"));
            }
            if u == 0 || v == 0 {
                return Err(err("vertices are 1-indexed; found index 0"));
            }
            max_seen = max_seen.max(u).max(v);
            edges.push((u - 1, v - 1));
        }
        let n = n.unwrap_or(max_seen);
        Self::from_edges(n, &edges)
    }

    /// Write the 1-indexed edge-list text format.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(w, "{} {}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

/// JSON interchange format: `{n, edges, cells}` with 1-indexed vertices.
/// `cells` is optional and carries a reference partition when known.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Vec<usize>>>,
}

impl InstanceFile {
    pub fn new(graph: &Graph, partition: Option<&Partition>) -> Self {
        Self {
            n: graph.n(),
            edges: graph.edges().iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
            cells: partition.map(|p| {
                p.cells()
                    .iter()
                    .map(|c| c.iter().map(|&v| v + 1).collect())
                    .collect()
            }),
        }
    }

    pub fn graph(&self) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                if u == 0 || v == 0 {
                    Err(Error::InvalidGraph("vertices are 1-indexed; found index 0".into()))
                } else {
                    Ok((u - 1, v - 1))
                }
            })
            .collect::<Result<_>>()?;
        Graph::from_edges(self.n, &edges)
    }

    pub fn partition(&self) -> Result<Option<Partition>> {
        match &self.cells {
            None => Ok(None),
            Some(cells) => {
                let zero_indexed: Vec<Vec<usize>> = cells
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
                Partition::new(zero_indexed, self.n).map(Some)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
