//! Simple undirected graphs and the degree statistics the moment formulas need.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::coloring::falling_factorial;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: self-loop on vertex {vertex:?}")]
    SelfLoop { line: usize, vertex: String },
    #[error("line {line}: duplicate edge {u:?} -- {v:?}")]
    DuplicateEdge { line: usize, u: String, v: String },
    #[error("line {line}: malformed line, expected two endpoints")]
    Malformed { line: usize },
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    OutOfRange { u: usize, v: usize, n: usize },
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Merge repeated edges silently instead of rejecting them.
    pub dedupe: bool,
}

/// An immutable simple undirected graph with dense `u32` vertex indices.
#[derive(Debug, Clone)]
pub struct Graph {
    edges: Vec<(u32, u32)>,
    degrees: Vec<u32>,
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Graph {
    /// Builds a graph on vertices `0..n` labelled by their decimal index.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_labelled_edges(labels, edges)
    }

    /// Builds a graph from explicit vertex labels and index pairs.
    pub fn from_labelled_edges(
        labels: Vec<String>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (line, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: line + 1,
                    vertex: labels[u].clone(),
                });
            }
            if !seen.insert(edge_key(u as u32, v as u32)) {
                return Err(GraphError::DuplicateEdge {
                    line: line + 1,
                    u: labels[u].clone(),
                    v: labels[v].clone(),
                });
            }
            out.push((u as u32, v as u32));
        }
        Ok(Self::assemble(labels, out))
    }

    fn assemble(labels: Vec<String>, edges: Vec<(u32, u32)>) -> Self {
        let mut degrees = vec![0u32; labels.len()];
        for &(u, v) in &edges {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
        Graph {
            edges,
            degrees,
            labels,
            index,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Dense index of the vertex with the given external id.
    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).map(|&i| i as usize)
    }

    pub fn summarize(&self) -> GraphSummary {
        GraphSummary::from_degrees(self.edge_count() as u64, &self.degrees)
    }
}

fn edge_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

/// Reads an edge list.
///
/// Each non-comment line carries two whitespace-separated endpoint ids (extra
/// tokens are ignored). `#` starts a comment. A line consisting of exactly
/// `v <id>` declares a vertex without adding an edge, which is how isolated
/// vertices enter the graph. Dense indices follow first appearance.
pub fn load_edge_list<R: Read>(mut reader: R, opts: LoadOptions) -> Result<Graph, GraphError> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| GraphError::Io(e.to_string()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| GraphError::Encoding(e.to_string()))?;
    parse_edge_list(text, opts)
}

pub fn parse_edge_list(text: &str, opts: LoadOptions) -> Result<Graph, GraphError> {
    let mut index: HashMap<&str, u32> = HashMap::new();
    let mut labels: Vec<&str> = Vec::new();
    let mut edges = Vec::new();
    let mut seen = HashSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = content.split_ascii_whitespace();
        let first = match tokens.next() {
            Some(t) => t,
            None => continue,
        };
        let second = tokens.next().ok_or(GraphError::Malformed { line })?;
        let third = tokens.next();
        if first == "v" && third.is_none() {
            let next = labels.len() as u32;
            index.entry(second).or_insert_with(|| {
                labels.push(second);
                next
            });
            continue;
        }
        if first == second {
            return Err(GraphError::SelfLoop {
                line,
                vertex: first.to_string(),
            });
        }
        let u = *index.entry(first).or_insert_with(|| {
            labels.push(first);
            labels.len() as u32 - 1
        });
        let v = *index.entry(second).or_insert_with(|| {
            labels.push(second);
            labels.len() as u32 - 1
        });
        if !seen.insert(edge_key(u, v)) {
            if opts.dedupe {
                continue;
            }
            return Err(GraphError::DuplicateEdge {
                line,
                u: first.to_string(),
                v: second.to_string(),
            });
        }
        edges.push((u, v));
    }

    let labels = labels.into_iter().map(str::to_owned).collect();
    Ok(Graph::assemble(labels, edges))
}

/// Graph-level quantities consumed by the moment formulas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub n: u64,
    pub m: u64,
    /// Number of two-edge paths, `sum_i C(d_i, 2)`.
    pub pi3: u64,
    /// Ordered pairs of vertex-disjoint edges, `2 (C(m,2) - pi3)`.
    pub disjoint_ordered_pairs: u64,
    pub density: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Index of dispersion of the degree distribution; `None` when `delta1 == 0`.
    pub dispersion: Option<f64>,
    pub max_degree: u64,
    /// Sum of squared degrees, kept exact for the degree-moment form of gamma.
    pub degree_square_sum: u128,
}

impl GraphSummary {
    /// One pass over the degree sequence. Degree moments are accumulated as
    /// integers and divided once at the end.
    pub fn from_degrees(m: u64, degrees: &[u32]) -> Self {
        let n = degrees.len() as u64;
        let mut pi3: u64 = 0;
        let mut sq: u128 = 0;
        let mut sum: u64 = 0;
        let mut max_degree = 0u64;
        for &d in degrees {
            let d = d as u64;
            pi3 += d * d.saturating_sub(1) / 2;
            sq += (d as u128) * (d as u128);
            sum += d;
            max_degree = max_degree.max(d);
        }
        debug_assert_eq!(sum, 2 * m, "degree sum must equal 2m");
        let pairs = m * m.saturating_sub(1) / 2;
        let disjoint_ordered_pairs = 2 * (pairs - pi3);
        let density = if n >= 2 {
            m as f64 / (n * (n - 1) / 2) as f64
        } else {
            0.0
        };
        let (delta1, delta2) = if n > 0 {
            (sum as f64 / n as f64, sq as f64 / n as f64)
        } else {
            (0.0, 0.0)
        };
        let dispersion = (delta1 > 0.0).then(|| {
            // (sq/n - (2m/n)^2) / (2m/n) = (n*sq - 4m^2) / (2 m n)
            let num = n as f64 * sq as f64 - 4.0 * (m as f64) * (m as f64);
            num / (2.0 * m as f64 * n as f64)
        });
        GraphSummary {
            n,
            m,
            pi3,
            disjoint_ordered_pairs,
            density,
            delta1,
            delta2,
            dispersion,
            max_degree,
            degree_square_sum: sq,
        }
    }

    /// Number of unordered edge pairs, `C(m, 2)`.
    pub fn edge_pairs(&self) -> u64 {
        self.m * self.m.saturating_sub(1) / 2
    }

    /// The covariance invariant in exact arithmetic, `None` when `n < 4`.
    pub fn gamma_exact(&self) -> Option<BigRational> {
        if self.n < 4 {
            return None;
        }
        let n4 = falling_factorial(self.n, 4);
        let n2 = falling_factorial(self.n, 2);
        let disjoint = BigInt::from(self.edge_pairs() - self.pi3);
        let first = BigRational::new(disjoint * 2, n4);
        let ratio = BigRational::new(BigInt::from(self.m), n2);
        Some(first - &ratio * &ratio)
    }

    /// `gamma` as a float, `None` when `n < 4`.
    pub fn gamma(&self) -> Option<f64> {
        self.gamma_exact().map(|g| g.to_f64().unwrap_or(f64::NAN))
    }

    /// Degree-moment form of gamma, evaluated independently in floating point.
    pub fn gamma_from_degree_moments(&self) -> Option<f64> {
        if self.n < 4 {
            return None;
        }
        let n = self.n as f64;
        let n4 = n * (n - 1.0) * (n - 2.0) * (n - 3.0);
        let d1 = self.delta1;
        let d2 = self.delta2;
        Some(n / n4 * ((2.0 * n - 3.0) / (2.0 * n - 2.0) * d1 * d1 + d1 / 2.0 - d2))
    }

    /// Threshold `(1 - rho) / 2` that the dispersion index is compared against.
    pub fn dispersion_threshold(&self) -> f64 {
        (1.0 - self.density) / 2.0
    }

    /// `true` if the degree distribution is dispersed enough to force `gamma <= 0`.
    pub fn is_over_dispersed(&self) -> Option<bool> {
        self.dispersion.map(|u| u >= self.dispersion_threshold())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn parse(text: &str) -> Result<Graph, GraphError> {
        parse_edge_list(text, LoadOptions::default())
    }

    #[test]
    fn loader_rejects_bad_input() {
        assert_eq!(
            parse("a b\na b").unwrap_err(),
            GraphError::DuplicateEdge { line: 2, u: "a".into(), v: "b".into() }
        );
        assert_eq!(
            parse("a b\nb a").unwrap_err(),
            GraphError::DuplicateEdge { line: 2, u: "b".into(), v: "a".into() }
        );
        assert_eq!(parse("x x").unwrap_err(), GraphError::SelfLoop { line: 1, vertex: "x".into() });
        assert_eq!(parse("a b\nc").unwrap_err(), GraphError::Malformed { line: 2 });
        assert!(matches!(load_edge_list(&[0xffu8, 0x20, 0x61][..], LoadOptions::default()), Err(GraphError::Encoding(_))));
    }

    #[test]
    fn loader_assigns_dense_indices() {
        let g = parse("a b\nb c").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        assert_eq!(g.degrees(), &[1, 2, 1]);
        assert_eq!(g.labels(), &["a", "b", "c"]);
        assert_eq!(g.vertex_index("c"), Some(2));
    }

    #[test]
    fn loader_comments_declarations_and_dedupe() {
        let g = parse("# header\nv lonely\na b  # trailing\n\nb c 0.5\n").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.degrees(), &[0, 1, 2, 1]);
        let g = parse_edge_list("a b\nb a\na b", LoadOptions { dedupe: true }).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn summary_examples() {
        let k4 = families::complete(4).summarize();
        assert_eq!(k4.pi3, 12);
        assert_eq!(k4.disjoint_ordered_pairs, 6);
        let star = families::star(3).summarize();
        assert_eq!((star.pi3, star.disjoint_ordered_pairs), (3, 0));
        let p4 = families::path(4).summarize();
        assert_eq!((p4.pi3, p4.disjoint_ordered_pairs), (2, 2));
    }

    #[test]
    fn gamma_examples() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(families::star(3).summarize().gamma_exact(), Some(q(-1, 16)));
        assert_eq!(families::path(4).summarize().gamma_exact(), Some(q(1, 48)));
        assert_eq!(families::complete(4).summarize().gamma_exact(), Some(q(0, 1)));
        assert_eq!(families::path(3).summarize().gamma_exact(), None);
    }
}
