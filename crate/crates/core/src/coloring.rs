//! Vertex colorings, profiles, and homophilic edge counts.

use std::collections::HashMap;
use std::io::Read;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("vertex {0:?} has no class assignment")]
    MissingVertex(String),
    #[error("vertex {0:?} is not in the graph")]
    UnknownVertex(String),
    #[error("vertex {0:?} is assigned more than once")]
    DuplicateVertex(String),
    #[error("line {line}: expected \"vertex<TAB>label\"")]
    Malformed { line: usize },
    #[error("profile must have at least one class and only positive sizes")]
    InvalidProfile,
    #[error("profile sums to {got} but the graph has {expected} vertices")]
    ProfileMismatch { expected: usize, got: u64 },
    #[error("assignment has length {got} but the graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// `a (a-1) ... (a-q+1)`, with `a^(0) = 1`.
pub fn falling_factorial(a: u64, q: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 0..q as u64 {
        if k >= a {
            return BigInt::from(0u8);
        }
        acc *= a - k;
    }
    acc
}

/// Class sizes `c_1, ..., c_s` of a coloring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Profile(Vec<u64>);

impl Profile {
    pub fn new(sizes: Vec<u64>) -> Result<Self, ColoringError> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(ColoringError::InvalidProfile);
        }
        Ok(Profile(sizes))
    }

    pub fn sizes(&self) -> &[u64] {
        &self.0
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// `c_i (c_i - 1)` for every class.
    pub fn pair_counts(&self) -> Vec<u64> {
        self.0.iter().map(|&c| c * c.saturating_sub(1)).collect()
    }

    /// Number of colorings with this profile, `n! / (c_1! ... c_s!)`.
    pub fn multinomial(&self) -> BigUint {
        let mut acc = BigUint::one();
        let mut placed = 0u64;
        for &c in &self.0 {
            for k in 1..=c {
                placed += 1;
                acc *= placed;
                acc /= k;
            }
        }
        acc
    }
}

/// Assignment of every vertex to a class index in `0..s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    assignment: Vec<u32>,
    labels: Vec<String>,
    profile: Profile,
}

impl Coloring {
    /// Builds a coloring from class indices. Classes are numbered `0..s`
    /// and every one of them must be used.
    pub fn from_assignment(assignment: Vec<u32>) -> Result<Self, ColoringError> {
        let s = assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let labels = (1..=s).map(|i| i.to_string()).collect();
        Self::with_labels(assignment, labels)
    }

    pub fn with_labels(assignment: Vec<u32>, labels: Vec<String>) -> Result<Self, ColoringError> {
        let mut sizes = vec![0u64; labels.len()];
        for &c in &assignment {
            let slot = sizes
                .get_mut(c as usize)
                .ok_or(ColoringError::InvalidProfile)?;
            *slot += 1;
        }
        let profile = Profile::new(sizes)?;
        Ok(Coloring {
            assignment,
            labels,
            profile,
        })
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.assignment[v] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn class_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn classes(&self) -> usize {
        self.labels.len()
    }

    fn check_against(&self, g: &Graph) -> Result<(), ColoringError> {
        if self.assignment.len() != g.vertex_count() {
            return Err(ColoringError::LengthMismatch {
                expected: g.vertex_count(),
                got: self.assignment.len(),
            });
        }
        Ok(())
    }
}

/// Reads a `vertex<TAB>label` file against the vertices of `g`.
///
/// Class indices follow first appearance of each label.
pub fn load_coloring<R: Read>(mut reader: R, g: &Graph) -> Result<Coloring, ColoringError> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| ColoringError::Io(e.to_string()))?;
    let text =
        std::str::from_utf8(&bytes).map_err(|e| ColoringError::Encoding(e.to_string()))?;
    parse_coloring(text, g)
}

pub fn parse_coloring(text: &str, g: &Graph) -> Result<Coloring, ColoringError> {
    const UNSET: u32 = u32::MAX;
    let mut assignment = vec![UNSET; g.vertex_count()];
    let mut class_index: HashMap<&str, u32> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let (vertex, label) = match content.split_once('\t') {
            Some((v, l)) => (v.trim(), l.trim()),
            None => {
                let mut it = content.split_ascii_whitespace();
                match (it.next(), it.next()) {
                    (Some(v), Some(l)) => (v, l),
                    _ => return Err(ColoringError::Malformed { line: lineno + 1 }),
                }
            }
        };
        if vertex.is_empty() || label.is_empty() {
            return Err(ColoringError::Malformed { line: lineno + 1 });
        }
        let v = g
            .vertex_index(vertex)
            .ok_or_else(|| ColoringError::UnknownVertex(vertex.to_string()))?;
        if assignment[v] != UNSET {
            return Err(ColoringError::DuplicateVertex(vertex.to_string()));
        }
        let next = labels.len() as u32;
        let class = *class_index.entry(label).or_insert_with(|| {
            labels.push(label.to_string());
            next
        });
        assignment[v] = class;
    }

    if let Some(v) = assignment.iter().position(|&c| c == UNSET) {
        return Err(ColoringError::MissingVertex(g.label(v).to_string()));
    }
    Coloring::with_labels(assignment, labels)
}

/// Observed homophilic edge counts `m_1, ..., m_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ObservedOutcome(pub Vec<u64>);

impl ObservedOutcome {
    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Counts edges with both endpoints in each class, in one pass over the edges.
pub fn homophilic_counts(g: &Graph, f: &Coloring) -> ObservedOutcome {
    debug_assert!(f.check_against(g).is_ok());
    ObservedOutcome(count_with(g, f.assignment(), f.classes()))
}

pub(crate) fn count_with(g: &Graph, assignment: &[u32], classes: usize) -> Vec<u64> {
    let mut counts = vec![0u64; classes];
    for &(u, v) in g.edges() {
        let cu = assignment[u as usize];
        if cu == assignment[v as usize] {
            counts[cu as usize] += 1;
        }
    }
    counts
}

/// Checks that a coloring fits a graph before it is used for counting.
pub fn validate_coloring(g: &Graph, f: &Coloring) -> Result<(), ColoringError> {
    f.check_against(g)
}

/// Class multiset of a profile in index order, e.g. `(2,1)` gives `[0,0,1]`.
pub fn class_multiset(p: &Profile) -> Vec<u32> {
    p.sizes()
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat(i as u32).take(c as usize))
        .collect()
}

/// A uniformly random coloring with profile `p`, deterministic in `seed`.
pub fn random_coloring(p: &Profile, seed: u64) -> Coloring {
    let mut assignment = class_multiset(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    assignment.shuffle(&mut rng);
    let labels = (1..=p.classes()).map(|i| i.to_string()).collect();
    Coloring {
        assignment,
        labels,
        profile: p.clone(),
    }
}

/// Same as [`random_coloring`] but keeps the class labels of `template`.
pub fn random_coloring_like(template: &Coloring, seed: u64) -> Coloring {
    let mut c = random_coloring(template.profile(), seed);
    c.labels = template.labels.clone();
    c
}
