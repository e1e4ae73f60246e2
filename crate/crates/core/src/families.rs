//! Named graph families and small-graph generators.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

fn build(n: usize, edges: Vec<(usize, usize)>) -> Graph {
    Graph::from_edges(n, &edges).expect("generated edge lists are simple")
}

/// Path on `n` vertices.
pub fn path(n: usize) -> Graph {
    build(n, (1..n).map(|i| (i - 1, i)).collect())
}

/// Star `K_{1,leaves}` with the centre at index 0.
pub fn star(leaves: usize) -> Graph {
    build(leaves + 1, (1..=leaves).map(|i| (0, i)).collect())
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    build(n, edges)
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    build(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
}

/// `m` vertex-disjoint edges on `2m` vertices.
pub fn matching(m: usize) -> Graph {
    build(2 * m, (0..m).map(|i| (2 * i, 2 * i + 1)).collect())
}

/// Uniform random simple graph with `n` vertices and `m` edges.
pub fn gnm(n: usize, m: usize, seed: u64) -> Graph {
    let max = n * n.saturating_sub(1) / 2;
    assert!(m <= max, "too many edges for {n} vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            seen.insert((u.min(v), u.max(v)));
        }
    }
    build(n, seen.into_iter().collect())
}

/// Decodes a Prüfer sequence of length `n - 2` into the edges of a labelled tree.
pub fn prufer_tree(seq: &[usize]) -> Vec<(usize, usize)> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Every labelled tree on `n >= 2` vertices, one per Prüfer sequence.
pub fn labelled_trees(n: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    assert!(n >= 2);
    let len = n - 2;
    let total = n.pow(len as u32);
    (0..total).map(move |mut code| {
        let mut seq = vec![0usize; len];
        for slot in seq.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        prufer_tree(&seq)
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative of every connected graph on `n` vertices, up to
/// isomorphism (`n <= 7`). Canonical form is the smallest edge bitmask over
/// all vertex relabellings.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!((1..=7).contains(&n), "exhaustive generation is limited to n <= 7");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut pair_index = vec![vec![usize::MAX; n]; n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        pair_index[i][j] = k;
        pair_index[j][i] = k;
    }
    let relabel: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .map(|perm| {
            pairs
                .iter()
                .map(|&(i, j)| pair_index[perm[i]][perm[j]])
                .collect()
        })
        .collect();

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        if !is_connected(n, &pairs, mask) {
            continue;
        }
        let canon = relabel
            .iter()
            .map(|map| {
                let mut img = 0u64;
                let mut bits = mask;
                while bits != 0 {
                    let k = bits.trailing_zeros() as usize;
                    img |= 1 << map[k];
                    bits &= bits - 1;
                }
                img
            })
            .min()
            .unwrap_or(mask);
        if seen.insert(canon) {
            let edges: Vec<(usize, usize)> = (0..pairs.len())
                .filter(|&k| canon >> k & 1 == 1)
                .map(|k| pairs[k])
                .collect();
            out.push(build(n, edges));
        }
    }
    out
}

fn is_connected(n: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut reached = 1u64;
    loop {
        let mut grown = reached;
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 && (reached >> i & 1 == 1 || reached >> j & 1 == 1) {
                grown |= (1 << i) | (1 << j);
            }
        }
        if grown == reached {
            return reached.count_ones() as usize == n;
        }
        reached = grown;
    }
}

/// Every composition of `n` (ordered profiles with positive parts).
pub fn compositions(n: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    // Each of the n-1 gaps either splits or not.
    for cuts in 0u64..(1 << (n - 1)) {
        let mut parts = Vec::new();
        let mut current = 1;
        for gap in 0..n - 1 {
            if cuts >> gap & 1 == 1 {
                parts.push(current);
                current = 1;
            } else {
                current += 1;
            }
        }
        parts.push(current);
        out.push(parts);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_counts() {
        // OEIS A001349: 1, 1, 2, 6, 21, 112
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn cayley_count() {
        assert_eq!(labelled_trees(5).count(), 125);
        for t in labelled_trees(5) {
            let g = Graph::from_edges(5, &t).unwrap();
            assert_eq!(g.edge_count(), 4);
            assert!(connected_graphs_contains_tree(&g));
        }
    }

    fn connected_graphs_contains_tree(g: &Graph) -> bool {
        let pairs: Vec<(usize, usize)> = (0..g.vertex_count())
            .flat_map(|i| (i + 1..g.vertex_count()).map(move |j| (i, j)))
            .collect();
        let mut mask = 0u64;
        for &(u, v) in g.edges() {
            let (a, b) = (u.min(v) as usize, u.max(v) as usize);
            mask |= 1 << pairs.iter().position(|&p| p == (a, b)).unwrap();
        }
        is_connected(g.vertex_count(), &pairs, mask)
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4).len(), 8);
        assert!(compositions(4).iter().all(|c| c.iter().sum::<u64>() == 4));
    }

    #[test]
    fn gnm_has_requested_size() {
        let g = gnm(30, 100, 7);
        assert_eq!(g.edge_count(), 100);
        assert_eq!(g.vertex_count(), 30);
    }
}
