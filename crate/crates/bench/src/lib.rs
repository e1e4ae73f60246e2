//! Seeded fixtures shared by the benchmarks.

use homophily_core::{families, random_coloring, Coloring, Graph, Profile};

/// A uniform random graph with `n` vertices and `m` edges, colored with
/// `classes` classes of near-equal size.
pub fn fixture(n: usize, m: usize, classes: usize, seed: u64) -> (Graph, Coloring) {
    let g = families::gnm(n, m, seed);
    let base = (n / classes) as u64;
    let mut sizes = vec![base; classes];
    sizes[0] += (n - base as usize * classes) as u64;
    let f = random_coloring(&Profile::new(sizes).expect("positive sizes"), seed ^ 1);
    (g, f)
}
