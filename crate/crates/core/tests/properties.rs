use std::collections::HashMap;

use homophily_core::coloring::class_multiset;
use homophily_core::moments::covariance_structure;
use homophily_core::oracle::{enumerate_colorings, mc_tail};
use homophily_core::{
    families, homophilic_counts, index_a, index_h, index_j_theta, index_r, random_coloring,
    weight_preset, z_scores, Coloring, Graph, Matrix, MomentSummary, Nu, ObservedOutcome,
    Preset, Profile, Side, Statistic, WeightVector,
};
use nalgebra::DMatrix;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1usize..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn brute_force_pi3(g: &Graph) -> u64 {
    let e = g.edges();
    let mut count = 0;
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            let (u, v) = e[a];
            let (x, y) = e[b];
            let shared = [u == x, u == y, v == x, v == y].iter().filter(|&&s| s).count();
            if shared == 1 {
                count += 1;
            }
        }
    }
    count
}

fn to_dense(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

/// A random graph and profile with every class of size >= 2.
fn random_instance(seed: u64, max_classes: usize) -> (Graph, Profile) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let s = rng.random_range(1..=max_classes);
    let sizes: Vec<u64> = (0..s).map(|_| rng.random_range(2..=6)).collect();
    let n: usize = sizes.iter().sum::<u64>() as usize;
    let max_m = n * (n - 1) / 2;
    let m = rng.random_range(1..=max_m.min(4 * n));
    (families::gnm(n, m, seed ^ 0x9e37), Profile::new(sizes).unwrap())
}

proptest! {
    #[test]
    fn pi3_matches_brute_force(g in arb_graph(10)) {
        let s = g.summarize();
        prop_assert_eq!(s.pi3, brute_force_pi3(&g));
        prop_assert_eq!(g.degrees().iter().map(|&d| d as u64).sum::<u64>(), 2 * s.m);
        prop_assert_eq!(s.disjoint_ordered_pairs, 2 * (s.edge_pairs() - s.pi3));
    }

    #[test]
    fn gamma_forms_agree(g in arb_graph(12)) {
        let s = g.summarize();
        if s.n >= 4 {
            let a = s.gamma().unwrap();
            let b = s.gamma_from_degree_moments().unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        } else {
            prop_assert!(s.gamma().is_none());
        }
    }

    #[test]
    fn gamma_sign_follows_dispersion(g in arb_graph(12)) {
        let s = g.summarize();
        if let (Some(gamma), Some(over)) = (s.gamma_exact(), s.is_over_dispersed()) {
            let gap = s.dispersion.unwrap() - s.dispersion_threshold();
            if gap.abs() > 1e-12 {
                prop_assert_eq!(!gamma.is_positive(), over);
            }
        }
    }

    #[test]
    fn counts_match_per_edge_scan(g in arb_graph(9), seed in any::<u64>(), s in 1usize..4) {
        let n = g.vertex_count();
        if n >= s {
            let mut sizes = vec![1u64; s];
            sizes[0] += (n - s) as u64;
            let f = random_coloring(&Profile::new(sizes).unwrap(), seed);
            let o = homophilic_counts(&g, &f);
            let mono = g.edges().iter().filter(|&&(u, v)| f.class_of(u as usize) == f.class_of(v as usize)).count();
            prop_assert_eq!(o.total() as usize, mono);
        }
    }

    #[test]
    fn indices_stay_in_range(seed in 0u64..10_000) {
        let (g, p) = random_instance(seed, 6);
        let s = g.summarize();
        let ms = MomentSummary::compute(&s, &p);
        let cs = covariance_structure(&s, &p, &ms);
        let f = random_coloring(&p, seed);
        let o = homophilic_counts(&g, &f);
        let z = z_scores(&o, &ms);
        if let Ok(a) = index_a(&z, &cs) { prop_assert!((-1.0..=1.0).contains(&a)); }
        if let Ok(h) = index_h(&z, &cs) { prop_assert!((0.0..=1.0).contains(&h)); }
        prop_assert!((-1.0..=1.0).contains(&index_r(&o, &ms, &cs)));
        for preset in Preset::ALL {
            let w = weight_preset(preset, &s, &p, Nu::Classes).unwrap();
            prop_assert!((-1.0..=1.0).contains(&index_j_theta(&o, &ms, &cs, &w)));
        }
    }

    #[test]
    fn indices_are_monotone_in_each_count(seed in 0u64..10_000, class in 0usize..6) {
        let (g, p) = random_instance(seed, 6);
        let class = class % p.classes();
        let s = g.summarize();
        let ms = MomentSummary::compute(&s, &p);
        let cs = covariance_structure(&s, &p, &ms);
        let o = homophilic_counts(&g, &random_coloring(&p, seed));
        let mut bumped = o.clone();
        bumped.0[class] += 1;
        let w = weight_preset(Preset::Dyadicity, &s, &p, Nu::default()).unwrap();
        prop_assert!(index_r(&bumped, &ms, &cs) >= index_r(&o, &ms, &cs));
        prop_assert!(index_j_theta(&bumped, &ms, &cs, &w) >= index_j_theta(&o, &ms, &cs, &w));
        if let (Ok(a0), Ok(a1)) = (index_a(&z_scores(&o, &ms), &cs), index_a(&z_scores(&bumped, &ms), &cs)) {
            prop_assert!(a1 >= a0 - 1e-15);
        }
    }

    #[test]
    fn j_theta_ignores_weight_scale(seed in 0u64..10_000, lambda in 1e-6f64..1e6, exp in -20i32..20) {
        let (g, p) = random_instance(seed, 5);
        let s = g.summarize();
        let ms = MomentSummary::compute(&s, &p);
        let cs = covariance_structure(&s, &p, &ms);
        let o = homophilic_counts(&g, &random_coloring(&p, seed + 1));
        let w = weight_preset(Preset::AvgInternalDegree, &s, &p, Nu::MaxDegree).unwrap();
        let base = index_j_theta(&o, &ms, &cs, &w);
        let pow2 = WeightVector::custom(w.w.iter().map(|x| x * 2f64.powi(exp)).collect()).unwrap();
        prop_assert_eq!(index_j_theta(&o, &ms, &cs, &pow2), base);
        let scaled = WeightVector::custom(w.w.iter().map(|x| x * lambda).collect()).unwrap();
        prop_assert!((index_j_theta(&o, &ms, &cs, &scaled) - base).abs() <= 1e-12);
    }
}

#[test]
fn sherman_morrison_matches_dense_inverse() {
    let mut tested = 0;
    for seed in 0..300 {
        let (g, p) = random_instance(seed, 50);
        let s = g.summarize();
        let ms = MomentSummary::compute(&s, &p);
        let cs = covariance_structure(&s, &p, &ms);
        let Some(inv) = &cs.sigma_inv else { continue };
        let dense = to_dense(&cs.sigma).try_inverse().expect("nonsingular");
        let scale = inv.max_abs();
        for i in 0..p.classes() {
            for j in 0..p.classes() {
                assert!((inv.get(i, j) - dense[(i, j)]).abs() <= 1e-9 * scale, "seed {seed}");
            }
        }
        tested += 1;
    }
    assert!(tested > 200, "only {tested} nondegenerate instances");
}

#[test]
fn covariance_sign_structure() {
    for seed in 0..300 {
        let (g, p) = random_instance(seed, 12);
        let s = g.summarize();
        let ms = MomentSummary::compute(&s, &p);
        let cs = covariance_structure(&s, &p, &ms);
        let Some(gamma) = cs.gamma else { continue };
        let classes = p.classes();
        for i in 0..classes {
            for j in 0..classes {
                if i != j {
                    assert!(cs.sigma.get(i, j) * gamma >= 0.0);
                }
            }
        }
        let Some(inv) = &cs.sigma_inv else { continue };
        // Every principal submatrix of Sigma (gamma <= 0) or of Sigma^-1
        // (gamma >= 0) is a Z-matrix with an entrywise nonnegative inverse.
        let target = if gamma <= 0.0 { &cs.sigma } else { inv };
        let subsets = (1u64 << classes.min(10)) - 1;
        for bits in 1..=subsets {
            let idx: Vec<usize> = (0..classes.min(10)).filter(|&k| bits >> k & 1 == 1).collect();
            let sub = target.principal(&idx);
            let scale = sub.max_abs();
            for a in 0..idx.len() {
                for b in 0..idx.len() {
                    if a != b {
                        assert!(sub.get(a, b) <= 1e-12 * scale, "not a Z-matrix, seed {seed}");
                    }
                }
            }
            let sub_inv = to_dense(&sub).try_inverse().unwrap();
            let inv_scale = sub_inv.amax();
            assert!(sub_inv.iter().all(|&x| x >= -1e-10 * inv_scale), "seed {seed}");
        }
    }
}

#[test]
fn sampling_converges_to_uniform_law() {
    let g = families::path(6);
    let p = Profile::new(vec![2, 3, 1]).unwrap();
    let base = class_multiset(&p);
    let total = p.multinomial().to_u64().unwrap() as f64;
    for k in [1_000u64, 20_000] {
        let mut freq: HashMap<Vec<u32>, u64> = HashMap::new();
        for seed in 0..k {
            *freq.entry(random_coloring(&p, seed).assignment().to_vec()).or_default() += 1;
        }
        let mut tv = 0.0;
        let mut perm = base.clone();
        perm.sort();
        let mut seen = 0;
        loop {
            let observed = *freq.get(&perm).unwrap_or(&0) as f64 / k as f64;
            tv += (observed - 1.0 / total).abs();
            seen += 1;
            if !next_perm(&mut perm) {
                break;
            }
        }
        assert_eq!(seen as f64, total);
        tv /= 2.0;
        assert!(tv <= 4.0 / (k as f64).sqrt(), "tv {tv} for k {k}");
    }
    let _ = g;
}

fn next_perm(xs: &mut [u32]) -> bool {
    let Some(i) = (1..xs.len()).rev().find(|&i| xs[i - 1] < xs[i]) else {
        return false;
    };
    let j = (i..xs.len()).rev().find(|&j| xs[j] > xs[i - 1]).unwrap();
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

#[test]
fn monte_carlo_intervals_cover_exact_tails() {
    let g = families::path(5);
    let p = Profile::new(vec![3, 2]).unwrap();
    let d = enumerate_colorings(&g, &p, 1000).unwrap();
    let stat = Statistic::Component(0);
    let exact = homophily_core::oracle::exact_tail(&d, &stat, 1.0, Side::AtLeast)
        .to_f64()
        .unwrap();
    let trials = 400u64;
    let samples = 2_000u64;
    let covered = (0..trials)
        .filter(|t| mc_tail(&g, &p, &stat, 1.0, Side::AtLeast, samples, t * samples).covers(exact))
        .count();
    assert!(covered as f64 >= 0.99 * trials as f64, "{covered}/{trials}");
}

#[test]
fn observed_outcome_bounds() {
    let g = families::gnm(9, 20, 5);
    let p = Profile::new(vec![4, 3, 2]).unwrap();
    for seed in 0..200 {
        let f: Coloring = random_coloring(&p, seed);
        let o: ObservedOutcome = homophilic_counts(&g, &f);
        assert!(o.total() <= 20);
        for (mi, &c) in o.counts().iter().zip(p.sizes()) {
            assert!(*mi <= (c * (c - 1) / 2).min(20));
        }
    }
}
