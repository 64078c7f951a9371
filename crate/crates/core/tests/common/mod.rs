#![allow(dead_code)]

use qcap_core::graph::NodeId;
use qcap_core::{Gf, Rational, StorageGraph};
use rand_chacha::rand_core::Rng;
use rand_chacha::ChaCha8Rng;

pub fn gf(q: u32) -> Gf {
    Gf::of_order(q).unwrap()
}

pub fn smallest_field(n: usize) -> Gf {
    let (p, m) = qcap_core::galois::smallest_field_at_least(n as u32).unwrap();
    Gf::new(p, m).unwrap()
}

pub fn below(rng: &mut ChaCha8Rng, n: u32) -> u32 {
    rng.next_u32() % n
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(below(rng, 8) as i64 + 1, below(rng, 3) as i64 + 1)
}

/// A random valid graph on at most `max_n` nodes: minimal sets only, nodes renumbered.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: u32) -> StorageGraph {
    loop {
        let n = 2 + below(rng, max_n - 1);
        let count = 1 + below(rng, 5);
        let mut masks: Vec<u64> = (0..count).map(|_| 1 + below(rng, (1 << n) - 1) as u64).collect();
        masks.sort_unstable();
        masks.dedup();
        let minimal: Vec<u64> = masks
            .iter()
            .copied()
            .filter(|&a| !masks.iter().any(|&b| b != a && b & a == b))
            .collect();
        let used = minimal.iter().fold(0, |acc, m| acc | m);
        let ids: Vec<u32> = (0..n).filter(|i| used >> i & 1 == 1).collect();
        let rename = |i: u32| ids.iter().position(|&x| x == i).unwrap() as NodeId + 1;
        let sets: Vec<Vec<NodeId>> = minimal
            .iter()
            .map(|&m| (0..n).filter(|i| m >> i & 1 == 1).map(rename).collect())
            .collect();
        let nodes: Vec<(NodeId, Rational)> = (1..=ids.len() as NodeId).map(|i| (i, small_rational(rng))).collect();
        if let Ok(g) = StorageGraph::new(&nodes, &sets) {
            return g;
        }
    }
}
