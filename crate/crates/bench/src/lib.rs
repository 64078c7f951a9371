//! Shared fixtures for the benchmarks.

use qcap_core::codes::{construct_fano, construct_intersection, construct_mds_uniform};
use qcap_core::graph::{fano_graph, intersection_graph, mds_graph, ones, wheel_graph};
use qcap_core::{Gf, MatrixFq, Rational, SecureCode, StorageGraph};

pub fn field(q: u32) -> Gf {
    Gf::of_order(q).expect("field")
}

/// Deterministic dense `n x n` matrix, filled by a small LCG.
pub fn dense_matrix(f: &Gf, n: usize, seed: u64) -> MatrixFq {
    let mut s = seed;
    let data = (0..n * n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % f.q() as u64) as u32
        })
        .collect();
    MatrixFq::new(f, n, n, data).expect("matrix")
}

pub fn fano() -> (SecureCode, StorageGraph) {
    (construct_fano(&field(2)).unwrap(), fano_graph(&ones(7)).unwrap())
}

pub fn mds(n: usize, k: usize, q: u32) -> (SecureCode, StorageGraph) {
    (construct_mds_uniform(n, k, &field(q)).unwrap(), mds_graph(n, k, &ones(n)).unwrap())
}

pub fn intersection(delta: usize, m: usize, q: u32) -> (SecureCode, StorageGraph) {
    let build = construct_intersection(delta, m, &field(q), 1, 20).unwrap();
    let nodes = qcap_core::graph::families::binomial(delta, m);
    (build.code, intersection_graph(delta, m, &ones(nodes)).unwrap())
}

/// Wheel with hub size `hub` and unit spokes.
pub fn wheel(n: usize, hub: i64) -> StorageGraph {
    let mut l = ones(n);
    l[0] = Rational::int(hub);
    wheel_graph(&l).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(dense_matrix(&field(7), 5, 3), dense_matrix(&field(7), 5, 3));
        assert_eq!(fano().1.n(), 7);
        assert_eq!(mds(5, 3, 5).0.k(), 1);
        assert_eq!(intersection(4, 2, 8).1.n(), 6);
        assert_eq!(wheel(6, 2).n(), 6);
    }
}
