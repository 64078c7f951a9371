//! The named graph families.

use super::{GraphError, NodeId, StorageGraph};
use crate::rational::Rational;

pub fn ones(n: usize) -> Vec<Rational> {
    vec![Rational::one(); n]
}

fn numbered(lambdas: &[Rational]) -> Vec<(NodeId, Rational)> {
    lambdas.iter().enumerate().map(|(i, &l)| (i as NodeId + 1, l)).collect()
}

/// All `k`-subsets of `1..=n` in lexicographic order.
pub fn subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `M_{N,K}`: every `K` nodes decode.
pub fn mds_graph(n: usize, k: usize, lambdas: &[Rational]) -> Result<StorageGraph, GraphError> {
    if lambdas.len() != n || k == 0 || k > n {
        return Err(GraphError::Family(format!("bad MDS parameters N={n} K={k}")));
    }
    StorageGraph::new(&numbered(lambdas), &subsets(n as u32, k))
}

/// `W_N` with hub 1: sets `{1,i}` and `{2..N}`.
pub fn wheel_graph(lambdas: &[Rational]) -> Result<StorageGraph, GraphError> {
    let n = lambdas.len() as NodeId;
    if n < 4 {
        return Err(GraphError::Family("wheel needs N >= 4".into()));
    }
    let mut sets: Vec<Vec<NodeId>> = (2..=n).map(|i| vec![1, i]).collect();
    sets.push((2..=n).collect());
    StorageGraph::new(&numbered(lambdas), &sets)
}

pub const FANO_LINES: [[NodeId; 3]; 7] =
    [[1, 2, 4], [4, 5, 6], [1, 3, 6], [2, 6, 7], [3, 4, 7], [1, 5, 7], [2, 3, 5]];

/// `F_7`: lines of the Fano plane.
pub fn fano_graph(lambdas: &[Rational]) -> Result<StorageGraph, GraphError> {
    if lambdas.len() != 7 {
        return Err(GraphError::Family("Fano graph has 7 nodes".into()));
    }
    let sets: Vec<Vec<NodeId>> = FANO_LINES.iter().map(|l| l.to_vec()).collect();
    StorageGraph::new(&numbered(lambdas), &sets)
}

/// Node labels of `⊓_{Δ,m}`: the `m`-subsets of `[Δ]`, node `i` gets the `i`-th.
pub fn intersection_labels(delta: usize, m: usize) -> Vec<Vec<u32>> {
    subsets(delta as u32, m)
}

/// `⊓_{Δ,m}`: decoding set `i` holds the nodes whose label contains `i`.
pub fn intersection_graph(delta: usize, m: usize, lambdas: &[Rational]) -> Result<StorageGraph, GraphError> {
    if !(m >= 1 && delta > m) {
        return Err(GraphError::Family(format!("need Δ > m >= 1, got Δ={delta} m={m}")));
    }
    let labels = intersection_labels(delta, m);
    if lambdas.len() != labels.len() {
        return Err(GraphError::Family(format!("⊓_{{{delta},{m}}} has {} nodes", labels.len())));
    }
    let sets: Vec<Vec<NodeId>> = (1..=delta as u32)
        .map(|i| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.contains(&i))
                .map(|(j, _)| j as NodeId + 1)
                .collect()
        })
        .collect();
    StorageGraph::new(&numbered(lambdas), &sets)
}
