//! Strong maximality: every node subset fully includes or avoids some decoding set.

use serde::Serialize;

use super::{is_feasible, GraphError, NodeId, StorageGraph};

pub const DEFAULT_MAXIMAL_MAX_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalityResult {
    pub strongly_maximal: bool,
    pub infeasible: bool,
    /// Smallest violating subset in bitmask order over node positions.
    pub witness: Option<Vec<NodeId>>,
}

/// True iff no subset `S` splits every decoding set.
pub fn is_strongly_maximal(g: &StorageGraph, max_nodes: usize) -> Result<MaximalityResult, GraphError> {
    if g.n() > max_nodes {
        return Err(GraphError::TooManyNodes { n: g.n(), max: max_nodes });
    }
    if !is_feasible(g).feasible {
        return Ok(MaximalityResult { strongly_maximal: false, infeasible: true, witness: None });
    }
    let masks = g.set_masks();
    for s in 0..=g.full_mask() {
        if !masks.iter().any(|&e| s & e == 0 || s & e == e) {
            return Ok(MaximalityResult {
                strongly_maximal: false,
                infeasible: false,
                witness: Some(g.ids_of_mask(s)),
            });
        }
    }
    Ok(MaximalityResult { strongly_maximal: true, infeasible: false, witness: None })
}

/// A witness must meet every decoding set without containing one.
pub fn witness_is_valid(g: &StorageGraph, s: &[NodeId]) -> bool {
    let Ok(m) = g.mask(s) else { return false };
    g.set_masks().iter().all(|&e| m & e != 0 && m & e != e)
}
