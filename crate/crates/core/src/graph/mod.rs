//! Storage graphs: node sizes plus decoding sets.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub mod bounds;
pub mod capacity;
pub mod families;
pub mod maximal;
pub mod partition;

pub use bounds::{
    capacity_upper_bound, intersection_bound, wheel_bound_eval, wheel_bound_search, BoundCertificate, BoundKind,
    WheelEvalError, Witness,
};
pub use capacity::{capacity_small, CapacityResult, SmallFormula};
pub use families::{fano_graph, intersection_graph, intersection_labels, mds_graph, ones, wheel_graph};
pub use maximal::{is_strongly_maximal, MaximalityResult};

pub type NodeId = u32;

/// Node masks are `u64`.
pub const MAX_GRAPH_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub lambda: Rational,
}

/// Unchecked graph as read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGraph {
    pub nodes: Vec<Node>,
    pub decoding_sets: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateId { id: NodeId },
    NonPositiveLambda { id: NodeId },
    EmptySet { set: usize },
    UnknownNode { set: usize, id: NodeId },
    RedundantNode { id: NodeId },
    RedundantSet { set: usize, contains: usize },
    TooManyNodes { count: usize, max: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate node id {id}"),
            Violation::NonPositiveLambda { id } => write!(f, "node {id} has non-positive size"),
            Violation::EmptySet { set } => write!(f, "decoding set #{set} is empty"),
            Violation::UnknownNode { set, id } => write!(f, "decoding set #{set} names unknown node {id}"),
            Violation::RedundantNode { id } => write!(f, "node {id} is in no decoding set"),
            Violation::RedundantSet { set, contains } => {
                write!(f, "decoding set #{set} contains decoding set #{contains}")
            }
            Violation::TooManyNodes { count, max } => write!(f, "{count} nodes exceeds the limit {max}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown node id {0}")]
    UnknownId(NodeId),
    #[error("need at least two decoding sets")]
    TooFewSets,
    #[error("{n} nodes exceeds the enumeration limit {max}")]
    TooManyNodes { n: usize, max: usize },
    #[error("graph is outside the small-graph class (N <= 4 or |E| <= 3)")]
    OutsideSmallClass,
    #[error("{0}")]
    Family(String),
}

/// Validated storage graph. Decoding sets are kept sorted, in input order.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct StorageGraph {
    nodes: Vec<Node>,
    sets: Vec<Vec<NodeId>>,
    pos: BTreeMap<NodeId, usize>,
}

impl fmt::Debug for StorageGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lam: Vec<String> = self.nodes.iter().map(|n| format!("{}:{}", n.id, n.lambda)).collect();
        write!(f, "G([{}], {:?})", lam.join(", "), self.sets)
    }
}

impl TryFrom<RawGraph> for StorageGraph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        validate_graph(raw)
    }
}

impl From<StorageGraph> for RawGraph {
    fn from(g: StorageGraph) -> Self {
        RawGraph { nodes: g.nodes, decoding_sets: g.sets }
    }
}

/// Checks every structural invariant and reports all violations at once.
pub fn validate_graph(raw: RawGraph) -> Result<StorageGraph, GraphError> {
    let mut v = Vec::new();
    let mut pos = BTreeMap::new();
    for (i, n) in raw.nodes.iter().enumerate() {
        if pos.insert(n.id, i).is_some() {
            v.push(Violation::DuplicateId { id: n.id });
        }
        if !n.lambda.is_positive() {
            v.push(Violation::NonPositiveLambda { id: n.id });
        }
    }
    if raw.nodes.len() > MAX_GRAPH_NODES {
        v.push(Violation::TooManyNodes { count: raw.nodes.len(), max: MAX_GRAPH_NODES });
    }
    let mut sets: Vec<Vec<NodeId>> = Vec::with_capacity(raw.decoding_sets.len());
    for (si, s) in raw.decoding_sets.iter().enumerate() {
        let mut s = s.clone();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            v.push(Violation::EmptySet { set: si });
        }
        for &id in &s {
            if !pos.contains_key(&id) {
                v.push(Violation::UnknownNode { set: si, id });
            }
        }
        sets.push(s);
    }
    for n in &raw.nodes {
        if !sets.iter().any(|s| s.contains(&n.id)) {
            v.push(Violation::RedundantNode { id: n.id });
        }
    }
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i == j || sets[j].is_empty() {
                continue;
            }
            let sub = sets[j].iter().all(|x| sets[i].contains(x));
            // equal sets: flag only the later copy
            if sub && (sets[i] != sets[j] || i > j) {
                v.push(Violation::RedundantSet { set: i, contains: j });
                break;
            }
        }
    }
    if !v.is_empty() {
        return Err(GraphError::Invalid(v));
    }
    Ok(StorageGraph { nodes: raw.nodes, sets, pos })
}

impl StorageGraph {
    pub fn new(lambdas: &[(NodeId, Rational)], sets: &[Vec<NodeId>]) -> Result<Self, GraphError> {
        validate_graph(RawGraph {
            nodes: lambdas.iter().map(|&(id, lambda)| Node { id, lambda }).collect(),
            decoding_sets: sets.to_vec(),
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn decoding_sets(&self) -> &[Vec<NodeId>] {
        &self.sets
    }

    /// Position of `id` in node order.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.pos.get(&id).copied()
    }

    pub fn lambda(&self, id: NodeId) -> Result<Rational, GraphError> {
        self.position(id).map(|p| self.nodes[p].lambda).ok_or(GraphError::UnknownId(id))
    }

    pub fn lambdas(&self) -> Vec<Rational> {
        self.nodes.iter().map(|n| n.lambda).collect()
    }

    /// Λ(S).
    pub fn lambda_sum(&self, s: &[NodeId]) -> Result<Rational, GraphError> {
        s.iter().map(|&id| self.lambda(id)).sum()
    }

    pub fn mask(&self, s: &[NodeId]) -> Result<u64, GraphError> {
        s.iter().try_fold(0u64, |m, &id| {
            self.position(id).map(|p| m | (1 << p)).ok_or(GraphError::UnknownId(id))
        })
    }

    pub fn ids_of_mask(&self, mask: u64) -> Vec<NodeId> {
        (0..self.n()).filter(|p| mask >> p & 1 == 1).map(|p| self.nodes[p].id).collect()
    }

    pub fn set_masks(&self) -> Vec<u64> {
        self.sets.iter().map(|s| self.mask(s).expect("validated")).collect()
    }

    pub fn lambda_of_mask(&self, mask: u64) -> Rational {
        (0..self.n()).filter(|p| mask >> p & 1 == 1).map(|p| self.nodes[p].lambda).sum()
    }

    pub fn full_mask(&self) -> u64 {
        if self.n() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n()) - 1
        }
    }

    /// Same structure with new sizes, in node order.
    pub fn with_lambdas(&self, lambdas: &[Rational]) -> Result<Self, GraphError> {
        let pairs: Vec<(NodeId, Rational)> = self.nodes.iter().map(|n| n.id).zip(lambdas.iter().copied()).collect();
        if pairs.len() != self.n() {
            return Err(GraphError::Family("size vector length".into()));
        }
        Self::new(&pairs, &self.sets)
    }

    /// True iff some decoding set is contained in `mask`.
    pub fn covers(&self, mask: u64) -> bool {
        self.set_masks().iter().any(|&e| e & !mask == 0)
    }
}

/// Outcome of the pairwise-intersection test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<(Vec<NodeId>, Vec<NodeId>)>,
}

/// Positive capacity iff every two decoding sets meet.
pub fn is_feasible(g: &StorageGraph) -> Feasibility {
    let sets = g.decoding_sets();
    let masks = g.set_masks();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if masks[i] & masks[j] == 0 {
                return Feasibility { feasible: false, witness: Some((sets[i].clone(), sets[j].clone())) };
            }
        }
    }
    Feasibility { feasible: true, witness: None }
}

pub fn lambda_sum(g: &StorageGraph, s: &[NodeId]) -> Result<Rational, GraphError> {
    g.lambda_sum(s)
}
