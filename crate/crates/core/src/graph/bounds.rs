//! Intersection and wheel upper bounds with checkable witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::partition::for_each_partition;
use super::{GraphError, NodeId, StorageGraph};
use crate::rational::Rational;

pub const DEFAULT_WHEEL_MAX_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Intersection,
    Wheel,
    SmallExact,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Intersection => "intersection",
            BoundKind::Wheel => "wheel",
            BoundKind::SmallExact => "small-exact",
        })
    }
}

/// Data from which a bound value can be recomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Λ(first ∩ second). A set paired with itself gives Λ of the set.
    Pair { first: Vec<NodeId>, second: Vec<NodeId> },
    /// Hub is `parts[0]`.
    Wheel { parts: Vec<Vec<NodeId>>, k: usize },
    /// Three decoding sets; value is Λ(Q123) + min of the three two-way-only groups.
    SevenSet { sets: [Vec<NodeId>; 3] },
    /// A four-node wheel given by its hub.
    WheelFour { hub: NodeId, spokes: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub value: Rational,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WheelEvalError {
    #[error("not a partition of the node set: {0}")]
    NotPartition(String),
    #[error("k = {k} outside [2, {}]", .n.saturating_sub(2))]
    KOutOfRange { k: usize, n: usize },
    #[error("hub plus part {part} contains no decoding set")]
    HubCoverage { part: usize },
    #[error("the non-hub parts together contain no decoding set")]
    TailCoverage,
}

fn is_decoding_set(g: &StorageGraph, s: &[NodeId]) -> bool {
    let mut s = s.to_vec();
    s.sort_unstable();
    g.decoding_sets().contains(&s)
}

fn intersect(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

/// The seven-set split of three decoding sets: (Q123, [Q12¬3, Q1¬23, Q¬123]).
pub fn seven_set_groups(g: &StorageGraph, sets: &[Vec<NodeId>; 3]) -> Result<(u64, [u64; 3]), GraphError> {
    let m0 = g.mask(&sets[0])?;
    let m1 = g.mask(&sets[1])?;
    let m2 = g.mask(&sets[2])?;
    Ok((m0 & m1 & m2, [m0 & m1 & !m2, m0 & !m1 & m2, !m0 & m1 & m2]))
}

pub fn wheel_four_value(g: &StorageGraph, hub: NodeId, spokes: &[NodeId]) -> Result<Rational, GraphError> {
    let l1 = g.lambda(hub)?;
    let l2 = spokes
        .iter()
        .map(|&s| g.lambda(s))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .ok_or(GraphError::Family("wheel without spokes".into()))?;
    Ok(l1.min(l2).min((l1 + l2) / 3))
}

/// True iff `g` is the four-node wheel with this hub.
pub fn is_wheel_four(g: &StorageGraph, hub: NodeId) -> bool {
    if g.n() != 4 || g.decoding_sets().len() != 4 || g.position(hub).is_none() {
        return false;
    }
    let spokes: Vec<NodeId> = g.node_ids().into_iter().filter(|&x| x != hub).collect();
    spokes.iter().all(|&s| is_decoding_set(g, &[hub, s])) && is_decoding_set(g, &spokes)
}

impl Witness {
    /// Recomputes the value, checking the witness against `g`.
    pub fn evaluate(&self, g: &StorageGraph) -> Result<Rational, String> {
        match self {
            Witness::Pair { first, second } => {
                if !is_decoding_set(g, first) || !is_decoding_set(g, second) {
                    return Err("witness pair is not a pair of decoding sets".into());
                }
                g.lambda_sum(&intersect(first, second)).map_err(|e| e.to_string())
            }
            Witness::Wheel { parts, k } => wheel_bound_eval(g, parts, *k).map_err(|e| e.to_string()),
            Witness::SevenSet { sets } => {
                if !sets.iter().all(|s| is_decoding_set(g, s)) {
                    return Err("seven-set witness names a non-decoding set".into());
                }
                let (common, groups) = seven_set_groups(g, sets).map_err(|e| e.to_string())?;
                let tail = groups.iter().map(|&m| g.lambda_of_mask(m)).min().expect("three groups");
                Ok(g.lambda_of_mask(common) + tail)
            }
            Witness::WheelFour { hub, spokes } => {
                let mut expect: Vec<NodeId> = g.node_ids().into_iter().filter(|x| x != hub).collect();
                expect.sort_unstable();
                let mut got = spokes.clone();
                got.sort_unstable();
                if got != expect || !is_wheel_four(g, *hub) {
                    return Err("graph is not a four-node wheel with this hub".into());
                }
                wheel_four_value(g, *hub, spokes).map_err(|e| e.to_string())
            }
        }
    }
}

impl BoundCertificate {
    pub fn recheck(&self, g: &StorageGraph) -> Result<Rational, String> {
        self.witness.evaluate(g)
    }

    /// True iff the witness reproduces the claimed value.
    pub fn is_valid(&self, g: &StorageGraph) -> bool {
        self.recheck(g).is_ok_and(|v| v == self.value)
    }
}

/// Minimum of Λ(e_i ∩ e_j) over distinct pairs; ties go to the lexicographically smallest pair.
pub fn intersection_bound(g: &StorageGraph) -> Result<BoundCertificate, GraphError> {
    let sets = g.decoding_sets();
    if sets.len() < 2 {
        return Err(GraphError::TooFewSets);
    }
    let masks = g.set_masks();
    let mut best: Option<(Rational, &Vec<NodeId>, &Vec<NodeId>)> = None;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let v = g.lambda_of_mask(masks[i] & masks[j]);
            let (a, b) = if sets[i] <= sets[j] { (&sets[i], &sets[j]) } else { (&sets[j], &sets[i]) };
            let better = match &best {
                None => true,
                Some((bv, ba, bb)) => (v, a, b) < (*bv, *ba, *bb),
            };
            if better {
                best = Some((v, a, b));
            }
        }
    }
    let (value, a, b) = best.expect("at least one pair");
    Ok(BoundCertificate {
        kind: BoundKind::Intersection,
        value,
        witness: Witness::Pair { first: a.clone(), second: b.clone() },
    })
}

/// Non-hub part indices sorted by Λ, ties by smallest member id.
fn tail_order(g: &StorageGraph, masks: &[u64], hub: usize) -> Vec<usize> {
    let min_id = |m: u64| g.ids_of_mask(m).into_iter().min().unwrap_or(NodeId::MAX);
    let mut idx: Vec<usize> = (0..masks.len()).filter(|&i| i != hub).collect();
    idx.sort_by_key(|&i| (g.lambda_of_mask(masks[i]), min_id(masks[i])));
    idx
}

/// Evaluates the wheel bound for one partition (hub first) and `k`.
pub fn wheel_bound_eval(g: &StorageGraph, partition: &[Vec<NodeId>], k: usize) -> Result<Rational, WheelEvalError> {
    let mut seen = 0u64;
    let mut masks = Vec::with_capacity(partition.len());
    for (i, part) in partition.iter().enumerate() {
        if part.is_empty() {
            return Err(WheelEvalError::NotPartition(format!("part {} is empty", i + 1)));
        }
        let m = g.mask(part).map_err(|e| WheelEvalError::NotPartition(e.to_string()))?;
        if m & seen != 0 || m.count_ones() as usize != part.len() {
            return Err(WheelEvalError::NotPartition(format!("part {} overlaps another", i + 1)));
        }
        seen |= m;
        masks.push(m);
    }
    if seen != g.full_mask() {
        return Err(WheelEvalError::NotPartition("parts do not cover every node".into()));
    }
    let n = masks.len();
    if k < 2 || k + 2 > n {
        return Err(WheelEvalError::KOutOfRange { k, n });
    }
    let hub = masks[0];
    for (i, &m) in masks.iter().enumerate().skip(1) {
        if !g.covers(hub | m) {
            return Err(WheelEvalError::HubCoverage { part: i + 1 });
        }
    }
    if !g.covers(g.full_mask() & !hub) {
        return Err(WheelEvalError::TailCoverage);
    }
    let order = tail_order(g, &masks, 0);
    let total = g.lambda_of_mask(hub) + order[..k - 1].iter().map(|&i| g.lambda_of_mask(masks[i])).sum();
    Ok(total / (2 * k as i64 - 1))
}

/// Minimum wheel bound over all partitions, hubs and `k`; `None` if no configuration is valid.
pub fn wheel_bound_search(g: &StorageGraph, max_nodes: usize) -> Result<Option<BoundCertificate>, GraphError> {
    if g.n() > max_nodes {
        return Err(GraphError::TooManyNodes { n: g.n(), max: max_nodes });
    }
    let set_masks = g.set_masks();
    let covers = |m: u64| set_masks.iter().any(|&e| e & !m == 0);
    let full = g.full_mask();
    let mut best: Option<(Rational, Vec<Vec<NodeId>>, usize)> = None;
    for_each_partition(g.n(), |blocks| {
        let n = blocks.len();
        if n < 4 {
            return;
        }
        for hub in 0..n {
            let h = blocks[hub];
            if !covers(full & !h) {
                continue;
            }
            if !(0..n).all(|i| i == hub || covers(h | blocks[i])) {
                continue;
            }
            let order = tail_order(g, blocks, hub);
            let mut parts: Vec<Vec<NodeId>> = vec![g.ids_of_mask(h)];
            parts.extend(order.iter().map(|&i| g.ids_of_mask(blocks[i])));
            let mut sum = g.lambda_of_mask(h);
            for k in 2..=n - 2 {
                sum = sum + g.lambda_of_mask(blocks[order[k - 2]]);
                let v = sum / (2 * k as i64 - 1);
                let better = match &best {
                    None => true,
                    Some((bv, bp, bk)) => (v, &parts, k) < (*bv, bp, *bk),
                };
                if better {
                    best = Some((v, parts.clone(), k));
                }
            }
        }
    });
    Ok(best.map(|(value, parts, k)| BoundCertificate {
        kind: BoundKind::Wheel,
        value,
        witness: Witness::Wheel { parts, k },
    }))
}

/// Best of the intersection and wheel bounds; 0 when two decoding sets are disjoint.
pub fn capacity_upper_bound(g: &StorageGraph) -> BoundCertificate {
    capacity_upper_bound_with(g, DEFAULT_WHEEL_MAX_NODES)
}

pub fn capacity_upper_bound_with(g: &StorageGraph, wheel_max_nodes: usize) -> BoundCertificate {
    let sets = g.decoding_sets();
    let inter = match intersection_bound(g) {
        Ok(c) => c,
        Err(_) => {
            let e = sets[0].clone();
            return BoundCertificate {
                kind: BoundKind::Intersection,
                value: g.lambda_sum(&e).expect("validated"),
                witness: Witness::Pair { first: e.clone(), second: e },
            };
        }
    };
    if inter.value.is_zero() {
        return inter;
    }
    match wheel_bound_search(g, wheel_max_nodes) {
        Ok(Some(w)) if w.value < inter.value => w,
        _ => inter,
    }
}
