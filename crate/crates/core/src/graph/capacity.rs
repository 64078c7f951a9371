//! Exact capacity of small graphs (N ≤ 4 or at most three decoding sets).

use serde::{Deserialize, Serialize};

use super::bounds::{is_wheel_four, wheel_four_value, BoundCertificate, BoundKind, Witness};
use super::{is_feasible, GraphError, StorageGraph};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallFormula {
    Infeasible,
    SingleSet,
    TwoSets,
    SevenSet,
    WheelFour,
    MdsFourThree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: Rational,
    pub formula: SmallFormula,
    pub certificate: BoundCertificate,
}

pub fn is_small(g: &StorageGraph) -> bool {
    g.n() <= 4 || g.decoding_sets().len() <= 3
}

fn result(value: Rational, formula: SmallFormula, witness: Witness) -> CapacityResult {
    CapacityResult { value, formula, certificate: BoundCertificate { kind: BoundKind::SmallExact, value, witness } }
}

pub fn capacity_small(g: &StorageGraph) -> Result<CapacityResult, GraphError> {
    if !is_small(g) {
        return Err(GraphError::OutsideSmallClass);
    }
    let sets = g.decoding_sets();
    let feas = is_feasible(g);
    if let Some((a, b)) = feas.witness {
        return Ok(result(Rational::zero(), SmallFormula::Infeasible, Witness::Pair { first: a, second: b }));
    }
    let pair = |a: &Vec<u32>, b: &Vec<u32>| Witness::Pair { first: a.clone(), second: b.clone() };
    match sets.len() {
        1 => {
            let w = pair(&sets[0], &sets[0]);
            return Ok(result(g.lambda_sum(&sets[0])?, SmallFormula::SingleSet, w));
        }
        2 => {
            let w = pair(&sets[0], &sets[1]);
            let v = w.evaluate(g).map_err(GraphError::Family)?;
            return Ok(result(v, SmallFormula::TwoSets, w));
        }
        3 => {
            let w = Witness::SevenSet { sets: [sets[0].clone(), sets[1].clone(), sets[2].clone()] };
            let v = w.evaluate(g).map_err(GraphError::Family)?;
            return Ok(result(v, SmallFormula::SevenSet, w));
        }
        _ => {}
    }
    // N = 4 with at least four pairwise-intersecting sets
    for hub in g.node_ids() {
        if is_wheel_four(g, hub) {
            let spokes: Vec<u32> = g.node_ids().into_iter().filter(|&x| x != hub).collect();
            let v = wheel_four_value(g, hub, &spokes)?;
            return Ok(result(v, SmallFormula::WheelFour, Witness::WheelFour { hub, spokes }));
        }
    }
    if g.n() == 4 && sets.len() == 4 && sets.iter().all(|s| s.len() == 3) {
        // Λ of the two smallest nodes, as the intersection of two triples
        let mut ids = g.node_ids();
        ids.sort_by_key(|&i| (g.lambda(i).expect("known"), i));
        let (a, b, c, d) = (ids[0], ids[1], ids[2], ids[3]);
        let mut e1 = vec![a, b, c];
        let mut e2 = vec![a, b, d];
        e1.sort_unstable();
        e2.sort_unstable();
        let (first, second) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let w = Witness::Pair { first, second };
        let v = w.evaluate(g).map_err(GraphError::Family)?;
        return Ok(result(v, SmallFormula::MdsFourThree, w));
    }
    Err(GraphError::OutsideSmallClass)
}
