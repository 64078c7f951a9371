//! Space sharing over component codes, and the achievability plans built from it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{construct_mds_uniform, construct_wheel_component, plaintext_code, CodeError, CodeJson, SecureCode};
use crate::galois::Gf;
use crate::graph::{
    bounds::is_wheel_four, capacity_small, families::binomial, is_feasible, mds_graph, wheel_graph, GraphError, NodeId,
    SmallFormula, StorageGraph,
};
use crate::rational::{lcm_denominators, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid plan: {0}")]
    Invalid(String),
}

/// `multiplicity` copies of `code`, component node `i` stored on graph node `embedding[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanComponent {
    pub code: SecureCode,
    pub multiplicity: u64,
    pub embedding: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AchievabilityPlan {
    pub graph: StorageGraph,
    pub kappa: u64,
    pub components: Vec<PlanComponent>,
}

impl AchievabilityPlan {
    pub fn achieved_k(&self) -> u64 {
        self.components.iter().map(|c| c.multiplicity * c.code.k() as u64).sum()
    }

    /// Symbols each graph node stores, in graph node order.
    pub fn usage(&self) -> BTreeMap<NodeId, u64> {
        let mut u: BTreeMap<NodeId, u64> = self.graph.node_ids().into_iter().map(|i| (i, 0)).collect();
        for c in &self.components {
            for (w, id) in c.code.node_widths().iter().zip(&c.embedding) {
                *u.entry(*id).or_default() += c.multiplicity * *w as u64;
            }
        }
        u
    }

    /// `κλ_i` minus usage, never negative for a valid plan.
    pub fn leftover(&self) -> BTreeMap<NodeId, Rational> {
        self.usage()
            .into_iter()
            .map(|(id, used)| {
                let cap = self.graph.lambda(id).expect("plan node") * self.kappa as i64;
                (id, cap - Rational::int(used as i64))
            })
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        validate_plan(self).is_ok()
    }

    pub fn to_json(&self) -> PlanJson {
        PlanJson {
            kappa: self.kappa,
            rate: plan_rate(self),
            components: self
                .components
                .iter()
                .map(|c| ComponentJson {
                    code: c.code.to_json(),
                    multiplicity: c.multiplicity,
                    embedding: c.embedding.iter().enumerate().map(|(i, &id)| ((i + 1).to_string(), id)).collect(),
                })
                .collect(),
            usage: self.usage().into_iter().map(|(id, u)| (id.to_string(), u)).collect(),
            leftover: self.leftover().into_iter().map(|(id, r)| (id.to_string(), r)).collect(),
        }
    }

    /// Rebuilds a plan against `graph`, rejecting it unless the recorded rate and usage
    /// match what the components give and the plan validates.
    pub fn from_json(j: &PlanJson, graph: &StorageGraph) -> Result<Self, PlanError> {
        let mut components = Vec::new();
        for c in &j.components {
            let code = SecureCode::from_json(&c.code)?;
            let mut embedding = Vec::new();
            for i in 1..=code.num_nodes() {
                let id = c
                    .embedding
                    .get(&i.to_string())
                    .ok_or_else(|| PlanError::Invalid(format!("component node {i} has no embedding")))?;
                embedding.push(*id);
            }
            components.push(PlanComponent { code, multiplicity: c.multiplicity, embedding });
        }
        let plan = AchievabilityPlan { graph: graph.clone(), kappa: j.kappa, components };
        validate_plan(&plan)?;
        let fresh = plan.to_json();
        if fresh.rate != j.rate || fresh.usage != j.usage {
            return Err(PlanError::Invalid("recorded rate or usage does not match the components".into()));
        }
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub code: CodeJson,
    pub multiplicity: u64,
    pub embedding: BTreeMap<String, NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanJson {
    pub kappa: u64,
    pub rate: Rational,
    pub components: Vec<ComponentJson>,
    pub usage: BTreeMap<String, u64>,
    #[serde(default)]
    pub leftover: BTreeMap<String, Rational>,
}

pub fn plan_rate(plan: &AchievabilityPlan) -> Rational {
    if plan.kappa == 0 {
        return Rational::zero();
    }
    Rational::new(plan.achieved_k() as i64, plan.kappa as i64)
}

/// Usage fits `κλ_i`, and every component decodes and stays secret for every graph decoding set.
pub fn validate_plan(plan: &AchievabilityPlan) -> Result<(), PlanError> {
    if plan.kappa == 0 {
        return Err(PlanError::Invalid("kappa must be positive".into()));
    }
    for (id, left) in plan.leftover() {
        if left < 0 {
            return Err(PlanError::Invalid(format!("node {id} is over capacity by {}", -left)));
        }
    }
    for (j, c) in plan.components.iter().enumerate() {
        if c.embedding.len() != c.code.num_nodes() {
            return Err(PlanError::Invalid(format!("component {j} embeds {} nodes", c.embedding.len())));
        }
        if let Some(id) = c.embedding.iter().find(|id| plan.graph.position(**id).is_none()) {
            return Err(PlanError::Invalid(format!("component {j} uses unknown node {id}")));
        }
        let mut seen = c.embedding.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != c.embedding.len() {
            return Err(PlanError::Invalid(format!("component {j} maps two nodes to one")));
        }
        if !c.code.preconditions_hold() {
            return Err(PlanError::Invalid(format!("component {j} is not a valid code")));
        }
        for e in plan.graph.decoding_sets() {
            let d: Vec<usize> = (0..c.embedding.len()).filter(|&i| e.contains(&c.embedding[i])).collect();
            let dc: Vec<usize> = (0..c.embedding.len()).filter(|i| !d.contains(i)).collect();
            let dr = c.code.decode_ranks(&d);
            let sr = c.code.security_ranks(&dc);
            if dr.stacked - dr.noise != c.code.k() || sr.stacked != sr.noise {
                return Err(PlanError::Invalid(format!("component {j} fails decoding set {e:?}")));
            }
        }
    }
    Ok(())
}

fn multiplicity(weight: Rational, kappa: i64) -> u64 {
    let t = weight * kappa;
    debug_assert!(t.is_integer() && t >= 0);
    t.numer() as u64
}

fn need_field(field: &Gf, need: usize) -> Result<(), PlanError> {
    if (field.q() as usize) < need {
        return Err(CodeError::FieldTooSmall { q: field.q(), need: need as u32 }.into());
    }
    Ok(())
}

/// Node ids sorted by `(λ, id)`.
fn sorted_by_lambda(g: &StorageGraph, ids: &[NodeId]) -> Vec<NodeId> {
    let mut v = ids.to_vec();
    v.sort_by_key(|&i| (g.lambda(i).expect("known node"), i));
    v
}

/// Layered space sharing over uniform MDS codes on `M_{N,K}`.
pub fn mds_nonuniform_plan(lambdas: &[Rational], n: usize, k: usize, field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    if lambdas.len() != n {
        return Err(PlanError::Unsupported(format!("{} sizes for {n} nodes", lambdas.len())));
    }
    let g = mds_graph(n, k, lambdas)?;
    mds_plan_on(g, k, field)
}

fn mds_plan_on(g: StorageGraph, k: usize, field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    let n = g.n();
    if 2 * k <= n {
        return Err(PlanError::Unsupported(format!("M_{{{n},{k}}} is infeasible")));
    }
    need_field(field, n)?;
    let order = sorted_by_lambda(&g, &g.node_ids());
    let lam: Vec<Rational> = order.iter().map(|&i| g.lambda(i).expect("known")).collect();
    let kappa = lcm_denominators(&lam);
    let mut components = Vec::new();
    for j in 0..2 * k - n {
        let prev = if j == 0 { Rational::zero() } else { lam[j - 1] };
        let code = construct_mds_uniform(n - j, k - j, field)?;
        components.push(PlanComponent {
            code,
            multiplicity: multiplicity(lam[j] - prev, kappa),
            embedding: order[j..].to_vec(),
        });
    }
    Ok(AchievabilityPlan { graph: g, kappa: kappa as u64, components })
}

/// Space sharing over the wheel component codes.
pub fn wheel_plan(lambdas: &[Rational], n: usize, field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    if lambdas.len() != n {
        return Err(PlanError::Unsupported(format!("{} sizes for {n} nodes", lambdas.len())));
    }
    let g = wheel_graph(lambdas)?;
    let spokes: Vec<NodeId> = (2..=n as NodeId).collect();
    wheel_plan_on(g, 1, &spokes, field)
}

/// `min(λ1, λ2, (λ1 + (N−3)λ2)/(2N−5))`, or `min(λ1, λ2, (λ1+λ2)/3, (λ1+λ2+λ3)/5)` for `N = 5`,
/// with spokes sorted.
pub fn wheel_capacity_formula(l1: Rational, spokes_sorted: &[Rational]) -> Rational {
    let n = spokes_sorted.len() as i64 + 1;
    let l2 = spokes_sorted[0];
    if n == 5 {
        return l1.min(l2).min((l1 + l2) / 3).min((l1 + l2 + spokes_sorted[1]) / 5);
    }
    l1.min(l2).min((l1 + l2 * (n - 3)) / (2 * n - 5))
}

fn wheel_plan_on(g: StorageGraph, hub: NodeId, spokes: &[NodeId], field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    let n = spokes.len() + 1;
    let spokes = sorted_by_lambda(&g, spokes);
    let l = |i: NodeId| g.lambda(i).expect("known node");
    let l1 = l(hub);
    let s: Vec<Rational> = spokes.iter().map(|&i| l(i)).collect();
    let l2 = s[0];
    let mut embedding = vec![hub];
    embedding.extend(&spokes);

    // (variant, weight)
    let weights: Vec<(u8, Rational)> = if n == 5 {
        let l3 = s[1];
        let t3 = (l1 + l2) / 3;
        let t4 = (l1 + l2 + l3) / 5;
        let min = wheel_capacity_formula(l1, &s);
        if t4 == min {
            vec![(1, (l1 * 2 + l2 * 2 - l3 * 3) / 5), (2, (l2 * 4 - l1 - l3) / 5), (3, l3 - l2)]
        } else if t3 == min {
            vec![(2, (l2 * 2 - l1) / 3), (3, (l1 * 2 - l2) / 3)]
        } else if l2 == min {
            if l1 <= l3 || (l2 * 2 <= l3 && l3 <= l1) {
                vec![(3, l2)]
            } else {
                vec![(1, l2 * 2 - l3), (3, l3 - l2)]
            }
        } else {
            vec![(2, l1)]
        }
    } else {
        if n > 5 && s[..n - 3].iter().any(|&x| x != l2) {
            return Err(PlanError::Unsupported(
                "wheel plans for N >= 6 need the smallest N-3 spokes to be equal".into(),
            ));
        }
        let m = 2 * n as i64 - 5;
        if l1 * 2 < l2 {
            vec![(2, l1)]
        } else if l2 * (n as i64 - 2) < l1 {
            vec![(1, l2)]
        } else {
            vec![(1, (l1 * 2 - l2) / m), (2, (l2 * (n as i64 - 2) - l1) / m)]
        }
    };

    for &(v, _) in weights.iter().filter(|w| w.1.is_positive()) {
        need_field(field, if v == 1 { n } else if v == 2 && n > 4 { n - 1 } else { 0 })?;
    }
    let mut all: Vec<Rational> = weights.iter().map(|w| w.1).collect();
    all.push(l1);
    let kappa = lcm_denominators(&all);
    let mut components = Vec::new();
    for (v, w) in weights.into_iter().filter(|w| w.1.is_positive()) {
        components.push(PlanComponent {
            code: construct_wheel_component(n, v, field)?,
            multiplicity: multiplicity(w, kappa),
            embedding: embedding.clone(),
        });
    }
    Ok(AchievabilityPlan { graph: g, kappa: kappa as u64, components })
}

fn is_mds_shape(g: &StorageGraph) -> Option<usize> {
    let sets = g.decoding_sets();
    let k = sets[0].len();
    let uniform = sets.iter().all(|s| s.len() == k);
    (uniform && sets.len() == binomial(g.n(), k)).then_some(k)
}

fn wheel_hub(g: &StorageGraph) -> Option<NodeId> {
    let ids = g.node_ids();
    if ids.len() < 4 || g.decoding_sets().len() != ids.len() {
        return None;
    }
    let has = |s: &[NodeId]| {
        let mut s = s.to_vec();
        s.sort_unstable();
        g.decoding_sets().iter().any(|e| {
            let mut e = e.clone();
            e.sort_unstable();
            e == s
        })
    };
    ids.iter().copied().find(|&h| {
        let spokes: Vec<NodeId> = ids.iter().copied().filter(|&x| x != h).collect();
        spokes.iter().all(|&s| has(&[h, s])) && has(&spokes)
    })
}

/// [`mds_nonuniform_plan`] for a graph that is `M_{N,K}` up to node naming.
pub fn mds_plan_for_graph(g: &StorageGraph, field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    let k = is_mds_shape(g).ok_or_else(|| PlanError::Unsupported("graph is not an MDS graph".into()))?;
    mds_plan_on(g.clone(), k, field)
}

/// [`wheel_plan`] for a graph that is a wheel up to node naming.
pub fn wheel_plan_for_graph(g: &StorageGraph, field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    let hub = wheel_hub(g).ok_or_else(|| PlanError::Unsupported("graph is not a wheel graph".into()))?;
    let spokes: Vec<NodeId> = g.node_ids().into_iter().filter(|&x| x != hub).collect();
    wheel_plan_on(g.clone(), hub, &spokes, field)
}

/// Spreads `t` symbols of each super node over that group's nodes, filling nodes in order.
fn spread(t: u64, groups: &[Vec<(NodeId, u64)>]) -> Vec<(Vec<NodeId>, u64)> {
    let mut cursor = vec![(0usize, 0u64); groups.len()];
    let mut out: Vec<(Vec<NodeId>, u64)> = Vec::new();
    let mut done = 0;
    while done < t {
        // advance past full nodes
        for (c, grp) in cursor.iter_mut().zip(groups) {
            while c.1 == grp[c.0].1 {
                *c = (c.0 + 1, 0);
            }
        }
        let run = cursor
            .iter()
            .zip(groups)
            .map(|(c, grp)| grp[c.0].1 - c.1)
            .min()
            .expect("groups")
            .min(t - done);
        let nodes: Vec<NodeId> = cursor.iter().zip(groups).map(|(c, grp)| grp[c.0].0).collect();
        for c in cursor.iter_mut() {
            c.1 += run;
        }
        out.push((nodes, run));
        done += run;
    }
    out
}

/// Capacity-achieving plan for graphs with `N ≤ 4` or at most three decoding sets.
pub fn small_graph_plan(g: &StorageGraph, field: &Gf) -> Result<AchievabilityPlan, PlanError> {
    let cap = capacity_small(g)?;
    match cap.formula {
        SmallFormula::Infeasible => {
            let w = is_feasible(g).witness.expect("infeasible");
            return Err(CodeError::Infeasible(w.0, w.1).into());
        }
        SmallFormula::WheelFour => {
            let hub = g.node_ids().into_iter().find(|&h| is_wheel_four(g, h)).expect("wheel hub");
            let spokes: Vec<NodeId> = g.node_ids().into_iter().filter(|&x| x != hub).collect();
            return wheel_plan_on(g.clone(), hub, &spokes, field);
        }
        SmallFormula::MdsFourThree => return mds_plan_on(g.clone(), 3, field),
        _ => {}
    }
    let lam = g.lambdas();
    let kappa = lcm_denominators(&lam);
    let cap_of = |id: NodeId| multiplicity(g.lambda(id).expect("known"), kappa);
    let sets = g.decoding_sets();
    let in_set = |id: NodeId, s: usize| sets.get(s).is_some_and(|e| e.contains(&id));
    let m = sets.len();
    let mut components = Vec::new();
    let direct = plaintext_code(field, 1, 1);
    for id in g.node_ids() {
        if (0..m).all(|s| in_set(id, s)) {
            components.push(PlanComponent { code: direct.clone(), multiplicity: cap_of(id), embedding: vec![id] });
        }
    }
    if m == 3 {
        // super node j holds the nodes in every set except set 2 - j
        let groups: Vec<Vec<(NodeId, u64)>> = (0..3)
            .map(|skip| {
                g.node_ids()
                    .into_iter()
                    .filter(|&id| (0..3).all(|s| in_set(id, s) != (s == 2 - skip)))
                    .map(|id| (id, cap_of(id)))
                    .collect()
            })
            .collect();
        let t = groups.iter().map(|grp| grp.iter().map(|x| x.1).sum::<u64>()).min().expect("three groups");
        if t > 0 {
            need_field(field, 3)?;
            let code = construct_mds_uniform(3, 2, field)?;
            for (embedding, run) in spread(t, &groups) {
                components.push(PlanComponent { code: code.clone(), multiplicity: run, embedding });
            }
        }
    }
    Ok(AchievabilityPlan { graph: g.clone(), kappa: kappa as u64, components })
}
