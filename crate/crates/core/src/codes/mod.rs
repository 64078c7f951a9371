//! Classical secure-storage codes `Y = aA + bB` and their rank checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{FieldSpec, GaloisError, Gf};
use crate::graph::{NodeId, StorageGraph};
use crate::matrix::{MatrixError, MatrixFq, MatrixJson};
use crate::rational::Rational;

pub mod families;
pub mod oracle;

pub use families::{
    construct_fano, construct_feasibility, construct_intersection, construct_mds_uniform, construct_wheel_component,
    fano_matrices, feasibility_kappa, intersection_field_bound, intersection_fig5_fixture, plaintext_code, w4_fixture,
    IntersectionBuild,
};
pub use oracle::{entropy_oracle, entropy_oracle_all, OracleVerdict, DEFAULT_ORACLE_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error("code has {code} nodes but the graph has {graph}")]
    WidthMismatch { code: usize, graph: usize },
    #[error("field of order {q} is too small, need at least {need}")]
    FieldTooSmall { q: u32, need: u32 },
    #[error("this construction needs a field of even characteristic")]
    OddCharacteristic,
    #[error("graph is infeasible: decoding sets {0:?} and {1:?} are disjoint")]
    Infeasible(Vec<NodeId>, Vec<NodeId>),
    #[error("no valid matrix after {tries} draws from seed {seed}")]
    RetriesExhausted { seed: u64, tries: u32 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("enumeration needs {size} points, limit is {limit}")]
    LimitExceeded { size: u128, limit: u128 },
}

/// Secret length `k`, noise length `delta`, node `i` owns `node_widths[i]` consecutive columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecureCode {
    field: Gf,
    k: usize,
    delta: usize,
    kappa: u64,
    node_widths: Vec<usize>,
    a: MatrixFq,
    b: MatrixFq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeJson {
    pub field: FieldSpec,
    pub k: usize,
    pub delta: usize,
    pub kappa: u64,
    pub node_widths: Vec<usize>,
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "B")]
    pub b: MatrixJson,
}

impl Serialize for SecureCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SecureCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = CodeJson::deserialize(d)?;
        SecureCode::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl SecureCode {
    pub fn new(
        field: &Gf,
        k: usize,
        delta: usize,
        kappa: u64,
        node_widths: Vec<usize>,
        a: MatrixFq,
        b: MatrixFq,
    ) -> Result<Self, CodeError> {
        let n: usize = node_widths.iter().sum();
        if a.rows() != k || b.rows() != delta {
            return Err(CodeError::Shape(format!(
                "A is {}x{}, B is {}x{}, expected k = {k}, delta = {delta}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        if a.cols() != n || b.cols() != n {
            return Err(CodeError::Shape(format!("widths sum to {n}, A has {} columns, B has {}", a.cols(), b.cols())));
        }
        if a.field() != field || b.field() != field {
            return Err(CodeError::Matrix(MatrixError::FieldMismatch));
        }
        if kappa == 0 {
            return Err(CodeError::Shape("kappa must be positive".into()));
        }
        Ok(SecureCode { field: field.clone(), k, delta, kappa, node_widths, a, b })
    }

    /// Builds from the stacked `(A;B)`, top `k` rows are `A`.
    pub fn from_stacked(
        field: &Gf,
        k: usize,
        kappa: u64,
        node_widths: Vec<usize>,
        stacked: &MatrixFq,
    ) -> Result<Self, CodeError> {
        if stacked.rows() < k {
            return Err(CodeError::Shape("fewer rows than k".into()));
        }
        let a = stacked.row_range(0, k);
        let b = stacked.row_range(k, stacked.rows());
        Self::new(field, k, stacked.rows() - k, kappa, node_widths, a, b)
    }

    pub fn from_json(j: &CodeJson) -> Result<Self, CodeError> {
        let f = Gf::from_spec(&j.field)?;
        let a = MatrixFq::from_json(&f, &j.a)?;
        let b = MatrixFq::from_json(&f, &j.b)?;
        Self::new(&f, j.k, j.delta, j.kappa, j.node_widths.clone(), a, b)
    }

    pub fn to_json(&self) -> CodeJson {
        CodeJson {
            field: self.field.spec().clone(),
            k: self.k,
            delta: self.delta,
            kappa: self.kappa,
            node_widths: self.node_widths.clone(),
            a: self.a.to_json(),
            b: self.b.to_json(),
        }
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn node_widths(&self) -> &[usize] {
        &self.node_widths
    }

    pub fn num_nodes(&self) -> usize {
        self.node_widths.len()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn a(&self) -> &MatrixFq {
        &self.a
    }

    pub fn b(&self) -> &MatrixFq {
        &self.b
    }

    pub fn stacked(&self) -> MatrixFq {
        self.a.vstack(&self.b).expect("same width")
    }

    /// Owning node position of every column.
    pub fn column_owner(&self) -> Vec<usize> {
        self.node_widths.iter().enumerate().flat_map(|(i, &w)| std::iter::repeat_n(i, w)).collect()
    }

    /// Columns owned by the given node positions, in node order.
    pub fn columns_of(&self, nodes: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, &w) in self.node_widths.iter().enumerate() {
            if nodes.contains(&i) {
                out.extend(start..start + w);
            }
            start += w;
        }
        out
    }

    pub fn with_kappa(mut self, kappa: u64) -> Self {
        self.kappa = kappa.max(1);
        self
    }

    /// Same matrices read over another field (entries must fit).
    pub fn reinterpret(&self, field: &Gf) -> Result<Self, CodeError> {
        Self::new(
            field,
            self.k,
            self.delta,
            self.kappa,
            self.node_widths.clone(),
            self.a.reinterpret(field)?,
            self.b.reinterpret(field)?,
        )
    }

    /// `rank(A) = k` and `rank(A;B) = k + δ`.
    pub fn preconditions_hold(&self) -> bool {
        self.a.rank() == self.k && self.stacked().rank() == self.k + self.delta
    }

    /// Decoding ranks for a set of node positions.
    pub fn decode_ranks(&self, nodes: &[usize]) -> RankPair {
        let cols = self.columns_of(nodes);
        let full = self.stacked().select_columns(&cols).expect("in range").rank();
        let noise = self.b.select_columns(&cols).expect("in range").rank();
        RankPair { stacked: full, noise }
    }

    /// Security ranks for the erased node positions.
    pub fn security_ranks(&self, erased: &[usize]) -> RankPair {
        self.decode_ranks(erased)
    }

    /// Block-diagonal doubling: two independent copies at twice the scale.
    pub fn doubled(&self) -> Self {
        let f = &self.field;
        let (k, d) = (self.k, self.delta);
        let n = self.n();
        let mut a = MatrixFq::zeros(f, 2 * k, 2 * n);
        let mut b = MatrixFq::zeros(f, 2 * d, 2 * n);
        let mut widths = Vec::new();
        let mut src = 0;
        let mut dst = 0;
        for &w in &self.node_widths {
            for copy in 0..2 {
                for c in 0..w {
                    for r in 0..k {
                        a.set(copy * k + r, dst + copy * w + c, self.a.get(r, src + c));
                    }
                    for r in 0..d {
                        b.set(copy * d + r, dst + copy * w + c, self.b.get(r, src + c));
                    }
                }
            }
            widths.push(2 * w);
            src += w;
            dst += 2 * w;
        }
        SecureCode::new(f, 2 * k, 2 * d, 2 * self.kappa, widths, a, b).expect("consistent shape")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPair {
    /// rank of the stacked `(A;B)` columns
    pub stacked: usize,
    /// rank of the `B` columns
    pub noise: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCheck {
    pub edge: Vec<NodeId>,
    pub decode_ok: bool,
    pub decode_ranks: RankPair,
    pub security_ok: bool,
    pub security_ranks: RankPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub rate: Rational,
    pub preconditions_ok: bool,
    /// Every width is at most `κλ_i`.
    pub fits_sizes: bool,
    pub edges: Vec<EdgeCheck>,
}

pub(crate) fn positions(code: &SecureCode, g: &StorageGraph, e: &[NodeId]) -> Result<(Vec<usize>, Vec<usize>), CodeError> {
    if code.num_nodes() != g.n() {
        return Err(CodeError::WidthMismatch { code: code.num_nodes(), graph: g.n() });
    }
    let mut d = Vec::with_capacity(e.len());
    for &id in e {
        d.push(g.position(id).ok_or_else(|| CodeError::BadParameters(format!("unknown node {id}")))?);
    }
    let dc = (0..g.n()).filter(|p| !d.contains(p)).collect();
    Ok((d, dc))
}

/// `rank(A_D;B_D) − rank(B_D) = k`.
pub fn verify_decoding(code: &SecureCode, g: &StorageGraph, e: &[NodeId]) -> Result<(bool, RankPair), CodeError> {
    let (d, _) = positions(code, g, e)?;
    let r = code.decode_ranks(&d);
    Ok((r.stacked - r.noise == code.k, r))
}

/// `rank(A_Dc;B_Dc) = rank(B_Dc)`, vacuous when nothing is erased.
pub fn verify_security(code: &SecureCode, g: &StorageGraph, e: &[NodeId]) -> Result<(bool, RankPair), CodeError> {
    let (_, dc) = positions(code, g, e)?;
    let r = code.security_ranks(&dc);
    Ok((r.stacked == r.noise, r))
}

pub fn verify_code(code: &SecureCode, g: &StorageGraph) -> Result<VerificationReport, CodeError> {
    let mut edges = Vec::new();
    for e in g.decoding_sets() {
        let (decode_ok, decode_ranks) = verify_decoding(code, g, e)?;
        let (security_ok, security_ranks) = verify_security(code, g, e)?;
        edges.push(EdgeCheck { edge: e.clone(), decode_ok, decode_ranks, security_ok, security_ranks });
    }
    let kappa = code.kappa as i64;
    let fits_sizes =
        code.node_widths.iter().zip(g.lambdas()).all(|(&w, l)| Rational::int(w as i64) <= l * kappa);
    Ok(VerificationReport {
        pass: edges.iter().all(|c| c.decode_ok && c.security_ok),
        rate: rate(code),
        preconditions_ok: code.preconditions_hold(),
        fits_sizes,
        edges,
    })
}

/// `k/κ`.
pub fn rate(code: &SecureCode) -> Rational {
    Rational::new(code.k as i64, code.kappa as i64)
}
