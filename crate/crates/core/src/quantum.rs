//! Exact coset-state simulation of the CSS translation.
//!
//! A basis message `a` is encoded as the uniform superposition over the coset
//! `aA + rowspace(B)`, so every check here is set algebra or integer counting.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::codes::{positions, CodeError, SecureCode};
use crate::galois::{Elem, FieldSpec, Gf};
use crate::graph::{NodeId, StorageGraph};
use crate::matrix::{decoder_decomposition, MatrixError, MatrixFq};

pub const DEFAULT_SUPPORT_LIMIT: u128 = 4096;
pub const DEFAULT_DENSITY_LIMIT: u128 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantumLimits {
    /// Bound on `q^δ`, and on `q^k` since every basis message is visited.
    pub support: u128,
    /// Bound on the row count `q^{width(Dc)}` of a reduced density matrix.
    pub density: u128,
}

impl Default for QuantumLimits {
    fn default() -> Self {
        QuantumLimits { support: DEFAULT_SUPPORT_LIMIT, density: DEFAULT_DENSITY_LIMIT }
    }
}

/// `q^{-δ/2} Σ_b |aA + bB⟩`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetState {
    pub field: FieldSpec,
    pub n: usize,
    pub offset: Vec<Elem>,
    pub generators: MatrixFq,
    pub message: Vec<Elem>,
}

impl CosetState {
    /// Every `aA + bB`, in the order `b` is enumerated.
    pub fn strings(&self) -> Vec<Vec<Elem>> {
        let f = self.generators.field();
        let mut out = Vec::new();
        for_each_vector(f.q(), self.generators.rows(), |b| {
            let noise = self.generators.left_mul_vec(b).expect("matching length");
            out.push(self.offset.iter().zip(&noise).map(|(&x, &y)| f.add(x, y)).collect());
        });
        out
    }

    pub fn support(&self) -> BTreeSet<Vec<Elem>> {
        self.strings().into_iter().collect()
    }
}

/// Exact verdicts for one decoding set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoveryCertificate {
    pub edge: Vec<NodeId>,
    /// The relabeled first register equals `a` and the rest is the same set for every `a`.
    #[serde(rename = "recovery")]
    pub factorization_ok: bool,
    /// `None` when the density limit was exceeded.
    #[serde(rename = "security")]
    pub security_ok: Option<bool>,
    pub support_size: u64,
    #[serde(skip)]
    pub residual_support: ResidualSupport,
}

/// Shape of the `a`-independent factor: `(b1', b2')` on the survivors, `b3'` erased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResidualSupport {
    pub delta1: usize,
    pub delta2: usize,
    pub delta3: usize,
    pub size: u64,
}

fn for_each_vector(q: u32, len: usize, mut f: impl FnMut(&[Elem])) {
    let mut x = vec![0 as Elem; len];
    loop {
        f(&x);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            x[i] += 1;
            if x[i] < q {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

fn power_within(q: u32, exp: usize, limit: u128) -> Result<u128, CodeError> {
    let size = (q as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(CodeError::LimitExceeded { size, limit });
    }
    Ok(size)
}

pub fn css_encode_basis(code: &SecureCode, a: &[Elem]) -> Result<CosetState, CodeError> {
    if a.len() != code.k() {
        return Err(CodeError::Matrix(MatrixError::DimensionMismatch(format!(
            "message of length {} for k = {}",
            a.len(),
            code.k()
        ))));
    }
    let f = code.field();
    if let Some(&x) = a.iter().find(|&&x| !f.contains(x)) {
        return Err(CodeError::Matrix(MatrixError::BadEntry(x)));
    }
    Ok(CosetState {
        field: f.spec().clone(),
        n: code.n(),
        offset: code.a().left_mul_vec(a)?,
        generators: code.b().clone(),
        message: a.to_vec(),
    })
}

/// `y_D ↦ (a, b1', b2', l)` where `l` is the non-pivot part with the message removed.
struct Relabeling {
    k: usize,
    pivots: Vec<usize>,
    rest: Vec<usize>,
    p_inv: MatrixFq,
    rest_top: MatrixFq,
}

impl Relabeling {
    fn new(f: &Gf, g_d: &MatrixFq, basis: &MatrixFq, k: usize) -> Result<Self, CodeError> {
        // G_D = basis · M
        let mut cols = Vec::with_capacity(g_d.cols());
        for j in 0..g_d.cols() {
            let x = basis
                .solve(&g_d.column(j))?
                .ok_or_else(|| CodeError::Shape("surviving column outside the decomposition".into()))?;
            cols.push(x);
        }
        let m = MatrixFq::from_columns(f, basis.cols(), &cols)?;
        let (_, pivots) = m.rref();
        if pivots.len() != basis.cols() {
            return Err(CodeError::Shape("decomposition basis is not spanned by the survivors".into()));
        }
        let rest: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
        let p_inv = m.select_columns(&pivots)?.inverse()?;
        let top: Vec<usize> = (0..k).collect();
        let rest_top = m.select_rows(&top)?.select_columns(&rest)?;
        let r = Relabeling { k, pivots, rest, p_inv, rest_top };
        r.check_bijective(f, m.cols())?;
        Ok(r)
    }

    fn apply(&self, f: &Gf, y: &[Elem]) -> Vec<Elem> {
        let y_piv: Vec<Elem> = self.pivots.iter().map(|&c| y[c]).collect();
        let mut out = self.p_inv.left_mul_vec(&y_piv).expect("square");
        let corr = self.rest_top.left_mul_vec(&out[..self.k]).expect("k rows");
        out.extend(self.rest.iter().zip(&corr).map(|(&c, &x)| f.sub(y[c], x)));
        out
    }

    fn check_bijective(&self, f: &Gf, w: usize) -> Result<(), CodeError> {
        let images: Vec<Vec<Elem>> = (0..w)
            .map(|j| {
                let mut e = vec![0; w];
                e[j] = 1;
                self.apply(f, &e)
            })
            .collect();
        if MatrixFq::from_rows(f, &images)?.rank() != w {
            return Err(CodeError::Shape("relabeling is not invertible".into()));
        }
        Ok(())
    }
}

fn project(y: &[Elem], cols: &[usize]) -> Vec<Elem> {
    cols.iter().map(|&c| y[c]).collect()
}

pub fn verify_quantum_recovery(code: &SecureCode, g: &StorageGraph, e: &[NodeId]) -> Result<RecoveryCertificate, CodeError> {
    verify_quantum_recovery_with(code, g, e, &QuantumLimits::default())
}

/// Applies the decoder relabeling to every basis coset and compares the residual sets.
pub fn verify_quantum_recovery_with(
    code: &SecureCode,
    g: &StorageGraph,
    e: &[NodeId],
    limits: &QuantumLimits,
) -> Result<RecoveryCertificate, CodeError> {
    let (d, dc) = positions(code, g, e)?;
    let f = code.field();
    let (k, delta) = (code.k(), code.delta());
    let support = power_within(f.q(), delta, limits.support)? as u64;
    power_within(f.q(), k, limits.support)?;
    let d_cols = code.columns_of(&d);
    let dc_cols = code.columns_of(&dc);
    let stacked = code.stacked();
    let dec = decoder_decomposition(&stacked, &d_cols, k, delta)?;
    let basis = dec.message_block().hstack(&dec.basis_d1)?.hstack(&dec.basis_d2)?;
    let relabel = Relabeling::new(f, &stacked.select_columns(&d_cols)?, &basis, k)?;

    let mut ok = true;
    let mut reference: Option<BTreeSet<Vec<Elem>>> = None;
    for_each_vector(f.q(), k, |a| {
        if !ok {
            return;
        }
        let state = css_encode_basis(code, a).expect("valid message");
        let strings = state.support();
        if strings.len() as u64 != support {
            ok = false;
            return;
        }
        let mut residual = BTreeSet::new();
        for y in &strings {
            let mut r = relabel.apply(f, &project(y, &d_cols));
            if r[..k] != *a {
                ok = false;
                return;
            }
            r.drain(..k);
            r.extend(project(y, &dc_cols));
            residual.insert(r);
        }
        match &reference {
            None => reference = Some(residual),
            Some(t) => ok &= *t == residual,
        }
    });
    let security_ok = match verify_quantum_security_with(code, g, e, limits) {
        Ok(s) => Some(s),
        Err(CodeError::LimitExceeded { .. }) => None,
        Err(err) => return Err(err),
    };
    Ok(RecoveryCertificate {
        edge: e.to_vec(),
        factorization_ok: ok,
        security_ok,
        support_size: support,
        residual_support: ResidualSupport {
            delta1: dec.delta1,
            delta2: dec.delta2,
            delta3: dec.delta3,
            size: reference.map_or(0, |t| t.len() as u64),
        },
    })
}

pub fn verify_quantum_security(code: &SecureCode, g: &StorageGraph, e: &[NodeId]) -> Result<bool, CodeError> {
    verify_quantum_security_with(code, g, e, &QuantumLimits::default())
}

/// Reduced state on the erased registers, as integer counts, must not depend on `a`.
pub fn verify_quantum_security_with(
    code: &SecureCode,
    g: &StorageGraph,
    e: &[NodeId],
    limits: &QuantumLimits,
) -> Result<bool, CodeError> {
    let (d, dc) = positions(code, g, e)?;
    let f = code.field();
    let q = f.q();
    power_within(q, code.delta(), limits.support)?;
    power_within(q, code.k(), limits.support)?;
    let d_cols = code.columns_of(&d);
    let dc_cols = code.columns_of(&dc);
    power_within(q, dc_cols.len(), limits.density)?;
    if dc_cols.is_empty() {
        return Ok(true);
    }
    let index = |y: &[Elem]| y.iter().rev().fold(0u64, |acc, &x| acc * q as u64 + x as u64);

    let mut reference: Option<HashMap<(u64, u64), u64>> = None;
    let mut same = true;
    for_each_vector(q, code.k(), |a| {
        if !same {
            return;
        }
        let state = css_encode_basis(code, a).expect("valid message");
        let mut groups: BTreeMap<Vec<Elem>, Vec<u64>> = BTreeMap::new();
        for y in state.strings() {
            groups.entry(project(&y, &d_cols)).or_default().push(index(&project(&y, &dc_cols)));
        }
        let mut rho: HashMap<(u64, u64), u64> = HashMap::new();
        for ys in groups.values() {
            for &y in ys {
                for &y2 in ys {
                    *rho.entry((y, y2)).or_default() += 1;
                }
            }
        }
        match &reference {
            None => reference = Some(rho),
            Some(r) => same &= *r == rho,
        }
    });
    Ok(same)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{
        construct_fano, construct_mds_uniform, intersection_fig5_fixture, plaintext_code, verify_decoding,
        verify_security, w4_fixture,
    };
    use crate::graph::{fano_graph, intersection_graph, mds_graph, ones, wheel_graph};
    use proptest::prelude::*;

    fn gf(q: u32) -> Gf {
        Gf::of_order(q).unwrap()
    }

    fn all_pass(code: &SecureCode, g: &StorageGraph) {
        for e in g.decoding_sets() {
            let c = verify_quantum_recovery(code, g, e).unwrap();
            assert!(c.factorization_ok, "{e:?}");
            assert_eq!(c.security_ok, Some(true), "{e:?}");
            assert_eq!(c.support_size, (code.field().q() as u64).pow(code.delta() as u32));
        }
    }

    #[test]
    fn w4_cosets() {
        let code = w4_fixture();
        let zero = css_encode_basis(&code, &[0]).unwrap().support();
        assert_eq!(zero.len(), 8);
        let rowspace: BTreeSet<Vec<Elem>> = {
            let mut s = BTreeSet::new();
            for_each_vector(2, 3, |b| {
                s.insert(code.b().left_mul_vec(b).unwrap());
            });
            s
        };
        assert_eq!(zero, rowspace);
        let one = css_encode_basis(&code, &[1]).unwrap().support();
        let mut kets = BTreeSet::new();
        for_each_vector(2, 3, |b| {
            let (b1, b2, b3) = (b[0], b[1], b[2]);
            kets.insert(vec![b1, 1 ^ b1, b2, 1 ^ b1, b3, 1 ^ b1, 1 ^ b2 ^ b3]);
        });
        assert_eq!(one, kets);
        assert!(zero.is_disjoint(&one));
        assert!(css_encode_basis(&code, &[0, 1]).is_err());
        assert!(css_encode_basis(&code, &[2]).is_err());
    }

    #[test]
    fn w4_recovery() {
        let code = w4_fixture();
        let g = wheel_graph(&[1, 2, 2, 2].map(crate::Rational::int)).unwrap();
        all_pass(&code, &g);
        let c = verify_quantum_recovery(&code, &g, &[1, 2]).unwrap();
        // c1 = a+b1 and c2 = a+b2 are visible to both sides, c3 = b3 only to the erased nodes
        assert_eq!((c.residual_support.delta1, c.residual_support.delta2, c.residual_support.delta3), (2, 0, 1));
        assert_eq!(c.residual_support.size, 8);
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json, serde_json::json!({"edge": [1, 2], "recovery": true, "security": true, "support_size": 8}));
    }

    #[test]
    fn fano_mds_and_intersection() {
        all_pass(&construct_fano(&gf(2)).unwrap(), &fano_graph(&ones(7)).unwrap());
        all_pass(&construct_mds_uniform(3, 2, &gf(3)).unwrap(), &mds_graph(3, 2, &ones(3)).unwrap());
        all_pass(&construct_mds_uniform(4, 3, &gf(4)).unwrap(), &mds_graph(4, 3, &ones(4)).unwrap());
        all_pass(&intersection_fig5_fixture(&gf(2)), &intersection_graph(4, 2, &ones(6)).unwrap());
    }

    #[test]
    fn security_edge_cases() {
        let f = gf(3);
        let g = mds_graph(3, 2, &ones(3)).unwrap();
        let plain = plaintext_code(&f, 1, 3);
        assert!(!verify_quantum_security(&plain, &g, &[1, 2]).unwrap());
        assert!(matches!(verify_quantum_recovery(&plain, &g, &[1, 2]), Err(CodeError::Matrix(_))));
        let one = StorageGraph::new(&[(1, crate::Rational::one()), (2, crate::Rational::one())], &[vec![1, 2]]).unwrap();
        assert!(verify_quantum_security(&plaintext_code(&f, 1, 2), &one, &[1, 2]).unwrap());
        let tight = QuantumLimits { support: 4096, density: 2 };
        let code = construct_mds_uniform(3, 2, &f).unwrap();
        assert!(matches!(verify_quantum_security_with(&code, &g, &[1, 2], &tight), Err(CodeError::LimitExceeded { .. })));
        assert_eq!(verify_quantum_recovery_with(&code, &g, &[1, 2], &tight).unwrap().security_ok, None);
    }

    #[test]
    fn fano_density_matches() {
        let g = fano_graph(&ones(7)).unwrap();
        assert!(verify_quantum_security(&construct_fano(&gf(2)).unwrap(), &g, &[1, 2, 4]).unwrap());
    }

    proptest! {
        #[test]
        fn recovery_iff_rank_conditions(pos in 0usize..28, x in 0u32..2) {
            let code = w4_fixture();
            let mut s = code.stacked();
            let (r, c) = (pos / 7, pos % 7);
            s.set(r, c, x);
            let g = wheel_graph(&[1, 2, 2, 2].map(crate::Rational::int)).unwrap();
            let Ok(m) = SecureCode::from_stacked(code.field(), 1, 1, vec![1, 2, 2, 2], &s) else { return Ok(()) };
            for e in g.decoding_sets() {
                let classical = verify_decoding(&m, &g, e).unwrap().0 && verify_security(&m, &g, e).unwrap().0;
                let quantum = match verify_quantum_recovery(&m, &g, e) {
                    Ok(cert) => cert.factorization_ok,
                    Err(CodeError::Matrix(_)) => false,
                    Err(err) => panic!("{err}"),
                };
                prop_assert_eq!(classical, quantum);
                if verify_security(&m, &g, e).unwrap().0 {
                    prop_assert!(verify_quantum_security(&m, &g, e).unwrap());
                } else {
                    prop_assert!(!verify_quantum_security(&m, &g, e).unwrap());
                }
            }
        }
    }
}
