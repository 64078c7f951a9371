//! Exhaustive check of decodability and secrecy over all `(a, b)`.

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use super::{CodeError, SecureCode};
use crate::galois::{Elem, Gf};
use crate::graph::{NodeId, StorageGraph};

pub const DEFAULT_ORACLE_LIMIT: u128 = 1 << 20;

/// Two secrets that produce the same surviving shares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeCounterexample {
    pub shares: Vec<Elem>,
    pub secret_1: Vec<Elem>,
    pub secret_2: Vec<Elem>,
}

/// Erased shares whose conditional secret distribution is not uniform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecurityCounterexample {
    pub shares: Vec<Elem>,
    /// (secret, count) pairs seen with these shares
    pub counts: Vec<(Vec<Elem>, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub edge: Vec<NodeId>,
    /// `H(a | Y_D) = 0`
    pub decodable: bool,
    /// `I(a ; Y_Dc) = 0`
    pub secure: bool,
    pub decode_counterexample: Option<DecodeCounterexample>,
    pub security_counterexample: Option<SecurityCounterexample>,
}

fn digits(mut x: u64, q: u64, len: usize) -> Vec<Elem> {
    let mut v = vec![0; len];
    for d in v.iter_mut() {
        *d = (x % q) as Elem;
        x /= q;
    }
    v
}

/// Joint enumeration for one decoding set.
pub fn entropy_oracle(
    code: &SecureCode,
    g: &StorageGraph,
    e: &[NodeId],
    limit: u128,
) -> Result<OracleVerdict, CodeError> {
    if code.num_nodes() != g.n() {
        return Err(CodeError::WidthMismatch { code: code.num_nodes(), graph: g.n() });
    }
    let f = code.field();
    let q = f.q() as u64;
    let (k, h) = (code.k(), code.k() + code.delta());
    let size = (q as u128).checked_pow(h as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(CodeError::LimitExceeded { size, limit });
    }
    let mut d_nodes = Vec::new();
    for &id in e {
        d_nodes.push(g.position(id).ok_or_else(|| CodeError::BadParameters(format!("unknown node {id}")))?);
    }
    let dc_nodes: Vec<usize> = (0..g.n()).filter(|p| !d_nodes.contains(p)).collect();
    let stacked = code.stacked();
    let d_cols = code.columns_of(&d_nodes);
    let dc_cols = code.columns_of(&dc_nodes);
    let rows = |cols: &[usize]| -> Vec<Vec<Elem>> {
        (0..h).map(|r| cols.iter().map(|&c| stacked.get(r, c)).collect()).collect()
    };
    let (rd, rdc) = (rows(&d_cols), rows(&dc_cols));
    let secrets = q.pow(k as u32);
    let fits = |w: usize| (q as u128).checked_pow(w as u32).is_some();
    let verdict = if fits(d_cols.len()) && fits(dc_cols.len()) {
        let pack = |y: &[Elem]| y.iter().rev().fold(0u128, |acc, &x| acc * q as u128 + x as u128);
        let unpack = |mut key: u128, w: usize| -> Vec<Elem> {
            (0..w)
                .map(|_| {
                    let x = (key % q as u128) as Elem;
                    key /= q as u128;
                    x
                })
                .collect()
        };
        let (dcx, scx) = enumerate(f, size as u64, secrets, &rd, &rdc, pack);
        (
            dcx.map(|(y, s1, s2)| (unpack(y, d_cols.len()), s1, s2)),
            scx.map(|(y, counts)| (unpack(y, dc_cols.len()), counts)),
        )
    } else {
        enumerate(f, size as u64, secrets, &rd, &rdc, |y: &[Elem]| y.to_vec())
    };
    let (decode_cx, security_cx) = verdict;
    let decode_cx = decode_cx.map(|(shares, s1, s2)| DecodeCounterexample {
        shares,
        secret_1: digits(s1, q, k),
        secret_2: digits(s2, q, k),
    });
    let security_cx = security_cx.map(|(shares, counts)| SecurityCounterexample {
        shares,
        counts: counts.into_iter().map(|(s, c)| (digits(s, q, k), c)).collect(),
    });
    Ok(OracleVerdict {
        edge: e.to_vec(),
        decodable: decode_cx.is_none(),
        secure: security_cx.is_none(),
        decode_counterexample: decode_cx,
        security_counterexample: security_cx,
    })
}

type DecodeFailure<K> = Option<(K, u64, u64)>;
type SecurityFailure<K> = Option<(K, Vec<(u64, u64)>)>;

/// Walks `(a, b)` in odometer order, least significant digit first, so the first
/// `k` digits are the secret. Stepping digit `i` adds a multiple of row `i` to the shares.
fn enumerate<K: Hash + Eq + Ord + Clone>(
    f: &Gf,
    size: u64,
    secrets: u64,
    rd: &[Vec<Elem>],
    rdc: &[Vec<Elem>],
    key: impl Fn(&[Elem]) -> K,
) -> (DecodeFailure<K>, SecurityFailure<K>) {
    let q = f.q();
    let h = rd.len();
    // labels are not integers in extension fields
    let step: Vec<Elem> = (0..q).map(|v| f.sub((v + 1) % q, v)).collect();
    let mut x = vec![0 as Elem; h];
    let mut yd = vec![0 as Elem; rd.first().map_or(0, Vec::len)];
    let mut ydc = vec![0 as Elem; rdc.first().map_or(0, Vec::len)];
    let mut decode: HashMap<K, u64> = HashMap::new();
    let mut decode_cx: DecodeFailure<K> = None;
    let mut joint: HashMap<K, HashMap<u64, u64>> = HashMap::new();
    for idx in 0..size {
        if idx > 0 {
            for i in 0..h {
                let c = step[x[i] as usize];
                for (o, &t) in yd.iter_mut().zip(&rd[i]) {
                    *o = f.add(*o, f.mul(c, t));
                }
                for (o, &t) in ydc.iter_mut().zip(&rdc[i]) {
                    *o = f.add(*o, f.mul(c, t));
                }
                x[i] += 1;
                if x[i] < q {
                    break;
                }
                x[i] = 0;
            }
        }
        let secret = idx % secrets;
        let kd = key(&yd);
        match decode.get(&kd) {
            Some(&prev) if prev != secret => {
                if decode_cx.as_ref().is_none_or(|c| kd < c.0) {
                    decode_cx = Some((kd, prev, secret));
                }
            }
            Some(_) => {}
            None => {
                decode.insert(kd, secret);
            }
        }
        *joint.entry(key(&ydc)).or_default().entry(secret).or_default() += 1;
    }
    let security_cx = joint
        .into_iter()
        .filter(|(_, counts)| {
            let first = counts.values().next().copied();
            counts.len() as u64 != secrets || counts.values().any(|&c| Some(c) != first)
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(y, counts)| {
            let mut counts: Vec<(u64, u64)> = counts.into_iter().collect();
            counts.sort_unstable();
            (y, counts)
        });
    (decode_cx, security_cx)
}

pub fn entropy_oracle_all(code: &SecureCode, g: &StorageGraph, limit: u128) -> Result<Vec<OracleVerdict>, CodeError> {
    g.decoding_sets().iter().map(|e| entropy_oracle(code, g, e, limit)).collect()
}
