//! Dense matrices over `F_q` with exact elimination.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galois::{Elem, Gf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matrices over different fields")]
    FieldMismatch,
    #[error("entry {0} is not a field element")]
    BadEntry(Elem),
    #[error("matrix is singular")]
    Singular,
    #[error("decoding condition fails: rank(A_D;B_D) - rank(B_D) = {got}, want {k}")]
    DecodingViolated { got: usize, k: usize },
    #[error("security condition fails: rank(A_Dc;B_Dc) = {full} but rank(B_Dc) = {noise}")]
    SecurityViolated { full: usize, noise: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct MatrixFq {
    field: Gf,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl std::fmt::Debug for MatrixFq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:?} {}x{}", self.field, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Wire form; the field travels separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Elem>,
}

impl MatrixFq {
    pub fn new(field: &Gf, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{} entries for {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&x| !field.contains(x)) {
            return Err(MatrixError::BadEntry(bad));
        }
        Ok(MatrixFq { field: field.clone(), rows, cols, data })
    }

    pub fn zeros(field: &Gf, rows: usize, cols: usize) -> Self {
        MatrixFq { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Gf, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Panics on ragged input; meant for literals.
    pub fn from_rows(field: &Gf, rows: &[Vec<Elem>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn from_columns(field: &Gf, height: usize, columns: &[Vec<Elem>]) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(field, height, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != height {
                return Err(MatrixError::DimensionMismatch("column height".into()));
            }
            for (i, &x) in c.iter().enumerate() {
                if !field.contains(x) {
                    return Err(MatrixError::BadEntry(x));
                }
                m.data[i * m.cols + j] = x;
            }
        }
        Ok(m)
    }

    pub fn from_json(field: &Gf, j: &MatrixJson) -> Result<Self, MatrixError> {
        Self::new(field, j.rows, j.cols, j.data.clone())
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson { rows: self.rows, cols: self.cols, data: self.data.clone() }
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Elem) {
        debug_assert!(self.field.contains(x));
        self.data[r * self.cols + c] = x;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// The same entries read in another field of equal or larger order.
    pub fn reinterpret(&self, field: &Gf) -> Result<Self, MatrixError> {
        Self::new(field, self.rows, self.cols, self.data.clone())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    fn same_field(&self, other: &Self) -> Result<(), MatrixError> {
        if self.field != other.field {
            Err(MatrixError::FieldMismatch)
        } else {
            Ok(())
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(r, t);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(t, c)));
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, x: &[Elem]) -> Result<Vec<Elem>, MatrixError> {
        if x.len() != self.rows {
            return Err(MatrixError::DimensionMismatch("vector length".into()));
        }
        let f = &self.field;
        let mut out = vec![0; self.cols];
        for (r, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(a, self.get(r, c)));
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, x: &[Elem]) -> Result<Vec<Elem>, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::DimensionMismatch("vector length".into()));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, MatrixError> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(MatrixError::IndexOutOfRange { index: bad, len: self.cols });
        }
        let mut out = Self::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        Ok(out)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, MatrixError> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(MatrixError::IndexOutOfRange { index: bad, len: self.rows });
        }
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Ok(MatrixFq { field: self.field.clone(), rows: rows.len(), cols: self.cols, data })
    }

    pub fn row_range(&self, start: usize, end: usize) -> Self {
        let rows: Vec<usize> = (start..end).collect();
        self.select_rows(&rows).expect("row range")
    }

    pub fn vstack(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch("vstack column counts".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(MatrixFq { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Self) -> Result<Self, MatrixError> {
        self.same_field(other)?;
        if self.rows != other.rows {
            return Err(MatrixError::DimensionMismatch("hstack row counts".into()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(MatrixFq { field: self.field.clone(), rows: self.rows, cols, data })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = f.inv(m.get(row, col)).expect("nonzero pivot");
            for c in col..m.cols {
                let idx = row * m.cols + c;
                m.data[idx] = f.mul(m.data[idx], inv);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v = f.mul(factor, m.get(row, c));
                    let idx = r * m.cols + c;
                    m.data[idx] = f.sub(m.data[idx], v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.rref().1.len()
    }

    /// Basis of `{x : M x = 0}` as the columns of a `cols x dim` matrix.
    pub fn nullspace(&self) -> Self {
        let f = &self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(f, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            out.set(fc, j, 1);
            for (i, &pc) in pivots.iter().enumerate() {
                out.set(pc, j, f.neg(r.get(i, fc)));
            }
        }
        out
    }

    /// Some `x` with `M x = v`, if one exists.
    pub fn solve(&self, v: &[Elem]) -> Result<Option<Vec<Elem>>, MatrixError> {
        if v.len() != self.rows {
            return Err(MatrixError::DimensionMismatch("right-hand side length".into()));
        }
        let col = Self::from_columns(&self.field, self.rows, &[v.to_vec()])?;
        let aug = self.hstack(&col)?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols);
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Result<Self, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::DimensionMismatch("inverse of non-square".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(&self.field, n))?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(MatrixError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        r.select_columns(&cols)
    }
}

/// True iff `v` lies in the column span of `m`.
pub fn in_span(v: &[Elem], m: &MatrixFq) -> Result<bool, MatrixError> {
    Ok(m.solve(v)?.is_some())
}

/// Greedily keep the candidate columns that raise the rank over `base`.
fn extend_basis(base: &MatrixFq, candidates: &MatrixFq) -> MatrixFq {
    let mut current = base.clone();
    let mut kept = MatrixFq::zeros(base.field(), base.rows(), 0);
    let mut rank = current.rank();
    for c in 0..candidates.cols() {
        let col = candidates.select_columns(&[c]).expect("in range");
        let next = current.hstack(&col).expect("same height");
        let r = next.rank();
        if r > rank {
            rank = r;
            current = next;
            kept = kept.hstack(&col).expect("same height");
        }
    }
    kept
}

/// Basis of the intersection of two column spaces.
pub fn span_intersection(g1: &MatrixFq, g2: &MatrixFq) -> Result<MatrixFq, MatrixError> {
    let joint = g1.hstack(g2)?;
    let ns = joint.nullspace();
    let top: Vec<usize> = (0..g1.cols()).collect();
    let x = ns.select_rows(&top)?;
    let vectors = g1.mul(&x)?;
    let empty = MatrixFq::zeros(g1.field(), g1.rows(), 0);
    Ok(extend_basis(&empty, &vectors))
}

/// Bases splitting `F_q^{k+δ}` around one decoding set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceDecomposition {
    pub k: usize,
    pub delta: usize,
    pub delta1: usize,
    pub delta2: usize,
    pub delta3: usize,
    pub basis_d1: MatrixFq,
    pub basis_d2: MatrixFq,
    pub basis_d3: MatrixFq,
}

impl SubspaceDecomposition {
    /// `(I;0)` columns for the message part.
    pub fn message_block(&self) -> MatrixFq {
        let f = self.basis_d1.field();
        let n = self.k + self.delta;
        let mut m = MatrixFq::zeros(f, n, self.k);
        for i in 0..self.k {
            m.set(i, i, 1);
        }
        m
    }

    /// `[D1 D2 D3]`, all noise-side basis vectors.
    pub fn noise_blocks(&self) -> MatrixFq {
        self.basis_d1
            .hstack(&self.basis_d2)
            .and_then(|m| m.hstack(&self.basis_d3))
            .expect("equal heights")
    }

    /// Bottom `δ` rows of `[D1 D2 D3]`.
    pub fn bottom_block(&self) -> MatrixFq {
        self.noise_blocks().row_range(self.k, self.k + self.delta)
    }

    /// Recomputes every basis property from the source matrix.
    pub fn self_check(&self, stacked: &MatrixFq, d_cols: &[usize]) -> Result<(), String> {
        let n = self.k + self.delta;
        if self.delta1 + self.delta2 + self.delta3 != self.delta {
            return Err("block sizes do not sum to delta".into());
        }
        let dc: Vec<usize> = (0..stacked.cols()).filter(|c| !d_cols.contains(c)).collect();
        let gd = stacked.select_columns(d_cols).map_err(|e| e.to_string())?;
        let gdc = stacked.select_columns(&dc).map_err(|e| e.to_string())?;
        let rank_d = gd.rank();
        let rank_dc = gdc.rank();
        let msg = self.message_block();
        let join = |a: &MatrixFq, b: &MatrixFq| a.hstack(b).expect("equal heights");

        let d1 = &self.basis_d1;
        if d1.rank() != self.delta1 {
            return Err("D1 not independent".into());
        }
        if join(&gd, d1).rank() != rank_d || join(&gdc, d1).rank() != rank_dc {
            return Err("D1 outside one of the spans".into());
        }
        let inter = span_intersection(&gd, &gdc).map_err(|e| e.to_string())?;
        if inter.cols() != self.delta1 {
            return Err("D1 does not span the intersection".into());
        }
        let side_d = join(&join(&msg, d1), &self.basis_d2);
        if side_d.rank() != side_d.cols() || side_d.cols() != rank_d || join(&gd, &side_d).rank() != rank_d {
            return Err("(I;0), D1, D2 is not a basis of the D span".into());
        }
        let side_dc = join(d1, &self.basis_d3);
        if side_dc.rank() != side_dc.cols() || side_dc.cols() != rank_dc || join(&gdc, &side_dc).rank() != rank_dc {
            return Err("D1, D3 is not a basis of the complement span".into());
        }
        let all = join(&msg, &self.noise_blocks());
        if all.cols() != n || all.rank() != n {
            return Err("blocks do not form a basis of the whole space".into());
        }
        if self.bottom_block().rank() != self.delta {
            return Err("bottom block not invertible".into());
        }
        Ok(())
    }
}

/// Decoder bases for the columns `d_cols` of `(A;B)`.
///
/// D1 spans the intersection of both column spaces, D2 extends `(I;0) ∪ D1` over the
/// D columns and D3 extends D1 over the rest, each greedily in ascending column order.
pub fn decoder_decomposition(
    stacked: &MatrixFq,
    d_cols: &[usize],
    k: usize,
    delta: usize,
) -> Result<SubspaceDecomposition, MatrixError> {
    if stacked.rows() != k + delta {
        return Err(MatrixError::DimensionMismatch(format!(
            "{} rows for k + delta = {}",
            stacked.rows(),
            k + delta
        )));
    }
    let dc: Vec<usize> = (0..stacked.cols()).filter(|c| !d_cols.contains(c)).collect();
    let gd = stacked.select_columns(d_cols)?;
    let gdc = stacked.select_columns(&dc)?;
    let noise: Vec<usize> = (k..k + delta).collect();
    let got = gd.rank() - gd.select_rows(&noise)?.rank();
    if got != k {
        return Err(MatrixError::DecodingViolated { got, k });
    }
    let full = gdc.rank();
    let noise_rank = gdc.select_rows(&noise)?.rank();
    if full != noise_rank {
        return Err(MatrixError::SecurityViolated { full, noise: noise_rank });
    }

    let f = stacked.field();
    let mut msg = MatrixFq::zeros(f, k + delta, k);
    for i in 0..k {
        msg.set(i, i, 1);
    }
    let d1 = span_intersection(&gd, &gdc)?;
    let d2 = extend_basis(&msg.hstack(&d1)?, &gd);
    let d3 = extend_basis(&d1, &gdc);
    let dec = SubspaceDecomposition {
        k,
        delta,
        delta1: d1.cols(),
        delta2: d2.cols(),
        delta3: d3.cols(),
        basis_d1: d1,
        basis_d2: d2,
        basis_d3: d3,
    };
    if dec.delta1 + dec.delta2 + dec.delta3 != delta {
        return Err(MatrixError::DimensionMismatch("stacked matrix is not full rank".into()));
    }
    Ok(dec)
}
