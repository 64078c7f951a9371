//! Constructors for the code families.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{verify_code, CodeError, SecureCode};
use crate::galois::{Elem, Gf};
use crate::graph::families::{binomial, intersection_labels};
use crate::graph::{intersection_graph, is_feasible, ones, StorageGraph};
use crate::matrix::MatrixFq;
use crate::rational::Rational;

/// `[α_j^{rows-1-i}]`: top row has the highest power.
fn vandermonde(f: &Gf, alphas: &[Elem], rows: usize) -> MatrixFq {
    let mut m = MatrixFq::zeros(f, rows, alphas.len());
    for (j, &a) in alphas.iter().enumerate() {
        for i in 0..rows {
            m.set(i, j, f.pow(a, (rows - 1 - i) as u64));
        }
    }
    m
}

/// Unit column `e_i` of height `h`, optionally plus more units.
fn units(h: usize, ones_at: &[usize]) -> Vec<Elem> {
    let mut v = vec![0; h];
    for &i in ones_at {
        v[i] = 1;
    }
    v
}

fn code_from_columns(
    f: &Gf,
    k: usize,
    height: usize,
    node_columns: Vec<Vec<Vec<Elem>>>,
) -> Result<SecureCode, CodeError> {
    let widths = node_columns.iter().map(|c| c.len()).collect();
    let cols: Vec<Vec<Elem>> = node_columns.into_iter().flatten().collect();
    let stacked = MatrixFq::from_columns(f, height, &cols)?;
    SecureCode::from_stacked(f, k, 1, widths, &stacked)
}

/// Uniform MDS code for `M_{N,K}`: `k = 2K−N`, `δ = N−K`, evaluation points `0..N−1`.
pub fn construct_mds_uniform(n: usize, kk: usize, field: &Gf) -> Result<SecureCode, CodeError> {
    if 2 * kk <= n || kk > n {
        return Err(CodeError::BadParameters(format!("need N/2 < K <= N, got N={n} K={kk}")));
    }
    if (field.q() as usize) < n {
        return Err(CodeError::FieldTooSmall { q: field.q(), need: n as u32 });
    }
    let alphas: Vec<Elem> = (0..n as Elem).collect();
    let stacked = vandermonde(field, &alphas, kk);
    SecureCode::from_stacked(field, 2 * kk - n, 1, vec![1; n], &stacked)
}

/// Wheel component codes, `k = 1`, `κ = 1`.
///
/// Variant 1 has widths `(N−2,1,…,1)`, variant 2 `(1,2,…,2)` and variant 3 (N = 5 only)
/// `(2,1,2,2,2)`. Variant 2 at N = 4 is the explicit four-node code, valid over any field.
pub fn construct_wheel_component(n: usize, variant: u8, field: &Gf) -> Result<SecureCode, CodeError> {
    if n < 4 {
        return Err(CodeError::BadParameters("wheel needs N >= 4".into()));
    }
    let q = field.q() as usize;
    match variant {
        1 => {
            // rows a, b1..b_{N-2}; tail points must be nonzero
            if q < n {
                return Err(CodeError::FieldTooSmall { q: field.q(), need: n as u32 });
            }
            let h = n - 1;
            let hub: Vec<Vec<Elem>> = (1..h).map(|i| units(h, &[i])).collect();
            let alphas: Vec<Elem> = (1..n as Elem).collect();
            let v = vandermonde(field, &alphas, h);
            let mut nodes = vec![hub];
            nodes.extend((0..n - 1).map(|j| vec![v.column(j)]));
            code_from_columns(field, 1, h, nodes)
        }
        2 if n == 4 => {
            let f = field;
            // rows a, b1, b2, b3
            let nodes = vec![
                vec![units(4, &[1])],
                vec![units(4, &[0, 1]), units(4, &[2])],
                vec![units(4, &[0, 1]), units(4, &[3])],
                vec![units(4, &[0, 1]), units(4, &[0, 2, 3])],
            ];
            code_from_columns(f, 1, 4, nodes)
        }
        2 => {
            if q + 1 < n {
                return Err(CodeError::FieldTooSmall { q: field.q(), need: n as u32 - 1 });
            }
            // rows a, b1, ..., b_{N-1}; Vandermonde acts on (a, b2, ..., b_{N-1})
            let h = n;
            let alphas: Vec<Elem> = (0..n as Elem - 1).collect();
            let v = vandermonde(field, &alphas, n - 1);
            let mut nodes = vec![vec![units(h, &[1])]];
            for j in 0..n - 1 {
                let vc = v.column(j);
                let mut second = vec![0; h];
                second[0] = vc[0];
                second[2..h].copy_from_slice(&vc[1..]);
                nodes.push(vec![units(h, &[0, 1]), second]);
            }
            code_from_columns(field, 1, h, nodes)
        }
        3 => {
            if n != 5 {
                return Err(CodeError::BadParameters("variant 3 exists only for N = 5".into()));
            }
            // rows a, b1, b2, b3, b4
            let nodes = vec![
                vec![units(5, &[1]), units(5, &[4])],
                vec![units(5, &[0, 1])],
                vec![units(5, &[2]), units(5, &[0, 4])],
                vec![units(5, &[3]), units(5, &[0, 4])],
                vec![units(5, &[1, 2, 3]), units(5, &[0, 4])],
            ];
            code_from_columns(field, 1, 5, nodes)
        }
        _ => Err(CodeError::BadParameters(format!("unknown wheel variant {variant}"))),
    }
}

/// The four-node wheel code over `F_2`.
pub fn w4_fixture() -> SecureCode {
    construct_wheel_component(4, 2, &Gf::new(2, 1).expect("F2")).expect("fixed code")
}

/// Node columns of the Fano code over rows `a, b1, b2, b3`.
const FANO_COLUMNS: [&[usize]; 7] = [&[0, 1], &[0, 2], &[0, 3], &[0, 1, 2], &[0, 2, 3], &[0, 1, 3], &[0, 1, 2, 3]];

/// Fano-plane code, even characteristic only.
pub fn construct_fano(field: &Gf) -> Result<SecureCode, CodeError> {
    if !field.has_even_characteristic() {
        return Err(CodeError::OddCharacteristic);
    }
    Ok(fano_matrices(field))
}

/// The Fano matrices over any field, for negative tests.
pub fn fano_matrices(field: &Gf) -> SecureCode {
    let nodes = FANO_COLUMNS.iter().map(|c| vec![units(4, c)]).collect();
    code_from_columns(field, 1, 4, nodes).expect("fixed code")
}

/// Every node stores the whole secret in the clear.
pub fn plaintext_code(field: &Gf, k: usize, nodes: usize) -> SecureCode {
    let cols = (0..nodes).map(|_| (0..k).map(|i| units(k, &[i])).collect()).collect();
    code_from_columns(field, k, k, cols).expect("fixed code")
}

/// Smallest `q` must exceed this for the intersection constructor.
pub fn intersection_field_bound(delta: usize, m: usize) -> u64 {
    (binomial(delta - 1, m - 1) + delta * binomial(delta - 2, m - 2)) as u64
}

/// Result of the seeded intersection construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionBuild {
    pub code: SecureCode,
    pub seed: u64,
    pub attempts: u32,
}

fn sample(rng: &mut ChaCha8Rng, q: u32) -> Elem {
    let mask = q.next_power_of_two() - 1;
    loop {
        let x = rng.next_u32() & mask;
        if x < q {
            return x;
        }
    }
}

struct IntersectionLayout {
    k: usize,
    delta: usize,
    labels: Vec<Vec<u32>>,
    /// for labels holding 1: column of the generic matrix
    base: Vec<Option<usize>>,
}

impl IntersectionLayout {
    fn new(delta_param: usize, m: usize) -> Self {
        let labels = intersection_labels(delta_param, m);
        let mut next = 0;
        let base = labels
            .iter()
            .map(|l| {
                l.contains(&1).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        IntersectionLayout {
            k: binomial(delta_param - 2, m - 2),
            delta: binomial(delta_param - 2, m - 1),
            labels,
            base,
        }
    }

    fn index_of(&self, label: &[u32]) -> usize {
        self.labels.iter().position(|l| l == label).expect("label exists")
    }

    /// Columns of every node, from the generic square matrix.
    fn expand(&self, f: &Gf, generic: &MatrixFq) -> MatrixFq {
        let h = self.k + self.delta;
        let cols: Vec<Vec<Elem>> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, label)| match self.base[i] {
                Some(c) => generic.column(c),
                None => {
                    let mut acc = vec![0; h];
                    for j in 0..label.len() {
                        let mut sj = label.clone();
                        sj[j] = 1;
                        sj.sort_unstable();
                        let col = generic.column(self.base[self.index_of(&sj)].expect("holds 1"));
                        // (-1)^j with j counted from 1
                        let odd = j % 2 == 0;
                        for (a, &x) in acc.iter_mut().zip(&col) {
                            *a = if odd { f.sub(*a, x) } else { f.add(*a, x) };
                        }
                    }
                    acc
                }
            })
            .collect();
        MatrixFq::from_columns(f, h, &cols).expect("consistent height")
    }

    fn noise_block_full_rank(&self, full: &MatrixFq, pick: impl Fn(&[u32]) -> bool) -> bool {
        let cols: Vec<usize> = (0..self.labels.len()).filter(|&i| pick(&self.labels[i])).collect();
        debug_assert_eq!(cols.len(), self.delta);
        let b = full.row_range(self.k, self.k + self.delta).select_columns(&cols).expect("in range");
        b.rank() == self.delta
    }
}

/// Intersection-graph code from a seeded ChaCha8 stream.
///
/// Each draw fills the square generic matrix row by row; an entry is the low
/// `ceil(log2 q)` bits of `next_u32`, redrawn while `>= q`.
pub fn construct_intersection(
    delta_param: usize,
    m: usize,
    field: &Gf,
    seed: u64,
    max_retries: u32,
) -> Result<IntersectionBuild, CodeError> {
    if !(m >= 2 && delta_param > m) {
        return Err(CodeError::BadParameters(format!("need Δ > m >= 2, got Δ={delta_param} m={m}")));
    }
    let bound = intersection_field_bound(delta_param, m);
    if (field.q() as u64) <= bound {
        return Err(CodeError::FieldTooSmall { q: field.q(), need: bound as u32 + 1 });
    }
    let lay = IntersectionLayout::new(delta_param, m);
    let h = lay.k + lay.delta;
    let graph = intersection_graph(delta_param, m, &ones(lay.labels.len())).expect("family graph");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_retries.max(1) {
        let data: Vec<Elem> = (0..h * h).map(|_| sample(&mut rng, field.q())).collect();
        let generic = MatrixFq::new(field, h, h, data)?;
        if generic.rank() != h {
            continue;
        }
        let full = lay.expand(field, &generic);
        let sec1 = (2..=delta_param as u32).all(|i| lay.noise_block_full_rank(&full, |l| l.contains(&1) && !l.contains(&i)));
        let sec2 = lay.noise_block_full_rank(&full, |l| !l.contains(&1) && l.contains(&2));
        if !(sec1 && sec2) {
            continue;
        }
        let code = SecureCode::from_stacked(field, lay.k, 1, vec![1; lay.labels.len()], &full)?;
        if verify_code(&code, &graph)?.pass {
            return Ok(IntersectionBuild { code, seed, attempts: attempt });
        }
    }
    Err(CodeError::RetriesExhausted { seed, tries: max_retries.max(1) })
}

/// The explicit six-node code for `⊓_{4,2}` with `z = (a+b1+b2, b1, b2)`.
pub fn intersection_fig5_fixture(field: &Gf) -> SecureCode {
    let f = field;
    let z1 = vec![1, 1, 1];
    let z2 = vec![0, 1, 0];
    let z3 = vec![0, 0, 1];
    let add = |x: &[Elem], y: &[Elem]| -> Vec<Elem> { x.iter().zip(y).map(|(&a, &b)| f.add(a, b)).collect() };
    let sub = |x: &[Elem], y: &[Elem]| -> Vec<Elem> { x.iter().zip(y).map(|(&a, &b)| f.sub(a, b)).collect() };
    // nodes 12, 13, 14, 23, 24, 34
    let nodes = vec![
        vec![z2.clone()],
        vec![z3.clone()],
        vec![z1.clone()],
        vec![add(&z2, &z3)],
        vec![add(&z1, &z2)],
        vec![sub(&z1, &z3)],
    ];
    code_from_columns(f, 1, 3, nodes).expect("fixed code")
}

/// One secret bit, one share pattern per decoding set.
///
/// `κ` is the least integer with `κλ_i >= w_i` for every node.
pub fn construct_feasibility(g: &StorageGraph) -> Result<SecureCode, CodeError> {
    if let Some((a, b)) = is_feasible(g).witness {
        return Err(CodeError::Infeasible(a, b));
    }
    let f = Gf::new(2, 1)?;
    let sets = g.decoding_sets();
    let delta: usize = sets.iter().map(|s| s.len() - 1).sum();
    let h = 1 + delta;
    let mut per_node: Vec<Vec<Vec<Elem>>> = vec![Vec::new(); g.n()];
    let mut next_b = 1;
    for s in sets {
        let mut last = units(h, &[0]);
        for &id in &s[..s.len() - 1] {
            per_node[g.position(id).expect("validated")].push(units(h, &[next_b]));
            last[next_b] = 1;
            next_b += 1;
        }
        per_node[g.position(*s.last().expect("non-empty")).expect("validated")].push(last);
    }
    let code = code_from_columns(&f, 1, h, per_node)?;
    let kappa = feasibility_kappa(code.node_widths(), &g.lambdas());
    Ok(code.with_kappa(kappa))
}

/// Least `κ` with `κλ_i >= w_i`.
pub fn feasibility_kappa(widths: &[usize], lambdas: &[Rational]) -> u64 {
    widths
        .iter()
        .zip(lambdas)
        .map(|(&w, &l)| (Rational::int(w as i64) / l).ceil_int().max(1) as u64)
        .max()
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{rate, verify_decoding, verify_security};
    use crate::graph::{fano_graph, mds_graph, wheel_graph};
    use crate::matrix::span_intersection;

    fn gf(q: u32) -> Gf {
        Gf::of_order(q).unwrap()
    }

    #[test]
    fn mds_m32_shape() {
        let c = construct_mds_uniform(3, 2, &gf(3)).unwrap();
        assert_eq!(c.a().row(0), &[0, 1, 2]);
        assert_eq!(c.b().row(0), &[1, 1, 1]);
        assert_eq!(rate(&c), Rational::int(1));
    }

    #[test]
    fn mds_examples() {
        let c = construct_mds_uniform(4, 3, &gf(5)).unwrap();
        assert_eq!(c.k(), 2);
        assert!(verify_code(&c, &mds_graph(4, 3, &ones(4)).unwrap()).unwrap().pass);
        let c = construct_mds_uniform(5, 4, &gf(5)).unwrap();
        assert_eq!(rate(&c), Rational::int(3));
        assert!(construct_mds_uniform(4, 2, &gf(5)).is_err());
        assert!(matches!(construct_mds_uniform(5, 3, &gf(4)), Err(CodeError::FieldTooSmall { .. })));
    }

    #[test]
    fn w4_fixture_matches_transcription() {
        let c = w4_fixture();
        assert_eq!(c.a().row(0), &[0, 1, 0, 1, 0, 1, 1]);
        assert_eq!(c.b().row(0), &[1, 1, 0, 1, 0, 1, 0]);
        assert_eq!(c.b().row(1), &[0, 0, 1, 0, 0, 0, 1]);
        assert_eq!(c.b().row(2), &[0, 0, 0, 0, 1, 0, 1]);
        assert_eq!(c.node_widths(), &[1, 2, 2, 2]);
    }

    #[test]
    fn wheel_components() {
        let g4 = wheel_graph(&ones(4)).unwrap();
        let c = construct_wheel_component(4, 1, &gf(11)).unwrap();
        assert_eq!(c.node_widths(), &[2, 1, 1, 1]);
        assert!(verify_code(&c, &g4).unwrap().pass);
        let g5 = wheel_graph(&ones(5)).unwrap();
        let c = construct_wheel_component(5, 3, &gf(5)).unwrap();
        assert_eq!(c.node_widths(), &[2, 1, 2, 2, 2]);
        assert!(verify_code(&c, &g5).unwrap().pass);
        for n in 4..=8 {
            let g = wheel_graph(&ones(n)).unwrap();
            let q1 = crate::galois::smallest_field_at_least(n as u32).unwrap();
            let f1 = Gf::new(q1.0, q1.1).unwrap();
            assert!(verify_code(&construct_wheel_component(n, 1, &f1).unwrap(), &g).unwrap().pass, "v1 N={n}");
            let q2 = crate::galois::smallest_field_at_least(n as u32 - 1).unwrap();
            let f2 = Gf::new(q2.0, q2.1).unwrap();
            let c2 = construct_wheel_component(n, 2, &f2).unwrap();
            assert!(verify_code(&c2, &g).unwrap().pass, "v2 N={n}");
        }
        for q in [2, 3, 4, 5] {
            assert!(verify_code(&construct_wheel_component(4, 2, &gf(q)).unwrap(), &g4).unwrap().pass);
        }
    }

    #[test]
    fn wheel_variant_one_needs_nonzero_points() {
        assert!(matches!(construct_wheel_component(5, 1, &gf(4)), Err(CodeError::FieldTooSmall { .. })));
    }

    #[test]
    fn fano_over_fields() {
        let g = fano_graph(&ones(7)).unwrap();
        for q in [2, 4, 8] {
            assert!(verify_code(&construct_fano(&gf(q)).unwrap(), &g).unwrap().pass);
        }
        assert_eq!(construct_fano(&gf(3)), Err(CodeError::OddCharacteristic));
        let odd = fano_matrices(&gf(2)).reinterpret(&gf(3)).unwrap();
        assert!(!verify_decoding(&odd, &g, &[4, 5, 6]).unwrap().0);
        assert!(!verify_security(&odd, &g, &[4, 5, 6]).unwrap().0);
    }

    #[test]
    fn fig5_fixture() {
        let g = intersection_graph(4, 2, &ones(6)).unwrap();
        for q in [2, 3, 5, 7] {
            assert!(verify_code(&intersection_fig5_fixture(&gf(q)), &g).unwrap().pass, "q={q}");
        }
    }

    #[test]
    fn intersection_bounds() {
        assert_eq!(intersection_field_bound(4, 2), 7);
        assert_eq!(intersection_field_bound(5, 2), 9);
        assert_eq!(intersection_field_bound(5, 3), 21);
        assert_eq!(intersection_field_bound(6, 3), 34);
        assert!(matches!(construct_intersection(4, 2, &gf(7), 1, 5), Err(CodeError::FieldTooSmall { .. })));
    }

    #[test]
    fn intersection_42_and_alignment() {
        let b = construct_intersection(4, 2, &gf(8), 7, 20).unwrap();
        let g = intersection_graph(4, 2, &ones(6)).unwrap();
        assert!(verify_code(&b.code, &g).unwrap().pass);
        assert_eq!(rate(&b.code), Rational::int(1));
        for e in g.decoding_sets() {
            let dc: Vec<usize> = (0..6).filter(|&p| !e.contains(&(p as u32 + 1))).collect();
            let cols = b.code.columns_of(&dc);
            assert_eq!(b.code.stacked().select_columns(&cols).unwrap().rank(), b.code.delta());
        }
        let again = construct_intersection(4, 2, &gf(8), 7, 20).unwrap();
        assert_eq!(again, b);
    }

    #[test]
    fn alternating_sign_relation() {
        let b = construct_intersection(5, 3, &gf(23), 3, 20).unwrap();
        let s = b.code.stacked();
        let labels = intersection_labels(5, 3);
        let col = |l: &[u32]| s.column(labels.iter().position(|x| x == l).unwrap());
        let f = b.code.field();
        // {2,3,4}: S1 = {1,3,4}, S2 = {1,2,4}, S3 = {1,2,3}
        let want: Vec<Elem> = (0..s.rows())
            .map(|r| {
                let v = f.sub(col(&[1, 2, 4])[r], col(&[1, 3, 4])[r]);
                f.sub(v, col(&[1, 2, 3])[r])
            })
            .collect();
        assert_eq!(col(&[2, 3, 4]), want);
        let inter = span_intersection(&s, &s).unwrap();
        assert_eq!(inter.cols(), s.rank());
    }

    #[test]
    fn feasibility_codes() {
        let g = mds_graph(3, 2, &ones(3)).unwrap();
        let c = construct_feasibility(&g).unwrap();
        assert_eq!(c.node_widths(), &[2, 2, 2]);
        assert_eq!(c.kappa(), 2);
        assert!(verify_code(&c, &g).unwrap().pass);
        assert_eq!(rate(&c), Rational::new(1, 2));
        let w = wheel_graph(&[Rational::int(1), Rational::int(2), Rational::int(2), Rational::int(2)]).unwrap();
        let c = construct_feasibility(&w).unwrap();
        assert!(verify_code(&c, &w).unwrap().pass);
        let lam: Vec<_> = (1..=4).map(|i| (i, Rational::int(1))).collect();
        let bad = StorageGraph::new(&lam, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert!(matches!(construct_feasibility(&bad), Err(CodeError::Infeasible(..))));
    }
}
