//! Finite fields `F_q`, `q = p^m`.
//!
//! Elements are plain integer indices in `[0, q)`: the index of the polynomial
//! `c_0 + c_1 x + ... + c_{m-1} x^{m-1}` is `sum c_i p^i`. Index 0 is the
//! additive identity and index 1 the multiplicative identity. Multiplication
//! goes through exp/log tables built once per field.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted by [`Gf`].
pub const MAX_FIELD_ORDER: u32 = 1 << 16;

/// An element index. Only meaningful together with the [`Gf`] it came from.
pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaloisError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds the limit {MAX_FIELD_ORDER}")]
    TooLarge { p: u32, m: u32 },
    #[error("no built-in modulus for F_{{{p}^{m}}}; supply one explicitly")]
    NotInTable { p: u32, m: u32 },
    #[error("modulus {0:?} is not a monic polynomial of the right degree")]
    BadModulus(Vec<u32>),
    #[error("modulus {0:?} is reducible")]
    Reducible(Vec<u32>),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("element index {index} out of range for a field of order {q}")]
    OutOfRange { index: u32, q: u32 },
}

/// Parameters identifying a finite field. This is also the JSON form:
/// `{"p": 2, "m": 2, "modulus": [1, 1, 1]}`, with `modulus` omitted for prime
/// fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    /// Ascending coefficients of a monic irreducible polynomial of degree `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldSpec {
    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }
}

/// Built-in moduli, ascending coefficients. Every entry is checked for
/// irreducibility by the unit tests.
const MODULUS_TABLE: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 1, 0, 1, 1, 0, 0, 0, 1]),
    (2, 9, &[1, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
    (2, 10, &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1]),
    (2, 11, &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, 12, &[1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1]),
    (2, 13, &[1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, 14, &[1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1]),
    (2, 15, &[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, 16, &[1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 1, 0, 0, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (5, 2, &[2, 0, 1]),
    (5, 3, &[1, 1, 0, 1]),
    (7, 2, &[1, 0, 1]),
    (7, 3, &[2, 0, 0, 1]),
    (11, 2, &[1, 0, 1]),
    (13, 2, &[2, 0, 1]),
];

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, m)` with `q = p^m`, if `q` is a prime power.
pub fn prime_power_parts(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// Smallest prime power `q >= n` that has a built-in modulus.
pub fn smallest_field_at_least(n: u32) -> Option<(u32, u32)> {
    (n.max(2)..=MAX_FIELD_ORDER).find_map(|q| {
        let (p, m) = prime_power_parts(q)?;
        (m == 1 || table_modulus(p, m).is_some()).then_some((p, m))
    })
}

fn table_modulus(p: u32, m: u32) -> Option<&'static [u32]> {
    MODULUS_TABLE
        .iter()
        .find(|(tp, tm, _)| *tp == p && *tm == m)
        .map(|(_, _, c)| *c)
}

// Polynomials over F_p as ascending coefficient vectors, used only while
// building tables and checking moduli.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let md = modulus.len() - 1;
    let lead_inv = inv_mod(modulus[md], p);
    while r.len() > md {
        let deg = r.len() - 1;
        let coef = (r[deg] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &c) in modulus.iter().enumerate() {
            let idx = deg - md + i;
            let sub = (coef as u64 * c as u64 % p as u64) as u32;
            r[idx] = (r[idx] + p - sub) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    poly_rem(&prod, modulus, p)
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn index_to_poly(mut idx: u32, p: u32, m: u32) -> Vec<u32> {
    let mut c = Vec::with_capacity(m as usize);
    for _ in 0..m {
        c.push(idx % p);
        idx /= p;
    }
    poly_trim(c)
}

fn poly_to_index(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Exhaustive irreducibility test: no monic factor of degree `1..=m/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = modulus.len().saturating_sub(1) as u32;
    if m == 0 {
        return false;
    }
    for d in 1..=m / 2 {
        for low in 0..p.pow(d) {
            let mut f = index_to_poly(low, p, d);
            f.resize(d as usize, 0);
            f.push(1);
            if poly_rem(modulus, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

struct Tables {
    spec: FieldSpec,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A finite field with precomputed arithmetic tables. Cloning is cheap.
#[derive(Clone)]
pub struct Gf {
    t: Arc<Tables>,
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.t.q)
    }
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t) || self.t.spec == other.t.spec
    }
}

impl Eq for Gf {}

impl Gf {
    /// `F_{p^m}` with the built-in modulus.
    pub fn new(p: u32, m: u32) -> Result<Self, GaloisError> {
        if m == 0 {
            return Err(GaloisError::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(GaloisError::NotPrime(p));
        }
        check_size(p, m)?;
        if m == 1 {
            return Ok(Self::build(FieldSpec { p, m, modulus: None }));
        }
        let modulus = table_modulus(p, m).ok_or(GaloisError::NotInTable { p, m })?;
        Ok(Self::build(FieldSpec {
            p,
            m,
            modulus: Some(modulus.to_vec()),
        }))
    }

    pub fn with_modulus(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self, GaloisError> {
        if m == 0 {
            return Err(GaloisError::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(GaloisError::NotPrime(p));
        }
        check_size(p, m)?;
        if m == 1 {
            return Ok(Self::build(FieldSpec { p, m, modulus: None }));
        }
        if modulus.len() != m as usize + 1
            || modulus[m as usize] != 1
            || modulus.iter().any(|&c| c >= p)
        {
            return Err(GaloisError::BadModulus(modulus));
        }
        if !is_irreducible(&modulus, p) {
            return Err(GaloisError::Reducible(modulus));
        }
        Ok(Self::build(FieldSpec {
            p,
            m,
            modulus: Some(modulus),
        }))
    }

    /// The field of order `q`, using the built-in modulus table.
    pub fn of_order(q: u32) -> Result<Self, GaloisError> {
        let (p, m) = prime_power_parts(q).ok_or(GaloisError::NotPrimePower(q))?;
        Self::new(p, m)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self, GaloisError> {
        match &spec.modulus {
            Some(md) if spec.m > 1 => Self::with_modulus(spec.p, spec.m, md.clone()),
            _ => Self::new(spec.p, spec.m),
        }
    }

    fn build(spec: FieldSpec) -> Self {
        let p = spec.p;
        let m = spec.m;
        let q = p.pow(m);
        let modulus = spec.modulus.clone().unwrap_or_else(|| vec![0, 1]);
        let mul_slow = |a: u32, b: u32| -> u32 {
            if m == 1 {
                return (a as u64 * b as u64 % p as u64) as u32;
            }
            let pa = index_to_poly(a, p, m);
            let pb = index_to_poly(b, p, m);
            poly_to_index(&poly_mulmod(&pa, &pb, &modulus, p), p)
        };
        let order = q - 1;
        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&g| {
                factors.iter().all(|&r| {
                    let (mut acc, mut base, mut e) = (1, g, order / r);
                    while e > 0 {
                        if e & 1 == 1 {
                            acc = mul_slow(acc, base);
                        }
                        base = mul_slow(base, base);
                        e >>= 1;
                    }
                    acc != 1
                })
            })
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut acc = 1u32;
        for i in 0..order {
            exp[i as usize] = acc;
            exp[(i + order) as usize] = acc;
            log[acc as usize] = i;
            acc = mul_slow(acc, generator);
        }
        Gf {
            t: Arc::new(Tables { spec, q, exp, log }),
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.t.spec
    }

    pub fn q(&self) -> u32 {
        self.t.q
    }

    pub fn p(&self) -> u32 {
        self.t.spec.p
    }

    pub fn m(&self) -> u32 {
        self.t.spec.m
    }

    pub fn has_even_characteristic(&self) -> bool {
        self.p() == 2
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    pub fn contains(&self, x: Elem) -> bool {
        x < self.t.q
    }

    /// Image of an integer under `Z -> F_p ⊂ F_q`.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p() as i64) as Elem
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.t.q
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.p();
        if p == 2 {
            return a ^ b;
        }
        if self.m() == 1 {
            return (a + b) % p;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.p();
        if p == 2 {
            return a;
        }
        if self.m() == 1 {
            return (p - a) % p;
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        while a > 0 {
            out += ((p - a % p) % p) * place;
            a /= p;
            place *= p;
        }
        out
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &self.t;
        t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GaloisError> {
        if a == 0 {
            return Err(GaloisError::InverseOfZero);
        }
        let t = &self.t;
        let order = t.q - 1;
        Ok(t.exp[((order - t.log[a as usize]) % order) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GaloisError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let t = &self.t;
        let order = (t.q - 1) as u64;
        t.exp[((t.log[a as usize] as u64 * (e % order)) % order) as usize]
    }

    pub fn element(&self, index: u32) -> Result<FieldElement, GaloisError> {
        if !self.contains(index) {
            return Err(GaloisError::OutOfRange { index, q: self.q() });
        }
        Ok(FieldElement {
            field: self.clone(),
            index,
        })
    }
}

fn check_size(p: u32, m: u32) -> Result<(), GaloisError> {
    let mut q: u64 = 1;
    for _ in 0..m {
        q *= p as u64;
        if q > MAX_FIELD_ORDER as u64 {
            return Err(GaloisError::TooLarge { p, m });
        }
    }
    Ok(())
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// An element bundled with its field, for callers that want mixed-field
/// operands rejected instead of silently misinterpreted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Gf,
    index: Elem,
}

impl FieldElement {
    pub fn index(&self) -> Elem {
        self.index
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    fn same_field(&self, other: &Self) -> Result<(), GaloisError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(GaloisError::FieldMismatch)
        }
    }

    fn wrap(&self, index: Elem) -> Self {
        FieldElement {
            field: self.field.clone(),
            index,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GaloisError> {
        self.same_field(other)?;
        Ok(self.wrap(self.field.add(self.index, other.index)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GaloisError> {
        self.same_field(other)?;
        Ok(self.wrap(self.field.sub(self.index, other.index)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GaloisError> {
        self.same_field(other)?;
        Ok(self.wrap(self.field.mul(self.index, other.index)))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.field.neg(self.index))
    }

    pub fn inv(&self) -> Result<Self, GaloisError> {
        Ok(self.wrap(self.field.inv(self.index)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.field.pow(self.index, e))
    }
}
