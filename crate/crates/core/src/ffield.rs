//! Small finite fields `F_q`, `q = p^k`, with table-driven arithmetic.
//!
//! Elements are stored as an index in `[0, q)` whose base-`p` digits are the
//! coefficients of the polynomial representative: index `Σ c_i p^i` stands
//! for `Σ c_i t^i` modulo the defining polynomial. Ordering elements by index
//! is the lexicographic order on the coefficient vector written from the
//! highest power down, so `0` always comes first and the prime subfield
//! occupies indices `0..p`.

use std::fmt;

use thiserror::Error;

/// Default cap on the field size.
pub const DEFAULT_MAX_Q: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    InvalidDegree,
    #[error("field of size {p}^{k} exceeds the configured bound {max_q}")]
    SizeExceedsBudget { p: u64, k: u32, max_q: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    MixedFields,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of some `F_q`. Carries the `(p, k)` tag of its field so that
/// mixing elements of different fields is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FFElem {
    p: u32,
    k: u32,
    repr: u32,
}

impl FFElem {
    /// Index of the element in the field's enumeration order.
    pub fn index(&self) -> u32 {
        self.repr
    }

    pub fn is_zero(&self) -> bool {
        self.repr == 0
    }
}

/// Arithmetic context for `F_{p^k}`.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    k: u32,
    q: u32,
    modulus: Option<Vec<u32>>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}

impl Eq for FieldCtx {}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

impl FieldCtx {
    /// `F_{p^k}` with the default size cap.
    pub fn new(p: u64, k: u32) -> Result<Self, FieldError> {
        Self::with_max_q(p, k, DEFAULT_MAX_Q)
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1)
    }

    pub fn with_max_q(p: u64, k: u32, max_q: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::InvalidDegree);
        }
        let too_big = FieldError::SizeExceedsBudget { p, k, max_q };
        let q = p.checked_pow(k).ok_or(too_big.clone())?;
        if q > max_q as u64 {
            return Err(too_big);
        }
        let (p, q) = (p as u32, q as u32);
        let modulus = if k > 1 {
            Some(first_irreducible(p, k as usize))
        } else {
            None
        };

        let qs = q as usize;
        let digits: Vec<Vec<u32>> = (0..q).map(|i| to_digits(i, p, k as usize)).collect();
        let mut add = vec![0u32; qs * qs];
        let mut mul = vec![0u32; qs * qs];
        for a in 0..qs {
            for b in 0..qs {
                let s: Vec<u32> = digits[a]
                    .iter()
                    .zip(&digits[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                add[a * qs + b] = from_digits(&s, p);
                let m = match &modulus {
                    None => vec![(digits[a][0] * digits[b][0]) % p],
                    Some(md) => mul_mod_poly(&digits[a], &digits[b], md, p),
                };
                mul[a * qs + b] = from_digits(&m, p);
            }
        }
        let neg: Vec<u32> = (0..qs)
            .map(|a| (0..qs).find(|&b| add[a * qs + b] == 0).unwrap() as u32)
            .collect();
        let inv: Vec<u32> = (0..qs)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u32
                }
            })
            .collect();

        Ok(FieldCtx {
            p,
            k,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Monic defining polynomial, coefficients from degree 0 up to degree `k`.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.modulus.as_deref()
    }

    fn wrap(&self, repr: u32) -> FFElem {
        FFElem {
            p: self.p,
            k: self.k,
            repr,
        }
    }

    fn check(&self, a: &FFElem) -> Result<u32, FieldError> {
        if a.p == self.p && a.k == self.k {
            Ok(a.repr)
        } else {
            Err(FieldError::MixedFields)
        }
    }

    pub fn zero(&self) -> FFElem {
        self.wrap(0)
    }

    pub fn one(&self) -> FFElem {
        self.wrap(1)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FFElem {
        self.wrap(n.rem_euclid(self.p as i64) as u32)
    }

    /// Element with the given coefficient vector (lowest power first).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FFElem, FieldError> {
        if coeffs.len() != self.k as usize {
            return Err(FieldError::MixedFields);
        }
        let c: Vec<u32> = coeffs.iter().map(|c| c % self.p).collect();
        Ok(self.wrap(from_digits(&c, self.p)))
    }

    pub fn coeffs(&self, a: &FFElem) -> Vec<u32> {
        to_digits(a.repr, self.p, self.k as usize)
    }

    /// All `q` elements, zero first, in coefficient-vector lexicographic order.
    pub fn elements(&self) -> Vec<FFElem> {
        (0..self.q).map(|i| self.wrap(i)).collect()
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> Result<FFElem, FieldError> {
        Ok(self.wrap(self.add_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> Result<FFElem, FieldError> {
        let b = self.neg[self.check(b)? as usize];
        Ok(self.wrap(self.add_raw(self.check(a)?, b)))
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> Result<FFElem, FieldError> {
        Ok(self.wrap(self.mul_raw(self.check(a)?, self.check(b)?)))
    }

    pub fn neg(&self, a: &FFElem) -> Result<FFElem, FieldError> {
        Ok(self.wrap(self.neg[self.check(a)? as usize]))
    }

    pub fn inv(&self, a: &FFElem) -> Result<FFElem, FieldError> {
        let a = self.check(a)?;
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.wrap(self.inv[a as usize]))
    }

    pub fn pow(&self, a: &FFElem, e: u64) -> Result<FFElem, FieldError> {
        let mut base = self.check(a)?;
        let mut e = e;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        Ok(self.wrap(acc))
    }

    pub(crate) fn elem(&self, repr: u32) -> FFElem {
        debug_assert!(repr < self.q);
        self.wrap(repr)
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.q + b) as usize]
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.q + b) as usize]
    }
}

fn to_digits(mut n: u32, p: u32, k: usize) -> Vec<u32> {
    let mut d = Vec::with_capacity(k);
    for _ in 0..k {
        d.push(n % p);
        n /= p;
    }
    d
}

fn from_digits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Product of two residues (degree < k) reduced by the monic `modulus`.
fn mul_mod_poly(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u32; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (k..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &m) in modulus[..k].iter().enumerate() {
            let idx = deg - k + i;
            prod[idx] = (prod[idx] + (p - c) * m % p) % p;
        }
    }
    prod.truncate(k);
    prod
}

/// Remainder of `a` modulo the monic `m` over `F_p` (coefficients low to high).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - c) * mi % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Monic polynomials of degree `deg` over `F_p`, in lexicographic order of
/// the coefficient vector written from degree `deg - 1` down to 0.
fn monic_polys(p: u32, deg: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(deg as u32);
    (0..count).map(move |i| {
        let mut c = to_digits(i as u32, p, deg);
        c.push(1);
        c
    })
}

/// Irreducibility over `F_p` by trial division with every monic polynomial
/// of degree `1..=deg/2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for m in monic_polys(p, d) {
            if poly_rem(poly, &m, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u32, k: usize) -> Vec<u32> {
    monic_polys(p, k)
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}
