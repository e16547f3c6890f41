//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order; serialization walks the map from the largest
//! monomial down. Coefficients stay in `Z` and are only reduced when a
//! polynomial is evaluated over a particular finite field.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::ffield::{FFElem, FieldCtx};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("negative exponent at position {pos}")]
    ExponentNegative { pos: usize },
    #[error("expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable x{var} has degree {degree} > 1")]
    DegreeInVariableExceedsOne { var: usize, degree: u32 },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("linear substitution matrix is singular")]
    SingularMatrix,
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("variable x{0} occurs in the polynomial")]
    VariableNotAbsent(usize),
    #[error("variable index {index} out of range for {num_vars} variables")]
    VariableOutOfRange { index: usize, num_vars: usize },
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
}

/// Degree of a polynomial; the zero polynomial has degree `MinusInfinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::Finite(d) => Some(d),
            Degree::MinusInfinity => None,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::MinusInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    num_vars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MPoly {
    pub fn zero(num_vars: usize) -> Self {
        MPoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial::one(num_vars), c.into());
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, 1)
    }

    /// The variable `x_i`.
    pub fn var(num_vars: usize, i: usize) -> Self {
        assert!(i < num_vars, "variable index out of range");
        let mut e = vec![0; num_vars];
        e[i] = 1;
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial(e), BigInt::one());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials and dropping zero coefficients.
    pub fn from_terms<I, C>(num_vars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(PolyError::DimensionMismatch {
                    expected: num_vars,
                    got: e.len(),
                });
            }
            p.add_term(Monomial(e), c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms from the largest monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_default()
    }

    /// `Some(c)` when the polynomial is a constant (including zero).
    pub fn constant_value(&self) -> Option<BigInt> {
        match self.total_degree() {
            Degree::MinusInfinity => Some(BigInt::zero()),
            Degree::Finite(0) => Some(self.terms.values().next().unwrap().clone()),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|m| m.degree())
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    pub fn degree_in(&self, i: usize) -> Degree {
        self.terms
            .keys()
            .map(|m| m.0[i])
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut acc = MPoly::one(self.num_vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, c: &BigInt) -> MPoly {
        let mut out = MPoly::zero(self.num_vars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    fn map_monomials(&self, num_vars: usize, f: impl Fn(&[u32]) -> Vec<u32>) -> MPoly {
        let mut out = MPoly::zero(num_vars);
        for (m, c) in &self.terms {
            out.add_term(Monomial(f(&m.0)), c.clone());
        }
        out
    }

    /// Inserts a fresh variable at index `new_var` (later variables shift up
    /// by one) and homogenizes with it to degree `total_degree`.
    pub fn homogenize(&self, new_var: usize) -> Result<MPoly, PolyError> {
        if new_var > self.num_vars {
            return Err(PolyError::VariableOutOfRange {
                index: new_var,
                num_vars: self.num_vars + 1,
            });
        }
        let d = self
            .total_degree()
            .finite()
            .ok_or(PolyError::ZeroPolynomial)?;
        Ok(self.map_monomials(self.num_vars + 1, |e| {
            let mut v = e.to_vec();
            v.insert(new_var, d - e.iter().sum::<u32>());
            v
        }))
    }

    /// Sets `x_var = 1` and removes the variable.
    pub fn dehomogenize(&self, var: usize) -> Result<MPoly, PolyError> {
        self.check_var(var)?;
        Ok(self.map_monomials(self.num_vars - 1, |e| {
            let mut v = e.to_vec();
            v.remove(var);
            v
        }))
    }

    /// Removes a variable that does not occur.
    pub fn drop_var(&self, var: usize) -> Result<MPoly, PolyError> {
        self.check_var(var)?;
        if self.uses_var(var) {
            return Err(PolyError::VariableNotAbsent(var));
        }
        self.dehomogenize(var)
    }

    /// Adds an unused variable at index `var`, shifting later ones up.
    pub fn insert_var(&self, var: usize) -> Result<MPoly, PolyError> {
        if var > self.num_vars {
            return Err(PolyError::VariableOutOfRange {
                index: var,
                num_vars: self.num_vars + 1,
            });
        }
        Ok(self.map_monomials(self.num_vars + 1, |e| {
            let mut v = e.to_vec();
            v.insert(var, 0);
            v
        }))
    }

    /// Re-embeds the polynomial in a ring with `num_vars` variables; the
    /// existing variables keep their indices.
    pub fn with_num_vars(&self, num_vars: usize) -> Result<MPoly, PolyError> {
        if num_vars < self.num_vars {
            for i in num_vars..self.num_vars {
                if self.uses_var(i) {
                    return Err(PolyError::VariableNotAbsent(i));
                }
            }
        }
        Ok(self.map_monomials(num_vars, |e| {
            let mut v = e.to_vec();
            v.resize(num_vars, 0);
            v
        }))
    }

    fn check_var(&self, i: usize) -> Result<(), PolyError> {
        if i >= self.num_vars {
            Err(PolyError::VariableOutOfRange {
                index: i,
                num_vars: self.num_vars,
            })
        } else {
            Ok(())
        }
    }

    /// Writes a homogeneous `F` with `deg_{x_i} F <= 1` as
    /// `F = x_i * low + high`, neither part involving `x_i`.
    pub fn decompose_linear(&self, i: usize) -> Result<(MPoly, MPoly), PolyError> {
        self.check_var(i)?;
        if !self.is_homogeneous() {
            return Err(PolyError::NotHomogeneous);
        }
        if let Degree::Finite(d) = self.degree_in(i) {
            if d > 1 {
                return Err(PolyError::DegreeInVariableExceedsOne { var: i, degree: d });
            }
        }
        let mut low = MPoly::zero(self.num_vars);
        let mut high = MPoly::zero(self.num_vars);
        for (m, c) in &self.terms {
            if m.0[i] == 1 {
                let mut e = m.0.clone();
                e[i] = 0;
                low.add_term(Monomial(e), c.clone());
            } else {
                high.add_term(m.clone(), c.clone());
            }
        }
        Ok((low, high))
    }

    pub fn partial(&self, i: usize) -> MPoly {
        let mut out = MPoly::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut v = m.0.clone();
                v[i] -= 1;
                out.add_term(Monomial(v), c * BigInt::from(e));
            }
        }
        out
    }

    /// Indices `j` such that `F` and all its first partials vanish at the
    /// coordinate point `e_j`, i.e. every monomial has degree at most
    /// `deg F - 2` in `x_j`.
    pub fn coordinate_singularity_scan(&self) -> Vec<usize> {
        let d = match self.total_degree() {
            Degree::Finite(d) if d >= 2 => d,
            _ => return Vec::new(),
        };
        (0..self.num_vars)
            .filter(|&j| self.terms.keys().all(|m| m.0[j] + 2 <= d))
            .collect()
    }

    /// Renames `x_i` to `x_{perm[i]}`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<MPoly, PolyError> {
        let n = self.num_vars;
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(PolyError::InvalidPermutation(n));
        }
        for &t in perm {
            if t >= n || seen[t] {
                return Err(PolyError::InvalidPermutation(n));
            }
            seen[t] = true;
        }
        Ok(self.map_monomials(n, |e| {
            let mut v = vec![0; n];
            for (i, &x) in e.iter().enumerate() {
                v[perm[i]] = x;
            }
            v
        }))
    }

    /// Substitutes `x_i ↦ Σ_j m[i][j] x_j`. The matrix must be invertible over Q.
    pub fn substitute_linear(&self, m: &[Vec<i64>]) -> Result<MPoly, PolyError> {
        let n = self.num_vars;
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(PolyError::DimensionMismatch {
                expected: n,
                got: m.len(),
            });
        }
        let big: Vec<Vec<BigInt>> = m
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        if determinant(&big).is_zero() {
            return Err(PolyError::SingularMatrix);
        }
        let images: Vec<MPoly> = big
            .iter()
            .map(|row| {
                let mut p = MPoly::zero(n);
                for (j, c) in row.iter().enumerate() {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    p.add_term(Monomial(e), c.clone());
                }
                p
            })
            .collect();
        // cache powers of each image
        let mut powers: Vec<Vec<MPoly>> = images
            .iter()
            .map(|p| vec![MPoly::one(n), p.clone()])
            .collect();
        let mut out = MPoly::zero(n);
        for (mono, c) in &self.terms {
            let mut t = MPoly::constant(n, c.clone());
            for (i, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Value at `point` over `ctx`, coefficients reduced into the prime subfield.
    pub fn eval(&self, point: &[FFElem], ctx: &FieldCtx) -> Result<FFElem, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let raw: Vec<u32> = point.iter().map(|e| e.index()).collect();
        let compiled = self.compile(ctx);
        Ok(ctx.elem(compiled.eval(&raw, ctx)))
    }

    pub(crate) fn compile(&self, ctx: &FieldCtx) -> CompiledPoly {
        let p = BigInt::from(ctx.p());
        let mut terms = Vec::with_capacity(self.terms.len());
        let mut max_exp = 0;
        for (m, c) in &self.terms {
            let r = ((c % &p) + &p) % &p;
            let r = r.to_u32().unwrap();
            if r == 0 {
                continue;
            }
            let factors: Vec<(usize, usize)> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e as usize))
                    .collect();
            max_exp = max_exp.max(m.0.iter().copied().max().unwrap_or(0) as usize);
            terms.push((r, factors));
        }
        CompiledPoly { terms, max_exp }
    }

    pub fn reduces_to_zero_mod(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.terms.values().all(|c| (c % &p).is_zero())
    }

    /// Canonical text form.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str, num_vars: usize) -> Result<MPoly, PolyError> {
        parse_with(text, num_vars, &|name| {
            let idx = name.strip_prefix('x')?;
            if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            if idx.len() > 1 && idx.starts_with('0') {
                return None;
            }
            let i: usize = idx.parse().ok()?;
            (i < num_vars).then_some(i)
        })
    }

    /// Parses with the number of variables inferred as one more than the
    /// largest index used (at least `min_vars`).
    pub fn parse_auto(text: &str, min_vars: usize) -> Result<MPoly, PolyError> {
        let used = tokenize(text)?
            .iter()
            .filter_map(|(t, _)| match t {
                Tok::Ident(name) => name.strip_prefix('x')?.parse::<usize>().ok(),
                _ => None,
            })
            .map(|i| i + 1)
            .max()
            .unwrap_or(0);
        MPoly::parse(text, used.max(min_vars))
    }
}

/// Polynomial with coefficients already reduced into `F_p`, ready for
/// repeated evaluation over one field.
pub(crate) struct CompiledPoly {
    terms: Vec<(u32, Vec<(usize, usize)>)>,
    max_exp: usize,
}

impl CompiledPoly {
    pub(crate) fn max_exp(&self) -> usize {
        self.max_exp
    }

    pub(crate) fn eval(&self, point: &[u32], ctx: &FieldCtx) -> u32 {
        let mut acc = 0u32;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, e) in factors {
                for _ in 0..e {
                    t = ctx.mul_raw(t, point[i]);
                }
                if t == 0 {
                    break;
                }
            }
            acc = ctx.add_raw(acc, t);
        }
        acc
    }

    /// Evaluation with a table `pows[x * stride + e] = x^e`.
    #[inline]
    pub(crate) fn eval_with_powers(
        &self,
        point: &[u32],
        ctx: &FieldCtx,
        pows: &[u32],
        stride: usize,
    ) -> u32 {
        let mut acc = 0u32;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, e) in factors {
                t = ctx.mul_raw(t, pows[point[i] as usize * stride + e]);
                if t == 0 {
                    break;
                }
            }
            acc = ctx.add_raw(acc, t);
        }
        acc
    }
}

/// Fraction-free Gaussian elimination (Bareiss).
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.num_vars, rhs.num_vars, "mismatched polynomial rings");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.num_vars, rhs.num_vars, "mismatched polynomial rings");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.num_vars, rhs.num_vars, "mismatched polynomial rings");
        let mut out = MPoly::zero(self.num_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.scale(&BigInt::from(-1))
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let vars: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            format!("x{i}")
                        } else {
                            format!("x{i}^{e}")
                        }
                    })
                    .collect();
            if vars.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{abs}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, PolyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                out.push((Tok::Int(n), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(PolyError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

type Resolver<'a> = dyn Fn(&str) -> Option<usize> + 'a;

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    num_vars: usize,
    resolve: &'a Resolver<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn err<T>(&self, msg: &str) -> Result<T, PolyError> {
        Err(PolyError::Syntax {
            pos: self.offset(),
            msg: msg.to_string(),
        })
    }

    fn expr(&mut self) -> Result<MPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MPoly, PolyError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MPoly, PolyError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MPoly, PolyError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            match self.peek().cloned() {
                Some(Tok::Minus) => Err(PolyError::ExponentNegative { pos: at }),
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e = n.to_u32().ok_or(PolyError::Syntax {
                        pos: at,
                        msg: "exponent too large".into(),
                    })?;
                    Ok(base.pow(e))
                }
                _ => self.err("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MPoly, PolyError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(MPoly::constant(self.num_vars, n))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match (self.resolve)(&name) {
                    Some(i) => Ok(MPoly::var(self.num_vars, i)),
                    None => Err(PolyError::UnknownVariable { name, pos: at }),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `text` into a polynomial in `num_vars` variables, mapping
/// identifiers to variable indices through `resolve`.
pub fn parse_with(text: &str, num_vars: usize, resolve: &Resolver<'_>) -> Result<MPoly, PolyError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        num_vars,
        resolve,
    };
    if parser.toks.is_empty() {
        return parser.err("empty input");
    }
    let p = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.err("unexpected trailing input");
    }
    Ok(p)
}

impl std::str::FromStr for MPoly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MPoly::parse_auto(s, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> MPoly {
        MPoly::parse(s, n).unwrap()
    }

    #[test]
    fn parse_examples() {
        let f = p("x0^2 + x1^2", 2);
        assert_eq!(
            f,
            MPoly::from_terms(2, [(vec![2, 0], 1), (vec![0, 2], 1)]).unwrap()
        );
        let g = p("x0*(x1 + 2)", 2);
        assert_eq!(
            g,
            MPoly::from_terms(2, [(vec![1, 1], 1), (vec![1, 0], 2)]).unwrap()
        );
        assert!(matches!(
            MPoly::parse("x0 + y", 2),
            Err(PolyError::UnknownVariable { ref name, pos: 5 }) if name == "y"
        ));
        assert!(matches!(
            MPoly::parse("x2", 2),
            Err(PolyError::UnknownVariable { .. })
        ));
        assert_eq!(
            MPoly::parse("x0^-2", 1),
            Err(PolyError::ExponentNegative { pos: 3 })
        );
        assert!(matches!(
            MPoly::parse("x0 +", 1),
            Err(PolyError::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            MPoly::parse("(x0", 1),
            Err(PolyError::Syntax { .. })
        ));
        assert!(matches!(
            MPoly::parse("x0 $ 1", 1),
            Err(PolyError::Syntax { pos: 3, .. })
        ));
        assert!(matches!(MPoly::parse("", 1), Err(PolyError::Syntax { .. })));
    }

    #[test]
    fn serialization_is_canonical() {
        let f = p("3 - x1*x0 + x0^2 - 2*x1^3", 2);
        assert_eq!(f.to_string(), "-2*x1^3 + x0^2 - x0*x1 + 3");
        assert_eq!(MPoly::zero(3).to_string(), "0");
        assert_eq!(p(&f.to_string(), 2), f);
    }

    #[test]
    fn eval_examples() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        let f = p("x0^2 + x1^2", 2);
        assert_eq!(
            f.eval(&[f5.from_int(1), f5.from_int(2)], &f5).unwrap(),
            f5.zero()
        );
        let c = MPoly::constant(2, 7);
        assert_eq!(c.eval(&[f5.zero(), f5.one()], &f5).unwrap(), f5.from_int(2));
        let f3 = FieldCtx::new(3, 1).unwrap();
        let g = p("x0*x1*x2", 3);
        let pt = [f3.one(), f3.one(), f3.zero()];
        assert_eq!(g.eval(&pt, &f3).unwrap(), f3.zero());
        assert!(matches!(
            g.eval(&pt[..2], &f3),
            Err(PolyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degrees() {
        let f = p("x0*x1 + x2^2", 3);
        assert_eq!(f.total_degree(), Degree::Finite(2));
        assert!(f.is_homogeneous());
        assert!(!p("x0^2 + x1", 2).is_homogeneous());
        assert_eq!(p("x0*x1^3", 2).degree_in(1), Degree::Finite(3));
        assert_eq!(MPoly::zero(2).total_degree(), Degree::MinusInfinity);
        assert!(Degree::MinusInfinity < Degree::Finite(0));
    }

    #[test]
    fn homogenize_examples() {
        // t-variables x0, x1 shift to x1, x2; the new variable is x0.
        let f = p("x0*x1 + x0 + 3", 2);
        let h = f.homogenize(0).unwrap();
        assert_eq!(h, p("x1*x2 + x0*x1 + 3*x0^2", 3));
        assert_eq!(h.dehomogenize(0).unwrap(), f);

        let g = p("x0^2 + x0*x1", 2);
        assert_eq!(g.homogenize(2).unwrap(), p("x0^2 + x0*x1", 3));
        let one = MPoly::one(2);
        assert_eq!(one.homogenize(0).unwrap(), MPoly::one(3));
        assert_eq!(MPoly::zero(1).homogenize(0), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn decompose_linear_examples() {
        let f = p("x3*(x0^2+x1^2) + x0^3", 4);
        let (low, high) = f.decompose_linear(3).unwrap();
        assert_eq!(low, p("x0^2 + x1^2", 4));
        assert_eq!(high, p("x0^3", 4));

        let g = p("x0^2 + x1^2", 3);
        let (low, high) = g.decompose_linear(2).unwrap();
        assert!(low.is_zero());
        assert_eq!(high, g);

        assert_eq!(
            p("x3^2*x0", 4).decompose_linear(3),
            Err(PolyError::DegreeInVariableExceedsOne { var: 3, degree: 2 })
        );
        assert_eq!(
            p("x0 + x1^2", 2).decompose_linear(0),
            Err(PolyError::NotHomogeneous)
        );
    }

    /// Independent check: evaluate every partial derivative at e_j over Z.
    fn singular_by_evaluation(f: &MPoly) -> Vec<usize> {
        let n = f.num_vars();
        (0..n)
            .filter(|&j| {
                let mut e = vec![0u32; n];
                e[j] = 1;
                let at = |g: &MPoly| -> BigInt {
                    g.terms()
                        .filter(|(m, _)| {
                            m.exponents()
                                .iter()
                                .enumerate()
                                .all(|(i, &x)| i == j || x == 0)
                        })
                        .map(|(_, c)| c.clone())
                        .sum()
                };
                at(f).is_zero() && (0..n).all(|i| at(&f.partial(i)).is_zero())
            })
            .collect()
    }

    #[test]
    fn singularity_scan_examples() {
        let f = p("x2*x0*x1", 3);
        assert_eq!(f.coordinate_singularity_scan(), vec![0, 1, 2]);
        assert!(p("x0^2 + x1^2 + x2^2", 3)
            .coordinate_singularity_scan()
            .is_empty());
        // x2 is absent, so e_2 is a cone vertex and also singular.
        let g = p("x3*(x0^2+x1^2) + x0^3", 4);
        assert_eq!(g.coordinate_singularity_scan(), vec![2, 3]);
        assert_eq!(singular_by_evaluation(&g), vec![2, 3]);
    }

    #[test]
    fn permute_and_substitute() {
        let f = p("x0^2 + 3*x1*x2", 3);
        assert_eq!(f.permute_vars(&[1, 0, 2]).unwrap(), p("x1^2 + 3*x0*x2", 3));
        assert_eq!(
            f.permute_vars(&[0, 0, 2]),
            Err(PolyError::InvalidPermutation(3))
        );
        let id = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(f.substitute_linear(&id).unwrap(), f);
        let sing = vec![vec![1, 2, 0], vec![2, 4, 0], vec![0, 0, 1]];
        assert_eq!(f.substitute_linear(&sing), Err(PolyError::SingularMatrix));
        let m = vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(
            f.substitute_linear(&m).unwrap(),
            p("(x0+x1)^2 + 3*x1*x2", 3)
        );
    }

    #[test]
    fn determinant_small() {
        let m = |rows: Vec<Vec<i64>>| -> Vec<Vec<BigInt>> {
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect()
        };
        assert_eq!(
            determinant(&m(vec![vec![2, 3], vec![1, 4]])),
            BigInt::from(5)
        );
        assert_eq!(
            determinant(&m(vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]])),
            BigInt::from(-1)
        );
        assert_eq!(
            determinant(&m(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]])),
            BigInt::from(0)
        );
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = MPoly> {
        prop::collection::vec((prop::collection::vec(0u32..4, n), -5i64..=5), 0..6)
            .prop_map(move |ts| MPoly::from_terms(n, ts).unwrap())
    }

    proptest! {
        #[test]
        fn roundtrip(f in arb_poly(3)) {
            prop_assert_eq!(MPoly::parse(&f.to_string(), 3).unwrap(), f);
        }

        #[test]
        fn eval_is_ring_hom(f in arb_poly(3), g in arb_poly(3), h in arb_poly(3), pt in prop::collection::vec(0i64..7, 3)) {
            let ctx = FieldCtx::new(7, 1).unwrap();
            let pt: Vec<FFElem> = pt.into_iter().map(|x| ctx.from_int(x)).collect();
            let lhs = (&(&f * &g) + &h).eval(&pt, &ctx).unwrap();
            let fg = ctx.mul(&f.eval(&pt, &ctx).unwrap(), &g.eval(&pt, &ctx).unwrap()).unwrap();
            let rhs = ctx.add(&fg, &h.eval(&pt, &ctx).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn homogenize_dehomogenize(f in arb_poly(3), at in 0usize..4) {
            prop_assume!(!f.is_zero());
            let h = f.homogenize(at).unwrap();
            prop_assert!(h.is_homogeneous());
            prop_assert_eq!(h.total_degree(), f.total_degree());
            prop_assert_eq!(h.dehomogenize(at).unwrap(), f);
        }

        #[test]
        fn decompose_reconstructs(f in arb_poly(4), i in 0usize..4) {
            // force homogeneity and degree <= 1 in x_i
            let f = MPoly::from_terms(4, f.terms().filter(|(m, _)| m.exponents()[i] <= 1).map(|(m, c)| (m.exponents().to_vec(), c.clone()))).unwrap();
            let f = match f.total_degree().finite() {
                Some(d) => MPoly::from_terms(4, f.terms().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.exponents().to_vec(), c.clone()))).unwrap(),
                None => f,
            };
            let (low, high) = f.decompose_linear(i).unwrap();
            prop_assert!(!low.uses_var(i) && !high.uses_var(i));
            let xi = MPoly::var(4, i);
            prop_assert_eq!(&(&xi * &low) + &high, f);
        }

        #[test]
        fn scan_matches_evaluation(f in arb_poly(4)) {
            let f = match f.total_degree().finite() {
                Some(d) => MPoly::from_terms(4, f.terms().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.exponents().to_vec(), c.clone()))).unwrap(),
                None => f,
            };
            prop_assume!(f.total_degree() >= Degree::Finite(2));
            prop_assert_eq!(f.coordinate_singularity_scan(), singular_by_evaluation(&f));
        }
    }
}
