//! Affine Potts-model hypersurfaces `Z_G(q, t) = 0` of finite multigraphs.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::certify::{self, Certificate, CertifyError};
use crate::counting::{self, balanced_residue, CountError};
use crate::ffield::FieldCtx;
use crate::kclass;
use crate::mpoly::MPoly;

/// Largest edge count for the subset expansion.
pub const DEFAULT_MAX_EDGES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PottsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: vertex {vertex} out of range for {vertices} vertices")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("q must be nonzero")]
    ZeroQ,
    #[error("graph has no edges")]
    NoEdges,
    #[error("{edges} edges exceed the subset budget of {max}")]
    BudgetExceeded { edges: usize, max: usize },
    #[error("top-degree part is not a nonzero multiple of t_1...t_n: {0}")]
    LeadingFormUnexpected(String),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, PottsError> {
        for (i, &(u, v)) in edges.iter().enumerate() {
            if let Some(&bad) = [u, v].iter().find(|&&x| x >= vertices) {
                return Err(PottsError::VertexOutOfRange {
                    line: i + 2,
                    vertex: bad,
                    vertices,
                });
            }
        }
        Ok(Graph { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn loops(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].0 == self.edges[i].1)
            .collect()
    }

    /// Components of `(V, A)` for the edges whose bits are set in `mask`.
    pub fn components(&self, mask: u64) -> usize {
        let mut uf = UnionFind::new(self.vertices);
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                uf.union(u, v);
            }
        }
        uf.count
    }

    pub fn is_connected(&self) -> bool {
        self.vertices > 0 && self.components(u64::MAX) == 1
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.vertices);
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
        write!(f, "V={} E=[{}]", self.vertices, e.join(" "))
    }
}

struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            count: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a] = b;
            self.count -= 1;
        }
    }
}

/// First line `V`, then one `u v` pair per line (0-indexed). Blank lines and
/// `#` comments are ignored.
pub fn graph_parse(text: &str) -> Result<Graph, PottsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, first) = lines.next().ok_or(PottsError::Syntax {
        line: 1,
        msg: "missing vertex count".into(),
    })?;
    let vertices: usize = first.parse().map_err(|_| PottsError::Syntax {
        line,
        msg: format!("expected a vertex count, found `{first}`"),
    })?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let nums: Vec<&str> = l.split_whitespace().collect();
        let parsed: Option<Vec<usize>> = nums.iter().map(|t| t.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[u, v]) => {
                if let Some(&bad) = [u, v].iter().find(|&&x| x >= vertices) {
                    return Err(PottsError::VertexOutOfRange {
                        line,
                        vertex: bad,
                        vertices,
                    });
                }
                edges.push((u, v));
            }
            _ => {
                return Err(PottsError::Syntax {
                    line,
                    msg: format!("expected `u v`, found `{l}`"),
                })
            }
        }
    }
    Ok(Graph { vertices, edges })
}

/// `Σ_{A ⊆ E} q^{k(V, A)} Π_{e ∈ A} t_e` in variables `t_1..t_n`, stored as
/// `x0..x_{n-1}`.
pub fn potts_polynomial(g: &Graph, q: i64) -> Result<MPoly, PottsError> {
    potts_polynomial_with(g, q, DEFAULT_MAX_EDGES)
}

pub fn potts_polynomial_with(g: &Graph, q: i64, max_edges: usize) -> Result<MPoly, PottsError> {
    if q == 0 {
        return Err(PottsError::ZeroQ);
    }
    let n = g.num_edges();
    if n == 0 {
        return Err(PottsError::NoEdges);
    }
    if n > max_edges || n > 63 {
        return Err(PottsError::BudgetExceeded {
            edges: n,
            max: max_edges,
        });
    }
    let qb = BigInt::from(q);
    let terms: Vec<(Vec<u32>, BigInt)> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| {
            let exps = (0..n).map(|i| (mask >> i & 1) as u32).collect();
            (exps, qb.pow(g.components(mask) as u32))
        })
        .collect();
    Ok(MPoly::from_terms(n, terms).expect("exponent vectors have n entries"))
}

/// `+1` for an odd number of edges, `-1` for an even number.
pub fn potts_mod_l(g: &Graph) -> i64 {
    if g.num_edges() % 2 == 1 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone)]
pub struct PottsSymbolic {
    pub residue: i64,
    /// Residue of the projective closure `Z(F) ⊂ P^n`.
    pub closure_residue: i64,
    /// Residue of the coordinate hyperplanes `Z(x_0, t_1⋯t_n)` at infinity.
    pub boundary_residue: i64,
    pub homogenized: MPoly,
    pub certificate: Certificate,
}

/// Certifies the projective closure (homogenizing variable `x0`, edge
/// variables shifted to `x1..xn`) and subtracts the hyperplane arrangement
/// at infinity.
pub fn potts_class_symbolic(g: &Graph, q: i64) -> Result<PottsSymbolic, PottsError> {
    let z = potts_polynomial(g, q)?;
    let n = g.num_edges();
    let top: Vec<_> = z
        .terms()
        .filter(|(m, _)| m.degree() as usize == n)
        .collect();
    let expected_lead = leading_coefficient(g, q);
    match top.as_slice() {
        [(m, c)] if m.exponents().iter().all(|&e| e == 1) && **c == expected_lead => {}
        _ => return Err(PottsError::LeadingFormUnexpected(z.to_string())),
    }
    let f = z.homogenize(0).expect("nonzero");
    let certificate = certify::certify_theorem42(&f, n)?;
    let closure_residue = certificate.residue();
    let boundary = kclass::class_coordinate_hyperplane_union(n).mod_l();
    let boundary_residue: i64 = boundary.try_into().expect("small residue");
    Ok(PottsSymbolic {
        residue: closure_residue - boundary_residue,
        closure_residue,
        boundary_residue,
        homogenized: f,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum PottsStatus {
    Match,
    Mismatch,
    Skipped(String),
    /// `p | q`: every coefficient vanishes mod `p`, so all of `A^n` is a zero.
    BadReduction(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct PottsCheck {
    pub prime: u64,
    pub expected: i64,
    pub count: Option<u64>,
    pub residue: Option<i64>,
    #[serde(flatten)]
    pub status: PottsStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct PottsReport {
    pub checks: Vec<PottsCheck>,
}

impl PottsReport {
    pub fn all_match(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status != PottsStatus::Mismatch)
    }

    pub fn fully_verified(&self) -> bool {
        self.checks.iter().all(|c| c.status == PottsStatus::Match)
    }
}

/// Counts zeros of `Z_G` in `A^n(F_p)` and compares with [`potts_mod_l`].
pub fn potts_verify(
    g: &Graph,
    q: i64,
    primes: &[u64],
    budget: u64,
) -> Result<PottsReport, PottsError> {
    let z = potts_polynomial(g, q)?;
    let n = g.num_edges();
    let expected = potts_mod_l(g);
    let checks = primes
        .iter()
        .map(|&p| {
            let mut check = PottsCheck {
                prime: p,
                expected,
                count: None,
                residue: None,
                status: PottsStatus::Skipped(String::new()),
            };
            let ctx = match FieldCtx::with_max_q(p, 1, 4096) {
                Ok(c) => c,
                Err(e) => {
                    check.status = PottsStatus::Skipped(e.to_string());
                    return check;
                }
            };
            match counting::count_affine(std::slice::from_ref(&z), n, &ctx, budget) {
                Ok(count) => {
                    let r = balanced_residue(count as i128, p);
                    check.count = Some(count);
                    check.residue = Some(r);
                    let agrees = (r as i128 - expected as i128).rem_euclid(p as i128) == 0;
                    check.status = if agrees {
                        PottsStatus::Match
                    } else if q.rem_euclid(p as i64) == 0 {
                        PottsStatus::BadReduction(format!("q = {q} vanishes mod {p}"))
                    } else {
                        PottsStatus::Mismatch
                    };
                }
                Err(e @ CountError::BudgetExceeded { .. }) => {
                    check.status = PottsStatus::Skipped(e.to_string());
                }
                Err(e) => check.status = PottsStatus::Skipped(e.to_string()),
            }
            check
        })
        .collect();
    Ok(PottsReport { checks })
}

/// Connected multigraphs with `1..=max_edges` edges up to isomorphism, with
/// or without self-loops. Vertices are `0..V`, every vertex is incident to
/// some edge (or `V = 1`).
pub fn connected_multigraphs(max_edges: usize, loops: bool) -> Vec<Graph> {
    let mut out = Vec::new();
    for m in 1..=max_edges {
        for v in 1..=m + 1 {
            let pairs: Vec<(usize, usize)> = (0..v)
                .flat_map(|a| (a..v).map(move |b| (a, b)))
                .filter(|&(a, b)| loops || a != b)
                .collect();
            if pairs.is_empty() {
                continue;
            }
            let perms = permutations(v);
            let mut seen = BTreeSet::new();
            let mut idx = vec![0usize; m];
            loop {
                let edges: Vec<(usize, usize)> = idx.iter().map(|&i| pairs[i]).collect();
                let g = Graph { vertices: v, edges };
                if g.is_connected() {
                    let canon = canonical(&g, &perms);
                    if seen.insert(canon.clone()) {
                        out.push(Graph {
                            vertices: v,
                            edges: canon,
                        });
                    }
                }
                // next non-decreasing index vector
                let Some(pos) = (0..m).rev().find(|&i| idx[i] + 1 < pairs.len()) else {
                    break;
                };
                let next = idx[pos] + 1;
                for slot in idx.iter_mut().skip(pos) {
                    *slot = next;
                }
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical(g: &Graph, perms: &[Vec<usize>]) -> Vec<(usize, usize)> {
    perms
        .iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> = g
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (p[a], p[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            e.sort();
            e
        })
        .min()
        .unwrap()
}

/// `q^{k(G)}`, the coefficient of `t_1⋯t_n`.
pub fn leading_coefficient(g: &Graph, q: i64) -> BigInt {
    BigInt::from(q).pow(g.components(u64::MAX) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::DEFAULT_BUDGET;

    fn tri() -> Graph {
        graph_parse("3\n0 1\n1 2\n0 2").unwrap()
    }

    #[test]
    fn parse_examples() {
        let g = graph_parse("2\n0 1").unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(tri().num_edges(), 3);
        assert!(matches!(
            graph_parse("2\n0 5"),
            Err(PottsError::VertexOutOfRange { vertex: 5, .. })
        ));
        assert!(matches!(graph_parse("x"), Err(PottsError::Syntax { .. })));
        assert!(matches!(
            graph_parse("3\n0 1 2"),
            Err(PottsError::Syntax { line: 2, .. })
        ));
        assert_eq!(graph_parse(&tri().to_text()).unwrap(), tri());
    }

    #[test]
    fn polynomial_examples() {
        let g = graph_parse("2\n0 1").unwrap();
        assert_eq!(
            potts_polynomial(&g, 3).unwrap(),
            MPoly::parse("9 + 3*x0", 1).unwrap()
        );
        let want =
            MPoly::parse("8 + 4*(x0+x1+x2) + 2*(x0*x1+x0*x2+x1*x2) + 2*x0*x1*x2", 3).unwrap();
        assert_eq!(potts_polynomial(&tri(), 2).unwrap(), want);
        assert_eq!(potts_polynomial(&tri(), 0), Err(PottsError::ZeroQ));
        let big = Graph::new(2, vec![(0, 1); 21]).unwrap();
        assert!(matches!(
            potts_polynomial(&big, 2),
            Err(PottsError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn loops_keep_components() {
        let g = graph_parse("1\n0 0").unwrap();
        assert_eq!(g.loops(), vec![0]);
        assert_eq!(
            potts_polynomial(&g, 5).unwrap(),
            MPoly::parse("5 + 5*x0", 1).unwrap()
        );
    }

    #[test]
    fn symbolic_examples() {
        let s = potts_class_symbolic(&tri(), 2).unwrap();
        assert_eq!(s.residue, 1);
        assert_eq!(s.residue, potts_mod_l(&tri()));
        let path = graph_parse("3\n0 1\n1 2").unwrap();
        assert_eq!(potts_class_symbolic(&path, 2).unwrap().residue, -1);
        let edge = graph_parse("2\n0 1").unwrap();
        let s = potts_class_symbolic(&edge, 3).unwrap();
        assert_eq!(s.homogenized, MPoly::parse("9*x0 + 3*x1", 2).unwrap());
        assert_eq!(s.residue, 1);
    }

    #[test]
    fn verify_examples() {
        let r = potts_verify(&tri(), 2, &[5], DEFAULT_BUDGET).unwrap();
        assert!(r.fully_verified());
        let c4 = graph_parse("4\n0 1\n1 2\n2 3\n3 0").unwrap();
        let r = potts_verify(&c4, 2, &[3], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.checks[0].residue, Some(-1));
        assert!(r.fully_verified());
        let edge = graph_parse("2\n0 1").unwrap();
        let r = potts_verify(&edge, 3, &[7, 3], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.checks[0].count, Some(1));
        assert!(matches!(r.checks[1].status, PottsStatus::BadReduction(_)));
        assert_eq!(r.checks[1].count, Some(3));
    }

    #[test]
    fn multigraph_enumeration() {
        let simple = connected_multigraphs(4, false);
        let simple_only: Vec<_> = simple
            .iter()
            .filter(|g| g.edges.windows(2).all(|w| w[0] != w[1]))
            .collect();
        // K2; P3; P4, K13, C3; P5, K14, fork, C4, paw
        assert_eq!(simple_only.len(), 10);
        assert!(connected_multigraphs(2, true).len() > connected_multigraphs(2, false).len());
    }
}
