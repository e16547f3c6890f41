//! Exhaustive point counts of affine and projective zero sets over `F_q`
//! and the Chevalley–Warning residue checks built on them.
//!
//! Points are enumerated as an odometer over the field's element order; the
//! outermost free coordinate is split across rayon workers and partial
//! counts are summed, so the result does not depend on scheduling.
//! Budgets are measured in enumerated points.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ffield::FieldCtx;
use crate::mpoly::{CompiledPoly, MPoly};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

const PARALLEL_THRESHOLD: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("enumeration of {needed} points exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("polynomial {0} is not homogeneous")]
    NotHomogeneous(String),
    #[error("polynomial {poly} has {got} variables, expected {expected}")]
    DimensionMismatch {
        poly: String,
        expected: usize,
        got: usize,
    },
    #[error(
        "projective counting methods disagree: cone gives {cone}, representatives give {direct}"
    )]
    InternalDisagreement { cone: String, direct: u64 },
}

/// Points to enumerate for `A^n(F_q)`.
fn space_size(q: u32, n: usize) -> u128 {
    (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

fn check_budget(q: u32, n: usize, budget: u64) -> Result<(), CountError> {
    let needed = space_size(q, n);
    if needed > budget as u128 {
        Err(CountError::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

fn check_vars(system: &[MPoly], num_vars: usize) -> Result<(), CountError> {
    for f in system {
        if f.num_vars() != num_vars {
            return Err(CountError::DimensionMismatch {
                poly: f.to_string(),
                expected: num_vars,
                got: f.num_vars(),
            });
        }
    }
    Ok(())
}

/// Compiled system plus a shared power table.
struct Evaluator<'a> {
    ctx: &'a FieldCtx,
    polys: Vec<CompiledPoly>,
    pows: Vec<u32>,
    stride: usize,
}

impl<'a> Evaluator<'a> {
    fn new(system: &[MPoly], ctx: &'a FieldCtx) -> Self {
        let polys: Vec<CompiledPoly> = system.iter().map(|f| f.compile(ctx)).collect();
        let stride = polys.iter().map(|c| c.max_exp()).max().unwrap_or(0) + 1;
        let q = ctx.q();
        let mut pows = vec![0u32; q as usize * stride];
        for x in 0..q {
            let mut acc = 1u32;
            for e in 0..stride {
                pows[x as usize * stride + e] = acc;
                acc = ctx.mul_raw(acc, x);
            }
        }
        Evaluator {
            ctx,
            polys,
            pows,
            stride,
        }
    }

    #[inline]
    fn is_zero_at(&self, pt: &[u32]) -> bool {
        self.polys
            .iter()
            .all(|c| c.eval_with_powers(pt, self.ctx, &self.pows, self.stride) == 0)
    }

    /// Zeros among points whose first coordinates equal `prefix` and whose
    /// remaining `num_vars - prefix.len()` coordinates range over `F_q`.
    fn count_region(&self, prefix: &[u32], num_vars: usize) -> u64 {
        let q = self.ctx.q();
        let free = num_vars - prefix.len();
        if free == 0 {
            return self.is_zero_at(prefix) as u64;
        }
        let run = |first: u32| -> u64 {
            let mut pt = prefix.to_vec();
            pt.push(first);
            pt.resize(num_vars, 0);
            let start = prefix.len() + 1;
            let mut count = 0u64;
            loop {
                if self.is_zero_at(&pt) {
                    count += 1;
                }
                // odometer over pt[start..], last coordinate fastest
                let mut j = num_vars;
                loop {
                    if j == start {
                        return count;
                    }
                    j -= 1;
                    pt[j] += 1;
                    if pt[j] < q {
                        break;
                    }
                    pt[j] = 0;
                }
            }
        };
        if space_size(q, free) as u64 >= PARALLEL_THRESHOLD {
            (0..q).into_par_iter().map(run).sum()
        } else {
            (0..q).map(run).sum()
        }
    }
}

/// Number of common zeros of `system` in `A^n(F_q)`.
pub fn count_affine(
    system: &[MPoly],
    n: usize,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<u64, CountError> {
    check_vars(system, n)?;
    check_budget(ctx.q(), n, budget)?;
    Ok(Evaluator::new(system, ctx).count_region(&[], n))
}

/// `|P^n(F_q)| = 1 + q + … + q^n`.
pub fn projective_space_count(n: usize, q: u64) -> u64 {
    (0..=n as u32).map(|i| q.pow(i)).sum()
}

/// Number of common zeros of a homogeneous `system` in `P^n(F_q)`.
///
/// Computed from the affine cone and from normalized representatives; the
/// two must agree.
pub fn count_projective(
    system: &[MPoly],
    n: usize,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<u64, CountError> {
    check_vars(system, n + 1)?;
    for f in system {
        if !f.is_homogeneous() {
            return Err(CountError::NotHomogeneous(f.to_string()));
        }
    }
    check_budget(ctx.q(), n + 1, budget)?;
    let ev = Evaluator::new(system, ctx);
    let q = ctx.q() as u64;

    let cone = ev.count_region(&[], n + 1);
    // leftmost nonzero coordinate normalized to 1
    let mut direct = 0u64;
    for lead in 0..=n {
        let mut prefix = vec![0u32; lead];
        prefix.push(1);
        direct += ev.count_region(&prefix, n + 1);
    }

    // the origin is a zero unless some equation is a nonzero constant over F_q
    let origin = ev.count_region(&vec![0u32; n + 1], n + 1);
    let punctured = cone - origin;
    if !punctured.is_multiple_of(q - 1) || punctured / (q - 1) != direct {
        let cone = if punctured.is_multiple_of(q - 1) {
            (punctured / (q - 1)).to_string()
        } else {
            format!("non-integral ({cone} - {origin})/{}", q - 1)
        };
        return Err(CountError::InternalDisagreement { cone, direct });
    }
    Ok(direct)
}

/// Representative of `count mod q` in `(-q/2, q/2]`.
pub fn balanced_residue(count: i128, q: u64) -> i64 {
    let q = q as i128;
    let r = count.rem_euclid(q);
    (if 2 * r > q { r - q } else { r }) as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "lowercase")]
pub enum Space {
    Affine(usize),
    Projective(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub system: Vec<String>,
    pub space: Space,
    pub q: u32,
    pub count: u64,
    pub residue: i64,
    /// Whether the degree hypothesis of the relevant congruence holds.
    pub applicable: bool,
    /// Residue the congruence predicts when applicable.
    pub expected_residue: Option<i64>,
    pub violation: bool,
    #[serde(serialize_with = "ser_secs")]
    pub elapsed: Duration,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn degree_sum(system: &[MPoly]) -> u64 {
    system
        .iter()
        .map(|f| f.total_degree().finite().unwrap_or(0) as u64)
        .sum()
}

/// Counts in `A^n` and checks divisibility by `q` when `Σ deg < n`.
pub fn cw_check_affine(
    system: &[MPoly],
    n: usize,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<CountReport, CountError> {
    let start = Instant::now();
    let count = count_affine(system, n, ctx, budget)?;
    let q = ctx.q() as u64;
    let residue = balanced_residue(count as i128, q);
    let applicable = degree_sum(system) < n as u64;
    let expected = applicable.then_some(0);
    Ok(CountReport {
        system: system.iter().map(|f| f.to_string()).collect(),
        space: Space::Affine(n),
        q: ctx.q(),
        count,
        residue,
        applicable,
        expected_residue: expected,
        violation: expected.is_some_and(|e| e != residue),
        elapsed: start.elapsed(),
    })
}

/// Counts in `P^n` and checks `count ≡ 1 (mod q)` when `Σ deg < n + 1`.
pub fn cw_check_projective(
    system: &[MPoly],
    n: usize,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<CountReport, CountError> {
    let start = Instant::now();
    let count = count_projective(system, n, ctx, budget)?;
    let q = ctx.q() as u64;
    let residue = balanced_residue(count as i128, q);
    // a nonzero constant equation is not a form of positive degree
    let applicable = degree_sum(system) < n as u64 + 1
        && !system
            .iter()
            .any(|f| !f.is_zero() && f.constant_value().is_some());
    let expected = applicable.then(|| balanced_residue(1, q));
    Ok(CountReport {
        system: system.iter().map(|f| f.to_string()).collect(),
        space: Space::Projective(n),
        q: ctx.q(),
        count,
        residue,
        applicable,
        expected_residue: expected,
        violation: expected.is_some_and(|e| e != residue),
        elapsed: start.elapsed(),
    })
}

/// Exact point-count identities that mirror the class identities used by
/// the certificate rules.
pub mod identities {
    use super::*;
    use crate::mpoly::PolyError;

    #[derive(Debug, Clone, PartialEq, Eq, Serialize)]
    pub struct IdentityCheck {
        pub name: &'static str,
        pub lhs: i128,
        pub rhs: i128,
    }

    impl IdentityCheck {
        pub fn holds(&self) -> bool {
            self.lhs == self.rhs
        }
    }

    #[derive(Debug, Error, Clone, PartialEq, Eq)]
    pub enum IdentityError {
        #[error(transparent)]
        Count(#[from] CountError),
        #[error(transparent)]
        Poly(#[from] PolyError),
    }

    /// `F` omits `x_i`: `N(Z(F) ⊂ P^n) = q·N(Z(F') ⊂ P^{n-1}) + 1`.
    pub fn cone(
        f: &MPoly,
        i: usize,
        n: usize,
        ctx: &FieldCtx,
        budget: u64,
    ) -> Result<IdentityCheck, IdentityError> {
        let base = f.drop_var(i)?;
        let q = ctx.q() as i128;
        let lhs = count_projective(std::slice::from_ref(f), n, ctx, budget)? as i128;
        let rhs = q * count_projective(&[base], n - 1, ctx, budget)? as i128 + 1;
        Ok(IdentityCheck {
            name: "cone",
            lhs,
            rhs,
        })
    }

    /// `F = x_i·low + high`:
    /// `N(F) = q·N(low, high) + 1 + N(P^{n-1}) - N(low)`, all but `F` in `P^{n-1}`.
    pub fn special_form(
        f: &MPoly,
        i: usize,
        n: usize,
        ctx: &FieldCtx,
        budget: u64,
    ) -> Result<IdentityCheck, IdentityError> {
        let (low, high) = f.decompose_linear(i)?;
        let low = low.drop_var(i)?;
        let high = high.drop_var(i)?;
        let q = ctx.q() as i128;
        let lhs = count_projective(std::slice::from_ref(f), n, ctx, budget)? as i128;
        let both = count_projective(&[low.clone(), high], n - 1, ctx, budget)? as i128;
        let low_only = count_projective(&[low], n - 1, ctx, budget)? as i128;
        let rhs = q * both + 1 + projective_space_count(n - 1, q as u64) as i128 - low_only;
        Ok(IdentityCheck {
            name: "special-form",
            lhs,
            rhs,
        })
    }

    /// Join of `Z(f) ⊂ P^{a-1}` and `Z(g) ⊂ P^{b-1}` placed in complementary
    /// coordinate subspaces of `P^{a+b-1}`:
    /// `N(join) = N_X·N_Y·(q-1) + N_X + N_Y`.
    pub fn join(
        f: &MPoly,
        g: &MPoly,
        ctx: &FieldCtx,
        budget: u64,
    ) -> Result<IdentityCheck, IdentityError> {
        let (a, b) = (f.num_vars(), g.num_vars());
        let mut f_big = f.clone();
        for _ in 0..b {
            f_big = f_big.insert_var(f_big.num_vars())?;
        }
        let mut g_big = g.clone();
        for _ in 0..a {
            g_big = g_big.insert_var(0)?;
        }
        let q = ctx.q() as i128;
        let lhs = count_projective(&[f_big, g_big], a + b - 1, ctx, budget)? as i128;
        let nx = count_projective(std::slice::from_ref(f), a - 1, ctx, budget)? as i128;
        let ny = count_projective(std::slice::from_ref(g), b - 1, ctx, budget)? as i128;
        Ok(IdentityCheck {
            name: "join",
            lhs,
            rhs: nx * ny * (q - 1) + nx + ny,
        })
    }

    /// `N(Z(f·g)) = N(Z(f)) + N(Z(g)) - N(Z(f, g))`.
    pub fn union_split(
        f: &MPoly,
        g: &MPoly,
        n: usize,
        ctx: &FieldCtx,
        budget: u64,
    ) -> Result<IdentityCheck, IdentityError> {
        let lhs = count_projective(&[f * g], n, ctx, budget)? as i128;
        let nf = count_projective(std::slice::from_ref(f), n, ctx, budget)? as i128;
        let ng = count_projective(std::slice::from_ref(g), n, ctx, budget)? as i128;
        let nfg = count_projective(&[f.clone(), g.clone()], n, ctx, budget)? as i128;
        Ok(IdentityCheck {
            name: "union-split",
            lhs,
            rhs: nf + ng - nfg,
        })
    }

    /// For a system `S` and one more equation `h`:
    /// `N(S, h) = N(S) + N(h) - N({s·h : s ∈ S})`.
    pub fn system_split(
        system: &[MPoly],
        h: &MPoly,
        n: usize,
        ctx: &FieldCtx,
        budget: u64,
    ) -> Result<IdentityCheck, IdentityError> {
        let mut all = system.to_vec();
        all.push(h.clone());
        let lhs = count_projective(&all, n, ctx, budget)? as i128;
        let ns = count_projective(system, n, ctx, budget)? as i128;
        let nh = count_projective(std::slice::from_ref(h), n, ctx, budget)? as i128;
        let products: Vec<MPoly> = system.iter().map(|s| s * h).collect();
        let np = count_projective(&products, n, ctx, budget)? as i128;
        Ok(IdentityCheck {
            name: "system-split",
            lhs,
            rhs: ns + nh - np,
        })
    }
}
