//! Reduction engine producing mod-`L` certificates for projective zero sets.
//!
//! A [`Certificate`] is a tree of rule applications. Every node records the
//! residue of its goal's class modulo `L`; internal nodes derive it from
//! their children through the rule's residue equation and leaves are base
//! cases. Hypersurface goals try the rules in this fixed order:
//!
//! 1. `EmptyOrFull`: `F = 0` (all of `P^n`), a nonzero constant, or any
//!    nonzero form on `P^0` (empty).
//! 2. `ConeReduction`: a variable is absent, residue 1.
//! 3. `LinearBase`: degree 1, residue 1.
//! 4. `QuadricBase`: degree 2 with `n >= 2`, residue 1.
//! 5. `SpecialForm`: some variable of degree exactly 1; `F = x_i·low + high`
//!    and `residue(F) = 2 - residue(low)`.
//! 6. `CubicSurfaceBase`: degree 3 in `P^3`, residue 1, marked trusted.
//! 7. `PermuteVars`: degree 3, `n > 3`, a singular coordinate point is moved
//!    to `e_n`. Only reachable with [`CertifyOptions::singular_vertex_first`],
//!    since otherwise rules 2 and 5 already cover every such cubic.
//!
//! Systems split as `[Z(S, h)] = [Z(S)] + [Z(h)] - [Z(S·h)]`, explicit
//! products as `[Z(f·g)] = [Z(f)] + [Z(g)] - [Z(f, g)]`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{self, balanced_residue, identities, CountError};
use crate::ffield::FieldCtx;
use crate::kclass::{self, LPoly};
use crate::mpoly::{Degree, MPoly, PolyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("polynomial {0} is not homogeneous")]
    NotHomogeneous(String),
    #[error("polynomial {poly} has {got} variables, expected {expected}")]
    DimensionMismatch {
        poly: String,
        expected: usize,
        got: usize,
    },
    #[error("a goal needs at least one equation")]
    NoEquations,
    #[error("ambient dimension must be at least 1")]
    AmbientTooSmall,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("certification of an input satisfying the theorem's hypothesis ended with {0}")]
    MetaTheoremViolated(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoalKind {
    /// `Z(F)` for a single form.
    Hypersurface,
    /// Common zeros of several forms.
    System,
    /// `Z(f_1 ⋯ f_m)` with the factors kept separate.
    Union,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Goal {
    pub kind: GoalKind,
    /// Ambient projective dimension; polynomials have `n + 1` variables.
    pub n: usize,
    pub polys: Vec<MPoly>,
}

impl Goal {
    pub fn hypersurface(f: MPoly, n: usize) -> Self {
        Goal {
            kind: GoalKind::Hypersurface,
            n,
            polys: vec![f],
        }
    }

    /// Equations whose common zero set is the goal's variety.
    pub fn equations(&self) -> Vec<MPoly> {
        match self.kind {
            GoalKind::Hypersurface | GoalKind::System => self.polys.clone(),
            GoalKind::Union => vec![product(&self.polys, self.n + 1)],
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let polys: Vec<String> = self.polys.iter().map(|p| format!("{p}")).collect();
        match self.kind {
            GoalKind::Hypersurface => write!(f, "Z({}) in P^{}", polys[0], self.n),
            GoalKind::System => write!(f, "Z({}) in P^{}", polys.join(", "), self.n),
            GoalKind::Union => write!(f, "Z(({})) in P^{}", polys.join(")*("), self.n),
        }
    }
}

fn product(polys: &[MPoly], num_vars: usize) -> MPoly {
    polys.iter().fold(MPoly::one(num_vars), |acc, f| &acc * f)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rule {
    EmptyOrFull,
    ConeReduction { vertex: usize },
    LinearBase,
    QuadricBase,
    CubicSurfaceBase,
    SpecialForm { var: usize },
    PermuteVars { perm: Vec<usize> },
    SystemSplit,
    UnionSplit,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::EmptyOrFull => "EmptyOrFull",
            Rule::ConeReduction { .. } => "ConeReduction",
            Rule::LinearBase => "LinearBase",
            Rule::QuadricBase => "QuadricBase",
            Rule::CubicSurfaceBase => "CubicSurfaceBase",
            Rule::SpecialForm { .. } => "SpecialForm",
            Rule::PermuteVars { .. } => "PermuteVars",
            Rule::SystemSplit => "SystemSplit",
            Rule::UnionSplit => "UnionSplit",
        }
    }

    fn is_base(&self) -> bool {
        matches!(
            self,
            Rule::EmptyOrFull | Rule::LinearBase | Rule::QuadricBase | Rule::CubicSurfaceBase
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub goal: Goal,
    pub rule: Rule,
    pub children: Vec<Node>,
    /// Class of the goal modulo `L`, as a plain integer representative.
    pub residue: i64,
    pub exact_class: Option<LPoly>,
    /// Set when the residue rests on a non-computational theorem.
    pub trusted: bool,
}

impl Node {
    fn leaf(goal: Goal, rule: Rule, residue: i64, exact_class: Option<LPoly>) -> Self {
        let trusted = rule == Rule::CubicSurfaceBase;
        Node {
            goal,
            rule,
            children: Vec::new(),
            residue,
            exact_class,
            trusted,
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Node::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }

    /// Preorder walk with dotted path ids (`r`, `r.0`, `r.0.1`, ...).
    pub fn walk(&self) -> Vec<(String, &Node)> {
        fn go<'a>(n: &'a Node, id: String, out: &mut Vec<(String, &'a Node)>) {
            out.push((id.clone(), n));
            for (i, c) in n.children.iter().enumerate() {
                go(c, format!("{id}.{i}"), out);
            }
        }
        let mut out = Vec::new();
        go(self, "r".to_string(), &mut out);
        out
    }

    /// Residue implied by the rule and the children, if determined.
    fn expected_residue(&self) -> Result<i64, String> {
        let c: Vec<i64> = self.children.iter().map(|c| c.residue).collect();
        match &self.rule {
            Rule::EmptyOrFull => {
                let eqs = self.goal.equations();
                if eqs.iter().all(|f| f.is_zero()) {
                    Ok(1)
                } else if eqs.iter().any(|f| is_empty_form(f, self.goal.n)) {
                    Ok(0)
                } else {
                    Err("goal is neither all of P^n nor empty".into())
                }
            }
            Rule::ConeReduction { .. }
            | Rule::LinearBase
            | Rule::QuadricBase
            | Rule::CubicSurfaceBase => Ok(1),
            Rule::SpecialForm { .. } => match c.as_slice() {
                [low] => Ok(2 - low),
                _ => Err("SpecialForm needs exactly one child".into()),
            },
            Rule::PermuteVars { .. } => match c.as_slice() {
                [x] => Ok(*x),
                _ => Err("PermuteVars needs exactly one child".into()),
            },
            Rule::SystemSplit | Rule::UnionSplit => match c.as_slice() {
                [a, b, inter] => Ok(a + b - inter),
                _ => Err("split rules need exactly three children".into()),
            },
        }
    }
}

/// A nonzero constant, or a nonzero form on the single point `P^0`.
fn is_empty_form(f: &MPoly, n: usize) -> bool {
    !f.is_zero() && (f.constant_value().is_some() || n == 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub root: Node,
}

impl Certificate {
    pub fn residue(&self) -> i64 {
        self.root.residue
    }

    pub fn exact_class(&self) -> Option<&LPoly> {
        self.root.exact_class.as_ref()
    }

    /// Purely structural check: every residue follows from the children by
    /// the rule's equation, leaves are base cases, and rule preconditions
    /// hold for the recorded goals.
    pub fn check_structure(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for (id, node) in self.root.walk() {
            match node.expected_residue() {
                Ok(r) if r != node.residue => issues.push(format!(
                    "{id}: {} residue {} but rule gives {r}",
                    node.rule.name(),
                    node.residue
                )),
                Err(e) => issues.push(format!("{id}: {e}")),
                _ => {}
            }
            if node.children.is_empty()
                && !node.rule.is_base()
                && !matches!(node.rule, Rule::ConeReduction { .. })
            {
                issues.push(format!(
                    "{id}: leaf with non-base rule {}",
                    node.rule.name()
                ));
            }
            if let Err(e) = check_rule_shape(node) {
                issues.push(format!("{id}: {e}"));
            }
        }
        issues
    }
}

/// Checks that the recorded goal satisfies the rule's applicability condition
/// and that children are the goals the rule produces.
fn check_rule_shape(node: &Node) -> Result<(), String> {
    let g = &node.goal;
    let single = || -> Result<&MPoly, String> {
        if g.kind == GoalKind::Hypersurface && g.polys.len() == 1 {
            Ok(&g.polys[0])
        } else {
            Err(format!("{} needs a hypersurface goal", node.rule.name()))
        }
    };
    let deg = |f: &MPoly| f.total_degree();
    match &node.rule {
        Rule::EmptyOrFull => Ok(()),
        Rule::ConeReduction { vertex } => {
            let f = single()?;
            if *vertex > g.n || f.uses_var(*vertex) {
                return Err(format!("x{vertex} is not absent"));
            }
            if let Some(c) = node.children.first() {
                let base = f.drop_var(*vertex).map_err(|e| e.to_string())?;
                if c.goal != Goal::hypersurface(base, g.n - 1) {
                    return Err("cone child is not the base".into());
                }
            }
            Ok(())
        }
        Rule::LinearBase => (deg(single()?) == Degree::Finite(1))
            .then_some(())
            .ok_or_else(|| "LinearBase on a non-linear form".into()),
        Rule::QuadricBase => (deg(single()?) == Degree::Finite(2) && g.n >= 2)
            .then_some(())
            .ok_or_else(|| "QuadricBase needs a quadric with n >= 2".into()),
        Rule::CubicSurfaceBase => (deg(single()?) == Degree::Finite(3) && g.n == 3)
            .then_some(())
            .ok_or_else(|| "CubicSurfaceBase needs a cubic in P^3".into()),
        Rule::SpecialForm { var } => {
            let f = single()?;
            if *var > g.n || f.degree_in(*var) != Degree::Finite(1) {
                return Err(format!("x{var} does not have degree 1"));
            }
            let (low, _) = f.decompose_linear(*var).map_err(|e| e.to_string())?;
            let low = low.drop_var(*var).map_err(|e| e.to_string())?;
            match node.children.as_slice() {
                [c] if c.goal == Goal::hypersurface(low, g.n - 1) => Ok(()),
                _ => Err("SpecialForm child is not Z(low)".into()),
            }
        }
        Rule::PermuteVars { perm } => {
            let f = single()?;
            let moved = f.permute_vars(perm).map_err(|e| e.to_string())?;
            match node.children.as_slice() {
                [c] if c.goal == Goal::hypersurface(moved, g.n) => Ok(()),
                _ => Err("PermuteVars child is not the permuted form".into()),
            }
        }
        Rule::SystemSplit => {
            if g.kind != GoalKind::System || g.polys.len() < 2 {
                return Err("SystemSplit needs a system of at least two forms".into());
            }
            let expected = split_system_children(&g.polys, g.n);
            let got: Vec<&Goal> = node.children.iter().map(|c| &c.goal).collect();
            (got == expected.iter().collect::<Vec<_>>())
                .then_some(())
                .ok_or_else(|| "SystemSplit children do not match".into())
        }
        Rule::UnionSplit => {
            if g.kind != GoalKind::Union || g.polys.len() < 2 {
                return Err("UnionSplit needs at least two factors".into());
            }
            let expected = split_union_children(&g.polys, g.n);
            let got: Vec<&Goal> = node.children.iter().map(|c| &c.goal).collect();
            (got == expected.iter().collect::<Vec<_>>())
                .then_some(())
                .ok_or_else(|| "UnionSplit children do not match".into())
        }
    }
}

fn single_or(kind: GoalKind, polys: Vec<MPoly>, n: usize) -> Goal {
    if polys.len() == 1 {
        Goal::hypersurface(polys.into_iter().next().unwrap(), n)
    } else {
        Goal { kind, n, polys }
    }
}

/// `Z(S, h)` ↦ `Z(S)`, `Z(h)`, `Z(S·h)`.
fn split_system_children(polys: &[MPoly], n: usize) -> [Goal; 3] {
    let (h, rest) = polys.split_last().unwrap();
    let products = rest.iter().map(|s| s * h).collect();
    [
        single_or(GoalKind::System, rest.to_vec(), n),
        Goal::hypersurface(h.clone(), n),
        single_or(GoalKind::System, products, n),
    ]
}

/// `Z(f_1⋯f_m)` ↦ `Z(f_1⋯f_{m-1})`, `Z(f_m)`, `Z(f_1⋯f_{m-1}, f_m)`.
fn split_union_children(polys: &[MPoly], n: usize) -> [Goal; 3] {
    let (last, rest) = polys.split_last().unwrap();
    [
        single_or(GoalKind::Union, rest.to_vec(), n),
        Goal::hypersurface(last.clone(), n),
        Goal {
            kind: GoalKind::System,
            n,
            polys: vec![product(rest, n + 1), last.clone()],
        },
    ]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// Lowest qualifying variable index first.
    #[default]
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Default)]
pub struct CertifyOptions {
    pub tie_break: TieBreak,
    /// For cubics with `n > 3`, move a singular coordinate point to `e_n`
    /// before trying the special form.
    pub singular_vertex_first: bool,
}

/// Why certification stopped. Not an error: the congruence is open in
/// general and the engine only applies the rules it has.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub goal: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Certified(Certificate),
    Failed(Failure),
}

impl Outcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Outcome::Certified(c) => Some(c),
            Outcome::Failed(_) => None,
        }
    }

    pub fn unwrap_certificate(self) -> Certificate {
        match self {
            Outcome::Certified(c) => c,
            Outcome::Failed(f) => panic!("certification failed on {}: {}", f.goal, f.reason),
        }
    }
}

struct Engine<'a> {
    opts: &'a CertifyOptions,
}

impl Engine<'_> {
    fn order(&self, mut idx: Vec<usize>) -> Vec<usize> {
        if self.opts.tie_break == TieBreak::Largest {
            idx.reverse();
        }
        idx
    }

    fn goal(&self, goal: Goal) -> Result<Node, Failure> {
        match goal.kind {
            GoalKind::Hypersurface => {
                let f = goal.polys[0].clone();
                self.hypersurface(f, goal.n)
            }
            GoalKind::System => self.system(goal),
            GoalKind::Union => self.union(goal),
        }
    }

    fn system(&self, goal: Goal) -> Result<Node, Failure> {
        if goal.polys.iter().any(|f| is_empty_form(f, goal.n)) {
            return Ok(Node::leaf(goal, Rule::EmptyOrFull, 0, Some(LPoly::zero())));
        }
        let children = split_system_children(&goal.polys, goal.n)
            .into_iter()
            .map(|g| self.goal(g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(split_node(goal, Rule::SystemSplit, children))
    }

    fn union(&self, goal: Goal) -> Result<Node, Failure> {
        let children = split_union_children(&goal.polys, goal.n)
            .into_iter()
            .map(|g| self.goal(g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(split_node(goal, Rule::UnionSplit, children))
    }

    fn hypersurface(&self, f: MPoly, n: usize) -> Result<Node, Failure> {
        let goal = Goal::hypersurface(f.clone(), n);

        // 1. all of P^n, or empty
        if f.is_zero() {
            return Ok(Node::leaf(
                goal,
                Rule::EmptyOrFull,
                1,
                Some(kclass::class_projective_space(n)),
            ));
        }
        if is_empty_form(&f, n) {
            return Ok(Node::leaf(goal, Rule::EmptyOrFull, 0, Some(LPoly::zero())));
        }

        // 2. cone over the hypersurface cut out in the remaining variables
        let absent: Vec<usize> = (0..=n).filter(|&i| !f.uses_var(i)).collect();
        if let Some(&vertex) = self.order(absent).first() {
            let base = f.drop_var(vertex).expect("variable is absent");
            let children: Vec<Node> = self.hypersurface(base, n - 1).into_iter().collect();
            let exact = children
                .first()
                .and_then(|c| c.exact_class.as_ref())
                .map(|c| kclass::class_cone(c, 1));
            return Ok(Node {
                goal,
                rule: Rule::ConeReduction { vertex },
                children,
                residue: 1,
                exact_class: exact,
                trusted: false,
            });
        }

        let d = f.total_degree().finite().expect("nonzero");

        // 3. hyperplane
        if d == 1 {
            return Ok(Node::leaf(
                goal,
                Rule::LinearBase,
                1,
                Some(kclass::class_projective_space(n - 1)),
            ));
        }

        // 4. quadric
        if d == 2 && n >= 2 {
            let exact = is_full_rank_diagonal(&f).then(|| kclass::class_smooth_quadric(n - 1));
            return Ok(Node::leaf(goal, Rule::QuadricBase, 1, exact));
        }

        if d == 3 && n > 3 && self.opts.singular_vertex_first {
            if let Some(node) = self.permute_singular_vertex(&f, n)? {
                return Ok(node);
            }
        }

        // 5. special form x_i·low + high
        let linear: Vec<usize> = (0..=n)
            .filter(|&i| f.degree_in(i) == Degree::Finite(1))
            .collect();
        let mut first_failure = None;
        for var in self.order(linear) {
            match self.special_form(&f, n, var) {
                Ok(node) => return Ok(node),
                Err(e) => {
                    first_failure.get_or_insert(e);
                }
            }
        }
        if let Some(e) = first_failure {
            return Err(e);
        }

        // 6. cubic surface
        if d == 3 && n == 3 {
            return Ok(Node::leaf(goal, Rule::CubicSurfaceBase, 1, None));
        }

        // 7. singular cubic with the singular point moved to e_n
        if d == 3 && n > 3 {
            if let Some(node) = self.permute_singular_vertex(&f, n)? {
                return Ok(node);
            }
        }

        Err(Failure {
            goal: goal.to_string(),
            reason: "no reduction rule applies".into(),
        })
    }

    fn special_form(&self, f: &MPoly, n: usize, var: usize) -> Result<Node, Failure> {
        let (low, high) = f
            .decompose_linear(var)
            .expect("homogeneous with degree 1 in var");
        let low = low.drop_var(var).expect("low part omits var");
        let child = self.hypersurface(low, n - 1)?;
        let exact = if high.is_zero() {
            // Z(low, 0) = Z(low): (L - 1)[low] + 1 + [P^{n-1}]
            child.exact_class.as_ref().map(|c| {
                &(&(c * &LPoly::from_ints(&[-1, 1])) + &LPoly::one())
                    + &kclass::class_projective_space(n - 1)
            })
        } else {
            None
        };
        Ok(Node {
            goal: Goal::hypersurface(f.clone(), n),
            rule: Rule::SpecialForm { var },
            residue: 2 - child.residue,
            children: vec![child],
            exact_class: exact,
            trusted: false,
        })
    }

    fn permute_singular_vertex(&self, f: &MPoly, n: usize) -> Result<Option<Node>, Failure> {
        let Some(&j) = self.order(f.coordinate_singularity_scan()).first() else {
            return Ok(None);
        };
        let mut perm: Vec<usize> = (0..=n).collect();
        perm.swap(j, n);
        let moved = f.permute_vars(&perm).expect("valid transposition");
        let child = match moved.degree_in(n) {
            Degree::Finite(1) => self.special_form(&moved, n, n)?,
            _ => self.hypersurface(moved, n)?,
        };
        Ok(Some(Node {
            goal: Goal::hypersurface(f.clone(), n),
            rule: Rule::PermuteVars { perm },
            residue: child.residue,
            exact_class: child.exact_class.clone(),
            children: vec![child],
            trusted: false,
        }))
    }
}

fn split_node(goal: Goal, rule: Rule, children: Vec<Node>) -> Node {
    let residue = children[0].residue + children[1].residue - children[2].residue;
    let exact = match (
        &children[0].exact_class,
        &children[1].exact_class,
        &children[2].exact_class,
    ) {
        (Some(a), Some(b), Some(c)) => Some(&(a + b) - c),
        _ => None,
    };
    Node {
        goal,
        rule,
        children,
        residue,
        exact_class: exact,
        trusted: false,
    }
}

/// `Σ c_i x_i^2` with every coefficient nonzero.
fn is_full_rank_diagonal(f: &MPoly) -> bool {
    f.num_terms() == f.num_vars() && f.terms().all(|(m, _)| m.exponents().contains(&2))
}

fn validate(polys: &[MPoly], n: usize) -> Result<(), CertifyError> {
    if polys.is_empty() {
        return Err(CertifyError::NoEquations);
    }
    if n < 1 {
        return Err(CertifyError::AmbientTooSmall);
    }
    for f in polys {
        if f.num_vars() != n + 1 {
            return Err(CertifyError::DimensionMismatch {
                poly: f.to_string(),
                expected: n + 1,
                got: f.num_vars(),
            });
        }
        if !f.is_homogeneous() {
            return Err(CertifyError::NotHomogeneous(f.to_string()));
        }
    }
    Ok(())
}

/// Certifies the residue of `[Z(system)] ⊂ P^n` modulo `L`. A single
/// polynomial is a hypersurface goal; several form a system.
pub fn certify(system: &[MPoly], n: usize, opts: &CertifyOptions) -> Result<Outcome, CertifyError> {
    validate(system, n)?;
    let goal = single_or(GoalKind::System, system.to_vec(), n);
    Ok(to_outcome(Engine { opts }.goal(goal)))
}

/// Certifies `Z(f_1 ⋯ f_m) ⊂ P^n` for an explicitly factored product.
pub fn certify_union(
    factors: &[MPoly],
    n: usize,
    opts: &CertifyOptions,
) -> Result<Outcome, CertifyError> {
    validate(factors, n)?;
    let goal = single_or(GoalKind::Union, factors.to_vec(), n);
    Ok(to_outcome(Engine { opts }.goal(goal)))
}

fn to_outcome(r: Result<Node, Failure>) -> Outcome {
    match r {
        Ok(root) => Outcome::Certified(Certificate { root }),
        Err(f) => Outcome::Failed(f),
    }
}

/// Hypersurfaces of degree `1..=n` in `P^n` that have degree at most 1 in
/// all but at most four variables. Certification must succeed with residue 1.
pub fn certify_theorem42(f: &MPoly, n: usize) -> Result<Certificate, CertifyError> {
    validate(std::slice::from_ref(f), n)?;
    let d = match f.total_degree() {
        Degree::Finite(d) if d >= 1 => d as usize,
        _ => {
            return Err(CertifyError::HypothesisViolated(
                "a hypersurface needs positive degree".into(),
            ))
        }
    };
    if d > n {
        return Err(CertifyError::HypothesisViolated(format!(
            "degree {d} exceeds n = {n}"
        )));
    }
    let nonlinear: Vec<usize> = (0..=n)
        .filter(|&i| f.degree_in(i) > Degree::Finite(1))
        .collect();
    if nonlinear.len() > 4 {
        return Err(CertifyError::HypothesisViolated(format!(
            "{} variables have degree > 1",
            nonlinear.len()
        )));
    }
    expect_residue_one(certify(
        std::slice::from_ref(f),
        n,
        &CertifyOptions::default(),
    )?)
}

fn expect_residue_one(outcome: Outcome) -> Result<Certificate, CertifyError> {
    match outcome {
        Outcome::Certified(c) if c.residue() == 1 => Ok(c),
        Outcome::Certified(c) => Err(CertifyError::MetaTheoremViolated(format!(
            "residue {}",
            c.residue()
        ))),
        Outcome::Failed(f) => Err(CertifyError::MetaTheoremViolated(format!(
            "failure at {}: {}",
            f.goal, f.reason
        ))),
    }
}

/// Builds the nested form
/// `x_n⋯x_4·f_3 + Σ_{i=5}^{n} x_n⋯x_i·g_{i-1} + g_n` in `n + 1` variables,
/// where `gs[j]` is `g_{j+4}` (homogeneous of degree `j + 4` in
/// `x_0..x_{j+3}`) and `f_3` is a cubic in `x_0..x_3`.
pub fn nested_form(f3: &MPoly, gs: &[MPoly], n: usize) -> Result<MPoly, CertifyError> {
    if n < 4 || gs.len() != n - 3 {
        return Err(CertifyError::HypothesisViolated(format!(
            "nested form in P^{n} needs n >= 4 and {} g-polynomials",
            n.saturating_sub(3)
        )));
    }
    let nv = n + 1;
    let lift = |p: &MPoly| p.with_num_vars(nv);
    let chain = |from: usize| (from..=n).fold(MPoly::one(nv), |acc, i| &acc * &MPoly::var(nv, i));
    let mut f = &chain(4) * &lift(f3)?;
    for i in 5..=n {
        f = &f + &(&chain(i) * &lift(&gs[i - 5])?);
    }
    f = &f + &lift(&gs[n - 4])?;
    if !f.is_homogeneous() || f.total_degree() != Degree::Finite(n as u32) {
        return Err(CertifyError::HypothesisViolated(
            "nested form is not homogeneous of degree n".into(),
        ));
    }
    Ok(f)
}

/// Certifies a nested-form hypersurface by peeling `x_n, x_{n-1}, …, x_4`
/// in turn. Must succeed with residue 1.
pub fn certify_theorem41(f3: &MPoly, gs: &[MPoly], n: usize) -> Result<Certificate, CertifyError> {
    let f = nested_form(f3, gs, n)?;
    let opts = CertifyOptions {
        tie_break: TieBreak::Largest,
        singular_vertex_first: false,
    };
    expect_residue_one(certify(&[f], n, &opts)?)
}

// ---------------------------------------------------------------------------
// verification

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum CheckStatus {
    Match,
    Mismatch,
    /// Not counted (over budget); never counts as a pass.
    Skipped(String),
    /// Count disagrees, but some leaf the residue depends on degenerates
    /// modulo this prime.
    BadReduction(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityOutcome {
    pub name: &'static str,
    pub lhs: i128,
    pub rhs: i128,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeCheck {
    pub node: String,
    pub rule: &'static str,
    pub n: usize,
    pub prime: u64,
    pub predicted: i64,
    pub count: Option<u64>,
    pub counted_residue: Option<i64>,
    pub points: u128,
    #[serde(flatten)]
    pub status: CheckStatus,
    pub identity: Option<IdentityOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub structural_issues: Vec<String>,
    pub checks: Vec<NodeCheck>,
}

impl VerificationReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &NodeCheck> {
        self.checks.iter().filter(|c| {
            c.status == CheckStatus::Mismatch || c.identity.as_ref().is_some_and(|i| !i.holds)
        })
    }

    pub fn skipped(&self) -> impl Iterator<Item = &NodeCheck> {
        self.checks.iter().filter(|c| {
            matches!(
                c.status,
                CheckStatus::Skipped(_) | CheckStatus::BadReduction(_)
            )
        })
    }

    /// No structural issue, no residue mismatch, no failed identity.
    pub fn all_match(&self) -> bool {
        self.structural_issues.is_empty() && self.mismatches().next().is_none()
    }

    /// `all_match` and nothing skipped.
    pub fn fully_verified(&self) -> bool {
        self.all_match() && self.skipped().next().is_none()
    }
}

/// The leaf constant (if any) whose divisibility by `p` would break the
/// node's residue argument modulo `p`.
fn reduction_obstruction(node: &Node, p: u64) -> Option<String> {
    match &node.rule {
        Rule::EmptyOrFull => {
            let pb = BigInt::from(p);
            node.goal
                .equations()
                .iter()
                .filter(|f| is_empty_form(f, node.goal.n))
                .find(|f| f.terms().all(|(_, c)| (c % &pb).is_zero()))
                .map(|f| format!("{f} vanishes mod {p}"))
        }
        Rule::ConeReduction { .. }
        | Rule::LinearBase
        | Rule::QuadricBase
        | Rule::CubicSurfaceBase => None,
        _ => node
            .children
            .iter()
            .find_map(|c| reduction_obstruction(c, p)),
    }
}

type CountCache = Mutex<HashMap<(Vec<MPoly>, usize, u64), Result<u64, CountError>>>;

fn cached_count(
    cache: &CountCache,
    eqs: Vec<MPoly>,
    n: usize,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<u64, CountError> {
    let key = (eqs, n, ctx.p() as u64);
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return r.clone();
    }
    let r = counting::count_projective(&key.0, n, ctx, budget);
    cache.lock().unwrap().insert(key, r.clone());
    r
}

/// Checks every node of `cert` against exhaustive counts over `F_p` for each
/// prime, together with the counting identity behind each rule.
pub fn certificate_verify(cert: &Certificate, primes: &[u64], budget: u64) -> VerificationReport {
    let structural_issues = cert.check_structure();
    let nodes = cert.root.walk();
    let cache: CountCache = Mutex::new(HashMap::new());
    let jobs: Vec<(usize, u64)> = (0..nodes.len())
        .flat_map(|i| primes.iter().map(move |&p| (i, p)))
        .collect();

    let mut checks: Vec<(usize, NodeCheck)> = jobs
        .par_iter()
        .map(|&(i, p)| {
            let (id, node) = &nodes[i];
            (i, check_node(id, node, p, budget, &cache))
        })
        .collect();
    checks.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.prime.cmp(&b.1.prime)));
    VerificationReport {
        structural_issues,
        checks: checks.into_iter().map(|(_, c)| c).collect(),
    }
}

fn check_node(id: &str, node: &Node, p: u64, budget: u64, cache: &CountCache) -> NodeCheck {
    let n = node.goal.n;
    let mut check = NodeCheck {
        node: id.to_string(),
        rule: node.rule.name(),
        n,
        prime: p,
        predicted: node.residue,
        count: None,
        counted_residue: None,
        points: (p as u128).saturating_pow(n as u32 + 1),
        status: CheckStatus::Skipped(String::new()),
        identity: None,
    };
    let ctx = match FieldCtx::with_max_q(p, 1, 4096) {
        Ok(c) => c,
        Err(e) => {
            check.status = CheckStatus::Skipped(e.to_string());
            return check;
        }
    };
    let count = match cached_count(cache, node.goal.equations(), n, &ctx, budget) {
        Ok(c) => c,
        Err(e) => {
            check.status = CheckStatus::Skipped(e.to_string());
            return check;
        }
    };
    check.count = Some(count);
    check.counted_residue = Some(balanced_residue(count as i128, p));
    let agrees = (count as i128 - node.residue as i128).rem_euclid(p as i128) == 0;
    check.status = if agrees {
        CheckStatus::Match
    } else if let Some(why) = reduction_obstruction(node, p) {
        CheckStatus::BadReduction(why)
    } else {
        CheckStatus::Mismatch
    };
    check.identity = rule_identity(node, &ctx, budget, count, cache);
    check
}

fn rule_identity(
    node: &Node,
    ctx: &FieldCtx,
    budget: u64,
    count: u64,
    cache: &CountCache,
) -> Option<IdentityOutcome> {
    let n = node.goal.n;
    let wrap = |c: identities::IdentityCheck| IdentityOutcome {
        name: c.name,
        holds: c.holds(),
        lhs: c.lhs,
        rhs: c.rhs,
    };
    match &node.rule {
        Rule::ConeReduction { vertex } => {
            identities::cone(&node.goal.polys[0], *vertex, n, ctx, budget)
                .ok()
                .map(wrap)
        }
        Rule::SpecialForm { var } => {
            identities::special_form(&node.goal.polys[0], *var, n, ctx, budget)
                .ok()
                .map(wrap)
        }
        Rule::SystemSplit | Rule::UnionSplit | Rule::PermuteVars { .. } => {
            let counts: Option<Vec<i128>> = node
                .children
                .iter()
                .map(|c| {
                    cached_count(cache, c.goal.equations(), n, ctx, budget)
                        .ok()
                        .map(|x| x as i128)
                })
                .collect();
            let counts = counts?;
            let (name, rhs) = match node.rule {
                Rule::SystemSplit => ("system-split", counts[0] + counts[1] - counts[2]),
                Rule::UnionSplit => ("union-split", counts[0] + counts[1] - counts[2]),
                _ => ("permutation", counts[0]),
            };
            Some(IdentityOutcome {
                name,
                lhs: count as i128,
                rhs,
                holds: count as i128 == rhs,
            })
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// JSON form

pub const CERTIFICATE_FORMAT: &str = "lrational-certificate";
pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub format: String,
    pub version: u32,
    pub root: NodeDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalDoc {
    pub kind: GoalKind,
    pub n: usize,
    pub polys: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDoc {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    pub goal: GoalDoc,
    pub residue: i64,
    pub trusted: bool,
    pub exact_class: Option<String>,
    pub children: Vec<NodeDoc>,
}

#[derive(Debug, Error)]
pub enum DocError {
    #[error("not a certificate document: {0}")]
    Format(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule {0} is missing its parameter")]
    MissingParameter(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<&Node> for NodeDoc {
    fn from(n: &Node) -> Self {
        let (pivot, permutation) = match &n.rule {
            Rule::ConeReduction { vertex } => (Some(*vertex), None),
            Rule::SpecialForm { var } => (Some(*var), None),
            Rule::PermuteVars { perm } => (None, Some(perm.clone())),
            _ => (None, None),
        };
        NodeDoc {
            rule: n.rule.name().to_string(),
            pivot,
            permutation,
            goal: GoalDoc {
                kind: n.goal.kind,
                n: n.goal.n,
                polys: n.goal.polys.iter().map(|p| p.to_string()).collect(),
            },
            residue: n.residue,
            trusted: n.trusted,
            exact_class: n.exact_class.as_ref().map(|c| c.to_string()),
            children: n.children.iter().map(NodeDoc::from).collect(),
        }
    }
}

impl TryFrom<&NodeDoc> for Node {
    type Error = DocError;

    fn try_from(d: &NodeDoc) -> Result<Self, DocError> {
        let pivot = || {
            d.pivot
                .ok_or_else(|| DocError::MissingParameter(d.rule.clone()))
        };
        let rule = match d.rule.as_str() {
            "EmptyOrFull" => Rule::EmptyOrFull,
            "ConeReduction" => Rule::ConeReduction { vertex: pivot()? },
            "LinearBase" => Rule::LinearBase,
            "QuadricBase" => Rule::QuadricBase,
            "CubicSurfaceBase" => Rule::CubicSurfaceBase,
            "SpecialForm" => Rule::SpecialForm { var: pivot()? },
            "PermuteVars" => Rule::PermuteVars {
                perm: d
                    .permutation
                    .clone()
                    .ok_or_else(|| DocError::MissingParameter(d.rule.clone()))?,
            },
            "SystemSplit" => Rule::SystemSplit,
            "UnionSplit" => Rule::UnionSplit,
            other => return Err(DocError::UnknownRule(other.to_string())),
        };
        let polys = d
            .goal
            .polys
            .iter()
            .map(|s| MPoly::parse(s, d.goal.n + 1))
            .collect::<Result<Vec<_>, _>>()?;
        if polys.is_empty() {
            return Err(DocError::Format("goal without equations".into()));
        }
        let exact_class = d
            .exact_class
            .as_deref()
            .map(str::parse::<LPoly>)
            .transpose()?;
        Ok(Node {
            goal: Goal {
                kind: d.goal.kind,
                n: d.goal.n,
                polys,
            },
            rule,
            children: d
                .children
                .iter()
                .map(Node::try_from)
                .collect::<Result<_, _>>()?,
            residue: d.residue,
            exact_class,
            trusted: d.trusted,
        })
    }
}

impl Certificate {
    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            format: CERTIFICATE_FORMAT.to_string(),
            version: CERTIFICATE_VERSION,
            root: NodeDoc::from(&self.root),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("certificate serializes")
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<Self, DocError> {
        if doc.format != CERTIFICATE_FORMAT {
            return Err(DocError::Format(format!("format `{}`", doc.format)));
        }
        if doc.version != CERTIFICATE_VERSION {
            return Err(DocError::Format(format!("version {}", doc.version)));
        }
        Ok(Certificate {
            root: Node::try_from(&doc.root)?,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, DocError> {
        Self::from_doc(&serde_json::from_str(text)?)
    }

    /// Indented one-line-per-node rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        fn go(n: &Node, depth: usize, out: &mut String) {
            let param = match &n.rule {
                Rule::ConeReduction { vertex } => format!("[x{vertex}]"),
                Rule::SpecialForm { var } => format!("[x{var}]"),
                Rule::PermuteVars { perm } => format!("{perm:?}"),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{}{}{} residue {}{}{}  {}\n",
                "  ".repeat(depth),
                n.rule.name(),
                param,
                n.residue,
                if n.trusted { " (trusted)" } else { "" },
                n.exact_class
                    .as_ref()
                    .map(|c| format!(" class {c}"))
                    .unwrap_or_default(),
                n.goal
            ));
            for c in &n.children {
                go(c, depth + 1, out);
            }
        }
        go(&self.root, 0, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::DEFAULT_BUDGET;

    fn p(s: &str, n: usize) -> MPoly {
        MPoly::parse(s, n + 1).unwrap()
    }

    fn cert(s: &str, n: usize) -> Certificate {
        certify(&[p(s, n)], n, &CertifyOptions::default())
            .unwrap()
            .unwrap_certificate()
    }

    #[test]
    fn quadric_surface() {
        let c = cert("x0^2+x1^2+x2^2+x3^2", 3);
        assert_eq!(c.root.rule, Rule::QuadricBase);
        assert_eq!(c.residue(), 1);
        assert_eq!(c.exact_class(), Some(&kclass::class_smooth_quadric(2)));
    }

    #[test]
    fn quartic_with_triple_point() {
        let c = cert("x4*(x0^3+x1^3+x2^3+x3^3) + x0^4+x1^4+x2^4+x3^4", 4);
        assert_eq!(c.root.rule, Rule::SpecialForm { var: 4 });
        assert_eq!(c.root.children[0].rule, Rule::CubicSurfaceBase);
        assert!(c.root.children[0].trusted);
        assert_eq!(c.residue(), 1);
    }

    #[test]
    fn coordinate_triangle_is_not_l_rational() {
        // three lines in P^2: class 3L, residue 0
        let c = certify_union(
            &[p("x0", 2), p("x1", 2), p("x2", 2)],
            2,
            &CertifyOptions::default(),
        )
        .unwrap()
        .unwrap_certificate();
        assert_eq!(c.root.rule, Rule::UnionSplit);
        assert_eq!(c.residue(), 0);
        assert_eq!(c.exact_class(), Some(&LPoly::from_ints(&[0, 3])));
        assert!(c.check_structure().is_empty(), "{:?}", c.check_structure());
        assert!(certificate_verify(&c, &[3, 5], DEFAULT_BUDGET).all_match());
        assert_eq!(cert("x0*x1*x2", 2).residue(), 0);
        // at most n hyperplanes
        let c2 = certify_union(&[p("x0", 2), p("x1+x2", 2)], 2, &CertifyOptions::default())
            .unwrap()
            .unwrap_certificate();
        assert_eq!(c2.residue(), 1);
        assert_eq!(cert("x0*x1*x2", 3).residue(), 1);
    }

    #[test]
    fn smooth_quartic_threefold_fails() {
        let out = certify(
            &[p("x0^4+x1^4+x2^4+x3^4+x4^4", 4)],
            4,
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(matches!(out, Outcome::Failed(ref f) if f.reason == "no reduction rule applies"));
    }

    #[test]
    fn input_validation() {
        assert!(matches!(
            certify(&[p("x0^2 + x1", 1)], 1, &CertifyOptions::default()),
            Err(CertifyError::NotHomogeneous(_))
        ));
        assert!(matches!(
            certify(&[p("x0", 1)], 2, &CertifyOptions::default()),
            Err(CertifyError::DimensionMismatch { .. })
        ));
        assert_eq!(
            certify(&[], 2, &CertifyOptions::default()),
            Err(CertifyError::NoEquations)
        );
    }

    #[test]
    fn empty_and_full() {
        assert_eq!(cert("0", 2).residue(), 1);
        assert_eq!(
            cert("0", 2).exact_class(),
            Some(&kclass::class_projective_space(2))
        );
        assert_eq!(cert("5", 2).residue(), 0);
        // binary quadric with distinct roots: two points, outside the
        // congruence range but still certified exactly
        let c = cert("x0*x1 + x0^2", 1);
        assert_eq!(c.residue(), 2);
    }

    #[test]
    fn cone_records_base() {
        let c = cert("x0^2 + x1*x2", 3);
        assert_eq!(c.root.rule, Rule::ConeReduction { vertex: 3 });
        assert_eq!(c.root.children.len(), 1);
        assert_eq!(c.exact_class(), None);
        let d = cert("x0^2 + x1^2 + x2^2", 3);
        assert_eq!(
            d.exact_class(),
            Some(&kclass::class_cone(&kclass::class_smooth_quadric(1), 1))
        );
    }

    #[test]
    fn permute_vars_reachable_with_option() {
        let g = p(
            "x1*(x0^2 + x2^2 + x3^2 + x4^2) + x0^3 + x2^3 + x3^3 + x4^3",
            4,
        );
        let opts = CertifyOptions {
            singular_vertex_first: true,
            ..Default::default()
        };
        let c = certify(std::slice::from_ref(&g), 4, &opts)
            .unwrap()
            .unwrap_certificate();
        assert_eq!(
            c.root.rule,
            Rule::PermuteVars {
                perm: vec![0, 4, 2, 3, 1]
            }
        );
        assert_eq!(c.root.children[0].rule, Rule::SpecialForm { var: 4 });
        assert_eq!(c.residue(), 1);
        assert!(c.check_structure().is_empty());
        let default = cert(&g.to_string(), 4);
        assert_eq!(default.root.rule, Rule::SpecialForm { var: 1 });
    }

    #[test]
    fn systems() {
        let out = certify(
            &[p("x0", 3), p("x1^2 - x2*x3", 3)],
            3,
            &CertifyOptions::default(),
        )
        .unwrap()
        .unwrap_certificate();
        assert_eq!(out.root.rule, Rule::SystemSplit);
        // plane conic: residue 1
        assert_eq!(out.residue(), 1);
        let rep = certificate_verify(&out, &[3, 5], DEFAULT_BUDGET);
        assert!(
            rep.all_match(),
            "{:#?}",
            rep.mismatches().collect::<Vec<_>>()
        );
        let empty = certify(&[p("x0", 2), p("3", 2)], 2, &CertifyOptions::default())
            .unwrap()
            .unwrap_certificate();
        assert_eq!(empty.residue(), 0);
    }

    #[test]
    fn verify_and_mutate() {
        let c = cert("x0^3+x1^3+x2^3+x3^3", 3);
        let rep = certificate_verify(&c, &[5, 7], DEFAULT_BUDGET);
        assert!(rep.fully_verified());

        let mut bad = cert("x4*(x0^3+x1^3+x2^3+x3^3) + x0^4+x1^4+x2^4+x3^4", 4);
        bad.root.residue = 0;
        let rep = certificate_verify(&bad, &[5], DEFAULT_BUDGET);
        assert!(!rep.all_match());
        assert!(!rep.structural_issues.is_empty());
        assert_eq!(rep.mismatches().count(), 1);
    }

    #[test]
    fn budget_skips_are_reported() {
        let c = cert("x0^3+x1^3+x2^3+x3^3", 3);
        let rep = certificate_verify(&c, &[7], 100);
        assert!(rep.all_match());
        assert!(!rep.fully_verified());
        assert!(matches!(rep.checks[0].status, CheckStatus::Skipped(_)));
    }

    #[test]
    fn bad_reduction_is_classified() {
        // constant 3 is empty over C but all of P^1 over F_3
        let c = cert("3", 1);
        let rep = certificate_verify(&c, &[3, 5], DEFAULT_BUDGET);
        assert!(matches!(rep.checks[0].status, CheckStatus::BadReduction(_)));
        assert_eq!(rep.checks[1].status, CheckStatus::Match);
    }

    #[test]
    fn json_roundtrip_and_determinism() {
        let c = cert("x4*(x0^3+x1^3+x2^3+x3^3) + x0^4+x1^4+x2^4+x3^4", 4);
        let j = c.to_json();
        assert_eq!(
            j,
            cert("x4*(x0^3+x1^3+x2^3+x3^3) + x0^4+x1^4+x2^4+x3^4", 4).to_json()
        );
        assert_eq!(Certificate::from_json(&j).unwrap(), c);
        let u = certify_union(
            &[p("x0", 2), p("x1", 2), p("x2", 2)],
            2,
            &CertifyOptions::default(),
        )
        .unwrap()
        .unwrap_certificate();
        assert_eq!(Certificate::from_json(&u.to_json()).unwrap(), u);
        assert!(matches!(
            Certificate::from_json(r#"{"format":"x","version":1,"root":{}}"#),
            Err(DocError::Json(_))
        ));
    }

    #[test]
    fn theorem42_hypothesis() {
        let five = p("x0^2*x5 + x1^2*x5 + x2^2*x5 + x3^2*x5 + x4^2*x5 + x5^3", 5);
        assert!(matches!(
            certify_theorem42(&five, 5),
            Err(CertifyError::HypothesisViolated(_))
        ));
        let ok = p("x0*x1*x2*x3*x4 + x1*x2*x3*x4*x5 + x0^2*x1*x2*x3", 5);
        assert_eq!(certify_theorem42(&ok, 5).unwrap().residue(), 1);
        assert!(matches!(
            certify_theorem42(&p("x0^3 + x1^3", 2), 2),
            Err(CertifyError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn theorem41_nested() {
        let f3 = MPoly::parse("x0^3 + x1^3 + x2^3 + x3^3 + x0*x1*x2", 4).unwrap();
        let g4 = MPoly::parse("x0^4 + x1^4 - x2^4 + x3^4", 4).unwrap();
        let g5 = MPoly::parse("x0^5 + x1^5 + x2^5 + x3^5 + x4^5 + x4^2*x0^3", 5).unwrap();
        let c = certify_theorem41(&f3, &[g4, g5], 5).unwrap();
        assert_eq!(c.root.rule, Rule::SpecialForm { var: 5 });
        assert_eq!(c.root.children[0].rule, Rule::SpecialForm { var: 4 });
        assert_eq!(c.root.children[0].children[0].rule, Rule::CubicSurfaceBase);
        assert!(certificate_verify(&c, &[3], DEFAULT_BUDGET).all_match());
    }
}
