//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails for a reason other than the documented
//! one for criterion 8.

use std::time::Instant;

use lrational::certify::{self, certificate_verify, CertifyOptions, Outcome, Rule};
use lrational::counting::{self, identities, DEFAULT_BUDGET};
use lrational::ffield::FieldCtx;
use lrational::gen;
use lrational::kclass::{self, LPoly};
use lrational::mpoly::MPoly;
use lrational::potts::{self, PottsStatus};
use num_bigint::BigInt;
use rand::Rng;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
    /// Set when the criterion cannot hold as literally stated; the string
    /// explains why, and `pass` reports the literal reading.
    known_defect: Option<String>,
    /// For a known defect: whether every failure is the explained one.
    explained: bool,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
            known_defect: None,
            explained: true,
        }
    }
}

fn ctx(p: u64) -> FieldCtx {
    FieldCtx::prime(p).unwrap()
}

fn c1_classical_cw() -> Verdict {
    let mut rng = gen::rng(1);
    let mut bad = Vec::new();
    let mut checks = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let system = gen::cw_system(&mut rng, n);
        for p in [2, 3, 5] {
            let count = counting::count_projective(&system, n, &ctx(p), DEFAULT_BUDGET).unwrap();
            checks += 1;
            if count % p != 1 % p {
                bad.push(format!("{system:?} p={p} count={count}"));
            }
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!("{checks} counts, {} violations {:?}", bad.len(), bad),
    )
}

fn c2_quadrics() -> Verdict {
    let q = BigInt::from(5);
    let mut issues = Vec::new();
    for n in 0..=3usize {
        let nv = n + 2;
        let f = MPoly::parse(
            &(0..nv)
                .map(|i| format!("x{i}^2"))
                .collect::<Vec<_>>()
                .join("+"),
            nv,
        )
        .unwrap();
        let count = counting::count_projective(&[f], n + 1, &ctx(5), DEFAULT_BUDGET).unwrap();
        let class = kclass::class_smooth_quadric(n).eval_at(&q);
        if class != BigInt::from(count) {
            issues.push(format!("Q_{n}: class {class} count {count}"));
        }
        // affine sphere y_1^2 + ... + y_{n+1}^2 = 1 in A^{n+1}
        let g = MPoly::parse(
            &format!(
                "{} - 1",
                (0..n + 1)
                    .map(|i| format!("x{i}^2"))
                    .collect::<Vec<_>>()
                    .join("+")
            ),
            n + 1,
        )
        .unwrap();
        let count = counting::count_affine(&[g], n + 1, &ctx(5), DEFAULT_BUDGET).unwrap();
        let class = kclass::class_affine_sphere(n).eval_at(&q);
        if class != BigInt::from(count) {
            issues.push(format!("Y_{n}: class {class} count {count}"));
        }
    }
    for n in 1..=12 {
        let r = kclass::class_smooth_quadric(n).mod_l();
        if r != BigInt::from(1) {
            issues.push(format!("Q_{n} mod L = {r}"));
        }
    }
    Verdict::new(
        issues.is_empty(),
        format!("Q_0..Q_3, Y_0..Y_3 at q=5; mod L for n=1..12 {issues:?}"),
    )
}

fn c3_recursion() -> Verdict {
    let lm1 = LPoly::from_ints(&[-1, 1]);
    let mut nonzero = Vec::new();
    for n in 2..=12usize {
        let (q, q1, q2) = (
            kclass::class_smooth_quadric(n),
            kclass::class_smooth_quadric(n - 1),
            kclass::class_smooth_quadric(n - 2),
        );
        let (y, y1) = (
            kclass::class_affine_sphere(n),
            kclass::class_affine_sphere(n - 1),
        );
        let r1 = &y - &(&(&(&LPoly::l_pow(n) - &y1) + &LPoly::one()) + &(&lm1 * &q2));
        let r2 = &q - &(&q1 + &y);
        if !r1.is_zero() || !r2.is_zero() {
            nonzero.push(format!("n={n}: {r1}, {r2}"));
        }
    }
    Verdict::new(
        nonzero.is_empty(),
        format!("residuals for n=2..12 {nonzero:?}"),
    )
}

fn c4_identities() -> Verdict {
    let mut rng = gen::rng(4);
    let mut failed = Vec::new();
    let mut checks = 0;
    let mut record = |c: identities::IdentityCheck, what: String| {
        checks += 1;
        if !c.holds() {
            failed.push(format!("{} {what}: {} != {}", c.name, c.lhs, c.rhs));
        }
    };
    for _ in 0..50 {
        // cone: x_i absent
        let n = rng.gen_range(2..=4);
        let i = rng.gen_range(0..=n);
        let d = rng.gen_range(1..=3);
        let f = gen::homogeneous(&mut rng, n, d, 5, 3)
            .insert_var(i)
            .unwrap();
        for q in [3, 5] {
            record(
                identities::cone(&f, i, n, &ctx(q), DEFAULT_BUDGET).unwrap(),
                format!("{f}"),
            );
        }

        // special form x_i·a + b
        let n = rng.gen_range(2..=4);
        let i = rng.gen_range(0..=n);
        let d = rng.gen_range(2..=3);
        let a = gen::homogeneous(&mut rng, n, d - 1, 4, 3)
            .insert_var(i)
            .unwrap();
        let b = gen::homogeneous(&mut rng, n, d, 4, 3)
            .insert_var(i)
            .unwrap();
        let f = &(&MPoly::var(n + 1, i) * &a) + &b;
        if f.degree_in(i).finite() == Some(1) {
            for q in [3, 5] {
                record(
                    identities::special_form(&f, i, n, &ctx(q), DEFAULT_BUDGET).unwrap(),
                    format!("{f}"),
                );
            }
        }

        // join in complementary subspaces
        let (na, nb) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
        let f = {
            let d = rng.gen_range(1..=3);
            gen::homogeneous(&mut rng, na, d, 4, 3)
        };
        let g = {
            let d = rng.gen_range(1..=3);
            gen::homogeneous(&mut rng, nb, d, 4, 3)
        };
        for q in [3, 5] {
            record(
                identities::join(&f, &g, &ctx(q), DEFAULT_BUDGET).unwrap(),
                format!("{f} | {g}"),
            );
        }

        // union split
        let n = rng.gen_range(1..=4);
        let f = {
            let d = rng.gen_range(1..=3);
            gen::homogeneous(&mut rng, n + 1, d, 4, 3)
        };
        let g = {
            let d = rng.gen_range(1..=3);
            gen::homogeneous(&mut rng, n + 1, d, 4, 3)
        };
        for q in [3, 5] {
            record(
                identities::union_split(&f, &g, n, &ctx(q), DEFAULT_BUDGET).unwrap(),
                format!("{f} | {g}"),
            );
        }
    }
    Verdict::new(
        failed.is_empty(),
        format!("{checks} exact identity checks {failed:?}"),
    )
}

fn c5_cubic_surfaces() -> Verdict {
    let mut rng = gen::rng(5);
    let mut issues = Vec::new();
    for k in 0..20 {
        let f = gen::cubic_surface(&mut rng, k % 2 == 0);
        let cert = match certify::certify(std::slice::from_ref(&f), 3, &CertifyOptions::default())
            .unwrap()
        {
            Outcome::Certified(c) => c,
            Outcome::Failed(e) => {
                issues.push(format!("{f}: {}", e.reason));
                continue;
            }
        };
        if cert.residue() != 1 {
            issues.push(format!("{f}: residue {}", cert.residue()));
        }
        let rep = certificate_verify(&cert, &[5, 7], DEFAULT_BUDGET);
        if !rep.fully_verified() {
            issues.push(format!(
                "{f}: verification {:?}",
                rep.mismatches().collect::<Vec<_>>()
            ));
        }
    }
    Verdict::new(
        issues.is_empty(),
        format!("20 cubics (10 singular at e_3) at p=5,7 {issues:?}"),
    )
}

fn c6_quartic_triple_point() -> Verdict {
    let mut rng = gen::rng(6);
    let mut issues = Vec::new();
    for _ in 0..10 {
        let f = gen::quartic_with_triple_point(&mut rng);
        let cert = certify::certify(std::slice::from_ref(&f), 4, &CertifyOptions::default())
            .unwrap()
            .unwrap_certificate();
        let shape = cert.root.rule == (Rule::SpecialForm { var: 4 })
            && cert.root.children[0].rule == Rule::CubicSurfaceBase;
        if !shape || cert.residue() != 1 {
            issues.push(format!("{f}: shape {shape} residue {}", cert.residue()));
        }
        if !certificate_verify(&cert, &[5], DEFAULT_BUDGET).fully_verified() {
            issues.push(format!("{f}: verification failed"));
        }
    }
    Verdict::new(
        issues.is_empty(),
        format!("10 quartics x4*f3 + g4 at p=5 {issues:?}"),
    )
}

fn c7_theorem42() -> Verdict {
    let mut rng = gen::rng(7);
    let mut issues = Vec::new();
    let mut verified = 0;
    for k in 0..100 {
        let n = rng.gen_range(1..=6);
        let f = gen::theorem42_instance(&mut rng, n);
        match certify::certify_theorem42(&f, n) {
            Ok(cert) => {
                if k % 10 == 0 {
                    verified += 1;
                    let rep = certificate_verify(&cert, &[3], DEFAULT_BUDGET);
                    if !rep.all_match() {
                        issues.push(format!(
                            "{f}: verification {:?}",
                            rep.mismatches().collect::<Vec<_>>()
                        ));
                    }
                }
            }
            Err(e) => issues.push(format!("{f} in P^{n}: {e}")),
        }
    }
    Verdict::new(
        issues.is_empty(),
        format!("100 instances, {verified} verified at p=3 {issues:?}"),
    )
}

fn c8_potts() -> Verdict {
    let mut symbolic_issues = Vec::new();
    let mut literal_failures = Vec::new();
    let mut unexplained = Vec::new();
    let graphs = potts::connected_multigraphs(4, true);
    for g in &graphs {
        let expected = potts::potts_mod_l(g);
        if expected != if g.num_edges() % 2 == 1 { 1 } else { -1 } {
            symbolic_issues.push(format!("{g}: mod L {expected}"));
        }
        for q in [2, 3] {
            match potts::potts_class_symbolic(g, q) {
                Ok(s) if s.residue == expected => {}
                Ok(s) => symbolic_issues.push(format!("{g} q={q}: symbolic {}", s.residue)),
                Err(e) => symbolic_issues.push(format!("{g} q={q}: {e}")),
            }
            let rep = potts::potts_verify(g, q, &[3, 5, 7], DEFAULT_BUDGET).unwrap();
            for c in &rep.checks {
                if c.status == PottsStatus::Match {
                    continue;
                }
                literal_failures.push(format!("{g} q={q} p={}", c.prime));
                // with p | q every coefficient vanishes, so all p^n points are zeros
                let forced =
                    q % c.prime as i64 == 0 && c.count == Some((c.prime).pow(g.num_edges() as u32));
                if !(forced && matches!(c.status, PottsStatus::BadReduction(_))) {
                    unexplained.push(format!("{g} q={q} p={}: {:?}", c.prime, c.status));
                }
            }
        }
    }
    let pass = symbolic_issues.is_empty() && literal_failures.is_empty();
    Verdict {
        pass,
        detail: format!(
            "{} connected multigraphs, q=2,3: symbolic issues {symbolic_issues:?}; \
             {} (graph, q, p) counts off the predicted residue, unexplained {unexplained:?}",
            graphs.len(),
            literal_failures.len()
        ),
        known_defect: Some(
            "for q=3, p=3 every coefficient of Z_G is a multiple of 3, so Z_G vanishes on all of \
             A^n(F_3) and the count 3^n is 0 mod 3, never the predicted +1/-1; these cases are \
             reported as bad reduction and all other (graph, q, p) triples match"
                .into(),
        ),
        explained: symbolic_issues.is_empty() && unexplained.is_empty(),
    }
}

fn c9_negative_controls() -> Verdict {
    let f = MPoly::parse("x4*(x0^3+x1^3+x2^3+x3^3) + x0^4+x1^4+x2^4+x3^4", 5).unwrap();
    let mut cert = certify::certify(&[f], 4, &CertifyOptions::default())
        .unwrap()
        .unwrap_certificate();
    cert.root.children[0].residue = 0;
    let rep = certificate_verify(&cert, &[5], DEFAULT_BUDGET);
    let mutated_flagged = !rep.all_match() && rep.mismatches().count() >= 1;

    let smooth = MPoly::parse("x0^4+x1^4+x2^4+x3^4+x4^4", 5).unwrap();
    let refused = matches!(
        certify::certify(&[smooth], 4, &CertifyOptions::default()).unwrap(),
        Outcome::Failed(_)
    );
    Verdict::new(
        mutated_flagged && refused,
        format!("mutated residue flagged: {mutated_flagged}; smooth quartic threefold refused: {refused}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("classical Chevalley-Warning sweep", c1_classical_cw),
        ("smooth quadric classes", c2_quadrics),
        ("quadric/sphere recursion residuals", c3_recursion),
        ("counting identities", c4_identities),
        ("cubic surfaces", c5_cubic_surfaces),
        ("quartics with a triple point", c6_quartic_triple_point),
        ("degree <= 1 outside four variables", c7_theorem42),
        ("Potts hypersurfaces", c8_potts),
        ("negative controls", c9_negative_controls),
    ];
    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} criterion {} ({name}) [{secs:.2}s]: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
        match (&v.known_defect, v.pass) {
            (_, true) => {}
            (Some(why), false) if v.explained => println!("     expected failure: {why}"),
            _ => unexpected += 1,
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
