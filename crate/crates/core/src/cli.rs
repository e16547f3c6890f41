//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a
//! verification finds a mismatch or a congruence violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::certify::{
    self, CertificateDoc, CertifyError, CertifyOptions, CheckStatus, DocError, Outcome, TieBreak,
    VerificationReport,
};
use crate::counting::{self, CountError, CountReport, DEFAULT_BUDGET};
use crate::ffield::{is_prime, FieldCtx, FieldError};
use crate::gen;
use crate::kclass::{self, LPoly};
use crate::mpoly::{MPoly, PolyError};
use crate::potts::{self, PottsError, PottsStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error(transparent)]
    Potts(#[from] PottsError),
}

#[derive(Debug, Parser)]
#[command(
    name = "lrational",
    version,
    about = "Point counts, classes and mod-L certificates for projective hypersurfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    Affine,
    Projective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TieBreakArg {
    Smallest,
    Largest,
}

#[derive(Debug, Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Maximum number of field points to enumerate per count.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct PolyInput {
    /// Polynomials in x0, x1, ... (e.g. "x0^3 + 2*x1*x2").
    polys: Vec<String>,
    /// Read polynomials from a file, one per line.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Primes {
    /// Comma-separated primes.
    #[arg(short = 'p', long = "primes", value_delimiter = ',', default_values_t = [3u64, 5, 7])]
    primes: Vec<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the canonical form of a polynomial.
    Parse {
        poly: String,
        /// Number of variables (default: inferred).
        #[arg(long)]
        vars: Option<usize>,
    },
    /// Count common zeros over F_q for each listed prime p (q = p^k).
    Count {
        #[command(flatten)]
        input: PolyInput,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long, value_enum, default_value = "projective")]
        space: SpaceArg,
        #[command(flatten)]
        primes: Primes,
        /// Extension degree.
        #[arg(short = 'k', default_value_t = 1)]
        k: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Check the Chevalley-Warning residue of systems, or of a random sweep.
    CwCheck {
        #[command(flatten)]
        input: PolyInput,
        #[arg(short = 'n')]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "projective")]
        space: SpaceArg,
        #[command(flatten)]
        primes: Primes,
        #[arg(short = 'k', default_value_t = 1)]
        k: u32,
        /// Number of random systems with n <= 4 to check instead of inputs.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Classes in the Grothendieck ring as polynomials in L.
    Class {
        #[command(subcommand)]
        family: ClassFamily,
        /// Also evaluate the class at L = q.
        #[arg(long, global = true)]
        at: Option<u64>,
        #[arg(long, value_enum, default_value = "human", global = true)]
        format: Format,
    },
    /// Build a mod-L certificate, optionally verifying it by counting.
    Certify {
        #[command(flatten)]
        input: PolyInput,
        /// Ambient projective dimension.
        #[arg(short = 'n')]
        n: Option<usize>,
        /// Treat the polynomials as factors of one hypersurface.
        #[arg(long)]
        union: bool,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        primes: Primes,
        /// Re-check a certificate written with --format json.
        #[arg(long, conflicts_with_all = ["polys", "file"])]
        check_file: Option<PathBuf>,
        /// Move a singular coordinate point of a cubic to e_n first.
        #[arg(long)]
        singular_vertex_first: bool,
        #[arg(long, value_enum, default_value = "smallest")]
        tie_break: TieBreakArg,
        /// Linear change of coordinates x_i -> sum_j m[i][j] x_j, rows
        /// separated by ';' (e.g. "1,1;0,1").
        #[arg(long)]
        change: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Affine Potts-model hypersurface of a graph.
    Potts {
        /// Graph file: vertex count, then one "u v" edge per line.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        primes: Primes,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Subcommand)]
enum ClassFamily {
    /// [P^n]
    ProjectiveSpace { n: usize },
    /// Smooth quadric in P^{n+1}.
    Quadric { n: usize },
    /// Affine sphere y_1^2 + ... + y_{n+1}^2 = 1 in A^{n+1}.
    Sphere { n: usize },
    /// Union of the coordinate hyperplanes of P^{n-1}.
    CoordArrangement { n: usize },
    /// Join of two projective classes, e.g. "1 + L" "1".
    Join { a: String, b: String },
    /// Projective cone with an r-dimensional vertex.
    Cone {
        a: String,
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
    /// Affine cone over a projective class.
    AffineCone { a: String },
}

/// Runs the CLI on `args` (including the program name), writing to stdout
/// and stderr, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn run(cli: Cli) -> Result<(String, i32), CliError> {
    match cli.command {
        Command::Parse { poly, vars } => {
            let p = match vars {
                Some(v) => MPoly::parse(&poly, v)?,
                None => MPoly::parse_auto(&poly, 0)?,
            };
            Ok((format!("{p}\n"), EXIT_OK))
        }
        Command::Count {
            input,
            n,
            space,
            primes,
            k,
            out,
        } => {
            let nv = num_vars(space, n);
            let system = read_polys(&input, nv)?;
            let reports = counts(&system, n, space, &checked_primes(&primes)?, k, out.budget)?;
            Ok((render_counts(&reports, out.format, false), EXIT_OK))
        }
        Command::CwCheck {
            input,
            n,
            space,
            primes,
            k,
            random,
            seed,
            out,
        } => {
            let primes = checked_primes(&primes)?;
            let mut reports = Vec::new();
            match (random, n) {
                (Some(count), _) => {
                    let mut rng = gen::rng(seed);
                    for _ in 0..count {
                        let dim = rand::Rng::gen_range(&mut rng, 1..=4usize);
                        let system = match space {
                            SpaceArg::Projective => gen::cw_system(&mut rng, dim),
                            SpaceArg::Affine => gen::cw_system(&mut rng, dim - 1),
                        };
                        reports.extend(counts(&system, dim, space, &primes, k, out.budget)?);
                    }
                }
                (None, Some(n)) => {
                    let system = read_polys(&input, num_vars(space, n))?;
                    reports = counts(&system, n, space, &primes, k, out.budget)?;
                }
                (None, None) => {
                    return Err(CliError::Usage("cw-check needs -n or --random".into()))
                }
            }
            let code = if reports.iter().any(|r| r.violation) {
                EXIT_MISMATCH
            } else {
                EXIT_OK
            };
            Ok((render_counts(&reports, out.format, true), code))
        }
        Command::Class { family, at, format } => class(family, at, format),
        Command::Certify {
            input,
            n,
            union,
            verify,
            primes,
            check_file,
            singular_vertex_first,
            tie_break,
            change,
            out,
        } => {
            let primes = checked_primes(&primes)?;
            if let Some(path) = check_file {
                return check_file_cmd(&path, &primes, &out);
            }
            let n = n.ok_or_else(|| CliError::Usage("certify needs -n".into()))?;
            let mut polys = read_polys(&input, n + 1)?;
            if let Some(m) = change {
                let m = parse_matrix(&m)?;
                polys = polys
                    .iter()
                    .map(|f| f.substitute_linear(&m))
                    .collect::<Result<_, _>>()?;
            }
            let opts = CertifyOptions {
                tie_break: match tie_break {
                    TieBreakArg::Smallest => TieBreak::Smallest,
                    TieBreakArg::Largest => TieBreak::Largest,
                },
                singular_vertex_first,
            };
            let outcome = if union {
                certify::certify_union(&polys, n, &opts)?
            } else {
                certify::certify(&polys, n, &opts)?
            };
            certify_cmd(outcome, verify, &primes, &out)
        }
        Command::Potts {
            graph,
            q,
            verify,
            primes,
            out,
        } => {
            let primes = checked_primes(&primes)?;
            potts_cmd(&graph, q, verify.then_some(primes.as_slice()), &out)
        }
    }
}

fn num_vars(space: SpaceArg, n: usize) -> usize {
    match space {
        SpaceArg::Affine => n,
        SpaceArg::Projective => n + 1,
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_polys(input: &PolyInput, nv: usize) -> Result<Vec<MPoly>, CliError> {
    let mut texts = input.polys.clone();
    if let Some(path) = &input.file {
        texts.extend(
            read_text(path)?
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
                .filter(|l| !l.is_empty()),
        );
    }
    if texts.is_empty() {
        return Err(CliError::Usage("no polynomials given".into()));
    }
    Ok(texts
        .iter()
        .map(|t| MPoly::parse(t, nv))
        .collect::<Result<_, _>>()?)
}

fn checked_primes(p: &Primes) -> Result<Vec<u64>, CliError> {
    if let Some(&bad) = p.primes.iter().find(|&&x| !is_prime(x)) {
        return Err(CliError::Field(FieldError::NotPrime(bad)));
    }
    Ok(p.primes.clone())
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>, CliError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| CliError::Usage(format!("bad matrix entry `{x}`")))
                })
                .collect()
        })
        .collect()
}

fn counts(
    system: &[MPoly],
    n: usize,
    space: SpaceArg,
    primes: &[u64],
    k: u32,
    budget: u64,
) -> Result<Vec<CountReport>, CliError> {
    primes
        .iter()
        .map(|&p| {
            let ctx = FieldCtx::new(p, k)?;
            Ok(match space {
                SpaceArg::Affine => counting::cw_check_affine(system, n, &ctx, budget)?,
                SpaceArg::Projective => counting::cw_check_projective(system, n, &ctx, budget)?,
            })
        })
        .collect()
}

fn render_counts(reports: &[CountReport], format: Format, check: bool) -> String {
    if format == Format::Json {
        let violations = reports.iter().filter(|r| r.violation).count();
        return json_line(&json!({ "reports": reports, "violations": violations }));
    }
    let mut s = String::new();
    for r in reports {
        let (space, n) = match r.space {
            counting::Space::Affine(n) => ("A", n),
            counting::Space::Projective(n) => ("P", n),
        };
        let _ = write!(
            s,
            "q={} {space}^{n} count {} residue {}",
            r.q, r.count, r.residue
        );
        if check {
            match r.expected_residue {
                Some(e) if r.violation => {
                    let _ = write!(s, " expected {e} VIOLATION");
                }
                Some(_) => s.push_str(" ok"),
                None => s.push_str(" (degree hypothesis fails)"),
            }
        }
        let _ = writeln!(s, "  [{}]", r.system.join(", "));
    }
    if check {
        let v = reports.iter().filter(|r| r.violation).count();
        let _ = writeln!(s, "{} checks, {v} violations", reports.len());
    }
    s
}

fn parse_class(text: &str) -> Result<LPoly, CliError> {
    Ok(text.parse::<LPoly>()?)
}

fn class(family: ClassFamily, at: Option<u64>, format: Format) -> Result<(String, i32), CliError> {
    let c = match family {
        ClassFamily::ProjectiveSpace { n } => kclass::class_projective_space(n),
        ClassFamily::Quadric { n } => kclass::class_smooth_quadric(n),
        ClassFamily::Sphere { n } => kclass::class_affine_sphere(n),
        ClassFamily::CoordArrangement { n } => {
            if n == 0 {
                return Err(CliError::Usage("coord-arrangement needs n >= 1".into()));
            }
            kclass::class_coordinate_hyperplane_union(n)
        }
        ClassFamily::Join { a, b } => kclass::class_join(&parse_class(&a)?, &parse_class(&b)?),
        ClassFamily::Cone { a, r } => {
            if r == 0 {
                return Err(CliError::Usage(
                    "cone vertex dimension r must be >= 1".into(),
                ));
            }
            kclass::class_cone(&parse_class(&a)?, r)
        }
        ClassFamily::AffineCone { a } => kclass::class_affine_cone(&parse_class(&a)?),
    };
    let value = at.map(|q| c.eval_at(&q.into()));
    let text = match format {
        Format::Json => json_line(&json!({
            "class": c.to_string(),
            "mod_l": c.mod_l().to_string(),
            "at": at,
            "value": value.as_ref().map(|v| v.to_string()),
        })),
        Format::Human => {
            let mut s = format!("{c}\n");
            if let (Some(q), Some(v)) = (at, value) {
                let _ = writeln!(s, "at L = {q}: {v}");
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

fn json_line(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("json"))
}

fn report_code(r: &VerificationReport) -> i32 {
    if r.all_match() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

fn render_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    for issue in &r.structural_issues {
        let _ = writeln!(s, "structure: {issue}");
    }
    for c in &r.checks {
        let status = match &c.status {
            CheckStatus::Match => "match".to_string(),
            CheckStatus::Mismatch => "MISMATCH".to_string(),
            CheckStatus::Skipped(why) => format!("skipped ({why})"),
            CheckStatus::BadReduction(why) => format!("bad reduction ({why})"),
        };
        let count = c
            .count
            .map(|n| {
                format!(
                    "count {n} = {} mod {}",
                    c.counted_residue.unwrap_or_default(),
                    c.prime
                )
            })
            .unwrap_or_else(|| "not counted".into());
        let _ = write!(
            s,
            "  {} {} p={} predicted {} {count} {status}",
            c.node, c.rule, c.prime, c.predicted
        );
        if let Some(i) = &c.identity {
            let _ = write!(
                s,
                "; {} {} {} {}",
                i.name,
                i.lhs,
                if i.holds { "=" } else { "!=" },
                i.rhs
            );
        }
        s.push('\n');
    }
    let skipped = r.skipped().count();
    let _ = writeln!(
        s,
        "verification: {} ({} checks, {} mismatches, {skipped} skipped)",
        if r.all_match() {
            "all match"
        } else {
            "MISMATCH"
        },
        r.checks.len(),
        r.mismatches().count()
    );
    s
}

fn certify_cmd(
    outcome: Outcome,
    verify: bool,
    primes: &[u64],
    out: &Output,
) -> Result<(String, i32), CliError> {
    let cert = match outcome {
        Outcome::Failed(f) => {
            let text = match out.format {
                Format::Json => json_line(&json!({ "outcome": "failure", "failure": f })),
                Format::Human => format!("no certificate: {} at {}\n", f.reason, f.goal),
            };
            return Ok((text, EXIT_OK));
        }
        Outcome::Certified(c) => c,
    };
    let report = verify.then(|| certify::certificate_verify(&cert, primes, out.budget));
    let code = report.as_ref().map_or(EXIT_OK, report_code);
    let text = match out.format {
        Format::Json => match &report {
            None => format!("{}\n", cert.to_json()),
            Some(r) => json_line(&json!({ "certificate": cert.to_doc(), "verification": r })),
        },
        Format::Human => {
            let mut s = cert.render();
            let _ = writeln!(s, "residue mod L: {}", cert.residue());
            if let Some(c) = cert.exact_class() {
                let _ = writeln!(s, "class: {c}");
            }
            if let Some(r) = &report {
                s.push_str(&render_report(r));
            }
            s
        }
    };
    Ok((text, code))
}

fn check_file_cmd(path: &Path, primes: &[u64], out: &Output) -> Result<(String, i32), CliError> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(DocError::from)?;
    let doc_value = match value.get("certificate") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let doc: CertificateDoc = serde_json::from_value(doc_value).map_err(DocError::from)?;
    let cert = certify::Certificate::from_doc(&doc)?;
    let report = certify::certificate_verify(&cert, primes, out.budget);
    let code = report_code(&report);
    let text = match out.format {
        Format::Json => json_line(&json!({ "certificate": cert.to_doc(), "verification": report })),
        Format::Human => format!(
            "{}residue mod L: {}\n{}",
            cert.render(),
            cert.residue(),
            render_report(&report)
        ),
    };
    Ok((text, code))
}

fn potts_cmd(
    path: &Path,
    q: i64,
    primes: Option<&[u64]>,
    out: &Output,
) -> Result<(String, i32), CliError> {
    let g = potts::graph_parse(&read_text(path)?)?;
    let z = potts::potts_polynomial(&g, q)?;
    let sym = potts::potts_class_symbolic(&g, q)?;
    let expected = potts::potts_mod_l(&g);
    let report = primes
        .map(|p| potts::potts_verify(&g, q, p, out.budget))
        .transpose()?;
    let ok = sym.residue == expected && report.as_ref().is_none_or(|r| r.all_match());
    let code = if ok { EXIT_OK } else { EXIT_MISMATCH };
    let text = match out.format {
        Format::Json => json_line(&json!({
            "graph": { "vertices": g.vertices(), "edges": g.edges() },
            "q": q,
            "n": g.num_edges(),
            "loops": g.loops(),
            "polynomial": z.to_string(),
            "homogenized": sym.homogenized.to_string(),
            "mod_l": expected,
            "residue": sym.residue,
            "closure_residue": sym.closure_residue,
            "boundary_residue": sym.boundary_residue,
            "certificate": sym.certificate.to_doc(),
            "verification": report,
        })),
        Format::Human => {
            let mut s = format!("graph: {g}\n");
            if !g.loops().is_empty() {
                let _ = writeln!(s, "note: self-loops at edges {:?}", g.loops());
            }
            let _ = writeln!(s, "Z_G = {z}");
            let _ = writeln!(
                s,
                "closure: {} residue {}",
                sym.homogenized, sym.closure_residue
            );
            let _ = writeln!(
                s,
                "hyperplanes at infinity: residue {}",
                sym.boundary_residue
            );
            let _ = writeln!(
                s,
                "residue mod L: {} (expected {expected}) {}",
                sym.residue,
                if sym.residue == expected {
                    "match"
                } else {
                    "MISMATCH"
                }
            );
            for c in report.iter().flat_map(|r| &r.checks) {
                let status = match &c.status {
                    PottsStatus::Match => "match".to_string(),
                    PottsStatus::Mismatch => "MISMATCH".to_string(),
                    PottsStatus::Skipped(w) => format!("skipped ({w})"),
                    PottsStatus::BadReduction(w) => format!("bad reduction ({w})"),
                };
                let count = c
                    .count
                    .map(|n| {
                        format!(
                            "count {n} = {} mod {}",
                            c.residue.unwrap_or_default(),
                            c.prime
                        )
                    })
                    .unwrap_or_else(|| "not counted".into());
                let _ = writeln!(s, "p={} {count} {status}", c.prime);
            }
            s
        }
    };
    Ok((text, code))
}
