//! The `dynvar` command line.
//!
//! Exit codes: 0 success (or `Conjugate`), 1 unreadable input or usage error,
//! 2 domain or precondition violation, 3 disagreement between independent
//! checks, 4 `NotConjugate`, 5 `Inconclusive`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::{StateAlgebra, Tolerances};
use crate::cohomology::exactness_report;
use crate::error::Error;
use crate::generators::{in_domain, is_elliptic_ccp, is_elliptic_form, sample_generator, SampleKind};
use crate::invariants::{
    check_conjugacy, extract_invariant, fingerprint, search_conjugacy, span_projector,
    ConjugacyOutcome, DynamicalInvariant, Fingerprint,
};
use crate::io::{encode_matrix, parse_unitary, GeneratorFile, LoadedGenerator};
use crate::semigroup::{evolve, markov_checks, mixing_analysis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;
pub const EXIT_NOT_CONJUGATE: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

/// Times at which `analyze` samples the Markov axioms.
pub const MARKOV_TIMES: [f64; 3] = [0.1, 0.7, 1.3];

#[derive(Debug, Parser)]
#[command(name = "dynvar", version, about = "Analyze exact elliptic generators of quantum Markov semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a generator and extract its invariant when it is exact and elliptic.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded random generator file.
    Random {
        #[arg(long)]
        n: usize,
        /// `tracial` or `diag:w1,w2,...` (weights may be fractions like 2/3).
        #[arg(long, default_value = "tracial")]
        omega: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// exact, elliptic_generic or nonexact_auto.
        #[arg(long, default_value = "exact")]
        kind: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two exact elliptic generators are conjugate.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Check this unitary instead of searching.
        #[arg(long, conflicts_with = "search")]
        certificate: Option<PathBuf>,
        /// Number of search restarts.
        #[arg(long)]
        search: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exponentiate a generator and check the Markov axioms at the given times.
    Evolve {
        file: PathBuf,
        #[arg(long = "t", value_delimiter = ',', required = true, allow_hyphen_values = true)]
        t: Vec<f64>,
    },
    /// Write the reference fixtures into a directory.
    Fixtures { dir: PathBuf },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::ConventionMismatch(_)
        | Error::Io(_)
        | Error::DimensionMismatch { .. }
        | Error::NotHermitian(_)
        | Error::NotPositiveDefinite { .. }
        | Error::TraceNotOne(_)
        | Error::InvalidMomentumSpace(_)
        | Error::InvalidPotential(_) => EXIT_INPUT,
        Error::InternalInconsistency(_)
        | Error::ReconstructionMismatch(_)
        | Error::SkewExtractionFailure { .. }
        | Error::CommutantViolation(_)
        | Error::Numerical(_) => EXIT_DISAGREEMENT,
        _ => EXIT_DOMAIN,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Run the CLI with explicit arguments (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let tol = Tolerances::from_env();
    let result = match cli.command {
        Command::Analyze { file, json } => cmd_analyze(&file, json, tol, out),
        Command::Random {
            n,
            omega,
            m,
            seed,
            kind,
            out: path,
        } => cmd_random(n, &omega, m, seed, &kind, tol, path.as_deref(), out),
        Command::Compare {
            a,
            b,
            certificate,
            search,
            seed,
        } => cmd_compare(&a, &b, certificate.as_deref(), search, seed, tol, out),
        Command::Evolve { file, t } => cmd_evolve(&file, &t, tol, out),
        Command::Fixtures { dir } => cmd_fixtures(&dir, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path, tol: Tolerances) -> std::result::Result<LoadedGenerator, Failure> {
    let file = GeneratorFile::load(path)?;
    file.resolve(tol).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    })
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    })
}

fn fingerprint_json(f: &Fingerprint) -> Value {
    json!({
        "m": f.m,
        "spec_v": f.spec_v,
        "spec_q": f.spec_q,
        "spec_c": f.spec_c,
        "spec_omega": f.spec_omega,
    })
}

fn invariant_json(inv: &DynamicalInvariant, f: &Fingerprint) -> Value {
    json!({
        "m": inv.momenta.dim(),
        "momenta": inv.momenta.basis().iter().map(encode_matrix).collect::<Vec<_>>(),
        "v": encode_matrix(&inv.v),
        "source_hash": inv.source_hash,
        "fingerprint": fingerprint_json(f),
    })
}

/// The analysis report together with its exit code.
pub fn analyze(g: &LoadedGenerator) -> (Value, i32) {
    let LoadedGenerator { sa, l, ground_truth } = g;
    let mut report = json!({
        "n": sa.n(),
        "tracial": sa.is_tracial(),
        "norm": l.norm(),
    });
    let dom = in_domain(sa, l);
    report["domain"] = json!({
        "passes": dom.passes(),
        "normalized": dom.normalized,
        "divergence": dom.divergence,
        "symmetry": dom.symmetry,
    });
    if !dom.passes() {
        return (report, EXIT_DOMAIN);
    }

    let form = match is_elliptic_form(sa, l) {
        Ok(r) => r,
        Err(e) => return with_error(report, e),
    };
    let ccp = match is_elliptic_ccp(sa, l) {
        Ok(r) => r,
        Err(e) => return with_error(report, e),
    };
    report["elliptic"] = json!(form.elliptic && ccp);
    report["ellipticity"] = json!({
        "form": form.elliptic,
        "ccp": ccp,
        "min_eig": form.min_eig,
    });
    if form.elliptic != ccp {
        report["error"] = json!("ellipticity oracles disagree");
        return (report, EXIT_DISAGREEMENT);
    }

    let ex = match exactness_report(sa, l) {
        Ok(r) => r,
        Err(e) => return with_error(report, e),
    };
    report["exact"] = json!(ex.exact);
    let names = ["coboundary", "inner_potential", "derivation", "kms"];
    report["exactness_criteria"] = Value::Object(
        names
            .iter()
            .zip(ex.criteria.iter())
            .map(|(k, c)| (k.to_string(), json!({"holds": c.holds, "residual": c.residual})))
            .collect(),
    );

    if form.elliptic && ex.exact {
        let inv = match extract_invariant(sa, l) {
            Ok(inv) => inv,
            Err(e) => return with_error(report, e),
        };
        let fp = fingerprint(&inv, sa);
        report["invariant"] = invariant_json(&inv, &fp);
        if let Some(gt) = ground_truth {
            let v_err = (&inv.v - &gt.v).norm() / gt.v.norm().max(1e-300);
            let v_err = if gt.v.norm() == 0.0 { inv.v.norm() } else { v_err };
            let span = (span_projector(&inv.momenta, sa.n())
                - span_projector(&gt.momenta, sa.n()))
            .norm();
            report["ground_truth_check"] = json!({
                "m_matches": inv.momenta.dim() == gt.momenta.dim(),
                "v_relative_error": v_err,
                "span_distance": span,
            });
        }
    }

    if form.elliptic {
        match markov_checks(sa, l, &MARKOV_TIMES) {
            Ok(rep) => {
                report["markov"] = json!({
                    "passes": rep.passes(1e-8, sa.tol().eps_psd),
                    "max_residual": rep.max_residual(),
                    "min_choi_eig": rep.min_choi_eig(),
                    "detail": rep,
                });
            }
            Err(e) => return with_error(report, e),
        }
        match mixing_analysis(sa, l) {
            Ok(mix) => {
                report["mixing"] = json!({
                    "limit_exists": mix.limit_exists,
                    "spectral_gap": if mix.spectral_gap.is_finite() { json!(mix.spectral_gap) } else { Value::Null },
                    "peripheral": mix.peripheral.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                });
            }
            Err(e) => return with_error(report, e),
        }
    }
    (report, EXIT_OK)
}

fn with_error(mut report: Value, e: Error) -> (Value, i32) {
    report["error"] = json!(e.to_string());
    (report, exit_code(&e))
}

fn human(report: &Value) -> String {
    let mut s = String::new();
    let mut line = |t: String| {
        s.push_str(&t);
        s.push('\n');
    };
    line(format!(
        "n = {}, state: {}",
        report["n"],
        if report["tracial"] == json!(true) { "tracial" } else { "non-tracial" }
    ));
    if report["domain"]["passes"] == json!(true) {
        line("domain: ok".into());
    } else {
        line(format!(
            "domain: violated (|L(1)| {}, |rho o L| {}, |L(x*) - L(x)*| {})",
            report["domain"]["normalized"], report["domain"]["divergence"], report["domain"]["symmetry"]
        ));
    }
    if let Some(e) = report.get("ellipticity") {
        line(format!(
            "elliptic: form {} / ccp {} (min eig {})",
            e["form"], e["ccp"], e["min_eig"]
        ));
    }
    if let Some(x) = report.get("exact") {
        line(format!("exact: {x}"));
        if let Some(Value::Object(c)) = report.get("exactness_criteria") {
            for (k, v) in c {
                line(format!("  {k}: {} (residual {})", v["holds"], v["residual"]));
            }
        }
    }
    if let Some(inv) = report.get("invariant") {
        line(format!("momentum space dimension: {}", inv["m"]));
        line(format!("potential spectrum (Im): {}", inv["fingerprint"]["spec_v"]));
        line(format!("source hash: {}", inv["source_hash"].as_str().unwrap_or("")));
    }
    if let Some(g) = report.get("ground_truth_check") {
        line(format!(
            "ground truth: m matches {}, v error {}, span distance {}",
            g["m_matches"], g["v_relative_error"], g["span_distance"]
        ));
    }
    if let Some(m) = report.get("markov") {
        line(format!(
            "markov axioms: {} (max residual {}, min Choi eig {})",
            if m["passes"] == json!(true) { "pass" } else { "FAIL" },
            m["max_residual"],
            m["min_choi_eig"]
        ));
    }
    if let Some(m) = report.get("mixing") {
        line(format!("mixing: {} (spectral gap {})", m["limit_exists"], m["spectral_gap"]));
    }
    if let Some(e) = report.get("error") {
        line(format!("error: {}", e.as_str().unwrap_or("")));
    }
    s
}

fn cmd_analyze(path: &Path, as_json: bool, tol: Tolerances, out: &mut dyn Write) -> CmdResult {
    let g = load(path, tol)?;
    let (report, code) = analyze(&g);
    let text = if as_json {
        let mut t = serde_json::to_string_pretty(&report).expect("report serializes");
        t.push('\n');
        t
    } else {
        human(&report)
    };
    emit(out, &text)?;
    Ok(code)
}

fn parse_weight(s: &str) -> std::result::Result<f64, Failure> {
    let bad = || Failure {
        code: EXIT_INPUT,
        message: format!("cannot parse weight {s:?}"),
    };
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

/// State algebra from `tracial` or `diag:w1,w2,...`.
fn parse_omega(n: usize, choice: &str, tol: Tolerances) -> std::result::Result<StateAlgebra, Failure> {
    if choice == "tracial" {
        let mut sa = StateAlgebra::tracial(n);
        sa.set_tolerances(tol);
        return Ok(sa);
    }
    let Some(list) = choice.strip_prefix("diag:") else {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("unknown omega {choice:?}; expected tracial or diag:w1,w2,..."),
        });
    };
    let w = list.split(',').map(parse_weight).collect::<std::result::Result<Vec<_>, _>>()?;
    if w.len() != n {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("omega has {} weights, expected {n}", w.len()),
        });
    }
    let mut sa = StateAlgebra::diagonal(&w).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    })?;
    sa.set_tolerances(tol);
    Ok(sa)
}

#[allow(clippy::too_many_arguments)]
fn cmd_random(
    n: usize,
    omega: &str,
    m: usize,
    seed: u64,
    kind: &str,
    tol: Tolerances,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    if n == 0 {
        return Err(Failure {
            code: EXIT_INPUT,
            message: "n must be positive".into(),
        });
    }
    let kind: SampleKind = kind.parse().map_err(|e: Error| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    })?;
    let sa = parse_omega(n, omega, tol)?;
    let s = sample_generator(&sa, m, seed, kind)?;
    let text = GeneratorFile::new(&sa, &s.l, s.ground_truth.as_ref()).to_json();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            code: EXIT_INPUT,
            message: format!("{}: {e}", p.display()),
        })?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

fn cmd_compare(
    a: &Path,
    b: &Path,
    certificate: Option<&Path>,
    search: Option<usize>,
    seed: u64,
    tol: Tolerances,
    out: &mut dyn Write,
) -> CmdResult {
    let ga = load(a, tol)?;
    let gb = load(b, tol)?;
    if ga.sa.n() != gb.sa.n() || (ga.sa.omega() - gb.sa.omega()).norm() > tol.eps_eq {
        return Err(Error::IncompatibleStateAlgebras(format!(
            "density operators differ ({} vs {})",
            a.display(),
            b.display()
        ))
        .into());
    }
    let sa = &ga.sa;
    let inv_a = extract_invariant(sa, &ga.l)?;
    let inv_b = extract_invariant(sa, &gb.l)?;
    let fa = fingerprint(&inv_a, sa);
    let fb = fingerprint(&inv_b, sa);
    let outcome = match certificate {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure {
                code: EXIT_INPUT,
                message: format!("{}: {e}", p.display()),
            })?;
            let u = parse_unitary(&text)?;
            if check_conjugacy(sa, &inv_a, &inv_b, &u)? {
                ConjugacyOutcome::Conjugate(u)
            } else if !fa.matches(&fb, 1e-8) {
                ConjugacyOutcome::NotConjugate
            } else {
                ConjugacyOutcome::Inconclusive
            }
        }
        None => search_conjugacy(sa, &inv_a, &inv_b, search.unwrap_or(20), seed)?,
    };
    let (verdict, code, cert) = match &outcome {
        ConjugacyOutcome::Conjugate(u) => ("Conjugate", EXIT_OK, json!(encode_matrix(u))),
        ConjugacyOutcome::NotConjugate => ("NotConjugate", EXIT_NOT_CONJUGATE, Value::Null),
        ConjugacyOutcome::Inconclusive => ("Inconclusive", EXIT_INCONCLUSIVE, Value::Null),
    };
    let report = json!({
        "verdict": verdict,
        "certificate": cert,
        "fingerprints_match": fa.matches(&fb, 1e-8),
        "fingerprint_a": fingerprint_json(&fa),
        "fingerprint_b": fingerprint_json(&fb),
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(out, &text)?;
    Ok(code)
}

fn cmd_evolve(path: &Path, times: &[f64], tol: Tolerances, out: &mut dyn Write) -> CmdResult {
    let g = load(path, tol)?;
    let flows = times
        .iter()
        .map(|&t| evolve(&g.l, t).map(|phi| json!({"t": t, "phi": encode_matrix(phi.mat())})))
        .collect::<crate::Result<Vec<_>>>()?;
    let rep = markov_checks(&g.sa, &g.l, times)?;
    let report = json!({
        "passes": rep.passes(1e-8, g.sa.tol().eps_psd),
        "report": rep,
        "flows": flows,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_fixtures(dir: &Path, out: &mut dyn Write) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    for (name, file) in crate::fixtures::all()? {
        let p = dir.join(name);
        std::fs::write(&p, file.to_json()).map_err(Error::from)?;
        emit(out, &format!("wrote {}\n", p.display()))?;
    }
    Ok(EXIT_OK)
}
