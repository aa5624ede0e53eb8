//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use dynvar::cohomology::{coboundary, exactness_report, ModularCochain};
use dynvar::forms::{d, kermu_basis, symbol};
use dynvar::generators::{
    centered_commutant_dim, is_elliptic_ccp, is_elliptic_form, laplacian, sample_generator,
    SampleKind,
};
use dynvar::invariants::{
    extract_invariant, extract_invariant_with, orthogonal_relation, random_orthogonal,
    span_projector, KmsMetric,
};
use dynvar::io::GeneratorFile;
use dynvar::linalg::{c, rel_diff, unit, unit_vec_index, CMat, CVec, C64, I};
use dynvar::semigroup::{compress, evolve, markov_checks, mixing_analysis};
use dynvar::{StateAlgebra, Superoperator, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn states() -> Vec<(&'static str, StateAlgebra)> {
    vec![
        ("n=2 tracial", StateAlgebra::tracial(2)),
        ("n=3 tracial", StateAlgebra::tracial(3)),
        (
            "n=3 diag(1/2,1/4,1/4)",
            StateAlgebra::diagonal(&[0.5, 0.25, 0.25]).unwrap(),
        ),
    ]
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixtures() -> Vec<(String, StateAlgebra, Superoperator)> {
    let mut out = Vec::new();
    for name in [
        "dephasing_n2.json",
        "cyclic_shift_n3.json",
        "free_laplacian_n3.json",
        "pure_potential_n2.json",
    ] {
        let f = GeneratorFile::load(&fixture_dir().join(name)).unwrap();
        let g = f.resolve(Tolerances::default()).unwrap();
        out.push((name.to_string(), g.sa, g.l));
    }
    out
}

/// Round-trip classification of seeded exact generators.
fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut worst_v = 0.0f64;
    let mut worst_span = 0.0f64;
    let mut worst_rec = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for (label, sa) in states() {
        let max_m = centered_commutant_dim(&sa).min(3);
        for m in 1..=max_m {
            for seed in 0..50u64 {
                let s = sample_generator(&sa, m, seed, SampleKind::Exact).unwrap();
                let gt = s.ground_truth.unwrap();
                match extract_invariant(&sa, &s.l) {
                    Ok(inv) => {
                        let v_err = rel_diff(&inv.v, &gt.v, 1e-300);
                        let span = (span_projector(&inv.momenta, sa.n())
                            - span_projector(&gt.momenta, sa.n()))
                        .norm();
                        let rebuilt = &laplacian(&sa, &inv.momenta).unwrap() + &Superoperator::ad(&inv.v);
                        let rec = (rebuilt.mat() - s.l.mat()).norm() / s.l.norm();
                        worst_v = worst_v.max(v_err);
                        worst_span = worst_span.max(span);
                        worst_rec = worst_rec.max(rec);
                        if inv.momenta.dim() != m {
                            failures.push(format!("{label} m={m} seed={seed}: dim {}", inv.momenta.dim()));
                        }
                    }
                    Err(e) => failures.push(format!("{label} m={m} seed={seed}: {e}")),
                }
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && worst_v <= 1e-8 && worst_span <= 1e-8 && worst_rec <= 1e-8 && secs <= 60.0;
    let mut detail = format!(
        "{count} generators, max v error {worst_v:.2e}, max span distance {worst_span:.2e}, max reconstruction {worst_rec:.2e}, {secs:.1}s"
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    outcome(pass, detail)
}

/// Permuted eigensolver input gives bases related by a real orthogonal matrix.
fn uniqueness() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, sa) in states() {
        let max_m = centered_commutant_dim(&sa).min(3);
        for m in 1..=max_m {
            for seed in 0..5u64 {
                let s = sample_generator(&sa, m, 100 + seed, SampleKind::Exact).unwrap();
                let a = extract_invariant_with(&sa, &s.l, None).unwrap();
                let b = extract_invariant_with(&sa, &s.l, Some(seed * 31 + 7)).unwrap();
                let (_, res, orth) = orthogonal_relation(&a.momenta, &b.momenta);
                worst = worst.max(res).max(orth);
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-7, format!("{count} pairs, max residual {worst:.2e}"))
}

fn weights(n: usize) -> Vec<f64> {
    match n {
        2 => vec![0.7, 0.3],
        3 => vec![0.5, 0.25, 0.25],
        _ => vec![0.4, 0.3, 0.2, 0.1],
    }
}

/// Mixed elliptic and non-elliptic generators at dimension `n`.
fn ellipticity_suite(n: usize, count: usize) -> Vec<(StateAlgebra, Superoperator)> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let sa = if i % 2 == 0 {
            StateAlgebra::tracial(n)
        } else {
            StateAlgebra::diagonal(&weights(n)).unwrap()
        };
        let m = 1 + i % centered_commutant_dim(&sa).min(3);
        let seed = (n * 1000 + i) as u64;
        let l = match i % 5 {
            0 => sample_generator(&sa, m, seed, SampleKind::Exact).unwrap().l,
            1 => sample_generator(&sa, m, seed, SampleKind::EllipticGeneric).unwrap().l,
            2 => {
                let s = sample_generator(&sa, m, seed, SampleKind::Exact).unwrap();
                -&laplacian(&sa, &s.ground_truth.unwrap().momenta).unwrap()
            }
            3 if sa.is_tracial() => sample_generator(&sa, 0, seed, SampleKind::NonexactAuto).unwrap().l,
            _ => -&sample_generator(&sa, m, seed, SampleKind::EllipticGeneric).unwrap().l,
        };
        out.push((sa, l));
    }
    out
}

/// The symbol test and the conditional-positivity test agree, and every
/// witness of non-ellipticity is confirmed.
fn ellipticity_agreement() -> Outcome {
    let mut disagreements = 0;
    let mut negatives = 0;
    let mut bad_witness = 0;
    let mut total = 0;
    for n in [2, 3, 4] {
        for (sa, l) in ellipticity_suite(n, 100) {
            total += 1;
            let form = is_elliptic_form(&sa, &l).unwrap();
            let ccp = is_elliptic_ccp(&sa, &l).unwrap();
            if form.elliptic != ccp {
                disagreements += 1;
            }
            if !form.elliptic {
                negatives += 1;
                let w = form.witness.as_ref().expect("witness for non-elliptic operator");
                let direct = symbol(&sa, &l, &w.star().wedge(w));
                let mut ok = direct.re > 0.0;
                if n == 2 {
                    ok &= symbol_of_square(&sa, &l, w).re > 0.0;
                }
                if !ok {
                    bad_witness += 1;
                }
            }
        }
    }
    outcome(
        disagreements == 0 && bad_witness == 0 && negatives > 0,
        format!("{total} generators, {negatives} non-elliptic, {disagreements} disagreements, {bad_witness} unconfirmed witnesses"),
    )
}

/// The four exactness criteria agree, and the cyclic-shift generator is
/// elliptic but not exact on all four.
fn exactness_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0;
    let mut exact_count = 0;
    let mut failures = Vec::new();
    for i in 0..200usize {
        let n = if i % 10 == 9 { 4 } else { 2 + i % 2 };
        let sa = if i % 3 == 0 {
            StateAlgebra::tracial(n)
        } else {
            StateAlgebra::diagonal(&weights(n)).unwrap()
        };
        let m = 1 + i % centered_commutant_dim(&sa).min(3);
        let seed = 5000 + i as u64;
        let (l, expect_exact) = match i % 4 {
            0 => (sample_generator(&sa, m, seed, SampleKind::Exact).unwrap().l, Some(true)),
            1 => (sample_generator(&sa, m, seed, SampleKind::EllipticGeneric).unwrap().l, None),
            // for n = 2 the shift is a self-adjoint unitary and Ad(W) − id is symmetric
            2 if sa.is_tracial() => (
                sample_generator(&sa, 0, seed, SampleKind::NonexactAuto).unwrap().l,
                Some(n == 2),
            ),
            _ => (Superoperator::ad(&random_potential(&sa, &mut rng)), Some(true)),
        };
        total += 1;
        match exactness_report(&sa, &l) {
            Ok(r) => {
                let agree = r.criteria.iter().all(|c| c.holds == r.exact);
                if !agree {
                    failures.push(format!("#{i}: criteria split"));
                }
                if let Some(e) = expect_exact {
                    if e != r.exact {
                        failures.push(format!("#{i}: expected exact={e}"));
                    }
                }
                if r.exact {
                    exact_count += 1;
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    let (_, sa, l) = fixtures().into_iter().find(|f| f.0 == "cyclic_shift_n3.json").unwrap();
    let elliptic = is_elliptic_form(&sa, &l).unwrap().elliptic && is_elliptic_ccp(&sa, &l).unwrap();
    let r = exactness_report(&sa, &l).unwrap();
    let cyclic_ok = elliptic && !r.exact && r.criteria.iter().all(|c| !c.holds);
    if !cyclic_ok {
        failures.push("cyclic shift fixture".into());
    }
    let mut detail = format!(
        "{total} generators ({exact_count} exact), cyclic shift: elliptic={elliptic}, exact on none of four={cyclic_ok}"
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    outcome(failures.is_empty(), detail)
}

/// Structural identities on randomized inputs.
fn structural_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let record = |name: &'static str, v: f64, worst: &mut Vec<(&'static str, f64)>| {
        match worst.iter_mut().find(|(k, _)| *k == name) {
            Some(e) => e.1 = e.1.max(v),
            None => worst.push((name, v)),
        }
    };
    let mut all_states = states();
    all_states.push(("n=2 diag", StateAlgebra::diagonal(&[0.7, 0.3]).unwrap()));
    for (_, sa) in &all_states {
        let n = sa.n();
        let omega = sa.omega().clone();
        for trial in 0..10u64 {
            let a = gaussian_matrix(&mut rng, n);
            let b = gaussian_matrix(&mut rng, n);
            let scale = a.norm() * b.norm();

            // defining identity of the modular operator, against ω a ω⁻¹
            let da = sa.delta(&a);
            let r = (rho(&omega, &(&a * &b)) - rho(&omega, &(&b * &da))).norm() / scale;
            record("delta defining identity", r, &mut worst);
            record("delta vs omega a omega^-1", rel_diff(&da, &delta_reference(&omega, &a), 1.0), &mut worst);
            record("delta(a)* = delta^-1(a*)", rel_diff(&da.adjoint(), &sa.delta_inv(&a.adjoint()), 1.0), &mut worst);

            // b_δ² = 0 on 0-cochains
            let q = random_commutant(sa, &mut rng);
            let psi = ModularCochain::from_density(sa, &q);
            let bb = coboundary(sa, &coboundary(sa, &psi).unwrap()).unwrap();
            record("b_delta^2 = 0", bb.norm() / psi.norm().max(1.0), &mut worst);

            // coboundary of ψ(z) = −ρ(zp) with δ(p) = p is ρ(a[p, x])
            let p = random_commutant(sa, &mut rng);
            let bpsi = coboundary(sa, &ModularCochain::from_density(sa, &-&p)).unwrap();
            let x = gaussian_matrix(&mut rng, n);
            let lhs = bpsi.eval(&[a.clone(), x.clone()]).unwrap();
            let rhs = rho(&omega, &(&a * (&p * &x - &x * &p)));
            record("coboundary of a 0-cochain", (lhs - rhs).norm() / (a.norm() * x.norm() * p.norm()), &mut worst);

            // symbol identities for in-domain generators
            let kind = if trial % 2 == 0 { SampleKind::Exact } else { SampleKind::EllipticGeneric };
            let m = 1 + (trial as usize) % centered_commutant_dim(sa).min(2);
            let l = sample_generator(sa, m, 900 + trial, kind).unwrap().l;
            let lstar = sa.adjoint_gns(&l);
            let w1 = d(&gaussian_matrix(&mut rng, n)).left(&gaussian_matrix(&mut rng, n));
            let w2 = d(&gaussian_matrix(&mut rng, n)).left(&gaussian_matrix(&mut rng, n));
            let xi = w1.wedge(&w2);
            let lnorm = l.norm() * xi.norm() * a.norm();
            let s1 = symbol(sa, &l, &xi.left(&a));
            let s2 = symbol(sa, &l, &xi.right(&da));
            record("sigma(a xi) = sigma(xi delta(a))", (s1 - s2).norm() / lnorm, &mut worst);
            let s3 = symbol(sa, &l, &w1.wedge(&w2));
            let s4 = symbol(sa, &lstar, &w2.wedge(&w1.delta_hat(sa)));
            record("sigma_L(w1 w2) = sigma_L*(w2 delta(w1))", (s3 - s4).norm() / (l.norm() * xi.norm()), &mut worst);

            // Laplacians: basis independence, adjoint decomposition, symbol of Δ
            let s = sample_generator(sa, m, 700 + trial, SampleKind::Exact).unwrap();
            let gt = s.ground_truth.unwrap();
            let o = random_orthogonal(&mut rng, gt.momenta.dim());
            let rotated = gt.momenta.rotated(&o);
            let lap = laplacian(sa, &gt.momenta).unwrap();
            let lap_rot = laplacian(sa, &rotated).unwrap();
            record("Laplacian basis independence", (lap.mat() - lap_rot.mat()).norm() / lap.norm(), &mut worst);
            let y = gaussian_matrix(&mut rng, n);
            let direct = laplacian_reference(rotated.basis(), &y);
            record("Laplacian vs commutator formula", rel_diff(&lap.apply(&y), &direct, 1.0), &mut worst);
            let claimed_adjoint = &lap - &Superoperator::ad(&gt.v);
            let defect = gns_adjoint_defect(&omega, &s.l, &claimed_adjoint);
            record("L* = Delta - ad(v)", defect / s.l.norm(), &mut worst);
            let ls = sa.adjoint_gns(&s.l);
            let sum = (&s.l + &ls).scale(0.5);
            let diff = (&s.l - &ls).scale(0.5);
            record("(L + L*)/2 = Delta", (sum.mat() - lap.mat()).norm() / s.l.norm(), &mut worst);
            record("(L - L*)/2 = ad(v)", (diff.mat() - Superoperator::ad(&gt.v).mat()).norm() / s.l.norm(), &mut worst);
            if trial < 2 {
                let mut w = 0.0f64;
                for pidx in 0..n * n {
                    for qidx in 0..n * n {
                        let ex = unit_vec_index(n, pidx);
                        let ey = unit_vec_index(n, qidx);
                        let sig = symbol(sa, &lap, &d(&ex).wedge(&d(&ey)));
                        let r = sig + rho(&omega, &(lap.apply(&ex) * &ey)) * 2.0;
                        w = w.max(r.norm() / lap.norm());
                    }
                }
                record("sigma_Delta(dx dy) = -2 rho(Delta(x) y)", w, &mut worst);
            }

            // metric invariance under the modular group and the sharp identity
            let g = KmsMetric::from_momenta(sa, &gt.momenta);
            let gnorm = g.kernel_norm() * xi.norm();
            let base = g.eval(sa, &xi);
            for t in [0.3, 1.0, -0.7] {
                let moved = g.eval(sa, &xi.modular_lift(sa, c(t)));
                record("g o sigma_t = g", (moved - base).norm() / gnorm, &mut worst);
            }
            record("g o delta = g", (g.eval(sa, &xi.delta_hat(sa)) - base).norm() / gnorm, &mut worst);
            let lhs = g.eval(sa, &w2.star().wedge(&w1));
            let rhs = g.eval(sa, &w1.sharp(sa).star().wedge(&w2.sharp(sa)));
            record("g(w2* w1) = g(w1#* w2#)", (lhs - rhs).norm() / gnorm, &mut worst);
            let back = w1.sharp(sa).sharp(sa);
            record("w## = w", (back.coords() - w1.coords()).norm() / w1.norm(), &mut worst);
            let aw = w1.left(&a).sharp(sa);
            let expected = w1.sharp(sa).right(&sa.delta_half(&a.adjoint()));
            record("(a w)# = w# delta^1/2(a*)", (aw.coords() - expected.coords()).norm() / (a.norm() * w1.norm()), &mut worst);
        }
        // dimension of the one-forms, against the rank of multiplication
        let nn = n * n;
        let by_rank = nn * nn - rank(&multiplication_matrix(n), 1e-12);
        let basis_len = kermu_basis(n).len();
        let ok = basis_len == nn * nn - nn && by_rank == nn * nn - nn;
        record("dim ker mu = n^4 - n^2", if ok { 0.0 } else { 1.0 }, &mut worst);
    }
    let max = worst.iter().map(|e| e.1).fold(0.0, f64::max);
    let failing: Vec<String> = worst
        .iter()
        .filter(|e| !(e.1 <= 1e-9))
        .map(|e| format!("{} ({:.2e})", e.0, e.1))
        .collect();
    let mut detail = format!("{} identities, max residual {max:.2e}", worst.len());
    if !failing.is_empty() {
        detail.push_str(&format!("; failing: {}", failing.join(", ")));
    }
    outcome(failing.is_empty(), detail)
}

/// Markov axioms for every elliptic fixture.
fn markov_axioms() -> Outcome {
    let mut worst = 0.0f64;
    let mut min_cp = f64::INFINITY;
    let mut checked = 0;
    for (_, sa, l) in fixtures() {
        if !is_elliptic_form(&sa, &l).unwrap().elliptic {
            continue;
        }
        let rep = markov_checks(&sa, &l, &[0.1, 0.7, 1.3]).unwrap();
        worst = worst.max(rep.max_residual());
        min_cp = min_cp.min(rep.min_choi_eig());
        checked += 1;
    }
    outcome(
        checked == 4 && worst <= 1e-8 && min_cp >= -1e-10,
        format!("{checked} fixtures, max residual {worst:.2e}, min Choi eigenvalue {min_cp:.2e}"),
    )
}

/// Spectral mixing verdict against `‖φ_100 − φ_200‖`.
fn mixing_vs_brute_force() -> Outcome {
    let mut cases: Vec<(String, StateAlgebra, Superoperator)> = fixtures();
    for seed in 0..6u64 {
        let sa = if seed % 2 == 0 {
            StateAlgebra::tracial(3)
        } else {
            StateAlgebra::diagonal(&[0.5, 0.25, 0.25]).unwrap()
        };
        let s = sample_generator(&sa, 2, 300 + seed, SampleKind::EllipticGeneric).unwrap();
        cases.push((format!("generic #{seed}"), sa, s.l));
    }
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (name, sa, l) in cases {
        let mix = mixing_analysis(&sa, &l).unwrap();
        if mix.spectral_gap < 0.1 {
            continue;
        }
        let gap = (evolve(&l, 100.0).unwrap().mat() - evolve(&l, 200.0).unwrap().mat()).norm();
        compared += 1;
        if (gap <= 1e-6) != mix.limit_exists {
            mismatches.push(format!("{name}: spectral {} vs brute force {gap:.2e}", mix.limit_exists));
        }
    }
    outcome(
        mismatches.is_empty() && compared > 0,
        format!("{compared} generators compared{}", mismatches.first().map(|m| format!("; {m}")).unwrap_or_default()),
    )
}

/// Compression to the support of a non-faithful invariant state.
fn compression() -> Outcome {
    let big = StateAlgebra::tracial(4);
    // K commutes with diag(1/2, 1/2, 0, 0)
    let mut k = CMat::zeros(4, 4);
    k[(0, 0)] = I * 0.3;
    k[(1, 1)] = -I * 0.7;
    k[(0, 1)] = C64::new(0.4, 0.2);
    k[(1, 0)] = C64::new(-0.4, 0.2);
    k[(2, 2)] = I * 1.1;
    k[(3, 3)] = -I * 0.5;
    k[(2, 3)] = C64::new(0.9, 0.0);
    k[(3, 2)] = C64::new(-0.9, 0.0);
    let l = Superoperator::ad(&k);
    let times = [0.1, 0.7, 1.3];
    let state2 = CMat::from_diagonal(&CVec::from_vec(vec![c(0.5), c(0.5), c(0.0), c(0.0)]));
    let r2 = compress(&big, &l, &state2, &times).unwrap();
    let state1 = unit(4, 0, 0);
    let r1 = compress(&big, &Superoperator::ad(&(&k - unit(4, 0, 1) * C64::new(0.4, 0.2) + unit(4, 1, 0) * C64::new(0.4, -0.2))), &state1, &times)
        .unwrap();
    let pass = r2.corner_dim() == 2
        && r2.semigroup_deviation <= 1e-9
        && r2.monotone
        && r1.corner_dim() == 1
        && r1.distance_from_trivial <= 1e-9;
    outcome(
        pass,
        format!(
            "rank 2: deviation {:.2e}, monotone {}; rank 1: corner dim {}, distance from trivial {:.2e}",
            r2.semigroup_deviation,
            r2.monotone,
            r1.corner_dim(),
            r1.distance_from_trivial
        ),
    )
}

/// `random` then `analyze` recovers the ground truth; output is deterministic.
fn cli_round_trip() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dynvar");
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("3", "tracial", "2", "42"),
        ("3", "diag:1/2,1/4,1/4", "3", "7"),
        ("2", "tracial", "1", "5"),
        ("2", "tracial", "3", "11"),
    ];
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (n, omega, m, seed) in configs {
        let args = ["random", "--n", n, "--omega", omega, "--m", m, "--seed", seed, "--kind", "exact"];
        let first = Command::new(bin).args(args).output().unwrap();
        let second = Command::new(bin).args(args).output().unwrap();
        if !first.status.success() || first.stdout != second.stdout {
            failures.push(format!("random {n} {omega} {m} {seed}: not deterministic or failed"));
            continue;
        }
        let path = dir.path().join(format!("g_{n}_{m}_{seed}.json"));
        std::fs::write(&path, &first.stdout).unwrap();
        let out = Command::new(bin).args(["analyze", "--json"]).arg(&path).output().unwrap();
        if out.status.code() != Some(0) {
            failures.push(format!("analyze exit {:?}", out.status.code()));
            continue;
        }
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let gt = &report["ground_truth_check"];
        let v = gt["v_relative_error"].as_f64().unwrap_or(f64::INFINITY);
        let span = gt["span_distance"].as_f64().unwrap_or(f64::INFINITY);
        worst = worst.max(v).max(span);
        if gt["m_matches"] != serde_json::json!(true) || v > 1e-8 || span > 1e-8 {
            failures.push(format!("{n} {omega} {m} {seed}: ground truth not recovered"));
        }
        let again = Command::new(bin).args(["analyze", "--json"]).arg(&path).output().unwrap();
        if again.stdout != out.stdout {
            failures.push("analyze output not deterministic".into());
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} configurations, max recovery error {worst:.2e}{}",
            configs.len(),
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

fn main() {
    // an explicit test filter that does not mention this suite skips it
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("round-trip classification", round_trip),
        ("uniqueness up to orthogonal change", uniqueness),
        ("ellipticity oracle agreement", ellipticity_agreement),
        ("four-way exactness agreement", exactness_agreement),
        ("structural identities", structural_identities),
        ("Markov axioms on fixtures", markov_axioms),
        ("mixing verdict vs brute force", mixing_vs_brute_force),
        ("compression sanity", compression),
        ("CLI determinism and round trip", cli_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", k + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
