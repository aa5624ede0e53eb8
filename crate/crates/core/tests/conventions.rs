use dynvar::cohomology::exactness_report;
use dynvar::fixtures;
use dynvar::generators::{
    ccp_min_eig, is_elliptic_ccp_with, is_elliptic_form, sample_generator, ChoiConvention, SampleKind,
};
use dynvar::io::LoadedGenerator;
use dynvar::linalg::c;
use dynvar::semigroup::markov_checks;
use dynvar::{StateAlgebra, Superoperator, Tolerances};

fn load(f: dynvar::io::GeneratorFile) -> LoadedGenerator {
    f.resolve(Tolerances::default()).unwrap()
}

fn suite() -> Vec<(StateAlgebra, Superoperator)> {
    let mut out = Vec::new();
    for weights in [vec![0.7, 0.3], vec![0.5, 0.3, 0.2], vec![0.5, 0.25, 0.25]] {
        let sa = StateAlgebra::diagonal(&weights).unwrap();
        for seed in 0..6 {
            let m = if sa.n() == 3 && weights[1] == weights[2] { 2 } else { 1 };
            let exact = sample_generator(&sa, m, seed, SampleKind::Exact).unwrap().l;
            let generic = sample_generator(&sa, 1, seed, SampleKind::EllipticGeneric).unwrap().l;
            out.push((sa.clone(), &exact * c(-1.0)));
            out.push((sa.clone(), exact));
            out.push((sa.clone(), &generic * c(-1.0)));
            out.push((sa.clone(), generic));
        }
    }
    out
}

#[test]
fn direct_choi_agrees_with_form_test() {
    for (sa, l) in suite() {
        let form = is_elliptic_form(&sa, &l).unwrap().elliptic;
        let ccp = is_elliptic_ccp_with(&sa, &l, ChoiConvention::Direct).unwrap();
        assert_eq!(form, ccp);
    }
}

#[test]
fn partial_transpose_choi_disagrees_somewhere() {
    let disagreements = suite()
        .into_iter()
        .filter(|(sa, l)| {
            let form = is_elliptic_form(sa, l).unwrap().elliptic;
            let (min, cut) = ccp_min_eig(sa, l, ChoiConvention::PartialTranspose);
            form != (min >= -cut)
        })
        .count();
    assert!(disagreements > 0);
}

#[test]
fn negated_laplacian_is_not_completely_positive() {
    let g = load(fixtures::dephasing_n2().unwrap());
    let neg = &g.l * c(-1.0);
    let rep = markov_checks(&g.sa, &neg, &[0.5, 1.0]).unwrap();
    assert!(rep.min_choi_eig() < -1e-6);
    assert!(!rep.passes(1e-8, 1e-10));
}

#[test]
fn non_exact_fixture_still_generates_a_markov_semigroup() {
    let g = load(fixtures::cyclic_shift_n3().unwrap());
    let rep = markov_checks(&g.sa, &g.l, &[0.1, 0.7, 1.3]).unwrap();
    assert!(rep.passes(1e-8, 1e-10), "{}", rep.max_residual());
}

#[test]
fn sampled_kms_criterion_on_larger_algebras() {
    let sa = StateAlgebra::tracial(5);
    let shift = sample_generator(&sa, 0, 0, SampleKind::NonexactAuto).unwrap().l;
    let rep = exactness_report(&sa, &shift).unwrap();
    assert!(!rep.exact);
    assert!(rep.criteria.iter().all(|c| !c.holds));

    let sa = StateAlgebra::diagonal(&[0.3, 0.25, 0.2, 0.15, 0.1]).unwrap();
    let exact = sample_generator(&sa, 1, 4, SampleKind::Exact).unwrap().l;
    let rep = exactness_report(&sa, &exact).unwrap();
    assert!(rep.exact);
    assert!(rep.criteria.iter().all(|c| c.holds));
}
