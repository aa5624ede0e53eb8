//! Brute-force reference computations shared by the integration tests. They
//! deliberately avoid the library's vectorized code paths.

#![allow(dead_code)]

use dynvar::forms::OneForm;
use dynvar::linalg::{c, identity, unit_vec_index, CMat, C64};
use dynvar::{StateAlgebra, Superoperator};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `ω a ω⁻¹` with an explicit inverse.
pub fn delta_reference(omega: &CMat, a: &CMat) -> CMat {
    let inv = omega.clone().try_inverse().expect("faithful state");
    omega * a * inv
}

pub fn rho(omega: &CMat, a: &CMat) -> C64 {
    (omega * a).trace()
}

/// `Σ_k [p_k, [p_k, x]]`, one matrix at a time.
pub fn laplacian_reference(momenta: &[CMat], x: &CMat) -> CMat {
    let mut acc = CMat::zeros(x.nrows(), x.ncols());
    for p in momenta {
        let inner = p * x - x * p;
        acc += p * &inner - &inner * p;
    }
    acc
}

/// Random element of the commutant of `ω` (complex coefficients).
pub fn random_commutant(sa: &StateAlgebra, rng: &mut ChaCha8Rng) -> CMat {
    let mut acc = CMat::zeros(sa.n(), sa.n());
    for b in sa.commutant_skew_basis() {
        let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        acc += b * z;
    }
    acc
}

/// Random skew-adjoint, ρ-centered element of the commutant.
pub fn random_potential(sa: &StateAlgebra, rng: &mut ChaCha8Rng) -> CMat {
    let mut acc = CMat::zeros(sa.n(), sa.n());
    for b in sa.commutant_skew_basis() {
        let s: f64 = rng.sample(StandardNormal);
        acc += b * c(s);
    }
    let r = rho(sa.omega(), &acc);
    acc - identity(sa.n()) * r
}

/// `σ_L(ω*ω)` for `ω = Σ T[p,q] E_p dE_q`, expanded through
/// `(dx)* = −d(x*)`, so `ω* = Σ conj(T[p,q]) (E_q* dE_p* − d(E_q* E_p*))`.
pub fn symbol_of_square(sa: &StateAlgebra, l: &Superoperator, w: &OneForm) -> C64 {
    let n = sa.n();
    let nn = n * n;
    let t = w.coords();
    let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
    let one = identity(n);
    let entries: Vec<(usize, usize, C64)> = (0..nn)
        .flat_map(|p| (0..nn).map(move |q| (p, q)))
        .filter_map(|(p, q)| {
            let z = t[(p, q)];
            (z.norm() > 1e-14).then_some((p, q, z))
        })
        .collect();
    let sigma = |a: &CMat, x: &CMat, b: &CMat, y: &CMat| -> C64 {
        let xb = x * b;
        let by = b * y;
        let inner = l.apply(&(&xb * y)) - x * l.apply(&by) - l.apply(&xb) * y + x * l.apply(b) * y;
        rho(sa.omega(), &(a * inner))
    };
    let mut total = C64::new(0.0, 0.0);
    for &(p, q, z1) in &entries {
        let ep_s = units[p].adjoint();
        let eq_s = units[q].adjoint();
        let prod = &eq_s * &ep_s;
        for &(r, s, z2) in &entries {
            let coef = z1.conj() * z2;
            total += coef * (sigma(&eq_s, &ep_s, &units[r], &units[s]) - sigma(&one, &prod, &units[r], &units[s]));
        }
    }
    total
}

/// Matrix of multiplication `A ⊗ A → A` in the unit bases.
pub fn multiplication_matrix(n: usize) -> CMat {
    let nn = n * n;
    let mut m = CMat::zeros(nn, nn * nn);
    for p in 0..nn {
        for q in 0..nn {
            let prod = unit_vec_index(n, p) * unit_vec_index(n, q);
            for (k, z) in prod.iter().enumerate() {
                m[(k, p * nn + q)] = *z;
            }
        }
    }
    m
}

/// Numerical rank by singular values.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let s = m.clone().singular_values();
    let max = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > rel * max).count()
}

/// GNS adjoint defect `max |ρ(x* L(y)) − ρ(M(x)* y)|` over unit pairs.
pub fn gns_adjoint_defect(omega: &CMat, l: &Superoperator, m: &Superoperator) -> f64 {
    let n = l.n();
    let nn = n * n;
    let mut worst = 0.0f64;
    for p in 0..nn {
        let x = unit_vec_index(n, p);
        let mx = m.apply(&x);
        for q in 0..nn {
            let y = unit_vec_index(n, q);
            let lhs = rho(omega, &(x.adjoint() * l.apply(&y)));
            let rhs = rho(omega, &(mx.adjoint() * &y));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}
