//! Generators in `D(A, ρ)`: domain checks, the two ellipticity oracles,
//! momentum spaces and their Laplacians, and seeded samplers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{StateAlgebra, Superoperator};
use crate::error::{Error, Result};
use crate::forms::{kermu_hermitian, kermu_sparse, symbol, symbol_functional, OneForm};
use crate::linalg::{
    self, c, herm_eig, identity, realify, unit, unit_vec_index, vidx, CMat, CVec, ONE,
    ZERO,
};

/// Real inner-product space of skew-adjoint, ρ-centered operators commuting
/// with `ω`, given by a basis declared orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSpace {
    basis: Vec<CMat>,
}

impl MomentumSpace {
    pub fn new(sa: &StateAlgebra, basis: Vec<CMat>) -> Result<Self> {
        let ms = MomentumSpace { basis };
        ms.validate(sa)?;
        Ok(ms)
    }

    pub fn empty() -> Self {
        MomentumSpace { basis: Vec::new() }
    }

    pub(crate) fn from_basis_unchecked(basis: Vec<CMat>) -> Self {
        MomentumSpace { basis }
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn validate(&self, sa: &StateAlgebra) -> Result<()> {
        let n = sa.n();
        let eps = sa.tol().eps_eq;
        for (k, p) in self.basis.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::InvalidMomentumSpace(format!(
                    "p{k} has shape {}x{}, expected {n}x{n}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            let scale = p.norm().max(1e-300);
            let skew = linalg::skewness_residual(p);
            if skew > eps * scale {
                return Err(Error::InvalidMomentumSpace(format!(
                    "p{k} is not skew-adjoint (residual {skew:.3e})"
                )));
            }
            let r = sa.rho_unchecked(p).norm();
            if r > eps * scale {
                return Err(Error::InvalidMomentumSpace(format!("rho(p{k}) = {r:.3e}")));
            }
            let com = sa.commutes_residual(p);
            if com > eps * scale {
                return Err(Error::InvalidMomentumSpace(format!(
                    "p{k} does not commute with omega (residual {com:.3e})"
                )));
            }
        }
        if !self.basis.is_empty() {
            let cols: Vec<_> = self.basis.iter().map(realify).collect();
            let m = nalgebra::DMatrix::from_columns(&cols);
            let rank = linalg::rank_real(&m, 1e-10);
            if rank < self.basis.len() {
                return Err(Error::InvalidMomentumSpace(format!(
                    "basis is linearly dependent (rank {rank} < {})",
                    self.basis.len()
                )));
            }
        }
        Ok(())
    }

    /// Same space under the basis `p'_j = Σ_k o[k, j] p_k`.
    pub fn rotated(&self, o: &nalgebra::DMatrix<f64>) -> MomentumSpace {
        let m = self.basis.len();
        let n = self.basis.first().map(|p| p.nrows()).unwrap_or(0);
        let basis = (0..m)
            .map(|j| {
                let mut acc = CMat::zeros(n, n);
                for k in 0..m {
                    acc += &self.basis[k] * c(o[(k, j)]);
                }
                acc
            })
            .collect();
        MomentumSpace { basis }
    }

    /// `q = Σ p_k²`, independent of the orthonormal basis.
    pub fn casimir(&self, n: usize) -> CMat {
        let mut q = CMat::zeros(n, n);
        for p in &self.basis {
            q += p * p;
        }
        q
    }
}

/// Residuals of the three conditions defining `D(A, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub normalized: f64,
    pub divergence: f64,
    pub symmetry: f64,
    pub normalized_ok: bool,
    pub divergence_ok: bool,
    pub symmetry_ok: bool,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.normalized_ok && self.divergence_ok && self.symmetry_ok
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.normalized_ok {
            parts.push(format!("|L(1)| = {:.3e}", self.normalized));
        }
        if !self.divergence_ok {
            parts.push(format!("|rho o L| = {:.3e}", self.divergence));
        }
        if !self.symmetry_ok {
            parts.push(format!("|L(x*) - L(x)*| = {:.3e}", self.symmetry));
        }
        parts.join(", ")
    }
}

pub fn in_domain(sa: &StateAlgebra, l: &Superoperator) -> ValidationReport {
    let n = sa.n();
    let normalized = l.apply(&identity(n)).norm();
    let divergence = (0..n * n)
        .map(|p| sa.rho_unchecked(&l.apply_unit(p)).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let symmetry = l.symmetry_residual();
    let cut = sa.tol().eps_eq * l.norm();
    ValidationReport {
        normalized,
        divergence,
        symmetry,
        normalized_ok: normalized <= cut,
        divergence_ok: divergence <= cut,
        symmetry_ok: symmetry <= cut,
    }
}

pub(crate) fn require_domain(sa: &StateAlgebra, l: &Superoperator) -> Result<()> {
    if l.n() != sa.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("superoperator on M_{}", sa.n()),
            found: format!("superoperator on M_{}", l.n()),
        });
    }
    let rep = in_domain(sa, l);
    if rep.passes() {
        Ok(())
    } else {
        Err(Error::DomainViolation(rep.describe()))
    }
}

#[derive(Debug, Clone)]
pub struct EllipticityReport {
    pub elliptic: bool,
    pub min_eig: f64,
    pub witness: Option<OneForm>,
}

/// PSD slack for a Hermitian matrix whose entries scale with `‖L‖`.
pub(crate) fn psd_cut(sa: &StateAlgebra, max_abs_eig: f64, l_norm: f64) -> f64 {
    sa.tol().eps_psd * max_abs_eig.max(l_norm)
}

/// Ellipticity via the symbol: `σ_L(ω*ω) ≤ 0` for every one-form, tested as
/// positivity of `M[s, r] = −σ_L(κ_s* κ_r)` over a basis of `Ω¹`.
pub fn is_elliptic_form(sa: &StateAlgebra, l: &Superoperator) -> Result<EllipticityReport> {
    require_domain(sa, l)?;
    let n = sa.n();
    let f = symbol_functional(sa, l);
    let m = -kermu_hermitian(n, &f);
    let (vals, vecs) = herm_eig(&m);
    let min_eig = *vals.last().unwrap();
    let max_abs = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = psd_cut(sa, max_abs, l.norm());
    if min_eig >= -cut {
        return Ok(EllipticityReport {
            elliptic: true,
            min_eig,
            witness: None,
        });
    }
    let coef = vecs.column(vecs.ncols() - 1);
    let nn = n * n;
    let mut t = CMat::zeros(nn, nn);
    for (r, terms) in kermu_sparse(n).into_iter().enumerate() {
        for (p, q, v) in terms {
            t[(p, q)] += coef[r] * v;
        }
    }
    let witness = OneForm::from_coords_unchecked(n, t);
    let value = symbol(sa, l, &witness.star().wedge(&witness));
    if value.re <= cut {
        return Err(Error::InternalInconsistency(format!(
            "ellipticity witness evaluates to {value} instead of a positive number"
        )));
    }
    Ok(EllipticityReport {
        elliptic: false,
        min_eig,
        witness: Some(witness),
    })
}

/// How the Choi matrix is arranged before the conditional positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiConvention {
    /// `Σ E_ij ⊗ L(E_ij)` as is.
    Direct,
    /// Partial transpose on the first tensor factor.
    PartialTranspose,
}

/// Smallest eigenvalue of `Q J Q`, with `Q` projecting off the maximally
/// entangled vector, together with the PSD cut in force.
pub fn ccp_min_eig(sa: &StateAlgebra, l: &Superoperator, conv: ChoiConvention) -> (f64, f64) {
    let n = sa.n();
    let nn = n * n;
    let mut j = l.choi();
    if conv == ChoiConvention::PartialTranspose {
        let orig = j.clone();
        for i in 0..n {
            for k in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        j[(k * n + a, i * n + b)] = orig[(i * n + a, k * n + b)];
                    }
                }
            }
        }
    }
    let mut omega_me = CVec::zeros(nn);
    for i in 0..n {
        omega_me[i * n + i] = c(1.0 / (n as f64).sqrt());
    }
    let q = identity(nn) - &omega_me * omega_me.adjoint();
    let qjq = &q * j * &q;
    let (min, max_abs) = linalg::herm_extremes(&qjq);
    (min, psd_cut(sa, max_abs, l.norm()))
}

pub fn is_elliptic_ccp_with(
    sa: &StateAlgebra,
    l: &Superoperator,
    conv: ChoiConvention,
) -> Result<bool> {
    require_domain(sa, l)?;
    let (min, cut) = ccp_min_eig(sa, l, conv);
    Ok(min >= -cut)
}

/// Ellipticity via conditional complete positivity of the Choi matrix. The
/// `Direct` arrangement is the one that agrees with [`is_elliptic_form`].
pub fn is_elliptic_ccp(sa: &StateAlgebra, l: &Superoperator) -> Result<bool> {
    is_elliptic_ccp_with(sa, l, ChoiConvention::Direct)
}

/// `Δ = Σ ad(p_k)²`.
pub fn laplacian(sa: &StateAlgebra, p: &MomentumSpace) -> Result<Superoperator> {
    p.validate(sa)?;
    let n = sa.n();
    let mut acc = Superoperator::zero(n);
    for pk in p.basis() {
        let dk = Superoperator::ad(pk);
        acc = &acc + &dk.compose(&dk);
    }
    Ok(acc)
}

pub(crate) fn check_potential(sa: &StateAlgebra, v: &CMat) -> Result<()> {
    let n = sa.n();
    if v.nrows() != n || v.ncols() != n {
        return Err(Error::InvalidPotential(format!(
            "shape {}x{}, expected {n}x{n}",
            v.nrows(),
            v.ncols()
        )));
    }
    let eps = sa.tol().eps_eq;
    let scale = v.norm().max(1.0);
    let skew = linalg::skewness_residual(v);
    if skew > eps * scale {
        return Err(Error::InvalidPotential(format!(
            "not skew-adjoint (residual {skew:.3e})"
        )));
    }
    let r = sa.rho_unchecked(v).norm();
    if r > eps * scale {
        return Err(Error::InvalidPotential(format!("rho(v) = {r:.3e}")));
    }
    let com = sa.commutes_residual(v);
    if com > eps * scale {
        return Err(Error::InvalidPotential(format!(
            "does not commute with omega (residual {com:.3e})"
        )));
    }
    Ok(())
}

/// `L = Δ_P + ad(v)`.
pub fn make_generator(sa: &StateAlgebra, p: &MomentumSpace, v: &CMat) -> Result<Superoperator> {
    check_potential(sa, v)?;
    let delta = laplacian(sa, p)?;
    Ok(&delta + &Superoperator::ad(v))
}

/// Largest residual of `L(1) = 0` and the Leibniz rule on matrix-unit pairs.
pub fn derivation_residual(l: &Superoperator) -> f64 {
    let n = l.n();
    let nn = n * n;
    let imgs: Vec<CMat> = (0..nn).map(|p| l.apply_unit(p)).collect();
    let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
    let mut worst = l.apply(&identity(n)).norm();
    for x in 0..nn {
        for y in 0..nn {
            let (xi, xj) = (x % n, x / n);
            let (yi, yj) = (y % n, y / n);
            let mut r = -(&imgs[x] * &units[y]) - &units[x] * &imgs[y];
            if xj == yi {
                r += &imgs[vidx(n, xi, yj)];
            }
            worst = worst.max(r.norm());
        }
    }
    worst
}

pub(crate) fn is_derivation_scaled(l: &Superoperator, scale: f64, eps: f64) -> bool {
    derivation_residual(l) <= eps * scale
}

/// `L(1) = 0` and `L(xy) = L(x)y + xL(y)`, to `1e-9·‖L‖`.
pub fn is_derivation(l: &Superoperator) -> bool {
    is_derivation_scaled(l, l.norm(), 1e-9)
}

/// Recover `v` with `D = ad(v)`, `v* = −v`, `ρ(v) = 0`.
pub fn extract_inner_potential(sa: &StateAlgebra, d: &Superoperator) -> Result<CMat> {
    extract_inner_potential_scaled(sa, d, d.norm())
}

/// As [`extract_inner_potential`], with tolerances measured against `scale`
/// (used when `D` is a difference that may cancel to round-off).
pub(crate) fn extract_inner_potential_scaled(
    sa: &StateAlgebra,
    d: &Superoperator,
    scale: f64,
) -> Result<CMat> {
    let n = sa.n();
    let eps = sa.tol().eps_eq;
    let res = derivation_residual(d);
    if res > eps * scale {
        return Err(Error::NotADerivation(res / scale.max(1e-300)));
    }
    let mut v0 = CMat::zeros(n, n);
    for j in 0..n {
        v0 += d.apply(&unit(n, j, 0)) * unit(n, 0, j);
    }
    let mut v = (&v0 - v0.adjoint()) * c(0.5);
    let r = sa.rho_unchecked(&v);
    v -= identity(n) * r;
    let mismatch = (Superoperator::ad(&v).mat() - d.mat()).norm();
    if mismatch > eps * scale {
        return Err(Error::ReconstructionMismatch(format!(
            "|ad(v) - D| = {mismatch:.3e}"
        )));
    }
    let divergence = (0..n * n)
        .map(|p| sa.rho_unchecked(&d.apply_unit(p)).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if divergence <= eps * scale {
        let com = sa.commutes_residual(&v);
        if com > eps * scale.max(1.0) {
            return Err(Error::ReconstructionMismatch(format!(
                "recovered potential does not commute with omega (residual {com:.3e})"
            )));
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// `Δ_P + ad(v)` with known `(P, v)`.
    Exact,
    /// Lindblad form with jumps chosen to leave `ρ` invariant.
    EllipticGeneric,
    /// `Ad(W) − id` for a cyclic permutation `W` (tracial state only).
    NonexactAuto,
}

impl SampleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleKind::Exact => "exact",
            SampleKind::EllipticGeneric => "elliptic_generic",
            SampleKind::NonexactAuto => "nonexact_auto",
        }
    }
}

impl std::str::FromStr for SampleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SampleKind::Exact),
            "elliptic_generic" => Ok(SampleKind::EllipticGeneric),
            "nonexact_auto" => Ok(SampleKind::NonexactAuto),
            other => Err(Error::Parse(format!("unknown generator kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub momenta: MomentumSpace,
    pub v: CMat,
}

#[derive(Debug, Clone)]
pub struct SampledGenerator {
    pub l: Superoperator,
    pub ground_truth: Option<GroundTruth>,
}

/// Real dimension of the ρ-centered skew-adjoint commutant of `ω`.
pub fn centered_commutant_dim(sa: &StateAlgebra) -> usize {
    sa.commutant_skew_basis().len() - 1
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_commutant_skew(sa: &StateAlgebra, rng: &mut ChaCha8Rng) -> CMat {
    let n = sa.n();
    let mut acc = CMat::zeros(n, n);
    for b in sa.commutant_skew_basis() {
        acc += b * c(gaussian(rng));
    }
    acc
}

fn center(sa: &StateAlgebra, p: &CMat) -> CMat {
    let r = sa.rho_unchecked(p);
    p - identity(p.nrows()) * r
}

/// Random normal operator in the commutant of `ω`.
fn random_commutant_normal(sa: &StateAlgebra, rng: &mut ChaCha8Rng) -> CMat {
    let n = sa.n();
    let u = sa.eigbasis();
    let mut m = CMat::zeros(n, n);
    for block in sa.eigen_blocks() {
        let d = block.len();
        let w = linalg::random_unitary(rng, d);
        let diag: Vec<_> = (0..d)
            .map(|_| linalg::C64::new(gaussian(rng), gaussian(rng)))
            .collect();
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                let mut s = ZERO;
                for k in 0..d {
                    s += w[(a, k)] * diag[k] * w[(b, k)].conj();
                }
                m[(i, j)] = s;
            }
        }
    }
    u * m * u.adjoint()
}

/// Heisenberg-picture dissipator `x ↦ V* x V − ½{V*V, x}`.
fn dissipator(v: &CMat) -> Superoperator {
    let vv = v.adjoint() * v;
    let half = &vv * c(0.5);
    &(&Superoperator::sandwich(&v.adjoint(), v) - &Superoperator::left_mult(&half))
        - &Superoperator::right_mult(&half)
}

/// Seeded generator sampler.
pub fn sample_generator(
    sa: &StateAlgebra,
    m: usize,
    seed: u64,
    kind: SampleKind,
) -> Result<SampledGenerator> {
    let n = sa.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SampleKind::Exact => {
            let available = centered_commutant_dim(sa);
            if m > available {
                return Err(Error::CommutantTooSmall {
                    requested: m,
                    available,
                });
            }
            let mut basis: Vec<CMat> = Vec::with_capacity(m);
            while basis.len() < m {
                let mut p = center(sa, &random_commutant_skew(sa, &mut rng));
                for q in &basis {
                    let ip: f64 = q.iter().zip(p.iter()).map(|(a, b)| (a.conj() * b).re).sum();
                    p -= q * c(ip);
                }
                let norm = p.norm();
                if norm < 1e-6 {
                    continue;
                }
                basis.push(p / c(norm));
            }
            for p in basis.iter_mut() {
                let s: f64 = rng.random_range(0.5..1.5);
                *p *= c(s);
            }
            let v = center(sa, &random_commutant_skew(sa, &mut rng));
            let momenta = MomentumSpace::new(sa, basis)?;
            let l = make_generator(sa, &momenta, &v)?;
            Ok(SampledGenerator {
                l,
                ground_truth: Some(GroundTruth { momenta, v }),
            })
        }
        SampleKind::EllipticGeneric => {
            let h = random_commutant_skew(sa, &mut rng);
            let mut l = Superoperator::ad(&h);
            for _ in 0..m.max(1) {
                let v = random_commutant_normal(sa, &mut rng);
                l = &l + &dissipator(&v);
            }
            // detailed-balance jumps between eigenvectors of ω
            let u = sa.eigbasis().clone();
            let lambda = sa.eigvals().to_vec();
            for i in 0..n {
                for j in (i + 1)..n {
                    let s: f64 = rng.random_range(0.2..1.0);
                    let eij = &u * unit(n, i, j) * u.adjoint();
                    let eji = &u * unit(n, j, i) * u.adjoint();
                    l = &l + &dissipator(&eij).scale(s * lambda[i]);
                    l = &l + &dissipator(&eji).scale(s * lambda[j]);
                }
            }
            Ok(SampledGenerator {
                l,
                ground_truth: None,
            })
        }
        SampleKind::NonexactAuto => {
            if !sa.is_tracial() {
                return Err(Error::RequiresTracialState);
            }
            let mut w = CMat::zeros(n, n);
            for k in 0..n {
                w[((k + 1) % n, k)] = ONE;
            }
            let l = &Superoperator::conj_by(&w) - &Superoperator::identity(n);
            Ok(SampledGenerator {
                l,
                ground_truth: None,
            })
        }
    }
}
