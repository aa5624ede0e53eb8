//! KMS metrics, their decomposition into momentum spaces, extraction of the
//! dynamical invariant `(P, ⟨·,·⟩, v)`, and conjugacy checks.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::algebra::{StateAlgebra, Superoperator};
use crate::cohomology::exactness_report;
use crate::error::{Error, Result};
use crate::forms::{kermu_hermitian, TwoForm};
use crate::generators::{
    extract_inner_potential_scaled, is_elliptic_form, laplacian, MomentumSpace,
};
use crate::linalg::{
    self, c, herm_eig, herm_eigvals, identity, kron, realify, unit_vec_index, vec, vidx, CMat,
    CVec, C64, ZERO,
};

/// A metric on `Ω²` given by its kernel: `g(a dx dy) = ρ(a K(x, y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KmsMetric {
    n: usize,
    /// `K(E_p, E_q)` at index `p·N + q`.
    kernel: Vec<CMat>,
}

impl KmsMetric {
    /// Validated constructor: the kernel must vanish when either argument is
    /// the identity, be positive on `ω*ω`, and satisfy the KMS condition.
    pub fn from_kernel(sa: &StateAlgebra, kernel: Vec<CMat>) -> Result<Self> {
        let g = Self::raw(sa.n(), kernel)?;
        g.validate(sa, g.kernel_norm())?;
        Ok(g)
    }

    pub(crate) fn raw(n: usize, kernel: Vec<CMat>) -> Result<Self> {
        let nn = n * n;
        if kernel.len() != nn * nn || kernel.iter().any(|k| k.nrows() != n || k.ncols() != n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{} kernel entries of shape {n}x{n}", nn * nn),
                found: format!("{} entries", kernel.len()),
            });
        }
        Ok(KmsMetric { n, kernel })
    }

    /// `K(x, y) = −Σ_k [p_k, x][p_k, y]`, the metric presented by `P`.
    pub fn from_momenta(sa: &StateAlgebra, p: &MomentumSpace) -> Self {
        let n = sa.n();
        let nn = n * n;
        let units: Vec<CMat> = (0..nn).map(|q| unit_vec_index(n, q)).collect();
        let mut kernel = vec![CMat::zeros(n, n); nn * nn];
        for pk in p.basis() {
            let coms: Vec<CMat> = units.iter().map(|e| pk * e - e * pk).collect();
            for a in 0..nn {
                for b in 0..nn {
                    kernel[a * nn + b] -= &coms[a] * &coms[b];
                }
            }
        }
        KmsMetric { n, kernel }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kernel(&self) -> &[CMat] {
        &self.kernel
    }

    pub fn kernel_norm(&self) -> f64 {
        self.kernel.iter().map(|k| k.norm_squared()).sum::<f64>().sqrt()
    }

    /// `K(x, y)` for arbitrary matrices.
    pub fn k(&self, x: &CMat, y: &CMat) -> CMat {
        let nn = self.n * self.n;
        let vx = vec(x);
        let vy = vec(y);
        let mut out = CMat::zeros(self.n, self.n);
        for p in 0..nn {
            if vx[p] == ZERO {
                continue;
            }
            for q in 0..nn {
                let w = vx[p] * vy[q];
                if w != ZERO {
                    out += &self.kernel[p * nn + q] * w;
                }
            }
        }
        out
    }

    /// `g(a dx b dy) = ρ(a K(xb, y)) − ρ(a x K(b, y))`.
    pub fn eval_adxbdy(&self, sa: &StateAlgebra, a: &CMat, x: &CMat, b: &CMat, y: &CMat) -> C64 {
        sa.rho_unchecked(&(a * self.k(&(x * b), y))) - sa.rho_unchecked(&(a * x * self.k(b, y)))
    }

    /// Values `ρ(E_p K(E_q, E_r))` on basis triples.
    fn functional(&self, sa: &StateAlgebra) -> Vec<C64> {
        let n = self.n;
        let nn = n * n;
        let mut f = vec![ZERO; nn * nn * nn];
        for q in 0..nn {
            for r in 0..nn {
                let k = &self.kernel[q * nn + r];
                let kw = k * sa.omega();
                for i in 0..n {
                    for j in 0..n {
                        // ρ(E_ij K) = (Kω)[j, i]
                        f[(vidx(n, i, j) * nn + q) * nn + r] = kw[(j, i)];
                    }
                }
            }
        }
        f
    }

    /// `g(ξ)` for a two-form.
    pub fn eval(&self, sa: &StateAlgebra, xi: &TwoForm) -> C64 {
        xi.pair(&self.functional(sa))
    }

    /// Smallest eigenvalue of the Hermitian form `g(ω*ω)` over a basis of `Ω¹`.
    pub fn min_eig(&self, sa: &StateAlgebra) -> (f64, f64) {
        let s = kermu_hermitian(self.n, &self.functional(sa));
        linalg::herm_extremes(&s)
    }

    /// Largest `|g(ω₁ω₂) − g(ω₂ δ̂(ω₁))|` over the spanning pairs
    /// `(E_a dE_b, E_c dE_d)`; seeded dense random pairs from `n = 5` on.
    pub fn kms_residual(&self, sa: &StateAlgebra) -> f64 {
        let n = self.n;
        let nn = n * n;
        let mut worst = 0.0f64;
        if n <= 4 {
            let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
            let deltas: Vec<CMat> = units.iter().map(|e| sa.delta(e)).collect();
            for a in 0..nn {
                for b in 0..nn {
                    for c_ in 0..nn {
                        for d_ in 0..nn {
                            let lhs = self.eval_adxbdy(sa, &units[a], &units[b], &units[c_], &units[d_]);
                            let rhs =
                                self.eval_adxbdy(sa, &units[c_], &units[d_], &deltas[a], &deltas[b]);
                            worst = worst.max((lhs - rhs).norm());
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6d6574);
            for _ in 0..64 {
                let m: Vec<CMat> = (0..4)
                    .map(|_| {
                        let g = linalg::random_complex(&mut rng, n, n);
                        let norm = g.norm();
                        g / c(norm)
                    })
                    .collect();
                let lhs = self.eval_adxbdy(sa, &m[0], &m[1], &m[2], &m[3]);
                let rhs = self.eval_adxbdy(sa, &m[2], &m[3], &sa.delta(&m[0]), &sa.delta(&m[1]));
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    fn validate(&self, sa: &StateAlgebra, scale: f64) -> Result<()> {
        let n = self.n;
        let tol = sa.tol();
        let one = identity(n);
        let nn = n * n;
        let mut at_one = 0.0f64;
        for p in 0..nn {
            let e = unit_vec_index(n, p);
            at_one = at_one.max(self.k(&one, &e).norm()).max(self.k(&e, &one).norm());
        }
        if at_one > tol.eps_eq * scale.max(1e-300) {
            return Err(Error::InvalidKernel(format!(
                "K(1, .) or K(., 1) is nonzero ({at_one:.3e})"
            )));
        }
        let (min, max_abs) = self.min_eig(sa);
        if min < -tol.eps_psd * max_abs.max(scale) {
            return Err(Error::NotAMetric(min));
        }
        let kms = self.kms_residual(sa);
        if kms > tol.eps_eq * scale.max(1e-300) {
            return Err(Error::NotKms(format!("residual {kms:.3e}")));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> KmsMetric {
        KmsMetric {
            n: self.n,
            kernel: self.kernel.iter().map(|k| k * c(s)).collect(),
        }
    }

    /// Transport by `Ad(u)`: `K'(x, y) = u K(u* x u, u* y u) u*`.
    pub fn transport(&self, u: &CMat) -> KmsMetric {
        let n = self.n;
        let nn = n * n;
        let ua = u.adjoint();
        let pulled: Vec<CMat> = (0..nn).map(|p| &ua * unit_vec_index(n, p) * u).collect();
        let mut kernel = Vec::with_capacity(nn * nn);
        for p in 0..nn {
            for q in 0..nn {
                kernel.push(u * self.k(&pulled[p], &pulled[q]) * &ua);
            }
        }
        KmsMetric { n, kernel }
    }
}

/// `K(x, y) = −½ θ_L(dx dy)` on matrix-unit pairs, without gating.
fn half_theta_kernel(l: &Superoperator) -> Vec<CMat> {
    let n = l.n();
    let nn = n * n;
    let imgs: Vec<CMat> = (0..nn).map(|p| l.apply_unit(p)).collect();
    let l1 = l.apply(&identity(n));
    let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
    let mut kernel = Vec::with_capacity(nn * nn);
    for p in 0..nn {
        for q in 0..nn {
            let (pi, pj) = (p % n, p / n);
            let (qi, qj) = (q % n, q / n);
            let mut t = -(&units[p] * &imgs[q]) - &imgs[p] * &units[q] + &units[p] * &l1 * &units[q];
            if pj == qi {
                t += &imgs[vidx(n, pi, qj)];
            }
            kernel.push(t * c(-0.5));
        }
    }
    kernel
}

/// The metric `g = −½ σ_L` of an exact elliptic generator.
pub fn metric_from_generator(sa: &StateAlgebra, l: &Superoperator) -> Result<KmsMetric> {
    let ell = is_elliptic_form(sa, l)?;
    if !ell.elliptic {
        return Err(Error::NotElliptic(ell.min_eig));
    }
    if !exactness_report(sa, l)?.exact {
        return Err(Error::NotExact);
    }
    let g = KmsMetric::raw(sa.n(), half_theta_kernel(l))?;
    g.validate(sa, l.norm())?;
    Ok(g)
}

/// Solve `ρ(Δ(x) y) = g(dx dy)` for `Δ`.
pub fn reconstruct_laplacian(sa: &StateAlgebra, g: &KmsMetric) -> Result<Superoperator> {
    reconstruct_laplacian_scaled(sa, g, g.kernel_norm())
}

fn reconstruct_laplacian_scaled(
    sa: &StateAlgebra,
    g: &KmsMetric,
    scale: f64,
) -> Result<Superoperator> {
    let n = sa.n();
    let nn = n * n;
    if sa.eigvals().last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(Error::SingularPairing);
    }
    let u = sa.eigbasis();
    let omega_inv = u
        * CMat::from_diagonal(&CVec::from_iterator(
            n,
            sa.eigvals().iter().map(|v| c(1.0 / v)),
        ))
        * u.adjoint();
    let mut mat = CMat::zeros(nn, nn);
    for q in 0..nn {
        // G[k, l] = ρ(K(E_q, E_kl)) = (ω Δ(E_q))[l, k]
        let gm = CMat::from_fn(n, n, |k, l| sa.rho_unchecked(&g.kernel[q * nn + vidx(n, k, l)]));
        let img = &omega_inv * gm.transpose();
        mat.set_column(q, &vec(&img));
    }
    let delta = Superoperator::from_matrix(n, mat)?;
    // the full kernel must be reproduced: θ_Δ(dx dy) = −2 K(x, y)
    let rebuilt = half_theta_kernel(&delta);
    let gap = rebuilt
        .iter()
        .zip(g.kernel())
        .map(|(a, b)| (a - b).norm_squared())
        .sum::<f64>()
        .sqrt();
    if gap > sa.tol().eps_eq * scale.max(1e-300) * 10.0 {
        return Err(Error::ReconstructionMismatch(format!(
            "metric is not of Laplacian type (kernel gap {gap:.3e})"
        )));
    }
    Ok(delta)
}

/// Drop the components of `x` that fail to commute with `ω`.
fn project_commutant(sa: &StateAlgebra, x: &CMat) -> CMat {
    let e = sa.eigbasis();
    let inner = e.adjoint() * x * e;
    let mut kept = CMat::zeros(x.nrows(), x.ncols());
    for block in sa.eigen_blocks() {
        for &i in &block {
            for &j in &block {
                kept[(i, j)] = inner[(i, j)];
            }
        }
    }
    e * kept * e.adjoint()
}

/// Options for [`decompose_metric_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DecomposeOptions {
    /// Permute vectorized coordinates (seeded) before the eigensolver runs.
    pub permutation_seed: Option<u64>,
    /// Reference scale for tolerances; defaults to the kernel norm.
    pub scale: Option<f64>,
}

/// Recover the momentum space of a KMS metric.
pub fn decompose_metric(sa: &StateAlgebra, g: &KmsMetric) -> Result<MomentumSpace> {
    decompose_metric_with(sa, g, DecomposeOptions::default())
}

/// Projection `Q` off the maximally entangled vector, and the matrix
/// `C = ½ Q J Q` for the Choi matrix `J` of `Δ`.
fn extraction_matrix(delta: &Superoperator) -> CMat {
    let n = delta.n();
    let nn = n * n;
    let mut omega_me = CVec::zeros(nn);
    for i in 0..n {
        omega_me[i * n + i] = c(1.0 / (n as f64).sqrt());
    }
    let q = identity(nn) - &omega_me * omega_me.adjoint();
    (&q * delta.choi() * &q) * c(0.5)
}

pub fn decompose_metric_with(
    sa: &StateAlgebra,
    g: &KmsMetric,
    opts: DecomposeOptions,
) -> Result<MomentumSpace> {
    let n = sa.n();
    let nn = n * n;
    let tol = sa.tol();
    let scale = opts.scale.unwrap_or_else(|| g.kernel_norm());
    let delta = reconstruct_laplacian_scaled(sa, g, scale)?;
    let cm = extraction_matrix(&delta);

    let perm: Vec<usize> = match opts.permutation_seed {
        Some(seed) => {
            let mut idx: Vec<usize> = (0..nn).collect();
            idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            idx
        }
        None => (0..nn).collect(),
    };
    let permuted = CMat::from_fn(nn, nn, |i, j| cm[(perm[i], perm[j])]);
    let (vals, vecs_p) = herm_eig(&permuted);
    let mut vecs = CMat::zeros(nn, nn);
    for (i, &pi) in perm.iter().enumerate() {
        vecs.set_row(pi, &vecs_p.row(i));
    }

    let max_eig = vals[0].max(0.0);
    let min_eig = *vals.last().unwrap();
    if min_eig < -tol.eps_psd * max_eig.max(scale) {
        return Err(Error::NotAMetric(min_eig));
    }
    let cut = tol.eps_rank * max_eig.max(scale);
    let rank = vals.iter().filter(|&&v| v > cut).count();
    if rank == 0 {
        return Ok(MomentumSpace::empty());
    }
    let range: Vec<CMat> = (0..rank)
        .map(|k| linalg::devec(vecs.column(k).as_slice(), n))
        .collect();

    // real coordinates (re, im) of c with X = Σ c_k R_k skew-adjoint
    let mut sys = DMatrix::<f64>::zeros(2 * nn, 2 * rank);
    for (k, r) in range.iter().enumerate() {
        let re_part = realify(&(r + r.adjoint()));
        let im_part = realify(&((r - r.adjoint()) * linalg::I));
        sys.set_column(k, &re_part);
        sys.set_column(rank + k, &im_part);
    }
    let ns = linalg::null_space_real(&sys, 1e-8, 1.0);
    if ns.ncols() != rank {
        return Err(Error::SkewExtractionFailure {
            skew: ns.ncols(),
            rank,
        });
    }
    let skew: Vec<CMat> = (0..rank)
        .map(|j| {
            let mut x = CMat::zeros(n, n);
            for k in 0..rank {
                x += &range[k] * C64::new(ns[(k, j)], ns[(rank + k, j)]);
            }
            (&x - x.adjoint()) * c(0.5)
        })
        .collect();

    // ⟨p, q⟩ = Re ⟨ι(q), C⁺ ι(p)⟩, C⁺ restricted to the range
    let cplus = {
        let mut acc = CMat::zeros(nn, nn);
        for k in 0..rank {
            let col = vecs.column(k);
            acc += (&col * col.adjoint()) * c(1.0 / vals[k]);
        }
        acc
    };
    let iotas: Vec<CVec> = skew.iter().map(vec).collect();
    let gram = DMatrix::<f64>::from_fn(rank, rank, |i, j| {
        (iotas[i].adjoint() * &cplus * &iotas[j])[(0, 0)].re
    });
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = gram.clone().symmetric_eigen();
    let gmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if gmin <= 0.0 {
        return Err(Error::SkewExtractionFailure { skew: rank, rank });
    }
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
        * eig.eigenvectors.transpose();

    let mut basis = Vec::with_capacity(rank);
    for j in 0..rank {
        let mut p = CMat::zeros(n, n);
        for k in 0..rank {
            p += &skew[k] * c(inv_sqrt[(k, j)]);
        }
        let com = sa.commutes_residual(&p);
        if com > tol.eps_eq * 100.0 * p.norm().max(1e-300) {
            return Err(Error::CommutantViolation(com));
        }
        p = project_commutant(sa, &p);
        p = (&p - p.adjoint()) * c(0.5);
        let r = sa.rho_unchecked(&p);
        p -= identity(n) * r;
        basis.push(p);
    }
    let ms = MomentumSpace::new(sa, basis)?;

    let presented = KmsMetric::from_momenta(sa, &ms);
    let gap = presented
        .kernel
        .iter()
        .zip(&g.kernel)
        .map(|(a, b)| (a - b).norm_squared())
        .sum::<f64>()
        .sqrt();
    if gap > tol.eps_eq * scale.max(1e-300) * 10.0 {
        return Err(Error::ReconstructionMismatch(format!(
            "decomposed metric differs from input by {gap:.3e}"
        )));
    }
    Ok(ms)
}

/// The classifying data `(P, ⟨·,·⟩, v)` of an exact elliptic generator.
#[derive(Debug, Clone)]
pub struct DynamicalInvariant {
    pub momenta: MomentumSpace,
    pub v: CMat,
    /// SHA-256 of the source generator matrix.
    pub source_hash: String,
}

pub fn generator_hash(l: &Superoperator) -> String {
    let mut h = Sha256::new();
    h.update((l.n() as u64).to_le_bytes());
    for z in l.mat().iter() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn extract_invariant(sa: &StateAlgebra, l: &Superoperator) -> Result<DynamicalInvariant> {
    extract_invariant_with(sa, l, None)
}

pub fn extract_invariant_with(
    sa: &StateAlgebra,
    l: &Superoperator,
    permutation_seed: Option<u64>,
) -> Result<DynamicalInvariant> {
    let ell = is_elliptic_form(sa, l)?;
    if !ell.elliptic {
        return Err(Error::NotElliptic(ell.min_eig));
    }
    if !exactness_report(sa, l)?.exact {
        return Err(Error::NotExact);
    }
    let scale = l.norm();
    let ls = sa.adjoint_gns(l);
    let delta = (l + &ls).scale(0.5);
    let v = extract_inner_potential_scaled(sa, &(l - &ls).scale(0.5), scale)?;
    let g = KmsMetric::raw(sa.n(), half_theta_kernel(&delta))?;
    let momenta = decompose_metric_with(
        sa,
        &g,
        DecomposeOptions {
            permutation_seed,
            scale: Some(scale),
        },
    )?;
    let rebuilt = &laplacian(sa, &momenta)? + &Superoperator::ad(&v);
    let gap = (rebuilt.mat() - l.mat()).norm();
    if gap > sa.tol().eps_eq * scale.max(1e-300) * 10.0 {
        return Err(Error::ReconstructionMismatch(format!(
            "|Delta_P + ad(v) - L| = {gap:.3e}"
        )));
    }
    Ok(DynamicalInvariant {
        momenta,
        v,
        source_hash: generator_hash(l),
    })
}

/// Spectral data that any conjugacy must preserve.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub m: usize,
    /// Imaginary parts of the spectrum of `v`, ascending.
    pub spec_v: Vec<f64>,
    /// Spectrum of `q = Σ p_k²`, ascending.
    pub spec_q: Vec<f64>,
    /// Nonzero spectrum of `C = Σ ι(p̃_k) ι(p̃_k)*`, ascending.
    pub spec_c: Vec<f64>,
    /// Spectrum of `ω`, ascending.
    pub spec_omega: Vec<f64>,
}

fn ascending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// `Σ ι(p̃) ι(p̃)*` with `p̃` trace-centered.
fn momentum_c(n: usize, p: &MomentumSpace) -> CMat {
    let nn = n * n;
    let mut cm = CMat::zeros(nn, nn);
    for pk in p.basis() {
        let centered = pk - identity(n) * (pk.trace() / c(n as f64));
        let v = vec(&centered);
        cm += &v * v.adjoint();
    }
    cm
}

pub fn fingerprint(inv: &DynamicalInvariant, sa: &StateAlgebra) -> Fingerprint {
    let n = sa.n();
    let spec_v = ascending(herm_eigvals(&(&inv.v * -linalg::I)));
    let spec_q = ascending(herm_eigvals(&inv.momenta.casimir(n)));
    let cvals = herm_eigvals(&momentum_c(n, &inv.momenta));
    let cmax = cvals.first().copied().unwrap_or(0.0).max(0.0);
    let cut = sa.tol().eps_rank * cmax.max(1e-300);
    let spec_c = ascending(cvals.into_iter().filter(|&v| v > cut).collect());
    let spec_omega = ascending(sa.eigvals().to_vec());
    Fingerprint {
        m: inv.momenta.dim(),
        spec_v,
        spec_q,
        spec_c,
        spec_omega,
    }
}

impl Fingerprint {
    /// Equality up to `tol` relative to the size of the data.
    pub fn matches(&self, other: &Fingerprint, tol: f64) -> bool {
        fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
            a.len() == b.len()
                && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
        }
        self.m == other.m
            && close(&self.spec_v, &other.spec_v, tol)
            && close(&self.spec_q, &other.spec_q, tol)
            && close(&self.spec_c, &other.spec_c, tol)
            && close(&self.spec_omega, &other.spec_omega, tol)
    }
}

/// Orthogonal projector onto the complex span of `ι(P)`.
pub fn span_projector(p: &MomentumSpace, n: usize) -> CMat {
    let nn = n * n;
    if p.dim() == 0 {
        return CMat::zeros(nn, nn);
    }
    let cols: Vec<CVec> = p.basis().iter().map(vec).collect();
    linalg::span_projector(&CMat::from_columns(&cols), 1e-10)
}

/// Residuals of the conjugacy conditions for a candidate unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugacyResiduals {
    pub commutant: f64,
    pub span: f64,
    pub isometry: f64,
    pub potential: f64,
}

pub fn conjugacy_residuals(
    sa: &StateAlgebra,
    inv1: &DynamicalInvariant,
    inv2: &DynamicalInvariant,
    u: &CMat,
) -> Result<ConjugacyResiduals> {
    let n = sa.n();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    let un = linalg::unitarity_residual(u);
    if un > sa.tol().eps_eq * (n as f64).sqrt() * 10.0 {
        return Err(Error::NotUnitary(un));
    }
    let commutant = sa.commutes_residual(u);
    let potential = (u * &inv1.v * u.adjoint() - &inv2.v).norm() / inv2.v.norm().max(1.0);
    if inv1.momenta.dim() != inv2.momenta.dim() {
        return Ok(ConjugacyResiduals {
            commutant,
            span: f64::INFINITY,
            isometry: f64::INFINITY,
            potential,
        });
    }
    let m = inv1.momenta.dim();
    let moved: Vec<CMat> = inv1
        .momenta
        .basis()
        .iter()
        .map(|p| u * p * u.adjoint())
        .collect();
    let moved_space = MomentumSpace::from_basis_unchecked(moved.clone());
    let span = (span_projector(&moved_space, n) - span_projector(&inv2.momenta, n)).norm();
    let isometry = if m == 0 {
        0.0
    } else {
        // real coordinates of Ad(u) p1_j in the basis of P2
        let b2 = DMatrix::from_columns(
            &inv2.momenta.basis().iter().map(realify).collect::<Vec<_>>(),
        );
        let mut o = DMatrix::<f64>::zeros(m, m);
        for (j, mp) in moved.iter().enumerate() {
            let (x, _) = linalg::lstsq_real(&b2, &realify(mp));
            o.set_column(j, &x);
        }
        (o.transpose() * &o - DMatrix::<f64>::identity(m, m)).norm()
    };
    Ok(ConjugacyResiduals {
        commutant,
        span,
        isometry,
        potential,
    })
}

/// Verify that `Ad(u)` carries `inv1` to `inv2` and preserves `ρ`.
pub fn check_conjugacy(
    sa: &StateAlgebra,
    inv1: &DynamicalInvariant,
    inv2: &DynamicalInvariant,
    u: &CMat,
) -> Result<bool> {
    let r = conjugacy_residuals(sa, inv1, inv2, u)?;
    let eps = sa.tol().eps_eq;
    let scale = inv2
        .momenta
        .basis()
        .iter()
        .map(|p| p.norm())
        .fold(1.0f64, f64::max);
    Ok(r.commutant <= eps * 10.0
        && r.span <= eps * 100.0
        && r.isometry <= eps * 100.0 * scale
        && r.potential <= eps * 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConjugacyOutcome {
    Conjugate(CMat),
    NotConjugate,
    Inconclusive,
}

/// Haar-random unitary in the commutant of `ω`.
pub fn random_commutant_unitary(sa: &StateAlgebra, rng: &mut ChaCha8Rng) -> CMat {
    let n = sa.n();
    let mut m = CMat::zeros(n, n);
    for block in sa.eigen_blocks() {
        let w = linalg::random_unitary(rng, block.len());
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                m[(i, j)] = w[(a, b)];
            }
        }
    }
    let e = sa.eigbasis();
    e * m * e.adjoint()
}

struct SearchProblem<'a> {
    c1: CMat,
    c2: CMat,
    v1: &'a CMat,
    v2: &'a CMat,
    basis: Vec<CMat>,
    norm: f64,
}

impl SearchProblem<'_> {
    fn unitary(&self, u0: &CMat, x: &[f64]) -> CMat {
        let n = u0.nrows();
        let mut gen = CMat::zeros(n, n);
        for (b, &xi) in self.basis.iter().zip(x) {
            gen += b * c(xi);
        }
        u0 * gen.exp()
    }

    fn residual(&self, u: &CMat) -> nalgebra::DVector<f64> {
        let s = kron(&u.map(|z| z.conj()), u);
        let dc = &s * &self.c1 * s.adjoint() - &self.c2;
        let dv = u * self.v1 * u.adjoint() - self.v2;
        let a = realify(&dc);
        let b = realify(&dv);
        let mut out = nalgebra::DVector::zeros(a.len() + b.len());
        out.rows_mut(0, a.len()).copy_from(&a);
        out.rows_mut(a.len(), b.len()).copy_from(&b);
        out / self.norm
    }

    /// Levenberg–Marquardt from `u0`; returns the final unitary and residual.
    fn solve(&self, u0: &CMat) -> (CMat, f64) {
        let d = self.basis.len();
        let mut x = vec![0.0; d];
        let mut u = self.unitary(u0, &x);
        let mut r = self.residual(&u);
        let mut cost = r.norm();
        let mut lambda = 1e-3;
        for _ in 0..200 {
            if cost < 1e-14 {
                break;
            }
            let h = 1e-7;
            let mut jac = DMatrix::<f64>::zeros(r.len(), d);
            for k in 0..d {
                let mut xp = x.clone();
                xp[k] += h;
                let rp = self.residual(&self.unitary(u0, &xp));
                jac.set_column(k, &((rp - &r) / h));
            }
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * &r;
            let mut improved = false;
            for _ in 0..20 {
                let mut a = jtj.clone();
                for k in 0..d {
                    a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
                }
                let step = match a.cholesky() {
                    Some(ch) => ch.solve(&(-&jtr)),
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                };
                let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let un = self.unitary(u0, &xn);
                let rn = self.residual(&un);
                let cn = rn.norm();
                if cn < cost {
                    x = xn;
                    u = un;
                    r = rn;
                    cost = cn;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        (u, cost)
    }
}

/// Best-effort search for a conjugating unitary in the commutant of `ω`.
pub fn search_conjugacy(
    sa: &StateAlgebra,
    inv1: &DynamicalInvariant,
    inv2: &DynamicalInvariant,
    budget: usize,
    seed: u64,
) -> Result<ConjugacyOutcome> {
    let n = sa.n();
    let f1 = fingerprint(inv1, sa);
    let f2 = fingerprint(inv2, sa);
    if !f1.matches(&f2, 1e-8) {
        return Ok(ConjugacyOutcome::NotConjugate);
    }
    let c1 = momentum_c(n, &inv1.momenta);
    let c2 = momentum_c(n, &inv2.momenta);
    let norm = (c2.norm() + inv2.v.norm()).max(1.0);
    let problem = SearchProblem {
        c1,
        c2,
        v1: &inv1.v,
        v2: &inv2.v,
        basis: sa.commutant_skew_basis(),
        norm,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = true;
    for _ in 0..budget {
        let u0 = if first {
            first = false;
            identity(n)
        } else {
            random_commutant_unitary(sa, &mut rng)
        };
        let (u, cost) = problem.solve(&u0);
        if cost < 1e-8 && check_conjugacy(sa, inv1, inv2, &u)? {
            return Ok(ConjugacyOutcome::Conjugate(u));
        }
    }
    Ok(ConjugacyOutcome::Inconclusive)
}

/// Apply `Ad(u)` to an invariant.
pub fn transport_invariant(inv: &DynamicalInvariant, u: &CMat) -> DynamicalInvariant {
    let moved = inv
        .momenta
        .basis()
        .iter()
        .map(|p| u * p * u.adjoint())
        .collect();
    DynamicalInvariant {
        momenta: MomentumSpace::from_basis_unchecked(moved),
        v: u * &inv.v * u.adjoint(),
        source_hash: inv.source_hash.clone(),
    }
}

/// Real orthogonal `O` with `b_j = Σ_k O[k, j] a_k`, and the residual of
/// that representation together with `‖OᵀO − 1‖`.
pub fn orthogonal_relation(a: &MomentumSpace, b: &MomentumSpace) -> (DMatrix<f64>, f64, f64) {
    let m = a.dim();
    if m == 0 || b.dim() != m {
        let inf = if b.dim() == m { 0.0 } else { f64::INFINITY };
        return (DMatrix::zeros(m, b.dim()), inf, inf);
    }
    let ba = DMatrix::from_columns(&a.basis().iter().map(realify).collect::<Vec<_>>());
    let mut o = DMatrix::<f64>::zeros(m, m);
    let mut worst = 0.0f64;
    for (j, q) in b.basis().iter().enumerate() {
        let (x, r) = linalg::lstsq_real(&ba, &realify(q));
        o.set_column(j, &x);
        worst = worst.max(r);
    }
    let orth = (o.transpose() * &o - DMatrix::<f64>::identity(m, m)).norm();
    (o, worst, orth)
}

/// Random real orthogonal matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    g.qr().q()
}
