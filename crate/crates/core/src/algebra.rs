//! The state algebra `(A, ρ)` with its modular automorphism group, and the
//! vectorized superoperator calculus.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, commutator, devec, frob, herm_eig, identity, kron, unit_vec_index, vec, CMat, CVec,
    C64, I, ONE, ZERO,
};

/// Numerical thresholds. `eps_eq` is relative (Frobenius); `eps_psd` and
/// `eps_rank` are relative to the largest eigenvalue in play.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eps_eq: f64,
    pub eps_psd: f64,
    pub eps_rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_eq: 1e-9,
            eps_psd: 1e-10,
            eps_rank: 1e-10,
        }
    }
}

impl Tolerances {
    /// Defaults, with `eps_eq` overridden by `DYNVAR_TOL` when it parses as a
    /// positive float.
    pub fn from_env() -> Self {
        let mut tol = Tolerances::default();
        if let Ok(s) = std::env::var("DYNVAR_TOL") {
            if let Ok(v) = s.trim().parse::<f64>() {
                if v > 0.0 && v.is_finite() {
                    tol.eps_eq = v;
                }
            }
        }
        tol
    }
}

/// A full matrix algebra `M_n(C)` with a faithful state `ρ(a) = tr(ω a)`.
///
/// The normalized-trace density `h` satisfies `h = n·ω`; the modular group
/// only sees ratios of eigenvalues so the scale never matters.
#[derive(Debug, Clone)]
pub struct StateAlgebra {
    n: usize,
    omega: CMat,
    eigvals: Vec<f64>,
    eigvecs: CMat,
    tol: Tolerances,
}

impl StateAlgebra {
    pub fn new(n: usize, omega: CMat) -> Result<Self> {
        Self::with_tolerances(n, omega, Tolerances::default())
    }

    pub fn with_tolerances(n: usize, omega: CMat, tol: Tolerances) -> Result<Self> {
        if omega.nrows() != n || omega.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", omega.nrows(), omega.ncols()),
            });
        }
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: "n >= 1".into(),
                found: "0".into(),
            });
        }
        let herm = linalg::hermiticity_residual(&omega);
        if herm > tol.eps_eq * frob(&omega).max(1.0) {
            return Err(Error::NotHermitian(herm));
        }
        let (eigvals, eigvecs) = herm_eig(&omega);
        let max = eigvals[0];
        let min = *eigvals.last().unwrap();
        if max <= 0.0 || min <= tol.eps_psd * max {
            return Err(Error::NotPositiveDefinite { min, max });
        }
        let tr = omega.trace();
        if (tr - ONE).norm() > tol.eps_eq {
            return Err(Error::TraceNotOne(tr.re));
        }
        let omega = (&omega + omega.adjoint()) * c(0.5);
        Ok(StateAlgebra {
            n,
            omega,
            eigvals,
            eigvecs,
            tol,
        })
    }

    /// `M_n` with the normalized trace.
    pub fn tracial(n: usize) -> Self {
        Self::new(n, identity(n) * c(1.0 / n as f64)).expect("tracial state is valid")
    }

    /// Diagonal density operator with the given weights.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        let omega = CMat::from_diagonal(&CVec::from_iterator(n, weights.iter().map(|&w| c(w))));
        Self::new(n, omega)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> &CMat {
        &self.omega
    }

    /// Density relative to the normalized trace, `h = n·ω`, so that `ρ(a) = τ(h a)`.
    pub fn h(&self) -> CMat {
        &self.omega * c(self.n as f64)
    }

    /// Eigenvalues of `ω`, descending.
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    /// Unitary whose columns diagonalize `ω` (same order as [`Self::eigvals`]).
    pub fn eigbasis(&self) -> &CMat {
        &self.eigvecs
    }

    pub fn tol(&self) -> Tolerances {
        self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    pub fn is_tracial(&self) -> bool {
        let max = self.eigvals[0];
        let min = *self.eigvals.last().unwrap();
        (max - min) <= self.tol.eps_eq * max
    }

    fn check_dim(&self, a: &CMat) -> Result<()> {
        if a.nrows() != self.n || a.ncols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.n),
                found: format!("{}x{}", a.nrows(), a.ncols()),
            });
        }
        Ok(())
    }

    /// `ρ(a) = tr(ω a)`.
    pub fn rho(&self, a: &CMat) -> Result<C64> {
        self.check_dim(a)?;
        Ok(self.rho_unchecked(a))
    }

    pub(crate) fn rho_unchecked(&self, a: &CMat) -> C64 {
        // tr(ωa) = Σ_ij ω_ij a_ji
        let n = self.n;
        let mut s = ZERO;
        for i in 0..n {
            for j in 0..n {
                s += self.omega[(i, j)] * a[(j, i)];
            }
        }
        s
    }

    /// GNS inner product `⟨a, b⟩_ρ = ρ(b* a)`.
    pub fn gns_inner(&self, a: &CMat, b: &CMat) -> Result<C64> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.rho_unchecked(&(b.adjoint() * a)))
    }

    /// The modular group `σ_z(a) = h^{-iz} a h^{iz}`, evaluated in the
    /// eigenbasis of `ω` on the principal branch.
    pub fn modular(&self, a: &CMat, z: C64) -> Result<CMat> {
        self.check_dim(a)?;
        Ok(self.modular_unchecked(a, z))
    }

    pub(crate) fn modular_unchecked(&self, a: &CMat, z: C64) -> CMat {
        let u = &self.eigvecs;
        let mut t = u.adjoint() * a * u;
        let logs: Vec<f64> = self.eigvals.iter().map(|v| v.ln()).collect();
        for k in 0..self.n {
            for l in 0..self.n {
                t[(k, l)] *= (-I * z * c(logs[k] - logs[l])).exp();
            }
        }
        u * t * u.adjoint()
    }

    /// The conjugation pair `(X, Y)` with `σ_z(a) = X a Y`.
    pub(crate) fn modular_factors(&self, z: C64) -> (CMat, CMat) {
        let u = &self.eigvecs;
        let d = |w: C64| {
            CMat::from_diagonal(&CVec::from_iterator(
                self.n,
                self.eigvals.iter().map(|v| (w * c(v.ln())).exp()),
            ))
        };
        let x = u * d(-I * z) * u.adjoint();
        let y = u * d(I * z) * u.adjoint();
        (x, y)
    }

    /// Modular automorphism `δ = σ_i`, i.e. `δ(a) = h a h⁻¹`.
    pub fn delta(&self, a: &CMat) -> CMat {
        self.modular_unchecked(a, I)
    }

    pub fn delta_inv(&self, a: &CMat) -> CMat {
        self.modular_unchecked(a, -I)
    }

    /// `δ^{1/2}(a) = h^{1/2} a h^{-1/2}`.
    pub fn delta_half(&self, a: &CMat) -> CMat {
        self.modular_unchecked(a, I * 0.5)
    }

    /// `|ρ(ab) − ρ(b δ(a))|`.
    pub fn delta_defining_residual(&self, a: &CMat, b: &CMat) -> f64 {
        let lhs = self.rho_unchecked(&(a * b));
        let rhs = self.rho_unchecked(&(b * self.delta(a)));
        (lhs - rhs).norm()
    }

    /// `δ` as a superoperator.
    pub fn delta_super(&self) -> Superoperator {
        let (x, y) = self.modular_factors(I);
        Superoperator::sandwich(&x, &y)
    }

    pub fn delta_inv_super(&self) -> Superoperator {
        let (x, y) = self.modular_factors(-I);
        Superoperator::sandwich(&x, &y)
    }

    /// Gram matrix of the GNS inner product in vec coordinates:
    /// `⟨a, b⟩_ρ = vec(b)^H G vec(a)` with `G = ωᵀ ⊗ 1`.
    pub fn gram(&self) -> CMat {
        kron(&self.omega.transpose(), &identity(self.n))
    }

    /// Adjoint on `L²(A, ρ)`: `⟨L a, b⟩_ρ = ⟨a, L* b⟩_ρ`, i.e. `L* = G⁻¹ Lᴴ G`.
    pub fn adjoint_gns(&self, l: &Superoperator) -> Superoperator {
        // G⁻¹ = (ωᵀ)⁻¹ ⊗ 1, computed spectrally to avoid a generic inverse.
        let u = &self.eigvecs;
        let inv = u
            * CMat::from_diagonal(&CVec::from_iterator(
                self.n,
                self.eigvals.iter().map(|v| c(1.0 / v)),
            ))
            * u.adjoint();
        let g_inv = kron(&inv.transpose(), &identity(self.n));
        let g = self.gram();
        Superoperator {
            n: self.n,
            mat: g_inv * l.mat.adjoint() * g,
        }
    }

    /// Eigen-index clusters of `ω` with equal eigenvalues.
    pub fn eigen_blocks(&self) -> Vec<Vec<usize>> {
        let max = self.eigvals[0];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in self.eigvals.iter().enumerate() {
            match blocks.last_mut() {
                Some(b) if (self.eigvals[b[0]] - v).abs() <= 1e-8 * max => b.push(k),
                _ => blocks.push(vec![k]),
            }
        }
        blocks
    }

    /// Hilbert–Schmidt orthonormal basis of the skew-adjoint part of the
    /// commutant of `ω` (real dimension `Σ d_b²` over eigenspaces).
    pub fn commutant_skew_basis(&self) -> Vec<CMat> {
        let n = self.n;
        let u = &self.eigvecs;
        let s = 1.0 / 2f64.sqrt();
        let mut out = Vec::new();
        for block in self.eigen_blocks() {
            for (a, &i) in block.iter().enumerate() {
                out.push(linalg::unit(n, i, i) * I);
                for &j in &block[a + 1..] {
                    let eij = linalg::unit(n, i, j);
                    let eji = linalg::unit(n, j, i);
                    out.push((&eij - &eji) * c(s));
                    out.push((&eij + &eji) * (I * s));
                }
            }
        }
        out.into_iter().map(|m| u * m * u.adjoint()).collect()
    }

    /// `‖[a, ω]‖_F`.
    pub fn commutes_residual(&self, a: &CMat) -> f64 {
        frob(&commutator(a, &self.omega))
    }
}

/// A linear map on `A = M_n`, stored as an `n² × n²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    n: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn from_matrix(n: usize, mat: CMat) -> Result<Self> {
        let nn = n * n;
        if mat.nrows() != nn || mat.ncols() != nn {
            return Err(Error::DimensionMismatch {
                expected: format!("{nn}x{nn}"),
                found: format!("{}x{}", mat.nrows(), mat.ncols()),
            });
        }
        Ok(Superoperator { n, mat })
    }

    /// Column `j*n + i` holds `vec(f(E_ij))`.
    pub fn from_map<F: Fn(&CMat) -> CMat>(n: usize, f: F) -> Self {
        let nn = n * n;
        let mut mat = CMat::zeros(nn, nn);
        for p in 0..nn {
            let img = f(&unit_vec_index(n, p));
            mat.set_column(p, &vec(&img));
        }
        Superoperator { n, mat }
    }

    pub fn zero(n: usize) -> Self {
        Superoperator {
            n,
            mat: CMat::zeros(n * n, n * n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Superoperator {
            n,
            mat: identity(n * n),
        }
    }

    /// `x ↦ a x`.
    pub fn left_mult(a: &CMat) -> Self {
        let n = a.nrows();
        Superoperator {
            n,
            mat: kron(&identity(n), a),
        }
    }

    /// `x ↦ x b`.
    pub fn right_mult(b: &CMat) -> Self {
        let n = b.nrows();
        Superoperator {
            n,
            mat: kron(&b.transpose(), &identity(n)),
        }
    }

    /// `x ↦ a x b`, matrix `bᵀ ⊗ a`.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        Superoperator {
            n: a.nrows(),
            mat: kron(&b.transpose(), a),
        }
    }

    /// `x ↦ [p, x]`.
    pub fn ad(p: &CMat) -> Self {
        &Self::left_mult(p) - &Self::right_mult(p)
    }

    /// `x ↦ u x u*`.
    pub fn conj_by(u: &CMat) -> Self {
        Self::sandwich(u, &u.adjoint())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let v = &self.mat * vec(x);
        devec(v.as_slice(), self.n)
    }

    /// Image of the matrix unit with column-stacked index `p`.
    pub fn apply_unit(&self, p: usize) -> CMat {
        devec(self.mat.column(p).as_slice(), self.n)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            n: self.n,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn norm(&self) -> f64 {
        frob(&self.mat)
    }

    pub fn scale(&self, s: f64) -> Superoperator {
        Superoperator {
            n: self.n,
            mat: &self.mat * c(s),
        }
    }

    /// Choi matrix `Σ_ij E_ij ⊗ T(E_ij)`.
    pub fn choi(&self) -> CMat {
        let n = self.n;
        let mut j = CMat::zeros(n * n, n * n);
        for i in 0..n {
            for k in 0..n {
                let img = self.apply_unit(linalg::vidx(n, i, k));
                for a in 0..n {
                    for b in 0..n {
                        j[(i * n + a, k * n + b)] = img[(a, b)];
                    }
                }
            }
        }
        j
    }

    /// `‖T(x*) − T(x)*‖` maximized over matrix units.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for p in 0..n * n {
            let x = unit_vec_index(n, p);
            let r = frob(&(self.apply(&x.adjoint()) - self.apply(&x).adjoint()));
            worst = worst.max(r);
        }
        worst
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            n: self.n,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            n: self.n,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Neg for &Superoperator {
    type Output = Superoperator;
    fn neg(self) -> Superoperator {
        Superoperator {
            n: self.n,
            mat: -&self.mat,
        }
    }
}

impl Mul<C64> for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: C64) -> Superoperator {
        Superoperator {
            n: self.n,
            mat: &self.mat * rhs,
        }
    }
}
