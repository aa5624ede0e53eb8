//! Universal one- and two-forms over `A = M_n`.
//!
//! A one-form is stored as its coordinate matrix `T` over `E_p ⊗ E_q`
//! (indices column-stacked), so `x ⊗ y` has coordinates `vec(x) vec(y)ᵀ`.
//! Two-forms are dense `N³` tensors (`N = n²`) with index `(p·N + q)·N + r`.

use crate::algebra::{StateAlgebra, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, kron, unit_vec_index, vec, vidx, vidx_transpose, CMat, C64, ONE, ZERO};

/// Element of `Ω¹(A) = ker(μ: A ⊗ A → A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    n: usize,
    t: CMat,
}

/// Element of `Ω²(A) ⊂ A ⊗ A ⊗ A`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    n: usize,
    t: Vec<C64>,
}

fn membership_tol(scale: f64) -> f64 {
    1e-9 * scale.max(1.0)
}

/// Multiplication `μ(E_p ⊗ E_q) = E_p E_q` applied to a coordinate matrix.
fn mu_coords(n: usize, t: &CMat) -> CMat {
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for l in 0..n {
            let mut s = ZERO;
            for j in 0..n {
                s += t[(vidx(n, i, j), vidx(n, j, l))];
            }
            out[(i, l)] = s;
        }
    }
    out
}

impl OneForm {
    /// Checked constructor from an `n² × n²` coordinate matrix.
    pub fn from_coords(n: usize, t: CMat) -> Result<Self> {
        let nn = n * n;
        if t.nrows() != nn || t.ncols() != nn {
            return Err(Error::DimensionMismatch {
                expected: format!("{nn}x{nn}"),
                found: format!("{}x{}", t.nrows(), t.ncols()),
            });
        }
        let r = mu_coords(n, &t).norm();
        if r > membership_tol(t.norm()) {
            return Err(Error::NotAOneForm(r));
        }
        Ok(OneForm { n, t })
    }

    /// `Σ x_k ⊗ y_k`, rejected unless `Σ x_k y_k = 0`.
    pub fn from_terms(n: usize, terms: &[(CMat, CMat)]) -> Result<Self> {
        let mut t = CMat::zeros(n * n, n * n);
        for (x, y) in terms {
            t += vec(x) * vec(y).transpose();
        }
        Self::from_coords(n, t)
    }

    pub(crate) fn from_coords_unchecked(n: usize, t: CMat) -> Self {
        OneForm { n, t }
    }

    pub fn zero(n: usize) -> Self {
        OneForm {
            n,
            t: CMat::zeros(n * n, n * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &CMat {
        &self.t
    }

    pub fn mu(&self) -> CMat {
        mu_coords(self.n, &self.t)
    }

    pub fn norm(&self) -> f64 {
        self.t.norm()
    }

    /// `a · ω · b`, with `a (x ⊗ y) b = ax ⊗ yb`.
    pub fn act(&self, a: &CMat, b: &CMat) -> OneForm {
        let n = self.n;
        let id = identity(n);
        OneForm {
            n,
            t: kron(&id, a) * &self.t * kron(b, &id),
        }
    }

    pub fn left(&self, a: &CMat) -> OneForm {
        self.act(a, &identity(self.n))
    }

    pub fn right(&self, b: &CMat) -> OneForm {
        self.act(&identity(self.n), b)
    }

    /// `(x ⊗ y)* = y* ⊗ x*`.
    pub fn star(&self) -> OneForm {
        let n = self.n;
        let nn = n * n;
        let mut t = CMat::zeros(nn, nn);
        for p in 0..nn {
            for q in 0..nn {
                t[(vidx_transpose(n, q), vidx_transpose(n, p))] = self.t[(p, q)].conj();
            }
        }
        OneForm { n, t }
    }

    /// Entrywise lift `σ_z ⊗ σ_z` of the modular group.
    pub fn modular_lift(&self, sa: &StateAlgebra, z: C64) -> OneForm {
        let s = lift_matrix(sa, z);
        OneForm {
            n: self.n,
            t: &s * &self.t * s.transpose(),
        }
    }

    /// `δ̂ = δ ⊗ δ`.
    pub fn delta_hat(&self, sa: &StateAlgebra) -> OneForm {
        self.modular_lift(sa, crate::linalg::I)
    }

    pub fn delta_hat_inv(&self, sa: &StateAlgebra) -> OneForm {
        self.modular_lift(sa, -crate::linalg::I)
    }

    /// `ω^# = δ̂^{1/2}(ω*)`.
    pub fn sharp(&self, sa: &StateAlgebra) -> OneForm {
        self.star().modular_lift(sa, crate::linalg::I * 0.5)
    }

    /// Product `Ω¹ × Ω¹ → Ω²`, `(a ⊗ b)(c ⊗ e) = a ⊗ bc ⊗ e`.
    pub fn wedge(&self, other: &OneForm) -> TwoForm {
        let n = self.n;
        let nn = n * n;
        let mut w = vec![ZERO; nn * nn * nn];
        for p in 0..nn {
            for i in 0..n {
                for j in 0..n {
                    let a = self.t[(p, vidx(n, i, j))];
                    if a == ZERO {
                        continue;
                    }
                    for l in 0..n {
                        let q = vidx(n, i, l);
                        let row = vidx(n, j, l);
                        let base = (p * nn + q) * nn;
                        for s in 0..nn {
                            let b = other.t[(row, s)];
                            if b != ZERO {
                                w[base + s] += a * b;
                            }
                        }
                    }
                }
            }
        }
        TwoForm { n, t: w }
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm {
            n: self.n,
            t: &self.t + &other.t,
        }
    }

    pub fn scale(&self, s: C64) -> OneForm {
        OneForm {
            n: self.n,
            t: &self.t * s,
        }
    }
}

/// `dx = 1 ⊗ x − x ⊗ 1`.
pub fn d(x: &CMat) -> OneForm {
    let n = x.nrows();
    let one = vec(&identity(n));
    let vx = vec(x);
    OneForm {
        n,
        t: &one * vx.transpose() - &vx * one.transpose(),
    }
}

/// Matrix `S` with `vec(σ_z(x)) = S vec(x)`.
fn lift_matrix(sa: &StateAlgebra, z: C64) -> CMat {
    let (x, y) = sa.modular_factors(z);
    kron(&y.transpose(), &x)
}

impl TwoForm {
    /// Checked constructor from a flat `N³` tensor.
    pub fn from_tensor(n: usize, t: Vec<C64>) -> Result<Self> {
        let nn = n * n;
        if t.len() != nn * nn * nn {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", nn * nn * nn),
                found: format!("{}", t.len()),
            });
        }
        let f = TwoForm { n, t };
        let r = f.mu2_residual();
        if r > membership_tol(f.norm()) {
            return Err(Error::NotATwoForm(r));
        }
        Ok(f)
    }

    /// `Σ x_k ⊗ y_k ⊗ z_k` as a checked two-form.
    pub fn from_terms(n: usize, terms: &[(CMat, CMat, CMat)]) -> Result<Self> {
        let nn = n * n;
        let mut t = vec![ZERO; nn * nn * nn];
        for (x, y, z) in terms {
            let (vx, vy, vz) = (vec(x), vec(y), vec(z));
            for p in 0..nn {
                for q in 0..nn {
                    let pq = vx[p] * vy[q];
                    if pq == ZERO {
                        continue;
                    }
                    let base = (p * nn + q) * nn;
                    for r in 0..nn {
                        t[base + r] += pq * vz[r];
                    }
                }
            }
        }
        Self::from_tensor(n, t)
    }

    pub fn zero(n: usize) -> Self {
        let nn = n * n;
        TwoForm {
            n,
            t: vec![ZERO; nn * nn * nn],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tensor(&self) -> &[C64] {
        &self.t
    }

    pub fn norm(&self) -> f64 {
        self.t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖μ₂(ξ)‖` where `μ₂(a ⊗ b ⊗ c) = (ab ⊗ c, a ⊗ bc)`.
    pub fn mu2_residual(&self) -> f64 {
        let n = self.n;
        let nn = n * n;
        let mut total = 0.0;
        for i in 0..n {
            for l in 0..n {
                for r in 0..nn {
                    let mut s1 = ZERO;
                    let mut s2 = ZERO;
                    for j in 0..n {
                        s1 += self.t[(vidx(n, i, j) * nn + vidx(n, j, l)) * nn + r];
                        s2 += self.t[(r * nn + vidx(n, i, j)) * nn + vidx(n, j, l)];
                    }
                    total += s1.norm_sqr() + s2.norm_sqr();
                }
            }
        }
        total.sqrt()
    }

    /// `a · ξ · b`.
    pub fn act(&self, a: &CMat, b: &CMat) -> TwoForm {
        let n = self.n;
        let nn = n * n;
        let id = identity(n);
        let la = kron(&id, a);
        let rb = kron(&b.transpose(), &id);
        self.map_legs(&la, &identity(nn), &rb)
    }

    pub fn left(&self, a: &CMat) -> TwoForm {
        self.act(a, &identity(self.n))
    }

    pub fn right(&self, b: &CMat) -> TwoForm {
        self.act(&identity(self.n), b)
    }

    /// Apply `s1 ⊗ s2 ⊗ s3` to the three tensor legs.
    fn map_legs(&self, s1: &CMat, s2: &CMat, s3: &CMat) -> TwoForm {
        let nn = self.n * self.n;
        let mut a = vec![ZERO; self.t.len()];
        // third leg
        for pq in 0..nn * nn {
            for r in 0..nn {
                let mut s = ZERO;
                for k in 0..nn {
                    s += s3[(r, k)] * self.t[pq * nn + k];
                }
                a[pq * nn + r] = s;
            }
        }
        let mut b = vec![ZERO; self.t.len()];
        for p in 0..nn {
            for q in 0..nn {
                for r in 0..nn {
                    let mut s = ZERO;
                    for k in 0..nn {
                        s += s2[(q, k)] * a[(p * nn + k) * nn + r];
                    }
                    b[(p * nn + q) * nn + r] = s;
                }
            }
        }
        let mut out = vec![ZERO; self.t.len()];
        for p in 0..nn {
            for k in 0..nn {
                let coef = s1[(p, k)];
                if coef == ZERO {
                    continue;
                }
                for qr in 0..nn * nn {
                    out[p * nn * nn + qr] += coef * b[k * nn * nn + qr];
                }
            }
        }
        TwoForm { n: self.n, t: out }
    }

    /// `(a ⊗ b ⊗ c)* = c* ⊗ b* ⊗ a*`.
    pub fn star(&self) -> TwoForm {
        let n = self.n;
        let nn = n * n;
        let mut out = vec![ZERO; self.t.len()];
        for p in 0..nn {
            for q in 0..nn {
                for r in 0..nn {
                    let dst = (vidx_transpose(n, r) * nn + vidx_transpose(n, q)) * nn
                        + vidx_transpose(n, p);
                    out[dst] = self.t[(p * nn + q) * nn + r].conj();
                }
            }
        }
        TwoForm { n, t: out }
    }

    /// Entrywise lift `σ_z ⊗ σ_z ⊗ σ_z`.
    pub fn modular_lift(&self, sa: &StateAlgebra, z: C64) -> TwoForm {
        let s = lift_matrix(sa, z);
        self.map_legs(&s, &s, &s)
    }

    pub fn delta_hat(&self, sa: &StateAlgebra) -> TwoForm {
        self.modular_lift(sa, crate::linalg::I)
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        TwoForm {
            n: self.n,
            t: self.t.iter().zip(&other.t).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> TwoForm {
        TwoForm {
            n: self.n,
            t: self.t.iter().map(|a| a * s).collect(),
        }
    }

    pub fn sub(&self, other: &TwoForm) -> TwoForm {
        self.add(&other.scale(-ONE))
    }

    /// Pair with a functional given by its values on basis triples.
    pub(crate) fn pair(&self, f: &[C64]) -> C64 {
        self.t.iter().zip(f).map(|(a, b)| a * b).sum()
    }
}

/// `θ_L(a ⊗ b ⊗ c) = −a L(b) c`, the bimodule map measuring the failure of
/// the Leibniz rule.
pub fn theta(l: &Superoperator, xi: &TwoForm) -> CMat {
    let n = xi.n;
    let nn = n * n;
    let mut out = CMat::zeros(n, n);
    for q in 0..nn {
        let lq = l.apply_unit(q);
        for i in 0..n {
            for j in 0..n {
                let p = vidx(n, i, j);
                for l_ in 0..n {
                    for k in 0..n {
                        let r = vidx(n, k, l_);
                        let coef = xi.t[(p * nn + q) * nn + r];
                        if coef != ZERO {
                            out[(i, l_)] -= coef * lq[(j, k)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// The symbol `σ_L = ρ ∘ θ_L`.
pub fn symbol(sa: &StateAlgebra, l: &Superoperator, xi: &TwoForm) -> C64 {
    sa.rho_unchecked(&theta(l, xi))
}

/// Values `σ_L(E_p ⊗ E_q ⊗ E_r)`, i.e. `−ρ(E_p L(E_q) E_r)`, as a flat tensor.
pub(crate) fn symbol_functional(sa: &StateAlgebra, l: &Superoperator) -> Vec<C64> {
    let n = sa.n();
    let nn = n * n;
    let omega = sa.omega();
    let mut f = vec![ZERO; nn * nn * nn];
    for q in 0..nn {
        let lq = l.apply_unit(q);
        for i in 0..n {
            for j in 0..n {
                let p = vidx(n, i, j);
                for k in 0..n {
                    for l_ in 0..n {
                        let r = vidx(n, k, l_);
                        f[(p * nn + q) * nn + r] = -omega[(l_, i)] * lq[(j, k)];
                    }
                }
            }
        }
    }
    f
}

/// Largest residual of `L(xay) − xL(ay) − L(xa)y + xL(a)y` over matrix-unit
/// triples, relative to `max(‖L‖, 1)`.
pub fn first_order_residual(l: &Superoperator) -> f64 {
    let n = l.n();
    let nn = n * n;
    let imgs: Vec<CMat> = (0..nn).map(|p| l.apply_unit(p)).collect();
    let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
    let zero = CMat::zeros(n, n);
    // L applied to a product of units, which is a unit or zero.
    let img_of = |i: usize, j: usize, k: usize, l_: usize| -> &CMat {
        if j == k {
            &imgs[vidx(n, i, l_)]
        } else {
            &zero
        }
    };
    let mut worst = 0.0f64;
    for x in 0..nn {
        let (xi, xj) = (x % n, x / n);
        for a in 0..nn {
            let (ai, aj) = (a % n, a / n);
            let xa_nonzero = xj == ai;
            for y in 0..nn {
                let (yi, yj) = (y % n, y / n);
                let mut r = CMat::zeros(n, n);
                if xa_nonzero && aj == yi {
                    r += &imgs[vidx(n, xi, yj)];
                }
                r -= &units[x] * img_of(ai, aj, yi, yj);
                if xa_nonzero {
                    r -= &imgs[vidx(n, xi, aj)] * &units[y];
                }
                r += &units[x] * &imgs[a] * &units[y];
                worst = worst.max(r.norm());
            }
        }
    }
    worst / l.norm().max(1.0)
}

/// `L` is a first-order operator iff `θ_L = 0`.
pub fn is_first_order(l: &Superoperator) -> bool {
    first_order_residual(l) <= 1e-9
}

/// Sparse orthonormal basis of `ker μ`: entries `(p, q, coefficient)`.
pub(crate) fn kermu_sparse(n: usize) -> Vec<Vec<(usize, usize, f64)>> {
    let mut out = Vec::with_capacity(n * n * n * n - n * n);
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        out.push(vec![(vidx(n, i, j), vidx(n, k, l), 1.0)]);
                    }
                }
            }
            // sum-zero combinations of E_ij ⊗ E_jl
            for m in 1..n {
                let norm = ((m * (m + 1)) as f64).sqrt();
                let mut terms = Vec::with_capacity(m + 1);
                for j in 0..m {
                    terms.push((vidx(n, i, j), vidx(n, j, l), 1.0 / norm));
                }
                terms.push((vidx(n, i, m), vidx(n, m, l), -(m as f64) / norm));
                out.push(terms);
            }
        }
    }
    out
}

/// Orthonormal basis of `Ω¹` (flat tensor inner product), `n⁴ − n²` forms.
pub fn kermu_basis(n: usize) -> Vec<OneForm> {
    kermu_sparse(n)
        .into_iter()
        .map(|terms| {
            let mut t = CMat::zeros(n * n, n * n);
            for (p, q, v) in terms {
                t[(p, q)] += c(v);
            }
            OneForm { n, t }
        })
        .collect()
}

/// Matrix `S[s, r] = F(κ_s* κ_r)` over the `ker μ` basis, for a functional
/// `F` on `A^{⊗3}` given by its values on basis triples.
pub(crate) fn kermu_hermitian(n: usize, f: &[C64]) -> CMat {
    let nn = n * n;
    let basis = kermu_sparse(n);
    let dim = basis.len();
    let mut s = CMat::zeros(dim, dim);
    for (si, ks) in basis.iter().enumerate() {
        for (ri, kr) in basis.iter().enumerate() {
            let mut acc = ZERO;
            for &(a, b, cs) in ks {
                // (E_a ⊗ E_b)* = E_{bᵀ} ⊗ E_{aᵀ}; E_{aᵀ} E_{a'} = δ E_{jl}
                let (ai, aj) = (a % n, a / n);
                let bt = vidx_transpose(n, b);
                for &(a2, b2, cr) in kr {
                    let (ak, al) = (a2 % n, a2 / n);
                    if ai != ak {
                        continue;
                    }
                    let mid = vidx(n, aj, al);
                    acc += c(cs * cr) * f[(bt * nn + mid) * nn + b2];
                }
            }
            s[(si, ri)] = acc;
        }
    }
    s
}
