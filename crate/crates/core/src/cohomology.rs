//! Modular cochains over `(A, ρ)`, the twisted coboundary `b_δ`, the form
//! `ω_L`, and the exactness decision.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{StateAlgebra, Superoperator};
use crate::error::{Error, Result};
use crate::generators::{derivation_residual, extract_inner_potential_scaled, require_domain};
use crate::linalg::{self, c, identity, lstsq, unit_vec_index, vidx, CMat, CVec, C64, ZERO};

/// A multilinear functional on `A^{dim+1}`, stored by its values on tuples of
/// matrix units (first argument is the most significant index).
#[derive(Debug, Clone, PartialEq)]
pub struct ModularCochain {
    pub dim: usize,
    pub n: usize,
    pub tensor: Vec<C64>,
}

/// Index of `E_p E_q` when the product is nonzero.
#[inline]
fn unit_product(n: usize, p: usize, q: usize) -> Option<usize> {
    let (pi, pj) = (p % n, p / n);
    let (qi, qj) = (q % n, q / n);
    (pj == qi).then(|| vidx(n, pi, qj))
}

impl ModularCochain {
    /// Checked constructor: rejects functionals violating the cyclic-modular
    /// condition.
    pub fn new(sa: &StateAlgebra, dim: usize, tensor: Vec<C64>) -> Result<Self> {
        let phi = Self::raw(sa.n(), dim, tensor)?;
        if !is_cochain(sa, &phi) {
            return Err(Error::NotACochain);
        }
        Ok(phi)
    }

    /// Unchecked multilinear functional of the right size.
    pub fn raw(n: usize, dim: usize, tensor: Vec<C64>) -> Result<Self> {
        let expected = (n * n).pow(dim as u32 + 1);
        if tensor.len() != expected {
            return Err(Error::DimensionMismatch {
                expected: format!("{expected} entries"),
                found: format!("{}", tensor.len()),
            });
        }
        Ok(ModularCochain { dim, n, tensor })
    }

    /// `ψ(a) = ρ(a q)`.
    pub fn from_density(sa: &StateAlgebra, q: &CMat) -> Self {
        let n = sa.n();
        let tensor = (0..n * n)
            .map(|p| sa.rho_unchecked(&(unit_vec_index(n, p) * q)))
            .collect();
        ModularCochain { dim: 0, n, tensor }
    }

    pub fn norm(&self) -> f64 {
        self.tensor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Evaluate on arbitrary matrices.
    pub fn eval(&self, args: &[CMat]) -> Result<C64> {
        if args.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: format!("{} arguments", self.dim + 1),
                found: format!("{}", args.len()),
            });
        }
        let nn = self.n * self.n;
        let vecs: Vec<CVec> = args.iter().map(linalg::vec).collect();
        let mut total = ZERO;
        for (idx, &t) in self.tensor.iter().enumerate() {
            if t == ZERO {
                continue;
            }
            let mut rem = idx;
            let mut prod = t;
            for k in (0..=self.dim).rev() {
                prod *= vecs[k][rem % nn];
                rem /= nn;
            }
            total += prod;
        }
        Ok(total)
    }
}

/// Cyclic-modular condition
/// `φ(a⁰,…,aⁿ) = (−1)ⁿ φ(δ⁻¹(aⁿ), a⁰,…,aⁿ⁻¹)` on all matrix-unit tuples.
pub fn cochain_residual(sa: &StateAlgebra, phi: &ModularCochain) -> f64 {
    let n = sa.n();
    let nn = n * n;
    let dinv = sa.delta_inv_super();
    let dinv = dinv.mat();
    let sign = if phi.dim % 2 == 0 { 1.0 } else { -1.0 };
    let head = nn.pow(phi.dim as u32);
    let mut worst = 0.0f64;
    for idx in 0..phi.tensor.len() {
        let last = idx % nn;
        let rest = idx / nn;
        let mut rhs = ZERO;
        for k in 0..nn {
            let coef = dinv[(k, last)];
            if coef != ZERO {
                rhs += coef * phi.tensor[k * head + rest];
            }
        }
        worst = worst.max((phi.tensor[idx] - rhs * sign).norm());
    }
    worst
}

pub fn is_cochain(sa: &StateAlgebra, phi: &ModularCochain) -> bool {
    cochain_residual(sa, phi) <= sa.tol().eps_eq * phi.norm().max(1e-300)
}

/// `b_δφ(a⁰,…,aⁿ⁺¹) = Σ_j (−1)^j φ(…, a^j a^{j+1}, …)
///                    + (−1)^{n+1} φ(δ⁻¹(aⁿ⁺¹) a⁰, a¹, …, aⁿ)`.
pub fn coboundary(sa: &StateAlgebra, phi: &ModularCochain) -> Result<ModularCochain> {
    if phi.dim > 1 {
        return Err(Error::UnsupportedDimension(phi.dim));
    }
    Ok(coboundary_any(sa, phi))
}

pub(crate) fn coboundary_any(sa: &StateAlgebra, phi: &ModularCochain) -> ModularCochain {
    let n = sa.n();
    let nn = n * n;
    let dim = phi.dim;
    let out_args = dim + 2;
    let dinv = sa.delta_inv_super();
    let dinv = dinv.mat();
    let len = nn.pow(out_args as u32);
    let mut out = vec![ZERO; len];
    let mut args = vec![0usize; out_args];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rem = idx;
        for k in (0..out_args).rev() {
            args[k] = rem % nn;
            rem /= nn;
        }
        let mut acc = ZERO;
        for j in 0..=dim {
            if let Some(prod) = unit_product(n, args[j], args[j + 1]) {
                let mut flat = 0usize;
                for (k, &a) in args.iter().enumerate() {
                    if k == j + 1 {
                        continue;
                    }
                    flat = flat * nn + if k == j { prod } else { a };
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += phi.tensor[flat] * sign;
            }
        }
        let sign = if (dim + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let last = args[out_args - 1];
        for k in 0..nn {
            let coef = dinv[(k, last)];
            if coef == ZERO {
                continue;
            }
            if let Some(prod) = unit_product(n, k, args[0]) {
                let mut flat = prod;
                for &a in &args[1..out_args - 1] {
                    flat = flat * nn + a;
                }
                acc += coef * phi.tensor[flat] * sign;
            }
        }
        *slot = acc;
    }
    ModularCochain {
        dim: dim + 1,
        n,
        tensor: out,
    }
}

/// The unique `p` with `ψ(a) = ρ(a p)`.
pub fn zero_cochain_rep(sa: &StateAlgebra, psi: &ModularCochain) -> Result<CMat> {
    if psi.dim != 0 || psi.n != sa.n() || !is_cochain(sa, psi) {
        return Err(Error::NotACochain);
    }
    let n = sa.n();
    // ψ(E_ij) = (p ω)[j, i]
    let psi_t = CMat::from_fn(n, n, |j, i| psi.tensor[vidx(n, i, j)]);
    let u = sa.eigbasis();
    let inv = u
        * CMat::from_diagonal(&CVec::from_iterator(
            n,
            sa.eigvals().iter().map(|v| c(1.0 / v)),
        ))
        * u.adjoint();
    Ok(psi_t * inv)
}

/// `ω_L(x, y) = ρ(x L(y)) − ρ(L(x) y)` on matrix-unit pairs.
pub fn omega_form(sa: &StateAlgebra, l: &Superoperator) -> ModularCochain {
    let n = sa.n();
    let nn = n * n;
    let imgs: Vec<CMat> = (0..nn).map(|p| l.apply_unit(p)).collect();
    let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
    let mut t = vec![ZERO; nn * nn];
    for p in 0..nn {
        for q in 0..nn {
            t[p * nn + q] = sa.rho_unchecked(&(&units[p] * &imgs[q]))
                - sa.rho_unchecked(&(&imgs[p] * &units[q]));
        }
    }
    ModularCochain { dim: 1, n, tensor: t }
}

/// `σ_L(a dx b dy) = ρ(a[L(xby) − xL(by) − L(xb)y + xL(b)y])`.
pub fn sigma_adxbdy(
    sa: &StateAlgebra,
    l: &Superoperator,
    a: &CMat,
    x: &CMat,
    b: &CMat,
    y: &CMat,
) -> C64 {
    let xb = x * b;
    let by = b * y;
    let inner = l.apply(&(&xb * y)) - x * l.apply(&by) - l.apply(&xb) * y + x * l.apply(b) * y;
    sa.rho_unchecked(&(a * inner))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionVerdict {
    pub holds: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    pub exact: bool,
    /// Potential with `L − L* = 2 ad(v)`, normalized so `ρ(v) = 0`.
    pub v: Option<CMat>,
    /// (i) coboundary, (ii) inner potential, (iii) derivation, (iv) KMS.
    pub criteria: [CriterionVerdict; 4],
}

fn coboundary_solve(sa: &StateAlgebra, omega_l: &ModularCochain) -> f64 {
    let n = sa.n();
    let nn = n * n;
    let dinv = sa.delta_inv_super();
    let rows = nn * nn + nn;
    let mut a = CMat::zeros(rows, nn);
    for k in 0..nn {
        let mut e = vec![ZERO; nn];
        e[k] = c(1.0);
        let psi = ModularCochain { dim: 0, n, tensor: e };
        let b = coboundary_any(sa, &psi);
        for (r, v) in b.tensor.iter().enumerate() {
            a[(r, k)] = *v;
        }
    }
    // ψ ∘ δ⁻¹ = ψ
    for p in 0..nn {
        for k in 0..nn {
            a[(nn * nn + p, k)] = dinv.mat()[(k, p)];
        }
        a[(nn * nn + p, p)] -= c(1.0);
    }
    let mut rhs = CVec::zeros(rows);
    for (r, v) in omega_l.tensor.iter().enumerate() {
        rhs[r] = *v;
    }
    lstsq(&a, &rhs).1
}

/// Solve `ρ(x[u, y]) = ω_L(x, y)`; returns `(u, ls residual, skew residual, δ residual)`.
fn potential_solve(sa: &StateAlgebra, omega_l: &ModularCochain) -> (CMat, f64, f64, f64) {
    let n = sa.n();
    let nn = n * n;
    let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
    let mut a = CMat::zeros(nn * nn, nn);
    for k in 0..nn {
        for p in 0..nn {
            for q in 0..nn {
                let com = &units[k] * &units[q] - &units[q] * &units[k];
                a[(p * nn + q, k)] = sa.rho_unchecked(&(&units[p] * com));
            }
        }
    }
    let rhs = CVec::from_column_slice(&omega_l.tensor);
    let (x, res) = lstsq(&a, &rhs);
    let mut u = linalg::devec(x.as_slice(), n);
    let tr = u.trace() / c(n as f64);
    u -= identity(n) * tr;
    let skew = linalg::skewness_residual(&u);
    let fixed = (sa.delta(&u) - &u).norm();
    (u, res, skew, fixed)
}

/// Largest `|σ_L(ω₁ω₂) − σ_L(ω₂ δ̂(ω₁))|` over the spanning pairs
/// `(E_a dE_b, E_c dE_d)`. From `n = 5` on, seeded dense random pairs
/// (normalized to unit norm) replace the full enumeration.
pub fn kms_residual(sa: &StateAlgebra, l: &Superoperator) -> f64 {
    let n = sa.n();
    let nn = n * n;
    let mut worst = 0.0f64;
    if n <= 4 {
        let units: Vec<CMat> = (0..nn).map(|p| unit_vec_index(n, p)).collect();
        let deltas: Vec<CMat> = units.iter().map(|e| sa.delta(e)).collect();
        for a in 0..nn {
            for b in 0..nn {
                for c_ in 0..nn {
                    for d_ in 0..nn {
                        let lhs = sigma_adxbdy(sa, l, &units[a], &units[b], &units[c_], &units[d_]);
                        let rhs =
                            sigma_adxbdy(sa, l, &units[c_], &units[d_], &deltas[a], &deltas[b]);
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6b6d73);
        for _ in 0..64 {
            let m: Vec<CMat> = (0..4)
                .map(|_| {
                    let g = linalg::random_complex(&mut rng, n, n);
                    let norm = g.norm();
                    g / c(norm)
                })
                .collect();
            let lhs = sigma_adxbdy(sa, l, &m[0], &m[1], &m[2], &m[3]);
            let rhs = sigma_adxbdy(sa, l, &m[2], &m[3], &sa.delta(&m[0]), &sa.delta(&m[1]));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Decide exactness by four independent criteria, which must agree.
pub fn exactness_report(sa: &StateAlgebra, l: &Superoperator) -> Result<ExactnessReport> {
    require_domain(sa, l)?;
    let eps = sa.tol().eps_eq;
    let scale = l.norm();
    let cut = eps * scale;
    let omega_l = omega_form(sa, l);

    let r1 = coboundary_solve(sa, &omega_l);
    let c1 = CriterionVerdict {
        holds: r1 <= cut,
        residual: r1,
    };

    let (u, r2, skew, fixed) = potential_solve(sa, &omega_l);
    let r2_total = r2.max(skew).max(fixed);
    let c2 = CriterionVerdict {
        holds: r2_total <= cut,
        residual: r2_total,
    };

    let ls = sa.adjoint_gns(l);
    let diff = l - &ls;
    let r3 = derivation_residual(&diff);
    let c3 = CriterionVerdict {
        holds: r3 <= cut,
        residual: r3,
    };

    let r4 = kms_residual(sa, l);
    let c4 = CriterionVerdict {
        holds: r4 <= cut,
        residual: r4,
    };

    let criteria = [c1, c2, c3, c4];
    let exact = c1.holds;
    if criteria.iter().any(|k| k.holds != exact) {
        return Err(Error::InternalInconsistency(format!(
            "coboundary {:.3e}, potential {:.3e}, derivation {:.3e}, kms {:.3e} (cut {:.3e})",
            r1, r2_total, r3, r4, cut
        )));
    }
    let v = if exact {
        let mut v = u * c(0.5);
        let r = sa.rho_unchecked(&v);
        v -= identity(sa.n()) * r;
        let v3 = extract_inner_potential_scaled(sa, &diff.scale(0.5), scale)?;
        let gap = (&v - &v3).norm();
        if gap > 10.0 * cut.max(eps) {
            return Err(Error::InternalInconsistency(format!(
                "potentials from criteria (ii) and (iii) differ by {gap:.3e}"
            )));
        }
        Some(v)
    } else {
        None
    };
    Ok(ExactnessReport { exact, v, criteria })
}
