//! Exponentiation of generators, Markov-axiom checks, long-time behavior and
//! compression to the support of a non-faithful invariant state.

use serde::Serialize;

use crate::algebra::{StateAlgebra, Superoperator};
use crate::error::{Error, Result};
use crate::generators::require_domain;
use crate::linalg::{self, c, herm_eig, herm_extremes, identity, kron, CMat, C64};

/// `φ_t = exp(tL)`.
pub fn evolve(l: &Superoperator, t: f64) -> Result<Superoperator> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(Superoperator::identity(l.n()));
    }
    let m = (l.mat() * c(t)).exp();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Superoperator::from_matrix(l.n(), m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupResidual {
    pub s: f64,
    pub t: f64,
    pub residual: f64,
}

/// Residuals of the Markov-semigroup axioms at sampled times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionReport {
    pub times: Vec<f64>,
    /// `‖φ_t(1) − 1‖`
    pub unitality: Vec<f64>,
    /// `‖ρ∘φ_t − ρ‖`, measured on the density operator.
    pub invariance: Vec<f64>,
    /// Smallest eigenvalue of the Choi matrix of `φ_t`.
    pub cp: Vec<f64>,
    /// `‖φ_s φ_t − φ_{s+t}‖` over all sampled pairs.
    pub semigroup: Vec<SemigroupResidual>,
}

impl EvolutionReport {
    pub fn passes(&self, residual_tol: f64, psd_tol: f64) -> bool {
        self.unitality.iter().all(|&r| r <= residual_tol)
            && self.invariance.iter().all(|&r| r <= residual_tol)
            && self.cp.iter().all(|&e| e >= -psd_tol)
            && self.semigroup.iter().all(|r| r.residual <= residual_tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.unitality
            .iter()
            .chain(&self.invariance)
            .copied()
            .chain(self.semigroup.iter().map(|r| r.residual))
            .fold(0.0, f64::max)
    }

    pub fn min_choi_eig(&self) -> f64 {
        self.cp.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Matrix of the dual map on density operators: `ρ(φ(x)) = Tr(φ†(ω) x)`.
fn dual_apply(phi: &Superoperator, omega: &CMat) -> CMat {
    let v = phi.mat().adjoint() * linalg::vec(omega);
    linalg::devec(v.as_slice(), phi.n())
}

pub fn markov_checks(sa: &StateAlgebra, l: &Superoperator, times: &[f64]) -> Result<EvolutionReport> {
    let n = sa.n();
    let one = identity(n);
    let mut report = EvolutionReport {
        times: times.to_vec(),
        unitality: Vec::with_capacity(times.len()),
        invariance: Vec::with_capacity(times.len()),
        cp: Vec::with_capacity(times.len()),
        semigroup: Vec::new(),
    };
    let mut flows = Vec::with_capacity(times.len());
    for &t in times {
        let phi = evolve(l, t)?;
        report.unitality.push((phi.apply(&one) - &one).norm());
        report
            .invariance
            .push((dual_apply(&phi, sa.omega()) - sa.omega()).norm());
        report.cp.push(herm_extremes(&phi.choi()).0);
        flows.push(phi);
    }
    for (i, &s) in times.iter().enumerate() {
        for (j, &t) in times.iter().enumerate().skip(i) {
            let joint = evolve(l, s + t)?;
            let r = (flows[i].compose(&flows[j]).mat() - joint.mat()).norm();
            report.semigroup.push(SemigroupResidual { s, t, residual: r });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct MixingReport {
    pub spectrum: Vec<C64>,
    /// Eigenvalues with `|Re λ| ≤ 1e−9·‖L‖`.
    pub peripheral: Vec<C64>,
    pub limit_exists: bool,
    /// Spectral projection onto `ker L` along `range L`.
    pub limit: Option<Superoperator>,
    /// Smallest `−Re λ` over the non-peripheral spectrum (infinite if none).
    pub spectral_gap: f64,
}

pub fn spectrum(l: &Superoperator) -> Result<Vec<C64>> {
    let nn = l.mat().nrows();
    if nn == 0 {
        return Ok(Vec::new());
    }
    let schur = l
        .mat()
        .clone()
        .try_schur(1e-15, 0)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut vals: Vec<C64> = (0..nn).map(|k| t[(k, k)]).collect();
    vals.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(vals)
}

pub fn mixing_analysis(sa: &StateAlgebra, l: &Superoperator) -> Result<MixingReport> {
    require_domain(sa, l)?;
    let vals = spectrum(l)?;
    let scale = l.norm();
    let per_tol = 1e-9 * scale;
    let zero_tol = 1e-7 * scale.max(1e-300);
    let (peripheral, rest): (Vec<C64>, Vec<C64>) =
        vals.iter().partition(|z| z.re.abs() <= per_tol);
    let spectral_gap = rest
        .iter()
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);

    let only_zero = peripheral.iter().all(|z| z.norm() <= zero_tol);
    let kernel = linalg::null_space(l.mat(), 1e-9, 0.0);
    let co_kernel = linalg::null_space(&l.mat().adjoint(), 1e-9, 0.0);
    let semisimple = kernel.ncols() == peripheral.len() && co_kernel.ncols() == peripheral.len();
    let limit = if only_zero && semisimple {
        if kernel.ncols() == 0 {
            Some(Superoperator::zero(l.n()))
        } else {
            let pairing = co_kernel.adjoint() * &kernel;
            pairing.try_inverse().map(|inv| {
                Superoperator::from_matrix(l.n(), &kernel * inv * co_kernel.adjoint())
                    .expect("square projector")
            })
        }
    } else {
        None
    };
    Ok(MixingReport {
        spectrum: vals,
        peripheral,
        limit_exists: limit.is_some(),
        limit,
        spectral_gap,
    })
}

/// Orthogonal projection onto the range of a (possibly non-faithful) state.
pub fn support_projection(sa_big: &StateAlgebra, state: &CMat) -> Result<CMat> {
    let v = support_isometry(sa_big, state)?;
    Ok(&v * v.adjoint())
}

/// Isometry `V` with `V V* = p₀`; coordinate vectors when `p₀` is diagonal.
fn support_isometry(sa_big: &StateAlgebra, state: &CMat) -> Result<CMat> {
    let n = sa_big.n();
    let tol = sa_big.tol();
    if state.nrows() != n || state.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", state.nrows(), state.ncols()),
        });
    }
    let herm = linalg::hermiticity_residual(state);
    if herm > tol.eps_eq {
        return Err(Error::NotAState(format!("not Hermitian (residual {herm:.3e})")));
    }
    let tr = state.trace();
    if (tr - c(1.0)).norm() > tol.eps_eq * (n as f64) {
        return Err(Error::NotAState(format!("trace {:.6}", tr.re)));
    }
    let (vals, vecs) = herm_eig(state);
    let min = *vals.last().unwrap();
    if min < -tol.eps_psd {
        return Err(Error::NotAState(format!("negative eigenvalue {min:.3e}")));
    }
    let rank = vals.iter().filter(|&&v| v > tol.eps_rank).count();
    let p = {
        let cols = vecs.columns(0, rank);
        &cols * cols.adjoint()
    };
    let diag_resid = (&p - CMat::from_diagonal(&p.diagonal())).norm();
    if diag_resid <= tol.eps_eq {
        let idx: Vec<usize> = (0..n).filter(|&i| p[(i, i)].re > 0.5).collect();
        if idx.len() == rank {
            let mut v = CMat::zeros(n, rank);
            for (k, &i) in idx.iter().enumerate() {
                v[(i, k)] = c(1.0);
            }
            return Ok(v);
        }
    }
    Ok(vecs.columns(0, rank).into_owned())
}

#[derive(Debug, Clone)]
pub struct CompressionReport {
    /// `V` with `V V* = p₀`, columns spanning the support.
    pub isometry: CMat,
    pub support: CMat,
    /// Derivative at zero of the compressed flow `a ↦ V*φ_t(VaV*)V`.
    pub l_corner: Superoperator,
    /// The state restricted to the corner, faithful there.
    pub rho_corner: CMat,
    /// Smallest eigenvalue of `φ_t(p₀) − p₀` at each sampled time.
    pub monotonicity: Vec<(f64, f64)>,
    pub monotone: bool,
    /// `max ‖comp(φ_s)comp(φ_t) − comp(φ_{s+t})‖` over sampled pairs.
    pub semigroup_deviation: f64,
    /// `max ‖comp(φ_t) − id‖` over sampled times.
    pub distance_from_trivial: f64,
}

impl CompressionReport {
    pub fn corner_dim(&self) -> usize {
        self.isometry.ncols()
    }
}

/// Compress the semigroup generated by `l_big` to the support corner of an
/// invariant state.
pub fn compress(
    sa_big: &StateAlgebra,
    l_big: &Superoperator,
    state: &CMat,
    times: &[f64],
) -> Result<CompressionReport> {
    let tol = sa_big.tol();
    let v = support_isometry(sa_big, state)?;
    let p0 = &v * v.adjoint();
    let into = kron(&v.map(|z| z.conj()), &v);
    let out = kron(&v.transpose(), &v.adjoint());
    let r = v.ncols();
    let comp = |phi: &Superoperator| -> CMat { &out * phi.mat() * &into };

    let scale = l_big.norm().max(1.0);
    let mut monotonicity = Vec::with_capacity(times.len());
    let mut flows = Vec::with_capacity(times.len());
    let mut distance_from_trivial = 0.0f64;
    let ident = CMat::identity(r * r, r * r);
    for &t in times {
        let phi = evolve(l_big, t)?;
        let drift = (dual_apply(&phi, state) - state).norm();
        if drift > tol.eps_eq * scale * t.max(1.0) {
            return Err(Error::StateNotInvariant(drift));
        }
        let moved = phi.apply(&p0) - &p0;
        monotonicity.push((t, herm_extremes(&moved).0));
        let ct = comp(&phi);
        distance_from_trivial = distance_from_trivial.max((&ct - &ident).norm());
        flows.push(ct);
    }
    let mut semigroup_deviation = 0.0f64;
    for (i, &s) in times.iter().enumerate() {
        for (j, &t) in times.iter().enumerate().skip(i) {
            let joint = comp(&evolve(l_big, s + t)?);
            semigroup_deviation = semigroup_deviation.max((&flows[i] * &flows[j] - joint).norm());
        }
    }
    let monotone = monotonicity.iter().all(|&(_, e)| e >= -tol.eps_psd * scale);
    Ok(CompressionReport {
        l_corner: Superoperator::from_matrix(r, &out * l_big.mat() * &into)?,
        rho_corner: v.adjoint() * state * &v,
        isometry: v,
        support: p0,
        monotonicity,
        monotone,
        semigroup_deviation,
        distance_from_trivial,
    })
}
