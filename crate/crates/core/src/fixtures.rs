//! Reference generators shipped under `fixtures/`.

use crate::algebra::{StateAlgebra, Superoperator};
use crate::error::Result;
use crate::generators::{make_generator, GroundTruth, MomentumSpace};
use crate::io::GeneratorFile;
use crate::linalg::{c, unit, CMat, CVec, I, ONE};

/// Pure dephasing on `M_2`: `Δ = ad(p)²` with `p = diag(i, −i)`.
pub fn dephasing_n2() -> Result<GeneratorFile> {
    let sa = StateAlgebra::tracial(2);
    let p = CMat::from_diagonal(&CVec::from_vec(vec![I, -I]));
    exact(&sa, vec![p], CMat::zeros(2, 2))
}

/// `Ad(W) − id` for the cyclic shift `W` on `M_3`, tracial state.
pub fn cyclic_shift_n3() -> Result<GeneratorFile> {
    let sa = StateAlgebra::tracial(3);
    let mut w = CMat::zeros(3, 3);
    for k in 0..3 {
        w[((k + 1) % 3, k)] = ONE;
    }
    let l = &Superoperator::conj_by(&w) - &Superoperator::identity(3);
    Ok(GeneratorFile::new(&sa, &l, None))
}

/// Zero-potential Laplacian on `M_3` with `ω = diag(1/2, 1/4, 1/4)`.
pub fn free_laplacian_n3() -> Result<GeneratorFile> {
    let sa = StateAlgebra::diagonal(&[0.5, 0.25, 0.25])?;
    let p1 = CMat::from_diagonal(&CVec::from_vec(vec![I, -I, -I]));
    let p2 = (unit(3, 1, 2) - unit(3, 2, 1)) * c(0.5);
    exact(&sa, vec![p1, p2], CMat::zeros(3, 3))
}

/// A pure inner derivation `ad(v)` on `M_2` with no momenta.
pub fn pure_potential_n2() -> Result<GeneratorFile> {
    let sa = StateAlgebra::tracial(2);
    let v = CMat::from_diagonal(&CVec::from_vec(vec![I * 0.5, -I * 0.5]));
    exact(&sa, Vec::new(), v)
}

fn exact(sa: &StateAlgebra, basis: Vec<CMat>, v: CMat) -> Result<GeneratorFile> {
    let momenta = MomentumSpace::new(sa, basis)?;
    let l = make_generator(sa, &momenta, &v)?;
    Ok(GeneratorFile::new(sa, &l, Some(&GroundTruth { momenta, v })))
}

/// All fixtures with their file names.
pub fn all() -> Result<Vec<(&'static str, GeneratorFile)>> {
    Ok(vec![
        ("dephasing_n2.json", dephasing_n2()?),
        ("cyclic_shift_n3.json", cyclic_shift_n3()?),
        ("free_laplacian_n3.json", free_laplacian_n3()?),
        ("pure_potential_n2.json", pure_potential_n2()?),
    ])
}
