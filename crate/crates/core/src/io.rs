//! JSON file format for generators, states and unitaries.
//!
//! Complex matrices are nested row arrays of `[re, im]` pairs. Superoperator
//! matrices act on column-stacked vectorizations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{StateAlgebra, Superoperator, Tolerances};
use crate::error::{Error, Result};
use crate::generators::{GroundTruth, MomentumSpace};
use crate::linalg::{CMat, C64};

pub const VEC_CONVENTION: &str = "column-major";

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn encode_matrix(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn decode_matrix(rows: &MatrixJson, what: &str) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("{what}: ragged rows")));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        let [re, im] = rows[i][j];
        C64::new(re, im)
    }))
}

fn decode_square(rows: &MatrixJson, size: usize, what: &str) -> Result<CMat> {
    let m = decode_matrix(rows, what)?;
    if m.nrows() != size || m.ncols() != size {
        return Err(Error::Parse(format!(
            "{what}: expected {size}x{size}, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthJson {
    pub momenta: Vec<MatrixJson>,
    pub v: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub n: usize,
    pub omega: MatrixJson,
    #[serde(rename = "L")]
    pub l: MatrixJson,
    pub vec_convention: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruthJson>,
}

/// A generator file after validation.
#[derive(Debug, Clone)]
pub struct LoadedGenerator {
    pub sa: StateAlgebra,
    pub l: Superoperator,
    pub ground_truth: Option<GroundTruth>,
}

impl GeneratorFile {
    pub fn new(sa: &StateAlgebra, l: &Superoperator, gt: Option<&GroundTruth>) -> Self {
        GeneratorFile {
            n: sa.n(),
            omega: encode_matrix(sa.omega()),
            l: encode_matrix(l.mat()),
            vec_convention: VEC_CONVENTION.to_string(),
            ground_truth: gt.map(|g| GroundTruthJson {
                momenta: g.momenta.basis().iter().map(encode_matrix).collect(),
                v: encode_matrix(&g.v),
            }),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: GeneratorFile = serde_json::from_str(text)?;
        if f.vec_convention != VEC_CONVENTION {
            return Err(Error::ConventionMismatch(f.vec_convention));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("finite floats serialize");
        s.push('\n');
        s
    }

    /// Build the state algebra and superoperator, with the given tolerances.
    pub fn resolve(&self, tol: Tolerances) -> Result<LoadedGenerator> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Parse("n must be positive".into()));
        }
        let omega = decode_square(&self.omega, n, "omega")?;
        let lmat = decode_square(&self.l, n * n, "L")?;
        let sa = StateAlgebra::with_tolerances(n, omega, tol)?;
        let l = Superoperator::from_matrix(n, lmat)?;
        let ground_truth = match &self.ground_truth {
            None => None,
            Some(g) => {
                let basis = g
                    .momenta
                    .iter()
                    .enumerate()
                    .map(|(k, m)| decode_square(m, n, &format!("ground_truth.momenta[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                Some(GroundTruth {
                    momenta: MomentumSpace::new(&sa, basis)?,
                    v: decode_square(&g.v, n, "ground_truth.v")?,
                })
            }
        };
        Ok(LoadedGenerator { sa, l, ground_truth })
    }
}

/// Load a unitary, either a bare matrix or an object with a `"u"` field.
pub fn parse_unitary(text: &str) -> Result<CMat> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum UnitaryJson {
        Bare(MatrixJson),
        Wrapped { u: MatrixJson },
    }
    let parsed: UnitaryJson = serde_json::from_str(text)?;
    let rows = match parsed {
        UnitaryJson::Bare(m) | UnitaryJson::Wrapped { u: m } => m,
    };
    let u = decode_matrix(&rows, "u")?;
    if u.nrows() != u.ncols() {
        return Err(Error::Parse(format!("u: expected square matrix, found {}x{}", u.nrows(), u.ncols())));
    }
    Ok(u)
}
