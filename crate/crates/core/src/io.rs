//! JSON file formats for states and sub-concurrence values.
//!
//! ```json
//! {"kind":"pure","dims":[2,2],"amplitudes":[[0,0],[0.7071067811865476,0],[0.7071067811865476,0],[0,0]]}
//! {"kind":"mixed","dims":[2],"rows":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}
//! {"kind":"wstate","coeffs":[[0.5,0],[0.5,0],[0.5,0],[0.5,0]]}
//! {"kind":"sub_values","bipartite":{"1":0.9,"12":0.7},"tripartite_sq":{"12|3|4":1.25}}
//! ```
//!
//! Complex numbers are `[re, im]` pairs; amplitude and row order is row-major
//! in party order with party 1 most significant.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{format_block, parse_block, Partition};
use crate::tensor::{density_from_pure, DensityMatrix, PureState, SubsystemSet};
use crate::wclass::WCoefficients;
use crate::{Error, Result};

type Pair = [f64; 2];

fn to_complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn to_pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

/// On-disk state description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateFile {
    Pure { dims: Vec<usize>, amplitudes: Vec<Pair> },
    Mixed { dims: Vec<usize>, rows: Vec<Vec<Pair>> },
    Wstate { coeffs: Vec<Pair> },
}

/// A validated state loaded from a [`StateFile`].
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
    W(WCoefficients),
}

impl LoadedState {
    pub fn n_parties(&self) -> usize {
        match self {
            LoadedState::Pure(p) => p.n_parties(),
            LoadedState::Mixed(m) => m.n_parties(),
            LoadedState::W(w) => w.n(),
        }
    }

    /// The pure state, if the input describes one.
    pub fn as_pure(&self) -> Option<PureState> {
        match self {
            LoadedState::Pure(p) => Some(p.clone()),
            LoadedState::W(w) => Some(w.to_state()),
            LoadedState::Mixed(_) => None,
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            LoadedState::Mixed(m) => m.clone(),
            other => density_from_pure(&other.as_pure().expect("pure variant")),
        }
    }
}

impl StateFile {
    pub fn from_pure(psi: &PureState) -> Self {
        StateFile::Pure {
            dims: psi.dims().to_vec(),
            amplitudes: psi.amplitudes().iter().map(to_pair).collect(),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| to_pair(&m[(i, j)])).collect())
            .collect();
        StateFile::Mixed {
            dims: rho.dims().to_vec(),
            rows,
        }
    }

    pub fn from_w(a: &WCoefficients) -> Self {
        StateFile::Wstate {
            coeffs: a.coeffs().iter().map(to_pair).collect(),
        }
    }

    /// Validates and converts into library types.
    pub fn load(&self) -> Result<LoadedState> {
        match self {
            StateFile::Pure { dims, amplitudes } => Ok(LoadedState::Pure(PureState::new(
                dims.clone(),
                amplitudes.iter().map(to_complex).collect(),
            )?)),
            StateFile::Mixed { dims, rows } => {
                let side = rows.len();
                if rows.iter().any(|r| r.len() != side) {
                    return Err(Error::Invariant("density matrix rows are not square".into()));
                }
                let m = DMatrix::from_fn(side, side, |i, j| to_complex(&rows[i][j]));
                Ok(LoadedState::Mixed(DensityMatrix::new(dims.clone(), m)?))
            }
            StateFile::Wstate { coeffs } => Ok(LoadedState::W(WCoefficients::new(
                coeffs.iter().map(to_complex).collect(),
            )?)),
        }
    }
}

/// Parses JSON text into a validated state. Malformed JSON is a
/// [`Error::Parse`]; well-formed but invalid states keep their own error.
pub fn parse_state(text: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.load()
}

/// The `"kind"` tag of a sub-values file; `"sub_values"` is the only value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubValuesKind {
    #[default]
    SubValues,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubValuesFile {
    pub kind: SubValuesKind,
    /// Bipartite concurrence lower bounds keyed by block text (`"1"`, `"12"`).
    #[serde(default)]
    pub bipartite: BTreeMap<String, f64>,
    /// Squared tripartite concurrence lower bounds keyed by partition text.
    #[serde(default)]
    pub tripartite_sq: BTreeMap<String, f64>,
}

/// Sub-concurrence values resolved against a party count.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubValues {
    pub bipartite: BTreeMap<SubsystemSet, f64>,
    pub tripartite_sq: BTreeMap<Partition, f64>,
}

impl SubValuesFile {
    pub fn resolve(&self, n: usize) -> Result<SubValues> {
        let bipartite = self
            .bipartite
            .iter()
            .map(|(k, &v)| Ok((parse_block(k, n)?, v)))
            .collect::<Result<_>>()?;
        let tripartite_sq = self
            .tripartite_sq
            .iter()
            .map(|(k, &v)| Ok((Partition::parse(k, n)?, v)))
            .collect::<Result<_>>()?;
        Ok(SubValues {
            bipartite,
            tripartite_sq,
        })
    }

    pub fn from_values(n: usize, values: &SubValues) -> Self {
        SubValuesFile {
            kind: SubValuesKind::SubValues,
            bipartite: values
                .bipartite
                .iter()
                .map(|(b, &v)| (format_block(*b, n), v))
                .collect(),
            tripartite_sq: values.tripartite_sq.iter().map(|(p, &v)| (p.to_string(), v)).collect(),
        }
    }
}

pub fn parse_sub_values(text: &str, n: usize) -> Result<SubValues> {
    let file: SubValuesFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.resolve(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pure = format!(r#"{{"kind":"pure","dims":[2,2],"amplitudes":[[0,0],[{h},0],[{h},0],[0,0]]}}"#);
        assert!(matches!(parse_state(&pure).unwrap(), LoadedState::Pure(_)));
        let mixed = r#"{"kind":"mixed","dims":[2],"rows":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        assert!(matches!(parse_state(mixed).unwrap(), LoadedState::Mixed(_)));
        let w = r#"{"kind":"wstate","coeffs":[[0.5,0],[0.5,0],[0,0.5],[0.5,0]]}"#;
        let LoadedState::W(a) = parse_state(w).unwrap() else {
            panic!()
        };
        assert_eq!(a.n(), 4);
    }

    #[test]
    fn distinguishes_parse_and_invariant_errors() {
        assert!(matches!(parse_state("{not json"), Err(Error::Parse(_))));
        assert!(matches!(parse_state(r#"{"kind":"nope"}"#), Err(Error::Parse(_))));
        let unnormalized = r#"{"kind":"pure","dims":[2],"amplitudes":[[1,0],[1,0]]}"#;
        assert!(matches!(parse_state(unnormalized), Err(Error::Invariant(_))));
    }

    #[test]
    fn state_file_round_trip() {
        let a = WCoefficients::uniform(3);
        let text = serde_json::to_string(&StateFile::from_pure(&a.to_state())).unwrap();
        assert_eq!(parse_state(&text).unwrap().as_pure().unwrap(), a.to_state());
        let rho = density_from_pure(&a.to_state());
        let text = serde_json::to_string(&StateFile::from_density(&rho)).unwrap();
        assert_eq!(parse_state(&text).unwrap().to_density(), rho);
    }

    #[test]
    fn sub_values() {
        let text = r#"{"kind":"sub_values","bipartite":{"1":0.9,"23":0.5},"tripartite_sq":{"12|3|4":1.25}}"#;
        let v = parse_sub_values(text, 4).unwrap();
        assert_eq!(v.bipartite[&SubsystemSet::from_parties(&[2, 3]).unwrap()], 0.5);
        assert_eq!(v.tripartite_sq[&Partition::parse("12|3|4", 4).unwrap()], 1.25);
        let back = SubValuesFile::from_values(4, &v);
        assert_eq!(back.resolve(4).unwrap(), v);
        assert!(parse_sub_values(r#"{"kind":"sub_values","bipartite":{"9":1.0}}"#, 4).is_err());
    }
}
