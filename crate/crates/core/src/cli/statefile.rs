//! JSON state files: registers plus a row-major density matrix or a state
//! vector, every entry an `[re, im]` pair.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64};
use crate::states::{PureVector, QuantumState, RegisterLayout};

use super::report::round_sig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterSpec {
    pub label: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format_version: u32,
    pub registers: Vec<RegisterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

/// A loaded state file.
#[derive(Clone, Debug)]
pub enum LoadedState {
    Mixed(QuantumState),
    Pure(PureVector),
}

impl LoadedState {
    pub fn density(&self) -> QuantumState {
        match self {
            LoadedState::Mixed(s) => s.clone(),
            LoadedState::Pure(p) => p.density(),
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        match self {
            LoadedState::Mixed(s) => s.layout(),
            LoadedState::Pure(p) => p.layout(),
        }
    }

    /// The state as a vector: pure files directly, rank-one matrices
    /// through their leading eigenvector.
    pub fn to_pure(&self) -> Result<PureVector> {
        match self {
            LoadedState::Pure(p) => Ok(p.clone()),
            LoadedState::Mixed(s) => {
                let e = eig_hermitian(s.matrix())?;
                let top = e.max();
                if (top - 1.0).abs() > 1e-9 {
                    return Err(Error::Input(format!(
                        "a pure state is required but the largest eigenvalue is {top}"
                    )));
                }
                PureVector::new(s.layout().clone(), e.vector(e.dim() - 1))
            }
        }
    }
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter()
        .map(|z| [round_sig(z.re), round_sig(z.im)])
        .collect()
}

fn specs(layout: &RegisterLayout) -> Vec<RegisterSpec> {
    layout
        .registers()
        .iter()
        .map(|r| RegisterSpec {
            label: r.label.clone(),
            dim: r.dim,
        })
        .collect()
}

impl StateFile {
    pub fn from_mixed(state: &QuantumState) -> Self {
        StateFile {
            format_version: FORMAT_VERSION,
            registers: specs(state.layout()),
            matrix: Some(pairs(state.matrix().data())),
            vector: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_pure(state: &PureVector) -> Self {
        StateFile {
            format_version: FORMAT_VERSION,
            registers: specs(state.layout()),
            matrix: None,
            vector: Some(pairs(state.amplitudes())),
            metadata: BTreeMap::new(),
        }
    }

    /// Validate into a state object.
    pub fn into_state(self) -> Result<LoadedState> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "field format_version: unsupported version {}, expected {FORMAT_VERSION}",
                self.format_version
            )));
        }
        if self.registers.is_empty() {
            return Err(Error::Schema(
                "field registers: at least one register is required".into(),
            ));
        }
        let layout = RegisterLayout::new(self.registers.iter().map(|r| (r.label.clone(), r.dim)))
            .map_err(|e| Error::Schema(format!("field registers: {e}")))?;
        let d = layout.total_dim();
        let complex = |v: Vec<[f64; 2]>| -> Vec<C64> {
            v.into_iter().map(|[re, im]| C64::new(re, im)).collect()
        };
        match (self.matrix, self.vector) {
            (Some(m), None) => {
                if m.len() != d * d {
                    return Err(Error::Dimension(format!(
                        "field matrix: registers give dimension {d}, so {} entries are needed, found {}",
                        d * d,
                        m.len()
                    )));
                }
                let m = ComplexMatrix::from_vec(d, d, complex(m))?;
                Ok(LoadedState::Mixed(QuantumState::new(layout, m)?))
            }
            (None, Some(v)) => {
                if v.len() != d {
                    return Err(Error::Dimension(format!(
                        "field vector: registers give dimension {d}, found {} entries",
                        v.len()
                    )));
                }
                Ok(LoadedState::Pure(PureVector::new(layout, complex(v))?))
            }
            (Some(_), Some(_)) => Err(Error::Schema(
                "fields matrix and vector are both present; give exactly one".into(),
            )),
            (None, None) => Err(Error::Schema(
                "one of the fields matrix or vector is required".into(),
            )),
        }
    }
}

/// Parse state-file text; `origin` names the source in error messages.
pub fn parse_state(text: &str, origin: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| {
        Error::Schema(format!(
            "{origin}: line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    file.into_state().map_err(|e| match e {
        Error::Schema(m) => Error::Schema(format!("{origin}: {m}")),
        Error::Dimension(m) => Error::Dimension(format!("{origin}: {m}")),
        Error::Input(m) => Error::Input(format!("{origin}: {m}")),
        other => other,
    })
}

pub fn load_state(path: &Path) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text, &path.display().to_string())
}

pub fn save_state(file: &StateFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(file)
        .map_err(|e| Error::Numeric(format!("cannot serialize state: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}
