//! Simulation of state redistribution by convex split and
//! position-based decoding.
//!
//! Alice holds A and C, Bob holds B, the reference holds R. Alice and Bob
//! share n copies of a purification of σ_C. After Alice's Uhlmann isometry,
//! the index split and the transfer of J₁, Bob swaps the announced block of
//! C registers to the front and locates the slot correlated with B by a
//! pretty-good measurement built from the optimal hypothesis test for
//! Φ_BC against Φ_B ⊗ σ_C.

mod convex_split;
mod decoder;
mod resources;
mod run;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::states::PureVector;

pub use convex_split::{convex_split_check, convex_split_state, slot_label, ConvexSplitCheck};
pub use decoder::{
    decoder_isometry, isometry_defect, place_on_slot, DecodingReport, PositionOperators,
};
pub use run::{run_protocol, run_protocol_injected, run_protocol_reversed};

/// Register labels playing the roles R, A, B, C in the input vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub r: String,
    pub a: String,
    pub b: String,
    pub c: String,
}

impl Default for Partition {
    fn default() -> Self {
        Partition {
            r: "R".into(),
            a: "A".into(),
            b: "B".into(),
            c: "C".into(),
        }
    }
}

impl Partition {
    /// Parse "R,A,B,C"-style label lists.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 || parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Input(format!(
                "partition needs four labels R,A,B,C, got {s:?}"
            )));
        }
        Ok(Partition {
            r: parts[0].into(),
            a: parts[1].into(),
            b: parts[2].into(),
            c: parts[3].into(),
        })
    }
}

/// Protocol parameters. `n` and `b` left as `None` (or `derive_params`)
/// are derived as n = ⌈2^k/ε₁²⌉ and b = ⌈ε₂²·2^{D_H}⌉ clamped to [1, n].
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub partition: Partition,
    /// Reference state on C; defaults to Φ_C.
    pub sigma_c: Option<ComplexMatrix>,
    pub n: Option<usize>,
    pub b: Option<usize>,
    pub eps1: f64,
    pub eps2: f64,
    pub seed: u64,
    pub derive_params: bool,
    /// A state Φ′_RBC within ε₁ of Φ_RBC (e.g. a smooth_dmax certificate)
    /// used for k instead of Φ_RBC.
    pub smoothed_rbc: Option<ComplexMatrix>,
    /// Replace Alice's isometry output by the exact μ.
    pub inject_mu: bool,
    pub store_states: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            partition: Partition::default(),
            sigma_c: None,
            n: None,
            b: None,
            eps1: 0.1,
            eps2: 0.1,
            seed: 0,
            derive_params: false,
            smoothed_rbc: None,
            inject_mu: false,
            store_states: false,
        }
    }
}

/// Whether the run's parameters carry the 3ε₁ + 6ε₂ guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Guarantee,
    TrendOnly,
}

/// Norm and isometry residuals after one step.
#[derive(Clone, Debug, Serialize)]
pub struct StepCheck {
    pub step: String,
    pub norm_defect: f64,
    pub operator_defect: Option<f64>,
}

/// Stored intermediate vector.
#[derive(Clone, Debug, Serialize)]
pub struct StepState {
    pub step: String,
    pub registers: Vec<(String, usize)>,
    pub amplitudes: Vec<C64>,
}

impl StepState {
    fn from_vector(step: &str, psi: &PureVector) -> Self {
        StepState {
            step: step.to_string(),
            registers: psi
                .layout()
                .registers()
                .iter()
                .map(|r| (r.label.clone(), r.dim))
                .collect(),
            amplitudes: psi.amplitudes().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolTranscript {
    pub reversed: bool,
    pub mu_injected: bool,
    /// D_max(Φ_RBC ‖ Φ_RB ⊗ σ_C), or of the supplied smoothed state.
    pub k: f64,
    /// D_H^{ε₂²}(Φ_BC ‖ Φ_B ⊗ σ_C).
    pub dh_value: f64,
    pub n: usize,
    pub b: usize,
    pub n_from_formula: bool,
    pub b_from_formula: bool,
    /// ⌊(n − 1)/b⌋ + 1.
    pub j1_dim: usize,
    /// ½ log₂⌊n/b⌋.
    pub qubits_sent: f64,
    #[serde(rename = "measured_P")]
    pub measured_p: f64,
    pub regime: Regime,
    #[serde(rename = "guaranteed_P")]
    pub guaranteed_p: Option<f64>,
    pub guarantee_met: Option<bool>,
    /// F(ξ_{RBC₁…C_n}, μ_{RBC₁…C_n}), attained by Alice's isometry.
    pub split_fidelity: f64,
    /// √min(1, 2^k/n): convex-split contribution to the distance.
    pub split_bound: f64,
    /// √(2x − x²) with x the exact decoding error.
    pub decode_bound: f64,
    /// min(1, split_bound + decode_bound).
    pub derived_bound: f64,
    /// min(1, 3·split_bound + 6ε₂).
    pub loose_bound: f64,
    pub decode_success_prob: f64,
    /// Weight of the empty decoder outcome.
    pub no_output_mass: f64,
    pub decoding: DecodingReport,
    pub steps: Vec<StepCheck>,
    pub max_residual: f64,
    pub reversal_leakage: Option<f64>,
    /// Distance reached by the forward mirrored run before it is undone.
    pub mirror_measured_p: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub seed: u64,
    pub extras: BTreeMap<String, f64>,
    pub step_states: Option<Vec<StepState>>,
}

/// (j₁, j₂) with j₁ = ⌊(j−1)/b⌋ and j₂ = j mod b, or b when that is 0.
pub fn index_split(j: usize, n: usize, b: usize) -> Result<(usize, usize)> {
    if b == 0 || j == 0 || j > n {
        return Err(Error::Parameter(format!(
            "index split needs 1 <= j <= n and b >= 1, got j = {j}, n = {n}, b = {b}"
        )));
    }
    let r = j % b;
    Ok(((j - 1) / b, if r == 0 { b } else { r }))
}

/// Achievable cost: the smaller of the two directions.
pub fn best_cost(forward: &ProtocolTranscript, reversed: &ProtocolTranscript) -> f64 {
    forward.qubits_sent.min(reversed.qubits_sent)
}
