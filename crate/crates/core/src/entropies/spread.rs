use serde::Serialize;

use super::basic::{dmax, min_entropy};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, support_cutoff, tensor, ComplexMatrix};
use crate::states::PureVector;

/// Rank-based and min-entropy spread of a spectrum, optionally with the
/// four quantities of the spread inequality k₂ + k₃ − k₄ ≤ k₁.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadReport {
    /// log₂ rank.
    pub h0: f64,
    /// −log₂ λ_max.
    pub h_inf: f64,
    pub spread: f64,
    /// D_max(Φ_RC ‖ Φ_R ⊗ Φ_C).
    pub k1: Option<f64>,
    /// H_∞(Φ_C).
    pub k2: Option<f64>,
    /// H_∞(Φ_R).
    pub k3: Option<f64>,
    /// H_∞(Φ_RC).
    pub k4: Option<f64>,
}

/// H₀ − H_∞ of a positive semidefinite operator.
pub fn entanglement_spread(psi_a: &ComplexMatrix) -> Result<SpreadReport> {
    let e = eig_hermitian(psi_a)?;
    let lmax = e.max();
    let cut = support_cutoff(lmax);
    let rank = e.eigenvalues.iter().filter(|&&l| l > cut).count();
    if rank == 0 {
        return Err(Error::Input("spread of a zero operator".into()));
    }
    let h0 = (rank as f64).log2();
    let h_inf = -lmax.log2();
    Ok(SpreadReport {
        h0,
        h_inf,
        spread: (h0 - h_inf).max(0.0),
        k1: None,
        k2: None,
        k3: None,
        k4: None,
    })
}

/// Spread of Φ_C together with k₁…k₄ for a pure state on registers
/// including `r` and `c` (the rest are traced out).
pub fn spread_ks(phi: &PureVector, r: &str, c: &str) -> Result<SpreadReport> {
    let rc = phi.marginal(&[r, c])?;
    let rho_r = phi.marginal(&[r])?;
    let rho_c = phi.marginal(&[c])?;
    let prod = tensor(rho_r.matrix(), rho_c.matrix())?;
    let k1 = dmax(rc.matrix(), &prod)?
        .value
        .finite()
        .ok_or_else(|| Error::Input("supp Φ_RC is not contained in supp Φ_R ⊗ Φ_C".into()))?;
    let mut report = entanglement_spread(rho_c.matrix())?;
    report.k1 = Some(k1);
    report.k2 = Some(min_entropy(rho_c.matrix())?);
    report.k3 = Some(min_entropy(rho_r.matrix())?);
    report.k4 = Some(min_entropy(rc.matrix())?);
    Ok(report)
}
