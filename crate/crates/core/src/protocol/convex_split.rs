use serde::Serialize;

use crate::entropies::{dmax, fidelity, Bits};
use crate::error::{Error, Result};
use crate::linalg::{
    checked_dim_product, dim_cap, permute_matrix, support_projector, tensor, ComplexMatrix,
};
use crate::states::{QuantumState, RegisterLayout};

/// Slot label for the j-th copy (1-based) of register `q`.
pub fn slot_label(q: &str, j: usize) -> String {
    format!("{q}{j}")
}

fn check_support(rho_q: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<()> {
    let n = sigma.rows();
    let outside = &ComplexMatrix::identity(n) - &support_projector(sigma)?;
    let w = outside.trace_product(rho_q).re;
    if w > 1e-9 {
        return Err(Error::Input(format!(
            "supp(rho_Q) is not contained in supp(sigma_Q): weight {w:e} outside"
        )));
    }
    Ok(())
}

/// τ = (1/n) Σ_j ρ_{PQ_j} ⊗ σ^{⊗(n−1)} on the registers of `rho_pq` other
/// than `q` (in layout order), followed by Q₁…Q_n labelled `{q}1…{q}n`.
pub fn convex_split_state(
    rho_pq: &QuantumState,
    q: &str,
    sigma_q: &ComplexMatrix,
    n: usize,
) -> Result<QuantumState> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let dq = rho_pq.layout().dim_of(q)?;
    if sigma_q.rows() != dq || !sigma_q.is_square() {
        return Err(Error::Dimension(format!(
            "sigma_Q is {}x{} but register {q} has dimension {dq}",
            sigma_q.rows(),
            sigma_q.cols()
        )));
    }
    let p_labels = rho_pq.layout().complement(&[q]);
    let rho_q = rho_pq.marginal(&[q])?;
    check_support(rho_q.matrix(), sigma_q)?;

    let dp = rho_pq.dim() / dq;
    let mut dims = vec![dq; n];
    dims.insert(0, dp);
    let total = checked_dim_product(
        &dims,
        dim_cap(),
        &format!("convex-split state with n = {n}"),
    )?;

    let mut order = p_labels.clone();
    order.push(q);
    let base = rho_pq.permute_registers(&order)?.into_matrix();
    // ρ_{PQ₁} ⊗ σ^{⊗(n−1)}
    let mut first = base;
    for _ in 1..n {
        first = tensor(&first, sigma_q)?;
    }
    let mut acc = ComplexMatrix::zeros(total, total);
    for j in 0..n {
        // output factor (1 + t) is Q_{t+1}; slot j must come from input factor 1
        let mut perm = vec![0usize; n + 1];
        let mut next = 2;
        for t in 0..n {
            perm[1 + t] = if t == j {
                1
            } else {
                let v = next;
                next += 1;
                v
            };
        }
        let moved = permute_matrix(&first, &dims, &perm)?;
        acc = &acc + &moved;
    }
    let acc = acc.scale(1.0 / n as f64);

    let mut regs: Vec<(String, usize)> = p_labels
        .iter()
        .map(|l| (l.to_string(), rho_pq.layout().dim_of(l).unwrap()))
        .collect();
    regs.extend((1..=n).map(|j| (slot_label(q, j), dq)));
    QuantumState::new(RegisterLayout::new(regs)?, acc.hermitian_part())
}

/// Fidelity of the convex-split state against the all-σ product, with the
/// bounds guaranteed by convex splitting and its smoothed variant.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexSplitCheck {
    pub n: usize,
    /// D_max(ρ_PQ ‖ ρ_P ⊗ σ_Q).
    pub k: f64,
    /// F²(τ, τ_P ⊗ σ^{⊗n}).
    pub fidelity_sq: f64,
    /// 1 − 2^k / n.
    pub lower_bound: f64,
    /// 1 − (√δ + 2ε)² with δ = 2^{k′}/n from the smoothed state, when one was supplied.
    pub smoothed_lower_bound: Option<f64>,
    pub k_smoothed: Option<f64>,
}

fn product_reference(
    rho_pq: &QuantumState,
    q: &str,
    sigma_q: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let p_labels = rho_pq.layout().complement(&[q]);
    let rho_p = rho_pq.marginal(&p_labels)?;
    tensor(rho_p.matrix(), sigma_q)
}

fn pq_matrix(rho_pq: &QuantumState, q: &str) -> Result<ComplexMatrix> {
    let mut order = rho_pq.layout().complement(&[q]);
    order.push(q);
    Ok(rho_pq.permute_registers(&order)?.into_matrix())
}

/// Direct evaluation of the convex-split fidelity at `n` copies.
/// `smoothed` is an optional ρ′_PQ (same layout as `rho_pq`) inside the
/// purified-distance ball of radius `eps` around ρ_PQ.
pub fn convex_split_check(
    rho_pq: &QuantumState,
    q: &str,
    sigma_q: &ComplexMatrix,
    n: usize,
    smoothed: Option<(&QuantumState, f64)>,
) -> Result<ConvexSplitCheck> {
    let tau = convex_split_state(rho_pq, q, sigma_q, n)?;
    let p_labels: Vec<String> = rho_pq
        .layout()
        .complement(&[q])
        .iter()
        .map(|s| s.to_string())
        .collect();
    let p_refs: Vec<&str> = p_labels.iter().map(|s| s.as_str()).collect();
    let tau_p = tau.marginal(&p_refs)?;
    let mut reference = tau_p.into_matrix();
    for _ in 0..n {
        reference = tensor(&reference, sigma_q)?;
    }
    let f = fidelity(tau.matrix(), &reference)?;
    let k = match dmax(
        &pq_matrix(rho_pq, q)?,
        &product_reference(rho_pq, q, sigma_q)?,
    )?
    .value
    {
        Bits::Finite(v) => v,
        Bits::Infinite => f64::INFINITY,
    };
    let (smoothed_lower_bound, k_smoothed) = match smoothed {
        Some((rho_s, eps)) => {
            let ks = dmax(
                &pq_matrix(rho_s, q)?,
                &product_reference(rho_s, q, sigma_q)?,
            )?
            .value
            .to_f64();
            let delta = ks.exp2() / n as f64;
            (Some(1.0 - (delta.sqrt() + 2.0 * eps).powi(2)), Some(ks))
        }
        None => (None, None),
    };
    Ok(ConvexSplitCheck {
        n,
        k,
        fidelity_sq: f * f,
        lower_bound: 1.0 - k.exp2() / n as f64,
        smoothed_lower_bound,
        k_smoothed,
    })
}
