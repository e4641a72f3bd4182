use serde::Serialize;

use super::resources::{c_label, mu_vector, SigmaPurification};
use crate::error::{Error, Result};
use crate::linalg::{
    checked_dim_product, dim_cap, eig_hermitian, inner, matrix_function, permute_matrix,
    support_projector, tensor, ComplexMatrix, MatrixFunction, C64,
};
use crate::states::PureVector;

/// Π_BC placed on (B, C_{j+1}) inside [B, C₁, …, C_b], every other C slot
/// filled with `filler`.
pub fn place_on_slot(
    op_bc: &ComplexMatrix,
    filler: &ComplexMatrix,
    d_b: usize,
    d_c: usize,
    b: usize,
    j: usize,
) -> Result<ComplexMatrix> {
    if j >= b {
        return Err(Error::Dimension(format!(
            "slot {j} out of range for b = {b}"
        )));
    }
    let mut m = op_bc.clone();
    for _ in 1..b {
        m = tensor(&m, filler)?;
    }
    let mut dims = vec![d_b];
    dims.extend(std::iter::repeat_n(d_c, b));
    let mut perm = vec![0usize; b + 1];
    let mut next = 2;
    for t in 0..b {
        perm[1 + t] = if t == j {
            1
        } else {
            next += 1;
            next - 1
        };
    }
    permute_matrix(&m, &dims, &perm)
}

/// The b position-based tests on [B, C₁, …, C_b].
#[derive(Clone, Debug)]
pub struct PositionOperators {
    pub pi_single: ComplexMatrix,
    pub pi_list: Vec<ComplexMatrix>,
    pub pi_sum: ComplexMatrix,
    pub pi_support: ComplexMatrix,
    pub d_b: usize,
    pub d_c: usize,
}

impl PositionOperators {
    pub fn new(pi_bc: &ComplexMatrix, d_b: usize, d_c: usize, b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::Parameter("b must be positive".into()));
        }
        if pi_bc.rows() != d_b * d_c || !pi_bc.is_square() {
            return Err(Error::Dimension(format!(
                "test operator is {}x{}, expected side {}",
                pi_bc.rows(),
                pi_bc.cols(),
                d_b * d_c
            )));
        }
        let e = eig_hermitian(pi_bc)?;
        if e.min() < -1e-9 || e.max() > 1.0 + 1e-9 {
            return Err(Error::Input(format!(
                "test operator spectrum [{}, {}] leaves [0, 1]",
                e.min(),
                e.max()
            )));
        }
        let id = ComplexMatrix::identity(d_c);
        let pi_list = (0..b)
            .map(|j| place_on_slot(pi_bc, &id, d_b, d_c, b, j))
            .collect::<Result<Vec<_>>>()?;
        let mut pi_sum = ComplexMatrix::zeros(pi_list[0].rows(), pi_list[0].rows());
        for p in &pi_list {
            pi_sum = &pi_sum + p;
        }
        let pi_support = support_projector(&pi_sum)?;
        Ok(PositionOperators {
            pi_single: pi_bc.clone(),
            pi_list,
            pi_sum,
            pi_support,
            d_b,
            d_c,
        })
    }

    pub fn b(&self) -> usize {
        self.pi_list.len()
    }

    /// Π^{−1/2} Π_j Π^{−1/2} for j = 1…b, then I − Π⁰ for the empty outcome.
    pub fn pgm_elements(&self) -> Result<Vec<ComplexMatrix>> {
        let inv = matrix_function(&self.pi_sum, MatrixFunction::InvSqrtOnSupport)?;
        let mut out: Vec<ComplexMatrix> = self
            .pi_list
            .iter()
            .map(|p| inv.matmul(p).matmul(&inv).hermitian_part())
            .collect();
        let n = self.pi_sum.rows();
        out.push(&ComplexMatrix::identity(n) - &self.pi_support);
        Ok(out)
    }
}

/// V_B = Σ_j √(Π^{−1/2}Π_jΠ^{−1/2}) ⊗ |j⟩ + √(I − Π⁰) ⊗ |0⟩ from
/// [B, C₁…C_b] to [B, C₁…C_b, J′₂] with J′₂ of dimension b + 1 (value 0 is
/// the empty outcome). Row index is s·(b+1) + j.
pub fn decoder_isometry(ops: &PositionOperators) -> Result<ComplexMatrix> {
    let b = ops.b();
    let elems = ops.pgm_elements()?;
    let d = ops.pi_sum.rows();
    let mut v = ComplexMatrix::zeros(d * (b + 1), d);
    for (k, e) in elems.iter().enumerate() {
        let branch = if k == b {
            e.clone()
        } else {
            matrix_function(e, MatrixFunction::Sqrt)?
        };
        let slot = if k == b { 0 } else { k + 1 };
        for s in 0..d {
            for t in 0..d {
                v[(s * (b + 1) + slot, t)] = branch[(s, t)];
            }
        }
    }
    let defect = isometry_defect(&v);
    if defect > 1e-8 {
        return Err(Error::Numeric(format!(
            "decoder fails V†V = I by {defect:e}"
        )));
    }
    Ok(v)
}

/// max |V†V − I| for tall V, max |VV† − I| for wide V.
pub fn isometry_defect(v: &ComplexMatrix) -> f64 {
    let g = if v.rows() >= v.cols() {
        v.adjoint().matmul(v)
    } else {
        v.matmul(&v.adjoint())
    };
    g.max_abs_diff(&ComplexMatrix::identity(g.rows()))
}

/// Decoder performance on the ideal post-swap state μ⁽²⁾.
#[derive(Clone, Debug, Serialize)]
pub struct DecodingReport {
    pub b: usize,
    /// 1 − Tr(Π_BC Φ_BC).
    pub type1_error: f64,
    /// Tr(Π_BC Φ_B ⊗ σ_C).
    pub type2_error: f64,
    /// F(V_B μ⁽²⁾ V_B†, μ⁽²⁾_f); absent when μ⁽²⁾ exceeds the dimension cap.
    pub fidelity: Option<f64>,
    /// (1/b) Σ_j Tr(P_j² ρ^j), the lower bound on the fidelity.
    pub success_bound: f64,
    /// Σ_{j′≠1} p_{j′|1} = 1 − success_bound.
    pub exact_error: f64,
    /// 2 Tr((I − Π₁)ρ¹) + 4 Σ_{j≠1} Tr(Π_j ρ¹).
    pub hayashi_nagaoka_terms: f64,
    /// 2ε₂² + 4b·2^{−D_H}.
    pub closed_form_bound: f64,
    /// p_{j′|1} for j′ = 0 (empty outcome), 1, …, b.
    pub confusion_row: Vec<f64>,
    pub fidelity_bound_holds: Option<bool>,
    pub decomposition_holds: Option<bool>,
}

/// Evaluate the decoder built from Π_BC on Φ (laid out R, A, B, C).
pub(crate) fn decoding_analysis(
    phi: &PureVector,
    sigma: &ComplexMatrix,
    purif: &SigmaPurification,
    pi_bc: &ComplexMatrix,
    dh_value: f64,
    eps2: f64,
    b: usize,
) -> Result<(DecodingReport, PositionOperators, ComplexMatrix)> {
    let d_b = phi.layout().dim_of("B")?;
    let d_c = phi.layout().dim_of("C")?;
    let ops = PositionOperators::new(pi_bc, d_b, d_c, b)?;
    let vb = decoder_isometry(&ops)?;
    let elems = ops.pgm_elements()?;
    let phi_bc = phi.marginal(&["B", "C"])?.into_matrix();
    let phi_b = phi.marginal(&["B"])?.into_matrix();
    let type1_error = 1.0 - pi_bc.trace_product(&phi_bc).re;
    let type2_error = pi_bc.trace_product(&tensor(&phi_b, sigma)?).re;

    let rho: Vec<ComplexMatrix> = (0..b)
        .map(|j| place_on_slot(&phi_bc, sigma, d_b, d_c, b, j))
        .collect::<Result<_>>()?;
    let q: Vec<f64> = (0..b).map(|j| elems[j].trace_product(&rho[j]).re).collect();
    let success_bound = q.iter().sum::<f64>() / b as f64;
    let mut confusion_row = vec![elems[b].trace_product(&rho[0]).re];
    confusion_row.extend((0..b).map(|j| elems[j].trace_product(&rho[0]).re));
    let n = ops.pi_sum.rows();
    let id = ComplexMatrix::identity(n);
    let mut hn = 2.0 * (&id - &ops.pi_list[0]).trace_product(&rho[0]).re;
    for p in &ops.pi_list[1..] {
        hn += 4.0 * p.trace_product(&rho[0]).re;
    }
    let closed_form_bound = 2.0 * eps2 * eps2 + 4.0 * b as f64 * (-dh_value).exp2();

    let fidelity = ideal_fidelity(phi, purif, &vb, b)?;
    let exact_error = 1.0 - success_bound;
    let report = DecodingReport {
        b,
        type1_error,
        type2_error,
        fidelity,
        success_bound,
        exact_error,
        hayashi_nagaoka_terms: hn,
        closed_form_bound,
        confusion_row,
        fidelity_bound_holds: fidelity.map(|f| f >= success_bound - 1e-9),
        decomposition_holds: fidelity.map(|f| 1.0 - f <= closed_form_bound + 1e-6),
    };
    Ok((report, ops, vb))
}

fn ideal_fidelity(
    phi: &PureVector,
    purif: &SigmaPurification,
    vb: &ComplexMatrix,
    b: usize,
) -> Result<Option<f64>> {
    let dims = phi.layout().dims();
    let mut f: Vec<usize> = dims.clone();
    f.push(b);
    f.extend(std::iter::repeat_n(purif.dc * purif.dl, b));
    f.push(b + 1);
    if checked_dim_product(&f, dim_cap(), "decoder check").is_err() {
        return Ok(None);
    }
    let mu = mu_vector(phi, purif, b, "J2")?;
    let mut targets: Vec<String> = vec!["B".into()];
    targets.extend((1..=b).map(c_label));
    let t: Vec<&str> = targets.iter().map(|s| s.as_str()).collect();
    let mut outs: Vec<(&str, usize)> = vec![("B", dims[2])];
    outs.extend(t[1..].iter().map(|l| (*l, purif.dc)));
    outs.push(("J2p", b + 1));
    let decoded = mu.apply(&t, vb, &outs)?;
    // μ_f: copy J₂ into J′₂ (stored as j₂ + 1)
    let ideal = mu.tensor(&PureVector::basis("J2p", b + 1, 0))?;
    let layout = ideal.layout().clone();
    let j2 = layout.index_of("J2")?;
    let jp = layout.index_of("J2p")?;
    let ideal = ideal.map_basis(|d| d[jp] = d[j2] + 1);
    let order: Vec<&str> = decoded.layout().labels();
    let ideal = ideal.permute_registers(&order)?;
    let ov: C64 = inner(ideal.amplitudes(), decoded.amplitudes());
    Ok(Some(ov.norm()))
}
