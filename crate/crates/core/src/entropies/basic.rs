use super::{Bits, CertificateKind, EntropyResult};
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, matrix_function, partial_trace, support_cutoff, support_projector, svd,
    ComplexMatrix, MatrixFunction,
};

/// Weight of ρ outside supp σ above which support-based quantities are +∞.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Fidelities at or below this are treated as exact zeros.
const FIDELITY_ZERO: f64 = 1e-14;

fn same_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::Dimension(format!(
            "operands are {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// F(ρ,σ) = ‖√ρ·√σ‖₁.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let a = matrix_function(rho, MatrixFunction::Sqrt)?;
    let b = matrix_function(sigma, MatrixFunction::Sqrt)?;
    Ok(svd(&a.matmul(&b))?.s.iter().sum())
}

/// P(ρ,σ) = √(1 − F²) with F clipped to [0, 1].
pub fn purified_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    Ok(fidelity_and_distance(rho, sigma)?.1)
}

pub fn fidelity_and_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<(f64, f64)> {
    let f = fidelity(rho, sigma)?;
    let fc = f.clamp(0.0, 1.0);
    Ok((f, (1.0 - fc * fc).sqrt()))
}

/// S(ρ) = −Tr ρ log ρ.
pub fn von_neumann(rho: &ComplexMatrix) -> Result<f64> {
    let e = eig_hermitian(rho)?;
    let cut = support_cutoff(e.max());
    Ok(-e
        .eigenvalues
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| l * l.log2())
        .sum::<f64>())
}

/// H_∞(ρ) = −log λ_max(ρ).
pub fn min_entropy(rho: &ComplexMatrix) -> Result<f64> {
    Ok(-eig_hermitian(rho)?.max().log2())
}

/// Weight of ρ outside the support of σ.
fn weight_outside_support(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let p = support_projector(sigma)?;
    Ok(rho.trace_re() - p.trace_product(rho).re)
}

/// D(ρ‖σ) = Tr ρ(log ρ − log σ); +∞ unless supp ρ ⊆ supp σ.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<Bits> {
    same_dims(rho, sigma)?;
    if weight_outside_support(rho, sigma)? > SUPPORT_TOL {
        return Ok(Bits::Infinite);
    }
    let log_sigma = matrix_function(sigma, MatrixFunction::Log2OnSupport)?;
    let cross = log_sigma.trace_product(rho).re;
    Ok(Bits::Finite(-von_neumann(rho)? - cross))
}

/// V(ρ‖σ) = Tr ρ(log ρ − log σ)² − D(ρ‖σ)².
pub fn relative_entropy_variance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let d = relative_entropy(rho, sigma)?
        .finite()
        .ok_or_else(|| Error::Input("variance undefined: supp ρ is not inside supp σ".into()))?;
    let l = &matrix_function(rho, MatrixFunction::Log2OnSupport)?
        - &matrix_function(sigma, MatrixFunction::Log2OnSupport)?;
    let second = rho.matmul(&l).trace_product(&l).re;
    Ok((second - d * d).max(0.0))
}

/// I(A:B) for ρ on A⊗B.
pub fn mutual_information(rho: &ComplexMatrix, da: usize, db: usize) -> Result<f64> {
    let dims = [da, db];
    let a = partial_trace(rho, &dims, &[0])?;
    let b = partial_trace(rho, &dims, &[1])?;
    Ok(von_neumann(&a)? + von_neumann(&b)? - von_neumann(rho)?)
}

/// I(A:B|C) = I(A:BC) − I(A:C) for ρ on A⊗B⊗C.
pub fn cond_mutual_information(
    rho: &ComplexMatrix,
    da: usize,
    db: usize,
    dc: usize,
) -> Result<f64> {
    let dims = [da, db, dc];
    let ac = partial_trace(rho, &dims, &[0, 2])?;
    let bc = partial_trace(rho, &dims, &[1, 2])?;
    let c = partial_trace(rho, &dims, &[2])?;
    Ok(von_neumann(&ac)? + von_neumann(&bc)? - von_neumann(&c)? - von_neumann(rho)?)
}

/// D_max(ρ‖σ) = log λ_max(σ^{−1/2} ρ σ^{−1/2}). The certificate projects
/// onto the maximizing eigenvector.
pub fn dmax(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<EntropyResult> {
    same_dims(rho, sigma)?;
    if weight_outside_support(rho, sigma)? > SUPPORT_TOL {
        return Ok(EntropyResult::plain(Bits::Infinite));
    }
    let s = matrix_function(sigma, MatrixFunction::InvSqrtOnSupport)?;
    let gamma = s.matmul(rho).matmul(&s).hermitian_part();
    let e = eig_hermitian(&gamma)?;
    let top = e.max();
    if !(top > 0.0) {
        return Err(Error::Numeric("D_max of a zero operator".into()));
    }
    let v = e.vector(e.dim() - 1);
    Ok(EntropyResult {
        value: Bits::Finite(top.log2()),
        certificate: Some((CertificateKind::WitnessProjector, ComplexMatrix::outer(&v))),
        solver: None,
    })
}

/// D̃_{1/2}(ρ‖σ) = −2 log F(ρ,σ).
pub fn d_half(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<Bits> {
    let f = fidelity(rho, sigma)?;
    if f <= FIDELITY_ZERO {
        return Ok(Bits::Infinite);
    }
    Ok(Bits::Finite(-2.0 * f.min(1.0).log2()))
}
