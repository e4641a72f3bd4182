//! Dense complex linear algebra used throughout the crate.

mod eigen;
mod functions;
mod matrix;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

pub use eigen::{eig_hermitian, EigenDecomposition, HERMITIAN_TOL};
pub use functions::{
    cholesky, complete_orthonormal, extend_orthonormal, matrix_function, operator_leq,
    spectral_map, support_cutoff, support_projector, svd, trace_norm, MatrixFunction, Svd,
    CLIP_TOL, SUPPORT_REL_CUTOFF,
};
pub(crate) use matrix::{gemm_into, ZERO};
pub use matrix::{inner, kron_vec, vec_norm, ComplexMatrix, C64};

use crate::error::{Error, Result};

/// Default upper bound on any carrier dimension (matrix side or vector length).
pub const DEFAULT_DIM_CAP: usize = 65_536;

static CAP_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Replace the process-wide dimension cap; 0 restores the environment value.
pub fn set_dim_cap(cap: usize) {
    CAP_OVERRIDE.store(cap, Ordering::SeqCst);
}

/// Process-wide dimension cap: the value from [`set_dim_cap`] if any,
/// otherwise `QSRLAB_DIM_CAP` read once, otherwise [`DEFAULT_DIM_CAP`].
pub fn dim_cap() -> usize {
    if let Some(c) = SCOPED_CAP.with(|c| c.get()) {
        return c;
    }
    let o = CAP_OVERRIDE.load(Ordering::SeqCst);
    if o > 0 {
        return o;
    }
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("QSRLAB_DIM_CAP")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

thread_local! {
    static SCOPED_CAP: std::cell::Cell<Option<usize>> = const { std::cell::Cell::new(None) };
}

/// Run `f` with the cap on this thread temporarily set to `cap`.
pub(crate) fn with_scoped_cap<T>(cap: usize, f: impl FnOnce() -> T) -> T {
    let prev = SCOPED_CAP.with(|c| c.replace(Some(cap)));
    struct Restore(Option<usize>);
    impl Drop for Restore {
        fn drop(&mut self) {
            SCOPED_CAP.with(|c| c.set(self.0));
        }
    }
    let _guard = Restore(prev);
    f()
}

/// Product of factor dimensions, failing if it exceeds `cap`.
pub fn checked_dim_product(dims: &[usize], cap: usize, what: &str) -> Result<usize> {
    let mut total: u128 = 1;
    for &d in dims {
        total = total.saturating_mul(d as u128);
    }
    if total > cap as u128 {
        return Err(Error::DimensionCap {
            what: what.to_string(),
            required: total,
            cap,
        });
    }
    Ok(total as usize)
}

/// Kronecker product, with `a`'s index major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let cap = dim_cap();
    let rows = checked_dim_product(&[a.rows(), b.rows()], cap, "tensor product")?;
    let cols = checked_dim_product(&[a.cols(), b.cols()], cap, "tensor product")?;
    let mut out = ComplexMatrix::zeros(rows, cols);
    let (br, bc) = (b.rows(), b.cols());
    let data = out.data_mut();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..br {
                let row = (i * br + k) * cols + j * bc;
                for l in 0..bc {
                    data[row + l] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a list of matrices, left to right.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = tensor(&acc, f)?;
    }
    Ok(acc)
}

/// Offsets into a flat index for every multi-index over `subset`, in
/// row-major order of the subset (first listed factor most significant).
fn subset_offsets(dims: &[usize], subset: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut offsets = vec![0usize];
    for &f in subset {
        let mut next = Vec::with_capacity(offsets.len() * dims[f]);
        for &o in &offsets {
            for x in 0..dims[f] {
                next.push(o + x * strides[f]);
            }
        }
        offsets = next;
    }
    offsets
}

fn validate_keep(dims: &[usize], total: usize, keep: &[usize]) -> Result<Vec<usize>> {
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::Dimension(format!(
            "factor dims {dims:?} multiply to {product}, carrier has dimension {total}"
        )));
    }
    let mut seen = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || seen[k] {
            return Err(Error::Dimension(format!(
                "invalid keep list {keep:?} for {} factors",
                dims.len()
            )));
        }
        seen[k] = true;
    }
    Ok((0..dims.len()).filter(|i| !seen[*i]).collect())
}

/// Trace out every factor not in `keep`. Kept factors appear in the order
/// given by `keep`, so this can also reorder.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "partial trace of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let traced = validate_keep(dims, m.rows(), keep)?;
    let ko = subset_offsets(dims, keep);
    let to = subset_offsets(dims, &traced);
    let n = m.rows();
    let data = m.data();
    let k = ko.len();
    let mut out = ComplexMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = ZERO;
            for &t in &to {
                acc += data[(ko[a] + t) * n + ko[b] + t];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density operator of the pure vector `psi` on the kept factors.
pub fn reduced_from_vector(psi: &[C64], dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let traced = validate_keep(dims, psi.len(), keep)?;
    let ko = subset_offsets(dims, keep);
    let to = subset_offsets(dims, &traced);
    let k = ko.len();
    let t = to.len();
    // Gather psi into a k×t block so the marginal is block · block†.
    let mut block = vec![ZERO; k * t];
    for (a, &oa) in ko.iter().enumerate() {
        for (j, &oj) in to.iter().enumerate() {
            block[a * t + j] = psi[oa + oj];
        }
    }
    let mut out = ComplexMatrix::zeros(k, k);
    for a in 0..k {
        let ra = &block[a * t..(a + 1) * t];
        if ra.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            continue;
        }
        for b in a..k {
            let rb = &block[b * t..(b + 1) * t];
            let v: C64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
            out[(a, b)] = v;
            out[(b, a)] = v.conj();
        }
    }
    Ok(out)
}

/// Reorder tensor factors of a vector: output factor `i` is input factor `perm[i]`.
pub fn permute_vector(psi: &[C64], dims: &[usize], perm: &[usize]) -> Result<Vec<C64>> {
    let traced = validate_keep(dims, psi.len(), perm)?;
    if !traced.is_empty() {
        return Err(Error::Dimension(format!(
            "permutation {perm:?} does not cover all {} factors",
            dims.len()
        )));
    }
    let offs = subset_offsets(dims, perm);
    Ok(offs.iter().map(|&o| psi[o]).collect())
}

/// Reorder tensor factors of an operator: output factor `i` is input factor `perm[i]`.
pub fn permute_matrix(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    let traced = validate_keep(dims, m.rows(), perm)?;
    if !traced.is_empty() {
        return Err(Error::Dimension(format!(
            "permutation {perm:?} does not cover all {} factors",
            dims.len()
        )));
    }
    let offs = subset_offsets(dims, perm);
    let n = offs.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(offs[i], offs[j])]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, seeded_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn diagonal_kron() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diag(&[3.0, 4.0]);
        let k = tensor(&a, &b).unwrap();
        assert_eq!(k, ComplexMatrix::from_real_diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_trace_factorizes() {
        let mut rng = seeded_rng(11);
        let a = random_hermitian(&mut rng, 3);
        let b = random_hermitian(&mut rng, 3);
        let k = tensor(&a, &b).unwrap();
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn product_state_marginal() {
        let rho = ComplexMatrix::from_real_rows(&[&[0.6, 0.1], &[0.1, 0.4]]);
        let sigma = ComplexMatrix::from_real_diag(&[0.5, 0.25, 0.25]).scale(2.0);
        let m = tensor(&rho, &sigma).unwrap();
        let r = partial_trace(&m, &[2, 3], &[0]).unwrap();
        assert!(r.max_abs_diff(&rho.scale(2.0)) < 1e-14);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let bell = [c(s), c(0.0), c(0.0), c(s)];
        let rho = ComplexMatrix::outer(&bell);
        let r = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        let rv = reduced_from_vector(&bell, &[2, 2], &[1]).unwrap();
        assert!(rv.max_abs_diff(&r) < 1e-15);
    }

    #[test]
    fn sequential_partial_traces_match_full_trace() {
        let mut rng = seeded_rng(5);
        let m = random_hermitian(&mut rng, 12);
        let dims = [2, 3, 2];
        let no_a = partial_trace(&m, &dims, &[1, 2]).unwrap();
        let no_ab = partial_trace(&no_a, &[3, 2], &[1]).unwrap();
        let direct = partial_trace(&m, &dims, &[2]).unwrap();
        assert!(no_ab.max_abs_diff(&direct) < 1e-12);
        let full = partial_trace(&m, &dims, &[]).unwrap();
        assert_eq!(full.rows(), 1);
        assert!((full[(0, 0)] - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 3], &[0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn permutation_round_trip() {
        let mut rng = seeded_rng(3);
        let m = random_hermitian(&mut rng, 12);
        let dims = [2, 3, 2];
        let p = permute_matrix(&m, &dims, &[2, 0, 1]).unwrap();
        let back = permute_matrix(&p, &[2, 2, 3], &[1, 2, 0]).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-15);
        let reordered = partial_trace(&m, &dims, &[2, 0, 1]).unwrap();
        assert!(reordered.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn tensor_respects_cap() {
        let big = ComplexMatrix::zeros(1, 70_000);
        let one = ComplexMatrix::zeros(1, 2);
        assert!(matches!(
            tensor(&big, &one),
            Err(Error::DimensionCap { .. })
        ));
    }
}
