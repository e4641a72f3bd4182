use super::eigen::{eig_hermitian, EigenDecomposition};
use super::matrix::{inner, vec_norm, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Eigenvalues below this multiple of λ_max count as exact zeros.
pub const SUPPORT_REL_CUTOFF: f64 = 1e-10;

/// Negative eigenvalues down to −CLIP_TOL·max(1, λ_max) are clipped to zero.
pub const CLIP_TOL: f64 = 1e-10;

/// Spectral function applied by [`matrix_function`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFunction {
    Sqrt,
    InvSqrtOnSupport,
    Log2OnSupport,
}

/// Support threshold for a spectrum with largest eigenvalue `lmax`.
pub fn support_cutoff(lmax: f64) -> f64 {
    SUPPORT_REL_CUTOFF * lmax.max(0.0)
}

fn check_psd(e: &EigenDecomposition) -> Result<()> {
    let lmin = e.min();
    if lmin < -CLIP_TOL * e.max().max(1.0) {
        return Err(Error::NotPsd(lmin));
    }
    Ok(())
}

/// Apply `f` to the on-support eigenvalues of a PSD matrix; off-support
/// eigenvalues map to zero.
pub fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let e = eig_hermitian(m)?;
    check_psd(&e)?;
    let cut = support_cutoff(e.max());
    Ok(e.rebuild(|l| if l > cut { f(l) } else { 0.0 }))
}

pub fn matrix_function(m: &ComplexMatrix, f: MatrixFunction) -> Result<ComplexMatrix> {
    match f {
        MatrixFunction::Sqrt => spectral_map(m, f64::sqrt),
        MatrixFunction::InvSqrtOnSupport => spectral_map(m, |l| 1.0 / l.sqrt()),
        MatrixFunction::Log2OnSupport => spectral_map(m, f64::log2),
    }
}

/// Orthogonal projector onto the support of a PSD matrix.
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    spectral_map(m, |_| 1.0)
}

/// Decide a ⪯ b. The witness is λ_min(b − a); the answer is witness ≥ −slack.
pub fn operator_leq(a: &ComplexMatrix, b: &ComplexMatrix, slack: f64) -> Result<(bool, f64)> {
    let e = eig_hermitian(&(b - a))?;
    let w = e.min();
    Ok((w >= -slack, w))
}

/// Singular value decomposition m = u·diag(s)·v†.
#[derive(Clone, Debug)]
pub struct Svd {
    /// rows × rows unitary.
    pub u: ComplexMatrix,
    /// min(rows, cols) values, descending.
    pub s: Vec<f64>,
    /// cols × cols unitary.
    pub v: ComplexMatrix,
}

impl Svd {
    /// Σ s_i u_i v_i†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (r, c) = (self.u.rows(), self.v.rows());
        let mut out = ComplexMatrix::zeros(r, c);
        for (k, &s) in self.s.iter().enumerate() {
            let uk = self.u.column(k);
            let vk = self.v.column(k);
            for i in 0..r {
                let ui = uk[i] * s;
                for j in 0..c {
                    out[(i, j)] += ui * vk[j].conj();
                }
            }
        }
        out
    }
}

/// SVD through the eigendecomposition of m†m. Singular values are taken as
/// ‖m·v_i‖ rather than √λ_i, which keeps small ones accurate; left vectors
/// are orthonormalized images m·v_i, completed to a basis where m has
/// no range.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let (r, c) = (m.rows(), m.cols());
    let gram = m.adjoint().matmul(m);
    let e = eig_hermitian(&gram)?;
    // descending order
    let order: Vec<usize> = (0..c).rev().collect();
    let mut v = ComplexMatrix::zeros(c, c);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &e.vector(src));
    }
    let k = r.min(c);
    let mut images: Vec<Vec<C64>> = (0..k).map(|i| m.mul_vec(&v.column(i))).collect();
    let mut s: Vec<f64> = images.iter().map(|w| vec_norm(w)).collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(r);
    let mut missing = Vec::new();
    for (i, w) in images.iter_mut().enumerate() {
        for b in &basis {
            let proj = inner(b, w);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= proj * y;
            }
        }
        let nrm = vec_norm(w);
        if smax > 0.0 && nrm > 1e-12 * smax {
            basis.push(w.iter().map(|z| z / nrm).collect());
        } else {
            missing.push(i);
            basis.push(Vec::new());
        }
    }
    let filled: Vec<Vec<C64>> = basis.iter().filter(|b| !b.is_empty()).cloned().collect();
    let completion = complete_orthonormal(&filled, r);
    let mut extra = completion.into_iter();
    let mut u = ComplexMatrix::zeros(r, r);
    for (i, b) in basis.iter().enumerate() {
        if b.is_empty() {
            let col = extra.next().expect("completion has enough vectors");
            u.set_column(i, &col);
        } else {
            u.set_column(i, b);
        }
    }
    for i in k..r {
        let col = extra.next().expect("completion has enough vectors");
        u.set_column(i, &col);
    }
    // Values dropped from the basis still contribute their tiny norm to s;
    // sort again since ‖m v_i‖ can reorder within rounding.
    for &i in &missing {
        s[i] = s[i].max(0.0);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    if idx.iter().enumerate().any(|(p, &i)| p != i) {
        let (mut u2, mut v2) = (u.clone(), v.clone());
        for (p, &i) in idx.iter().enumerate() {
            u2.set_column(p, &u.column(i));
            v2.set_column(p, &v.column(i));
        }
        s = idx.iter().map(|&i| s[i]).collect();
        u = u2;
        v = v2;
    }
    Ok(Svd { u, s, v })
}

/// Trace norm ‖m‖₁ as the sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(svd(m)?.s.iter().sum())
}

/// Orthonormal vectors spanning the complement of `basis` in C^dim, built by
/// Gram–Schmidt over the standard basis.
pub fn complete_orthonormal(basis: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    extend_orthonormal(basis, dim, dim.saturating_sub(basis.len()))
}

/// Up to `count` orthonormal vectors orthogonal to `basis` in C^dim.
pub fn extend_orthonormal(basis: &[Vec<C64>], dim: usize, count: usize) -> Vec<Vec<C64>> {
    let mut all: Vec<Vec<C64>> = basis.to_vec();
    let mut out = Vec::new();
    for e in 0..dim {
        if all.len() >= dim || out.len() >= count {
            break;
        }
        let mut w = vec![ZERO; dim];
        w[e] = C64::new(1.0, 0.0);
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &all {
                let proj = inner(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = vec_norm(&w);
        if nrm > 1e-6 {
            let w: Vec<C64> = w.iter().map(|z| z / nrm).collect();
            all.push(w.clone());
            out.push(w);
        }
    }
    out
}

/// Lower-triangular L with m = L·L†, or `None` if m is not numerically
/// positive definite.
pub fn cholesky(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / djj;
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, random_psd, seeded_rng};

    #[test]
    fn svd_of_identity() {
        let r = svd(&ComplexMatrix::identity(4)).unwrap();
        assert!(r.s.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn svd_of_signed_diagonal() {
        let r = svd(&ComplexMatrix::from_real_diag(&[3.0, -4.0])).unwrap();
        assert!((r.s[0] - 4.0).abs() < 1e-14);
        assert!((r.s[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_and_matches_eig_route() {
        let mut rng = seeded_rng(31);
        for _ in 0..200 {
            let m = random_matrix(&mut rng, 3, 3);
            let r = svd(&m).unwrap();
            assert!(r.reconstruct().max_abs_diff(&m) <= 1e-9 * m.max_abs());
            assert!(super::super::eigen::unitarity_defect(&r.u) < 1e-10);
            assert!(super::super::eigen::unitarity_defect(&r.v) < 1e-10);
            let via_eig: f64 = matrix_function(&m.adjoint().matmul(&m), MatrixFunction::Sqrt)
                .unwrap()
                .trace_re();
            let sum: f64 = r.s.iter().sum();
            assert!((via_eig - sum).abs() < 1e-8);
        }
    }

    #[test]
    fn svd_of_rank_deficient_and_rectangular() {
        let mut rng = seeded_rng(4);
        let a = random_matrix(&mut rng, 4, 1);
        let b = random_matrix(&mut rng, 1, 3);
        let m = a.matmul(&b);
        let r = svd(&m).unwrap();
        assert!(r.s[1] < 1e-12 && r.s[2] < 1e-12);
        assert!(r.reconstruct().max_abs_diff(&m) <= 1e-9 * m.max_abs());
        assert!(super::super::eigen::unitarity_defect(&r.u) < 1e-10);
        let wide = random_matrix(&mut rng, 2, 5);
        let rw = svd(&wide).unwrap();
        assert_eq!(rw.s.len(), 2);
        assert!(rw.reconstruct().max_abs_diff(&wide) <= 1e-9 * wide.max_abs());
    }

    #[test]
    fn spectral_functions() {
        let s = matrix_function(
            &ComplexMatrix::from_real_diag(&[4.0, 9.0]),
            MatrixFunction::Sqrt,
        )
        .unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_real_diag(&[2.0, 3.0])) < 1e-14);
        let p = matrix_function(
            &ComplexMatrix::from_real_diag(&[1.0, 0.0]),
            MatrixFunction::InvSqrtOnSupport,
        )
        .unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0])) < 1e-14);
        let l = matrix_function(
            &ComplexMatrix::from_real_diag(&[2.0, 4.0]),
            MatrixFunction::Log2OnSupport,
        )
        .unwrap();
        assert!(l.max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 2.0])) < 1e-14);
    }

    #[test]
    fn negative_input_is_rejected() {
        let m = ComplexMatrix::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(
            matrix_function(&m, MatrixFunction::Sqrt),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = seeded_rng(77);
        for n in 2..10 {
            let m = random_psd(&mut rng, n);
            let r = matrix_function(&m, MatrixFunction::Sqrt).unwrap();
            assert!(r.matmul(&r).max_abs_diff(&m) <= 1e-8 * m.max_abs());
        }
    }

    #[test]
    fn loewner_order_examples() {
        let i = ComplexMatrix::identity(2);
        let z = ComplexMatrix::zeros(2, 2);
        let (ok, w) = operator_leq(&z, &i, 0.0).unwrap();
        assert!(ok && (w - 1.0).abs() < 1e-15);
        let (ok, w) = operator_leq(&i, &i.scale(0.5), 0.0).unwrap();
        assert!(!ok && (w + 0.5).abs() < 1e-15);
    }

    #[test]
    fn cholesky_factorizes_positive_definite() {
        let mut rng = seeded_rng(12);
        let m = &random_psd(&mut rng, 5) + &ComplexMatrix::identity(5).scale(0.1);
        let l = cholesky(&m).unwrap();
        assert!(l.matmul(&l.adjoint()).max_abs_diff(&m) < 1e-12);
        assert!(cholesky(&ComplexMatrix::from_real_diag(&[1.0, -1.0])).is_none());
    }
}
