use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Largest entrywise Hermitian defect accepted by the eigensolver. Inputs are
/// symmetrized before diagonalization.
pub const HERMITIAN_TOL: f64 = 1e-9;

const JACOBI_MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 60;

/// Spectral decomposition M = V·diag(λ)·V† of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// V·diag(f(λ))·V†.
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let col = v.column(k);
            for i in 0..n {
                let vi = col[i] * w;
                if vi.re == 0.0 && vi.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vi * col[j].conj();
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Cyclic Jacobi with a fixed sweep order up to dimension 64, so results are
/// reproducible bit for bit; larger inputs go through nalgebra.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::Contract(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermitian_defect();
    if !(defect <= HERMITIAN_TOL * scale) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let h = m.hermitian_part();
    let (vals, mut vecs) = if h.rows() <= JACOBI_MAX_DIM {
        jacobi(&h)?
    } else {
        dense_fallback(&h)
    };
    let n = h.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let eigenvalues = order.iter().map(|&i| vals[i]).collect();
    let mut sorted = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vecs.column(src);
        fix_phase(&mut col);
        sorted.set_column(dst, &col);
    }
    vecs = sorted;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vecs,
    })
}

/// Rotate the vector so its largest-magnitude entry is real and positive.
/// The first entry within a relative 1e-12 of the maximum wins ties.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let fro = h.frobenius_norm();
    if fro == 0.0 || n == 1 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok((vals, v));
    }
    let target = 1e-15 * fro;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence {
                iterations: sweeps,
                detail: format!("Jacobi off-diagonal norm {off:e} after {sweeps} sweeps"),
                best_bound: None,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * fro {
                    if mag != 0.0 {
                        a[(p, q)] = ZERO;
                        a[(q, p)] = ZERO;
                    }
                    continue;
                }
                rotated = true;
                let e = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ec = e.conj();
                // A ← A·J with J = [[c, s], [−s ē, c ē]] on columns p, q.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * ec * s;
                    a[(k, q)] = akp * s + akq * ec * c;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * ec * s;
                    v[(k, q)] = vkp * s + vkq * ec * c;
                }
                // A ← J†·A on rows p, q.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * e * s;
                    a[(q, k)] = apk * s + aqk * e * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(app - t * mag, 0.0);
                a[(q, q)] = C64::new(aqq + t * mag, 0.0);
            }
        }
        if !rotated {
            break;
        }
    }
    let vals = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((vals, v))
}

fn dense_fallback(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.rows();
    let dm = DMatrix::<C64>::from_fn(n, n, |i, j| h[(i, j)]);
    let eig = SymmetricEigen::new(dm);
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, j)]);
    (vals, vecs)
}

/// V†V − I, largest entry.
#[cfg(test)]
pub(crate) fn unitarity_defect(v: &ComplexMatrix) -> f64 {
    let g = v.adjoint().matmul(v);
    let n = g.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { super::matrix::ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}
