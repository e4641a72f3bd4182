//! Seeded random generators for matrices and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{eig_hermitian, vec_norm, ComplexMatrix, C64};

pub type SeededRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        let n = vec_norm(&v);
        if n > 1e-8 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    random_matrix(rng, dim, dim).hermitian_part()
}

/// G·G† for a square Gaussian G.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    g.matmul(&g.adjoint()).hermitian_part()
}

/// Ginibre density matrix G·G†/Tr(G·G†).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let p = random_psd(rng, dim);
    let t = p.trace_re();
    p.scale(1.0 / t)
}

/// Haar-random unitary via Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut w = g.column(j);
        for _ in 0..2 {
            for c in &cols {
                let p: C64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in w.iter_mut().zip(c) {
                    *x -= p * y;
                }
            }
        }
        let n = vec_norm(&w);
        cols.push(w.into_iter().map(|z| z / n).collect());
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        u.set_column(j, c);
    }
    u
}

/// Random operator with 0 ⪯ S ⪯ I: random eigenbasis, eigenvalues uniform
/// in [0,1], with some pinned to exactly 0 or 1 to exercise projector edges.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let u = random_unitary(rng, dim);
    let vals: Vec<f64> = (0..dim)
        .map(|_| match rng.random_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        })
        .collect();
    u.matmul(&ComplexMatrix::from_real_diag(&vals))
        .matmul(&u.adjoint())
        .hermitian_part()
}

/// Random density matrix of the given rank.
pub fn random_density_rank<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, rank.max(1));
    let p = g.matmul(&g.adjoint()).hermitian_part();
    let t = p.trace_re();
    p.scale(1.0 / t)
}

/// Random probability vector (flat Dirichlet).
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Smallest eigenvalue; convenience for tests and checks.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eig_hermitian(m).map(|e| e.min()).unwrap_or(f64::NAN)
}
