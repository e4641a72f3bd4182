use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{Bits, CertificateKind, EntropyResult, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, eig_hermitian, matrix_function, partial_trace, support_cutoff, tensor, ComplexMatrix,
    MatrixFunction, C64, ZERO,
};
use crate::states::{purify_with_label, QuantumState, RegisterLayout};

/// Settings for the barrier solver behind [`min_trace_dominating`].
#[derive(Clone, Debug)]
pub struct BarrierOptions {
    /// Cap on Newton steps, summed over all centering rounds.
    pub max_iterations: usize,
    /// Target relative gap between the primal value and the certified dual bound.
    pub rel_gap: f64,
    /// Barrier parameter growth per round.
    pub mu: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            max_iterations: 500,
            rel_gap: 1e-10,
            mu: 10.0,
        }
    }
}

/// Gaps up to this are still accepted when the iteration cap is hit.
const ACCEPTABLE_GAP: f64 = 1e-6;

/// Solution of min Tr X subject to I_A ⊗ X ⪰ M.
#[derive(Clone, Debug)]
pub struct TraceSdp {
    pub x: ComplexMatrix,
    /// Tr X at the returned (strictly feasible) point.
    pub primal: f64,
    /// Certified lower bound Tr(M·Y) from a dual-feasible Y.
    pub dual: f64,
    pub iterations: usize,
    /// (primal − dual)/primal.
    pub rel_gap: f64,
    /// λ_min(I ⊗ X − M); nonnegative for a feasible point.
    pub slack_min_eig: f64,
}

/// Real coordinates for Hermitian d×d matrices: diagonal entries first, then
/// (Re, Im) of each upper off-diagonal entry.
struct HermitianBasis {
    d: usize,
    /// For each coordinate, its nonzero entries (row, col, value).
    terms: Vec<Vec<(usize, usize, C64)>>,
}

impl HermitianBasis {
    fn new(d: usize) -> Self {
        let mut terms = Vec::with_capacity(d * d);
        for i in 0..d {
            terms.push(vec![(i, i, C64::new(1.0, 0.0))]);
        }
        for i in 0..d {
            for j in i + 1..d {
                terms.push(vec![(i, j, C64::new(1.0, 0.0)), (j, i, C64::new(1.0, 0.0))]);
                terms.push(vec![
                    (i, j, C64::new(0.0, 1.0)),
                    (j, i, C64::new(0.0, -1.0)),
                ]);
            }
        }
        HermitianBasis { d, terms }
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn matrix(&self, x: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.d, self.d);
        for (coef, t) in x.iter().zip(&self.terms) {
            for &(i, j, v) in t {
                m[(i, j)] += v * *coef;
            }
        }
        m
    }

    fn coords(&self, m: &ComplexMatrix) -> Vec<f64> {
        let d = self.d;
        let mut x = Vec::with_capacity(d * d);
        for i in 0..d {
            x.push(m[(i, i)].re);
        }
        for i in 0..d {
            for j in i + 1..d {
                x.push(m[(i, j)].re);
                x.push(m[(i, j)].im);
            }
        }
        x
    }

    /// Tr(E_k·G) for every coordinate.
    fn pair(&self, g: &ComplexMatrix) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| t.iter().map(|&(i, j, v)| (v * g[(j, i)]).re).sum())
            .collect()
    }
}

/// (S⁻¹, log det S) through a checked Cholesky factorization, or `None` when
/// S is not numerically positive definite.
fn inverse_and_logdet(s: &ComplexMatrix) -> Option<(ComplexMatrix, f64)> {
    let n = s.rows();
    let l = cholesky(s)?;
    let mut logdet = 0.0;
    for i in 0..n {
        logdet += 2.0 * l[(i, i)].re.ln();
    }
    // L⁻¹ by forward substitution, then S⁻¹ = L⁻† L⁻¹.
    let mut linv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        linv[(j, j)] = C64::new(1.0 / l[(j, j)].re, 0.0);
        for i in j + 1..n {
            let mut acc = ZERO;
            for k in j..i {
                acc += l[(i, k)] * linv[(k, j)];
            }
            linv[(i, j)] = -acc / l[(i, i)].re;
        }
    }
    let inv = linv.adjoint().matmul(&linv);
    if !inv
        .data()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        return None;
    }
    Some((inv.hermitian_part(), logdet))
}

fn slack_matrix(m: &ComplexMatrix, x: &ComplexMatrix, da: usize) -> ComplexMatrix {
    let ix = tensor(&ComplexMatrix::identity(da), x).expect("slack dimension within cap");
    &ix - m
}

/// Blocks B_{αβ} of a (da·db)-dimensional matrix, indexed [α·da + β].
fn blocks(s: &ComplexMatrix, da: usize, db: usize) -> Vec<Vec<C64>> {
    let n = da * db;
    let mut out = vec![vec![ZERO; db * db]; da * da];
    for a in 0..da {
        for b in 0..da {
            let blk = &mut out[a * da + b];
            for i in 0..db {
                for j in 0..db {
                    blk[i * db + j] = s.data()[(a * db + i) * n + b * db + j];
                }
            }
        }
    }
    out
}

/// Hessian of −log det(I⊗X − M) in the Hermitian basis:
/// H_kl = Σ_{αβ} Tr(B_{αβ} E_k B_{βα} E_l), with B the blocks of S⁻¹.
fn barrier_hessian(
    sinv: &ComplexMatrix,
    da: usize,
    db: usize,
    basis: &HermitianBasis,
) -> DMatrix<f64> {
    let blk = blocks(sinv, da, db);
    // K[s,p,q,r] = Σ_{αβ} B_{αβ}[s,p]·B_{βα}[q,r]
    let d2 = db * db;
    let mut k = vec![ZERO; d2 * d2];
    for a in 0..da {
        for b in 0..da {
            let bab = &blk[a * da + b];
            let bba = &blk[b * da + a];
            for sp in 0..d2 {
                let x = bab[sp];
                let row = &mut k[sp * d2..(sp + 1) * d2];
                for (o, &y) in row.iter_mut().zip(bba.iter()) {
                    *o += x * y;
                }
            }
        }
    }
    let p = basis.len();
    let mut h = DMatrix::<f64>::zeros(p, p);
    for (kk, tk) in basis.terms.iter().enumerate() {
        for (ll, tl) in basis.terms.iter().enumerate().skip(kk) {
            let mut acc = ZERO;
            for &(pp, q, ck) in tk {
                for &(r, s, cl) in tl {
                    acc += ck * cl * k[(s * db + pp) * d2 + q * db + r];
                }
            }
            h[(kk, ll)] = acc.re;
            h[(ll, kk)] = acc.re;
        }
    }
    h
}

fn solve_newton(h: &DMatrix<f64>, g: &[f64]) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_iterator(g.len(), g.iter().map(|v| -v));
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(&rhs).iter().copied().collect());
    }
    let lu = h.clone().lu();
    lu.solve(&rhs).map(|v| v.iter().copied().collect())
}

/// Certified dual value: rescale Y = S⁻¹/t to satisfy Tr_A Y = I exactly.
fn dual_bound(
    m: &ComplexMatrix,
    sinv: &ComplexMatrix,
    t: f64,
    da: usize,
    db: usize,
) -> Result<f64> {
    let y = sinv.scale(1.0 / t);
    let ty = partial_trace(&y, &[da, db], &[1])?;
    let w = matrix_function(&ty, MatrixFunction::InvSqrtOnSupport)?;
    let iw = tensor(&ComplexMatrix::identity(da), &w)?;
    let yp = iw.matmul(&y).matmul(&iw);
    Ok(m.trace_product(&yp).re)
}

/// min Tr X subject to I_A ⊗ X ⪰ M, for M on A ⊗ B (A the major index).
///
/// Log-det barrier with Newton centering in the real coordinates of X and
/// geometric growth of the barrier weight. Every reported point is strictly
/// feasible, and the lower bound comes from an explicitly constructed dual
/// feasible point, so [dual, primal] always brackets the optimum.
pub fn min_trace_dominating(
    m: &ComplexMatrix,
    da: usize,
    db: usize,
    opts: &BarrierOptions,
) -> Result<TraceSdp> {
    let n = da * db;
    if m.rows() != n || !m.is_square() {
        return Err(Error::Dimension(format!(
            "operator is {}x{} but the factors are {da}x{db}",
            m.rows(),
            m.cols()
        )));
    }
    let m = m.hermitian_part();
    let lmax = eig_hermitian(&m)?.max();
    if !(lmax > 0.0) {
        return Ok(TraceSdp {
            x: ComplexMatrix::zeros(db, db),
            primal: 0.0,
            dual: 0.0,
            iterations: 0,
            rel_gap: 0.0,
            slack_min_eig: 0.0,
        });
    }
    let basis = HermitianBasis::new(db);
    let mut x = basis.coords(&ComplexMatrix::identity(db).scale(2.0 * lmax));
    let trace_of = |x: &[f64]| -> f64 { x[..db].iter().sum() };
    let unit_trace: Vec<f64> = (0..basis.len())
        .map(|k| if k < db { 1.0 } else { 0.0 })
        .collect();
    let mut t = n as f64 / trace_of(&x);
    let mut iterations = 0usize;
    let mut best: Option<(f64, f64)> = None;

    loop {
        // Centering by damped Newton.
        loop {
            let xm = basis.matrix(&x);
            let s = slack_matrix(&m, &xm, da);
            let (sinv, logdet) = inverse_and_logdet(&s)
                .ok_or_else(|| Error::Numeric("barrier iterate left the feasible region".into()))?;
            let tmat = partial_trace(&sinv, &[da, db], &[1])?;
            let pairs = basis.pair(&tmat);
            let g: Vec<f64> = unit_trace
                .iter()
                .zip(&pairs)
                .map(|(u, p)| t * u - p)
                .collect();
            let h = barrier_hessian(&sinv, da, db, &basis);
            let step = solve_newton(&h, &g)
                .ok_or_else(|| Error::Numeric("singular Newton system".into()))?;
            let decrement: f64 = -g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if decrement / 2.0 <= 1e-11 {
                break;
            }
            if iterations >= opts.max_iterations {
                break;
            }
            iterations += 1;
            let f0 = t * trace_of(&x) - logdet;
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + alpha * d).collect();
                let st = slack_matrix(&m, &basis.matrix(&trial), da);
                if let Some((_, ld)) = inverse_and_logdet(&st) {
                    let f1 = t * trace_of(&trial) - ld;
                    if f1 <= f0 - 0.25 * alpha * decrement {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }

        let xm = basis.matrix(&x);
        let s = slack_matrix(&m, &xm, da);
        let (sinv, _) = inverse_and_logdet(&s)
            .ok_or_else(|| Error::Numeric("barrier iterate left the feasible region".into()))?;
        let primal = trace_of(&x);
        let dual = dual_bound(&m, &sinv, t, da, db)?;
        let gap = (primal - dual) / primal.abs().max(1e-300);
        if best.is_none_or(|(_, bg)| gap < bg) {
            best = Some((primal, gap));
        }
        if gap <= opts.rel_gap || iterations >= opts.max_iterations {
            if gap > ACCEPTABLE_GAP {
                return Err(Error::Convergence {
                    iterations,
                    detail: format!("relative duality gap {gap:e} after the iteration cap"),
                    best_bound: Some(primal),
                });
            }
            let slack_min_eig = eig_hermitian(&s)?.min();
            return Ok(TraceSdp {
                x: xm,
                primal,
                dual,
                iterations,
                rel_gap: gap.max(0.0),
                slack_min_eig,
            });
        }
        // Once the barrier gap n/t is far below the target, further growth
        // only hurts conditioning.
        t *= opts.mu;
        if (n as f64 / t) < 1e-3 * opts.rel_gap * primal {
            t = n as f64 / (1e-3 * opts.rel_gap * primal);
        }
    }
}

fn sdp_report(sol: &TraceSdp) -> SolverReport {
    let mut extras = BTreeMap::new();
    extras.insert("primal".to_string(), sol.primal);
    extras.insert("dual".to_string(), sol.dual);
    SolverReport {
        iterations: sol.iterations,
        gap: sol.rel_gap,
        residual: (-sol.slack_min_eig).max(0.0),
        extras,
    }
}

/// H_min(A|B)_ρ = −log min{Tr X : I_A ⊗ X ⪰ ρ_AB}. The certificate is the
/// optimal marginal σ_B = X/Tr X.
pub fn hmin_cond(rho_ab: &ComplexMatrix, da: usize, db: usize) -> Result<EntropyResult> {
    let sol = min_trace_dominating(rho_ab, da, db, &BarrierOptions::default())?;
    if !(sol.primal > 0.0) {
        return Err(Error::Input(
            "conditional min-entropy of a zero operator".into(),
        ));
    }
    Ok(EntropyResult {
        value: Bits::Finite(-sol.primal.log2()),
        certificate: Some((CertificateKind::Marginal, sol.x.scale(1.0 / sol.primal))),
        solver: Some(sdp_report(&sol)),
    })
}

/// H_max(A|B)_ρ through purification duality: −H_min(A|E) with E purifying AB.
/// The certificate is the purification (as a column).
pub fn hmax_cond(rho_ab: &ComplexMatrix, da: usize, db: usize) -> Result<EntropyResult> {
    let layout = RegisterLayout::new([("A", da), ("B", db)])?;
    let state = QuantumState::new(layout, rho_ab.clone())?;
    let psi = purify_with_label(&state, "E")?;
    let de = psi.layout().dim_of("E")?;
    let rho_ae = psi.marginal(&["A", "E"])?;
    let inner = hmin_cond(rho_ae.matrix(), da, de)?;
    let value = Bits::Finite(-inner.value.expect_finite("conditional min-entropy"));
    Ok(EntropyResult {
        value,
        certificate: Some((
            CertificateKind::Purification,
            ComplexMatrix::column_from(psi.amplitudes()),
        )),
        solver: inner.solver,
    })
}

/// I_max(A:B)_ρ = min over σ_B of D_max(ρ_AB ‖ ρ_A ⊗ σ_B), solved as the
/// trace program after conjugating by ρ_A^{−1/2} on its support.
pub fn imax(rho_ab: &ComplexMatrix, da: usize, db: usize) -> Result<EntropyResult> {
    let rho_a = partial_trace(rho_ab, &[da, db], &[0])?;
    let e = eig_hermitian(&rho_a)?;
    let cut = support_cutoff(e.max());
    let support: Vec<usize> = (0..da).filter(|&i| e.eigenvalues[i] > cut).collect();
    let r = support.len();
    // F = R^{−1/2} W† (r × da), with W the support eigenvectors.
    let mut f = ComplexMatrix::zeros(r, da);
    for (row, &i) in support.iter().enumerate() {
        let v = e.vector(i);
        let w = 1.0 / e.eigenvalues[i].sqrt();
        for (col, z) in v.iter().enumerate() {
            f[(row, col)] = z.conj() * w;
        }
    }
    let fb = tensor(&f, &ComplexMatrix::identity(db))?;
    let mprime = fb.matmul(rho_ab).matmul(&fb.adjoint()).hermitian_part();
    let sol = min_trace_dominating(&mprime, r, db, &BarrierOptions::default())?;
    Ok(EntropyResult {
        value: Bits::Finite(sol.primal.log2()),
        certificate: Some((CertificateKind::Marginal, sol.x.scale(1.0 / sol.primal))),
        solver: Some(sdp_report(&sol)),
    })
}
